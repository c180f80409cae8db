"""Substructuring solvers for a linearized phase-field time step.

A single implicit time step of the mixed phase-field model is a coupled
elliptic system for the order parameter and the chemical potential.  This
package discretizes that system with centered finite differences, solves it
by Dirichlet--Neumann (two subdomains) or Neumann--Neumann (many subdomains)
iterations in 1D and 2D, and evaluates the closed-form iteration matrices
and convergence bounds those iterations obey, so theory and experiment can
be compared number by number.
"""

from .core import (
    Decomposition,
    Grid1D,
    Grid2D,
    Params,
    PhaseField,
    TraceSet,
    random_traces,
    snap_decomposition,
)
from .theory import (
    BoundSet,
    DNMatrix,
    LemmaReport,
    NNMatrix,
    SymbolSet,
    dn_contraction_bound,
    dn_iteration_matrix,
    dn_rate_exact,
    lemma_checks,
    nn_bounds,
    nn_iteration_matrix,
    symbols,
    vieta_residual,
    characteristic_residual,
)
from .discretization import (
    coupled_system,
    energy,
    laplacian,
    mass,
    step_monodomain,
    trapezoid_weights,
)
from .dn import DNResult, dn_solve, error_norm, reference_solution
from .nn import NNResult, nn_solve
from .harness import (
    ExperimentSpec,
    RunReport,
    SpecError,
    run,
    run_preset,
    sweep,
    table_amplitude,
)

__version__ = "0.1.0"
