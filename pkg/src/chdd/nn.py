"""Many-subdomain Neumann--Neumann iteration for the coupled step.

Each sweep has two half-steps.  The *Dirichlet* half solves every subdomain
with the current trace data (g, h) on its interior faces and the physical
zero-derivative condition on the outer boundary.  The fluxes of those
solutions generally disagree across each interface; the *correction* half
solves the homogeneous system on every subdomain with the flux jumps as
derivative data, after which the traces are relaxed by the mismatch of the
correction traces:

    (g_i, h_i) <- (g_i, h_i) - theta [(phi_i - phi_{i+1}, psi_i - psi_{i+1})]|_i,

phi/psi being the u/v components of the corrections on the two subdomains
meeting at interface i.  Iterate k is the glued Dirichlet-half field of
sweep k (the trace guess is iterate 0); counting follows the same
convention as the two-subdomain driver.
"""

from __future__ import annotations

import numpy as np

from .core import Decomposition, Grid2D, Params, TraceSet, random_traces
from .dn import error_norm, reference_solution
from .subsolve import SubdomainSolver, extract_flux, subdomain_grid, subdomain_indices

__all__ = ["NNResult", "nn_solve"]


class NNResult:
    """Outcome of a Neumann--Neumann run."""

    def __init__(self, u, v, iterations, errors, converged, traces, reference):
        self.u = u
        self.v = v
        self.iterations = iterations
        self.errors = np.asarray(errors)
        self.converged = converged
        self.traces = traces
        self.reference = reference

    def __repr__(self):
        state = "converged" if self.converged else "stalled"
        last = self.errors[-1] if self.errors.size else float("nan")
        return f"NNResult({state} at k={self.iterations}, last error {last:.3e})"


def nn_solve(dec: Decomposition, params: Params, u_n: np.ndarray | None = None, *,
             theta: float = 0.25, tol: float = 1e-6, max_iter: int = 500,
             traces0: TraceSet | None = None, seed: int = 0,
             trace_amplitude: float = 1.0, c_field: np.ndarray | None = None,
             transmission: str = "onesided", norm: str = "abs") -> NNResult:
    """Run the balanced multi-subdomain iteration on one linearized step."""
    N = dec.n_subdomains
    if N < 2:
        raise ValueError("need at least 2 subdomains")
    grid = dec.grid
    is_2d = isinstance(grid, Grid2D)
    ny1 = grid.n_y + 1 if is_2d else 1
    n_total = grid.n_nodes
    u_n = np.zeros(n_total) if u_n is None else np.asarray(u_n, dtype=float).reshape(-1)
    if u_n.size != n_total:
        raise ValueError(f"u_n has {u_n.size} values, grid has {n_total} nodes")
    c = u_n if c_field is None else np.asarray(c_field, dtype=float).reshape(-1)
    if c.size == 1:
        c = np.full(n_total, c[0])
    c_sq = c * c

    ref_u, _ = reference_solution(grid, params, u_n, c_sq)

    idx = [subdomain_indices(dec, i) for i in range(N)]
    grids = [subdomain_grid(dec, i) for i in range(N)]
    u_n_loc = [u_n[ix] for ix in idx]

    def kinds(i, inner):
        left = "physical" if i == 0 else inner
        right = "physical" if i == N - 1 else inner
        return left, right

    dir_solvers, cor_solvers = [], []
    for i in range(N):
        dl, dr = kinds(i, "dirichlet")
        cl, cr = kinds(i, "flux")
        dir_solvers.append(SubdomainSolver(grids[i], params, c_sq[idx[i]], dl, dr,
                                           transmission=transmission))
        cor_solvers.append(SubdomainSolver(grids[i], params, c_sq[idx[i]], cl, cr,
                                           transmission=transmission))

    traces = traces0.copy() if traces0 is not None else random_traces(
        dec, seed=seed, amplitude=trace_amplitude)
    if is_2d:
        g = traces.g.reshape(N - 1, dec.trace_width).copy()
        h = traces.h.reshape(N - 1, dec.trace_width).copy()
    else:
        g = traces.g.reshape(-1).copy()
        h = traces.h.reshape(-1).copy()

    def face_datum(arr, i):
        return arr[i] if is_2d else float(arr[i])

    glued = np.empty(n_total)
    zero_loc = [np.zeros_like(un) for un in u_n_loc]
    errors = []
    converged = False
    iterations = max_iter
    for k in range(1, max_iter + 1):
        # Dirichlet half-step
        fields = []
        for i in range(N):
            ld = None if i == 0 else (face_datum(g, i - 1), face_datum(h, i - 1))
            rd = None if i == N - 1 else (face_datum(g, i), face_datum(h, i))
            fields.append(dir_solvers[i].solve(u_n_loc[i], left_data=ld, right_data=rd))

        glued[idx[0]] = fields[0][0]
        for i in range(1, N):
            glued[idx[i][ny1:]] = fields[i][0][ny1:]
        err = error_norm(glued - ref_u, grid, norm, ref_u)
        errors.append(err)
        if err <= tol:
            iterations, converged = k, True
            break

        # flux jumps across every interface
        ju, jv = [], []
        for i in range(N - 1):
            uL, vL = fields[i]
            uR, vR = fields[i + 1]
            if transmission == "ghost":
                pL, qL = dir_solvers[i].implied_flux(uL, vL, u_n_loc[i], "right")
                pR, qR = dir_solvers[i + 1].implied_flux(uR, vR, u_n_loc[i + 1], "left")
            else:
                pL = extract_flux(uL, grids[i], "right")
                qL = extract_flux(vL, grids[i], "right")
                pR = extract_flux(uR, grids[i + 1], "left")
                qR = extract_flux(vR, grids[i + 1], "left")
            ju.append(pL - pR)
            jv.append(qL - qR)

        # homogeneous correction half-step with the jumps as derivative data
        cors = []
        for i in range(N):
            ld = None if i == 0 else (ju[i - 1], jv[i - 1])
            rd = None if i == N - 1 else (ju[i], jv[i])
            cors.append(cor_solvers[i].solve(zero_loc[i], left_data=ld, right_data=rd))

        # relax the traces by the correction mismatch
        for i in range(N - 1):
            phi_L, psi_L = cors[i]
            phi_R, psi_R = cors[i + 1]
            if is_2d:
                right_col = slice(-ny1 + 1, -1)    # interior y of the right face
                left_col = slice(1, ny1 - 1)
                g[i] -= theta * (phi_L[right_col] - phi_R[left_col])
                h[i] -= theta * (psi_L[right_col] - psi_R[left_col])
            else:
                g[i] -= theta * (phi_L[-1] - phi_R[0])
                h[i] -= theta * (psi_L[-1] - psi_R[0])

    out_traces = TraceSet(np.asarray(g).reshape(traces.g.shape),
                          np.asarray(h).reshape(traces.h.shape))
    v_glued = np.empty(n_total)
    v_glued[idx[0]] = fields[0][1]
    for i in range(1, N):
        v_glued[idx[i][ny1:]] = fields[i][1][ny1:]
    return NNResult(glued.copy(), v_glued, iterations, converged=converged,
                    errors=errors, traces=out_traces, reference=ref_u)
