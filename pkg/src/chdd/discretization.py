"""Centered finite differences for the coupled implicit step.

One backward-Euler step of the mixed phase-field system, linearized about
the previous state, is the block system

    [ I            -dt*L   ] [u]   [ u_n]
    [ eps^2*L - C^2   I    ] [v] = [-u_n]

where ``L`` is the Neumann Laplacian (3-point in 1D, 5-point in 2D, zero
boundary derivatives imposed by mirror ghosts) and ``C^2`` the diagonal of
the squared linearization field (the previous state itself in a nonlinear
run, a constant for analysis runs).  Unknowns are stacked u-then-v; 2D
fields are flattened x-major.

The same assembly accepts a spectral shift ``L -> L - s*I`` in both blocks,
which turns the 1D operator into the exact per-mode operator of the 2D
problem after a transverse cosine/sine transform — the oracle path used to
cross-check the 2D solvers mode by mode.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import Grid1D, Grid2D, Params, PhaseField

__all__ = [
    "laplacian_1d",
    "laplacian_2d",
    "laplacian",
    "trapezoid_weights",
    "coupled_system",
    "coupled_rhs",
    "step_monodomain",
    "nonlinearity",
    "potential",
    "mass",
    "energy",
]


def laplacian_1d(h: float, n_nodes: int) -> sp.csr_matrix:
    """3-point Laplacian on a closed interval, mirror-ghost Neumann ends.

    Row 0 reads (2u_1 - 2u_0)/h^2 (the ghost u_{-1} = u_1 eliminated), and
    symmetrically at the right end; interior rows are the usual second
    difference.
    """
    if n_nodes < 2:
        raise ValueError("need at least 2 nodes")
    main = np.full(n_nodes, -2.0)
    lower = np.ones(n_nodes - 1)
    upper = np.ones(n_nodes - 1)
    upper[0] = 2.0      # mirror ghost at the left end
    lower[-1] = 2.0     # mirror ghost at the right end
    return sp.diags_array(
        (lower, main, upper), offsets=(-1, 0, 1), format="csr"
    ) * (1.0 / h**2)


def laplacian_2d(h_x: float, h_y: float, nx_nodes: int, ny_nodes: int) -> sp.csr_matrix:
    """5-point Laplacian with mirror-ghost Neumann on all four sides.

    Acts on x-major flattened fields: index = ix * ny_nodes + iy.
    """
    lx = laplacian_1d(h_x, nx_nodes)
    ly = laplacian_1d(h_y, ny_nodes)
    return (sp.kron(lx, sp.identity(ny_nodes), format="csr")
            + sp.kron(sp.identity(nx_nodes), ly, format="csr"))


def laplacian(grid) -> sp.csr_matrix:
    """Neumann Laplacian matching the grid type."""
    if isinstance(grid, Grid2D):
        return laplacian_2d(grid.h_x, grid.h_y, grid.n_x + 1, grid.n_y + 1)
    return laplacian_1d(grid.h, grid.n_nodes)


def trapezoid_weights(grid) -> np.ndarray:
    """Trapezoid quadrature weights, flattened to match field storage."""
    def line(h, n):
        w = np.full(n, h)
        w[0] = w[-1] = 0.5 * h
        return w

    if isinstance(grid, Grid2D):
        wx = line(grid.h_x, grid.n_x + 1)
        wy = line(grid.h_y, grid.n_y + 1)
        return np.kron(wx, wy)
    return line(grid.h, grid.n_nodes)


def coupled_system(lap: sp.spmatrix, params: Params, c_sq: np.ndarray,
                   mode_shift: float = 0.0) -> sp.csr_matrix:
    """Assemble the 2M x 2M one-step matrix from a Laplacian block.

    ``c_sq`` is the squared linearization field on the nodes; ``mode_shift``
    replaces L by L - s*I in both blocks (transverse mode elimination).
    """
    m = lap.shape[0]
    c_sq = np.asarray(c_sq, dtype=float).reshape(-1)
    if c_sq.size == 1:
        c_sq = np.full(m, c_sq[0])
    if c_sq.size != m:
        raise ValueError(f"c_sq has {c_sq.size} entries, operator has {m} rows")
    eye = sp.identity(m, format="csr")
    lap_s = lap - mode_shift * eye if mode_shift else lap
    return sp.bmat(
        [
            [eye, -params.delta_t * lap_s],
            [params.epsilon**2 * lap_s - sp.diags_array(c_sq), eye],
        ],
        format="csr",
    )


def coupled_rhs(u_n: np.ndarray) -> np.ndarray:
    """Right-hand side (u_n, -u_n) of the linearized step."""
    u_n = np.asarray(u_n, dtype=float).reshape(-1)
    return np.concatenate([u_n, -u_n])


def step_monodomain(field: PhaseField, params: Params,
                    c_field: np.ndarray | None = None) -> PhaseField:
    """One implicit step on the whole domain (direct sparse solve).

    By default the linearization field is the current state (the nonlinear
    time-stepping convention); pass ``c_field`` to freeze it, e.g. at the
    constant used by the closed-form theory.
    """
    lap = laplacian(field.grid)
    c = field.u if c_field is None else np.asarray(c_field, dtype=float).reshape(-1)
    mat = coupled_system(lap, params, c * c)
    sol = spla.splu(mat.tocsc()).solve(coupled_rhs(field.u))
    m = field.u.size
    return PhaseField(sol[:m], sol[m:], field.grid)


def nonlinearity(u: np.ndarray) -> np.ndarray:
    """Double-well derivative u^3 - u."""
    return u**3 - u


def potential(u: np.ndarray) -> np.ndarray:
    """Double-well density (u^2 - 1)^2 / 4."""
    return 0.25 * (u * u - 1.0) ** 2


def mass(u: np.ndarray, grid) -> float:
    """Trapezoid integral of the order parameter.

    The mirror-ghost Laplacian is conservative in exactly this quadrature,
    so the implicit step preserves this number to solver precision.
    """
    return float(trapezoid_weights(grid) @ np.asarray(u, dtype=float).reshape(-1))


def energy(u: np.ndarray, grid, params: Params, gradient: str = "centered") -> float:
    """Free energy: trapezoid double-well term plus squared-gradient term.

    gradient="centered" uses second-order centered differences at the nodes
    (zero at the boundary nodes, consistent with the mirror extension) under
    trapezoid weights; gradient="forward" uses one-sided cell differences
    under midpoint weights (the classical discrete Dirichlet form).
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    w = trapezoid_weights(grid)
    bulk = float(w @ potential(u))

    def grad_sq_1d(line, h):
        if gradient == "centered":
            g = np.zeros_like(line)
            g[1:-1] = (line[2:] - line[:-2]) / (2.0 * h)
            wl = np.full(line.size, h)
            wl[0] = wl[-1] = 0.5 * h
            return float(wl @ g**2)
        if gradient == "forward":
            d = np.diff(line) / h
            return float(h * (d @ d))
        raise ValueError(f"unknown gradient variant {gradient!r}")

    if isinstance(grid, Grid2D):
        fld = u.reshape(grid.shape)
        wx = trapezoid_weights(Grid1D(grid.x_left, grid.x_right, grid.n_x))
        wy = trapezoid_weights(Grid1D(grid.y_bottom, grid.y_top, grid.n_y))
        gsq = 0.0
        for iy in range(grid.n_y + 1):       # d/dx along every y-line
            gsq += wy[iy] * grad_sq_1d(fld[:, iy], grid.h_x)
        for ix in range(grid.n_x + 1):       # d/dy along every x-line
            gsq += wx[ix] * grad_sq_1d(fld[ix, :], grid.h_y)
    else:
        gsq = grad_sq_1d(u, grid.h)
    return bulk + 0.5 * params.epsilon**2 * gsq
