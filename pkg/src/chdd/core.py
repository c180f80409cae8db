"""Geometry, parameters, and field containers shared by all solvers.

Everything in this module is a plain value type: construct once, validate in
``__post_init__``, then share freely.  Interfaces between subdomains always
live *on* grid nodes (vertex-centered finite differences), which keeps
Dirichlet trace injection and one-sided flux extraction exact at the
interface.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Params",
    "Grid1D",
    "Grid2D",
    "Decomposition",
    "PhaseField",
    "TraceSet",
    "snap_decomposition",
    "random_traces",
]


@dataclass(frozen=True)
class Params:
    """Scalar model/iteration parameters.

    Parameters
    ----------
    epsilon : float
        Interface-thickness parameter (> 0).
    delta_t : float
        Time-step size (> 0).
    c : float
        Frozen concentration scalar used by the theory engine and by
        error-equation experiments.  Enters only through ``c**2``.
    theta : float
        Interface relaxation parameter, in the open interval (0, 1).
    """

    epsilon: float
    delta_t: float
    c: float = 1.0
    theta: float = 0.5

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not self.delta_t > 0.0:
            raise ValueError(f"delta_t must be > 0, got {self.delta_t}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")

    @property
    def discriminant(self) -> float:
        """c^4 dt^2 - 4 eps^2 dt; its sign separates the two symbol regimes."""
        return self.c**4 * self.delta_t**2 - 4.0 * self.epsilon**2 * self.delta_t

    @property
    def is_real_symbol(self) -> bool:
        """True iff the characteristic roots are real (dt > 4 eps^2 / c^4)."""
        return self.discriminant > 0.0


@dataclass(frozen=True)
class Grid1D:
    """Uniform vertex-centered 1D grid with ``n_cells + 1`` nodes."""

    x_left: float
    x_right: float
    n_cells: int

    def __post_init__(self):
        if not self.x_left < self.x_right:
            raise ValueError("need x_left < x_right")
        if self.n_cells < 1:
            raise ValueError("need at least one cell")

    @property
    def h(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    def nodes(self) -> np.ndarray:
        return np.linspace(self.x_left, self.x_right, self.n_nodes)

    @property
    def length(self) -> float:
        return self.x_right - self.x_left


@dataclass(frozen=True)
class Grid2D:
    """Uniform tensor-product grid on a rectangle; x-major node ordering."""

    x_left: float
    x_right: float
    y_bottom: float
    y_top: float
    n_x: int
    n_y: int

    def __post_init__(self):
        if not self.x_left < self.x_right:
            raise ValueError("need x_left < x_right")
        if not self.y_bottom < self.y_top:
            raise ValueError("need y_bottom < y_top")
        if self.n_x < 1 or self.n_y < 1:
            raise ValueError("need at least one cell per direction")

    @property
    def h_x(self) -> float:
        return (self.x_right - self.x_left) / self.n_x

    @property
    def h_y(self) -> float:
        return (self.y_top - self.y_bottom) / self.n_y

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_x + 1, self.n_y + 1)

    @property
    def n_nodes(self) -> int:
        return (self.n_x + 1) * (self.n_y + 1)

    def nodes_x(self) -> np.ndarray:
        return np.linspace(self.x_left, self.x_right, self.n_x + 1)

    def nodes_y(self) -> np.ndarray:
        return np.linspace(self.y_bottom, self.y_top, self.n_y + 1)

    @property
    def y_length(self) -> float:
        return self.y_top - self.y_bottom


def _x_axis(grid):
    """(x_left, h, n_cells) of the decomposition axis for either grid type."""
    if isinstance(grid, Grid1D):
        return grid.x_left, grid.h, grid.n_cells
    if isinstance(grid, Grid2D):
        return grid.x_left, grid.h_x, grid.n_x
    raise TypeError(f"expected Grid1D or Grid2D, got {type(grid).__name__}")


@dataclass(frozen=True)
class Decomposition:
    """Ordered subdomain breakpoints snapped to grid nodes along x.

    ``node_indices`` holds N+1 node indices ``0 = i_0 < i_1 < ... < i_N =
    n_cells``; subdomain k spans nodes ``i_{k-1}..i_k`` (interface nodes are
    shared by both neighbors).  Use :func:`snap_decomposition` to build one.
    """

    node_indices: tuple[int, ...]
    grid: Grid1D | Grid2D

    def __post_init__(self):
        idx = self.node_indices
        _, _, n_cells = _x_axis(self.grid)
        if len(idx) < 3:
            raise ValueError("need at least 2 subdomains (3 breakpoints)")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"breakpoint nodes must be strictly increasing, got {idx}")
        if idx[0] != 0 or idx[-1] != n_cells:
            raise ValueError("first/last breakpoints must be the domain endpoints")

    @property
    def n_subdomains(self) -> int:
        return len(self.node_indices) - 1

    @property
    def breakpoints(self) -> np.ndarray:
        """Snapped breakpoint coordinates x_0 < ... < x_N."""
        x0, h, _ = _x_axis(self.grid)
        return x0 + h * np.asarray(self.node_indices, dtype=float)

    @property
    def widths(self) -> np.ndarray:
        """Subdomain widths d_i = x_i - x_{i-1}."""
        bp = self.breakpoints
        return bp[1:] - bp[:-1]

    @property
    def d_min(self) -> float:
        return float(self.widths.min())

    @property
    def interfaces(self) -> tuple[int, ...]:
        """Node indices of the N-1 interior interfaces."""
        return self.node_indices[1:-1]

    def subdomain_nodes(self, i: int) -> tuple[int, int]:
        """Inclusive node range (left, right) of subdomain ``i`` (0-based)."""
        return self.node_indices[i], self.node_indices[i + 1]

    @property
    def trace_width(self) -> int:
        """Values per interface trace: 1 in 1D, interior y-nodes in 2D."""
        if isinstance(self.grid, Grid2D):
            return self.grid.n_y - 1
        return 1


def snap_decomposition(breakpoints, grid) -> Decomposition:
    """Snap breakpoint coordinates to the nearest grid nodes.

    Parameters
    ----------
    breakpoints : sequence of float
        Strictly increasing coordinates ``x_0 < ... < x_N`` spanning the
        domain; the first/last must snap to the domain endpoints.
    grid : Grid1D or Grid2D
        Decomposition happens along the x-axis.

    Raises
    ------
    ValueError
        If breakpoints are not strictly increasing, lie outside the domain,
        or two of them snap to the same node.
    """
    x0, h, n_cells = _x_axis(grid)
    bp = [float(b) for b in breakpoints]
    if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
        raise ValueError(f"breakpoints must be strictly increasing, got {bp}")
    x1 = x0 + h * n_cells
    tol = 0.5 * h + 1e-12 * max(abs(x0), abs(x1))
    if bp[0] < x0 - tol or bp[-1] > x1 + tol:
        raise ValueError(f"breakpoints {bp} outside domain [{x0}, {x1}]")
    idx = [int(round((b - x0) / h)) for b in bp]
    idx = [min(max(i, 0), n_cells) for i in idx]
    if len(set(idx)) != len(idx):
        raise ValueError(
            f"two breakpoints snapped to the same node ({idx}); refine the grid"
        )
    return Decomposition(node_indices=tuple(idx), grid=grid)


@dataclass
class PhaseField:
    """Nodal concentration/potential pair on a grid.

    ``u`` and ``v`` are 1D arrays of length ``n_nodes`` (2D fields are stored
    flattened, x-major, matching the assembled operators).
    """

    u: np.ndarray
    v: np.ndarray
    grid: Grid1D | Grid2D

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float).reshape(-1)
        self.v = np.asarray(self.v, dtype=float).reshape(-1)
        if self.u.size != self.v.size:
            raise ValueError(f"u/v size mismatch: {self.u.size} vs {self.v.size}")
        if self.u.size != self.grid.n_nodes:
            raise ValueError(
                f"field has {self.u.size} values, grid has {self.grid.n_nodes} nodes"
            )

    def copy(self) -> "PhaseField":
        return PhaseField(self.u.copy(), self.v.copy(), self.grid)


@dataclass
class TraceSet:
    """Interface values (g_i, h_i) of (u, v) on the N-1 interfaces.

    Stored as arrays of shape ``(N-1,)`` in 1D and ``(N-1, n_y - 1)`` in 2D
    (interior y-nodes only; see the 2D solvers for how corner values are
    closed by the Neumann y-boundary).
    """

    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        self.g = np.atleast_1d(np.asarray(self.g, dtype=float))
        self.h = np.atleast_1d(np.asarray(self.h, dtype=float))
        if self.g.shape != self.h.shape:
            raise ValueError(f"g/h shape mismatch: {self.g.shape} vs {self.h.shape}")

    @property
    def count(self) -> int:
        """Number of interfaces."""
        return self.g.shape[0]

    def copy(self) -> "TraceSet":
        return TraceSet(self.g.copy(), self.h.copy())

    def max_abs(self) -> float:
        return max(float(np.abs(self.g).max()), float(np.abs(self.h).max()))


def random_traces(decomposition: Decomposition, seed: int, amplitude: float = 1.0) -> TraceSet:
    """Seeded uniform random interface guesses in [-amplitude, amplitude].

    The same seed always yields the same TraceSet (a single
    ``numpy.random.default_rng(seed)`` stream, g drawn before h).
    """
    n_ifc = decomposition.n_subdomains - 1
    width = decomposition.trace_width
    shape = (n_ifc,) if width == 1 else (n_ifc, width)
    rng = np.random.default_rng(seed)
    g = rng.uniform(-amplitude, amplitude, size=shape)
    h = rng.uniform(-amplitude, amplitude, size=shape)
    return TraceSet(g=g, h=h)
