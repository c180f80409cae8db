"""Closed-form convergence theory for the two substructuring iterations.

This module evaluates, in floating point, every analytic object the solvers
are tested against: the characteristic roots ("symbols") of the coupled
elliptic system, the 2x2 two-subdomain iteration matrix, the block-banded
multi-subdomain iteration matrix, the convergence-bound constants, and the
two scalar inequalities the bound proofs rest on.

Numerical policy: every hyperbolic ratio is evaluated in exponentially
scaled form (``exp(-z)`` expansions), so nothing overflows even when
``xi * d`` is in the thousands; complex arithmetic is used throughout in the
oscillatory-root regime, and results that are provably real are checked for
negligible imaginary residue before being returned as real arrays.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import Params

__all__ = [
    "SymbolSet",
    "symbols",
    "vieta_residual",
    "characteristic_residual",
    "DNMatrix",
    "dn_iteration_matrix",
    "dn_rate_exact",
    "dn_contraction_bound",
    "NNMatrix",
    "nn_iteration_matrix",
    "BoundSet",
    "nn_bounds",
    "LemmaReport",
    "lemma_checks",
]


# --------------------------------------------------------------------------
# symbols
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolSet:
    """Characteristic roots and eigenvectors of the coupled system.

    ``lambda1``/``lambda2`` are the roots of
    ``eps^2*dt*z^2 - c^2*dt*z + 1 = 0`` (complex conjugates when the
    discriminant is negative, with ``lambda1`` carrying the positive
    imaginary part).  ``xi1 = sqrt(lambda1 + p^2)`` and
    ``xi3 = sqrt(lambda2 + p^2)`` are principal square roots; the mirrored
    roots ``-xi1``/``-xi3`` are implied.  ``p`` is the transverse Fourier
    frequency (0 in 1D, ``m*pi/l`` for interface mode m in 2D).
    """

    lambda1: complex
    lambda2: complex
    lam: complex          # lambda1 - lambda2
    xi1: complex
    xi3: complex
    eigvec1: tuple        # (dt*lambda1, 1)
    eigvec3: tuple        # (dt*lambda2, 1)
    is_real: bool
    p: float
    params: Params


def symbols(params: Params, p: float = 0.0) -> SymbolSet:
    """Evaluate the symbol set of the coupled system, optionally at mode p.

    Raises
    ------
    ValueError
        On a vanishing discriminant (double root; the eigenbasis degenerates
        and none of the closed forms apply).
    """
    eps2 = params.epsilon**2
    dt = params.delta_t
    c2 = params.c**2
    disc = params.discriminant
    if disc == 0.0:
        raise ValueError("degenerate double root: c^4*dt^2 == 4*eps^2*dt")
    if disc > 0.0:
        r = math.sqrt(disc)
        lam1 = (c2 * dt + r) / (2.0 * eps2 * dt)
        # stable small root: quotient of the product identity, instead of the
        # cancellation-prone (c2*dt - r) difference
        lam2 = 1.0 / (eps2 * dt * lam1)
        xi1 = math.sqrt(lam1 + p * p)
        xi3 = math.sqrt(lam2 + p * p)
    else:
        r = cmath.sqrt(complex(disc))          # = i*sqrt(|disc|)
        lam1 = (c2 * dt + r) / (2.0 * eps2 * dt)
        lam2 = (c2 * dt - r) / (2.0 * eps2 * dt)
        xi1 = cmath.sqrt(lam1 + p * p)
        xi3 = cmath.sqrt(lam2 + p * p)
    return SymbolSet(
        lambda1=lam1,
        lambda2=lam2,
        lam=lam1 - lam2,
        xi1=xi1,
        xi3=xi3,
        eigvec1=(dt * lam1, 1.0),
        eigvec3=(dt * lam2, 1.0),
        is_real=disc > 0.0,
        p=float(p),
        params=params,
    )


def vieta_residual(sym: SymbolSet) -> float:
    """Max relative residual of the two root identities (sum and product)."""
    p = sym.params
    target_sum = p.c**2 / p.epsilon**2
    target_prod = 1.0 / (p.epsilon**2 * p.delta_t)
    r1 = abs(sym.lambda1 + sym.lambda2 - target_sum) / abs(target_sum) if target_sum else abs(sym.lambda1 + sym.lambda2)
    r2 = abs(sym.lambda1 * sym.lambda2 - target_prod) / abs(target_prod)
    return max(r1, r2)


def characteristic_residual(sym: SymbolSet) -> float:
    """Scaled residual of the coefficient-matrix determinant at xi1 and xi3.

    The determinant ``1 + dt*(xi^2 - p^2)*(eps^2*(xi^2 - p^2) - c^2)`` must
    vanish at both principal roots; the residual is scaled by the largest
    term so it is comparable across parameter magnitudes.
    """
    prm = sym.params
    out = 0.0
    for xi in (sym.xi1, sym.xi3):
        z = xi * xi - sym.p**2
        det = 1.0 + prm.delta_t * z * (prm.epsilon**2 * z - prm.c**2)
        scale = 1.0 + abs(prm.delta_t * prm.epsilon**2 * z * z)
        out = max(out, abs(det) / scale)
    return out


def _realify(arr: np.ndarray, where: str) -> np.ndarray:
    """Drop a provably-zero imaginary part, warning if it is not negligible."""
    if not np.iscomplexobj(arr):
        return arr
    scale = np.abs(arr).max() + 1.0
    resid = np.abs(arr.imag).max() / scale
    if resid > 1e-8:
        warnings.warn(f"{where}: imaginary residue {resid:.2e} exceeds 1e-8")
    return np.ascontiguousarray(arr.real)


# --------------------------------------------------------------------------
# two-subdomain (Dirichlet--Neumann) iteration matrix
# --------------------------------------------------------------------------

@dataclass
class DNMatrix:
    """2x2 interface iteration matrix of the two-subdomain method."""

    H: np.ndarray
    rho1: complex
    rho2: complex
    a: float
    b: float
    theta: float

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.H)

    @property
    def spectral_radius(self) -> float:
        return float(np.abs(self.eigenvalues).max())


def dn_iteration_matrix(sym: SymbolSet, a: float, b: float, theta: float) -> DNMatrix:
    """Assemble the 2x2 trace iteration matrix for subdomain sizes (a, b).

    ``a`` is the Dirichlet-side size and ``b`` the Neumann-side size.  For
    ``a == b`` the matrix is exactly ``(1 - 2*theta) * I`` (returned in
    closed form, not via the hyperbolic ratios, so the identity is exact).
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("subdomain sizes must be positive")
    if a == b:
        H = (1.0 - 2.0 * theta) * np.eye(2)
        return DNMatrix(H=H, rho1=1.0, rho2=1.0, a=a, b=b, theta=theta)

    lam1, lam2, lam = sym.lambda1, sym.lambda2, sym.lam
    dt = sym.params.delta_t
    # rho_j = sinh(xi_j a) cosh(xi_j b) / (cosh(xi_j a) sinh(xi_j b))
    #       = tanh(xi_j a) / tanh(xi_j b); tanh saturates instead of
    # overflowing, so this form is safe for arbitrarily large xi*d.
    rho1 = cmath.tanh(sym.xi1 * a) / cmath.tanh(sym.xi1 * b)
    rho2 = cmath.tanh(sym.xi3 * a) / cmath.tanh(sym.xi3 * b)

    H = np.empty((2, 2), dtype=complex)
    H[0, 0] = 1.0 - theta + theta * (-lam1 * rho1 + lam2 * rho2) / lam
    H[0, 1] = theta * dt * lam1 * lam2 * (rho1 - rho2) / lam
    H[1, 0] = theta * (rho2 - rho1) / (dt * lam)
    H[1, 1] = 1.0 - theta + theta * (lam2 * rho1 - lam1 * rho2) / lam
    return DNMatrix(H=_realify(H, "dn_iteration_matrix"), rho1=rho1, rho2=rho2,
                    a=a, b=b, theta=theta)


def dn_rate_exact(sym: SymbolSet, a: float, b: float) -> np.ndarray:
    """Both eigenvalues of the theta=1/2 matrix in closed form.

    These equal ``sinh((b-a) xi_j) / (2 sinh(b xi_j) cosh(a xi_j))``,
    evaluated here in an exp-scaled form that stays finite for large xi*d.
    """
    out = []
    for xi in (sym.xi1, sym.xi3):
        ea = cmath.exp(-2.0 * xi * a)
        eb = cmath.exp(-2.0 * xi * b)
        out.append((ea - eb) / ((1.0 - eb) * (1.0 + ea)))
    return np.asarray(out)


def dn_contraction_bound(params: Params, a: float, b: float) -> float:
    """Per-iteration contraction factor of the theta=1/2 iteration.

    ``|b - a| / (2b)`` when the symbols are real, ``|b - a| / (sqrt(2) b)``
    when they are complex; the denominator is always the Neumann-side size.
    A bound >= 1 means the iteration is not guaranteed to contract with this
    role assignment — a warning suggests exchanging the two subdomains.
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("subdomain sizes must be positive")
    if params.is_real_symbol:
        bound = abs(b - a) / (2.0 * b)
    else:
        bound = abs(b - a) / (math.sqrt(2.0) * b)
    if bound >= 1.0:
        warnings.warn(
            f"contraction bound {bound:.3f} >= 1 for sizes (a={a}, b={b}); "
            "swap the Dirichlet/Neumann roles of the subdomains"
        )
    return bound


# --------------------------------------------------------------------------
# multi-subdomain (Neumann--Neumann) iteration matrix
# --------------------------------------------------------------------------

def _scaled_hyperbolics(xi: complex, widths: np.ndarray):
    """(coth, csch, tanh) of xi*d_i for every subdomain, overflow-safe.

    Uses w = exp(-2z) (|w| < 1 for Re z > 0) so entries merely underflow to
    the correct saturation values for huge arguments.
    """
    z = np.asarray(widths, dtype=complex) * xi
    if np.any(z.real <= 0.0):
        raise ValueError("xi*d must have positive real part")
    w = np.exp(-2.0 * z)
    ez = np.exp(-z)
    coth = (1.0 + w) / (1.0 - w)
    csch = 2.0 * ez / (1.0 - w)
    tanh = (1.0 - w) / (1.0 + w)
    return coth, csch, tanh


def _upsilon_blocks(ct, cs, th, i, n_sub, as_printed):
    """Offset -> Upsilon value for interface row ``i`` (1-based).

    ``ct``/``cs``/``th`` are 1-based views (index 0 unused) of the scaled
    hyperbolics per subdomain.  Valid for n_sub >= 5, where the four special
    rows (1, 2, N-2, N-1) are distinct from the generic band.
    """
    N = n_sub
    if i == 1:
        if as_printed:
            # Verbatim from the source text; the exact-solve oracle shows the
            # first product's subscripts are a typo (see the default branch).
            y2 = ct[1] * cs[1] + cs[2] * (2.0 * ct[2] + ct[3])
        else:
            y2 = cs[2] * (ct[1] + 2.0 * ct[2] + ct[3])
        return {
            0: 1.0 + ct[1] * ct[2] + th[1] * ct[2] + ct[2] ** 2 + cs[2] ** 2,
            1: y2,
            2: cs[2] * cs[3],
        }
    if i == 2:
        return {
            -1: cs[2] * (th[1] + 2.0 * ct[2] + ct[3]),
            0: (ct[2] + ct[3]) ** 2 + cs[2] ** 2 + cs[3] ** 2,
            1: cs[3] * (ct[2] + 2.0 * ct[3] + ct[4]),
            2: cs[3] * cs[4],
        }
    if i == N - 2:
        return {
            -2: cs[i] * cs[i - 1],
            -1: cs[i] * (2.0 * ct[i] + ct[i - 1] + ct[i + 1]),
            0: (ct[i] + ct[i + 1]) ** 2 + cs[i] ** 2 + cs[i + 1] ** 2,
            1: cs[N - 1] * (2.0 * ct[N - 1] + ct[N - 2] + th[N]),
        }
    if i == N - 1:
        if as_printed:
            # Verbatim diagonal block; the oracle shows it is a typo for the
            # mirror image of row 1 (swap subdomain index i <-> N+1-i).
            y3 = (1.0 + ct[N - 1] ** 2 + th[N - 1] * th[N]
                  + cs[N - 1] ** 2 + ct[N - 1] * ct[N])
        else:
            y3 = (1.0 + ct[N] * ct[N - 1] + th[N] * ct[N - 1]
                  + ct[N - 1] ** 2 + cs[N - 1] ** 2)
        return {
            -2: cs[N - 1] * cs[N - 2],
            -1: cs[N - 1] * (2.0 * ct[N - 1] + ct[N - 2] + ct[N]),
            0: y3,
        }
    return {
        -2: cs[i] * cs[i - 1],
        -1: cs[i] * (2.0 * ct[i] + ct[i - 1] + ct[i + 1]),
        0: (ct[i] + ct[i + 1]) ** 2 + cs[i] ** 2 + cs[i + 1] ** 2,
        1: cs[i + 1] * (ct[i] + 2.0 * ct[i + 1] + ct[i + 2]),
        2: cs[i + 1] * cs[i + 2],
    }


def _nn_matrix_banded(sym: SymbolSet, widths: np.ndarray, theta: float,
                      as_printed: bool):
    """Assemble T(theta) from the block-pentadiagonal closed forms (N >= 5)."""
    N = len(widths)
    dt = sym.params.delta_t
    lam1, lam2, lam = sym.lambda1, sym.lambda2, sym.lam
    A = lam1 / lam
    B = lam2 / lam
    C = dt * lam1 * lam2 / lam
    D = 1.0 / (dt * lam)

    pad = [0.0]  # 1-based indexing into per-subdomain arrays
    ct1, cs1, th1 = (np.concatenate((pad, v)) for v in _scaled_hyperbolics(sym.xi1, widths))
    ct3, cs3, th3 = (np.concatenate((pad, v)) for v in _scaled_hyperbolics(sym.xi3, widths))

    n = 2 * (N - 1)
    Amat = np.zeros((n, n), dtype=complex)
    upsilon = {}
    for i in range(1, N):
        b1 = _upsilon_blocks(ct1, cs1, th1, i, N, as_printed)
        b3 = _upsilon_blocks(ct3, cs3, th3, i, N, as_printed)
        for off, y1 in b1.items():
            y3 = b3[off]
            upsilon[(1, i, off)] = y1
            upsilon[(3, i, off)] = y3
            j = i + off
            if not 1 <= j <= N - 1:
                raise AssertionError(f"offset {off} of row {i} leaves the matrix")
            s = 1.0 if abs(off) % 2 == 1 else -1.0
            rg, rh = 2 * i - 2, 2 * i - 1   # g-row, h-row (0-based)
            cg, ch = 2 * j - 2, 2 * j - 1   # g-col, h-col
            # g-row
            Amat[rg, cg] = s * (A * y1 - B * y3) + (1.0 if off == 0 else 0.0)
            gh = -s * C * (y1 - y3)
            if as_printed and i == 2 and off == 0:
                gh = -C * (y1 - y3)        # verbatim sign of the source text
            Amat[rg, ch] = gh
            # h-row
            Amat[rh, cg] = s * D * (y1 - y3)
            hh = -s * (B * y1 - A * y3) + (1.0 if off == 0 else 0.0)
            if as_printed and i == 2 and off == 0:
                hh = 1.0 - (B * y1 - A * y3)
            if as_printed and 3 <= i <= N - 3 and off == -1:
                hh = -s * (B * y1 - B * y3)
            Amat[rh, ch] = hh

    T = (1.0 - theta) * np.eye(n) + theta * _realify(Amat, "nn_iteration_matrix")
    return T, upsilon


def _face_functionals(sym: SymbolSet, d: float):
    """Rows of value/derivative functionals in the decaying exp basis.

    Solution ansatz on a subdomain of width d (local coordinate x in [0, d]):
    ``(u, v) = sum_j mu_j (A_j e^{-xi_j x} + B_j e^{-xi_j (d - x)})`` with
    j in {1, 3}, mu_1 = (dt*lam1, 1), mu_3 = (dt*lam2, 1).  All basis values
    are bounded by 1, so the 4x4 face systems stay well-scaled at any xi*d.
    Returns a dict of 4-vectors acting on (A_1, B_1, A_3, B_3).
    """
    dt = sym.params.delta_t
    l1, l2 = sym.lambda1, sym.lambda2
    x1, x3 = sym.xi1, sym.xi3
    E1 = cmath.exp(-x1 * d)
    E3 = cmath.exp(-x3 * d)
    return {
        "u0": np.array([dt * l1, dt * l1 * E1, dt * l2, dt * l2 * E3]),
        "v0": np.array([1.0, E1, 1.0, E3]),
        "ud": np.array([dt * l1 * E1, dt * l1, dt * l2 * E3, dt * l2]),
        "vd": np.array([E1, 1.0, E3, 1.0]),
        "du0": np.array([-dt * l1 * x1, dt * l1 * x1 * E1, -dt * l2 * x3, dt * l2 * x3 * E3]),
        "dv0": np.array([-x1, x1 * E1, -x3, x3 * E3]),
        "dud": np.array([-dt * l1 * x1 * E1, dt * l1 * x1, -dt * l2 * x3 * E3, dt * l2 * x3]),
        "dvd": np.array([-x1 * E1, x1, -x3 * E3, x3]),
    }


def _nn_continuous_sweep(sym: SymbolSet, widths, theta, g, h):
    """One exact (continuous-level) NN sweep applied to trace vectors g, h.

    Solves the per-subdomain 4x4 systems in the decaying exp basis, forms
    the flux jumps, solves the Neumann correction problems, and applies the
    relaxed update.  Used for small N (where the banded closed forms do not
    apply) and as the oracle that disambiguates the printed coefficients.
    """
    N = len(widths)
    F = [_face_functionals(sym, d) for d in widths]

    # Dirichlet half-step: trace data at interior faces, natural (zero
    # derivative) conditions at the two outer boundaries.
    dir_coef = []
    for i in range(N):
        f = F[i]
        rows, rhs = [], []
        if i == 0:
            rows += [f["du0"], f["dv0"]]; rhs += [0.0, 0.0]
        else:
            rows += [f["u0"], f["v0"]]; rhs += [g[i - 1], h[i - 1]]
        if i == N - 1:
            rows += [f["dud"], f["dvd"]]; rhs += [0.0, 0.0]
        else:
            rows += [f["ud"], f["vd"]]; rhs += [g[i], h[i]]
        dir_coef.append(np.linalg.solve(np.array(rows), np.array(rhs, dtype=complex)))

    # Flux jumps at the interfaces (difference of d/dx across each face).
    ju = np.empty(N - 1, dtype=complex)
    jv = np.empty(N - 1, dtype=complex)
    for k in range(N - 1):
        ju[k] = F[k]["dud"] @ dir_coef[k] - F[k + 1]["du0"] @ dir_coef[k + 1]
        jv[k] = F[k]["dvd"] @ dir_coef[k] - F[k + 1]["dv0"] @ dir_coef[k + 1]

    # Neumann half-step: derivative data equal to the jumps.
    neu_coef = []
    for i in range(N):
        f = F[i]
        rows = [f["du0"], f["dv0"], f["dud"], f["dvd"]]
        rhs = [0.0 if i == 0 else ju[i - 1], 0.0 if i == 0 else jv[i - 1],
               0.0 if i == N - 1 else ju[i], 0.0 if i == N - 1 else jv[i]]
        neu_coef.append(np.linalg.solve(np.array(rows), np.array(rhs, dtype=complex)))

    # Relaxed trace update from the correction mismatch at each interface.
    g_new = np.empty(N - 1, dtype=complex)
    h_new = np.empty(N - 1, dtype=complex)
    for k in range(N - 1):
        phi_jump = F[k]["ud"] @ neu_coef[k] - F[k + 1]["u0"] @ neu_coef[k + 1]
        psi_jump = F[k]["vd"] @ neu_coef[k] - F[k + 1]["v0"] @ neu_coef[k + 1]
        g_new[k] = g[k] - theta * phi_jump
        h_new[k] = h[k] - theta * psi_jump
    return g_new, h_new


def _nn_matrix_continuous(sym: SymbolSet, widths: np.ndarray, theta: float):
    """Column-by-column T(theta) via the continuous sweep (any N >= 2)."""
    N = len(widths)
    n = 2 * (N - 1)
    T = np.empty((n, n), dtype=complex)
    for col in range(n):
        g = np.zeros(N - 1, dtype=complex)
        h = np.zeros(N - 1, dtype=complex)
        if col % 2 == 0:
            g[col // 2] = 1.0
        else:
            h[col // 2] = 1.0
        g1, h1 = _nn_continuous_sweep(sym, widths, theta, g, h)
        T[0::2, col] = g1
        T[1::2, col] = h1
    return _realify(T, "nn_iteration_matrix(continuous)")


@dataclass
class NNMatrix:
    """Multi-subdomain trace iteration matrix and its per-row coefficients.

    ``T`` acts on the stacked vector (g_1, h_1, ..., g_{N-1}, h_{N-1}) and
    already contains the relaxation parameter.  ``alpha[i]``/``beta[i]``
    (0-based lists over interfaces) are the nonzero coefficients of the
    g-row/h-row of interface i+1 in left-to-right column order — the row
    sums of their absolute values realize the infinity norm.  ``upsilon``
    maps ``(j, interface, offset)`` to the scaled hyperbolic building blocks
    (banded assembly only; None for the continuous path).
    """

    T: np.ndarray
    alpha: list
    beta: list
    S: tuple
    widths: np.ndarray
    theta: float
    upsilon: dict | None
    method: str

    @property
    def n_subdomains(self) -> int:
        return len(self.widths)

    def row_sums(self):
        """(sum_j |alpha_i^j|, sum_j |beta_i^j|) arrays over interfaces."""
        a = np.array([np.abs(r).sum() for r in self.alpha])
        b = np.array([np.abs(r).sum() for r in self.beta])
        return a, b

    @property
    def norm_inf(self) -> float:
        return float(np.abs(self.T).sum(axis=1).max())

    @property
    def spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvals(self.T)).max())


def nn_iteration_matrix(sym: SymbolSet, widths, theta: float,
                        method: str = "auto", as_printed: bool = False) -> NNMatrix:
    """Assemble the (2N-2)x(2N-2) trace iteration matrix for N subdomains.

    Parameters
    ----------
    sym : SymbolSet
        From :func:`symbols` (build at the mode frequency for 2D analysis).
    widths : sequence of float
        Subdomain widths d_1..d_N, N >= 3.  (N = 2 is the classical
        two-subdomain special case with a different closed form; rejected.)
    theta : float
        Relaxation parameter; folded into the returned matrix.
    method : {"auto", "banded", "continuous"}
        "banded" evaluates the block-pentadiagonal closed forms (requires
        N >= 5, where the special first/second/last-two rows are distinct);
        "continuous" derives columns from exact subdomain solves and works
        for any N; "auto" picks banded when valid, continuous otherwise.
    as_printed : bool
        Keep the handful of source-text coefficient variants that break the
        row sign pattern (banded path only); the default uses the
        pattern-consistent forms, which the continuous oracle confirms.
    """
    widths = np.asarray([float(d) for d in widths])
    N = len(widths)
    if N < 3:
        raise ValueError("need at least 3 subdomains (the N=2 closed form is out of scope)")
    if np.any(widths <= 0.0):
        raise ValueError("widths must be positive")
    if method == "auto":
        method = "banded" if N >= 5 else "continuous"
    if method == "banded":
        if N < 5:
            raise ValueError("banded closed forms need N >= 5; use method='continuous'")
        T, upsilon = _nn_matrix_banded(sym, widths, theta, as_printed)
    elif method == "continuous":
        if as_printed:
            raise ValueError("as_printed only applies to the banded closed forms")
        T = _nn_matrix_continuous(sym, widths, theta)
        upsilon = None
    else:
        raise ValueError(f"unknown method {method!r}")

    alpha, beta, S = [], [], []
    for i in range(1, N):
        lo = max(1, i - 2)
        hi = min(N - 1, i + 2)
        cols = [c for j in range(lo, hi + 1) for c in (2 * j - 2, 2 * j - 1)]
        alpha.append(T[2 * i - 2, cols].copy())
        beta.append(T[2 * i - 1, cols].copy())
        S.append(len(cols))
    return NNMatrix(T=T, alpha=alpha, beta=beta, S=tuple(S), widths=widths,
                    theta=theta, upsilon=upsilon, method=method)


# --------------------------------------------------------------------------
# convergence-bound constants
# --------------------------------------------------------------------------

def _log_sinh(z: float) -> float:
    """log(sinh(z)) for z > 0 without overflow."""
    return z + math.log1p(-math.exp(-2.0 * z)) - math.log(2.0)


@dataclass
class BoundSet:
    """Bound constants of the multi-subdomain convergence theorems.

    Only the family matching (dimension, equal/unequal) is populated; the
    other fields are None.  ``rate_g``/``rate_h`` are the per-iteration
    estimate factors in the norm of the corresponding theorem (max/uniform
    in 1D, interface-L2 in 2D, where the squared norms contract and the
    per-iteration factor is the square root).  ``status`` is "ok" in the
    real-symbol regime; in the oscillatory regime no constants are provided
    by the theory and every numeric field is None.
    """

    status: str
    dimension: int
    equal_widths: bool | None = None
    d_measured: float | None = None
    threshold: float | None = None
    converged_by_theory: bool | None = None
    rate_g: float | None = None
    rate_h: float | None = None
    # 1D equal
    alpha_star: float | None = None
    beta_star: float | None = None
    d_star: float | None = None
    # 1D unequal (d_bar as printed uses a 10 where the row bound uses 11;
    # both are reported, the conservative max is used for the threshold)
    alpha_bar: float | None = None
    beta_bar: float | None = None
    d_bar_printed: float | None = None
    d_bar_consistent: float | None = None
    # 2D equal
    c_alpha: float | None = None
    c_beta: float | None = None
    d_e_star: float | None = None
    C1: float | None = None
    C2: float | None = None
    alpha_e_star: float | None = None
    beta_e_star: float | None = None
    # 2D unequal
    c_alpha_star: float | None = None
    c_beta_star: float | None = None
    d_u_star: float | None = None
    alpha_u_star: float | None = None
    beta_u_star: float | None = None


def nn_bounds(sym: SymbolSet, widths, dimension: int = 1,
              equal: bool | None = None, y_length: float | None = None) -> BoundSet:
    """Evaluate the bound constants for the given decomposition widths.

    For ``dimension == 2`` the constants are evaluated at the lowest
    transverse mode ``p_1 = pi / y_length`` (``y_length`` required), which
    dominates all higher modes.  In the oscillatory-root regime the theory
    provides no constants: the returned set carries
    ``status = "bounds not provided"`` and all-None fields.
    """
    widths = np.asarray([float(d) for d in widths])
    if np.any(widths <= 0.0):
        raise ValueError("widths must be positive")
    if equal is None:
        equal = bool(np.all(np.abs(widths - widths[0]) <= 1e-12 * widths[0]))
    if not sym.is_real:
        return BoundSet(status="bounds not provided", dimension=dimension,
                        equal_widths=equal)

    lam1 = sym.lambda1.real if isinstance(sym.lambda1, complex) else sym.lambda1
    lam2 = sym.lambda2.real if isinstance(sym.lambda2, complex) else sym.lambda2
    lam = lam1 - lam2
    dt = sym.params.delta_t
    d_meas = float(widths.min()) if not equal else float(widths[0])

    if dimension == 1:
        if equal:
            d = d_meas
            a_star = 12.0 * (1.0 + dt * lam1) / (lam * d * d)
            b_star = 12.0 * (1.0 + dt * lam1) / (dt * lam * lam2 * d * d)
            d_star = max(math.sqrt(12.0 * (1.0 + dt * lam1) / lam),
                         math.sqrt(12.0 * (1.0 + dt * lam1) / (dt * lam * lam2)))
            return BoundSet(
                status="ok", dimension=1, equal_widths=True, d_measured=d,
                threshold=d_star, converged_by_theory=d > d_star,
                rate_g=a_star, rate_h=b_star,
                alpha_star=a_star, beta_star=b_star, d_star=d_star,
            )
        dmin = d_meas
        a_bar = (11.0 / lam + 11.0 * dt * lam1 / lam + 0.5 / lam1) / (dmin * dmin)
        b_bar = (11.0 / (dt * lam * lam2) + 11.0 * lam1 / (lam * lam2) + 0.5 / lam1) / (dmin * dmin)
        d_bar_printed = max(math.sqrt(11.0 / lam + 10.0 * dt * lam1 / lam + 0.5 / lam1),
                            math.sqrt(11.0 / (dt * lam * lam2) + 11.0 * lam1 / (lam * lam2) + 0.5 / lam1))
        d_bar_consistent = max(math.sqrt(11.0 / lam + 11.0 * dt * lam1 / lam + 0.5 / lam1),
                               math.sqrt(11.0 / (dt * lam * lam2) + 11.0 * lam1 / (lam * lam2) + 0.5 / lam1))
        thr = max(d_bar_printed, d_bar_consistent)
        return BoundSet(
            status="ok", dimension=1, equal_widths=False, d_measured=dmin,
            threshold=thr, converged_by_theory=dmin > thr,
            rate_g=a_bar, rate_h=b_bar,
            alpha_bar=a_bar, beta_bar=b_bar,
            d_bar_printed=d_bar_printed, d_bar_consistent=d_bar_consistent,
        )

    if dimension == 2:
        if y_length is None or y_length <= 0.0:
            raise ValueError("dimension=2 needs the transverse extent y_length")
        p1 = math.pi / y_length
        xi3_p1 = math.sqrt(lam2 + p1 * p1)
        log_s3 = _log_sinh(xi3_p1 * d_meas)
        # squared-weight constants shared by both 2D families
        C1 = 5.0 * ((lam1 / lam) ** 2 + (dt * lam1 * lam2 / lam) ** 2) * math.exp(-4.0 * log_s3)
        C2 = 5.0 * ((lam1 / lam) ** 2 + (1.0 / (dt * lam)) ** 2) * math.exp(-4.0 * log_s3)
        if equal:
            c_a = 12.0 * (lam1 / lam + dt * lam1 * lam2 / lam)
            c_b = 12.0 * (lam1 / lam + 1.0 / (dt * lam))
            d_e = max(math.asinh(math.sqrt(c_a)), math.asinh(math.sqrt(c_b))) / xi3_p1
            a_e = 576.0 * C1
            b_e = 576.0 * C2
            return BoundSet(
                status="ok", dimension=2, equal_widths=True, d_measured=d_meas,
                threshold=d_e, converged_by_theory=d_meas > d_e,
                rate_g=math.sqrt(a_e), rate_h=math.sqrt(b_e),
                c_alpha=c_a, c_beta=c_b, d_e_star=d_e, C1=C1, C2=C2,
                alpha_e_star=a_e, beta_e_star=b_e,
            )
        c_a = 11.0 * lam1 / lam + 10.0 * dt * lam1 * lam2 / lam + 0.5
        c_b = 11.0 * lam1 / lam + 10.0 / (dt * lam) + 0.5
        d_u = max(math.asinh(math.sqrt(c_a)), math.asinh(math.sqrt(c_b))) / xi3_p1
        a_u = 462.25 * C1
        b_u = 462.25 * C2
        return BoundSet(
            status="ok", dimension=2, equal_widths=False, d_measured=d_meas,
            threshold=d_u, converged_by_theory=d_meas > d_u,
            rate_g=math.sqrt(a_u), rate_h=math.sqrt(b_u),
            c_alpha_star=c_a, c_beta_star=c_b, d_u_star=d_u,
            C1=C1, C2=C2, alpha_u_star=a_u, beta_u_star=b_u,
        )

    raise ValueError(f"dimension must be 1 or 2, got {dimension}")


# --------------------------------------------------------------------------
# scalar lemma checks
# --------------------------------------------------------------------------

@dataclass
class LemmaReport:
    """Sampled verification of the two scalar inequalities behind the bounds."""

    passed: bool
    n_samples: int
    ratio_upper_margin: float      # min over t of a/b - sinh(at)/sinh(bt)
    ratio_positive_margin: float   # min over t of sinh(at)/sinh(bt)
    monotone_margin: float         # min consecutive decrease of the ratio
    growth_margin: float           # min over t of 2/t^2 - cosh(t)/sinh(t)^2


def lemma_checks(a: float = 1.0, b: float = 2.0, samples: int = 10_000,
                 t_max: float = 50.0) -> LemmaReport:
    """Check both scalar inequalities on a log-spaced grid of t > 0.

    Inequality 1 (0 < a < b): ``0 < sinh(a t)/sinh(b t) < a/b`` with the
    ratio monotone decreasing in t.  Inequality 2 (any t > 0):
    ``cosh(t)/sinh(t)^2 < 2/t^2``.  Everything is evaluated in exp-scaled
    form, so large t only underflows.
    """
    if not 0.0 < a < b:
        raise ValueError("need 0 < a < b")
    if samples < 2:
        raise ValueError("need at least 2 samples")
    t = np.logspace(-2, math.log10(t_max), samples)

    # sinh(at)/sinh(bt) = e^{(a-b)t} (1 - e^{-2at}) / (1 - e^{-2bt})
    ratio = np.exp((a - b) * t) * (-np.expm1(-2.0 * a * t)) / (-np.expm1(-2.0 * b * t))
    ratio_upper = float((a / b - ratio).min())
    ratio_positive = float(ratio.min())
    monotone = float((ratio[:-1] - ratio[1:]).min())

    # cosh(t)/sinh(t)^2 = coth(t) * csch(t), exp-scaled
    w = np.exp(-2.0 * t)
    coth = (1.0 + w) / (1.0 - w)
    csch = 2.0 * np.exp(-t) / (1.0 - w)
    growth = float((2.0 / (t * t) - coth * csch).min())

    passed = (ratio_upper > 0.0 and ratio_positive > 0.0
              and monotone >= 0.0 and growth > 0.0)
    return LemmaReport(passed=passed, n_samples=samples,
                       ratio_upper_margin=ratio_upper,
                       ratio_positive_margin=ratio_positive,
                       monotone_margin=monotone, growth_margin=growth)
