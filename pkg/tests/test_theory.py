"""Closed-form symbols, iteration matrices, bounds, and their oracles.

The multi-subdomain banded assembly is checked against two independent
references: the float64 continuous-solve path (different algebra, same
arithmetic) and a 40-digit mpmath reimplementation of the continuous sweep
(same algebra, different arithmetic).  Together they pin down both the
transcribed coefficients and the floating-point conditioning.
"""

import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chdd.core import Params
from chdd.theory import (
    characteristic_residual,
    dn_contraction_bound,
    dn_iteration_matrix,
    dn_rate_exact,
    lemma_checks,
    nn_bounds,
    nn_iteration_matrix,
    symbols,
    vieta_residual,
)

REAL = Params(0.01, 1e-3)       # real-root regime
OSC = Params(0.01, 1e-6)        # conjugate-pair regime
BENIGN = Params(0.1, 1.0)       # real roots with xi*d ~ 1 on O(1) widths


# --------------------------------------------------------------------------
# symbols
# --------------------------------------------------------------------------

def test_symbols_real_values():
    s = symbols(REAL)
    assert s.is_real
    assert s.lambda1 == pytest.approx(8872.983346207417, rel=1e-12)
    assert s.lambda2 == pytest.approx(1127.0166537925839, rel=1e-12)
    assert s.lam == pytest.approx(s.lambda1 - s.lambda2)
    assert s.xi1 == pytest.approx(math.sqrt(s.lambda1))
    assert s.xi1 > s.xi3 > 0
    assert s.eigvec1 == (REAL.delta_t * s.lambda1, 1.0)


def test_symbols_conjugate_pair():
    s = symbols(OSC)
    assert not s.is_real
    # real part is c^2 / (2 eps^2) exactly
    assert s.lambda1.real == pytest.approx(5000.0, rel=1e-12)
    assert s.lambda1.imag > 0
    assert abs(s.lambda2 - s.lambda1.conjugate()) <= 1e-12 * abs(s.lambda1)
    # principal roots: positive real part dominating the imaginary part
    assert s.xi1.real > abs(s.xi1.imag) > 0
    assert abs(s.xi3 - s.xi1.conjugate()) <= 1e-12 * abs(s.xi1)


def test_symbols_degenerate_raises():
    eps, c = 0.02, 1.1
    dt = 4 * eps**2 / c**4
    with pytest.raises(ValueError):
        symbols(Params(eps, dt, c=c))


def test_symbols_mode_shift():
    s0 = symbols(REAL)
    sp = symbols(REAL, p=math.pi)
    assert sp.p == pytest.approx(math.pi)
    # roots do not move with p; only xi picks up the transverse frequency
    assert sp.lambda1 == pytest.approx(s0.lambda1)
    assert sp.xi1**2 - math.pi**2 == pytest.approx(s0.lambda1, rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(
    log_eps=st.floats(min_value=-3, max_value=-1),
    log_dt=st.floats(min_value=-8, max_value=-1),
    c=st.floats(min_value=0.1, max_value=2.0),
)
def test_symbols_identities_hold(log_eps, log_dt, c):
    prm = Params(10.0**log_eps, 10.0**log_dt, c=c)
    if prm.discriminant == 0.0:
        return
    s = symbols(prm)
    assert vieta_residual(s) <= 1e-12
    assert characteristic_residual(s) <= 1e-10


# --------------------------------------------------------------------------
# two-subdomain matrix
# --------------------------------------------------------------------------

def test_dn_equal_sizes_closed_form():
    s = symbols(REAL)
    for theta in (0.1, 0.25, 0.5, 0.9):
        m = dn_iteration_matrix(s, 0.7, 0.7, theta)
        assert np.array_equal(m.H, (1 - 2 * theta) * np.eye(2))
    # theta = 1 flips the trace error exactly: g1 = -g0
    m = dn_iteration_matrix(s, 0.7, 0.7, 1.0)
    assert np.array_equal(m.H @ np.array([3.0, -2.0]), np.array([-3.0, 2.0]))


@pytest.mark.parametrize("prm", [REAL, OSC, BENIGN])
def test_dn_eigenvalues_match_closed_form(prm):
    s = symbols(prm)
    m = dn_iteration_matrix(s, 0.4, 0.6, 0.5)
    got = np.sort(np.abs(m.eigenvalues))
    want = np.sort(np.abs(dn_rate_exact(s, 0.4, 0.6)))
    assert np.allclose(got, want, rtol=1e-10, atol=1e-14)
    assert m.spectral_radius <= dn_contraction_bound(prm, 0.4, 0.6) + 1e-12


def test_dn_matrix_real_in_oscillatory_regime():
    s = symbols(OSC)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        m = dn_iteration_matrix(s, 0.4, 0.6, 0.5)
    assert m.H.dtype == np.float64


def test_dn_contraction_bound_values():
    assert dn_contraction_bound(REAL, 0.4, 0.6) == pytest.approx(1 / 6)
    assert dn_contraction_bound(REAL, 1.5, 1.0) == pytest.approx(0.25)
    assert dn_contraction_bound(OSC, 0.4, 0.6) == pytest.approx(0.2 / (math.sqrt(2) * 0.6))


def test_dn_contraction_bound_warns_on_divergence():
    with pytest.warns(UserWarning, match="swap"):
        b = dn_contraction_bound(REAL, 1.5, 0.5)       # a = 3b
    assert b >= 1.0
    with pytest.warns(UserWarning, match="swap"):
        dn_contraction_bound(OSC, 1.0 + math.sqrt(2) + 0.01, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        dn_contraction_bound(REAL, 1.4, 0.5)           # just below the line


def test_dn_rate_decays_with_mode_frequency():
    # higher transverse modes contract faster; mode 1 dominates
    rates = []
    for m in (1, 2, 5, 17):
        s = symbols(REAL, p=m * math.pi / 1.0)
        rates.append(np.abs(dn_rate_exact(s, 0.4, 0.6)).max())
    assert all(r1 > r2 for r1, r2 in zip(rates, rates[1:]))


def test_dn_large_arguments_finite():
    # xi*a in the thousands: tanh saturates, nothing overflows
    s = symbols(Params(0.001, 1e-2))
    m = dn_iteration_matrix(s, 30.0, 70.0, 0.5)
    assert np.isfinite(m.H).all()
    assert np.isfinite(dn_rate_exact(s, 30.0, 70.0)).all()


# --------------------------------------------------------------------------
# multi-subdomain matrix: banded closed forms vs continuous solves
# --------------------------------------------------------------------------

@pytest.mark.parametrize("prm", [REAL, OSC, BENIGN])
@pytest.mark.parametrize("n_sub", [5, 6, 8, 11])
def test_nn_banded_matches_continuous(prm, n_sub):
    s = symbols(prm)
    rng = np.random.default_rng(n_sub)
    for widths in ([0.8] * n_sub, list(0.5 + 1.5 * rng.random(n_sub))):
        tb = nn_iteration_matrix(s, widths, 0.25, method="banded")
        tc = nn_iteration_matrix(s, widths, 0.25, method="continuous")
        scale = 1.0 + np.abs(tc.T).max()
        assert np.abs(tb.T - tc.T).max() / scale < 1e-12


def test_nn_printed_variants_are_material():
    # the verbatim text coefficients disagree with both oracles
    s = symbols(BENIGN)
    w = [0.9, 1.3, 0.7, 1.1, 0.8, 1.2, 1.0]
    tp = nn_iteration_matrix(s, w, 0.25, method="banded", as_printed=True)
    tc = nn_iteration_matrix(s, w, 0.25, method="continuous")
    assert np.abs(tp.T - tc.T).max() > 0.1


def test_nn_theta_composition():
    s = symbols(BENIGN)
    w = [0.9, 1.3, 0.7, 1.1, 0.8, 1.2, 1.0]
    a = nn_iteration_matrix(s, w, 1.0).T
    for theta in (0.25, 0.4):
        t = nn_iteration_matrix(s, w, theta).T
        assert np.allclose(t, (1 - theta) * np.eye(len(a)) + theta * a, rtol=0, atol=1e-13)


def test_nn_row_pattern_and_norms():
    s = symbols(REAL)
    m = nn_iteration_matrix(s, [0.4] * 9, 0.25)
    assert m.S == (6, 8, 10, 10, 10, 10, 8, 6)
    a, b = m.row_sums()
    assert max(a.max(), b.max()) == pytest.approx(m.norm_inf, abs=1e-15)
    # everything outside the five-interface band is exactly zero
    N = 9
    for i in range(1, N):
        for j in range(1, N):
            if abs(i - j) > 2:
                assert np.all(m.T[2 * i - 2 : 2 * i, 2 * j - 2 : 2 * j] == 0.0)


def test_nn_small_counts_and_errors():
    s = symbols(REAL)
    for n in (3, 4):
        m = nn_iteration_matrix(s, [0.5] * n, 0.25)
        assert m.method == "continuous"
        assert m.T.shape == (2 * n - 2, 2 * n - 2)
    with pytest.raises(ValueError):
        nn_iteration_matrix(s, [0.5, 0.5], 0.25)
    with pytest.raises(ValueError):
        nn_iteration_matrix(s, [0.5] * 4, 0.25, method="banded")
    with pytest.raises(ValueError):
        nn_iteration_matrix(s, [0.5] * 6, 0.25, method="continuous", as_printed=True)
    with pytest.raises(ValueError):
        nn_iteration_matrix(s, [0.5, -0.5, 0.5], 0.25)


def test_nn_oscillatory_regime_matrix_is_real():
    s = symbols(OSC)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        m = nn_iteration_matrix(s, [2.5] * 8, 0.25)
    assert m.T.dtype == np.float64


def test_nn_equal_widths_contract_fast():
    # wide equal subdomains: iteration matrix is tiny at theta = 1/4
    s = symbols(REAL)
    m = nn_iteration_matrix(s, [2.5] * 8, 0.25)
    assert m.norm_inf < 1e-6


# --- high-precision oracle ------------------------------------------------

def _mp_symbols(prm):
    eps2 = mpmath.mpf(prm.epsilon) ** 2
    dt = mpmath.mpf(prm.delta_t)
    c2 = mpmath.mpf(prm.c) ** 2
    disc = c2 * c2 * dt * dt - 4 * eps2 * dt
    r = mpmath.sqrt(disc)
    lam1 = (c2 * dt + r) / (2 * eps2 * dt)
    lam2 = (c2 * dt - r) / (2 * eps2 * dt)
    return lam1, lam2, mpmath.sqrt(lam1), mpmath.sqrt(lam2)


def _mp_face_rows(lam1, lam2, x1, x3, dt, d):
    E1 = mpmath.exp(-x1 * d)
    E3 = mpmath.exp(-x3 * d)
    a1, a3 = dt * lam1, dt * lam2
    return {
        "u0": [a1, a1 * E1, a3, a3 * E3],
        "v0": [1, E1, 1, E3],
        "ud": [a1 * E1, a1, a3 * E3, a3],
        "vd": [E1, 1, E3, 1],
        "du0": [-a1 * x1, a1 * x1 * E1, -a3 * x3, a3 * x3 * E3],
        "dv0": [-x1, x1 * E1, -x3, x3 * E3],
        "dud": [-a1 * x1 * E1, a1 * x1, -a3 * x3 * E3, a3 * x3],
        "dvd": [-x1 * E1, x1, -x3 * E3, x3],
    }


def _mp_nn_matrix(prm, widths, theta, dps=40):
    """40-digit reimplementation of the continuous sweep, column by column."""
    with mpmath.workdps(dps):
        lam1, lam2, x1, x3 = _mp_symbols(prm)
        dt = mpmath.mpf(prm.delta_t)
        F = [_mp_face_rows(lam1, lam2, x1, x3, dt, mpmath.mpf(d)) for d in widths]
        N = len(widths)
        n = 2 * (N - 1)
        dot = lambda row, c: mpmath.fsum(r * ci for r, ci in zip(row, c))

        def sweep(g, h):
            dir_c = []
            for i in range(N):
                f = F[i]
                rows, rhs = [], []
                if i == 0:
                    rows += [f["du0"], f["dv0"]]; rhs += [0, 0]
                else:
                    rows += [f["u0"], f["v0"]]; rhs += [g[i - 1], h[i - 1]]
                if i == N - 1:
                    rows += [f["dud"], f["dvd"]]; rhs += [0, 0]
                else:
                    rows += [f["ud"], f["vd"]]; rhs += [g[i], h[i]]
                dir_c.append(mpmath.lu_solve(mpmath.matrix(rows), mpmath.matrix(rhs)))
            ju = [dot(F[k]["dud"], dir_c[k]) - dot(F[k + 1]["du0"], dir_c[k + 1]) for k in range(N - 1)]
            jv = [dot(F[k]["dvd"], dir_c[k]) - dot(F[k + 1]["dv0"], dir_c[k + 1]) for k in range(N - 1)]
            neu_c = []
            for i in range(N):
                f = F[i]
                rows = [f["du0"], f["dv0"], f["dud"], f["dvd"]]
                rhs = [0 if i == 0 else ju[i - 1], 0 if i == 0 else jv[i - 1],
                       0 if i == N - 1 else ju[i], 0 if i == N - 1 else jv[i]]
                neu_c.append(mpmath.lu_solve(mpmath.matrix(rows), mpmath.matrix(rhs)))
            gn = [g[k] - theta * (dot(F[k]["ud"], neu_c[k]) - dot(F[k + 1]["u0"], neu_c[k + 1]))
                  for k in range(N - 1)]
            hn = [h[k] - theta * (dot(F[k]["vd"], neu_c[k]) - dot(F[k + 1]["v0"], neu_c[k + 1]))
                  for k in range(N - 1)]
            return gn, hn

        T = np.zeros((n, n))
        for col in range(n):
            g = [mpmath.mpf(0)] * (N - 1)
            h = [mpmath.mpf(0)] * (N - 1)
            (g if col % 2 == 0 else h)[col // 2] = mpmath.mpf(1)
            gn, hn = sweep(g, h)
            T[0::2, col] = [float(v) for v in gn]
            T[1::2, col] = [float(v) for v in hn]
        return T


@pytest.mark.parametrize("widths", [[0.8] * 6, [0.9, 1.3, 0.7, 1.1, 0.8, 1.2, 1.0]])
def test_nn_banded_matches_mpmath_oracle(widths):
    T_mp = _mp_nn_matrix(BENIGN, widths, 0.25)
    tb = nn_iteration_matrix(symbols(BENIGN), widths, 0.25, method="banded")
    scale = 1.0 + np.abs(T_mp).max()
    assert np.abs(tb.T - T_mp).max() / scale < 1e-12


# --------------------------------------------------------------------------
# bound constants
# --------------------------------------------------------------------------

def test_nn_bounds_equal_values():
    s = symbols(REAL)
    bs = nn_bounds(s, [2.5] * 8)
    lam1, lam2 = s.lambda1, s.lambda2
    lam = lam1 - lam2
    dt = REAL.delta_t
    assert bs.status == "ok" and bs.equal_widths
    assert bs.alpha_star == pytest.approx(12 * (1 + dt * lam1) / (lam * 2.5**2), rel=1e-12)
    assert bs.beta_star == pytest.approx(12 * (1 + dt * lam1) / (dt * lam * lam2 * 2.5**2), rel=1e-12)
    assert bs.converged_by_theory
    # halving the width quadruples both constants
    bs2 = nn_bounds(s, [1.25] * 8)
    assert bs2.alpha_star == pytest.approx(4 * bs.alpha_star, rel=1e-12)


def test_nn_bounds_threshold_flips():
    s = symbols(REAL)
    thr = nn_bounds(s, [1.0] * 6).d_star
    assert nn_bounds(s, [1.01 * thr] * 6).converged_by_theory
    assert not nn_bounds(s, [0.99 * thr] * 6).converged_by_theory


def test_nn_bounds_unequal_pair():
    s = symbols(REAL)
    bs = nn_bounds(s, [1.0, 2.0] * 4)
    assert not bs.equal_widths
    assert bs.d_measured == pytest.approx(1.0)
    assert bs.alpha_bar > 0 and bs.beta_bar > 0
    # the printed threshold drops one unit of the dt*lam1 weight
    assert bs.d_bar_printed <= bs.d_bar_consistent
    assert bs.threshold == pytest.approx(bs.d_bar_consistent)


def test_nn_bounds_2d():
    s = symbols(REAL)
    bs = nn_bounds(s, [2.0] * 8, dimension=2, y_length=1.0)
    assert bs.status == "ok"
    assert bs.alpha_e_star == pytest.approx(576 * bs.C1, rel=1e-12)
    assert bs.rate_g == pytest.approx(math.sqrt(bs.alpha_e_star), rel=1e-12)
    bu = nn_bounds(s, [1.0, 2.0] * 4, dimension=2, y_length=1.0)
    assert bu.alpha_u_star == pytest.approx(462.25 * bu.C1, rel=1e-12)
    with pytest.raises(ValueError):
        nn_bounds(s, [2.0] * 8, dimension=2)  # y_length required


def test_nn_bounds_oscillatory_regime():
    bs = nn_bounds(symbols(OSC), [2.5] * 8)
    assert bs.status == "bounds not provided"
    assert bs.alpha_star is None and bs.threshold is None


def test_nn_norm_below_bounds_on_random_draws():
    # wide-subdomain contraction: row sums sit below the bound constants
    rng = np.random.default_rng(12)
    checked = 0
    while checked < 25:
        prm = Params(10 ** rng.uniform(-3, -1), 10 ** rng.uniform(-8, -1), c=rng.uniform(0.1, 2.0))
        if not prm.is_real_symbol:
            continue
        s = symbols(prm)
        n = int(rng.integers(5, 10))
        d = 1.5 * nn_bounds(s, [1.0] * n).d_star
        bs = nn_bounds(s, [d] * n)
        m = nn_iteration_matrix(s, [d] * n, 0.25)
        a, b = m.row_sums()
        assert m.norm_inf < 1.0
        assert a.max() < bs.alpha_star and b.max() < bs.beta_star
        checked += 1


# --------------------------------------------------------------------------
# scalar lemmas
# --------------------------------------------------------------------------

def test_lemma_checks_pass():
    rep = lemma_checks(a=1.0, b=2.0, samples=10_000)
    assert rep.passed
    assert rep.ratio_upper_margin > 0
    assert rep.ratio_positive_margin > 0
    assert rep.monotone_margin >= 0
    assert rep.growth_margin > 0
    assert rep.n_samples == 10_000


def test_lemma_checks_other_ratio():
    assert lemma_checks(a=0.3, b=1.7, samples=2_000).passed


def test_lemma_checks_rejects_bad_input():
    with pytest.raises(ValueError):
        lemma_checks(a=2.0, b=1.0)
    with pytest.raises(ValueError):
        lemma_checks(a=1.0, b=2.0, samples=1)


def test_lemma_growth_margin_at_grid_end():
    # 2/t^2 - cosh/sinh^2 shrinks monotonically, so the reported margin is
    # the gap at t_max
    rep = lemma_checks(samples=50_000, t_max=50.0)
    t = 50.0
    gap_end = 2 / t**2 - math.cosh(t) / math.sinh(t) ** 2
    assert rep.growth_margin == pytest.approx(gap_end, rel=1e-9)
