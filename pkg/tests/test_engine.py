import math

import numpy as np
import pytest
import sympy as sp

from berkjones.engine import (
    EXTENDED_PRECISION,
    BoundaryVector,
    PrecisionError,
    TranslatedPolynomial,
    asymptotic_cdf,
    asymptotic_scale,
    boundary_for,
    crossing_probability,
    crossing_probability_naive,
    eicker_limit_cdf,
    eicker_threshold,
    find_threshold,
    monotonize,
    one_sided_pvalue,
    scaled_threshold,
    two_sided_bounds,
    two_sided_pvalue,
)
from berkjones.stats import hc_values

from oracles import ks_plus_tail, mc_crossing, naive_crossing_mp, table_translated


def random_monotone(rng, n):
    return np.sort(rng.random(n))


# -- the small-n table ---------------------------------------------------------

def _iterated_integral(n):
    L = sp.symbols(f"L1:{n + 1}")
    x, t = sp.symbols("x t")
    f = sp.Integer(1)
    for d in range(n):
        f = sp.integrate(f.subs(x, t), (t, L[d], x))
    return L, sp.expand(f.subs(x, 1))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_table_translated_column_is_the_iterated_integral(n):
    L, exact = _iterated_integral(n)
    vals = np.random.default_rng(n).random((5, n))
    for row in vals:
        row = np.sort(row)
        sub = {s: sp.Rational(str(v)) for s, v in zip(L, row)}
        assert float(exact.subs(sub)) == pytest.approx(table_translated(row), abs=1e-14)


def test_table_straightforward_n3_entry_has_a_typo():
    # the printed expanded form for n = 3 disagrees with the integral; the
    # translated form in the same row is right
    L, exact = _iterated_integral(3)
    L1, L2, L3 = L
    printed = (sp.Rational(1, 6) - L1 / 2 - L2 ** 2 / 2 + L1 * L2 - L3 ** 3 / 6
               - L1 * L3 ** 2 / 2 - L2 ** 2 * L3 / 2 + L1 * L2 * L3)
    assert sp.expand(printed - exact) != 0


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_engine_matches_table(n):
    rng = np.random.default_rng(100 + n)
    worst = 0.0
    for _ in range(1000):
        L = random_monotone(rng, n)
        ref = math.factorial(n) * table_translated(L)
        worst = max(worst, abs(crossing_probability(L) - ref))
    assert worst <= 1e-12


def test_small_examples():
    assert crossing_probability([0.3]) == pytest.approx(0.7, abs=1e-15)
    # 2! * (0.5 * 0.64 - 0.5 * 0.09)
    assert crossing_probability([0.2, 0.5]) == pytest.approx(0.55, abs=1e-15)
    assert crossing_probability(np.zeros(10)) == 1.0
    assert crossing_probability([0.1, 0.2, 1.0]) == 0.0


@pytest.mark.parametrize("n", [10, 60, 200])
def test_against_high_precision_naive_oracle(n):
    rng = np.random.default_rng(n)
    for L in (random_monotone(rng, n) * 0.3,
              boundary_for("mn_plus", n, 0.01).limits,
              boundary_for("ks_plus", n, 0.8).limits):
        ref = float(naive_crossing_mp(L, dps=80))
        assert crossing_probability(L) == pytest.approx(ref, abs=1e-13)


def test_n200_reference_value():
    ref = 0.8159270861072615407
    assert crossing_probability(boundary_for("mn_plus", 200, 0.01)) == pytest.approx(ref, abs=1e-14)


def test_naive_basis_agrees_at_small_n():
    rng = np.random.default_rng(1)
    L = random_monotone(rng, 30) * 0.5
    assert crossing_probability_naive(L) == pytest.approx(crossing_probability(L), abs=1e-12)


def test_rescale_neutral_up_to_100():
    rng = np.random.default_rng(2)
    for n in (5, 20, 50, 100):
        L = boundary_for("mn_plus", n, rng.uniform(0.001, 0.2)).limits
        a = crossing_probability(L, rescale=True)
        b = crossing_probability(L, rescale=False)
        assert abs(a - b) <= 1e-12


def test_double_precision_path():
    for n in (50, 500, 1500):
        L = boundary_for("mn_plus", n, 0.01).limits
        ext = crossing_probability(L)
        dbl = crossing_probability(L, precision="double")
        assert dbl == pytest.approx(ext, abs=1e-9)
    with pytest.raises(ValueError):
        crossing_probability([0.1], precision="quad")


def test_extended_precision_available():
    # x86-64 long double; the accuracy targets assume it
    assert EXTENDED_PRECISION


def test_rescaling_contract():
    L = boundary_for("mn_plus", 400, 0.05).limits
    poly = TranslatedPolynomial(L.size)
    for k, lower in enumerate(L, start=1):
        poly.step(lower)
        st = poly.state
        assert st.degree == k
        assert st.coeffs.size == k + 1 and st.shifts.size == k
        peak = float(np.max(np.abs(st.coeffs)))
        assert 2.0 ** -4 <= peak <= 2.0 ** 4
    assert poly.state.log_scale == pytest.approx(poly.state.log2_scale * math.log(2))


def test_state_represents_the_polynomial():
    L = np.array([0.1, 0.25, 0.3, 0.6])
    poly = TranslatedPolynomial(4)
    for lower in L:
        poly.step(lower)
    st = poly.state
    x = 0.9
    val = st.coeffs[0] + sum(st.coeffs[k] * (x + st.shifts[k - 1]) ** k for k in range(1, 5))
    assert float(val) == pytest.approx(float(poly.scaled_value(x)), rel=1e-15)
    # f_4(1) through the table, times 2^scale
    assert float(poly.scaled_value(1)) * 2.0 ** -st.log2_scale == pytest.approx(table_translated(L), rel=1e-14)


def test_precision_error_is_raised(monkeypatch):
    import berkjones.engine as eng
    monkeypatch.setattr(eng.TranslatedPolynomial, "scaled_value", lambda self, x: np.longdouble(np.nan))
    with pytest.raises(PrecisionError):
        crossing_probability([0.1, 0.2])


def test_strictly_decreasing_in_each_limit():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(2, 40))
        L = random_monotone(rng, n) * 0.6
        base = crossing_probability(L)
        j = int(rng.integers(n))
        bumped = L.copy()
        bumped[j:] = np.maximum(bumped[j:], L[j] + 0.05)
        assert crossing_probability(bumped) < base
        assert 0.0 <= base <= 1.0


# -- boundaries ----------------------------------------------------------------

def test_boundary_examples():
    assert boundary_for("mn_plus", 1, 0.3).limits == pytest.approx([0.3], abs=1e-15)
    L = boundary_for("hc2008", 2, math.sqrt(2) * 0.5).limits
    assert L[0] == pytest.approx(0.25, abs=1e-15)
    assert boundary_for("ks_plus", 4, 0.0).limits.tolist() == [0.25, 0.5, 0.75, 1.0]


def test_boundary_errors():
    with pytest.raises(ValueError):
        boundary_for("mn_plus", 5, 1.5)
    with pytest.raises(ValueError):
        boundary_for("ks_plus", 5, -0.1)
    with pytest.raises(ValueError):
        boundary_for("mn", 5, 0.1)


def test_hc2004_boundary_solves_the_statistic():
    n, c = 50, 2.5
    L = boundary_for("hc2004", n, c).limits
    i = np.arange(1, n + 1)
    inner = L > 0
    val = math.sqrt(n) * (i / n - L) / np.sqrt(L * (1 - L))
    assert val[inner] == pytest.approx(np.full(inner.sum(), c), rel=1e-12)


def test_hc_truncation_frees_upper_indices():
    L = boundary_for("hc2008", 10, 1.0, alpha0=0.3).limits
    assert np.all(L[3:] == 0) and L[2] > 0


def test_monotonize_examples():
    b = monotonize(BoundaryVector(np.array([0.5, 0.2, 0.7])))
    assert b.limits.tolist() == [0.5, 0.5, 0.7] and b.monotonized
    m = np.array([0.1, 0.2, 0.3])
    assert monotonize(BoundaryVector(m)).limits.tolist() == m.tolist()


def test_monotonize_preserves_event_monte_carlo():
    rng = np.random.default_rng(4)
    L = np.array([0.05, 0.3, 0.1, 0.2, 0.6, 0.4])
    exact = crossing_probability(L)
    assert exact == crossing_probability(monotonize(BoundaryVector(L)))
    # the raw (unmonotonized) event estimated directly
    p, se = mc_crossing(L, 400_000, rng)
    assert abs(p - exact) < 4 * se


# -- one-sided p-values --------------------------------------------------------

def test_mn_plus_identity_at_n1():
    for c in (0.01, 0.3, 0.77):
        assert one_sided_pvalue("mn_plus", 1, c) == pytest.approx(c, abs=1e-15)


def test_mn_minus_equals_mn_plus():
    for n, c in ((3, 0.1), (50, 0.02), (400, 0.001)):
        assert one_sided_pvalue("mn_minus", n, c) == one_sided_pvalue("mn_plus", n, c)


def test_degenerate_thresholds():
    assert one_sided_pvalue("mn_plus", 10, 0.0) == 0.0
    assert one_sided_pvalue("mn_plus", 10, 1.0) == 1.0
    assert one_sided_pvalue("ks_plus", 10, 0.0) == 1.0


@pytest.mark.parametrize("n", [5, 10, 50])
def test_ks_plus_closed_form(n):
    for c in (0.3, 0.6, 1.0, 1.5):
        assert one_sided_pvalue("ks_plus", n, c) == pytest.approx(ks_plus_tail(n, c), abs=1e-12)


@pytest.mark.parametrize("n", [5, 10, 50])
def test_ks_plus_monte_carlo(n):
    rng = np.random.default_rng(n)
    for c in (0.5, 1.0):
        p, se = mc_crossing(boundary_for("ks_plus", n, c).limits, 1_000_000, rng, chunk=100_000)
        assert abs((1 - p) - one_sided_pvalue("ks_plus", n, c)) < 4 * se


@pytest.mark.parametrize("n", [10, 100, 1000])
def test_pvalue_monotone_in_c(n):
    c = np.linspace(1e-6, 0.3, 60)
    p = [one_sided_pvalue("mn_plus", n, x) for x in c]
    assert np.all(np.diff(p) >= 0)
    c = np.linspace(0.05, 3, 40)
    p = [one_sided_pvalue("ks_plus", n, x) for x in c]
    assert np.all(np.diff(p) <= 0)
    p = [one_sided_pvalue("hc2008", n, x) for x in c]
    assert np.all(np.diff(p) <= 0)


def test_hc_pvalue_against_monte_carlo():
    rng = np.random.default_rng(12)
    n, c, N = 40, 2.0, 200_000
    vals = hc_values(np.sort(rng.random((N, n)), axis=1), "hc2004")
    emp = (vals >= c).mean()
    se = math.sqrt(emp * (1 - emp) / N)
    assert abs(emp - one_sided_pvalue("hc2004", n, c)) < 4 * se


# -- two-sided -----------------------------------------------------------------

def test_two_sided_bounds_examples():
    assert two_sided_bounds(0.0) == (0.0, 0.0)
    assert two_sided_bounds(1.0) == (1.0, 1.0)
    lo, hi = two_sided_bounds(0.6)
    assert (lo, hi) == pytest.approx((0.84, 1.0))


def test_two_sided_pvalue_record():
    r = two_sided_pvalue(100, 0.002)
    assert r.two_sided_lower <= r.two_sided_asymptotic <= r.two_sided_upper
    assert r.exact_one_sided == one_sided_pvalue("mn_plus", 100, 0.002)


def test_two_sided_monte_carlo_inside_bounds():
    rng = np.random.default_rng(5)
    n, N = 100, 100_000
    from berkjones.stats import mn_values
    m = np.concatenate([mn_values(np.sort(rng.random((20_000, n)), axis=1)) for _ in range(N // 20_000)])
    for c in (0.0005, 0.002, 0.01, 0.05):
        r = two_sided_pvalue(n, c)
        emp = (m <= c).mean()
        se = math.sqrt(emp * (1 - emp) / N)
        assert r.two_sided_lower - 4 * se <= emp <= r.two_sided_upper + 4 * se


# -- asymptotics ---------------------------------------------------------------

def test_asymptotic_cdf():
    assert asymptotic_cdf(math.log(2)) == pytest.approx(0.5, abs=1e-15)
    for x in (0.1, 1.0, 3.0):
        one = asymptotic_cdf(x, "one")
        assert asymptotic_cdf(x, "two") == pytest.approx(1 - (1 - one) ** 2, abs=1e-15)
    with pytest.raises(ValueError):
        asymptotic_cdf(0.0)
    with pytest.raises(ValueError):
        asymptotic_scale(2)


def test_asymptotic_agreement_at_1e4():
    # the acceptance suite sweeps more x values and n
    n = 10_000
    for x in (1.0,):
        c = x / asymptotic_scale(n)
        assert scaled_threshold(c, n) == pytest.approx(x)
        assert abs(one_sided_pvalue("mn_plus", n, c) - asymptotic_cdf(x)) <= 0.15


def test_scaled_pvalues_against_monte_carlo():
    # the exact values behind the non-monotone approach to 1 - exp(-x)
    # (distance 0.098 at n = 100, 0.117 at n = 1000 for x = 2) are real
    rng = np.random.default_rng(10)
    for n in (100, 1000):
        for x in (1.0, 2.0):
            c = x / asymptotic_scale(n)
            p, se = mc_crossing(boundary_for("mn_plus", n, c).limits, 100_000, rng, chunk=10_000)
            assert abs((1 - p) - one_sided_pvalue("mn_plus", n, c)) < 4 * se


def test_eicker_threshold():
    assert eicker_threshold(10_000, 0.0) == pytest.approx(2.2966, abs=1e-4)
    t = np.linspace(-3, 3, 13)
    tau = [eicker_threshold(1000, v) for v in t]
    assert np.all(np.diff(tau) > 0)
    with pytest.raises(ValueError):
        eicker_threshold(10, 0.0)


def test_eicker_limit_monte_carlo():
    # the supremum of the standardized process equals HC2008
    rng = np.random.default_rng(0)
    n, N = 100_000, 2000
    v = np.concatenate([hc_values(np.sort(rng.random((100, n)), axis=1), "hc2008")
                        for _ in range(N // 100)])
    for t in (0.0, 1.0, 2.0):
        emp = (v > eicker_threshold(n, t)).mean()
        assert abs(emp - (1 - eicker_limit_cdf(t))) <= 0.1


# -- thresholds ----------------------------------------------------------------

def test_find_threshold_trivial():
    assert find_threshold("mn_plus", 1, 0.05) == pytest.approx(0.05, abs=1e-12)


def test_find_threshold_round_trip():
    rng = np.random.default_rng(6)
    for _ in range(12):
        kind = rng.choice(["mn_plus", "mn_minus", "ks_plus", "ks_minus", "hc2004", "hc2008"])
        n = int(rng.integers(2, 300))
        alpha = float(rng.uniform(0.001, 0.3))
        c = find_threshold(kind, n, alpha)
        assert abs(one_sided_pvalue(kind, n, c) - alpha) <= 1e-8


def test_find_threshold_two_sided_matches_estimate():
    c = find_threshold("mn", 100, 0.05)
    r = two_sided_pvalue(100, c)
    assert r.two_sided_asymptotic == pytest.approx(0.05, abs=1e-8)


def test_find_threshold_monte_carlo_calibration():
    rng = np.random.default_rng(7)
    n, alpha, N = 100, 0.01, 1_000_000
    c = find_threshold("mn_plus", n, alpha)
    p, _ = mc_crossing(boundary_for("mn_plus", n, c).limits, N, rng, chunk=50_000)
    assert abs((1 - p) - alpha) <= 4 * math.sqrt(alpha * (1 - alpha) / N)


def test_hc_threshold_beyond_sqrt_n():
    # the 1% HC2004 threshold at n = 100 exceeds 10 = sqrt(n)
    c = find_threshold("hc2004", 100, 0.01)
    assert c > 10
    assert one_sided_pvalue("hc2004", 100, c) == pytest.approx(0.01, abs=1e-8)


def test_find_threshold_errors():
    with pytest.raises(ValueError):
        find_threshold("mn_plus", 10, 1.5)


@pytest.mark.slow
def test_scale_n50000():
    n = 50_000
    c = 0.5 / asymptotic_scale(n)
    p = [one_sided_pvalue("mn_plus", n, x) for x in (0.9 * c, c, 1.1 * c)]
    assert all(0 <= v <= 1 for v in p)
    assert p[0] < p[1] < p[2]
