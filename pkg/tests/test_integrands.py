import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udint.errors import InvalidArgument, MissingOracleError
from udint.integrands import (
    Integrand,
    constant,
    counterexample_integrand,
    get_integrand,
    integrand_from_json,
    inv_sqrt_shift,
    level_set_measure,
    negative_part,
    partial_integral_below,
    positive_part,
    without_analytics,
)
from udint.quadrature import adaptive_simpson, integrate_excluding
from udint.sequences import Kronecker

NONNEG = ["square", "log_recip", "inv_sqrt"]
MP_FORMS = {
    "square": lambda x: x**2,
    "log_recip": lambda x: mpmath.log(1 / x),
    "inv_sqrt": lambda x: 1 / mpmath.sqrt(x),
    "signed_demo": lambda x: x**2 - mpmath.log(1 / x),
}


def mp_integral(fn, a, b, breaks=()):
    with mpmath.workdps(30):
        pts = sorted({mpmath.mpf(a), mpmath.mpf(b), *(mpmath.mpf(p) for p in breaks)})
        return float(mpmath.quad(fn, pts))


# Catalog ---------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["square", "log_recip", "inv_sqrt", "signed_demo"])
def test_catalog_integral_matches_quadrature(name):
    f = get_integrand(name)
    oracle = mp_integral(MP_FORMS[name], 0, 1)
    assert f.exact_integral == pytest.approx(oracle, rel=1e-8)


@pytest.mark.parametrize("p", ["1/2", "1/3", "7/10"])
def test_inv_sqrt_shift_integral(p):
    f = inv_sqrt_shift(p)
    pf = float(mpmath.mpf(eval(p)))
    oracle = mp_integral(lambda x: 1 / mpmath.sqrt(abs(x - pf)), 0, 1, breaks=(pf,))
    assert f.exact_integral == pytest.approx(oracle, rel=1e-8)


def test_catalog_analytic_values():
    assert get_integrand("square").exact_integral == pytest.approx(1 / 3)
    assert get_integrand("log_recip").exact_integral == 1
    assert get_integrand("inv_sqrt").exact_integral == 2
    assert inv_sqrt_shift("1/2").exact_integral == pytest.approx(2 * math.sqrt(2))


def test_signed_demo_part_integrals():
    f = get_integrand("signed_demo")
    with mpmath.workdps(30):
        g = lambda x: max(x**2 - mpmath.log(1 / x), 0)
        root = mpmath.findroot(lambda x: x**2 + mpmath.log(x), 0.65)
        pos = float(mpmath.quad(g, [0, root, 1]))
    assert positive_part(f).exact_integral == pytest.approx(pos, rel=1e-12)
    assert negative_part(f).exact_integral == pytest.approx(-2 / 3 - pos, rel=1e-12)


def test_singular_points_are_undefined():
    assert math.isnan(get_integrand("log_recip")(0.0))
    assert math.isnan(get_integrand("inv_sqrt")(0.0))
    assert math.isnan(inv_sqrt_shift("1/2")(0.5))
    assert math.isnan(get_integrand("square")(1.5))
    assert inv_sqrt_shift("1/2").singular_points == (0.5,)


def test_lookup_errors():
    with pytest.raises(InvalidArgument):
        get_integrand("cube")
    with pytest.raises(InvalidArgument):
        get_integrand("square", p="1/2")
    with pytest.raises(InvalidArgument):
        inv_sqrt_shift("3/2")


def test_json_reference():
    f = integrand_from_json({"integrand": "inv_sqrt_shift", "p": "1/2"})
    assert f.exact_integral == pytest.approx(2 * math.sqrt(2))
    assert integrand_from_json(f.to_json()).exact_integral == f.exact_integral
    assert integrand_from_json("square").name == "square"


# Sign decomposition ----------------------------------------------------------------


def test_sign_split_example():
    f = Integrand("shifted", lambda x: x - 0.5)
    assert positive_part(f)(0.75) == 0.25
    assert negative_part(f)(0.25) == -0.25


def test_negative_part_of_nonneg_is_zero():
    f = get_integrand("square")
    x = np.linspace(0.001, 0.999, 101)
    assert np.all(negative_part(f)(x) == 0.0)
    assert negative_part(f).exact_integral == 0.0


def test_decomposition_identities_on_grid():
    f = get_integrand("signed_demo")
    x = (np.arange(10**4) + 0.5) / 10**4
    fp, fm = positive_part(f)(x), negative_part(f)(x)
    assert np.array_equal(fp + fm, f(x))
    assert np.all(fp * fm == 0)
    assert np.all(fp >= 0) and np.all(fm <= 0)


# Level sets ---------------------------------------------------------------------------


def test_level_set_examples():
    assert level_set_measure(get_integrand("log_recip"), 1) == pytest.approx(math.exp(-1), abs=1e-15)
    assert level_set_measure(get_integrand("inv_sqrt"), 2) == 0.25
    for name in NONNEG + ["signed_demo"]:
        f = get_integrand(name)
        assert level_set_measure(f, -1e300) == 1.0


@pytest.mark.parametrize("name", NONNEG + ["inv_sqrt_shift"])
def test_level_measure_nonincreasing_in_unit_range(name):
    f = get_integrand(name)
    t = np.linspace(-2, 50, 2001)
    m = np.array([level_set_measure(f, s) for s in t])
    assert np.all((m >= 0) & (m <= 1))
    assert np.all(np.diff(m) <= 0)


@pytest.mark.parametrize("name", ["square", "log_recip", "inv_sqrt", "identity"])
@pytest.mark.parametrize("t", [0.05, 0.5, 1.0, 1.7, 3.0, 12.0])
def test_level_measure_numeric_fallback_agrees(name, t):
    f = get_integrand(name)
    assert level_set_measure(without_analytics(f), t) == pytest.approx(level_set_measure(f, t), abs=1e-9)


def test_level_measure_fallback_needs_monotonicity():
    f = without_analytics(inv_sqrt_shift("1/2"))
    with pytest.raises(MissingOracleError):
        level_set_measure(f, 3.0)


@pytest.mark.parametrize("name, eps_list", [(n, (1.0, 0.5, 0.1)) for n in NONNEG])
def test_tail_bound(name, eps_list):
    f = get_integrand(name)
    for eps in eps_list:
        k = np.arange(1, 10**4 + 1)
        total = math.fsum(f.level_measure(k * eps).tolist())
        assert total <= f.exact_integral / eps + 1


# Partial integrals ---------------------------------------------------------------------


def test_partial_integral_examples():
    assert partial_integral_below(get_integrand("log_recip"), 1) == pytest.approx(1 - 2 / math.e, abs=1e-15)
    assert partial_integral_below(get_integrand("inv_sqrt"), 2) == 1.0
    for name in NONNEG:
        assert partial_integral_below(get_integrand(name), 0) == 0
        assert partial_integral_below(get_integrand(name), -3) == 0


@pytest.mark.parametrize("name", NONNEG)
@pytest.mark.parametrize("t", [0.3, 1.0, 2.5, 10.0])
def test_partial_integral_matches_quadrature(name, t):
    f = get_integrand(name)
    fn = MP_FORMS[name]
    with mpmath.workdps(30):
        g = lambda x: fn(x) if fn(x) < t else 0
        # split where f crosses t so the integrand is smooth on each piece
        cross = {"square": mpmath.sqrt(min(t, 1)), "log_recip": mpmath.e ** (-t),
                 "inv_sqrt": min(1, 1 / mpmath.mpf(t) ** 2)}[name]
        oracle = float(mpmath.quad(g, [0, cross, 1]))
    assert partial_integral_below(f, t) == pytest.approx(oracle, rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("name", NONNEG + ["inv_sqrt_shift"])
def test_partial_integral_monotone_to_total(name):
    f = get_integrand(name)
    vals = [partial_integral_below(f, 2.0**k) for k in range(21)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(f.exact_integral, rel=3e-3)
    assert abs(vals[-1] - f.exact_integral) <= abs(vals[10] - f.exact_integral)


@pytest.mark.parametrize("name", ["square", "log_recip", "inv_sqrt"])
@pytest.mark.parametrize("t", [0.5, 2.0, 40.0])
def test_partial_integral_numeric_fallback_agrees(name, t):
    f = get_integrand(name)
    assert partial_integral_below(without_analytics(f), t) == pytest.approx(
        partial_integral_below(f, t), rel=1e-6, abs=1e-12)


def test_partial_integral_fallback_non_monotone():
    f = inv_sqrt_shift("1/2")
    assert partial_integral_below(without_analytics(f), 100.0) == pytest.approx(
        partial_integral_below(f, 100.0), rel=1e-8)


def test_partial_integral_rejects_signed():
    with pytest.raises(InvalidArgument):
        partial_integral_below(get_integrand("signed_demo"), 1.0)


# Counterexample ----------------------------------------------------------------------


def test_counterexample_membership():
    pts = Kronecker.named("sqrt2").take(1000)
    f = counterexample_integrand(pts)
    assert f.exact_integral == 1
    assert np.all(f(pts) == 0.0)
    assert f(0.5) == 1.0
    # bit-identical only: the neighbouring double is not in the set
    assert f(np.nextafter(pts[3], 1.0)) == 1.0


def test_counterexample_level_and_partial():
    f = counterexample_integrand([0.25])
    assert level_set_measure(f, 0.5) == 1.0
    assert level_set_measure(f, 1.5) == 0.0
    assert partial_integral_below(f, 0.5) == 0.0
    assert partial_integral_below(f, 2.0) == 1.0


# Quadrature ---------------------------------------------------------------------------


def test_adaptive_simpson_polynomial_exact():
    assert adaptive_simpson(lambda x: x**3, 0.0, 2.0) == pytest.approx(4.0, rel=1e-14)


def test_integrate_excluding_handles_singularities():
    inv_sqrt = get_integrand("inv_sqrt")
    assert integrate_excluding(inv_sqrt, 0.0, 1.0, (0.0,)) == pytest.approx(2.0, rel=1e-7)
    shift = inv_sqrt_shift("1/3")
    assert integrate_excluding(shift, 0.0, 1.0, shift.singular_points) == pytest.approx(
        shift.exact_integral, rel=1e-7)
    log_recip = get_integrand("log_recip")
    assert integrate_excluding(log_recip, 0.0, 1.0, (0.0,)) == pytest.approx(1.0, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(c=st.floats(-5, 5), t=st.floats(-10, 10))
def test_constant_level_measure(c, t):
    f = constant(c)
    assert level_set_measure(f, t) == (1.0 if t <= c else 0.0)
