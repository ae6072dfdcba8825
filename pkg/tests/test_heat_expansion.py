"""Small-time expansion coefficients and cancellation-free remainders."""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest

from specreg import (
    DomainError,
    FitConditionError,
    HeatExpansion,
    UnsupportedSpectrumError,
    analytic_expansion,
    compose,
    expansion_from_dict,
    expansion_to_dict,
    expansion_value,
    finite_expansion,
    finite_spectrum,
    fit_expansion,
    lattice_family,
    remainder,
    verify_remainder_bound,
)
from specreg.heat_expansion import mellin_cutoff_integral

mp.mp.dps = 30

TWO_PI = 2.0 * math.pi
SQRT_PI = math.sqrt(math.pi)

ONE0 = lattice_family(TWO_PI, 0.0, "positive", 1)
ONEPI = lattice_family(TWO_PI, math.pi, "positive", 1)
ONEPI3 = lattice_family(TWO_PI, math.pi / 3.0, "positive", 1)
FULLPI = lattice_family(TWO_PI, math.pi, "full", 1)
FIN23 = finite_spectrum([(2.0, 1), (3.0, 1)])

# first power-series coefficient of the remainder for theta = pi/3, scale = 2 pi
A1_PI3 = 14.0 * math.pi ** 2 / 81.0


# ---------------------------------------------------------------------------
# coefficients


def test_analytic_coefficients_zero_shift():
    exp = analytic_expansion(ONE0)
    assert exp.m == 2 and exp.J == 2 and exp.source == "analytic"
    assert exp.coeffs[-2] == 0.0
    assert exp.coeffs[-1] == pytest.approx(1.0 / (4.0 * SQRT_PI), rel=1e-15)
    assert exp.coeffs[0] == -0.5
    assert exp.coeffs[1] == 0.0


def test_analytic_coefficients_shifted_and_full():
    # b_0 = -(1/2 + theta/scale) per one-sided family
    assert analytic_expansion(ONEPI).coeffs[0] == pytest.approx(-1.0, abs=1e-15)
    assert analytic_expansion(ONEPI3).coeffs[0] == pytest.approx(-2.0 / 3.0, rel=1e-15)
    exp = analytic_expansion(FULLPI)
    assert exp.coeffs[-1] == pytest.approx(1.0 / (2.0 * SQRT_PI), rel=1e-15)
    assert exp.coeffs[0] == 0.0


def test_analytic_primed_convention():
    # the zero mode of a shift-0 full lattice sits in kernel_dim, so the
    # kernel-free b_0 is -mult while the kernel-inclusive theta sum has none
    full0 = lattice_family(2.0, 0.0, "full", 1)
    primed = analytic_expansion(full0, primed=True)
    unprimed = analytic_expansion(full0, primed=False)
    assert primed.coeffs[0] == -1.0 and not primed.includes_kernel
    assert unprimed.coeffs[0] == 0.0 and unprimed.includes_kernel
    assert analytic_expansion(lattice_family(2.0, 0.0, "full", 3)).coeffs[0] == -3.0


def test_structural_kernel_remainder_identity():
    # with the zero mode excised the remainder is just the Poisson dual part
    full0 = lattice_family(2.0, 0.0, "full", 2)
    exp = analytic_expansion(full0)
    worst = verify_remainder_bound(full0, exp, np.logspace(-4, 0, 40))
    assert worst <= exp.remainder_bound
    assert abs(remainder(full0, exp, 1e-3)) <= 1e-250


def test_analytic_mixed_families():
    exp = analytic_expansion(compose(ONE0, FIN23))
    assert exp.coeffs[0] == pytest.approx(1.5, abs=1e-15)


def test_coefficient_derivative():
    spec = lattice_family(TWO_PI, math.pi, "positive", 1, 1.0)
    exp = analytic_expansion(spec)
    assert exp.coeff_derivatives[0] == pytest.approx(-1.0 / TWO_PI, rel=1e-15)
    assert exp.coeff_derivatives[-1] == 0.0


def test_expansion_value():
    exp = analytic_expansion(ONE0)
    assert expansion_value(exp, 0.25) == pytest.approx(
        2.0 * exp.coeffs[-1] - 0.5, rel=1e-14)
    with pytest.raises(DomainError):
        expansion_value(exp, 0.0)


def test_finite_expansion():
    exp = finite_expansion(FIN23)
    assert exp.m == 1 and exp.J == 1 and exp.source == "finite"
    assert exp.coeffs == {-1: 0.0, 0: 2.0}
    assert exp.remainder_bound == 5.0
    with pytest.raises(UnsupportedSpectrumError):
        finite_expansion(ONE0)


def test_expansion_shape_validation():
    with pytest.raises(DomainError):
        HeatExpansion(m=0, J=1, coeffs={0: 1.0}, source="analytic",
                      remainder_bound=0.0, coeff_derivatives={0: 0.0})
    with pytest.raises(DomainError):
        HeatExpansion(m=2, J=2, coeffs={0: 1.0}, source="analytic",
                      remainder_bound=0.0, coeff_derivatives={0: 0.0})


# ---------------------------------------------------------------------------
# remainders


def test_finite_remainder_slope():
    # F(t) = e^(-2t) + e^(-3t) - 2, so F(t)/t -> -(2+3)
    exp = finite_expansion(FIN23)
    t = 1e-8
    assert remainder(FIN23, exp, t) / t == pytest.approx(-5.0, rel=1e-7)


def test_finite_expansion_rejects_lattice_remainder():
    exp = finite_expansion(FIN23)
    with pytest.raises(UnsupportedSpectrumError):
        remainder(ONE0, exp, 0.1)


def test_zero_shift_remainder_vanishes_at_small_t():
    # every power coefficient vanishes at theta = 0; only the dual terms remain,
    # and at t = 1e-6 those are below the double-precision floor
    assert remainder(ONE0, analytic_expansion(ONE0), 1e-6) == 0.0


def test_full_lattice_remainder_exponentially_small():
    assert abs(remainder(FULLPI, analytic_expansion(FULLPI), 1e-4)) <= 1e-250


def test_zero_shift_remainder_against_mpmath():
    exp = analytic_expansion(ONE0)
    t = mp.mpf(3) / 10
    tr = mp.nsum(lambda n: mp.e ** (-t * (2 * mp.pi * n) ** 2), [1, mp.inf])
    ref = tr - mp.sqrt(mp.pi) / (4 * mp.pi) / mp.sqrt(t) + mp.mpf(1) / 2
    assert remainder(ONE0, exp, 0.3) == pytest.approx(float(ref), abs=1e-15)


def test_shifted_remainder_collapses_at_theta_pi():
    # for theta = pi, scale = 2 pi the power series sums to -expm1(-pi^2 t)
    exp = analytic_expansion(ONEPI)
    for t in (1e-6, 1e-4, 1e-3, 4.9e-3):
        assert remainder(ONEPI, exp, t) == pytest.approx(
            -math.expm1(-math.pi ** 2 * t), rel=5e-16)


def test_shifted_remainder_continuous_across_series_switch():
    # the series path hands over to the direct difference near t = 5e-3
    exp = analytic_expansion(ONEPI)
    assert remainder(ONEPI, exp, 0.0049) == pytest.approx(0.04721029077925109,
                                                          rel=1e-13)
    assert remainder(ONEPI, exp, 0.0051) == pytest.approx(0.049089167293881575,
                                                          rel=1e-13)


def test_shifted_remainder_against_mpmath_both_paths():
    exp = analytic_expansion(ONEPI3)
    # series path (t = 1e-3) and direct path (t = 0.02), 30-digit references
    assert remainder(ONEPI3, exp, 1e-3) == pytest.approx(0.0017086976020657917,
                                                         abs=1e-15)
    assert remainder(ONEPI3, exp, 0.02) == pytest.approx(0.03564109879635728,
                                                         abs=1e-15)


def test_shifted_remainder_leading_coefficient():
    exp = analytic_expansion(ONEPI3)
    assert remainder(ONEPI3, exp, 1e-7) / 1e-7 == pytest.approx(A1_PI3, abs=1e-5)


def test_pair_identity_matches_solo_remainders():
    minus = lattice_family(TWO_PI, -math.pi / 3.0, "positive", 1)
    pair = compose(ONEPI3, minus)
    exp_pair = analytic_expansion(pair)
    for t in (1e-3, 0.01, 0.1):
        solo = remainder(ONEPI3, analytic_expansion(ONEPI3), t) + \
            remainder(minus, analytic_expansion(minus), t)
        assert remainder(pair, exp_pair, t) == pytest.approx(solo, abs=1e-13)


def test_remainder_bound_holds_on_grid():
    for spec in (ONE0, ONEPI, FULLPI):
        exp = analytic_expansion(spec)
        worst = verify_remainder_bound(spec, exp, np.logspace(-4, 0, 40))
        assert worst <= exp.remainder_bound


# ---------------------------------------------------------------------------
# fitted expansions


FIT_GRID = np.logspace(-4, -2, 25)


def test_fit_recovers_lattice_coefficients():
    fit = fit_expansion(ONE0, FIT_GRID)
    assert fit.source == "fitted"
    assert fit.coeffs[-1] == pytest.approx(1.0 / (4.0 * SQRT_PI), abs=1e-9)
    assert fit.coeffs[0] == pytest.approx(-0.5, abs=1e-9)
    # the refit bound holds on a denser grid over the same window
    worst = verify_remainder_bound(ONE0, fit, np.logspace(-4, -2, 40))
    assert worst <= fit.remainder_bound


def test_fitted_remainder_is_direct_difference():
    fit = fit_expansion(ONE0, FIT_GRID)
    t = 1e-3
    assert abs(remainder(ONE0, fit, t)) <= fit.remainder_bound * t


def test_fit_condition_guard():
    with pytest.raises(FitConditionError):
        fit_expansion(ONE0, FIT_GRID, max_condition=10.0)


def test_fit_grid_validation():
    with pytest.raises(DomainError):
        fit_expansion(ONE0, [0.1, 0.2, 0.3])
    with pytest.raises(DomainError):
        fit_expansion(ONE0, [0.1, 0.2, 0.3, 0.4, 0.5, 1.5])
    with pytest.raises(DomainError):
        fit_expansion(ONE0, [0.1, 0.1, 0.2, 0.3, 0.4, 0.5])


# ---------------------------------------------------------------------------
# exact cutoff integrals int_0^delta t^(s-1) F(t) dt


def test_cutoff_integral_shifted_leading_term():
    exp = analytic_expansion(ONEPI)
    delta = 1e-10
    got = mellin_cutoff_integral(ONEPI, exp, delta, 0.0)
    assert got is not None
    value, err = got
    # F = pi^2 t - (pi^4/2) t^2 + ..., so the integral is pi^2 d - (pi^4/4) d^2 + ...
    assert abs(value - math.pi ** 2 * delta) <= 5e-19
    assert 0.0 <= err <= 1e-15


def test_cutoff_integral_explicit_leading_term():
    exp = finite_expansion(FIN23)
    delta = 1e-10
    got = mellin_cutoff_integral(FIN23, exp, delta, 0.0)
    assert got is not None
    value, _ = got
    assert abs(value + 5.0 * delta) <= 1e-19


def test_cutoff_integral_full_lattice_zero():
    got = mellin_cutoff_integral(FULLPI, analytic_expansion(FULLPI), 1e-10, 0.0)
    assert got is not None
    assert got[0] == 0.0


def test_cutoff_integral_out_of_reach():
    exp = analytic_expansion(ONEPI)
    assert mellin_cutoff_integral(ONEPI, exp, 1e-3, 0.0) is None
    assert mellin_cutoff_integral(ONEPI, exp, 1e-10, -1.0) is None
    fit = fit_expansion(ONE0, FIT_GRID)
    assert mellin_cutoff_integral(ONE0, fit, 1e-10, 0.0) is None


# ---------------------------------------------------------------------------
# serialisation


@pytest.mark.parametrize("exp", [analytic_expansion(ONEPI),
                                 finite_expansion(FIN23),
                                 fit_expansion(ONE0, FIT_GRID)])
def test_expansion_round_trip(exp):
    assert expansion_from_dict(expansion_to_dict(exp)) == exp


def test_expansion_from_dict_malformed():
    with pytest.raises(DomainError):
        expansion_from_dict({"m": 2})
    with pytest.raises(DomainError):
        expansion_from_dict({"m": 2, "J": 2, "coeffs": "nope"})
