"""Spectrum model, heat traces, and the direct-vs-theta dual route."""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest

from specreg import (
    DomainError,
    ExplicitFamily,
    LatticeFamily,
    Spectrum,
    Tolerance,
    compose,
    deform,
    finite_spectrum,
    heat_trace,
    heat_trace_theta,
    lattice_family,
    min_eigenvalue,
    scale_spectrum,
    spectrum_dumps,
    spectrum_from_dict,
    spectrum_loads,
    spectrum_to_dict,
)

mp.mp.dps = 30

TWO_PI = 2.0 * math.pi

ONE0 = lattice_family(TWO_PI, 0.0, "positive", 1)
ONEPI = lattice_family(TWO_PI, math.pi, "positive", 1)
FULLPI3 = lattice_family(TWO_PI, math.pi / 3.0, "full", 1)
FULLPI = lattice_family(TWO_PI, math.pi, "full", 1)
FIN23 = finite_spectrum([(2.0, 1), (3.0, 1)])

LATTICE_SPECS = [ONE0, ONEPI, FULLPI3, FULLPI,
                 lattice_family(TWO_PI, 1.0, "positive", 3)]

# 30-digit brute-force sums sum_n exp(-t*(2 pi n + theta)^2), rounded once
BRUTE_ONE0_T001 = 0.9104739589085679      # theta=0, n >= 1, t = 0.01
BRUTE_ONEPI_T001 = 0.5044559030412906     # theta=pi, n >= 1
BRUTE_FULLPI_T001 = 2.8209479176604271    # theta=pi, n in Z


# ---------------------------------------------------------------------------
# construction and validation


def test_lattice_validation():
    with pytest.raises(DomainError):
        LatticeFamily(scale=0.0)
    with pytest.raises(DomainError):
        LatticeFamily(scale=1.0, side="neither")
    with pytest.raises(DomainError):
        LatticeFamily(scale=1.0, mult=0)
    with pytest.raises(DomainError):
        # one-sided shift must stay above -scale so all eigenvalues are positive
        lattice_family(1.0, -1.0, "positive")


def test_explicit_validation():
    with pytest.raises(DomainError):
        ExplicitFamily(((0.0, 1, 0.0),))
    with pytest.raises(DomainError):
        finite_spectrum([(1.0, 0)])
    with pytest.raises(DomainError):
        finite_spectrum([(-1.0, 1)])
    with pytest.raises(DomainError):
        finite_spectrum([(1.0, 1, 0.0, 9.0)])
    with pytest.raises(DomainError):
        Spectrum((), kernel_dim=-1)


def test_full_shift_canonicalisation():
    # shifts congruent mod the scale serialise identically, boundary maps to +scale/2
    assert lattice_family(2.0, -1.0, "full").families[0].shift == 1.0
    assert lattice_family(2.0, 3.5, "full").families[0].shift == -0.5
    assert lattice_family(2.0, 1.5, "full").families[0].shift == -0.5
    assert spectrum_dumps(lattice_family(2.0, 3.0, "full")) == \
        spectrum_dumps(lattice_family(2.0, -1.0, "full"))


def test_structural_zero_goes_to_kernel():
    spec = lattice_family(2.0, 0.0, "full", 3)
    assert spec.kernel_dim == 3
    assert lattice_family(2.0, 0.5, "full", 3).kernel_dim == 0
    assert ONE0.kernel_dim == 0


def test_finite_spectrum_kernel_and_sorting():
    spec = finite_spectrum([(3.0, 1), (0.0, 2), (1.0, 4)])
    assert spec.kernel_dim == 2
    assert spec.families[0].values == ((1.0, 4, 0.0), (3.0, 1, 0.0))


def test_min_eigenvalue():
    assert min_eigenvalue(ONE0) == pytest.approx(TWO_PI ** 2, rel=1e-15)
    assert min_eigenvalue(ONEPI) == pytest.approx((3.0 * math.pi) ** 2, rel=1e-15)
    assert min_eigenvalue(FULLPI) == pytest.approx(math.pi ** 2, rel=1e-15)
    assert min_eigenvalue(FULLPI3) == pytest.approx((math.pi / 3.0) ** 2, rel=1e-15)
    assert min_eigenvalue(FIN23) == 2.0
    with pytest.raises(DomainError):
        min_eigenvalue(finite_spectrum([]))


def test_tolerance_validation():
    with pytest.raises(DomainError):
        Tolerance(abs_tol=0.0)


# ---------------------------------------------------------------------------
# heat trace values


def test_heat_trace_explicit():
    assert heat_trace(FIN23, 1.0) == pytest.approx(
        math.exp(-2.0) + math.exp(-3.0), rel=1e-15)


def test_heat_trace_lattice_brute_values():
    assert heat_trace(ONE0, 0.01) == pytest.approx(BRUTE_ONE0_T001, rel=5e-15)
    assert heat_trace(ONEPI, 0.01) == pytest.approx(BRUTE_ONEPI_T001, rel=5e-15)
    assert heat_trace(FULLPI, 0.01) == pytest.approx(BRUTE_FULLPI_T001, rel=5e-15)


def test_heat_trace_against_live_mpmath():
    t = mp.mpf(3) / 10
    ref = mp.nsum(lambda n: mp.e ** (-t * (2 * mp.pi * n + mp.pi) ** 2), [1, mp.inf])
    assert heat_trace(ONEPI, 0.3) == pytest.approx(float(ref), rel=1e-13, abs=1e-15)


def test_heat_trace_domain():
    with pytest.raises(DomainError):
        heat_trace(ONE0, 0.0)
    with pytest.raises(DomainError):
        heat_trace_theta(ONE0, -1.0)


def test_heat_trace_kernel_inclusion():
    spec = lattice_family(2.0, 0.0, "full", 3)
    t = 0.7
    assert heat_trace(spec, t, include_kernel=True) - heat_trace(spec, t) == 3.0
    assert heat_trace_theta(spec, t, include_kernel=True) - \
        heat_trace_theta(spec, t) == pytest.approx(3.0, abs=1e-13)


def test_heat_trace_compose_additive():
    combined = compose(ONE0, FULLPI, FIN23)
    for t in (0.01, 0.3, 1.0):
        parts = heat_trace(ONE0, t) + heat_trace(FULLPI, t) + heat_trace(FIN23, t)
        assert heat_trace(combined, t) == pytest.approx(parts, rel=1e-14, abs=1e-14)


def test_heat_trace_monotone_and_log_convex():
    ts = [0.01, 0.02, 0.04, 0.08, 0.16]
    values = [heat_trace(FULLPI3, t) for t in ts]
    assert all(a > b for a, b in zip(values, values[1:]))
    # log-convexity: tr(t1)*tr(t3) >= tr((t1+t3)/2)^2
    for t1, t3 in zip(ts, ts[2:]):
        mid = heat_trace(FULLPI3, 0.5 * (t1 + t3))
        lhs = heat_trace(FULLPI3, t1) * heat_trace(FULLPI3, t3)
        assert lhs >= mid * mid * (1.0 - 1e-12)


# ---------------------------------------------------------------------------
# dual route: direct summation vs theta transform


@pytest.mark.parametrize("spec", LATTICE_SPECS, ids=lambda s: spectrum_dumps(s)[:48])
def test_dual_route_mixed_tolerance(spec):
    for t in np.logspace(-4, 0, 25):
        direct = heat_trace(spec, float(t))
        theta = heat_trace_theta(spec, float(t))
        assert abs(direct - theta) <= 1e-12 * (1.0 + abs(direct)), \
            f"t={t}: direct={direct!r} theta={theta!r}"


@pytest.mark.parametrize("spec", LATTICE_SPECS, ids=lambda s: spectrum_dumps(s)[:48])
def test_dual_route_pure_relative_above_floor(spec):
    # where the trace is not tiny, the agreement is genuinely relative
    for t in np.logspace(-4, 0, 25):
        direct = heat_trace(spec, float(t))
        if abs(direct) < 1e-2:
            continue
        theta = heat_trace_theta(spec, float(t))
        assert abs(direct - theta) <= 1e-12 * abs(direct)


def test_theta_route_explicit_families_pass_through():
    assert heat_trace_theta(FIN23, 0.5) == pytest.approx(heat_trace(FIN23, 0.5),
                                                         abs=1e-15)


# ---------------------------------------------------------------------------
# deformation and scaling


def test_deform_lattice_shift():
    base = lattice_family(TWO_PI, math.pi, "positive", 1, 1.0)
    moved = deform(base, 0.1)
    assert moved.families[0].shift == pytest.approx(math.pi + 0.1, rel=1e-15)
    assert moved.families[0].shift_derivative == 1.0


def test_deform_explicit_and_domain():
    base = finite_spectrum([(2.0, 1, -1.0)])
    assert deform(base, 1.0).families[0].values[0][0] == pytest.approx(1.0)
    with pytest.raises(DomainError):
        deform(base, 2.0)


def test_deform_rederives_structural_kernel():
    base = lattice_family(2.0, 0.0, "full", 2, 1.0)
    assert base.kernel_dim == 2
    assert deform(base, 0.5).kernel_dim == 0
    assert deform(base, 0.0).kernel_dim == 2
    # a full period returns the structural zero
    assert deform(base, 2.0).kernel_dim == 2


def test_scale_spectrum_trace_identity():
    spec = compose(ONEPI, FIN23)
    for c in (0.5, 4.0):
        scaled = scale_spectrum(spec, c)
        for t in (0.05, 0.4):
            assert heat_trace(scaled, t) == pytest.approx(
                heat_trace(spec, c * t), rel=1e-12, abs=1e-14)
    assert scale_spectrum(spec, 2.0).kernel_dim == spec.kernel_dim
    with pytest.raises(DomainError):
        scale_spectrum(spec, 0.0)


# ---------------------------------------------------------------------------
# serialisation


@pytest.mark.parametrize("spec", [ONE0, ONEPI, FULLPI, FIN23,
                                  compose(ONEPI, FIN23),
                                  lattice_family(2.0, 0.0, "full", 3)])
def test_serialisation_round_trip(spec):
    assert spectrum_loads(spectrum_dumps(spec)) == spec
    assert spectrum_from_dict(spectrum_to_dict(spec)) == spec


def test_from_dict_validation():
    with pytest.raises(DomainError):
        spectrum_from_dict([])
    with pytest.raises(DomainError):
        spectrum_from_dict({"kernel_dim": 0})
    with pytest.raises(DomainError):
        spectrum_from_dict({"families": [{"kind": "mystery"}], "kernel_dim": 0})
    with pytest.raises(DomainError):
        spectrum_from_dict({"families": [{"kind": "lattice", "scale": 1.0}],
                            "kernel_dim": -1})
    # kernel_dim below the structural zero count is inconsistent
    with pytest.raises(DomainError):
        spectrum_from_dict({"families": [{"kind": "lattice", "scale": 2.0,
                                          "shift": 0.0, "side": "full",
                                          "mult": 2}],
                            "kernel_dim": 1})
