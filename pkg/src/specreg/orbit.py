"""Coadjoint-orbit model: spectra from root data, shape traces, volumes.

The orbit operator at the point a = s*x has, per positive root alpha with
A = alpha(a) = s*alpha(x) and direction value D = alpha(x):

    (2*pi*n - A)^2 and (2*pi*n + A)^2,  n >= 1, multiplicity 2 each,

realised as one-sided lattice families with shifts -A and +A and shift
derivatives -D and +D, plus a Cartan family (2*pi*n)^2 of multiplicity 2r
("consistent-2r", the default) or 4r ("paper-4r").  The primed spectrum
excludes every n = 0 mode; the unprimed spectrum adds the explicit modes A^2
(multiplicity 2, eigenvalue derivative 2*A*D) per root and counts the r
Cartan zero modes in kernel_dim.

The eps-smoothed shape operator at the constant-loop base point (s = 0) has
eigenvalues +/- D/(2*pi*n) * exp(-eps*(2*pi*n)^2), which cancel in pairs;
volumes are square roots of the primed determinants.  Shape quantities at
s != 0 are reduced to s = 0 (isometry reduction); only s = 0 is implemented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from math import fsum
from typing import Sequence, Union

from .errors import DomainError, NumericError, UnsupportedSpectrumError
from .special import EULER_GAMMA, TWO_PI
from .spectra import (
    DEFAULT_TOL,
    ExplicitFamily,
    Spectrum,
    Tolerance,
    compose,
    deform,
    finite_spectrum,
    lattice_family,
    _lattice_runs,
)
from .heat_expansion import HeatExpansion
from .regdet import default_expansion, log_det_eps, log_det_reg, reg_limit_trace


@dataclass(frozen=True)
class LoopGroupOrbitSpec:
    """Root data for one coadjoint orbit through the point s*x."""

    rank: int
    positive_roots: tuple[tuple[float, ...], ...]
    x: tuple[float, ...]
    s: float = 0.0
    cartan_mode: str = "consistent-2r"

    def __post_init__(self) -> None:
        if not (isinstance(self.rank, int) and self.rank >= 1):
            raise DomainError(f"rank must be a positive integer, got {self.rank!r}")
        if self.cartan_mode not in ("consistent-2r", "paper-4r"):
            raise DomainError(f"unknown cartan_mode {self.cartan_mode!r}")
        if len(self.x) != self.rank:
            raise DomainError("base direction x must have `rank` components")
        for root in self.positive_roots:
            if len(root) != self.rank:
                raise DomainError("every root must have `rank` components")

    @property
    def dim_g(self) -> int:
        return self.rank + 2 * len(self.positive_roots)


def root_values(ospec: LoopGroupOrbitSpec) -> list[tuple[float, float]]:
    """Per positive root: (A, D) = (alpha(s*x), alpha(x))."""
    out = []
    for root in ospec.positive_roots:
        direction = fsum(a * xi for a, xi in zip(root, ospec.x))
        out.append((ospec.s * direction, direction))
    return out


def orbit_spectrum(ospec: LoopGroupOrbitSpec, primed: bool = True) -> Spectrum:
    """Spectrum of the orbit operator; primed excludes all n = 0 modes."""
    parts = []
    for a_val, d_val in root_values(ospec):
        if not abs(a_val) < TWO_PI:
            raise DomainError(
                f"root value alpha(a) = {a_val!r} leaves the principal cell (-2pi, 2pi)")
        parts.append(lattice_family(TWO_PI, -a_val, "positive", 2, -d_val))
        parts.append(lattice_family(TWO_PI, +a_val, "positive", 2, +d_val))
    cartan_mult = 2 * ospec.rank if ospec.cartan_mode == "consistent-2r" else 4 * ospec.rank
    parts.append(lattice_family(TWO_PI, 0.0, "positive", cartan_mult, 0.0))
    spec = compose(*parts)
    if primed:
        return spec
    rows = [(a_val * a_val, 2, 2.0 * a_val * d_val) for a_val, d_val in root_values(ospec)]
    with_roots = compose(spec, finite_spectrum(rows))
    return Spectrum(with_roots.families, with_roots.kernel_dim + ospec.rank)


def shape_eps_spectrum(ospec: LoopGroupOrbitSpec, eps: float,
                       floor: float = 1e-18) -> tuple[tuple[float, int], ...]:
    """Eigenvalues of the smoothed shape operator at the s = 0 base point.

    Per positive root and level n >= 1: +/- alpha(x)/(2*pi*n) *
    exp(-eps*(2*pi*n)^2), multiplicity 1 each, plus `rank` zeros per level;
    levels stop once the damping factor drops below `floor` relative to the
    largest root value.
    """
    if ospec.s != 0.0:
        raise UnsupportedSpectrumError(
            "shape spectrum is computed at the constant-loop point s = 0")
    if not eps > 0.0:
        raise DomainError(f"shape spectrum requires eps > 0, got {eps!r}")
    scale = max((abs(d) for _, d in root_values(ospec)), default=1.0)
    entries: list[tuple[float, int]] = []
    n = 1
    while True:
        level = TWO_PI * n
        damping = math.exp(-eps * level * level)
        if scale * damping / level < floor and n > 1:
            break
        for _, d_val in root_values(ospec):
            mu = d_val / level * damping
            entries.append((+mu, 1))
            entries.append((-mu, 1))
        entries.append((0.0, ospec.rank))
        n += 1
        if n > 10_000_000:
            raise NumericError("shape spectrum did not reach the damping floor")
    return tuple(entries)


OrbitOrSpectrum = Union[LoopGroupOrbitSpec, Spectrum]


def trace_shape_eps(target: OrbitOrSpectrum, eps: float,
                    tol: Tolerance = DEFAULT_TOL) -> float:
    """Trace of the smoothed shape operator.

    For an orbit spec the +/- entries of shape_eps_spectrum are summed as
    symmetric pairs (each pair is exactly 0.0).  For a synthetic Spectrum the
    general formula -1/2 * sum mult * (dlam/lam) * exp(-eps*lam) is summed
    over the positive spectrum with the usual certified truncation.
    """
    if isinstance(target, LoopGroupOrbitSpec):
        entries = shape_eps_spectrum(target, eps)
        by_abs: dict[float, list[float]] = {}
        for mu, mult in entries:
            by_abs.setdefault(abs(mu), []).append(mu * mult)
        return fsum(fsum(group) for group in by_abs.values())
    if not eps > 0.0:
        raise DomainError(f"shape trace requires eps > 0, got {eps!r}")
    budget = tol.abs_tol / max(1.0, 2.0 * max(1, len(target.families)))
    terms: list[float] = []
    for fam in target.families:
        if isinstance(fam, ExplicitFamily):
            terms.extend(-0.5 * mult * (deriv / lam) * math.exp(-eps * lam)
                         for lam, mult, deriv in fam.values)
            continue
        if fam.shift_derivative == 0.0:
            continue
        for u, _, _ in _lattice_runs(fam, eps, budget):
            # dlam = 2*u*shift_derivative, lam = u^2
            terms.extend((-fam.mult * fam.shift_derivative / x * math.exp(-eps * x * x)
                          for x in u.tolist()))
    return fsum(terms)


def vol_eps(ospec: LoopGroupOrbitSpec, eps: float,
            tol: Tolerance = DEFAULT_TOL) -> float:
    """Preregularised volume sqrt(det'_eps) of the orbit operator."""
    return math.exp(0.5 * log_det_eps(orbit_spectrum(ospec, True), eps, True, tol))


def vol_reg(ospec: LoopGroupOrbitSpec, tol: Tolerance = DEFAULT_TOL) -> float:
    """Heat-kernel regularised volume sqrt(det'_reg)."""
    value, _ = log_det_reg(orbit_spectrum(ospec, True), None, True, tol)
    return math.exp(0.5 * value)


def vol_zeta(ospec: LoopGroupOrbitSpec, tol: Tolerance = DEFAULT_TOL) -> float:
    """Zeta-regularised volume sqrt(Det'_reg) = e^(-gamma*b0'/2) * vol_reg."""
    spec = orbit_spectrum(ospec, True)
    exp = default_expansion(spec, primed=True)
    value, _ = log_det_reg(spec, exp, True, tol)
    return math.exp(0.5 * (-EULER_GAMMA * exp.b0 + value))


def gateaux_fd(f, s0: float, step: float = 1e-3, order: int = 4) -> tuple[float, float]:
    """Central finite difference of f at s0; returns (value, error_estimate).

    order=2 is the plain central stencil; order=4 (default) adds one
    Richardson refinement, with the error gauged from the two stencil widths.
    """
    if not step > 0.0:
        raise DomainError(f"step must be positive, got {step!r}")
    if order not in (2, 4):
        raise DomainError(f"order must be 2 or 4, got {order!r}")

    def central(h: float) -> float:
        hi, lo = f(s0 + h), f(s0 - h)
        if not (math.isfinite(hi) and math.isfinite(lo)):
            raise NumericError(f"non-finite samples at s0 +/- {h!r}")
        return (hi - lo) / (2.0 * h)

    d_h = central(step)
    d_half = central(0.5 * step)
    if order == 2:
        return d_half, abs(d_half - d_h)
    refined = (4.0 * d_half - d_h) / 3.0
    return refined, abs(refined - d_half)


@dataclass(frozen=True)
class CurvatureReport:
    """Minimality certificate: shape traces, regularised traces, volume slopes."""

    eps_grid: tuple[float, ...]
    tr_H_eps: tuple[float, ...]
    tr_reg_H: float
    Tr_reg_H: float
    delta_b: dict[int, float]
    gateaux_log_vol_eps_analytic: float
    gateaux_log_vol_eps_fd: float
    strongly_minimal: bool
    heat_minimal: bool
    zeta_minimal: bool


MINIMALITY_TOL = 1e-8


def minimality_report(target: OrbitOrSpectrum,
                      eps_grid: Sequence[float] = (1e-1, 1e-2, 1e-3),
                      tol: Tolerance = DEFAULT_TOL,
                      exp: HeatExpansion | None = None) -> CurvatureReport:
    """Assemble the minimality certificate for an orbit or a synthetic spectrum.

    Orbit inputs are anchored at the constant-loop point s = 0 (isometry
    reduction); the Gateaux direction is the stored family deformation, which
    reproduces the orbit at geodesic parameter kappa.  tr_reg_H subtracts the
    counterterms a_j = -1/2 * delta_b_{j+m} inside a regularised limit;
    Tr_reg_H = tr_reg_H + gamma/2 * delta_b_0; the volume-slope fields compare
    -tr H^eps against a central finite difference of (1/2) log det'_eps at the
    reference eps (second grid point).
    """
    if not eps_grid or any(not e > 0.0 for e in eps_grid):
        raise DomainError("eps grid must be non-empty with positive entries")
    if isinstance(target, LoopGroupOrbitSpec):
        anchored = replace(target, s=0.0)
        base = orbit_spectrum(anchored, primed=True)
    else:
        anchored = target
        base = target

    def trace_fn(e: float) -> float:
        return trace_shape_eps(anchored, e, tol)

    if exp is None:
        exp = default_expansion(base, primed=True)
    delta_b = dict(sorted(exp.coeff_derivatives.items()))
    a_coeffs = {j - exp.m: -0.5 * db for j, db in delta_b.items()}
    tr_reg, _ = reg_limit_trace(trace_fn, a_coeffs, exp.m,
                                eps_sequence=(1e-2, 1e-3, 1e-4, 1e-5, 1e-6))
    tr_zeta = tr_reg + 0.5 * EULER_GAMMA * delta_b.get(0, 0.0)
    tr_grid = tuple(trace_fn(float(e)) for e in eps_grid)
    ref_index = 1 if len(eps_grid) > 1 else 0
    eps_ref = float(eps_grid[ref_index])
    analytic = -tr_grid[ref_index]
    fd, _ = gateaux_fd(lambda k: 0.5 * log_det_eps(deform(base, k), eps_ref, True, tol),
                       0.0, step=1e-3)
    return CurvatureReport(
        eps_grid=tuple(float(e) for e in eps_grid),
        tr_H_eps=tr_grid,
        tr_reg_H=tr_reg,
        Tr_reg_H=tr_zeta,
        delta_b=delta_b,
        gateaux_log_vol_eps_analytic=analytic,
        gateaux_log_vol_eps_fd=fd,
        strongly_minimal=max(abs(v) for v in tr_grid) <= MINIMALITY_TOL,
        heat_minimal=abs(tr_reg) <= MINIMALITY_TOL,
        zeta_minimal=abs(tr_zeta) <= MINIMALITY_TOL,
    )


def curvature_to_dict(report: CurvatureReport) -> dict:
    return {
        "eps_grid": list(report.eps_grid),
        "tr_H_eps": list(report.tr_H_eps),
        "tr_reg_H": report.tr_reg_H,
        "Tr_reg_H": report.Tr_reg_H,
        "delta_b": {str(j): v for j, v in sorted(report.delta_b.items())},
        "gateaux_log_vol_eps_analytic": report.gateaux_log_vol_eps_analytic,
        "gateaux_log_vol_eps_fd": report.gateaux_log_vol_eps_fd,
        "strongly_minimal": report.strongly_minimal,
        "heat_minimal": report.heat_minimal,
        "zeta_minimal": report.zeta_minimal,
    }


def orbit_to_dict(ospec: LoopGroupOrbitSpec) -> dict:
    return {
        "rank": ospec.rank,
        "positive_roots": [list(root) for root in ospec.positive_roots],
        "x": list(ospec.x),
        "s": ospec.s,
        "cartan_mode": ospec.cartan_mode,
    }


def orbit_from_dict(data: dict) -> LoopGroupOrbitSpec:
    if not isinstance(data, dict):
        raise DomainError("orbit JSON must be an object")
    try:
        roots = tuple(tuple(float(a) for a in root) for root in data["positive_roots"])
        return LoopGroupOrbitSpec(
            rank=int(data["rank"]),
            positive_roots=roots,
            x=tuple(float(v) for v in data["x"]),
            s=float(data.get("s", 0.0)),
            cartan_mode=str(data.get("cartan_mode", "consistent-2r")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DomainError(f"malformed orbit object: {exc}") from exc
