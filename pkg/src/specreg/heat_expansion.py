"""Small-time expansion of the heat trace and its remainder.

tr exp(-t*B)  ~  sum_j b_j t^(j/m),   j = -J .. m-1,

with remainder F(t) = tr exp(-t*B) - sum_j b_j t^(j/m) satisfying |F| <= C*t
on (0, 1].  The b_0 coefficient carries the primed/unprimed convention: the
"primed" expansion tracks the kernel-free trace, so b_0' = b_0 - kernel_dim.

Coefficient sources:

* analytic  - exact table for lattice families (m=2, J=2): a full lattice
  contributes sqrt(pi)/scale * mult to b_{-1} (and, at shift 0, -mult to b_0
  for its excised zero mode); a one-sided lattice contributes
  sqrt(pi)/(2*scale) * mult to b_{-1} and -mult*(1/2 + shift/scale) to the
  kernel-inclusive b_0; explicit rows contribute their multiplicity to b_0.
  Coefficient derivatives along the stored deformation: only b_0 moves, by
  -mult*shift_derivative/scale per one-sided family.
* finite    - exact m=1, J=1 expansion for explicit spectra with the sharp
  remainder bound C = sum mult*lam (since |expm1(-x)| <= x).
* fitted    - least squares in the t^(j/m) basis on a user grid.

The remainder is evaluated cancellation-free wherever structure allows:
explicit rows via expm1, full lattices via the dual (Poisson) series, paired
or zero-shift one-sided lattices via exact pair identities.  A solo shifted
one-sided family uses its exact small-time power series F = sum_k a_k t^k
(coefficients from odd Bernoulli polynomials of 1 + shift/scale, computed in
exact rational arithmetic and cached per family) whenever the dual terms are
certifiably below 1e-20; only above that window does it fall back to a direct
big-minus-big difference, which is then short and carries ~1e-14 noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from math import fsum

import numpy as np

from .errors import DomainError, FitConditionError, UnsupportedSpectrumError
from .spectra import (
    DEFAULT_TOL,
    ExplicitFamily,
    LatticeFamily,
    Spectrum,
    Tolerance,
    heat_trace,
    _direct_run,
)

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class HeatExpansion:
    """Expansion data: coeffs maps j -> b_j for -J <= j <= m-1."""

    m: int
    J: int
    coeffs: dict[int, float]
    source: str
    remainder_bound: float
    coeff_derivatives: dict[int, float]
    includes_kernel: bool = False

    def __post_init__(self) -> None:
        if self.m < 1 or self.J < 0:
            raise DomainError(f"need m >= 1 and J >= 0, got m={self.m}, J={self.J}")
        expected = set(range(-self.J, self.m))
        if set(self.coeffs) != expected:
            raise DomainError(
                f"coeffs must cover j = {-self.J}..{self.m - 1}, got {sorted(self.coeffs)}")

    @property
    def b0(self) -> float:
        return self.coeffs[0]


def expansion_value(exp: HeatExpansion, t: float) -> float:
    """sum_j b_j t^(j/m) at a single t > 0."""
    if not t > 0.0:
        raise DomainError(f"expansion defined for t > 0, got {t!r}")
    return fsum(exp.coeffs[j] * t ** (j / exp.m) for j in sorted(exp.coeffs))


def _theta_rest(scale: float, shift: float, t: float) -> float:
    """Dual-series part of the full-lattice theta sum:

    sum_{n in Z} exp(-t*(scale*n+shift)^2) - sqrt(pi)/(scale*sqrt(t)),

    computed directly from the Poisson dual terms (no cancellation); it is
    exponentially small for t*scale^2 << pi^2.
    """
    prefactor = SQRT_PI / (scale * math.sqrt(t))
    decay = math.pi * math.pi / (scale * scale * t)
    k_max = max(2, math.ceil(math.sqrt(45.0 / decay)) + 2)
    angle = 2.0 * math.pi * shift / scale
    dual = fsum(2.0 * math.exp(-decay * k * k) * math.cos(angle * k)
                for k in range(1, k_max + 1))
    return prefactor * dual


# The small-time series of a shifted one-sided lattice trace,
#
#   sum_{n>=1} exp(-t*(c*n+theta)^2)
#     = sqrt(pi)/(2c) t^(-1/2) - (1/2 + theta/c) + sum_{k>=1} a_k t^k + O(exp(-pi^2/(c^2 t))),
#
# has a_k = (-1)^(k+1) c^(2k) B_{2k+1}(1 + theta/c) / (k! (2k+1)) with B_n(q)
# the Bernoulli polynomials (for theta = 0 every a_k vanishes, matching the
# zero-shift pair identity).  The series has zero radius but its terms only
# start growing near k ~ pi^2/(c^2 t), so truncating at the smallest term
# leaves an error comparable to the dual terms already being neglected.
_SERIES_KMAX = 60


@lru_cache(maxsize=4)
def _bernoulli_fractions(n_max: int) -> tuple[Fraction, ...]:
    """B_0..B_n_max as exact rationals (B_1 = -1/2 convention)."""
    values = [Fraction(1)]
    for m in range(1, n_max + 1):
        acc = sum(math.comb(m + 1, j) * values[j] for j in range(m))
        values.append(Fraction(-acc, m + 1))
    return tuple(values)


@lru_cache(maxsize=256)
def _one_sided_power_coeffs(scale: float, shift: float) -> tuple[float, ...]:
    """(a_1, .., a_K) for one one-sided family, exact rationals rounded once.

    The list is truncated early if a coefficient overflows float range (only
    possible for extreme scale values; callers then fall back to the direct
    evaluation sooner).
    """
    q = 1 + Fraction(shift) / Fraction(scale)
    bern = _bernoulli_fractions(2 * _SERIES_KMAX + 1)
    q_pows = [Fraction(1)]
    for _ in range(2 * _SERIES_KMAX + 1):
        q_pows.append(q_pows[-1] * q)
    c2 = Fraction(scale) * Fraction(scale)
    c2_pow = Fraction(1)
    coeffs: list[float] = []
    for k in range(1, _SERIES_KMAX + 1):
        n = 2 * k + 1
        poly = sum(math.comb(n, j) * bern[j] * q_pows[n - j]
                   for j in range(n + 1) if j < 2 or j % 2 == 0)
        c2_pow *= c2
        a_k = (-1) ** (k + 1) * c2_pow * poly / (math.factorial(k) * n)
        try:
            coeffs.append(float(a_k))
        except OverflowError:
            break
    return tuple(coeffs)


def _series_decay(scale: float, t: float) -> float:
    return math.pi * math.pi / (scale * scale * t)


def _one_sided_series(fam: LatticeFamily, t: float) -> float | None:
    """Series value of a shifted one-sided remainder, or None out of reach."""
    if _series_decay(fam.scale, t) < 50.0:
        return None
    total = 0.0
    prev = math.inf
    power = 1.0
    for a in _one_sided_power_coeffs(fam.scale, fam.shift):
        power *= t
        term = a * power
        if abs(term) > prev:
            return None
        prev = abs(term)
        total += term
        if abs(term) <= 1e-19 * max(1.0, abs(total)):
            return fam.mult * total
    return None


def _lattice_b_contrib(fam: LatticeFamily) -> tuple[float, float, float]:
    """(b_{-1}, family-trace b_0, d b_0/d kappa) for one lattice family.

    A full family at shift 0 enumerates only n != 0 (its zero mode lives in
    kernel_dim), so removing the n = 0 term costs -mult in b_0; the full
    theta sum itself has no constant term.
    """
    if fam.side == "full":
        b0 = -float(fam.mult) if fam.shift == 0.0 else 0.0
        return fam.mult * SQRT_PI / fam.scale, b0, 0.0
    b_minus1 = fam.mult * SQRT_PI / (2.0 * fam.scale)
    b0 = -fam.mult * (0.5 + fam.shift / fam.scale)
    db0 = -fam.mult * fam.shift_derivative / fam.scale
    return b_minus1, b0, db0


def analytic_expansion(spec: Spectrum, primed: bool = True) -> HeatExpansion:
    """Exact m=2, J=2 expansion for lattice (plus explicit) spectra.

    With primed=True (default) b_0 excludes the kernel; coefficient
    derivatives are populated from the families' shift derivatives.
    """
    b_minus1_parts: list[float] = []
    b0_parts: list[float] = []
    db0_parts: list[float] = []
    for fam in spec.families:
        if isinstance(fam, LatticeFamily):
            bm1, b0, db0 = _lattice_b_contrib(fam)
            b_minus1_parts.append(bm1)
            b0_parts.append(b0)
            db0_parts.append(db0)
        elif isinstance(fam, ExplicitFamily):
            b0_parts.append(float(sum(mult for _, mult, _ in fam.values)))
        else:
            raise UnsupportedSpectrumError(f"cannot expand family {type(fam).__name__}")
    # kernel-inclusive b_0 counts zero modes with weight 1 (exp(0) = 1)
    b0 = fsum(b0_parts) + spec.kernel_dim
    if primed:
        b0 -= spec.kernel_dim
    coeffs = {-2: 0.0, -1: fsum(b_minus1_parts), 0: b0, 1: 0.0}
    derivs = {-2: 0.0, -1: 0.0, 0: fsum(db0_parts), 1: 0.0}
    exp = HeatExpansion(m=2, J=2, coeffs=coeffs, source="analytic",
                        remainder_bound=0.0, coeff_derivatives=derivs,
                        includes_kernel=not primed)
    return replace(exp, remainder_bound=_scan_remainder_bound(spec, exp))


def finite_expansion(spec: Spectrum, primed: bool = True) -> HeatExpansion:
    """Exact m=1, J=1 expansion for explicit spectra; C = sum mult*lam."""
    total = 0
    c_bound = 0.0
    for fam in spec.families:
        if not isinstance(fam, ExplicitFamily):
            raise UnsupportedSpectrumError("finite_expansion needs an explicit spectrum")
        for lam, mult, _ in fam.values:
            total += mult
            c_bound += mult * lam
    b0 = float(total) + (0 if primed else spec.kernel_dim)
    return HeatExpansion(m=1, J=1, coeffs={-1: 0.0, 0: b0}, source="finite",
                         remainder_bound=c_bound,
                         coeff_derivatives={-1: 0.0, 0: 0.0},
                         includes_kernel=not primed)


def fit_expansion(spec: Spectrum, grid, m: int = 2, J: int = 2,
                  primed: bool = True, tol: Tolerance = DEFAULT_TOL,
                  max_condition: float = 1e12) -> HeatExpansion:
    """Least-squares fit of the t^(j/m) basis to the heat trace on `grid`.

    The grid must lie in (0, 1] and carry at least J+m+2 points.  Columns are
    normalised before solving; a condition number above max_condition raises
    FitConditionError.  The remainder bound is estimated from the scaled
    residuals (doubled for safety).
    """
    ts = np.asarray(sorted(float(t) for t in grid), dtype=float)
    if ts.size < J + m + 2:
        raise DomainError(f"fit grid needs at least {J + m + 2} points, got {ts.size}")
    if ts[0] <= 0.0 or ts[-1] > 1.0 or np.unique(ts).size != ts.size:
        raise DomainError("fit grid must be distinct points in (0, 1]")
    powers = [j / m for j in range(-J, m)]
    design = np.column_stack([ts ** p for p in powers])
    norms = np.linalg.norm(design, axis=0)
    scaled = design / norms
    condition = float(np.linalg.cond(scaled))
    if condition > max_condition:
        raise FitConditionError(
            f"fit basis condition {condition:.3e} exceeds {max_condition:.1e}")
    y = np.array([heat_trace(spec, t, tol, include_kernel=not primed) for t in ts])
    solution, *_ = np.linalg.lstsq(scaled, y, rcond=None)
    coeff_vec = solution / norms
    coeffs = {j: float(c) for j, c in zip(range(-J, m), coeff_vec)}
    residual = y - design @ coeff_vec
    c_bound = 2.0 * float(np.max(np.abs(residual) / ts))
    return HeatExpansion(m=m, J=J, coeffs=coeffs, source="fitted",
                         remainder_bound=c_bound,
                         coeff_derivatives={j: 0.0 for j in range(-J, m)},
                         includes_kernel=not primed)


def remainder(spec: Spectrum, exp: HeatExpansion, t: float,
              tol: Tolerance = DEFAULT_TOL) -> float:
    """F(t) = tr exp(-t*B) - sum_j b_j t^(j/m).

    The value is independent of the primed convention (the kernel constant
    cancels between trace and b_0).  For analytic/finite sources the remainder
    is evaluated from the family structure through the cancellation-free
    identities described in the module docstring; for fitted sources it is the
    direct difference against the fitted coefficients.
    """
    if not t > 0.0:
        raise DomainError(f"remainder defined for t > 0, got {t!r}")
    if exp.source == "fitted":
        trace = heat_trace(spec, t, tol, include_kernel=exp.includes_kernel)
        return trace - expansion_value(exp, t)
    if exp.source == "finite" and any(isinstance(f, LatticeFamily) for f in spec.families):
        raise UnsupportedSpectrumError("finite expansion paired with a lattice spectrum")
    parts: list[float] = []
    lattice = [f for f in spec.families if isinstance(f, LatticeFamily)]
    paired: set[int] = set()
    for i, fam in enumerate(lattice):
        if i in paired:
            continue
        if fam.side == "positive" and fam.shift != 0.0:
            for j in range(i + 1, len(lattice)):
                other = lattice[j]
                if (j not in paired and other.side == "positive"
                        and other.scale == fam.scale and other.mult == fam.mult
                        and other.shift == -fam.shift):
                    # exact pair identity: F = mult*(theta_rest - expm1(-t*shift^2))
                    parts.append(fam.mult * (_theta_rest(fam.scale, fam.shift, t)
                                             - math.expm1(-t * fam.shift * fam.shift)))
                    paired.add(i)
                    paired.add(j)
                    break
            if i in paired:
                continue
        if fam.side == "full":
            parts.append(fam.mult * _theta_rest(fam.scale, fam.shift, t))
        elif fam.shift == 0.0:
            parts.append(0.5 * fam.mult * _theta_rest(fam.scale, 0.0, t))
        else:
            # solo shifted one-sided family: series at small t, else direct
            series = _one_sided_series(fam, t)
            if series is not None:
                parts.append(series)
            else:
                trace_fam = _direct_run(fam.scale, fam.shift, 1, t, fam.mult,
                                        tol.abs_tol * 0.25)
                bm1, b0, _ = _lattice_b_contrib(fam)
                parts.append(trace_fam - bm1 / math.sqrt(t) - b0)
    for fam in spec.families:
        if isinstance(fam, ExplicitFamily):
            parts.extend(mult * math.expm1(-t * lam) for lam, mult, _ in fam.values)
    return fsum(parts)


def _one_sided_cutoff(fam: LatticeFamily, delta: float, s: float) -> tuple[float, float] | None:
    total = 0.0
    prev = math.inf
    for k, a in enumerate(_one_sided_power_coeffs(fam.scale, fam.shift), start=1):
        term = a * delta ** (k + s) / (k + s)
        if abs(term) > prev:
            return None
        prev = abs(term)
        total += term
        if abs(term) <= 1e-22 * max(1.0, abs(total)):
            return fam.mult * total, fam.mult * abs(term)
    return None


def _explicit_cutoff(lam: float, mult: int, delta: float, s: float) -> tuple[float, float] | None:
    # int_0^delta t^(s-1) * (exp(-lam*t) - 1) dt, term by term
    total = 0.0
    factor = 1.0
    for k in range(1, 201):
        factor *= -lam * delta / k
        term = factor * delta ** s / (k + s)
        total += term
        if abs(term) <= 1e-22 * max(1.0, abs(total)):
            return mult * total, mult * abs(term)
    return None


def mellin_cutoff_integral(spec: Spectrum, exp: HeatExpansion, delta: float,
                           s: float) -> tuple[float, float] | None:
    """int_0^delta t^(s-1) F(t) dt from the exact small-time structure.

    Returns (value, error_bound), or None when some family cannot certify its
    series at delta (callers then fall back to the remainder-bound estimate
    C*delta^(s+1)/(s+1)).  Needs s > -1.
    """
    if exp.source == "fitted" or not 0.0 < delta <= 1e-6 or not s > -1.0:
        return None
    parts: list[float] = []
    errs: list[float] = []
    for fam in spec.families:
        if isinstance(fam, LatticeFamily):
            decay = _series_decay(fam.scale, delta)
            if decay < 50.0:
                return None
            # dual terms contribute below prefactor*exp(-decay) on (0, delta]
            prefactor = fam.mult * SQRT_PI / (fam.scale * math.sqrt(delta))
            errs.append(2.0 * prefactor * math.exp(-decay) * delta ** s)
            if fam.side == "full" or fam.shift == 0.0:
                continue
            got = _one_sided_cutoff(fam, delta, s)
            if got is None:
                return None
            parts.append(got[0])
            errs.append(got[1])
        else:
            for lam, mult, _ in fam.values:
                got = _explicit_cutoff(lam, mult, delta, s)
                if got is None:
                    return None
                parts.append(got[0])
                errs.append(got[1])
    return fsum(parts), fsum(errs) + 1e-18


def _scan_remainder_bound(spec: Spectrum, exp: HeatExpansion) -> float:
    """Empirical C with |F(t)| <= C*t, scanned on a log grid in [1e-3, 1]."""
    grid = np.logspace(-3.0, 0.0, 25)
    worst = max(abs(remainder(spec, exp, float(t))) / float(t) for t in grid)
    return 2.0 * worst


def verify_remainder_bound(spec: Spectrum, exp: HeatExpansion, grid) -> float:
    """max_t |F(t)|/t over a grid; <= exp.remainder_bound when the bound holds."""
    worst = 0.0
    for t in grid:
        worst = max(worst, abs(remainder(spec, exp, float(t))) / float(t))
    return worst


def expansion_to_dict(exp: HeatExpansion) -> dict:
    return {
        "m": exp.m,
        "J": exp.J,
        "coeffs": {str(j): exp.coeffs[j] for j in sorted(exp.coeffs)},
        "source": exp.source,
        "remainder_bound": exp.remainder_bound,
        "coeff_derivatives": {str(j): exp.coeff_derivatives[j]
                              for j in sorted(exp.coeff_derivatives)},
        "includes_kernel": exp.includes_kernel,
    }


def expansion_from_dict(data: dict) -> HeatExpansion:
    try:
        coeffs = {int(j): float(b) for j, b in data["coeffs"].items()}
        derivs = {int(j): float(b)
                  for j, b in data.get("coeff_derivatives", {}).items()}
        exp = HeatExpansion(
            m=int(data["m"]), J=int(data["J"]), coeffs=coeffs,
            source=str(data.get("source", "analytic")),
            remainder_bound=float(data.get("remainder_bound", 0.0)),
            coeff_derivatives=derivs or {j: 0.0 for j in coeffs},
            includes_kernel=bool(data.get("includes_kernel", False)),
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise DomainError(f"malformed expansion object: {exc}") from exc
    return exp
