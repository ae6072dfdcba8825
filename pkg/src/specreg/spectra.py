"""Spectrum model and heat traces.

A Spectrum is a finite union of eigenvalue families plus a count of zero
modes (kernel_dim).  Two family kinds are supported:

* LatticeFamily: eigenvalues (scale*n + shift)^2 with multiplicity `mult`,
  where n runs over n >= 1 ("positive" side) or all integers ("full" side).
  `shift_derivative` records d(shift)/d(kappa) along a one-parameter
  deformation, which is how geodesic directions enter Gateaux derivatives.
* ExplicitFamily: a finite list of (eigenvalue, mult, eigenvalue_derivative).

Zero modes never live inside a family: structural zeros (scale*n + shift
equal to 0.0 in exact float arithmetic) are detected at construction and
moved into kernel_dim, and enumeration skips them defensively.

heat_trace sums mult * exp(-t*lam) over the positive spectrum with a
certified Gaussian tail bound; heat_trace_theta evaluates the same quantity
through the Jacobi theta transform (Poisson summation), which is the
independent oracle route for small t.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from math import fsum
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DomainError, NumericError, UnsupportedSpectrumError

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative accuracy targets for certified summation."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-12

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0):
            raise DomainError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class LatticeFamily:
    """Eigenvalues (scale*n + shift)^2 for n >= 1 (positive) or n in Z (full)."""

    scale: float
    shift: float = 0.0
    side: str = "positive"
    mult: int = 1
    shift_derivative: float = 0.0

    def __post_init__(self) -> None:
        if not self.scale > 0.0:
            raise DomainError(f"lattice scale must be positive, got {self.scale!r}")
        if self.side not in ("positive", "full"):
            raise DomainError(f"lattice side must be 'positive' or 'full', got {self.side!r}")
        if not (isinstance(self.mult, int) and self.mult >= 1):
            raise DomainError(f"multiplicity must be a positive integer, got {self.mult!r}")
        if self.side == "positive" and not self.shift > -self.scale:
            # keeps scale*n + shift > 0-adjacent ordering and q = 1 + shift/scale > 0
            raise DomainError("one-sided lattice requires shift > -scale")


@dataclass(frozen=True)
class ExplicitFamily:
    """Finitely many explicit eigenvalues as (lam, mult, lam_derivative) triples."""

    values: tuple[tuple[float, int, float], ...]

    def __post_init__(self) -> None:
        for lam, mult, _ in self.values:
            if not lam > 0.0:
                raise DomainError(f"explicit eigenvalues must be positive, got {lam!r}")
            if not (isinstance(mult, int) and mult >= 1):
                raise DomainError(f"multiplicity must be a positive integer, got {mult!r}")


Family = Union[LatticeFamily, ExplicitFamily]


@dataclass(frozen=True)
class Spectrum:
    """A finite union of families plus the number of zero modes."""

    families: tuple[Family, ...]
    kernel_dim: int = 0

    def __post_init__(self) -> None:
        if not (isinstance(self.kernel_dim, int) and self.kernel_dim >= 0):
            raise DomainError(f"kernel_dim must be a non-negative integer, got {self.kernel_dim!r}")


# ---------------------------------------------------------------------------
# constructors


def _canonical_full_shift(scale: float, shift: float) -> float:
    """Reduce a full-lattice shift into (-scale/2, scale/2]."""
    reduced = shift - scale * round(shift / scale)
    if reduced == -0.5 * scale:
        reduced = 0.5 * scale
    return reduced + 0.0  # normalise -0.0


def lattice_family(
    scale: float,
    shift: float = 0.0,
    side: str = "positive",
    mult: int = 1,
    shift_derivative: float = 0.0,
) -> Spectrum:
    """Build a one-family Spectrum, moving any structural zero mode to the kernel.

    Full-side shifts are canonicalised into (-scale/2, scale/2], so congruent
    inputs compare and serialise identically.  After canonicalisation the only
    possible structural zero is n = 0 of a full lattice with shift exactly 0.0;
    one-sided families (shift > -scale, n >= 1) never contain one.
    """
    kernel = 0
    if side == "full":
        shift = _canonical_full_shift(scale, shift)
        if shift == 0.0:
            kernel = mult
    fam = LatticeFamily(scale=scale, shift=shift, side=side, mult=mult,
                        shift_derivative=shift_derivative)
    return Spectrum((fam,), kernel)


def finite_spectrum(values: Iterable[Sequence[float]]) -> Spectrum:
    """Spectrum from (lam, mult) or (lam, mult, derivative) rows.

    Rows with lam == 0 are counted into kernel_dim; negative lam is rejected.
    Rows are sorted by eigenvalue for a deterministic representation.
    """
    rows = []
    kernel = 0
    for row in values:
        if len(row) == 2:
            lam, mult = row
            deriv = 0.0
        elif len(row) == 3:
            lam, mult, deriv = row
        else:
            raise DomainError(f"expected (lam, mult[, derivative]) row, got {row!r}")
        mult = int(mult)
        if mult < 1:
            raise DomainError(f"multiplicity must be >= 1, got {mult!r}")
        lam = float(lam)
        if lam < 0.0:
            raise DomainError(f"eigenvalues must be >= 0, got {lam!r}")
        if lam == 0.0:
            kernel += mult
        else:
            rows.append((lam, mult, float(deriv)))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    families: tuple[Family, ...] = (ExplicitFamily(tuple(rows)),) if rows else ()
    return Spectrum(families, kernel)


def compose(*spectra: Spectrum) -> Spectrum:
    """Disjoint union: concatenates families and adds kernel dimensions."""
    fams: list[Family] = []
    kernel = 0
    for spec in spectra:
        fams.extend(spec.families)
        kernel += spec.kernel_dim
    return Spectrum(tuple(fams), kernel)


def deform(spec: Spectrum, kappa: float) -> Spectrum:
    """Move each family along its stored derivative by parameter kappa.

    Lattice shifts become shift + kappa*shift_derivative; explicit eigenvalues
    become lam + kappa*derivative (DomainError if one leaves the positive
    axis).  kernel_dim is adjusted if a structural zero appears or disappears.
    """
    base_kernel = spec.kernel_dim
    new_fams: list[Family] = []
    for fam in spec.families:
        if isinstance(fam, LatticeFamily):
            if fam.side == "full" and fam.shift == 0.0:
                base_kernel -= fam.mult  # its structural zero is re-derived below
            new_shift = fam.shift + kappa * fam.shift_derivative
            if fam.side == "full":
                new_shift = _canonical_full_shift(fam.scale, new_shift)
                if new_shift == 0.0:
                    base_kernel += fam.mult
            new_fams.append(LatticeFamily(fam.scale, new_shift, fam.side, fam.mult,
                                          fam.shift_derivative))
        else:
            rows = []
            for lam, mult, deriv in fam.values:
                new_lam = lam + kappa * deriv
                if not new_lam > 0.0:
                    raise DomainError(
                        f"deformation pushed eigenvalue {lam!r} to {new_lam!r} <= 0")
                rows.append((new_lam, mult, deriv))
            new_fams.append(ExplicitFamily(tuple(rows)))
    return Spectrum(tuple(new_fams), base_kernel)


def scale_spectrum(spec: Spectrum, factor: float) -> Spectrum:
    """Spectrum of factor*B: eigenvalues scale by `factor` (factor > 0).

    Lattice data scales by sqrt(factor) (including shift_derivative, so that
    eigenvalue derivatives scale by `factor` as they must); kernel_dim is
    unchanged.
    """
    if not factor > 0.0:
        raise DomainError(f"scaling factor must be positive, got {factor!r}")
    root = math.sqrt(factor)
    new_fams: list[Family] = []
    for fam in spec.families:
        if isinstance(fam, LatticeFamily):
            new_fams.append(LatticeFamily(fam.scale * root, fam.shift * root, fam.side,
                                          fam.mult, fam.shift_derivative * root))
        else:
            new_fams.append(ExplicitFamily(tuple(
                (lam * factor, mult, deriv * factor) for lam, mult, deriv in fam.values)))
    return Spectrum(tuple(new_fams), spec.kernel_dim)


def min_eigenvalue(spec: Spectrum) -> float:
    """Smallest strictly positive eigenvalue of the spectrum."""
    best = math.inf
    for fam in spec.families:
        if isinstance(fam, ExplicitFamily):
            for lam, _, _ in fam.values:
                best = min(best, lam)
        else:
            centre = -fam.shift / fam.scale
            lo = 1 if fam.side == "positive" else None
            for n in {math.floor(centre), math.ceil(centre),
                      math.floor(centre) - 1, math.ceil(centre) + 1}:
                if lo is not None and n < lo:
                    continue
                u = fam.scale * n + fam.shift
                if u != 0.0:
                    best = min(best, u * u)
    if not math.isfinite(best):
        raise DomainError("spectrum has no positive eigenvalues")
    return best


# ---------------------------------------------------------------------------
# enumeration with certified tails


def _run_upper_index(scale: float, sigma: float, start: int, decay: float,
                     mult: int, budget: float) -> tuple[int, float]:
    """Last index n_hi (and tail bound) so that sum_{n > n_hi} mult*exp(-decay*u^2)
    with u = scale*n + sigma is below `budget`.

    Uses the Gaussian tail bound  term(n_hi+1) * (1 + 1/(2*decay*scale*u)).
    """
    turn = max(start, math.ceil(-sigma / scale))
    log_target = math.log(max(mult, 1) * 4.0 / budget) + max(0.0, -math.log(decay * scale))
    u_target = math.sqrt(max(log_target, 1.0) / decay)
    n_hi = max(turn + 1, math.ceil((u_target - sigma) / scale) + 1)
    for _ in range(200):
        u1 = scale * (n_hi + 1) + sigma
        tail = mult * math.exp(-decay * u1 * u1) * (1.0 + 1.0 / (2.0 * decay * scale * u1))
        if tail <= budget:
            return n_hi, tail
        n_hi += max(4, n_hi // 4)
        if n_hi > 200_000_000:
            break
    raise NumericError(
        f"lattice tail would need more than {n_hi} terms (decay={decay!r})")


def _lattice_runs(fam: LatticeFamily, decay: float, budget: float):
    """Yield (u_values ascending in index, heat_tail_bound, first_omitted_u).

    One run for a positive-side family (n >= 1); two runs for a full family
    (n >= 1 with +shift, and the mirror n <= 0 re-indexed as m >= 0 with
    -shift).  Structural zeros (u == 0.0) are dropped from the arrays.
    """
    runs = [(fam.shift, 1)] if fam.side == "positive" else [(fam.shift, 1), (-fam.shift, 0)]
    per_run = budget / len(runs)
    for sigma, start in runs:
        n_hi, tail = _run_upper_index(fam.scale, sigma, start, decay, fam.mult, per_run)
        n = np.arange(start, n_hi + 1, dtype=float)
        u = fam.scale * n + sigma
        u = u[u != 0.0]
        yield u, tail, fam.scale * (n_hi + 1) + sigma


def _count_runs(spec: Spectrum) -> int:
    total = 0
    for fam in spec.families:
        if isinstance(fam, LatticeFamily):
            total += 1 if fam.side == "positive" else 2
    return total


def heat_trace(spec: Spectrum, t: float, tol: Tolerance = DEFAULT_TOL,
               include_kernel: bool = False) -> float:
    """tr exp(-t*B) over the positive spectrum (plus kernel_dim if asked).

    Direct summation, exactly-rounded (math.fsum) over terms ordered by
    ascending |n| with +/- partners adjacent; lattice tails certified below
    tol.abs_tol by the Gaussian tail bound.
    """
    if not t > 0.0:
        raise DomainError(f"heat trace requires t > 0, got {t!r}")
    n_runs = _count_runs(spec)
    budget = tol.abs_tol / max(1.0, 2.0 * n_runs)
    terms: list[float] = []
    for fam in spec.families:
        if isinstance(fam, ExplicitFamily):
            terms.extend(mult * math.exp(-t * lam) for lam, mult, _ in fam.values)
            continue
        weights = []
        for u, _, _ in _lattice_runs(fam, t, budget):
            weights.append((fam.mult * np.exp(-t * u * u)).tolist())
        if fam.side == "positive":
            terms.extend(weights[0])
        else:
            up, down = weights
            terms.extend(down[:1])  # n = 0 (absent when it is the structural zero)
            down = down[1:]
            common = min(len(up), len(down))
            terms.extend(up[i] + down[i] for i in range(common))
            terms.extend(up[common:])
            terms.extend(down[common:])
    value = fsum(terms)
    if include_kernel:
        value += spec.kernel_dim
    return value


# ---------------------------------------------------------------------------
# theta-transform route


def _theta_full(scale: float, shift: float, t: float, budget: float) -> float:
    """sum_{n in Z} exp(-t*(scale*n + shift)^2) by Poisson summation.

    Equals (sqrt(pi)/(scale*sqrt(t))) * (1 + 2*sum_{k>=1} exp(-pi^2 k^2/(scale^2 t))
    * cos(2 pi k shift/scale)); the dual series converges double-exponentially
    for small t, which is exactly where direct summation is expensive.
    """
    prefactor = SQRT_PI / (scale * math.sqrt(t))
    decay = math.pi * math.pi / (scale * scale * t)
    log_target = math.log(max(2.0 * prefactor, 2.0) / budget)
    k_max = max(2, math.ceil(math.sqrt(max(log_target, 1.0) / decay)) + 2)
    acc = [1.0]
    angle = 2.0 * math.pi * shift / scale
    for k in range(1, k_max + 1):
        acc.append(2.0 * math.exp(-decay * k * k) * math.cos(angle * k))
    return prefactor * fsum(acc)


def _direct_run(scale: float, sigma: float, start: int, t: float, mult: int,
                budget: float) -> float:
    n_hi, _ = _run_upper_index(scale, sigma, start, t, mult, budget)
    n = np.arange(start, n_hi + 1, dtype=float)
    u = scale * n + sigma
    u = u[u != 0.0]
    return float(fsum((mult * np.exp(-t * u * u)).tolist()))


def heat_trace_theta(spec: Spectrum, t: float, tol: Tolerance = DEFAULT_TOL,
                     include_kernel: bool = False) -> float:
    """Same trace as heat_trace, but lattice families go through the theta
    transform.  This is the independent small-t route used for cross-checks.

    Full families use the transform directly (minus the structural zero term
    when present).  One-sided families with opposite shifts, equal scale and
    equal mult are paired into a full transform minus the n = 0 term; a
    zero-shift family is half of (full - 1); a leftover shifted family uses
    the transform minus a directly summed mirror complement.  Explicit
    families have no transform and are summed directly.
    """
    if not t > 0.0:
        raise DomainError(f"heat trace requires t > 0, got {t!r}")
    budget = tol.abs_tol / max(1.0, 2.0 * max(1, len(spec.families)))
    lattice = [f for f in spec.families if isinstance(f, LatticeFamily)]
    paired: dict[int, int] = {}
    used = set()
    for i, fam in enumerate(lattice):
        if i in used or fam.side != "positive" or fam.shift == 0.0:
            continue
        for j in range(i + 1, len(lattice)):
            other = lattice[j]
            if (j not in used and other.side == "positive"
                    and other.scale == fam.scale and other.mult == fam.mult
                    and other.shift == -fam.shift):
                paired[i] = j
                used.add(i)
                used.add(j)
                break
    parts: list[float] = []
    for i, fam in enumerate(lattice):
        if i in used and i not in paired:
            continue  # consumed as the partner of an earlier family
        if fam.side == "full":
            full = _theta_full(fam.scale, fam.shift, t, budget / fam.mult)
            centre = math.exp(-t * fam.shift * fam.shift) if fam.shift == 0.0 else 0.0
            parts.append(fam.mult * (full - centre))
        elif i in paired:
            full = _theta_full(fam.scale, fam.shift, t, budget / fam.mult)
            parts.append(fam.mult * (full - math.exp(-t * fam.shift * fam.shift)))
        elif fam.shift == 0.0:
            full = _theta_full(fam.scale, 0.0, t, budget / fam.mult)
            parts.append(0.5 * fam.mult * (full - 1.0))
        else:
            full = _theta_full(fam.scale, fam.shift, t, budget / fam.mult)
            complement = _direct_run(fam.scale, -fam.shift, 0, t, fam.mult, budget)
            parts.append(fam.mult * full - complement)
    for fam in spec.families:
        if isinstance(fam, ExplicitFamily):
            parts.extend(mult * math.exp(-t * lam) for lam, mult, _ in fam.values)
    value = fsum(parts)
    if include_kernel:
        value += spec.kernel_dim
    return value


# ---------------------------------------------------------------------------
# serialisation


def spectrum_to_dict(spec: Spectrum) -> dict:
    """JSON-ready dict in the documented wire format."""
    fams = []
    for fam in spec.families:
        if isinstance(fam, LatticeFamily):
            fams.append({
                "kind": "lattice",
                "scale": fam.scale,
                "shift": fam.shift,
                "side": fam.side,
                "mult": fam.mult,
                "shift_derivative": fam.shift_derivative,
            })
        else:
            fams.append({
                "kind": "explicit",
                "values": [[lam, mult, deriv] for lam, mult, deriv in fam.values],
            })
    return {"families": fams, "kernel_dim": spec.kernel_dim}


def spectrum_from_dict(data: dict) -> Spectrum:
    """Parse the wire format, validating structure and kernel accounting."""
    if not isinstance(data, dict):
        raise DomainError("spectrum JSON must be an object")
    raw_fams = data.get("families")
    if not isinstance(raw_fams, list):
        raise DomainError("spectrum JSON needs a 'families' array")
    kernel = data.get("kernel_dim", 0)
    if not (isinstance(kernel, int) and kernel >= 0):
        raise DomainError(f"kernel_dim must be a non-negative integer, got {kernel!r}")
    fams: list[Family] = []
    structural = 0
    for idx, raw in enumerate(raw_fams):
        if not isinstance(raw, dict):
            raise DomainError(f"family #{idx} must be an object")
        kind = raw.get("kind")
        if kind == "lattice":
            try:
                fam_spec = lattice_family(
                    scale=float(raw["scale"]),
                    shift=float(raw.get("shift", 0.0)),
                    side=str(raw.get("side", "positive")),
                    mult=int(raw.get("mult", 1)),
                    shift_derivative=float(raw.get("shift_derivative", 0.0)),
                )
            except KeyError as exc:
                raise DomainError(f"family #{idx} is missing key {exc}") from exc
            fams.extend(fam_spec.families)
            structural += fam_spec.kernel_dim
        elif kind == "explicit":
            rows = raw.get("values")
            if not isinstance(rows, list):
                raise DomainError(f"family #{idx} needs a 'values' array")
            fam_spec = finite_spectrum(rows)
            fams.extend(fam_spec.families)
            structural += fam_spec.kernel_dim
        else:
            raise DomainError(f"family #{idx} has unknown kind {kind!r}")
    if kernel < structural:
        raise DomainError(
            f"kernel_dim={kernel} cannot be below the {structural} structural zero mode(s)")
    return Spectrum(tuple(fams), kernel)


def spectrum_dumps(spec: Spectrum) -> str:
    return json.dumps(spectrum_to_dict(spec), sort_keys=True)


def spectrum_loads(text: str) -> Spectrum:
    return spectrum_from_dict(json.loads(text))
