"""Truncated Poincare series, dimension brackets, sector measures and the
mean-norm dimension bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .errors import NotClassical, SummabilityMargin
from .groups import SchottkyGroupSpec, orbit_levels
from .moebius import (
    ORIGIN,
    H3Point,
    batch_apply_h3,
    batch_displacement,
    kernel_value,
    stack,
    translation_length,
    visual_angle,
)
from .words import Basis, basis_to_str, enumerate_bases, letters, standard_basis

EXPONENT_TOL = 1e-13
DESCENT_TOL = 1e-6
DEFAULT_MARGIN = 0.05


# --- pressure ----------------------------------------------------------------


@dataclass(frozen=True)
class PressureEstimate:
    word_length: int
    exponent: float
    sum_value: float


def _log_sum(d: np.ndarray, s: float) -> float:
    return float(logsumexp(-s * d))


def _root_of_sum(d: np.ndarray) -> float:
    """The s >= 0 with sum exp(-s d) = 1 for positive displacements d."""
    if _log_sum(d, 0.0) <= 0.0:
        return 0.0
    hi = math.log(len(d)) / float(d.min())
    # sum at hi is at most len(d) * exp(-hi * min d) = 1
    if _log_sum(d, hi) >= 0.0:
        return hi
    return brentq(lambda s: _log_sum(d, s), 0.0, hi, xtol=EXPONENT_TOL, rtol=4 * np.finfo(float).eps)


def level_displacements(spec: SchottkyGroupSpec, n: int, x: H3Point = ORIGIN) -> np.ndarray:
    _, mats = orbit_levels(spec, n)[n]
    return batch_displacement(mats, x)


def pressure_exponent(spec: SchottkyGroupSpec, x: H3Point = ORIGIN, N: int = 8) -> PressureEstimate:
    """Root s_N of sum over |w| = N of exp(-s d(x, w x)) = 1.

    The length-N sums are submultiplicative in N, so every s_N bounds the
    critical exponent from above.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    d = level_displacements(spec, N, x)
    s = _root_of_sum(d)
    return PressureEstimate(N, s, float(np.exp(_log_sum(d, s))))


# --- dimension bracket -------------------------------------------------------


@dataclass(frozen=True)
class DimensionBracket:
    lower: float
    upper: float
    word_length: int
    basepoint: H3Point
    pressure_min: float = math.nan
    pressure_exponents: tuple = ()

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "word_length": self.word_length,
            "basepoint": [self.basepoint.x1, self.basepoint.x2, self.basepoint.t],
            "pressure_min": self.pressure_min,
            "pressure_exponents": list(self.pressure_exponents),
        }


def _derivative_bounds(spec: SchottkyGroupSpec, N: int):
    """For every length-N word w and letter b: inf and sup of |w'| over the disk of b.

    Entries where the last letter of w is -b (w not defined on that disk in the
    ping-pong sense) are marked invalid.
    """
    words, mats = orbit_levels(spec, N)[N]
    alphabet = letters(spec.genus)
    disks = [spec.letter_disk(b) for b in alphabet]
    centers = np.array([c.center for c in disks])
    radii = np.array([c.radius for c in disks])
    c, d = mats[:, 1, 0], mats[:, 1, 1]
    # |w'(z)| = 1 / |c z + d|^2 = 1 / (|c| |z - pole|)^2
    abs_c = np.abs(c)[:, None]
    dist = np.abs(c[:, None] * centers[None, :] + d[:, None]) / np.where(abs_c > 0, abs_c, 1.0)
    near = np.maximum(dist - radii[None, :], 0.0) * abs_c
    far = (dist + radii[None, :]) * abs_c
    # a word with c == 0 is affine with |w'| = 1/|d|^2 everywhere
    affine = (abs_c == 0).ravel()
    if affine.any():
        near[affine] = np.abs(d[affine])[:, None]
        far[affine] = np.abs(d[affine])[:, None]
    with np.errstate(divide="ignore"):
        sup = 1.0 / near**2
    inf = 1.0 / far**2
    valid = words[:, -1][:, None] != -np.array(alphabet, dtype=np.int16)[None, :]
    return _letter_rank(words[:, 0]), inf, sup, valid


def _letter_rank(x: np.ndarray) -> np.ndarray:
    # position of a letter in the order 1, -1, 2, -2, ...
    x = x.astype(np.int64)
    return 2 * (np.abs(x) - 1) + (x < 0)


def _transfer_root(first, weights, valid, size: int) -> float:
    log_w = np.log(np.where(valid, weights, 1.0))

    def log_radius(s: float) -> float:
        a = np.zeros((size, size))
        terms = np.where(valid, np.exp(s * log_w), 0.0)
        for row in range(size):
            a[row] = terms[first == row].sum(axis=0)
        rho = max(abs(np.linalg.eigvals(a)))
        return math.log(rho) if rho > 0 else -math.inf

    f0 = log_radius(0.0)
    if f0 <= 1e-15:
        return 0.0
    if log_radius(2.0) >= 0.0:
        return 2.0
    return brentq(log_radius, 0.0, 2.0, xtol=EXPONENT_TOL)


def dimension_bracket(spec: SchottkyGroupSpec, N: int = 8, x: H3Point = ORIGIN) -> DimensionBracket:
    """Lower and upper estimates of the critical exponent at block length N.

    Both come from the block transfer matrix A(s)[a][b] = sum over words w of
    length N starting with a and not ending in -b of |w'|^s on the disk of b:
    the infimum of |w'| gives the lower value, the supremum the upper one (the
    supremum bounds the diameters of the nested disk images, so it yields a
    covering estimate).  The length-n pressure roots s_n at ``x`` are reported
    alongside for comparison; they are not used as bounds.
    """
    if not spec.classical_verified:
        raise NotClassical("dimension bracket needs a verified classical group")
    if N < 1:
        raise ValueError("N must be >= 1")
    first, inf, sup, valid = _derivative_bounds(spec, N)
    size = 2 * spec.genus
    lower = _transfer_root(first, inf, valid, size)
    upper = _transfer_root(first, sup, valid, size)
    exps = tuple(pressure_exponent(spec, x, n).exponent for n in range(1, N + 1))
    return DimensionBracket(min(lower, upper), upper, N, x, min(exps), exps)


# --- sector measures ---------------------------------------------------------


@dataclass(frozen=True)
class SectorMeasureApprox:
    letter: int
    points: np.ndarray  # complex atom locations
    weights: np.ndarray
    words: tuple  # index arrays into the orbit levels: (length, row)
    s: float
    word_length: int

    @property
    def mass(self) -> float:
        return float(self.weights.sum())


def _check_margin(spec, x, s, N):
    s_n = pressure_exponent(spec, x, N).exponent
    if not s > s_n:
        raise SummabilityMargin(f"s = {s} must exceed the truncation exponent {s_n:.6g}")


def _raw_atoms(spec: SchottkyGroupSpec, x: H3Point, s: float, N: int):
    """Atom data for all nontrivial words of length <= N, as flat arrays."""
    levels = orbit_levels(spec, N)
    firsts, pts, logw, lens, rows = [], [], [], [], []
    for n in range(1, N + 1):
        words, mats = levels[n]
        z, _ = batch_apply_h3(mats, x)
        d = batch_displacement(mats, x)
        firsts.append(words[:, 0])
        pts.append(z)
        logw.append(-s * d)
        lens.append(np.full(len(words), n))
        rows.append(np.arange(len(words)))
    logw = np.concatenate(logw)
    log_z = float(logsumexp(logw))
    weights = np.exp(logw - log_z)
    return (
        np.concatenate(firsts),
        np.concatenate(pts),
        weights,
        np.concatenate(lens),
        np.concatenate(rows),
        log_z,
    )


def sector_measures(spec: SchottkyGroupSpec, x: H3Point = ORIGIN, s: Optional[float] = None, N: int = 8) -> list:
    """One normalized atomic measure per letter, in letter order 1, -1, 2, -2, ...

    Atom of w sits at the vertical projection of w x with weight exp(-s d(x, w x)),
    normalized over all nontrivial words of length <= N.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if s is None:
        s = pressure_exponent(spec, x, N).exponent + DEFAULT_MARGIN
    else:
        _check_margin(spec, x, s, N)
    return _sectors(spec, x, s, N)


def _sectors(spec: SchottkyGroupSpec, x: H3Point, s: float, N: int) -> list:
    firsts, pts, weights, lens, rows, _ = _raw_atoms(spec, x, s, N)
    out = []
    for letter in letters(spec.genus):
        sel = firsts == letter
        out.append(
            SectorMeasureApprox(
                letter=letter,
                points=pts[sel],
                weights=weights[sel],
                words=(lens[sel], rows[sel]),
                s=s,
                word_length=N,
            )
        )
    return out


def sector_mass_map(measures: Sequence[SectorMeasureApprox]) -> dict:
    return {m.letter: m.mass for m in measures}


# --- decomposition identities ------------------------------------------------


@dataclass(frozen=True)
class GeneratorResidual:
    generator: int
    lhs: float
    rhs: float
    residual: float
    boundary_term: float
    corrected_residual: float


@dataclass(frozen=True)
class DecompositionReport:
    s: float
    word_length: int
    truncation_exponent: float
    rows: tuple
    masses: dict
    mass_total: float
    c_omega: float
    aggregate_lhs: float
    aggregate_rhs: float
    aggregate_residual: float
    aggregate_corrected_residual: float

    @property
    def max_residual(self) -> float:
        return max(r.residual for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "word_length": self.word_length,
            "truncation_exponent": self.truncation_exponent,
            "generators": [r.__dict__ for r in self.rows],
            "sector_masses": {str(k): v for k, v in self.masses.items()},
            "mass_total": self.mass_total,
            "c_omega": self.c_omega,
            "aggregate_lhs": self.aggregate_lhs,
            "aggregate_rhs": self.aggregate_rhs,
            "aggregate_residual": self.aggregate_residual,
            "aggregate_corrected_residual": self.aggregate_corrected_residual,
        }


def _kernel_sum(spec: SchottkyGroupSpec, gen: int, x: H3Point, s: float, sector: SectorMeasureApprox) -> float:
    """Integral of the kernel of gen^-1 x seen from x against the sector measure, atom by atom."""
    gamma = spec.letter_map(gen)
    d = float(batch_displacement(stack([gamma]), x)[0])
    target = gamma.inverse()
    z, t = batch_apply_h3(stack([target]), x)
    y = H3Point.from_complex(complex(z[0]), float(t[0]))
    vals = [kernel_value(d, visual_angle(x, y, p), s) for p in sector.points]
    return math.fsum(w * v for w, v in zip(sector.weights, vals))


def verify_decomposition(spec: SchottkyGroupSpec, x: H3Point = ORIGIN, s: Optional[float] = None, N: int = 8) -> DecompositionReport:
    """Check the sector identities on the truncated atomic measures.

    For each generator gamma: lhs = integral of the Poisson kernel of gamma^-1 x
    against the sector of gamma^-1, rhs = 1 - mass of the sector of gamma.  The
    aggregate compares sum of lhs with (g - 1) + C, C the total mass of the
    inverse-letter sectors.

    On finitely many atoms the identity picks up a boundary term: pushing the
    gamma^-1 sector forward by gamma produces the identity atom and drops the
    length-N words not starting with gamma.  The report gives that term and the
    residual left after removing it, next to the raw residual.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    s_n = pressure_exponent(spec, x, N).exponent
    if s is None:
        s = s_n + DEFAULT_MARGIN
    elif not s > s_n:
        raise SummabilityMargin(f"s = {s} must exceed the truncation exponent {s_n:.6g}")
    measures = _sectors(spec, x, s, N)
    by_letter = {m.letter: m for m in measures}
    masses = sector_mass_map(measures)
    total = math.fsum(masses.values())
    log_z = _raw_atoms(spec, x, s, N)[-1]
    identity_mass = math.exp(-log_z)
    rows = []
    for i in range(1, spec.genus + 1):
        lhs = _kernel_sum(spec, i, x, s, by_letter[-i])
        rhs = 1.0 - masses[i]
        top = _top_layer_mass(spec, x, s, N, log_z, exclude_first=i)
        boundary = identity_mass - top
        rows.append(GeneratorResidual(i, lhs, rhs, abs(lhs - rhs), boundary, abs(lhs - rhs - boundary)))
    c_omega = math.fsum(masses[-i] for i in range(1, spec.genus + 1))
    agg_lhs = math.fsum(r.lhs for r in rows)
    agg_rhs = (spec.genus - 1) + c_omega
    agg_boundary = math.fsum(r.boundary_term for r in rows)
    return DecompositionReport(
        s=s,
        word_length=N,
        truncation_exponent=s_n,
        rows=tuple(rows),
        masses=masses,
        mass_total=total,
        c_omega=c_omega,
        aggregate_lhs=agg_lhs,
        aggregate_rhs=agg_rhs,
        aggregate_residual=abs(agg_lhs - agg_rhs),
        aggregate_corrected_residual=abs(agg_lhs - agg_rhs - agg_boundary),
    )


def _top_layer_mass(spec, x, s, N, log_z, exclude_first: int) -> float:
    words, mats = orbit_levels(spec, N)[N]
    d = batch_displacement(mats, x)
    sel = words[:, 0] != exclude_first
    if not sel.any():
        return 0.0
    return float(np.exp(logsumexp(-s * d[sel]) - log_z))


# --- mean norm -----------------------------------------------------------------


def _basis_matrices(spec: SchottkyGroupSpec, basis: Sequence[Sequence[int]]) -> np.ndarray:
    return stack([spec.word_map(w) for w in basis])


def mean_displacement(spec: SchottkyGroupSpec, basis: Sequence[Sequence[int]], x: H3Point = ORIGIN) -> float:
    """Average over the basis words of d(x, w x)."""
    for w in basis:
        for letter in w:
            if letter == 0 or abs(letter) > spec.genus:
                raise ValueError(f"letter {letter} out of range for genus {spec.genus}")
    d = batch_displacement(_basis_matrices(spec, basis), x)
    return math.fsum(d) / spec.genus


@dataclass(frozen=True)
class NormEstimate:
    basepoint: H3Point
    basis: Basis
    mean_displacement: float
    bases_searched: int
    nielsen_depth: int
    start_value: float = math.nan

    def to_dict(self) -> dict:
        return {
            "basepoint": [self.basepoint.x1, self.basepoint.x2, self.basepoint.t],
            "basis": basis_to_str(self.basis),
            "mean_displacement": self.mean_displacement,
            "bases_searched": self.bases_searched,
            "nielsen_depth": self.nielsen_depth,
            "start_value": self.start_value,
        }


class _BasisTable:
    """All candidate bases as one matrix stack, for fast evaluation at many basepoints."""

    def __init__(self, spec: SchottkyGroupSpec, bases: list):
        self.bases = bases
        self.g = spec.genus
        cache: dict = {}
        mats = []
        for b in bases:
            for w in b:
                if w not in cache:
                    cache[w] = spec.word_map(w).matrix()
                mats.append(cache[w])
        self.mats = np.array(mats).reshape(-1, 2, 2)

    def values(self, x: H3Point) -> np.ndarray:
        d = batch_displacement(self.mats, x).reshape(len(self.bases), self.g)
        return d.sum(axis=1) / self.g

    def best(self, x: H3Point):
        v = self.values(x)
        k = int(np.argmin(v))
        return float(v[k]), k


def _point(p: np.ndarray) -> H3Point:
    return H3Point(float(p[0]), float(p[1]), float(math.exp(p[2])))


def mean_norm_estimate(
    spec: SchottkyGroupSpec,
    nielsen_depth: int = 2,
    x_candidates: Optional[Sequence[H3Point]] = None,
    refine: bool = True,
) -> NormEstimate:
    """Smallest mean displacement over Nielsen-reachable bases and basepoints.

    The search runs over ``enumerate_bases(g, nielsen_depth)`` and the candidate
    basepoints, then refines the basepoint by coordinate descent in
    (x1, x2, log t) with step halving.  The value bounds the infimum over all
    bases at the reported basepoint from above.
    """
    if x_candidates is None:
        x_candidates = [ORIGIN]
    if not x_candidates:
        raise ValueError("need at least one candidate basepoint")
    bases = enumerate_bases(spec.genus, nielsen_depth)
    table = _BasisTable(spec, bases)
    best = None
    for x in x_candidates:
        val, k = table.best(x)
        if best is None or val < best[0]:
            best = (val, k, x)
    start_value, k, x = best
    value = start_value
    if refine:
        p = np.array([x.x1, x.x2, math.log(x.t)])
        step = 0.5
        while step >= DESCENT_TOL:
            improved = False
            for axis in range(3):
                for sign in (1.0, -1.0):
                    q = p.copy()
                    q[axis] += sign * step * (1.0 if axis == 2 else math.exp(p[2]))
                    val, kk = table.best(_point(q))
                    if val < value - 1e-15:
                        p, value, k, improved = q, val, kk, True
                        break
            if not improved:
                step /= 2
        x = _point(p)
    return NormEstimate(x, bases[k], value, len(bases), nielsen_depth, start_value)


# --- bounds --------------------------------------------------------------------


@dataclass(frozen=True)
class BoundValue:
    name: str
    value: float
    applicable: bool
    vacuous: bool
    consistent: Optional[bool]
    note: str = ""


@dataclass(frozen=True)
class BoundsReport:
    genus: int
    ratio_lambda: float
    translation_lengths: tuple
    ratio_matrix: tuple
    norm: NormEstimate
    bracket: DimensionBracket
    s: float
    inverse_masses: tuple
    sigma_minus: float
    bounds: tuple = field(default_factory=tuple)

    def bound(self, name: str) -> BoundValue:
        for b in self.bounds:
            if b.name == name:
                return b
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "genus": self.genus,
            "lambda": self.ratio_lambda,
            "translation_lengths": list(self.translation_lengths),
            "ratio_matrix": [list(r) for r in self.ratio_matrix],
            "norm": self.norm.to_dict(),
            "bracket": self.bracket.to_dict(),
            "s": self.s,
            "inverse_sector_masses": list(self.inverse_masses),
            "sigma_minus": self.sigma_minus,
            "bounds": [b.__dict__ for b in self.bounds],
        }


def bounds_report(spec: SchottkyGroupSpec, N: int = 8, nielsen_depth: int = 2, margin: float = DEFAULT_MARGIN) -> BoundsReport:
    """Dimension bounds from the mean norm, next to the computed bracket.

    B1 = ((lam - 1) log 2 + (lam + 1) log g) / norm with lam the largest ratio of
    translation lengths in the standard basis; B2 = 2 log g / norm, applicable
    when every inverse-letter sector has mass >= 1/(2g); B3 = log(g / sigma) / norm
    with sigma the total inverse-letter sector mass (a finite-depth estimate,
    reported as heuristic).
    """
    if not spec.classical_verified:
        raise NotClassical("bounds need the dimension bracket of a classical group")
    g = spec.genus
    lengths = tuple(translation_length(m) for m in spec.generators)
    ratios = tuple(tuple(tj / ti for ti in lengths) for tj in lengths)
    lam = max(lengths) / min(lengths)
    bracket = dimension_bracket(spec, N)
    norm = mean_norm_estimate(spec, nielsen_depth)
    x = norm.basepoint
    s = pressure_exponent(spec, x, N).exponent + margin
    masses = sector_mass_map(sector_measures(spec, x, s, N))
    inv = tuple(masses[-i] for i in range(1, g + 1))
    sigma = math.fsum(inv)
    lower = bracket.lower
    vacuous = g == 1
    tol = 1e-9

    def entry(name, value, applicable=True, note=""):
        consistent = (lower <= value + 1e-12) if applicable else None
        return BoundValue(name, value, applicable, vacuous, consistent, note)

    b1 = ((lam - 1) * math.log(2) + (lam + 1) * math.log(g)) / norm.mean_displacement
    b2_ok = all(m >= 1 / (2 * g) - tol for m in inv)
    b2 = 2 * math.log(g) / norm.mean_displacement
    b3 = math.log(g / sigma) / norm.mean_displacement
    bounds = (
        entry("B1", b1),
        entry("B2", b2, b2_ok, "" if b2_ok else "inverse sector mass below 1/(2g)"),
        entry("B3", b3, True, "heuristic: finite-depth sector masses"),
    )
    return BoundsReport(g, lam, lengths, ratios, norm, bracket, s, inv, sigma, bounds)
