"""Schottky groups from circle pairings or from multiplier/fixed-point coordinates."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .errors import (
    CoincidentFixedPoints,
    DegeneratePair,
    MissingPairings,
    NotClassical,
    NotLoxodromic,
    NotLoxodromicMultiplier,
    OverlappingCircles,
    PairingMismatch,
    ParseError,
)
from .moebius import (
    INF,
    MoebiusMap,
    apply_sphere,
    as_point,
    classify,
    compose,
    conjugate,
    loxodromic_data,
    map_sending,
)

DISJOINT_TOL = 1e-12
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class Circle:
    center: complex
    radius: float

    def __post_init__(self):
        c = as_point(self.center)
        if c is INF:
            raise ValueError("circle centre must be finite")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"circle radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", complex(c))
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, z, closed: bool = True) -> bool:
        if z is INF:
            return False
        dist = abs(complex(z) - self.center)
        tol = 1e-12 * self.radius
        return dist <= self.radius + tol if closed else dist < self.radius - tol

    def sample(self, k: int = 64) -> np.ndarray:
        theta = 2 * np.pi * np.arange(k) / k
        return self.center + self.radius * np.exp(1j * theta)

    def gap(self, other: "Circle") -> float:
        """Distance between the closed disks (negative when they overlap)."""
        return abs(self.center - other.center) - self.radius - other.radius


@dataclass(frozen=True)
class CirclePairing:
    source: Circle
    target: Circle
    map: MoebiusMap

    def residual(self, k: int = 64) -> float:
        """Largest deviation of sampled source-circle images from the target circle, relative to its radius."""
        pts = self.source.sample(k)
        worst = 0.0
        for p in pts:
            w = apply_sphere(self.map, p)
            if w is INF:
                return math.inf
            worst = max(worst, abs(abs(w - self.target.center) - self.target.radius))
        return worst / self.target.radius


def pairing_map(source: Circle, target: Circle, angle: float = 0.0) -> MoebiusMap:
    """The map taking ``source`` onto ``target`` and its exterior into the target disk.

    z -> c2 - e^{i angle} u^2 r1 r2 / (z - c1), u the unit vector from c1 to c2.
    angle = 0 gives the purely hyperbolic pairing (real trace).
    """
    c1, r1, c2, r2 = source.center, source.radius, target.center, target.radius
    if c1 == c2:
        if r1 == r2:
            raise DegeneratePair("source and target circles coincide")
        raise OverlappingCircles("concentric circles cannot be paired as a Schottky pair")
    u = (c2 - c1) / abs(c2 - c1)
    k = cmath.exp(1j * angle) * u * u * r1 * r2
    return MoebiusMap.from_entries(c2, -c2 * c1 - k, 1, -c1)


def pair_circles(source: Circle, target: Circle, angle: float = 0.0) -> CirclePairing:
    return CirclePairing(source, target, pairing_map(source, target, angle))


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    gaps: list  # (label_i, label_j, gap)
    min_gap: float
    residuals: list
    max_residual: float
    messages: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "min_gap": self.min_gap,
            "max_residual": self.max_residual,
            "gaps": [{"disk_i": i, "disk_j": j, "gap": gap} for i, j, gap in self.gaps],
            "residuals": list(self.residuals),
            "messages": list(self.messages),
        }


@dataclass(frozen=True)
class SchottkyGroupSpec:
    genus: int
    generators: tuple
    pairings: Optional[tuple] = None
    classical_verified: bool = False

    def __post_init__(self):
        if self.genus < 1 or len(self.generators) != self.genus:
            raise ValueError("need genus >= 1 and exactly genus generators")
        for i, gen in enumerate(self.generators):
            kind = classify(gen)
            if kind != "loxodromic":
                raise NotLoxodromic(f"generator {i + 1} is {kind}")
        if self.pairings is not None and len(self.pairings) != self.genus:
            raise ValueError("need one pairing per generator")

    @property
    def disks(self) -> list:
        """Disks in letter order 1, -1, 2, -2, ...: the image disk of each letter.

        Letter +i maps into the target disk of pairing i, letter -i into its source disk.
        """
        if self.pairings is None:
            raise MissingPairings("group has no circle pairings")
        out = []
        for p in self.pairings:
            out += [p.target, p.source]
        return out

    def letter_disk(self, letter: int) -> Circle:
        p = self.pairings[abs(letter) - 1]
        return p.target if letter > 0 else p.source

    def letter_map(self, letter: int) -> MoebiusMap:
        gen = self.generators[abs(letter) - 1]
        return gen if letter > 0 else gen.inverse()

    def letter_matrices(self) -> dict:
        return {x: self.letter_map(x).matrix() for x in _letters(self.genus)}

    def word_map(self, word: Sequence[int]) -> MoebiusMap:
        out = MoebiusMap.identity()
        for x in word:
            out = compose(out, self.letter_map(x))
        return out

    def fixed_data(self) -> list:
        return [loxodromic_data(gen) for gen in self.generators]


def _letters(g: int) -> list:
    out = []
    for i in range(1, g + 1):
        out += [i, -i]
    return out


def _check_classical(pairings: Sequence[CirclePairing]) -> ValidationReport:
    labels = []
    circles = []
    for i, p in enumerate(pairings, start=1):
        labels += [f"D{i}", f"D{i}'"]
        circles += [p.source, p.target]
    gaps = [(labels[i], labels[j], circles[i].gap(circles[j])) for i, j in combinations(range(len(circles)), 2)]
    residuals = [p.residual() for p in pairings]
    messages = []
    for i, j, gap in gaps:
        if gap <= DISJOINT_TOL:
            messages.append(f"disks {i} and {j} overlap (gap {gap:.6g})")
    for k, (p, res) in enumerate(zip(pairings, residuals), start=1):
        if res > RESIDUAL_TOL:
            messages.append(f"pairing {k} misses its target circle (residual {res:.3g})")
        elif not _exterior_to_interior(p):
            messages.append(f"pairing {k} does not send the exterior of its source into its target")
    min_gap = min((gap for _, _, gap in gaps), default=math.inf)
    return ValidationReport(
        valid=not messages,
        gaps=gaps,
        min_gap=min_gap,
        residuals=residuals,
        max_residual=max(residuals),
        messages=messages,
    )


def _exterior_to_interior(p: CirclePairing) -> bool:
    # a point well outside the source disk must land inside the target disk
    probe = p.source.center + 2.0 * p.source.radius
    w = apply_sphere(p.map, probe)
    return w is not INF and p.target.contains(w)


def validate_classical(spec_or_pairings) -> ValidationReport:
    """Disk gaps, pairing residuals and the overall classical verdict."""
    if isinstance(spec_or_pairings, SchottkyGroupSpec):
        if spec_or_pairings.pairings is None:
            raise MissingPairings("spec carries no circle pairings")
        pairings = spec_or_pairings.pairings
    else:
        pairings = tuple(spec_or_pairings)
        if not pairings:
            raise MissingPairings("no pairings given")
    return _check_classical(pairings)


def build_from_circles(pairs: Sequence, angles: Optional[Sequence[float]] = None) -> SchottkyGroupSpec:
    """Build a classical group from (source, target) circle pairs."""
    pairs = [(s, t) for s, t in pairs]
    if not pairs:
        raise ValueError("need at least one pair of circles")
    angles = list(angles) if angles is not None else [0.0] * len(pairs)
    for s, t in pairs:
        if s == t:
            raise DegeneratePair(f"source and target circles coincide: {s}")
    pairings = tuple(pair_circles(s, t, a) for (s, t), a in zip(pairs, angles))
    report = _check_classical(pairings)
    if not report.valid:
        raise OverlappingCircles("; ".join(report.messages))
    return SchottkyGroupSpec(
        genus=len(pairs),
        generators=tuple(p.map for p in pairings),
        pairings=pairings,
        classical_verified=True,
    )


def attach_pairings(generators: Sequence[MoebiusMap], pairs: Sequence) -> SchottkyGroupSpec:
    """Combine given generators with claimed circle pairs, checking that each generator pairs its circles."""
    pairings = tuple(CirclePairing(s, t, gen) for gen, (s, t) in zip(generators, pairs))
    for k, p in enumerate(pairings, start=1):
        if p.residual() > RESIDUAL_TOL or not _exterior_to_interior(p):
            raise PairingMismatch(f"generator {k} does not pair its circles")
    report = _check_classical(pairings)
    if not report.valid:
        raise OverlappingCircles("; ".join(report.messages))
    return SchottkyGroupSpec(len(pairings), tuple(generators), pairings, True)


def build_from_coordinates(multipliers: Sequence[complex], fixed_pairs: Sequence) -> SchottkyGroupSpec:
    """Generators z -> lam z conjugated so that 0, INF go to (z_minus, z_plus)."""
    gens = []
    for lam, (zm, zp) in zip(multipliers, fixed_pairs, strict=True):
        lam = complex(lam)
        if not abs(lam) > 1:
            raise NotLoxodromicMultiplier(f"|multiplier| must exceed 1, got {lam}")
        zm, zp = as_point(zm), as_point(zp)
        if zm is zp or (zm is not INF and zp is not INF and zm == zp):
            raise CoincidentFixedPoints(f"fixed points coincide: {zm}")
        t = map_sending(zm, zp)
        gens.append(conjugate(MoebiusMap.dilation(lam), t))
    if not gens:
        raise ValueError("need at least one generator")
    return SchottkyGroupSpec(len(gens), tuple(gens))


def fundamental_domain_contains(spec: SchottkyGroupSpec, z) -> bool:
    """True when z lies outside every open pairing disk (the circles belong to the domain)."""
    if not spec.classical_verified:
        raise NotClassical("fundamental domain test needs a verified classical group")
    if z is INF:
        return True
    return not any(c.contains(z, closed=False) for c in spec.disks)


# --- conjugation and normalization ------------------------------------------


def _image_circle(m: MoebiusMap, c: Circle) -> Optional[Circle]:
    pole = apply_sphere(m.inverse(), INF)
    if pole is INF or abs(pole - c.center) <= c.radius * (1 + 1e-9):
        return None
    p = [apply_sphere(m, c.center + c.radius * cmath.exp(1j * th)) for th in (0.0, 2.0944, 4.18879)]
    a, b, d = p
    # circumcircle of three points
    ab, ad = b - a, d - a
    den = 2 * (ab.real * ad.imag - ab.imag * ad.real)
    ux = (ad.imag * abs(ab) ** 2 - ab.imag * abs(ad) ** 2) / den
    uy = (ab.real * abs(ad) ** 2 - ad.real * abs(ab) ** 2) / den
    center = a + complex(ux, uy)
    return Circle(center, abs(center - a))


def conjugate_spec(spec: SchottkyGroupSpec, m: MoebiusMap) -> SchottkyGroupSpec:
    """The group m G m^-1 with generators m g_i m^-1.

    Circles are carried along when the pole of m lies outside every closed disk,
    so that disks map to disks; otherwise the result has no pairings.
    """
    gens = tuple(conjugate(gen, m) for gen in spec.generators)
    if spec.pairings is None:
        return SchottkyGroupSpec(spec.genus, gens)
    new = []
    for gen, p in zip(gens, spec.pairings):
        s, t = _image_circle(m, p.source), _image_circle(m, p.target)
        if s is None or t is None:
            return SchottkyGroupSpec(spec.genus, gens)
        new.append(CirclePairing(s, t, gen))
    pairings = tuple(new)
    ok = spec.classical_verified and _check_classical(pairings).valid
    return SchottkyGroupSpec(spec.genus, gens, pairings, ok)


def normalize(spec: SchottkyGroupSpec) -> SchottkyGroupSpec:
    """Conjugate so the repelling/attracting fixed points of g_1 sit at 0/INF and,
    for g >= 2, the repelling fixed point of g_2 sits at 1.  Pairings are dropped."""
    data = spec.fixed_data()
    zm1, zp1 = data[0].fixed_minus, data[0].fixed_plus
    # h sends zm1 -> 0, zp1 -> INF
    h = map_sending(zm1, zp1).inverse()
    if spec.genus >= 2:
        w = apply_sphere(h, data[1].fixed_minus)
        if w is not INF and w != 0:
            h = compose(MoebiusMap.dilation(1 / w), h)
    gens = tuple(conjugate(gen, h) for gen in spec.generators)
    return SchottkyGroupSpec(spec.genus, gens)


# --- JSON --------------------------------------------------------------------


def _finite(x, what: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{what}: expected a number, got {x!r}")
    x = float(x)
    if not math.isfinite(x):
        raise ParseError(f"{what}: NaN/Inf not allowed")
    return x


def spec_from_dict(data) -> SchottkyGroupSpec:
    """Parse the group-spec JSON object (see README for the schema)."""
    if not isinstance(data, dict):
        raise ParseError("group spec must be a JSON object")
    try:
        genus = data["genus"]
    except KeyError as exc:
        raise ParseError("missing 'genus'") from exc
    if isinstance(genus, bool) or not isinstance(genus, int) or genus < 1:
        raise ParseError(f"'genus' must be a positive integer, got {genus!r}")

    gens = None
    if data.get("generators") is not None:
        raw = data["generators"]
        if not isinstance(raw, list) or len(raw) != genus:
            raise ParseError("'generators' must list exactly genus matrices")
        gens = []
        for k, entry in enumerate(raw, start=1):
            if not isinstance(entry, list) or len(entry) != 4:
                raise ParseError(f"generator {k}: expected [[a.re,a.im],[b.re,b.im],[c.re,c.im],[d.re,d.im]]")
            vals = []
            for e in entry:
                if not isinstance(e, list) or len(e) != 2:
                    raise ParseError(f"generator {k}: each entry must be [re, im]")
                vals.append(complex(_finite(e[0], f"generator {k}"), _finite(e[1], f"generator {k}")))
            try:
                gens.append(MoebiusMap.from_entries(*vals))
            except Exception as exc:
                raise ParseError(f"generator {k}: {exc}") from exc

    circles = data.get("circles")
    if circles is not None:
        if not isinstance(circles, list) or len(circles) != genus:
            raise ParseError("'circles' must list exactly genus circle pairs")
        pairs, angles = [], []
        for k, c in enumerate(circles, start=1):
            if not isinstance(c, dict):
                raise ParseError(f"circle pair {k} must be an object")
            try:
                vals = {key: _finite(c[key], f"circle pair {k} '{key}'") for key in ("cx", "cy", "r", "cx2", "cy2", "r2")}
            except KeyError as exc:
                raise ParseError(f"circle pair {k}: missing {exc}") from exc
            angles.append(_finite(c.get("angle", 0.0), f"circle pair {k} 'angle'"))
            try:
                pairs.append((Circle(complex(vals["cx"], vals["cy"]), vals["r"]), Circle(complex(vals["cx2"], vals["cy2"]), vals["r2"])))
            except ValueError as exc:
                raise ParseError(f"circle pair {k}: {exc}") from exc
        if gens is None:
            return build_from_circles(pairs, angles)
        return attach_pairings(gens, pairs)

    if gens is None:
        raise ParseError("spec needs 'generators', 'circles', or both")
    return SchottkyGroupSpec(genus, tuple(gens))


def spec_to_dict(spec: SchottkyGroupSpec) -> dict:
    out = {
        "genus": spec.genus,
        "generators": [
            [[v.real, v.imag] for v in (m.a, m.b, m.c, m.d)] for m in spec.generators
        ],
    }
    if spec.pairings is not None:
        out["circles"] = [
            {
                "cx": p.source.center.real,
                "cy": p.source.center.imag,
                "r": p.source.radius,
                "cx2": p.target.center.real,
                "cy2": p.target.center.imag,
                "r2": p.target.radius,
            }
            for p in spec.pairings
        ]
    return out


def spec_on_rays(separation: float, angles: Sequence[float], radii: Optional[Sequence[float]] = None) -> SchottkyGroupSpec:
    """Pair k pairs the circles centred at -separation e^{i angle_k} and +separation e^{i angle_k}."""
    radii = list(radii) if radii is not None else [1.0] * len(angles)
    pairs = []
    for angle, r in zip(angles, radii, strict=True):
        u = cmath.exp(1j * angle)
        pairs.append((Circle(-separation * u, r), Circle(separation * u, r)))
    return build_from_circles(pairs)


def symmetric_spec(separation: float, genus: int = 2, radius: float = 1.0) -> SchottkyGroupSpec:
    """Equal circles at +-separation on the rays e^{i pi k / genus}, k = 0..genus-1."""
    return spec_on_rays(separation, [math.pi * k / genus for k in range(genus)], [radius] * genus)


# --- orbit enumeration -------------------------------------------------------


@lru_cache(maxsize=8)
def orbit_levels(spec: SchottkyGroupSpec, n_max: int) -> tuple:
    """Reduced words of each length 0..n_max with their matrices.

    Entry n is (words, mats): an (count, n) int16 array in the same order as
    ``words.enumerate_words`` and the matching (count, 2, 2) SL(2,C) stack,
    word w_1...w_n acting as the composition w_1 o ... o w_n.  Arrays are read-only
    because results are cached per (spec, n_max).
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    g = spec.genus
    alphabet = np.array(_letters(g), dtype=np.int16)
    letter_mats = np.array([spec.letter_map(int(x)).matrix() for x in alphabet])
    words = np.zeros((1, 0), dtype=np.int16)
    mats = np.eye(2, dtype=complex).reshape(1, 2, 2)
    levels = [(words, mats)]
    for n in range(1, n_max + 1):
        if n == 1:
            rows = np.zeros(2 * g, dtype=np.int64)
            nxt = np.arange(2 * g)
        else:
            last = words[:, -1]
            keep = (alphabet[None, :] != -last[:, None]).ravel()
            rows = np.repeat(np.arange(len(words)), 2 * g)[keep]
            nxt = np.tile(np.arange(2 * g), len(words))[keep]
        words = np.column_stack([words[rows], alphabet[nxt]])
        mats = mats[rows] @ letter_mats[nxt]
        levels.append((words, mats))
    for w, m in levels:
        w.setflags(write=False)
        m.setflags(write=False)
    return tuple(levels)
