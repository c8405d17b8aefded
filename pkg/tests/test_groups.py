import cmath
import json
import math

import numpy as np
import pytest

from schottky.errors import (
    CoincidentFixedPoints,
    DegeneratePair,
    MissingPairings,
    NotClassical,
    NotLoxodromicMultiplier,
    OverlappingCircles,
    PairingMismatch,
    ParseError,
)
from schottky.groups import (
    Circle,
    build_from_circles,
    build_from_coordinates,
    conjugate_spec,
    fundamental_domain_contains,
    normalize,
    orbit_levels,
    pair_circles,
    spec_from_dict,
    spec_to_dict,
    symmetric_spec,
    validate_classical,
)
from schottky.moebius import INF, MoebiusMap, apply_sphere, classify, loxodromic_data
from schottky.words import enumerate_words


def test_genus1_from_circles(genus1_spec):
    assert genus1_spec.genus == 1
    assert genus1_spec.classical_verified
    assert classify(genus1_spec.generators[0]) == "loxodromic"


def test_overlap_and_degenerate():
    with pytest.raises(OverlappingCircles):
        build_from_circles([(Circle(0, 1), Circle(1, 1))])
    with pytest.raises(DegeneratePair):
        build_from_circles([(Circle(2, 1), Circle(2, 1))])


def test_genus2_plus_minus_5():
    spec = symmetric_spec(5.0)
    assert spec.classical_verified
    centers = [c.center for c in spec.disks]
    # oracle: pairwise distance minus radii, and traces
    for i in range(4):
        for j in range(i + 1, 4):
            assert abs(centers[i] - centers[j]) > 2
    traces = [abs(g.trace()) for g in spec.generators]
    assert all(t > 2 for t in traces)
    axes = [loxodromic_data(g) for g in spec.generators]
    assert {round(abs(a.fixed_plus - a.fixed_minus), 9) for a in axes} and axes[0].fixed_plus != axes[1].fixed_plus


def test_pairing_residual_and_ping_pong(rng):
    for spec in (symmetric_spec(5.0), symmetric_spec(3.0, genus=3)):
        for p in spec.pairings:
            assert p.residual(64) <= 1e-9
            # exterior of the source lands strictly inside the target
            count = 0
            while count < 1000:
                z = complex(rng.normal() * 8, rng.normal() * 8)
                if abs(z - p.source.center) <= p.source.radius:
                    continue
                w = apply_sphere(p.map, z)
                assert abs(w - p.target.center) < p.target.radius
                count += 1


def test_pairing_rotation_angle():
    a = pair_circles(Circle(-3, 1), Circle(3, 1))
    b = pair_circles(Circle(-3, 1), Circle(3, 1), angle=0.7)
    assert abs(a.map.trace().imag) < 1e-12
    assert abs(b.map.trace().imag) > 1e-3
    assert b.residual() <= 1e-9


def test_coordinates_examples():
    spec = build_from_coordinates([4], [(0, INF)])
    assert spec.generators[0].allclose(MoebiusMap.dilation(4))
    spec = build_from_coordinates([9], [(-1, 1)])
    g = spec.generators[0]
    assert abs(g.trace() ** 2 - (9 + 2 + 1 / 9)) < 1e-12
    d = loxodromic_data(g)
    assert abs(d.multiplier - 9) < 1e-9 and abs(d.fixed_minus + 1) < 1e-12 and abs(d.fixed_plus - 1) < 1e-12
    assert not spec.classical_verified and spec.pairings is None
    with pytest.raises(NotLoxodromicMultiplier):
        build_from_coordinates([0.5], [(0, 1)])
    with pytest.raises(CoincidentFixedPoints):
        build_from_coordinates([3], [(1, 1)])


def test_coordinates_round_trip(rng):
    for _ in range(50):
        lam = cmath.rect(math.exp(rng.uniform(0.1, 4)), rng.uniform(-3, 3))
        zm = complex(*rng.normal(size=2))
        zp = complex(*rng.normal(size=2))
        d = loxodromic_data(build_from_coordinates([lam], [(zm, zp)]).generators[0])
        assert abs(d.multiplier - lam) <= 1e-9 * abs(lam)
        assert abs(d.fixed_minus - zm) <= 1e-9 * (1 + abs(zm))
        assert abs(d.fixed_plus - zp) <= 1e-9 * (1 + abs(zp))


def test_validate_examples(genus1_spec):
    rep = validate_classical(genus1_spec)
    assert rep.valid and rep.min_gap == pytest.approx(4.0)
    overlapping = [pair_circles(Circle(-0.9, 1), Circle(0.9, 1))]
    rep = validate_classical(overlapping)
    assert not rep.valid and rep.min_gap < 0
    rep = validate_classical(symmetric_spec(5.0))
    assert rep.valid and len(rep.gaps) == 6 and all(g > 0 for _, _, g in rep.gaps)
    with pytest.raises(MissingPairings):
        validate_classical(build_from_coordinates([4], [(0, INF)]))


def test_fundamental_domain(genus1_spec):
    assert fundamental_domain_contains(genus1_spec, 0)
    assert fundamental_domain_contains(genus1_spec, 3 - 1)  # on the circle |z - 3| = 1
    assert fundamental_domain_contains(genus1_spec, 4)
    assert not fundamental_domain_contains(genus1_spec, 3.5)
    assert not fundamental_domain_contains(genus1_spec, 3)
    assert fundamental_domain_contains(genus1_spec, INF)
    with pytest.raises(NotClassical):
        fundamental_domain_contains(build_from_coordinates([4], [(0, INF)]), 0)


def test_normalize():
    spec = symmetric_spec(5.0)
    n = normalize(spec)
    d1, d2 = loxodromic_data(n.generators[0]), loxodromic_data(n.generators[1])
    assert abs(d1.fixed_minus) < 1e-12 and d1.fixed_plus is INF
    assert abs(d2.fixed_minus - 1) < 1e-12
    assert abs(d1.multiplier - loxodromic_data(spec.generators[0]).multiplier) < 1e-9


def test_conjugate_spec_keeps_circles(rng):
    spec = symmetric_spec(5.0)
    m = MoebiusMap.from_entries(1, 0.3, 0.02, 1)
    c = conjugate_spec(spec, m)
    assert c.pairings is not None and c.classical_verified
    for p in c.pairings:
        assert p.residual() <= 1e-9


def test_json_round_trip():
    spec = symmetric_spec(5.0)
    data = json.loads(json.dumps(spec_to_dict(spec)))
    again = spec_from_dict(data)
    assert again.classical_verified
    for a, b in zip(spec.generators, again.generators):
        assert a.allclose(b, 1e-12)
    only_circles = {"genus": 2, "circles": data["circles"]}
    assert spec_from_dict(only_circles).classical_verified
    only_gens = {"genus": 2, "generators": data["generators"]}
    assert not spec_from_dict(only_gens).classical_verified


def test_json_rejects():
    base = spec_to_dict(symmetric_spec(5.0))
    bad = json.loads(json.dumps(base))
    bad["generators"][0][0][0] = float("nan")
    with pytest.raises(ParseError):
        spec_from_dict(bad)
    with pytest.raises(ParseError):
        spec_from_dict({"genus": 0})
    with pytest.raises(ParseError):
        spec_from_dict({"genus": 1})
    mismatch = json.loads(json.dumps(base))
    mismatch["generators"] = list(reversed(mismatch["generators"]))
    with pytest.raises(PairingMismatch):
        spec_from_dict(mismatch)


def test_orbit_levels_match_word_maps():
    spec = symmetric_spec(5.0)
    levels = orbit_levels(spec, 3)
    for n in range(4):
        words, mats = levels[n]
        assert [tuple(int(x) for x in w) for w in words] == list(enumerate_words(2, n))
        for w, m in list(zip(words, mats))[:20]:
            scale = float(np.max(np.abs(m)))
            assert MoebiusMap.from_matrix(m).allclose(spec.word_map(tuple(int(x) for x in w)), 1e-12 * scale**2)
