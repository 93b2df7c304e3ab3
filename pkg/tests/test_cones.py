import json
import random

import pytest

from robustlip.cones import (Caps, DimensionLimit, GenCone, NotSingleton, UnionCone,
                             build_cone, dd_convert, dd_generators, member,
                             polar_generators, union_contains, union_convex_decide,
                             value_query)
from robustlip.model import ExtValue, NEG_INF, gen_random, instance_from_dict
from robustlip.rationals import dot, rat, unit_vec


def vec(*xs):
    return tuple(rat(x) for x in xs)


def test_dd_examples_match_expected_normals():
    assert set(polar_generators([vec(1, 0), vec(1, 1)], 2)) == {vec(0, 1), vec(1, -1)}
    assert set(polar_generators([vec(0, 1)], 2)) == {vec(1, 0), vec(-1, 0), vec(0, 1)}
    assert set(polar_generators([vec(1, 0), vec(0, 1)], 2)) == {vec(1, 0), vec(0, 1)}


def test_dd_round_trip_specific():
    g = GenCone(2, (vec(1, 0), vec(1, 1)))
    back = dd_generators(dd_convert(g))
    a, b = UnionCone(2, (g,)), UnionCone(2, (back,))
    assert union_contains(a, b)[0] and union_contains(b, a)[0]


def test_dd_dimension_limit():
    with pytest.raises(DimensionLimit):
        polar_generators([tuple(rat(1) for _ in range(8))], 8, dim_limit=7)


def test_dd_membership_cross_check():
    # halfspace form agrees with membership on a rational grid
    g = GenCone(2, (vec(1, 0), vec(1, 1)))
    normals = dd_convert(g).normals
    rng = random.Random(5)
    for _ in range(40):
        x = (rat(rng.randint(-6, 6), rng.randint(1, 3)),
             rat(rng.randint(-6, 6), rng.randint(1, 3)))
        in_h = all(dot(h, x) >= 0 for h in normals)
        in_g = g.member_weights(x) is not None
        assert in_h == in_g


def test_build_cone_fixture_structure(fix_a, fix_b):
    n2 = build_cone(fix_b, "N2")
    assert [p.generators for p in n2.pieces] == [
        (vec(1, 0, 0), vec(0, 0, 1)), (vec(0, 1, 0), vec(0, 0, 1))]
    n6 = build_cone(fix_b, "N6")
    assert [p.generators for p in n6.pieces] == [
        (vec(1, 0, 0), vec(0, 1, 0), vec(0, 0, 1))]
    n1a = build_cone(fix_a, "N1")
    assert [p.generators for p in n1a.pieces] == [(vec(1, 1), vec(0, 1))]


def test_e_generator_always_member(fix_b):
    e = unit_vec(3, 2)
    for name in ("N1", "N2", "N3", "N6"):
        cone = build_cone(fix_b, name)
        assert member(cone, e) is not None


def test_membership_examples(fix_b):
    n2 = build_cone(fix_b, "N2")
    n6 = build_cone(fix_b, "N6")
    assert member(n2, vec(1, 1, 0)) is None
    cert = member(n6, vec(1, 1, 0))
    assert cert is not None and cert.weights == (rat(1), rat(1), rat(0))


def test_union_convexity_verdicts(fix_a, fix_b, caps):
    v = union_convex_decide(build_cone(fix_b, "N2"), caps)
    assert not v.convex and v.witness == vec(1, 1, 0)
    assert v.hull_weights is not None
    # refutations are checkable by plain arithmetic
    for idx, h in v.refutations:
        assert dot(h, v.witness) < 0
    assert union_convex_decide(build_cone(fix_b, "N6"), caps).convex
    assert union_convex_decide(build_cone(fix_a, "N1"), caps).convex


def test_union_containment_examples(fix_b, caps):
    n2 = build_cone(fix_b, "N2")
    n6 = build_cone(fix_b, "N6")
    assert union_contains(n2, n6, caps) == (True, None)
    ok, witness = union_contains(n6, n2, caps)
    assert not ok and witness == vec(1, 1, 0)
    assert union_contains(n2, n2, caps)[0]


def test_value_query_examples(fix_b):
    cone = UnionCone(2, (GenCone(2, (vec(1, 0), vec(0, 1))),))
    value, cert = value_query(cone, (rat(-1),))
    assert value == ExtValue.finite(rat(0))
    n2 = build_cone(fix_b, "N2")
    assert value_query(n2, (rat(-1), rat(-1)))[0] == NEG_INF
    value, cert = value_query(build_cone(fix_b, "N6"), (rat(-1), rat(-1)))
    assert value == ExtValue.finite(rat(0))
    assert cert == (0, (rat(1), rat(1), rat(0)))


def test_value_query_pos_inf():
    inst = instance_from_dict({"dim": 1, "index": ["t"],
                               "uncertainty": {"t": {"points": [{"a": [0], "b": -1}]}}})
    value, cert = value_query(build_cone(inst, "N1"), (rat(0),))
    assert value.tag == 1 and cert is None  # +inf


def test_finite_collapse_identities(caps):
    pairs = [("N2", "N4"), ("N3", "N5"), ("N6", "N7"), ("N6", "N8"), ("N6", "N9")]
    for seed in range(8):
        inst = gen_random(seed, force_feasible=(seed % 2 == 0))
        for a, b in pairs:
            ca, cb = build_cone(inst, a, caps), build_cone(inst, b, caps)
            assert union_contains(ca, cb, caps)[0], (seed, a, b)
            assert union_contains(cb, ca, caps)[0], (seed, b, a)


def test_monotone_chain(caps):
    for seed in (3, 9, 21):
        inst = gen_random(seed, force_feasible=True)
        n1 = build_cone(inst, "N1", caps)
        n2 = build_cone(inst, "N2", caps)
        n3 = build_cone(inst, "N3", caps)
        n6 = build_cone(inst, "N6", caps)
        assert union_contains(n1, n2, caps)[0]
        assert union_contains(n1, n3, caps)[0]
        assert union_contains(n2, n6, caps)[0]
        assert union_contains(n3, n6, caps)[0]


def test_value_query_antitone_under_containment(caps):
    rng = random.Random(2)
    for seed in (4, 12):
        inst = gen_random(seed, force_feasible=True)
        chain = [build_cone(inst, name, caps) for name in ("N1", "N2", "N6")]
        for _ in range(4):
            c = tuple(rat(rng.randint(-4, 4), rng.randint(1, 2))
                      for _ in range(inst.dim))
            values = [value_query(cone, c)[0] for cone in chain]
            assert values[0] <= values[1] <= values[2]


def test_single_piece_always_convex(caps):
    rng = random.Random(8)
    for _ in range(10):
        d = rng.randint(1, 4)
        gens = tuple(tuple(rat(rng.randint(-3, 3)) for _ in range(d))
                     for _ in range(rng.randint(1, 5)))
        v = union_convex_decide(UnionCone(d, (GenCone(d, gens),)), caps)
        assert v.convex


def test_membership_certificates_reproduce_point(caps):
    for seed in (1, 6):
        inst = gen_random(seed, force_feasible=True)
        cone = build_cone(inst, "N6", caps)
        gens = cone.pieces[0].generators
        rng = random.Random(seed)
        mu = [rat(rng.randint(0, 3)) for _ in gens]
        x = tuple(sum((m * g[i] for m, g in zip(mu, gens)), rat(0))
                  for i in range(cone.dim))
        cert = member(cone, x)
        assert cert is not None
        piece = cone.pieces[cert.piece]
        rebuilt = tuple(sum((w * g[i] for w, g in zip(cert.weights, piece.generators)),
                            rat(0)) for i in range(cone.dim))
        assert rebuilt == x


def test_e_variants_require_singleton(fix_c):
    with pytest.raises(NotSingleton):
        build_cone(fix_c, "E1")


def test_cone_dump_schema(fix_b):
    dump = json.loads(build_cone(fix_b, "N2").dumps())
    assert dump["schema"].startswith("robustlip.cone/")
    assert dump["dim"] == 3 and dump["variant"] == "N2"
    assert dump["pieces"] == [[[1, 0, 0], [0, 0, 1]], [[0, 1, 0], [0, 0, 1]]]


def test_dd_round_trip_random_small():
    rng = random.Random(31)
    for _ in range(12):
        d = rng.randint(2, 4)
        gens = tuple(tuple(rat(rng.randint(-3, 3)) for _ in range(d))
                     for _ in range(rng.randint(1, 6)))
        g = GenCone(d, gens)
        back = dd_generators(dd_convert(g))
        a, b = UnionCone(d, (g,)), UnionCone(d, (back,))
        assert union_contains(a, b)[0] and union_contains(b, a)[0]
