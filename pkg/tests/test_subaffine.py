import random

import pytest

from robustlip.cones import build_cone, union_contains, union_convex_decide
from robustlip.duals import primal_value, verify_dual_certificate
from robustlip.model import ExtValue, NEG_INF, POS_INF, ValidationError
from robustlip.rationals import rat, unit_vec
from robustlip.subaffine import (SAInstance, SAPoint, build_R, expand_subaffine,
                                 gen_random_sa, load_sa_instance, rsad_value,
                                 sa_from_dict, sa_primal_value, save_sa_instance,
                                 subaffine_farkas)
from robustlip.verify import VariantMismatch
from robustlip.cones import member


def fin(x):
    return ExtValue.finite(rat(x))


def test_expand_interval_support(fix_sa):
    inst = expand_subaffine(fix_sa)
    assert [(p.a, p.b) for p in inst.sets["t"].points] == [
        ((rat(1),), rat(2)), ((rat(2),), rat(2))]
    # |A| = {-1, 1} vertices encode |x| <= 1
    sa = sa_from_dict({"dim": 1, "index": ["t"],
                       "uncertainty": {"t": [{"A": [[1], [-1]], "b": 1}]}})
    inst = expand_subaffine(sa)
    assert primal_value(inst, (rat(1),))[0] == fin(-1)
    assert primal_value(inst, (rat(-1),))[0] == fin(-1)


def test_singleton_expansion_is_identity():
    sa = sa_from_dict({"dim": 2, "index": ["t"],
                       "uncertainty": {"t": [{"A": [[1, 2]], "b": 3}]}})
    inst = expand_subaffine(sa)
    assert len(inst.sets["t"].points) == 1


def test_fix_sa_primal(fix_sa):
    assert sa_primal_value(fix_sa, (rat(-1),))[0] == fin(-1)
    assert primal_value(expand_subaffine(fix_sa), (rat(-1),))[0] == fin(-1)


def test_build_r_structure(fix_sa):
    r1 = build_R(fix_sa, "R1")
    assert [p.generators for p in r1.pieces] == [
        ((rat(1), rat(2)), (rat(2), rat(2)), (rat(0), rat(1)))]
    sa2 = sa_from_dict({"dim": 1, "index": ["t"],
                        "uncertainty": {"t": [{"A": [[1]], "b": 1},
                                              {"A": [[2]], "b": 1}]}})
    assert len(build_R(sa2, "R1").pieces) == 2
    assert len(build_R(sa2, "R2").pieces) == 1
    e = unit_vec(2, 1)
    for which in ("R1", "R2"):
        assert member(build_R(sa2, which), e) is not None


def test_rsad_values(fix_sa):
    out1 = rsad_value(fix_sa, (rat(-1),), 1)
    assert out1.value == fin(-1)
    assert out1.attained.lam == rat(1, 2)
    assert out1.attained.point == (rat(2), rat(2))
    out2 = rsad_value(fix_sa, (rat(-1),), 2)
    assert out2.value == fin(-1)
    assert dict(out2.checks)["expansion_k2"]
    for out in (out1, out2):
        z = rsad_value(fix_sa, (rat(0),), out.k)
        assert z.value == fin(0) and z.attained.lam == rat(0)


def test_rsad_distinguishes_r1_r2():
    # two elements in one index: RSAD1 picks one (A,b), RSAD2 may mix them
    sa = sa_from_dict({"dim": 2, "index": ["t"],
                       "uncertainty": {"t": [{"A": [[1, 0]], "b": 0},
                                             {"A": [[0, 1]], "b": 0}]}})
    c = (rat(-1), rat(-1))
    v1 = rsad_value(sa, c, 1).value
    v2 = rsad_value(sa, c, 2).value
    assert v1 == NEG_INF and v2 == fin(0)
    assert v1 < v2 == sa_primal_value(sa, c)[0]


def test_subaffine_farkas_examples(fix_sa):
    rep = subaffine_farkas(fix_sa, (rat(-1),), rat(-1), "C2.2")
    assert rep.alpha and rep.beta and rep.consistent
    rep = subaffine_farkas(fix_sa, (rat(-1),), rat(-3), "RSAP-I")
    assert rep.alpha and rep.beta and rep.consistent
    rep = subaffine_farkas(fix_sa, (rat(0),), rat(1), "RSAP-II")
    assert not rep.alpha and not rep.beta and rep.consistent


def test_subaffine_farkas_c22_needs_single_elements():
    sa = sa_from_dict({"dim": 1, "index": ["t"],
                       "uncertainty": {"t": [{"A": [[1]], "b": 1},
                                             {"A": [[2]], "b": 1}]}})
    with pytest.raises(VariantMismatch):
        subaffine_farkas(sa, (rat(1),), rat(0), "C2.2")


def test_sa_file_round_trip(tmp_path, fix_sa):
    path = tmp_path / "sa.json"
    save_sa_instance(fix_sa, path)
    assert load_sa_instance(path) == fix_sa


def test_sa_validation():
    with pytest.raises(ValidationError):
        SAPoint((), rat(1))
    with pytest.raises(ValidationError):
        sa_from_dict({"dim": 1, "index": ["t"], "uncertainty": {"t": []}})


def test_reduction_equivalence_small_fuzz(caps):
    rng = random.Random(6)
    for seed in range(10):
        sa = gen_random_sa(seed, force_feasible=(seed % 2 == 0))
        inst = expand_subaffine(sa)
        for _ in range(3):
            c = tuple(rat(rng.randint(-3, 3)) for _ in range(sa.dim))
            assert sa_primal_value(sa, c)[0] == primal_value(inst, c)[0]
        r2 = build_R(sa, "R2", caps)
        n2 = build_cone(inst, "N2", caps)
        assert union_contains(r2, n2, caps)[0] and union_contains(n2, r2, caps)[0]


def test_value_chain_r1_r2_primal(caps):
    rng = random.Random(13)
    for seed in range(8):
        sa = gen_random_sa(seed, force_feasible=True)
        r1 = build_R(sa, "R1", caps)
        n1_hull = build_cone(expand_subaffine(sa), "N6", caps)
        assert union_contains(r1, n1_hull, caps)[0]
        for _ in range(2):
            c = tuple(rat(rng.randint(-3, 3)) for _ in range(sa.dim))
            v1 = rsad_value(sa, c, 1, caps).value
            v2 = rsad_value(sa, c, 2, caps).value
            primal = sa_primal_value(sa, c)[0]
            assert v1 <= v2 <= primal
