"""Sub-affine constraint support: sigma_A(x) <= b with polytopic A.

A sub-affine instance lists, per index, uncertainty elements (A, b) where A
is a vertex list; the constraint is the support-function inequality, i.e. the
vertex inequalities jointly.  Expansion to a linear instance preserves the
feasible set exactly; the cones R1/R2 and the duals RSAD1/RSAD2 keep the
per-(A,b) structure that the expansion would erase.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .cones import Caps, DEFAULT_CAPS, GenCone, UnionCone, member, union_convex_decide, value_query
from .duals import (DualCertificate, DualOutcome, VerificationFailure, dual_value,
                    primal_value)
from .lp import LE, Infeasible, Optimal, Unbounded, lp_solve, make_lp
from .model import (ExtValue, Instance, NEG_INF, POS_INF, ParseError, UPoint, USet,
                    ValidationError)
from .rationals import ZERO, parse_rat, rat, rat_to_json, unit_vec
from .verify import FarkasReport, VariantMismatch


@dataclass(frozen=True)
class SAPoint:
    """One sub-affine uncertainty element: vertices A and the bound b."""

    A: tuple  # tuple of vectors in Q^n
    b: object

    def __post_init__(self):
        if not self.A:
            raise ValidationError("sub-affine element needs at least one vertex")

    def embed_all(self):
        return [tuple(a) + (self.b,) for a in self.A]


@dataclass(frozen=True)
class SAInstance:
    dim: int
    index: tuple
    sets: Mapping[str, tuple]

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"dim must be >= 1, got {self.dim}")
        if not self.index:
            raise ValidationError("index set must be nonempty")
        for t in self.index:
            if t not in self.sets or not self.sets[t]:
                raise ValidationError(f"index {t!r} has no sub-affine elements")
            for sp in self.sets[t]:
                for a in sp.A:
                    if len(a) != self.dim:
                        raise ValidationError(
                            f"uncertainty.{t}: vertex of length {len(a)} under dim {self.dim}")


def sa_from_dict(data: dict) -> SAInstance:
    for key in ("dim", "index", "uncertainty"):
        if key not in data:
            raise ParseError(f"missing field {key!r}")
    sets = {}
    for ident, items in data["uncertainty"].items():
        if not isinstance(items, list) or not items:
            raise ValidationError(f"uncertainty.{ident}: empty element list")
        parsed = []
        for i, raw in enumerate(items):
            where = f"uncertainty.{ident}[{i}]"
            if "A" not in raw or "b" not in raw:
                raise ParseError(f"{where}: needs fields 'A' and 'b'")
            A = tuple(tuple(parse_rat(v) for v in row) for row in raw["A"])
            parsed.append(SAPoint(A, parse_rat(raw["b"])))
        sets[ident] = tuple(parsed)
    return SAInstance(data["dim"], tuple(data["index"]), sets)


def sa_to_dict(sa: SAInstance) -> dict:
    return {
        "dim": sa.dim,
        "index": list(sa.index),
        "uncertainty": {
            t: [{"A": [[rat_to_json(v) for v in a] for a in sp.A],
                 "b": rat_to_json(sp.b)} for sp in sa.sets[t]]
            for t in sa.index
        },
    }


def load_sa_instance(path) -> SAInstance:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return sa_from_dict(data)


def save_sa_instance(sa: SAInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sa_to_dict(sa), fh, sort_keys=True, indent=1)
        fh.write("\n")


def gen_random_sa(seed: int, max_dim: int = 3, max_T: int = 3,
                  max_elements: int = 2, max_vertices: int = 3,
                  coeff_range: int = 4, force_feasible: bool = False) -> SAInstance:
    """Deterministic random sub-affine instance at desk scale."""
    import random as _random

    rng = _random.Random(seed)
    dim = rng.randint(1, max_dim)
    n_t = rng.randint(1, max_T)

    def rand_rat():
        return rat(rng.randint(-coeff_range, coeff_range), rng.randint(1, 3))

    anchor = tuple(rat(rng.randint(-2, 2), rng.randint(1, 2)) for _ in range(dim))
    sets = {}
    for i in range(n_t):
        elements = []
        for _ in range(rng.randint(1, max_elements)):
            verts = tuple(tuple(rand_rat() for _ in range(dim))
                          for _ in range(rng.randint(1, max_vertices)))
            if force_feasible:
                support = max(sum((x * y for x, y in zip(a, anchor)), ZERO)
                              for a in verts)
                b = support + rat(rng.randint(1, 4), rng.randint(1, 2))
            else:
                b = rand_rat()
            elements.append(SAPoint(verts, b))
        sets[f"t{i + 1}"] = tuple(elements)
    return SAInstance(dim, tuple(f"t{i + 1}" for i in range(n_t)), sets)


# ---------------------------------------------------------------------------
# Reduction to a linear instance
# ---------------------------------------------------------------------------

def expand_subaffine(sa: SAInstance) -> Instance:
    """Each (A, b) with k vertices becomes the k constraints (a_j, b); the
    support of a polytope is its vertex maximum, so the feasible sets agree."""
    sets = {}
    for t in sa.index:
        pts = []
        for sp in sa.sets[t]:
            pts.extend(UPoint(a, sp.b) for a in sp.A)
        sets[t] = USet(tuple(pts), convex_hull=False)
    return Instance(sa.dim, sa.index, sets)


def sa_primal_value(sa: SAInstance, c: Sequence):
    """min <c,x> under the sub-affine semantics: per-element vertex maxima."""
    rows = []
    for t in sa.index:
        for sp in sa.sets[t]:
            rows.extend((a, LE, sp.b) for a in sp.A)
    out = lp_solve(make_lp(tuple(c), rows))
    if isinstance(out, Infeasible):
        return POS_INF, None
    if isinstance(out, Unbounded):
        return NEG_INF, None
    return ExtValue.finite(out.value), out.point


# ---------------------------------------------------------------------------
# Cones R1 / R2 and the duals RSAD1 / RSAD2
# ---------------------------------------------------------------------------

def build_R(sa: SAInstance, which: str, caps: Caps = DEFAULT_CAPS) -> UnionCone:
    """R1: one piece per distinct (A, b); R2: one piece per index."""
    if which not in ("R1", "R2"):
        raise ValueError(f"unknown sub-affine cone {which!r}")
    d = sa.dim + 1
    e = unit_vec(d, sa.dim)

    def make_piece(vecs, srcs):
        gens, out_srcs, seen = [], [], set()
        for v, s in list(zip(vecs, srcs)) + [(e, None)]:
            if v not in seen:
                seen.add(v)
                gens.append(v)
                out_srcs.append(s)
        return GenCone(d, tuple(gens)), tuple(out_srcs)

    built = []
    if which == "R1":
        seen = set()
        for t in sa.index:
            for sp in sa.sets[t]:
                vecs = sp.embed_all()
                key = frozenset(vecs)
                if key in seen:
                    continue
                seen.add(key)
                built.append(make_piece(vecs, [t] * len(vecs)))
    else:
        for t in sa.index:
            vecs = []
            for sp in sa.sets[t]:
                vecs.extend(sp.embed_all())
            built.append(make_piece(vecs, [t] * len(vecs)))
    return UnionCone(d, tuple(p for p, _ in built), which, tuple(s for _, s in built))


def _direct_r1(sa: SAInstance, c):
    """Per-(A,b) enumeration: sup -lam*b over lam >= 0, v in conv(A), c = -lam*v."""
    from .lp import EQ

    best, best_cert = NEG_INF, None
    n = sa.dim
    target = [-v for v in c]
    seen = set()
    for t in sa.index:
        for sp in sa.sets[t]:
            key = frozenset(sp.embed_all())
            if key in seen:
                continue
            seen.add(key)
            rows = [(tuple(a[i] for a in sp.A), EQ, target[i]) for i in range(n)]
            out = lp_solve(make_lp([sp.b for _ in sp.A], rows,
                                   lower=tuple(ZERO for _ in sp.A),
                                   upper=tuple(None for _ in sp.A)))
            if isinstance(out, Infeasible):
                continue
            if isinstance(out, Unbounded):
                return POS_INF, None
            val = ExtValue.finite(-out.value)
            if val > best:
                lam = sum(out.point, ZERO)
                mults = tuple(((tuple(a) + (sp.b,), t), w)
                              for a, w in zip(sp.A, out.point))
                point = None
                if lam != 0:
                    point = tuple(
                        sum((w * (tuple(a) + (sp.b,))[i] for a, w in zip(sp.A, out.point)),
                            ZERO) / lam for i in range(n + 1))
                best, best_cert = val, DualCertificate("rsad1", mults, index=t,
                                                       lam=lam, point=point)
    return best, best_cert


def rsad_value(sa: SAInstance, c: Sequence, k: int,
               caps: Caps = DEFAULT_CAPS) -> DualOutcome:
    """RSAD^k value by the cone route, cross-checked against the expansion."""
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")
    c = tuple(c)
    cone = build_R(sa, f"R{k}", caps)
    value, cert = value_query(cone, c)
    checks = []
    if k == 1:
        direct, direct_cert = _direct_r1(sa, c)
        if direct != value:
            raise VerificationFailure(f"RSAD1 routes disagree: {value} vs {direct}")
        checks.append(("per_element_enumeration", True))
        attained = _rsad_cert(sa, cone, k, cert)
    else:
        expanded = dual_value(expand_subaffine(sa), c, 2, "direct", caps)
        if expanded.value != value:
            raise VerificationFailure(f"RSAD2 vs expanded k=2: {value} vs {expanded.value}")
        checks.append(("expansion_k2", True))
        attained = _rsad_cert(sa, cone, k, cert)
    return DualOutcome(k, f"rsad{k}", value, attained, tuple(checks))


def _rsad_cert(sa, cone, k, cert):
    if cert is None:
        return None
    idx, weights = cert
    piece = cone.pieces[idx]
    srcs = cone.sources[idx]
    mults = tuple(((g, s), w) for g, w, s in zip(piece.generators, weights, srcs)
                  if s is not None)
    lam = sum((w for _, w in mults), ZERO)
    point = None
    if k == 1 and lam != 0:
        point = tuple(sum((w * g[i] for (g, _), w in mults), ZERO) / lam
                      for i in range(cone.dim))
    return DualCertificate(f"rsad{k}", mults, lam=lam, point=point)


# ---------------------------------------------------------------------------
# Sub-affine Farkas checks
# ---------------------------------------------------------------------------

SA_FARKAS_VARIANTS = ("C2.2", "RSAP-I", "RSAP-II")


def subaffine_farkas(sa: SAInstance, c, s, variant: str,
                     caps: Caps = DEFAULT_CAPS) -> FarkasReport:
    if variant not in SA_FARKAS_VARIANTS:
        raise ValueError(f"unknown sub-affine Farkas variant {variant!r}")
    c = tuple(c)
    s = rat(s) if isinstance(s, (int, str)) else s
    level = ExtValue.finite(s)
    primal, popt = sa_primal_value(sa, c)
    alpha = primal >= level
    feasible = primal != POS_INF
    notes = []
    if variant == "C2.2":
        if any(len(sa.sets[t]) != 1 for t in sa.index):
            raise VariantMismatch("C2.2 takes exactly one (A, b) per index")
        d = sa.dim + 1
        e = unit_vec(d, sa.dim)
        gens = [e]
        for t in sa.index:
            gens.extend(sa.sets[t][0].embed_all())
        hull = UnionCone(d, (GenCone(d, tuple(dict.fromkeys(gens))),), "C2.2")
        target = tuple(-v for v in c) + (-s,)
        cert = member(hull, target)
        beta = cert is not None
        expected = feasible
    else:
        k = 1 if variant == "RSAP-I" else 2
        out = rsad_value(sa, c, k, caps)
        beta = out.value >= level
        cert = out.attained if beta else None
        expected = feasible and union_convex_decide(build_R(sa, f"R{k}", caps), caps).convex
    if not feasible:
        notes.append("infeasible system: equivalence not asserted")
    consistent = ((not expected) or (alpha == beta)) and ((not beta) or alpha)
    return FarkasReport(variant, c, s, alpha, beta, (primal, popt), cert,
                        expected, consistent, tuple(notes))
