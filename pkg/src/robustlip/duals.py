"""Primal solving, the nine robust dual problems, and the ordering diagram.

Every dual value can be computed two ways:

* cone route: the value query sup{r : (-c,-r) in N_k} on the matching moment
  cone, with the attaining LP weights turned into a dual certificate;
* direct route: for k in {1,2,3,6} an independent enumeration/LP per the
  dual's own statement; for k in {4,5,7,8,9} a Lagrangian certificate check
  (the inner LP at the extracted multiplier reproduces the value exactly and
  sampled multipliers never beat it).

Values are exact rationals extended with +-inf; sup over an empty dual
feasible set is -inf, inf over an empty primal feasible set is +inf.

Certificate multipliers are ((vec, source), weight) triples: vec is an
embedded data point in Q^(n+1), source the index id it belongs to.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .cones import Caps, DEFAULT_CAPS, UnionCone, build_cone, value_query
from .lp import EQ, LE, Infeasible, Optimal, Unbounded, lp_solve, make_lp
from .model import (CapExceeded, ExtValue, Instance, NEG_INF, POS_INF, UPoint,
                    expand_constraints)
from .rationals import ONE, ZERO, dot, rat, rat_to_json

K_RANGE = (1, 2, 3, 4, 5, 6, 7, 8, 9)
CONE_FOR_K = {1: "N1", 2: "N2", 3: "N3", 4: "N4", 5: "N5",
              6: "N6", 7: "N7", 8: "N8", 9: "N9"}
# finite-collapse value sharing: which of the four distinct cones carries k
BASE_CONE_FOR_K = {1: "N1", 2: "N2", 3: "N3", 4: "N2", 5: "N3",
                   6: "N6", 7: "N6", 8: "N6", 9: "N6"}


class RouteUnavailable(ValueError):
    """Raised when the requested route is undefined for the input."""


class VerificationFailure(RuntimeError):
    """A certificate cross-check failed; indicates an implementation bug."""


@dataclass(frozen=True)
class DualCertificate:
    kind: str
    multipliers: tuple = ()  # ((vec, source), weight)
    index: Optional[str] = None
    lam: object = None
    point: Optional[tuple] = None

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.index is not None:
            out["index"] = self.index
        if self.lam is not None:
            out["lambda"] = rat_to_json(self.lam)
        if self.point is not None:
            out["point"] = [rat_to_json(v) for v in self.point]
        if self.multipliers:
            out["multipliers"] = [
                {"gen": [rat_to_json(v) for v in g], "source": src,
                 "weight": rat_to_json(w)}
                for (g, src), w in self.multipliers
            ]
        return out


@dataclass(frozen=True)
class DualOutcome:
    k: int
    route: str
    value: ExtValue
    attained: Optional[DualCertificate] = None
    checks: tuple = ()  # (name, bool) pairs recorded by the direct routes

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "route": self.route,
            "value": self.value.to_json(),
            "attained": self.attained.to_json() if self.attained else None,
            "checks": dict(self.checks),
        }


@dataclass(frozen=True)
class DiagramReport:
    primal: ExtValue
    duals: dict
    edges: tuple  # (lhs label, rhs label, lhs value, rhs value, holds)

    @property
    def all_pass(self) -> bool:
        return all(e[4] for e in self.edges)

    def to_json(self) -> dict:
        return {
            "schema": "robustlip.diagram/1",
            "primal": self.primal.to_json(),
            "duals": {str(k): v.to_json() for k, v in self.duals.items()},
            "edges": [
                {"from": a, "to": b, "lhs": x.to_json(), "rhs": y.to_json(), "holds": ok}
                for a, b, x, y, ok in self.edges
            ],
            "all_pass": self.all_pass,
        }


DIAGRAM_EDGES = (
    ("1", "2"), ("1", "3"), ("1", "4"), ("1", "5"),
    ("2", "6"), ("3", "6"), ("4", "7"), ("5", "7"),
    ("6", "8"), ("6", "9"),
    ("8", "primal"), ("9", "primal"), ("7", "primal"), ("6", "primal"),
    ("1", "primal"), ("2", "primal"), ("3", "primal"),
    ("4", "primal"), ("5", "primal"),
)


# ---------------------------------------------------------------------------
# Primal
# ---------------------------------------------------------------------------

def primal_value(inst: Instance, c: Sequence):
    """min <c, x> over the expanded constraint system; (+inf, None) when
    infeasible, (-inf, None) when unbounded."""
    if len(c) != inst.dim:
        raise ValueError("objective length mismatch")
    rows = [(p.a, LE, p.b) for p in expand_constraints(inst)]
    out = lp_solve(make_lp(tuple(c), rows))
    if isinstance(out, Infeasible):
        return POS_INF, None
    if isinstance(out, Unbounded):
        return NEG_INF, None
    return ExtValue.finite(out.value), out.point


def instance_feasible(inst: Instance) -> bool:
    value, _ = primal_value(inst, tuple(ZERO for _ in range(inst.dim)))
    return value != POS_INF


# ---------------------------------------------------------------------------
# Cone route
# ---------------------------------------------------------------------------

def _mix_point(entries, dim):
    """Normalized nonnegative combination (sum w g / sum w, sum w)."""
    lam = sum((w for _, w in entries), ZERO)
    if lam == 0:
        return None, ZERO
    vec = tuple(sum((w * g[i] for g, w in entries), ZERO) / lam for i in range(dim))
    return vec, lam


def _certificate_from_weights(inst: Instance, cone: UnionCone, k: int, cert):
    if cert is None:
        return None
    idx, weights = cert
    piece = cone.pieces[idx]
    srcs = cone.sources[idx] if cone.sources else tuple(None for _ in piece.generators)
    mults = tuple(((g, src), w)
                  for g, w, src in zip(piece.generators, weights, srcs)
                  if src is not None)
    lam = sum((w for _, w in mults), ZERO)
    if k == 1:
        vec, _ = _mix_point([(g, w) for (g, _), w in mults], cone.dim)
        if vec is None:
            vec = piece.generators[0]
        return DualCertificate("rlid1", mults, lam=lam, point=vec)
    if k in (2, 4):
        t = next((src for (_, src), w in mults if w != 0), None)
        if t is None:
            t = next((src for (_, src), _ in mults), inst.index[0])
        return DualCertificate(f"rlid{k}", mults, index=t, lam=lam)
    if k in (3, 5):
        per_t = {}
        for (g, src), w in mults:
            per_t.setdefault(src, []).append((g, w))
        sel = []
        for t in inst.index:
            entries = per_t.get(t, [])
            vec, wt = _mix_point(entries, cone.dim)
            if vec is not None:
                sel.append(((vec, t), wt))
        return DualCertificate(f"rlid{k}", tuple(sel), lam=lam)
    return DualCertificate(f"rlid{k}", mults, lam=lam)


def dual_cone_value(inst: Instance, c: Sequence, k: int, caps: Caps = DEFAULT_CAPS,
                    cone: UnionCone | None = None) -> DualOutcome:
    if cone is None:
        cone = build_cone(inst, CONE_FOR_K[k], caps)
    value, cert = value_query(cone, tuple(c))
    attained = _certificate_from_weights(inst, cone, k, cert)
    return DualOutcome(k, "cone", value, attained)


# ---------------------------------------------------------------------------
# Direct routes for k in {1, 2, 3, 6}
# ---------------------------------------------------------------------------

def _max_lp_over_points(tagged, c):
    """sup -sum mu b  s.t.  sum mu a = -c, mu >= 0 over tagged (point, src)."""
    if not tagged:
        return NEG_INF, None
    n = len(c)
    target = [-v for v in c]
    rows = [(tuple(p.a[i] for p, _ in tagged), EQ, target[i]) for i in range(n)]
    out = lp_solve(make_lp([p.b for p, _ in tagged], rows,
                           lower=tuple(ZERO for _ in tagged),
                           upper=tuple(None for _ in tagged)))
    if isinstance(out, Infeasible):
        return NEG_INF, None
    if isinstance(out, Unbounded):
        return POS_INF, None
    mults = tuple(((p.embed(), src), w) for (p, src), w in zip(tagged, out.point))
    return ExtValue.finite(-out.value), mults


def _direct_k1(inst: Instance, c):
    best, best_cert = NEG_INF, None
    for t in inst.index:
        uset = inst.sets[t]
        if uset.convex_hull:
            val, mults = _max_lp_over_points([(p, t) for p in uset.points], c)
            if val == POS_INF:
                return POS_INF, None
            if val.is_finite and val > best:
                vec, lam = _mix_point([(g, w) for (g, _), w in mults], inst.dim + 1)
                if vec is None:
                    vec = uset.points[0].embed()
                best, best_cert = val, DualCertificate("rlid1", mults, lam=lam, point=vec)
            continue
        for p in uset.points:
            if all(x == 0 for x in p.a):
                if any(x != 0 for x in c):
                    continue
                if p.b < 0:
                    return POS_INF, None
                cand, lam = ExtValue.finite(ZERO), ZERO
            else:
                lam = None
                for j, aj in enumerate(p.a):
                    if aj != 0:
                        lam = -c[j] / aj
                        break
                if lam is None or lam < 0:
                    continue
                if any(c[j] != -lam * p.a[j] for j in range(inst.dim)):
                    continue
                cand = ExtValue.finite(-lam * p.b)
            if cand > best:
                best = cand
                best_cert = DualCertificate("rlid1", (((p.embed(), t), lam),),
                                            lam=lam, point=p.embed())
    return best, best_cert


def _direct_k2(inst: Instance, c):
    best, best_cert = NEG_INF, None
    for t in inst.index:
        tagged = [(p, t) for p in inst.sets[t].points]
        val, mults = _max_lp_over_points(tagged, c)
        if val == POS_INF:
            return POS_INF, None
        if val.is_finite and val > best:
            lam = sum((w for _, w in mults), ZERO)
            best = val
            best_cert = DualCertificate("rlid2", mults, index=t, lam=lam)
    return best, best_cert


def _selection_families(inst: Instance, caps: Caps):
    """Tagged point families, one per selection over the unflagged sets."""
    flagged = []
    unflagged = []
    for t in inst.index:
        pts = [(p, t) for p in inst.sets[t].points]
        if inst.sets[t].convex_hull:
            flagged.extend(pts)
        else:
            unflagged.append(pts)
    count = 1
    for opts in unflagged:
        count *= len(opts)
    if count > caps.selections:
        raise CapExceeded(count, caps.selections)
    for combo in itertools.product(*unflagged):
        yield flagged + list(combo)


def _direct_k3(inst: Instance, c, caps: Caps):
    best, best_cert = NEG_INF, None
    for tagged in _selection_families(inst, caps):
        val, mults = _max_lp_over_points(tagged, c)
        if val == POS_INF:
            return POS_INF, None
        if val.is_finite and val > best:
            best = val
            best_cert = DualCertificate("rlid3", mults,
                                        lam=sum((w for _, w in mults), ZERO))
    return best, best_cert


def _direct_k6(inst: Instance, c):
    first_t = {}
    for t in inst.index:
        for p in inst.sets[t].points:
            first_t.setdefault(p.embed(), t)
    tagged = [(p, first_t[p.embed()]) for p in expand_constraints(inst)]
    val, mults = _max_lp_over_points(tagged, c)
    cert = None
    if val.is_finite:
        cert = DualCertificate("rlid6", mults, lam=sum((w for _, w in mults), ZERO))
    return val, cert


# ---------------------------------------------------------------------------
# Lagrangian inner problems and the lambda* certificate route (k=4,5,7,8,9)
# ---------------------------------------------------------------------------

def inner_value(c, groups) -> ExtValue:
    """inf_x [ <c,x> + sum_g lam_g * max_{(a,b) in g}(<a,x> - b) ].

    groups: (lam, points) pairs with lam >= 0 and nonempty UPoint lists;
    zero-lambda groups contribute nothing.  Exact LP evaluation.
    """
    n = len(c)
    active = [(lam, pts) for lam, pts in groups if lam != 0]
    if not active:
        return ExtValue.finite(ZERO) if all(v == 0 for v in c) else NEG_INF
    nz = len(active)
    obj = list(c) + [lam for lam, _ in active]
    rows = []
    for gi, (_, pts) in enumerate(active):
        for p in pts:
            coeffs = list(p.a) + [ZERO] * nz
            coeffs[n + gi] = -ONE
            rows.append((tuple(coeffs), LE, p.b))
    out = lp_solve(make_lp(obj, rows))
    if isinstance(out, Unbounded):
        return NEG_INF
    if isinstance(out, Infeasible):
        raise VerificationFailure("inner LP cannot be infeasible")
    return ExtValue.finite(out.value)


def _scalar_grid(lam_star, seed_key):
    grid = [ZERO, lam_star / 2, lam_star, lam_star * 2, lam_star + ONE]
    rng = random.Random(f"grid:{seed_key}")
    grid.extend(rat(rng.randint(0, 24), rng.randint(1, 6)) for _ in range(8))
    return grid


def _groups_for_k(inst: Instance, k: int, cert: Optional[DualCertificate]):
    """(lam, points) groups realizing the inner Lagrangian at lambda*."""
    if k == 4:
        t = cert.index if cert and cert.index is not None else inst.index[0]
        lam = cert.lam if cert else ZERO
        return [(lam, list(inst.sets[t].points))]
    if k == 7:
        lam = cert.lam if cert else ZERO
        return [(lam, expand_constraints(inst))]
    if k == 5:
        sel = {}
        if cert:
            for (g, t), _ in cert.multipliers:
                sel[t] = UPoint(g[:-1], g[-1])
        pts = [sel.get(t, inst.sets[t].points[0]) for t in inst.index]
        lam = cert.lam if cert else ZERO
        return [(lam, pts)]
    if k == 8:
        per_t = {t: ZERO for t in inst.index}
        if cert:
            for (g, t), w in cert.multipliers:
                per_t[t] += w
        return [(per_t[t], list(inst.sets[t].points)) for t in inst.index]
    if k == 9:
        groups = []
        if cert:
            for (g, t), w in cert.multipliers:
                pts = [UPoint(g[:-1], g[-1]) if s == t else inst.sets[s].points[0]
                       for s in inst.index]
                groups.append((w, pts))
        return groups
    raise RouteUnavailable(f"no Lagrangian route for k={k}")


def dual_lagrangian_value(inst: Instance, c: Sequence, k: int,
                          caps: Caps = DEFAULT_CAPS,
                          cone: UnionCone | None = None) -> DualOutcome:
    """Cone value plus the lambda* certificate checks for k in {4,5,7,8,9}."""
    if k not in (4, 5, 7, 8, 9):
        raise RouteUnavailable(f"Lagrangian route is for k in 4,5,7,8,9, not {k}")
    c = tuple(c)
    if cone is None:
        cone = build_cone(inst, CONE_FOR_K[k], caps)
    base = dual_cone_value(inst, c, k, caps, cone=cone)
    checks = []
    value = base.value
    if value.is_finite:
        groups = _groups_for_k(inst, k, base.attained)
        inner = inner_value(c, groups)
        if inner != value:
            raise VerificationFailure(
                f"k={k}: inner LP at lambda* gives {inner}, cone route {value}")
        checks.append(("inner_at_lambda_star", True))
        lam_star = base.attained.lam if base.attained else ZERO
        for f in _scalar_grid(lam_star, f"{k}:{lam_star}"):
            if lam_star == 0:
                scaled = [(f, pts) for _, pts in groups] if groups else []
            else:
                scaled = [(lam * f / lam_star, pts) for lam, pts in groups]
            if inner_value(c, scaled) > value:
                raise VerificationFailure(f"k={k}: grid multiplier beats the value")
        checks.append(("grid_never_exceeds", True))
    elif value == POS_INF:
        for level in (rat(1), rat(10), rat(100)):
            if not _certify_level(inst, cone, c, k, level):
                raise VerificationFailure(f"k={k}: +inf claimed, level {level} fails")
        checks.append(("unbounded_ladder", True))
    else:
        for f in _scalar_grid(ONE, f"{k}:neginf")[1:]:
            for groups in _neg_inf_samples(inst, k, f):
                if inner_value(c, groups) != NEG_INF:
                    raise VerificationFailure(
                        f"k={k}: -inf claimed but a sampled inner LP is finite")
        checks.append(("neg_inf_grid", True))
    return DualOutcome(k, "direct", value, base.attained, tuple(checks))


def _neg_inf_samples(inst: Instance, k: int, f):
    if k == 4:
        return [[(f, list(inst.sets[t].points))] for t in inst.index]
    if k == 5:
        return [[(f, [inst.sets[t].points[0] for t in inst.index])]]
    if k == 7:
        return [[(f, expand_constraints(inst))]]
    if k == 8:
        return [[(f, list(inst.sets[t].points)) for t in inst.index]]
    return [[(f, [inst.sets[t].points[0] for t in inst.index])]]


def _certify_level(inst, cone, c, k, level) -> bool:
    """Exhibit multipliers whose inner value reaches `level` (for +inf claims)."""
    target = tuple(-v for v in c) + (-level,)
    for idx, piece in enumerate(cone.pieces):
        w = piece.member_weights(target)
        if w is None:
            continue
        cert = _certificate_from_weights(inst, cone, k, (idx, w))
        groups = _groups_for_k(inst, k, cert)
        if inner_value(tuple(c), groups) >= ExtValue.finite(level):
            return True
    return False


# ---------------------------------------------------------------------------
# Public dual entry point
# ---------------------------------------------------------------------------

def dual_value(inst: Instance, c: Sequence, k: int, route: str = "cone",
               caps: Caps = DEFAULT_CAPS) -> DualOutcome:
    if k not in K_RANGE:
        raise ValueError(f"k must be 1..9, got {k}")
    if len(c) != inst.dim:
        raise ValueError("objective length mismatch")
    c = tuple(c)
    if route == "cone":
        return dual_cone_value(inst, c, k, caps)
    if route != "direct":
        raise RouteUnavailable(f"unknown route {route!r}")
    if k == 1:
        value, cert = _direct_k1(inst, c)
    elif k == 2:
        value, cert = _direct_k2(inst, c)
    elif k == 3:
        value, cert = _direct_k3(inst, c, caps)
    elif k == 6:
        value, cert = _direct_k6(inst, c)
    else:
        return dual_lagrangian_value(inst, c, k, caps)
    return DualOutcome(k, "direct", value, cert)


def _point_in_uset(inst: Instance, vec, src) -> bool:
    """vec is a listed point of the set, or a hull point when flagged."""
    uset = inst.sets.get(src)
    if uset is None:
        return False
    embeds = [p.embed() for p in uset.points]
    if vec in embeds:
        return True
    if not uset.convex_hull:
        return False
    n1 = len(vec)
    rows = [(tuple(g[i] for g in embeds), EQ, vec[i]) for i in range(n1)]
    rows.append((tuple(ONE for _ in embeds), EQ, ONE))
    out = lp_solve(make_lp([ZERO] * len(embeds), rows,
                           lower=tuple(ZERO for _ in embeds),
                           upper=tuple(None for _ in embeds)))
    return isinstance(out, Optimal)


def verify_dual_certificate(inst: Instance, c: Sequence, out: DualOutcome) -> bool:
    """Exact check: nonnegative weights on genuine uncertainty data that
    reproduce c and the finite value per the dual's constraints."""
    if not out.value.is_finite:
        return True
    cert = out.attained
    if cert is None:
        return False
    n = inst.dim
    total = [ZERO] * (n + 1)
    for (g, src), w in cert.multipliers:
        if w < 0:
            return False
        if w != 0 and not _point_in_uset(inst, tuple(g), src):
            return False
        for i in range(n + 1):
            total[i] += w * g[i]
    if any(total[i] != -c[i] for i in range(n)):
        return False
    return -total[n] == out.value.q


# ---------------------------------------------------------------------------
# Diagram
# ---------------------------------------------------------------------------

def diagram_check(inst: Instance, c: Sequence, caps: Caps = DEFAULT_CAPS) -> DiagramReport:
    """Evaluate the primal and all nine duals and check every ordering edge."""
    c = tuple(c)
    cones = {name: build_cone(inst, name, caps) for name in ("N1", "N2", "N3", "N6")}
    duals = {}
    for k in K_RANGE:
        duals[k] = dual_cone_value(inst, c, k, caps, cone=cones[BASE_CONE_FOR_K[k]])
    primal, _ = primal_value(inst, c)
    values = {str(k): duals[k].value for k in K_RANGE}
    values["primal"] = primal
    edges = []
    for a, b in DIAGRAM_EDGES:
        lhs, rhs = values[a], values[b]
        edges.append((a, b, lhs, rhs, lhs <= rhs))
    return DiagramReport(primal, duals, tuple(edges))


# ---------------------------------------------------------------------------
# Classical linear duals (singleton uncertainty)
# ---------------------------------------------------------------------------

class NotSingletonInstance(ValueError):
    pass


LID_COLLAPSE = {1: (1, 2, 4), 2: (3, 6, 8), 3: (5, 7, 9)}


def lip_dual_value(inst: Instance, c: Sequence, j: int,
                   caps: Caps = DEFAULT_CAPS) -> DualOutcome:
    """LID^j value for singleton-uncertainty instances; asserts the collapse
    of the nine robust duals onto the three classical ones."""
    if not inst.all_singleton():
        raise NotSingletonInstance("lip_dual_value needs singleton uncertainty sets")
    if j not in (1, 2, 3):
        raise ValueError("j must be 1, 2 or 3")
    c = tuple(c)
    rep = {1: 1, 2: 6, 3: 7}[j]
    outs = {k: dual_value(inst, c, k, "cone", caps) for k in K_RANGE}
    for jj, group in LID_COLLAPSE.items():
        vals = {outs[k].value for k in group}
        if len(vals) != 1:
            raise VerificationFailure(
                f"singleton collapse broken for LID^{jj}: "
                f"{[str(outs[k].value) for k in group]}")
    base = outs[rep]
    cert = base.attained
    if cert is not None:
        cert = DualCertificate(f"lid{j}", cert.multipliers, cert.index, cert.lam,
                               cert.point)
    return DualOutcome(rep, f"lid{j}", base.value, cert, (("collapse_map", True),))
