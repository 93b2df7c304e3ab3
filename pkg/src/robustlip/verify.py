"""Theorem, Farkas, Slater and hypothesis verification.

The duality characterizations are checked constructively:

* a certified-convex moment cone (closedness is structural for finitely
  generated cones) must produce primal = dual with a verified attainment
  certificate on every sampled objective of a feasible instance;
* a certified-non-convex cone must exhibit the failure: the witness ray
  yields an objective whose dual value falls strictly below a level the
  primal meets.

Farkas variants are evaluated two-sided: the implication side as an exact
primal bound, the certificate side by the matching dual solver at the level.
The certificate side implies the implication side unconditionally; the
equivalence itself is asserted only when the governing cone verdict says it
must hold and the instance is feasible (the standing assumption of the
underlying duality results).
"""

from __future__ import annotations

import random
import zlib
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .cones import (Caps, ConvexityVerdict, DEFAULT_CAPS, NotSingleton, UnionCone,
                    build_cone, member, union_contains, union_convex_decide)
from .duals import (DualOutcome, dual_cone_value, dual_value, instance_feasible,
                    primal_value, verify_dual_certificate)
from .lp import LE, strict_feasible
from .model import (CapExceeded, ExtValue, Instance, NEG_INF, POS_INF,
                    dumps_instance, enumerate_selections, expand_constraints,
                    selection_points)
from .rationals import ONE, ZERO, dot, rat, rat_to_json, unit_vec

THEOREM_VARIANTS = (1, 2, 3, 4, 5, 6, 7, 8, 9, "M1", "E1", "E2", "E3")
_DUAL_K = {1: 1, 2: 2, 3: 3, 4: 4, 5: 5, 6: 6, 7: 7, 8: 8, 9: 9,
           "M1": 1, "E1": 1, "E2": 6, "E3": 7}
_THEOREM_ID = {1: "4.1:1", 2: "4.1:2", 3: "4.1:3", 4: "4.1:4", 5: "4.1:5",
               6: "4.2:6", 7: "4.2:7", 8: "R4.1:8", 9: "R4.1:9",
               "M1": "C2.4", "E1": "C6.5:1", "E2": "C6.5:2", "E3": "C6.5:3"}

FARKAS_VARIANTS = ("P2.1", "C2.1", "C2.2", "C5.1", "C5.2", "C5.3", "C5.4",
                   "C6.6", "C6.7")


class VariantMismatch(ValueError):
    """Raised when a check variant does not apply to the instance shape."""


# ---------------------------------------------------------------------------
# Objective sampling
# ---------------------------------------------------------------------------

def default_objectives(inst: Instance, count: int = 16, extra=()):
    """Generator-derived objectives (where polyhedral gaps live) plus seeded
    random rationals, deterministic in the instance data."""
    n = inst.dim
    cands = []
    seen = set()

    def push(c):
        c = tuple(c)
        if c not in seen:
            seen.add(c)
            cands.append(c)

    for c in extra:
        push(c)
    for p in expand_constraints(inst):
        push(tuple(-x for x in p.a))
    for i in range(n):
        push(unit_vec(n, i))
        push(tuple(-x for x in unit_vec(n, i)))
    rng = random.Random(zlib.crc32(dumps_instance(inst).encode()))
    while len(cands) < count:
        push(tuple(rat(rng.randint(-6, 6), rng.randint(1, 3)) for _ in range(n)))
    return cands[:count]


# ---------------------------------------------------------------------------
# Theorem checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObjectiveRow:
    c: tuple
    primal: ExtValue
    dual: ExtValue
    gap: bool
    attained: bool
    ok: bool

    def to_json(self):
        return {"c": [rat_to_json(v) for v in self.c], "primal": self.primal.to_json(),
                "dual": self.dual.to_json(), "gap": self.gap,
                "attained": self.attained, "ok": self.ok}


@dataclass(frozen=True)
class GapExhibit:
    c: tuple
    level: object
    primal: ExtValue
    dual: ExtValue
    holds: bool

    def to_json(self):
        return {"c": [rat_to_json(v) for v in self.c], "level": rat_to_json(self.level),
                "primal": self.primal.to_json(), "dual": self.dual.to_json(),
                "holds": self.holds}


@dataclass(frozen=True)
class TheoremReport:
    theorem_id: str
    variant: str
    verdict: ConvexityVerdict
    closed: bool
    feasible: bool
    rows: tuple
    exhibit: Optional[GapExhibit]
    consistent: bool
    notes: tuple

    def to_json(self):
        return {
            "schema": "robustlip.theorem/1",
            "theorem": self.theorem_id,
            "variant": self.variant,
            "cone_verdict": self.verdict.tag,
            "witness": ([rat_to_json(v) for v in self.verdict.witness]
                        if self.verdict.witness else None),
            "closed": self.closed,
            "feasible": self.feasible,
            "rows": [r.to_json() for r in self.rows],
            "exhibit": self.exhibit.to_json() if self.exhibit else None,
            "consistent": self.consistent,
            "notes": list(self.notes),
        }


def theorem_check(inst: Instance, variant, c_samples=None,
                  caps: Caps = DEFAULT_CAPS, label: str | None = None) -> TheoremReport:
    """Verify the duality characterization attached to one cone variant.

    Certified convex (plus structural closedness) demands exact primal=dual
    with verified attainment on every sampled objective; a non-convex verdict
    demands that the witness-derived objective exhibits the duality failure.
    Infeasible instances are vacuous: the results assume a feasible system.
    """
    if variant not in THEOREM_VARIANTS:
        raise ValueError(f"unknown theorem variant {variant!r}")
    k = _DUAL_K[variant]
    cone_name = variant if isinstance(variant, str) else f"N{variant}"
    cone = build_cone(inst, cone_name, caps)
    verdict = union_convex_decide(cone, caps)
    feasible = instance_feasible(inst)
    notes = []
    if c_samples is None:
        c_samples = default_objectives(inst)
    rows = []
    consistent = True
    if not feasible:
        notes.append("instance infeasible; the characterization assumes a "
                     "feasible system, rows are vacuous")
    for c in c_samples:
        primal, _ = primal_value(inst, c)
        out = dual_cone_value(inst, c, k, caps, cone=cone)
        dual = out.value
        gap = dual < primal
        attained = dual.is_finite and verify_dual_certificate(inst, c, out)
        ok = dual <= primal
        if feasible:
            if verdict.convex:
                if primal.is_finite:
                    ok = ok and dual == primal and attained
                elif primal == NEG_INF:
                    ok = ok and dual == NEG_INF
        rows.append(ObjectiveRow(tuple(c), primal, dual, gap, attained, ok))
        consistent = consistent and ok
    exhibit = None
    if not verdict.convex:
        w = verdict.witness
        n = inst.dim
        c_w = tuple(-v for v in w[:n])
        level = -w[n]
        primal_w, _ = primal_value(inst, c_w)
        dual_w = dual_cone_value(inst, c_w, k, caps, cone=cone).value
        holds = primal_w >= ExtValue.finite(level) and dual_w < ExtValue.finite(level)
        exhibit = GapExhibit(c_w, level, primal_w, dual_w, holds)
        consistent = consistent and holds
        notes.append("witness-derived objective exhibits the stable-duality failure")
    return TheoremReport(label or _THEOREM_ID[variant], cone_name, verdict, True,
                         feasible, tuple(rows), exhibit, consistent, tuple(notes))


# ---------------------------------------------------------------------------
# Farkas checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FarkasReport:
    variant: str
    c: tuple
    s: object
    alpha: bool
    beta: bool
    alpha_data: Optional[tuple]       # primal value as ExtValue, optimizer
    beta_cert: Optional[object]       # dual certificate or membership certificate
    expected_equivalent: bool
    consistent: bool
    notes: tuple

    def to_json(self):
        return {
            "schema": "robustlip.farkas/1",
            "variant": self.variant,
            "c": [rat_to_json(v) for v in self.c],
            "s": rat_to_json(self.s),
            "alpha": self.alpha,
            "beta": self.beta,
            "expected_equivalent": self.expected_equivalent,
            "consistent": self.consistent,
            "notes": list(self.notes),
        }


def _uniform_b_sets(inst: Instance):
    """The per-index (vertex list, bound) pairs of a sub-affine reading."""
    sets = []
    for t in inst.index:
        pts = inst.sets[t].points
        b = pts[0].b
        if any(p.b != b for p in pts):
            raise VariantMismatch(
                f"variant C2.2 needs one bound per index; {t} mixes bounds")
        sets.append((t, [p.a for p in pts], b))
    return sets


def farkas_check(inst: Instance, variant: str, c, s,
                 caps: Caps = DEFAULT_CAPS) -> FarkasReport:
    """Evaluate one Farkas-type equivalence at (c, s), with certificates."""
    if variant not in FARKAS_VARIANTS:
        raise ValueError(f"unknown Farkas variant {variant!r}")
    c = tuple(c)
    s = rat(s) if isinstance(s, (int, str)) else s
    if variant in ("C6.6", "C6.7") and not inst.all_singleton():
        raise VariantMismatch(f"variant {variant} needs singleton uncertainty sets")
    if variant == "C2.2":
        _uniform_b_sets(inst)
    feasible = instance_feasible(inst)
    level = ExtValue.finite(s)
    primal, popt = primal_value(inst, c)
    alpha = primal >= level
    notes = []
    if variant in ("P2.1", "C2.1", "C2.2"):
        hull = build_cone(inst, "N6", caps)
        target = tuple(-v for v in c) + (-s,)
        cert = member(hull, target)
        beta = cert is not None
        expected = feasible
        if not feasible:
            notes.append("infeasible system: the closed-convex-hull equivalence "
                         "assumes a feasible system")
    else:
        k = {"C5.1": 1, "C5.2": 2, "C5.3": 3, "C5.4": 4, "C6.6": 1, "C6.7": 7}[variant]
        out = dual_cone_value(inst, c, k, caps)
        beta = out.value >= level
        cert = out.attained if beta else None
        if variant == "C6.7":
            expected = feasible  # E3 is closed and convex by construction
        else:
            cone = build_cone(inst, f"N{k}" if variant.startswith("C5") else
                              ("E1" if variant == "C6.6" else "E3"), caps)
            expected = feasible and union_convex_decide(cone, caps).convex
        if not feasible:
            notes.append("infeasible system: equivalence not asserted")
    consistent = ((not expected) or (alpha == beta)) and ((not beta) or alpha)
    return FarkasReport(variant, c, s, alpha, beta,
                        (primal, popt), cert, expected, consistent, tuple(notes))


# ---------------------------------------------------------------------------
# Slater checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlaterReport:
    cond: str
    holds: bool
    witnesses: tuple  # (label, point or data)
    failures: tuple

    def to_json(self):
        def render(item):
            label, data = item
            if data is None:
                return {"at": label}
            return {"at": label, "point": [rat_to_json(v) for v in data]}
        return {
            "schema": "robustlip.slater/1",
            "cond": self.cond,
            "holds": self.holds,
            "witnesses": [render(w) for w in self.witnesses],
            "failures": [render(f) for f in self.failures],
        }


SLATER_CONDS = ("4.2", "4.3", "4.4", "4.5", "C0")


def slater_check(inst: Instance, cond: str, caps: Caps = DEFAULT_CAPS) -> SlaterReport:
    if cond not in SLATER_CONDS:
        raise ValueError(f"unknown Slater condition {cond!r}")
    n = inst.dim
    witnesses = []
    failures = []
    if cond == "4.2":
        # per data point: some x with <v1, x> < v2; hull sets need the whole
        # polytope checked, which reduces to an LP on the vertex weights
        for t in inst.index:
            uset = inst.sets[t]
            if uset.convex_hull and len(uset.points) > 1:
                bad = _hull_zero_direction(uset.points, n)
                if bad is not None:
                    failures.append((f"{t}:hull", bad))
                else:
                    witnesses.append((f"{t}:hull", None))
                continue
            for i, p in enumerate(uset.points):
                label = f"{t}[{i}]"
                if all(x == 0 for x in p.a):
                    if p.b > 0:
                        witnesses.append((label, tuple(ZERO for _ in range(n))))
                    else:
                        failures.append((label, p.embed()))
                else:
                    norm = dot(p.a, p.a)
                    tau = (max(ZERO, -p.b) + ONE) / norm
                    witnesses.append((label, tuple(-tau * x for x in p.a)))
    elif cond == "4.3":
        for t in inst.index:
            rows = [(p.a, LE, p.b) for p in inst.sets[t].points]
            got = strict_feasible(rows, n)
            if got is None:
                failures.append((t, None))
            else:
                witnesses.append((t, got[0]))
    elif cond == "4.4":
        for sel in enumerate_selections(inst, caps.selections):
            label = ",".join(f"{t}={sel[t]}" for t in inst.index)
            rows = [(p.a, LE, p.b) for p in selection_points(inst, sel)]
            got = strict_feasible(rows, n)
            if got is None:
                failures.append((label, None))
            else:
                witnesses.append((label, got[0]))
    elif cond == "4.5":
        rows = [(p.a, LE, p.b) for p in expand_constraints(inst)]
        got = strict_feasible(rows, n)
        if got is None:
            failures.append(("global", None))
        else:
            witnesses.append(("global", got[0]))
    else:  # C0: every single constraint admits its own strict point
        for i, p in enumerate(expand_constraints(inst)):
            got = strict_feasible([(p.a, LE, p.b)], n)
            if got is None:
                failures.append((f"v[{i}]", p.embed()))
            else:
                witnesses.append((f"v[{i}]", got[0]))
    return SlaterReport(cond, not failures, tuple(witnesses), tuple(failures))


def _hull_zero_direction(points, n):
    """A hull point with zero functional part and nonpositive bound, if any."""
    from .lp import EQ, Optimal, lp_solve, make_lp

    m = len(points)
    rows = [(tuple(p.a[i] for p in points), EQ, ZERO) for i in range(n)]
    rows.append((tuple(p.b for p in points), LE, ZERO))
    rows.append((tuple(ONE for _ in points), EQ, ONE))
    out = lp_solve(make_lp([ZERO] * m, rows, lower=tuple(ZERO for _ in points),
                           upper=tuple(None for _ in points)))
    if isinstance(out, Optimal):
        mix = out.point
        return tuple(sum((mix[j] * points[j].embed()[i] for j in range(m)), ZERO)
                     for i in range(n + 1))
    return None


# ---------------------------------------------------------------------------
# Hypothesis report (Propositions 4.1 / 4.2, Corollary 2.3)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HypothesisRow:
    hypothesis: str
    status: str          # "holds" | "fails" | "not applicable" | "structural"
    cone: Optional[str]
    verdict: Optional[str]
    consistent: bool
    note: str = ""

    def to_json(self):
        return {"hypothesis": self.hypothesis, "status": self.status,
                "cone": self.cone, "verdict": self.verdict,
                "consistent": self.consistent, "note": self.note}


@dataclass(frozen=True)
class HypothesisReport:
    rows: tuple
    consistent: bool

    def to_json(self):
        return {"schema": "robustlip.hypothesis/1",
                "rows": [r.to_json() for r in self.rows],
                "consistent": self.consistent}


def _v_convex_declared(inst: Instance) -> bool:
    """V is convex at finite scale only when it is one point or one declared
    polytope (identical convex_hull-flagged sets)."""
    embeds = {p.embed() for t in inst.index for p in inst.sets[t].points}
    if len(embeds) == 1:
        return True
    keyed = {frozenset(p.embed() for p in inst.sets[t].points) for t in inst.index}
    return all(inst.sets[t].convex_hull for t in inst.index) and len(keyed) == 1


def _projection_convex(inst: Instance) -> bool:
    for t in inst.index:
        uset = inst.sets[t]
        if uset.convex_hull:
            continue
        first = uset.points[0].a
        if any(p.a != first for p in uset.points):
            return False
    return True


def _product_form(uset) -> bool:
    avals = []
    bvals = []
    for p in uset.points:
        if p.a not in avals:
            avals.append(p.a)
        if p.b not in bvals:
            bvals.append(p.b)
    have = {(p.a, p.b) for p in uset.points}
    return len(have) == len(avals) * len(bvals)


def _constant_family(inst: Instance) -> bool:
    keyed = {(frozenset(p.embed() for p in inst.sets[t].points),
              inst.sets[t].convex_hull) for t in inst.index}
    return len(keyed) == 1


def hypothesis_report(inst: Instance, caps: Caps = DEFAULT_CAPS) -> HypothesisReport:
    """Evaluate the convexity/closedness sufficient conditions at finite scale
    and cross-reference the actual cone verdicts."""
    rows = []
    verdicts = {}

    def verdict_of(name):
        if name not in verdicts:
            verdicts[name] = union_convex_decide(build_cone(inst, name, caps), caps)
        return verdicts[name]

    # Proposition 4.1 — convexity sufficient conditions
    checks = [
        ("4.1-i", _v_convex_declared(inst), "N1",
         "V convex only as one point or one declared polytope"),
        ("4.1-ii", _projection_convex(inst), "N3",
         "per index: flagged, or all points share the functional part"),
        ("4.1-iii", all(_product_form(inst.sets[t]) for t in inst.index)
         and _constant_family(inst), "N4",
         "product form with a constant family (the only finite reading of an "
         "affine parametrization over a convex index set)"),
    ]
    consistent = True
    for name, established, cone_name, note in checks:
        if established:
            v = verdict_of(cone_name)
            ok = v.convex
            rows.append(HypothesisRow(name, "holds", cone_name, v.tag, ok, note))
            consistent = consistent and ok
        else:
            rows.append(HypothesisRow(name, "fails", cone_name, None, True, note))
    v6 = verdict_of("N6")
    v7 = verdict_of("N7")
    ok = v6.convex and v7.convex
    rows.append(HypothesisRow("4.1-iv", "holds", "N6,N7",
                              f"{v6.tag},{v7.tag}", ok,
                              "single-piece cones are convex by construction"))
    consistent = consistent and ok

    # Proposition 4.2 — closedness sufficient conditions; closedness itself is
    # structural for finitely generated cones, so these are informational
    for cond, cone_name in (("4.2", "N1"), ("4.3", "N4"), ("4.4", "N5"), ("4.5", "N7")):
        try:
            rep = slater_check(inst, cond, caps)
            status = "holds" if rep.holds else "fails"
        except CapExceeded:
            status = "not applicable"
        rows.append(HypothesisRow(f"4.2({cond})", status, cone_name, "closed",
                                  True, "closedness is structural at finite scale"))

    # Corollary 2.3 — sufficient condition for stable duality of the pair (1)
    rows.append(HypothesisRow("C2.3-i", "structural", None, None, True,
                              "finite data is compact"))
    # uniform concavity at finite scale is exactly hull containment in the
    # first moment cone, which is its convexity (N1 is always inside its hull)
    concave = verdict_of("N1").convex
    rows.append(HypothesisRow("C2.3-ii", "holds" if concave else "fails", "N1", None,
                              True, "uniform concavity at finite scale is exactly "
                              "convexity of the first moment cone"))
    rows.append(HypothesisRow("C2.3-iii", "structural", None, None, True,
                              "upper semicontinuity is automatic on finite data"))
    c0 = slater_check(inst, "C0", caps)
    rows.append(HypothesisRow("C2.3-iv", "holds" if c0.holds else "fails", None,
                              None, True, "per-constraint Slater condition"))
    if concave and c0.holds:
        v1 = verdict_of("N1")
        rows.append(HypothesisRow("C2.3", "holds", "N1", v1.tag, v1.convex,
                                  "established: first moment cone must be convex"))
        consistent = consistent and v1.convex
    else:
        rows.append(HypothesisRow("C2.3", "fails", "N1", None, True, ""))
    return HypothesisReport(tuple(rows), consistent)
