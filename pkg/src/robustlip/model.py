"""Instance data model: validation, JSON I/O, constraint views, random generation.

An instance is a robust linear program over exact rationals: a dimension n, an
ordered finite index set T, and one uncertainty set per index.  Each
uncertainty set is a nonempty list of (a, b) pairs meaning the constraint
<a, x> <= b; when ``convex_hull`` is set, the listed pairs are the vertices of
a polytope of constraint data rather than the whole set.

Instances are immutable after validation and all operations here are pure.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Iterator, Mapping, Sequence

from .rationals import Vec, parse_rat, rat, rat_to_json


class ParseError(ValueError):
    """Raised when an instance file cannot be parsed."""


class ValidationError(ValueError):
    """Raised when parsed data violates the instance invariants."""


class CapExceeded(RuntimeError):
    """Raised when an enumeration would exceed its configured cap."""

    def __init__(self, count: int, cap: int, what: str = "selections"):
        self.count = count
        self.cap = cap
        self.what = what
        super().__init__(f"{count} {what} exceed cap {cap}")


@dataclass(frozen=True)
class UPoint:
    """One uncertainty realization: the constraint <a, x> <= b."""

    a: Vec
    b: object  # rational

    def embed(self) -> Vec:
        """The point (a, b) as a vector in Q^(n+1)."""
        return tuple(self.a) + (self.b,)

    def __str__(self) -> str:
        return "(" + ", ".join(str(x) for x in self.a) + f" | {self.b})"


@dataclass(frozen=True)
class USet:
    """An uncertainty set: finite point list, or their convex hull when flagged."""

    points: tuple
    convex_hull: bool = False

    def __post_init__(self):
        if not self.points:
            raise ValidationError("uncertainty set must list at least one point")


@dataclass(frozen=True)
class Instance:
    dim: int
    index: tuple
    sets: Mapping[str, USet]

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"dim must be >= 1, got {self.dim}")
        if not self.index:
            raise ValidationError("index set must be nonempty")
        if len(set(self.index)) != len(self.index):
            dupes = sorted({t for t in self.index if list(self.index).count(t) > 1})
            raise ValidationError(f"duplicate index id(s): {dupes}")
        for t in self.index:
            if t not in self.sets:
                raise ValidationError(f"index {t!r} has no uncertainty set")
            for p in self.sets[t].points:
                if len(p.a) != self.dim:
                    raise ValidationError(
                        f"uncertainty.{t}: point of length {len(p.a)} under dim {self.dim}"
                    )
        extra = set(self.sets) - set(self.index)
        if extra:
            raise ValidationError(f"uncertainty sets without index entry: {sorted(extra)}")

    def uset(self, t) -> USet:
        return self.sets[t]

    def all_singleton(self) -> bool:
        return all(len(self.sets[t].points) == 1 for t in self.index)

    def any_flagged(self) -> bool:
        return any(self.sets[t].convex_hull for t in self.index)


# Selection: one chosen point index per index id (a member of the product set).
Selection = dict


@total_ordering
class ExtValue:
    """Exact rational extended with -inf/+inf, totally ordered."""

    __slots__ = ("tag", "q")

    NEG, FIN, POS = -1, 0, 1

    def __init__(self, tag: int, q=None):
        self.tag = tag
        self.q = q

    @staticmethod
    def neg_inf() -> "ExtValue":
        return ExtValue(ExtValue.NEG)

    @staticmethod
    def pos_inf() -> "ExtValue":
        return ExtValue(ExtValue.POS)

    @staticmethod
    def finite(q) -> "ExtValue":
        return ExtValue(ExtValue.FIN, rat(q) if isinstance(q, (int, str)) else q)

    @property
    def is_finite(self) -> bool:
        return self.tag == ExtValue.FIN

    def __eq__(self, other):
        if not isinstance(other, ExtValue):
            return NotImplemented
        if self.tag != other.tag:
            return False
        return self.tag != ExtValue.FIN or self.q == other.q

    def __lt__(self, other):
        if not isinstance(other, ExtValue):
            return NotImplemented
        if self.tag != other.tag:
            return self.tag < other.tag
        return self.tag == ExtValue.FIN and self.q < other.q

    def __hash__(self):
        return hash((self.tag, self.q if self.tag == ExtValue.FIN else None))

    def scaled(self, alpha) -> "ExtValue":
        """Value of alpha * self for alpha > 0."""
        if self.tag == ExtValue.FIN:
            return ExtValue.finite(alpha * self.q)
        return self

    def __str__(self) -> str:
        if self.tag == ExtValue.NEG:
            return "-inf"
        if self.tag == ExtValue.POS:
            return "+inf"
        return str(self.q)

    __repr__ = __str__

    def to_json(self):
        if self.tag == ExtValue.FIN:
            return rat_to_json(self.q)
        return str(self)


NEG_INF = ExtValue.neg_inf()
POS_INF = ExtValue.pos_inf()


# ---------------------------------------------------------------------------
# JSON I/O
# ---------------------------------------------------------------------------

def _parse_point(raw, where: str, dim: int) -> UPoint:
    if not isinstance(raw, dict) or "a" not in raw or "b" not in raw:
        raise ParseError(f"{where}: point must be an object with fields 'a' and 'b'")
    try:
        a = tuple(parse_rat(v) for v in raw["a"])
        b = parse_rat(raw["b"])
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from exc
    return UPoint(a, b)


def instance_from_dict(data: dict) -> Instance:
    for key in ("dim", "index", "uncertainty"):
        if key not in data:
            raise ParseError(f"missing field {key!r}")
    dim = data["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise ParseError("dim: must be an integer")
    index = data["index"]
    if not isinstance(index, list) or not all(isinstance(t, str) for t in index):
        raise ParseError("index: must be a list of strings")
    unc = data["uncertainty"]
    if not isinstance(unc, dict):
        raise ParseError("uncertainty: must be an object")
    sets = {}
    for ident, raw in unc.items():
        where = f"uncertainty.{ident}"
        if not isinstance(raw, dict) or "points" not in raw:
            raise ParseError(f"{where}: must be an object with a 'points' list")
        pts = raw["points"]
        if not isinstance(pts, list) or not pts:
            raise ValidationError(f"{where}: empty uncertainty set")
        points = tuple(_parse_point(p, f"{where}.points[{i}]", dim) for i, p in enumerate(pts))
        sets[ident] = USet(points, bool(raw.get("convex_hull", False)))
    return Instance(dim, tuple(index), sets)


def instance_to_dict(inst: Instance) -> dict:
    return {
        "dim": inst.dim,
        "index": list(inst.index),
        "uncertainty": {
            t: {
                "convex_hull": inst.sets[t].convex_hull,
                "points": [
                    {"a": [rat_to_json(x) for x in p.a], "b": rat_to_json(p.b)}
                    for p in inst.sets[t].points
                ],
            }
            for t in inst.index
        },
    }


def load_instance(path) -> Instance:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return instance_from_dict(data)


def save_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(inst), fh, sort_keys=True, indent=1)
        fh.write("\n")


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), sort_keys=True)


# ---------------------------------------------------------------------------
# Constraint and selection views
# ---------------------------------------------------------------------------

def expand_constraints(inst: Instance) -> list:
    """All uncertainty points across T, deduplicated, in (index, point) order.

    For a convex_hull set the vertex list stands in for the whole set: the
    induced constraints over the polytope are equivalent to the vertex ones.
    """
    seen = set()
    out = []
    for t in inst.index:
        for p in inst.sets[t].points:
            key = p.embed()
            if key not in seen:
                seen.add(key)
                out.append(p)
    return out


def selection_count(inst: Instance) -> int:
    count = 1
    for t in inst.index:
        count *= len(inst.sets[t].points)
    return count


def enumerate_selections(inst: Instance, cap: int) -> Iterator[Selection]:
    """All point-index selections, lexicographic in (index order, point index)."""
    count = selection_count(inst)
    if count > cap:
        raise CapExceeded(count, cap)
    ranges = [range(len(inst.sets[t].points)) for t in inst.index]
    for combo in itertools.product(*ranges):
        yield dict(zip(inst.index, combo))


def selection_points(inst: Instance, sel: Selection) -> list:
    return [inst.sets[t].points[sel[t]] for t in inst.index]


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

DEFAULT_BOUNDS = {"max_dim": 4, "max_T": 4, "max_points": 4, "coeff_range": 4}


def gen_random(seed: int, bounds: dict | None = None, force_feasible: bool = False,
               hull_prob: float = 0.25) -> Instance:
    """Deterministic random instance within the given size bounds.

    With force_feasible the instance admits a point satisfying every
    constraint with strictly positive slack (a Slater point); without it the
    right-hand sides are unconstrained and infeasible draws occur.
    """
    b = dict(DEFAULT_BOUNDS)
    if bounds:
        b.update(bounds)
    for key, val in b.items():
        if val < 1:
            raise ValueError(f"bounds[{key!r}] must be positive")
    rng = random.Random(seed)
    dim = rng.randint(1, b["max_dim"])
    n_t = rng.randint(1, b["max_T"])
    coeff = b["coeff_range"]

    def rand_rat():
        return rat(rng.randint(-coeff, coeff), rng.randint(1, 3))

    anchor = tuple(rat(rng.randint(-2, 2), rng.randint(1, 2)) for _ in range(dim))
    sets = {}
    for i in range(n_t):
        npts = rng.randint(1, b["max_points"])
        pts = []
        for _ in range(npts):
            a = tuple(rand_rat() for _ in range(dim))
            if force_feasible:
                slack = rat(rng.randint(1, 4), rng.randint(1, 2))
                bval = sum((x * y for x, y in zip(a, anchor)), rat(0)) + slack
            else:
                bval = rand_rat()
            pts.append(UPoint(a, bval))
        flagged = npts >= 2 and rng.random() < hull_prob
        sets[f"t{i + 1}"] = USet(tuple(pts), flagged)
    return Instance(dim, tuple(f"t{i + 1}" for i in range(n_t)), sets)
