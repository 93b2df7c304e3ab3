"""Polyhedral cone geometry in Q^(n+1).

Finitely generated cones and finite unions of them represent every moment
cone used by the duality checks.  Everything is exact: membership produces
rational weight certificates, generator <-> halfspace conversion is done by
facet enumeration, convexity of a union and containment between unions are
decided by covering arguments whose failures come with rational witness
points.

Cone variants built from an instance (with e := (0,...,0,1)):

* N1  union over the constraint data of the fans cone{v, e}; a convex_hull
      flagged set contributes the single cone over its polytope instead
      (the cone of a polytope is the conical hull of its vertices).
* N2  one cone per index: cone(points_t + {e}).
* N3  one cone per selection; flagged sets mix freely inside a selection, so
      selections run over the unflagged sets only.
* N6  the single cone over all data plus e.
* N4=N2, N5=N3, N7=N8=N9=N6 as sets (finite collapse); the alternate variants
  are built with independently reduced generator lists so the set identities
  remain informative checks.
* M1 coincides with N1; E1/E2/E3 are the singleton-uncertainty forms.
"""

from __future__ import annotations

import itertools
import json
import os
from dataclasses import dataclass
from typing import Optional, Sequence

from .lp import LE, EQ, Infeasible, Optimal, Unbounded, lp_solve, make_lp
from .model import CapExceeded, Instance, ExtValue, NEG_INF, POS_INF
from .rationals import ONE, ZERO, Vec, dot, primitive, rat, rat_to_json, unit_vec


class DimensionLimit(RuntimeError):
    """Raised when a conversion exceeds the configured dimension limit."""


class NotSingleton(ValueError):
    """Raised when a singleton-uncertainty variant meets general data."""


DEFAULT_SELECTION_CAP = 4096
DEFAULT_PIECE_CAP = 12
DEFAULT_DIM_LIMIT = 7


@dataclass(frozen=True)
class Caps:
    selections: int = DEFAULT_SELECTION_CAP
    pieces: int = DEFAULT_PIECE_CAP
    dim: int = DEFAULT_DIM_LIMIT

    @staticmethod
    def from_env(selections: int | None = None, pieces: int | None = None) -> "Caps":
        env = os.environ.get("ROBUST_LIP_CAP")
        sel = selections if selections is not None else (
            int(env) if env else DEFAULT_SELECTION_CAP)
        return Caps(selections=sel, pieces=pieces if pieces is not None else DEFAULT_PIECE_CAP)


DEFAULT_CAPS = Caps()


@dataclass(frozen=True)
class GenCone:
    """{sum mu_i g_i : mu_i >= 0}; closed and convex by Minkowski-Weyl."""

    dim: int
    generators: tuple

    def __post_init__(self):
        for g in self.generators:
            if len(g) != self.dim:
                raise ValueError("generator dimension mismatch")

    def member_weights(self, x: Vec):
        """Nonnegative weights reproducing x, or None."""
        gens = self.generators
        if not gens:
            return () if all(v == 0 for v in x) else None
        rows = [(tuple(g[k] for g in gens), EQ, x[k]) for k in range(self.dim)]
        out = lp_solve(make_lp([ZERO] * len(gens), rows,
                               lower=tuple(ZERO for _ in gens),
                               upper=tuple(None for _ in gens)))
        if isinstance(out, Optimal):
            return out.point
        return None


@dataclass(frozen=True)
class HalfspaceCone:
    """{x : <h, x> >= 0 for every normal h}; equalities appear as +-h pairs."""

    dim: int
    normals: tuple


@dataclass(frozen=True)
class UnionCone:
    dim: int
    pieces: tuple
    variant_tag: str = ""
    # per piece, per generator: the index id the generator came from (None for e)
    sources: tuple = ()

    def __post_init__(self):
        if not self.pieces:
            raise ValueError("a union cone needs at least one piece")
        for p in self.pieces:
            if p.dim != self.dim:
                raise ValueError("piece dimension mismatch")

    def all_generators(self) -> tuple:
        seen = set()
        out = []
        for p in self.pieces:
            for g in p.generators:
                if g not in seen:
                    seen.add(g)
                    out.append(g)
        return tuple(out)

    def to_json(self) -> dict:
        return {
            "schema": "robustlip.cone/1",
            "dim": self.dim,
            "variant": self.variant_tag,
            "pieces": [
                [[rat_to_json(v) for v in g] for g in p.generators] for p in self.pieces
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class MemberCert:
    piece: int
    weights: tuple


@dataclass(frozen=True)
class ConvexityVerdict:
    convex: bool
    witness: Vec | None = None
    hull_weights: tuple | None = None
    refutations: tuple | None = None  # (piece index, violated normal) per piece

    @property
    def tag(self) -> str:
        return "CertifiedConvex" if self.convex else "CertifiedNonConvex"


# ---------------------------------------------------------------------------
# Exact linear algebra helpers
# ---------------------------------------------------------------------------

def _row_reduce(rows):
    """In-place RREF; returns list of pivot column indices."""
    pivots = []
    r = 0
    if not rows:
        return pivots
    ncols = len(rows[0])
    for c in range(ncols):
        pr = None
        for k in range(r, len(rows)):
            if rows[k][c] != 0:
                pr = k
                break
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        pv = rows[r][c]
        rows[r] = [v / pv for v in rows[r]]
        for k in range(len(rows)):
            if k != r and rows[k][c] != 0:
                f = rows[k][c]
                rows[k] = [a - f * b for a, b in zip(rows[k], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def _nullspace(vectors: Sequence[Vec], dim: int):
    """Basis of {h : <v, h> = 0 for all v}."""
    rows = [list(v) for v in vectors]
    pivots = _row_reduce(rows)
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for fc in free:
        h = [ZERO] * dim
        h[fc] = ONE
        for i, pc in enumerate(pivots):
            h[pc] = -rows[i][fc]
        basis.append(tuple(h))
    return basis


def _span_basis(vectors: Sequence[Vec]):
    rows = [list(v) for v in vectors]
    pivots = _row_reduce(rows)
    return [tuple(rows[i]) for i in range(len(pivots))]


def polar_generators(vectors: Sequence[Vec], dim: int, dim_limit: int = DEFAULT_DIM_LIMIT):
    """Generators of the dual cone {h : <v, h> >= 0 for all v}.

    Equivalently: a complete normal description of cone(vectors).  Output is
    the orthogonal-complement basis as +- pairs followed by the facet
    normals, all primitive integer vectors.
    """
    if dim > dim_limit:
        raise DimensionLimit(f"dim {dim} exceeds limit {dim_limit}")
    gens = []
    seen = set()
    for v in vectors:
        p = primitive(v)
        if any(x != 0 for x in p) and p not in seen:
            seen.add(p)
            gens.append(p)
    out = []
    emitted = set()

    def emit(h):
        p = primitive(h)
        if p not in emitted:
            emitted.add(p)
            out.append(p)

    for h in _nullspace(gens, dim):
        emit(h)
        emit(tuple(-v for v in h))
    span = _span_basis(gens)
    r = len(span)
    if r == 0:
        return tuple(out)
    for subset in itertools.combinations(range(len(gens)), r - 1):
        # solve <g, h> = 0 for g in subset with h in span(gens)
        rows = [[dot(gens[i], span[l]) for l in range(r)] for i in subset]
        kernel = _nullspace([tuple(row) for row in rows], r)
        if len(kernel) != 1:
            continue
        theta = kernel[0]
        h = tuple(sum((theta[l] * span[l][k] for l in range(r)), ZERO) for k in range(dim))
        for cand in (h, tuple(-v for v in h)):
            if all(dot(g, cand) >= 0 for g in gens):
                emit(cand)
    return tuple(out)


def dd_convert(cone: GenCone, dim_limit: int = DEFAULT_DIM_LIMIT) -> HalfspaceCone:
    """Generator representation to halfspace representation."""
    return HalfspaceCone(cone.dim, polar_generators(cone.generators, cone.dim, dim_limit))


def dd_generators(h: HalfspaceCone, dim_limit: int = DEFAULT_DIM_LIMIT) -> GenCone:
    """Halfspace representation back to generators (the polar round trip)."""
    return GenCone(h.dim, polar_generators(h.normals, h.dim, dim_limit))


# ---------------------------------------------------------------------------
# Membership and the cone value query
# ---------------------------------------------------------------------------

def member(cone: UnionCone, x: Vec) -> MemberCert | None:
    if len(x) != cone.dim:
        raise ValueError("dimension mismatch")
    for idx, piece in enumerate(cone.pieces):
        w = piece.member_weights(tuple(x))
        if w is not None:
            return MemberCert(idx, tuple(w))
    return None


def value_query(cone: UnionCone, c: Sequence):
    """sup { r : (-c, -r) in cone } with attaining piece and weights when finite.

    NegInf when no piece admits the first-block equality; PosInf when some
    piece makes r unbounded above; ties broken by lowest piece index.
    """
    n = cone.dim - 1
    if len(c) != n:
        raise ValueError("objective length must be cone dim - 1")
    target = tuple(-v for v in c)
    best = None
    best_cert = None
    for idx, piece in enumerate(cone.pieces):
        gens = piece.generators
        if not gens:
            continue
        rows = [(tuple(g[k] for g in gens), EQ, target[k]) for k in range(n)]
        out = lp_solve(make_lp([g[n] for g in gens], rows,
                               lower=tuple(ZERO for _ in gens),
                               upper=tuple(None for _ in gens)))
        if isinstance(out, Infeasible):
            continue
        if isinstance(out, Unbounded):
            return POS_INF, None
        r = -out.value
        val = ExtValue.finite(r)
        if best is None or val > best:
            best = val
            best_cert = (idx, tuple(out.point))
    if best is None:
        return NEG_INF, None
    return best, best_cert


# ---------------------------------------------------------------------------
# Containment and convexity of unions
# ---------------------------------------------------------------------------

_REGION_GUARD = 100000


def _region_point(piece: GenCone, constraints):
    """A point of the piece satisfying extra homogeneous constraints, or None.

    constraints: (normal, strict) pairs; strict means <h, x> <= -1 after conic
    normalization, otherwise <h, x> >= 0.
    """
    gens = piece.generators
    if not gens:
        return None
    rows = []
    for h, strict in constraints:
        coeffs = tuple(dot(h, g) for g in gens)
        if strict:
            rows.append((coeffs, LE, -ONE))
        else:
            rows.append((coeffs, ">=", ZERO))
    out = lp_solve(make_lp([ZERO] * len(gens), rows,
                           lower=tuple(ZERO for _ in gens),
                           upper=tuple(None for _ in gens)))
    if isinstance(out, Optimal):
        mu = out.point
        return tuple(sum((mu[i] * g[k] for i, g in enumerate(gens)), ZERO)
                     for k in range(piece.dim))
    return None


def _piece_inside(p: GenCone, q: GenCone) -> bool:
    pk, qk = frozenset(p.generators), frozenset(q.generators)
    if pk <= qk:
        return True
    if len(qk) == 1 and len(pk - qk) > 0:
        return all(_on_ray(g, next(iter(qk))) for g in pk - qk)
    return all(q.member_weights(g) is not None for g in pk - qk)


def _on_ray(g, r) -> bool:
    for a, b in zip(g, r):
        if b != 0:
            s = a / b
            return s >= 0 and all(x == s * y for x, y in zip(g, r))
    return all(x == 0 for x in g)


def _reduce_pieces(pieces: Sequence[GenCone]):
    """Keep only maximal pieces; the union is unchanged, duplicates keep the
    earliest occurrence."""
    kept: list[GenCone] = []
    for p in pieces:
        if any(_piece_inside(p, q) for q in kept):
            continue
        kept = [q for q in kept if not _piece_inside(q, p)]
        kept.append(p)
    return kept


def _covering_failure(piece: GenCone, cover, caps: Caps, memo: dict | None = None):
    """A point of `piece` outside every cone of `cover`, or None.

    Fast paths: a piece whose generator set is a subset of one covering
    cone's, or whose generators all verify membership in one covering cone,
    is covered outright.  Otherwise region subdivision realizes the
    one-violated-facet-per-piece search: a point escapes the cover iff for
    each covering cone some facet is strictly violated; regions accumulate
    the facet dichotomies with infeasible branches pruned by LP.
    """
    pk = frozenset(piece.generators)
    for q in cover:
        if pk <= frozenset(q.generators):
            return None
    for q in cover:
        if _piece_inside(piece, q):
            return None
    if memo is not None:
        cover = memo.setdefault("reduced", _reduce_pieces(cover))
    else:
        cover = _reduce_pieces(cover)
    if len(cover) > caps.pieces:
        raise CapExceeded(len(cover), caps.pieces, what="pieces")
    # bigger cones first: they kill candidate regions earlier
    order = sorted(range(len(cover)), key=lambda i: -len(cover[i].generators))
    normal_sets = [polar_generators(cover[i].generators, cover[i].dim, caps.dim)
                   for i in order]
    regions = [[]]
    examined = 0
    for normals in normal_sets:
        nxt = []
        for region in regions:
            prefix = []
            for h in normals:
                cand = region + prefix + [(h, True)]
                examined += 1
                if examined > _REGION_GUARD:
                    raise CapExceeded(examined, _REGION_GUARD, what="regions")
                if _region_point(piece, cand) is not None:
                    nxt.append(cand)
                prefix.append((h, False))
        regions = nxt
        if not regions:
            return None
    return _region_point(piece, regions[0])


def _in_union(x, pieces) -> bool:
    return any(p.member_weights(x) is not None for p in pieces)


def _quick_nonconvex_witness(pieces, dim, budget=150):
    """Pairwise generator sums outside the union refute convexity cheaply."""
    gens = []
    seen = set()
    for p in pieces:
        for g in p.generators:
            if g not in seen:
                seen.add(g)
                gens.append(g)
    tried = 0
    for i, g in enumerate(gens):
        for h in gens[i + 1:]:
            tried += 1
            if tried > budget:
                return None
            x = tuple(a + b for a, b in zip(g, h))
            if not _in_union(x, pieces):
                return x
    return None


def _dedupe_pieces(pieces):
    seen = set()
    out = []
    for p in pieces:
        key = frozenset(p.generators)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def union_contains(a: UnionCone, b: UnionCone, caps: Caps = DEFAULT_CAPS):
    """Decide a subset-of b; on failure also return a witness point of a \\ b."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    cover = _dedupe_pieces(b.pieces)
    memo = {}
    for piece in _dedupe_pieces(a.pieces):
        w = _covering_failure(piece, cover, caps, memo)
        if w is not None:
            return False, w
    return True, None


def union_convex_decide(cone: UnionCone, caps: Caps = DEFAULT_CAPS) -> ConvexityVerdict:
    """Exact convexity of the union: hull containment with certified failure.

    The union equals its conical hull iff it is convex; a witness in the hull
    but outside every piece certifies non-convexity and doubles as the gap
    objective for the duality characterizations.
    """
    pieces = _dedupe_pieces(cone.pieces)
    if len(pieces) == 1:
        return ConvexityVerdict(True)
    hull = GenCone(cone.dim, cone.all_generators())
    w = _quick_nonconvex_witness(pieces, cone.dim)
    if w is None:
        pieces = _reduce_pieces(pieces)
        if len(pieces) == 1:
            return ConvexityVerdict(True)
        w = _covering_failure(hull, pieces, caps)
    if w is None:
        return ConvexityVerdict(True)
    weights = hull.member_weights(w)
    refutations = []
    for idx, piece in enumerate(cone.pieces):
        for h in polar_generators(piece.generators, piece.dim, caps.dim):
            if dot(h, w) < 0:
                refutations.append((idx, h))
                break
    return ConvexityVerdict(False, w, weights, tuple(refutations))


# ---------------------------------------------------------------------------
# Moment cone construction
# ---------------------------------------------------------------------------

VARIANTS = ("N1", "N2", "N3", "N4", "N5", "N6", "N7", "N8", "N9",
            "M1", "E1", "E2", "E3")


def _embed_all(points):
    return [p.embed() for p in points]


def _dedupe(vectors):
    seen = set()
    out = []
    for v in vectors:
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def _reduce_generators(vectors, dim, extra=()):
    """Drop generators lying in the cone of the remaining ones plus `extra`."""
    vecs = _dedupe(list(vectors))
    kept = list(vecs)
    i = 0
    while i < len(kept):
        candidate = kept[i]
        rest = kept[:i] + kept[i + 1:] + list(extra)
        if rest and GenCone(dim, tuple(rest)).member_weights(candidate) is not None:
            kept.pop(i)
        else:
            i += 1
    return kept


def build_cone(inst: Instance, variant: str, caps: Caps = DEFAULT_CAPS) -> UnionCone:
    """Construct the requested moment cone of the instance in Q^(n+1)."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown cone variant {variant!r}")
    n = inst.dim
    d = n + 1
    e = unit_vec(d, n)
    if variant in ("E1", "E2", "E3") and not inst.all_singleton():
        raise NotSingleton(f"variant {variant} needs singleton uncertainty sets")

    def tagged(t):
        return [(p.embed(), t) for p in inst.sets[t].points]

    def make_piece(pairs):
        """(vec, source) pairs -> deduped GenCone plus aligned sources, e appended."""
        gens = []
        srcs = []
        seen = {}
        for vec, src in list(pairs) + [(e, None)]:
            if vec not in seen:
                seen[vec] = src
                gens.append(vec)
                srcs.append(src)
        return GenCone(d, tuple(gens)), tuple(srcs)

    def reduce_pairs(pairs):
        vecs = _reduce_generators([v for v, _ in pairs], d, extra=(e,))
        first = {}
        for v, src in pairs:
            first.setdefault(v, src)
        return [(v, first[v]) for v in vecs]

    built = []
    if variant in ("N1", "M1", "E1"):
        seen = set()
        for t in inst.index:
            uset = inst.sets[t]
            groups = [tagged(t)] if uset.convex_hull else [[(p.embed(), t)] for p in uset.points]
            for pairs in groups:
                cand = make_piece(pairs)
                key = frozenset(cand[0].generators)
                if key not in seen:
                    seen.add(key)
                    built.append(cand)
    elif variant in ("N2", "N4"):
        for t in inst.index:
            pairs = tagged(t)
            if variant == "N4":
                pairs = reduce_pairs(pairs)
            built.append(make_piece(pairs))
    elif variant in ("N3", "N5"):
        flagged_pairs = []
        unflagged = []
        for t in inst.index:
            if inst.sets[t].convex_hull:
                flagged_pairs.extend(tagged(t))
            else:
                unflagged.append(tagged(t))
        count = 1
        for opts in unflagged:
            count *= len(opts)
        if count > caps.selections:
            raise CapExceeded(count, caps.selections)
        for combo in itertools.product(*unflagged):
            pairs = flagged_pairs + list(combo)
            if variant == "N5":
                pairs = reduce_pairs(pairs)
            built.append(make_piece(pairs))
    else:
        pairs = []
        for t in inst.index:
            pairs.extend(tagged(t))
        if variant in ("N7", "E3"):
            pairs = reduce_pairs(pairs)
        elif variant == "N8":
            reduced = []
            for t in inst.index:
                reduced.extend(reduce_pairs(tagged(t)))
            pairs = reduced
        built.append(make_piece(pairs))
    return UnionCone(d, tuple(p for p, _ in built), variant,
                     tuple(s for _, s in built))
