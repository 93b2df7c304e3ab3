"""Exact rational LP kernel with certificates.

Dictionary simplex over rationals with bounded variables (free variables are
handled directly, not by splitting), Bland's anti-cycling rule with a fixed
variable ordering, and a two-phase start.  Every outcome carries a
certificate that the caller can verify by plain rational arithmetic:

* Optimal: the point, constraint duals and reduced costs reproduce the value
  exactly (strong duality).
* Unbounded: a feasible point plus an improving ray that preserves
  feasibility for every nonnegative step.
* Infeasible: multipliers aggregating the constraints and bounds into
  0^T x <= -1.

Solver state is per call; everything here is pure and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .rationals import ZERO, ONE, dot, primitive, rat

LE, EQ, GE = "<=", "=", ">="
_RELS = (LE, EQ, GE)


@dataclass(frozen=True)
class LinearProgram:
    """min/max c^T x subject to rows (coeffs, rel, rhs) and variable bounds.

    Bounds default to free variables; entries of ``lower``/``upper`` may be
    None for an infinite bound.
    """

    num_vars: int
    objective: tuple
    constraints: tuple  # of (coeffs tuple, rel, rhs)
    minimize: bool = True
    lower: tuple = None
    upper: tuple = None

    def __post_init__(self):
        n = self.num_vars
        if len(self.objective) != n:
            raise ValueError("objective length mismatch")
        for row, rel, _ in self.constraints:
            if len(row) != n:
                raise ValueError("constraint row length mismatch")
            if rel not in _RELS:
                raise ValueError(f"bad relation {rel!r}")
        if self.lower is None:
            object.__setattr__(self, "lower", tuple(None for _ in range(n)))
        if self.upper is None:
            object.__setattr__(self, "upper", tuple(None for _ in range(n)))


def make_lp(objective, constraints, minimize=True, lower=None, upper=None) -> LinearProgram:
    obj = tuple(rat(c) if isinstance(c, (int, str)) else c for c in objective)
    rows = tuple(
        (tuple(rat(v) if isinstance(v, (int, str)) else v for v in row), rel,
         rat(rhs) if isinstance(rhs, (int, str)) else rhs)
        for row, rel, rhs in constraints
    )
    n = len(obj)
    lo = tuple(lower) if lower is not None else None
    up = tuple(upper) if upper is not None else None
    return LinearProgram(n, obj, rows, minimize, lo, up)


@dataclass(frozen=True)
class Optimal:
    value: object
    point: tuple
    duals: tuple          # one per constraint row
    reduced_costs: tuple  # one per variable


@dataclass(frozen=True)
class Unbounded:
    point: tuple
    ray: tuple


@dataclass(frozen=True)
class FarkasCertificate:
    """Aggregation of rows and bounds into an impossible inequality.

    row_mults[i] multiplies row i as written (so it is >= 0 for "<=" rows,
    <= 0 for ">=" rows, sign-free for "="); lower_mults/upper_mults are the
    nonnegative weights on x_j >= l_j and x_j <= u_j.  The weighted sum has a
    zero coefficient vector and a strictly negative right-hand side.
    """

    row_mults: tuple
    lower_mults: tuple
    upper_mults: tuple


@dataclass(frozen=True)
class Infeasible:
    farkas: FarkasCertificate


LpOutcome = object  # Optimal | Unbounded | Infeasible


class SimplexError(RuntimeError):
    """Internal invariant violation; indicates a solver bug."""


# status codes for nonbasic variables
_AT_LOWER, _AT_UPPER, _FREE, _FIXED = 0, 1, 2, 3

_MAX_PIVOTS = 50000


class _Tableau:
    """Bounded-variable simplex working state in equality form A x = b."""

    def __init__(self, cols, lo, up, rows, rhs):
        self.n = cols
        self.m = len(rows)
        self.lo = list(lo)
        self.up = list(up)
        # artificial columns live at indices n .. n+m-1
        self.sigma = []
        self.status = []
        self.val = []
        for j in range(self.n):
            l, u = self.lo[j], self.up[j]
            if l is not None and u is not None and l == u:
                self.status.append(_FIXED)
                self.val.append(l)
            elif l is not None:
                self.status.append(_AT_LOWER)
                self.val.append(l)
            elif u is not None:
                self.status.append(_AT_UPPER)
                self.val.append(u)
            else:
                self.status.append(_FREE)
                self.val.append(ZERO)
        residual = []
        for i in range(self.m):
            r = rhs[i] - dot(rows[i], self.val)
            residual.append(r)
            self.sigma.append(ONE if r >= 0 else -ONE)
        self.T = []
        self.beta = []
        for i in range(self.m):
            s = self.sigma[i]
            row = [s * v for v in rows[i]]
            row.extend(s * s if k == i else ZERO for k in range(self.m))
            # s*s == 1; keep the expression so the identity block is explicit
            self.T.append(row)
            self.beta.append(s * rhs[i])
        self.basis = [self.n + i for i in range(self.m)]
        for i in range(self.m):
            self.lo.append(ZERO)
            self.up.append(None)
            self.status.append(_AT_LOWER)  # placeholder; basics ignore status
            self.val.append(residual[i] * self.sigma[i])
        self.in_basis = [False] * (self.n + self.m)
        for b in self.basis:
            self.in_basis[b] = True

    def basic_values(self):
        xb = list(self.beta)
        T = self.T
        for j in range(self.n + self.m):
            if self.in_basis[j]:
                continue
            v = self.val[j]
            if v != 0:
                for k in range(self.m):
                    t = T[k][j]
                    if t != 0:
                        xb[k] -= t * v
        return xb

    def solution(self):
        x = list(self.val)
        xb = self.basic_values()
        for k, b in enumerate(self.basis):
            x[b] = xb[k]
        return x

    def pivot(self, row: int, col: int, leaving_status: int):
        T, beta = self.T, self.beta
        piv = T[row][col]
        inv = 1 / piv
        prow = [v * inv for v in T[row]]
        pbeta = beta[row] * inv
        for k in range(self.m):
            if k == row:
                continue
            f = T[k][col]
            if f != 0:
                rk = T[k]
                T[k] = [rk[j] - f * prow[j] for j in range(len(rk))]
                beta[k] -= f * pbeta
        T[row] = prow
        beta[row] = pbeta
        leaving = self.basis[row]
        self.basis[row] = col
        self.in_basis[col] = True
        self.in_basis[leaving] = False
        self.status[leaving] = leaving_status
        self.val[leaving] = self.lo[leaving] if leaving_status == _AT_LOWER else self.up[leaving]

    def run(self, cost, allow_artificial_enter=False):
        """Bland-rule simplex on the given cost vector.

        Returns ("optimal", x_basic) or ("unbounded", enter_col, direction).
        """
        total = self.n + self.m
        enter_limit = total if allow_artificial_enter else self.n
        for _ in range(_MAX_PIVOTS):
            xb = self.basic_values()
            cB = [cost[b] for b in self.basis]
            nonzero = [(k, cB[k]) for k in range(self.m) if cB[k] != 0]
            enter = -1
            direction = 0
            for j in range(enter_limit):
                if self.in_basis[j]:
                    continue
                st = self.status[j]
                if st == _FIXED:
                    continue
                d = cost[j]
                for k, cb in nonzero:
                    t = self.T[k][j]
                    if t != 0:
                        d -= cb * t
                if st == _AT_LOWER:
                    if d < 0:
                        enter, direction = j, 1
                        break
                elif st == _AT_UPPER:
                    if d > 0:
                        enter, direction = j, -1
                        break
                else:  # free
                    if d != 0:
                        enter, direction = j, (1 if d < 0 else -1)
                        break
            if enter < 0:
                return "optimal", xb
            # ratio test: candidates (step, tie-break variable index, kind)
            best_t = None
            best_var = None
            best_row = -1
            for k in range(self.m):
                coef = self.T[k][enter] * direction
                if coef > 0:
                    lb = self.lo[self.basis[k]]
                    if lb is None:
                        continue
                    t = (xb[k] - lb) / coef
                    hit = _AT_LOWER
                elif coef < 0:
                    ub = self.up[self.basis[k]]
                    if ub is None:
                        continue
                    t = (ub - xb[k]) / (-coef)
                    hit = _AT_UPPER
                else:
                    continue
                var = self.basis[k]
                if best_t is None or t < best_t or (t == best_t and var < best_var):
                    best_t, best_var, best_row, best_hit = t, var, k, hit
            own_t = None
            lo_e, up_e = self.lo[enter], self.up[enter]
            if lo_e is not None and up_e is not None:
                own_t = up_e - lo_e
            if own_t is not None and (best_t is None or own_t < best_t
                                      or (own_t == best_t and enter < best_var)):
                # bound flip, no basis change
                self.status[enter] = _AT_UPPER if direction > 0 else _AT_LOWER
                self.val[enter] = up_e if direction > 0 else lo_e
                continue
            if best_t is None:
                return "unbounded", enter, direction
            # entering variable's new value is recomputed from the tableau on
            # the next pass; record it as nonbasic bookkeeping cleared
            self.pivot(best_row, enter, best_hit)
        raise SimplexError("pivot limit exceeded")

    def duals(self, cost):
        """y = c_B B^{-1} via the artificial identity block."""
        cB = [cost[b] for b in self.basis]
        y = []
        for i in range(self.m):
            col = self.n + i
            acc = ZERO
            for k in range(self.m):
                if cB[k] != 0:
                    t = self.T[k][col]
                    if t != 0:
                        acc += cB[k] * t
            y.append(acc * self.sigma[i])
        return y

    def ray(self, enter: int, direction: int):
        r = [ZERO] * (self.n + self.m)
        r[enter] = rat(direction)
        for k in range(self.m):
            t = self.T[k][enter]
            if t != 0:
                r[self.basis[k]] = -t * rat(direction)
        return r


def _to_equality_form(lp: LinearProgram):
    """Append one slack per row: a_i x + s_i = b_i with rel-dependent bounds."""
    n, m = lp.num_vars, len(lp.constraints)
    cols = n + m
    lo = list(lp.lower) + [None] * m
    up = list(lp.upper) + [None] * m
    rows = []
    rhs = []
    for i, (row, rel, b) in enumerate(lp.constraints):
        full = list(row) + [ZERO] * m
        full[n + i] = ONE
        rows.append(full)
        rhs.append(b)
        if rel == LE:
            lo[n + i], up[n + i] = ZERO, None
        elif rel == GE:
            lo[n + i], up[n + i] = None, ZERO
        else:
            lo[n + i], up[n + i] = ZERO, ZERO
    return cols, lo, up, rows, rhs


def _phase_one(tab: _Tableau):
    cost = [ZERO] * tab.n + [ONE] * tab.m
    state, xb = tab.run(cost)
    if state != "optimal":
        raise SimplexError("phase one cannot be unbounded")
    total = ZERO
    for k, b in enumerate(tab.basis):
        if b >= tab.n:
            total += xb[k]
    if total > 0:
        return cost, False
    # drive artificials out of the basis where a structural pivot exists
    for k in range(tab.m):
        if tab.basis[k] < tab.n:
            continue
        target = -1
        for j in range(tab.n):
            if not tab.in_basis[j] and tab.status[j] != _FIXED and tab.T[k][j] != 0:
                target = j
                break
        if target >= 0:
            tab.pivot(k, target, _AT_LOWER)
    # pin any artificial that is still around (redundant row) at zero
    for j in range(tab.n, tab.n + tab.m):
        tab.up[j] = ZERO
        if not tab.in_basis[j]:
            tab.status[j] = _FIXED
            tab.val[j] = ZERO
    return cost, True


def _farkas_from_duals(lp: LinearProgram, y: Sequence) -> FarkasCertificate:
    """Turn phase-one duals into a verified row/bound aggregation."""
    n = lp.num_vars
    row_mults = tuple(-y[i] for i in range(len(lp.constraints)))
    lower_mults = []
    upper_mults = []
    for j in range(n):
        g = ZERO
        for i, (row, _, _) in enumerate(lp.constraints):
            if y[i] != 0 and row[j] != 0:
                g += (-y[i]) * row[j]
        # need Sum(row_mults * a_j) + u_j - l_j = 0
        if g > 0:
            lower_mults.append(g)
            upper_mults.append(ZERO)
        elif g < 0:
            lower_mults.append(ZERO)
            upper_mults.append(-g)
        else:
            lower_mults.append(ZERO)
            upper_mults.append(ZERO)
    cert = FarkasCertificate(row_mults, tuple(lower_mults), tuple(upper_mults))
    return _normalize_farkas(cert)


def _normalize_farkas(cert: FarkasCertificate) -> FarkasCertificate:
    flat = list(cert.row_mults) + list(cert.lower_mults) + list(cert.upper_mults)
    prim = primitive(flat)
    k = len(cert.row_mults)
    l = len(cert.lower_mults)
    return FarkasCertificate(tuple(prim[:k]), tuple(prim[k:k + l]), tuple(prim[k + l:]))


def verify_farkas(lp: LinearProgram, cert: FarkasCertificate) -> bool:
    """Exact check that the certificate aggregates to 0^T x <= negative."""
    n = lp.num_vars
    if len(cert.row_mults) != len(lp.constraints):
        return False
    coeff = [ZERO] * n
    rhs = ZERO
    for mult, (row, rel, b) in zip(cert.row_mults, lp.constraints):
        if rel == LE and mult < 0:
            return False
        if rel == GE and mult > 0:
            return False
        for j in range(n):
            coeff[j] += mult * row[j]
        rhs += mult * b
    for j in range(n):
        lmult, umult = cert.lower_mults[j], cert.upper_mults[j]
        if lmult < 0 or umult < 0:
            return False
        if lmult > 0:
            if lp.lower[j] is None:
                return False
            coeff[j] -= lmult
            rhs -= lmult * lp.lower[j]
        if umult > 0:
            if lp.upper[j] is None:
                return False
            coeff[j] += umult
            rhs += umult * lp.upper[j]
    return all(c == 0 for c in coeff) and rhs < 0


def verify_optimal(lp: LinearProgram, out: Optimal) -> bool:
    """Primal feasibility, dual sign/slackness conditions and exact value match."""
    n = lp.num_vars
    x = out.point
    if len(x) != n:
        return False
    sense = ONE if lp.minimize else -ONE
    for j in range(n):
        if lp.lower[j] is not None and x[j] < lp.lower[j]:
            return False
        if lp.upper[j] is not None and x[j] > lp.upper[j]:
            return False
    acts = []
    for row, rel, b in lp.constraints:
        v = dot(row, x)
        if rel == LE and v > b:
            return False
        if rel == GE and v < b:
            return False
        if rel == EQ and v != b:
            return False
        acts.append(v)
    if dot(lp.objective, x) != out.value:
        return False
    # dual conditions are stated for the internal min problem
    y = [sense * d for d in out.duals]
    d = [sense * d for d in out.reduced_costs]
    for i, (row, rel, b) in enumerate(lp.constraints):
        if rel == LE and y[i] > 0:
            return False
        if rel == GE and y[i] < 0:
            return False
        if y[i] != 0 and acts[i] != b:
            return False
    value = ZERO
    for i, (_, _, b) in enumerate(lp.constraints):
        value += y[i] * b
    for j in range(n):
        cj = sense * lp.objective[j]
        dj = cj
        for i, (row, _, _) in enumerate(lp.constraints):
            if y[i] != 0 and row[j] != 0:
                dj -= y[i] * row[j]
        if dj != d[j]:
            return False
        if dj > 0 and (lp.lower[j] is None or x[j] != lp.lower[j]):
            return False
        if dj < 0 and (lp.upper[j] is None or x[j] != lp.upper[j]):
            return False
        value += dj * x[j]
    return value == sense * out.value


def verify_unbounded(lp: LinearProgram, out: Unbounded) -> bool:
    n = lp.num_vars
    x, r = out.point, out.ray
    for j in range(n):
        if lp.lower[j] is not None and (x[j] < lp.lower[j] or r[j] < 0):
            return False
        if lp.upper[j] is not None and (x[j] > lp.upper[j] or r[j] > 0):
            return False
    for row, rel, b in lp.constraints:
        v, rv = dot(row, x), dot(row, r)
        if rel == LE and (v > b or rv > 0):
            return False
        if rel == GE and (v < b or rv < 0):
            return False
        if rel == EQ and (v != b or rv != 0):
            return False
    obj_dir = dot(lp.objective, r)
    return obj_dir < 0 if lp.minimize else obj_dir > 0


def lp_solve(lp: LinearProgram, check: bool = True, debug: bool = False) -> LpOutcome:
    """Solve exactly; deterministic via Bland's rule over the fixed variable order."""
    sense = ONE if lp.minimize else -ONE
    cols, lo, up, rows, rhs = _to_equality_form(lp)
    tab = _Tableau(cols, lo, up, rows, rhs)
    if debug:  # pragma: no cover - diagnostic aid
        _dump(tab, "initial")
    p1cost, feasible_ok = _phase_one(tab)
    if not feasible_ok:
        y = tab.duals(p1cost)
        cert = _farkas_from_duals(lp, y)
        if check and not verify_farkas(lp, cert):
            raise SimplexError("invalid infeasibility certificate")
        return Infeasible(cert)
    n = lp.num_vars
    cost = [sense * c for c in lp.objective] + [ZERO] * (cols - n) + [ZERO] * tab.m
    state = tab.run(cost)
    if debug:  # pragma: no cover
        _dump(tab, "final")
    if state[0] == "unbounded":
        _, enter, direction = state
        x = tab.solution()[:n]
        ray = tab.ray(enter, direction)[:n]
        out = Unbounded(tuple(x), tuple(ray))
        if check and not verify_unbounded(lp, out):
            raise SimplexError("invalid unboundedness certificate")
        return out
    x = tab.solution()[:n]
    y = tab.duals(cost)
    value = dot(lp.objective, tuple(x))
    reduced = []
    for j in range(n):
        dj = cost[j]
        for i, (row, _, _) in enumerate(lp.constraints):
            if y[i] != 0 and row[j] != 0:
                dj -= y[i] * row[j]
        reduced.append(sense * dj)
    out = Optimal(value, tuple(x), tuple(sense * yi for yi in y), tuple(reduced))
    if check and not verify_optimal(lp, out):
        raise SimplexError("invalid optimality certificate")
    return out


def _dump(tab: _Tableau, label: str) -> None:  # pragma: no cover
    print(f"-- tableau {label}: basis={tab.basis}")
    for k in range(tab.m):
        print("   ", [str(v) for v in tab.T[k]], "|", tab.beta[k])


# ---------------------------------------------------------------------------
# Convenience wrappers used across the package
# ---------------------------------------------------------------------------

def feasible(constraints, num_vars: int):
    """Phase-one result for a system of free variables: point or Farkas ray."""
    lp = make_lp([ZERO] * num_vars, constraints)
    out = lp_solve(lp)
    if isinstance(out, Infeasible):
        return out
    return out if isinstance(out, Optimal) else Optimal(ZERO, out.point, (), ())


def strict_feasible(constraints, num_vars: int):
    """Point satisfying every row with strictly positive slack, or None.

    Solves max s subject to row . x + s <= rhs and s <= 1; strictness is the
    exact sign of the optimum, never an epsilon test.
    """
    n = num_vars
    rows = []
    for row, rel, b in constraints:
        if rel != LE:
            raise ValueError("strict feasibility is defined for <= rows")
        rows.append((tuple(row) + (ONE,), LE, b))
    rows.append((tuple(ZERO for _ in range(n)) + (ONE,), LE, ONE))
    lp = make_lp([ZERO] * n + [-ONE], rows)
    out = lp_solve(lp)
    if not isinstance(out, Optimal):
        raise SimplexError("slack maximization must have an optimum")
    slack = out.point[n]
    if slack > 0:
        return tuple(out.point[:n]), slack
    return None
