"""Exact rational dense linear programming for likelihood-existence
certification.

The solver is a primal simplex on a dense tableau with bounded variables
and Bland's anti-cycling rule; every number is an exact rational, so
verdicts carry no tolerance.  Problem sizes here are a handful of equality
rows by a few hundred columns, where a dense exact tableau is the simplest
correct tool.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover - gmpy2 is an optional speedup
    _Q = Fraction


class LPError(ValueError):
    """Malformed linear program."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x.numerator, x.denominator) if hasattr(x, "numerator") else Fraction(x)


@dataclass
class DenseLP:
    """max <c, x> subject to A_eq x = b_eq and lb <= x <= ub (ub may be None
    for unbounded above; lower bounds must be finite)."""

    c: list
    a_eq: list
    b_eq: list
    bounds: list

    def __post_init__(self):
        n = len(self.c)
        for row in self.a_eq:
            if len(row) != n:
                raise LPError("row length mismatch")
        if len(self.b_eq) != len(self.a_eq):
            raise LPError("rhs length mismatch")
        if len(self.bounds) != n:
            raise LPError("bounds length mismatch")


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: Fraction | None = None
    solution: list | None = None
    duals: list | None = None
    pivots: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Dense bounded-variable simplex state over exact rationals."""

    def __init__(self, a, b, bounds):
        self.m = len(a)
        self.n = len(bounds)
        self.lb = [bd[0] for bd in bounds]
        self.ub = [bd[1] for bd in bounds]
        zero = _Q(0)
        one = _Q(1)
        # nonbasic structural variables start at their lower bound
        self.at_upper = [False] * (self.n + self.m)
        resid = []
        for i in range(self.m):
            r = b[i]
            for j in range(self.n):
                if a[i][j] != 0 and self.lb[j] != 0:
                    r -= a[i][j] * self.lb[j]
            resid.append(r)
        # artificial variables: columns n..n+m-1, sign chosen so values >= 0;
        # rows are pre-scaled by that sign so the starting basis is an identity
        self.sign = [one if r >= 0 else -one for r in resid]
        self.lb += [zero] * self.m
        self.ub += [None] * self.m
        self.tab = []
        for i in range(self.m):
            row = [self.sign[i] * a[i][j] for j in range(self.n)]
            row += [one if k == i else zero for k in range(self.m)]
            self.tab.append(row)
        self.basis = [self.n + i for i in range(self.m)]
        self.bval = [abs(r) for r in resid]
        self.pivots = 0
        self.pivot_limit = math.comb(self.n + 2 * self.m, self.m) if self.m else 1

    def nonbasic_value(self, j):
        return self.ub[j] if self.at_upper[j] else self.lb[j]

    def optimize(self, c) -> str:
        """Run primal simplex for max <c, x>; returns 'optimal' or
        'unbounded'.  Bland's rule: smallest eligible entering index,
        smallest leaving variable index among ratio ties.

        The reduced-cost row is carried in the tableau and updated per
        pivot, so pricing scans are comparisons only.
        """
        zero = _Q(0)
        in_basis = [False] * (self.n + self.m)
        for j in self.basis:
            in_basis[j] = True
        # reduced costs z[j] = c[j] - c_B . T[:, j], computed fresh per call
        z = list(c)
        for i in range(self.m):
            cb = c[self.basis[i]]
            if cb != 0:
                row = self.tab[i]
                for j in range(self.n + self.m):
                    if row[j] != 0:
                        z[j] -= cb * row[j]
        while True:
            enter = -1
            direction = 0
            for j in range(self.n + self.m):
                if in_basis[j] or self.lb[j] == self.ub[j]:
                    continue
                if self.at_upper[j]:
                    if z[j] < 0:
                        enter, direction = j, -1
                        break
                elif z[j] > 0:
                    enter, direction = j, 1
                    break
            if enter < 0:
                return "optimal"

            # ratio test: entering moves by delta >= 0 in 'direction'
            best = None  # (delta, leaving_var, row, to_upper); var=-1 => bound flip
            if self.ub[enter] is not None:
                best = (self.ub[enter] - self.lb[enter], -1, -1, False)
            for i in range(self.m):
                coeff = self.tab[i][enter] * direction
                if coeff == 0:
                    continue
                bj = self.basis[i]
                if coeff > 0:
                    delta = (self.bval[i] - self.lb[bj]) / coeff
                    hits_upper = False
                else:
                    if self.ub[bj] is None:
                        continue
                    delta = (self.ub[bj] - self.bval[i]) / (-coeff)
                    hits_upper = True
                if best is None or delta < best[0] or (
                    delta == best[0] and best[1] != -1 and bj < best[1]
                ):
                    best = (delta, bj, i, hits_upper)
            if best is None:
                return "unbounded"
            delta = best[0]

            # update basic values and the entering variable's value
            if delta != 0:
                for i in range(self.m):
                    coeff = self.tab[i][enter]
                    if coeff != 0:
                        self.bval[i] -= coeff * direction * delta

            self.pivots += 1
            if self.pivots > self.pivot_limit:
                raise RuntimeError(
                    "simplex pivot count exceeded the combinatorial bound; "
                    "anti-cycling invariant violated"
                )

            if best[1] == -1:
                self.at_upper[enter] = not self.at_upper[enter]
                continue

            row = best[2]
            leave = self.basis[row]
            enter_val = self.nonbasic_value(enter) + direction * delta
            piv = self.tab[row][enter]
            inv = _Q(1) / piv
            rr = [v * inv for v in self.tab[row]]
            self.tab[row] = rr
            for i in range(self.m):
                if i == row:
                    continue
                f = self.tab[i][enter]
                if f != 0:
                    ri = self.tab[i]
                    self.tab[i] = [
                        a - f * b if b != 0 else a for a, b in zip(ri, rr)
                    ]
            fz = z[enter]
            if fz != 0:
                z = [a - fz * b if b != 0 else a for a, b in zip(z, rr)]
            self.basis[row] = enter
            self.bval[row] = enter_val
            in_basis[enter] = True
            in_basis[leave] = False
            self.at_upper[leave] = best[3]

    def solution(self):
        vals = [self.nonbasic_value(j) for j in range(self.n)]
        for i, j in enumerate(self.basis):
            if j < self.n:
                vals[j] = self.bval[i]
        return vals

    def duals(self, c):
        """Simplex multipliers c_B * Binv, read off the artificial columns."""
        pi = []
        for i in range(self.m):
            acc = _Q(0)
            col = self.n + i
            for r in range(self.m):
                cb = c[self.basis[r]]
                if cb != 0 and self.tab[r][col] != 0:
                    acc += cb * self.tab[r][col]
            pi.append(acc * self.sign[i])
        return pi


def simplex_solve(lp: DenseLP) -> LPResult:
    """Exact optimum of a dense LP: Optimal(value, solution), Infeasible, or
    Unbounded."""
    a = [[_Q(_frac(v)) for v in row] for row in lp.a_eq]
    b = [_Q(_frac(v)) for v in lp.b_eq]
    c = [_Q(_frac(v)) for v in lp.c]
    bounds = []
    for lb, ub in lp.bounds:
        if lb is None:
            raise LPError("lower bounds must be finite")
        bounds.append((_Q(_frac(lb)), None if ub is None else _Q(_frac(ub))))
    t = _Tableau(a, b, bounds)

    to_frac = lambda q: Fraction(q.numerator, q.denominator)
    phase1 = [_Q(0)] * t.n + [_Q(-1)] * t.m
    status = t.optimize(phase1)
    if status != "optimal":  # pragma: no cover - phase 1 is always bounded
        raise RuntimeError("phase 1 cannot be unbounded")
    infeas = sum((t.bval[i] for i in range(t.m) if t.basis[i] >= t.n), _Q(0))
    if infeas > 0:
        # phase-1 duals are a Farkas certificate of infeasibility
        duals = [to_frac(v) for v in t.duals(phase1)]
        return LPResult("infeasible", duals=duals, pivots=t.pivots)
    # pin any residual artificials at zero for phase 2
    for j in range(t.n, t.n + t.m):
        t.ub[j] = _Q(0)

    full_c = c + [_Q(0)] * t.m
    status = t.optimize(full_c)
    if status == "unbounded":
        return LPResult("unbounded", pivots=t.pivots)
    sol = t.solution()
    value = sum((c[j] * sol[j] for j in range(t.n) if sol[j] != 0), _Q(0))
    duals = t.duals(full_c)
    return LPResult(
        "optimal",
        value=to_frac(value),
        solution=[to_frac(v) for v in sol],
        duals=[to_frac(v) for v in duals],
        pivots=t.pivots,
    )


@dataclass
class RelintVerdict:
    inside: bool
    s_star: Fraction | None
    z: list | None
    status: str


def relint_feasibility(B: Sequence[Sequence], x: Sequence) -> RelintVerdict:
    """Relative-interior membership by LP: with B's columns spanning the
    support (an all-ones normalization row appended) and x the matching
    right-hand side, maximize s subject to Bz = x, z_i >= s, s >= 0.
    The point is in the relative interior exactly when s* > 0.

    Internally z is substituted as w + s*1 with w >= 0, which keeps the
    equality system at its original row count.
    """
    rows = [[_frac(v) for v in row] for row in B]
    rhs = [_frac(v) for v in x]
    if len(rows) != len(rhs):
        raise LPError("x dimension mismatch with B")
    ncols = len(rows[0]) if rows else 0
    for row in rows:
        if len(row) != ncols:
            raise LPError("ragged B")
    a = [row + [sum(row, Fraction(0))] for row in rows]
    c = [Fraction(0)] * ncols + [Fraction(1)]
    bounds = [(Fraction(0), None)] * (ncols + 1)
    res = simplex_solve(DenseLP(c, a, rhs, bounds))
    if res.status != "optimal":
        return RelintVerdict(False, None, None, res.status)
    s = res.solution[-1]
    z = [w + s for w in res.solution[:-1]]
    return RelintVerdict(s > 0, s, z, "optimal")


@dataclass
class GordanResult:
    """Exactly one alternative holds: (1) B u > 0 for some u, or
    (2) B^T y = 0 for some y >= 0, y != 0."""

    alternative: int
    x_witness: list | None = None
    y_witness: list | None = None


def gordan_alternative(B: Sequence[Sequence]) -> GordanResult:
    """Decide Gordan's alternative for the rows of B via the exact LP
    max <1, y> s.t. B^T y = 0, 0 <= y <= 1: a positive optimum yields the
    second alternative with witness y*, otherwise the dual multipliers
    certify the first.  Witnesses are verified by substitution."""
    rows = [[_frac(v) for v in row] for row in B]
    n = len(rows)
    if n == 0:
        raise LPError("empty B")
    k = len(rows[0])
    a = [[rows[i][j] for i in range(n)] for j in range(k)]  # B^T
    b = [Fraction(0)] * k
    c = [Fraction(1)] * n
    bounds = [(Fraction(0), Fraction(1))] * n
    res = simplex_solve(DenseLP(c, a, b, bounds))
    if res.status != "optimal":  # pragma: no cover - box-constrained
        raise RuntimeError(f"Gordan LP must be bounded and feasible: {res.status}")
    if res.value > 0:
        y = res.solution
        for j in range(k):
            acc = sum((rows[i][j] * y[i] for i in range(n)), Fraction(0))
            if acc != 0:
                raise RuntimeError("alternative-2 witness failed verification")
        return GordanResult(2, y_witness=y)
    u = res.duals
    for i in range(n):
        acc = sum((rows[i][j] * u[j] for j in range(k)), Fraction(0))
        if acc <= 0:
            raise RuntimeError("alternative-1 witness failed verification")
    return GordanResult(1, x_witness=u)


def lp_to_json(lp: DenseLP) -> str:
    """JSON with decimal-string rationals."""
    fmt = lambda v: str(_frac(v))
    doc = {
        "c": [fmt(v) for v in lp.c],
        "a_eq": [[fmt(v) for v in row] for row in lp.a_eq],
        "b_eq": [fmt(v) for v in lp.b_eq],
        "bounds": [
            [fmt(lb), None if ub is None else fmt(ub)] for lb, ub in lp.bounds
        ],
    }
    return json.dumps(doc, separators=(",", ":"), sort_keys=True)


def lp_from_json(text: str) -> DenseLP:
    doc = json.loads(text)
    parse = lambda s: Fraction(s)
    return DenseLP(
        c=[parse(v) for v in doc["c"]],
        a_eq=[[parse(v) for v in row] for row in doc["a_eq"]],
        b_eq=[parse(v) for v in doc["b_eq"]],
        bounds=[
            (parse(lb), None if ub is None else parse(ub))
            for lb, ub in doc["bounds"]
        ],
    )
