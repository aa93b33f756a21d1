"""Exact rational linear programming.

The core is a fraction-free (integer-preserving) tableau simplex: the tableau is
kept as an integer matrix over the common denominator |det B|, so every pivot is
an exact integer update with no gcd work. Entering variables follow Dantzig's
rule and the leaving row is chosen by the lexicographic ratio test, which keeps
termination guaranteed on degenerate problems. Problems with many more rows than columns are solved
through their dual, and the answer is mapped back.

Every OPTIMAL result carries a primal solution and dual multipliers that are
re-checked exactly (feasibility of both plus equal objectives) before return.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import MalformedLP
from .rational import as_fraction, lcm_all


class Sense(str, enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "="


class Status(str, enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


class SolverMode(str, enum.Enum):
    EXACT = "EXACT"
    FLOAT_PRESOLVE_EXACT_VERIFY = "FLOAT_PRESOLVE_EXACT_VERIFY"


@dataclass
class LPInstance:
    """optimize c.x subject to rows[i] . x (sense_i) rhs_i.

    Rows are sparse maps column -> coefficient. Variables are nonnegative unless
    listed in `free`. `row_labels` / `col_labels` are free-form metadata linking
    rows and columns to cube points or monomials.
    """

    objective: list
    rows: list
    senses: list
    rhs: list
    maximize: bool = False
    free: set = field(default_factory=set)
    row_labels: list | None = None
    col_labels: list | None = None

    def __post_init__(self):
        n = len(self.objective)
        if not (len(self.rows) == len(self.senses) == len(self.rhs)):
            raise MalformedLP("rows, senses and rhs differ in length")
        self.objective = [as_fraction(c) for c in self.objective]
        self.rhs = [as_fraction(b) for b in self.rhs]
        self.senses = [Sense(s) for s in self.senses]
        clean = []
        for r in self.rows:
            row = {}
            for j, v in dict(r).items():
                if not 0 <= j < n:
                    raise MalformedLP(f"column {j} out of range 0..{n - 1}")
                v = as_fraction(v)
                if v:
                    row[j] = v
            clean.append(row)
        self.rows = clean
        self.free = set(self.free)
        if any(not 0 <= j < n for j in self.free):
            raise MalformedLP("free variable index out of range")
        if self.row_labels is not None and len(self.row_labels) != len(self.rows):
            raise MalformedLP("row_labels length mismatch")
        if self.col_labels is not None and len(self.col_labels) != n:
            raise MalformedLP("col_labels length mismatch")

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, x)), Fraction(0))

    def row_value(self, i: int, x: Sequence[Fraction]) -> Fraction:
        return sum((v * x[j] for j, v in self.rows[i].items()), Fraction(0))

    def is_feasible(self, x: Sequence[Fraction]) -> bool:
        if len(x) != self.n_vars:
            return False
        for j, v in enumerate(x):
            if j not in self.free and v < 0:
                return False
        for i, s in enumerate(self.senses):
            lhs = self.row_value(i, x)
            b = self.rhs[i]
            if (s == Sense.LE and lhs > b) or (s == Sense.GE and lhs < b) or (s == Sense.EQ and lhs != b):
                return False
        return True

    def min_cost(self) -> list[Fraction]:
        return [-c for c in self.objective] if self.maximize else list(self.objective)

    def dual_feasible(self, y: Sequence[Fraction]) -> bool:
        """y is feasible for the dual of the minimization form of this LP."""
        if len(y) != self.n_rows:
            return False
        for i, s in enumerate(self.senses):
            if (s == Sense.GE and y[i] < 0) or (s == Sense.LE and y[i] > 0):
                return False
        c = self.min_cost()
        aty = [Fraction(0)] * self.n_vars
        for i, row in enumerate(self.rows):
            if y[i]:
                for j, v in row.items():
                    aty[j] += v * y[i]
        for j in range(self.n_vars):
            if j in self.free:
                if aty[j] != c[j]:
                    return False
            elif aty[j] > c[j]:
                return False
        return True

    def dual_value(self, y: Sequence[Fraction]) -> Fraction:
        return sum((b * v for b, v in zip(self.rhs, y)), Fraction(0))

    def farkas_valid(self, z: Sequence[Fraction]) -> bool:
        """z proves infeasibility: sign-correct, A^T z <= 0 on nonnegative columns,
        = 0 on free columns, and b.z > 0."""
        if len(z) != self.n_rows:
            return False
        for i, s in enumerate(self.senses):
            if (s == Sense.GE and z[i] < 0) or (s == Sense.LE and z[i] > 0):
                return False
        atz = [Fraction(0)] * self.n_vars
        for i, row in enumerate(self.rows):
            if z[i]:
                for j, v in row.items():
                    atz[j] += v * z[i]
        for j in range(self.n_vars):
            if (j in self.free and atz[j] != 0) or (j not in self.free and atz[j] > 0):
                return False
        return self.dual_value(z) > 0


@dataclass
class LPResult:
    status: Status
    x: list | None = None
    objective: Fraction | None = None
    dual: list | None = None  # multipliers for the minimization form
    farkas: list | None = None
    ray: list | None = None
    mode: SolverMode = SolverMode.EXACT
    pivots: int = 0


# ---------------------------------------------------------------- core simplex

class _Tableau:
    """Integer tableau for min c.x, Ax = b, x >= 0 with one artificial per row.

    Row layout: m constraint rows, then the phase-1 and phase-2 reduced-cost rows.
    Column layout: n structural, m artificial, rhs. Actual values are T / D.
    """

    def __init__(self, A: np.ndarray, b: np.ndarray, c: np.ndarray):
        m, n = A.shape
        self.m, self.n = m, n
        T = np.zeros((m + 2, n + m + 1), dtype=object)
        T[:m, :n] = A
        T[:m, n:n + m] = np.identity(m, dtype=np.int64).astype(object)
        T[:m, -1] = b
        T[m, :n] = -A.sum(axis=0) if m else 0
        T[m, -1] = -b.sum() if m else 0
        T[m + 1, :n] = c
        self.T = T
        self.D = 1
        self.basis = list(range(n, n + m))
        self.pivots = 0

    def pivot(self, r: int, q: int):
        T = self.T
        p = T[r, q]
        col = T[:, q].copy()
        rowr = T[r, :].copy()
        T = (T * p - np.outer(col, rowr)) // self.D
        T[r, :] = rowr
        D = p
        if D < 0:
            T = -T
            D = -D
        self.T, self.D = T, D
        self.basis[r] = q
        self.pivots += 1

    def _lex_less(self, i: int, j: int, q: int) -> bool:
        """Row i beats row j in the lexicographic ratio test on column q."""
        T, n, m = self.T, self.n, self.m
        ci, cj = T[i, q], T[j, q]
        lhs, rhs = T[i, -1] * cj, T[j, -1] * ci
        if lhs != rhs:
            return lhs < rhs
        for k in range(n, n + m):
            lhs, rhs = T[i, k] * cj, T[j, k] * ci
            if lhs != rhs:
                return lhs < rhs
        return self.basis[i] < self.basis[j]

    def run(self, cost_row: int, allow_art: bool = False) -> str:
        """Minimize the objective in `cost_row`; returns 'optimal' or 'unbounded:<col>'.

        Dantzig entering rule with the lexicographic ratio test, which cannot cycle
        because the rows of the basis inverse are carried in the artificial columns.
        """
        m, n = self.m, self.n
        ncols = n + m if allow_art else n
        while True:
            if cost_row == m and self.T[m, -1] == 0:
                return "optimal"  # phase 1 has reached zero infeasibility
            z = self.T[cost_row, :ncols]
            neg = np.flatnonzero(z < 0)
            if neg.size == 0:
                return "optimal"
            q = int(neg[np.argmin(z[neg])])
            col = self.T[:m, q]
            best = None
            for i in np.flatnonzero(col > 0):
                i = int(i)
                if best is None or self._lex_less(i, best, q):
                    best = i
            if best is None:
                return f"unbounded:{q}"
            self.pivot(best, q)

    def drive_out_artificials(self):
        m, n = self.m, self.n
        for r in range(m):
            if self.basis[r] >= n:
                row = self.T[r, :n]
                nz = np.flatnonzero(row != 0)
                if nz.size:
                    self.pivot(r, int(nz[0]))

    def primal(self) -> list[Fraction]:
        x = [Fraction(0)] * (self.n + self.m)
        for r, j in enumerate(self.basis):
            x[j] = Fraction(int(self.T[r, -1]), self.D)
        return x

    def multipliers(self, cost_row: int, art_cost: int) -> list[Fraction]:
        """y with reduced cost of artificial k equal to art_cost - y_k."""
        n = self.n
        return [art_cost - Fraction(int(self.T[cost_row, n + k]), self.D) for k in range(self.m)]


def _float_crash(tab: _Tableau, A: np.ndarray, b: np.ndarray, c: np.ndarray) -> bool:
    """Pivot a floating-point optimal basis into the tableau.

    Support columns of the float optimum enter first; the remaining artificial rows are
    then filled with columns whose float reduced cost is zero, so the exact basis is
    usually both primal and dual feasible. Returns True if the basis is exactly primal
    feasible with every artificial at zero; otherwise the caller restarts from scratch.
    """
    try:
        from scipy.optimize import linprog
    except ImportError:  # pragma: no cover
        return False
    m, n = A.shape
    Af = A.astype(float)
    res = linprog(c.astype(float), A_eq=Af, b_eq=b.astype(float),
                  bounds=[(0, None)] * n, method="highs")
    if res.status != 0:
        return False
    xs = res.x
    reduced = c.astype(float) - res.eqlin.marginals @ Af
    scale = 1e-9 * max(1.0, float(np.abs(c.astype(float)).max(initial=0)))
    support = [int(j) for j in np.argsort(-xs) if xs[j] > 1e-9]
    tight = [int(j) for j in np.argsort(np.abs(reduced))
             if abs(reduced[j]) <= scale and xs[j] <= 1e-9]
    for q in support + tight:
        if all(j < n for j in tab.basis):
            break
        col = tab.T[:m, q]
        best, bestv = None, 0
        for r in range(m):
            if tab.basis[r] >= n and col[r] != 0 and abs(col[r]) > bestv:
                best, bestv = r, abs(col[r])
        if best is not None:
            tab.pivot(best, q)
    rhs = tab.T[:m, -1]
    for r in range(m):
        if rhs[r] < 0:
            return False
        if tab.basis[r] >= n and rhs[r] != 0:
            return False
    return True


def _solve_standard(A: np.ndarray, b: np.ndarray, c: np.ndarray, use_float: bool):
    """min c.x, Ax = b, x >= 0 with integer A, b >= 0, integer c.

    Returns (status, x, y, extra, pivots) where y are multipliers (optimal case)
    or a Farkas vector y with y.A >= 0, y.b < 0 (infeasible case).
    """
    m, n = A.shape
    tab = _Tableau(A, b, c)
    if use_float and m and n:
        ok = _float_crash(tab, A, b, c)
        if not ok:
            tab = _Tableau(A, b, c)
    tab.run(m)
    phase1 = Fraction(-int(tab.T[m, -1]), tab.D)
    if phase1 > 0:
        w = tab.multipliers(m, 1)
        return Status.INFEASIBLE, None, [-v for v in w], None, tab.pivots
    tab.drive_out_artificials()
    out = tab.run(m + 1)
    if out.startswith("unbounded"):
        q = int(out.split(":")[1])
        ray = [Fraction(0)] * n
        ray[q] = Fraction(1)
        for r, j in enumerate(tab.basis):
            if j < n:
                ray[j] = -Fraction(int(tab.T[r, q]), tab.D)
        return Status.UNBOUNDED, None, None, ray, tab.pivots
    x = tab.primal()[:n]
    y = tab.multipliers(m + 1, 0)
    return Status.OPTIMAL, x, y, None, tab.pivots


# ---------------------------------------------------------------- general form

def _to_standard(inst: LPInstance):
    """Columns: one per nonnegative variable, two per free variable, one slack per
    inequality. Rows scaled to integers and flipped so that b >= 0."""
    col_of = []  # (var, sign)
    for j in range(inst.n_vars):
        col_of.append((j, 1))
        if j in inst.free:
            col_of.append((j, -1))
    var_cols: dict[int, list[tuple[int, int]]] = {}
    for k, (j, s) in enumerate(col_of):
        var_cols.setdefault(j, []).append((k, s))
    n_struct = len(col_of)
    slack_rows = [i for i, s in enumerate(inst.senses) if s != Sense.EQ]
    n = n_struct + len(slack_rows)
    m = inst.n_rows
    A = np.zeros((m, n), dtype=object)
    b = np.zeros(m, dtype=object)
    scales = []
    slack_k = n_struct
    for i, row in enumerate(inst.rows):
        L = lcm_all([v.denominator for v in row.values()] + [inst.rhs[i].denominator])
        sign = -1 if inst.rhs[i] < 0 else 1
        for j, v in row.items():
            for k, s in var_cols[j]:
                A[i, k] = sign * s * int(v * L)
        if inst.senses[i] != Sense.EQ:
            A[i, slack_k] = sign * (1 if inst.senses[i] == Sense.LE else -1)
            slack_k += 1
        b[i] = sign * int(inst.rhs[i] * L)
        scales.append(sign * L)
    cost = inst.min_cost()
    cL = lcm_all(v.denominator for v in cost) if cost else 1
    c = np.zeros(n, dtype=object)
    for k, (j, s) in enumerate(col_of):
        c[k] = s * int(cost[j] * cL)
    return A, b, c, col_of, scales, cL


def _solve_direct(inst: LPInstance, use_float: bool) -> LPResult:
    A, b, c, col_of, scales, cL = _to_standard(inst)
    status, xs, y, ray, piv = _solve_standard(A, b, c, use_float)
    mode = SolverMode.FLOAT_PRESOLVE_EXACT_VERIFY if use_float else SolverMode.EXACT
    if status == Status.INFEASIBLE:
        # y.A_std >= 0 and y.b_std < 0; z = -y in original row units
        z = [-y[i] * scales[i] for i in range(inst.n_rows)]
        return LPResult(Status.INFEASIBLE, farkas=z, mode=mode, pivots=piv)
    if status == Status.UNBOUNDED:
        d = [Fraction(0)] * inst.n_vars
        for k, (j, s) in enumerate(col_of):
            d[j] += s * ray[k]
        return LPResult(Status.UNBOUNDED, ray=d, mode=mode, pivots=piv)
    x = [Fraction(0)] * inst.n_vars
    for k, (j, s) in enumerate(col_of):
        x[j] += s * xs[k]
    dual = [y[i] * scales[i] / cL for i in range(inst.n_rows)]
    return LPResult(Status.OPTIMAL, x=x, objective=inst.value(x), dual=dual, mode=mode, pivots=piv)


def dual_instance(inst: LPInstance) -> LPInstance:
    """The LP dual of the minimization form, itself written as a minimization.

    Variables are the row multipliers y (with LE-row multipliers negated so that
    all are nonnegative or free); objective min -b.y.
    """
    c = inst.min_cost()
    flip = [s == Sense.LE for s in inst.senses]
    cols: list[dict[int, Fraction]] = [dict() for _ in range(inst.n_vars)]
    for i, row in enumerate(inst.rows):
        sgn = -1 if flip[i] else 1
        for j, v in row.items():
            cols[j][i] = sgn * v
    rows, senses, rhs = [], [], []
    for j in range(inst.n_vars):
        rows.append(cols[j])
        senses.append(Sense.EQ if j in inst.free else Sense.LE)
        rhs.append(c[j])
    objective = [-(-b if flip[i] else b) for i, b in enumerate(inst.rhs)]
    free = {i for i, s in enumerate(inst.senses) if s == Sense.EQ}
    return LPInstance(objective, rows, senses, rhs, maximize=False, free=free)


def solve_lp(inst: LPInstance, mode: SolverMode | str | None = None, dualize: bool | None = None) -> LPResult:
    """Solve exactly. `mode` None picks float presolve for larger problems."""
    if not isinstance(inst, LPInstance):
        raise MalformedLP("expected an LPInstance")
    size = inst.n_rows * max(inst.n_vars, 1)
    if mode is None:
        mode = SolverMode.FLOAT_PRESOLVE_EXACT_VERIFY if size > 20000 else SolverMode.EXACT
    mode = SolverMode(mode)
    use_float = mode == SolverMode.FLOAT_PRESOLVE_EXACT_VERIFY
    if dualize is None:
        dualize = inst.n_rows > 2 * inst.n_vars + 4
    if dualize:
        dinst = dual_instance(inst)
        dres = _solve_direct(dinst, use_float)
        if dres.status == Status.OPTIMAL:
            flip = [s == Sense.LE for s in inst.senses]
            y = [-v if flip[i] else v for i, v in enumerate(dres.x)]
            x = [-u for u in dres.dual]
            if inst.is_feasible(x) and inst.dual_feasible(y) and inst.value(x) == (
                    -inst.dual_value(y) if inst.maximize else inst.dual_value(y)):
                return LPResult(Status.OPTIMAL, x=x, objective=inst.value(x), dual=y,
                                mode=mode, pivots=dres.pivots)
        # dual infeasible or unbounded: fall through to the direct solve
    res = _solve_direct(inst, use_float)
    if res.status == Status.OPTIMAL:
        target = -res.objective if inst.maximize else res.objective
        if not (inst.is_feasible(res.x) and inst.dual_feasible(res.dual)
                and inst.dual_value(res.dual) == target):
            raise AssertionError("exact re-check of LP optimum failed")
    elif res.status == Status.INFEASIBLE:
        if not inst.farkas_valid(res.farkas):
            raise AssertionError("Farkas certificate failed exact re-check")
    return res
