"""Primal and dual LPs for approximate, one-sided and threshold degree.

Polynomials are always expressed in the 0/1 index variables of the cube, also for
functions in the +-1 convention; degree is unaffected by that affine change.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .boolfn import Convention, PartialBoolFn, popcounts
from .errors import EmptyDomain, InvalidParams, NotADualWitness
from .lp import LPInstance, LPResult, Sense, SolverMode, Status, solve_lp
from .polylib import CubeFn, MultilinearPoly
from .rational import as_fraction, fmt
from .verify import Check, DualKind, WitnessReport, verify_dual


class Measure(str, enum.Enum):
    APPROX = "APPROX"
    ONE_SIDED = "ONE_SIDED"
    THRESHOLD = "THRESHOLD"

    @classmethod
    def parse(cls, s) -> "Measure":
        if isinstance(s, Measure):
            return s
        key = str(s).upper().replace("-", "_")
        return {"ONESIDED": cls.ONE_SIDED}.get(key) or cls(key)

    @property
    def dual_kind(self) -> DualKind:
        return {Measure.APPROX: DualKind.APPROX, Measure.ONE_SIDED: DualKind.ONESIDED,
                Measure.THRESHOLD: DualKind.THRESHOLD}[self]


def monomials(m: int, d: int) -> list[int]:
    """Bitmasks of size <= d, ordered by size then value."""
    if d < 0:
        return []
    pc = popcounts(m)
    masks = [S for S in range(1 << m) if pc[S] <= d]
    return sorted(masks, key=lambda S: (int(pc[S]), S))


def _subsets_of(x: int, monos: list[int]) -> list[int]:
    return [k for k, S in enumerate(monos) if S & x == S]


def _targets(f: PartialBoolFn) -> list[int | None]:
    return [f.numeric(x) for x in range(f.size)]


# ---------------------------------------------------------------- LP builders

def approx_primal(f: PartialBoolFn, d: int) -> LPInstance:
    """min eps s.t. |p - f| <= eps on the domain and |p| <= 1 + eps off it.

    Columns: coefficients of the monomials (free), then eps (free).
    """
    monos = monomials(f.arity, d)
    e = len(monos)
    rows, senses, rhs, labels = [], [], [], []
    for x, v in enumerate(_targets(f)):
        row = {k: 1 for k in _subsets_of(x, monos)}
        lo, hi = (v, v) if v is not None else (-1, 1)
        rows.append({**row, e: -1}); senses.append(Sense.LE); rhs.append(hi); labels.append((x, "upper"))
        rows.append({**row, e: 1}); senses.append(Sense.GE); rhs.append(lo); labels.append((x, "lower"))
    obj = [0] * e + [1]
    return LPInstance(obj, rows, senses, rhs, maximize=False, free=set(range(e + 1)),
                      row_labels=labels, col_labels=monos + ["eps"])


def approx_dual(f: PartialBoolFn, d: int) -> LPInstance:
    """max sum_D psi f - sum_{not D} |psi| s.t. ||psi||_1 = 1 and psi _|_ chi_S, |S| <= d.

    psi = psi_plus - psi_minus; columns 2x and 2x+1 hold psi_plus(x), psi_minus(x).
    """
    monos = monomials(f.arity, d)
    rows = [dict() for _ in monos]
    obj = []
    for x, v in enumerate(_targets(f)):
        for k in _subsets_of(x, monos):
            rows[k][2 * x] = 1
            rows[k][2 * x + 1] = -1
        if v is None:
            obj += [-1, -1]
        else:
            obj += [v, -v]
    senses = [Sense.EQ] * len(monos)
    rhs = [0] * len(monos)
    rows.append({j: 1 for j in range(2 * f.size)})
    senses.append(Sense.EQ)
    rhs.append(1)
    return LPInstance(obj, rows, senses, rhs, maximize=True,
                      row_labels=monos + ["norm"], col_labels=[(x, s) for x in range(f.size) for s in "+-"])


def onesided_primal(f: PartialBoolFn, d: int) -> LPInstance:
    """min eps s.t. |p - 1| <= eps on f^-1(1) and p <= eps on f^-1(0)."""
    monos = monomials(f.arity, d)
    e = len(monos)
    rows, senses, rhs, labels = [], [], [], []
    for x in range(f.size):
        v = f.numeric(x)
        if v is None:
            continue
        row = {k: 1 for k in _subsets_of(x, monos)}
        if v == 1:
            rows.append({**row, e: -1}); senses.append(Sense.LE); rhs.append(1); labels.append((x, "upper"))
            rows.append({**row, e: 1}); senses.append(Sense.GE); rhs.append(1); labels.append((x, "lower"))
        else:
            rows.append({**row, e: -1}); senses.append(Sense.LE); rhs.append(0); labels.append((x, "upper"))
    return LPInstance([0] * e + [1], rows, senses, rhs, maximize=False, free=set(range(e + 1)),
                      row_labels=labels, col_labels=monos + ["eps"])


def onesided_dual(f: PartialBoolFn, d: int) -> LPInstance:
    """max sum_{f=1} psi s.t. ||psi||_1 = 1, supp psi in D, psi <= 0 on f^-1(0),
    psi _|_ chi_S for |S| <= d. Domain points with f=1 carry psi_plus / psi_minus
    columns; points with f=0 carry a single column for -psi."""
    monos = monomials(f.arity, d)
    rows = [dict() for _ in monos]
    obj, labels = [], []
    for x in range(f.size):
        v = f.numeric(x)
        if v is None:
            continue
        subs = _subsets_of(x, monos)
        if v == 1:
            jp, jm = len(obj), len(obj) + 1
            obj += [1, -1]
            labels += [(x, "+"), (x, "-")]
            for k in subs:
                rows[k][jp] = 1
                rows[k][jm] = -1
        else:
            j = len(obj)
            obj.append(0)
            labels.append((x, "-"))
            for k in subs:
                rows[k][j] = -1
    senses = [Sense.EQ] * len(monos) + [Sense.EQ]
    rhs = [0] * len(monos) + [1]
    rows.append({j: 1 for j in range(len(obj))})
    return LPInstance(obj, rows, senses, rhs, maximize=True, row_labels=monos + ["norm"], col_labels=labels)


def threshold_primal(f: PartialBoolFn, d: int) -> LPInstance:
    """min s s.t. sign(x) p(x) + s >= 1 on the domain, s >= 0. Optimum is 0 or 1."""
    monos = monomials(f.arity, d)
    e = len(monos)
    sgn = f.sign_table()
    rows, senses, rhs, labels = [], [], [], []
    for x in np.flatnonzero(sgn):
        x = int(x)
        row = {k: int(sgn[x]) for k in _subsets_of(x, monos)}
        row[e] = 1
        rows.append(row); senses.append(Sense.GE); rhs.append(1); labels.append(x)
    return LPInstance([0] * e + [1], rows, senses, rhs, maximize=False, free=set(range(e)),
                      row_labels=labels, col_labels=monos + ["slack"])


def threshold_dual(f: PartialBoolFn, d: int) -> LPInstance:
    """max sum lambda s.t. sum lambda <= 1, lambda >= 0 on the domain, and
    psi = lambda * sign is orthogonal to chi_S for |S| <= d."""
    monos = monomials(f.arity, d)
    sgn = f.sign_table()
    pts = [int(x) for x in np.flatnonzero(sgn)]
    rows = [dict() for _ in monos]
    for j, x in enumerate(pts):
        for k in _subsets_of(x, monos):
            rows[k][j] = int(sgn[x])
    senses = [Sense.EQ] * len(monos) + [Sense.LE]
    rhs = [0] * len(monos) + [1]
    rows.append({j: 1 for j in range(len(pts))})
    return LPInstance([1] * len(pts), rows, senses, rhs, maximize=True,
                      row_labels=monos + ["norm"], col_labels=pts)


_BUILDERS = {
    Measure.APPROX: (approx_primal, approx_dual),
    Measure.ONE_SIDED: (onesided_primal, onesided_dual),
    Measure.THRESHOLD: (threshold_primal, threshold_dual),
}


def _poly_from(inst: LPInstance, res: LPResult, arity: int) -> MultilinearPoly:
    if res.x is None:
        # unbounded one-sided primal: f has no ONE points and p = 0 meets every eps >= 0
        return MultilinearPoly(arity, {})
    coeffs = {S: res.x[k] for k, S in enumerate(inst.col_labels) if isinstance(S, int)}
    return MultilinearPoly(arity, coeffs)


def _psi_from(inst: LPInstance, res: LPResult, f: PartialBoolFn, measure: Measure) -> CubeFn:
    vals = [Fraction(0)] * f.size
    if measure == Measure.THRESHOLD:
        sgn = f.sign_table()
        for j, x in enumerate(inst.col_labels):
            vals[x] += res.x[j] * int(sgn[x])
    else:
        for j, (x, s) in enumerate(inst.col_labels):
            vals[x] += res.x[j] if s == "+" else -res.x[j]
    psi = CubeFn.from_values(f.arity, vals)
    norm = psi.l1()
    if norm > 0 and norm != 1:
        psi = psi.scale(1 / norm)
    return psi


@dataclass
class LPSolve:
    degree: int
    value: Fraction | None  # None encodes -infinity (unbounded primal)
    instance: LPInstance
    result: LPResult


def solve_primal(f: PartialBoolFn, measure, d: int, mode=None) -> LPSolve:
    measure = Measure.parse(measure)
    inst = _BUILDERS[measure][0](f, d)
    res = solve_lp(inst, mode)
    if res.status == Status.UNBOUNDED:
        return LPSolve(d, None, inst, res)
    if res.status != Status.OPTIMAL:
        raise AssertionError(f"primal LP at degree {d} is {res.status}")
    return LPSolve(d, res.objective, inst, res)


def solve_dual(f: PartialBoolFn, measure, d: int, mode=None) -> LPSolve:
    measure = Measure.parse(measure)
    inst = _BUILDERS[measure][1](f, d)
    res = solve_lp(inst, mode)
    if res.status == Status.INFEASIBLE:
        return LPSolve(d, None, inst, res)
    if res.status != Status.OPTIMAL:
        raise AssertionError(f"dual LP at degree {d} is {res.status}")
    return LPSolve(d, res.objective, inst, res)


@dataclass
class DegreeResult:
    measure: Measure
    eps: Fraction | None
    degree: int
    primal: MultilinearPoly
    primal_value: Fraction | None
    dual: CubeFn | None
    dual_value: Fraction | None
    mode: SolverMode
    search: list = field(default_factory=list)  # (d, primal optimum) along the search
    dual_report: WitnessReport | None = None

    def to_json(self) -> dict:
        return {
            "measure": self.measure.value,
            "eps": None if self.eps is None else fmt(self.eps),
            "degree": self.degree,
            "primal": self.primal.to_json(),
            "primal_value": None if self.primal_value is None else fmt(self.primal_value),
            "dual": None if self.dual is None else self.dual.to_json(),
            "dual_value": None if self.dual_value is None else fmt(self.dual_value),
            "solver_mode": self.mode.value,
            "search": [[d, None if v is None else fmt(v)] for d, v in self.search],
            "dual_report": None if self.dual_report is None else self.dual_report.to_json(),
        }


def _meets(value: Fraction | None, measure: Measure, eps: Fraction | None) -> bool:
    if value is None:
        return True
    if measure == Measure.THRESHOLD:
        return value == 0
    return value <= eps


def _degree(f: PartialBoolFn, measure: Measure, eps, mode) -> DegreeResult:
    if measure == Measure.THRESHOLD:
        if not f.domain_mask().any():
            raise EmptyDomain("threshold degree of a function with empty domain")
        eps = None
    else:
        eps = as_fraction(eps)
    search = []
    found = None
    for d in range(f.arity + 1):
        sol = solve_primal(f, measure, d, mode)
        search.append((d, sol.value))
        if _meets(sol.value, measure, eps):
            found = sol
            break
    if found is None:
        raise AssertionError("no feasible degree up to the arity")
    d = found.degree
    poly = _poly_from(found.instance, found.result, f.arity)
    dual = dual_value = report = None
    if d > 0:
        dsol = solve_dual(f, measure, d - 1, mode)
        if dsol.value is None:
            raise AssertionError("dual LP infeasible below the degree")
        dual = _psi_from(dsol.instance, dsol.result, f, measure)
        dual_value = dsol.value
        report = verify_dual(dual, f, measure.dual_kind, d - 1, eps)
        if not report.verdict:
            raise AssertionError(f"dual witness failed verification: {report.failed()}")
    mode_used = found.result.mode
    return DegreeResult(measure, eps, d, poly, found.value, dual, dual_value, mode_used, search, report)


def approx_degree(f: PartialBoolFn, eps, mode=None) -> DegreeResult:
    eps = as_fraction(eps)
    limit = Fraction(1) if f.convention == Convention.PLUS_MINUS else Fraction(1, 2)
    if not (0 <= eps < limit):
        raise InvalidParams(f"eps = {eps} outside [0, {limit})")
    return _degree(f, Measure.APPROX, eps, mode)


def onesided_degree(f: PartialBoolFn, eps, mode=None) -> DegreeResult:
    eps = as_fraction(eps)
    if f.convention != Convention.ZERO_ONE:
        raise InvalidParams("one-sided degree is defined in the 0/1 convention")
    if not (0 <= eps < Fraction(1, 2)):
        raise InvalidParams(f"eps = {eps} outside [0, 1/2)")
    return _degree(f, Measure.ONE_SIDED, eps, mode)


def threshold_degree(f: PartialBoolFn, mode=None) -> DegreeResult:
    return _degree(f, Measure.THRESHOLD, None, mode)


def degree(f: PartialBoolFn, measure, eps=None, mode=None) -> DegreeResult:
    measure = Measure.parse(measure)
    if measure == Measure.APPROX:
        return approx_degree(f, eps, mode)
    if measure == Measure.ONE_SIDED:
        return onesided_degree(f, eps, mode)
    return threshold_degree(f, mode)


def dual_witness(f: PartialBoolFn, measure, d: int, mode=None) -> tuple:
    """(psi, optimal dual value) at degree d, or (None, None) when the dual LP is infeasible."""
    measure = Measure.parse(measure)
    sol = solve_dual(f, measure, d, mode)
    if sol.value is None:
        return None, None
    return _psi_from(sol.instance, sol.result, f, measure), sol.value


def strong_duality_gap(f: PartialBoolFn, measure, d: int, mode=None) -> tuple:
    """(primal optimum, dual optimum) at degree d, from the two explicit LPs."""
    p = solve_primal(f, measure, d, mode)
    q = solve_dual(f, measure, d, mode)
    return p.value, q.value


def verify_primal(poly: MultilinearPoly, f: PartialBoolFn, measure, eps=None) -> bool:
    """Check the defining inequalities of the measure exactly at every point."""
    measure = Measure.parse(measure)
    vals = poly.table().values()
    for x in range(f.size):
        v = f.numeric(x)
        p = vals[x]
        if measure == Measure.THRESHOLD:
            s = int(f.sign_table()[x])
            if s and not s * p > 0:
                return False
        elif measure == Measure.APPROX:
            if v is None:
                if abs(p) > 1 + eps:
                    return False
            elif abs(p - v) > eps:
                return False
        else:
            if v == 1 and abs(p - 1) > eps:
                return False
            if v == 0 and p > eps:
                return False
    return True


# ---------------------------------------------------------------- decomposition

@dataclass
class MuParts:
    plus: CubeFn
    minus: CubeFn
    plus0: CubeFn
    plus1: CubeFn
    minus0: CubeFn
    minus1: CubeFn


def decompose_dual(mu: CubeFn, f: PartialBoolFn, d: int, eps, onesided: bool = False):
    """Split a dual witness into positive and negative parts and check that the parts
    have equal mass 1/2, disjoint supports, and enough mass on the correct side.

    For +-1 functions the witness is first read in 0/1 terms: mu -> -mu and eps -> eps/2.
    Returns (MuParts, WitnessReport).
    """
    eps = as_fraction(eps)
    kind = DualKind.ONESIDED if onesided else DualKind.APPROX
    base = verify_dual(mu, f, kind, d, eps)
    if not base.verdict:
        raise NotADualWitness(f"not a dual witness: {base.failed()}", base)
    if f.convention == Convention.PLUS_MINUS:
        mu, eps = -mu, eps / 2
    plus, minus = mu.positive_part(), mu.negative_part()
    ones, zeros = f.ones_mask(), f.zeros_mask()
    parts = MuParts(plus, minus, plus.restrict(zeros), plus.restrict(ones),
                    minus.restrict(zeros), minus.restrict(ones))
    rep = WitnessReport(kind)
    overlap = int(np.count_nonzero(plus.support_mask() & minus.support_mask()))
    rep.add("disjoint_supports", overlap == 0, overlap)
    rep.add("plus_mass_half", plus.l1() == Fraction(1, 2), plus.l1())
    rep.add("minus_mass_half", minus.l1() == Fraction(1, 2), minus.l1())
    rep.add("plus_on_ones_exceeds_eps", parts.plus1.l1() > eps, parts.plus1.l1())
    rep.add("minus_on_zeros_exceeds_eps", parts.minus0.l1() > eps, parts.minus0.l1())
    if onesided:
        rep.add("plus_on_ones_is_half", parts.plus1.l1() == Fraction(1, 2), parts.plus1.l1())
    rep.pure_high_degree = base.pure_high_degree
    return parts, rep


def query_bounds(f: PartialBoolFn, mode=None) -> dict:
    """UPP^dt equals threshold degree; PP^dt exceeds d/2 whenever
    deg~_{1/2 - 2^-d}(f) > d. Reports the largest such d over 1..m."""
    upp = threshold_degree(f, mode).degree
    best = 0
    for d in range(1, f.arity + 1):
        eps = Fraction(1, 2) - Fraction(1, 2 ** d)
        if approx_degree(f, eps, mode).degree > d:
            best = d
    return {"upp_dt": upp, "pp_dt_lower": Fraction(best, 2), "d_star": best}
