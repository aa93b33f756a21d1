"""Hardness amplification: dual witnesses for gapped compositions, error correction,
and the matching sign-representing polynomials for the compositions."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .boolfn import Convention, GapParams, PartialBoolFn, gap_and, gap_maj
from .degree import Measure, decompose_dual, verify_primal
from .errors import (AlphaTooLarge, BadApproximator, InvalidParams, NotADualWitness,
                     WrongWitnessKind)
from .polylib import (CubeFn, HelperReport, MultilinearPoly, UnivariatePoly, block_counts,
                      block_product, helper_p, pure_high_degree, tensor_power)
from .rational import as_fraction, fmt, lcm_all
from .verify import (DualKind, WitnessReport, _mask_of, correlation, error_correction_alpha,
                     verify_dual, verify_error_correction)

ALPHA_LIMIT = Fraction(1, 40)


def _need_zero_one(f: PartialBoolFn):
    if f.convention != Convention.ZERO_ONE:
        raise InvalidParams("amplification works in the 0/1 convention; convert first")


# ---------------------------------------------------------------- product witness

def product_witness(mu: CubeFn, n: int, cap: int | None = None) -> tuple[CubeFn, CubeFn]:
    """(prod_i mu_plus(x_i), prod_i mu_minus(x_i))."""
    return tensor_power(mu.positive_part(), n, cap), tensor_power(mu.negative_part(), n, cap)


def _certified_T(c: Fraction, d: int, arity: int) -> int:
    """min(d, largest T >= 0 with c > 1/2 - 2^-T); min(d, arity) when c >= 1/2; -1 if none."""
    if c >= Fraction(1, 2):
        return min(d, arity)
    T = -1
    while c > Fraction(1, 2) - Fraction(1, 2 ** (T + 1)):
        T += 1
    return min(d, T)


@dataclass
class PPWitness:
    psi: CubeFn
    correlation: Fraction
    certified_T: int
    d: int
    pure_high_degree: int
    report: WitnessReport

    def to_json(self) -> dict:
        return {"psi": self.psi.to_json(), "correlation": fmt(self.correlation),
                "certified_T": self.certified_T, "d": self.d,
                "pure_high_degree": self.pure_high_degree, "report": self.report.to_json()}


def pp_witness(mu: CubeFn, f: PartialBoolFn, n: int, eps, eps2, d: int | None = None) -> PPWitness:
    """psi = 2^(n-1) (psi_plus - psi_minus) for GapMaj(f, n, eps), with its correlation
    computed exactly by enumeration."""
    _need_zero_one(f)
    eps, eps2 = as_fraction(eps), as_fraction(eps2)
    if 2 * eps2 <= eps:
        raise InvalidParams(f"need 2*eps2 > eps, got eps2={eps2}, eps={eps}")
    if d is None:
        d = pure_high_degree(mu)
    base = verify_dual(mu, f, DualKind.APPROX, d, eps2)
    if not base.verdict:
        raise NotADualWitness(f"not a dual witness: {base.failed()}", base)
    plus, minus = product_witness(mu, n)
    psi = (plus - minus).scale(2 ** (n - 1))
    F = gap_maj(f, GapParams(n, eps))
    c = correlation(psi, F)
    phd = pure_high_degree(psi)
    T = _certified_T(c, d, F.arity)
    rep = WitnessReport(DualKind.APPROX)
    rep.pure_high_degree = phd
    rep.add("unit_l1_norm", psi.l1() == 1, psi.l1())
    rep.add("pure_high_degree_at_least_d", phd >= d, phd)
    rep.add("correlation_certifies_T", T < 0 or c > Fraction(1, 2) - Fraction(1, 2 ** T), c)
    return PPWitness(psi, c, T, d, phd, rep)


# ---------------------------------------------------------------- error correction

def psi_P(phi: CubeFn, A, n: int, P: UnivariatePoly, alpha=None) -> CubeFn:
    """(-alpha)^{n_A(x)} * prod_i phi(x_i) * P(n_A(x))."""
    mask = _mask_of(A, phi.arity)
    alpha = error_correction_alpha(phi, mask) if alpha is None else as_fraction(alpha)
    weights = [(-alpha) ** k * P(k) for k in range(n + 1)]
    L = lcm_all(w.denominator for w in weights)
    ints = np.array([w.numerator * (L // w.denominator) for w in weights], dtype=object)
    psi = tensor_power(phi, n)
    nA = block_counts(mask, n)
    return psi.times_int(ints[nA]).scale(Fraction(1, L))


def psi_k(phi: CubeFn, A, n: int, k: int, alpha=None) -> CubeFn:
    """sum over |S| = k of prod_{i in S} phi(x_i) * prod_{i not in S} (phi_x - alpha phi_o)(x_i),
    evaluated directly as a sum of block products."""
    mask = _mask_of(A, phi.arity)
    alpha = error_correction_alpha(phi, mask) if alpha is None else as_fraction(alpha)
    g = phi.restrict(~mask) - phi.restrict(mask).scale(alpha)
    total = CubeFn.zeros(phi.arity * n)
    for S in itertools.combinations(range(n), k):
        total = total + block_product([phi if i in S else g for i in range(n)])
    return total


@dataclass
class ErrorCorrection:
    psi_corr: CubeFn
    alpha: Fraction
    P: UnivariatePoly | None
    helper_report: HelperReport | None
    report: WitnessReport

    @property
    def constructed_bound(self) -> int | None:
        """n - deg(P) - 1, or None when psi_corr is identically zero."""
        return None if self.P is None else self.report.notes["constructed_bound"]

    def to_json(self) -> dict:
        return {"alpha": fmt(self.alpha), "a": None if self.alpha == 0 else fmt(1 / self.alpha),
                "P": None if self.P is None else self.P.to_json(),
                "helper_report": None if self.helper_report is None else self.helper_report.to_json(),
                "report": self.report.to_json()}


def error_correct(phi: CubeFn, A, n: int, eps, override: bool = False,
                  helper: Callable | None = None) -> ErrorCorrection:
    """psi_corr for psi = phi^{(x)n}: equal to psi where at most eps*n blocks lie in A,
    at most psi/2 in absolute value elsewhere, and of high pure degree.

    helper(a, n, eps) -> (P, HelperReport) may replace the stock interpolant.
    """
    eps = as_fraction(eps)
    mask = _mask_of(A, phi.arity)
    alpha = error_correction_alpha(phi, mask)
    if alpha == 0:
        corr = CubeFn.zeros(phi.arity * n)
        rep = verify_error_correction(corr, phi, mask, n, eps)
        return ErrorCorrection(corr, alpha, None, None, rep)
    if alpha >= ALPHA_LIMIT and not override:
        raise AlphaTooLarge(alpha)
    P, hrep = (helper or helper_p)(1 / alpha, n, eps)
    corr = psi_P(phi, mask, n, P, alpha)
    rep = verify_error_correction(corr, phi, mask, n, eps, deg_P=P.degree)
    return ErrorCorrection(corr, alpha, P, hrep, rep)


# ---------------------------------------------------------------- threshold witness

@dataclass
class AmplifyBundle:
    f: PartialBoolFn
    mu: CubeFn
    d: int
    eps2: Fraction | None
    n: int
    eps: Fraction
    mode: str
    psi_plus: CubeFn
    psi_minus: CubeFn
    corr_plus: ErrorCorrection
    corr_minus: ErrorCorrection
    psi: CubeFn
    claimed_bound: int
    formula_N: Fraction | None
    base_report: WitnessReport
    notes: dict = field(default_factory=dict)

    @property
    def alphas(self) -> tuple[Fraction, Fraction]:
        return self.corr_plus.alpha, self.corr_minus.alpha

    def to_json(self, include_functions: bool = True) -> dict:
        out = {
            "mode": self.mode, "n": self.n, "eps": fmt(self.eps), "d": self.d,
            "eps2": None if self.eps2 is None else fmt(self.eps2),
            "f": self.f.to_json(), "mu": self.mu.to_json(),
            "alpha_plus": fmt(self.corr_plus.alpha), "alpha_minus": fmt(self.corr_minus.alpha),
            "corr_plus": self.corr_plus.to_json(), "corr_minus": self.corr_minus.to_json(),
            "claimed_bound": self.claimed_bound,
            "formula_N": None if self.formula_N is None else fmt(self.formula_N),
            "base_report": self.base_report.to_json(), "notes": self.notes,
        }
        if include_functions:
            out["psi"] = self.psi.to_json()
        return out


def upp_witness(mu: CubeFn, f: PartialBoolFn, n: int, eps, mode: str = "GAPMAJ",
                eps2=None, d: int | None = None, override: bool = False,
                helper: Callable | None = None) -> AmplifyBundle:
    """Threshold-degree dual for GapMaj / GapAND of n copies of f:
    psi = (psi_plus - corr_plus) - (psi_minus - corr_minus)."""
    _need_zero_one(f)
    mode = mode.upper()
    if mode not in ("GAPMAJ", "GAPAND"):
        raise InvalidParams(f"unknown mode {mode!r}")
    eps = as_fraction(eps)
    if not (Fraction(1, 2) < eps < 1):
        raise InvalidParams(f"eps = {eps} outside (1/2, 1)")
    e2 = Fraction(0) if eps2 is None else as_fraction(eps2)
    if d is None:
        d = pure_high_degree(mu)
    if mode == "GAPAND":
        rep = verify_dual(mu, f, DualKind.ONESIDED, d, e2)
        if not rep.verdict:
            raise WrongWitnessKind(f"GAPAND needs a one-sided dual; failed {rep.failed()}")
    _, base = decompose_dual(mu, f, d, e2, onesided=(mode == "GAPAND"))
    if not base.verdict:
        raise NotADualWitness(f"decomposition conditions fail: {base.failed()}", base)
    plus, minus = product_witness(mu, n)
    cp = error_correct(mu.positive_part(), f.ones_mask(), n, eps, override, helper)
    cm = error_correct(mu.negative_part(), f.zeros_mask(), n, eps, override, helper)
    psi = (plus - cp.psi_corr) - (minus - cm.psi_corr)
    bounds = [b for b in (cp.constructed_bound, cm.constructed_bound) if b is not None]
    # -1 is the weakest pure high degree (no claim); small n can push n - deg(P) - 1 below it
    claimed = max(-1, min([d] + bounds))
    formula = None
    if eps2 is not None and 0 < e2 < Fraction(1, 2):
        a = 2 * e2 / (1 - 2 * e2)
        formula = (1 - (1 + 10 / a) * eps) * n - 4
    notes = {"corrections_verified": cp.report.verdict and cm.report.verdict}
    return AmplifyBundle(f, mu, d, None if eps2 is None else e2, n, eps, mode, plus, minus,
                         cp, cm, psi, claimed, formula, base, notes)


# ---------------------------------------------------------------- upper bound

@dataclass
class ThresholdUpper:
    q: MultilinearPoly
    formal_degree: int
    degree: int
    composed: PartialBoolFn
    sign_ok: bool
    wrong_points: list

    def to_json(self) -> dict:
        return {"q": self.q.to_json(), "formal_degree": self.formal_degree,
                "degree": self.degree, "sign_ok": self.sign_ok,
                "wrong_points": self.wrong_points[:20]}


UPPER_EPS = Fraction(2, 3)
APPROX_ERR = Fraction(1, 20)


def threshold_upper(p: MultilinearPoly, f: PartialBoolFn, m: int, mode: str = "GAPMAJ") -> ThresholdUpper:
    """q = (1/m) sum_i p(x_i)^2 - 1/2 (GAPMAJ) or (1/m) sum_i p(x_i) - 1/2 (GAPAND), checked
    exhaustively to sign-represent the composition at eps = 2/3."""
    _need_zero_one(f)
    mode = mode.upper()
    if p.arity != f.arity:
        raise InvalidParams("p and f differ in arity")
    measure = Measure.APPROX if mode == "GAPMAJ" else Measure.ONE_SIDED
    if not verify_primal(p, f, measure, APPROX_ERR):
        raise BadApproximator(f"p is not a {measure.value} 1/20-approximation of f")
    M = f.arity
    big = M * m
    q = MultilinearPoly.constant(big, Fraction(-1, 2))
    for i in range(m):
        pi = p.embed(big, i * M)
        q = q + (pi * pi if mode == "GAPMAJ" else pi).scale(Fraction(1, m))
    formal = 2 * p.degree if mode == "GAPMAJ" else p.degree
    g = GapParams(m, UPPER_EPS)
    F = gap_maj(f, g) if mode == "GAPMAJ" else gap_and(f, g)
    vals = q.table()
    s = F.sign_table()
    wrong = [int(x) for x in np.flatnonzero(s) if not int(s[x]) * vals[x] > 0]
    return ThresholdUpper(q, formal, q.degree, F, not wrong, wrong)
