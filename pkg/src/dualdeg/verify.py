"""Exhaustive exact verification of dual witnesses and amplification certificates."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .boolfn import Convention, GapParams, PartialBoolFn, gap_and, gap_maj
from .errors import ArityError, CertificateRejected, InvalidParams
from .polylib import CubeFn, block_counts, pure_high_degree, tensor_power
from .rational import as_fraction, fmt


class DualKind(str, enum.Enum):
    APPROX = "APPROX_DUAL"
    THRESHOLD = "THRESHOLD_DUAL"
    ONESIDED = "ONESIDED_DUAL"
    ERROR_CORRECTION = "ERROR_CORRECTION"

    @classmethod
    def parse(cls, s) -> "DualKind":
        if isinstance(s, DualKind):
            return s
        key = str(s).upper().replace("-", "_")
        aliases = {"APPROX": cls.APPROX, "THRESHOLD": cls.THRESHOLD, "ONESIDED": cls.ONESIDED,
                   "ONE_SIDED": cls.ONESIDED}
        if key in aliases:
            return aliases[key]
        return cls(key)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: Any = None

    def to_json(self) -> dict:
        v = self.value
        if isinstance(v, Fraction):
            v = fmt(v)
        return {"name": self.name, "passed": self.passed, "value": v}


@dataclass
class WitnessReport:
    kind: DualKind
    checks: list = field(default_factory=list)
    pure_high_degree: int | None = None
    notes: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, value=None):
        self.checks.append(Check(name, bool(passed), value))

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "verdict": "PASS" if self.verdict else "FAIL",
                "pure_high_degree": self.pure_high_degree,
                "checks": [c.to_json() for c in self.checks], "notes": self.notes}


def correlation(psi: CubeFn, f: PartialBoolFn) -> Fraction:
    """sum over the domain of psi*f minus the l1 mass of psi off the domain, using f's
    numeric values in its own convention."""
    dom = f.domain_mask()
    return psi.dot_int(f.numeric_table()) - psi.masked_l1(~dom)


def verify_dual(psi: CubeFn, f: PartialBoolFn, kind, d: int, eps=None) -> WitnessReport:
    kind = DualKind.parse(kind)
    if psi.arity != f.arity:
        raise ArityError(f"witness arity {psi.arity} vs function arity {f.arity}")
    rep = WitnessReport(kind)
    phd = pure_high_degree(psi)
    rep.pure_high_degree = phd
    dom = f.domain_mask()
    norm = psi.l1()
    if kind == DualKind.APPROX:
        eps = as_fraction(eps)
        rep.add("pure_high_degree", phd >= d, phd)
        rep.add("unit_l1_norm", norm == 1, norm)
        c = correlation(psi, f)
        rep.add("correlation_exceeds_eps", c > eps, c)
    elif kind == DualKind.THRESHOLD:
        off = psi.masked_l1(~dom)
        rep.add("support_in_domain", off == 0, off)
        rep.add("pure_high_degree", phd >= d, phd)
        s = f.sign_table()
        wrong = int(np.count_nonzero(((psi.num > 0) & (s < 0)) | ((psi.num < 0) & (s > 0))))
        rep.add("sign_agreement", wrong == 0, wrong)
        rep.add("nontrivial", norm > 0, norm)
    elif kind == DualKind.ONESIDED:
        if f.convention != Convention.ZERO_ONE:
            raise InvalidParams("one-sided duals are checked in the 0/1 convention")
        eps = as_fraction(eps)
        off = psi.masked_l1(~dom)
        rep.add("support_in_domain", off == 0, off)
        rep.add("pure_high_degree", phd >= d, phd)
        rep.add("unit_l1_norm", norm == 1, norm)
        c = psi.masked_sum(f.ones_mask())
        rep.add("correlation_exceeds_eps", c > eps, c)
        bad = int(np.count_nonzero(psi.num[f.zeros_mask()] > 0))
        rep.add("nonpositive_on_zeros", bad == 0, bad)
    else:
        raise InvalidParams(f"verify_dual does not handle {kind}")
    return rep


def _mask_of(A, M: int) -> np.ndarray:
    if callable(A):
        return np.array([bool(A(x)) for x in range(1 << M)])
    mask = np.asarray(A, dtype=bool)
    if mask.shape != (1 << M,):
        raise ArityError("predicate mask has the wrong length")
    return mask


def error_correction_alpha(phi: CubeFn, A) -> Fraction:
    mask = _mask_of(A, phi.arity)
    inside = phi.masked_l1(mask)
    if inside == 0:
        raise InvalidParams("phi has no mass on A")
    return phi.masked_l1(~mask) / inside


def verify_error_correction(psi_corr: CubeFn, phi: CubeFn, A, n: int, eps,
                            deg_P: int | None = None) -> WitnessReport:
    """Check the three error-correction conditions exhaustively.

    Condition 3 is reported against the closed-form bound (1 - (1+10 alpha) eps) n - 4
    and, when the degree of the helper polynomial is known, against n - deg(P) - 1.
    The verdict uses n - deg(P) - 1 when available, else the closed form.
    """
    eps = as_fraction(eps)
    M = phi.arity
    if psi_corr.arity != M * n:
        raise ArityError("psi_corr arity does not match n blocks of phi")
    if (phi.num < 0).any():
        raise InvalidParams("phi must be nonnegative")
    mask = _mask_of(A, M)
    alpha = error_correction_alpha(phi, mask)
    psi = tensor_power(phi, n)
    nA = block_counts(mask, n).astype(np.int64)
    low = nA * eps.denominator <= eps.numerator * n
    rep = WitnessReport(DualKind.ERROR_CORRECTION)
    # condition 1: equal to psi where n_A <= eps n  (compare num/den cross-multiplied)
    lhs = psi_corr.num[low].astype(object) * psi.den
    rhs = psi.num[low].astype(object) * psi_corr.den
    bad1 = int(np.count_nonzero(lhs != rhs))
    rep.add("agrees_below_threshold", bad1 == 0, bad1)
    # condition 2: 2 |psi_corr| <= psi where n_A > eps n
    high = ~low
    lhs = 2 * np.abs(psi_corr.num[high].astype(object)) * psi.den
    rhs = psi.num[high].astype(object) * psi_corr.den
    bad2 = int(np.count_nonzero(lhs > rhs))
    rep.add("damped_above_threshold", bad2 == 0, bad2)
    phd = pure_high_degree(psi_corr)
    rep.pure_high_degree = phd
    formula = (1 - (1 + 10 * alpha) * eps) * n - 4
    rep.notes["alpha"] = fmt(alpha)
    rep.notes["formula_bound"] = fmt(formula)
    rep.notes["meets_formula_bound"] = phd >= formula
    if deg_P is None:
        rep.add("phd_vs_formula", phd >= formula, phd)
    else:
        rep.notes["constructed_bound"] = n - deg_P - 1
        rep.add("phd_vs_constructed", phd >= n - deg_P - 1, phd)
    return rep


@dataclass
class Certificate:
    accepted: bool
    bound: int  # deg±(F) > bound
    mode: str
    n: int
    eps: Fraction
    report: WitnessReport

    @property
    def upp_dt_lower(self) -> int:
        """UPP^dt equals threshold degree, so it is at least bound + 1."""
        return self.bound + 1

    def to_json(self) -> dict:
        return {"accepted": self.accepted, "threshold_degree_exceeds": self.bound,
                "upp_dt_at_least": self.upp_dt_lower, "mode": self.mode, "n": self.n,
                "eps": fmt(self.eps), "report": self.report.to_json()}


def composed_function(f: PartialBoolFn, n: int, eps, mode: str) -> PartialBoolFn:
    g = GapParams(n, as_fraction(eps))
    return gap_maj(f, g) if mode.upper() == "GAPMAJ" else gap_and(f, g)


def certify_amplification(bundle) -> Certificate:
    """Verify the final witness of an amplification bundle as a threshold-degree dual
    for the composed function, at the bundle's claimed bound."""
    F = composed_function(bundle.f, bundle.n, bundle.eps, bundle.mode)
    rep = verify_dual(bundle.psi, F, DualKind.THRESHOLD, bundle.claimed_bound)
    cert = Certificate(rep.verdict, bundle.claimed_bound, bundle.mode.upper(), bundle.n,
                       as_fraction(bundle.eps), rep)
    if not rep.verdict:
        raise CertificateRejected(f"failed checks: {', '.join(rep.failed())}", rep)
    return cert
