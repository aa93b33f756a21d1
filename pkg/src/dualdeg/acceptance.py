"""The acceptance battery: twelve exact checks with timings, shared by the CLI `suite`
command and the test suite."""
from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable

import numpy as np

from .amplify import pp_witness, psi_k, psi_P, threshold_upper, upp_witness
from .boolfn import Convention, all_total_functions, gen_named, point_to_bits, random_partial
from .config import RunConfig
from .degree import (Measure, approx_degree, decompose_dual, onesided_degree, solve_dual,
                     solve_primal, strong_duality_gap, threshold_degree)
from .dist import (Distribution, PseudoPolarizer, m2_accept, m2_branches, polarizer_apply,
                   postselect_three, reduce_gapmajptp_to_ea, reduce_gcol_to_sdu)
from .polylib import (CubeFn, UnivariatePoly, expand_in_basis, helper_p,
                      pk_basis, pure_high_degree)
from .rational import fmt
from .verify import (DualKind, certify_amplification, composed_function,
                     error_correction_alpha, verify_dual)

# Frozen regression values, each computed once and cross-checked by an independent method.
HELPER_SMALLEST_N = {40: 1, 64: 1}  # direct Lagrange evaluation of every tail point
COL_4_2_APPROX_DEGREE = 4  # deg~_{1/3}(COL(4,2)); float HiGHS solve gives errors 1/2,1/2,1/2,1/2,0

THIRD = Fraction(1, 3)
EPS2 = Fraction(49, 100)
AMP_EPS = Fraction(3, 4)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float
    target: float
    details: dict = field(default_factory=dict)

    @property
    def within_target(self) -> bool:
        return self.seconds < self.target

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        slow = "" if self.within_target else f", over the {self.target:.0f}s target"
        return f"[{verdict}] {self.number:2d} {self.name} ({self.seconds:.1f}s{slow})"

    def to_json(self) -> dict:
        return {"number": self.number, "name": self.name, "passed": self.passed,
                "seconds": round(self.seconds, 3), "target_seconds": self.target,
                "within_target": self.within_target, "details": self.details}


def _j(v):
    """JSON-safe rendering of nested results."""
    if isinstance(v, Fraction):
        return fmt(v)
    if isinstance(v, dict):
        return {str(k): _j(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_j(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


class Context:
    """Witnesses shared between criteria, computed on first use."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.mode = cfg.solver_mode

    @cached_property
    def total_duals(self) -> list:
        """(f, degree, threshold dual) for every total function on 3 bits."""
        out = []
        for f in all_total_functions(3):
            r = threshold_degree(f, self.mode)
            out.append((f, r.degree, r.dual))
        return out

    @cached_property
    def partial_cases(self) -> list:
        """(f01, eps, deg of f01 at eps, result for f01, result for f+-1 at 2 eps)."""
        rng = random.Random(self.cfg.seed)
        fns = []
        for _ in range(50):
            fns.append(random_partial(rng.randint(1, 3), rng, p_undef=0.3))
        out = []
        for f in fns:
            g = f.with_convention(Convention.PLUS_MINUS)
            for eps in (Fraction(0), Fraction(1, 6), THIRD):
                out.append((f, eps, approx_degree(f, eps, self.mode),
                            approx_degree(g, 2 * eps, self.mode)))
        return out

    @cached_property
    def xor2(self):
        f = gen_named("XOR", 2)
        return f, approx_degree(f, EPS2, self.mode), onesided_degree(f, EPS2, self.mode)

    @cached_property
    def bundles(self) -> dict:
        f, approx, onesided = self.xor2
        ns = (8,) if self.cfg.quick else (8, 12)
        out = {}
        for n in ns:
            out[("GAPMAJ", n)] = upp_witness(approx.dual, f, n, AMP_EPS, "GAPMAJ", EPS2)
            out[("GAPAND", n)] = upp_witness(onesided.dual, f, n, AMP_EPS, "GAPAND", EPS2)
        return out


# ---------------------------------------------------------------- criteria

def c1_degree_oracle(ctx: Context) -> tuple[bool, dict]:
    gaps = []
    for f in all_total_functions(3):
        for d in range(4):
            p, q = strong_duality_gap(f, Measure.THRESHOLD, d, ctx.mode)
            if p != q:
                gaps.append((f.to_json()["entries"], d, p, q))
    and3 = threshold_degree(gen_named("AND", 3), ctx.mode).degree
    par3 = gen_named("XOR", 3)
    par3_thr = threshold_degree(par3, ctx.mode).degree
    par3_apx = approx_degree(par3, THIRD, ctx.mode).degree
    ok = not gaps and and3 == 1 and par3_thr == 3 and par3_apx == 3
    return ok, {"lp_pairs": 256 * 4, "duality_gaps": gaps, "threshold_AND3": and3,
                "threshold_PARITY3": par3_thr, "approx_1/3_PARITY3": par3_apx}


def c2_convention(ctx: Context) -> tuple[bool, dict]:
    bad = []
    for f, eps, r01, rpm in ctx.partial_cases:
        if r01.degree != rpm.degree:
            bad.append({"f": f.to_json()["entries"], "eps": eps,
                        "deg_01": r01.degree, "deg_pm_at_2eps": rpm.degree})
    return not bad, {"cases": len(ctx.partial_cases), "mismatches": bad}


def c3_decomposition(ctx: Context) -> tuple[bool, dict]:
    checked, failures = 0, []
    for f, deg, dual in ctx.total_duals:
        if dual is None:
            continue
        _, rep = decompose_dual(dual, f, deg - 1, EPS2)
        checked += 1
        if not rep.verdict:
            failures.append({"f": f.to_json()["entries"], "failed": rep.failed()})
    for f, eps, r01, rpm in ctx.partial_cases:
        for g, r in ((f, r01), (f.with_convention(Convention.PLUS_MINUS), rpm)):
            if r.dual is None:
                continue
            _, rep = decompose_dual(r.dual, g, r.degree - 1, r.eps)
            checked += 1
            if not rep.verdict:
                failures.append({"f": g.to_json()["entries"], "eps": r.eps,
                                 "failed": rep.failed()})
    return checked > 0 and not failures, {"duals_checked": checked, "failures": failures}


def _random_phi(rng: random.Random, M: int) -> tuple[CubeFn, np.ndarray]:
    size = 1 << M
    phi = CubeFn.from_values(M, [rng.randint(1, 5) for _ in range(size)])
    phi = phi.scale(1 / phi.l1())
    while True:
        mask = np.array([rng.random() < 0.5 for _ in range(size)])
        if mask.any() and not mask.all():
            return phi, mask


def c4_error_polynomial(ctx: Context) -> tuple[bool, dict]:
    rng = random.Random(ctx.cfg.seed + 4)
    rows, ok = [], True
    for n in (4, 6, 8):
        for d in (0, 1, 2):
            phi, mask = _random_phi(rng, 2)
            alpha = error_correction_alpha(phi, mask)
            coeffs = [Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(d)]
            P = UnivariatePoly(tuple(coeffs) + (Fraction(rng.choice([-3, -2, -1, 1, 2, 3])),))
            psi = psi_P(phi, mask, n, P, alpha)
            phd = pure_high_degree(psi)
            # pointwise: psi_k equals (-alpha)^{n_A} psi P_k(n_A), and psi_P = sum beta_k psi_k
            basis = pk_basis(n, alpha, d)
            beta = expand_in_basis(P, basis)
            combo = CubeFn.zeros(phi.arity * n)
            ident = True
            for k in range(d + 1):
                pk = psi_k(phi, mask, n, k, alpha)
                ident &= pk == psi_P(phi, mask, n, basis[k], alpha)
                combo = combo + pk.scale(beta[k])
            ident &= combo == psi
            good = phd >= n - d - 1 and ident
            ok &= good
            rows.append({"n": n, "deg_P": d, "alpha": alpha, "pure_high_degree": phd,
                         "identity": ident, "passed": good})
    return ok, {"cases": rows}


def c5_helper(ctx: Context) -> tuple[bool, dict]:
    eps = Fraction(3, 5)
    out, ok = {}, True
    for a in (40, 64):
        interp_fail = []
        smallest = None
        for n in range(1, 61):
            _, rep = helper_p(a, n, eps)
            if not rep.interpolation_ok:
                interp_fail.append(n)
            if rep.bound_holds:
                if smallest is None:
                    smallest = n
            else:
                smallest = None  # smallest n from which the bound holds through 60
        match = smallest == HELPER_SMALLEST_N[a]
        ok &= not interp_fail and match
        out[a] = {"interpolation_failures": interp_fail, "smallest_n": smallest,
                  "frozen": HELPER_SMALLEST_N[a], "matches_frozen": match}
    return ok, out


def c6_amplification(ctx: Context) -> tuple[bool, dict]:
    rows, ok = [], True
    for (mode, n), b in ctx.bundles.items():
        cert = certify_amplification(b)
        ok &= cert.accepted
        rows.append({"mode": mode, "n": n, "points": 1 << (2 * n), "accepted": cert.accepted,
                     "claimed_bound": b.claimed_bound, "alphas": list(b.alphas),
                     "pure_high_degree": cert.report.pure_high_degree})
    return ok, {"bundles": rows}


def c7_upper_bound(ctx: Context) -> tuple[bool, dict]:
    f = gen_named("XOR", 2)
    p = approx_degree(f, 0, ctx.mode).primal
    rows, ok = [], True
    for m in (3, 5):
        for mode in ("GAPMAJ", "GAPAND"):
            up = threshold_upper(p, f, m, mode)
            lp = solve_primal(up.composed, Measure.THRESHOLD, up.degree, ctx.mode)
            good = up.sign_ok and lp.value == 0
            ok &= good
            rows.append({"m": m, "mode": mode, "deg_q": up.degree, "formal_degree": up.formal_degree,
                         "sign_ok": up.sign_ok, "lp_value_at_deg_q": lp.value, "passed": good})
    return ok, {"p": p.to_json(), "cases": rows}


def c8_pp_witness(ctx: Context) -> tuple[bool, dict]:
    f = gen_named("XOR", 3)
    r = approx_degree(f, EPS2, ctx.mode)
    w = pp_witness(r.dual, f, 4, Fraction(2, 3), EPS2)
    T = w.certified_T
    consistent = T >= 0 and w.correlation > Fraction(1, 2) - Fraction(1, 2 ** T)
    phd_ok = w.pure_high_degree >= 3
    return consistent and phd_ok, {
        "correlation": w.correlation, "certified_T": T, "T_consistent": consistent,
        "pure_high_degree": w.pure_high_degree, "pure_high_degree_at_least_3": phd_ok}


def _random_pair(rng: random.Random) -> tuple[Distribution, Distribution]:
    size = rng.randint(1, 6)
    dom = tuple(range(size))

    def draw():
        w = {x: rng.randint(0, 7) for x in dom}
        if not any(w.values()):
            w[rng.randrange(size)] = 1
        return Distribution.from_weights(w, dom)

    return draw(), draw()


def c9_distributions(ctx: Context) -> tuple[bool, dict]:
    rng = random.Random(ctx.cfg.seed + 9)
    m2_bad = 0
    for _ in range(200):
        p, q = _random_pair(rng)
        if m2_accept(p, q) != m2_branches(p, q):
            m2_bad += 1
    dom = tuple(range(4))
    u = Distribution.uniform(dom)
    same = postselect_three(u, u)
    uniform_ok = same == Distribution.uniform(same.domain)
    d0 = Distribution.from_dict({0: Fraction(1, 2), 1: Fraction(1, 2)}, dom)
    d1 = Distribution.from_dict({2: Fraction(1, 4), 3: Fraction(3, 4)}, dom)
    split = postselect_three(d0, d1)
    w0, w1 = Fraction(1, 4), Fraction(1, 64) + Fraction(27, 64)
    disjoint_ok = split.mass == {"000": w0 / (w0 + w1), "111": w1 / (w0 + w1)}
    pol_bad = 0
    for _ in range(100):
        pp = PseudoPolarizer.random(rng.randint(1, 4), rng.randint(0, 4), rng)
        if not polarizer_apply(pp, Fraction(2, 3), THIRD).ratio_ok:
            pol_bad += 1
    ok = m2_bad == 0 and uniform_ok and disjoint_ok and pol_bad == 0
    return ok, {"m2_mismatches": m2_bad, "postselect_uniform": uniform_ok,
                "postselect_disjoint": disjoint_ok, "polarizer_failures": pol_bad}


def c10_reductions(ctx: Context) -> tuple[bool, dict]:
    rng = random.Random(ctx.cfg.seed + 10)
    k = 4
    sdu_bad = 0
    for _ in range(20):
        fs = [[rng.randint(1, k) for _ in range(k)] for _ in range(4)]
        _, rep = reduce_gcol_to_sdu(fs, ctx.cfg.entropy_width)
        sdu_bad += not rep.identity_holds
    width = ctx.cfg.entropy_width
    ea_bad = []
    for _ in range(20):
        fs = [[rng.randint(1, k) for _ in range(k)] for _ in range(2)]
        H, _, rep = reduce_gapmajptp_to_ea(fs, width)
        D = rep.direct_entropy
        within = H.width <= width and D.width <= width and H.lo <= D.hi and D.lo <= H.hi
        if not within:
            ea_bad.append(fs)
    return sdu_bad == 0 and not ea_bad, {"sdu_identity_failures": sdu_bad,
                                         "ea_chain_rule_failures": ea_bad}


def c11_collision(ctx: Context) -> tuple[bool, dict]:
    f = gen_named("COL", n=4, k=2)
    if ctx.cfg.quick:
        # the degree is d exactly when the error at d is at most 1/3 and the optimal
        # dual correlation at d - 1 exceeds 1/3
        d = COL_4_2_APPROX_DEGREE
        low = solve_dual(f, Measure.APPROX, d - 1, ctx.mode)
        high = solve_primal(f, Measure.APPROX, d, ctx.mode)
        ok = low.value is not None and low.value > THIRD and high.value <= THIRD
        return ok, {"frozen": d, "dual_value_below": low.value, "primal_value_at": high.value,
                    "method": "certificate pair"}
    r = approx_degree(f, THIRD, ctx.mode)
    return r.degree == COL_4_2_APPROX_DEGREE, {
        "degree": r.degree, "frozen": COL_4_2_APPROX_DEGREE, "search": r.search,
        "dual_value": r.dual_value, "method": "full search"}


def c12_mutations(ctx: Context) -> tuple[bool, dict]:
    rng = random.Random(ctx.cfg.seed + 12)
    targets = []
    for f, deg, dual in ctx.total_duals:
        if dual is not None:
            targets.append((dual, f, DualKind.THRESHOLD, deg - 1, None))
    f, approx, onesided = ctx.xor2
    targets.append((approx.dual, f, DualKind.APPROX, approx.degree - 1, EPS2))
    targets.append((onesided.dual, f, DualKind.ONESIDED, onesided.degree - 1, EPS2))
    b = ctx.bundles[("GAPMAJ", 8)]
    F = composed_function(b.f, b.n, b.eps, b.mode)
    targets.append((b.psi, F, DualKind.THRESHOLD, b.claimed_bound, None))
    for psi, g, kind, d, eps in targets:
        if not verify_dual(psi, g, kind, d, eps).verdict:
            return False, {"error": "an unmutated witness was rejected"}
    accepted = []
    for i in range(100):
        psi, g, kind, d, eps = targets[rng.randrange(len(targets))]
        x = rng.randrange(psi.size)
        delta = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 16))
        bump = CubeFn.from_dict(psi.arity, {point_to_bits(x, psi.arity): delta})
        if verify_dual(psi + bump, g, kind, d, eps).verdict:
            accepted.append({"mutation": i, "point": x, "delta": delta})
    return not accepted, {"witnesses": len(targets), "mutations": 100,
                          "wrongly_accepted": accepted}


CRITERIA: list[tuple[int, str, float, Callable]] = [
    (1, "degree-oracle soundness", 60, c1_degree_oracle),
    (2, "convention consistency", 120, c2_convention),
    (3, "dual decomposition conditions", 120, c3_decomposition),
    (4, "error polynomial exactness", 120, c4_error_polynomial),
    (5, "helper interpolant", 300, c5_helper),
    (6, "end-to-end amplification", 600, c6_amplification),
    (7, "threshold upper bound", 120, c7_upper_bound),
    (8, "bounded-bias witness", 60, c8_pp_witness),
    (9, "distribution identities", 120, c9_distributions),
    (10, "reductions", 60, c10_reductions),
    (11, "collision degree regression", 600, c11_collision),
    (12, "mutation robustness", 120, c12_mutations),
]


def run_criterion(number: int, cfg: RunConfig | None = None,
                  ctx: Context | None = None) -> CriterionResult:
    cfg = cfg or RunConfig()
    ctx = ctx or Context(cfg)
    num, name, target, fn = CRITERIA[number - 1]
    t = time.perf_counter()
    passed, details = fn(ctx)
    return CriterionResult(num, name, bool(passed), time.perf_counter() - t, target, _j(details))


def _run_one(args) -> CriterionResult:
    number, cfg = args
    return run_criterion(number, cfg)


def run_suite(cfg: RunConfig | None = None, numbers=None,
              report: Callable[[CriterionResult], None] | None = None) -> list[CriterionResult]:
    """Run the selected criteria (all by default). With threads > 1 the criteria run in
    worker processes, each building its own shared witnesses."""
    cfg = cfg or RunConfig()
    numbers = list(numbers or range(1, len(CRITERIA) + 1))
    results = []
    if cfg.threads > 1:
        with ProcessPoolExecutor(cfg.threads) as pool:
            for r in pool.map(_run_one, [(k, cfg) for k in numbers]):
                results.append(r)
                if report:
                    report(r)
        return results
    ctx = Context(cfg)
    for k in numbers:
        r = run_criterion(k, cfg, ctx)
        results.append(r)
        if report:
            report(r)
    return results


def summary(results: list[CriterionResult], cfg: RunConfig) -> dict:
    return {"config": cfg.to_json(), "seed": cfg.seed,
            "passed": sum(r.passed for r in results), "total": len(results),
            "criteria": [r.to_json() for r in results]}
