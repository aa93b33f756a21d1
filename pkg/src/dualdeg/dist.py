"""Exact finite distributions, distance and entropy measures, the two-sample acceptance
test, reductions to distribution problems, pseudo-polarizers and triple postselection."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping

import numpy as np
from mpmath import iv

from .boolfn import point_to_bits
from .errors import DomainMismatch, InvalidInput, InvalidParams, Unconditionable
from .polylib import CubeFn
from .rational import as_fraction, fmt

DEFAULT_WIDTH = Fraction(1, 2 ** 20)


@dataclass(frozen=True, eq=False)
class Distribution:
    """Exact mass function on an explicitly labeled finite domain."""

    domain: tuple
    mass: dict

    def __post_init__(self):
        dom = tuple(self.domain)
        if len(set(dom)) != len(dom):
            raise InvalidInput("duplicate labels in the domain")
        labels = set(dom)
        mass = {}
        for k, v in self.mass.items():
            if k not in labels:
                raise InvalidInput(f"mass on label {k!r} outside the domain")
            v = as_fraction(v)
            if v < 0:
                raise InvalidInput(f"negative mass {v} on {k!r}")
            if v:
                mass[k] = v
        total = sum(mass.values(), Fraction(0))
        if total != 1:
            raise InvalidInput(f"masses sum to {total}, not 1")
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_dict(cls, mass: Mapping, domain: Iterable | None = None) -> "Distribution":
        return cls(tuple(mass) if domain is None else tuple(domain), dict(mass))

    @classmethod
    def uniform(cls, domain: Iterable) -> "Distribution":
        dom = tuple(domain)
        return cls(dom, {x: Fraction(1, len(dom)) for x in dom})

    @classmethod
    def point(cls, label: Hashable, domain: Iterable) -> "Distribution":
        return cls(tuple(domain), {label: Fraction(1)})

    @classmethod
    def from_weights(cls, weights: Mapping, domain: Iterable | None = None) -> "Distribution":
        """Normalize nonnegative rational weights to a distribution."""
        w = {k: as_fraction(v) for k, v in weights.items()}
        total = sum(w.values(), Fraction(0))
        if total <= 0:
            raise InvalidInput("weights have no positive mass")
        return cls(tuple(w) if domain is None else tuple(domain), {k: v / total for k, v in w.items()})

    @classmethod
    def from_cubefn(cls, mu: CubeFn) -> "Distribution":
        dom = tuple(point_to_bits(x, mu.arity) for x in range(mu.size))
        return cls(dom, {dom[x]: v for x, v in enumerate(mu.values()) if v})

    def to_cubefn(self) -> CubeFn:
        arity = len(self.domain[0]) if self.domain else 0
        if len(self.domain) != 1 << arity or not all(isinstance(x, str) and len(x) == arity for x in self.domain):
            raise InvalidInput("domain is not a full cube of bitstrings")
        return CubeFn.from_dict(arity, self.mass)

    def __getitem__(self, label) -> Fraction:
        return self.mass.get(label, Fraction(0))

    @property
    def support(self) -> list:
        return [x for x in self.domain if x in self.mass]

    def __eq__(self, other):
        if not isinstance(other, Distribution):
            return NotImplemented
        return set(self.domain) == set(other.domain) and self.mass == other.mass

    def __hash__(self):
        return hash(frozenset(self.mass.items()))

    def to_json(self) -> dict:
        return {"domain": [str(x) for x in self.domain],
                "mass": {str(k): fmt(v) for k, v in self.mass.items()}}

    @classmethod
    def from_json(cls, obj: dict) -> "Distribution":
        mass = {k: as_fraction(v) for k, v in obj["mass"].items()}
        return cls(tuple(obj.get("domain", mass)), mass)


def _same_domain(p: Distribution, q: Distribution):
    if set(p.domain) != set(q.domain):
        raise DomainMismatch("distributions live on different domains")


def tvd(p: Distribution, q: Distribution) -> Fraction:
    _same_domain(p, q)
    return sum((abs(p[x] - q[x]) for x in p.domain), Fraction(0)) / 2


def l2sq(p: Distribution, q: Distribution) -> Fraction:
    _same_domain(p, q)
    return sum(((p[x] - q[x]) ** 2 for x in p.domain), Fraction(0))


# ---------------------------------------------------------------- entropy brackets

def _mpf_to_fraction(raw) -> Fraction:
    sign, man, exp, _ = raw
    v = Fraction(int(man)) * (Fraction(2) ** exp)
    return -v if sign else v


def _bracket(compute, width: Fraction) -> tuple[Fraction, Fraction]:
    prec, saved = 64, iv.prec
    try:
        while True:
            iv.prec = prec
            val = compute()
            lo, hi = _mpf_to_fraction(val._mpi_[0]), _mpf_to_fraction(val._mpi_[1])
            if hi - lo <= width:
                return lo, hi
            prec *= 2
    finally:
        iv.prec = saved


def _iv_frac(x: Fraction):
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


@dataclass(frozen=True)
class Bracket:
    """Certified enclosure lo <= value <= hi with rational endpoints."""

    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        return self.lo <= as_fraction(x) <= self.hi

    def scale(self, c) -> "Bracket":
        c = as_fraction(c)
        return Bracket(c * self.lo, c * self.hi) if c >= 0 else Bracket(c * self.hi, c * self.lo)

    def shift(self, c) -> "Bracket":
        c = as_fraction(c)
        return Bracket(self.lo + c, self.hi + c)

    def compare(self, x) -> str:
        """'above', 'below' or 'indeterminate' relative to a rational or Bracket."""
        lo, hi = (x.lo, x.hi) if isinstance(x, Bracket) else (as_fraction(x),) * 2
        if self.lo > hi:
            return "above"
        if self.hi < lo:
            return "below"
        return "indeterminate"

    def surely_below(self, x) -> bool:
        return self.hi < as_fraction(x)

    def surely_at_least(self, x) -> bool:
        return self.lo >= as_fraction(x)

    def to_json(self) -> dict:
        return {"lo": fmt(self.lo), "hi": fmt(self.hi)}


def log2_bracket(x, width: Fraction = DEFAULT_WIDTH) -> Bracket:
    x = as_fraction(x)
    if x <= 0:
        raise InvalidParams("log of a nonpositive number")
    n, d = x.numerator, x.denominator
    if n & (n - 1) == 0 and d & (d - 1) == 0:
        v = Fraction(n.bit_length() - d.bit_length())
        return Bracket(v, v)
    return Bracket(*_bracket(lambda: iv.log(_iv_frac(x)) / iv.log(2), width))


def entropy_bracket(masses: Iterable, width: Fraction = DEFAULT_WIDTH) -> Bracket:
    """Shannon entropy in bits of the given masses, enclosed to the given width."""
    ps = [as_fraction(p) for p in masses if p]
    # exact when every mass is a power of two
    if all(p.numerator == 1 and p.denominator & (p.denominator - 1) == 0 for p in ps):
        v = sum((p * (p.denominator.bit_length() - 1) for p in ps), Fraction(0))
        return Bracket(v, v)

    def compute():
        acc = iv.mpf(0)
        for p in ps:
            t = _iv_frac(p)
            acc -= t * iv.log(t)
        return acc / iv.log(2)

    return Bracket(*_bracket(compute, width))


def entropy(p: Distribution, width: Fraction = DEFAULT_WIDTH) -> Bracket:
    return entropy_bracket(p.mass.values(), width)


@dataclass
class Metrics:
    tvd: Fraction
    l2sq: Fraction
    entropy_p: Bracket

    def to_json(self) -> dict:
        return {"tvd": fmt(self.tvd), "l2sq": fmt(self.l2sq), "entropy_p": self.entropy_p.to_json()}


def metrics(p: Distribution, q: Distribution, width: Fraction = DEFAULT_WIDTH) -> Metrics:
    return Metrics(tvd(p, q), l2sq(p, q), entropy(p, width))


# ---------------------------------------------------------------- two-sample test

def m2_branches(p: Distribution, q: Distribution) -> Fraction:
    """Acceptance probability by enumerating both samples in each of the three branches."""
    _same_domain(p, q)
    half = Fraction(1, 2)

    def same_source(r: Distribution) -> Fraction:
        return sum((r[a] * r[b] * (1 if a == b else half) for a in r.domain for b in r.domain), Fraction(0))

    cross = sum((p[a] * q[b] * (0 if a == b else half) for a in p.domain for b in p.domain), Fraction(0))
    return same_source(p) / 4 + same_source(q) / 4 + cross / 2


def m2_accept(p: Distribution, q: Distribution) -> Fraction:
    """1/2 + ||p - q||_2^2 / 8, cross-checked against branch enumeration."""
    value = Fraction(1, 2) + l2sq(p, q) / 8
    if value != m2_branches(p, q):
        raise AssertionError("closed form and branch enumeration disagree")
    return value


# ---------------------------------------------------------------- reductions

def _check_maps(fs, k: int | None = None) -> int:
    if not fs:
        raise InvalidInput("need at least one function")
    k = len(fs[0]) if k is None else k
    for f in fs:
        if len(f) != k:
            raise InvalidInput("all functions must map [k] to [k]")
        for v in f:
            if not isinstance(v, (int, np.integer)) or not 1 <= v <= k:
                raise InvalidInput(f"value {v!r} outside [1, {k}]")
    return k


def image_distribution(f) -> Distribution:
    """Distribution of f(j) for j uniform in [k]."""
    k = len(f)
    counts = {}
    for v in f:
        counts[int(v)] = counts.get(int(v), 0) + 1
    return Distribution(tuple(range(1, k + 1)), {v: Fraction(c, k) for v, c in counts.items()})


@dataclass
class SDUReport:
    tvd: Fraction
    block_tvds: list
    identity_holds: bool
    permutation_fraction: Fraction
    log_n: Bracket
    classification: str  # CLOSE, FAR, NEITHER or INDETERMINATE

    def to_json(self) -> dict:
        return {"tvd": fmt(self.tvd), "block_tvds": [fmt(t) for t in self.block_tvds],
                "identity_holds": self.identity_holds,
                "permutation_fraction": fmt(self.permutation_fraction),
                "log_n": self.log_n.to_json(), "classification": self.classification}


def reduce_gcol_to_sdu(fs, width: Fraction = DEFAULT_WIDTH) -> tuple[Distribution, SDUReport]:
    """D(x) = (1/m) sum_i {i} x D_{f_i} on [m] x [k], with its exact distance from uniform.

    CLOSE means ||D - U|| < 1/log2(mk); FAR means ||D - U|| > 1 - 1/log2(mk).
    """
    k = _check_maps(fs)
    m = len(fs)
    dom = tuple((i, y) for i in range(1, m + 1) for y in range(1, k + 1))
    mass = {}
    for i, f in enumerate(fs, start=1):
        for v in f:
            mass[(i, int(v))] = mass.get((i, int(v)), Fraction(0)) + Fraction(1, m * k)
    D = Distribution(dom, mass)
    U = Distribution.uniform(dom)
    total = tvd(D, U)
    uk = Distribution.uniform(range(1, k + 1))
    blocks = [tvd(image_distribution(f), uk) for f in fs]
    identity = total == sum(blocks, Fraction(0)) / m
    perms = Fraction(sum(1 for f in fs if len(set(f)) == k), m)
    logn = log2_bracket(m * k, width)
    # tvd < 1/log n  <=>  tvd * log n < 1, and similarly for 1 - tvd
    close, far = logn.scale(total), logn.scale(1 - total)
    if close.surely_below(1):
        cls = "CLOSE"
    elif far.surely_below(1):
        cls = "FAR"
    elif close.surely_at_least(1) and far.surely_at_least(1):
        cls = "NEITHER"
    else:
        cls = "INDETERMINATE"
    return D, SDUReport(total, blocks, identity, perms, logn, cls)


@dataclass
class EAReport:
    entropy: Bracket  # H(D(x)) via the chain rule
    block_entropies: list
    direct_entropy: Bracket  # H(D(x)) from the joint mass function
    tensor_entropy: Bracket  # 50 * H(D(x))
    threshold: Bracket  # 50 log2(dk) - 6.25
    classification: str  # YES, NO, GAP or INDETERMINATE

    def to_json(self) -> dict:
        return {"entropy": self.entropy.to_json(),
                "block_entropies": [b.to_json() for b in self.block_entropies],
                "direct_entropy": self.direct_entropy.to_json(),
                "tensor_entropy": self.tensor_entropy.to_json(),
                "threshold": self.threshold.to_json(), "classification": self.classification}


TENSOR_COPIES = 50
THRESHOLD_OFFSET = Fraction(25, 4)


def reduce_gapmajptp_to_ea(fs, width: Fraction = DEFAULT_WIDTH) -> tuple[Bracket, Bracket, EAReport]:
    """Entropy of D(x) = (1/d) sum_i {i} x D_{f_i} via H(X) + H(Y | X), the entropy of 50
    independent copies, and the threshold 50 log2(dk) - 6.25.

    YES means 50 H > threshold + 1, NO means 50 H < threshold - 1.
    """
    k = _check_maps(fs)
    d = len(fs)
    fine = width / (4 * TENSOR_COPIES * (d + 1))
    blocks = [entropy(image_distribution(f), fine) for f in fs]
    logd = log2_bracket(d, fine)
    H = Bracket(logd.lo + sum((b.lo for b in blocks), Fraction(0)) / d,
                logd.hi + sum((b.hi for b in blocks), Fraction(0)) / d)
    direct = entropy_bracket([Fraction(c, d * k) for f in fs for c in _counts(f)], fine)
    tensor = H.scale(TENSOR_COPIES)
    logn = log2_bracket(d * k, fine)
    thr = logn.scale(TENSOR_COPIES).shift(-THRESHOLD_OFFSET)
    hi_cut, lo_cut = thr.shift(1), thr.shift(-1)
    if tensor.lo > hi_cut.hi:
        cls = "YES"
    elif tensor.hi < lo_cut.lo:
        cls = "NO"
    elif tensor.hi <= hi_cut.lo and tensor.lo >= lo_cut.hi:
        cls = "GAP"
    else:
        cls = "INDETERMINATE"
    return H, thr, EAReport(H, blocks, direct, tensor, thr, cls)


def _counts(f) -> list[int]:
    counts = {}
    for v in f:
        counts[int(v)] = counts.get(int(v), 0) + 1
    return list(counts.values())


# ---------------------------------------------------------------- pseudo-polarizers

@dataclass(frozen=True)
class PseudoPolarizer:
    """Joint distributions of (S^b, R^b) for b = 0, 1; S on n bits (low bits of the index),
    R on l bits (high bits)."""

    n: int
    l: int
    p0: tuple  # masses indexed by point, length 2^(n+l)
    p1: tuple

    def __post_init__(self):
        size = 1 << (self.n + self.l)
        for p in (self.p0, self.p1):
            if len(p) != size:
                raise InvalidInput(f"expected {size} masses")
            if any(as_fraction(v) < 0 for v in p) or sum(as_fraction(v) for v in p) != 1:
                raise InvalidInput("each joint distribution must be nonnegative with mass 1")
        object.__setattr__(self, "p0", tuple(as_fraction(v) for v in self.p0))
        object.__setattr__(self, "p1", tuple(as_fraction(v) for v in self.p1))

    @classmethod
    def random(cls, n: int, l: int, rng, max_weight: int = 9) -> "PseudoPolarizer":
        size = 1 << (n + l)

        def draw():
            w = [rng.randint(0, max_weight) for _ in range(size)]
            if not any(w):
                w[rng.randrange(size)] = 1
            t = sum(w)
            return tuple(Fraction(v, t) for v in w)

        return cls(n, l, draw(), draw())


def apply_channel(p, n: int, l: int, alpha) -> list[Fraction]:
    """(B_alpha^{(x)n} (x) I^{(x)l}) p, where B_alpha keeps a bit with probability (1+alpha)/2."""
    alpha = as_fraction(alpha)
    keep, flip = (1 + alpha) / 2, (1 - alpha) / 2
    v = [as_fraction(x) for x in p]
    for i in range(n):
        bit = 1 << i
        v = [keep * v[x] + flip * v[x ^ bit] for x in range(len(v))]
    return v


@dataclass
class PolarizerResult:
    d0: list
    d1: list
    tvd: Fraction
    beta: Fraction | None = None
    tvd_beta: Fraction | None = None
    ratio_ok: bool | None = None

    def to_json(self) -> dict:
        return {"d0": [fmt(x) for x in self.d0], "d1": [fmt(x) for x in self.d1],
                "tvd": fmt(self.tvd),
                "beta": None if self.beta is None else fmt(self.beta),
                "tvd_beta": None if self.tvd_beta is None else fmt(self.tvd_beta),
                "ratio_ok": self.ratio_ok}


def _channel_tvd(pp: PseudoPolarizer, a: Fraction) -> tuple[list, list, Fraction]:
    d0 = apply_channel(pp.p0, pp.n, pp.l, a)
    d1 = apply_channel(pp.p1, pp.n, pp.l, a)
    return d0, d1, sum((abs(x - y) for x, y in zip(d0, d1)), Fraction(0)) / 2


def polarizer_apply(pp: PseudoPolarizer, alpha, beta=None) -> PolarizerResult:
    """Polarized pair for the input pair (D^alpha_0, D^alpha_1). With beta < alpha, also check
    tvd_alpha / tvd_beta <= 2^((n+l)/2) (alpha/beta)^n, compared after squaring."""
    alpha = as_fraction(alpha)
    if not 0 < alpha < 1:
        raise InvalidParams(f"alpha = {alpha} outside (0, 1)")
    d0, d1, ta = _channel_tvd(pp, alpha)
    res = PolarizerResult(d0, d1, ta)
    if beta is not None:
        beta = as_fraction(beta)
        if not 0 < beta < alpha:
            raise InvalidParams("need 0 < beta < alpha")
        _, _, tb = _channel_tvd(pp, beta)
        res.beta, res.tvd_beta = beta, tb
        if tb == 0:
            res.ratio_ok = ta == 0
        else:
            res.ratio_ok = (ta / tb) ** 2 <= 2 ** (pp.n + pp.l) * (alpha / beta) ** (2 * pp.n)
    return res


# ---------------------------------------------------------------- postselection

def postselect_three(D0: Distribution, D1: Distribution) -> Distribution:
    """Law of three fair coins b given that samples y_j ~ D_{b_j} all coincide."""
    _same_domain(D0, D1)
    Ds = (D0, D1)
    weights = {}
    for bits in itertools.product((0, 1), repeat=3):
        w = sum((Ds[bits[0]][y] * Ds[bits[1]][y] * Ds[bits[2]][y] for y in D0.domain), Fraction(0))
        weights["".join(map(str, bits))] = w
    if not any(weights.values()):
        raise Unconditionable("the three samples never coincide")
    return Distribution.from_weights(weights)
