"""Exact polynomial machinery on the cube and on the line.

CubeFn stores a rational function on {0,1}^m as integer numerators over one
positive common denominator. Numerators live in an int64 array while they
provably fit, and fall back to Python integers (object arrays) otherwise, so
every operation stays exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .boolfn import bits_to_point, point_to_bits, popcounts
from .errors import ArityError, DegenerateNodes, InvalidParams
from .rational import as_fraction, fmt, lcm_all

_SAFE = 1 << 62


def _maxabs(arr: np.ndarray) -> int:
    if arr.size == 0:
        return 0
    return int(np.abs(arr).max())


def _fit(arr: np.ndarray) -> np.ndarray:
    """Use int64 storage whenever every entry is comfortably in range."""
    if arr.dtype == np.int64:
        return arr
    if arr.dtype != object:
        return arr.astype(np.int64)
    if _maxabs(arr) < _SAFE:
        return arr.astype(np.int64)
    return arr


def _big(arr: np.ndarray) -> np.ndarray:
    return arr if arr.dtype == object else arr.astype(object)


def _sum(arr: np.ndarray) -> int:
    """Exact sum, widening to Python integers when int64 could overflow."""
    if arr.dtype == np.int64 and _maxabs(arr) * max(arr.size, 1) >= 1 << 63:
        return int(_big(arr).sum())
    return int(arr.sum())


def _scale(arr: np.ndarray, k: int) -> np.ndarray:
    if k == 1:
        return arr
    if arr.dtype == np.int64 and _maxabs(arr) * abs(k) < _SAFE:
        return arr * k
    return _big(arr) * k


def _add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.dtype == np.int64 and b.dtype == np.int64 and _maxabs(a) + _maxabs(b) < _SAFE:
        return a + b
    return _fit(_big(a) + _big(b))


def _mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.dtype == np.int64 and b.dtype == np.int64 and _maxabs(a) * _maxabs(b) < _SAFE:
        return a * b
    return _fit(_big(a) * _big(b))


@dataclass(frozen=True, eq=False)
class CubeFn:
    """An exact rational-valued function on the m-bit cube: value(x) = num[x] / den."""

    arity: int
    num: np.ndarray
    den: int = 1

    def __post_init__(self):
        num = np.asarray(self.num)
        if num.shape != (1 << self.arity,):
            raise ArityError(f"numerators have shape {num.shape}, expected ({1 << self.arity},)")
        if num.dtype != object and num.dtype != np.int64:
            num = num.astype(np.int64)
        den = int(self.den)
        if den == 0:
            raise InvalidParams("zero denominator")
        if den < 0:
            num, den = -num, -den
        num.setflags(write=False)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    # constructors
    @classmethod
    def zeros(cls, arity: int) -> "CubeFn":
        return cls(arity, np.zeros(1 << arity, dtype=np.int64), 1)

    @classmethod
    def from_values(cls, arity: int, values: Iterable) -> "CubeFn":
        vals = [as_fraction(v) for v in values]
        if len(vals) != 1 << arity:
            raise ArityError(f"expected {1 << arity} values, got {len(vals)}")
        den = lcm_all(v.denominator for v in vals)
        num = np.array([v.numerator * (den // v.denominator) for v in vals], dtype=object)
        return cls(arity, _fit(num), den).reduced()

    @classmethod
    def from_dict(cls, arity: int, values: Mapping) -> "CubeFn":
        """Points given as ints or bitstrings; omitted points are 0."""
        vals = [Fraction(0)] * (1 << arity)
        for k, v in values.items():
            x = bits_to_point(k) if isinstance(k, str) else int(k)
            vals[x] = as_fraction(v)
        return cls.from_values(arity, vals)

    @classmethod
    def from_int_array(cls, arity: int, arr: np.ndarray, den: int = 1) -> "CubeFn":
        return cls(arity, _fit(np.asarray(arr)), den)

    # access
    @property
    def size(self) -> int:
        return 1 << self.arity

    def value(self, point: int | str) -> Fraction:
        x = bits_to_point(point) if isinstance(point, str) else point
        return Fraction(int(self.num[x]), self.den)

    def __getitem__(self, point) -> Fraction:
        return self.value(point)

    def values(self) -> list[Fraction]:
        return [Fraction(int(v), self.den) for v in self.num]

    def support_mask(self) -> np.ndarray:
        return self.num != 0

    def is_zero(self) -> bool:
        return not bool(self.support_mask().any())

    def total(self) -> Fraction:
        return Fraction(_sum(self.num), self.den)

    def l1(self) -> Fraction:
        return Fraction(_sum(np.abs(self.num)), self.den)

    def masked_l1(self, mask: np.ndarray) -> Fraction:
        return Fraction(_sum(np.abs(self.num[mask])), self.den)

    def masked_sum(self, mask: np.ndarray) -> Fraction:
        return Fraction(_sum(self.num[mask]), self.den)

    def dot_int(self, weights: np.ndarray) -> Fraction:
        """sum_x value(x) * weights[x] for an integer weight array."""
        w = np.asarray(weights)
        if self.num.dtype == np.int64 and _maxabs(self.num) * max(_maxabs(w), 1) * self.size < _SAFE:
            return Fraction(int((self.num * w.astype(np.int64)).sum()), self.den)
        return Fraction(int((_big(self.num) * _big(w.astype(np.int64))).sum()), self.den)

    # arithmetic
    def reduced(self) -> "CubeFn":
        g = int(np.gcd.reduce(np.append(_big(self.num), self.den)))
        if g <= 1:
            return self
        return CubeFn(self.arity, _fit(_big(self.num) // g), self.den // g)

    def _check(self, other: "CubeFn"):
        if not isinstance(other, CubeFn):
            raise TypeError("expected CubeFn")
        if other.arity != self.arity:
            raise ArityError(f"arity {self.arity} vs {other.arity}")

    def __add__(self, other: "CubeFn") -> "CubeFn":
        self._check(other)
        L = self.den * other.den // math.gcd(self.den, other.den)
        return CubeFn(self.arity, _add(_scale(self.num, L // self.den), _scale(other.num, L // other.den)), L)

    def __neg__(self) -> "CubeFn":
        return CubeFn(self.arity, -self.num if self.num.dtype == object else -self.num, self.den)

    def __sub__(self, other: "CubeFn") -> "CubeFn":
        return self + (-other)

    def scale(self, c) -> "CubeFn":
        c = as_fraction(c)
        out = CubeFn(self.arity, _scale(self.num, c.numerator), self.den * c.denominator)
        return out.reduced() if self.size <= 1 << 16 else out

    def __mul__(self, other):
        if isinstance(other, CubeFn):
            self._check(other)
            return CubeFn(self.arity, _mul(self.num, other.num), self.den * other.den)
        return self.scale(other)

    __rmul__ = __mul__

    def times_int(self, arr: np.ndarray) -> "CubeFn":
        """Pointwise product with an integer array (e.g. a sign table)."""
        arr = np.asarray(arr)
        arr = _fit(arr) if arr.dtype == object else arr.astype(np.int64)
        return CubeFn(self.arity, _mul(self.num, arr), self.den)

    def restrict(self, mask: np.ndarray) -> "CubeFn":
        num = self.num.copy()
        num[~np.asarray(mask, dtype=bool)] = 0
        return CubeFn(self.arity, num, self.den)

    def positive_part(self) -> "CubeFn":
        return self.restrict(self.num > 0)

    def negative_part(self) -> "CubeFn":
        """-min(0, value), a nonnegative function."""
        return (-self).restrict(self.num < 0)

    def __eq__(self, other):
        if not isinstance(other, CubeFn):
            return NotImplemented
        if other.arity != self.arity:
            return False
        a = _scale(self.num, other.den)
        b = _scale(other.num, self.den)
        return bool(np.array_equal(_big(a), _big(b)) if (a.dtype == object or b.dtype == object)
                    else np.array_equal(a, b))

    def __hash__(self):
        return hash((self.arity, tuple(self.values())))

    def __repr__(self):
        if self.size <= 16:
            inner = ", ".join(str(v) for v in self.values())
            return f"CubeFn({self.arity}, [{inner}])"
        return f"CubeFn(arity={self.arity}, support={int(self.support_mask().sum())})"

    # JSON
    def to_json(self) -> dict:
        vals = {}
        for x in np.flatnonzero(self.num):
            vals[point_to_bits(int(x), self.arity)] = fmt(Fraction(int(self.num[x]), self.den))
        return {"arity": self.arity, "values": vals}

    @classmethod
    def from_json(cls, obj: dict) -> "CubeFn":
        arity = int(obj["arity"])
        for k in obj.get("values", {}):
            if len(k) != arity:
                raise ArityError(f"point {k!r} has wrong length")
        return cls.from_dict(arity, obj.get("values", {}))


def superset_sums(psi: CubeFn) -> tuple[np.ndarray, int]:
    """g[S] = sum_{x >= S} num[x], i.e. den * <psi, chi_S> for chi_S = prod_{i in S} x_i."""
    total = _sum(np.abs(psi.num)) if psi.size else 0
    if psi.num.dtype == np.int64 and total < _SAFE:
        w = psi.num.astype(np.int64, copy=True)
    else:
        w = _big(psi.num).copy()
    for i in range(psi.arity):
        a = w.reshape(-1, 2, 1 << i)
        a[:, 0, :] += a[:, 1, :]
    return w, psi.den


def pure_high_degree(psi: CubeFn) -> int:
    """Largest d with <psi, chi_S> = 0 for every |S| <= d.

    Returns -1 when psi does not sum to zero and the arity for the zero function.
    """
    g, _ = superset_sums(psi)
    nz = np.flatnonzero(g)
    if nz.size == 0:
        return psi.arity
    pc = popcounts(psi.arity)
    return int(pc[nz].min()) - 1


@dataclass(frozen=True)
class MultilinearPoly:
    """A multilinear polynomial in the 0/1 variables x_1..x_m.

    Monomials are bitmasks S with chi_S(x) = prod_{i in S} x_i.
    """

    arity: int
    coeffs: Mapping[int, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for S, c in dict(self.coeffs).items():
            S = int(S)
            if S < 0 or S >> self.arity:
                raise ArityError(f"monomial {S:b} outside arity {self.arity}")
            c = as_fraction(c)
            if c != 0:
                clean[S] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def constant(cls, arity: int, c) -> "MultilinearPoly":
        return cls(arity, {0: as_fraction(c)})

    @classmethod
    def variable(cls, arity: int, i: int) -> "MultilinearPoly":
        """The variable x_{i+1} (0-based index i)."""
        return cls(arity, {1 << i: Fraction(1)})

    @property
    def degree(self) -> int:
        """Largest monomial size; -1 for the zero polynomial."""
        if not self.coeffs:
            return -1
        return max(bin(S).count("1") for S in self.coeffs)

    def evaluate(self, point: int | str) -> Fraction:
        x = bits_to_point(point) if isinstance(point, str) else point
        return sum((c for S, c in self.coeffs.items() if S & x == S), Fraction(0))

    def table(self) -> CubeFn:
        """Values on all 2^m points (subset-sum transform)."""
        den = lcm_all(c.denominator for c in self.coeffs.values())
        w = np.zeros(1 << self.arity, dtype=object)
        for S, c in self.coeffs.items():
            w[S] = c.numerator * (den // c.denominator)
        w = _fit(w)
        if w.dtype == np.int64 and _maxabs(w) * (1 << self.arity) >= _SAFE:
            w = _big(w)
        w = w.copy()
        for i in range(self.arity):
            a = w.reshape(-1, 2, 1 << i)
            a[:, 1, :] += a[:, 0, :]
        return CubeFn(self.arity, _fit(w), den)

    @classmethod
    def from_table(cls, f: CubeFn) -> "MultilinearPoly":
        """Unique multilinear interpolant of f (Moebius inversion)."""
        w = _big(f.num).copy()
        for i in range(f.arity):
            a = w.reshape(-1, 2, 1 << i)
            a[:, 1, :] -= a[:, 0, :]
        return cls(f.arity, {int(S): Fraction(int(w[S]), f.den) for S in np.flatnonzero(w)})

    def __add__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        if other.arity != self.arity:
            raise ArityError("arity mismatch")
        out = dict(self.coeffs)
        for S, c in other.coeffs.items():
            out[S] = out.get(S, Fraction(0)) + c
        return MultilinearPoly(self.arity, out)

    def __neg__(self) -> "MultilinearPoly":
        return MultilinearPoly(self.arity, {S: -c for S, c in self.coeffs.items()})

    def __sub__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        return self + (-other)

    def scale(self, c) -> "MultilinearPoly":
        c = as_fraction(c)
        return MultilinearPoly(self.arity, {S: c * v for S, v in self.coeffs.items()})

    def __mul__(self, other):
        if not isinstance(other, MultilinearPoly):
            return self.scale(other)
        if other.arity != self.arity:
            raise ArityError("arity mismatch")
        out: dict[int, Fraction] = {}
        for S, a in self.coeffs.items():
            for T, b in other.coeffs.items():
                out[S | T] = out.get(S | T, Fraction(0)) + a * b  # x_i^2 = x_i on the cube
        return MultilinearPoly(self.arity, out)

    __rmul__ = scale

    def embed(self, arity: int, offset: int) -> "MultilinearPoly":
        """Same polynomial on variables offset..offset+m-1 of a larger cube."""
        if offset + self.arity > arity:
            raise ArityError("embedding does not fit")
        return MultilinearPoly(arity, {S << offset: c for S, c in self.coeffs.items()})

    def to_json(self) -> dict:
        return {"arity": self.arity,
                "coeffs": {point_to_bits(S, self.arity): fmt(c) for S, c in self.coeffs.items()}}

    @classmethod
    def from_json(cls, obj: dict) -> "MultilinearPoly":
        arity = int(obj["arity"])
        return cls(arity, {bits_to_point(k): as_fraction(v) for k, v in obj["coeffs"].items()})


def inner_product(psi: CubeFn, p: MultilinearPoly) -> Fraction:
    """Exact sum over the cube of psi(x) p(x)."""
    if psi.arity != p.arity:
        raise ArityError(f"arity {psi.arity} vs {p.arity}")
    g, den = superset_sums(psi)
    return sum((c * int(g[S]) for S, c in p.coeffs.items()), Fraction(0)) / den


# ---------------------------------------------------------------- univariate

@dataclass(frozen=True)
class UnivariatePoly:
    coeffs: tuple = ()

    def __post_init__(self):
        cs = [as_fraction(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def constant(cls, c) -> "UnivariatePoly":
        return cls((c,))

    @classmethod
    def x(cls) -> "UnivariatePoly":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        """-1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, x) -> Fraction:
        x = as_fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __add__(self, other: "UnivariatePoly") -> "UnivariatePoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return UnivariatePoly(tuple(x + y for x, y in zip(a, b)))

    def __neg__(self) -> "UnivariatePoly":
        return UnivariatePoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: "UnivariatePoly") -> "UnivariatePoly":
        return self + (-other)

    def scale(self, c) -> "UnivariatePoly":
        c = as_fraction(c)
        return UnivariatePoly(tuple(c * v for v in self.coeffs))

    def __mul__(self, other):
        if not isinstance(other, UnivariatePoly):
            return self.scale(other)
        if not self.coeffs or not other.coeffs:
            return UnivariatePoly(())
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UnivariatePoly(tuple(out))

    __rmul__ = scale

    def to_json(self) -> list[str]:
        return [fmt(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, obj) -> "UnivariatePoly":
        return cls(tuple(as_fraction(c) for c in obj))


def lagrange_interpolate(nodes) -> UnivariatePoly:
    """Unique polynomial of degree < len(nodes) through the given (x, y) pairs."""
    pts = [(as_fraction(x), as_fraction(y)) for x, y in nodes]
    xs = [x for x, _ in pts]
    if len(set(xs)) != len(xs):
        raise DegenerateNodes("duplicate abscissae")
    if not pts:
        return UnivariatePoly(())
    # W(x) = prod (x - x_j); each basis numerator is W / (x - x_i) by synthetic division
    W = [Fraction(1)]
    for xj in xs:
        nxt = [Fraction(0)] * (len(W) + 1)
        for k, c in enumerate(W):
            nxt[k + 1] += c
            nxt[k] -= xj * c
        W = nxt
    total = [Fraction(0)] * len(xs)
    for i, (xi, yi) in enumerate(pts):
        if yi == 0:
            continue
        # divide W by (x - xi)
        q = [Fraction(0)] * (len(W) - 1)
        carry = Fraction(0)
        for k in range(len(W) - 1, 0, -1):
            carry = W[k] + carry * xi if k != len(W) - 1 else W[k]
            q[k - 1] = carry
        denom = Fraction(1)
        for j, xj in enumerate(xs):
            if j != i:
                denom *= xi - xj
        s = yi / denom
        for k, c in enumerate(q):
            total[k] += s * c
    return UnivariatePoly(tuple(total))


# ---------------------------------------------------------------- helper P

@dataclass(frozen=True)
class HelperReport:
    a: Fraction
    n: int
    eps: Fraction
    N: int
    cutoff: int  # floor(eps * n)
    degree: int
    degree_bound: Fraction  # (1 + 10/a) eps n + 3
    interpolation_ok: bool
    point_checks: tuple  # (x, |P(x)| <= a^x / 2) for x in cutoff+1..n

    @property
    def degree_ok(self) -> bool:
        return self.degree <= self.degree_bound

    @property
    def bound_holds(self) -> bool:
        return all(ok for _, ok in self.point_checks)

    def failing_points(self) -> list[int]:
        return [x for x, ok in self.point_checks if not ok]

    def to_json(self) -> dict:
        return {
            "a": fmt(self.a), "n": self.n, "eps": fmt(self.eps), "N": self.N,
            "cutoff": self.cutoff, "degree": self.degree,
            "degree_bound": fmt(self.degree_bound), "degree_ok": self.degree_ok,
            "interpolation_ok": self.interpolation_ok, "bound_holds": self.bound_holds,
            "failing_points": self.failing_points(),
        }


def helper_nodes(a, n: int, eps) -> tuple[int, int, list[tuple[int, Fraction]]]:
    a, eps = as_fraction(a), as_fraction(eps)
    cutoff = math.floor(eps * n)
    N = math.ceil((1 + 10 / a) * eps * n + 2)
    nodes = [(x, (-a) ** x) for x in range(cutoff + 1)]
    nodes += [(x, Fraction(0)) for x in range(cutoff + 1, N + 1)]
    return cutoff, N, nodes


def helper_p(a, n: int, eps) -> tuple[UnivariatePoly, HelperReport]:
    """Polynomial equal to (-a)^x on 0..floor(eps n) and to 0 on the next block of integers
    up to N = ceil((1 + 10/a) eps n + 2); the report checks |P(x)| <= a^x / 2 on the tail."""
    a, eps = as_fraction(a), as_fraction(eps)
    if not (Fraction(1, 2) < eps < 1):
        raise InvalidParams(f"eps = {eps} outside (1/2, 1)")
    if a < 1:
        raise InvalidParams(f"a = {a} must be at least 1")
    if n < 1:
        raise InvalidParams("n must be at least 1")
    cutoff, N, nodes = helper_nodes(a, n, eps)
    P = lagrange_interpolate(nodes)
    interp_ok = all(P(x) == y for x, y in nodes)
    checks = tuple((x, 2 * abs(P(x)) <= a ** x) for x in range(cutoff + 1, n + 1))
    report = HelperReport(a, n, eps, N, cutoff, P.degree, (1 + 10 / a) * eps * n + 3,
                          interp_ok, checks)
    return P, report


def helper_p_from_basis(a, n: int, eps) -> UnivariatePoly:
    """The same polynomial assembled as sum_i e_i(x) (-a)^i with Lagrange basis
    polynomials e_i on the integer nodes 0..N."""
    a, eps = as_fraction(a), as_fraction(eps)
    cutoff, N, _ = helper_nodes(a, n, eps)
    total = UnivariatePoly(())
    for i in range(cutoff + 1):
        e = UnivariatePoly((1,))
        for j in range(N + 1):
            if j != i:
                e = e * UnivariatePoly((Fraction(-j, i - j), Fraction(1, i - j)))
        total = total + e.scale((-a) ** i)
    return total


# ---------------------------------------------------------------- P_k basis

def _falling_binomial(shift, sign: int, k: int) -> UnivariatePoly:
    """C(shift + sign*m, k) as a polynomial in m."""
    out = UnivariatePoly((1,))
    for t in range(k):
        out = out * UnivariatePoly((as_fraction(shift) - t, sign))
    return out.scale(Fraction(1, math.factorial(k)))


def pk_basis(n: int, alpha, d: int) -> list[UnivariatePoly]:
    """P_k(m) = sum_{i<=k} C(m,i) C(n-m,k-i) (-alpha)^(-i) for k = 0..d."""
    alpha = as_fraction(alpha)
    if alpha == 0:
        raise InvalidParams("alpha must be nonzero")
    if alpha < 0:
        raise InvalidParams("alpha must be positive")
    if not 0 <= d <= n:
        raise InvalidParams(f"need 0 <= d <= n, got d={d}, n={n}")
    basis = []
    for k in range(d + 1):
        acc = UnivariatePoly(())
        for i in range(k + 1):
            term = _falling_binomial(0, 1, i) * _falling_binomial(n, -1, k - i)
            acc = acc + term.scale((-alpha) ** (-i))
        basis.append(acc)
    return basis


def pk_leading(k: int, alpha) -> Fraction:
    alpha = as_fraction(alpha)
    return (-1) ** k * (1 + 1 / alpha) ** k / math.factorial(k)


def expand_in_basis(Q: UnivariatePoly, basis: list[UnivariatePoly]) -> list[Fraction]:
    """beta with Q = sum beta_k basis[k]; basis[k] must have exact degree k."""
    if Q.degree >= len(basis):
        raise InvalidParams(f"degree {Q.degree} exceeds basis size {len(basis)}")
    beta = [Fraction(0)] * len(basis)
    rest = Q
    for k in range(len(basis) - 1, -1, -1):
        if rest.degree == k:
            beta[k] = rest.leading / basis[k].leading
            rest = rest - basis[k].scale(beta[k])
    if rest.degree != -1:
        raise InvalidParams("basis elements are not of exact degree k")
    return beta


# ---------------------------------------------------------------- block products

def block_product(factors: list[CubeFn], cap: int | None = None) -> CubeFn:
    """psi(x_1..x_n) = prod_i factors[i](x_i); block i occupies bits i*M .. i*M+M-1."""
    if not factors:
        raise InvalidParams("need at least one factor")
    M = factors[0].arity
    if any(f.arity != M for f in factors):
        raise ArityError("factors must share one arity")
    if cap is not None and M * len(factors) > cap:
        from .errors import TooLarge
        raise TooLarge(f"arity {M * len(factors)} exceeds cap {cap}")
    bound = 1
    for f in factors:
        bound *= max(_maxabs(f.num), 1)
    big = bound >= _SAFE or any(f.num.dtype == object for f in factors)
    arr = _big(factors[0].num) if big else factors[0].num
    den = factors[0].den
    for f in factors[1:]:
        base = _big(f.num) if big else f.num
        arr = np.multiply.outer(base, arr).ravel()
        den *= f.den
    return CubeFn(M * len(factors), _fit(arr) if big else arr, den)


def tensor_power(phi: CubeFn, n: int, cap: int | None = None) -> CubeFn:
    """psi(x_1..x_n) = prod_i phi(x_i)."""
    if n < 1:
        raise InvalidParams("n must be at least 1")
    return block_product([phi] * n, cap)


def block_counts(mask: np.ndarray, n: int) -> np.ndarray:
    """Number of blocks i with mask[x_i] true, for every point of the n-fold cube."""
    m = np.asarray(mask, dtype=np.int8)
    arr = m
    for _ in range(n - 1):
        arr = np.add.outer(m, arr).ravel()
    return arr
