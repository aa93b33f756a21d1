"""Pattern matrices, orthogonalizing distributions, PTP symmetrization, smoothness reports
and sign-factorization certificates."""
from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .boolfn import Convention, PartialBoolFn, point_to_bits
from .dist import Distribution
from .errors import (DimensionMismatch, InvalidInput, InvalidParams, NotOrthogonalizing,
                     TooLarge)
from .polylib import CubeFn, pure_high_degree
from .rational import as_fraction, fmt

MATRIX_CAP = 1 << 20


@dataclass(frozen=True, eq=False)
class SignMatrix:
    """Entries phi(x|_S xor w) of the (N, n, phi) pattern matrix.

    Rows are x in {0,1}^N (bit i is coordinate i; bit value 1 stands for -1). Columns are
    (S, w) with S given by one choice c_j in [N/n] per block j, column index
    s_index * 2^n + w where s_index = sum_j c_j (N/n)^j.
    """

    phi: PartialBoolFn
    N: int
    n: int
    entries: np.ndarray | None  # dense int8 array, or None when only lazy access is allowed

    @property
    def block(self) -> int:
        return self.N // self.n

    @property
    def shape(self) -> tuple[int, int]:
        return 1 << self.N, self.block ** self.n * (1 << self.n)

    def column_label(self, col: int) -> tuple[tuple[int, ...], int]:
        """(S as 0-based coordinates, w) for a column index."""
        s_index, w = divmod(col, 1 << self.n)
        S = []
        for j in range(self.n):
            s_index, c = divmod(s_index, self.block)
            S.append(j * self.block + c)
        return tuple(S), w

    def hidden_input(self, x: int, col: int) -> int:
        S, w = self.column_label(col)
        u = 0
        for j, s in enumerate(S):
            u |= ((x >> s) & 1) << j
        return u ^ w

    def entry(self, x: int, col: int) -> int:
        if self.entries is not None:
            return int(self.entries[x, col])
        return int(self.phi.sign_table()[self.hidden_input(x, col)])

    def to_csv(self, path):
        if self.entries is None:
            raise TooLarge("matrix was built lazily; no dense export")
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(self.entries.tolist())

    def labels(self) -> dict:
        rows, cols = self.shape
        return {
            "rows": [point_to_bits(x, self.N) for x in range(rows)],
            "columns": [{"S": [s + 1 for s in S], "w": point_to_bits(w, self.n)}
                        for S, w in map(self.column_label, range(cols))],
        }

    def write_labels(self, path):
        with open(path, "w") as fh:
            json.dump(self.labels(), fh, indent=1, sort_keys=True)


def pattern_matrix(phi: PartialBoolFn, N: int, n: int, cap: int = MATRIX_CAP,
                   lazy: bool = False) -> SignMatrix:
    """The (N, n, phi) pattern matrix; 0 where phi is undefined."""
    if phi.convention != Convention.PLUS_MINUS:
        raise InvalidParams("pattern matrices take phi in the +-1 convention")
    if phi.arity != n:
        raise InvalidParams(f"phi has arity {phi.arity}, expected {n}")
    if n < 1 or N % n:
        raise InvalidParams("n must divide N")
    block = N // n
    rows, cols = 1 << N, block ** n * (1 << n)
    if rows * cols > cap:
        if lazy:
            return SignMatrix(phi, N, n, None)
        raise TooLarge(f"{rows} x {cols} entries exceed the cap {cap}")
    signs = phi.sign_table().astype(np.int8)
    xs = np.arange(rows, dtype=np.int64)
    ws = np.arange(1 << n, dtype=np.int64)
    out = np.empty((rows, cols), dtype=np.int8)
    for s_index, choice in enumerate(itertools.product(range(block), repeat=n)):
        # itertools.product varies the last block fastest; s_index wants block 0 fastest
        c = choice[::-1]
        u = np.zeros(rows, dtype=np.int64)
        for j in range(n):
            u |= ((xs >> (j * block + c[j])) & 1) << j
        out[:, s_index * (1 << n):(s_index + 1) * (1 << n)] = signs[u[:, None] ^ ws[None, :]]
    out.setflags(write=False)
    return SignMatrix(phi, N, n, out)


# ---------------------------------------------------------------- orthogonalizing distributions

def orthogonalizing_distribution(psi: CubeFn, h: PartialBoolFn) -> tuple[Distribution, int]:
    """mu = psi * sign(h) normalized; d = pure high degree of mu * sign(h).

    sign(h) is the numeric value for +-1 functions and +1 on ONE, -1 on ZERO for 0/1
    functions, so a threshold dual for h in either convention gives psi * sign(h) >= 0.
    """
    if psi.arity != h.arity:
        raise InvalidParams("arity mismatch")
    s = h.sign_table()
    prod = psi.times_int(s)
    if (prod.num < 0).any():
        raise NotOrthogonalizing("psi * h is negative somewhere")
    if prod.is_zero():
        raise NotOrthogonalizing("psi * h is identically zero")
    mu = prod.scale(1 / prod.total())
    d = pure_high_degree(mu.times_int(s))
    return Distribution.from_cubefn(mu), d


# ---------------------------------------------------------------- symmetrization

def symmetrize_ptp(fvec) -> tuple[int, ...]:
    """Occurrence counts of the values 1..n in f, sorted ascending."""
    n = len(fvec)
    counts = [0] * n
    for v in fvec:
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or not 1 <= v <= n:
            raise InvalidInput(f"value {v!r} outside [1, {n}]")
        counts[int(v) - 1] += 1
    return tuple(sorted(counts))


# ---------------------------------------------------------------- smoothness

@dataclass
class SmoothnessReport:
    n: int
    d: int
    alpha: Fraction
    below: int  # points with mu(x) < 2^(-alpha d) 2^(-n)
    fraction: Fraction

    def to_json(self) -> dict:
        return {"n": self.n, "d": self.d, "alpha": fmt(self.alpha), "below": self.below,
                "fraction": fmt(self.fraction)}


def smoothness_report(mu, d: int, alpha) -> SmoothnessReport:
    """Exact fraction of cube points where mu(x) < 2^(-alpha d) 2^(-n).

    With alpha d = p/q the test mu(x) 2^n < 2^(-p/q) becomes (mu(x) 2^n)^q 2^p < 1.
    """
    alpha = as_fraction(alpha)
    if isinstance(mu, Distribution):
        mu = mu.to_cubefn()
    n = mu.arity
    ad = alpha * d
    p, q = ad.numerator, ad.denominator
    below = 0
    for v in mu.values():
        t = (v * 2 ** n) ** q * Fraction(2) ** p
        if t < 1:
            below += 1
    return SmoothnessReport(n, d, alpha, below, Fraction(below, 1 << n))


# ---------------------------------------------------------------- sign factorization

def _as_matrix(M) -> np.ndarray:
    return np.asarray(M.entries if isinstance(M, SignMatrix) else M)


def verify_sign_factorization(M, U, V) -> bool:
    """True iff sign((U V^T)_ij) = M_ij wherever M_ij != 0. The rank of U V^T then bounds
    the sign-rank of M from above."""
    A = _as_matrix(M)
    if A is None or A.ndim != 2:
        raise DimensionMismatch("M must be a dense two-dimensional sign matrix")
    U = [[as_fraction(v) for v in row] for row in U]
    V = [[as_fraction(v) for v in row] for row in V]
    if len(U) != A.shape[0] or len(V) != A.shape[1]:
        raise DimensionMismatch(f"U has {len(U)} rows, V has {len(V)}, M is {A.shape}")
    r = {len(row) for row in U} | {len(row) for row in V}
    if len(r) != 1:
        raise DimensionMismatch("U and V must have the same number of columns")
    for i, u in enumerate(U):
        for j, v in enumerate(V):
            m = int(A[i, j])
            if m == 0:
                continue
            b = sum((a * c for a, c in zip(u, v)), Fraction(0))
            if (b > 0) - (b < 0) != m:
                return False
    return True
