"""Partial Boolean functions on the cube, named generators and gap compositions.

Points of the m-bit cube are integers 0..2^m-1; bit i of the index is the
variable x_{i+1}. A bitstring is written x_1 x_2 ... x_m. In the +-1
convention bit value 1 stands for the coordinate -1, so switching conventions
never reorders the table.

Values are stored logically (ZERO, ONE, UNDEF). Their numeric reading depends
on the convention: 0/1 in ZERO_ONE, and +1 (FALSE) / -1 (TRUE) in PLUS_MINUS.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .errors import ArityError, InvalidParams, TooLarge
from .rational import as_fraction, fmt

DEFAULT_ARITY_CAP = 24


class Value(enum.IntEnum):
    ZERO = 0
    ONE = 1
    UNDEF = 2


class Convention(str, enum.Enum):
    ZERO_ONE = "zero_one"
    PLUS_MINUS = "plus_minus"


def point_to_bits(point: int, arity: int) -> str:
    return "".join("1" if (point >> i) & 1 else "0" for i in range(arity))


def bits_to_point(bits: str) -> int:
    if any(c not in "01" for c in bits):
        raise InvalidParams(f"bad bitstring {bits!r}")
    return sum(1 << i for i, c in enumerate(bits) if c == "1")


def popcounts(arity: int) -> np.ndarray:
    """Hamming weights of all indices 0..2^arity-1."""
    pc = np.zeros(1, dtype=np.int8)
    for _ in range(arity):
        pc = np.concatenate([pc, pc + 1])
    return pc


@dataclass(frozen=True, eq=False)
class PartialBoolFn:
    arity: int
    table: np.ndarray  # uint8 codes of Value, length 2^arity
    convention: Convention = Convention.ZERO_ONE
    generator: dict | None = field(default=None)

    def __post_init__(self):
        if self.arity < 0:
            raise InvalidParams("arity must be nonnegative")
        t = np.asarray(self.table, dtype=np.uint8)
        if t.shape != (1 << self.arity,):
            raise ArityError(f"table has shape {t.shape}, expected ({1 << self.arity},)")
        if t.size and t.max() > 2:
            raise InvalidParams("table codes must be 0, 1 or 2")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "convention", Convention(self.convention))

    # construction helpers
    @classmethod
    def from_callable(cls, arity: int, fn: Callable[[int], Value | int | None],
                      convention=Convention.ZERO_ONE, generator=None) -> "PartialBoolFn":
        """Build from a function of the point index returning a Value (None means UNDEF)."""
        t = np.empty(1 << arity, dtype=np.uint8)
        for x in range(1 << arity):
            v = fn(x)
            t[x] = Value.UNDEF if v is None else int(v)
        return cls(arity, t, convention, generator)

    @classmethod
    def from_dict(cls, arity: int, values: dict, convention=Convention.ZERO_ONE) -> "PartialBoolFn":
        """Points (int or bitstring) not mentioned are UNDEF; values are logical."""
        t = np.full(1 << arity, Value.UNDEF, dtype=np.uint8)
        for k, v in values.items():
            x = bits_to_point(k) if isinstance(k, str) else int(k)
            t[x] = int(v)
        return cls(arity, t, convention)

    @classmethod
    def empty(cls, arity: int, convention=Convention.ZERO_ONE) -> "PartialBoolFn":
        return cls(arity, np.full(1 << arity, Value.UNDEF, dtype=np.uint8), convention,
                   {"name": "EMPTY"})

    # queries
    @property
    def size(self) -> int:
        return 1 << self.arity

    def value(self, point: int | str) -> Value:
        x = bits_to_point(point) if isinstance(point, str) else point
        return Value(int(self.table[x]))

    def numeric(self, point: int | str) -> int | None:
        v = self.value(point)
        if v == Value.UNDEF:
            return None
        if self.convention == Convention.ZERO_ONE:
            return int(v)
        return -1 if v == Value.ONE else 1

    def domain_mask(self) -> np.ndarray:
        return self.table != Value.UNDEF

    def ones_mask(self) -> np.ndarray:
        return self.table == Value.ONE

    def zeros_mask(self) -> np.ndarray:
        return self.table == Value.ZERO

    def is_total(self) -> bool:
        return bool(self.domain_mask().all())

    def numeric_table(self) -> np.ndarray:
        """Numeric values as int8 (0/1 or +-1); entries outside the domain are 0."""
        out = np.zeros(self.size, dtype=np.int8)
        if self.convention == Convention.ZERO_ONE:
            out[self.ones_mask()] = 1
        else:
            out[self.ones_mask()] = -1
            out[self.zeros_mask()] = 1
        return out

    def sign_table(self) -> np.ndarray:
        """The +-1 sign a sign-representing polynomial must take; 0 off the domain.

        In 0/1 convention ONE maps to +1. In +-1 convention it is the numeric value,
        so TRUE maps to -1.
        """
        out = np.zeros(self.size, dtype=np.int8)
        one = 1 if self.convention == Convention.ZERO_ONE else -1
        out[self.ones_mask()] = one
        out[self.zeros_mask()] = -one
        return out

    def complement(self) -> "PartialBoolFn":
        t = self.table.copy()
        t[self.table == Value.ONE] = Value.ZERO
        t[self.table == Value.ZERO] = Value.ONE
        gen = {"name": "NOT", "base": self.generator} if self.generator else None
        return PartialBoolFn(self.arity, t, self.convention, gen)

    def with_convention(self, convention: Convention) -> "PartialBoolFn":
        if Convention(convention) == self.convention:
            return self
        return convert_convention(self)

    def __eq__(self, other):
        if not isinstance(other, PartialBoolFn):
            return NotImplemented
        return (self.arity == other.arity and self.convention == other.convention
                and np.array_equal(self.table, other.table))

    def __hash__(self):
        return hash((self.arity, self.convention, self.table.tobytes()))

    def __repr__(self):
        name = self.generator.get("name") if self.generator else "explicit"
        return f"PartialBoolFn(arity={self.arity}, {self.convention.value}, {name})"

    # JSON
    def to_json(self, include_entries: bool | None = None) -> dict:
        if include_entries is None:
            include_entries = self.generator is None or self.arity <= 12
        out: dict[str, Any] = {
            "arity": self.arity,
            "convention": self.convention.value,
            "generator": self.generator,
        }
        if include_entries:
            entries = []
            for x in range(self.size):
                v = self.numeric(x)
                entries.append({"point": point_to_bits(x, self.arity),
                                "value": "undef" if v is None else v})
            out["entries"] = entries
        return out

    @classmethod
    def from_json(cls, obj: dict, cap: int = DEFAULT_ARITY_CAP) -> "PartialBoolFn":
        arity = int(obj["arity"])
        conv = Convention(obj.get("convention", "zero_one"))
        entries = obj.get("entries")
        if entries is None:
            gen = obj.get("generator")
            if not gen:
                raise InvalidParams("function file needs entries or a generator")
            f = from_descriptor(gen, cap=cap)
            if f.arity != arity:
                raise ArityError(f"generator arity {f.arity} does not match {arity}")
            return f.with_convention(conv)
        if isinstance(entries, dict):
            # shorthand: {"00": 0, "10": 1, ...}
            entries = [{"point": k, "value": v} for k, v in entries.items()]
        t = np.full(1 << arity, Value.UNDEF, dtype=np.uint8)
        for e in entries:
            x = bits_to_point(e["point"])
            if len(e["point"]) != arity:
                raise ArityError(f"point {e['point']!r} has wrong length")
            v = e["value"]
            if v == "undef" or v is None:
                continue
            v = int(v)
            if conv == Convention.ZERO_ONE:
                if v not in (0, 1):
                    raise InvalidParams(f"0/1 value expected, got {v}")
                t[x] = v
            else:
                if v not in (-1, 1):
                    raise InvalidParams(f"+-1 value expected, got {v}")
                t[x] = Value.ONE if v == -1 else Value.ZERO
        return cls(arity, t, conv, obj.get("generator"))


@dataclass(frozen=True)
class GapParams:
    n: int
    eps: Fraction

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidParams("copies n must be an integer >= 1")
        eps = as_fraction(self.eps)
        if not (0 < eps <= 1):
            raise InvalidParams(f"threshold {eps} outside (0, 1]")
        object.__setattr__(self, "eps", eps)

    def at_least(self, count: np.ndarray | int):
        """count >= eps*n, compared exactly."""
        return count * self.eps.denominator >= self.eps.numerator * self.n


def _check_cap(arity: int, cap: int):
    if arity > cap:
        raise TooLarge(f"arity {arity} exceeds cap {cap}")


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _block_values(arity_bits: int, n: int) -> list[np.ndarray]:
    """Decode every cube point as a map [n] -> [n] (values 0..n-1).

    Block j occupies variables j*L .. j*L+L-1 with L = log2(n), read big-endian
    in bitstring order.
    """
    L = n.bit_length() - 1
    idx = np.arange(1 << arity_bits, dtype=np.int64)
    out = []
    for j in range(n):
        v = np.zeros_like(idx)
        for t in range(L):
            v |= ((idx >> (j * L + t)) & 1) << (L - 1 - t)
        out.append(v)
    return out


def encode_map(fvec: list[int]) -> int:
    """Point index encoding a map [n] -> [n] given as values 1..n."""
    n = len(fvec)
    L = n.bit_length() - 1
    x = 0
    for j, v in enumerate(fvec):
        if not 1 <= v <= n:
            raise InvalidParams(f"value {v} outside [1, {n}]")
        for t in range(L):
            if ((v - 1) >> (L - 1 - t)) & 1:
                x |= 1 << (j * L + t)
    return x


def decode_map(point: int, n: int) -> list[int]:
    L = n.bit_length() - 1
    out = []
    for j in range(n):
        v = 0
        for t in range(L):
            v |= ((point >> (j * L + t)) & 1) << (L - 1 - t)
        out.append(v + 1)
    return out


def ptp_value(fvec: list[int]) -> Value:
    """PTP on a single map given as values 1..n."""
    n = len(fvec)
    img = len(set(fvec))
    if img == n:
        return Value.ONE
    if 8 * (n - img) >= n:
        return Value.ZERO
    return Value.UNDEF


def col_value(fvec: list[int], k: int) -> Value:
    n = len(fvec)
    counts = [fvec.count(v) for v in range(1, n + 1)]
    if all(c == 1 for c in counts):
        return Value.ONE
    if all(c in (0, k) for c in counts):
        return Value.ZERO
    return Value.UNDEF


def gen_named(name: str, arity: int | None = None, *, n: int | None = None, k: int | None = None,
              convention=Convention.ZERO_ONE, cap: int = DEFAULT_ARITY_CAP) -> PartialBoolFn:
    """Named functions: AND, OR, XOR (alias PARITY), MAJ, CONST0, CONST1 take an arity;
    COL takes n and k; PTP takes n."""
    name = name.upper()
    if name == "PARITY":
        name = "XOR"
    conv = Convention(convention)
    if name in ("AND", "OR", "XOR", "MAJ", "CONST0", "CONST1"):
        if arity is None or arity < 0:
            raise InvalidParams(f"{name} needs a nonnegative arity")
        _check_cap(arity, cap)
        w = popcounts(arity)
        if name == "AND":
            ones = w == arity
        elif name == "OR":
            ones = w > 0
        elif name == "XOR":
            ones = (w % 2) == 1
        elif name == "MAJ":
            ones = 2 * w.astype(np.int64) > arity
        elif name == "CONST0":
            ones = np.zeros(1 << arity, dtype=bool)
        else:
            ones = np.ones(1 << arity, dtype=bool)
        table = ones.astype(np.uint8)
        return PartialBoolFn(arity, table, conv, {"name": name, "arity": arity})
    if name in ("COL", "PTP"):
        if n is None or not _is_pow2(n) or n < 2:
            raise InvalidParams(f"{name} needs n a power of 2, n >= 2")
        L = n.bit_length() - 1
        m = n * L
        _check_cap(m, cap)
        vals = _block_values(m, n)
        counts = [sum((v == c).astype(np.int8) for v in vals) for c in range(n)]
        perm = np.logical_and.reduce([c == 1 for c in counts])
        table = np.full(1 << m, Value.UNDEF, dtype=np.uint8)
        if name == "COL":
            if k is None or k < 2 or n % k:
                raise InvalidParams("COL needs 2 <= k with k | n")
            kto1 = np.logical_and.reduce([(c == 0) | (c == k) for c in counts])
            table[kto1] = Value.ZERO
            table[perm] = Value.ONE
            gen = {"name": "COL", "n": n, "k": k}
        else:
            image = sum((c > 0).astype(np.int64) for c in counts)
            table[8 * (n - image) >= n] = Value.ZERO
            table[perm] = Value.ONE
            gen = {"name": "PTP", "n": n}
        return PartialBoolFn(m, table, conv, gen)
    raise InvalidParams(f"unknown generator {name!r}")


def _block_codes(f: PartialBoolFn, n: int):
    """For each block i, the Value code of f on block i, for every point of the composed cube."""
    M = f.arity
    idx = np.arange(1 << (M * n), dtype=np.int64)
    mask = (1 << M) - 1
    for i in range(n):
        yield f.table[(idx >> (i * M)) & mask]


def _compose_counts(f: PartialBoolFn, n: int):
    yes = np.zeros(1 << (f.arity * n), dtype=np.int16)
    no = np.zeros_like(yes)
    undef = np.zeros_like(yes)
    for codes in _block_codes(f, n):
        yes += codes == Value.ONE
        no += codes == Value.ZERO
        undef += codes == Value.UNDEF
    return yes, no, undef


def gap_maj(f: PartialBoolFn, g: GapParams, cap: int = DEFAULT_ARITY_CAP) -> PartialBoolFn:
    """Gapped majority of n copies of f. Blocks outside f's domain count toward neither tally."""
    if g.eps <= Fraction(1, 2):
        raise InvalidParams("GapMaj needs eps > 1/2")
    _check_cap(f.arity * g.n, cap)
    yes, no, _ = _compose_counts(f, g.n)
    table = np.full(yes.shape, Value.UNDEF, dtype=np.uint8)
    table[g.at_least(yes.astype(np.int64))] = Value.ONE
    table[g.at_least(no.astype(np.int64))] = Value.ZERO
    gen = {"name": "GAPMAJ", "base": f.generator, "n": g.n, "eps": fmt(g.eps)}
    return PartialBoolFn(f.arity * g.n, table, f.convention, gen)


def gap_and(f: PartialBoolFn, g: GapParams, cap: int = DEFAULT_ARITY_CAP) -> PartialBoolFn:
    """Gapped AND: ONE when every block is ONE, ZERO when every block is defined and at
    least eps*n blocks are ZERO, UNDEF otherwise."""
    if not (0 < g.eps < 1):
        raise InvalidParams("GapAND needs eps in (0, 1)")
    _check_cap(f.arity * g.n, cap)
    yes, no, undef = _compose_counts(f, g.n)
    table = np.full(yes.shape, Value.UNDEF, dtype=np.uint8)
    table[(undef == 0) & g.at_least(no.astype(np.int64))] = Value.ZERO
    table[yes == g.n] = Value.ONE
    gen = {"name": "GAPAND", "base": f.generator, "n": g.n, "eps": fmt(g.eps)}
    return PartialBoolFn(f.arity * g.n, table, f.convention, gen)


def convert_convention(f: PartialBoolFn) -> PartialBoolFn:
    """Switch between 0/1 and +-1 conventions.

    Under x -> (1-x)/2 and f -> (1-f)/2 the index of every point and its logical
    value are unchanged, so only the tag flips.
    """
    other = Convention.PLUS_MINUS if f.convention == Convention.ZERO_ONE else Convention.ZERO_ONE
    return PartialBoolFn(f.arity, f.table, other, f.generator)


def from_descriptor(gen: dict, cap: int = DEFAULT_ARITY_CAP) -> PartialBoolFn:
    """Rebuild a function from the generator descriptor stored in its JSON form."""
    name = gen["name"].upper()
    if name in ("GAPMAJ", "GAPAND"):
        base = from_descriptor(gen["base"], cap=cap)
        g = GapParams(int(gen["n"]), as_fraction(gen["eps"]))
        return (gap_maj if name == "GAPMAJ" else gap_and)(base, g, cap=cap)
    if name == "NOT":
        return from_descriptor(gen["base"], cap=cap).complement()
    if name in ("COL", "PTP"):
        return gen_named(name, n=int(gen["n"]), k=gen.get("k"), cap=cap)
    return gen_named(name, int(gen["arity"]), cap=cap)


def all_total_functions(arity: int):
    """Every total function on `arity` bits, in order of their truth-table integer."""
    size = 1 << arity
    for code in range(1 << size):
        t = np.array([(code >> x) & 1 for x in range(size)], dtype=np.uint8)
        yield PartialBoolFn(arity, t)


def random_partial(arity: int, rng, p_undef: float = 0.3) -> PartialBoolFn:
    """Random partial function with a nonempty domain."""
    while True:
        t = np.array([Value.UNDEF if rng.random() < p_undef else rng.randrange(2)
                      for _ in range(1 << arity)], dtype=np.uint8)
        if (t != Value.UNDEF).any():
            return PartialBoolFn(arity, t)


def permutation_agreement(fvec: list[int]) -> int:
    """Largest number of coordinates on which fvec agrees with some permutation (brute force)."""
    n = len(fvec)
    best = 0
    for perm in itertools.permutations(range(1, n + 1)):
        best = max(best, sum(a == b for a, b in zip(fvec, perm)))
    return best


def log2_exact(n: int) -> int:
    if not _is_pow2(n):
        raise InvalidParams(f"{n} is not a power of 2")
    return int(math.log2(n))
