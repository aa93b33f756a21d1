"""Exact rational helpers and the "p/q" string format."""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from .errors import InvalidParams


def as_fraction(x) -> Fraction:
    """Convert ints, Fractions and "p/q" strings to Fraction. Floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InvalidParams("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidParams(f"not a rational: {x!r}") from exc
    raise InvalidParams(f"expected an exact rational, got {type(x).__name__}")


def fmt(x) -> str:
    """Render a rational as "p/q" (always with a denominator)."""
    x = as_fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse(s) -> Fraction:
    return as_fraction(s)


def floor_frac(x: Fraction) -> int:
    return math.floor(x)


def ceil_frac(x: Fraction) -> int:
    return math.ceil(x)


def lcm_all(dens) -> int:
    out = 1
    for d in dens:
        out = out * d // math.gcd(out, d)
    return out
