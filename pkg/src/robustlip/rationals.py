"""Exact rational scalars and small vector helpers.

Every number in this package is an exact rational: arbitrary-precision
numerator, positive denominator, always in lowest terms.  gmpy2.mpq is used
when available (its pivoting arithmetic is several times faster than
fractions.Fraction); the stdlib Fraction is a drop-in fallback.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

try:
    from gmpy2 import mpq as _mpq

    RAT_BACKEND = "gmpy2"

    def rat(num=0, den=None):
        """Build an exact rational from ints, strings, Fractions or rationals."""
        if den is None:
            if isinstance(num, float):
                raise TypeError("floats are not exact; pass a string or Fraction")
            return _mpq(num)
        return _mpq(num, den)

except ImportError:  # pragma: no cover - exercised only without gmpy2
    RAT_BACKEND = "fractions"

    def rat(num=0, den=None):
        """Build an exact rational from ints, strings, Fractions or rationals."""
        if den is None:
            if isinstance(num, float):
                raise TypeError("floats are not exact; pass a string or Fraction")
            return Fraction(num)
        return Fraction(num, den)


ZERO = rat(0)
ONE = rat(1)

RatLike = Union[int, str, Fraction]
Vec = tuple  # tuple of rationals


def parse_rat(value) -> "rat":
    """Parse an integer, a decimal string like "0.25", or a "p/q" string."""
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return rat(value)
    if isinstance(value, Fraction):
        return rat(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                num, den = text.split("/")
                return rat(int(num), int(den))
            if "." in text or "e" in text or "E" in text:
                frac = Fraction(text)
                return rat(frac.numerator, frac.denominator)
            return rat(int(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    if isinstance(value, float):
        raise ValueError(f"floats are not exact: {value!r}; use a string")
    try:
        return rat(value)
    except TypeError as exc:
        raise ValueError(f"not a rational: {value!r}") from exc


def rat_str(q) -> str:
    """Canonical text form: "p" for integers, "p/q" otherwise."""
    return str(q)


def rat_to_json(q):
    """JSON form: plain int when integral, lowest-terms "p/q" string otherwise."""
    num, den = q.numerator, q.denominator
    if den == 1:
        return int(num)
    return f"{num}/{den}"


def parse_vec(values: Iterable) -> Vec:
    return tuple(parse_rat(v) for v in values)


def vec_str(v: Sequence) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


def dot(u: Sequence, v: Sequence):
    total = ZERO
    for a, b in zip(u, v):
        total += a * b
    return total


def vadd(u: Sequence, v: Sequence) -> Vec:
    return tuple(a + b for a, b in zip(u, v))


def vsub(u: Sequence, v: Sequence) -> Vec:
    return tuple(a - b for a, b in zip(u, v))


def vscale(s, v: Sequence) -> Vec:
    return tuple(s * x for x in v)


def is_zero_vec(v: Sequence) -> bool:
    return all(x == 0 for x in v)


def zero_vec(n: int) -> Vec:
    return tuple(ZERO for _ in range(n))


def unit_vec(n: int, k: int) -> Vec:
    return tuple(ONE if i == k else ZERO for i in range(n))


def primitive(v: Sequence) -> Vec:
    """Scale a rational vector to integer entries with gcd 1, preserving sign."""
    from math import gcd

    denoms = [x.denominator for x in v]
    scale = 1
    for d in denoms:
        scale = scale * d // gcd(scale, int(d))
    ints = [int(x * scale) for x in v]
    g = 0
    for k in ints:
        g = gcd(g, abs(k))
    if g == 0:
        return tuple(ZERO for _ in v)
    return tuple(rat(k // g) for k in ints)
