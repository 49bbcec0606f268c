"""Exact helpers: "p/q" I/O and comparisons between products of rational powers.

Every inequality involving a rational exponent (``q**(-1-tau)``, ``d**eps``)
goes through :func:`power_sign`, which clears exponent denominators so the
comparison is done on integers.
"""

from __future__ import annotations

import math
import sys
from fractions import Fraction
from typing import Iterable, Tuple

# exact masses deep in the tree have denominators far past the default
# 4300-digit limit on int <-> str conversion
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

Rat = Fraction
Vec = Tuple[Fraction, Fraction]


def rat(value) -> Fraction:
    """Parse ``"p/q"``, an int, or a Fraction into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot read {value!r} as an exact rational")


def fmt(x) -> str:
    if not isinstance(x, (int, Fraction)):
        return repr(x)
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def vec(a, b) -> Vec:
    return (rat(a), rat(b))


def power_sign(terms: Iterable[Tuple[Fraction, Fraction]]) -> int:
    """Sign of ``prod(base**exp) - 1`` for positive rational bases.

    Exponents are rational; the product is raised to the lcm of their
    denominators, which leaves only integer powers.
    """
    terms = [(Fraction(b), Fraction(e)) for b, e in terms]
    for b, _ in terms:
        if b <= 0:
            raise ValueError("bases must be positive")
    lcm = 1
    for _, e in terms:
        lcm = lcm * e.denominator // math.gcd(lcm, e.denominator)
    num, den = 1, 1
    for b, e in terms:
        k = int(e * lcm)
        if k >= 0:
            num *= b.numerator ** k
            den *= b.denominator ** k
        else:
            num *= b.denominator ** (-k)
            den *= b.numerator ** (-k)
    if num > den:
        return 1
    if num < den:
        return -1
    return 0


def power_le(lhs, rhs) -> bool:
    """``prod lhs <= prod rhs``; each side a list of (base, exponent) pairs."""
    return power_sign(list(lhs) + [(b, -Fraction(e)) for b, e in rhs]) <= 0


def power_lt(lhs, rhs) -> bool:
    return power_sign(list(lhs) + [(b, -Fraction(e)) for b, e in rhs]) < 0


def ceil_power_root(x: Fraction, exponent: Fraction) -> int:
    """Smallest integer ``d >= 1`` with ``d**exponent >= x`` (exponent > 0)."""
    x, exponent = Fraction(x), Fraction(exponent)
    if exponent <= 0:
        raise ValueError("exponent must be positive")
    if x <= 1:
        return 1

    def ok(d):
        return power_sign([(Fraction(d), exponent), (x, Fraction(-1))]) >= 0

    # float guess, then widen until the bracket is certain
    log_guess = (math.log(x.numerator) - math.log(x.denominator)) / float(exponent)
    guess = int(math.exp(min(log_guess, 700.0)))
    lo, hi = max(1, guess // 2), max(2, guess * 2 + 2)
    while ok(lo) and lo > 1:
        lo //= 2
    while not ok(hi):
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return lo if ok(lo) else hi


def to_float(x: Fraction) -> float:
    return x.numerator / x.denominator
