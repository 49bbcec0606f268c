"""Sums of rational multiples of products of rational powers of integers.

``3 * q**(-3/2)`` is irrational for most ``q`` but still has to be compared
exactly against grid coordinates.  A :class:`Surd` keeps such numbers
symbolic and decides signs with rigorous dyadic enclosures, refining the
precision until the enclosure excludes zero.  Monomials whose value is
rational collapse to Fractions on construction, so an all-rational
expression is always decided exactly.  If an enclosure still straddles
zero at ``MAX_BITS`` the value is treated as zero; for the small-height
algebraic numbers met here that only happens on exact ties.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Tuple, Union

MAX_BITS = 4096

Number = Union[int, Fraction, "Surd"]
Monomial = Tuple[Tuple[int, Fraction], ...]


def iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 2 or k == 1:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _exact_power(base: int, exp: Fraction):
    """base**exp as a Fraction when rational, else None."""
    a, b = exp.numerator, exp.denominator
    r = iroot(base, b)
    if r ** b != base:
        return None
    return Fraction(r) ** a


@lru_cache(maxsize=65536)
def _enclose_power(base: int, exp: Fraction, bits: int) -> Tuple[Fraction, Fraction]:
    """Rational lo <= base**exp <= hi with width about 2**-bits relative."""
    a, b = exp.numerator, exp.denominator
    if a >= 0:
        n = base ** a
        scale = bits + (n.bit_length() // b) + 2
        r = iroot(n << (scale * b), b)
        return Fraction(r, 1 << scale), Fraction(r + 1, 1 << scale)
    lo, hi = _enclose_power(base, Fraction(-a, b), bits + 8)
    return 1 / hi, 1 / lo


def _monomial(factors: Dict[int, Fraction]) -> Tuple[Fraction, Monomial]:
    coef = Fraction(1)
    by_frac: Dict[Fraction, int] = {}
    for base in sorted(factors):
        e = factors[base]
        if e == 0 or base == 1:
            continue
        whole = math.floor(e)
        frac = e - whole
        coef *= Fraction(base) ** whole
        if frac:
            # b1^f * b2^f = (b1 b2)^f, which may be rational when neither is
            by_frac[frac] = by_frac.get(frac, 1) * base
    kept = {}
    for frac, base in by_frac.items():
        v = _exact_power(base, frac)
        if v is None:
            kept[base] = kept.get(base, Fraction(0)) + frac
        else:
            coef *= v
    return coef, tuple(sorted(kept.items()))


class Surd:
    __slots__ = ("rational", "terms", "_approx")

    def __init__(self, rational=Fraction(0), terms=None):
        self.rational = rational if type(rational) is Fraction else Fraction(rational)
        self.terms: Dict[Monomial, Fraction] = {m: c for m, c in (terms or {}).items() if c}
        self._approx = None

    # construction -----------------------------------------------------------
    @staticmethod
    def power(base: int, exp, coef=1) -> Union[Fraction, "Surd"]:
        """``coef * base**exp``; a Fraction when that is rational."""
        c, mono = _monomial({int(base): Fraction(exp)})
        c *= Fraction(coef)
        if not mono:
            return c
        return Surd(0, {mono: c})

    def _simplify(self):
        if not self.terms:
            return self.rational
        return self

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Surd):
            terms = dict(self.terms)
            for m, c in other.terms.items():
                terms[m] = terms.get(m, 0) + c
            return Surd(self.rational + other.rational, terms)._simplify()
        if isinstance(other, (int, Fraction)):
            return Surd(self.rational + other, self.terms)._simplify()
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.rational, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            return Surd(self.rational * other, {m: c * other for m, c in self.terms.items()})._simplify()
        if isinstance(other, Surd):
            out = Surd(self.rational * other.rational)
            for m, c in self.terms.items():
                out = out + Surd(0, {m: c * other.rational})
            for m, c in other.terms.items():
                out = out + Surd(0, {m: c * self.rational})
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    f: Dict[int, Fraction] = {}
                    for base, e in m1 + m2:
                        f[base] = f.get(base, 0) + e
                    coef, mono = _monomial(f)
                    if mono:
                        out = out + Surd(0, {mono: c1 * c2 * coef})
                    else:
                        out = out + c1 * c2 * coef
            return out._simplify() if isinstance(out, Surd) else out
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # evaluation -------------------------------------------------------------
    def enclose(self, bits: int) -> Tuple[Fraction, Fraction]:
        lo = hi = self.rational
        for mono, c in self.terms.items():
            mlo, mhi = Fraction(1), Fraction(1)
            for base, e in mono:
                plo, phi = _enclose_power(base, e, bits)
                mlo, mhi = mlo * plo, mhi * phi
            if c > 0:
                lo, hi = lo + c * mlo, hi + c * mhi
            else:
                lo, hi = lo + c * mhi, hi + c * mlo
        return lo, hi

    def sign(self) -> int:
        if not self.terms:
            return (self.rational > 0) - (self.rational < 0)
        fast = self._float_sign()
        if fast:
            return fast
        bits = 64
        while bits <= MAX_BITS:
            lo, hi = self.enclose(bits)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2
        return 0

    def approx(self):
        """(float value, sum of absolute term values), or None on overflow."""
        if self._approx is None:
            try:
                v0 = float(self.rational)
                approx, bound = v0, abs(v0)
                for mono, c in self.terms.items():
                    v = float(c)
                    for base, e in mono:
                        v *= math.pow(base, e.numerator / e.denominator)
                    approx += v
                    bound += abs(v)
                self._approx = (approx, bound) if math.isfinite(approx) else False
            except (OverflowError, ZeroDivisionError):
                self._approx = False
        return self._approx or None

    def _float_sign(self) -> int:
        """Sign from a float evaluation when it clears a generous error
        bound (1e-12 relative per term); 0 means undecided."""
        a = self.approx()
        if a is None or a[1] < 1e-290:
            return 0
        if abs(a[0]) > 1e-12 * a[1]:
            return 1 if a[0] > 0 else -1
        return 0

    def floor(self) -> int:
        a = self.approx()
        if a is not None:
            err = 1e-12 * a[1] + 1e-300
            f = math.floor(a[0] - err)
            if f == math.floor(a[0] + err):
                return f
        lo, hi = self.enclose(64)
        f = math.floor(lo)
        if math.floor(hi) == f:
            return f
        # straddles an integer: decide against it exactly
        k = math.floor(hi)
        return k if (self - k).sign() >= 0 else k - 1

    def __float__(self):
        a = self.approx()
        if a is not None:
            return a[0]
        lo, hi = self.enclose(64)
        return float((lo + hi) / 2)

    def _cmp(self, other):
        a = self.approx()
        if a is not None:
            if isinstance(other, Surd):
                b = other.approx()
            else:
                try:
                    f = float(other)
                    b = (f, abs(f))
                except OverflowError:
                    b = None
            if b is not None:
                diff, bound = a[0] - b[0], a[1] + b[1]
                if bound > 1e-290 and abs(diff) > 1e-12 * bound:
                    return 1 if diff > 0 else -1
        d = self - other if isinstance(other, Surd) else self + (-Fraction(other))
        return d.sign() if isinstance(d, Surd) else (d > 0) - (d < 0)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if not isinstance(other, (int, Fraction, Surd)):
            return NotImplemented
        return self._cmp(other) == 0

    def __hash__(self):
        return hash((self.rational, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        parts = [str(self.rational)] if self.rational else []
        for mono, c in self.terms.items():
            parts.append(f"{c}*" + "*".join(f"{b}^({e})" for b, e in mono))
        return "Surd(" + " + ".join(parts or ["0"]) + ")"


def power(base: int, exp, coef=1):
    return Surd.power(base, exp, coef)


def floor_of(x) -> int:
    if isinstance(x, Surd):
        return x.floor()
    return math.floor(x)


def ceil_of(x) -> int:
    if isinstance(x, Surd):
        return -((-x).floor())
    return math.ceil(x)


def to_float(x) -> float:
    if isinstance(x, Fraction):
        return x.numerator / x.denominator
    return float(x)


def lower_rational(x, bits: int = 128) -> Fraction:
    return x.enclose(bits)[0] if isinstance(x, Surd) else Fraction(x)


def upper_rational(x, bits: int = 128) -> Fraction:
    return x.enclose(bits)[1] if isinstance(x, Surd) else Fraction(x)
