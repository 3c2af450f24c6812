"""Exact coefficient arithmetic: rationals and Gaussian rationals.

Every coefficient in the engine is a Gaussian rational a + b*i with the two
rational parts held exactly (gmpy2.mpq, arbitrary precision, always reduced,
positive denominator).  Nothing in this package ever rounds: normalization
conditions are certified by literal ``== 0`` tests on these values.

The canonical text form of a rational is ``"p/q"`` with the ``/q`` omitted
when the denominator is 1; a complex coefficient serializes as the pair
``{"re": "p/q", "im": "p/q"}``.  That grammar is shared with the JSON
documents read and written by the CLI (see crnf.jsonio).
"""

from __future__ import annotations

import re

from gmpy2 import mpq

Rational = mpq

_RATIONAL_RE = re.compile(r"[+-]?\d+(/[1-9]\d*)?\Z")

_Q0 = mpq(0)
_Q1 = mpq(1)


def rational_from_str(text: str) -> Rational:
    """Parse the canonical "p/q" form; reject anything else (floats, 1/0)."""
    if not isinstance(text, str) or not _RATIONAL_RE.match(text):
        raise ValueError(f"not a rational in p/q form: {text!r}")
    return mpq(text)


def rational_to_str(value) -> str:
    return str(mpq(value))


class GaussCoeff:
    """Immutable Gaussian rational re + im*i."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = mpq(re)
        self.im = mpq(im)

    @classmethod
    def _raw(cls, re, im):
        # Internal fast path: trusts that re/im already are mpq.
        self = object.__new__(cls)
        self.re = re
        self.im = im
        return self

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, GaussCoeff):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, type(_Q0))):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __neg__(self):
        return GaussCoeff._raw(-self.re, -self.im)

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return GaussCoeff._raw(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return GaussCoeff._raw(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return GaussCoeff._raw(other.re - self.re, other.im - self.im)

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussCoeff._raw(a * c, _Q0)
        return GaussCoeff._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        c, d = other.re, other.im
        if not c and not d:
            raise ZeroDivisionError("division by zero GaussCoeff")
        if not d:
            return GaussCoeff._raw(self.re / c, self.im / c)
        norm = c * c + d * d
        a, b = self.re, self.im
        return GaussCoeff._raw((a * c + b * d) / norm, (b * c - a * d) / norm)

    def conjugate(self) -> "GaussCoeff":
        return GaussCoeff._raw(self.re, -self.im)

    def is_real(self) -> bool:
        return not self.im

    def __repr__(self):
        if not self.im:
            return f"GaussCoeff({str(self.re)!r})"
        return f"GaussCoeff({str(self.re)!r}, {str(self.im)!r})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def _coerce(value):
    if isinstance(value, GaussCoeff):
        return value
    if isinstance(value, (int, type(_Q0))):
        return GaussCoeff._raw(mpq(value), _Q0)
    return None


GC_ZERO = GaussCoeff._raw(_Q0, _Q0)
GC_ONE = GaussCoeff._raw(_Q1, _Q0)
GC_I = GaussCoeff._raw(_Q0, _Q1)


def gc(re=0, im=0) -> GaussCoeff:
    """Shorthand constructor; accepts ints, mpq, or "p/q" strings."""
    if isinstance(re, str):
        re = rational_from_str(re)
    if isinstance(im, str):
        im = rational_from_str(im)
    return GaussCoeff(re, im)
