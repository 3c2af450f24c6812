"""Exact sparse arithmetic for bihomogeneous polynomials and mixed series.

The engine works in the ring C[z_1..z_N, zb_1..zb_N] over Gaussian rationals,
where zb_k is treated as an independent variable standing for the conjugate
of z_k.  Everything is graded by bidegree: a BihomPoly collects the monomials
with holomorphic degree m and antiholomorphic degree n, and a MixedSeries is
a truncated sum of such parts keyed by (m, n).

Monomial encoding: an exponent vector (dz_1..dz_N, dzb_1..dzb_N) is packed
into a single int, 6 bits per slot (z-slots first, then zb-slots).  Monomial
multiplication is then a plain integer addition, which is what makes the
truncated multiplication loops fast enough in pure Python.  The packing caps
every individual exponent at 63; series constructors enforce max_degree <= 60
so packed sums can never carry across slots.

All values are immutable after construction (by convention: no operation
mutates its inputs) and all operations are pure functions, so everything here
is safe to share between threads.
"""

from __future__ import annotations

from typing import Dict, Iterable, Sequence, Tuple

from gmpy2 import mpq

from .coeffs import GC_ONE, GC_ZERO, GaussCoeff

SHIFT = 6
SLOT_MASK = (1 << SHIFT) - 1
MAX_DEGREE = 60

Bidegree = Tuple[int, int]

_Q0 = mpq(0)

INFINITE = float("inf")


def pack_exponents(dz: Sequence[int], dzb: Sequence[int]) -> int:
    """Pack (dz, dzb) exponent vectors into a single int key."""
    if len(dz) != len(dzb):
        raise ValueError("dz and dzb must have the same length")
    key = 0
    for i, e in enumerate(tuple(dz) + tuple(dzb)):
        if e < 0 or e > SLOT_MASK:
            raise ValueError(f"exponent {e} out of range 0..{SLOT_MASK}")
        key |= e << (SHIFT * i)
    return key


def unpack_exponents(key: int, n_vars: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    exps = tuple((key >> (SHIFT * i)) & SLOT_MASK for i in range(2 * n_vars))
    return exps[:n_vars], exps[n_vars:]


def conjugate_key(key: int, n_vars: int) -> int:
    half = SHIFT * n_vars
    low = key & ((1 << half) - 1)
    return (low << half) | (key >> half)


class BihomPoly:
    """Bihomogeneous polynomial of bidegree (m, n); zero coefficients never stored."""

    __slots__ = ("n_vars", "m", "n", "terms")

    def __init__(self, n_vars: int, m: int, n: int, terms: Dict[int, GaussCoeff] | None = None):
        if n_vars < 1:
            raise ValueError("n_vars must be >= 1")
        if m < 0 or n < 0 or m > SLOT_MASK or n > SLOT_MASK:
            raise ValueError(f"bidegree ({m}, {n}) out of range")
        self.n_vars = n_vars
        self.m = m
        self.n = n
        self.terms = {}
        if terms:
            for key, coeff in terms.items():
                if not coeff:
                    continue
                dz, dzb = unpack_exponents(key, n_vars)
                if sum(dz) != m or sum(dzb) != n:
                    raise ValueError(
                        f"monomial {dz}|{dzb} does not have bidegree ({m}, {n})")
                self.terms[key] = coeff

    @classmethod
    def _raw(cls, n_vars: int, m: int, n: int, terms: Dict[int, GaussCoeff]) -> "BihomPoly":
        # Internal fast path: terms must already be bidegree-consistent, zero-free.
        self = object.__new__(cls)
        self.n_vars = n_vars
        self.m = m
        self.n = n
        self.terms = terms
        return self

    @classmethod
    def zero(cls, n_vars: int, m: int, n: int) -> "BihomPoly":
        return cls._raw(n_vars, m, n, {})

    @property
    def bidegree(self) -> Bidegree:
        return (self.m, self.n)

    @property
    def degree(self) -> int:
        return self.m + self.n

    def is_pure(self) -> bool:
        return self.n == 0

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, BihomPoly):
            return NotImplemented
        if self.n_vars != other.n_vars:
            return False
        if not self.terms and not other.terms:
            # all zero polynomials are the same element, whatever their
            # nominal bidegree
            return True
        return self.m == other.m and self.n == other.n and self.terms == other.terms

    __hash__ = None

    def __neg__(self):
        return BihomPoly._raw(self.n_vars, self.m, self.n,
                              {k: -c for k, c in self.terms.items()})

    def _check_compatible(self, other: "BihomPoly"):
        if self.n_vars != other.n_vars:
            raise ValueError("dimension mismatch")
        if self.m != other.m or self.n != other.n:
            raise ValueError(
                f"bidegree mismatch: ({self.m},{self.n}) vs ({other.m},{other.n})")

    def __add__(self, other):
        if not isinstance(other, BihomPoly):
            return NotImplemented
        if self.n_vars != other.n_vars:
            raise ValueError("dimension mismatch")
        # The zero polynomial belongs to every graded piece, so a zero
        # operand is absorbed regardless of its nominal bidegree.
        if not other.terms:
            return self
        if not self.terms:
            return other
        self._check_compatible(other)
        terms = dict(self.terms)
        for k, c in other.terms.items():
            cur = terms.get(k)
            s = c if cur is None else cur + c
            if s:
                terms[k] = s
            elif cur is not None:
                del terms[k]
        return BihomPoly._raw(self.n_vars, self.m, self.n, terms)

    def __sub__(self, other):
        if not isinstance(other, BihomPoly):
            return NotImplemented
        return self + (-other)

    def scale(self, factor) -> "BihomPoly":
        if not isinstance(factor, GaussCoeff):
            factor = GaussCoeff(factor)
        if not factor:
            return BihomPoly.zero(self.n_vars, self.m, self.n)
        out = {}
        for k, c in self.terms.items():
            p = c * factor
            if p:
                out[k] = p
        return BihomPoly._raw(self.n_vars, self.m, self.n, out)

    def mul(self, other: "BihomPoly") -> "BihomPoly":
        if self.n_vars != other.n_vars:
            raise ValueError("dimension mismatch")
        m, n = self.m + other.m, self.n + other.n
        if m > SLOT_MASK or n > SLOT_MASK:
            raise ValueError("product bidegree exceeds packing capacity")
        acc: Dict[int, list] = {}
        _mul_accumulate(self.terms, other.terms, acc)
        return BihomPoly._raw(self.n_vars, m, n, _finalize(acc))

    def pow(self, exponent: int) -> "BihomPoly":
        if exponent < 0:
            raise ValueError("negative power")
        result = BihomPoly._raw(self.n_vars, 0, 0, {0: GC_ONE})
        for _ in range(exponent):
            result = result.mul(self)
        return result

    def conjugate(self) -> "BihomPoly":
        nv = self.n_vars
        return BihomPoly._raw(nv, self.n, self.m,
                              {conjugate_key(k, nv): c.conjugate()
                               for k, c in self.terms.items()})

    def derive(self, var_index: int, anti: bool = False) -> "BihomPoly":
        """Formal partial derivative in z_{var+1} (anti=False) or zb_{var+1}."""
        nv = self.n_vars
        if not 0 <= var_index < nv:
            raise ValueError(f"var_index {var_index} out of range for n_vars={nv}")
        slot = var_index + (nv if anti else 0)
        m, n = (self.m, self.n - 1) if anti else (self.m - 1, self.n)
        if m < 0 or n < 0:
            return BihomPoly._raw(nv, 0, 0, {})
        out: Dict[int, GaussCoeff] = {}
        step = 1 << (SHIFT * slot)
        for k, c in self.terms.items():
            e = (k >> (SHIFT * slot)) & SLOT_MASK
            if e:
                out[k - step] = GaussCoeff._raw(c.re * e, c.im * e)
        return BihomPoly._raw(nv, m, n, out)

    def trace_once(self) -> "BihomPoly":
        """Apply tr = sum_k d^2/dz_k dzb_k once."""
        nv = self.n_vars
        if self.m == 0 or self.n == 0:
            return BihomPoly._raw(nv, 0, 0, {})
        out: Dict[int, GaussCoeff] = {}
        for k, c in self.terms.items():
            for j in range(nv):
                e1 = (k >> (SHIFT * j)) & SLOT_MASK
                if not e1:
                    continue
                e2 = (k >> (SHIFT * (nv + j))) & SLOT_MASK
                if not e2:
                    continue
                nk = k - (1 << (SHIFT * j)) - (1 << (SHIFT * (nv + j)))
                f = e1 * e2
                add = GaussCoeff._raw(c.re * f, c.im * f)
                cur = out.get(nk)
                s = add if cur is None else cur + add
                if s:
                    out[nk] = s
                elif cur is not None:
                    del out[nk]
        return BihomPoly._raw(nv, self.m - 1, self.n - 1, out)

    def evaluate(self, point: Sequence[GaussCoeff]) -> GaussCoeff:
        """Exact value at z = point, zb = conj(point)."""
        nv = self.n_vars
        if len(point) != nv:
            raise ValueError("dimension mismatch")
        values = list(point) + [p.conjugate() for p in point]
        total = GC_ZERO
        for k, c in self.terms.items():
            term = c
            for i in range(2 * nv):
                e = (k >> (SHIFT * i)) & SLOT_MASK
                for _ in range(e):
                    term = term * values[i]
            total = total + term
        return total

    def sorted_items(self):
        """Monomials as (dz, dzb, coeff) in canonical graded-lex order."""
        nv = self.n_vars
        items = [(unpack_exponents(k, nv), c) for k, c in self.terms.items()]
        items.sort(key=lambda it: it[0][0] + it[0][1], reverse=True)
        return [(dz, dzb, c) for (dz, dzb), c in items]

    def coefficient(self, dz: Sequence[int], dzb: Sequence[int]) -> GaussCoeff:
        return self.terms.get(pack_exponents(dz, dzb), GC_ZERO)

    def __repr__(self):
        if not self.terms:
            return f"BihomPoly({self.n_vars}, {self.m}, {self.n}, 0)"
        parts = []
        for dz, dzb, c in self.sorted_items()[:6]:
            parts.append(f"{c}*z^{list(dz)}zb^{list(dzb)}")
        more = "..." if len(self.terms) > 6 else ""
        return f"BihomPoly({self.n_vars}, ({self.m},{self.n}), {' + '.join(parts)}{more})"


# A PurePoly is a BihomPoly with n == 0 (no zb dependence).
PurePoly = BihomPoly


def require_pure(p: BihomPoly, what: str = "polynomial") -> BihomPoly:
    if p.n != 0:
        raise ValueError(f"{what} must be pure (no zb dependence), got bidegree {p.bidegree}")
    return p


def _mul_accumulate(t1: Dict[int, GaussCoeff], t2: Dict[int, GaussCoeff], acc: Dict[int, list]):
    # Raw convolution of two term dicts into acc {key: [re, im]}.
    if len(t1) > len(t2):
        t1, t2 = t2, t1
    items2 = list(t2.items())
    for k1, c1 in t1.items():
        a, b = c1.re, c1.im
        if not b:
            for k2, c2 in items2:
                kk = k1 + k2
                cur = acc.get(kk)
                if cur is None:
                    acc[kk] = [a * c2.re, a * c2.im]
                else:
                    cur[0] += a * c2.re
                    cur[1] += a * c2.im
        else:
            for k2, c2 in items2:
                c, d = c2.re, c2.im
                kk = k1 + k2
                cur = acc.get(kk)
                if cur is None:
                    acc[kk] = [a * c - b * d, a * d + b * c]
                else:
                    cur[0] += a * c - b * d
                    cur[1] += a * d + b * c
    return acc


def _finalize(acc: Dict[int, list]) -> Dict[int, GaussCoeff]:
    return {k: GaussCoeff._raw(r, i) for k, (r, i) in acc.items() if r or i}


def monomial(n_vars: int, dz: Sequence[int], dzb: Sequence[int], coeff=GC_ONE) -> BihomPoly:
    """Single-term polynomial coeff * z^dz * zb^dzb."""
    if not isinstance(coeff, GaussCoeff):
        coeff = GaussCoeff(coeff)
    key = pack_exponents(dz, dzb)
    terms = {key: coeff} if coeff else {}
    return BihomPoly(n_vars, sum(dz), sum(dzb), terms)


def hermitian_quadric(n_vars: int) -> BihomPoly:
    """<z, z> = sum_k z_k zb_k, bidegree (1, 1)."""
    if n_vars < 1:
        raise ValueError("n_vars must be >= 1")
    terms = {}
    for k in range(n_vars):
        key = (1 << (SHIFT * k)) | (1 << (SHIFT * (n_vars + k)))
        terms[key] = GC_ONE
    return BihomPoly._raw(n_vars, 1, 1, terms)


class MixedSeries:
    """Truncated sum of bihomogeneous parts, keyed by bidegree (m, n).

    max_degree D is the truncation contract: no stored part has m + n > D and
    multiplication silently drops everything above min(D_lhs, D_rhs).  Parts
    that become zero are removed, so equality is structural.  Two series are
    equal when their n_vars and parts agree; the truncation degree is a
    contract about future multiplications, not part of the value.
    """

    __slots__ = ("n_vars", "max_degree", "parts")

    def __init__(self, n_vars: int, max_degree: int,
                 parts: Iterable[BihomPoly] | Dict[Bidegree, BihomPoly] | None = None):
        if n_vars < 1:
            raise ValueError("n_vars must be >= 1")
        if max_degree < 0 or max_degree > MAX_DEGREE:
            raise ValueError(f"max_degree must be in 0..{MAX_DEGREE}")
        self.n_vars = n_vars
        self.max_degree = max_degree
        self.parts: Dict[Bidegree, BihomPoly] = {}
        if parts is None:
            return
        for p in (parts.values() if isinstance(parts, dict) else parts):
            if p.n_vars != n_vars:
                raise ValueError("dimension mismatch")
            if p.degree > max_degree:
                raise ValueError(f"part of bidegree {p.bidegree} exceeds max_degree {max_degree}")
            if not p:
                continue
            if p.bidegree in self.parts:
                raise ValueError(f"duplicate part of bidegree {p.bidegree}")
            self.parts[p.bidegree] = p

    @classmethod
    def _raw(cls, n_vars: int, max_degree: int, parts: Dict[Bidegree, BihomPoly]) -> "MixedSeries":
        self = object.__new__(cls)
        self.n_vars = n_vars
        self.max_degree = max_degree
        self.parts = parts
        return self

    @staticmethod
    def _check_bounds(n_vars: int, max_degree: int):
        if n_vars < 1:
            raise ValueError("n_vars must be >= 1")
        if max_degree < 0 or max_degree > MAX_DEGREE:
            raise ValueError(f"max_degree must be in 0..{MAX_DEGREE}")

    @classmethod
    def zero(cls, n_vars: int, max_degree: int) -> "MixedSeries":
        cls._check_bounds(n_vars, max_degree)
        return cls._raw(n_vars, max_degree, {})

    @classmethod
    def constant(cls, n_vars: int, max_degree: int, value) -> "MixedSeries":
        cls._check_bounds(n_vars, max_degree)
        if not isinstance(value, GaussCoeff):
            value = GaussCoeff(value)
        if not value:
            return cls._raw(n_vars, max_degree, {})
        return cls._raw(n_vars, max_degree,
                        {(0, 0): BihomPoly._raw(n_vars, 0, 0, {0: value})})

    @classmethod
    def variable(cls, n_vars: int, max_degree: int, index: int, anti: bool = False) -> "MixedSeries":
        dz = [0] * n_vars
        dzb = [0] * n_vars
        (dzb if anti else dz)[index] = 1
        return cls.from_bihom(monomial(n_vars, dz, dzb), max_degree)

    @classmethod
    def from_bihom(cls, p: BihomPoly, max_degree: int) -> "MixedSeries":
        cls._check_bounds(p.n_vars, max_degree)
        if p.degree > max_degree:
            raise ValueError(f"part of bidegree {p.bidegree} exceeds max_degree {max_degree}")
        return cls._raw(p.n_vars, max_degree, {p.bidegree: p} if p else {})

    def part(self, m: int, n: int) -> BihomPoly:
        got = self.parts.get((m, n))
        return got if got is not None else BihomPoly.zero(self.n_vars, m, n)

    def degree_parts(self, d: int) -> Dict[Bidegree, BihomPoly]:
        return {bd: p for bd, p in self.parts.items() if bd[0] + bd[1] == d}

    def is_zero(self) -> bool:
        return not self.parts

    def __bool__(self):
        return bool(self.parts)

    def __eq__(self, other):
        if not isinstance(other, MixedSeries):
            return NotImplemented
        return self.n_vars == other.n_vars and self.parts == other.parts

    __hash__ = None

    def truncated(self, max_degree: int) -> "MixedSeries":
        parts = {bd: p for bd, p in self.parts.items() if bd[0] + bd[1] <= max_degree}
        return MixedSeries._raw(self.n_vars, max_degree, parts)

    def _check(self, other: "MixedSeries"):
        if self.n_vars != other.n_vars:
            raise ValueError("dimension mismatch")

    def __neg__(self):
        return MixedSeries._raw(self.n_vars, self.max_degree,
                                {bd: -p for bd, p in self.parts.items()})

    def __add__(self, other):
        if isinstance(other, BihomPoly):
            other = MixedSeries.from_bihom(other, self.max_degree)
        if not isinstance(other, MixedSeries):
            return NotImplemented
        self._check(other)
        cap = min(self.max_degree, other.max_degree)
        parts = {bd: p for bd, p in self.parts.items() if bd[0] + bd[1] <= cap}
        for bd, p in other.parts.items():
            if bd[0] + bd[1] > cap:
                continue
            cur = parts.get(bd)
            s = p if cur is None else cur + p
            if s:
                parts[bd] = s
            elif cur is not None:
                del parts[bd]
        return MixedSeries._raw(self.n_vars, cap, parts)

    def __sub__(self, other):
        if isinstance(other, BihomPoly):
            other = MixedSeries.from_bihom(other, self.max_degree)
        if not isinstance(other, MixedSeries):
            return NotImplemented
        return self + (-other)

    def scale(self, factor) -> "MixedSeries":
        if not isinstance(factor, GaussCoeff):
            factor = GaussCoeff(factor)
        if not factor:
            return MixedSeries.zero(self.n_vars, self.max_degree)
        parts = {}
        for bd, p in self.parts.items():
            sp = p.scale(factor)
            if sp:
                parts[bd] = sp
        return MixedSeries._raw(self.n_vars, self.max_degree, parts)

    def __mul__(self, other):
        if isinstance(other, (GaussCoeff, int, type(_Q0))):
            return self.scale(other)
        if isinstance(other, BihomPoly):
            other = MixedSeries.from_bihom(other, self.max_degree)
        if not isinstance(other, MixedSeries):
            return NotImplemented
        self._check(other)
        cap = min(self.max_degree, other.max_degree)
        acc: Dict[Bidegree, Dict[int, list]] = {}
        for (m1, n1), p1 in self.parts.items():
            d1 = m1 + n1
            if d1 > cap:
                continue
            for (m2, n2), p2 in other.parts.items():
                if d1 + m2 + n2 > cap:
                    continue
                bd = (m1 + m2, n1 + n2)
                bucket = acc.get(bd)
                if bucket is None:
                    bucket = acc[bd] = {}
                _mul_accumulate(p1.terms, p2.terms, bucket)
        parts = {}
        for (m, n), bucket in acc.items():
            terms = _finalize(bucket)
            if terms:
                parts[(m, n)] = BihomPoly._raw(self.n_vars, m, n, terms)
        return MixedSeries._raw(self.n_vars, cap, parts)

    def __rmul__(self, other):
        if isinstance(other, (GaussCoeff, int, type(_Q0))):
            return self.scale(other)
        return NotImplemented

    def pow(self, exponent: int) -> "MixedSeries":
        if exponent < 0:
            raise ValueError("negative power")
        result = MixedSeries.constant(self.n_vars, self.max_degree, GC_ONE)
        for _ in range(exponent):
            result = result * self
        return result

    def sorted_parts(self):
        return [self.parts[bd] for bd in sorted(self.parts, key=lambda b: (b[0] + b[1], b[0], b[1]))]

    def __repr__(self):
        bds = sorted(self.parts, key=lambda b: (b[0] + b[1], b[0], b[1]))
        return f"MixedSeries(n_vars={self.n_vars}, D={self.max_degree}, parts={bds})"


def conjugate(series: MixedSeries) -> MixedSeries:
    """Swap z <-> zb and conjugate every coefficient; bidegree (m,n) -> (n,m)."""
    parts = {}
    for (m, n), p in series.parts.items():
        parts[(n, m)] = p.conjugate()
    return MixedSeries._raw(series.n_vars, series.max_degree, parts)


def derive(series: MixedSeries, var_index: int, anti: bool = False) -> MixedSeries:
    parts = {}
    for p in series.parts.values():
        dp = p.derive(var_index, anti)
        if dp:
            parts[dp.bidegree] = dp
    return MixedSeries._raw(series.n_vars, series.max_degree, parts)


def trace(series: MixedSeries, iterations: int = 1) -> MixedSeries:
    """Apply tr = sum_k d^2/dz_k dzb_k the given number of times."""
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    current = series
    for _ in range(iterations):
        parts = {}
        for p in current.parts.values():
            tp = p.trace_once()
            if tp:
                parts[tp.bidegree] = tp
        current = MixedSeries._raw(series.n_vars, series.max_degree, parts)
    return current


def weight_and_order(series: MixedSeries, s: int):
    """Huang-Yin weight (wt z = 1, wt zb = s-1) and plain order of a series.

    Both are minima over the stored monomials and depend only on bidegrees;
    the zero series has weight and order +infinity.  Diagnostic only.
    """
    if s < 3:
        raise ValueError("weight system requires s >= 3")
    if not series.parts:
        return (INFINITE, INFINITE)
    weight = min(m + (s - 1) * n for (m, n) in series.parts)
    order = min(m + n for (m, n) in series.parts)
    return (weight, order)


def evaluate(series: MixedSeries, point: Sequence[GaussCoeff]) -> GaussCoeff:
    """Exact evaluation with zb_k bound to conj(point_k)."""
    if len(point) != series.n_vars:
        raise ValueError("dimension mismatch")
    total = GC_ZERO
    for p in series.parts.values():
        total = total + p.evaluate(point)
    return total


def add(lhs: MixedSeries, rhs: MixedSeries) -> MixedSeries:
    return lhs + rhs


def sub(lhs: MixedSeries, rhs: MixedSeries) -> MixedSeries:
    return lhs - rhs


def mul(lhs: MixedSeries, rhs: MixedSeries) -> MixedSeries:
    return lhs * rhs


def scale(series: MixedSeries, factor) -> MixedSeries:
    return series.scale(factor)
