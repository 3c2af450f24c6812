"""Trace and Fischer decompositions, and the nondegeneracy test.

Three exact splits drive the whole normalization:

  * trace_decompose:  P = Q*<z,z>^k + R  with tr^k R = 0 (bihomogeneous P);
  * fischer_decompose_power:  P = Q*Delta^k + R with (Delta^k)^* R = 0;
  * fischer_decompose_gradient:  P = L + C, L = (sum_k A_k Delta_k) Delta^t,
    with (Delta_k Delta^t)^* C = 0 for every k.

Both Fischer solvers go through the explicit Fischer Gram matrix of the
multiplication map (positive definite, hence exactly invertible); the trace
split solves the square system tr^k(Q <z,z>^k) = tr^k(P) in the monomial
basis.  All matrices use the canonical graded-lex monomial order, so results
and witnesses are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Dict, List, Optional, Tuple

from . import linalg
from .coeffs import GC_ONE, GC_ZERO, GaussCoeff
from .polycore import (SHIFT, SLOT_MASK, BihomPoly, PurePoly, hermitian_quadric,
                       require_pure, unpack_exponents)


class DegenerateDeltaError(ValueError):
    """Raised when an operation needs a nondegenerate Delta but got a degenerate one."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass
class TraceSplit:
    quotient: BihomPoly
    remainder: BihomPoly


@dataclass
class FischerSplit:
    quotient: PurePoly
    remainder: PurePoly


@dataclass
class GradientSplit:
    linear_forms: Optional[Tuple[PurePoly, ...]]
    structured_part: PurePoly
    complement: PurePoly


@dataclass
class InvariantData:
    """Generalized Moser invariant s, Delta = phi_{s,0}, and its partials.

    s is None when no pure term is visible up to the truncation degree; in
    that case the remaining fields are empty placeholders.
    """

    s: Optional[int]
    delta: Optional[PurePoly]
    delta_partials: Tuple[PurePoly, ...]
    nondegenerate: Optional[bool]


def invariant_data_from_delta(s: int, delta: PurePoly) -> InvariantData:
    require_pure(delta, "delta")
    partials = tuple(delta.derive(k, False) for k in range(delta.n_vars))
    nondeg, _ = is_nondegenerate(delta)
    return InvariantData(s=s, delta=delta, delta_partials=partials, nondegenerate=nondeg)


def _compositions(total: int, slots: int):
    """All exponent tuples of given length summing to total, descending lex."""
    if slots == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, slots - 1):
            yield (first,) + rest


def monomial_basis(n_vars: int, m: int, n: int = 0) -> List[int]:
    """Packed keys of the bidegree-(m, n) monomials in canonical order."""
    keys = []
    for dz in _compositions(m, n_vars):
        base = 0
        for i, e in enumerate(dz):
            base |= e << (SHIFT * i)
        for dzb in _compositions(n, n_vars):
            key = base
            for i, e in enumerate(dzb):
                key |= e << (SHIFT * (n_vars + i))
            keys.append(key)
    return keys


_FACT_CACHE: Dict[Tuple[int, int], int] = {}


def _monomial_factorial(key: int, slots: int) -> int:
    got = _FACT_CACHE.get((key, slots))
    if got is None:
        got = 1
        for i in range(slots):
            e = (key >> (SHIFT * i)) & SLOT_MASK
            if e > 1:
                got *= factorial(e)
        _FACT_CACHE[(key, slots)] = got
    return got


def fischer_apply(v: PurePoly, p: PurePoly) -> PurePoly:
    """Apply the Fischer operator V^* = sum conj(v_I) d^|I|/dz^I to P."""
    require_pure(v, "V")
    require_pure(p, "P")
    if v.n_vars != p.n_vars:
        raise ValueError("dimension mismatch")
    nv = v.n_vars
    out_deg = p.m - v.m
    if out_deg < 0:
        return BihomPoly._raw(nv, 0, 0, {})
    out: Dict[int, GaussCoeff] = {}
    for kv, cv in v.terms.items():
        cvbar = cv.conjugate()
        for kp, cp in p.terms.items():
            fall = 1
            for i in range(nv):
                a = (kv >> (SHIFT * i)) & SLOT_MASK
                if not a:
                    continue
                b = (kp >> (SHIFT * i)) & SLOT_MASK
                if b < a:
                    fall = 0
                    break
                # falling factorial b * (b-1) * ... * (b-a+1)
                for step in range(a):
                    fall *= b - step
            if not fall:
                continue
            add = cvbar * cp * fall
            kk = kp - kv
            cur = out.get(kk)
            s = add if cur is None else cur + add
            if s:
                out[kk] = s
            elif cur is not None:
                del out[kk]
    return BihomPoly._raw(nv, out_deg, 0, out)


def fischer_inner(p: PurePoly, q: PurePoly) -> GaussCoeff:
    """Fischer pairing <P, Q> = sum_a p_a conj(q_a) a!; 0 across degrees."""
    if p.n_vars != q.n_vars:
        raise ValueError("dimension mismatch")
    total = GC_ZERO
    for key, cp in p.terms.items():
        cq = q.terms.get(key)
        if cq is not None:
            total = total + cp * cq.conjugate() * _monomial_factorial(key, 2 * p.n_vars)
    return total


# Cached solved systems for trace_decompose, keyed by (n_vars, m, n, k):
# (basis keys of bidegree (m-k, n-k), exact inverse of the tr^k(.<z,z>^k) matrix).
# Pure memoization of a deterministic value: concurrent writes of the same key
# are benign.
_TRACE_SYSTEMS: Dict[Tuple[int, int, int, int], Tuple[List[int], linalg.Matrix]] = {}


def _trace_system(n_vars: int, m: int, n: int, k: int):
    cached = _TRACE_SYSTEMS.get((n_vars, m, n, k))
    if cached is not None:
        return cached
    basis = monomial_basis(n_vars, m - k, n - k)
    index = {key: i for i, key in enumerate(basis)}
    hk = hermitian_quadric(n_vars).pow(k)
    columns = []
    for key in basis:
        mono = BihomPoly._raw(n_vars, m - k, n - k, {key: GC_ONE})
        image = mono.mul(hk)
        for _ in range(k):
            image = image.trace_once()
        col = [GC_ZERO] * len(basis)
        for kk, c in image.terms.items():
            col[index[kk]] = c
        columns.append(col)
    matrix = [[columns[j][i] for j in range(len(basis))] for i in range(len(basis))]
    inverse = linalg.invert(matrix)
    if inverse is None:
        raise RuntimeError("trace decomposition system unexpectedly singular")
    _TRACE_SYSTEMS[(n_vars, m, n, k)] = (basis, inverse)
    return basis, inverse


def trace_decompose(p: BihomPoly, iterations: int) -> TraceSplit:
    """Unique split P = Q*<z,z>^k + R with tr^k R = 0.

    k = 0 degenerates to (P, 0); k beyond min(m, n) yields (0, P), so the
    Moser induction can invoke the split uniformly at every bidegree.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    nv, m, n = p.n_vars, p.m, p.n
    if iterations == 0:
        return TraceSplit(quotient=p, remainder=BihomPoly.zero(nv, m, n))
    if iterations > min(m, n):
        return TraceSplit(quotient=BihomPoly.zero(nv, max(m - iterations, 0),
                                                  max(n - iterations, 0)),
                          remainder=p)
    k = iterations
    basis, inverse = _trace_system(nv, m, n, k)
    traced = p
    for _ in range(k):
        traced = traced.trace_once()
    index = {key: i for i, key in enumerate(basis)}
    rhs = [GC_ZERO] * len(basis)
    for kk, c in traced.terms.items():
        rhs[index[kk]] = c
    coeffs = linalg.matvec(inverse, rhs)
    q = BihomPoly._raw(nv, m - k, n - k,
                       {key: c for key, c in zip(basis, coeffs) if c})
    r = p - q.mul(hermitian_quadric(nv).pow(k))
    return TraceSplit(quotient=q, remainder=r)


def fischer_decompose_power(p: PurePoly, delta: PurePoly, k: int) -> FischerSplit:
    """Unique split P = Q*Delta^k + R with (Delta^k)^* R = 0."""
    require_pure(p, "P")
    require_pure(delta, "delta")
    if p.n_vars != delta.n_vars:
        raise ValueError("dimension mismatch")
    if not delta:
        raise ValueError("delta must be nonzero")
    if k < 1:
        raise ValueError("k must be >= 1")
    nv = p.n_vars
    q_deg = p.m - k * delta.m
    if q_deg < 0:
        return FischerSplit(quotient=BihomPoly._raw(nv, 0, 0, {}), remainder=p)
    vk = delta.pow(k)
    basis = monomial_basis(nv, q_deg)
    products = [BihomPoly._raw(nv, q_deg, 0, {key: GC_ONE}).mul(vk) for key in basis]
    gram = [[fischer_inner(products[j], products[i]) for j in range(len(basis))]
            for i in range(len(basis))]
    rhs = [fischer_inner(p, products[i]) for i in range(len(basis))]
    coeffs = linalg.solve(gram, rhs)
    if coeffs is None:
        raise RuntimeError("Fischer Gram matrix unexpectedly singular")
    q = BihomPoly._raw(nv, q_deg, 0,
                       {key: c for key, c in zip(basis, coeffs) if c})
    r = p - q.mul(vk)
    return FischerSplit(quotient=q, remainder=r)


def fischer_decompose_gradient(p: PurePoly, invariants: InvariantData,
                               allow_degenerate: bool = False) -> GradientSplit:
    """Split P = L + C with L = (sum_k A_k Delta_k) Delta^t, C Fischer-orthogonal.

    The projection L is always unique; the linear forms A_k are unique only
    for nondegenerate Delta.  For degenerate Delta the split is refused
    unless allow_degenerate is set, and then linear_forms is None.
    """
    require_pure(p, "P")
    if invariants.delta is None or invariants.s is None:
        raise ValueError("invariants carry no delta (s undetermined)")
    delta = invariants.delta
    if p.n_vars != delta.n_vars:
        raise ValueError("dimension mismatch")
    s = delta.m
    if p.m % s != 0 or p.m // s < 2:
        raise ValueError(
            f"degree {p.m} is not of the form (t+1)*s with t >= 1 for s = {s}")
    t = p.m // s - 1
    nv = p.n_vars
    if not invariants.nondegenerate and not allow_degenerate:
        raise DegenerateDeltaError("gradient split not unique")
    delta_t = delta.pow(t)
    span = []
    for k in range(nv):
        dk = invariants.delta_partials[k].mul(delta_t)
        for j in range(nv):
            zj = BihomPoly._raw(nv, 1, 0, {1 << (SHIFT * j): GC_ONE})
            span.append(zj.mul(dk))
    dim = len(span)
    gram = [[fischer_inner(span[j], span[i]) for j in range(dim)] for i in range(dim)]
    rhs = [fischer_inner(p, span[i]) for i in range(dim)]
    if invariants.nondegenerate:
        coeffs = linalg.solve(gram, rhs)
        if coeffs is None:
            raise RuntimeError("gradient Gram matrix singular despite nondegeneracy")
    else:
        coeffs = linalg.solve_consistent(gram, rhs)
        if coeffs is None:
            raise RuntimeError("gradient normal equations inconsistent")
    structured = BihomPoly._raw(nv, p.m, 0, {})
    for c, v in zip(coeffs, span):
        if c:
            structured = structured + v.scale(c)
    complement = p - structured
    forms = None
    if invariants.nondegenerate:
        forms = []
        for k in range(nv):
            terms = {}
            for j in range(nv):
                c = coeffs[k * nv + j]
                if c:
                    terms[1 << (SHIFT * j)] = c
            forms.append(BihomPoly._raw(nv, 1, 0, terms))
        forms = tuple(forms)
    return GradientSplit(linear_forms=forms, structured_part=structured,
                         complement=complement)


def is_nondegenerate(delta: PurePoly):
    """Check Def-style nondegeneracy of Delta; on failure return a witness.

    Builds the linear map (L_1..L_N) -> sum_k L_k * d(Delta)/dz_k from N-tuples
    of linear forms into degree-s polynomials and computes its exact kernel.
    Returns (True, None) or (False, witness) with witness a nonzero tuple of
    linear forms.
    """
    require_pure(delta, "delta")
    if not delta:
        raise ValueError("delta must be nonzero")
    nv = delta.n_vars
    s = delta.m
    partials = [delta.derive(k, False) for k in range(nv)]
    rows_basis = monomial_basis(nv, s)
    index = {key: i for i, key in enumerate(rows_basis)}
    matrix = [[GC_ZERO] * (nv * nv) for _ in rows_basis]
    for k in range(nv):
        for j in range(nv):
            zj = BihomPoly._raw(nv, 1, 0, {1 << (SHIFT * j): GC_ONE})
            prod = zj.mul(partials[k])
            col = k * nv + j
            for key, c in prod.terms.items():
                matrix[index[key]][col] = c
    kernel = linalg.nullspace(matrix, nv * nv)
    if not kernel:
        return True, None
    vec = kernel[0]
    witness = []
    for k in range(nv):
        terms = {}
        for j in range(nv):
            c = vec[k * nv + j]
            if c:
                terms[1 << (SHIFT * j)] = c
        witness.append(BihomPoly._raw(nv, 1, 0, terms))
    return False, tuple(witness)
