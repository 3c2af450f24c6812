"""Shared builders and independent oracles for the test-suite.

The oracles here deliberately avoid the code paths they check: the trace
oracle walks variable by variable through the public single-derivative
routine, and the Fischer oracle differentiates monomial by monomial.
"""

from __future__ import annotations

import random

from gmpy2 import mpq

from crnf.coeffs import GaussCoeff, gc
from crnf.polycore import BihomPoly, MixedSeries, derive, monomial


def bp(n_vars, entries):
    """BihomPoly from {(dz, dzb): coeff}; bidegree inferred, must be uniform."""
    items = list(entries.items())
    (dz0, dzb0), _ = items[0]
    m, n = sum(dz0), sum(dzb0)
    poly = BihomPoly.zero(n_vars, m, n)
    for (dz, dzb), coeff in items:
        poly = poly + monomial(n_vars, dz, dzb, _coeff(coeff))
    return poly


def series(n_vars, max_degree, entries):
    """MixedSeries from {(dz, dzb): coeff}."""
    out = MixedSeries.zero(n_vars, max_degree)
    for (dz, dzb), coeff in entries.items():
        out = out + MixedSeries.from_bihom(monomial(n_vars, dz, dzb, _coeff(coeff)),
                                           max_degree)
    return out


def _coeff(value):
    if isinstance(value, GaussCoeff):
        return value
    if isinstance(value, tuple):
        return gc(*value)
    return gc(value)


def random_coeff(rng: random.Random, complex_ok=True) -> GaussCoeff:
    def part():
        num = rng.randint(-6, 6)
        den = rng.randint(1, 4)
        return mpq(num, den)
    im = part() if complex_ok and rng.random() < 0.5 else mpq(0)
    return GaussCoeff(part(), im)


def random_bihom(rng: random.Random, n_vars, m, n, max_terms=3, complex_ok=True):
    poly = BihomPoly.zero(n_vars, m, n)
    for _ in range(rng.randint(1, max_terms)):
        dz = _random_composition(rng, m, n_vars)
        dzb = _random_composition(rng, n, n_vars)
        poly = poly + monomial(n_vars, dz, dzb, random_coeff(rng, complex_ok))
    return poly


def random_pure(rng: random.Random, n_vars, degree, max_terms=3, complex_ok=True):
    return random_bihom(rng, n_vars, degree, 0, max_terms, complex_ok)


def random_series(rng: random.Random, n_vars, max_degree, min_degree=0,
                  part_prob=0.6, max_terms=2):
    out = MixedSeries.zero(n_vars, max_degree)
    for m in range(0, max_degree + 1):
        for n in range(0, max_degree + 1 - m):
            if m + n < min_degree or rng.random() > part_prob:
                continue
            p = random_bihom(rng, n_vars, m, n, max_terms)
            if p:
                out = out + MixedSeries.from_bihom(p, max_degree)
    return out


def _random_composition(rng: random.Random, total, slots):
    exps = [0] * slots
    for _ in range(total):
        exps[rng.randrange(slots)] += 1
    return tuple(exps)


def random_point(rng: random.Random, n_vars):
    return [random_coeff(rng) for _ in range(n_vars)]


def mono_series(n_vars, max_degree, *specs):
    """MixedSeries from (dz, dzb, coeff) triples."""
    out = MixedSeries.zero(n_vars, max_degree)
    for dz, dzb, coeff in specs:
        out = out + MixedSeries.from_bihom(monomial(n_vars, dz, dzb, _coeff(coeff)),
                                           max_degree)
    return out


def random_manifold_obj(rng: random.Random, n_vars, max_degree, density=0.5,
                        max_terms=2):
    from crnf.moser import Manifold
    parts = MixedSeries.zero(n_vars, max_degree)
    for m in range(0, max_degree + 1):
        for n in range(0, max_degree + 1 - m):
            if m + n < 3 or rng.random() > density:
                continue
            p = random_bihom(rng, n_vars, m, n, max_terms)
            if p:
                parts = parts + MixedSeries.from_bihom(p, max_degree)
    return Manifold(n_vars, max_degree, parts)


def random_tangent_map(rng: random.Random, n_vars, weight, cap, density=0.5):
    """Random tangent-to-identity map with components of normal weight <= weight."""
    from crnf.moser import FormalMap
    f_fams, g_fams = {}, {}
    for m in range(0, weight):
        for n in range(0, (weight - m) // 2 + 1):
            w = m + 2 * n
            if 2 <= w <= weight - 1 and w <= cap - 1 and rng.random() < density:
                comps = tuple(random_pure(rng, n_vars, m, max_terms=1)
                              for _ in range(n_vars))
                if any(comps):
                    f_fams[(m, n)] = comps
            if 3 <= w <= weight and w <= cap and rng.random() < density:
                g = random_pure(rng, n_vars, m, max_terms=1)
                if g:
                    g_fams[(m, n)] = g
    return FormalMap(n_vars, cap, f_fams, g_fams)


def normal_manifold(rng: random.Random, n_vars, max_degree, s=3, density=0.5):
    """A Moser-normalized manifold with invariant degree exactly s."""
    from crnf.moser import Manifold, extended_moser, moser_invariants
    from crnf.decomp import is_nondegenerate
    while True:
        parts = MixedSeries.zero(n_vars, max_degree)
        delta = random_pure(rng, n_vars, s, max_terms=n_vars + 1, complex_ok=False)
        if not delta or (n_vars > 1 and not is_nondegenerate(delta)[0]):
            continue
        parts = parts + MixedSeries.from_bihom(delta, max_degree) \
            + MixedSeries.from_bihom(delta.conjugate(), max_degree)
        for m in range(0, max_degree + 1):
            for n in range(0, max_degree + 1 - m):
                if m + n < 3 or (n == 0 and m <= s) or (m == 0 and n <= s):
                    continue
                if rng.random() > density:
                    continue
                if n == 0:
                    p = random_pure(rng, n_vars, m, max_terms=2)
                    parts = parts + MixedSeries.from_bihom(p, max_degree) \
                        + MixedSeries.from_bihom(p.conjugate(), max_degree)
                elif m > 0:
                    p = random_bihom(rng, n_vars, m, n, max_terms=2)
                    parts = parts + MixedSeries.from_bihom(p, max_degree)
        _fmap, normal, cert = extended_moser(Manifold(n_vars, max_degree, parts))
        assert cert.ok()
        inv = moser_invariants(normal)
        if inv.s == s and (n_vars == 1 or inv.nondegenerate):
            return normal, inv


def oracle_trace_once(series_or_poly):
    """Independent trace: sum over variables of d/dz_k then d/dzb_k."""
    if isinstance(series_or_poly, BihomPoly):
        src = MixedSeries.from_bihom(series_or_poly,
                                     series_or_poly.degree)
    else:
        src = series_or_poly
    total = MixedSeries.zero(src.n_vars, src.max_degree)
    for k in range(src.n_vars):
        total = total + derive(derive(src, k, False), k, True)
    return total


def defining_residual(manifold, fmap, image):
    """Independent recheck of the substitution identity defining push_forward.

    Rebuilds G(z,w)|_M - <F,F>|_M - sum phi'_{m,n}(F|_M, conj F|_M) through the
    public series operations only and returns it; zero iff the image is the
    true push-forward through the truncation degree.
    """
    from crnf.moser import restrict_to_manifold
    from crnf.polycore import conjugate as conj_series

    nv, cap = manifold.n_vars, manifold.max_degree
    w_restricted = manifold.defining_series()
    g_side = w_restricted + restrict_to_manifold(fmap.G, manifold)
    z_imgs = []
    for j in range(nv):
        fam = {bd: comps[j] for bd, comps in fmap.F.items() if comps[j]}
        z_imgs.append(MixedSeries.variable(nv, cap, j) + restrict_to_manifold(fam, manifold))
    c_imgs = [conj_series(zj) for zj in z_imgs]
    rhs = MixedSeries.zero(nv, cap)
    for j in range(nv):
        rhs = rhs + z_imgs[j] * c_imgs[j]
    for part in image.phi.sorted_parts():
        for dz, dzb, coeff in part.sorted_items():
            term = MixedSeries.constant(nv, cap, coeff)
            for j, e in enumerate(dz):
                for _ in range(e):
                    term = term * z_imgs[j]
            for j, e in enumerate(dzb):
                for _ in range(e):
                    term = term * c_imgs[j]
            rhs = rhs + term
    return g_side - rhs


def substitute_linear(p: BihomPoly, matrix):
    """P(Az): replace z_j by sum_k matrix[j][k] z_k, via public ops only."""
    nv = p.n_vars
    images = []
    for j in range(nv):
        img = BihomPoly.zero(nv, 1, 0)
        for k in range(nv):
            if matrix[j][k]:
                dz = [1 if i == k else 0 for i in range(nv)]
                img = img + monomial(nv, dz, [0] * nv, matrix[j][k])
        images.append(img)
    out = BihomPoly.zero(nv, p.m, 0)
    for dz, _dzb, coeff in p.sorted_items():
        term = monomial(nv, [0] * nv, [0] * nv)
        for j, e in enumerate(dz):
            for _ in range(e):
                term = term.mul(images[j])
        out = out + term.scale(coeff)
    return out


def oracle_fischer_apply(v: BihomPoly, p: BihomPoly) -> BihomPoly:
    """Independent Fischer operator: per-monomial repeated differentiation."""
    nv = v.n_vars
    out = None
    for dz, _dzb, coeff in v.sorted_items():
        term = p
        for var, exponent in enumerate(dz):
            for _ in range(exponent):
                term = term.derive(var, False)
        term = term.scale(coeff.conjugate())
        out = term if out is None else out + term
    if out is None:
        return BihomPoly.zero(nv, 0, 0)
    return out
