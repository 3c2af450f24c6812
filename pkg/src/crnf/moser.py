"""Manifolds, formal maps, and the trace-normalized partial normal form.

A Manifold is the graph w = <z,z> + phi(z, zb) with phi a MixedSeries whose
parts all have total degree >= 3, truncated at max_degree D.  A FormalMap is
a tangent-to-identity transformation

    z' = z + sum F_{m,n}(z) w^n,     w' = w + sum G_{m,n}(z) w^n,

stored as graded coefficient families; the grade of a component is its
normal weight m + 2n (wt z = 1, wt w = 2).  A map of max_normal_weight W
carries F components of weight 2..W-1 and G components of weight 3..W, which
is exactly the data that determines the image manifold through degree W.

push_forward substitutes the map into the defining equation and solves for
the image parts degree by degree, re-expanding everything from scratch; the
Extended Moser construction then chooses at each grade the unique components
killing the iterated traces of the image, one trace_decompose call per
bidegree case.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

from .coeffs import GC_ONE, GaussCoeff
from .decomp import InvariantData, invariant_data_from_delta, trace_decompose
from .polycore import (SHIFT, BihomPoly, Bidegree, MixedSeries, PurePoly,
                       _finalize, _mul_accumulate, conjugate,
                       hermitian_quadric, require_pure, trace)

FFamily = Dict[Bidegree, Tuple[PurePoly, ...]]
GFamily = Dict[Bidegree, PurePoly]


class Manifold:
    """w = <z,z> + sum phi_{m,n}, all parts with 3 <= m+n <= max_degree."""

    __slots__ = ("n_vars", "max_degree", "phi")

    def __init__(self, n_vars: int, max_degree: int, phi: MixedSeries | None = None):
        if max_degree < 2:
            raise ValueError("max_degree must be >= 2")
        if phi is None:
            phi = MixedSeries.zero(n_vars, max_degree)
        if phi.n_vars != n_vars:
            raise ValueError("dimension mismatch")
        for (m, n) in phi.parts:
            if m + n < 3:
                raise ValueError(
                    f"phi part of bidegree ({m},{n}) has total degree < 3")
            if m + n > max_degree:
                raise ValueError(
                    f"phi part of bidegree ({m},{n}) exceeds max_degree {max_degree}")
        self.n_vars = n_vars
        self.max_degree = max_degree
        self.phi = phi.truncated(max_degree)

    @classmethod
    def quadric(cls, n_vars: int, max_degree: int) -> "Manifold":
        return cls(n_vars, max_degree)

    def defining_series(self, cap: int | None = None) -> MixedSeries:
        """<z,z> + phi as a MixedSeries (the substitute for w on M)."""
        cap = self.max_degree if cap is None else min(cap, self.max_degree)
        return MixedSeries.from_bihom(hermitian_quadric(self.n_vars), cap) \
            + self.phi.truncated(cap)

    def truncated(self, max_degree: int) -> "Manifold":
        return Manifold(self.n_vars, max_degree, self.phi.truncated(max_degree))

    def __eq__(self, other):
        if not isinstance(other, Manifold):
            return NotImplemented
        return (self.n_vars == other.n_vars
                and self.max_degree == other.max_degree
                and self.phi == other.phi)

    __hash__ = None

    def __repr__(self):
        return f"Manifold(n_vars={self.n_vars}, D={self.max_degree}, " \
               f"parts={sorted(self.phi.parts)})"


class FormalMap:
    """Tangent-to-identity formal transformation, graded by normal weight."""

    __slots__ = ("n_vars", "max_normal_weight", "F", "G")

    def __init__(self, n_vars: int, max_normal_weight: int,
                 f_families: FFamily | None = None,
                 g_families: GFamily | None = None):
        if n_vars < 1:
            raise ValueError("n_vars must be >= 1")
        if max_normal_weight < 2:
            raise ValueError("max_normal_weight must be >= 2")
        self.n_vars = n_vars
        self.max_normal_weight = max_normal_weight
        self.F: FFamily = {}
        self.G: GFamily = {}
        for (m, n), comps in (f_families or {}).items():
            comps = tuple(comps)
            if len(comps) != n_vars:
                raise ValueError(f"F family ({m},{n}) must have {n_vars} components")
            if not any(comps):
                continue
            weight = m + 2 * n
            if weight < 2 or weight > max_normal_weight - 1:
                raise ValueError(
                    f"F family ({m},{n}) of normal weight {weight} outside 2..{max_normal_weight - 1}")
            for c in comps:
                require_pure(c, "F component")
                if c and c.m != m:
                    raise ValueError(f"F component of family ({m},{n}) has degree {c.m}")
                if c.n_vars != n_vars:
                    raise ValueError("dimension mismatch")
            self.F[(m, n)] = comps
        for (m, n), g in (g_families or {}).items():
            if not g:
                continue
            weight = m + 2 * n
            if weight < 3 or weight > max_normal_weight:
                raise ValueError(
                    f"G family ({m},{n}) of normal weight {weight} outside 3..{max_normal_weight}")
            require_pure(g, "G component")
            if g.m != m or g.n_vars != n_vars:
                raise ValueError(f"G component of family ({m},{n}) malformed")
            self.G[(m, n)] = g

    @classmethod
    def identity(cls, n_vars: int, max_normal_weight: int) -> "FormalMap":
        return cls(n_vars, max_normal_weight)

    def is_identity(self) -> bool:
        return not self.F and not self.G

    def __eq__(self, other):
        if not isinstance(other, FormalMap):
            return NotImplemented
        return (self.n_vars == other.n_vars and self.F == other.F
                and self.G == other.G)

    __hash__ = None

    def __repr__(self):
        return (f"FormalMap(n_vars={self.n_vars}, W={self.max_normal_weight}, "
                f"F={sorted(self.F)}, G={sorted(self.G)})")


@dataclass
class MoserCertificate:
    """Independent recheck of the trace normalization conditions."""

    checked_degrees: range
    violations: List[Tuple[Bidegree, BihomPoly]]

    def ok(self) -> bool:
        return not self.violations


def restrict_to_manifold(graded: GFamily, manifold: Manifold,
                         cap: int | None = None) -> MixedSeries:
    """Substitute w = <z,z> + phi into sum P_{m,n}(z) w^n, truncated at cap."""
    cap = manifold.max_degree if cap is None else cap
    nv = manifold.n_vars
    w = manifold.defining_series(cap)
    max_power = max((n for (_m, n) in graded), default=0)
    powers = _series_powers(w, max_power)
    out = MixedSeries.zero(nv, cap)
    for (m, n), poly in graded.items():
        if not poly:
            continue
        require_pure(poly, "graded coefficient")
        if poly.m != m or poly.n_vars != nv:
            raise ValueError(f"coefficient of family ({m},{n}) malformed")
        out = out + powers[n] * MixedSeries.from_bihom(poly, cap)
    return out


def _series_powers(w: MixedSeries, max_power: int) -> List[MixedSeries]:
    powers = [MixedSeries.constant(w.n_vars, w.max_degree, GC_ONE)]
    for _ in range(max_power):
        powers.append(powers[-1] * w)
    return powers


def _map_components_on_manifold(manifold: Manifold, f_families: FFamily,
                                g_families: GFamily, cap: int):
    """Z'_j = F_j(z, w)|_M, their conjugates, and G(z, w)|_M."""
    nv = manifold.n_vars
    w = manifold.defining_series(cap)
    max_power = 0
    for (_m, n) in f_families:
        max_power = max(max_power, n)
    for (_m, n) in g_families:
        max_power = max(max_power, n)
    powers = _series_powers(w, max_power)

    g_restricted = w
    for (m, n), g in g_families.items():
        if g and m + 2 * n <= cap:
            g_restricted = g_restricted + powers[n] * MixedSeries.from_bihom(g, cap)

    z_images = []
    for j in range(nv):
        zj = MixedSeries.variable(nv, cap, j)
        for (m, n), comps in f_families.items():
            if m + 2 * n > cap:
                continue
            comp = comps[j]
            if comp:
                zj = zj + powers[n] * MixedSeries.from_bihom(comp, cap)
        z_images.append(zj)
    conj_images = [conjugate(zj) for zj in z_images]
    return z_images, conj_images, g_restricted


def _power_product(key: int, z_images, conj_images, cache, nv: int) -> MixedSeries:
    got = cache.get(key)
    if got is not None:
        return got
    for slot in range(2 * nv):
        if (key >> (SHIFT * slot)) & 0x3F:
            break
    child = key - (1 << (SHIFT * slot))
    factor = z_images[slot] if slot < nv else conj_images[slot - nv]
    value = _power_product(child, z_images, conj_images, cache, nv) * factor
    cache[key] = value
    return value


def _image_series(manifold: Manifold, f_families: FFamily, g_families: GFamily,
                  cap: int) -> MixedSeries:
    """Solve G|_M = <F,F>|_M + phi'(F, conj F)|_M for phi', degree by degree."""
    nv = manifold.n_vars
    z_images, conj_images, g_restricted = _map_components_on_manifold(
        manifold, f_families, g_families, cap)
    residual = g_restricted
    for j in range(nv):
        residual = residual - z_images[j] * conj_images[j]
    for (m, n) in residual.parts:
        if m + n < 3:
            raise RuntimeError(
                f"image has a part of bidegree ({m},{n}): map is not admissible")
    cache = {0: MixedSeries.constant(nv, cap, GC_ONE)}
    out_parts: Dict[Bidegree, BihomPoly] = {}
    for d in range(3, cap + 1):
        slice_parts = residual.degree_parts(d)
        if not slice_parts:
            continue
        out_parts.update(slice_parts)
        if d == cap:
            continue
        acc: Dict[Bidegree, Dict[int, list]] = {}
        for part in slice_parts.values():
            for key, coeff in part.terms.items():
                prod = _power_product(key, z_images, conj_images, cache, nv)
                for bd, ppart in prod.parts.items():
                    bucket = acc.get(bd)
                    if bucket is None:
                        bucket = acc[bd] = {}
                    _mul_accumulate({0: coeff}, ppart.terms, bucket)
        composed_parts = {}
        for (m, n), bucket in acc.items():
            terms = _finalize(bucket)
            if terms:
                composed_parts[(m, n)] = BihomPoly._raw(nv, m, n, terms)
        residual = residual - MixedSeries._raw(nv, cap, composed_parts)
    return MixedSeries._raw(nv, cap, out_parts)


def push_forward(manifold: Manifold, fmap: FormalMap) -> Manifold:
    """Image manifold of M under the map; exact through max_degree."""
    if manifold.n_vars != fmap.n_vars:
        raise ValueError("dimension mismatch")
    cap = manifold.max_degree
    phi = _image_series(manifold, fmap.F, fmap.G, cap)
    return Manifold(manifold.n_vars, cap, phi)


# ---------------------------------------------------------------------------
# Truncated composition in the (z, w) coordinate ring.
#
# A zw-series is a dict {(m, n): PurePoly} standing for sum P_{m,n}(z) w^n,
# truncated by normal weight m + 2n <= cap.
# ---------------------------------------------------------------------------


def _zw_entry_add(series: dict, bd: Bidegree, poly: PurePoly):
    cur = series.get(bd)
    s = poly if cur is None else cur + poly
    if s:
        series[bd] = s
    elif cur is not None:
        del series[bd]


def _zw_mul(a: dict, b: dict, cap: int) -> dict:
    out: dict = {}
    for (m1, n1), p1 in a.items():
        for (m2, n2), p2 in b.items():
            if (m1 + m2) + 2 * (n1 + n2) > cap:
                continue
            _zw_entry_add(out, (m1 + m2, n1 + n2), p1.mul(p2))
    return out


def _zw_scale(a: dict, coeff: GaussCoeff) -> dict:
    out = {}
    for bd, p in a.items():
        sp = p.scale(coeff)
        if sp:
            out[bd] = sp
    return out


def _zw_compose_pure(poly: PurePoly, z_subst: List[dict], cap: int,
                     memo: dict) -> dict:
    """poly(z) with z_j replaced by the zw-series z_subst[j]."""
    nv = poly.n_vars
    out: dict = {}
    for key, coeff in poly.terms.items():
        prod = _zw_power_product(key, z_subst, cap, memo, nv)
        for bd, p in _zw_scale(prod, coeff).items():
            _zw_entry_add(out, bd, p)
    return out


def _zw_power_product(key: int, z_subst, cap: int, memo: dict, nv: int) -> dict:
    got = memo.get(key)
    if got is not None:
        return got
    if key == 0:
        one = {(0, 0): BihomPoly._raw(nv, 0, 0, {0: GC_ONE})}
        memo[0] = one
        return one
    for slot in range(nv):
        if (key >> (SHIFT * slot)) & 0x3F:
            break
    child = key - (1 << (SHIFT * slot))
    value = _zw_mul(_zw_power_product(child, z_subst, cap, memo, nv),
                    z_subst[slot], cap)
    memo[key] = value
    return value


def compose_maps(first: FormalMap, second: FormalMap) -> FormalMap:
    """The map 'first then second': push_forward(M, compose(T1, T2)) equals
    push_forward(push_forward(M, T1), T2) through the common grade."""
    if first.n_vars != second.n_vars:
        raise ValueError("dimension mismatch")
    nv = first.n_vars
    cap = min(first.max_normal_weight, second.max_normal_weight)

    z_inner: List[dict] = []
    for j in range(nv):
        zw = {(1, 0): BihomPoly._raw(nv, 1, 0, {1 << (SHIFT * j): GC_ONE})}
        for bd, comps in first.F.items():
            if comps[j]:
                _zw_entry_add(zw, bd, comps[j])
        z_inner.append(zw)
    w_inner: dict = {(0, 1): BihomPoly._raw(nv, 0, 0, {0: GC_ONE})}
    for bd, g in first.G.items():
        _zw_entry_add(w_inner, bd, g)

    max_power = max((n for (_m, n) in list(second.F) + list(second.G)), default=0)
    w_powers = [{(0, 0): BihomPoly._raw(nv, 0, 0, {0: GC_ONE})}]
    for _ in range(max_power):
        w_powers.append(_zw_mul(w_powers[-1], w_inner, cap))

    memo: dict = {}
    f_out: Dict[Bidegree, list] = {}
    for j in range(nv):
        total = dict(z_inner[j])
        for (m, n), comps in second.F.items():
            comp = comps[j]
            if not comp:
                continue
            zw = _zw_compose_pure(comp, z_inner, cap, memo)
            zw = _zw_mul(zw, w_powers[n], cap)
            for bd, p in zw.items():
                _zw_entry_add(total, bd, p)
        identity_part = total.pop((1, 0), None)
        if identity_part != BihomPoly._raw(nv, 1, 0, {1 << (SHIFT * j): GC_ONE}):
            raise RuntimeError("composition lost tangency to the identity")
        for (m, n), p in total.items():
            if m + 2 * n <= cap - 1:
                f_out.setdefault((m, n), [BihomPoly.zero(nv, m, 0)] * nv)
                f_out[(m, n)][j] = p

    g_total = dict(w_inner)
    for (m, n), g in second.G.items():
        zw = _zw_compose_pure(g, z_inner, cap, memo)
        zw = _zw_mul(zw, w_powers[n], cap)
        for bd, p in zw.items():
            _zw_entry_add(g_total, bd, p)
    identity_part = g_total.pop((0, 1), None)
    if identity_part != BihomPoly._raw(nv, 0, 0, {0: GC_ONE}):
        raise RuntimeError("composition lost tangency to the identity")
    g_out = {bd: p for bd, p in g_total.items() if bd[0] + 2 * bd[1] <= cap}

    return FormalMap(nv, cap,
                     {bd: tuple(comps) for bd, comps in f_out.items()},
                     g_out)


# ---------------------------------------------------------------------------
# Extended Moser partial normal form.
# ---------------------------------------------------------------------------


def _zb_monomial(nv: int, j: int) -> BihomPoly:
    return BihomPoly._raw(nv, 0, 1, {1 << (SHIFT * (nv + j)): GC_ONE})


def extended_moser(manifold: Manifold, up_to: int | None = None):
    """Unique trace-normalized partial normal form of the manifold.

    Builds, grade by grade, the unique map with F_{0,n} = F_{1,n} = 0 whose
    image satisfies the iterated-trace conditions at every mixed bidegree and
    has conjugate-paired pure terms.  Returns (map, image, certificate); the
    image is recomputed from the finished map by a full push_forward, and the
    certificate rechecks the trace conditions independently.

    up_to caps the construction at a lower degree (truncation stability makes
    the result a prefix of the full one); the returned image is then truncated
    there as well.
    """
    nv = manifold.n_vars
    cap = manifold.max_degree if up_to is None else min(up_to, manifold.max_degree)
    f_families: FFamily = {}
    g_families: GFamily = {}
    quadric = hermitian_quadric(nv)

    for grade in range(3, cap + 1):
        image = _image_series(manifold, f_families, g_families, grade)

        # Cases m < n: the F component of weight grade-1 at each bidegree.
        for m in range(1, (grade + 1) // 2):
            n = grade - m
            base = image.part(m, n)
            split = trace_decompose(base, m - 1)
            q = split.quotient  # bidegree (1, n-m+1)
            if q:
                comps = tuple(q.derive(j, False).conjugate() for j in range(nv))
                f_families[(n - m + 1, m - 1)] = comps

        # Cases m >= n >= 1: the G component of weight grade at each bidegree.
        for n in range(1, grade // 2 + 1):
            m = grade - n
            base = image.part(m, n)
            known = f_families.get((m - n + 1, n - 1)) if m > n else None
            if known is not None:
                hpow = quadric.pow(n - 1)
                corr = BihomPoly.zero(nv, m, n)
                for j in range(nv):
                    if known[j]:
                        corr = corr + known[j].mul(_zb_monomial(nv, j)).mul(hpow)
                base = base - corr
            split = trace_decompose(base, n)
            q = split.quotient  # bidegree (m-n, 0), pure
            if q:
                g_families[(m - n, n)] = -q

        # Pure bidegrees: G_{T,0} pairs phi'_{T,0} with conj(phi'_{0,T}).
        pure_g = image.part(0, grade).conjugate() - image.part(grade, 0)
        if pure_g:
            g_families[(grade, 0)] = pure_g

    fmap = FormalMap(nv, cap, f_families, g_families)
    phi = _image_series(manifold, f_families, g_families, cap)
    normal = Manifold(nv, cap, phi)
    certificate = moser_certificate(normal)
    return fmap, normal, certificate


def moser_certificate(manifold: Manifold) -> MoserCertificate:
    """Recheck the trace conditions on every mixed part, via trace() alone."""
    violations = []
    for (m, n) in sorted(manifold.phi.parts):
        if m == 0 or n == 0:
            continue
        k = m - 1 if m <= n - 1 else n
        residual = manifold.phi.part(m, n)
        for _ in range(k):
            residual = residual.trace_once()
        if residual:
            violations.append(((m, n), residual))
    return MoserCertificate(checked_degrees=range(3, manifold.max_degree + 1),
                            violations=violations)


def moser_invariants(manifold: Manifold) -> InvariantData:
    """Generalized Moser invariant of a (partially normalized) manifold.

    s is the minimal degree of a nonvanishing pure term phi_{s,0}; when no
    pure term is visible up to the truncation degree, s is reported as
    undetermined (None) rather than failing.
    """
    for k in range(3, manifold.max_degree + 1):
        part = manifold.phi.parts.get((k, 0))
        if part:
            return invariant_data_from_delta(k, part)
    return InvariantData(s=None, delta=None, delta_partials=(), nondegenerate=None)
