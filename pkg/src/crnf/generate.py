"""Seeded random manifold documents for tests and benchmarks.

The generator is deterministic in the seed and guarantees the structural
facts the rest of the pipeline cares about: the lowest nonvanishing pure term
sits exactly at the requested invariant degree s (pure terms below s are
zero), pure parts come conjugate-paired, and for two or more variables the
degree-s term is retried until nondegenerate.
"""

from __future__ import annotations

import random

from gmpy2 import mpq

from .coeffs import GaussCoeff
from .decomp import is_nondegenerate
from .jsonio import emit_manifold
from .moser import Manifold
from .polycore import BihomPoly, MixedSeries, monomial

PROFILES = ("pure-only", "mixed", "generic")

_RETRY_BUDGET = 64


def _coeff(rng: random.Random, complex_ok=True) -> GaussCoeff:
    def part():
        return mpq(rng.randint(-6, 6), rng.randint(1, 4))
    im = part() if complex_ok and rng.random() < 0.5 else mpq(0)
    return GaussCoeff(part(), im)


def _composition(rng: random.Random, total, slots):
    exps = [0] * slots
    for _ in range(total):
        exps[rng.randrange(slots)] += 1
    return tuple(exps)


def _random_pure(rng: random.Random, n_vars, degree, max_terms, complex_ok=True):
    poly = BihomPoly.zero(n_vars, degree, 0)
    for _ in range(rng.randint(1, max_terms)):
        dz = _composition(rng, degree, n_vars)
        poly = poly + monomial(n_vars, dz, (0,) * n_vars, _coeff(rng, complex_ok))
    return poly


def _random_mixed(rng: random.Random, n_vars, m, n, max_terms):
    poly = BihomPoly.zero(n_vars, m, n)
    for _ in range(rng.randint(1, max_terms)):
        dz = _composition(rng, m, n_vars)
        dzb = _composition(rng, n, n_vars)
        poly = poly + monomial(n_vars, dz, dzb, _coeff(rng))
    return poly


def random_manifold(seed: int, n_vars: int, degree: int, s: int = 3,
                    profile: str = "generic") -> dict:
    """Deterministic random manifold document with invariant degree s."""
    if s < 3:
        raise ValueError("s must be >= 3")
    if degree < s:
        raise ValueError("degree must be >= s")
    if profile not in PROFILES:
        raise ValueError(f"profile must be one of {PROFILES}")
    rng = random.Random(seed)

    delta = None
    for _ in range(_RETRY_BUDGET):
        candidate = _random_pure(rng, n_vars, s, max_terms=n_vars + 1)
        if not candidate:
            continue
        if n_vars == 1 or is_nondegenerate(candidate)[0]:
            delta = candidate
            break
    if delta is None:
        raise RuntimeError("retry budget exhausted while drawing a "
                           "nondegenerate degree-s term")

    phi = MixedSeries.from_bihom(delta, degree) \
        + MixedSeries.from_bihom(delta.conjugate(), degree)

    want_pure = profile in ("pure-only", "generic")
    want_mixed = profile in ("mixed", "generic")
    density = 0.6
    if want_pure:
        for k in range(s + 1, degree + 1):
            if rng.random() > density:
                continue
            p = _random_pure(rng, n_vars, k, max_terms=2)
            if p:
                phi = phi + MixedSeries.from_bihom(p, degree) \
                    + MixedSeries.from_bihom(p.conjugate(), degree)
    if want_mixed:
        for m in range(1, degree):
            for n in range(1, degree + 1 - m):
                if m + n < 3 or rng.random() > density:
                    continue
                p = _random_mixed(rng, n_vars, m, n, max_terms=2)
                if p:
                    phi = phi + MixedSeries.from_bihom(p, degree)

    return emit_manifold(Manifold(n_vars, degree, phi))
