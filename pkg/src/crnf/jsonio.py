"""The JSON document grammar shared by the library and the CLI.

Exactness is the point: every rational travels as a canonical "p/q" string
(the "/q" omitted when the denominator is 1), complex coefficients as
{"re": .., "im": ..}, monomials as the two exponent arrays dz / dzb.  Floats
are never accepted.  Serialization emits parts and monomials in the canonical
graded-lex order, so documents round-trip byte-identically and diff cleanly
in fixtures.

Parse errors carry the JSON-path of the offending field (DocumentError.path).
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import List

from .coeffs import GaussCoeff, rational_from_str, rational_to_str
from .decomp import InvariantData
from .moser import FormalMap, Manifold, MoserCertificate
from .polycore import BihomPoly, MixedSeries, monomial


class DocumentError(ValueError):
    """Malformed document; path points at the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _expect(condition, path, message):
    if not condition:
        raise DocumentError(path, message)


def _parse_rational(value, path):
    try:
        return rational_from_str(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise DocumentError(path, f"invalid rational: {value!r}") from exc


def _parse_coeff(obj, path) -> GaussCoeff:
    _expect(isinstance(obj, dict), path, "coefficient must be an object")
    re_part = _parse_rational(obj.get("re", "0"), f"{path}.re")
    im_part = _parse_rational(obj.get("im", "0"), f"{path}.im")
    return GaussCoeff(re_part, im_part)


def _parse_exponents(obj, n_vars, path):
    _expect(isinstance(obj, list) and len(obj) == n_vars, path,
            f"must be a list of {n_vars} naturals")
    for i, e in enumerate(obj):
        _expect(isinstance(e, int) and not isinstance(e, bool) and e >= 0,
                f"{path}[{i}]", "exponent must be a natural number")
    return tuple(obj)


def _parse_poly(monomials, n_vars, m, n, path) -> BihomPoly:
    _expect(isinstance(monomials, list), path, "must be a list of monomials")
    poly = BihomPoly.zero(n_vars, m, n)
    seen = set()
    for i, entry in enumerate(monomials):
        mpath = f"{path}[{i}]"
        _expect(isinstance(entry, dict), mpath, "monomial must be an object")
        dz = _parse_exponents(entry.get("dz"), n_vars, f"{mpath}.dz")
        dzb = _parse_exponents(entry.get("dzb"), n_vars, f"{mpath}.dzb")
        _expect(sum(dz) == m, f"{mpath}.dz", f"degree {sum(dz)} != part degree {m}")
        _expect(sum(dzb) == n, f"{mpath}.dzb", f"degree {sum(dzb)} != part degree {n}")
        _expect((dz, dzb) not in seen, mpath, "duplicate monomial in part")
        seen.add((dz, dzb))
        coeff = _parse_coeff(entry, mpath)
        if coeff:
            poly = poly + monomial(n_vars, dz, dzb, coeff)
    return poly


def _poly_monomials(poly: BihomPoly) -> List[dict]:
    out = []
    for dz, dzb, coeff in poly.sorted_items():
        out.append({"dz": list(dz), "dzb": list(dzb),
                    "re": rational_to_str(coeff.re),
                    "im": rational_to_str(coeff.im)})
    return out


def parse_manifold(doc) -> Manifold:
    """Exact Manifold from a document; round-trips bit-exactly through emit."""
    _expect(isinstance(doc, dict), "$", "document must be an object")
    n_vars = doc.get("n_vars")
    _expect(isinstance(n_vars, int) and n_vars >= 1, "$.n_vars",
            "must be an integer >= 1")
    degree = doc.get("degree")
    _expect(isinstance(degree, int) and 2 <= degree <= 60, "$.degree",
            "must be an integer in 2..60")
    terms = doc.get("terms", [])
    _expect(isinstance(terms, list), "$.terms", "must be a list")
    phi = MixedSeries.zero(n_vars, degree)
    seen_parts = set()
    for i, term in enumerate(terms):
        path = f"$.terms[{i}]"
        _expect(isinstance(term, dict), path, "part must be an object")
        m, n = term.get("m"), term.get("n")
        _expect(isinstance(m, int) and m >= 0, f"{path}.m", "must be a natural number")
        _expect(isinstance(n, int) and n >= 0, f"{path}.n", "must be a natural number")
        _expect(m + n >= 3, path, f"part of bidegree ({m},{n}) has total degree < 3")
        _expect(m + n <= degree, path,
                f"part of bidegree ({m},{n}) exceeds degree {degree}")
        _expect((m, n) not in seen_parts, path, f"duplicate part ({m},{n})")
        seen_parts.add((m, n))
        poly = _parse_poly(term.get("monomials", []), n_vars, m, n,
                           f"{path}.monomials")
        if poly:
            phi = phi + MixedSeries.from_bihom(poly, degree)
    return Manifold(n_vars, degree, phi)


def emit_manifold(manifold: Manifold) -> dict:
    terms = []
    for poly in manifold.phi.sorted_parts():
        terms.append({"m": poly.m, "n": poly.n,
                      "monomials": _poly_monomials(poly)})
    return {"n_vars": manifold.n_vars, "degree": manifold.max_degree,
            "terms": terms}


def parse_map(doc) -> FormalMap:
    _expect(isinstance(doc, dict), "$", "document must be an object")
    n_vars = doc.get("n_vars")
    _expect(isinstance(n_vars, int) and n_vars >= 1, "$.n_vars",
            "must be an integer >= 1")
    weight = doc.get("max_normal_weight")
    _expect(isinstance(weight, int) and weight >= 2, "$.max_normal_weight",
            "must be an integer >= 2")
    f_families = {}
    for i, fam in enumerate(doc.get("f", [])):
        path = f"$.f[{i}]"
        _expect(isinstance(fam, dict), path, "family must be an object")
        m, n = fam.get("m"), fam.get("n")
        _expect(isinstance(m, int) and m >= 0, f"{path}.m", "must be a natural number")
        _expect(isinstance(n, int) and n >= 0, f"{path}.n", "must be a natural number")
        comps = fam.get("components")
        _expect(isinstance(comps, list) and len(comps) == n_vars,
                f"{path}.components", f"must be a list of {n_vars} polynomials")
        parsed = tuple(_parse_poly(comp, n_vars, m, 0, f"{path}.components[{j}]")
                       for j, comp in enumerate(comps))
        if any(parsed):
            _expect((m, n) not in f_families, path, f"duplicate F family ({m},{n})")
            f_families[(m, n)] = parsed
    g_families = {}
    for i, fam in enumerate(doc.get("g", [])):
        path = f"$.g[{i}]"
        _expect(isinstance(fam, dict), path, "family must be an object")
        m, n = fam.get("m"), fam.get("n")
        _expect(isinstance(m, int) and m >= 0, f"{path}.m", "must be a natural number")
        _expect(isinstance(n, int) and n >= 0, f"{path}.n", "must be a natural number")
        poly = _parse_poly(fam.get("poly", []), n_vars, m, 0, f"{path}.poly")
        if poly:
            _expect((m, n) not in g_families, path, f"duplicate G family ({m},{n})")
            g_families[(m, n)] = poly
    try:
        return FormalMap(n_vars, weight, f_families, g_families)
    except ValueError as exc:
        raise DocumentError("$", str(exc)) from exc


def emit_map(fmap: FormalMap) -> dict:
    f_out = []
    for (m, n) in sorted(fmap.F, key=lambda bd: (bd[0] + 2 * bd[1], bd[0])):
        comps = fmap.F[(m, n)]
        f_out.append({"m": m, "n": n,
                      "components": [_poly_monomials(c) for c in comps]})
    g_out = []
    for (m, n) in sorted(fmap.G, key=lambda bd: (bd[0] + 2 * bd[1], bd[0])):
        g_out.append({"m": m, "n": n, "poly": _poly_monomials(fmap.G[(m, n)])})
    return {"n_vars": fmap.n_vars, "max_normal_weight": fmap.max_normal_weight,
            "f": f_out, "g": g_out}


def emit_invariants(inv: InvariantData | None, witness=None) -> dict | None:
    if inv is None:
        return None
    out = {"s": inv.s,
           "delta": _poly_monomials(inv.delta) if inv.delta is not None else None,
           "delta_partials": [_poly_monomials(p) for p in inv.delta_partials],
           "nondegenerate": inv.nondegenerate}
    if witness is not None:
        out["witness"] = [_poly_monomials(w) for w in witness]
    return out


def emit_certificate(cert: MoserCertificate | None) -> dict | None:
    if cert is None:
        return None
    return {"checked_degrees": [cert.checked_degrees.start,
                                cert.checked_degrees.stop - 1],
            "violations": [{"m": bd[0], "n": bd[1],
                            "residual": _poly_monomials(poly)}
                           for bd, poly in cert.violations]}


def emit_residuals(residuals) -> dict | None:
    if residuals is None:
        return None
    return {
        "trace": [{"m": bd[0], "n": bd[1], "residual": _poly_monomials(poly)}
                  for bd, poly in sorted(residuals.trace.items())],
        "reality": [{"degree": k, "residual": _poly_monomials(poly)}
                    for k, poly in sorted(residuals.reality.items())],
        "fischer": [{"degree": k, "residuals": [_poly_monomials(p) for p in polys]}
                    for k, polys in sorted(residuals.fischer.items())],
    }


def report_document(status: str, invariants=None, fmap=None, manifold=None,
                    residuals=None, solver_log=None, certificate=None,
                    witness=None) -> dict:
    """The stable top-level report schema used by every CLI command."""
    return {
        "status": status,
        "invariants": emit_invariants(invariants, witness=witness),
        "map": emit_map(fmap) if fmap is not None else None,
        "manifold": emit_manifold(manifold) if manifold is not None else None,
        "residuals": emit_residuals(residuals),
        "certificate": emit_certificate(certificate),
        "solver_log": [{"degree": rec.degree, "parity": rec.parity,
                        "dimension": rec.dimension}
                       for rec in (solver_log or [])],
    }


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def write_json_atomic(path: str, obj) -> None:
    """Write-then-rename so consumers never observe partial files."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(dump_json(obj))
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def load_json(path: str):
    with open(path, "r") as handle:
        return json.load(handle)
