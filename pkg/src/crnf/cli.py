"""Batch front end: parse, normalize, verify, apply, generate.

    crnf invariants --input M.json [--output R.json] [--degree K]
    crnf moser      --input M.json [--output R.json] [--degree K] [--emit-map]
    crnf normalize  --input M.json [--output R.json] [--degree K]
                    [--moser-only] [--verify-after] [--emit-map]
    crnf verify     --input M.json [--output R.json] [--degree K]
    crnf apply      --input M.json --map T.json [--output R.json] [--degree K]
    crnf random     --seed S --n-vars N --degree D [--invariant-degree s]
                    [--profile pure-only|mixed|generic] [--output M.json]

Every report command emits the same top-level JSON schema
{status, invariants, map, manifold, residuals, certificate, solver_log};
the report goes to --output (written atomically) or stdout, with a short
human summary on stderr.  Exit codes: 0 success, 1 I/O or parse errors,
2 domain errors (degenerate delta, failed verification).
"""

from __future__ import annotations

import argparse
import sys

from .decomp import DegenerateDeltaError, is_nondegenerate
from .generate import PROFILES, random_manifold
from .jsonio import (DocumentError, dump_json, emit_manifold, emit_map,
                     load_json, parse_manifold, parse_map,
                     report_document, write_json_atomic)
from .moser import extended_moser, moser_invariants, push_forward
from .normalform import full_normalize, verify_normal_form

EXIT_OK = 0
EXIT_IO = 1
EXIT_DOMAIN = 2


class _Parser(argparse.ArgumentParser):
    # Usage mistakes are command "parse errors": exit 1, keeping 2 for
    # domain outcomes.
    def error(self, message):
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crnf", description=__doc__.split("\n", 1)[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_report_command(name, help_text, with_map=False, normalize_flags=False):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--input", required=True, help="manifold document")
        cmd.add_argument("--output", help="report path (atomic write); stdout if omitted")
        cmd.add_argument("--degree", type=int,
                         help="truncate to this degree (must be <= document degree)")
        if with_map:
            cmd.add_argument("--map", required=True, dest="map_path",
                             help="formal map document to push forward by")
        if name in ("moser", "normalize"):
            cmd.add_argument("--emit-map", action="store_true",
                             help="also write the bare map document next to "
                                  "--output (<output>.map.json), ready for apply")
        if normalize_flags:
            cmd.add_argument("--moser-only", action="store_true",
                             help="stop after the trace-normalized partial form")
            cmd.add_argument("--verify-after", action="store_true",
                             help="re-verify the emitted manifold independently")
        return cmd

    add_report_command("invariants", "invariant degree s, delta, nondegeneracy")
    add_report_command("moser", "trace-normalized partial normal form")
    add_report_command("normalize", "full normal form", normalize_flags=True)
    add_report_command("verify", "recheck every normalization condition")
    add_report_command("apply", "push forward by a supplied map", with_map=True)

    rnd = sub.add_parser("random", help="deterministic random manifold document")
    rnd.add_argument("--seed", type=int, required=True)
    rnd.add_argument("--n-vars", type=int, required=True)
    rnd.add_argument("--degree", type=int, required=True)
    rnd.add_argument("--invariant-degree", type=int, default=3,
                     help="degree s of the lowest pure term (default 3)")
    rnd.add_argument("--profile", choices=PROFILES, default="generic")
    rnd.add_argument("--output", help="document path; stdout if omitted")
    return parser


def _load_manifold(args):
    doc = load_json(args.input)
    manifold = parse_manifold(doc)
    if args.degree is not None:
        if args.degree > manifold.max_degree:
            raise DocumentError("$.degree",
                                f"degree override {args.degree} exceeds document "
                                f"degree {manifold.max_degree}")
        if args.degree < 2:
            raise DocumentError("$.degree", "degree override must be >= 2")
        manifold = manifold.truncated(args.degree)
    return manifold


def _deliver(args, document, summary_lines):
    for line in summary_lines:
        print(line, file=sys.stderr)
    if args.output:
        write_json_atomic(args.output, document)
    else:
        sys.stdout.write(dump_json(document))


def _summarize_invariants(inv):
    if inv is None or inv.s is None:
        return "s undetermined at this truncation"
    nd = "nondegenerate" if inv.nondegenerate else "degenerate"
    return f"s = {inv.s}, delta has {len(inv.delta.terms)} terms, {nd}"


def _cmd_invariants(args):
    manifold = _load_manifold(args)
    _fmap, normal, cert = extended_moser(manifold)
    inv = moser_invariants(normal)
    witness = None
    if inv.nondegenerate is False:
        witness = is_nondegenerate(inv.delta)[1]
    status = "ok" if inv.s is not None else "s_undetermined"
    report = report_document(status, invariants=inv, manifold=normal,
                             certificate=cert, witness=witness)
    _deliver(args, report, [_summarize_invariants(inv)])
    return EXIT_OK


def _emit_side_map(args, fmap):
    if not getattr(args, "emit_map", False):
        return
    if not args.output:
        raise DocumentError("$", "--emit-map needs --output to name the map file")
    write_json_atomic(f"{args.output}.map.json", emit_map(fmap))


def _cmd_moser(args, manifold=None):
    manifold = manifold if manifold is not None else _load_manifold(args)
    fmap, normal, cert = extended_moser(manifold)
    inv = moser_invariants(normal)
    report = report_document("partial-normal-form", invariants=inv,
                             manifold=normal, certificate=cert, fmap=fmap)
    _emit_side_map(args, fmap)
    summary = [f"partial normal form computed through degree {normal.max_degree}",
               f"certificate violations: {len(cert.violations)}",
               _summarize_invariants(inv)]
    _deliver(args, report, summary)
    return EXIT_OK


def _cmd_normalize(args):
    manifold = _load_manifold(args)
    if args.moser_only:
        return _cmd_moser(args, manifold=manifold)
    try:
        result = full_normalize(manifold)
    except DegenerateDeltaError as err:
        _fmap, normal, cert = extended_moser(manifold)
        inv = moser_invariants(normal)
        report = report_document("degenerate", invariants=inv, manifold=normal,
                                 certificate=cert, witness=err.witness)
        _deliver(args, report, ["delta is degenerate: full normal form refused",
                                _summarize_invariants(inv)])
        return EXIT_DOMAIN
    residuals = result.condition_residuals
    status = result.status
    if args.verify_after:
        # independent pass on the emitted data, not on the in-memory object
        recycled = parse_manifold(emit_manifold(result.normalized))
        recheck = verify_normal_form(recycled, result.invariants)
        if not recheck.ok():
            status = "verification_failed"
            residuals = recheck
    report = report_document(
        status, invariants=result.invariants, manifold=result.normalized,
        residuals=residuals, certificate=result.certificate,
        solver_log=result.solver_log, fmap=result.map)
    _emit_side_map(args, result.map)
    clean = residuals.ok()
    summary = [f"status: {status}",
               _summarize_invariants(result.invariants),
               f"residuals: {'all zero' if clean else 'NONZERO'}",
               f"kernel parameters solved: {len(result.solver_log)}"]
    _deliver(args, report, summary)
    return EXIT_OK if status in ("normalized", "s-undetermined") else EXIT_DOMAIN


def _cmd_verify(args):
    manifold = _load_manifold(args)
    inv = moser_invariants(manifold)
    residuals = verify_normal_form(manifold, inv)
    report = report_document("verified", invariants=inv, manifold=manifold,
                             residuals=residuals)
    count = (len(residuals.trace) + len(residuals.reality)
             + sum(len(v) for v in residuals.fischer.values()))
    _deliver(args, report, [f"nonzero residuals: {count}"])
    return EXIT_OK


def _cmd_apply(args):
    manifold = _load_manifold(args)
    fmap = parse_map(load_json(args.map_path))
    image = push_forward(manifold, fmap)
    report = report_document("applied", manifold=image, fmap=fmap)
    _deliver(args, report, [f"image computed through degree {image.max_degree}"])
    return EXIT_OK


def _cmd_random(args):
    doc = random_manifold(args.seed, args.n_vars, args.degree,
                          s=args.invariant_degree, profile=args.profile)
    _deliver(args, doc, [f"generated n_vars={args.n_vars} degree={args.degree} "
                         f"profile={args.profile} seed={args.seed}"])
    return EXIT_OK


_COMMANDS = {
    "invariants": _cmd_invariants,
    "moser": _cmd_moser,
    "normalize": _cmd_normalize,
    "verify": _cmd_verify,
    "apply": _cmd_apply,
    "random": _cmd_random,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DocumentError as err:
        print(f"crnf: document error: {err}", file=sys.stderr)
        return EXIT_IO
    except DegenerateDeltaError as err:
        print(f"crnf: domain error: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OSError, ValueError, RuntimeError) as err:
        print(f"crnf: error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
