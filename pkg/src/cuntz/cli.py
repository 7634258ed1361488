"""Command line interface: every analysis as a subcommand with JSON output.

Machine-readable JSON goes to stdout, human-readable summaries to stderr.
Exit codes: 0 success, 1 usage error, 2 cap refusal, 3 state error,
4 negative verdict under --strict.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import classify, trees, weyl
from .algebra import MatrixElement
from .analysis import (
    find_inverse,
    is_nilpotent,
    preserves_diagonal,
    diagonal_shift_criterion,
    relative_commutant,
    subspace_chain,
    verify_inverse_pair,
    ybe_check,
)
from .classify import CapExceeded, CheckpointMismatch, LevelCapError, OrderCapError
from .trees import TreeDiagram, condition_b, condition_d, letter_maps
from .words import Perm

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CAP = 2
EXIT_STATE = 3
EXIT_VERDICT = 4


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True, separators=(",", ":")))


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _input_ref(args) -> str:
    if getattr(args, "matrix", None):
        return args.matrix
    if getattr(args, "perm_file", None):
        return args.perm_file
    if getattr(args, "perm", None) is not None:
        return f"{args.n} {args.k} : {args.perm}"
    return ""


def _load_perm(args) -> Perm:
    if args.perm_file:
        with open(args.perm_file) as fh:
            text = fh.read().strip()
        if ":" not in text:
            text = f"{args.n} {args.k} : {text}"
        return Perm.from_one_line(text)
    if args.perm is None:
        raise SystemExit(EXIT_USAGE)
    return Perm(args.n, args.k, [int(t) for t in args.perm.split()])


def _load_matrix(path: str) -> MatrixElement:
    with open(path) as fh:
        return MatrixElement.from_json(json.load(fh))


def _add_perm_args(sp):
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--perm", help="image ranks in one-line notation")
    sp.add_argument("--perm-file", help="file with one-line notation")


def _unitary_arg(args):
    """A Perm or MatrixElement from --perm/--matrix style arguments."""
    if getattr(args, "matrix", None):
        return _load_matrix(args.matrix)
    return _load_perm(args)


def cmd_check(args) -> int:
    p = _load_perm(args)
    b = condition_b(p)
    d = condition_d(p)
    _emit({"op": "check", "input_ref": _input_ref(args), "b": b, "d": d})
    _info(f"b={b} d={d}")
    if args.strict and not (b and d):
        return EXIT_VERDICT
    return EXIT_OK


def cmd_trees(args) -> int:
    p = _load_perm(args)
    _emit(trees.analyze_perm(p))
    return EXIT_OK


def cmd_export_dot(args) -> int:
    p = _load_perm(args)
    diagrams = []
    for f in letter_maps(p):
        diagrams.append(TreeDiagram(f))
    text = trees.export_dot(diagrams)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        _info(f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    spec = classify.SweepSpec(
        n=args.n,
        k=args.k,
        predicate=args.predicate,
        shards=args.shards or classify.default_shards(),
        checkpoint_path=args.checkpoint,
        witness_path=args.witnesses,
        force_large=args.force_large,
    )
    res = classify.run_sweep(spec)
    _emit(res.to_json())
    _info(
        f"swept {res.candidates} candidates in {res.elapsed:.2f}s "
        f"({res.shards} shards); witnesses={res.witnesses_written}"
    )
    return EXIT_OK


def cmd_count_table(args) -> int:
    if args.table:
        cells = [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (4, 1)]
        rows = {}
        for n, k in cells:
            rows[f"{n},{k}"] = classify.count_table(n, k, shards=args.shards)
        _emit({"op": "count-table", "cells": rows})
        ncols = sorted({k for _, k in cells})
        _info("n\\k " + "  ".join(f"{k:>14}" for k in ncols))
        for n in sorted({n for n, _ in cells}):
            line = [f"{n:>3}"]
            for k in ncols:
                got = rows.get(f"{n},{k}")
                line.append(f"{got[0]:>6}/{got[1]:<7}" if got else " " * 14)
            _info(" ".join(line))
        return EXIT_OK
    if args.n is None or args.k is None:
        _info("--n and --k required without --table")
        return EXIT_USAGE
    aut_o, aut_d = classify.count_table(
        args.n, args.k, shards=args.shards, force_large=args.force_large
    )
    _emit({"op": "count-table", "n": args.n, "k": args.k, "autO": aut_o, "autD": aut_d})
    _info(f"automorphisms: {aut_o}; diagonal automorphisms: {aut_d}")
    return EXIT_OK


def cmd_invert(args) -> int:
    u = _unitary_arg(args)
    res = find_inverse(u, h_max=args.h_max)
    out = {"op": "invert", "input_ref": _input_ref(args), "status": res.status}
    if res.status == "found":
        out["h"] = res.h
        verified = verify_inverse_pair(u, res.w)
        out["verified"] = verified
        if isinstance(res.w, Perm):
            out["w"] = res.w.to_one_line()
        else:
            out["w"] = res.w.to_json()
    _emit(out)
    _info(f"status={res.status}" + (f" h={res.h}" if res.status == "found" else ""))
    if args.strict and res.status != "found":
        return EXIT_VERDICT
    return EXIT_OK


def cmd_order(args) -> int:
    p = _load_perm(args)
    try:
        order = classify.order_of(p, order_cap=args.order_cap, level_cap=args.level_cap)
    except OrderCapError:
        _emit({"op": "order", "status": "order-cap-exceeded"})
        return EXIT_STATE
    except LevelCapError:
        _emit({"op": "order", "status": "level-cap-exceeded"})
        return EXIT_STATE
    _emit({"op": "order", "order": order})
    return EXIT_OK


def cmd_commutant(args) -> int:
    u = _unitary_arg(args)
    basis = relative_commutant(u, grade=args.grade, cap=args.cap, tol=args.tol)
    _emit(
        {
            "op": "commutant",
            "grade": args.grade,
            "cap": args.cap,
            "dimension": len(basis),
            "basis": [
                {"terms": v.element.to_json(), "cap_limited": v.cap_limited}
                for v in basis
            ],
        }
    )
    _info(f"dimension {len(basis)} at grade {args.grade}, cap {args.cap}")
    return EXIT_OK


def cmd_ybe(args) -> int:
    y = _unitary_arg(args)
    braid, endo_form, intertwiner_form = ybe_check(y, tol=args.tol)
    _emit(
        {
            "op": "ybe",
            "input_ref": _input_ref(args),
            "ybe": braid,
            "cuntz_form": endo_form,
            "intertwiner_form": intertwiner_form,
        }
    )
    if args.strict and not braid:
        return EXIT_VERDICT
    return EXIT_OK


def cmd_diag_preserve(args) -> int:
    w = _unitary_arg(args)
    verdict, stabilization = preserves_diagonal(w, tol=args.tol)
    easy = diagonal_shift_criterion(w, tol=args.tol)
    _emit({"op": "diag-preserve", "input_ref": _input_ref(args), "verdict": verdict,
           "R": stabilization, "easy": easy})
    _info(f"verdict={verdict} R={stabilization} shift-criterion={easy}")
    if args.strict and not verdict:
        return EXIT_VERDICT
    return EXIT_OK


def cmd_nilpotent(args) -> int:
    u = _unitary_arg(args)
    flag, degree = is_nilpotent(u)
    chain, scalars = subspace_chain(u)
    if flag != scalars:
        return EXIT_STATE
    out = {"op": "nilpotent", "input_ref": _input_ref(args), "verdict": flag,
           "chain_dims": chain.dims}
    if degree is not None:
        out["degree"] = degree
    _emit(out)
    if args.strict and not flag:
        return EXIT_VERDICT
    return EXIT_OK


def cmd_weyl(args) -> int:
    p = _load_perm(args)
    if args.ad:
        p = weyl.ad_perm(p)
    window = args.window or (2 * p.k + 2)
    m_max = args.m_max if args.m_max is not None else p.k
    cyl = weyl.restrict_to_diag(p, window)
    m = weyl.eventually_commutes(cyl, m_max)
    out = {
        "op": "weyl",
        "window": window,
        "m_max": m_max,
        "m": m,
        "certified": m is not None,
    }
    if args.dump:
        out["cylinders"] = cyl.to_json()
    _emit(out)
    if m is None:
        _info(f"not certified within window {window}, m_max {m_max}")
    else:
        _info(f"commutes with the shift after {m} damping shifts (window {window})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cuntz", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("check", help="conditions for a permutation")
    _add_perm_args(sp)
    sp.add_argument("--strict", action="store_true")
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("trees", help="letter-map analysis record")
    _add_perm_args(sp)
    sp.set_defaults(fn=cmd_trees)

    sp = sub.add_parser("export-dot", help="tree diagrams as DOT text")
    _add_perm_args(sp)
    sp.add_argument("-o", "--output")
    sp.set_defaults(fn=cmd_export_dot)

    sp = sub.add_parser("enumerate", help="sharded sweep over a level")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--predicate", choices=("b", "d", "both"), default="both")
    sp.add_argument("--shards", type=int)
    sp.add_argument("--checkpoint")
    sp.add_argument("--witnesses")
    sp.add_argument("--force-large", action="store_true")
    sp.set_defaults(fn=cmd_enumerate)

    sp = sub.add_parser("count-table", help="automorphism counts for one level")
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--shards", type=int)
    sp.add_argument("--table", action="store_true", help="render the desk-scale table")
    sp.add_argument("--force-large", action="store_true")
    sp.set_defaults(fn=cmd_count_table)

    sp = sub.add_parser("invert", help="localized inverse search")
    _add_perm_args(sp)
    sp.add_argument("--matrix", help="JSON matrix file instead of a permutation")
    sp.add_argument("--h-max", type=int, default=8)
    sp.add_argument("--strict", action="store_true")
    sp.set_defaults(fn=cmd_invert)

    sp = sub.add_parser("order", help="order under convolution powers")
    _add_perm_args(sp)
    sp.add_argument("--order-cap", type=int, default=64)
    sp.add_argument("--level-cap", type=int, default=16)
    sp.set_defaults(fn=cmd_order)

    sp = sub.add_parser("commutant", help="self-intertwiner basis")
    _add_perm_args(sp)
    sp.add_argument("--matrix")
    sp.add_argument("--grade", type=int, default=0)
    sp.add_argument("--cap", type=int, default=2)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.set_defaults(fn=cmd_commutant)

    sp = sub.add_parser("ybe", help="Yang-Baxter checks for a level-2 unitary")
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--perm")
    sp.add_argument("--perm-file")
    sp.add_argument("--matrix")
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--strict", action="store_true")
    sp.set_defaults(fn=cmd_ybe)

    sp = sub.add_parser("diag-preserve", help="does the endomorphism preserve the diagonal")
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--perm")
    sp.add_argument("--perm-file")
    sp.add_argument("--matrix")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--strict", action="store_true")
    sp.set_defaults(fn=cmd_diag_preserve)

    sp = sub.add_parser("nilpotent", help="invertibility via the quotient maps")
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--perm")
    sp.add_argument("--perm-file")
    sp.add_argument("--matrix")
    sp.add_argument("--strict", action="store_true")
    sp.set_defaults(fn=cmd_nilpotent)

    sp = sub.add_parser("weyl", help="eventual shift commutation on cylinders")
    _add_perm_args(sp)
    sp.add_argument("--ad", action="store_true", help="use conjugation by the permutation")
    sp.add_argument("--window", type=int)
    sp.add_argument("--m-max", type=int)
    sp.add_argument("--dump", action="store_true", help="include cylinder tables")
    sp.set_defaults(fn=cmd_weyl)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except CapExceeded as exc:
        _info(f"refused: {exc}")
        return EXIT_CAP
    except (CheckpointMismatch, OSError) as exc:
        _info(f"state error: {exc}")
        return EXIT_STATE
    except ValueError as exc:
        _info(f"usage error: {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
