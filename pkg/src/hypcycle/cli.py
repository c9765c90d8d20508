"""Command-line interface: subgroup homology, cycle classes, Hecke
matrices, ordinary parts, the main-theorem and quotient verifiers,
boundary data, and batch runs over a manifest.

Reports are deterministic JSON (sorted keys, no timestamps), so equal
configurations produce byte-identical output.  Exit codes: 0 for
Verified/OK, 1 for Falsified, 2 for Inconclusive or partial failure,
3 and above for errors.
"""

import argparse
import csv
import io
import json
import sys

from . import __version__
from .boundary import (
    boundary_subgroup,
    check_boundary_identity,
    check_hecke_generation,
    cusp_data,
)
from .cosets import SubgroupSpec
from .hecke import WrongDivisibility, diamond, hecke_T, hecke_U
from .homology import compute_h1, cycle_of
from .intlinalg import RingSpec, ZZ
from .ordinary import (
    Budget,
    cycle_quotient_report,
    mod_p_bridge,
    ordinary_part,
    verify_main_theorem,
)
from .psl2 import PMat, classify, poly_str, quadratic_form
from .symspace import poly_pow


class CliError(Exception):
    def __init__(self, message, code=3):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, code=3)


def _budget_from(args):
    return Budget(
        max_word_len=args.max_word_len,
        max_generators=args.max_generators,
        patience=args.patience,
        seed=args.seed,
    )


def _config_dict(args):
    skip = {"func", "output"}
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in skip or callable(val):
            continue
        out[key] = val
    out["version"] = __version__
    return out


def cmd_h1(args):
    spec = SubgroupSpec.parse(args.group)
    ring = RingSpec.parse(args.ring)
    h1 = compute_h1(spec, args.k, ring)
    report = {
        "level": spec.N,
        "group": spec.name,
        "k": args.k,
        "ring": str(ring),
        "invariant_factors": list(h1.invariant_factors),
        "rank": h1.rank,
    }
    return report, 0


def cmd_cycle(args):
    spec = SubgroupSpec.parse(args.group)
    g = PMat.parse(args.matrix)
    if not spec.contains(g):
        raise CliError("matrix is not in the subgroup", code=3)
    cls = classify(g)
    report = {
        "group": spec.name,
        "k": args.k,
        "matrix": repr(g),
        "class": cls,
    }
    if cls in ("hyperbolic", "parabolic"):
        q = quadratic_form(g)
        h1 = compute_h1(spec, args.k, ZZ)
        coords = h1.cycle_coords(g, poly_pow(q, args.k))
        report["quadratic_form"] = poly_str(q)
        report["coords"] = list(coords)
        report["h1_invariant_factors"] = list(h1.invariant_factors)
    return report, 0


def cmd_hecke(args):
    spec = SubgroupSpec.parse(args.group)
    ring = RingSpec.parse(args.ring)
    h1 = compute_h1(spec, args.k, ring)
    op_name = args.op
    if op_name == "Tp":
        if args.p is None:
            raise CliError("--op Tp requires --p")
        op = hecke_T(args.p, h1)
        label = "T%d" % args.p
    elif op_name == "Up":
        if args.p is None:
            raise CliError("--op Up requires --p")
        op = hecke_U(args.p, h1)
        label = "U%d" % args.p
    elif op_name.startswith("diamond:"):
        d = int(op_name.split(":", 1)[1])
        op = diamond(d, h1)
        label = "<%d>" % d
    else:
        raise CliError("unknown operator %r" % op_name)
    report = {
        "group": spec.name,
        "k": args.k,
        "ring": str(ring),
        "operator": label,
        "matrix": op.matrix,
        "invariant_factors": list(h1.invariant_factors),
    }
    if ring.kind == "Q":
        report["charpoly"] = op.charpoly_str()
    return report, 0


def cmd_ordinary(args):
    spec = SubgroupSpec.parse(args.group)
    dec, pm, h1z, op = ordinary_part(spec, args.k, args.p, args.M)
    report = {
        "group": spec.name,
        "k": args.k,
        "p": args.p,
        "M": args.M,
        "operator": ("U%d" if spec.N % args.p == 0 else "T%d") % args.p,
        "h1_invariant_factors": list(h1z.invariant_factors),
        "ordinary_invariant_factors": list(dec.ordinary_factors),
        "ordinary_rank": dec.ordinary_rank,
        "nilpotent_rank": dec.nilpotent_rank,
        "stabilization_exponent": dec.stabilization_exponent,
    }
    return report, 0


def cmd_verify_main(args):
    spec = SubgroupSpec.parse(args.group)
    rep = verify_main_theorem(spec, args.k, args.p, args.M, _budget_from(args))
    return rep.as_dict(), rep.exit_code


def cmd_quotient(args):
    spec = SubgroupSpec.parse(args.group)
    rep = cycle_quotient_report(spec, args.k, _budget_from(args))
    return rep.as_dict(), rep.exit_code


def cmd_boundary(args):
    spec = SubgroupSpec.parse(args.group)
    ring = RingSpec.parse(args.ring)
    h1 = compute_h1(spec, args.k, ring)
    cusps = cusp_data(h1.table)
    module, _ = boundary_subgroup(spec, args.k, ring, h1=h1)
    report = {
        "group": spec.name,
        "k": args.k,
        "ring": str(ring),
        "cusps": [c.as_dict() for c in cusps],
        "boundary_invariant_factors": list(module.invariant_factors),
        "h1_invariant_factors": list(h1.invariant_factors),
    }
    return report, 0


def cmd_check_identity(args):
    rep = check_boundary_identity(args.N, args.p, args.k)
    return rep.as_dict(), rep.exit_code


def cmd_check_generation(args):
    spec = SubgroupSpec.parse(args.group)
    rep = check_hecke_generation(spec, args.k)
    return rep.as_dict(), rep.exit_code


def cmd_bridge(args):
    rep = mod_p_bridge(args.N, args.p, args.k, _budget_from(args))
    return rep.as_dict(), rep.exit_code


BATCH_COLUMNS = ["row", "subcommand", "status", "exit_code", "group", "k",
                 "ring", "p", "M", "verdict", "detail"]


def cmd_batch(args):
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    if not isinstance(manifest, list):
        raise CliError("manifest must be a JSON list of run configs")
    rows = []
    worst = 0
    for i, entry in enumerate(manifest):
        row = {c: "" for c in BATCH_COLUMNS}
        row["row"] = i
        row["subcommand"] = entry.get("subcommand", "")
        argv = [entry.get("subcommand", "")]
        for key, val in entry.items():
            if key == "subcommand":
                continue
            argv.append("--%s" % key.replace("_", "-"))
            argv.append(str(val))
        try:
            parsed = build_parser().parse_args(argv)
            report, code = parsed.func(parsed)
            row["status"] = "ok"
            row["exit_code"] = code
            for key in ("group", "k", "ring", "p", "M", "verdict"):
                if key in report:
                    row[key] = report[key]
            row["detail"] = json.dumps(report, sort_keys=True,
                                       separators=(",", ":"))
            worst = max(worst, min(code, 2))
        except Exception as exc:  # isolate failures per row
            row["status"] = "error"
            row["exit_code"] = 3
            row["detail"] = str(exc)
            worst = max(worst, 2)
        rows.append(row)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BATCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue(), worst


def _add_budget_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-word-len", type=int, default=10, dest="max_word_len")
    p.add_argument("--max-generators", type=int, default=300,
                   dest="max_generators")
    p.add_argument("--patience", type=int, default=25)


def build_parser():
    parser = _Parser(prog="hypcycle", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("h1", help="invariant factors and rank of H1")
    p.add_argument("--group", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ring", default="Z")
    p.set_defaults(func=cmd_h1)

    p = sub.add_parser("cycle", help="cycle class of a matrix")
    p.add_argument("--group", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_cycle)

    p = sub.add_parser("hecke", help="Hecke operator matrix and charpoly")
    p.add_argument("--group", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ring", default="Q")
    p.add_argument("--op", required=True, help="Tp | Up | diamond:d")
    p.add_argument("--p", type=int)
    p.set_defaults(func=cmd_hecke)

    p = sub.add_parser("ordinary", help="ordinary part of H1 mod p^M")
    p.add_argument("--group", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--M", type=int, default=2)
    p.set_defaults(func=cmd_ordinary)

    p = sub.add_parser("verify-main",
                       help="ordinary part vs hyperbolic-cycle span")
    p.add_argument("--group", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--M", type=int, default=2)
    _add_budget_flags(p)
    p.set_defaults(func=cmd_verify_main)

    p = sub.add_parser("quotient", help="H1 / hyperbolic-cycle span")
    p.add_argument("--group", required=True)
    p.add_argument("--k", type=int, required=True)
    _add_budget_flags(p)
    p.set_defaults(func=cmd_quotient)

    p = sub.add_parser("boundary", help="cusps and boundary subgroup")
    p.add_argument("--group", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ring", default="Z")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("check-identity",
                       help="T_p z(T) = (1 + p^(2k+1) <p>) z(T)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_check_identity)

    p = sub.add_parser("check-generation",
                       help="Hecke generation of the boundary")
    p.add_argument("--group", required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_check_generation)

    p = sub.add_parser("bridge", help="mod-p reduction bridge (p | N)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    _add_budget_flags(p)
    p.set_defaults(func=cmd_bridge)

    p = sub.add_parser("batch", help="run a JSON manifest, emit CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_batch)

    parser.add_argument("--output", help="write the report to a file")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        result, code = args.func(args)
    except CliError as exc:
        err = {"error": str(exc), "version": __version__}
        print(json.dumps(err, sort_keys=True, separators=(",", ":")))
        return exc.code
    except (WrongDivisibility, ValueError) as exc:
        err = {"error": str(exc), "version": __version__}
        print(json.dumps(err, sort_keys=True, separators=(",", ":")))
        return 3
    if isinstance(result, str):
        text = result
    else:
        result = dict(result)
        result["config"] = _config_dict(args)
        text = json.dumps(result, sort_keys=True, separators=(",", ":")) + "\n"
    output = getattr(args, "output", None)
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
