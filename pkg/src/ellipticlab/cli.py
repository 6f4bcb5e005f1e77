"""Command-line entry point.

Verbs: ``verify <suite>`` runs a named check suite and writes a JSON
report; ``generate <family>`` writes a closed-form field; ``plot-data
<kind>`` emits plain data series; ``report merge`` combines report
documents.  Exit codes: 0 all checks passed, 1 at least one check
failed, 2 usage or runtime error.
"""
from __future__ import annotations

import argparse
import json
import sys

from .io import write_field, write_report_document, merge_report_documents
from .suites import SUITES, run_suite, generate_field, plot_data


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ellipticlab")
    sub = p.add_subparsers(dest="verb", required=True)

    v = sub.add_parser("verify", help="run a named check suite")
    v.add_argument("suite",
                   choices=sorted(SUITES) + ["full"])
    v.add_argument("--out", default=None, help="write the JSON report here")
    v.add_argument("--h", type=float, default=None, help="grid spacing")
    v.add_argument("--n-samples", type=int, default=None,
                   help="Monte Carlo sample count")

    g = sub.add_parser("generate", help="write a closed-form field")
    g.add_argument("family")
    g.add_argument("--out", required=True)
    g.add_argument("--h", type=float, default=1 / 64)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--radius", type=float, default=1.1)
    g.add_argument("--binary", action="store_true")
    g.add_argument("--param", action="append", default=[],
                   help="extra key=value passed to the family")

    d = sub.add_parser("plot-data", help="emit plain data series as JSON")
    d.add_argument("kind")
    d.add_argument("--out", default=None)
    d.add_argument("--h", type=float, default=None)

    r = sub.add_parser("report", help="report utilities")
    rsub = r.add_subparsers(dest="action", required=True)
    m = rsub.add_parser("merge", help="merge report documents")
    m.add_argument("paths", nargs="+")
    m.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        if args.verb == "verify":
            opts = {}
            if args.h:
                opts["h"] = args.h
            if args.n_samples:
                opts["n_samples"] = args.n_samples
            reports = run_suite(args.suite, opts)
            for rep in reports:
                status = "PASS" if rep.passed else "FAIL"
                print(f"[{status}] {rep.name}: lhs={rep.lhs:.6g} "
                      f"rhs={rep.rhs:.6g} margin={rep.margin:.3g}")
            if args.out:
                write_report_document(reports, args.out,
                                      meta={"suite": args.suite})
            return 0 if all(r.passed for r in reports) else 1
        if args.verb == "generate":
            kw = {}
            for item in args.param:
                k, _, v = item.partition("=")
                try:
                    kw[k] = float(v)
                except ValueError:
                    kw[k] = v
            fld = generate_field(args.family, h=args.h, dim=args.dim,
                                 radius=args.radius, **kw)
            write_field(fld, args.out, binary=args.binary)
            print(f"wrote {args.out}")
            return 0
        if args.verb == "plot-data":
            opts = {"h": args.h} if args.h else {}
            data = plot_data(args.kind, opts)
            text = json.dumps(data, indent=2)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text)
            else:
                print(text)
            return 0
        if args.verb == "report" and args.action == "merge":
            doc = merge_report_documents(args.paths)
            with open(args.out, "w") as fh:
                json.dump(doc, fh, indent=2)
            print(f"merged {len(args.paths)} documents -> {args.out}")
            return 0
        return 2
    except (KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
