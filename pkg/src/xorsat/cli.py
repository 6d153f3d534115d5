"""Command line entry point: ``xorsat [options] FILE``.

Exit codes follow the SAT competition convention: 10 satisfiable,
20 unsatisfiable, 0 unknown, 1 usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from typing import Optional, Sequence

from . import oracle
from .cdcl import SAT, UNSAT, SolverConfig, solve
from .dimacs import DimacsError, export, parse
from .formula import lit_to_dimacs, mklit
from .preprocess import preprocess

EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_UNKNOWN = 0
EXIT_USAGE = 1

CSV_FIELDS = [
    "instance",
    "status",
    "backend",
    "decisions",
    "conflicts",
    "restarts",
    "cnf_propagations",
    "xor_propagations",
    "xor_conflicts",
    "learned",
    "xor_constraints",
    "singleton_constraints",
    "components",
    "eliminated",
    "elements_monolithic",
    "elements_decomposed",
    "elements_eliminated",
    "time",
]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xorsat", description="CDCL solver for cnf-xor formulas with Gauss-Jordan parity reasoning")
    p.add_argument("input", help="extended DIMACS file ('-' for stdin)")
    p.add_argument("--backend", choices=["unitprop", "gj", "gj-conflicts-only"], default="gj")
    p.add_argument("--decompose", type=_on_off, default=True, metavar="{on,off}")
    p.add_argument("--eliminate", type=_on_off, default=True, metavar="{on,off}")
    p.add_argument("--no-preprocess", action="store_true", help="skip unit/binary simplification and elimination")
    p.add_argument("--clausify-singletons", action="store_true")
    p.add_argument("--verify", action="store_true", help="cross-check the verdict by enumeration (at most 24 variables)")
    p.add_argument("--stats-csv", metavar="PATH")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-conflicts", type=int, default=None)
    p.add_argument("--export", metavar="PATH", help="write the preprocessed formula instead of solving")
    p.add_argument("-q", "--quiet", action="store_true", help="omit the model lines")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _model_lines(model: dict, num_vars: int, per_line: int = 10) -> list:
    lits = [lit_to_dimacs(mklit(v, model.get(v, False))) for v in range(num_vars)]
    lits.append(0)
    return ["v " + " ".join(map(str, lits[i:i + per_line])) for i in range(0, len(lits), per_line)]


def _write_csv(path: str, row: dict) -> None:
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, extrasaction="ignore")
        if new:
            w.writeheader()
        w.writerow(row)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="c %(message)s")
    try:
        f = parse(sys.stdin if args.input == "-" else args.input)
    except (OSError, DimacsError) as exc:
        print(f"c error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.export:
        g = f
        if not args.no_preprocess:
            pre = preprocess(f, eliminate=args.eliminate)
            if pre.unsat:
                print("s UNSATISFIABLE")
                return EXIT_UNSAT
            g = pre.formula
        with open(args.export, "w") as out:
            _, refused = export(g, out, clausify=args.clausify_singletons)
        for i in refused:
            print(f"c xor #{i} not clausified: too wide")
        print(f"c wrote {args.export}")
        return EXIT_UNKNOWN

    cfg = SolverConfig(
        backend=args.backend,
        decompose=args.decompose,
        eliminate=args.eliminate,
        preprocess=not args.no_preprocess,
        clausify_singletons=args.clausify_singletons,
        seed=args.seed,
        max_conflicts=args.max_conflicts,
    )
    res = solve(f, cfg)
    print(f"s {res.status}")
    if res.sat and not args.quiet:
        print("\n".join(_model_lines(res.model, f.num_vars)))
    st = res.stats
    print(f"c decisions {st.decisions} conflicts {st.conflicts} restarts {st.restarts}")
    print(f"c propagations cnf {st.cnf_propagations} xor {st.xor_propagations} xor-conflicts {st.xor_conflicts}")
    print(f"c time {res.info.get('time', 0.0):.3f}s")

    rc = {SAT: EXIT_SAT, UNSAT: EXIT_UNSAT}.get(res.status, EXIT_UNKNOWN)
    if args.verify:
        if f.num_vars > oracle.MAX_VARS:
            print(f"c verify: skipped, more than {oracle.MAX_VARS} variables")
        elif res.status in (SAT, UNSAT):
            expect = oracle.is_satisfiable(f)
            if expect != res.sat:
                print("c verify: MISMATCH with enumeration", file=sys.stderr)
                rc = EXIT_USAGE
            else:
                print("c verify: ok")

    if args.stats_csv:
        row = {k: getattr(st, k) for k in CSV_FIELDS if hasattr(st, k)}
        row.update({k: v for k, v in res.info.items() if k in CSV_FIELDS})
        row.update(instance=args.input, status=res.status, backend=args.backend, time=f"{res.info.get('time', 0.0):.6f}")
        _write_csv(args.stats_csv, row)
    return rc


if __name__ == "__main__":
    sys.exit(main())
