"""Command-line interface: generate, solve, sweep, verify.

Examples::

    bbinf generate --users 20 --billboards 8 --tags 4 --seed 7 -o inst.json
    bbinf generate --trajectories t.csv --billboards b.csv --tags tags.csv -o inst.json
    bbinf solve inst.json --algo greedy-lazy -k 3 -l 2
    bbinf solve inst.json --algo greedy-stochastic --epsilon 0.1 --seed 1 -k 3 -l 2
    bbinf sweep --config sweep.cfg -o results.csv
    bbinf verify inst.json records.jsonl

Exit codes: 0 success, 1 validation or infeasibility, 2 resource cap
exceeded.

``generate`` builds a synthetic instance when --trajectories is absent (then
--billboards and --tags are counts); with --trajectories they are CSV paths.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .domain import BbinfError, CapExceededError, IngestError
from .experiments import (make_record, parse_algorithm, parse_config_text,
                          record_from_json, run_algorithm, run_sweep,
                          verify_records, write_failures_csv, write_results_csv)
from .ingest import (IdAssigner, IngestConfig, SyntheticSpec, assemble_instance,
                     generate_synthetic, load_billboards, load_explicit_probs,
                     load_instance, load_tags, load_trajectories, save_instance)
from .solvers import DEFAULT_CAP


class _Parser(argparse.ArgumentParser):
    # usage problems are validation failures: exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"error: {message}")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bbinf", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build an instance JSON", parents=[])
    g.add_argument("-o", "--output", required=True, help="instance JSON path")
    g.add_argument("--trajectories", help="trajectory CSV (file mode)")
    g.add_argument("--billboards", help="billboard CSV path, or count in synthetic mode")
    g.add_argument("--tags", help="tag CSV path, or count in synthetic mode")
    g.add_argument("--probs", help="explicit probability CSV (file mode)")
    g.add_argument("--users", type=int, help="user count (synthetic mode)")
    g.add_argument("--tuples", type=int, help="trajectory tuple count (synthetic mode)")
    g.add_argument("--seed", type=int, default=0, help="generator seed")
    g.add_argument("--tag-skew", type=float, default=2.0,
                   help="tag weight skew (higher: few dominant tags)")
    g.add_argument("--geo-box", help="lat_lo,lat_hi,lon_lo,lon_hi (synthetic mode)")
    g.add_argument("--t1", type=int, default=0)
    g.add_argument("--t2", type=int, default=191)
    g.add_argument("--delta", type=int, default=8)
    g.add_argument("--lambda", dest="lambda_m", type=float, default=100.0,
                   help="visibility radius in meters")

    s = sub.add_parser("solve", help="run one algorithm on an instance")
    s.add_argument("instance", help="instance JSON path")
    s.add_argument("--algo", required=True,
                   help="exhaustive | greedy-incremental | greedy-lazy | "
                        "greedy-stochastic | baseline:<KIND>")
    s.add_argument("-k", type=int, required=True, help="slot budget")
    s.add_argument("-l", type=int, required=True, help="tag budget")
    s.add_argument("--epsilon", type=float, default=0.1,
                   help="stochastic sampling control")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cap", type=int, default=DEFAULT_CAP,
                   help="exhaustive combination cap")

    w = sub.add_parser("sweep", help="run the Cartesian sweep from a config file")
    w.add_argument("--config", required=True, help="key = value config file")
    w.add_argument("-o", "--output", required=True, help="results CSV path")
    w.add_argument("--summary", help="summary JSON path "
                                     "(default: <output>.summary.json)")
    w.add_argument("--records", help="optional JSONL dump of full run records")

    v = sub.add_parser("verify", help="recheck solve/sweep records")
    v.add_argument("instance", help="instance JSON path")
    v.add_argument("records", help="JSONL file of run records")
    return p


def _int_or_die(value, what):
    try:
        return int(value)
    except (TypeError, ValueError):
        raise IngestError(f"{what} must be an integer in synthetic mode, "
                          f"got {value!r}") from None


def cmd_generate(args) -> int:
    if args.trajectories:
        if not (args.billboards and args.tags):
            raise IngestError("file mode needs --billboards and --tags CSV paths")
        users = IdAssigner()
        tuples = load_trajectories(args.trajectories, users)
        billboards = load_billboards(args.billboards)
        tags = load_tags(args.tags)
        explicit = load_explicit_probs(args.probs) if args.probs else None
        mode = "explicit_file" if args.probs else "panel_size_base"
        config = IngestConfig(t1=args.t1, t2=args.t2, delta=args.delta,
                              lambda_m=args.lambda_m, prob_mode=mode)
        inst = assemble_instance(tuples, billboards, tags, config,
                                 explicit_probs=explicit,
                                 user_labels=users.labels)
    else:
        if args.users is None or args.billboards is None or args.tags is None:
            raise IngestError("synthetic mode needs --users, --billboards and "
                              "--tags counts (or pass --trajectories for file mode)")
        n_users = args.users
        n_billboards = _int_or_die(args.billboards, "--billboards")
        n_tags = _int_or_die(args.tags, "--tags")
        spec_kwargs = dict(
            n_users=n_users, n_billboards=n_billboards, n_tags=n_tags,
            n_tuples=args.tuples if args.tuples else 5 * n_users,
            seed=args.seed, tag_skew=args.tag_skew)
        if args.geo_box:
            box = [float(x) for x in args.geo_box.split(",")]
            if len(box) != 4:
                raise IngestError("--geo-box needs 4 comma-separated numbers")
            spec_kwargs["geo_box"] = tuple(box)
        try:
            spec = SyntheticSpec(**spec_kwargs)
        except ValueError as e:
            raise IngestError(str(e)) from None
        config = IngestConfig(t1=args.t1, t2=args.t2, delta=args.delta,
                              lambda_m=args.lambda_m, prob_mode="synthetic")
        inst = generate_synthetic(spec, config)
    digest = save_instance(inst, args.output)
    print(digest)
    return 0


def cmd_solve(args) -> int:
    algorithm = parse_algorithm(args.algo)
    inst = load_instance(args.instance)
    uses_seed = algorithm == "greedy-stochastic" or algorithm.startswith("baseline:")
    result = run_algorithm(inst, algorithm, args.k, args.l,
                           epsilon=args.epsilon, seed=args.seed, cap=args.cap)
    rec = make_record("r00000", inst, algorithm, args.k, args.l,
                      args.epsilon, args.seed if uses_seed else None, result)
    print(rec.to_json())
    return 0


def cmd_sweep(args) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as e:
        raise IngestError(f"{args.config}: {e}") from e
    cfg = parse_config_text(text)
    out = run_sweep(cfg)
    write_results_csv(args.output, out.records)
    summary_path = args.summary or f"{args.output}.summary.json"
    import json
    Path(summary_path).write_text(json.dumps(out.summary, indent=2) + "\n",
                                  encoding="utf-8")
    if args.records:
        with open(args.records, "w", encoding="utf-8") as f:
            for rec in out.records:
                f.write(rec.to_json() + "\n")
    print(f"{len(out.records)} runs -> {args.output}; summary -> {summary_path}")
    if out.failures:
        failures_path = f"{args.output}.failures.csv"
        write_failures_csv(failures_path, out.failures)
        print(f"{len(out.failures)} cells failed -> {failures_path}", file=sys.stderr)
        return 1
    return 0


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    try:
        lines = Path(args.records).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise IngestError(f"{args.records}: {e}") from e
    records = [record_from_json(line) for line in lines if line.strip()]
    if not records:
        raise IngestError(f"{args.records}: no records found")
    ok, reports = verify_records(inst, records)
    for line in reports:
        print(line)
    n_fail = sum(1 for r in reports if r.startswith("FAIL"))
    print(f"{len(records) - n_fail}/{len(records)} records verified")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        if isinstance(e.code, str):
            print(e.code, file=sys.stderr)
            return 1
        return e.code if e.code else 0
    try:
        if args.command == "generate":
            return cmd_generate(args)
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_verify(args)
    except CapExceededError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except BbinfError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
