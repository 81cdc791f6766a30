"""``msr`` command line.

Exit codes: 0 when the requested semantics hold, 1 for a genuine property
violation, 2 for malformed input or configuration.
"""

import argparse
import json
import os
import sys

from . import blocks, harness, msr, states, symcore
from .errors import MsrError


def parse_dims(text):
    """``"2..8"``, ``"2,4,8"`` or a mix such as ``"2..4,8"``."""
    dims = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                dims.extend(range(int(lo), int(hi) + 1))
            elif part:
                dims.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid dims {text!r}") from None
    if not dims:
        raise argparse.ArgumentTypeError("dims must not be empty")
    return tuple(dims)


def parse_int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list {text!r}") from None


def seed_from_env(seed):
    env = os.environ.get("MSR_SEED")
    if env is None:
        return seed
    try:
        return int(env, 0)
    except ValueError:
        raise harness.ConfigError(f"MSR_SEED must be an integer, got {env!r}") from None


def _write_json(doc, path):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_run(args):
    config = harness.SuiteConfig(
        suite=args.suite,
        seed=seed_from_env(args.seed),
        dims=args.dims,
        trials=args.trials,
        quad_nodes=args.quad_nodes,
        out=args.out,
        format=args.format,
        jobs=args.jobs,
    )
    result = harness.run_suite(config)
    report = result.report
    status = "PASS" if result.exit_code == 0 else "FAIL"
    print(
        f"{status} suite={config.suite} seed={config.seed} trials={config.trials} "
        f"violations={len(report['violations'])} worst_margin={report['worst_margin']!r}"
    )
    if "counterexamples" in report:
        print(f"counterexamples found: {len(report['counterexamples'])}")
    return result.exit_code


def cmd_sqrt(args):
    a = symcore.load_matrix(args.input)
    oracle = symcore.sqrt_spectral(a)
    meta = {"method": args.method, "nodes": None, "oracle_gap": 0.0}
    if args.method == "spectral":
        root = oracle
    elif args.method == "integral":
        root, info = msr.sqrt_integral(a, msr.make_rule(args.nodes), full_output=True)
        meta.update(
            nodes=args.nodes,
            oracle_gap=info.oracle_gap,
            error_estimate=info.error_estimate,
            regularized=info.regularized,
        )
        if info.regularized:
            print("warning: singular input was shifted by 1e-12 before quadrature", file=sys.stderr)
    else:
        root = msr.regularized_sqrt(a, args.reg_n)
        meta.update(reg_n=args.reg_n, oracle_gap=symcore.order_unit_norm(root - oracle))
    doc = symcore.matrix_to_json(root)
    doc["meta"] = meta
    _write_json(doc, args.out)
    return 0


def cmd_bench(args):
    records = harness.bench(args.dims, args.nodes_list, seed_from_env(args.seed))
    text = harness.bench_to_csv(records)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.svg:
        harness.bench_svg(records, args.svg)
    return 0


def cmd_block(args):
    generators = [symcore.load_matrix(p) for p in args.inputs]
    block = blocks.build_block(generators)
    _write_json(block.dump(), args.dump_block)
    return 0


def cmd_state(args):
    omega = states.State.load(args.state)
    a = symcore.load_matrix(args.input)
    doc = {"value": states.eval_state(omega, a)}
    if symcore.is_psd(a) and symcore.invertibility_margin(a) >= msr.SINGULAR_MARGIN:
        lhs, rhs, gap = msr.state_integral_identity(omega, a, msr.make_rule(args.nodes))
        doc["integral_identity"] = {"lhs": lhs, "rhs": rhs, "gap": gap, "nodes": args.nodes}
    _write_json(doc, args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="msr", description="Monotone square root laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a randomized verification suite")
    run.add_argument("--suite", choices=harness.SUITES, default="msr")
    run.add_argument("--seed", type=int, default=42, help="u64 seed (MSR_SEED overrides)")
    run.add_argument("--dims", type=parse_dims, default=tuple(range(2, 9)))
    run.add_argument("--trials", type=int, default=1000)
    run.add_argument("--quad-nodes", type=int, default=256)
    run.add_argument("--out", help="report path")
    run.add_argument("--format", choices=("json", "csv"), default=None,
                     help="report format (default: from --out suffix, else json)")
    run.add_argument("--jobs", type=int, default=1)
    run.set_defaults(func=cmd_run)

    sq = sub.add_parser("sqrt", help="square root of a matrix file")
    sq.add_argument("--in", dest="input", required=True)
    sq.add_argument("--method", choices=msr.METHODS, default="spectral")
    sq.add_argument("--nodes", type=int, default=msr.DEFAULT_NODES)
    sq.add_argument("--reg-n", type=int, default=10**6, help="n for the regularized method")
    sq.add_argument("--out", default="-")
    sq.set_defaults(func=cmd_sqrt)

    be = sub.add_parser("bench", help="accuracy/time of spectral, integral and Denman-Beavers roots")
    be.add_argument("--dims", type=parse_dims, default=(8,))
    be.add_argument("--nodes-list", type=parse_int_list, default=(8, 16, 32, 64, 128))
    be.add_argument("--seed", type=int, default=42)
    be.add_argument("--out")
    be.add_argument("--svg")
    be.set_defaults(func=cmd_bench)

    bl = sub.add_parser("block", help="build a commutative block from commuting matrix files")
    bl.add_argument("inputs", nargs="+")
    bl.add_argument("--dump-block", default="-")
    bl.set_defaults(func=cmd_block)

    st = sub.add_parser("state", help="evaluate a state file on a matrix file")
    st.add_argument("--state", required=True)
    st.add_argument("--in", dest="input", required=True)
    st.add_argument("--nodes", type=int, default=msr.DEFAULT_NODES)
    st.add_argument("--out", default="-")
    st.set_defaults(func=cmd_state)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "format", "unset") is None:
        args.format = "csv" if args.out and args.out.endswith(".csv") else "json"
    try:
        return args.func(args)
    except (MsrError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
