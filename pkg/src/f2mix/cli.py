"""Command-line entry point: ``f2mix {gen,recover,test-comparability,experiment,lpn-demo}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .comparability import ComparabilityParams, test_comparability
from .errors import ConfigError, F2MixError
from .gf2 import GF2Vector, is_subset
from .harness import Instance, InstanceSpec, RELATIONS, make_instance, parse_config, run_experiment
from .lpn import LpnMixtureOracle, LpnOracle, lpn_mixture_components, recover_hyperplane, split_packed
from .oracle import MixtureOracle
from .recovery import recover_driver
from .rng import make_rng, random_bits


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _table(record: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(record, indent=2, sort_keys=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = sorted(record)
    w.writerow(keys)
    w.writerow(["" if record[k] is None else (";".join(record[k]) if isinstance(record[k], list) else record[k])
                for k in keys])
    return buf.getvalue()


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=None, help="master seed (unsigned 64-bit)")
    p.add_argument("--wmin", type=float, default=0.3, help="lower bound on both mixing weights")
    p.add_argument("--delta", type=float, default=0.1, help="failure probability")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _spec_args(p: argparse.ArgumentParser, required: bool):
    p.add_argument("--n", type=int, required=required)
    p.add_argument("--d0", type=int, required=required)
    p.add_argument("--d1", type=int, required=required)
    p.add_argument("--relation", choices=RELATIONS, default="incomparable")
    p.add_argument("--w0", default="0.5", help="weight of the first subspace, as a decimal")


def _load_instance(args) -> Instance:
    if args.instance:
        return Instance.loads(Path(args.instance).read_text())
    if args.n is None or args.d0 is None or args.d1 is None:
        raise SystemExit("give an instance file or --n, --d0 and --d1")
    return make_instance(InstanceSpec(args.n, args.d0, args.d1, args.relation, args.w0, args.seed or 0))


def cmd_gen(args) -> int:
    inst = make_instance(InstanceSpec(args.n, args.d0, args.d1, args.relation, args.w0, args.seed or 0))
    if args.format == "json":
        _emit(inst.dumps(), args.out)
    else:
        _emit(_table(inst.to_json(), "csv"), args.out)
    return 0


def cmd_recover(args) -> int:
    inst = _load_instance(args)
    result = recover_driver(inst.oracle(seed=args.seed), inst.n, args.wmin, args.delta)
    record = {
        "regime": result.regime.value,
        "basis_a0": result.a0_hat.to_strings(),
        "basis_a1": result.a1_hat.to_strings(),
        "w0_hat": result.w0_hat,
        "w1_hat": result.w1_hat,
        "samples": result.samples,
        "exact_match": {result.a0_hat, result.a1_hat} == {inst.a0, inst.a1},
    }
    _emit(_table(record, args.format), args.out)
    return 0


def cmd_test_comparability(args) -> int:
    inst = _load_instance(args)
    answer = test_comparability(inst.oracle(seed=args.seed), ComparabilityParams(inst.n, args.wmin, args.delta))
    truth = is_subset(inst.a0, inst.a1) or is_subset(inst.a1, inst.a0)
    _emit(_table({"comparable": answer, "truth": truth}, args.format), args.out)
    return 0


def cmd_experiment(args) -> int:
    try:
        cfg = parse_config(Path(args.config).read_text())
    except ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg = type(cfg)(**{**vars(cfg), "seed": args.seed})
    report = run_experiment(cfg)
    text = report.to_json() if args.format == "json" else report.to_csv()
    _emit(text, args.out)
    rate = report.success_rate
    print(f"success {report.successes}/{len(report.rows)}" + ("" if rate is None else f" = {rate:.3f}")
          + f", threshold {cfg.threshold}", file=sys.stderr)
    return 0 if report.passed else 1


def cmd_lpn_demo(args) -> int:
    rng = make_rng(args.seed or 0)
    n, eps = args.n, args.eps
    secret = GF2Vector(n, random_bits(rng, n) or 1)
    a0, a1, w0 = lpn_mixture_components(secret, eps)
    zs = LpnMixtureOracle(LpnOracle(secret, eps, rng)).draw_batch(args.samples)
    mass = float(a1.contains_packed(zs).mean())

    # split at the lowest coordinate in the support of the hyperplane's constraint
    row = secret.bits | (1 << n)
    c = (row & -row).bit_length() - 1
    reduced = (row & ((1 << c) - 1)) | ((row >> (c + 1)) << c)
    mix = MixtureOracle(a0, a1, w0, rng=rng)
    xs, ys = split_packed(mix.draw_batch(args.samples), n + 1, c + 1)
    parity = (np.bitwise_count(xs & np.uint64(reduced)).sum(axis=1) & 1).astype(np.uint8)
    agreement = float((parity == ys).mean())

    wins = 0
    for _ in range(args.trials):
        o = MixtureOracle(a0, a1, w0, rng=rng)
        wins += recover_hyperplane(o, min(float(w0), 0.5), args.delta).recovered == a1
    record = {
        "n": n, "eps": eps, "secret": secret.to_string(),
        "hyperplane_mass": mass, "hyperplane_mass_expected": 1 - eps,
        "split_agreement": agreement, "split_agreement_expected": 1 - eps,
        "round_trips": args.trials, "round_trip_successes": wins,
    }
    _emit(_table(record, args.format), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="f2mix", description="Learn a mixture of two subspaces of GF(2)^n.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance")
    _spec_args(g, True)
    _common(g)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("recover", help="recover the subspaces of an instance")
    r.add_argument("instance", nargs="?", help="instance JSON file")
    _spec_args(r, False)
    _common(r)
    r.set_defaults(func=cmd_recover)

    t = sub.add_parser("test-comparability", help="run the comparability test on an instance")
    t.add_argument("instance", nargs="?", help="instance JSON file")
    _spec_args(t, False)
    _common(t)
    t.set_defaults(func=cmd_test_comparability)

    e = sub.add_parser("experiment", help="run a batch experiment from a JSON config")
    e.add_argument("config")
    _common(e)
    e.set_defaults(func=cmd_experiment)

    lp = sub.add_parser("lpn-demo", help="check the parity-with-noise reductions")
    lp.add_argument("--n", type=int, default=6, help="parity length")
    lp.add_argument("--eps", type=float, default=0.1)
    lp.add_argument("--samples", type=int, default=100_000)
    lp.add_argument("--trials", type=int, default=20)
    _common(lp)
    lp.set_defaults(func=cmd_lpn_demo)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except F2MixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
