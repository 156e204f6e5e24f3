"""Command-line driver: learn, sample, eval, generate and experiment subcommands."""

import argparse
import csv
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from chowliupp import io, oracles, schemas
from chowliupp.chow_liu import chow_liu_model, max_spanning_tree, weak_edge_partition
from chowliupp.experiments import (
    KINDS,
    ExperimentConfig,
    gen_cl_failure_correlations,
    gen_cl_failure_tree_model,
    gen_latent_counterexample,
    run_experiment,
)
from chowliupp.learner import RobustnessWarning, learn_model
from chowliupp.model import loctv2, loctv_k_exact, pairwise_correlations, random_model, sample

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CONTRACT = 3


class ContractViolation(Exception):
    pass


def _emit(data):
    print(json.dumps(data, indent=2, default=io._json_default))


def cmd_learn(args):
    mu = io.read_correlations(args.corr)
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore" if args.quiet else "default", RobustnessWarning)
        model = learn_model(mu, args.eps)
    runtime = (time.perf_counter() - start) * 1e3

    report = {"eps": args.eps, "n": model.n, "runtime_ms": runtime, "constant_C_observed": None}
    if args.truth:
        truth = io.read_model(args.truth)
        dist = loctv2(model, truth)
        report["loctv2_vs_truth"] = dist
        report["constant_C_observed"] = dist / args.eps if args.eps > 0 else None
    schemas.validate(report, schemas.LEARN_REPORT)

    if args.out:
        io.write_model(model, args.out)
    else:
        _emit(io.model_to_dict(model))
    if args.report:
        io.write_json(report, args.report)
    if args.dump_partition:
        abs_mu = np.abs(mu)
        part = weak_edge_partition(max_spanning_tree(abs_mu), abs_mu).to_dict()
        schemas.validate(part, schemas.PARTITION)
        io.write_json(part, args.dump_partition)
    return EXIT_OK


def cmd_sample(args):
    model = io.read_model(args.model)
    x = sample(model, args.m, args.seed)
    if args.out:
        io.write_samples(x, args.out)
    else:
        io.write_samples(x, sys.stdout)
    return EXIT_OK


def cmd_eval(args):
    a, b = io.read_model(args.model_a), io.read_model(args.model_b)
    if a.n != b.n:
        raise ValueError(f"models have different sizes: {a.n} vs {b.n}")
    out = {"n": a.n, "loctv2": loctv2(a, b)}
    if args.k is not None:
        out["k"] = args.k
        out[f"loctv{args.k}"] = loctv_k_exact(a, b, args.k)
    _emit(out)
    return EXIT_OK


def cmd_generate(args):
    if args.kind == "failure":
        mu = gen_cl_failure_correlations(args.delta, args.n)
        io.write_correlations(mu, args.out)
        if args.tree_out:
            io.write_model(gen_cl_failure_tree_model(args.delta, args.n), args.tree_out)
    elif args.kind == "latent":
        io.write_correlations(gen_latent_counterexample(args.delta), args.out)
    else:
        model = random_model(args.n, args.seed, low=args.low, high=args.high)
        io.write_model(model, args.out)
        if args.corr_out:
            io.write_correlations(pairwise_correlations(model), args.corr_out)
    return EXIT_OK


def verify_experiment(cfg, report):
    """Oracle cross-checks on an experiment report; returns violation messages."""
    problems = []
    kind = cfg.kind
    if kind == "failure":
        if report["chow_liu_certificate"] > report["chow_liu_loctv2"] + 1e-12:
            problems.append("certificate exceeds the Chow-Liu loctv2 it lower-bounds")
        if report["chow_liu_loctv2"] < report["chow_liu_structural_bound"] - 1e-12:
            problems.append("Chow-Liu fit beats the structural lower bound")
        if cfg.n <= 64:
            mu = gen_cl_failure_correlations(cfg.delta, cfg.n)
            q = pairwise_correlations(chow_liu_model(mu))
            value, _ = oracles.exhaustive_loctv2_certificate(q, mu)
            if abs(value - report["chow_liu_loctv2"]) > 1e-12:
                problems.append("loctv2 disagrees with the exhaustive pair-marginal oracle")
    elif kind == "latent":
        mu = gen_latent_counterexample(cfg.delta)
        indep = np.array([[1, 0, 0], [0, 1, 0.25], [0, 0.25, 1.0]])
        value, _ = oracles.exhaustive_loctv2_certificate(indep, mu)
        if abs(value - cfg.delta / 2) > 1e-12:
            problems.append("independent tree model is not at loctv2 delta/2")
        learned = io.model_from_dict({"n": 3, "edges": report["model"]})
        joint = oracles.brute_force_joint(learned)
        if np.abs(oracles.joint_moments(joint) - pairwise_correlations(learned)).max() > 1e-12:
            problems.append("learned model correlations disagree with brute-force moments")
    elif kind == "structure":
        threshold = report["loctv3_threshold"]
        for row in report["per_trial"]:
            if row["loctv3"] is not None and row["loctv3"] < threshold and not row["correct"]:
                problems.append(f"trial {row['trial']}: loctv3 below threshold but wrong topology")
    elif kind == "scaling":
        for row in report["rows"]:
            if not np.isfinite(row["observed_C"]):
                problems.append(f"non-finite error constant at eps={row['eps']}")
    return problems


def cmd_experiment(args):
    data = json.loads(Path(args.config).read_text())
    data.setdefault("kind", args.kind)
    if data["kind"] != args.kind:
        raise ValueError(f"config kind {data['kind']!r} does not match {args.kind!r}")
    cfg = ExperimentConfig.from_dict(data)
    report = run_experiment(cfg)
    schemas.validate(json.loads(json.dumps(report, default=io._json_default)), schemas.EXPERIMENT_REPORTS[cfg.kind])

    out_dir = args.out_dir or cfg.output_dir
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        io.write_json({"config": cfg.to_dict(), "report": report}, out / "report.json")
        if cfg.kind == "scaling":
            with open(out / "scaling.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(schemas.SCALING_CSV_COLUMNS)
                for row in report["rows"]:
                    writer.writerow([repr(row["eps"]), repr(row["observed_C"])])
    summary = {k: v for k, v in report.items() if k not in ("per_trial", "per_trial_errors")}
    _emit(summary)

    if args.verify:
        problems = verify_experiment(cfg, report)
        if problems:
            raise ContractViolation("; ".join(problems))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="chowliupp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="learn a tree model from a correlation CSV")
    p.add_argument("--corr", required=True, help="n x n correlation CSV")
    p.add_argument("--eps", required=True, type=float, help="accuracy of the estimates")
    p.add_argument("--out", help="model JSON path (default: stdout)")
    p.add_argument("--report", help="write report JSON here")
    p.add_argument("--truth", help="ground-truth model JSON for the report")
    p.add_argument("--dump-partition", help="write the weak-edge partition JSON here")
    p.add_argument("--quiet", action="store_true", help="silence the large-eps warning")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("sample", help="draw samples from a model JSON")
    p.add_argument("--model", required=True)
    p.add_argument("-m", type=int, required=True, help="number of samples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="samples CSV path (default: stdout)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="local TV distances between two models")
    p.add_argument("--model-a", required=True)
    p.add_argument("--model-b", required=True)
    p.add_argument("--k", type=int, help="also compute exact locTV_k (n <= 15)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("generate", help="write a benchmark instance")
    p.add_argument("kind", choices=["failure", "latent", "random"])
    p.add_argument("--out", required=True)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--low", type=float, default=-1.0)
    p.add_argument("--high", type=float, default=1.0)
    p.add_argument("--tree-out", help="failure: also write the nearby tree model")
    p.add_argument("--corr-out", help="random: also write its correlations")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("experiment", help="run a configured experiment")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--config", required=True, help="ExperimentConfig JSON")
    p.add_argument("--out-dir", help="overrides output_dir from the config")
    p.add_argument("--verify", action="store_true", help="run oracle cross-checks")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ContractViolation as err:
        print(f"contract violation: {err}", file=sys.stderr)
        return EXIT_CONTRACT
    except (ValueError, OSError, json.JSONDecodeError, KeyError, TypeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
