"""Command-line interface.

Subcommands:
  generate      write a synthetic drifting stream + reference to CSV
  run           run one experiment; emits curve/summary CSVs and a figure
  sweep         query-rate sweep for a selective-sampling algorithm
  bound-check   print both sides of each guarantee for a configured run
  oracle-check  validate the learner recurrences against brute force

Exit codes: 0 success, 2 validation/config error, 3 I/O error,
4 numeric error or failed check.
"""

import argparse
import math
import sys

import numpy as np

from . import bounds, oracle
from .data import DriftScenario, ShiftSpec, generate_synthetic_drift, save_dense_csv
from .harness import (
    ALGORITHMS,
    ConfigError,
    ExperimentConfig,
    emit_csv,
    emit_sweep_csv,
    run_experiment,
    run_single,
    sweep_query_rate,
    _lasec_params,
)
from .learner import Lasec, LasecParams
from .linalg import NumericDegeneracyError

EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def _parse_value(text):
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    if t in ("true", "yes", "on"):
        return True
    if t in ("false", "no", "off"):
        return False
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return text.strip()


def read_config_file(path):
    """Parse the key = value config format (# starts a comment).

    Algorithm parameters use the param.NAME prefix; everything else maps
    onto the corresponding command-line option.
    """
    options, params = {}, {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, raw = line.partition("=")
            key = key.strip().lower().replace("-", "_")
            value = _parse_value(raw)
            if key.startswith("param."):
                params[key[len("param.") :]] = value
            else:
                options[key] = value
    return options, params


_CONFIG_KEYS = {
    "algorithm": str,
    "seed": int,
    "repeats": int,
    "out": str,
    "t": int,
    "d": int,
    "segment": int,
    "dataset": str,
    "format": str,
    "shift_segment": int,
    "classes": int,
    "shuffle": bool,
    "checkpoint_every": int,
    "gamma": float,
    "name": str,
    "plot": bool,
}


def _merge_config(args):
    """File options fill in whatever the command line left at defaults."""
    params = {}
    if args.config:
        options, params = read_config_file(args.config)
        for key, value in options.items():
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            if getattr(args, key, None) is None:
                setattr(args, key, _CONFIG_KEYS[key](value))
    for item in args.param or []:
        if "=" not in item:
            raise ConfigError(f"--param needs key=value, got {item!r}")
        key, _, raw = item.partition("=")
        params[key.strip()] = _parse_value(raw)
    return params


def _fill_defaults(args, **defaults):
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def build_experiment_config(args, params):
    _fill_defaults(
        args,
        algorithm="lasec",
        seed=0,
        repeats=50,
        t=10000,
        d=50,
        segment=500,
        format="dense-csv",
        shift_segment=500,
        classes=10,
        shuffle=True,
        checkpoint_every=100,
        gamma=0.1,
    )
    if args.dataset:
        scenario = None
        shift = ShiftSpec(
            segment_length=args.shift_segment,
            classes=tuple(range(args.classes)),
            shuffle=args.shuffle,
        )
    else:
        scenario = DriftScenario(T=args.t, d=args.d, segment_length=args.segment)
        shift = None
    return ExperimentConfig(
        algorithm=args.algorithm,
        params=params,
        scenario=scenario,
        dataset=args.dataset,
        dataset_format=args.format,
        shift=shift,
        repeats=args.repeats,
        seed=args.seed,
        checkpoint_every=args.checkpoint_every,
        gamma=args.gamma,
    )


def _add_common(p):
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--repeats", type=int, help="independent runs (default 50)")
    p.add_argument("--out", help="output directory (default ./results)")
    p.add_argument("--algorithm", choices=sorted(ALGORITHMS), help="learner to run")
    p.add_argument(
        "--param",
        action="append",
        metavar="KEY=VALUE",
        help="algorithm parameter override, repeatable",
    )
    p.add_argument("--t", type=int, help="synthetic stream length (default 10000)")
    p.add_argument("--d", type=int, help="synthetic dimension (default 50)")
    p.add_argument("--segment", type=int, help="synthetic concept length (default 500)")
    p.add_argument("--dataset", help="dense-csv or sparse file to stream instead")
    p.add_argument("--format", choices=["dense-csv", "sparse-index-value"])
    p.add_argument("--shift-segment", dest="shift_segment", type=int)
    p.add_argument("--classes", type=int, help="label universe size for shifts")
    p.add_argument(
        "--no-shuffle", dest="shuffle", action="store_false", default=None
    )
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    p.add_argument("--gamma", type=float, help="margin for bound diagnostics")
    p.add_argument("--name", help="basename for output files (default: algorithm)")
    p.add_argument(
        "--no-plot", dest="plot", action="store_false", default=None,
        help="skip figure rendering",
    )


def cmd_generate(args):
    import os

    params = _merge_config(args)
    if params:
        raise ConfigError("generate takes no algorithm parameters")
    _fill_defaults(args, seed=0, t=10000, d=50, segment=500, out="results")
    scenario = DriftScenario(
        T=args.t, d=args.d, segment_length=args.segment, seed=args.seed
    )
    stream, reference = generate_synthetic_drift(scenario)
    os.makedirs(args.out, exist_ok=True)
    stream_path = os.path.join(args.out, "stream.csv")
    ref_path = os.path.join(args.out, "reference.csv")
    save_dense_csv(stream_path, stream.X, stream.y)
    with open(ref_path, "w", encoding="utf-8", newline="") as fh:
        for row in reference.U:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    print(f"wrote {stream_path} ({len(stream)} x {stream.dim}) and {ref_path}")
    return 0


def cmd_run(args):
    params = _merge_config(args)
    cfg = build_experiment_config(args, params)
    _fill_defaults(args, out="results", name=cfg.algorithm, plot=True)
    result, _, mean_rhs = run_experiment(cfg, keep_traces=False)
    curve, summary = emit_csv(
        result, args.out, args.name, cfg.algorithm, cfg.params, mean_rhs
    )
    print(f"wrote {curve} and {summary}")
    print(
        f"final accuracy {np.mean(result.final_accuracy):.4f}"
        f" (query rate {np.mean(result.final_query_rate):.3f})"
    )
    if args.plot:
        from .plots import plot_accuracy_curves
        import os

        fig = plot_accuracy_curves(
            {cfg.algorithm: result},
            os.path.join(args.out, f"{args.name}_accuracy.png"),
            title=f"{cfg.algorithm} on "
            + ("synthetic drift" if cfg.scenario else args.dataset),
        )
        print(f"wrote {fig}")
    return 0


def cmd_sweep(args):
    params = _merge_config(args)
    cfg = build_experiment_config(args, params)
    _fill_defaults(args, out="results", name=cfg.algorithm, plot=True)
    targets = [float(t) for t in args.targets.split(",")]
    rows = sweep_query_rate(cfg, targets)
    path = emit_sweep_csv(rows, args.out, args.name)
    print(f"wrote {path}")
    for row in rows:
        flag = "" if row.converged else "  [target unachieved]"
        print(
            f"target {row.target:.2f}: realized {row.realized:.3f},"
            f" accuracy {row.accuracy:.4f}, param {row.param_value:.6g}{flag}"
        )
    if args.plot:
        from .plots import plot_sweep
        import os

        fig = plot_sweep(
            rows,
            os.path.join(args.out, f"{args.name}_sweep.png"),
            title=f"{cfg.algorithm} accuracy vs query rate",
        )
        print(f"wrote {fig}")
    return 0


def cmd_bound_check(args):
    params = _merge_config(args)
    cfg = build_experiment_config(args, params)
    if cfg.scenario is None:
        raise ConfigError("bound-check needs a synthetic scenario (known reference)")
    if cfg.algorithm not in ("lasec", "lasec-ss"):
        raise ConfigError("bound-check applies to lasec or lasec-ss")
    print(f"{'run':>4} {'criterion':<28} {'observed':>14} {'bound':>14} {'ok':>4}")
    all_ok = True
    rows = []
    for idx in range(cfg.repeats):
        trace, stream, reference = run_single(cfg, idx)
        inputs = bounds.collect_bound_inputs(
            trace, stream, reference, _lasec_params(cfg), cfg.gamma
        )
        checks = []
        if cfg.algorithm == "lasec":
            checks.append(("mistakes <= thm1", trace.n_mistakes, bounds.theorem1_rhs(inputs)))
        else:
            checks.append(("mistakes <= thm2", trace.n_mistakes, bounds.theorem2_rhs(inputs)))
            expected = bounds.expected_queries(trace)
            sigma = math.sqrt(
                float(np.sum(trace.query_probs * (1.0 - trace.query_probs)))
            )
            checks.append(
                ("|queries - E| <= 3sd", abs(trace.n_queries - expected), 3.0 * sigma)
            )
        checks.append(
            ("quad sum <= trace bound", inputs.quad_sum, bounds.trace_bound_a4(inputs, check=False))
        )
        for label, observed, bound in checks:
            ok = observed <= bound
            all_ok &= ok
            rows.append(ok)
            print(
                f"{idx:>4} {label:<28} {observed:>14.4f} {bound:>14.4f}"
                f" {'yes' if ok else 'NO':>4}"
            )
    if not all_ok:
        print("bound-check FAILED", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"all {len(rows)} checks passed")
    return 0


def cmd_oracle_check(args):
    _fill_defaults(args, seed=0)
    rng = np.random.default_rng(args.seed)
    worst_rel = 0.0
    agree = total = 0
    for _ in range(args.trials):
        t = int(rng.integers(1, 9))
        d = int(rng.integers(1, 4))
        b, c = np.sort(rng.uniform(0.1, 10.0, size=2))
        if b == c:
            continue
        xs = rng.standard_normal((t, d))
        ys = rng.choice([-1.0, 1.0], size=t)
        learner = Lasec(LasecParams(b=float(b), c=float(c)), d)
        for i in range(t):
            learner.update(xs[i], ys[i])
        rec = learner.min_tracking_objective()
        val, _ = oracle.brute_force_min_q(
            oracle.QProblem(xs=xs, ys=ys, b=float(b), c=float(c))
        )
        worst_rel = max(worst_rel, abs(rec - val) / max(1.0, abs(val)))
        probe = Lasec(LasecParams(b=float(b), c=float(c)), d)
        for i in range(t - 1):
            probe.update(xs[i], ys[i])
        p_hat, _ = probe.predict_margin(xs[-1])
        if abs(p_hat) > 1e-9:
            total += 1
            label = oracle.brute_force_minmax_label(
                xs[:-1], ys[: t - 1], xs[-1], float(b), float(c)
            )
            agree += label == (1 if p_hat >= 0 else -1)
    print(f"recurrence vs direct minimum: worst relative error {worst_rel:.3e}")
    print(f"min-max label agreement: {agree}/{total}")
    if worst_rel > 1e-8 or agree != total:
        print("oracle-check FAILED", file=sys.stderr)
        return EXIT_NUMERIC
    print("oracle-check passed")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lasec",
        description="Online classification under drift with selective label queries",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic stream + reference")
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="run one experiment")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="query-rate sweep")
    _add_common(p)
    p.add_argument(
        "--targets", default="0.1,0.2,0.4,0.6,0.8,1.0", help="comma-separated rates"
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bound-check", help="two-sided report of each guarantee")
    _add_common(p)
    p.set_defaults(func=cmd_bound_check)

    p = sub.add_parser("oracle-check", help="small-instance recurrence validation")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericDegeneracyError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
