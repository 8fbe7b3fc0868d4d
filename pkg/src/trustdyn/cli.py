"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 numerical error.  Each command prints one deterministic summary line.
"""

from __future__ import annotations

import argparse
import sys

from . import io
from .ensemble import run_ensemble
from .errors import InvalidArgumentError, NumericalError
from .estimator import FilterConfig, filter_trajectory, steady_state_variance
from .model import simulate_cohort
from .sysid import fit_all

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _parser():
    parser = _Parser(prog="trustdyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, *names):
        if "params" in names:
            p.add_argument("--params", default=None, help="preset name (table1) or parameter JSON file")
        if "scenario" in names:
            p.add_argument("--scenario", required=True, help="scenario JSON file")
        if "logs" in names:
            p.add_argument("--logs", required=True, help="trial-log CSV file or directory of CSVs")
        if "seed" in names:
            p.add_argument("--seed", type=int, default=0)
        if "filter" in names:
            p.add_argument("--t0", type=float, default=None, help="filter prior mean")
            p.add_argument("--p0", type=float, default=FilterConfig().initial_variance,
                           help="filter prior variance")
        if "out" in names:
            p.add_argument("--out", required=True)

    sp = sub.add_parser("simulate", help="scenario -> synthetic trial logs")
    common(sp, "params", "scenario", "seed", "out")
    sp.add_argument("--deterministic", action="store_true", help="zero noise")

    common(sub.add_parser("estimate", help="logs + params -> estimate trajectory"),
           "params", "logs", "filter", "out")
    ep = sub.add_parser("ensemble", help="scenario + params -> Monte Carlo bands")
    common(ep, "params", "scenario", "seed", "filter", "out")
    ep.add_argument("--runs", type=int, default=100)
    ep.add_argument("--band-mode", default="minmax", help="minmax or percentile:P")
    ep.add_argument("--mode", choices=("resample", "fixed_record"), default="resample")
    ep.add_argument("--workers", type=int, default=1)
    common(sub.add_parser("fit", help="log corpus -> parameter file"), "logs", "out")
    common(sub.add_parser("riccati", help="params -> steady-state filter variance"), "params")
    return parser


def _params(args, scenario=None):
    if args.params is not None:
        return io.load_params(args.params)
    if scenario is not None:
        return scenario.params
    return io.load_params("table1")


def _cmd_simulate(args):
    scenario = io.load_scenario(args.scenario)
    params = _params(args, scenario)
    logs = simulate_cohort(
        params, scenario.trials, scenario.participants, scenario.initial_trust, args.seed,
        initial_spread=scenario.initial_spread, stochastic=not args.deterministic,
        trial_ids=scenario.trial_ids,
    )
    io.write_trial_logs(logs, args.out)
    n_steps = sum(len(log) for log in logs)
    return f"simulate: {len(logs)} trials, {n_steps} steps -> {args.out}"


def _cmd_estimate(args):
    params = _params(args)
    logs = io.load_trial_logs(args.logs)
    traces = {}
    config = FilterConfig(FilterConfig().initial_mean if args.t0 is None else args.t0, args.p0)
    for log in sorted(logs, key=lambda g: (g.participant_id, g.trial_id)):
        states = filter_trajectory(params, config, log)
        traces[f"{log.participant_id}/{log.trial_id}"] = io.EstimateTrace(log, tuple(states))
    io.write_results(traces, args.out)
    last = list(traces.values())[-1].states[-1]
    return (f"estimate: {len(traces)} trials; last estimate {last.mean:.6f} "
            f"(variance {last.variance:.6f}) -> {args.out}")


def _cmd_ensemble(args):
    scenario = io.load_scenario(args.scenario)
    params = _params(args, scenario)
    config = io.RunConfig(
        seed=args.seed, n_runs=args.runs, initial_mean=args.t0, initial_variance=args.p0,
        band_mode=args.band_mode, out=args.out,
    ).filter_config(scenario.initial_trust)
    results = {}
    for i, (tid, events) in enumerate(zip(scenario.trial_ids, scenario.trials)):
        results[tid] = run_ensemble(
            params, config, events, scenario.initial_trust, args.runs, (args.seed, i),
            mode=args.mode, band_mode=args.band_mode, workers=args.workers,
        )
    io.write_results(results, args.out)
    widths = [float(r.band_width[-1]) for r in results.values()]
    return (f"ensemble: {len(results)} trials x {args.runs} runs; "
            f"final band width {', '.join(f'{w:.6f}' for w in widths)} -> {args.out}")


def _cmd_fit(args):
    logs = io.load_trial_logs(args.logs)
    fit = fit_all(logs)
    io.write_results(fit, args.out)
    p = fit.params
    return (f"fit: {fit.n_observations} rows; a={p.a:.6f} b=[{', '.join(f'{v:.6f}' for v in p.b)}] "
            f"q={p.q:.6f} -> {args.out}")


def _cmd_riccati(args):
    params = _params(args)
    prior = steady_state_variance(params)
    post = steady_state_variance(params, posterior=True)
    return f"riccati: steady-state variance {prior:.17g} (posterior {post:.17g})"


COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "ensemble": _cmd_ensemble,
    "fit": _cmd_fit,
    "riccati": _cmd_riccati,
}


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        summary = COMMANDS[args.command](args)
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
