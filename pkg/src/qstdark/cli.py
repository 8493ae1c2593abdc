"""Command-line interface: ``qstdark simulate | estimate | metrics | analyze``.

Every option can also come from a JSON file given with ``--config``; keys are
option names with dashes or underscores.  Flags on the command line win.
Results documents echo the resolved configuration under ``"config"`` so a
run can be repeated with ``--config results.json``-derived settings.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__, io
from .de import FitConfig
from .errors import InvalidStateSpec, IoFailure, MalformedReference, QSTError
from .estimation import EstimatorSpec, average_state, estimate
from .metrics import coincidence_curve, merit_report
from .model import NoiseModel, Sampling, simulate_counts
from .states import bell_state, maximally_mixed

log = logging.getLogger("qstdark")

PRESETS = {"bell": bell_state, "mixed": maximally_mixed}
GLOBAL_KEYS = ("seed", "jobs", "output")


def _software():
    return {"name": "qstdark", "version": __version__}


def resolve_state(spec):
    if spec in PRESETS:
        return PRESETS[spec]()
    if not os.path.exists(spec):
        raise InvalidStateSpec(f"state must be one of {sorted(PRESETS)} or a state file, got {spec!r}")
    return io.read_state(spec, InvalidStateSpec)


def cmd_simulate(args):
    rho = resolve_state(args.state)
    noise = NoiseModel(args.n_pairs, args.dark_rate, args.background)
    cs = simulate_counts(rho, noise, seed=args.seed, sampling=Sampling(args.mode))
    cs.metadata["state"] = args.state
    cs.metadata["software"] = _software()
    io.write_counts(args.output, cs)


def _fit_config(args):
    return FitConfig(iterations=args.iterations, trials=args.trials, population=args.population,
                     de_weight=args.de_weight, de_crossover=args.de_crossover, seed=args.seed)


def cmd_estimate(args):
    counts = io.read_counts(args.input)
    spec = EstimatorSpec(args.estimator, args.model)
    cfg = _fit_config(args)
    log.info("fitting %s: %d trials x %d iterations", spec.label, cfg.trials, cfg.iterations)
    ens = estimate(counts, spec, cfg, jobs=args.jobs)
    trials = []
    for t, tr in enumerate(ens):
        rec = {"trial": t, "seed": tr.trial_seed, "loss": tr.loss_value, "n_pairs": tr.n_pairs_hat}
        if spec.dark:
            rec["dark_rate"] = tr.dark_rate_hat
            rec["background"] = tr.background_hat
        rec["rho"] = io.rho_to_pairs(tr.rho)
        trials.append(rec)
    doc = {
        "format": io.RESULTS_FORMAT,
        "software": _software(),
        "config": _config_echo(args),
        "estimator": {"loss": spec.loss_kind.value, "model": spec.count_model.value,
                      "label": spec.label},
        "counts": {"values": [float(m) for m in counts.counts], "provenance": counts.metadata},
        "trials": trials,
        "average_state": {"rho": io.rho_to_pairs(average_state(ens))},
    }
    io.write_text(args.output, io.dumps_json(doc))


def format_report_table(report, label=""):
    lines = [f"figures of merit{' for ' + label if label else ''} ({report.n_trials} trials)",
             f"{'metric':<20}{'mean':>14}{'sd':>14}"]
    for name, st in report.rows():
        lines.append(f"{name:<20}{st.mean:>14.6f}{st.sd:>14.6f}")
    return "\n".join(lines) + "\n"


def cmd_metrics(args):
    doc = io.load_json(args.input, io.MalformedResults)
    states = io.results_states(doc)
    ref = io.read_state(args.reference, MalformedReference) if args.reference else None
    report = merit_report(states, ref)
    label = (doc.get("estimator") or {}).get("label", "")
    out = {"format": io.REPORT_FORMAT, "software": _software(), "source": args.input,
           "estimator": doc.get("estimator"), "reference": args.reference,
           "metrics": report.as_dict()}
    if args.output:
        io.write_text(args.output, io.dumps_json(out))
    if args.json:
        sys.stdout.write(io.dumps_json(out))
    else:
        sys.stdout.write(format_report_table(report, label))


def cmd_analyze(args):
    rho = PRESETS[args.input]() if args.input in PRESETS else io.read_state(args.input)
    curve = coincidence_curve(rho, args.n_pairs, args.grid)
    bell = coincidence_curve(bell_state(), args.n_pairs, args.grid).values if args.bell else None
    io.write_text(args.output, io.format_curve(curve, bell))


def _config_echo(args):
    skip = {"func", "config", "jobs", "output", "verbose", "command_name"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def build_parser():
    p = argparse.ArgumentParser(prog="qstdark", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"qstdark {__version__}")
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker threads for trials")
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    p.add_argument("-v", "--verbose", action="store_true")

    # the same flags are accepted after the verb
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    common.add_argument("-o", "--output", default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS)

    sub = p.add_subparsers(dest="command_name", required=True)

    s = sub.add_parser("simulate", parents=[common], help="write a synthetic count file")
    s.add_argument("--state", default="bell", help="'bell', 'mixed' or a state JSON file")
    s.add_argument("--n-pairs", type=float, default=1000.0)
    s.add_argument("--dark-rate", type=float, default=0.0)
    s.add_argument("--background", type=float, default=0.0)
    s.add_argument("--mode", choices=[m.value for m in Sampling], default="exact")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("estimate", parents=[common], help="reconstruct states from a count file")
    e.add_argument("input", help="count CSV file")
    e.add_argument("--estimator", choices=["mle", "chi2", "ls"], default="mle")
    e.add_argument("--model", choices=["ideal", "dark"], default="dark")
    e.add_argument("--iterations", type=int, default=1600)
    e.add_argument("--trials", type=int, default=40)
    e.add_argument("--population", type=int, default=60)
    e.add_argument("--de-weight", type=float, default=0.7)
    e.add_argument("--de-crossover", type=float, default=0.9)
    e.set_defaults(func=cmd_estimate)

    m = sub.add_parser("metrics", parents=[common], help="figures of merit of a results file")
    m.add_argument("input", help="results JSON from 'estimate'")
    m.add_argument("--reference", help="state or results JSON used as fidelity reference")
    m.add_argument("--json", action="store_true", help="print the JSON report instead of a table")
    m.set_defaults(func=cmd_metrics)

    a = sub.add_parser("analyze", parents=[common], help="coincidence curve n(theta)")
    a.add_argument("input", help="'bell', 'mixed', a state JSON or a results JSON")
    a.add_argument("--n-pairs", type=float, default=1000.0)
    a.add_argument("--grid", type=int, default=360)
    a.add_argument("--bell", action="store_true", help="add the Bell-state curve as a third column")
    a.set_defaults(func=cmd_analyze)
    return p, sub.choices


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise QSTError(f"config {path} is not valid JSON: {exc}") from exc
    if isinstance(cfg, dict) and isinstance(cfg.get("config"), dict):
        cfg = cfg["config"]  # a results document: reuse its echoed settings
    if not isinstance(cfg, dict):
        raise QSTError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def _typed(parser, cfg):
    """Config values coerced with the ``type`` of the matching option."""
    types = {a.dest: a.type for a in parser._actions if a.type is not None}
    out = {}
    for k, v in cfg.items():
        conv = types.get(k)
        try:
            out[k] = conv(v) if conv is not None and v is not None else v
        except (TypeError, ValueError) as exc:
            raise QSTError(f"config value for {k!r} is invalid: {exc}") from exc
    return out


def parse_args(argv=None):
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = _load_config(args.config)
        sub = subparsers[args.command_name]
        parser.set_defaults(**_typed(parser, {k: v for k, v in cfg.items() if k in GLOBAL_KEYS}))
        sub.set_defaults(**_typed(sub, {k: v for k, v in cfg.items() if k not in GLOBAL_KEYS}))
        args = parser.parse_args(argv)
    return args


def main(argv=None):
    try:
        args = parse_args(argv)
    except QSTError as exc:
        print(f"qstdark: error: {exc}", file=sys.stderr)
        return exc.exit_code if exc.exit_code != 1 else 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except QSTError as exc:
        print(f"qstdark: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"qstdark: error: {exc}", file=sys.stderr)
        return 4
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"qstdark: numerical error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
