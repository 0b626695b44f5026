"""Command line: ``run``, ``plot`` and ``oracle`` subcommands.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .channel import NoiseParams
from .design import load_design
from .harness import ConfigError
from .population import InteractionGraph, PopulationParams

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


RUN_FLAGS = {
    # flag: (config key, help)
    "--n": ("n", "number of individuals"),
    "--p": ("p", "prevalence at time 0"),
    "--q": ("q", "contagion probability"),
    "--theta": ("theta", "interaction probability"),
    "--nu": ("nu", "Bernoulli design constant (inclusion probability nu/K)"),
    "--rho": ("rho", "comma-separated flip probabilities"),
    "--m": ("m", "comma-separated numbers of tests"),
    "--decoders": ("decoders", "comma-separated subset of bpip,bpup,bpcg,map"),
    "--trials": ("trials", "number of Monte-Carlo trials"),
    "--seed": ("seed", "master seed"),
    "--tau-min": ("tau_min", "smallest threshold"),
    "--tau-max": ("tau_max", "largest threshold"),
    "--tau-steps": ("tau_steps", "number of thresholds"),
    "--out": ("out", "CSV output path"),
    "--workers": ("workers", "worker processes"),
    "--design": ("design", "bernoulli or identity"),
    "--iters-success": ("iters_success", "e.g. bpip:15,bpup:15,bpcg:30"),
    "--iters-window": ("iters_window", "e.g. bpip:15-30,bpcg:30-50"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="contactgt", description="Noisy group testing with contact-tracing side information.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a Monte-Carlo experiment and write CSV")
    run.add_argument("--config", help="key = value configuration file")
    for flag, (key, help_text) in RUN_FLAGS.items():
        run.add_argument(flag, dest=key, help=help_text)

    plot = sub.add_parser("plot", help="draw an SVG chart from a results CSV")
    plot.add_argument("--kind", required=True, choices=("success_vs_m", "fnr_vs_fpr"))
    plot.add_argument("--in", dest="inp", required=True)
    plot.add_argument("--out", required=True)

    orc = sub.add_parser("oracle", help="exact decoding of a tiny instance by enumeration")
    orc.add_argument("--design", required=True, help="design file (header 'M N', one test per line)")
    orc.add_argument("--outcomes", required=True, help="comma-separated test outcomes")
    orc.add_argument("--rho", type=float, required=True)
    orc.add_argument("--p", type=float, required=True)
    orc.add_argument("--q", type=float, default=0.0)
    orc.add_argument("--contacts", default="", help="comma-separated contact pairs like 0-2,1-3")
    orc.add_argument("--priors", help="comma-separated priors (tanner model only; default p)")
    orc.add_argument("--model", choices=("tanner", "combined"), default="combined")
    return parser


def _cmd_run(args) -> int:
    values = {}
    if args.config:
        values.update(harness.parse_config_text(Path(args.config).read_text(encoding="utf-8")))
    for key, _ in RUN_FLAGS.values():
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    config = harness.config_from_values(values)
    if not config.output_path:
        raise ConfigError("no output path: pass --out or set out = ... in the config file")
    rows = harness.run_experiment(config)
    print("best over tau (success):")
    for r in harness.best_over_tau(rows, "success"):
        print(f"  {r.decoder:5s} m={r.m:<4d} rho={r.rho:<6g} tau={r.tau:<7g} success={r.success_rate:.4f}")
    print("best over tau (FNR+FPR):")
    for r in harness.best_over_tau(rows, "total_error"):
        print(f"  {r.decoder:5s} m={r.m:<4d} rho={r.rho:<6g} tau={r.tau:<7g} fnr={r.avg_fnr:.4f} fpr={r.avg_fpr:.4f}")
    return EXIT_OK


def _cmd_plot(args) -> int:
    from .svg import emit_plot

    try:
        rows = harness.read_csv(args.inp)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    emit_plot(rows, args.kind, args.out)
    return EXIT_OK


def _parse_contacts(text: str):
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if item:
            a, _, b = item.partition("-")
            pairs.append((int(a), int(b)))
    return pairs


def _cmd_oracle(args) -> int:
    from .oracle import exact_combined, exact_tanner

    matrix = load_design(args.design)
    try:
        y = np.array([int(v) for v in args.outcomes.split(",") if v.strip()], dtype=np.uint8)
        n = matrix.n_individuals
        noise = NoiseParams(args.rho)
        if args.model == "tanner":
            priors = (
                np.array([float(v) for v in args.priors.split(",")])
                if args.priors
                else np.full(n, args.p)
            )
            res = exact_tanner(matrix, y, priors, noise)
        else:
            graph = InteractionGraph(n, _parse_contacts(args.contacts))
            params = PopulationParams(n, args.p, args.q)
            res = exact_combined(matrix, y, graph, params, noise)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print("map:", " ".join(str(int(v)) for v in res.map_estimate))
    print("log_odds:", " ".join(f"{v:.6g}" for v in res.posterior_log_odds))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"run": _cmd_run, "plot": _cmd_plot, "oracle": _cmd_oracle}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
