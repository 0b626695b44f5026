"""FNR against FPR over the threshold grid at a fixed number of tests.

FNR and FPR are averaged over the iteration windows ({15..30} for the Tanner
decoders, {30..50} for BPCG). Writes ``fnr_vs_fpr.csv`` and ``fnr_vs_fpr.svg``
and prints the operating point with the smallest FNR+FPR per decoder.
"""

import argparse
import logging
from pathlib import Path

from contactgt.harness import ExperimentConfig, best_over_tau, emit_csv, run_experiment
from contactgt.population import PopulationParams
from contactgt.svg import emit_plot


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--m", type=int, default=350)
    ap.add_argument("--rho", default="0.01,0.05")
    ap.add_argument("--seed", type=int, default=20240601)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = ExperimentConfig(
        PopulationParams(500, 0.01, 0.1, 0.008),
        m_values=(args.m,),
        rho_values=tuple(float(v) for v in args.rho.split(",")),
        trials=args.trials,
        seed=args.seed,
        workers=args.workers,
    )
    rows = run_experiment(cfg)
    emit_csv(rows, out / "fnr_vs_fpr.csv")
    emit_plot(rows, "fnr_vs_fpr", out / "fnr_vs_fpr.svg")

    print(f"{'decoder':>7} {'rho':>6} {'tau':>6} {'FNR':>8} {'FPR':>8} {'sum':>8}")
    for r in best_over_tau(rows, "total_error"):
        print(f"{r.decoder:>7} {r.rho:>6g} {r.tau:>6.1f} {r.avg_fnr:>8.4f} {r.avg_fpr:>8.4f} {r.total_error:>8.4f}")


if __name__ == "__main__":
    main()
