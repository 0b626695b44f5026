"""Seeded Monte-Carlo experiments comparing the decoders.

Every trial draws its own contact graph, ground truth, one testing matrix per
``M`` and one noise pattern per ``(M, rho)``. All decoders in a trial see the
same draws. Random streams come from ``SeedSequence(seed, spawn_key=(trial,
crc32(tag)))`` so results do not depend on execution order, worker count or
the set of decoders.
"""

from __future__ import annotations

import csv
import logging
import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .bp import CombinedBP, TannerBP, tanner_priors
from .channel import NoiseParams, apply_noise, noiseless_outcomes
from .design import DesignParams, bernoulli_design, identity_design
from .metrics import sweep_thresholds
from .oracle import MAX_COMBINED_N, exact_combined
from .population import (
    PopulationParams,
    expected_infected,
    sample_ground_truth,
    sample_interaction_graph,
)

log = logging.getLogger(__name__)

DECODERS = ("bpip", "bpup", "bpcg", "map")
DESIGNS = ("bernoulli", "identity")
DEFAULT_ITERS_SUCCESS = {"bpip": 15, "bpup": 15, "bpcg": 30, "map": 1}
DEFAULT_ITERS_WINDOW = {"bpip": (15, 30), "bpup": (15, 30), "bpcg": (30, 50), "map": (1, 1)}

CSV_HEADER = ("decoder", "m", "rho", "tau", "success_rate", "avg_fnr", "avg_fpr", "trials_counted", "seed")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    population: PopulationParams
    m_values: tuple[int, ...] = (350,)
    rho_values: tuple[float, ...] = (0.01,)
    nu: float = math.log(2.0)
    decoders: tuple[str, ...] = ("bpip", "bpup", "bpcg")
    trials: int = 1000
    seed: int = 0
    tau_grid: tuple[float, float, int] = (-10.0, 10.0, 201)
    iters_success: dict = field(default_factory=lambda: dict(DEFAULT_ITERS_SUCCESS))
    iters_window: dict = field(default_factory=lambda: dict(DEFAULT_ITERS_WINDOW))
    output_path: str | None = None
    design: str = "bernoulli"
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.m_values or not self.rho_values or not self.decoders:
            raise ConfigError("m, rho and decoders must be non-empty")
        for d in self.decoders:
            if d not in DECODERS:
                raise ConfigError(f"unknown decoder {d!r}; choose from {DECODERS}")
        if len(set(self.decoders)) != len(self.decoders):
            raise ConfigError("decoders listed twice")
        if "map" in self.decoders and self.population.n_individuals > MAX_COMBINED_N:
            raise ConfigError(f"decoder 'map' needs n <= {MAX_COMBINED_N}")
        for rho in self.rho_values:
            if not 0.0 <= rho < 0.5:
                raise ConfigError(f"rho must lie in [0, 0.5), got {rho}")
        if any(m < 0 for m in self.m_values):
            raise ConfigError("m values must be non-negative")
        lo, hi, steps = self.tau_grid
        if lo > hi or steps < 1:
            raise ConfigError("tau grid needs lo <= hi and steps >= 1")
        if self.design not in DESIGNS:
            raise ConfigError(f"design must be one of {DESIGNS}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for d in self.decoders:
            if self.iters_success.get(d, 0) < 1:
                raise ConfigError(f"iters_success for {d} must be >= 1")
            w = self.iters_window.get(d)
            if w is None or not 1 <= w[0] <= w[1]:
                raise ConfigError(f"iteration window for {d} must satisfy 1 <= lo <= hi")
        if self.design == "bernoulli":
            k = expected_infected(self.population)
            if k <= 0:
                raise ConfigError("expected number of infected is 0; Bernoulli design undefined")
            try:
                DesignParams(self.nu, k)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc

    @property
    def taus(self) -> np.ndarray:
        lo, hi, steps = self.tau_grid
        return np.linspace(lo, hi, int(steps))

    @property
    def effective_m_values(self) -> tuple[int, ...]:
        if self.design == "identity":
            return (self.population.n_individuals,)
        return tuple(self.m_values)


@dataclass(frozen=True)
class ResultRow:
    decoder: str
    m: int
    rho: float
    tau: float
    success_rate: float
    avg_fnr: float
    avg_fpr: float
    trials_counted: int
    seed: int

    @property
    def total_error(self) -> float:
        return self.avg_fnr + self.avg_fpr


# ---------------------------------------------------------------------------
# trials


def trial_rng(seed: int, trial: int, tag: str) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial, zlib.crc32(tag.encode())))
    return np.random.default_rng(ss)


@dataclass
class _Tally:
    """Per-trial contribution for one ``(decoder, m, rho)`` key (arrays over tau)."""

    success: np.ndarray
    fnr: np.ndarray | None
    fpr: np.ndarray | None


def _run_decoder(name, config, matrix, y, graph, truth, rho, taus) -> _Tally:
    pop = config.population
    noise = NoiseParams(rho)
    t_succ = config.iters_success[name]
    w_lo, w_hi = config.iters_window[name]
    n_window = w_hi - w_lo + 1
    success = None
    fn = np.zeros(taus.size)
    fp = np.zeros(taus.size)

    if name == "map":
        llr = exact_combined(matrix, y, graph, pop, noise).posterior_log_odds
        sweep = sweep_thresholds(llr, truth, taus)
        success, fn, fp = sweep.success, sweep.false_negatives * float(n_window), sweep.false_positives * float(n_window)
    else:
        if name == "bpcg":
            dec = CombinedBP(matrix, y, graph, pop, noise)
        else:
            mode = "initial" if name == "bpip" else "updated"
            dec = TannerBP(matrix, y, tanner_priors(pop, graph, mode), noise)
        for it in range(1, max(t_succ, w_hi) + 1):
            dec.step()
            if it != t_succ and not w_lo <= it <= w_hi:
                continue
            sweep = sweep_thresholds(dec.llr(), truth, taus)
            if it == t_succ:
                success = sweep.success
            if w_lo <= it <= w_hi:
                fn += sweep.false_negatives
                fp += sweep.false_positives

    n_inf = int(truth.x1.sum())
    n_healthy = truth.x1.size - n_inf
    return _Tally(
        success=success.astype(np.int64),
        fnr=fn / (n_window * n_inf) if n_inf else None,
        fpr=fp / (n_window * n_healthy) if n_healthy else None,
    )


def run_trial(config: ExperimentConfig, trial: int) -> dict[tuple, _Tally]:
    pop = config.population
    n = pop.n_individuals
    taus = config.taus
    graph = sample_interaction_graph(pop, trial_rng(config.seed, trial, "graph"))
    truth = sample_ground_truth(pop, graph, trial_rng(config.seed, trial, "truth"))
    out = {}
    for m in config.effective_m_values:
        if config.design == "identity":
            matrix = identity_design(n)
        else:
            dp = DesignParams(config.nu, expected_infected(pop))
            matrix = bernoulli_design(n, m, dp, trial_rng(config.seed, trial, f"design:{m}"))
        clean = noiseless_outcomes(matrix, truth.x1)
        for rho in config.rho_values:
            y = apply_noise(clean, NoiseParams(rho), trial_rng(config.seed, trial, f"noise:{m}:{rho!r}"))
            for name in config.decoders:
                out[(name, m, rho)] = _run_decoder(name, config, matrix, y, graph, truth, rho, taus)
    return out


def _run_chunk(args):
    config, indices = args
    return [(i, run_trial(config, i)) for i in indices]


def run_trials(config: ExperimentConfig, indices=None) -> list[tuple[int, dict]]:
    indices = list(range(config.trials)) if indices is None else list(indices)
    if config.workers == 1 or len(indices) < 2:
        return [(i, run_trial(config, i)) for i in indices]
    n_chunks = config.workers * 4
    chunks = [indices[k::n_chunks] for k in range(n_chunks) if indices[k::n_chunks]]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        parts = pool.map(_run_chunk, [(config, c) for c in chunks])
        return [item for part in parts for item in part]


def aggregate(config: ExperimentConfig, results) -> list[ResultRow]:
    """Reduce per-trial results in trial-index order into sorted rows."""
    results = sorted(results, key=lambda item: item[0])
    taus = config.taus
    keys = sorted(results[0][1]) if results else []
    rows = []
    for key in keys:
        name, m, rho = key
        tallies = [r[key] for _, r in results]
        success = np.sum([t.success for t in tallies], axis=0) / len(tallies)
        fnrs = [t.fnr for t in tallies if t.fnr is not None]
        fprs = [t.fpr for t in tallies if t.fpr is not None]
        if len(fnrs) < len(tallies):
            log.info("%s m=%d rho=%g: %d trial(s) with no infected excluded from FNR", name, m, rho, len(tallies) - len(fnrs))
        if len(fprs) < len(tallies):
            log.info("%s m=%d rho=%g: %d trial(s) with no healthy excluded from FPR", name, m, rho, len(tallies) - len(fprs))
        avg_fnr = np.mean(fnrs, axis=0) if fnrs else np.full(taus.size, np.nan)
        avg_fpr = np.mean(fprs, axis=0) if fprs else np.full(taus.size, np.nan)
        for k, tau in enumerate(taus):
            rows.append(
                ResultRow(
                    decoder=name,
                    m=int(m),
                    rho=float(rho),
                    tau=float(tau),
                    success_rate=float(success[k]),
                    avg_fnr=float(avg_fnr[k]),
                    avg_fpr=float(avg_fpr[k]),
                    trials_counted=len(tallies),
                    seed=config.seed,
                )
            )
    return sort_rows(rows)


def sort_rows(rows):
    return sorted(rows, key=lambda r: (r.decoder, r.m, r.rho, r.tau))


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    log.info(
        "running %d trial(s): decoders=%s m=%s rho=%s",
        config.trials, ",".join(config.decoders), config.effective_m_values, config.rho_values,
    )
    rows = aggregate(config, run_trials(config))
    if config.output_path:
        emit_csv(rows, config.output_path)
    return rows


# ---------------------------------------------------------------------------
# post-processing


def best_over_tau(rows, objective: str = "success") -> list[ResultRow]:
    """Best row per ``(decoder, m, rho)``; ties go to the smaller tau."""
    if objective not in ("success", "total_error"):
        raise ValueError("objective must be 'success' or 'total_error'")
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to optimize over")
    groups: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.decoder, r.m, r.rho), []).append(r)

    def score(r):
        if objective == "success":
            return (-r.success_rate, r.tau)
        err = r.total_error
        return (err if not math.isnan(err) else math.inf, r.tau)

    return [min(g, key=score) for _, g in sorted(groups.items())]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.6g}"


def format_csv(rows) -> str:
    lines = [",".join(CSV_HEADER)]
    for r in sort_rows(rows):
        lines.append(",".join(_fmt(getattr(r, name)) for name in CSV_HEADER))
    return "\n".join(lines) + "\n"


def emit_csv(rows, path) -> None:
    Path(path).write_text(format_csv(rows), encoding="utf-8", newline="\n")


def parse_csv(text: str) -> list[ResultRow]:
    reader = csv.DictReader(text.splitlines())
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    types = {f.name: f.type for f in fields(ResultRow)}
    rows = []
    for rec in reader:
        kw = {}
        for name in CSV_HEADER:
            t = types[name]
            kw[name] = rec[name] if t == "str" else int(rec[name]) if t == "int" else float(rec[name])
        rows.append(ResultRow(**kw))
    return rows


def read_csv(path) -> list[ResultRow]:
    return parse_csv(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# configuration text


CONFIG_KEYS = (
    "n", "p", "q", "theta", "nu", "rho", "m", "decoders", "trials", "seed",
    "tau_min", "tau_max", "tau_steps", "out", "workers", "design",
    "iters_success", "iters_window",
)


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _list(value: str, conv):
    return tuple(conv(v.strip()) for v in value.split(",") if v.strip())


def _per_decoder(value: str, conv) -> dict:
    out = {}
    for item in value.split(","):
        if not item.strip():
            continue
        name, _, spec = item.partition(":")
        if not spec:
            raise ConfigError(f"expected decoder:value, got {item!r}")
        out[name.strip()] = conv(spec.strip())
    return out


def _window(spec: str) -> tuple[int, int]:
    lo, _, hi = spec.partition("-")
    return int(lo), int(hi or lo)


def config_from_values(values: dict[str, str]) -> ExperimentConfig:
    """Build a config from string values (file entries merged with CLI flags)."""
    try:
        pop = PopulationParams(
            n_individuals=int(values.get("n", 500)),
            prevalence=float(values.get("p", 0.01)),
            contagion=float(values.get("q", 0.1)),
            interaction_prob=float(values.get("theta", 0.008)),
        )
        success = dict(DEFAULT_ITERS_SUCCESS)
        window = dict(DEFAULT_ITERS_WINDOW)
        if "iters_success" in values:
            success.update(_per_decoder(values["iters_success"], int))
        if "iters_window" in values:
            window.update(_per_decoder(values["iters_window"], _window))
        kw = dict(
            population=pop,
            nu=float(values.get("nu", math.log(2.0))),
            trials=int(values.get("trials", 1000)),
            seed=int(values.get("seed", 0)),
            tau_grid=(
                float(values.get("tau_min", -10.0)),
                float(values.get("tau_max", 10.0)),
                int(values.get("tau_steps", 201)),
            ),
            iters_success=success,
            iters_window=window,
            output_path=values.get("out"),
            design=values.get("design", "bernoulli"),
            workers=int(values.get("workers", 1)),
        )
        if "m" in values:
            kw["m_values"] = _list(values["m"], int)
        if "rho" in values:
            kw["rho_values"] = _list(values["rho"], float)
        if "decoders" in values:
            kw["decoders"] = _list(values["decoders"], str)
        return ExperimentConfig(**kw)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

