import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from contactgt import harness
from contactgt.harness import (
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    ResultRow,
    aggregate,
    best_over_tau,
    config_from_values,
    format_csv,
    parse_config_text,
    parse_csv,
    run_experiment,
    run_trials,
)
from contactgt.population import PopulationParams

SMALL = PopulationParams(60, 0.05, 0.2, 0.03)


def small_config(**kw):
    base = dict(
        population=SMALL,
        m_values=(20, 30),
        rho_values=(0.0, 0.05),
        trials=6,
        seed=7,
        tau_grid=(-4.0, 4.0, 9),
        iters_success={"bpip": 4, "bpup": 4, "bpcg": 5, "map": 1},
        iters_window={"bpip": (3, 5), "bpup": (3, 5), "bpcg": (4, 6), "map": (1, 1)},
    )
    base.update(kw)
    return ExperimentConfig(**base)


def row(decoder="bpip", m=10, rho=0.01, tau=0.0, s=0.5, fnr=0.1, fpr=0.2):
    return ResultRow(decoder, m, rho, tau, s, fnr, fpr, 10, 1)


def test_config_validation():
    with pytest.raises(ConfigError):
        small_config(trials=0)
    with pytest.raises(ConfigError):
        small_config(decoders=("bpip", "nope"))
    with pytest.raises(ConfigError):
        small_config(decoders=("bpip", "bpip"))
    with pytest.raises(ConfigError):
        small_config(decoders=("map",))
    with pytest.raises(ConfigError):
        small_config(rho_values=(0.5,))
    with pytest.raises(ConfigError):
        small_config(design="other")


def test_tau_grid_and_identity_m():
    cfg = small_config(design="identity")
    assert cfg.taus.tolist() == [-4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0]
    assert cfg.effective_m_values == (60,)


def test_trial_rng_depends_on_tag_and_trial_only():
    a = harness.trial_rng(3, 5, "graph").random(4)
    assert np.array_equal(a, harness.trial_rng(3, 5, "graph").random(4))
    assert not np.array_equal(a, harness.trial_rng(3, 6, "graph").random(4))
    assert not np.array_equal(a, harness.trial_rng(3, 5, "truth").random(4))


def test_rows_shape_and_ranges():
    cfg = small_config()
    rows = run_experiment(cfg)
    assert len(rows) == 3 * 2 * 2 * 9
    for r in rows:
        assert 0 <= r.success_rate <= 1 and r.trials_counted == 6
        assert math.isnan(r.avg_fnr) or 0 <= r.avg_fnr <= 1
        assert 0 <= r.avg_fpr <= 1


def test_determinism_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_experiment(small_config(output_path=str(a)))
    run_experiment(small_config(output_path=str(b)))
    assert a.read_bytes() == b.read_bytes()


def test_trial_order_does_not_matter():
    cfg = small_config()
    forward = run_trials(cfg)
    order = list(range(cfg.trials))
    random.Random(1).shuffle(order)
    shuffled = run_trials(cfg, order)
    assert format_csv(aggregate(cfg, forward)) == format_csv(aggregate(cfg, shuffled))


def test_worker_pool_matches_serial():
    cfg = small_config(trials=5)
    serial = format_csv(aggregate(cfg, run_trials(cfg)))
    pooled = format_csv(aggregate(cfg, run_trials(small_config(trials=5, workers=2))))
    assert serial == pooled


def test_adding_decoders_does_not_perturb_draws():
    alone = run_experiment(small_config(decoders=("bpup",)))
    together = [r for r in run_experiment(small_config(decoders=("bpip", "bpup", "bpcg"))) if r.decoder == "bpup"]
    assert format_csv(alone) == format_csv(together)


def test_map_decoder_on_tiny_population():
    pop = PopulationParams(6, 0.2, 0.3, 0.3)
    cfg = small_config(population=pop, m_values=(4,), rho_values=(0.1,), decoders=("bpcg", "map"), trials=4)
    rows = run_experiment(cfg)
    assert {r.decoder for r in rows} == {"bpcg", "map"}


def test_identity_design_noiseless_is_perfect():
    pop = PopulationParams(30, 0.1, 0.2, 0.05)
    cfg = small_config(population=pop, design="identity", rho_values=(0.0,), trials=1,
                       decoders=("bpip", "bpup", "bpcg"), tau_grid=(0.0, 0.0, 1))
    rows = run_experiment(cfg)
    assert len(rows) == 3
    assert all(r.tau == 0.0 and r.m == 30 and r.success_rate == 1.0 for r in rows)


def test_best_over_tau_ties_pick_smaller_tau():
    rows = [row(tau=1.0, s=0.7, fnr=0.1, fpr=0.1), row(tau=-1.0, s=0.7, fnr=0.05, fpr=0.15), row(tau=0.0, s=0.6)]
    assert best_over_tau(rows, "success")[0].tau == -1.0
    assert best_over_tau(rows, "total_error")[0].tau == -1.0
    with pytest.raises(ValueError):
        best_over_tau(rows, "other")
    with pytest.raises(ValueError):
        best_over_tau([], "success")


def test_best_over_tau_skips_nan_error():
    rows = [row(tau=0.0, fnr=float("nan")), row(tau=1.0, fnr=0.3, fpr=0.3)]
    assert best_over_tau(rows, "total_error")[0].tau == 1.0


finite = st.floats(-1e6, 1e6, allow_nan=False)


@given(
    st.lists(
        st.builds(
            ResultRow,
            decoder=st.sampled_from(["bpip", "bpup", "bpcg"]),
            m=st.integers(0, 1000),
            rho=st.floats(0, 0.49),
            tau=finite,
            success_rate=st.floats(0, 1),
            avg_fnr=st.floats(0, 1) | st.just(float("nan")),
            avg_fpr=st.floats(0, 1),
            trials_counted=st.integers(1, 10**6),
            seed=st.integers(0, 2**32),
        ),
        max_size=10,
    )
)
@settings(max_examples=50)
def test_csv_round_trip_is_stable(rows):
    text = format_csv(rows)
    again = parse_csv(text)
    assert format_csv(again) == text
    assert text.splitlines()[0] == ",".join(CSV_HEADER)


def test_parse_csv_rejects_bad_header():
    with pytest.raises(ValueError):
        parse_csv("a,b\n1,2\n")


def test_config_text_parsing():
    text = """
    # experiment
    n = 80
    rho = 0.01, 0.05   # two noise levels
    m = 30,40
    iters-success = bpcg:12
    iters_window = bpip:2-4, bpcg:7
    decoders = bpip,bpcg
    """
    cfg = config_from_values(parse_config_text(text))
    assert cfg.population.n_individuals == 80
    assert cfg.rho_values == (0.01, 0.05) and cfg.m_values == (30, 40)
    assert cfg.iters_success["bpcg"] == 12 and cfg.iters_success["bpip"] == 15
    assert cfg.iters_window["bpip"] == (2, 4) and cfg.iters_window["bpcg"] == (7, 7)
    assert cfg.decoders == ("bpip", "bpcg")


@pytest.mark.parametrize("text", ["n 5", "color = red", "iters_success = 5"])
def test_config_text_errors(text):
    with pytest.raises(ConfigError):
        config_from_values(parse_config_text(text))


def test_config_bad_values():
    with pytest.raises(ConfigError):
        config_from_values({"p": "1.5"})
    with pytest.raises(ConfigError):
        config_from_values({"trials": "many"})
