import csv
import io
import math
from dataclasses import replace

import numpy as np
import pytest

from dudesim.association import MACRO, SCELL_MMWAVE, SCELL_UHF
from dudesim.config import SimConfig
from dudesim.errors import DegenerateTrialError, InvalidParameterError
from dudesim.geometry import Window
from dudesim.runner import (CSV_COLUMNS, Deployment, aggregate, default_lambda_s_grid,
                            draw_links, run_trial, run_trials, sample_deployment, simulate,
                            sweep, trial_rng, write_csv)

from . import oracles
from .conftest import synthetic_trial, with_tier

ARRAYS = ("dl_bs", "ul_bs", "rate_dl", "rate_ul_dude", "rate_ul_coupled", "covered_dude",
          "covered_coupled", "ul_metric_dude", "ul_metric_coupled")


class TestRunTrial:
    def test_deterministic(self, small_config):
        a, b = run_trial(small_config, 3), run_trial(small_config, 3)
        for name in ARRAYS:
            assert np.array_equal(getattr(a, name), getattr(b, name))

    def test_trials_differ(self, small_config):
        assert not np.array_equal(run_trial(small_config, 0).rate_dl,
                                  run_trial(small_config, 1).rate_dl)

    def test_equal_powers_never_decouple(self, small_config):
        cfg = small_config
        for idx in range(3):
            cfg = with_tier(cfg, idx, tx_power_dl_dbm=30.0, bias_dl_db=0.0, bias_ul_db=0.0)
        for i in range(5):
            assert not run_trial(cfg, i).decoupled.any()

    def test_record_count_matches_ues(self, small_config):
        rng = trial_rng(small_config.master_seed, 2)
        dep = sample_deployment(small_config, rng)
        assert run_trial(small_config, 2).n_ue == dep.n_ue

    def test_zero_ues_gives_empty_record(self, small_config):
        m = run_trial(replace(small_config, lambda_u=0.0), 0)
        assert m.n_ue == 0

    def test_no_base_stations_is_degenerate(self, small_config):
        cfg = replace(small_config, lambda_m=0.0, lambda_s=0.0)
        with pytest.raises(DegenerateTrialError):
            run_trial(cfg, 0)

    def test_degenerate_trials_skipped_in_runs(self, small_config):
        cfg = replace(small_config, lambda_m=0.0, lambda_s=0.0, n_trials=2)
        assert all(t.n_ue == 0 for t in run_trials(cfg))

    def test_common_random_numbers(self, small_config):
        for i in range(4):
            m = run_trial(small_config, i)
            assert m.channel_draws["dude"] == m.channel_draws["coupled"] > 0

    def test_ul_metric_dominance(self, small_config):
        for i in range(6):
            m = run_trial(small_config, i)
            assert np.all(m.ul_metric_dude >= m.ul_metric_coupled)

    def test_coupled_mode_uses_dl_server(self, small_config):
        cfg = replace(small_config, gamma=0.0)
        m = run_trial(cfg, 1)
        # UHF rates differ through the interferer set; noise-limited links must not
        same = ~m.decoupled & (m.ul_tier == SCELL_MMWAVE)
        assert same.any()
        assert np.array_equal(m.rate_ul_dude[same], m.rate_ul_coupled[same])

    def test_association_matches_oracle(self, small_config):
        for i in range(5):
            rng = trial_rng(small_config.master_seed, i)
            dep = sample_deployment(small_config, rng)
            links = draw_links(dep, small_config, rng)
            m = run_trial(small_config, i)
            args = (links, dep.bs_tier, small_config.tiers, small_config.channel)
            assert list(m.dl_bs) == oracles.association(*args, "dl", small_config.ue_tx_power_dbm)
            assert list(m.ul_bs) == oracles.association(*args, "ul", small_config.ue_tx_power_dbm)

    def test_single_mmwave_link(self):
        cfg = SimConfig(environment="custom", beta=0.0, window_side=1000.0, n_trials=1)
        cfg = replace(cfg, channel=replace(cfg.channel, sigma_los_db=0.0))
        dep = Deployment.from_points(Window(1000.0), [], [(500.0, 500.0)], [], [(500.0, 600.0)])
        m = run_trial(cfg, 0, deployment=dep)
        L = oracles.loss_db(100.0, True, True, 0.0, cfg.channel)
        snr_dl = oracles.rx_mw(30, 18, L, 1.0) / 10 ** ((-174 + 90 + 7) / 10)
        snr_ul = oracles.rx_mw(23, 18, L, 1.0) / 10 ** ((-174 + 90 + 5) / 10)
        assert m.rate_dl[0] == pytest.approx(oracles.shannon(1e9, snr_dl), rel=1e-9)
        assert m.rate_ul_dude[0] == pytest.approx(oracles.shannon(1e9, snr_ul), rel=1e-9)

    def test_load_sharing_splits_bandwidth(self):
        cfg = SimConfig(window_side=1000.0, n_trials=1, load_sharing=True)
        cfg = replace(cfg, channel=replace(cfg.channel, sigma_uhf_db=0.0, ricean_k=math.inf))
        dep = Deployment.from_points(Window(1000.0), [(100.0, 100.0)], [], [],
                                     [(400.0, 500.0), (100.0, 600.0)])
        shared = run_trial(cfg, 0, deployment=dep)
        full = run_trial(replace(cfg, load_sharing=False), 0, deployment=dep)
        assert np.allclose(shared.rate_dl, full.rate_dl / 2)


class TestAggregate:
    def test_gain_ratio(self, small_config):
        t = synthetic_trial(0, [1] * 9 + [0], [1] * 8 + [0, 0])
        agg = aggregate([t], small_config)
        assert (agg.C1, agg.C2) == (0.9, 0.8)
        assert agg.coverage_gain == pytest.approx(1.125)

    def test_full_coverage(self, small_config):
        agg = aggregate([synthetic_trial(0, [1] * 4, [1] * 4)], small_config)
        assert agg.C1 == agg.C2 == agg.coverage_gain == 1.0

    def test_zero_coupled_coverage_is_nan(self, small_config):
        agg = aggregate([synthetic_trial(0, [1, 0], [0, 0])], small_config)
        assert math.isnan(agg.coverage_gain)

    def test_empty_trials_skipped(self, small_config):
        from dudesim.runner import TrialMetrics
        trials = [TrialMetrics.empty(0), synthetic_trial(1, [1, 1], [1, 0])]
        agg = aggregate(trials, small_config)
        assert agg.n_trials == 1 and agg.n_ue_total == 2
        with pytest.raises(InvalidParameterError):
            aggregate([TrialMetrics.empty(0)], small_config)

    def test_decoupled_fraction_recount(self, small_config):
        trials = run_trials(small_config)
        agg = aggregate(trials, small_config)
        total = sum(int(np.sum(t.dl_bs != t.ul_bs)) for t in trials)
        records = sum(len(t.dl_bs) for t in trials)
        assert agg.frac_decoupled == total / records
        assert agg.n_ue_total == records

    def test_order_invariant(self, small_config):
        trials = run_trials(small_config)
        a = aggregate(trials, small_config)
        b = aggregate(trials[::-1], small_config)
        assert a == b

    def test_shares_and_probabilities(self, small_config):
        agg = simulate(small_config)
        assert agg.share_dl_macro + agg.share_dl_smm + agg.share_dl_suhf == pytest.approx(1, abs=1e-9)
        assert agg.share_ul_macro + agg.share_ul_smm + agg.share_ul_suhf == pytest.approx(1, abs=1e-9)
        for p in (agg.C1, agg.C2, agg.frac_decoupled):
            assert 0 <= p <= 1

    def test_confidence_half_width(self, small_config):
        trials = [synthetic_trial(0, [1, 1], [1, 1]), synthetic_trial(1, [0, 0], [1, 1])]
        agg = aggregate(trials, small_config)
        # per-trial C1 means 1 and 0: sd = sqrt(0.5), n = 2
        assert agg.C1_ci == pytest.approx(1.959964 * math.sqrt(0.5) / math.sqrt(2), rel=1e-6)
        assert agg.C2_ci == 0.0


class TestSweep:
    def test_single_value_equals_simulate(self, small_config):
        row = sweep(small_config, "lambda_s", [small_config.lambda_s])[0]
        assert row == simulate(small_config)

    def test_reproducible(self, small_config):
        vals = [1e-5, 3e-5]
        assert sweep(small_config, "lambda_s", vals) == sweep(small_config, "lambda_s", vals)

    def test_invalid_value_named(self, small_config):
        with pytest.raises(InvalidParameterError, match="1.5"):
            sweep(small_config, "gamma", [0.2, 1.5])
        with pytest.raises(InvalidParameterError):
            sweep(small_config, "lambda_u", [1e-5])
        with pytest.raises(InvalidParameterError):
            sweep(small_config, "gamma", [])

    def test_gamma_extremes(self, small_config):
        g0, g1 = sweep(small_config, "gamma", [0.0, 1.0])
        assert g0.share_dl_suhf == g0.share_ul_suhf == 0.0
        assert g1.share_dl_smm == g1.share_ul_smm == 0.0
        assert (g0.axis_name, g0.axis_value, g1.axis_value) == ("gamma", 0.0, 1.0)

    def test_default_grid(self):
        grid = default_lambda_s_grid(9.5492e-7)
        assert len(grid) == 8
        assert grid[0] == pytest.approx(2 * 9.5492e-7) and grid[-1] == pytest.approx(100 * 9.5492e-7)
        assert np.allclose(np.diff(np.log(grid)), np.log(50) / 7)

    def test_parallel_matches_serial(self, small_config):
        assert simulate(small_config, workers=2) == simulate(small_config)


class TestCsv:
    def test_header_and_rows(self, small_config):
        buf = io.StringIO()
        write_csv([simulate(small_config)], buf)
        lines = buf.getvalue().splitlines()
        assert len(lines) == 2
        assert lines[0] == (
            "axis_name,axis_value,env,beta,n_trials,n_ue_total,C1,C1_ci,C2,C2_ci,coverage_gain,"
            "frac_decoupled,frac_decoupled_ci,share_dl_macro,share_dl_smm,share_dl_suhf,"
            "share_ul_macro,share_ul_smm,share_ul_suhf,mean_rate_dl_bps,mean_rate_ul_dude_bps,"
            "mean_rate_ul_coupled_bps,median_rate_ul_dude_bps,median_rate_ul_coupled_bps")

    def test_round_trip(self, small_config, tmp_path):
        row = simulate(small_config)
        path = tmp_path / "out.csv"
        write_csv([row], path)
        with path.open() as fh:
            parsed = next(csv.DictReader(fh))
        for col in CSV_COLUMNS:
            v = getattr(row, col)
            if isinstance(v, str):
                assert parsed[col] == v
            else:
                assert float(parsed[col]) == pytest.approx(v, rel=5e-6)

    def test_empty_rows_rejected(self, tmp_path):
        with pytest.raises(InvalidParameterError):
            write_csv([], tmp_path / "x.csv")

    def test_unwritable_destination(self, small_config, tmp_path):
        with pytest.raises(OSError):
            write_csv([simulate(small_config)], tmp_path / "missing" / "x.csv")


def test_tier_codes_are_contiguous_blocks(small_config):
    dep = sample_deployment(small_config, trial_rng(1, 0))
    assert np.all(np.diff(dep.bs_tier) >= 0)
    assert set(np.unique(dep.bs_tier)) <= {MACRO, SCELL_MMWAVE, SCELL_UHF}
