from dataclasses import replace

import numpy as np
import pytest

from dudesim.config import SimConfig
from dudesim.runner import TrialMetrics


@pytest.fixture
def small_config():
    """A few dozen UEs and base stations per trial; runs in milliseconds."""
    return SimConfig(window_side=1000.0, lambda_m=5e-6, lambda_s=2e-5, lambda_u=5e-5,
                     n_trials=6, master_seed=7)


def synthetic_trial(index, covered_dude, covered_coupled, decoupled=None, dl_tier=None,
                    ul_tier=None):
    covered_dude = np.asarray(covered_dude, bool)
    n = len(covered_dude)
    dl_bs = np.zeros(n, np.int64)
    ul_bs = np.asarray(decoupled, np.int64) if decoupled is not None else dl_bs.copy()
    dl_tier = np.zeros(n, np.int64) if dl_tier is None else np.asarray(dl_tier)
    ul_tier = np.zeros(n, np.int64) if ul_tier is None else np.asarray(ul_tier)
    rate = np.linspace(1e6, 2e6, n)
    return TrialMetrics(index, (1, 0, 0), dl_bs, ul_bs, dl_tier, ul_tier, rate, rate, rate,
                        covered_dude, np.asarray(covered_coupled, bool), rate, rate,
                        {"dude": 0, "coupled": 0})


def with_tier(config, idx, **kw):
    tiers = list(config.tiers)
    tiers[idx] = replace(tiers[idx], **kw)
    return replace(config, tiers=tuple(tiers))


def pytest_terminal_summary(terminalreporter):
    from .test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
