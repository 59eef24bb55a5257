"""Monte Carlo trials, aggregation, parameter sweeps and CSV output.

Each trial owns a Philox stream keyed by ``(master_seed, trial_index)``, so
results do not depend on execution order or on the number of workers.
Within a trial one set of channel draws feeds both the decoupled (DUDe)
evaluation and the coupled one, which only forces ``ul_bs := dl_bs``.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from functools import partial
from pathlib import Path
from typing import Sequence

import numpy as np

from .association import (MACRO, SCELL_MMWAVE, SCELL_UHF, TIER_IDS, associate_rows,
                          biased_rx_power_dl, biased_rx_power_ul)
from .blockage import sample_los
from .channel import (noise_power, path_loss_mmwave, path_loss_uhf, dbm_to_mw,
                      sample_fading_power)
from .config import SimConfig
from .errors import DegenerateTrialError, InvalidParameterError
from .geometry import Window, pairwise_toroidal_distance, sample_ppp
from .linklayer import (dl_interference_all, is_covered, received_power, shannon_rate, sinr,
                        ul_interference_all)

log = logging.getLogger(__name__)

Z95 = 1.959963984540054


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class Deployment:
    """One realisation of BS and UE positions.

    Base stations are stored tier by tier (macro, mmWave, UHF small cells),
    so a BS index doubles as a tie-break priority.
    """

    window: Window
    bs_xy: np.ndarray
    bs_tier: np.ndarray
    ue_xy: np.ndarray

    @property
    def n_bs(self) -> int:
        return len(self.bs_tier)

    @property
    def n_ue(self) -> int:
        return len(self.ue_xy)

    def tier_counts(self) -> tuple[int, int, int]:
        return tuple(int(np.sum(self.bs_tier == t)) for t in (MACRO, SCELL_MMWAVE, SCELL_UHF))

    @classmethod
    def from_points(cls, window: Window, macro, smm, suhf, ue) -> "Deployment":
        groups = [np.asarray(g, dtype=float).reshape(-1, 2) for g in (macro, smm, suhf)]
        tiers = np.concatenate([np.full(len(g), t, dtype=np.int64)
                                for t, g in zip((MACRO, SCELL_MMWAVE, SCELL_UHF), groups)])
        return cls(window, np.concatenate(groups), tiers, np.asarray(ue, dtype=float).reshape(-1, 2))


def sample_deployment(config: SimConfig, rng: np.random.Generator) -> Deployment:
    window = Window(config.window_side)
    macro = sample_ppp(config.lambda_m, window, rng)
    smm = sample_ppp(config.lambda_smm, window, rng)
    suhf = sample_ppp(config.lambda_suhf, window, rng)
    ue = sample_ppp(config.lambda_u, window, rng)
    return Deployment.from_points(window, macro, smm, suhf, ue)


@dataclass
class LinkField:
    """Realised channel of every (UE, BS) pair in a trial.

    ``loss_db`` is path loss plus shadowing; fading is kept separate as a
    linear power gain. ``n_draws`` counts the random variates consumed.
    """

    distance: np.ndarray
    los: np.ndarray
    shadow_db: np.ndarray
    fading: np.ndarray
    loss_db: np.ndarray
    n_draws: int


def draw_links(dep: Deployment, config: SimConfig, rng: np.random.Generator) -> LinkField:
    ch = config.channel
    d = pairwise_toroidal_distance(dep.ue_xy, dep.bs_xy, dep.window.side)
    mm = dep.bs_tier == SCELL_MMWAVE
    n_ue = dep.n_ue

    los = np.ones(d.shape, dtype=bool)
    los[:, mm] = sample_los(d[:, mm], config.blockage_beta, rng)

    sigma = np.where(mm, 0.0, ch.sigma_uhf_db)[None, :] + np.zeros(d.shape)
    sigma[:, mm] = np.where(los[:, mm], ch.sigma_los_db, ch.sigma_nlos_db)
    shadow = rng.standard_normal(d.shape) * sigma

    faded = ~mm if not config.mmwave_fading else np.ones_like(mm)
    fading = np.ones(d.shape)
    n_faded = int(faded.sum())
    if n_faded:
        fading[:, faded] = sample_fading_power(ch.ricean_k, rng, size=(n_ue, n_faded))

    loss = np.empty(d.shape)
    loss[:, ~mm] = path_loss_uhf(d[:, ~mm], shadow[:, ~mm], ch)
    loss[:, mm] = path_loss_mmwave(d[:, mm], los[:, mm], shadow[:, mm], ch)

    fading_draws = 0 if math.isinf(ch.ricean_k) else 2 * n_ue * n_faded
    n_draws = n_ue * int(mm.sum()) + d.size + fading_draws
    return LinkField(d, los, shadow, fading, loss, n_draws)


@dataclass
class TrialMetrics:
    """Per-UE outcomes of one trial (arrays indexed by UE)."""

    trial_index: int
    tier_counts: tuple[int, int, int]
    dl_bs: np.ndarray
    ul_bs: np.ndarray
    dl_tier: np.ndarray
    ul_tier: np.ndarray
    rate_dl: np.ndarray
    rate_ul_dude: np.ndarray
    rate_ul_coupled: np.ndarray
    covered_dude: np.ndarray
    covered_coupled: np.ndarray
    ul_metric_dude: np.ndarray
    ul_metric_coupled: np.ndarray
    channel_draws: dict

    @property
    def n_ue(self) -> int:
        return len(self.dl_bs)

    @property
    def decoupled(self) -> np.ndarray:
        return self.dl_bs != self.ul_bs

    @classmethod
    def empty(cls, trial_index: int, tier_counts=(0, 0, 0)) -> "TrialMetrics":
        i, f, b = np.zeros(0, np.int64), np.zeros(0), np.zeros(0, bool)
        return cls(trial_index, tuple(tier_counts), i, i, i, i, f, f, f, b, b, f, f,
                   {"dude": 0, "coupled": 0})


def _tier_vector(config: SimConfig, attr: str) -> np.ndarray:
    return np.array([getattr(t, attr) for t in config.tiers], dtype=float)


def _ul_budget(serving, rx_ul, co_channel, bs_mm, noise_ul_mw, bw_ul, load_sharing):
    rows = np.arange(len(serving))
    interference = ul_interference_all(rx_ul, serving, co_channel)
    s = sinr(rx_ul[rows, serving], interference, noise_ul_mw[serving], bs_mm[serving])
    bw = bw_ul[serving]
    if load_sharing:
        bw = bw / np.bincount(serving, minlength=len(co_channel))[serving]
    return shannon_rate(s, bw)


def evaluate_trial(dep: Deployment, links: LinkField, config: SimConfig,
                   trial_index: int = 0) -> TrialMetrics:
    """Associate every UE and compute its DUDe and coupled link budgets."""
    tier = dep.bs_tier
    ch = config.channel
    gain = _tier_vector(config, "antenna_gain_db")[tier]
    tx_dl = _tier_vector(config, "tx_power_dl_dbm")[tier]
    bias_dl = _tier_vector(config, "bias_dl_db")[tier]
    bias_ul = _tier_vector(config, "bias_ul_db")[tier]
    bw_dl = _tier_vector(config, "bandwidth_dl")[tier]
    bw_ul = _tier_vector(config, "bandwidth_ul")[tier]
    bs_mm = tier == SCELL_MMWAVE
    co_channel = ~bs_mm

    with np.errstate(divide="ignore"):
        eff_loss = links.loss_db - 10.0 * np.log10(links.fading)
    dl_metric = biased_rx_power_dl(tx_dl, gain, bias_dl, eff_loss)
    ul_metric = biased_rx_power_ul(config.ue_tx_power_dbm, gain, bias_ul, eff_loss)
    dl_bs = associate_rows(dl_metric)
    ul_bs = associate_rows(ul_metric)
    rows = np.arange(dep.n_ue)

    rx_dl = received_power(tx_dl, links.fading, gain, links.loss_db)
    rx_ul = received_power(config.ue_tx_power_dbm, links.fading, gain, links.loss_db)

    noise_dl_mw = np.array([dbm_to_mw(noise_power(t.bandwidth_dl, ch.nf_ue_db))
                            for t in config.tiers])[tier]
    noise_ul_mw = np.array([dbm_to_mw(noise_power(t.bandwidth_ul, ch.nf_bs_db))
                            for t in config.tiers])[tier]

    i_dl = dl_interference_all(rx_dl, dl_bs, co_channel)
    sinr_dl = sinr(rx_dl[rows, dl_bs], i_dl, noise_dl_mw[dl_bs], bs_mm[dl_bs])
    bw = bw_dl[dl_bs]
    if config.load_sharing:
        bw = bw / np.bincount(dl_bs, minlength=dep.n_bs)[dl_bs]
    rate_dl = shannon_rate(sinr_dl, bw)

    ul = partial(_ul_budget, rx_ul=rx_ul, co_channel=co_channel, bs_mm=bs_mm,
                 noise_ul_mw=noise_ul_mw, bw_ul=bw_ul, load_sharing=config.load_sharing)
    rate_ul_dude = ul(ul_bs)
    rate_ul_coupled = ul(dl_bs)

    return TrialMetrics(
        trial_index=trial_index,
        tier_counts=dep.tier_counts(),
        dl_bs=dl_bs,
        ul_bs=ul_bs,
        dl_tier=tier[dl_bs],
        ul_tier=tier[ul_bs],
        rate_dl=np.atleast_1d(rate_dl),
        rate_ul_dude=np.atleast_1d(rate_ul_dude),
        rate_ul_coupled=np.atleast_1d(rate_ul_coupled),
        covered_dude=np.atleast_1d(is_covered(rate_dl, rate_ul_dude, config.r_min_bps)),
        covered_coupled=np.atleast_1d(is_covered(rate_dl, rate_ul_coupled, config.r_min_bps)),
        ul_metric_dude=ul_metric[rows, ul_bs],
        ul_metric_coupled=ul_metric[rows, dl_bs],
        # both evaluations read the same LinkField
        channel_draws={"dude": links.n_draws, "coupled": links.n_draws},
    )


def run_trial(config: SimConfig, trial_index: int,
              deployment: Deployment | None = None) -> TrialMetrics:
    """Run one trial. A fixed ``deployment`` skips point sampling."""
    rng = trial_rng(config.master_seed, trial_index)
    dep = deployment if deployment is not None else sample_deployment(config, rng)
    if dep.n_bs == 0:
        raise DegenerateTrialError(f"trial {trial_index}: no base stations in any tier")
    if dep.n_ue == 0:
        return TrialMetrics.empty(trial_index, dep.tier_counts())
    links = draw_links(dep, config, rng)
    return evaluate_trial(dep, links, config, trial_index)


def _run_or_skip(config: SimConfig, trial_index: int) -> TrialMetrics:
    try:
        return run_trial(config, trial_index)
    except DegenerateTrialError as exc:
        log.warning("%s; trial skipped", exc)
        return TrialMetrics.empty(trial_index)


def run_trials(config: SimConfig, workers: int = 1) -> list[TrialMetrics]:
    indices = range(config.n_trials)
    if workers <= 1:
        return [_run_or_skip(config, i) for i in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(partial(_run_or_skip, config), indices, chunksize=4))


@dataclass(frozen=True)
class AggregateMetrics:
    """One output row. Field order is the CSV column order."""

    axis_name: str
    axis_value: float
    env: str
    beta: float
    n_trials: int
    n_ue_total: int
    C1: float
    C1_ci: float
    C2: float
    C2_ci: float
    coverage_gain: float
    frac_decoupled: float
    frac_decoupled_ci: float
    share_dl_macro: float
    share_dl_smm: float
    share_dl_suhf: float
    share_ul_macro: float
    share_ul_smm: float
    share_ul_suhf: float
    mean_rate_dl_bps: float
    mean_rate_ul_dude_bps: float
    mean_rate_ul_coupled_bps: float
    median_rate_ul_dude_bps: float
    median_rate_ul_coupled_bps: float


CSV_COLUMNS = [f.name for f in fields(AggregateMetrics)]


def _ci_half_width(per_trial: Sequence[float]) -> float:
    if len(per_trial) < 2:
        return math.nan
    return Z95 * float(np.std(per_trial, ddof=1)) / math.sqrt(len(per_trial))


def aggregate(trials: Sequence[TrialMetrics], config: SimConfig,
              axis_name: str = "lambda_s", axis_value: float | None = None) -> AggregateMetrics:
    """Pool per-UE records over all non-empty trials.

    ``coverage_gain`` is NaN when no UE is covered without decoupling.
    """
    used = sorted((t for t in trials if t.n_ue > 0), key=lambda t: t.trial_index)
    if not used:
        raise InvalidParameterError("no trial produced any UE records")

    def pool(attr):
        return np.concatenate([getattr(t, attr) for t in used])

    cov_d, cov_c = pool("covered_dude"), pool("covered_coupled")
    decoupled = np.concatenate([t.decoupled for t in used])
    dl_tier, ul_tier = pool("dl_tier"), pool("ul_tier")
    rate_dl, rate_ud, rate_uc = pool("rate_dl"), pool("rate_ul_dude"), pool("rate_ul_coupled")
    n = len(cov_d)

    c1, c2 = float(cov_d.mean()), float(cov_c.mean())
    share = lambda tiers, t: float(np.count_nonzero(tiers == t)) / n  # noqa: E731
    if axis_value is None:
        axis_value = getattr(config, axis_name)

    return AggregateMetrics(
        axis_name=axis_name,
        axis_value=float(axis_value),
        env=config.environment,
        beta=config.blockage_beta,
        n_trials=len(used),
        n_ue_total=n,
        C1=c1,
        C1_ci=_ci_half_width([t.covered_dude.mean() for t in used]),
        C2=c2,
        C2_ci=_ci_half_width([t.covered_coupled.mean() for t in used]),
        coverage_gain=c1 / c2 if c2 > 0 else math.nan,
        frac_decoupled=float(decoupled.mean()),
        frac_decoupled_ci=_ci_half_width([t.decoupled.mean() for t in used]),
        share_dl_macro=share(dl_tier, MACRO),
        share_dl_smm=share(dl_tier, SCELL_MMWAVE),
        share_dl_suhf=share(dl_tier, SCELL_UHF),
        share_ul_macro=share(ul_tier, MACRO),
        share_ul_smm=share(ul_tier, SCELL_MMWAVE),
        share_ul_suhf=share(ul_tier, SCELL_UHF),
        mean_rate_dl_bps=float(rate_dl.mean()),
        mean_rate_ul_dude_bps=float(rate_ud.mean()),
        mean_rate_ul_coupled_bps=float(rate_uc.mean()),
        median_rate_ul_dude_bps=float(np.median(rate_ud)),
        median_rate_ul_coupled_bps=float(np.median(rate_uc)),
    )


def simulate(config: SimConfig, workers: int = 1, axis_name: str = "lambda_s",
             axis_value: float | None = None) -> AggregateMetrics:
    return aggregate(run_trials(config, workers), config, axis_name, axis_value)


SWEEP_AXES = ("lambda_s", "gamma")


def default_lambda_s_grid(lambda_m: float, n: int = 8) -> list[float]:
    """Log-spaced small-cell intensities from 2x to 100x the macro intensity."""
    return [float(v) for v in np.geomspace(2 * lambda_m, 100 * lambda_m, n)]


def sweep(config: SimConfig, axis: str, values: Sequence[float],
          workers: int = 1) -> list[AggregateMetrics]:
    """One aggregate row per axis value, all under the same master seed."""
    if axis not in SWEEP_AXES:
        raise InvalidParameterError(f"unknown sweep axis '{axis}', expected one of {SWEEP_AXES}")
    if not values:
        raise InvalidParameterError("sweep needs at least one value")
    configs = []
    for v in values:
        try:
            configs.append(replace(config, **{axis: float(v)}))
        except InvalidParameterError as exc:
            raise InvalidParameterError(f"{axis} = {v!r}: {exc}") from None
    return [simulate(c, workers, axis, getattr(c, axis)) for c in configs]


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.6g}"


def write_csv(rows: Sequence[AggregateMetrics], destination) -> None:
    """Write rows with the fixed column order; floats use 6 significant digits.

    ``destination`` is a path or an open text stream.
    """
    if not rows:
        raise InvalidParameterError("no rows to write")
    if hasattr(destination, "write"):
        _write_rows(rows, destination)
    else:
        with Path(destination).open("w", newline="") as fh:
            _write_rows(rows, fh)


def _write_rows(rows, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        d = asdict(row)
        writer.writerow([_fmt(d[c]) for c in CSV_COLUMNS])


TIER_LABELS = dict(enumerate(TIER_IDS))
