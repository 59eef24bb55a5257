"""Biased maximum received power association in downlink and uplink.

Downlink and uplink choices are made independently, so a UE may be served by
different base stations in the two directions (decoupled access). Metrics are
handled in the dB domain: ``tx + gain + bias - loss``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .channel import ChannelParams, LinkState, path_loss_mmwave, path_loss_uhf
from .errors import InvalidParameterError, NoCandidateError

MACRO, SCELL_MMWAVE, SCELL_UHF = 0, 1, 2
TIER_IDS = ("macro", "scell_mmwave", "scell_uhf")
BANDS = ("uhf", "mmwave")

DEFAULT_UE_TX_POWER_DBM = 23.0


@dataclass(frozen=True)
class TierConfig:
    tier_id: str
    tx_power_dl_dbm: float
    freq: float
    bandwidth_dl: float
    bandwidth_ul: float
    bias_dl_db: float = 0.0
    bias_ul_db: float = 0.0
    antenna_gain_db: float = 0.0
    band: str = "uhf"

    def __post_init__(self):
        if self.tier_id not in TIER_IDS:
            raise InvalidParameterError(f"unknown tier '{self.tier_id}'")
        if self.band not in BANDS:
            raise InvalidParameterError(f"unknown band '{self.band}'")
        if not (self.bandwidth_dl > 0 and self.bandwidth_ul > 0):
            raise InvalidParameterError(f"{self.tier_id}: bandwidths must be > 0")
        if not self.freq > 0:
            raise InvalidParameterError(f"{self.tier_id}: frequency must be > 0")
        for name in ("tx_power_dl_dbm", "bias_dl_db", "bias_ul_db", "antenna_gain_db"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{self.tier_id}: {name} must be finite")

    @property
    def is_mmwave(self) -> bool:
        return self.band == "mmwave"


def default_tiers(params: ChannelParams | None = None) -> tuple[TierConfig, TierConfig, TierConfig]:
    """Macro / mmWave small cell / UHF small cell, indexed by tier code."""
    params = params or ChannelParams()
    uhf_bw, mm_bw = 20e6, 1e9
    return (
        TierConfig("macro", 46.0, params.f_uhf, uhf_bw, uhf_bw),
        TierConfig("scell_mmwave", 30.0, params.f_mm, mm_bw, mm_bw,
                   bias_dl_db=5.0, antenna_gain_db=18.0, band="mmwave"),
        TierConfig("scell_uhf", 30.0, params.f_uhf, uhf_bw, uhf_bw),
    )


def validate_tiers(tiers: Sequence[TierConfig], params: ChannelParams) -> None:
    if tuple(t.tier_id for t in tiers) != TIER_IDS:
        raise InvalidParameterError(f"tiers must be ordered {TIER_IDS}")
    macro, smm, suhf = tiers
    if macro.band != "uhf" or suhf.band != "uhf" or smm.band != "mmwave":
        raise InvalidParameterError("macro and scell_uhf must be UHF, scell_mmwave must be mmWave")
    if not (macro.freq == suhf.freq == params.f_uhf):
        raise InvalidParameterError("macro and scell_uhf must share the UHF carrier")
    if smm.freq != params.f_mm:
        raise InvalidParameterError("scell_mmwave must use the mmWave carrier")


def with_frequencies(tiers: Sequence[TierConfig], params: ChannelParams) -> tuple[TierConfig, ...]:
    """Copy of ``tiers`` with carriers taken from ``params``."""
    return tuple(
        replace(t, freq=params.f_mm if t.is_mmwave else params.f_uhf) for t in tiers
    )


def biased_rx_power_dl(tx_power_dl_dbm, gain_db, bias_dl_db, path_loss_db):
    return tx_power_dl_dbm + gain_db + bias_dl_db - path_loss_db


def biased_rx_power_ul(ue_tx_power_dbm, gain_db, bias_ul_db, path_loss_db):
    return ue_tx_power_dbm + gain_db + bias_ul_db - path_loss_db


def link_loss_db(state: LinkState, tier: TierConfig, params: ChannelParams) -> float:
    """Realised loss of one link including shadowing and fading, in dB."""
    if tier.is_mmwave:
        loss = path_loss_mmwave(state.distance, state.los, state.shadow_db, params)
    else:
        loss = path_loss_uhf(state.distance, state.shadow_db, params)
    if state.fading_power == 0:
        return math.inf
    return loss - 10.0 * math.log10(state.fading_power)


def _argmax(metrics: Sequence[float]) -> int:
    # first maximum wins: lowest candidate index on ties
    best, best_val = -1, -math.inf
    for k, m in enumerate(metrics):
        if best < 0 or m > best_val:
            best, best_val = k, m
    return best


def associate_dl(link_states: Sequence[LinkState], bs_tiers: Sequence[TierConfig],
                 params: ChannelParams) -> int:
    """Index of the candidate maximising the biased DL received power."""
    if not link_states:
        raise NoCandidateError("no candidate base stations")
    metrics = [
        biased_rx_power_dl(t.tx_power_dl_dbm, t.antenna_gain_db, t.bias_dl_db,
                           link_loss_db(s, t, params))
        for s, t in zip(link_states, bs_tiers, strict=True)
    ]
    return _argmax(metrics)


def associate_ul(link_states: Sequence[LinkState], bs_tiers: Sequence[TierConfig],
                 params: ChannelParams, ue_tx_power_dbm: float = DEFAULT_UE_TX_POWER_DBM) -> int:
    """Index of the candidate maximising the biased UL received power."""
    if not link_states:
        raise NoCandidateError("no candidate base stations")
    metrics = [
        biased_rx_power_ul(ue_tx_power_dbm, t.antenna_gain_db, t.bias_ul_db,
                           link_loss_db(s, t, params))
        for s, t in zip(link_states, bs_tiers, strict=True)
    ]
    return _argmax(metrics)


def associate_rows(metrics: np.ndarray) -> np.ndarray:
    """Row-wise argmax of a ``(n_ue, n_bs)`` metric matrix, lowest index on ties."""
    metrics = np.asarray(metrics)
    if metrics.ndim != 2:
        raise InvalidParameterError("metric matrix must be 2-D")
    if metrics.shape[1] == 0:
        raise NoCandidateError("no candidate base stations")
    return np.argmax(metrics, axis=1)


class Decoupling(NamedTuple):
    decoupled: bool
    dl_tier: str | None
    ul_tier: str | None


def classify_decoupling(dl_bs, ul_bs, dl_tier: str | None = None,
                        ul_tier: str | None = None) -> Decoupling:
    return Decoupling(dl_bs != ul_bs, dl_tier, ul_tier)


@dataclass(frozen=True)
class AssociationResult:
    ue_id: int
    dl_bs: int
    ul_bs: int
    dl_tier: str
    ul_tier: str

    @property
    def decoupled(self) -> bool:
        return self.dl_bs != self.ul_bs
