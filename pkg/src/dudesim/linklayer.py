"""Received power, interference, SINR, Shannon rate and two-sided coverage.

UHF tiers (macro and UHF small cells) share one carrier and interfere with
each other; mmWave links are treated as noise-limited. Downlink and uplink
use disjoint bands, so there is never cross-direction interference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class LinkBudget:
    rx_power_mw: float
    interference_mw: float
    noise_mw: float
    sinr: float
    rate_bps: float


@dataclass(frozen=True)
class CoverageVerdict:
    rate_dl_bps: float
    rate_ul_bps: float
    covered: bool


def received_power(tx_power_dbm, fading_power, gain_db, path_loss_db):
    """Received power in mW: ``10**((tx + gain - loss) / 10) * fading``."""
    p = np.power(10.0, (np.asarray(tx_power_dbm) + gain_db - path_loss_db) / 10.0) * fading_power
    return float(p) if np.ndim(p) == 0 else p


def dl_interference(rx_power_mw, serving_bs: int, co_channel) -> float:
    """Sum of DL powers at one UE from every co-channel BS except the server.

    ``rx_power_mw[k]`` is the power the UE receives from BS ``k`` and
    ``co_channel[k]`` marks UHF base stations.
    """
    co_channel = np.asarray(co_channel, dtype=bool)
    if not co_channel[serving_bs]:
        raise InvalidParameterError("DL interference is only defined for UHF-served UEs")
    mask = co_channel.copy()
    mask[serving_bs] = False
    return float(np.sum(np.asarray(rx_power_mw)[mask]))


def ul_interference(serving_bs: int, tagged_ue: int, rx_power_mw, ul_assoc, co_channel) -> float:
    """Sum of UL powers at ``serving_bs`` from all other UHF-associated UEs.

    ``rx_power_mw[y, k]`` is the power BS ``k`` receives from UE ``y`` and
    ``ul_assoc[y]`` is the uplink server of UE ``y``.
    """
    co_channel = np.asarray(co_channel, dtype=bool)
    if not co_channel[serving_bs]:
        raise InvalidParameterError("UL interference is only defined for UHF-served UEs")
    ul_assoc = np.asarray(ul_assoc)
    interferers = co_channel[ul_assoc]
    interferers[tagged_ue] = False
    return float(np.sum(np.asarray(rx_power_mw)[interferers, serving_bs]))


def dl_interference_all(rx_power_mw: np.ndarray, serving: np.ndarray,
                        co_channel: np.ndarray) -> np.ndarray:
    """Vector form of :func:`dl_interference`; zero for mmWave-served UEs."""
    n_ue = rx_power_mw.shape[0]
    out = np.zeros(n_ue)
    uhf_ue = co_channel[serving]
    if not uhf_ue.any():
        return out
    rows = np.flatnonzero(uhf_ue)
    block = rx_power_mw[rows] * co_channel
    block[np.arange(len(rows)), serving[rows]] = 0.0
    out[rows] = block.sum(axis=1)
    return out


def ul_interference_all(rx_power_mw: np.ndarray, serving: np.ndarray,
                        co_channel: np.ndarray) -> np.ndarray:
    """Vector form of :func:`ul_interference`; zero for mmWave-served UEs."""
    n_ue = rx_power_mw.shape[0]
    out = np.zeros(n_ue)
    uhf_ue = co_channel[serving]
    tagged = np.flatnonzero(uhf_ue)
    if len(tagged) < 2:
        return out
    # powers of every UHF-served UE (rows) at each tagged UE's server (cols)
    block = rx_power_mw[np.ix_(tagged, serving[tagged])]
    np.fill_diagonal(block, 0.0)
    out[tagged] = block.sum(axis=0)
    return out


def sinr(rx_mw, interference_mw, noise_mw, band):
    """SINR for UHF links; SNR for mmWave links (interference ignored).

    ``band`` may be ``"uhf"``/``"mmwave"`` or a boolean array that is True
    for mmWave links.
    """
    noise = np.asarray(noise_mw, dtype=float)
    if np.any(noise <= 0):
        raise InvalidParameterError("noise power must be > 0")
    if isinstance(band, str):
        if band not in ("uhf", "mmwave"):
            raise InvalidParameterError(f"unknown band '{band}'")
        mmwave = band == "mmwave"
    else:
        mmwave = np.asarray(band, dtype=bool)
    interference = np.where(mmwave, 0.0, interference_mw)
    out = np.asarray(rx_mw) / (interference + noise)
    return float(out) if np.ndim(out) == 0 else out


def shannon_rate(sinr_value, bandwidth):
    """``bandwidth * log2(1 + sinr)`` in bit/s."""
    if np.any(np.asarray(bandwidth) <= 0):
        raise InvalidParameterError("bandwidth must be > 0")
    if np.any(np.asarray(sinr_value) < 0):
        raise InvalidParameterError("SINR must be >= 0")
    out = bandwidth * np.log2(1.0 + np.asarray(sinr_value))
    return float(out) if np.ndim(out) == 0 else out


def is_covered(rate_dl, rate_ul, r_min):
    """Covered when both directions reach ``r_min`` (inclusive)."""
    out = np.logical_and(np.asarray(rate_dl) >= r_min, np.asarray(rate_ul) >= r_min)
    return bool(out) if np.ndim(out) == 0 else out


def link_budget(rx_mw: float, interference_mw: float, noise_mw: float, band: str,
                bandwidth: float) -> LinkBudget:
    s = sinr(rx_mw, interference_mw, noise_mw, band)
    applied = 0.0 if band == "mmwave" else interference_mw
    return LinkBudget(rx_mw, applied, noise_mw, s, shannon_rate(s, bandwidth))
