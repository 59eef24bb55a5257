"""Path loss, shadowing, small-scale fading and thermal noise.

All path losses are in dB; distances below 1 m are clamped to 1 m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

SPEED_OF_LIGHT = 2.998e8  # m/s
THERMAL_NOISE_DBM_HZ = -174.0
MIN_DISTANCE = 1.0


@dataclass(frozen=True)
class ChannelParams:
    alpha_los: float = 2.0
    alpha_nlos: float = 3.3
    alpha_uhf: float = 2.0
    sigma_los_db: float = 5.2
    sigma_nlos_db: float = 7.38
    sigma_uhf_db: float = 5.0
    f_mm: float = 73e9
    f_uhf: float = 2.4e9
    ricean_k: float = 10.0
    nf_ue_db: float = 7.0
    nf_bs_db: float = 5.0

    def __post_init__(self):
        for name in ("alpha_los", "alpha_nlos", "alpha_uhf"):
            if not getattr(self, name) >= 1:
                raise InvalidParameterError(f"{name} must be >= 1")
        for name in ("sigma_los_db", "sigma_nlos_db", "sigma_uhf_db"):
            if not getattr(self, name) >= 0:
                raise InvalidParameterError(f"{name} must be >= 0")
        for name in ("f_mm", "f_uhf"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be > 0")
        if not self.ricean_k >= 0:
            raise InvalidParameterError("ricean_k must be >= 0")


@dataclass(frozen=True)
class LinkState:
    """Realised channel of one UE-BS pair for a single trial.

    ``los`` is only meaningful for mmWave links; ``fading_power`` is the
    linear small-scale power gain (1.0 when fading is disabled).
    """

    distance: float
    los: bool = True
    shadow_db: float = 0.0
    fading_power: float = 1.0

    def __post_init__(self):
        if not self.distance >= 0:
            raise InvalidParameterError("distance must be >= 0")
        if not self.fading_power >= 0:
            raise InvalidParameterError("fading power must be >= 0")


def fixed_path_loss(freq: float) -> float:
    """Free-space loss at 1 m, ``20 log10(4 pi f / c)`` dB."""
    if not freq > 0:
        raise InvalidParameterError(f"frequency must be > 0, got {freq}")
    return 20.0 * math.log10(4.0 * math.pi * freq / SPEED_OF_LIGHT)


def _log_distance(r):
    return np.log10(np.maximum(np.asarray(r, dtype=float), MIN_DISTANCE))


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def path_loss_mmwave(r, los, shadow_db, params: ChannelParams):
    """mmWave loss with separate LoS/NLoS exponents. Broadcasts over arrays."""
    alpha = np.where(los, params.alpha_los, params.alpha_nlos)
    return _scalar(fixed_path_loss(params.f_mm) + 10.0 * alpha * _log_distance(r) + shadow_db)


def path_loss_uhf(r, shadow_db, params: ChannelParams):
    return _scalar(
        fixed_path_loss(params.f_uhf) + 10.0 * params.alpha_uhf * _log_distance(r) + shadow_db
    )


def sample_shadowing(sigma_db: float, rng: np.random.Generator, size=None):
    """Zero-mean Gaussian shadowing in dB (lognormal in linear scale)."""
    if not sigma_db >= 0:
        raise InvalidParameterError(f"shadowing std must be >= 0, got {sigma_db}")
    return rng.normal(0.0, sigma_db, size)


def sample_fading_power(K: float, rng: np.random.Generator, size=None):
    """Unit-mean Ricean power gain with K-factor ``K`` (linear).

    ``K = 0`` is Rayleigh (exponential power); ``K = inf`` is a pure specular
    path with gain exactly 1. Two normal variates are drawn per sample in
    every finite case.
    """
    if not K >= 0:
        raise InvalidParameterError(f"K-factor must be >= 0, got {K}")
    if math.isinf(K):
        return 1.0 if size is None else np.ones(size)
    los_amp = math.sqrt(K / (K + 1.0))
    scatter = math.sqrt(0.5 / (K + 1.0))
    shape = () if size is None else tuple(np.atleast_1d(size))
    re, im = rng.standard_normal((2,) + shape)
    power = (los_amp + scatter * re) ** 2 + (scatter * im) ** 2
    return _scalar(power)


def noise_power(bandwidth: float, noise_figure: float) -> float:
    """Thermal noise in dBm over ``bandwidth`` Hz."""
    if not bandwidth > 0:
        raise InvalidParameterError(f"bandwidth must be > 0, got {bandwidth}")
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bandwidth) + noise_figure


def dbm_to_mw(dbm):
    return _scalar(np.power(10.0, np.asarray(dbm, dtype=float) / 10.0))
