"""Blockage rate from building statistics and per-link LoS decisions.

A mmWave link of length ``r`` is line-of-sight with probability
``exp(-beta * r)``, where ``beta`` summarises how densely an area is built up.
UHF links are never blocked in this model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class BuildingStats:
    """Aggregate footprint statistics of a region.

    Attributes:
        A: mean building area in m^2.
        kappa: fraction of the region covered by buildings, in [0, 1).
        rho_perim: mean building perimeter in m.
    """

    A: float
    kappa: float
    rho_perim: float

    def __post_init__(self):
        if not self.A > 0:
            raise InvalidParameterError(f"mean building area must be > 0, got {self.A}")
        if not 0 <= self.kappa < 1:
            raise InvalidParameterError(f"built-up fraction must lie in [0, 1), got {self.kappa}")
        if not self.rho_perim > 0:
            raise InvalidParameterError(f"mean perimeter must be > 0, got {self.rho_perim}")


@dataclass(frozen=True)
class EnvironmentPreset:
    name: str
    beta: float

    def __post_init__(self):
        if not self.beta >= 0:
            raise InvalidParameterError(f"beta must be >= 0, got {self.beta}")


# Dense urban (Chicago downtown) and suburban campus blockage rates, in 1/m.
CHICAGO_CITY = EnvironmentPreset("cc", 0.0224)
NUST_CAMPUS = EnvironmentPreset("nc", 0.0014)

PRESETS = {p.name: p for p in (CHICAGO_CITY, NUST_CAMPUS)}


def get_preset(name: str) -> EnvironmentPreset:
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise InvalidParameterError(
            f"unknown environment '{name}', expected one of {sorted(PRESETS)}"
        ) from None


def beta_from_stats(stats: BuildingStats) -> float:
    """Blockage rate ``-rho_perim * ln(1 - kappa) / (pi * A)`` in 1/m."""
    if stats.kappa >= 1:
        raise InvalidParameterError("built-up fraction must be < 1")
    return -stats.rho_perim * math.log1p(-stats.kappa) / (math.pi * stats.A)


def los_probability(r, beta):
    """Probability that a link of length ``r`` metres is unblocked.

    Accepts scalars or arrays; returns the same shape.
    """
    r_arr = np.asarray(r, dtype=float)
    beta_arr = np.asarray(beta, dtype=float)
    if np.any(r_arr < 0) or np.any(np.isnan(r_arr)):
        raise InvalidParameterError("distance must be >= 0")
    if np.any(beta_arr < 0) or np.any(np.isnan(beta_arr)):
        raise InvalidParameterError("beta must be >= 0")
    p = np.exp(-beta_arr * r_arr)
    return float(p) if p.ndim == 0 else p


def sample_los(r, beta, rng: np.random.Generator):
    """Bernoulli LoS draw(s); consumes exactly one uniform variate per link."""
    p = los_probability(r, beta)
    if np.ndim(p) == 0:
        return bool(rng.random() < p)
    return rng.random(np.shape(p)) < p
