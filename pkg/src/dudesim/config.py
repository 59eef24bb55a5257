"""Simulation configuration and its flat ``key = value`` file format.

Every key is optional. Omitted keys take the defaults listed in ``KEYS``;
unknown keys are rejected. Example::

    # dense urban run
    environment = "cc"
    n_trials = 100
    lambda_s = 4.7746e-5
    gamma = 0.3
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .association import (DEFAULT_UE_TX_POWER_DBM, MACRO, SCELL_MMWAVE, SCELL_UHF,
                          TierConfig, default_tiers, validate_tiers, with_frequencies)
from .blockage import get_preset
from .channel import ChannelParams
from .errors import ConfigError, InvalidParameterError

LAMBDA_MACRO = 9.5492e-7  # macro BSs per m^2


@dataclass(frozen=True)
class SimConfig:
    environment: str = "nc"
    beta: float | None = None
    window_side: float = 3000.0
    master_seed: int = 1
    n_trials: int = 200
    lambda_m: float = LAMBDA_MACRO
    lambda_s: float = 20 * LAMBDA_MACRO
    lambda_u: float = 1e-4
    gamma: float = 0.3
    ue_tx_power_dbm: float = DEFAULT_UE_TX_POWER_DBM
    r_min_bps: float = 1e6
    load_sharing: bool = False
    mmwave_fading: bool = False
    channel: ChannelParams = field(default_factory=ChannelParams)
    tiers: tuple[TierConfig, ...] = field(default_factory=default_tiers)

    def __post_init__(self):
        if self.environment != "custom":
            get_preset(self.environment)
        elif self.beta is None:
            raise InvalidParameterError("environment 'custom' requires an explicit beta")
        if self.beta is not None and not self.beta >= 0:
            raise InvalidParameterError(f"beta must be >= 0, got {self.beta}")
        if not self.window_side > 0:
            raise InvalidParameterError("window_side must be > 0")
        if self.n_trials < 1:
            raise InvalidParameterError("n_trials must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidParameterError("master_seed must be a 64-bit unsigned integer")
        for name in ("lambda_m", "lambda_s", "lambda_u"):
            if not getattr(self, name) >= 0:
                raise InvalidParameterError(f"{name} must be >= 0")
        if not 0 <= self.gamma <= 1:
            raise InvalidParameterError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not math.isfinite(self.ue_tx_power_dbm):
            raise InvalidParameterError("ue_tx_power_dbm must be finite")
        if not self.r_min_bps >= 0:
            raise InvalidParameterError("r_min_bps must be >= 0")
        validate_tiers(self.tiers, self.channel)

    @property
    def blockage_beta(self) -> float:
        if self.beta is not None:
            return self.beta
        return get_preset(self.environment).beta

    @property
    def lambda_smm(self) -> float:
        return (1.0 - self.gamma) * self.lambda_s

    @property
    def lambda_suhf(self) -> float:
        return self.gamma * self.lambda_s


_TOP = {f.name: f for f in fields(SimConfig) if f.name not in ("channel", "tiers")}

# file key -> ChannelParams attribute
_CHANNEL_KEYS = {
    "alpha_los": "alpha_los", "alpha_nlos": "alpha_nlos", "alpha_uhf": "alpha_uhf",
    "sigma_los_db": "sigma_los_db", "sigma_nlos_db": "sigma_nlos_db",
    "sigma_uhf_db": "sigma_uhf_db", "f_mm_hz": "f_mm", "f_uhf_hz": "f_uhf",
    "ricean_k": "ricean_k", "nf_ue_db": "nf_ue_db", "nf_bs_db": "nf_bs_db",
}

_TIER_PREFIX = {"macro": MACRO, "smm": SCELL_MMWAVE, "suhf": SCELL_UHF}
_TIER_FIELDS = {
    "tx_power_dbm": "tx_power_dl_dbm", "bandwidth_dl_hz": "bandwidth_dl",
    "bandwidth_ul_hz": "bandwidth_ul", "bias_dl_db": "bias_dl_db",
    "bias_ul_db": "bias_ul_db", "antenna_gain_db": "antenna_gain_db",
}

_INT_KEYS = {"master_seed", "n_trials"}
_BOOL_KEYS = {"load_sharing", "mmwave_fading"}
_STR_KEYS = {"environment"}

KEYS = sorted(
    [k for k in _TOP]
    + list(_CHANNEL_KEYS)
    + [f"{p}_{f}" for p in _TIER_PREFIX for f in _TIER_FIELDS]
)


def _line_of(text: str, key: str) -> int | None:
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for n, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return n
    return None


def _check_type(key, value, line):
    if key in _STR_KEYS:
        ok = isinstance(value, str)
        want = "a string"
    elif key in _BOOL_KEYS:
        ok = isinstance(value, bool)
        want = "true or false"
    elif key in _INT_KEYS:
        ok = isinstance(value, int) and not isinstance(value, bool)
        want = "an integer"
    else:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        want = "a number"
    if not ok:
        raise ConfigError(f"expected {want}, got {value!r}", key=key, line=line)
    if key not in _STR_KEYS | _BOOL_KEYS | _INT_KEYS:
        return float(value)
    return value


def parse_config(text: str) -> SimConfig:
    """Build a :class:`SimConfig` from config-file text."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    top, chan, tier_over = {}, {}, {}
    for key, raw in doc.items():
        line = _line_of(text, key)
        if isinstance(raw, dict):
            raise ConfigError("tables are not supported; use flat keys", key=key, line=line)
        if key not in KEYS:
            raise ConfigError("unknown key", key=key, line=line)
        value = _check_type(key, raw, line)
        if key in _TOP:
            top[key] = value.lower() if key == "environment" else value
        elif key in _CHANNEL_KEYS:
            chan[_CHANNEL_KEYS[key]] = value
        else:
            prefix, suffix = key.split("_", 1)
            tier_over.setdefault(_TIER_PREFIX[prefix], {})[_TIER_FIELDS[suffix]] = value

    def fail(exc, keys):
        # attribute a validation failure to the first offending key in the file
        msg = str(exc)
        for k in keys:
            if k in msg or _attr_name(k) in msg:
                raise ConfigError(msg, key=k, line=_line_of(text, k)) from None
        raise ConfigError(msg) from None

    try:
        channel = ChannelParams(**chan)
    except InvalidParameterError as exc:
        fail(exc, [k for k in doc if k in _CHANNEL_KEYS])
    try:
        tiers = list(with_frequencies(default_tiers(channel), channel))
        for idx, over in tier_over.items():
            tiers[idx] = replace(tiers[idx], **over)
        return SimConfig(channel=channel, tiers=tuple(tiers), **top)
    except InvalidParameterError as exc:
        fail(exc, list(doc))


def _attr_name(key: str) -> str:
    return _CHANNEL_KEYS.get(key, key)


def format_config(config: SimConfig) -> str:
    """Render a config back to the file format (all keys explicit)."""
    values = {}
    for k in _TOP:
        values[k] = getattr(config, k)
    for k, attr in _CHANNEL_KEYS.items():
        values[k] = getattr(config.channel, attr)
    for prefix, idx in _TIER_PREFIX.items():
        for suffix, attr in _TIER_FIELDS.items():
            values[f"{prefix}_{suffix}"] = getattr(config.tiers[idx], attr)
    lines = []
    for k in KEYS:
        v = values[k]
        if v is None:
            continue
        if isinstance(v, bool):
            s = "true" if v else "false"
        elif isinstance(v, str):
            s = f'"{v}"'
        elif isinstance(v, float) and math.isinf(v):
            s = "inf" if v > 0 else "-inf"
        else:
            s = repr(v)
        lines.append(f"{k} = {s}")
    return "\n".join(lines) + "\n"
