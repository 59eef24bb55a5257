"""Monte Carlo simulator for decoupled uplink/downlink access in a three-tier
mmWave/UHF heterogeneous network."""

from .config import SimConfig, parse_config
from .runner import aggregate, run_trial, simulate, sweep, write_csv

__all__ = ["SimConfig", "parse_config", "aggregate", "run_trial", "simulate", "sweep",
           "write_csv"]
__version__ = "0.1.0"
