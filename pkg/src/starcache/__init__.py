"""Simulator and learning stack for a caching STARS-assisted two-user downlink."""

from .catalog import Catalog, CacheState, PowerTariff, RequestPair, Tier, zipf_pmf
from .config import ScenarioConfig, load_config, parse_config
from .env import CachingEnv

__version__ = "0.1.0"

__all__ = ["CacheState", "CachingEnv", "Catalog", "PowerTariff", "RequestPair", "ScenarioConfig", "Tier",
           "load_config", "parse_config", "zipf_pmf"]
