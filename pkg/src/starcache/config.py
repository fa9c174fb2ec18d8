"""Scenario configuration and its flat ``key = value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .catalog import PowerTariff
from .channel import FadingParams, db_to_linear
from .phy import noise_power

VARIANTS = (
    "Caching-at-STARS",
    "Caching-at-RIS",
    "STARS-Aided",
    "RIS-Aided",
    "STARS-NoCache",
    "RIS-NoCache",
)
PHASES = ("independent", "coupled")
ALGOS = ("td3", "fatd3", "td3dqn")
MAX_COUPLED_N = 12


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RewardParams:
    r_q: float = 1.7
    w_p: float = 1.0
    w_h: float = 3.0


@dataclass(frozen=True)
class ScenarioConfig:
    # system (desk-scale catalog)
    M: int = 4
    N: int = 16
    P_max_dbm: float = 20.0
    Pc_max_dbm: float = 20.0
    bandwidth: float = 1e6
    rician_db: float = 3.0
    noise_dbm_per_mhz: float = -95.2
    pathloss_exp: float = 2.0
    rho0_db: float = -30.0
    F: int = 50
    C_b: int = 10
    C_c: int = 5
    alpha: float = 0.8
    radius: float = 3.0
    bs_pos: tuple = (150.0, 0.0, 15.0)
    stars_pos: tuple = (0.0, 150.0, 5.0)
    r_qos: float = 1e6
    P_u: float = 0.05
    P_bh: float = 0.2
    # reward
    r_q: float = 1.7
    w_p: float = 1.0
    w_h: float = 3.0
    # model / algorithm
    variant: str = "Caching-at-STARS"
    phase: str = "independent"
    algo: str = "fatd3"
    chi: float = 0.3
    # run
    seed: int = 0
    n_seeds: int = 5
    episodes: int = 200
    steps: int = 100
    # learning
    lr: float = 1e-3  # desk scale; 3e-4 with the full 1000-episode budget
    batch_size: int = 64
    gamma: float = 0.5
    tau: float = 0.005
    policy_delay: int = 3
    noise_start: float = 0.4
    noise_end: float = 0.2
    noise_clip: float = 0.5
    hidden: int = 64
    n_hidden: int = 3
    td3_buffer: int = 100_000
    dqn_buffer: int = 10_000
    dqn_eps: float = 0.15
    dqn_gamma: float = 0.0
    target_copy_episodes: int = 2
    t_o_frac: float = 0.8
    actor_head: str = "tanh"
    learn_start: int = 1

    # ---- derived quantities ---------------------------------------------

    @property
    def surface(self) -> str:
        return "ris" if self.variant.startswith("RIS") or self.variant == "Caching-at-RIS" else "stars"

    @property
    def cache_bs(self) -> int:
        """BS capacity after the variant strips caches."""
        return 0 if self.variant.endswith("NoCache") else self.C_b

    @property
    def cache_stars(self) -> int:
        return self.C_c if self.variant.startswith("Caching-at") else 0

    @property
    def frequency_aware(self) -> bool:
        return self.algo in ("fatd3", "td3dqn")

    @property
    def P_max(self) -> float:
        """Per-antenna BS power cap (W)."""
        return 10.0 ** ((self.P_max_dbm - 30.0) / 10.0)

    @property
    def Pc_max(self) -> float:
        return 10.0 ** ((self.Pc_max_dbm - 30.0) / 10.0)

    @property
    def sigma2(self) -> float:
        return noise_power(self.noise_dbm_per_mhz, self.bandwidth)

    @property
    def fading(self) -> FadingParams:
        return FadingParams(db_to_linear(self.rho0_db), self.pathloss_exp, db_to_linear(self.rician_db))

    @property
    def tariff(self) -> PowerTariff:
        return PowerTariff(self.P_u, self.P_bh)

    @property
    def reward(self) -> RewardParams:
        return RewardParams(self.r_q, self.w_p, self.w_h)

    @property
    def total_steps(self) -> int:
        return self.episodes * self.steps

    @property
    def t_o(self) -> int:
        return int(self.t_o_frac * self.total_steps)

    def replace(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw)

    def validate(self) -> "ScenarioConfig":
        problems = []
        if self.variant not in VARIANTS:
            problems.append(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.phase not in PHASES:
            problems.append(f"unknown phase model {self.phase!r}")
        if self.algo not in ALGOS:
            problems.append(f"unknown algorithm {self.algo!r}")
        for name in ("M", "N", "F", "episodes", "steps", "batch_size", "hidden", "n_hidden",
                     "policy_delay", "td3_buffer", "dqn_buffer", "target_copy_episodes", "n_seeds"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be a positive count")
        if self.C_b < 0 or self.C_c < 0:
            problems.append("cache capacities must be nonnegative")
        if self.variant.startswith("Caching-at") and not (0 < self.C_c < self.C_b < self.F):
            problems.append(f"need 0 < C_c < C_b < F, got C_c={self.C_c}, C_b={self.C_b}, F={self.F}")
        elif self.cache_bs >= self.F:
            problems.append(f"BS capacity {self.cache_bs} must be below F={self.F}")
        if self.alpha < 0:
            problems.append("alpha must be nonnegative")
        if not 0.0 <= self.chi <= 1.0:
            problems.append("chi must lie in [0, 1]")
        if not 0.0 <= self.gamma <= 1.0 or not 0.0 <= self.dqn_gamma <= 1.0:
            problems.append("discount factors must lie in [0, 1]")
        if not 0.0 < self.tau <= 1.0:
            problems.append("tau must lie in (0, 1]")
        if not 0.0 <= self.dqn_eps <= 1.0:
            problems.append("dqn_eps must lie in [0, 1]")
        if self.surface == "ris":
            if self.N % 2:
                problems.append("double-spliced RIS needs an even element count")
            if self.phase == "coupled":
                problems.append("RIS variants have no transmission side; use phase=independent")
        if self.algo == "td3dqn":
            if self.phase != "coupled":
                problems.append("td3dqn optimises the coupled phase model only")
            if self.N > MAX_COUPLED_N:
                problems.append(f"td3dqn needs a 2**N-way Q head; N={self.N} exceeds the limit {MAX_COUPLED_N}")
        if self.actor_head not in ("tanh", "softsign"):
            problems.append(f"actor_head must be tanh or softsign, got {self.actor_head!r}")
        if self.learn_start < 1:
            problems.append("learn_start must be at least 1")
        if len(self.bs_pos) != 3 or len(self.stars_pos) != 3:
            problems.append("positions need three coordinates")
        if problems:
            raise ConfigError("; ".join(problems))
        return self


_FIELDS = {f.name: f for f in fields(ScenarioConfig)}


def _parse_value(name: str, text: str):
    default = _FIELDS[name].default
    text = text.strip()
    try:
        if isinstance(default, bool):
            return text.lower() in ("1", "true", "yes")
        if isinstance(default, int):
            return int(float(text)) if "e" in text.lower() else int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {text!r}") from exc
    return text


def parse_config(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment; unknown keys are rejected."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, val)
    return dataclasses.replace(base or ScenarioConfig(), **values)


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def format_config(cfg: ScenarioConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(repr(float(x)) for x in v)
        elif isinstance(v, float):
            v = repr(v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Independent generators derived from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]
