"""Training loops, baseline variants, sweeps and checkpointed evaluation."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import VARIANTS, ConfigError, ScenarioConfig, format_config, parse_config, spawn_rngs
from ..env import CachingEnv, StepInfo
from ..learn import DqnAgent, DqnConfig, ReplayBuffer, Td3Agent, Td3Config
from .io import MetricRow, emit_csv, load_checkpoint, save_checkpoint, write_table

log = logging.getLogger(__name__)

CSV_NAME = "metrics.csv"
CKPT_NAME = "agent.ckpt"


def td3_config(cfg: ScenarioConfig) -> Td3Config:
    return Td3Config(gamma=cfg.gamma, tau=cfg.tau, policy_delay=cfg.policy_delay, lr=cfg.lr,
                     batch_size=cfg.batch_size, noise_start=cfg.noise_start, noise_end=cfg.noise_end,
                     noise_clip=cfg.noise_clip, hidden=cfg.hidden, n_hidden=cfg.n_hidden,
                     buffer_size=cfg.td3_buffer, max_episode=cfg.episodes, t_o=cfg.t_o,
                     actor_head=cfg.actor_head, learn_start=cfg.learn_start)


def dqn_config(cfg: ScenarioConfig) -> DqnConfig:
    return DqnConfig(gamma=cfg.dqn_gamma, lr=cfg.lr, batch_size=cfg.batch_size, epsilon=cfg.dqn_eps,
                     hidden=cfg.hidden, n_hidden=cfg.n_hidden, buffer_size=cfg.dqn_buffer,
                     target_copy_episodes=cfg.target_copy_episodes)


@dataclass
class Agents:
    """Everything a run learns: TD3 (always), DQN (cooperative runs) and the frequency table."""

    env: CachingEnv
    td3: Td3Agent
    dqn: DqnAgent | None = None
    td3_buffer: ReplayBuffer | None = None
    dqn_buffer: ReplayBuffer | None = None
    replay_rng: np.random.Generator | None = None
    episode: int = 0


def build(cfg: ScenarioConfig) -> Agents:
    cfg.validate()
    env_rng, td3_rng, dqn_rng, replay_rng = spawn_rngs(cfg.seed, 4)
    env = CachingEnv(cfg, env_rng)
    td3 = Td3Agent(env.state_dim, env.action_dim, td3_config(cfg), td3_rng)
    agents = Agents(env, td3, replay_rng=replay_rng,
                    td3_buffer=ReplayBuffer(cfg.td3_buffer, env.state_dim, env.action_dim))
    if cfg.algo == "td3dqn":
        agents.dqn = DqnAgent(env.internal_state_dim, 2**cfg.N, dqn_config(cfg), dqn_rng)
        agents.dqn_buffer = ReplayBuffer(cfg.dqn_buffer, env.internal_state_dim, 1, np.int64)
    return agents


def _row(episode: int, step: int, reward: float, info: StepInfo) -> MetricRow:
    b = info.budget
    return MetricRow(episode, step, float(reward), float(b.P_w), float(b.P_s), info.hits_bs, info.hits_stars,
                     b.qos_count, str(b.mode), info.lambda_r, info.lambda_u)


@dataclass
class RunResult:
    config: ScenarioConfig
    rows: list[MetricRow]
    agents: Agents
    csv_path: Path | None = None
    checkpoint_path: Path | None = None
    summary: dict = field(default_factory=dict)


def cooperative_step(agents: Agents, state, global_step: int, learn: bool = True):
    """One step of the cooperative loop.

    The TD3 agent proposes the continuous action; the DQN picks an
    epsilon-greedy mask in the internal environment, stores and trains on that
    transition, then the greedy mask and the continuous action execute in the
    external environment, after which TD3 stores and trains.
    """
    env, td3, dqn = agents.env, agents.td3, agents.dqn
    a_c = td3.act(state, global_step, explore=learn)
    s_in = env.internal_state(a_c)
    if learn:
        m_train = dqn.act(s_in, train=True)
        r_in = env.evaluate(a_c, m_train).reward_internal
        # the mask changes neither requests, CSI nor caches: the internal state persists
        agents.dqn_buffer.push(s_in, m_train, r_in, s_in)
        if len(agents.dqn_buffer) >= agents.env.cfg.learn_start:
            dqn.learn(agents.dqn_buffer.sample(dqn.cfg.batch_size, agents.replay_rng))
    mask = dqn.act(s_in, train=False)
    s2, r_ex, _, info = env.step_coupled(a_c, mask)
    if learn:
        agents.td3_buffer.push(state, a_c, r_ex, s2)
        if len(agents.td3_buffer) >= td3.cfg.learn_start:
            td3.learn(agents.td3_buffer.sample(td3.cfg.batch_size, agents.replay_rng))
    return s2, r_ex, info


def plain_step(agents: Agents, state, global_step: int, learn: bool = True):
    env, td3 = agents.env, agents.td3
    a = td3.act(state, global_step, explore=learn)
    s2, r, info = env.step(a)
    if learn:
        agents.td3_buffer.push(state, a, r, s2)
        if len(agents.td3_buffer) >= td3.cfg.learn_start:
            td3.learn(agents.td3_buffer.sample(td3.cfg.batch_size, agents.replay_rng))
    return s2, r, info


def run_episodes(agents: Agents, episodes: int, steps: int, learn: bool = True) -> list[MetricRow]:
    step_fn = cooperative_step if agents.dqn is not None else plain_step
    rows = []
    first = agents.episode
    for ep in range(first, first + episodes):
        agents.td3.episode = ep
        state = agents.env.reset()
        for t in range(steps):
            state, r, info = step_fn(agents, state, ep * steps + t, learn)
            rows.append(_row(ep, t, r, info))
        agents.episode = ep + 1
        if learn and agents.dqn is not None and (ep + 1) % agents.dqn.cfg.target_copy_episodes == 0:
            agents.dqn.sync_target()
    return rows


def final_window(rows: list[MetricRow], episodes: int | None = None, frac: float = 0.1) -> dict:
    """Per-step means over the last ``frac`` of episodes (at least one)."""
    if not rows:
        return {}
    last = rows[-1].episode
    n_ep = episodes if episodes is not None else last + 1 - rows[0].episode
    k = max(1, int(round(frac * n_ep)))
    sel = [r for r in rows if r.episode > last - k]
    return {
        "reward": float(np.mean([r.reward for r in sel])),
        "P_s": float(np.mean([r.P_s for r in sel])),
        "P_w": float(np.mean([r.P_w for r in sel])),
        "hit_rate": float(np.mean([(r.hits_bs + r.hits_stars) / 2.0 for r in sel])),
        "qos_rate": float(np.mean([r.qos_met / 2.0 for r in sel])),
        "episodes": k,
    }


def train_run(cfg: ScenarioConfig, out_dir=None) -> RunResult:
    """Train from scratch for ``cfg.episodes`` x ``cfg.steps`` steps.

    With ``out_dir`` the per-step metrics and the final checkpoint are written
    there as ``metrics.csv`` and ``agent.ckpt``.
    """
    agents = build(cfg)
    rows = run_episodes(agents, cfg.episodes, cfg.steps, learn=True)
    res = RunResult(cfg, rows, agents, summary=final_window(rows, cfg.episodes))
    if out_dir is not None:
        out = Path(out_dir)
        res.csv_path = emit_csv(rows, out / CSV_NAME)
        res.checkpoint_path = save_agents(agents, out / CKPT_NAME)
    return res


def baseline_run(cfg: ScenarioConfig, out_dir=None) -> RunResult:
    """Train one of the comparison systems named by ``cfg.variant``."""
    if cfg.variant not in VARIANTS:
        raise ConfigError(f"unknown variant {cfg.variant!r}")
    return train_run(cfg, out_dir)


def _sweep_job(args):
    cfg, out = args
    res = train_run(cfg, out)
    return res.summary


def sweep(cfg: ScenarioConfig, axis: str, values, out_dir=None, workers: int = 1) -> list[dict]:
    """Train every (value, seed) pair and aggregate final-window statistics.

    ``axis`` is ``alpha`` or ``cache_size``; a cache size sets ``C_c`` with
    ``C_b = 2 * C_c``. Seeds are ``cfg.seed .. cfg.seed + n_seeds - 1``.
    """
    values = list(values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    if axis not in ("alpha", "cache_size"):
        raise ConfigError(f"unknown sweep axis {axis!r}")
    seeds = [cfg.seed + i for i in range(cfg.n_seeds)]
    jobs = []
    for v in values:
        base = cfg.replace(alpha=float(v)) if axis == "alpha" else cfg.replace(C_c=int(v), C_b=2 * int(v))
        for s in seeds:
            c = base.replace(seed=s).validate()
            out = None if out_dir is None else Path(out_dir) / f"{axis}={v}" / f"seed={s}"
            jobs.append((c, out))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            summaries = list(pool.map(_sweep_job, jobs))
    else:
        summaries = [_sweep_job(j) for j in jobs]
    table = []
    for i, v in enumerate(values):
        chunk = summaries[i * len(seeds):(i + 1) * len(seeds)]
        rec = {axis: v, "n_seeds": len(seeds)}
        for key in ("hit_rate", "P_s", "P_w", "reward"):
            vals = np.array([c[key] for c in chunk])
            rec[f"{key}_mean"] = float(vals.mean())
            rec[f"{key}_sd"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        table.append(rec)
    if out_dir is not None:
        write_table(table, Path(out_dir) / "sweep.csv")
        meta = {"axis": axis, "values": values, "seeds": seeds, "variant": cfg.variant, "algo": cfg.algo,
                "phase": cfg.phase, "statistic": "mean and sample sd over seeds of final-window per-step means"}
        (Path(out_dir) / "sweep_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return table


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def _rng_state(rng: np.random.Generator) -> dict:
    return rng.bit_generator.state


def save_agents(agents: Agents, path) -> Path:
    arrays, meta = {}, {}
    groups = [("td3", agents.td3)] + ([("dqn", agents.dqn)] if agents.dqn is not None else [])
    for gname, agent in groups:
        for nname, net in agent.networks.items():
            for i, p in enumerate(net.params):
                arrays[f"{gname}/{nname}/p{i}"] = p
        for oname, opt in agent.optimizers.items():
            for i, (m, v) in enumerate(zip(opt.m, opt.v)):
                arrays[f"{gname}/opt_{oname}/m{i}"] = m
                arrays[f"{gname}/opt_{oname}/v{i}"] = v
            meta[f"{gname}/opt_{oname}/t"] = opt.t
        meta[f"{gname}/learn_steps"] = agent.learn_steps
        meta[f"{gname}/rng"] = _rng_state(agent.rng)
    meta["td3/actor_updates"] = agents.td3.actor_updates
    arrays["table/counts"] = agents.env.table.counts
    meta["table/chi"] = agents.env.table.chi
    meta["episode"] = agents.episode
    meta["noise_scale"] = agents.td3.noise()
    meta["config"] = format_config(agents.env.cfg)
    return save_checkpoint(path, arrays, meta)


def load_agents(path, cfg: ScenarioConfig | None = None) -> Agents:
    """Rebuild agents from a checkpoint; the stored configuration is used unless ``cfg`` is given."""
    arrays, meta = load_checkpoint(path)
    cfg = cfg or parse_config(meta["config"])
    agents = build(cfg)
    groups = [("td3", agents.td3)] + ([("dqn", agents.dqn)] if agents.dqn is not None else [])
    for gname, agent in groups:
        for nname, net in agent.networks.items():
            net.load([arrays[f"{gname}/{nname}/p{i}"] for i in range(len(net.params))])
        for oname, opt in agent.optimizers.items():
            n = len(opt.m)
            opt.load_state({"t": meta[f"{gname}/opt_{oname}/t"],
                            "m": [arrays[f"{gname}/opt_{oname}/m{i}"] for i in range(n)],
                            "v": [arrays[f"{gname}/opt_{oname}/v{i}"] for i in range(n)]})
        agent.learn_steps = int(meta[f"{gname}/learn_steps"])
        agent.rng.bit_generator.state = meta[f"{gname}/rng"]
    agents.td3.actor_updates = int(meta["td3/actor_updates"])
    agents.env.table.counts[...] = arrays["table/counts"]
    agents.episode = int(meta["episode"])
    agents.td3.episode = max(agents.episode - 1, 0)
    return agents


def evaluate(path, episodes: int = 10, out_dir=None, seed: int | None = None) -> RunResult:
    """Greedy roll-outs of a checkpointed agent without learning."""
    _, meta = load_checkpoint(path)
    cfg = parse_config(meta["config"])
    if seed is not None:
        cfg = cfg.replace(seed=seed)
    agents = load_agents(path, cfg)
    rows = run_episodes(agents, episodes, cfg.steps, learn=False)
    res = RunResult(cfg, rows, agents, summary=final_window(rows, episodes, frac=1.0))
    if out_dir is not None:
        res.csv_path = emit_csv(rows, Path(out_dir) / "eval.csv")
    return res
