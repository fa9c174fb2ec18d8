"""Twin-delayed deterministic policy gradient agent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mlp import Adam, Mlp, mlp_sizes, soft_update


@dataclass(frozen=True)
class Td3Config:
    gamma: float = 0.5
    tau: float = 0.005
    policy_delay: int = 3
    lr: float = 3e-4
    batch_size: int = 64
    noise_start: float = 0.4
    noise_end: float = 0.2
    noise_clip: float = 0.5
    hidden: int = 64
    n_hidden: int = 3
    buffer_size: int = 100_000
    max_episode: int = 1000
    t_o: int = 80_000
    actor_head: str = "tanh"
    learn_start: int = 1


def noise_scale(episode: int, cfg: Td3Config) -> float:
    """Exploration scale, linear from ``noise_start`` at episode 0 to ``noise_end`` at the last episode."""
    frac = min(max(episode / max(cfg.max_episode, 1), 0.0), 1.0)
    return cfg.noise_start + (cfg.noise_end - cfg.noise_start) * frac


class Td3Agent:
    def __init__(self, state_dim: int, action_dim: int, cfg: Td3Config, rng: np.random.Generator):
        self.cfg = cfg
        self.state_dim, self.action_dim = state_dim, action_dim
        init_rng, self.rng = rng.spawn(2)
        self.actor = Mlp(mlp_sizes(state_dim, action_dim, cfg.hidden, cfg.n_hidden), cfg.actor_head, init_rng)
        self.critic1 = Mlp(mlp_sizes(state_dim + action_dim, 1, cfg.hidden, cfg.n_hidden), "linear", init_rng)
        self.critic2 = Mlp(mlp_sizes(state_dim + action_dim, 1, cfg.hidden, cfg.n_hidden), "linear", init_rng)
        self.actor_t, self.critic1_t, self.critic2_t = self.actor.copy(), self.critic1.copy(), self.critic2.copy()
        self.actor_opt = Adam(self.actor.params, cfg.lr)
        self.critic1_opt = Adam(self.critic1.params, cfg.lr)
        self.critic2_opt = Adam(self.critic2.params, cfg.lr)
        self.episode = 0
        self.learn_steps = 0
        self.actor_updates = 0

    @property
    def networks(self) -> dict[str, Mlp]:
        return {"actor": self.actor, "critic1": self.critic1, "critic2": self.critic2,
                "actor_t": self.actor_t, "critic1_t": self.critic1_t, "critic2_t": self.critic2_t}

    @property
    def optimizers(self) -> dict[str, Adam]:
        return {"actor": self.actor_opt, "critic1": self.critic1_opt, "critic2": self.critic2_opt}

    def noise(self) -> float:
        return noise_scale(self.episode, self.cfg)

    def greedy(self, state) -> np.ndarray:
        """Best of the online and target actor proposals under the larger twin-critic value."""
        s = np.asarray(state, dtype=np.float64)
        cands = np.stack([self.actor(s), self.actor_t(s)])
        sa = np.concatenate([np.repeat(s[None, :], len(cands), axis=0), cands], axis=1)
        q = np.maximum(self.critic1(sa), self.critic2(sa))[:, 0]
        return cands[int(np.argmax(q))]

    def act(self, state, step: int, explore: bool = True) -> np.ndarray:
        """Noisy policy output up to step ``t_o``, greedy twin-critic selection afterwards."""
        if not explore or step > self.cfg.t_o:
            return self.greedy(state)
        a = self.actor(np.asarray(state, dtype=np.float64))
        xi = self.noise()
        if xi > 0:
            a = a + self.rng.normal(0.0, xi, size=a.shape)
        return np.clip(a, -1.0, 1.0)

    def target_values(self, r, s2) -> np.ndarray:
        """Bellman labels from the smaller target-critic value at the smoothed target action."""
        cfg = self.cfg
        a2 = self.actor_t(s2)
        xi = self.noise()
        if xi > 0:
            eps = np.clip(self.rng.normal(0.0, xi, size=a2.shape), -cfg.noise_clip, cfg.noise_clip)
            a2 = np.clip(a2 + eps, -1.0, 1.0)
        sa2 = np.concatenate([s2, a2], axis=1)
        q = np.minimum(self.critic1_t(sa2), self.critic2_t(sa2))[:, 0]
        return r + cfg.gamma * q

    def learn(self, batch) -> dict:
        """One critic step on both critics; a delayed actor step and soft target update."""
        if batch is None:
            return {}
        s, a, r, s2 = batch
        B = len(r)
        y = self.target_values(r, s2)
        sa = np.concatenate([s, a], axis=1)
        losses = {}
        for name, critic, opt in (("critic1", self.critic1, self.critic1_opt),
                                  ("critic2", self.critic2, self.critic2_opt)):
            q = critic(sa)[:, 0]
            err = q - y
            losses[name] = float(np.mean(err**2))
            opt.step(critic.backward((2.0 / B) * err[:, None]))
        self.learn_steps += 1
        if self.learn_steps % self.cfg.policy_delay == 0:
            a_pi = self.actor(s)
            q = self.critic1(np.concatenate([s, a_pi], axis=1))
            losses["actor"] = float(-q.mean())
            self.critic1.backward(np.full((B, 1), -1.0 / B))
            grad_a = self.critic1.grad_input[:, self.state_dim:]
            self.actor_opt.step(self.actor.backward(grad_a))
            self.actor_updates += 1
            soft_update(self.actor_t, self.actor, self.cfg.tau)
            soft_update(self.critic1_t, self.critic1, self.cfg.tau)
            soft_update(self.critic2_t, self.critic2, self.cfg.tau)
        return losses
