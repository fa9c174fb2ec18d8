"""Deep Q-network choosing the binary transmission-phase mask."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mlp import Adam, Mlp, hard_update, mlp_sizes

MAX_MASK_BITS = 12


@dataclass(frozen=True)
class DqnConfig:
    gamma: float = 0.0
    lr: float = 3e-4
    batch_size: int = 64
    epsilon: float = 0.15
    hidden: int = 64
    n_hidden: int = 3
    buffer_size: int = 10_000
    target_copy_episodes: int = 2


class DqnAgent:
    def __init__(self, state_dim: int, n_actions: int, cfg: DqnConfig, rng: np.random.Generator):
        if n_actions > 2**MAX_MASK_BITS:
            raise ValueError(f"{n_actions} Q outputs exceed the supported 2**{MAX_MASK_BITS}")
        self.cfg = cfg
        self.state_dim, self.n_actions = state_dim, n_actions
        init_rng, self.rng = rng.spawn(2)
        self.qnet = Mlp(mlp_sizes(state_dim, n_actions, cfg.hidden, cfg.n_hidden), "linear", init_rng)
        self.target = self.qnet.copy()
        self.opt = Adam(self.qnet.params, cfg.lr)
        self.learn_steps = 0

    @property
    def networks(self) -> dict[str, Mlp]:
        return {"qnet": self.qnet, "target": self.target}

    @property
    def optimizers(self) -> dict[str, Adam]:
        return {"qnet": self.opt}

    def act(self, state, train: bool = True, epsilon: float | None = None) -> int:
        """Epsilon-greedy in training, pure argmax otherwise."""
        eps = self.cfg.epsilon if epsilon is None else epsilon
        if train and eps > 0 and self.rng.random() < eps:
            return int(self.rng.integers(self.n_actions))
        return int(np.argmax(self.qnet(np.asarray(state, dtype=np.float64))))

    def learn(self, batch) -> float | None:
        """Regress ``Q(s, a)`` onto ``r + gamma * max Q'(s', .)``; returns the loss."""
        if batch is None:
            return None
        s, a, r, s2 = batch
        B = len(r)
        a = np.asarray(a, dtype=np.int64).reshape(B)
        y = r if self.cfg.gamma == 0 else r + self.cfg.gamma * self.target(s2).max(axis=1)
        q = self.qnet(s)
        err = q[np.arange(B), a] - y
        g = np.zeros_like(q)
        g[np.arange(B), a] = (2.0 / B) * err
        self.opt.step(self.qnet.backward(g))
        self.learn_steps += 1
        return float(np.mean(err**2))

    def sync_target(self) -> None:
        hard_update(self.target, self.qnet)
