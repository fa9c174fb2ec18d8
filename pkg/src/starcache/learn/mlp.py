"""Fully connected networks with manual backprop and the Adam optimiser (float64)."""

from __future__ import annotations

import numpy as np

ACTIVATIONS = ("relu", "tanh", "softsign", "linear")


class Mlp:
    """Dense network with ReLU hidden layers.

    ``params`` is the flat list ``[W0, b0, W1, b1, ...]`` with ``W_i`` of shape
    ``(fan_in, fan_out)``. Inputs are batches of row vectors.
    """

    def __init__(self, sizes, out_act: str = "linear", rng: np.random.Generator | None = None,
                 hidden_act: str = "relu"):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if out_act not in ACTIVATIONS or hidden_act not in ACTIVATIONS:
            raise ValueError(f"activations must be among {ACTIVATIONS}")
        self.sizes = tuple(int(s) for s in sizes)
        self.out_act = out_act
        self.hidden_act = hidden_act
        rng = rng if rng is not None else np.random.default_rng(0)
        self.params = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.params.append(rng.uniform(-bound, bound, (fan_in, fan_out)))
            self.params.append(rng.uniform(-bound, bound, fan_out))
        self._cache = None

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def _act(self, i: int) -> str:
        return self.out_act if i == self.n_layers - 1 else self.hidden_act

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        h = x[None, :] if single else x
        if h.shape[1] != self.sizes[0]:
            raise ValueError(f"input has {h.shape[1]} features, network expects {self.sizes[0]}")
        inputs, outs = [], []
        for i in range(self.n_layers):
            inputs.append(h)
            z = h @ self.params[2 * i] + self.params[2 * i + 1]
            act = self._act(i)
            if act == "relu":
                h = np.maximum(z, 0.0)
            elif act == "tanh":
                h = np.tanh(z)
            elif act == "softsign":
                h = z / (1.0 + np.abs(z))
            else:
                h = z
            outs.append(h)
        self._cache = (inputs, outs, single)
        return h[0] if single else h

    __call__ = forward

    def backward(self, grad_out) -> list[np.ndarray]:
        """Parameter gradients for an upstream gradient at the output.

        Uses the activations of the most recent ``forward`` call. The gradient
        with respect to the input is left in ``self.grad_input``.
        """
        if self._cache is None:
            raise RuntimeError("backward called before forward")
        inputs, outs, single = self._cache
        g = np.asarray(grad_out, dtype=np.float64)
        if single:
            g = g[None, :]
        grads = [None] * len(self.params)
        for i in reversed(range(self.n_layers)):
            act = self._act(i)
            if act == "relu":
                g = g * (outs[i] > 0.0)
            elif act == "tanh":
                g = g * (1.0 - outs[i] ** 2)
            elif act == "softsign":
                g = g * (1.0 - np.abs(outs[i])) ** 2
            grads[2 * i] = inputs[i].T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            g = g @ self.params[2 * i].T
        self.grad_input = g[0] if single else g
        return grads

    def copy(self) -> "Mlp":
        twin = object.__new__(Mlp)
        twin.sizes, twin.out_act, twin.hidden_act = self.sizes, self.out_act, self.hidden_act
        twin.params = [p.copy() for p in self.params]
        twin._cache = None
        return twin

    def load(self, params) -> None:
        for dst, src in zip(self.params, params, strict=True):
            if dst.shape != src.shape:
                raise ValueError(f"shape mismatch {dst.shape} vs {src.shape}")
            dst[...] = src


def soft_update(target: Mlp, source: Mlp, tau: float) -> None:
    """Polyak averaging ``target <- tau * source + (1 - tau) * target`` in place."""
    for t, s in zip(target.params, source.params):
        t *= 1.0 - tau
        t += tau * s


def hard_update(target: Mlp, source: Mlp) -> None:
    target.load(source.params)


class Adam:
    """Adam with bias correction, updating parameter arrays in place."""

    def __init__(self, params, lr: float = 3e-4, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**self.t
        c2 = 1.0 - b2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state(self) -> dict:
        return {"t": self.t, "m": self.m, "v": self.v}

    def load_state(self, state: dict) -> None:
        self.t = int(state["t"])
        for dst, src in zip(self.m, state["m"], strict=True):
            dst[...] = src
        for dst, src in zip(self.v, state["v"], strict=True):
            dst[...] = src


def mlp_sizes(n_in: int, n_out: int, hidden: int = 64, n_hidden: int = 3) -> list[int]:
    return [n_in] + [hidden] * n_hidden + [n_out]
