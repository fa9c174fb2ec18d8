from __future__ import annotations

import numpy as np


class ReplayBuffer:
    """Ring buffer of ``(state, action, reward, next_state)`` transitions.

    Storage grows on demand up to ``capacity`` so short runs with a large
    nominal capacity stay small in memory.
    """

    def __init__(self, capacity: int, state_dim: int, action_dim: int, action_dtype=np.float64):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self.state_dim, self.action_dim = state_dim, action_dim
        self.action_dtype = np.dtype(action_dtype)
        self._alloc = 0
        self.s = np.empty((0, state_dim))
        self.a = np.empty((0, action_dim), dtype=self.action_dtype)
        self.r = np.empty(0)
        self.s2 = np.empty((0, state_dim))
        self.ptr = 0
        self.size = 0
        self.pushed = 0

    def __len__(self) -> int:
        return self.size

    def _grow(self) -> None:
        new = min(self.capacity, max(1024, 2 * self._alloc))

        def grow(arr):
            out = np.zeros((new,) + arr.shape[1:], dtype=arr.dtype)
            out[: self._alloc] = arr
            return out

        self.s, self.a, self.r, self.s2 = grow(self.s), grow(self.a), grow(self.r), grow(self.s2)
        self._alloc = new

    def push(self, s, a, r, s2) -> None:
        if self.ptr >= self._alloc:
            self._grow()
        i = self.ptr
        self.s[i] = s
        self.a[i] = a
        self.r[i] = r
        self.s2[i] = s2
        self.ptr = (self.ptr + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        self.pushed += 1

    def sample(self, batch_size: int, rng: np.random.Generator):
        """Uniform batch without replacement; smaller than requested while the buffer fills."""
        if self.size == 0:
            return None
        idx = rng.choice(self.size, size=min(batch_size, self.size), replace=False)
        return self.s[idx], self.a[idx], self.r[idx], self.s2[idx]
