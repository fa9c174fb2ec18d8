"""Numpy neural networks, replay memory and the TD3 / DQN agents."""

from .dqn import MAX_MASK_BITS, DqnAgent, DqnConfig
from .mlp import Adam, Mlp, hard_update, mlp_sizes, soft_update
from .replay import ReplayBuffer
from .td3 import Td3Agent, Td3Config, noise_scale

__all__ = ["Adam", "DqnAgent", "DqnConfig", "MAX_MASK_BITS", "Mlp", "ReplayBuffer", "Td3Agent",
           "Td3Config", "hard_update", "mlp_sizes", "noise_scale", "soft_update"]
