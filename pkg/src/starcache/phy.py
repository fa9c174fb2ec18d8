"""Delivery-mode selection, achievable rates and power accounting.

User 0 is the T-user (served through the transmission coefficients), user 1
the R-user (reflection coefficients).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import ChannelSet
from .catalog import PowerTariff

T_USER, R_USER = 0, 1


class Mode(str, Enum):
    CT = "CT"  # controller transmits both cached contents
    CA = "CA"  # surface assists BS delivery of both
    HM = "HM"  # one user each

    def __str__(self):
        return self.value


def noise_power(density_dbm_per_mhz: float = -95.2, bandwidth_hz: float = 1e6) -> float:
    """Noise power in W from a dBm/MHz density."""
    dbm = density_dbm_per_mhz + 10.0 * np.log10(bandwidth_hz / 1e6)
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class BeamformingDecision:
    Pb_T: np.ndarray
    Pb_R: np.ndarray
    Pc_T: float
    Pc_R: float

    def Pb(self, user: int) -> np.ndarray:
        return self.Pb_T if user == T_USER else self.Pb_R

    def Pc(self, user: int) -> float:
        return self.Pc_T if user == T_USER else self.Pc_R


@dataclass(frozen=True)
class LinkBudget:
    mode: Mode
    same_content: bool
    R_T: float
    R_R: float
    P_w: float
    P_s: float
    qos_met_T: bool
    qos_met_R: bool

    @property
    def qos_count(self) -> int:
        return int(self.qos_met_T) + int(self.qos_met_R)


def select_mode(stars_hits) -> tuple[Mode, tuple[bool, bool]]:
    """Protocol from the two STARS-hit flags.

    Returns the mode and, per user, whether the controller serves it.
    """
    hit_t, hit_r = (bool(h) for h in stars_hits)
    if hit_t and hit_r:
        return Mode.CT, (True, True)
    if not hit_t and not hit_r:
        return Mode.CA, (False, False)
    return Mode.HM, (hit_t, hit_r)


def _rate(B: float, sinr) -> float:
    return float(B * np.log2(1.0 + sinr))


def rate_ct(channels: ChannelSet, Pc_T: float, Pc_R: float, same_content: bool,
            B: float, sigma2: float) -> tuple[float, float]:
    g_t, g_r = abs(channels.hd_T) ** 2, abs(channels.hd_R) ** 2
    if same_content:
        return _rate(B, g_t * Pc_T / sigma2), _rate(B, g_r * Pc_R / sigma2)
    return (_rate(B, g_t * Pc_T / (g_t * Pc_R + sigma2)),
            _rate(B, g_r * Pc_R / (g_r * Pc_T + sigma2)))


def cascaded(channels: ChannelSet, user: int, theta: np.ndarray) -> np.ndarray:
    """Effective 1 x M channel ``h^H Theta G`` towards ``user``."""
    theta = np.asarray(theta)
    d = np.diag(theta) if theta.ndim == 2 else theta
    return (channels.h(user).conj() * d) @ channels.G_b


def rate_ca(channels: ChannelSet, Theta_T: np.ndarray, Theta_R: np.ndarray, Pb_T, Pb_R,
            same_content: bool, B: float, sigma2: float) -> tuple[float, float]:
    Pb = (np.asarray(Pb_T), np.asarray(Pb_R))
    if Pb[0].shape != (channels.M,) or Pb[1].shape != (channels.M,):
        raise ValueError(f"beamformers must have length M={channels.M}")
    out = []
    for k, theta in ((T_USER, Theta_T), (R_USER, Theta_R)):
        g = cascaded(channels, k, theta)
        sig = abs(g @ Pb[k]) ** 2
        interf = 0.0 if same_content else abs(g @ Pb[1 - k]) ** 2
        out.append(_rate(B, sig / (interf + sigma2)))
    return out[0], out[1]


def rate_hm(channels: ChannelSet, Theta_T: np.ndarray, Theta_R: np.ndarray, stars_user: int,
            Pb, Pc: float, B: float, sigma2: float) -> tuple[float, float]:
    """Rates of (controller-served user, BS-served user).

    ``Pb`` is the beamformer of the BS-served user and ``Pc`` the controller
    power towards the STARS-served user.
    """
    k, kb = stars_user, 1 - stars_user
    thetas = (Theta_T, Theta_R)
    Pb = np.asarray(Pb)
    leak = abs(cascaded(channels, k, thetas[k]) @ Pb) ** 2
    sinr_k = abs(channels.hd(k)) ** 2 * Pc / (leak + sigma2)
    sig = abs(cascaded(channels, kb, thetas[kb]) @ Pb) ** 2
    sinr_kb = sig / (abs(channels.hd(kb)) ** 2 * Pc + sigma2)
    return _rate(B, sinr_k), _rate(B, sinr_kb)


def wireless_power(mode: Mode, decision: BeamformingDecision, stars_user: int | None = None) -> float:
    """Radiated power of the active transmitters in the given mode."""
    if mode is Mode.CT:
        return float(decision.Pc_T + decision.Pc_R)
    if mode is Mode.CA:
        return float(np.vdot(decision.Pb_T, decision.Pb_T).real + np.vdot(decision.Pb_R, decision.Pb_R).real)
    if stars_user is None:
        raise ValueError("hybrid mode needs the controller-served user")
    pb = decision.Pb(1 - stars_user)
    return float(decision.Pc(stars_user) + np.vdot(pb, pb).real)


def system_power(P_w: float, lambda_r: int, lambda_u: int, tariff: PowerTariff) -> float:
    return float(P_w + lambda_r * tariff.P_bh + lambda_u * tariff.P_u)


def evaluate_link(channels: ChannelSet, Theta_T, Theta_R, decision: BeamformingDecision,
                  stars_hits, same_content: bool, B: float, sigma2: float):
    """Mode, per-user rates and P_w for one slot."""
    mode, by_ctrl = select_mode(stars_hits)
    if mode is Mode.CT:
        R = rate_ct(channels, decision.Pc_T, decision.Pc_R, same_content, B, sigma2)
        P_w = wireless_power(mode, decision)
    elif mode is Mode.CA:
        R = rate_ca(channels, Theta_T, Theta_R, decision.Pb_T, decision.Pb_R, same_content, B, sigma2)
        P_w = wireless_power(mode, decision)
    else:
        k = T_USER if by_ctrl[T_USER] else R_USER
        r_k, r_b = rate_hm(channels, Theta_T, Theta_R, k, decision.Pb(1 - k), decision.Pc(k), B, sigma2)
        R = (r_k, r_b) if k == T_USER else (r_b, r_k)
        P_w = wireless_power(mode, decision, stars_user=k)
    return mode, R, P_w
