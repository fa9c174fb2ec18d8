"""MDP environments for joint cache replacement and hybrid beamforming.

Actions live in ``[-1, 1]``. The continuous block is laid out as

    cache_b (C_b) | cache_c (C_c) | pb (4M) | theta_R (N) | beta_T (N) | theta_T (N) | pc (2)

with ``theta_T`` present only for the independent phase model and ``beta_T``
only for a STARS surface. A double-spliced RIS uses a single ``theta`` block
whose first half drives the T-facing panel and second half the R-facing one.
``mask`` (N) is appended when the coupled mask is serialised into the
continuous action instead of being chosen by a DQN.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import CacheState, Catalog, Tier, apply_cache_decision, lookup_serving, sample_request_pair
from .channel import Geometry, draw_channel_set, link_patterns
from .config import RewardParams, ScenarioConfig
from .phy import BeamformingDecision, LinkBudget, evaluate_link, system_power
from .stars import StarsProfile, bits_to_mask, coefficient_matrices, couple_transmission_phase, wrap_phase


class ActionShapeError(ValueError):
    pass


class DegenerateTableError(ValueError):
    pass


# ---------------------------------------------------------------------------
# cache codecs
# ---------------------------------------------------------------------------

def to_unit(a) -> np.ndarray:
    """Affine map of network outputs from [-1, 1] onto [0, 1]."""
    return (np.clip(np.asarray(a, dtype=np.float64), -1.0, 1.0) + 1.0) / 2.0


def decode_cache_equal_width(phi, F: int) -> np.ndarray:
    """Content index ``ceil(phi * F)`` per slot value ``phi`` in [0, 1], clamped to [1, F]."""
    phi = np.asarray(phi, dtype=np.float64)
    return np.clip(np.ceil(phi * F), 1, F).astype(np.int64)


class FrequencyTable:
    """Request counts driving the frequency-aware cache codec."""

    def __init__(self, F: int, chi: float = 0.3):
        if not 0.0 <= chi <= 1.0:
            raise ValueError("chi must lie in [0, 1]")
        self.F = F
        self.chi = float(chi)
        self.counts = np.zeros(F, dtype=np.int64)

    def record(self, requests) -> None:
        for f in requests:
            self.counts[f - 1] += 1

    @property
    def degenerate(self) -> bool:
        return self.chi == 1.0 or self.counts.sum() == 0

    def widths(self) -> np.ndarray:
        """Segment lengths over the unit range; they sum to 1."""
        total = self.counts.sum()
        if total == 0:
            if self.chi == 0.0:
                raise DegenerateTableError("no requests recorded and chi = 0 leaves every segment empty")
            return np.full(self.F, 1.0 / self.F)
        return self.chi / self.F + (1.0 - self.chi) * self.counts / total

    def upper_bounds(self) -> np.ndarray:
        """Right edge of each segment; the last edge is pinned to exactly 1."""
        cum = np.cumsum(self.widths())
        cum[-1] = 1.0
        return cum

    def midpoints(self) -> np.ndarray:
        if self.degenerate:
            return (np.arange(self.F) + 0.5) / self.F
        w = self.widths()
        return np.cumsum(w) - 0.5 * w


def decode_cache_frequency_aware(phi, table: FrequencyTable, F: int | None = None) -> np.ndarray:
    """Content whose segment contains ``phi``; segments are sized by request frequency.

    Falls back to the equal-width decode while the table is empty or ``chi = 1``.
    """
    F = table.F if F is None else F
    if F != table.F:
        raise ValueError(f"table covers {table.F} contents, asked to decode over {F}")
    if table.degenerate:
        return decode_cache_equal_width(phi, F)
    phi = np.asarray(phi, dtype=np.float64)
    idx = np.searchsorted(table.upper_bounds(), phi, side="left") + 1
    return np.clip(idx, 1, F).astype(np.int64)


# ---------------------------------------------------------------------------
# action layout and continuous decode
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActionLayout:
    C_b: int
    C_c: int
    M: int
    N: int
    surface: str = "stars"
    phase: str = "independent"
    serialized_mask: bool = False

    @property
    def blocks(self) -> list[tuple[str, int]]:
        b = [("cache_b", self.C_b), ("cache_c", self.C_c), ("pb", 4 * self.M)]
        if self.surface == "ris":
            b.append(("theta", self.N))
        else:
            b += [("theta_R", self.N), ("beta_T", self.N)]
            if self.phase == "independent":
                b.append(("theta_T", self.N))
        b.append(("pc", 2))
        if self.serialized_mask:
            b.append(("mask", self.N))
        return b

    @property
    def slices(self) -> dict[str, slice]:
        out, i = {}, 0
        for name, n in self.blocks:
            out[name] = slice(i, i + n)
            i += n
        return out

    @property
    def dim(self) -> int:
        return sum(n for _, n in self.blocks)

    @property
    def continuous_dim(self) -> int:
        return self.dim - (self.N if self.serialized_mask else 0)


def project_total_power(Pb_T: np.ndarray, Pb_R: np.ndarray, cap: float):
    """Scale both beamformers radially so their total power is at most ``cap``."""
    total = float(np.vdot(Pb_T, Pb_T).real + np.vdot(Pb_R, Pb_R).real)
    if total > cap:
        s = np.sqrt(cap / total)
        return Pb_T * s, Pb_R * s
    return Pb_T, Pb_R


def decode_continuous_controls(action, layout: ActionLayout, P_max: float, Pc_max: float,
                               mask=None) -> tuple[BeamformingDecision, StarsProfile]:
    """Beamformers, controller powers and surface profile from one action.

    Beamformer real/imag parts are scaled by ``sqrt(P_max/2)`` and the pair is
    projected onto the total cap ``M * P_max``. Phases map affinely onto
    ``[0, 2*pi)``, ``beta_T`` onto ``[0, 1]`` and controller powers are
    rectified onto ``[0, Pc_max]``. In the coupled model ``theta_T`` follows
    from ``mask`` (or the serialised ``mask`` block when present).
    """
    a = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
    if a.shape != (layout.dim,):
        raise ActionShapeError(f"action has shape {a.shape}, layout expects ({layout.dim},)")
    s = layout.slices
    M, N = layout.M, layout.N
    pb = a[s["pb"]] * np.sqrt(P_max / 2.0)
    Pb_T = pb[0:M] + 1j * pb[M:2 * M]
    Pb_R = pb[2 * M:3 * M] + 1j * pb[3 * M:4 * M]
    Pb_T, Pb_R = project_total_power(Pb_T, Pb_R, M * P_max)
    pc = np.clip(a[s["pc"]], 0.0, 1.0) * Pc_max
    decision = BeamformingDecision(Pb_T, Pb_R, float(pc[0]), float(pc[1]))

    if layout.surface == "ris":
        h = N // 2
        theta = wrap_phase((a[s["theta"]] + 1.0) * np.pi)
        beta_T = np.r_[np.ones(h), np.zeros(N - h)]
        theta_T = np.r_[theta[:h], np.zeros(N - h)]
        theta_R = np.r_[np.zeros(h), theta[h:]]
        return decision, StarsProfile(beta_T, theta_T, theta_R)

    theta_R = wrap_phase((a[s["theta_R"]] + 1.0) * np.pi)
    beta_T = (a[s["beta_T"]] + 1.0) / 2.0
    if layout.phase == "independent":
        theta_T = wrap_phase((a[s["theta_T"]] + 1.0) * np.pi)
    else:
        if layout.serialized_mask:
            mask = (a[s["mask"]] > 0.0).astype(np.int64)
        if mask is None:
            raise ActionShapeError("coupled model needs a transmission-phase mask")
        theta_T = couple_transmission_phase(theta_R, mask)
    return decision, StarsProfile(beta_T, theta_T, theta_R)


# ---------------------------------------------------------------------------
# reward
# ---------------------------------------------------------------------------

def compute_reward(rates, r_qos: float, P_s: float, hits, params: RewardParams,
                   include_hit_term: bool = True) -> float:
    """QoS bonus per satisfied user, minus the power penalty, plus the hit incentive."""
    r = params.r_q * sum(1 for R in rates if R >= r_qos) - params.w_p * P_s
    if include_hit_term:
        r += params.w_h * sum(hits)
    return float(r)


# ---------------------------------------------------------------------------
# environment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepInfo:
    budget: LinkBudget
    tiers: tuple
    hits_bs: int
    hits_stars: int
    lambda_r: int
    lambda_u: int
    mask: int | None
    reward_external: float
    reward_internal: float

    @property
    def hit_rate(self) -> float:
        return (self.hits_bs + self.hits_stars) / 2.0


class CachingEnv:
    """Two users, one multi-antenna BS and one caching surface.

    The environment owns the caches, the request-frequency table and the
    current slot's requests and CSI. ``step_independent`` drives the independent-phase model;
    ``step_coupled`` the external coupled-phase environment whose transmission phases come
    from a binary mask. One channel set and one request pair are drawn per step.
    """

    def __init__(self, cfg: ScenarioConfig, rng: np.random.Generator, serialized_mask: bool | None = None):
        self.cfg = cfg.validate()
        self.rng = rng
        if serialized_mask is None:
            serialized_mask = cfg.phase == "coupled" and cfg.algo != "td3dqn"
        self.layout = ActionLayout(cfg.cache_bs, cfg.cache_stars, cfg.M, cfg.N, cfg.surface, cfg.phase,
                                   serialized_mask and cfg.phase == "coupled")
        self.catalog = Catalog(cfg.F, cfg.alpha)
        self.table = FrequencyTable(cfg.F, cfg.chi)
        self.frequency_aware = cfg.frequency_aware
        self.fading = cfg.fading
        self.sigma2 = cfg.sigma2
        self.tariff = cfg.tariff
        self.reward_params = cfg.reward
        self.geometry = None
        self.reset()

    # -- state -------------------------------------------------------------

    @property
    def coupled(self) -> bool:
        return self.cfg.phase == "coupled"

    @property
    def state_dim(self) -> int:
        return self.layout.C_b + self.layout.C_c + 2 + 2 * (self.cfg.N * self.cfg.M + 2 * self.cfg.N + 2)

    @property
    def internal_state_dim(self) -> int:
        return 2 + 2 * (self.cfg.N * self.cfg.M + 2 * self.cfg.N + 2) + self.layout.dim

    @property
    def action_dim(self) -> int:
        return self.layout.dim

    def reset(self) -> np.ndarray:
        cfg = self.cfg
        self.geometry = Geometry.random_users(self.rng, cfg.bs_pos, cfg.stars_pos, cfg.radius)
        self._patterns = link_patterns(self.geometry, cfg.M, cfg.N)
        self.cache_bs = CacheState.empty("BS", cfg.F, self.layout.C_b)
        self.cache_stars = CacheState.empty("STARS", cfg.F, self.layout.C_c)
        # slot-ordered contents of the previous decision, 0 = empty slot
        self.slots_bs = np.zeros(self.layout.C_b, dtype=np.int64)
        self.slots_stars = np.zeros(self.layout.C_c, dtype=np.int64)
        self._draw_slot()
        return self.observe()

    def _draw_slot(self) -> None:
        self.requests = sample_request_pair(self.catalog, self.rng)
        self.channels = draw_channel_set(self.geometry, self.fading, self.rng, self.cfg.M, self.cfg.N,
                                         self._patterns)

    def content_code(self, contents) -> np.ndarray:
        """Position of each content's segment midpoint in action coordinates; 0 marks an empty slot."""
        contents = np.asarray(contents, dtype=np.int64)
        mids = self.table.midpoints() if self.frequency_aware else (np.arange(self.cfg.F) + 0.5) / self.cfg.F
        return np.where(contents > 0, 2.0 * mids[np.maximum(contents, 1) - 1] - 1.0, 0.0)

    def _slot_features(self) -> np.ndarray:
        return np.concatenate([self.content_code(list(self.requests)), self.channels.features()])

    def observe(self) -> np.ndarray:
        """External state: previous caches, current requests and CSI."""
        return np.concatenate([self.content_code(self.slots_bs), self.content_code(self.slots_stars),
                               self._slot_features()])

    def internal_state(self, action) -> np.ndarray:
        """DQN state: current requests and CSI with the continuous action as side information."""
        a = np.asarray(action, dtype=np.float64)
        return np.concatenate([self._slot_features(), a])

    # -- decoding ----------------------------------------------------------

    def decode_caches(self, action) -> tuple[np.ndarray, np.ndarray]:
        s = self.layout.slices
        a = np.asarray(action, dtype=np.float64)
        dec = (lambda phi: decode_cache_frequency_aware(phi, self.table)) if self.frequency_aware \
            else (lambda phi: decode_cache_equal_width(phi, self.cfg.F))
        return dec(to_unit(a[s["cache_b"]])), dec(to_unit(a[s["cache_c"]]))

    def _check_action(self, action) -> np.ndarray:
        a = np.asarray(action, dtype=np.float64)
        if a.shape != (self.layout.dim,):
            raise ActionShapeError(f"action has shape {a.shape}, this environment expects ({self.layout.dim},)")
        return a

    # -- evaluation --------------------------------------------------------

    def evaluate(self, action, mask=None) -> StepInfo:
        """Outcome of ``action`` in the current slot without advancing the environment."""
        info, _ = self._evaluate(self._check_action(action), mask)
        return info

    def _evaluate(self, a: np.ndarray, mask):
        cfg = self.cfg
        slots_b, slots_c = self.decode_caches(a)
        new_bs, lu_b = apply_cache_decision(self.cache_bs, slots_b)
        new_st, lu_c = apply_cache_decision(self.cache_stars, slots_c)
        tiers, lam_r = lookup_serving(self.requests, new_bs, new_st)
        decision, profile = decode_continuous_controls(a, self.layout, cfg.P_max, cfg.Pc_max, mask)
        Theta_T, Theta_R = coefficient_matrices(profile)
        stars_hits = tuple(t is Tier.STARS for t in tiers)
        mode, rates, P_w = evaluate_link(self.channels, np.diag(Theta_T), np.diag(Theta_R), decision,
                                         stars_hits, self.requests.same_content, cfg.bandwidth, self.sigma2)
        lam_u = lu_b + lu_c
        P_s = system_power(P_w, lam_r, lam_u, self.tariff)
        hits_c = sum(stars_hits)
        hits_b = sum(t is Tier.BS for t in tiers)
        qos = tuple(R >= cfg.r_qos for R in rates)
        budget = LinkBudget(mode, self.requests.same_content, rates[0], rates[1], P_w, P_s, qos[0], qos[1])
        r_ex = compute_reward(rates, cfg.r_qos, P_s, (hits_b, hits_c), self.reward_params, True)
        r_in = compute_reward(rates, cfg.r_qos, P_s, (hits_b, hits_c), self.reward_params, False)
        if self.layout.serialized_mask:
            mask = (a[self.layout.slices["mask"]] > 0).astype(np.int64)
        info = StepInfo(budget, tiers, hits_b, hits_c, lam_r, lam_u, _mask_int(mask), r_ex, r_in)
        return info, (new_bs, new_st, slots_b, slots_c)

    def _advance(self, new_caches) -> np.ndarray:
        self.cache_bs, self.cache_stars, self.slots_bs, self.slots_stars = new_caches
        self.table.record(self.requests)
        self._draw_slot()
        return self.observe()

    def step_independent(self, action):
        """Apply one independent-phase action; returns ``(next_state, reward, info)``."""
        if self.coupled:
            raise ActionShapeError("environment is configured for the coupled phase model")
        info, caches = self._evaluate(self._check_action(action), None)
        return self._advance(caches), info.reward_external, info

    def step_coupled(self, action, mask=None):
        """Apply a continuous action and a transmission-phase mask.

        Returns ``(next_state, external_reward, internal_reward, info)``.
        """
        if not self.coupled:
            raise ActionShapeError("environment is configured for the independent phase model")
        if mask is None and not self.layout.serialized_mask:
            raise ActionShapeError("coupled step needs a mask")
        info, caches = self._evaluate(self._check_action(action), mask)
        return self._advance(caches), info.reward_external, info.reward_internal, info

    def step(self, action, mask=None):
        """Uniform step returning ``(next_state, reward, info)`` for either phase model."""
        if self.coupled:
            s, r, _, info = self.step_coupled(action, mask)
            return s, r, info
        return self.step_independent(action)


def _mask_int(mask) -> int | None:
    if mask is None:
        return None
    if np.ndim(mask) == 0:
        return int(mask)
    return bits_to_mask(mask)
