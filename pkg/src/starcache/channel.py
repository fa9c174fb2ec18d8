"""Rician block-fading channels with distance-based path loss.

Coordinates are in metres. The surface lies in the plane ``y = stars_pos[1]``
with its elements arranged along the x axis; the BS is on the reflection side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    pass


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class FadingParams:
    rho0: float = db_to_linear(-30.0)
    vartheta: float = 2.0
    epsilon_rice: float = db_to_linear(3.0)

    def __post_init__(self):
        if self.rho0 <= 0 or self.vartheta < 0 or self.epsilon_rice < 0:
            raise ValueError(f"invalid fading parameters {self}")

    def path_gain(self, d) -> np.ndarray:
        """Large-scale power gain ``rho0 / d**vartheta``."""
        return self.rho0 / np.asarray(d, dtype=np.float64) ** self.vartheta


@dataclass(frozen=True)
class Geometry:
    bs_pos: np.ndarray
    stars_pos: np.ndarray
    user_T: np.ndarray
    user_R: np.ndarray
    radius: float = 3.0

    def __post_init__(self):
        for name in ("bs_pos", "stars_pos", "user_T", "user_R"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        y0 = self.stars_pos[1]
        if not (self.user_T[1] > y0 > self.user_R[1]):
            raise GeometryError("T-user and R-user must sit on opposite sides of the surface")
        if self.bs_pos[1] >= y0:
            raise GeometryError("BS must be on the reflection side of the surface")

    @classmethod
    def random_users(cls, rng: np.random.Generator, bs_pos=(150.0, 0.0, 15.0),
                     stars_pos=(0.0, 150.0, 5.0), radius: float = 3.0,
                     user_height: float = 0.0) -> "Geometry":
        """Drop one user uniformly in each half of the ground disc around the surface."""
        stars_pos = np.asarray(stars_pos, dtype=np.float64)
        r = radius * np.sqrt(rng.uniform(size=2))
        phi = rng.uniform(0.0, np.pi, size=2)
        users = []
        for k, side in enumerate((1.0, -1.0)):
            # keep a sliver off the surface plane so the side is unambiguous
            dy = side * max(r[k] * np.sin(phi[k]), 1e-3)
            users.append(np.array([stars_pos[0] + r[k] * np.cos(phi[k]), stars_pos[1] + dy, user_height]))
        return cls(np.asarray(bs_pos, dtype=np.float64), stars_pos, users[0], users[1], radius)

    @property
    def d_bs_stars(self) -> float:
        return float(np.linalg.norm(self.stars_pos - self.bs_pos))

    @property
    def d_stars_T(self) -> float:
        return float(np.linalg.norm(self.user_T - self.stars_pos))

    @property
    def d_stars_R(self) -> float:
        return float(np.linalg.norm(self.user_R - self.stars_pos))


def ula_response(n: int, direction: np.ndarray, axis=(1.0, 0.0, 0.0)) -> np.ndarray:
    """Half-wavelength ULA response ``exp(j*pi*i*cos(angle to axis))``."""
    u = np.asarray(direction, dtype=np.float64)
    u = u / np.linalg.norm(u)
    return np.exp(1j * np.pi * np.arange(n) * float(u @ np.asarray(axis)))


def rician_draw(rows: int, cols: int, d: float, params: FadingParams, rng: np.random.Generator,
                los: np.ndarray | None = None) -> np.ndarray:
    """One Rician realisation of a ``rows x cols`` link at distance ``d``.

    ``los`` is the unit-modulus line-of-sight pattern (all ones when omitted).
    The LoS/NLoS weights ``sqrt(eps/(1+eps))`` and ``sqrt(1/(1+eps))`` split the
    mean power ``rho0/d**vartheta`` between the two components.
    """
    if not d > 0:
        raise GeometryError(f"link distance must be positive, got {d}")
    if los is None:
        los = 1.0
    nlos = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)
    eps = params.epsilon_rice
    if np.isinf(eps):
        w_los, w_nlos = 1.0, 0.0
    else:
        w_los, w_nlos = np.sqrt(eps / (1.0 + eps)), np.sqrt(1.0 / (1.0 + eps))
    return np.sqrt(params.path_gain(d)) * (w_los * los + w_nlos * nlos)


@dataclass(frozen=True)
class ChannelSet:
    """One slot of CSI.

    ``G_b`` is N x M (BS to surface), ``h_T``/``h_R`` are length-N element-to-user
    vectors and ``hd_T``/``hd_R`` the controller-to-user scalars. ``amplitude``
    holds the large-scale amplitudes (G, T, R) used to normalise observations.
    """

    G_b: np.ndarray
    h_T: np.ndarray
    h_R: np.ndarray
    hd_T: complex
    hd_R: complex
    amplitude: tuple = field(default=(1.0, 1.0, 1.0), compare=False)

    @property
    def N(self) -> int:
        return self.G_b.shape[0]

    @property
    def M(self) -> int:
        return self.G_b.shape[1]

    def h(self, user: int) -> np.ndarray:
        return self.h_T if user == 0 else self.h_R

    def hd(self, user: int) -> complex:
        return self.hd_T if user == 0 else self.hd_R

    def features(self) -> np.ndarray:
        """Real/imag split of all links, each scaled by its large-scale amplitude."""
        a_g, a_t, a_r = self.amplitude
        z = np.concatenate([
            self.G_b.ravel() / a_g,
            self.h_T / a_t,
            self.h_R / a_r,
            [self.hd_T / a_t, self.hd_R / a_r],
        ])
        return np.concatenate([z.real, z.imag])


def link_patterns(geometry: Geometry, M: int, N: int):
    """Deterministic LoS patterns and link distances (BS-surface, surface-T, surface-R)."""
    g = geometry
    a_bs = ula_response(M, g.stars_pos - g.bs_pos)
    a_in = ula_response(N, g.bs_pos - g.stars_pos)
    los = (np.outer(a_in, a_bs.conj()),
           ula_response(N, g.user_T - g.stars_pos),
           ula_response(N, g.user_R - g.stars_pos))
    dist = (g.d_bs_stars, g.d_stars_T, g.d_stars_R)
    for d in dist:
        if not d > 0:
            raise GeometryError("coincident nodes")
    return los, dist


def draw_channel_set(geometry: Geometry, params: FadingParams, rng: np.random.Generator,
                     M: int, N: int, patterns=None) -> ChannelSet:
    """Draw every link once for the given geometry.

    ``patterns`` may carry the output of :func:`link_patterns` to skip
    recomputing the geometry-only terms.
    """
    (los_G, los_T, los_R), (d_g, d_t, d_r) = patterns or link_patterns(geometry, M, N)
    G = rician_draw(N, M, d_g, params, rng, los_G)
    h_T = rician_draw(N, 1, d_t, params, rng, los_T[:, None])[:, 0]
    h_R = rician_draw(N, 1, d_r, params, rng, los_R[:, None])[:, 0]
    # the controller antenna sits on the surface, so it shares the user distances
    hd_T = complex(rician_draw(1, 1, d_t, params, rng)[0, 0])
    hd_R = complex(rician_draw(1, 1, d_r, params, rng)[0, 0])
    amp = tuple(float(np.sqrt(params.path_gain(d))) for d in (d_g, d_t, d_r))
    return ChannelSet(G, h_T, h_R, hd_T, hd_R, amp)
