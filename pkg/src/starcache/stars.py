"""Coefficient algebra of the transmitting/reflecting surface."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


class DimensionError(ValueError):
    pass


def wrap_phase(theta) -> np.ndarray:
    """Reduce phases to ``[0, 2*pi)``."""
    t = np.mod(np.asarray(theta, dtype=np.float64), TWO_PI)
    # mod can return exactly 2*pi for tiny negative inputs
    return np.where(t >= TWO_PI, 0.0, t)


@dataclass(frozen=True)
class StarsProfile:
    """Per-element transmission amplitude and T/R phases.

    The reflection amplitude is derived as ``sqrt(1 - beta_T**2)`` so energy
    conservation holds by construction.
    """

    beta_T: np.ndarray
    theta_T: np.ndarray
    theta_R: np.ndarray

    def __post_init__(self):
        for name in ("beta_T", "theta_T", "theta_R"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if not (self.beta_T.shape == self.theta_T.shape == self.theta_R.shape) or self.beta_T.ndim != 1:
            raise DimensionError("beta_T, theta_T and theta_R must be equal-length vectors")

    @property
    def N(self) -> int:
        return self.beta_T.size

    @property
    def beta_R(self) -> np.ndarray:
        return np.sqrt(np.clip(1.0 - self.beta_T**2, 0.0, None))


def coefficient_matrices(profile: StarsProfile) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal transmission and reflection coefficient matrices."""
    theta_T = np.diag(profile.beta_T * np.exp(1j * profile.theta_T))
    theta_R = np.diag(profile.beta_R * np.exp(1j * profile.theta_R))
    return theta_T, theta_R


def mask_bits(mask: int, N: int) -> np.ndarray:
    """Binary string of length N for an integer mask, element 0 is the most significant bit."""
    if not 0 <= mask < 2**N:
        raise ValueError(f"mask {mask} outside [0, 2**{N})")
    return (mask >> np.arange(N - 1, -1, -1)) & 1


def bits_to_mask(bits) -> int:
    out = 0
    for b in np.asarray(bits, dtype=np.int64):
        out = (out << 1) | int(b)
    return out


def couple_transmission_phase(theta_R, mask) -> np.ndarray:
    """Transmission phases ``theta_R + pi/2`` (bit 1) or ``theta_R - pi/2`` (bit 0).

    ``mask`` is either a bit vector of length N or an integer in ``[0, 2**N)``.
    """
    theta_R = np.asarray(theta_R, dtype=np.float64)
    if np.isscalar(mask) or np.ndim(mask) == 0:
        bits = mask_bits(int(mask), theta_R.size)
    else:
        bits = np.asarray(mask)
        if bits.shape != theta_R.shape:
            raise DimensionError(f"mask length {bits.size} does not match {theta_R.size} elements")
    return wrap_phase(theta_R + np.where(bits == 1, 0.5 * np.pi, -0.5 * np.pi))


def coupling_offset_bits(theta_T, theta_R) -> np.ndarray:
    """Recover the mask from a coupled profile (sign of the T-R phase offset)."""
    d = wrap_phase(np.asarray(theta_T) - np.asarray(theta_R))
    return (d < np.pi).astype(np.int64)


@dataclass(frozen=True)
class Violation:
    kind: str
    element: int
    value: float


def validate(profile: StarsProfile, mode: str = "independent", tol: float = 1e-9) -> list[Violation]:
    """List every constraint violation of a profile; an empty list means valid."""
    if mode not in ("independent", "coupled"):
        raise ValueError(f"unknown phase model {mode!r}")
    out = []
    for name, th in (("theta_T", profile.theta_T), ("theta_R", profile.theta_R)):
        for n in np.flatnonzero(~((th >= 0.0) & (th < TWO_PI))):
            out.append(Violation(f"phase_range:{name}", int(n), float(th[n])))
    b = profile.beta_T
    for n in np.flatnonzero(~((b >= 0.0) & (b <= 1.0))):
        out.append(Violation("amplitude_range", int(n), float(b[n])))
    energy = b**2 + profile.beta_R**2
    for n in np.flatnonzero(np.abs(energy - 1.0) > 1e-12):
        if not any(v.element == n and v.kind == "amplitude_range" for v in out):
            out.append(Violation("energy_conservation", int(n), float(energy[n])))
    if mode == "coupled":
        c = np.abs(np.cos(profile.theta_T - profile.theta_R))
        for n in np.flatnonzero(c > tol):
            out.append(Violation("coupled_phase", int(n), float(c[n])))
    return out
