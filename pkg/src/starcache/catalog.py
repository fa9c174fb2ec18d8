"""Content catalog, Zipf popularity and cache bookkeeping.

Content indices are 1-based throughout (content 1 is the most popular).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np


class InvalidCatalogError(ValueError):
    pass


class InvalidContentError(ValueError):
    pass


class Tier(IntEnum):
    """Where a request is served from."""

    STARS = 0
    BS = 1
    REMOTE = 2


def zipf_pmf(F: int, alpha: float) -> np.ndarray:
    """Zipf probability vector ``p_f = f**-alpha / sum_chi chi**-alpha``.

    Parameters
    ----------
    F : int
        Number of contents in the catalog.
    alpha : float
        Skewness factor, ``alpha >= 0``.
    """
    if F < 1:
        raise InvalidCatalogError(f"catalog needs at least one content, got F={F}")
    if alpha < 0:
        raise InvalidCatalogError(f"Zipf skewness must be nonnegative, got {alpha}")
    w = np.arange(1, F + 1, dtype=np.float64) ** (-float(alpha))
    return w / w.sum()


@dataclass(frozen=True)
class Catalog:
    F: int
    alpha: float
    pmf: np.ndarray = field(init=False, repr=False, compare=False)
    cdf: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pmf = zipf_pmf(self.F, self.alpha)
        cdf = np.cumsum(pmf)
        cdf[-1] = 1.0
        object.__setattr__(self, "pmf", pmf)
        object.__setattr__(self, "cdf", cdf)


@dataclass(frozen=True)
class RequestPair:
    f_t: int
    f_r: int

    @property
    def same_content(self) -> bool:
        return self.f_t == self.f_r

    def __iter__(self):
        yield self.f_t
        yield self.f_r


@dataclass(frozen=True)
class PowerTariff:
    """Push power per replaced content and backhaul power per remote fetch (W)."""

    P_u: float = 0.05
    P_bh: float = 0.2

    def __post_init__(self):
        if self.P_u < 0 or self.P_bh < 0:
            raise ValueError("tariffs must be nonnegative")


def sample_request_pair(catalog: Catalog | np.ndarray, rng: np.random.Generator) -> RequestPair:
    """Two i.i.d. requests (T-user, R-user) drawn from the catalog popularity."""
    if isinstance(catalog, Catalog):
        cdf = catalog.cdf
    else:
        cdf = np.cumsum(catalog)
        cdf[-1] = 1.0
    f = np.searchsorted(cdf, rng.random(2), side="right") + 1
    f = np.minimum(f, cdf.size)
    return RequestPair(int(f[0]), int(f[1]))


@dataclass(frozen=True)
class CacheState:
    """Binary incidence vector of one node's cache."""

    node: str
    incidence: np.ndarray
    capacity: int

    def __post_init__(self):
        inc = np.asarray(self.incidence, dtype=np.int8)
        if inc.ndim != 1 or not ((inc == 0) | (inc == 1)).all():
            raise ValueError("incidence must be a binary vector")
        if inc.sum() > self.capacity:
            raise ValueError(f"{self.node} cache holds {inc.sum()} contents, capacity is {self.capacity}")
        inc.setflags(write=False)
        object.__setattr__(self, "incidence", inc)

    @classmethod
    def empty(cls, node: str, F: int, capacity: int) -> "CacheState":
        return cls(node, np.zeros(F, dtype=np.int8), capacity)

    @classmethod
    def from_contents(cls, node: str, F: int, capacity: int, contents) -> "CacheState":
        inc = np.zeros(F, dtype=np.int8)
        idx = _check_indices(contents, F)
        inc[idx - 1] = 1
        return cls(node, inc, capacity)

    @property
    def F(self) -> int:
        return self.incidence.size

    def contents(self) -> np.ndarray:
        """Sorted 1-based indices of the cached contents."""
        return np.flatnonzero(self.incidence) + 1

    def __contains__(self, f: int) -> bool:
        return 1 <= f <= self.F and bool(self.incidence[f - 1])


def _check_indices(contents, F: int) -> np.ndarray:
    idx = np.unique(np.asarray(list(contents), dtype=np.int64))
    if idx.size and (idx[0] < 1 or idx[-1] > F):
        bad = idx[(idx < 1) | (idx > F)]
        raise InvalidContentError(f"content indices {bad.tolist()} outside [1, {F}]")
    return idx


def apply_cache_decision(prev: CacheState, target) -> tuple[CacheState, int]:
    """Replace the cache contents by ``target``.

    Duplicates in ``target`` collapse to one cached copy. Returns the new state
    and the push count, the elementwise L1 distance between the old and new
    incidence vectors (so swapping one content counts 2).
    """
    idx = _check_indices(target, prev.F)
    if idx.size > prev.capacity:
        raise ValueError(f"{idx.size} distinct contents exceed {prev.node} capacity {prev.capacity}")
    inc = np.zeros(prev.F, dtype=np.int8)
    inc[idx - 1] = 1
    lam_u = int(np.abs(inc.astype(np.int64) - prev.incidence).sum())
    return CacheState(prev.node, inc, prev.capacity), lam_u


def lookup_serving(requests: RequestPair, bs: CacheState, stars: CacheState) -> tuple[tuple[Tier, Tier], int]:
    """Serving tier per request and the number of remote fetches.

    The STARS cache takes precedence over the BS cache.
    """
    tiers = []
    for f in requests:
        if f in stars:
            tiers.append(Tier.STARS)
        elif f in bs:
            tiers.append(Tier.BS)
        else:
            tiers.append(Tier.REMOTE)
    lam_r = sum(t is Tier.REMOTE for t in tiers)
    return tuple(tiers), lam_r
