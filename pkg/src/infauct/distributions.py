"""Valuation distributions.

Two families cover every market in this package: the equal-revenue
distribution, a heavy tail under which every posted price earns the same
expected revenue, and finite discrete distributions.  Sampling is an
inverse-CDF transform of an externally supplied uniform draw, so all
randomness is owned by the caller's generator and a fixed seed always
yields the same value stream.

All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import run_blocks
from .errors import InputError

PROB_SUM_TOL = 1e-12

# Largest count x width uniform panel drawn in one shot by the tail checker.
_PANEL_CHUNK = 1 << 22


@dataclass(frozen=True)
class EqualRevenueDist:
    """Heavy-tailed law on [scale, inf) with cdf(x) = 1 - scale/x.

    A posted price p >= scale sells with probability scale/p, so the
    expected revenue is `scale` at every price in the support.  The mean is
    infinite: estimators must only aggregate bounded functionals such as
    price times an acceptance indicator, never a raw average of draws.
    """

    scale: float = 1.0

    def __post_init__(self) -> None:
        if not (isinstance(self.scale, (int, float)) and math.isfinite(self.scale) and self.scale > 0):
            raise InputError(f"equal-revenue scale must be positive and finite, got {self.scale!r}")
        object.__setattr__(self, "scale", float(self.scale))


@dataclass(frozen=True)
class DiscreteDist:
    """Finite distribution over distinct non-negative values, sorted ascending."""

    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        probs = tuple(float(p) for p in self.probs)
        if len(values) == 0:
            raise InputError("discrete distribution needs at least one value")
        if len(values) != len(probs):
            raise InputError("values and probs must have equal length")
        for v in values:
            if not math.isfinite(v) or v < 0:
                raise InputError(f"discrete values must be non-negative reals, got {v}")
        for a, b in zip(values, values[1:]):
            if not a < b:
                raise InputError("discrete values must be distinct and sorted ascending")
        for p in probs:
            if not math.isfinite(p) or p < 0:
                raise InputError(f"probabilities must be non-negative, got {p}")
        if abs(sum(probs) - 1.0) > PROB_SUM_TOL:
            raise InputError(f"probabilities must sum to 1 within {PROB_SUM_TOL}, got {sum(probs)}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)


ValuationDist = EqualRevenueDist | DiscreteDist


def er_cdf(dist: EqualRevenueDist, x: float) -> float:
    """P[X <= x]; zero below the support, 1 - scale/x above it."""
    if x <= 0:
        return 0.0
    return max(0.0, 1.0 - dist.scale / x)


def er_quantile(dist: EqualRevenueDist, u: float) -> float:
    """Inverse CDF: scale / (1 - u) for u in [0, 1)."""
    if not 0.0 <= u < 1.0:
        raise InputError(f"quantile level must lie in [0, 1), got {u}")
    return dist.scale / (1.0 - u)


def er_truncated_mean(dist: EqualRevenueDist, cap: float) -> float:
    """E[min(X, cap)] = scale * (1 + log(cap / scale)) for cap >= scale."""
    if not cap >= dist.scale:
        raise InputError(f"truncation cap {cap} is below the support minimum {dist.scale}")
    return dist.scale * (1.0 + math.log(cap / dist.scale))


def sample(dist: ValuationDist, u: float) -> float:
    """Deterministic inverse-CDF transform of one uniform draw u in [0, 1)."""
    if not 0.0 <= u < 1.0:
        raise InputError(f"uniform draw must lie in [0, 1), got {u}")
    if isinstance(dist, EqualRevenueDist):
        return er_quantile(dist, u)
    cum = np.cumsum(dist.probs)
    idx = int(np.searchsorted(cum, u, side="right"))
    return dist.values[min(idx, len(dist.values) - 1)]


def sample_array(dist: ValuationDist, u: np.ndarray) -> np.ndarray:
    """Vectorized `sample` over a uniform array."""
    u = np.asarray(u, dtype=float)
    if isinstance(dist, EqualRevenueDist):
        return dist.scale / (1.0 - u)
    cum = np.cumsum(dist.probs)
    idx = np.searchsorted(cum, u, side="right")
    np.clip(idx, 0, len(dist.values) - 1, out=idx)
    return np.asarray(dist.values, dtype=float)[idx]


def sale_probability(dist: ValuationDist, price: float) -> float:
    """P[V >= price]; a bidder indifferent at the posted price buys."""
    if price <= 0:
        return 1.0
    if isinstance(dist, EqualRevenueDist):
        return 1.0 if price <= dist.scale else dist.scale / price
    return float(sum(p for v, p in zip(dist.values, dist.probs) if v >= price))


@dataclass(frozen=True)
class ErMeanTailStats:
    """Empirical tail behaviour of the mean of n iid standard-scale draws."""

    n: int
    trials: int
    p_half: float
    tail: dict[float, float]


def er_mean_tail_check(
    n: int,
    trials: int,
    seed: int,
    tail_prices: tuple[float, ...] | None = None,
    workers: int | None = None,
) -> ErMeanTailStats:
    """Estimate P[mean of n ER draws >= log(n)/2] and tail frequencies.

    `p_half` is the empirical frequency of the sample mean exceeding
    log(n)/2.  `tail[P]` is the frequency of the mean reaching price P; the
    default price grid is {6, 12, 24} times log(n), which brackets the
    regime where the tail is bounded by 9/P.
    """
    if n < 2:
        raise InputError(f"need n >= 2 draws per trial, got {n}")
    if tail_prices is None:
        tail_prices = tuple(mult * math.log(n) for mult in (6.0, 12.0, 24.0))
    prices = np.asarray(tail_prices, dtype=float)
    half = math.log(n) / 2.0

    rows_per_chunk = max(1, _PANEL_CHUNK // n)

    def block(rng: np.random.Generator, count: int) -> tuple[int, np.ndarray, int]:
        hits_half = 0
        hits = np.zeros(len(prices), dtype=np.int64)
        done = 0
        while done < count:
            rows = min(rows_per_chunk, count - done)
            u = rng.random((rows, n))
            means = (1.0 / (1.0 - u)).mean(axis=1)
            hits_half += int((means >= half).sum())
            hits += (means[:, None] >= prices[None, :]).sum(axis=0)
            done += rows
        return hits_half, hits, count

    parts = run_blocks(trials, seed, block, workers=workers)
    total = sum(p[2] for p in parts)
    half_hits = sum(p[0] for p in parts)
    tail_hits = np.zeros(len(prices), dtype=np.int64)
    for p in parts:
        tail_hits += p[1]
    tail = {float(price): float(h) / total for price, h in zip(prices, tail_hits)}
    return ErMeanTailStats(n=n, trials=total, p_half=half_hits / total, tail=tail)
