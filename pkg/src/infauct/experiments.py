"""Scenario builders, experiment runners, and reporting.

Example 1 ("grouped heavy tails"): n = m^2 types in m groups of m; the
valuation for a type in group k is equal-revenue with scale 1/k, the prior
is uniform, and the provider reveals the group.  Per-type pricing and any
single bundle price both stall, while the group partition priced at
log(m)/(2k) does not.

Example 2 ("dyadic granularity"): n = 2^m types with iid standard
equal-revenue valuations and uniform prior.  The provider first draws a
size indicator k (probability 1/(k(k+1)) for k < m, remainder 1/m at m),
then reveals which aligned dyadic block of size 2^k contains the type.
Every partition mechanism is stuck at a constant, but the dyadic block
menu is not.

Example 3 ("garbled two-type market"): two types with prior (3/4, 1/4) and
iid values {1, 2.1}; the provider's raw signal pools the types and an
epsilon-garbling replaces it with a dummy symbol at rate epsilon.  The LP
optimum is not monotone in the amount of information released.

All runners draw through named seed streams (see _rng), so reports are
reproducible for any worker count.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._rng import merge_mean_stderr, run_blocks
from .distributions import (
    DiscreteDist,
    EqualRevenueDist,
    ErMeanTailStats,
    er_mean_tail_check,
)
from .errors import InputError, SizeGuardError
from .market import (
    Garbling,
    MarketInstance,
    SignalingScheme,
    compose,
    posterior_matrix,
)
from .mechanisms import (
    BEST_RESPONSE_ATOL,
    DYADIC_PRICE_UNIT,
    PartitionMechanism,
    _choose,
    dyadic_menu,
    partition_revenue,
    sample_trials,
)
from .optrev import OptimalResult, optimal_revenue

# named RNG streams so each estimator inside one run is independent
_STREAM_BUNDLE = 1
_STREAM_PARTITION = 2
_STREAM_MENU = 3
_STREAM_AGREEMENT = 4
_STREAM_BEST_PARTITION = 5
_STREAM_DYADIC_PARTITION_BASE = 16

PARTITION_REVENUE_BOUND = 9.0 + 6.0 * math.log(2.0)

# price grid for the dyadic partition evaluation; spans well past the
# regime where heavy-tail acceptance stops paying
DYADIC_PRICE_GRID = (0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0)

BEST_PARTITION_MAX_TYPES = 10
EXAMPLE2_DENSE_MAX_M = 12


# ---------------------------------------------------------------------------
# Example builders


@dataclass(frozen=True)
class Example1Spec:
    """Grouped heavy-tail market: m groups of m types, scale 1/k in group k."""

    m: int

    def __post_init__(self) -> None:
        if self.m < 2:
            raise InputError(f"need m >= 2, got {self.m}")

    @property
    def n(self) -> int:
        return self.m * self.m

    def group_prices(self) -> np.ndarray:
        return np.array([math.log(self.m) / (2.0 * k) for k in range(1, self.m + 1)])


def build_example1(m: int) -> tuple[MarketInstance, SignalingScheme, PartitionMechanism]:
    """Instance, group-revealing scheme, and the log(m)/(2k) group partition."""
    spec = Example1Spec(m)
    n = spec.n
    prior = np.full(n, 1.0 / n)
    valuations = tuple(EqualRevenueDist(scale=1.0 / (i // m + 1)) for i in range(n))
    likelihood = np.zeros((m, n))
    for i in range(n):
        likelihood[i // m, i] = 1.0
    groups = tuple(tuple(range(k * m, (k + 1) * m)) for k in range(m))
    mech = PartitionMechanism(groups=groups, prices=spec.group_prices())
    return MarketInstance(prior=prior, valuations=valuations), SignalingScheme(likelihood), mech


def size_indicator_probs(m: int) -> np.ndarray:
    """P[k] for k = 1..m: 1/(k(k+1)) below m, remainder 1/m at m."""
    if m < 1:
        raise InputError(f"need m >= 1, got {m}")
    probs = np.array([1.0 / (k * (k + 1)) for k in range(1, m)] + [1.0 / m])
    return probs


@dataclass(frozen=True)
class Example2Spec:
    """Dyadic granularity market over n = 2^m iid heavy-tail types."""

    m: int

    def __post_init__(self) -> None:
        if self.m < 1:
            raise InputError(f"need m >= 1, got {self.m}")
        if self.m > 24:
            raise SizeGuardError(f"dyadic markets are limited to m <= 24, got {self.m}")

    @property
    def n(self) -> int:
        return 2**self.m

    def indicator_probs(self) -> np.ndarray:
        return size_indicator_probs(self.m)


def build_example2(m: int) -> tuple[MarketInstance, SignalingScheme]:
    """Instance plus the dense compound scheme with one signal per (k, block).

    The dense likelihood has sum_k 2^(m-k) rows over 2^m columns, so
    materialization is capped at m <= 12; larger runs go through the
    structured fast path in `run_example2`, which never builds the matrix.
    """
    spec = Example2Spec(m)
    if m > EXAMPLE2_DENSE_MAX_M:
        raise SizeGuardError(
            f"dense scheme materialization is limited to m <= {EXAMPLE2_DENSE_MAX_M}"
        )
    n = spec.n
    probs = spec.indicator_probs()
    rows = []
    for k in range(1, m + 1):
        width = 2**k
        for j in range(2 ** (m - k)):
            row = np.zeros(n)
            row[j * width : (j + 1) * width] = probs[k - 1]
            rows.append(row)
    inst = MarketInstance(prior=np.full(n, 1.0 / n), valuations=(EqualRevenueDist(),) * n)
    return inst, SignalingScheme(np.vstack(rows))


@dataclass(frozen=True)
class Example3Spec:
    """Two-type market with a pooling raw signal and an epsilon-garbling."""

    eps: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.eps <= 1.0:
            raise InputError(f"garbling rate must lie in [0, 1], got {self.eps}")

    prior: tuple[float, float] = (0.75, 0.25)
    low: float = 1.0
    high: float = 2.1

    def raw_scheme(self) -> SignalingScheme:
        # raw signal: type 1 -> x1 w.p. 2/3 else x2; type 2 -> x2 surely
        return SignalingScheme(np.array([[2.0 / 3.0, 0.0], [1.0 / 3.0, 1.0]]))

    def garbling(self) -> Garbling:
        e = self.eps
        return Garbling(np.array([[1.0 - e, 0.0], [0.0, 1.0 - e], [e, e]]))


def build_example3(eps: float = 0.0) -> tuple[MarketInstance, SignalingScheme]:
    """Instance and released scheme; eps = 0 reproduces full raw revelation."""
    spec = Example3Spec(eps)
    value_dist = DiscreteDist(values=(spec.low, spec.high), probs=(0.5, 0.5))
    inst = MarketInstance(prior=np.array(spec.prior), valuations=(value_dist, value_dist))
    return inst, compose(spec.garbling(), spec.raw_scheme())


def example3_scenario(eps: float = 0.0) -> dict:
    """Scenario-file form of the garbled two-type market."""
    spec = Example3Spec(eps)
    data = {
        "n": 2,
        "prior": list(spec.prior),
        "valuations": [
            {"type": "discrete", "values": [spec.low, spec.high], "probs": [0.5, 0.5]}
        ]
        * 2,
        "signals": {"likelihood": [[2.0 / 3.0, 0.0], [1.0 / 3.0, 1.0]]},
    }
    if eps > 0.0:
        data["garbling"] = [[1.0 - eps, 0.0], [0.0, 1.0 - eps], [eps, eps]]
    return data


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class ReportRow:
    mechanism: str
    revenue: float
    stderr: float


@dataclass
class RunReport:
    """Per-mechanism revenue estimates for one seeded run.

    The CSV form carries only seed-determined fields, so identical seeds and
    flags produce byte-identical files; wall time lives on the object only.
    """

    example: int
    m: int
    n: int
    trials: int
    seed: int
    rows: tuple[ReportRow, ...]
    extras: dict[str, float] = field(default_factory=dict)
    wall_time: float = 0.0

    def row(self, mechanism: str) -> ReportRow:
        for r in self.rows:
            if r.mechanism == mechanism:
                return r
        raise KeyError(mechanism)

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["mechanism", "m", "n", "trials", "seed", "revenue", "stderr"])
        for r in self.rows:
            writer.writerow(
                [r.mechanism, self.m, self.n, self.trials, self.seed,
                 f"{r.revenue:.6f}", f"{r.stderr:.6f}"]
            )
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.csv_text())


# ---------------------------------------------------------------------------
# Example 1 runner


def _example1_group_means(m: int, trials: int, seed: int, workers: int | None) -> np.ndarray:
    """Per-trial posterior expected bundle value, drawn lazily by group.

    Only the signalled group's m valuations are sampled; the bidder's
    expected value given the group signal is the in-group mean over scale.
    """

    def block(rng: np.random.Generator, count: int) -> np.ndarray:
        ks = rng.integers(1, m + 1, size=count)
        raw = 1.0 / (1.0 - rng.random((count, m)))
        return raw.mean(axis=1) / ks

    parts = run_blocks(trials, seed, block, stream=_STREAM_BUNDLE, workers=workers)
    return np.concatenate(parts)


def best_price_on_sample(values: np.ndarray, cap: float) -> tuple[float, float, float]:
    """(price, revenue, stderr) maximizing p * P-hat[value >= p] over [0, cap].

    Between consecutive order statistics the curve rises linearly in p, so
    the continuum optimum over [0, cap] sits at a sample point or at the cap
    itself; scanning those candidates finds it exactly.  The cap matters
    under heavy tails: the empirical revenue curve never decays, so an
    uncapped search would chase lone extreme draws whose revenue estimate is
    all variance.
    """
    if values.size == 0:
        raise InputError("empty sample")
    if cap <= 0:
        raise InputError("price cap must be positive")
    n = values.size
    ordered = np.sort(values)[::-1]
    candidates = np.minimum(ordered, cap)
    revenue = candidates * (np.arange(1, n + 1) / n)
    best = int(np.argmax(revenue))
    price = float(candidates[best])
    q = float((values >= price).sum()) / n
    stderr = price * math.sqrt(q * (1.0 - q) / n)
    return price, float(revenue[best]), stderr


def run_example1(m: int, trials: int, seed: int, workers: int | None = None) -> RunReport:
    """Closed-form pricing, sample-optimal bundling, and the group partition.

    Report rows: item_pricing (exact, stderr 0), bundling (best single price
    on the sampled acceptance curve), partition, and the ratio of partition
    revenue to the better simple mechanism (delta-method stderr).
    """
    started = time.perf_counter()
    inst, scheme, mech = build_example1(m)

    pricing_rev = sum(1.0 / k for k in range(1, m + 1)) / m

    # heavy-tail acceptance stops paying past ~6 log n, so cap the search there
    means = _example1_group_means(m, trials, seed, workers)
    price_cap = 6.0 * math.log(inst.n)
    bundle_price, bundle_rev, bundle_se = best_price_on_sample(means, price_cap)

    part_rev, part_se = partition_revenue(
        inst, scheme, mech, trials, seed, workers=workers, stream=_STREAM_PARTITION
    )

    if pricing_rev >= bundle_rev:
        denom, denom_se = pricing_rev, 0.0
    else:
        denom, denom_se = bundle_rev, bundle_se
    ratio = part_rev / denom
    ratio_se = abs(ratio) * math.sqrt(
        (part_se / part_rev) ** 2 + (denom_se / denom) ** 2
    ) if part_rev > 0 else 0.0

    rows = (
        ReportRow("item_pricing", pricing_rev, 0.0),
        ReportRow("bundling", bundle_rev, bundle_se),
        ReportRow("partition", part_rev, part_se),
        ReportRow("partition_over_best_simple", ratio, ratio_se),
    )
    extras = {"bundle_price": bundle_price}
    return RunReport(
        example=1, m=m, n=inst.n, trials=trials, seed=seed, rows=rows,
        extras=extras, wall_time=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# Example 2 runner


def _draw_size_indicators(rng: np.random.Generator, count: int, probs_cum: np.ndarray) -> np.ndarray:
    ks = np.searchsorted(probs_cum, rng.random(count), side="right") + 1
    np.clip(ks, 1, len(probs_cum), out=ks)
    return ks


def _dyadic_best_options(
    block_values: np.ndarray, k: int, atol: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Best dyadic-menu response given the signalled block's values.

    `block_values` is (trials, 2^k).  Returns (best utility, chosen level,
    chosen window index inside the block).  Only levels 1..k can matter:
    coarser options covering the block cost strictly more for the same
    expected allocation, and disjoint options burn their price for nothing.
    The tie rule mirrors the menu evaluator: levels within `atol` of the
    best group together, the highest level (highest payment) wins, and
    within the level the lowest window index wins.
    """
    cnt, width = block_values.shape
    assert width == 2**k
    scale = 1.0 / width
    utils = np.empty((cnt, k))
    window_utils: list[np.ndarray] = []
    for level in range(1, k + 1):
        w = 2**level
        sums = block_values.reshape(cnt, width // w, w).sum(axis=2)
        wu = sums * scale - DYADIC_PRICE_UNIT * level
        window_utils.append(wu)
        utils[:, level - 1] = wu.max(axis=1)
    umax = utils.max(axis=1)
    eligible = utils >= (umax - atol)[:, None]
    level_star = k - np.argmax(eligible[:, ::-1], axis=1)  # highest eligible level
    window_star = np.empty(cnt, dtype=np.int64)
    for level in range(1, k + 1):
        sel = level_star == level
        if not sel.any():
            continue
        wu = window_utils[level - 1][sel]
        window_star[sel] = np.argmax(wu >= (umax[sel] - atol)[:, None], axis=1)
    return umax, level_star, window_star


def _dyadic_menu_mc(
    m: int, trials: int, seed: int, workers: int | None, atol: float = BEST_RESPONSE_ATOL
) -> tuple[float, float]:
    """Dyadic-menu revenue without materializing the menu.

    Payments are constant across item types within an option, so a trial
    only needs the size indicator and the signalled block's 2^k values.
    """
    probs_cum = np.cumsum(size_indicator_probs(m))

    def block(rng: np.random.Generator, count: int) -> tuple[float, float, int]:
        ks = _draw_size_indicators(rng, count, probs_cum)
        pay_sum = 0.0
        pay_sq = 0.0
        for k in np.unique(ks):
            sel = np.flatnonzero(ks == k)
            values = 1.0 / (1.0 - rng.random((sel.size, 2**k)))
            umax, level_star, _ = _dyadic_best_options(values, int(k), atol)
            pay = DYADIC_PRICE_UNIT * level_star * (umax >= -atol)
            pay_sum += float(pay.sum())
            pay_sq += float((pay * pay).sum())
        return pay_sum, pay_sq, count

    return merge_mean_stderr(
        run_blocks(trials, seed, block, stream=_STREAM_MENU, workers=workers)
    )


def _dyadic_partition_mc(
    m: int,
    level: int,
    trials: int,
    seed: int,
    workers: int | None,
    grid: tuple[float, ...] = DYADIC_PRICE_GRID,
) -> tuple[float, float, float]:
    """(best revenue, its stderr, best price) for the level-`level` partition.

    The bidder's conditional posterior given signal block and revealed group
    is uniform over their intersection, an aligned block of 2^min(k, level)
    types; only those values are drawn.  All grid prices share the draws.
    """
    probs_cum = np.cumsum(size_indicator_probs(m))
    prices = np.asarray(grid)

    def block(rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray, int]:
        pay_sum = np.zeros(len(prices))
        pay_sq = np.zeros(len(prices))
        ks = _draw_size_indicators(rng, count, probs_cum)
        for k in np.unique(ks):
            sel = int((ks == k).sum())
            width = 2 ** min(int(k), level)
            means = (1.0 / (1.0 - rng.random((sel, width)))).mean(axis=1)
            accept = means[:, None] >= prices[None, :]
            hits = accept.sum(axis=0)
            pay_sum += prices * hits
            pay_sq += prices * prices * hits
        return pay_sum, pay_sq, count

    parts = run_blocks(trials, seed, block, stream=_STREAM_DYADIC_PARTITION_BASE + level, workers=workers)
    total = sum(p[2] for p in parts)
    s = np.zeros(len(prices))
    s2 = np.zeros(len(prices))
    for p in parts:
        s += p[0]
        s2 += p[1]
    mean = s / total
    var = np.maximum(0.0, (s2 - total * mean * mean) / (total - 1))
    se = np.sqrt(var / total)
    best = int(np.argmax(mean))
    return float(mean[best]), float(se[best]), float(prices[best])


def _fastpath_agreement(
    m: int, trials: int, seed: int, workers: int | None, atol: float = BEST_RESPONSE_ATOL
) -> float:
    """Fraction of trials where the structured best response picks the same
    option as full-menu enumeration.  Dense menu, so m stays small."""
    menu = dyadic_menu(m)
    alloc, price = menu.arrays()
    n = 2**m
    probs_cum = np.cumsum(size_indicator_probs(m))
    offsets = np.zeros(m + 2, dtype=np.int64)
    for k in range(1, m + 1):
        offsets[k + 1] = offsets[k] + 2 ** (m - k)
    cols = np.arange(n)

    def block(rng: np.random.Generator, count: int) -> tuple[int, int]:
        ks = _draw_size_indicators(rng, count, probs_cum)
        items = rng.integers(0, n, size=count)
        values = 1.0 / (1.0 - rng.random((count, n)))
        blocks = items >> ks  # aligned block index at level k

        # naive side: build the block-uniform posterior and run the
        # production menu chooser over every option
        posts = ((cols[None, :] >> ks[:, None]) == blocks[:, None]) / (2.0 ** ks)[:, None]
        util = (values * posts) @ alloc.T - posts @ price.T
        pay = posts @ price.T
        naive = _choose(util, pay, atol)

        # structured side, per size-indicator group
        fast = np.empty(count, dtype=np.int64)
        for k in np.unique(ks):
            sel = np.flatnonzero(ks == k)
            width = 2**k
            starts = blocks[sel] * width
            window = values[sel[:, None], starts[:, None] + np.arange(width)[None, :]]
            umax, level_star, window_star = _dyadic_best_options(window, int(k), atol)
            global_window = (starts >> level_star) + window_star
            fast[sel] = np.where(
                umax >= -atol, offsets[level_star] + global_window, -1
            )
        return int((fast == naive).sum()), count

    parts = run_blocks(trials, seed, block, stream=_STREAM_AGREEMENT, workers=workers)
    total = sum(p[1] for p in parts)
    agree = sum(p[0] for p in parts)
    return agree / total


def run_example2(m: int, trials: int, seed: int, workers: int | None = None) -> RunReport:
    """Dyadic-menu revenue, every dyadic partition against the constant
    bound, and (for m <= 6) fast-vs-naive best-response agreement.

    Report rows: dyadic_menu, then dyadic_partition_k01..k{m} (each the best
    price on a fixed grid).  The agreement fraction and the partition bound
    live in `extras`.
    """
    if m < 2:
        raise InputError(f"need m >= 2, got {m}")
    started = time.perf_counter()
    menu_rev, menu_se = _dyadic_menu_mc(m, trials, seed, workers)
    rows = [ReportRow("dyadic_menu", menu_rev, menu_se)]
    extras: dict[str, float] = {"partition_bound": PARTITION_REVENUE_BOUND}
    within_bound = True
    for level in range(1, m + 1):
        rev, se, price = _dyadic_partition_mc(m, level, trials, seed, workers)
        rows.append(ReportRow(f"dyadic_partition_k{level:02d}", rev, se))
        extras[f"partition_price_k{level:02d}"] = price
        within_bound &= rev <= PARTITION_REVENUE_BOUND + 3 * se
    extras["partitions_within_bound"] = float(within_bound)
    if m <= 6:
        extras["fastpath_agreement"] = _fastpath_agreement(
            m, min(trials, 10_000), seed, workers
        )
    return RunReport(
        example=2, m=m, n=2**m, trials=trials, seed=seed, rows=tuple(rows),
        extras=extras, wall_time=time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# Garbling sweep


def garble_sweep(
    eps_values, out=None
) -> list[tuple[float, float, OptimalResult]]:
    """Optimal revenue of the garbled two-type market per garbling rate.

    The rates 0 (raw revelation) and 0.14 are always included.  Results are
    exact LP values; `out`, when given, receives CSV text (epsilon,revenue).
    """
    eps_list = sorted({round(float(e), 12) for e in eps_values} | {0.0, 0.14})
    for e in eps_list:
        if not 0.0 <= e <= 1.0:
            raise InputError(f"garbling rate must lie in [0, 1], got {e}")
    results = []
    for eps in eps_list:
        inst, scheme = build_example3(eps)
        res = optimal_revenue(inst, scheme)
        results.append((eps, res.revenue, res))
    if out is not None:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["epsilon", "revenue"])
        for eps, revenue, _ in results:
            writer.writerow([f"{eps:.6f}", f"{revenue:.6f}"])
    return results


# ---------------------------------------------------------------------------
# Best partition search


def best_partition(
    inst: MarketInstance,
    scheme: SignalingScheme,
    trials: int,
    seed: int,
    workers: int | None = None,
) -> tuple[PartitionMechanism, float]:
    """Best item-type partition on a shared Monte Carlo sample.

    Every group's revenue contribution depends on that group alone, so the
    search scores each of the 2^n - 1 candidate groups on the sample
    (price optimized at the sampled acceptance-curve corners) and then picks
    the best partition by dynamic programming over subsets, which is
    equivalent to enumerating all set partitions.
    """
    n = inst.n
    if n > BEST_PARTITION_MAX_TYPES:
        raise SizeGuardError(f"partition search is limited to {BEST_PARTITION_MAX_TYPES} types")
    posts = posterior_matrix(scheme, inst.prior)

    def block(rng: np.random.Generator, count: int):
        return sample_trials(inst, scheme, rng, count)

    parts = run_blocks(trials, seed, block, stream=_STREAM_BEST_PARTITION, workers=workers)
    items = np.concatenate([p[0] for p in parts])
    signals = np.concatenate([p[1] for p in parts])
    values = np.vstack([p[2] for p in parts])
    total = items.shape[0]
    post = posts[signals]
    weighted = post * values

    num_subsets = (1 << n) - 1
    best_rev = np.zeros(num_subsets + 1)
    best_price = np.zeros(num_subsets + 1)
    masks = np.array([[float((s >> i) & 1) for i in range(n)] for s in range(num_subsets + 1)])
    for subset in range(1, num_subsets + 1):
        mask = masks[subset]
        hit = mask[items] > 0
        if not hit.any():
            continue
        num = weighted[hit] @ mask
        den = post[hit] @ mask
        cond_mean = num / den
        ordered = np.sort(cond_mean)[::-1]
        revenue = ordered * (np.arange(1, ordered.size + 1) / total)
        idx = int(np.argmax(revenue))
        best_rev[subset] = float(revenue[idx])
        best_price[subset] = float(ordered[idx])

    # dp over subsets: carve out the group containing the lowest missing type
    dp = np.full(num_subsets + 1, -np.inf)
    dp_choice = np.zeros(num_subsets + 1, dtype=np.int64)
    dp[0] = 0.0
    for mask in range(1, num_subsets + 1):
        low = mask & (-mask)
        sub = mask
        while sub:
            if sub & low:
                cand = dp[mask ^ sub] + best_rev[sub]
                if cand > dp[mask]:
                    dp[mask] = cand
                    dp_choice[mask] = sub
            sub = (sub - 1) & mask

    groups: list[tuple[int, ...]] = []
    prices: list[float] = []
    mask = num_subsets
    while mask:
        sub = int(dp_choice[mask])
        groups.append(tuple(i for i in range(n) if (sub >> i) & 1))
        prices.append(best_price[sub])
        mask ^= sub
    mech = PartitionMechanism(groups=tuple(groups), prices=np.asarray(prices))
    return mech, float(dp[num_subsets])


# ---------------------------------------------------------------------------
# Heavy-tail verification


@dataclass(frozen=True)
class TailCheck:
    price: float
    frequency: float
    bound: float
    stderr: float
    passed: bool


@dataclass(frozen=True)
class ErVerifyReport:
    n: int
    trials: int
    seed: int
    p_half: float
    p_half_stderr: float
    p_half_passed: bool
    tails: tuple[TailCheck, ...]

    @property
    def passed(self) -> bool:
        return self.p_half_passed and all(t.passed for t in self.tails)

    def lines(self) -> list[str]:
        out = [
            f"{'PASS' if self.p_half_passed else 'FAIL'} "
            f"P[mean >= log(n)/2] = {self.p_half:.4f} "
            f">= 0.5 - 3se ({0.5 - 3 * self.p_half_stderr:.4f})"
        ]
        for t in self.tails:
            out.append(
                f"{'PASS' if t.passed else 'FAIL'} "
                f"P[mean >= {t.price:.4f}] = {t.frequency:.5f} "
                f"<= 9/P + 3se ({t.bound + 3 * t.stderr:.5f})"
            )
        return out


def _binomial_se(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 1.0 / trials) / trials)


def er_verify(n: int, trials: int, seed: int, workers: int | None = None) -> ErVerifyReport:
    """Check the heavy-tail mean bounds empirically at three tail prices."""
    stats: ErMeanTailStats = er_mean_tail_check(n, trials, seed, workers=workers)
    half_se = _binomial_se(stats.p_half, stats.trials)
    tails = []
    for price, freq in sorted(stats.tail.items()):
        se = _binomial_se(freq, stats.trials)
        bound = 9.0 / price
        tails.append(
            TailCheck(price=price, frequency=freq, bound=bound, stderr=se,
                      passed=freq <= bound + 3 * se)
        )
    return ErVerifyReport(
        n=n, trials=stats.trials, seed=seed,
        p_half=stats.p_half, p_half_stderr=half_se,
        p_half_passed=stats.p_half >= 0.5 - 3 * half_se,
        tails=tuple(tails),
    )
