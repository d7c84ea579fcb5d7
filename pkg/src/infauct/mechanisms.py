"""Selling mechanisms and revenue evaluation.

Four families are supported.  Per-type posted prices reveal the type first
and then quote a type-specific price.  A bundle price reveals nothing and
quotes one price.  A partition mechanism groups the types, reveals only the
realized group (through its posted price), and the bidder conditions his
posterior on that group before accepting.  Menus of (allocation vector,
conditional price vector) options let the bidder commit to one option, after
which the type is revealed, the option's price for that type is paid whether
or not the item is allocated, and the item is allocated with the stated
probability.

Monte Carlo estimators share one trial sampler (item type from the prior,
then the signal, then the full valuation panel) and accumulate per RNG
block, merging in block order, so a fixed seed yields the same estimate for
any worker count.  Partition mechanisms are evaluated by their sequential
game semantics, not through a menu encoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._rng import merge_mean_stderr, run_blocks
from .distributions import sale_probability, sample_array
from .errors import InputError, SizeGuardError
from .market import (
    MarketInstance,
    SignalingScheme,
    enumerate_value_profiles,
    posterior_matrix,
    signal_marginals,
)

# Near-ties within this absolute slack are grouped before tie-breaking, and
# participation tolerates the same slack below zero.  LP-extracted menus make
# their incentive constraints tight only up to solver residuals, so an exact
# comparison would flip coin-level noise into finite revenue errors.
BEST_RESPONSE_ATOL = 1e-9

# Bundle acceptance is enumerated exactly on discrete instances up to this
# many item types; beyond it, Monte Carlo.
EXACT_BUNDLE_MAX_TYPES = 12

# Dense dyadic menus get huge fast: levels L means 2**L types and 2**L - 1
# options.  Larger runs must use the structured fast path in `experiments`.
DYADIC_MENU_MAX_LEVELS = 12

DYADIC_PRICE_UNIT = math.log(2.0) / 8.0


@dataclass(frozen=True)
class MenuOption:
    """Allocation vector z in [0,1]^n and conditional price vector c >= 0.

    c[i] is owed when the realized type is i, allocation or not.
    """

    alloc: np.ndarray
    price: np.ndarray

    def __post_init__(self) -> None:
        alloc = np.array(self.alloc, dtype=float)
        price = np.array(self.price, dtype=float)
        if alloc.ndim != 1 or price.shape != alloc.shape:
            raise InputError("allocation and price vectors must be 1-D with equal length")
        if not np.all(np.isfinite(alloc)) or not np.all(np.isfinite(price)):
            raise InputError("menu option entries must be finite")
        if np.any(alloc < 0) or np.any(alloc > 1):
            raise InputError("allocation entries must lie in [0, 1]")
        if np.any(price < 0):
            raise InputError("conditional prices must be non-negative")
        alloc.setflags(write=False)
        price.setflags(write=False)
        object.__setattr__(self, "alloc", alloc)
        object.__setattr__(self, "price", price)

    @property
    def n(self) -> int:
        return int(self.alloc.shape[0])


@dataclass(frozen=True)
class ConditionalMenu:
    """Ordered options; an empty menu forces the bidder to abstain."""

    options: tuple[MenuOption, ...]

    def __post_init__(self) -> None:
        options = tuple(self.options)
        if options:
            n = options[0].n
            for opt in options:
                if opt.n != n:
                    raise InputError("menu options disagree on the item-type count")
        object.__setattr__(self, "options", options)

    def __len__(self) -> int:
        return len(self.options)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Stacked (K, n) allocation and price matrices."""
        if not self.options:
            raise InputError("empty menu has no option arrays")
        return (
            np.vstack([o.alloc for o in self.options]),
            np.vstack([o.price for o in self.options]),
        )


@dataclass(frozen=True)
class TypePricing:
    """One posted price per item type; the type is revealed before the offer."""

    prices: np.ndarray

    def __post_init__(self) -> None:
        prices = np.array(self.prices, dtype=float)
        if prices.ndim != 1 or np.any(prices < 0) or not np.all(np.isfinite(prices)):
            raise InputError("type prices must be a vector of non-negative finite reals")
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)


@dataclass(frozen=True)
class Bundling:
    """A single posted price with no information revealed by the seller."""

    price: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.price) and self.price >= 0):
            raise InputError(f"bundle price must be a non-negative real, got {self.price}")
        object.__setattr__(self, "price", float(self.price))


@dataclass(frozen=True)
class PartitionMechanism:
    """Disjoint non-empty groups covering all types, one price per group."""

    groups: tuple[tuple[int, ...], ...]
    prices: np.ndarray

    def __post_init__(self) -> None:
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        prices = np.array(self.prices, dtype=float)
        if len(groups) == 0:
            raise InputError("partition needs at least one group")
        if prices.ndim != 1 or prices.shape[0] != len(groups):
            raise InputError("need exactly one price per group")
        if np.any(prices < 0) or not np.all(np.isfinite(prices)):
            raise InputError("group prices must be non-negative finite reals")
        seen: set[int] = set()
        for g in groups:
            if not g:
                raise InputError("partition groups must be non-empty")
            for i in g:
                if i in seen:
                    raise InputError(f"item type {i} appears in two groups")
                seen.add(i)
        n = max(seen) + 1
        if seen != set(range(n)):
            raise InputError("partition groups must cover item types 0..n-1")
        prices.setflags(write=False)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "prices", prices)

    @property
    def n(self) -> int:
        return sum(len(g) for g in self.groups)

    def group_of(self) -> np.ndarray:
        """Lookup vector: item type -> group index."""
        out = np.empty(self.n, dtype=np.int64)
        for r, g in enumerate(self.groups):
            for i in g:
                out[i] = r
        return out


# ---------------------------------------------------------------------------
# Bidder behaviour


def option_utility(option: MenuOption, values: np.ndarray, posterior: np.ndarray) -> float:
    """Interim expected utility: sum_i posterior[i] * (z_i v_i - c_i)."""
    values = np.asarray(values, dtype=float)
    posterior = np.asarray(posterior, dtype=float)
    if values.shape != posterior.shape or values.shape[0] != option.n:
        raise InputError("dimension mismatch between option, values, and posterior")
    return float(posterior @ (option.alloc * values - option.price))


def expected_payment(option: MenuOption, posterior: np.ndarray) -> float:
    return float(np.asarray(posterior, dtype=float) @ option.price)


def _choose(util: np.ndarray, pay: np.ndarray, atol: float) -> np.ndarray:
    """Vectorized option choice; -1 encodes abstention.

    Rows are trials, columns are options.  Options within `atol` of the row
    maximum are tied; ties break toward higher expected payment, then lower
    option index.  A row abstains when its best utility is below -atol.
    """
    umax = util.max(axis=1)
    eligible = util >= (umax - atol)[:, None]
    pay_masked = np.where(eligible, pay, -np.inf)
    best_pay = pay_masked.max(axis=1)
    choice = (eligible & (pay == best_pay[:, None])).argmax(axis=1)
    return np.where(umax >= -atol, choice, -1)


def best_response(
    menu: ConditionalMenu,
    values: np.ndarray,
    posterior: np.ndarray,
    atol: float = BEST_RESPONSE_ATOL,
) -> int | None:
    """Utility-maximizing option index, or None to abstain.

    The bidder participates whenever some option reaches utility -atol or
    better (indifference at zero counts as participation); near-tied options
    go to the seller's favourite: higher expected payment, then lower index.
    """
    if len(menu) == 0:
        return None
    alloc, price = menu.arrays()
    values = np.asarray(values, dtype=float)
    posterior = np.asarray(posterior, dtype=float)
    if values.shape[0] != alloc.shape[1] or posterior.shape[0] != alloc.shape[1]:
        raise InputError("dimension mismatch between menu, values, and posterior")
    util = alloc @ (posterior * values) - price @ posterior
    pay = price @ posterior
    choice = int(_choose(util[None, :], pay[None, :], atol)[0])
    return None if choice < 0 else choice


def menu_revenue_exact(
    menu: ConditionalMenu,
    types: list[tuple[np.ndarray, np.ndarray, float]],
    atol: float = BEST_RESPONSE_ATOL,
) -> float:
    """Expected revenue over an explicit finite type space.

    `types` holds (valuation vector, posterior, probability) rows whose
    probabilities sum to 1.  Each type best-responds; abstention pays zero.
    """
    total_prob = sum(t[2] for t in types)
    if abs(total_prob - 1.0) > 1e-9:
        raise InputError(f"type probabilities must sum to 1, got {total_prob}")
    revenue = 0.0
    for values, posterior, prob in types:
        k = best_response(menu, values, posterior, atol=atol)
        if k is not None:
            revenue += prob * expected_payment(menu.options[k], posterior)
    return revenue


# ---------------------------------------------------------------------------
# Shared trial sampler


def sample_trials(
    inst: MarketInstance,
    scheme: SignalingScheme,
    rng: np.random.Generator,
    count: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw (item types, signals, valuation panel) for one block.

    Stream order is fixed: item uniforms, signal uniforms, then a
    (count, n) uniform panel transformed column-wise by inverse CDF.
    """
    if scheme.n != inst.n:
        raise InputError("scheme and instance disagree on the item-type count")
    prior_cum = np.cumsum(inst.prior)
    items = np.searchsorted(prior_cum, rng.random(count), side="right")
    np.clip(items, 0, inst.n - 1, out=items)

    like_cum = np.cumsum(scheme.likelihood, axis=0)
    u = rng.random(count)
    signals = (like_cum[:, items] <= u[None, :]).sum(axis=0)
    np.clip(signals, 0, scheme.num_signals - 1, out=signals)

    panel = rng.random((count, inst.n))
    values = np.empty((count, inst.n))
    for i, dist in enumerate(inst.valuations):
        values[:, i] = sample_array(dist, panel[:, i])
    return items, signals, values


# ---------------------------------------------------------------------------
# Revenue evaluation


def pricing_revenue(inst: MarketInstance, pricing: TypePricing) -> float:
    """Exact expected revenue of per-type posted prices.

    The type is revealed, so the signal is irrelevant; a bidder indifferent
    at the posted price buys.
    """
    if pricing.prices.shape[0] != inst.n:
        raise InputError("need one price per item type")
    total = 0.0
    for i, dist in enumerate(inst.valuations):
        p = float(pricing.prices[i])
        total += float(inst.prior[i]) * p * sale_probability(dist, p)
    return total


def bundling_revenue(
    inst: MarketInstance,
    scheme: SignalingScheme,
    price: float,
    trials: int,
    seed: int,
    workers: int | None = None,
    stream: int = 0,
) -> tuple[float, float]:
    """(estimate, stderr) for a single bundle price.

    The bidder accepts iff his posterior expected value reaches the price.
    Small all-discrete instances are enumerated exactly (stderr 0).
    """
    if price < 0:
        raise InputError("bundle price must be non-negative")
    if inst.all_discrete() and inst.n <= EXACT_BUNDLE_MAX_TYPES:
        posts = posterior_matrix(scheme, inst.prior)
        marg = signal_marginals(scheme, inst.prior)
        profiles, weights = enumerate_value_profiles(inst.valuations)
        accept = profiles @ posts.T >= price  # (profiles, signals)
        return price * float(weights @ (accept @ marg)), 0.0

    posts = posterior_matrix(scheme, inst.prior)

    def block(rng: np.random.Generator, count: int) -> tuple[float, float, int]:
        _, signals, values = sample_trials(inst, scheme, rng, count)
        accept = (posts[signals] * values).sum(axis=1) >= price
        pay = price * accept
        return float(pay.sum()), float((pay * pay).sum()), count

    return merge_mean_stderr(run_blocks(trials, seed, block, stream=stream, workers=workers))


def partition_revenue(
    inst: MarketInstance,
    scheme: SignalingScheme,
    mech: PartitionMechanism,
    trials: int,
    seed: int,
    workers: int | None = None,
    stream: int = 0,
) -> tuple[float, float]:
    """(estimate, stderr) for a partition mechanism.

    Per trial the bidder sees his signal and the offered group price, infers
    the type lies in that group, conditions his posterior on it, and accepts
    iff the conditional expected value reaches the price.
    """
    if mech.n != inst.n:
        raise InputError("partition and instance disagree on the item-type count")
    posts = posterior_matrix(scheme, inst.prior)
    group_of = mech.group_of()
    mask = np.zeros((len(mech.groups), inst.n))
    for r, g in enumerate(mech.groups):
        mask[r, list(g)] = 1.0
    prices = mech.prices

    def block(rng: np.random.Generator, count: int) -> tuple[float, float, int]:
        items, signals, values = sample_trials(inst, scheme, rng, count)
        post = posts[signals]
        grp = group_of[items]
        gmask = mask[grp]
        # accept iff conditional mean >= price; written mass-weighted to
        # avoid dividing by the in-group posterior mass
        num = (post * gmask * values).sum(axis=1)
        den = (post * gmask).sum(axis=1)
        pay = prices[grp] * (num >= prices[grp] * den)
        return float(pay.sum()), float((pay * pay).sum()), count

    return merge_mean_stderr(run_blocks(trials, seed, block, stream=stream, workers=workers))


def menu_revenue_mc(
    menu: ConditionalMenu,
    inst: MarketInstance,
    scheme: SignalingScheme,
    trials: int,
    seed: int,
    workers: int | None = None,
    atol: float = BEST_RESPONSE_ATOL,
    stream: int = 0,
) -> tuple[float, float]:
    """(estimate, stderr) of realized menu payments.

    Per trial the bidder best-responds against his posterior and the seller
    collects the chosen option's price for the realized item type.
    """
    if len(menu) == 0:
        return 0.0, 0.0
    alloc, price = menu.arrays()
    if alloc.shape[1] != inst.n:
        raise InputError("menu and instance disagree on the item-type count")
    posts = posterior_matrix(scheme, inst.prior)
    exp_pay = posts @ price.T  # (signals, options)

    def block(rng: np.random.Generator, count: int) -> tuple[float, float, int]:
        items, signals, values = sample_trials(inst, scheme, rng, count)
        util = (values * posts[signals]) @ alloc.T - exp_pay[signals]
        choice = _choose(util, exp_pay[signals], atol)
        pay = np.where(choice >= 0, price[np.maximum(choice, 0), items], 0.0)
        return float(pay.sum()), float((pay * pay).sum()), count

    return merge_mean_stderr(run_blocks(trials, seed, block, stream=stream, workers=workers))


def dyadic_menu(levels: int) -> ConditionalMenu:
    """Menu of aligned dyadic block options over n = 2**levels item types.

    Option (k, j) allocates exactly on the j-th aligned block of size 2**k
    and charges k * log(2)/8 on every realized type, so the payment does not
    depend on the allocation.  Options are ordered by k ascending, then by
    block index; there are 2**levels - 1 of them.
    """
    if levels < 1:
        raise InputError(f"need at least one level, got {levels}")
    if levels > DYADIC_MENU_MAX_LEVELS:
        raise SizeGuardError(
            f"dense dyadic menu is limited to {DYADIC_MENU_MAX_LEVELS} levels; "
            "use the structured fast path for larger runs"
        )
    n = 2**levels
    options = []
    for k in range(1, levels + 1):
        width = 2**k
        charge = np.full(n, DYADIC_PRICE_UNIT * k)
        for j in range(2 ** (levels - k)):
            z = np.zeros(n)
            z[j * width : (j + 1) * width] = 1.0
            options.append(MenuOption(alloc=z, price=charge))
    return ConditionalMenu(tuple(options))


# ---------------------------------------------------------------------------
# JSON mechanism descriptions


def mechanism_to_dict(mech) -> dict:
    if isinstance(mech, ConditionalMenu):
        return {
            "kind": "menu",
            "options": [
                {"z": [float(x) for x in o.alloc], "c": [float(x) for x in o.price]}
                for o in mech.options
            ],
        }
    if isinstance(mech, PartitionMechanism):
        return {
            "kind": "partition",
            "groups": [list(g) for g in mech.groups],
            "prices": [float(p) for p in mech.prices],
        }
    if isinstance(mech, TypePricing):
        return {"kind": "pricing", "prices": [float(p) for p in mech.prices]}
    if isinstance(mech, Bundling):
        return {"kind": "bundle", "price": mech.price}
    raise InputError(f"cannot serialize mechanism of type {type(mech).__name__}")


def mechanism_from_dict(data: dict):
    try:
        kind = data["kind"]
    except (TypeError, KeyError):
        raise InputError("mechanism description must carry a 'kind' field") from None
    if kind == "menu":
        return ConditionalMenu(
            tuple(
                MenuOption(alloc=np.asarray(o["z"], dtype=float), price=np.asarray(o["c"], dtype=float))
                for o in data["options"]
            )
        )
    if kind == "partition":
        return PartitionMechanism(
            groups=tuple(tuple(g) for g in data["groups"]),
            prices=np.asarray(data["prices"], dtype=float),
        )
    if kind == "pricing":
        return TypePricing(prices=np.asarray(data["prices"], dtype=float))
    if kind == "bundle":
        return Bundling(price=float(data["price"]))
    raise InputError(f"unknown mechanism kind {kind!r}")
