"""Optimal seller revenue over finite bidder types, by linear programming.

A bidder type pairs a valuation vector with a posterior over item types.
Over a finite type space the seller's optimum across all interim-IR,
incentive-compatible selling procedures is a linear program: one allocation
variable and one conditional-price variable per (type, item type), a
truth-telling constraint for every ordered type pair, a participation
constraint per type, and expected conditional payments as the objective.
The optimal menu reads off one option per type from the solution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, SizeGuardError, SolverFailureError, UnsupportedInstanceError
from .linprog import OPTIMAL, LinearProgram, LpSolution, solve
from .market import (
    DEDUP_TOL,
    MarketInstance,
    SignalingScheme,
    enumerate_value_profiles,
    posterior_family,
)
from .mechanisms import ConditionalMenu, MenuOption

MAX_BIDDER_TYPES = 5000
# dense LP guard: rows x columns of the constraint block
MAX_LP_ENTRIES = 50_000_000


@dataclass(frozen=True)
class BidderType:
    """One point of the finite type space: values, posterior, probability."""

    values: np.ndarray
    posterior: np.ndarray
    prob: float

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        posterior = np.asarray(self.posterior, dtype=float)
        if values.shape != posterior.shape:
            raise InputError("values and posterior must have equal length")
        if not self.prob > 0:
            raise InputError("bidder types must have positive probability")
        values.setflags(write=False)
        posterior.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "posterior", posterior)
        object.__setattr__(self, "prob", float(self.prob))


@dataclass(frozen=True)
class OptimalResult:
    """LP optimum and the menu extracted from it (one option per type)."""

    revenue: float
    menu: ConditionalMenu
    lp_status: str
    types: tuple[BidderType, ...]

    def type_rows(self) -> list[tuple[np.ndarray, np.ndarray, float]]:
        """Rows in the shape `menu_revenue_exact` expects."""
        return [(t.values, t.posterior, t.prob) for t in self.types]


def enumerate_bidder_types(
    inst: MarketInstance,
    scheme: SignalingScheme,
    tol: float = DEDUP_TOL,
) -> list[BidderType]:
    """Cross product of discrete value profiles and induced posteriors.

    Profiles are lexicographic in the per-type supports, posteriors keep
    signal order; the pairing enumerates profiles first, posteriors within.
    Zero-probability profiles are pruned.  Continuous valuations are not
    enumerable: callers holding an equal-revenue law must use the Monte
    Carlo estimators instead.
    """
    if not inst.all_discrete():
        raise UnsupportedInstanceError(
            "optimal-revenue enumeration needs discrete valuations; "
            "use the Monte Carlo revenue estimators for continuous laws"
        )
    if scheme.n != inst.n:
        raise InputError("scheme and instance disagree on the item-type count")
    profiles, weights = enumerate_value_profiles(inst.valuations)
    family = posterior_family(scheme, inst.prior, tol)
    count = int((weights > 0).sum()) * len(family)
    if count > MAX_BIDDER_TYPES:
        raise SizeGuardError(f"{count} bidder types exceed the limit of {MAX_BIDDER_TYPES}")
    types: list[BidderType] = []
    for v, pv in zip(profiles, weights):
        if pv <= 0.0:
            continue
        for post, q in family.members():
            types.append(BidderType(values=v, posterior=post, prob=pv * q))
    return types


def _var_slices(t: int, n: int) -> tuple[slice, slice]:
    """Variable layout: per-type blocks, allocations first, then prices."""
    base = 2 * n * t
    return slice(base, base + n), slice(base + n, base + 2 * n)


def build_revenue_lp(types: list[BidderType], n: int) -> LinearProgram:
    """Revenue-maximization LP over an explicit type space.

    Variables: z_i(t) in [0,1] and c_i(t) >= 0 for each type t and item
    type i.  One truth-telling row per ordered pair (t, t'), one
    participation row per t, and expected payments as the objective.
    """
    if not types:
        raise InputError("need at least one bidder type")
    T = len(types)
    nv = 2 * n * T
    rows = T * T  # T(T-1) incentive rows + T participation rows
    if rows * nv > MAX_LP_ENTRIES:
        raise SizeGuardError(f"LP of {rows} rows x {nv} vars exceeds the dense-tableau budget")

    objective = np.zeros(nv)
    for t, bt in enumerate(types):
        _, c_slice = _var_slices(t, n)
        objective[c_slice] = bt.prob * bt.posterior

    a = np.zeros((rows, nv))
    r = 0
    # truth-telling: type t must prefer its own option to any other type's
    for t, bt in enumerate(types):
        zt, ct = _var_slices(t, n)
        gain = bt.posterior * bt.values
        for s in range(T):
            if s == t:
                continue
            zs, cs = _var_slices(s, n)
            a[r, zt] += gain
            a[r, ct] -= bt.posterior
            a[r, zs] -= gain
            a[r, cs] += bt.posterior
            r += 1
    # participation: each type's own option is worth at least zero
    for t, bt in enumerate(types):
        zt, ct = _var_slices(t, n)
        a[r, zt] = bt.posterior * bt.values
        a[r, ct] = -bt.posterior
        r += 1

    senses = (">=",) * rows
    rhs = np.zeros(rows)
    bounds: list[tuple[float, float]] = []
    for _ in range(T):
        bounds.extend([(0.0, 1.0)] * n)
        bounds.extend([(0.0, float("inf"))] * n)
    return LinearProgram(objective=objective, a=a, senses=senses, rhs=rhs, bounds=tuple(bounds))


def menu_from_solution(x: np.ndarray, num_types: int, n: int) -> ConditionalMenu:
    """One menu option per type; clips solver fuzz back into the box."""
    options = []
    for t in range(num_types):
        z_slice, c_slice = _var_slices(t, n)
        z = np.clip(x[z_slice], 0.0, 1.0)
        c = np.maximum(x[c_slice], 0.0)
        options.append(MenuOption(alloc=z, price=c))
    return ConditionalMenu(tuple(options))


def optimal_revenue(
    inst: MarketInstance,
    scheme: SignalingScheme,
    dedup_tol: float = DEDUP_TOL,
    lp_tol: float = 1e-9,
) -> OptimalResult:
    """Enumerate types, solve the LP, and extract the optimal menu."""
    types = enumerate_bidder_types(inst, scheme, dedup_tol)
    lp = build_revenue_lp(types, inst.n)
    solution: LpSolution = solve(lp, tol=lp_tol)
    if solution.status != OPTIMAL:
        raise SolverFailureError(
            f"revenue LP ended with status {solution.status!r}: {solution.message}"
        )
    menu = menu_from_solution(solution.x, len(types), inst.n)
    return OptimalResult(
        revenue=float(solution.objective),
        menu=menu,
        lp_status=solution.status,
        types=tuple(types),
    )
