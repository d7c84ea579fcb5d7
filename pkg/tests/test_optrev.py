import numpy as np
import pytest

from infauct import (
    ConditionalMenu,
    DiscreteDist,
    EqualRevenueDist,
    MarketInstance,
    MenuOption,
    SizeGuardError,
    UnsupportedInstanceError,
    build_example3,
    build_revenue_lp,
    enumerate_bidder_types,
    full_revelation_scheme,
    menu_revenue_exact,
    optimal_revenue,
    uninformative_scheme,
)
from infauct.optrev import BidderType


def test_type_counts_for_garbled_two_type_market():
    inst, scheme = build_example3(0.0)
    assert len(enumerate_bidder_types(inst, scheme)) == 8
    inst, scheme = build_example3(0.14)
    assert len(enumerate_bidder_types(inst, scheme)) == 12


def test_single_type_enumeration():
    inst = MarketInstance(
        prior=np.array([1.0]),
        valuations=(DiscreteDist(values=(5.0,), probs=(1.0,)),),
    )
    types = enumerate_bidder_types(inst, uninformative_scheme(1))
    assert len(types) == 1
    assert types[0].prob == pytest.approx(1.0)


def test_probabilities_sum_to_one_and_zero_profiles_pruned():
    inst = MarketInstance(
        prior=np.array([0.5, 0.5]),
        valuations=(
            DiscreteDist(values=(1.0, 2.0), probs=(0.0, 1.0)),
            DiscreteDist(values=(1.0, 3.0), probs=(0.5, 0.5)),
        ),
    )
    types = enumerate_bidder_types(inst, full_revelation_scheme(2))
    assert sum(t.prob for t in types) == pytest.approx(1.0)
    assert len(types) == 4  # 2 surviving profiles x 2 posteriors


def test_continuous_instance_rejected():
    inst = MarketInstance(prior=np.array([1.0]), valuations=(EqualRevenueDist(),))
    with pytest.raises(UnsupportedInstanceError):
        enumerate_bidder_types(inst, uninformative_scheme(1))


def test_lp_shape():
    inst, scheme = build_example3(0.0)
    types = enumerate_bidder_types(inst, scheme)
    lp = build_revenue_lp(types, inst.n)
    T, n = len(types), inst.n
    assert lp.num_vars == 2 * n * T
    assert lp.num_constraints == T * (T - 1) + T
    assert all(s == ">=" for s in lp.senses)
    assert np.all(lp.rhs == 0.0)
    # allocations live in [0,1], prices in [0, inf)
    assert lp.bounds[0] == (0.0, 1.0)
    assert lp.bounds[n] == (0.0, float("inf"))


def test_full_surplus_extraction_single_type():
    inst = MarketInstance(
        prior=np.array([1.0]),
        valuations=(DiscreteDist(values=(5.0,), probs=(1.0,)),),
    )
    result = optimal_revenue(inst, uninformative_scheme(1))
    assert result.revenue == pytest.approx(5.0, abs=1e-9)
    opt = result.menu.options[0]
    assert opt.alloc[0] == pytest.approx(1.0, abs=1e-9)
    assert opt.price[0] == pytest.approx(5.0, abs=1e-9)


def test_two_known_values_post_low_price():
    # posted-price oracle: price 1 sells to both (revenue 1), price 2 sells
    # to half (revenue 1); price 1 weakly wins and the LP cannot beat it
    inst = MarketInstance(
        prior=np.array([1.0]),
        valuations=(DiscreteDist(values=(1.0, 2.0), probs=(0.5, 0.5)),),
    )
    result = optimal_revenue(inst, uninformative_scheme(1))
    assert result.revenue == pytest.approx(1.0, abs=1e-8)


def test_known_optimal_revenues_and_strict_reversal():
    inst, scheme = build_example3(0.0)
    full = optimal_revenue(inst, scheme)
    assert full.revenue == pytest.approx(1.1062, abs=5e-4)

    inst, scheme = build_example3(0.14)
    garbled = optimal_revenue(inst, scheme)
    assert garbled.revenue == pytest.approx(1.0991, abs=5e-4)
    assert garbled.revenue < full.revenue


def test_round_trip_menu_reproduces_objective():
    for eps in (0.0, 0.14):
        inst, scheme = build_example3(eps)
        result = optimal_revenue(inst, scheme)
        replay = menu_revenue_exact(result.menu, result.type_rows())
        assert abs(replay - result.revenue) <= 1e-6


def test_dominates_posted_price_menus():
    inst, scheme = build_example3(0.14)
    result = optimal_revenue(inst, scheme)
    rows = result.type_rows()
    for price in (0.5, 1.0, 1.5, 2.1):
        menu = ConditionalMenu(
            (MenuOption(alloc=np.ones(2), price=np.full(2, price)),)
        )
        assert menu_revenue_exact(menu, rows) <= result.revenue + 1e-9


def test_type_space_guard():
    size = 5001
    weights = np.full(size, 1.0 / size)
    weights /= weights.sum()
    big = DiscreteDist(values=tuple(float(i) for i in range(size)), probs=tuple(weights))
    inst = MarketInstance(prior=np.array([1.0]), valuations=(big,))
    with pytest.raises(SizeGuardError):
        enumerate_bidder_types(inst, uninformative_scheme(1))


def test_bidder_type_validation():
    with pytest.raises(Exception):
        BidderType(values=np.array([1.0]), posterior=np.array([0.5, 0.5]), prob=0.5)
    with pytest.raises(Exception):
        BidderType(values=np.array([1.0]), posterior=np.array([1.0]), prob=0.0)
