import math

import numpy as np
import pytest

from infauct import (
    DiscreteDist,
    EqualRevenueDist,
    InputError,
    er_cdf,
    er_mean_tail_check,
    er_quantile,
    er_truncated_mean,
    sale_probability,
    sample,
    sample_array,
)
from infauct._rng import block_rng


def test_er_cdf_examples():
    d = EqualRevenueDist(scale=1.0)
    assert er_cdf(d, 1.0) == 0.0
    assert er_cdf(d, 2.0) == 0.5
    assert er_cdf(EqualRevenueDist(scale=0.5), 0.25) == 0.0
    assert er_cdf(d, -3.0) == 0.0


def test_er_quantile_examples():
    d = EqualRevenueDist(scale=1.0)
    assert er_quantile(d, 0.0) == 1.0
    assert er_quantile(d, 0.5) == 2.0
    assert er_quantile(d, 0.9) == pytest.approx(10.0)
    with pytest.raises(InputError):
        er_quantile(d, 1.0)
    with pytest.raises(InputError):
        er_quantile(d, -0.1)


def test_quantile_cdf_inverse_on_grid():
    d = EqualRevenueDist(scale=1.7)
    for u in np.linspace(0.0, 0.999, 1000):
        assert abs(er_cdf(d, er_quantile(d, u)) - u) <= 1e-12


def test_er_truncated_mean_values():
    d = EqualRevenueDist(scale=1.0)
    assert er_truncated_mean(d, 1.0) == pytest.approx(1.0)
    assert er_truncated_mean(d, math.e) == pytest.approx(2.0)

    # independent check: quadrature of min(quantile(u), 8) over u
    cap = 8.0
    u_break = 1.0 - 1.0 / cap
    grid = np.linspace(0.0, u_break, 400_001)
    inner = np.trapezoid(1.0 / (1.0 - grid), grid)
    oracle = inner + (1.0 - u_break) * cap
    assert oracle == pytest.approx(3.0794415417, abs=1e-6)
    assert er_truncated_mean(d, cap) == pytest.approx(oracle, abs=1e-6)


def test_er_truncated_mean_monotone_and_errors():
    d = EqualRevenueDist(scale=0.5)
    caps = np.linspace(0.5, 40.0, 50)
    means = [er_truncated_mean(d, c) for c in caps]
    assert all(b >= a - 1e-12 for a, b in zip(means, means[1:]))
    with pytest.raises(InputError):
        er_truncated_mean(d, 0.25)


def test_sample_examples():
    assert sample(EqualRevenueDist(scale=1.0), 0.5) == 2.0
    point = DiscreteDist(values=(1.0,), probs=(1.0,))
    for u in (0.0, 0.3, 0.999):
        assert sample(point, u) == 1.0


def test_sample_discrete_mean_against_analytic():
    dist = DiscreteDist(values=(1.0, 2.1), probs=(0.5, 0.5))
    analytic_mean = 0.5 * 1.0 + 0.5 * 2.1
    rng = np.random.default_rng(20240)
    draws = sample_array(dist, rng.random(100_000))
    se = draws.std(ddof=1) / math.sqrt(draws.size)
    assert abs(draws.mean() - analytic_mean) <= 3 * se


def test_sample_discrete_frequencies():
    dist = DiscreteDist(values=(0.5, 1.0, 4.0), probs=(0.2, 0.3, 0.5))
    rng = np.random.default_rng(99)
    draws = sample_array(dist, rng.random(100_000))
    for value, p in zip(dist.values, dist.probs):
        freq = float((draws == value).mean())
        se = math.sqrt(p * (1 - p) / draws.size)
        assert abs(freq - p) <= 3 * se


def test_identical_seed_identical_stream():
    dist = EqualRevenueDist(scale=2.0)
    a = sample_array(dist, block_rng(7, 0).random(1000))
    b = sample_array(dist, block_rng(7, 0).random(1000))
    assert np.array_equal(a, b)

    s1 = er_mean_tail_check(10, 5000, seed=3)
    s2 = er_mean_tail_check(10, 5000, seed=3)
    assert s1 == s2


def test_validation_errors():
    with pytest.raises(InputError):
        EqualRevenueDist(scale=0.0)
    with pytest.raises(InputError):
        DiscreteDist(values=(2.0, 1.0), probs=(0.5, 0.5))
    with pytest.raises(InputError):
        DiscreteDist(values=(1.0, 1.0), probs=(0.5, 0.5))
    with pytest.raises(InputError):
        DiscreteDist(values=(1.0, 2.0), probs=(0.6, 0.6))
    with pytest.raises(InputError):
        DiscreteDist(values=(-1.0, 2.0), probs=(0.5, 0.5))


def test_sale_probability():
    er = EqualRevenueDist(scale=1.0)
    assert sale_probability(er, 0.5) == 1.0
    assert sale_probability(er, 5.0) == pytest.approx(0.2)
    disc = DiscreteDist(values=(1.0, 2.1), probs=(0.5, 0.5))
    assert sale_probability(disc, 2.1) == pytest.approx(0.5)  # indifference buys
    assert sale_probability(disc, 2.2) == 0.0
    assert sale_probability(disc, 0.0) == 1.0


def test_mean_tail_check_defaults_and_custom_prices():
    stats = er_mean_tail_check(100, 20_000, seed=11)
    expected_grid = {m * math.log(100) for m in (6.0, 12.0, 24.0)}
    assert set(stats.tail) == expected_grid
    assert 0.0 <= stats.p_half <= 1.0

    huge = er_mean_tail_check(2, 10_000, seed=5, tail_prices=(1e6,))
    freq = huge.tail[1e6]
    se = math.sqrt(max(freq * (1 - freq), 1.0 / huge.trials) / huge.trials)
    assert freq <= 1e-4 + 3 * se
