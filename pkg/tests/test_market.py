import json

import numpy as np
import pytest

from infauct import (
    DiscreteDist,
    EqualRevenueDist,
    Garbling,
    InputError,
    MarketInstance,
    SignalingScheme,
    compose,
    full_revelation_scheme,
    identity_garbling,
    load_scenario,
    parse_scenario,
    posterior_family,
    posterior_of,
    scenario_dict,
    signal_marginals,
    uninformative_scheme,
)
from infauct.market import enumerate_value_profiles


def example3_parts(eps=0.0):
    from infauct import build_example3

    return build_example3(eps)


def grouped_scheme(m):
    """Group-revealing scheme over n = m*m types."""
    n = m * m
    like = np.zeros((m, n))
    for i in range(n):
        like[i // m, i] = 1.0
    return SignalingScheme(like)


def test_posterior_of_group_scheme():
    scheme = grouped_scheme(2)
    prior = np.full(4, 0.25)
    post = posterior_of(scheme, prior, 0)
    assert np.allclose(post, [0.5, 0.5, 0.0, 0.0])


def test_posterior_of_uninformative_is_prior():
    prior = np.array([0.2, 0.3, 0.5])
    post = posterior_of(uninformative_scheme(3), prior, 0)
    assert np.allclose(post, prior)


def test_posterior_of_pooling_signal():
    inst, scheme = example3_parts(0.0)
    post = posterior_of(scheme, inst.prior, 1)
    assert np.allclose(post, [0.5, 0.5])


def test_posterior_of_zero_marginal_errors():
    scheme = SignalingScheme(np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InputError):
        posterior_of(scheme, np.array([0.5, 0.5]), 1)


def test_signal_marginals():
    from infauct.experiments import Example3Spec

    inst, _ = example3_parts(0.0)
    raw = Example3Spec(0.0).raw_scheme()
    assert np.allclose(signal_marginals(raw, inst.prior), [0.5, 0.5])
    prior = np.array([0.1, 0.2, 0.7])
    assert np.allclose(signal_marginals(full_revelation_scheme(3), prior), prior)
    assert np.allclose(signal_marginals(uninformative_scheme(3), prior), [1.0])


def test_compose_identity_is_exact():
    _, scheme = example3_parts(0.0)
    composed = compose(identity_garbling(scheme.num_signals), scheme)
    assert np.array_equal(composed.likelihood, scheme.likelihood)


def test_compose_eps_garbling_dummy_row():
    inst, scheme = example3_parts(0.14)
    # the dummy signal fires at the garbling rate for both item types
    assert np.allclose(scheme.likelihood[2], [0.14, 0.14])
    sums = scheme.likelihood.sum(axis=0)
    assert np.allclose(sums, 1.0, atol=1e-12)


def test_compose_collapse_to_uninformative():
    _, scheme = example3_parts(0.0)
    crush = Garbling(np.ones((1, scheme.num_signals)))
    composed = compose(crush, scheme)
    assert np.allclose(composed.likelihood, np.ones((1, 2)))


def test_compose_dimension_mismatch():
    _, scheme = example3_parts(0.0)
    with pytest.raises(InputError):
        compose(identity_garbling(scheme.num_signals + 1), scheme)


def test_posterior_family_eps_garbling():
    inst, scheme = example3_parts(0.14)
    family = posterior_family(scheme, inst.prior)
    assert len(family) == 3
    members = family.members()
    assert np.allclose(members[0][0], [1.0, 0.0])
    assert members[0][1] == pytest.approx(0.43, abs=1e-12)
    assert np.allclose(members[1][0], [0.5, 0.5])
    assert members[1][1] == pytest.approx(0.43, abs=1e-12)
    assert np.allclose(members[2][0], [0.75, 0.25])
    assert members[2][1] == pytest.approx(0.14, abs=1e-12)


def test_posterior_family_full_revelation():
    prior = np.array([0.75, 0.25])
    family = posterior_family(full_revelation_scheme(2), prior)
    assert len(family) == 2
    assert np.allclose(family.posteriors, np.eye(2))
    assert np.allclose(family.marginals, prior)


def test_posterior_family_merges_duplicate_rows():
    like = np.array([[0.3, 0.3], [0.3, 0.3], [0.4, 0.4]])
    family = posterior_family(SignalingScheme(like), np.array([0.6, 0.4]))
    assert len(family) == 1
    assert family.marginals[0] == pytest.approx(1.0)


def test_posterior_family_drops_zero_marginal_rows():
    like = np.array([[1.0, 1.0], [0.0, 0.0]])
    family = posterior_family(SignalingScheme(like), np.array([0.5, 0.5]))
    assert len(family) == 1


def test_bayes_plausibility_random_schemes():
    rng = np.random.default_rng(42)
    for _ in range(40):
        n = int(rng.integers(2, 6))
        s = int(rng.integers(1, 7))
        like = rng.uniform(0.0, 1.0, size=(s, n)) + 1e-3
        like /= like.sum(axis=0, keepdims=True)
        prior = rng.uniform(0.05, 1.0, size=n)
        prior /= prior.sum()
        scheme = SignalingScheme(like)
        family = posterior_family(scheme, prior)
        mix = family.posteriors.T @ family.marginals
        assert np.abs(mix - prior).max() <= 1e-10


def test_market_instance_validation():
    with pytest.raises(InputError):
        MarketInstance(prior=np.array([0.5, 0.6]), valuations=(EqualRevenueDist(), EqualRevenueDist()))
    with pytest.raises(InputError):
        MarketInstance(prior=np.array([0.5, 0.5]), valuations=(EqualRevenueDist(),))
    with pytest.raises(InputError):
        SignalingScheme(np.array([[0.5, 0.2], [0.4, 0.8]]))


def test_enumerate_value_profiles_order_and_weights():
    d1 = DiscreteDist(values=(1.0, 2.0), probs=(0.25, 0.75))
    d2 = DiscreteDist(values=(5.0, 7.0), probs=(0.5, 0.5))
    values, weights = enumerate_value_profiles((d1, d2))
    assert values.tolist() == [[1, 5], [1, 7], [2, 5], [2, 7]]
    assert np.allclose(weights, [0.125, 0.125, 0.375, 0.375])
    assert weights.sum() == pytest.approx(1.0)


def test_scenario_round_trip(tmp_path):
    from infauct import build_example3
    from infauct.experiments import Example3Spec, example3_scenario

    data = example3_scenario(0.14)
    inst, scheme = parse_scenario(data)
    built_inst, built_scheme = build_example3(0.14)
    assert np.allclose(inst.prior, built_inst.prior)
    assert np.allclose(scheme.likelihood, built_scheme.likelihood)

    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(data))
    inst2, scheme2 = load_scenario(path)
    assert np.allclose(scheme2.likelihood, scheme.likelihood)

    spec = Example3Spec(0.14)
    rebuilt = scenario_dict(inst, spec.raw_scheme(), spec.garbling())
    assert rebuilt["garbling"] == data["garbling"]


def test_scenario_validation_errors(tmp_path):
    with pytest.raises(InputError):
        parse_scenario({"n": 2})
    with pytest.raises(InputError):
        parse_scenario(
            {
                "n": 3,
                "prior": [0.5, 0.5],
                "valuations": [{"type": "er", "scale": 1.0}] * 2,
                "signals": {"likelihood": [[1.0, 1.0]]},
            }
        )
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    with pytest.raises(InputError):
        load_scenario(bad)
    with pytest.raises(InputError):
        load_scenario(tmp_path / "missing.json")
