"""Market model: item types, prior, signaling, posteriors, garbling.

A single item takes one of n types.  The bidder knows his valuation for
every type but not the realized type; he holds a public prior and privately
observes a signal drawn from a publicly known likelihood matrix, then
updates by Bayes' rule.  The seller knows the scheme but not the realized
signal, so she faces a distribution over posteriors.

A garbling post-processes raw signals into released ones; composing it with
a scheme is a matrix product, which is how the two-stage provider (raw
signal first, released signal second) is modelled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product as iter_product
from pathlib import Path

import numpy as np

from .distributions import DiscreteDist, EqualRevenueDist, ValuationDist
from .errors import InputError, SizeGuardError

PROB_SUM_TOL = 1e-12
POSTERIOR_SUM_TOL = 1e-10
DEDUP_TOL = 1e-9
MAX_VALUE_PROFILES = 200_000


def _frozen_array(data, name: str) -> np.ndarray:
    arr = np.array(data, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


def _check_prob_vector(vec: np.ndarray, tol: float, name: str) -> None:
    if vec.ndim != 1:
        raise InputError(f"{name} must be a vector")
    if np.any(vec < -tol):
        raise InputError(f"{name} entries must be non-negative")
    total = float(vec.sum())
    if abs(total - 1.0) > tol:
        raise InputError(f"{name} must sum to 1 within {tol}, got {total}")


def _check_column_stochastic(matrix: np.ndarray, name: str) -> None:
    if matrix.ndim != 2:
        raise InputError(f"{name} must be a matrix")
    if np.any(matrix < -PROB_SUM_TOL) or np.any(matrix > 1.0 + PROB_SUM_TOL):
        raise InputError(f"{name} entries must lie in [0, 1]")
    sums = matrix.sum(axis=0)
    if np.any(np.abs(sums - 1.0) > PROB_SUM_TOL):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise InputError(f"{name} columns must sum to 1 within {PROB_SUM_TOL} (worst off by {worst:.3g})")


@dataclass(frozen=True)
class MarketInstance:
    """Item-type count, prior over types, and one valuation law per type.

    Valuations across types are mutually independent and independent of the
    provider's signal.
    """

    prior: np.ndarray
    valuations: tuple[ValuationDist, ...]

    def __post_init__(self) -> None:
        prior = _frozen_array(self.prior, "prior")
        _check_prob_vector(prior, PROB_SUM_TOL, "prior")
        object.__setattr__(self, "prior", prior)
        vals = tuple(self.valuations)
        if len(vals) != prior.shape[0]:
            raise InputError(f"got {len(vals)} valuation laws for {prior.shape[0]} item types")
        for v in vals:
            if not isinstance(v, (EqualRevenueDist, DiscreteDist)):
                raise InputError(f"unsupported valuation law {type(v).__name__}")
        object.__setattr__(self, "valuations", vals)

    @property
    def n(self) -> int:
        return int(self.prior.shape[0])

    def all_discrete(self) -> bool:
        return all(isinstance(v, DiscreteDist) for v in self.valuations)


@dataclass(frozen=True)
class SignalingScheme:
    """Likelihood matrix: row s, column i holds P[signal s | item type i]."""

    likelihood: np.ndarray

    def __post_init__(self) -> None:
        like = _frozen_array(self.likelihood, "likelihood")
        _check_column_stochastic(like, "likelihood")
        object.__setattr__(self, "likelihood", like)

    @property
    def num_signals(self) -> int:
        return int(self.likelihood.shape[0])

    @property
    def n(self) -> int:
        return int(self.likelihood.shape[1])


@dataclass(frozen=True)
class Garbling:
    """Column-stochastic map from raw signals to released signals."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = _frozen_array(self.matrix, "garbling matrix")
        _check_column_stochastic(mat, "garbling matrix")
        object.__setattr__(self, "matrix", mat)

    @property
    def num_inputs(self) -> int:
        return int(self.matrix.shape[1])

    @property
    def num_outputs(self) -> int:
        return int(self.matrix.shape[0])


def identity_garbling(k: int) -> Garbling:
    return Garbling(np.eye(k))


def full_revelation_scheme(n: int) -> SignalingScheme:
    """One signal per item type."""
    return SignalingScheme(np.eye(n))


def uninformative_scheme(n: int) -> SignalingScheme:
    """A single signal that always realizes; the posterior stays the prior."""
    return SignalingScheme(np.ones((1, n)))


def signal_marginals(scheme: SignalingScheme, prior: np.ndarray) -> np.ndarray:
    """P[s] for every signal under the prior."""
    prior = np.asarray(prior, dtype=float)
    if prior.shape[0] != scheme.n:
        raise InputError("prior length does not match the scheme")
    return scheme.likelihood @ prior


def posterior_of(scheme: SignalingScheme, prior: np.ndarray, s: int) -> np.ndarray:
    """Bayes update of the prior after observing signal s."""
    prior = np.asarray(prior, dtype=float)
    if not 0 <= s < scheme.num_signals:
        raise InputError(f"signal index {s} out of range")
    weights = scheme.likelihood[s] * prior
    total = float(weights.sum())
    if total <= 0.0:
        raise InputError(f"signal {s} has zero marginal probability; posterior undefined")
    return weights / total


def compose(garbling: Garbling, scheme: SignalingScheme) -> SignalingScheme:
    """Scheme whose released signal is the garbling applied to the raw one."""
    if garbling.num_inputs != scheme.num_signals:
        raise InputError(
            f"garbling expects {garbling.num_inputs} input signals, scheme has {scheme.num_signals}"
        )
    return SignalingScheme(garbling.matrix @ scheme.likelihood)


@dataclass(frozen=True)
class PosteriorFamily:
    """Distinct posteriors the scheme can induce, with their probabilities."""

    posteriors: np.ndarray  # (k, n)
    marginals: np.ndarray  # (k,)

    def __post_init__(self) -> None:
        posts = _frozen_array(self.posteriors, "posteriors")
        marg = _frozen_array(self.marginals, "marginals")
        if posts.ndim != 2 or marg.ndim != 1 or posts.shape[0] != marg.shape[0]:
            raise InputError("posterior matrix and marginals disagree in shape")
        _check_prob_vector(marg, POSTERIOR_SUM_TOL, "posterior marginals")
        for row in posts:
            _check_prob_vector(row, POSTERIOR_SUM_TOL, "posterior")
        object.__setattr__(self, "posteriors", posts)
        object.__setattr__(self, "marginals", marg)

    def __len__(self) -> int:
        return int(self.marginals.shape[0])

    def members(self) -> list[tuple[np.ndarray, float]]:
        return [(self.posteriors[i], float(self.marginals[i])) for i in range(len(self))]


def posterior_family(
    scheme: SignalingScheme, prior: np.ndarray, tol: float = DEDUP_TOL
) -> PosteriorFamily:
    """All induced posteriors, deduplicated within max-norm `tol`.

    Signals with exactly zero marginal are dropped (padding rows in
    scenario files are harmless); near-identical posteriors are merged so
    that numeric drift cannot split one economic type into two.
    """
    if tol < 0:
        raise InputError("dedup tolerance must be non-negative")
    marg = signal_marginals(scheme, prior)
    reps: list[np.ndarray] = []
    mass: list[float] = []
    for s in range(scheme.num_signals):
        if marg[s] <= 0.0:
            continue
        post = posterior_of(scheme, prior, s)
        for j, rep in enumerate(reps):
            if np.max(np.abs(rep - post)) <= tol:
                mass[j] += float(marg[s])
                break
        else:
            reps.append(post)
            mass.append(float(marg[s]))
    if not reps:
        raise InputError("scheme induces no positive-probability signal")
    return PosteriorFamily(np.vstack(reps), np.asarray(mass))


def posterior_matrix(scheme: SignalingScheme, prior: np.ndarray) -> np.ndarray:
    """Posterior for every signal, one row each; zero-marginal rows fall
    back to the prior (they can never realize, but keep the matrix total)."""
    prior = np.asarray(prior, dtype=float)
    marg = signal_marginals(scheme, prior)
    posts = np.empty_like(scheme.likelihood)
    for s in range(scheme.num_signals):
        if marg[s] > 0.0:
            posts[s] = scheme.likelihood[s] * prior / marg[s]
        else:
            posts[s] = prior
    return posts


def enumerate_value_profiles(
    valuations: tuple[ValuationDist, ...], max_profiles: int = MAX_VALUE_PROFILES
) -> tuple[np.ndarray, np.ndarray]:
    """Cross product of per-type discrete supports, lexicographic order.

    Returns the (profiles, n) value matrix and the profile probabilities
    (independent across types).  Every law must be discrete.
    """
    supports: list[tuple[float, ...]] = []
    probs: list[tuple[float, ...]] = []
    count = 1
    for dist in valuations:
        if not isinstance(dist, DiscreteDist):
            raise InputError("profile enumeration requires discrete valuation laws")
        supports.append(dist.values)
        probs.append(dist.probs)
        count *= len(dist.values)
        if count > max_profiles:
            raise SizeGuardError(f"value-profile count exceeds {max_profiles}")
    values = np.array(list(iter_product(*supports)), dtype=float)
    weight = np.array([math.prod(ws) for ws in iter_product(*probs)], dtype=float)
    return values, weight


# ---------------------------------------------------------------------------
# Scenario files


def valuation_to_dict(dist: ValuationDist) -> dict:
    if isinstance(dist, EqualRevenueDist):
        return {"type": "er", "scale": dist.scale}
    return {"type": "discrete", "values": list(dist.values), "probs": list(dist.probs)}


def valuation_from_dict(data: dict) -> ValuationDist:
    try:
        kind = data["type"]
    except (TypeError, KeyError):
        raise InputError(f"valuation entry must carry a 'type' field, got {data!r}") from None
    if kind == "er":
        return EqualRevenueDist(scale=float(data.get("scale", 1.0)))
    if kind == "discrete":
        return DiscreteDist(values=tuple(data["values"]), probs=tuple(data["probs"]))
    raise InputError(f"unknown valuation type {kind!r}")


def parse_scenario(data: dict) -> tuple[MarketInstance, SignalingScheme]:
    """Build (instance, released scheme) from a scenario dictionary.

    Schema: {"n": int, "prior": [...], "valuations": [...],
    "signals": {"likelihood": [[...], ...]}, "garbling": optional [[...], ...]}.
    The garbling, when present, is composed onto the raw scheme.
    """
    if not isinstance(data, dict):
        raise InputError("scenario must be a JSON object")
    try:
        n = int(data["n"])
        prior = data["prior"]
        val_entries = data["valuations"]
        likelihood = data["signals"]["likelihood"]
    except (KeyError, TypeError) as exc:
        raise InputError(f"scenario is missing a required field: {exc}") from None
    if len(prior) != n or len(val_entries) != n:
        raise InputError("scenario 'n' disagrees with prior/valuations length")
    inst = MarketInstance(prior=np.asarray(prior, dtype=float),
                          valuations=tuple(valuation_from_dict(v) for v in val_entries))
    scheme = SignalingScheme(np.asarray(likelihood, dtype=float))
    if scheme.n != n:
        raise InputError("likelihood column count disagrees with 'n'")
    if "garbling" in data and data["garbling"] is not None:
        scheme = compose(Garbling(np.asarray(data["garbling"], dtype=float)), scheme)
    return inst, scheme


def load_scenario(path: str | Path) -> tuple[MarketInstance, SignalingScheme]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read scenario file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"scenario file is not valid JSON: {exc}") from None
    return parse_scenario(data)


def scenario_dict(
    inst: MarketInstance,
    scheme: SignalingScheme,
    garbling: Garbling | None = None,
) -> dict:
    """Serializable scenario; `scheme` here is the raw (pre-garbling) one."""
    data = {
        "n": inst.n,
        "prior": [float(p) for p in inst.prior],
        "valuations": [valuation_to_dict(v) for v in inst.valuations],
        "signals": {"likelihood": [[float(x) for x in row] for row in scheme.likelihood]},
    }
    if garbling is not None:
        data["garbling"] = [[float(x) for x in row] for row in garbling.matrix]
    return data
