import io
from itertools import combinations, islice
from math import comb

import numpy as np
import pytest

from infauct import InputError, LinearProgram, solve


def brute_force_max(lp, chunk=20_000):
    """Vertex enumeration over tight-constraint subsets; None if infeasible.

    Kept deliberately independent of the simplex path: candidate vertices
    come from solving every nonsingular n-subset of constraint rows plus
    bound rows, filtered by feasibility.
    """
    n = lp.num_vars
    G, h = [], []
    for row, sense, b in zip(lp.a, lp.senses, lp.rhs):
        if sense == "<=":
            G.append(np.asarray(row, dtype=float))
            h.append(float(b))
        elif sense == ">=":
            G.append(-np.asarray(row, dtype=float))
            h.append(-float(b))
        else:
            G.append(np.asarray(row, dtype=float))
            h.append(float(b))
            G.append(-np.asarray(row, dtype=float))
            h.append(-float(b))
    for j, (lo, hi) in enumerate(lp.bounds):
        if np.isfinite(lo):
            e = np.zeros(n)
            e[j] = -1.0
            G.append(e)
            h.append(-lo)
        if np.isfinite(hi):
            e = np.zeros(n)
            e[j] = 1.0
            G.append(e)
            h.append(hi)
    G = np.asarray(G)
    h = np.asarray(h)
    best = None
    combos = combinations(range(len(h)), n)
    while True:
        batch = list(islice(combos, chunk))
        if not batch:
            break
        idx = np.asarray(batch)
        mats = G[idx]
        keep = np.abs(np.linalg.det(mats)) > 1e-10
        if not keep.any():
            continue
        xs = np.linalg.solve(mats[keep], h[idx[keep]][..., None])[..., 0]
        feas = np.all(xs @ G.T <= h[None, :] + 1e-9, axis=1)
        if feas.any():
            vals = xs[feas] @ lp.objective
            v = float(vals.max())
            if best is None or v > best:
                best = v
    return best


def random_bounded_lp(rng):
    while True:
        n = int(rng.integers(1, 9))
        m = int(rng.integers(1, 13))
        if comb(m + 2 * n, n) <= 150_000:
            break
    a = rng.uniform(-2.0, 2.0, size=(m, n))
    senses = []
    rhs = np.empty(m)
    for i in range(m):
        if rng.random() < 0.75:
            senses.append("<=")
            rhs[i] = rng.uniform(0.5, 4.0)
        else:
            senses.append(">=")
            rhs[i] = rng.uniform(-3.0, 0.5)
    c = rng.uniform(-1.0, 2.0, size=n)
    bounds = tuple((0.0, float(u)) for u in rng.uniform(0.5, 5.0, size=n))
    return LinearProgram(objective=c, a=a, senses=tuple(senses), rhs=rhs, bounds=bounds)


def test_simple_box():
    lp = LinearProgram(objective=[1.0], a=[[1.0]], senses=("<=",), rhs=[3.0])
    sol = solve(lp)
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(3.0)
    assert sol.objective == pytest.approx(3.0)


def test_infeasible():
    lp = LinearProgram(objective=[1.0], a=[[1.0]], senses=("<=",), rhs=[-1.0])
    assert solve(lp).status == "infeasible"


def test_two_variable_vertex():
    lp = LinearProgram(
        objective=[1.0, 1.0],
        a=[[1.0, 2.0], [1.0, 0.0]],
        senses=("<=", "<="),
        rhs=[4.0, 2.0],
    )
    sol = solve(lp)
    oracle = brute_force_max(lp)
    assert oracle == pytest.approx(3.0)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(oracle)
    assert np.allclose(sol.x, [2.0, 1.0])


def test_unbounded():
    lp = LinearProgram(objective=[1.0], a=np.zeros((0, 1)), senses=(), rhs=[])
    assert solve(lp).status == "unbounded"
    lp2 = LinearProgram(objective=[1.0, 0.0], a=[[-1.0, 1.0]], senses=("<=",), rhs=[1.0])
    assert solve(lp2).status == "unbounded"


def test_equality_and_free_variables():
    lp = LinearProgram(
        objective=[1.0, 1.0],
        a=[[1.0, 1.0]],
        senses=("=",),
        rhs=[2.0],
        bounds=((0.0, 1.5), (0.0, np.inf)),
    )
    sol = solve(lp)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(2.0)

    free = LinearProgram(
        objective=[-1.0],
        a=[[1.0]],
        senses=(">=",),
        rhs=[-5.0],
        bounds=((-np.inf, np.inf),),
    )
    sol = solve(free)
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(-5.0)

    upper_only = LinearProgram(
        objective=[1.0], a=np.zeros((0, 1)), senses=(), rhs=[], bounds=((-np.inf, 4.0),)
    )
    sol = solve(upper_only)
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(4.0)


def test_validation():
    with pytest.raises(InputError):
        LinearProgram(objective=[1.0], a=[[1.0, 2.0]], senses=("<=",), rhs=[1.0])
    with pytest.raises(InputError):
        LinearProgram(objective=[1.0], a=[[1.0]], senses=("<",), rhs=[1.0])
    with pytest.raises(InputError):
        LinearProgram(objective=[1.0], a=[[1.0]], senses=("<=",), rhs=[1.0], bounds=((2.0, 1.0),))
    with pytest.raises(InputError):
        solve(LinearProgram(objective=[1.0], a=[[1.0]], senses=("<=",), rhs=[1.0]), tol=0.0)


def test_deterministic_vertex():
    rng = np.random.default_rng(17)
    lp = random_bounded_lp(rng)
    first = solve(lp)
    second = solve(lp)
    assert first.status == second.status == "optimal"
    assert np.array_equal(first.x, second.x)
    assert first.objective == second.objective


def test_feasibility_of_returned_solutions():
    rng = np.random.default_rng(23)
    checked = 0
    for _ in range(60):
        lp = random_bounded_lp(rng)
        sol = solve(lp)
        if sol.status != "optimal":
            continue
        checked += 1
        lhs = lp.a @ sol.x
        for i, sense in enumerate(lp.senses):
            if sense == "<=":
                assert lhs[i] <= lp.rhs[i] + 1e-8
            else:
                assert lhs[i] >= lp.rhs[i] - 1e-8
        for j, (lo, hi) in enumerate(lp.bounds):
            assert lo - 1e-8 <= sol.x[j] <= hi + 1e-8
    assert checked > 30


def test_matches_vertex_enumeration():
    rng = np.random.default_rng(31)
    for _ in range(60):
        lp = random_bounded_lp(rng)
        oracle = brute_force_max(lp)
        sol = solve(lp)
        if oracle is None:
            assert sol.status == "infeasible"
        else:
            assert sol.status == "optimal"
            assert abs(sol.objective - oracle) <= 1e-7


def test_tableau_dump_writes_text():
    lp = LinearProgram(objective=[1.0], a=[[1.0]], senses=("<=",), rhs=[3.0])
    buf = io.StringIO()
    sol = solve(lp, dump=buf)
    assert sol.status == "optimal"
    text = buf.getvalue()
    assert "phase 2 start" in text and "final" in text
