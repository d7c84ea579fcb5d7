"""Dense two-phase simplex for small maximization programs.

Determinism is part of the contract: the same program always pivots through
the same vertices.  Entering columns follow Dantzig's rule (most negative
reduced cost) with Bland's rule as the anti-cycling backstop; a fixed
golden-ratio rhs perturbation keeps massively degenerate programs moving,
and the ratio test is the two-pass kind, taking the largest pivot element
among near-minimal ratios and then the smallest basis index.  Everything
lives in one dense tableau; at the few-hundred-variable scale this package
needs, simple and reproducible beats fast.

The reported vertex is re-derived from pristine data for the final basis
(pivoting accumulates roundoff) and re-checked against the original
constraints.  A numerically broken run retries under a re-salted
perturbation and, failing that, comes back with status "failed", never as a
silently wrong answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

try:  # BLAS rank-1 update keeps the hot pivot loop allocation-free
    from scipy.linalg.blas import dger as _dger
except ImportError:  # pragma: no cover - scipy is expected but not required
    _dger = None

from .errors import InputError

LESS, GREATER, EQUAL = "<=", ">=", "="
_SENSES = (LESS, GREATER, EQUAL)

DEFAULT_TOL = 1e-9
_PIVOT_TOL = 1e-11
_DEGENERATE_STREAK = 40
_RETRY_SALTS = (0, 1, 2)
# rebuild the tableau from pristine data at most every this many pivots;
# roundoff otherwise accumulates until noise-level reduced costs stall the
# loop.  Refreshes also fire when a degeneracy streak suggests stalling.
_REFRESH_EVERY = 400
# golden-ratio spacing keeps the deterministic rhs perturbations well apart
_GOLDEN = 0.6180339887498949

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
FAILED = "failed"


@dataclass
class LinearProgram:
    """maximize objective @ x subject to rows (a, sense, rhs) and box bounds.

    `bounds[j] = (lo, hi)` with -inf/+inf allowed on either side.
    """

    objective: np.ndarray
    a: np.ndarray
    senses: tuple[str, ...]
    rhs: np.ndarray
    bounds: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        n = self.objective.shape[0]
        self.a = np.asarray(self.a, dtype=float)
        if self.a.size == 0:
            self.a = np.zeros((0, n))
        if self.a.ndim != 2 or self.a.shape[1] != n:
            raise InputError(f"constraint matrix must have {n} columns")
        self.rhs = np.asarray(self.rhs, dtype=float).reshape(-1)
        self.senses = tuple(self.senses)
        if len(self.senses) != self.a.shape[0] or self.rhs.shape[0] != self.a.shape[0]:
            raise InputError("senses/rhs length must match the constraint count")
        for s in self.senses:
            if s not in _SENSES:
                raise InputError(f"unknown sense {s!r}; use one of {_SENSES}")
        if not self.bounds:
            self.bounds = tuple((0.0, math.inf) for _ in range(n))
        self.bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(self.bounds) != n:
            raise InputError("need one (lower, upper) bound pair per variable")
        for lo, hi in self.bounds:
            if math.isnan(lo) or math.isnan(hi) or lo > hi:
                raise InputError(f"invalid bound pair ({lo}, {hi})")
        if not np.all(np.isfinite(self.objective)) or not np.all(np.isfinite(self.a)) or not np.all(
            np.isfinite(self.rhs)
        ):
            raise InputError("objective, matrix, and rhs must be finite")

    @property
    def num_vars(self) -> int:
        return int(self.objective.shape[0])

    @property
    def num_constraints(self) -> int:
        return int(self.a.shape[0])


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int
    message: str = ""


def _standardize(lp: LinearProgram):
    """Rewrite onto non-negative variables y.

    Returns (A, b, senses, c, recover) where recover(y) rebuilds x.  Shifted
    lower bounds and flipped upper-bounded-only variables keep one column
    each; free variables split into a difference of two columns.  Finite
    widths become explicit <= rows.
    """
    cols: list[tuple[int, float, float]] = []  # (orig var, sign, shift)
    extra_rows: list[tuple[int, float]] = []  # (std column, width)
    for j, (lo, hi) in enumerate(lp.bounds):
        if math.isinf(lo) and math.isinf(hi):
            cols.append((j, 1.0, 0.0))
            cols.append((j, -1.0, 0.0))
        elif math.isinf(lo):
            cols.append((j, -1.0, hi))  # x = hi - y
        else:
            cols.append((j, 1.0, lo))  # x = lo + y
            if not math.isinf(hi):
                extra_rows.append((len(cols) - 1, hi - lo))

    n_std = len(cols)
    shift = np.zeros(lp.num_vars)
    for j, sign, off in cols:
        if off != 0.0 and sign != 0.0:
            shift[j] = off  # at most one shifted column per variable
    a_std = np.zeros((lp.num_constraints + len(extra_rows), n_std))
    for k, (j, sign, _) in enumerate(cols):
        a_std[: lp.num_constraints, k] += sign * lp.a[:, j]
    b_std = np.concatenate([lp.rhs - lp.a @ shift, np.array([w for _, w in extra_rows])])
    senses = list(lp.senses) + [LESS] * len(extra_rows)
    for r, (k, _) in enumerate(extra_rows):
        a_std[lp.num_constraints + r, k] = 1.0
    c_std = np.zeros(n_std)
    for k, (j, sign, _) in enumerate(cols):
        c_std[k] += sign * lp.objective[j]

    def recover(y: np.ndarray) -> np.ndarray:
        x = shift.copy()
        for k, (j, sign, _) in enumerate(cols):
            x[j] += sign * y[k]
        return x

    return a_std, b_std, senses, c_std, recover


def _rebuild_objective_row(tableau: np.ndarray, basis: np.ndarray, cost: np.ndarray) -> None:
    """Set the reduced-cost row to c_B B^-1 A - c for the current basis.

    The two trailing rhs columns ride along and end up holding the objective
    value under the true and the perturbed right-hand side respectively.
    """
    tableau[-1, :] = 0.0
    tableau[-1, : cost.shape[0]] = -cost
    for i, b in enumerate(basis):
        cb = cost[b]
        if cb != 0.0:
            tableau[-1, :] += cb * tableau[i, :]


def _pivot(tableau: np.ndarray, row: int, col: int) -> None:
    tableau[row, :] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    if _dger is not None and tableau.flags.f_contiguous:
        _dger(-1.0, factors, tableau[row, :].copy(), a=tableau, overwrite_a=1)
    else:
        tableau -= np.outer(factors, tableau[row, :])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0


def _optimize(
    tableau: np.ndarray,
    basis: np.ndarray,
    allowed: np.ndarray,
    tol: float,
    max_iterations: int,
    iterations: int,
    refresh=None,
) -> tuple[str, int]:
    """Pivot until optimal, unbounded, or the iteration cap trips.

    Ratio tests run against the perturbed rhs (last column); the true rhs
    (second to last) is just carried along.  Entering columns follow
    Dantzig's rule, with a sticky switch to Bland's rule after a degeneracy
    streak as an anti-cycling backstop.  `refresh`, when given, rebuilds the
    tableau in place from pristine data periodically.
    """
    m = tableau.shape[0] - 1
    reduced_view = tableau[-1, :-2]
    degenerate = 0
    bland = False
    last_objective = tableau[-1, -1]
    since_refresh = 0
    while True:
        if refresh is not None and since_refresh >= _REFRESH_EVERY:
            refresh(tableau, basis)
            last_objective = tableau[-1, -1]
            since_refresh = 0
        if bland:
            candidates = np.flatnonzero(allowed & (reduced_view < -tol))
            if candidates.size == 0:
                return OPTIMAL, iterations
            enter = int(candidates[0])
        else:
            masked = np.where(allowed, reduced_view, np.inf)
            enter = int(np.argmin(masked))
            if masked[enter] >= -tol:
                return OPTIMAL, iterations
        if m == 0:
            return UNBOUNDED, iterations
        column = tableau[:m, enter]
        pivot_floor = _PIVOT_TOL * max(1.0, float(np.abs(column).max()))
        positive = column > pivot_floor
        if not positive.any():
            return UNBOUNDED, iterations
        ratios = np.full(m, np.inf)
        ratios[positive] = tableau[:m, -1][positive] / column[positive]
        best = ratios.min()
        # two-pass ratio test: among near-minimal ratios take the largest
        # pivot element (numerical stability), then the smallest basis
        # index; the tie window sits below the rhs perturbation spacing so
        # perturbed ratios stay strictly ordered
        ties = np.flatnonzero(ratios <= best + 0.05 * tol * (1.0 + abs(best)))
        tie_pivots = column[ties]
        strong = ties[tie_pivots >= 0.5 * tie_pivots.max()]
        leave = int(strong[np.argmin(basis[strong])])
        _pivot(tableau, leave, enter)
        basis[leave] = enter
        iterations += 1
        since_refresh += 1
        if iterations > max_iterations:
            return FAILED, iterations
        objective = tableau[-1, -1]
        if objective > last_objective + 1e-12:
            last_objective = objective
            degenerate = 0
            bland = False
        else:
            degenerate += 1
            if degenerate >= _DEGENERATE_STREAK:
                if refresh is not None and since_refresh >= _DEGENERATE_STREAK:
                    refresh(tableau, basis)
                    last_objective = tableau[-1, -1]
                    since_refresh = 0
                    degenerate = 0
                else:
                    bland = True


def _dump_tableau(handle: TextIO, label: str, tableau: np.ndarray, basis: np.ndarray) -> None:
    handle.write(f"-- {label}: basis {basis.tolist()}\n")
    for row in tableau:
        handle.write("  " + " ".join(f"{v: .6g}" for v in row) + "\n")


def solve(
    lp: LinearProgram,
    tol: float = DEFAULT_TOL,
    max_iterations: int | None = None,
    dump: TextIO | None = None,
) -> LpSolution:
    """Two-phase primal simplex.

    Returns status "optimal" with a feasibility-checked vertex, "infeasible",
    "unbounded", or "failed" when no retry produced a certified solution.
    Degenerate programs are handled by a deterministic rhs perturbation; if
    an attempt ends on a basis that does not check out against the original
    data, the run retries with a re-salted perturbation (new pivot path)
    before giving up.
    """
    if tol <= 0:
        raise InputError("tolerance must be positive")
    a, b, senses, c, recover = _standardize(lp)
    m, n = a.shape
    if max_iterations is None:
        max_iterations = 500 + 50 * (m + n)

    # normalize senses so as few rows as possible need artificials: >= rows
    # become <= by negation, then any row left with a negative rhs flips back
    for i in range(m):
        if senses[i] == GREATER:
            a[i, :] *= -1.0
            b[i] *= -1.0
            senses[i] = LESS
    for i in range(m):
        if b[i] < 0:
            a[i, :] *= -1.0
            b[i] *= -1.0
            if senses[i] == LESS:
                senses[i] = GREATER

    result = None
    for salt in _RETRY_SALTS:
        result = _attempt(lp, a, b, senses, c, recover, tol, max_iterations, dump, salt)
        if result.status != FAILED:
            return result
    return result


def _attempt(
    lp: LinearProgram,
    a: np.ndarray,
    b: np.ndarray,
    senses: list[str],
    c: np.ndarray,
    recover,
    tol: float,
    max_iterations: int,
    dump: TextIO | None,
    salt: int,
) -> LpSolution:
    """One full two-phase run under one perturbation salt."""
    m, n = a.shape
    slack_cols: list[np.ndarray] = []
    art_rows: list[int] = []
    basis = np.full(m, -1, dtype=np.int64)
    for i, sense in enumerate(senses):
        e = np.zeros(m)
        e[i] = 1.0
        if sense == LESS:
            slack_cols.append(e)
            basis[i] = n + len(slack_cols) - 1
        elif sense == GREATER:
            slack_cols.append(-e)
            art_rows.append(i)
        else:
            art_rows.append(i)
    n_slack = len(slack_cols)
    n_art = len(art_rows)

    # pristine copies for the final basis re-solve: pivoting accumulates
    # roundoff, so the reported vertex is recomputed from original data
    slack0 = np.column_stack(slack_cols) if slack_cols else np.zeros((m, 0))
    kept_rows = np.arange(m)

    # deterministic rhs perturbation: strictly relaxing on inequality rows,
    # absent on equality rows, so it breaks ratio-test degeneracy without
    # shrinking the feasible region; the true rhs rides in its own column
    scale = (salt + 1.0) * tol
    perturbed = b.copy()
    for i, sense in enumerate(senses):
        delta = scale * (1.0 + (i + 1 + 17 * salt) * _GOLDEN % 1.0) * max(1.0, abs(b[i]))
        if sense == LESS:
            perturbed[i] = b[i] + delta
        elif sense == GREATER:
            perturbed[i] = b[i] - min(delta, b[i] / 2.0)

    width = n + n_slack + n_art + 2
    tableau = np.zeros((m + 1, width), order="F")
    tableau[:m, :n] = a
    if n_slack:
        tableau[:m, n : n + n_slack] = slack0
    for k, i in enumerate(art_rows):
        col = n + n_slack + k
        tableau[i, col] = 1.0
        basis[i] = col
    tableau[:m, -2] = b
    tableau[:m, -1] = perturbed

    iterations = 0
    feas_tol = tol * max(1.0, float(np.abs(b).max()) if m else 1.0)

    if n_art:
        phase1_cost = np.zeros(width - 2)
        phase1_cost[n + n_slack :] = -1.0
        _rebuild_objective_row(tableau, basis, phase1_cost)
        allowed = np.ones(width - 2, dtype=bool)
        if dump is not None:
            _dump_tableau(dump, "phase 1 start", tableau, basis)
        status, iterations = _optimize(tableau, basis, allowed, tol, max_iterations, iterations)
        if status == FAILED:
            return LpSolution(FAILED, None, None, iterations, "phase 1 iteration cap reached")
        if status == UNBOUNDED:
            return LpSolution(FAILED, None, None, iterations, "phase 1 reported unbounded")
        if tableau[-1, -1] < -feas_tol:
            return LpSolution(INFEASIBLE, None, None, iterations)

        # drive leftover artificials out of the basis; rows that cannot
        # pivot out are redundant and get dropped
        art_set = set(range(n + n_slack, width - 2))
        drop_rows: list[int] = []
        for i in range(m):
            if basis[i] in art_set:
                row = tableau[i, : n + n_slack]
                pivots = np.flatnonzero(np.abs(row) > _PIVOT_TOL)
                if pivots.size:
                    _pivot(tableau, i, int(pivots[0]))
                    basis[i] = int(pivots[0])
                else:
                    drop_rows.append(i)
        if drop_rows:
            keep = [i for i in range(m) if i not in drop_rows]
            tableau = np.asfortranarray(np.vstack([tableau[keep, :], tableau[-1:, :]]))
            basis = basis[keep]
            kept_rows = kept_rows[keep]
            m = len(keep)
        tableau = np.asfortranarray(np.delete(tableau, np.s_[n + n_slack : width - 2], axis=1))
        width = tableau.shape[1]

    cost = np.zeros(width - 2)
    cost[:n] = c
    _rebuild_objective_row(tableau, basis, cost)
    allowed = np.ones(width - 2, dtype=bool)
    full0 = np.hstack([a, slack0])
    rows_now = kept_rows

    def refresh(t: np.ndarray, basis_now: np.ndarray) -> None:
        block = full0[rows_now]
        basis_matrix = block[:, basis_now]
        try:
            fresh = np.linalg.solve(
                basis_matrix,
                np.column_stack([block, b[rows_now], perturbed[rows_now]]),
            )
        except np.linalg.LinAlgError:
            return
        # commit only a solve that checks out; a sloppy one would corrupt
        # the tableau worse than the roundoff being cleaned up
        scale = max(1.0, float(np.abs(perturbed[rows_now]).max()) if rows_now.size else 1.0)
        residual = basis_matrix @ fresh[:, -1] - perturbed[rows_now]
        if (
            not np.all(np.isfinite(fresh))
            or float(np.abs(residual).max(initial=0.0)) > 1e-7 * scale
            or float(fresh[:, -1].min(initial=0.0)) < -1e-7 * scale
        ):
            return
        k = rows_now.size
        t[:k, : full0.shape[1]] = fresh[:, :-2]
        t[:k, -2] = fresh[:, -2]
        t[:k, -1] = np.maximum(fresh[:, -1], 0.0)
        _rebuild_objective_row(t, basis_now, cost)

    if dump is not None:
        _dump_tableau(dump, "phase 2 start", tableau, basis)
    status, iterations = _optimize(
        tableau, basis, allowed, tol, max_iterations, iterations, refresh=refresh
    )
    if dump is not None:
        _dump_tableau(dump, f"final ({status})", tableau, basis)
    if status == FAILED:
        return LpSolution(FAILED, None, None, iterations, "phase 2 iteration cap reached")
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, None, None, iterations)

    # re-derive the basic solution from pristine data: the basis is what the
    # pivoting was for, and a fresh solve drops the accumulated roundoff
    basic_values = tableau[:m, -2]
    if m:
        columns = np.empty((m, m))
        for k, col_idx in enumerate(basis):
            if col_idx < n:
                columns[:, k] = a[kept_rows, col_idx]
            else:
                columns[:, k] = slack0[kept_rows, col_idx - n]
        try:
            basic_values = np.linalg.solve(columns, b[kept_rows])
        except np.linalg.LinAlgError:
            pass  # keep the tableau-carried values; the residual check decides
    negative = float(basic_values.min()) if m else 0.0
    if negative < -1e-6 * max(1.0, float(np.abs(b).max()) if b.size else 1.0):
        return LpSolution(
            FAILED, None, None, iterations,
            f"optimal basis is infeasible for the unperturbed program by {-negative:.3g}",
        )
    y = np.zeros(width - 2)
    y[basis] = np.maximum(basic_values, 0.0)
    x = recover(y[:n])
    residual = _feasibility_violation(lp, x)
    if residual > feas_tol * 10.0:
        return LpSolution(FAILED, None, None, iterations, f"solution violates constraints by {residual:.3g}")
    objective = float(lp.objective @ x)
    return LpSolution(OPTIMAL, x, objective, iterations)


def _feasibility_violation(lp: LinearProgram, x: np.ndarray) -> float:
    worst = 0.0
    if lp.num_constraints:
        lhs = lp.a @ x
        for i, sense in enumerate(lp.senses):
            if sense == LESS:
                worst = max(worst, lhs[i] - lp.rhs[i])
            elif sense == GREATER:
                worst = max(worst, lp.rhs[i] - lhs[i])
            else:
                worst = max(worst, abs(lhs[i] - lp.rhs[i]))
    for j, (lo, hi) in enumerate(lp.bounds):
        worst = max(worst, lo - x[j], x[j] - hi)
    return float(worst)
