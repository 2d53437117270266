"""Exact lasso solution path by least angle regression with the lasso
modification.

The path of the penalized problem

    (1 / (2N)) * ||y - X beta||_2^2 + lam * ||beta||_1

is piecewise linear in lam.  Between events the active coefficients solve
``G_A beta_A = (1/N) X_A' y - lam * s_A`` with ``G_A = (1/N) X_A' X_A`` and
``s_A`` the active correlation signs, so the whole path is traced by
locating the next penalty at which either an inactive predictor reaches the
correlation bound (entry) or an active coefficient crosses zero (drop).
A Cholesky factor of G_A is maintained incrementally across entries and
drops; correlations are recomputed from the residual at every knot so the
stated KKT conditions hold to tight tolerance along the entire path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .data import Dataset
from .errors import DegenerateResponse, NumericalFailure, SingularGram

_DEFAULT_COND_TOL = 1e-12


@dataclass(frozen=True)
class ExactPath:
    """Knot locations, knot coefficients and per-knot active sets.

    ``knots`` decreases strictly from lambda_max to the terminal penalty
    (>= 0) and the path is linear in lam between consecutive knots.
    ``active_sets[k]`` is the equality set governing the segment below knot
    k; the terminal knot closes the final segment and repeats its set.
    """

    knots: np.ndarray
    knot_coefs: np.ndarray  # (n_knots, p)
    active_sets: tuple

    def __post_init__(self):
        if self.knots.ndim != 1 or self.knots.size < 1:
            raise ValueError("need at least one knot")
        if self.knot_coefs.shape[0] != self.knots.size:
            raise ValueError("one coefficient vector per knot required")
        if len(self.active_sets) != self.knots.size:
            raise ValueError("one active set per knot required")
        if self.knots.size > 1 and not np.all(np.diff(self.knots) < 0.0):
            raise ValueError("knots must be strictly decreasing")
        if np.any(self.knot_coefs[0] != 0.0):
            raise ValueError("path must start at the all-zero solution")
        self.knots.setflags(write=False)
        self.knot_coefs.setflags(write=False)

    @property
    def p(self) -> int:
        return self.knot_coefs.shape[1]

    @property
    def lambda_max(self) -> float:
        return float(self.knots[0])


class _CholFactor:
    """Lower-triangular factor of the active Gram matrix, updated in place
    on variable entry (bordering) and removal (rank-one update of the
    trailing block)."""

    def __init__(self, cond_tol: float):
        self.l = np.zeros((0, 0))
        self.cond_tol = cond_tol

    @property
    def size(self) -> int:
        return self.l.shape[0]

    def add(self, g_col: np.ndarray, g_jj: float) -> None:
        m = self.size
        if m == 0:
            d2 = g_jj
            w = np.zeros(0)
        else:
            w = solve_triangular(self.l, g_col, lower=True, check_finite=False)
            d2 = g_jj - float(w @ w)
        if d2 <= self.cond_tol * max(g_jj, 1.0):
            raise SingularGram(
                "entering predictor is numerically collinear with the active set"
            )
        grown = np.zeros((m + 1, m + 1))
        grown[:m, :m] = self.l
        grown[m, :m] = w
        grown[m, m] = np.sqrt(d2)
        self.l = grown

    def drop(self, k: int) -> None:
        m = self.size
        keep = np.delete(np.arange(m), k)
        trail = self.l[k + 1 :, k + 1 :].copy()
        v = self.l[k + 1 :, k].copy()
        _chol_update(trail, v)
        shrunk = np.zeros((m - 1, m - 1))
        shrunk[:, :k] = self.l[keep, :k]
        shrunk[k:, k:] = trail
        self.l = shrunk

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        z = solve_triangular(self.l, rhs, lower=True, check_finite=False)
        return solve_triangular(self.l.T, z, lower=False, check_finite=False)


def _chol_update(l: np.ndarray, v: np.ndarray) -> None:
    """Rank-one update: overwrite l with the Cholesky factor of
    l @ l.T + outer(v, v)."""
    m = l.shape[0]
    for k in range(m):
        r = np.hypot(l[k, k], v[k])
        c = r / l[k, k]
        s = v[k] / l[k, k]
        l[k, k] = r
        if k + 1 < m:
            l[k + 1 :, k] = (l[k + 1 :, k] + s * v[k + 1 :]) / c
            v[k + 1 :] = c * v[k + 1 :] - s * l[k + 1 :, k]


def lars_path(
    data: Dataset,
    max_knots: int | None = None,
    cond_tol: float = _DEFAULT_COND_TOL,
) -> ExactPath:
    """Trace the exact lasso path from lambda_max down to zero (or until the
    residual correlation vanishes).

    Entry ties within 1e-12 relative are resolved toward the lower predictor
    index, and coincident events are coalesced into a single knot, so the
    returned path is deterministic.  Raises SingularGram when an entering
    predictor is (numerically) collinear with the active set.
    """
    if not data.standardized:
        raise ValueError("lars_path requires a standardized dataset")
    x, y = data.x, data.y
    n, p = data.n, data.p
    xty = x.T @ y / n
    lam = float(np.max(np.abs(xty)))
    if lam == 0.0:
        raise DegenerateResponse("response is orthogonal to all predictors")
    lam_max = lam
    vanish_tol = 1e-12 * lam_max
    step_tol = 1e-12 * lam_max
    if max_knots is None:
        max_knots = 200 + 12 * min(n, p)

    knots = [lam_max]
    coef_rows = [np.zeros(p)]
    active: list[int] = []
    signs: list[float] = []
    chol = _CholFactor(cond_tol)
    col_sq = (x * x).sum(axis=0) / n  # ~1 on standardized data

    def admit(j: int, sign: float) -> None:
        g_col = x[:, active].T @ x[:, j] / n if active else np.zeros(0)
        chol.add(g_col, float(col_sq[j]))
        active.append(j)
        signs.append(sign)

    first = int(np.argmax(np.abs(xty)))  # argmax takes the lowest index on ties
    admit(first, float(np.sign(xty[first])))
    active_sets = [tuple(active)]
    last_dropped = -1

    for _ in range(max_knots):
        act = np.array(active)
        s = np.array(signs)
        beta_a = chol.solve(xty[act] - lam * s)
        u = chol.solve(s)

        # fresh correlations and direction inner products (no accumulation)
        fit = x[:, act] @ beta_a
        c = xty - x.T @ fit / n
        a = x.T @ (x[:, act] @ u) / n

        # entry events: |c_j(lam - g)| reaches lam - g
        with np.errstate(divide="ignore", invalid="ignore"):
            g_plus = (lam - c) / (1.0 - a)
            g_minus = (lam + c) / (1.0 + a)
        cand_gamma = np.full(p, np.inf)
        for g in (g_plus, g_minus):
            ok = np.isfinite(g) & (g >= -step_tol)
            np.minimum(cand_gamma, np.where(ok, np.maximum(g, 0.0), np.inf), out=cand_gamma)
        cand_gamma[act] = np.inf
        if last_dropped >= 0 and cand_gamma[last_dropped] <= step_tol:
            cand_gamma[last_dropped] = np.inf  # no immediate re-entry at the same knot

        # drop events: active coefficient crosses zero
        with np.errstate(divide="ignore", invalid="ignore"):
            g_drop = -beta_a / u
        g_drop = np.where(np.isfinite(g_drop) & (g_drop > step_tol), g_drop, np.inf)

        entry_j = int(np.argmin(cand_gamma))
        entry_gamma = float(cand_gamma[entry_j])
        drop_k = int(np.argmin(g_drop))
        drop_gamma = float(g_drop[drop_k])

        if not np.isfinite(entry_gamma) and not np.isfinite(drop_gamma):
            next_lam = 0.0
        else:
            if drop_gamma <= entry_gamma + step_tol:
                gamma, kind = drop_gamma, "drop"
            else:
                gamma, kind = entry_gamma, "entry"
            next_lam = lam - gamma

        if next_lam <= vanish_tol:
            final_lam = max(next_lam, 0.0)
            beta_end = chol.solve(xty[act] - final_lam * s)
            row = np.zeros(p)
            row[act] = beta_end
            _emit(knots, coef_rows, active_sets, final_lam, row, tuple(sorted(active)), step_tol)
            break

        beta_next = chol.solve(xty[act] - next_lam * s)
        row = np.zeros(p)
        row[act] = beta_next
        if kind == "drop":
            row[active[drop_k]] = 0.0  # exact zero at the crossing
            last_dropped = active[drop_k]
            del active[drop_k]
            del signs[drop_k]
            chol.drop(drop_k)
        else:
            c_at = c[entry_j] - gamma * a[entry_j]
            admit(entry_j, 1.0 if c_at > 0 else -1.0)
            if gamma > step_tol:
                last_dropped = -1
        _emit(knots, coef_rows, active_sets, next_lam, row, tuple(sorted(active)), step_tol)
        lam = next_lam
        if not active:
            break
    else:
        raise NumericalFailure(
            f"lasso path did not terminate within {max_knots} events"
        )

    return ExactPath(
        knots=np.array(knots),
        knot_coefs=np.array(coef_rows),
        active_sets=tuple(active_sets),
    )


def _emit(knots, coef_rows, active_sets, lam, row, aset, step_tol) -> None:
    """Append a knot, coalescing events that land on the previous knot."""
    if knots and abs(knots[-1] - lam) <= step_tol and len(knots) > 1:
        coef_rows[-1] = row
        active_sets[-1] = aset
        return
    if knots and lam >= knots[-1]:
        lam = np.nextafter(knots[-1], -np.inf)  # keep strict decrease
    knots.append(lam)
    coef_rows.append(row)
    active_sets.append(aset)


def eval_exact(path: ExactPath, lam: float) -> np.ndarray:
    """Evaluate the piecewise-linear path at any penalty.

    Above lambda_max the solution is zero; below the terminal knot the
    terminal solution is held constant (documented approximation: the
    reference sequence may extend below the last computed knot).
    """
    if lam < 0.0:
        raise ValueError("lam must be nonnegative")
    knots = path.knots
    if lam >= knots[0]:
        return np.zeros(path.p) if lam > knots[0] else path.knot_coefs[0].copy()
    if lam <= knots[-1]:
        return path.knot_coefs[-1].copy()
    # first index with knots[i] <= lam; bracket is (i-1, i)
    i = int(np.searchsorted(-knots, -lam, side="left"))
    hi, lo = knots[i - 1], knots[i]
    if lam == lo:
        return path.knot_coefs[i].copy()
    w = (lam - lo) / (hi - lo)
    return w * path.knot_coefs[i - 1] + (1.0 - w) * path.knot_coefs[i]


def kkt_residuals(data: Dataset, beta, lam: float, sign_tol: float = 1e-9):
    """Diagnostics for the optimality conditions at (beta, lam).

    Returns (active_gap, inactive_excess, signs_ok): the largest deviation
    of active correlations from lam, the largest amount an inactive
    correlation exceeds lam, and whether active correlations carry the
    coefficient signs.  Correlations below ``sign_tol`` in magnitude carry
    no sign information (the terminal knot has c ~ 0) and are skipped by
    the sign check.
    """
    beta = np.asarray(beta, dtype=np.float64)
    c = data.x.T @ (data.y - data.x @ beta) / data.n
    nz = beta != 0.0
    if nz.any():
        active_gap = float(np.max(np.abs(np.abs(c[nz]) - lam)))
        signed = nz & (np.abs(c) > sign_tol)
        signs_ok = bool(np.all(np.sign(c[signed]) == np.sign(beta[signed])))
    else:
        active_gap = 0.0
        signs_ok = True
    if (~nz).any():
        inactive_excess = float(max(np.max(np.abs(c[~nz])) - lam, 0.0))
    else:
        inactive_excess = 0.0
    return active_gap, inactive_excess, signs_ok
