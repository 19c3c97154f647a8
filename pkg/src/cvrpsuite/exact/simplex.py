"""Dense-tableau bounded-variable primal simplex.

Solves  min c.x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lower <= x <= upper
with a two-phase method. Nonbasic variables sit at either bound; a variable
at its upper bound is carried in complemented form (u - x), so the tableau
always describes non-negative quantities. Pricing is Dantzig's rule, with a
switch to Bland's rule after a run of degenerate pivots to rule out cycling.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

TOL = 1e-7
PIVOT_TOL = 1e-9
DEGENERATE_RUN = 30

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
TIME_LIMIT = "time-limit"
_RESTART = "restart"


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None
    objective: float
    iterations: int
    # final basis and upper-bound flags, for warm starts (dual solver only)
    basis: np.ndarray | None = None
    at_upper: np.ndarray | None = None


class _Tableau:
    def __init__(self, T, basis, width):
        self.T = T
        self.basis = basis  # column index of the basic variable of each row
        self.width = width  # upper bound of every column (lower is 0)
        self.at_upper = np.zeros(len(width), dtype=bool)
        self.iterations = 0

    @property
    def m(self):
        return self.T.shape[0] - 1

    def pivot(self, i, j):
        T = self.T
        T[i] /= T[i, j]
        col = T[:, j].copy()
        col[i] = 0.0
        T -= np.outer(col, T[i])
        T[:, j] = 0.0
        T[i, j] = 1.0
        self.basis[i] = j

    def complement_nonbasic(self, j):
        T = self.T
        T[:, -1] -= T[:, j] * self.width[j]
        T[:, j] *= -1.0
        self.at_upper[j] = ~self.at_upper[j]

    def complement_basic(self, i):
        T = self.T
        b = self.basis[i]
        T[i] *= -1.0
        T[i, b] = 1.0
        T[i, -1] += self.width[b]
        self.at_upper[b] = ~self.at_upper[b]

    def run(self, allowed, deadline=None, tol=TOL):
        """Primal simplex iterations on the current objective row."""
        T, m = self.T, self.m
        degenerate = 0
        while True:
            if deadline is not None and time.perf_counter() > deadline:
                return TIME_LIMIT
            d = T[m, :-1]
            cand = allowed & (d < -tol)
            if not cand.any():
                return OPTIMAL
            bland = degenerate >= DEGENERATE_RUN
            if bland:
                j = int(np.flatnonzero(cand)[0])
            else:
                j = int(np.argmin(np.where(cand, d, 0.0)))

            col = T[:m, j]
            beta = np.maximum(T[:m, -1], 0.0)
            ub_basic = self.width[self.basis]
            ratios = np.full(m, np.inf)
            pos = col > PIVOT_TOL
            ratios[pos] = beta[pos] / col[pos]
            neg = (col < -PIVOT_TOL) & np.isfinite(ub_basic)
            ratios[neg] = np.maximum(ub_basic[neg] - beta[neg], 0.0) / -col[neg]

            t_row = ratios.min() if m else np.inf
            t_flip = self.width[j]
            if not np.isfinite(t_row) and not np.isfinite(t_flip):
                return UNBOUNDED
            self.iterations += 1
            if t_flip <= t_row:
                self.complement_nonbasic(j)
                degenerate = 0 if t_flip > 1e-12 else degenerate + 1
                continue
            ties = np.flatnonzero(ratios <= t_row + 1e-12)
            i = int(ties[np.argmin(self.basis[ties])])
            if col[i] < 0:
                self.complement_basic(i)
            self.pivot(i, j)
            degenerate = 0 if t_row > 1e-12 else degenerate + 1

    def values(self):
        ncols = self.T.shape[1] - 1
        x = np.zeros(ncols)
        x[self.basis] = self.T[: self.m, -1]
        up = self.at_upper
        x[up] = self.width[up] - x[up]
        return x


def solve_lp(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None, lower=None, upper=None,
             deadline: float | None = None, tol: float = TOL) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = len(c)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float)
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    lower = np.zeros(n) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    if np.any(~np.isfinite(lower)):
        raise ValueError("lower bounds must be finite")
    if np.any(lower > upper + tol):
        return LPResult(INFEASIBLE, None, np.inf, 0)

    # fixed variables leave the problem entirely
    width_all = np.maximum(upper - lower, 0.0)
    free = width_all > 1e-12
    x_fixed = lower.copy()
    rhs_eq = b_eq - A_eq @ x_fixed
    rhs_ub = b_ub - A_ub @ x_fixed
    Ae, Au, cf, wf = A_eq[:, free], A_ub[:, free], c[free], width_all[free]
    nf = int(free.sum())
    m_eq, m_ub = len(rhs_eq), len(rhs_ub)
    m = m_eq + m_ub

    # rows: equality rows, then <= rows with their slack; negate rows with rhs < 0
    needs_art = []
    rows = np.zeros((m, nf + m_ub))
    rhs = np.concatenate([rhs_eq, rhs_ub])
    rows[:m_eq, :nf] = Ae
    rows[m_eq:, :nf] = Au
    rows[m_eq:, nf:] = np.eye(m_ub)
    basis = np.empty(m, dtype=int)
    for i in range(m):
        if rhs[i] < 0:
            rows[i] *= -1.0
            rhs[i] = -rhs[i]
        if i >= m_eq and rows[i, nf + i - m_eq] > 0:
            basis[i] = nf + i - m_eq
        else:
            needs_art.append(i)
    n_art = len(needs_art)
    N = nf + m_ub + n_art
    T = np.zeros((m + 1, N + 1))
    T[:m, : nf + m_ub] = rows
    T[:m, -1] = rhs
    for k, i in enumerate(needs_art):
        T[i, nf + m_ub + k] = 1.0
        basis[i] = nf + m_ub + k
    width = np.concatenate([wf, np.full(m_ub + n_art, np.inf)])
    tab = _Tableau(T, basis, width)

    # phase I
    if n_art:
        art_rows = np.array(needs_art)
        T[m, :] = -T[art_rows].sum(axis=0)
        T[m, nf + m_ub : N] = 0.0
        allowed = np.ones(N, dtype=bool)
        status = tab.run(allowed, deadline, tol)
        if status == TIME_LIMIT:
            return LPResult(TIME_LIMIT, None, np.nan, tab.iterations)
        if -T[m, -1] > tol * max(1.0, np.abs(rhs).max()):
            return LPResult(INFEASIBLE, None, np.inf, tab.iterations)
        # drive remaining (zero-level) artificials out of the basis
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if tab.basis[i] >= nf + m_ub:
                row = np.abs(T[i, : nf + m_ub])
                j = int(np.argmax(row)) if len(row) else -1
                if j >= 0 and row[j] > PIVOT_TOL:
                    tab.pivot(i, j)
                else:
                    keep[i] = False
        keep_rows = np.append(np.flatnonzero(keep), m)
        T = T[keep_rows][:, list(range(nf + m_ub)) + [N]]
        old = tab
        tab = _Tableau(T, old.basis[keep], width[: nf + m_ub])
        tab.at_upper = old.at_upper[: nf + m_ub].copy()
        iterations_phase1 = old.iterations
    else:
        iterations_phase1 = 0

    # phase II objective row
    T = tab.T
    mm = tab.m
    cost = np.concatenate([cf, np.zeros(m_ub)])
    ct = np.where(tab.at_upper, -cost, cost)
    cB = ct[tab.basis]
    T[mm, :-1] = ct - cB @ T[:mm, :-1]
    const = float(np.sum(cost[tab.at_upper] * tab.width[tab.at_upper]))
    T[mm, -1] = -(cB @ T[:mm, -1] + const)
    allowed = np.ones(T.shape[1] - 1, dtype=bool)
    status = tab.run(allowed, deadline, tol)
    iterations = iterations_phase1 + tab.iterations
    if status != OPTIMAL:
        return LPResult(status, None, np.nan if status == TIME_LIMIT else -np.inf, iterations)

    vals = tab.values()
    x = x_fixed.copy()
    x[free] = lower[free] + vals[:nf]
    return LPResult(OPTIMAL, x, float(c @ x), iterations)


class DualSimplexLP:
    """Bounded dual simplex for repeated solves of one LP under tightening bounds.

    The objective must be non-negative, so the all-slack basis with every
    structural variable at its lower bound is dual feasible and no phase I is
    needed. Each equality row carries an artificial column fixed at zero,
    which keeps every basis square. A solve may start from the basis of an
    earlier solve; as long as bounds only tighten, that basis stays dual
    feasible and usually needs just a few pivots.
    """

    def __init__(self, c, A_eq, b_eq, A_ub, b_ub):
        c = np.asarray(c, dtype=float)
        if np.any(c < 0):
            raise ValueError("objective coefficients must be non-negative")
        A_eq = np.asarray(A_eq, dtype=float)
        A_ub = np.asarray(A_ub, dtype=float)
        self.n = len(c)
        self.m_eq, self.m_ub = len(A_eq), len(A_ub)
        m = self.m_eq + self.m_ub
        ncols = self.n + self.m_ub + self.m_eq
        A = np.zeros((m, ncols))
        A[: self.m_eq, : self.n] = A_eq
        A[self.m_eq :, : self.n] = A_ub
        A[self.m_eq :, self.n : self.n + self.m_ub] = np.eye(self.m_ub)
        A[: self.m_eq, self.n + self.m_ub :] = np.eye(self.m_eq)
        self.A = A
        self.b = np.concatenate([np.asarray(b_eq, dtype=float), np.asarray(b_ub, dtype=float)])
        self.c = np.concatenate([c, np.zeros(self.m_ub + self.m_eq)])
        self.cold_basis = np.concatenate([
            np.arange(self.n + self.m_ub, ncols),  # equality rows: artificials
            np.arange(self.n, self.n + self.m_ub),  # inequality rows: slacks
        ])

    def _bounds(self, lower, upper):
        lo = np.concatenate([lower, np.zeros(self.m_ub + self.m_eq)])
        hi = np.concatenate([upper, np.full(self.m_ub, np.inf), np.zeros(self.m_eq)])
        return lo, hi

    def _tableau(self, lo, width, basis, at_upper):
        A, m = self.A, len(self.b)
        sign = np.where(at_upper, -1.0, 1.0)
        Aeff = A * sign
        shift = lo + np.where(at_upper, width, 0.0)
        rhs = self.b - A @ shift
        B = Aeff[:, basis]
        T = np.empty((m + 1, A.shape[1] + 1))
        T[:m, :-1] = np.linalg.solve(B, Aeff)
        T[:m, -1] = np.linalg.solve(B, rhs)
        T[:m, basis] = np.eye(m)  # clean up round-off on the basic columns
        ct = self.c * sign
        T[m, :-1] = ct - ct[basis] @ T[:m, :-1]
        T[m, basis] = 0.0
        T[m, -1] = -(ct[basis] @ T[:m, -1] + self.c @ shift)
        tab = _Tableau(T, np.array(basis), width)
        tab.at_upper = at_upper.copy()
        return tab

    def solve(self, lower, upper, start: tuple | None = None, deadline: float | None = None,
              tol: float = TOL) -> LPResult:
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if np.any(lower > upper + tol):
            return LPResult(INFEASIBLE, None, np.inf, 0)
        lo, hi = self._bounds(lower, upper)
        width = np.maximum(hi - lo, 0.0)
        if start is None:
            basis, at_upper = self.cold_basis, np.zeros(len(lo), dtype=bool)
        else:
            basis, at_upper = start
            # a fixed column's flag no longer matters; clear it so no stale width is used
            at_upper = at_upper & (width > 0)
        try:
            tab = self._tableau(lo, width, basis, at_upper)
        except np.linalg.LinAlgError:
            tab = self._tableau(lo, width, self.cold_basis, np.zeros(len(lo), dtype=bool))
        status = self._dual(tab, deadline, tol)
        if status == _RESTART:
            tab = self._tableau(lo, width, self.cold_basis, np.zeros(len(lo), dtype=bool))
            status = self._dual(tab, deadline, tol)
        if status != OPTIMAL:
            return LPResult(status, None, np.inf if status == INFEASIBLE else np.nan,
                            tab.iterations)
        y = tab.values()
        x = lo + y
        return LPResult(OPTIMAL, x[: self.n], float(self.c @ x), tab.iterations,
                        tab.basis.copy(), tab.at_upper.copy())

    def _dual(self, tab: _Tableau, deadline, tol) -> str:
        T, m, width = tab.T, tab.m, tab.width
        movable = width > 1e-12
        d = T[m, :-1]
        # any dual infeasibility left over from a warm start is repaired by a bound flip
        bad = movable & (d < -tol)
        bad[tab.basis] = False
        for j in np.flatnonzero(bad):
            if not np.isfinite(width[j]):
                return _RESTART
            tab.complement_nonbasic(j)
        degenerate = 0
        while True:
            if deadline is not None and time.perf_counter() > deadline:
                return TIME_LIMIT
            beta = T[:m, -1]
            wb = width[tab.basis]
            below = -beta
            above = np.where(np.isfinite(wb), beta - wb, -np.inf)
            viol = np.maximum(below, above)
            if m == 0 or viol.max() <= tol:
                return OPTIMAL
            if degenerate >= DEGENERATE_RUN:
                r = int(np.flatnonzero(viol > tol)[0])
            else:
                r = int(np.argmax(viol))
            if above[r] > below[r]:
                tab.complement_basic(r)
            row = T[r, :-1]
            cand = movable & (row < -PIVOT_TOL)
            cand[tab.basis] = False
            if not cand.any():
                return INFEASIBLE
            idx = np.flatnonzero(cand)
            ratios = np.maximum(d[idx], 0.0) / -row[idx]
            k = int(np.argmin(ratios))  # first index wins ties
            j = int(idx[k])
            degenerate = degenerate + 1 if ratios[k] <= 1e-12 else 0
            tab.iterations += 1
            tab.pivot(r, j)
