"""Per-round numerical kernels: box-constrained dual QP and the attacker step.

The box QP maximizes ``-0.5 lam' Q lam + c' lam`` over ``0 <= lam <= upper``.
The solver runs cyclic exact coordinate maximization, with two accelerators
between sweeps that matter on ill-conditioned instances: a diagonally scaled
projected-gradient step and Newton steps on the working face, each advanced
by an exact line search and a ratio test to the first bound crossing. All
steps are monotone in the objective; convergence is declared on the KKT
residual of the final iterate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularU

__all__ = ["BoxQP", "QPSolution", "solve_box_qp", "AttackStep", "attacker_delta",
           "build_u_inverse"]

DEGENERATE_DIAG = 1e-12


@dataclass
class BoxQP:
    """Box-constrained QP instance.

    Attributes:
        Q: symmetric PSD matrix (N x N).
        c: linear coefficient vector (N).
        upper: scalar box upper bound (> 0); lower bound is 0.
        tol: KKT residual tolerance.
        max_sweeps: sweep budget; defaults to 10 N.
    """

    Q: np.ndarray
    c: np.ndarray
    upper: float
    tol: float = 1e-8
    max_sweeps: int | None = None

    def __post_init__(self):
        self.Q = np.ascontiguousarray(self.Q, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        n = self.c.shape[0]
        if self.Q.shape != (n, n):
            raise ValueError(f"Q shape {self.Q.shape} does not match c ({n})")
        if not np.allclose(self.Q, self.Q.T, atol=1e-8 * max(1.0, float(np.abs(self.Q).max()))):
            raise ValueError("Q must be symmetric")
        if self.upper <= 0:
            raise ValueError("upper bound must be positive")
        if self.max_sweeps is None:
            self.max_sweeps = max(10 * n, 10)


@dataclass
class QPSolution:
    """Solver result: the iterate plus convergence diagnostics."""

    lam: np.ndarray
    kkt_violation: float
    sweeps: int
    converged: bool


def kkt_violation(Q: np.ndarray, c: np.ndarray, upper: float, lam: np.ndarray) -> float:
    """Max complementarity-aware gradient violation of the box KKT system."""
    g = c - Q @ lam
    interior = (lam > 0.0) & (lam < upper)
    v = np.where(interior, np.abs(g), 0.0)
    v = np.maximum(v, np.where(lam <= 0.0, np.maximum(g, 0.0), 0.0))
    v = np.maximum(v, np.where(lam >= upper, np.maximum(-g, 0.0), 0.0))
    return float(v.max()) if v.size else 0.0


def _max_feasible_step(lam: np.ndarray, d: np.ndarray, upper: float) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        t_up = np.where(d > 0, (upper - lam) / d, np.inf)
        t_dn = np.where(d < 0, -lam / d, np.inf)
    return float(min(t_up.min(), t_dn.min()))


def solve_box_qp(prob: BoxQP, warm_start: np.ndarray | None = None) -> QPSolution:
    """Solve the box QP; returns the best iterate even when not converged."""
    Q, c, upper, tol = prob.Q, prob.c, prob.upper, prob.tol
    n = c.shape[0]
    lam = np.zeros(n) if warm_start is None else np.clip(np.asarray(warm_start, float), 0.0, upper)
    diag = np.diag(Q).copy()
    degen = diag < DEGENERATE_DIAG
    safe_diag = np.where(degen, 1.0, diag)

    sweeps = 0
    viol = kkt_violation(Q, c, upper, lam)
    if viol <= tol:
        return QPSolution(lam, viol, sweeps, True)

    for _ in range(prob.max_sweeps):
        sweeps += 1
        # exact single-coordinate maximization, cyclic order
        for i in range(n):
            if degen[i]:
                lam[i] = 0.0 if c[i] <= 0 else upper
            else:
                s = Q[i] @ lam - diag[i] * lam[i]
                lam[i] = min(max((c[i] - s) / diag[i], 0.0), upper)
        g = c - Q @ lam
        viol = kkt_violation(Q, c, upper, lam)
        if viol <= tol:
            return QPSolution(lam, viol, sweeps, True)

        # scaled projected-gradient step; frees bound coordinates in bulk
        d = np.clip(lam + g / safe_diag, 0.0, upper) - lam
        d[degen] = 0.0
        gd = g @ d
        if gd > 0.0:
            dQd = d @ Q @ d
            t = 1.0 if dQd <= 0.0 else min(1.0, gd / dQd)
            lam = lam + t * d
            g = c - Q @ lam
            viol = kkt_violation(Q, c, upper, lam)
            if viol <= tol:
                return QPSolution(lam, viol, sweeps, True)

        # Newton steps on the working face, ratio-tested to the first bound
        for _ in range(3 * n):
            free = (~degen) & (lam > 0.0) & (lam < upper)
            if not free.any():
                break
            nf = int(free.sum())
            Qff = Q[np.ix_(free, free)]
            jitter = 1e-12 * max(float(diag[free].max()), 1.0)
            try:
                df = np.linalg.solve(Qff + jitter * np.eye(nf), g[free])
            except np.linalg.LinAlgError:
                df, *_ = np.linalg.lstsq(Qff, g[free], rcond=1e-12)
            d = np.zeros(n)
            d[free] = df
            gd = g @ d
            if gd <= 0.0:
                break
            dQd = d @ Q @ d
            t_newton = gd / dQd if dQd > 0.0 else np.inf
            t_bound = _max_feasible_step(lam, d, upper)
            t = min(t_newton, t_bound)
            if not np.isfinite(t) or t <= 0.0:
                break
            lam = lam + t * d
            np.clip(lam, 0.0, upper, out=lam)
            if t == t_bound:
                # snap the blocking coordinate exactly onto its bound
                hit = np.where(d != 0, np.minimum(lam, upper - lam), np.inf)
                i = int(np.argmin(hit))
                lam[i] = 0.0 if lam[i] < upper / 2 else upper
            g = c - Q @ lam
            viol = kkt_violation(Q, c, upper, lam)
            if viol <= tol:
                return QPSolution(lam, viol, sweeps, True)
            if t_newton <= t_bound:
                break  # face optimum reached; re-select via the next sweep

    return QPSolution(lam, viol, sweeps, False)


@dataclass(frozen=True)
class AttackStep:
    """One perturbation subproblem: maximize ``a . delta - cost * |delta|_1``
    over the ball ``|delta|_2^2 <= budget``."""

    a: np.ndarray
    cost: float
    budget: float

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        if self.cost < 0 or self.budget < 0:
            raise ValueError("cost and budget must be nonnegative")


def attacker_delta(step: AttackStep) -> np.ndarray:
    """Closed-form maximizer: soft-threshold by cost, scale to the ball.

    With ``b_i = max(|a_i| - cost, 0)`` the maximizer is 0 when b = 0,
    else ``sign(a) * b * sqrt(budget) / |b|_2``; the zero vector is always
    feasible so the objective value is never negative.
    """
    b = np.maximum(np.abs(step.a) - step.cost, 0.0)
    norm = float(np.linalg.norm(b))
    if norm == 0.0 or step.budget == 0.0:
        return np.zeros_like(step.a)
    return np.sign(step.a) * b * (np.sqrt(step.budget) / norm)


def build_u_inverse(p: int, eta: float, neighbor_count: int) -> np.ndarray:
    """Diagonal of the inverse local quadratic term.

    The local quadratic term is the identity with the bias entry zeroed,
    plus ``2 * eta * |B_v|`` times the identity; its inverse is diagonal
    with the first p entries ``1 / (1 + 2 eta |B_v|)`` and the last entry
    ``1 / (2 eta |B_v|)``. Raises :class:`SingularU` for isolated nodes.
    """
    if neighbor_count < 1:
        raise SingularU("node has no neighbors; bias entry would be singular")
    if eta <= 0:
        raise ValueError("eta must be positive")
    d = np.empty(p + 1)
    d[:p] = 1.0 / (1.0 + 2.0 * eta * neighbor_count)
    d[p] = 1.0 / (2.0 * eta * neighbor_count)
    return d
