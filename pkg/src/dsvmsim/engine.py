"""Synchronous round engine for consensus-ADMM SVM training.

Each round runs six phases with barrier semantics:

  (a) the adversary hook refreshes per-node perturbations from the
      previous round's decision vectors;
  (b) every node solves its box QP for the multipliers and recomputes its
      decision vector r = [w; bias];
  (c) every node broadcasts r to all graph neighbors through the mailbox;
      inboxes are visible only after all sends;
  (d) the defense hook may rebuild per-node trusted neighbor sets from the
      received messages (norm-ratio verification);
  (e) consensus variables and multipliers are updated over trusted
      neighbors only;
  (f) the defense hook may compute the per-node combined residual and
      revert the round at nodes whose residual grew too fast (rejection).

Per-node work inside a phase is independent; a thread pool can run phase
(b) concurrently without changing results. Neighbor iteration order is
always sorted, so traces are bitwise reproducible for a given seed
regardless of worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import NodePartition, augment
from .defenses import combined_residual_node
from .errors import DimensionMismatch, ShapeMismatch
from .metrics import consensus_gap
from .solvers import BoxQP, build_u_inverse, solve_box_qp
from .topology import Topology

__all__ = ["EngineConfig", "NodeState", "EngineState", "RoundReport", "RiskTrace",
           "Mailbox", "init_run", "run_round", "run", "local_discriminant",
           "predict_labels", "WORKERS_ENV"]

WORKERS_ENV = "DSVMSIM_WORKERS"
J_INIT = 1e18


@dataclass
class EngineConfig:
    """Training loop parameters.

    ``init_mode`` is ``"zero"`` or ``"uniform"``; uniform draws r, the
    multipliers, and the consensus variables from ±``init_range``
    (multipliers are then clipped into their box).
    """

    c_l: float = 1.0
    eta: float = 1.0
    rounds: int = 400
    seed: int = 0
    init_mode: str = "zero"
    init_range: float = 1.0
    inner_rounds: int = 1   # learner rounds per adversary refresh
    qp_tol: float = 1e-8

    def __post_init__(self):
        if self.c_l <= 0 or self.eta <= 0:
            raise ValueError("c_l and eta must be positive")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.init_mode not in ("zero", "uniform"):
            raise ValueError(f"unknown init_mode {self.init_mode!r}")
        if self.inner_rounds < 1:
            raise ValueError("inner_rounds must be >= 1")


@dataclass
class NodeState:
    """Mutable per-node iterates and defense bookkeeping."""

    r: np.ndarray                    # decision vector [w; bias], length p+1
    lam: np.ndarray                  # QP multipliers, length N_v
    alpha: np.ndarray                # consensus multipliers, length p+1
    omega: dict[int, np.ndarray]     # per-neighbor consensus variables
    delta: np.ndarray                # adversary perturbation, length p
    trusted: tuple[int, ...]         # current trusted neighbor ids, sorted
    J: float = J_INIT                # last accepted combined residual
    # snapshot of the previous accepted round, used by residuals/rejection
    prev: dict = field(default_factory=dict, repr=False)


class Mailbox:
    """Reliable in-memory broadcast with an explicit send/deliver barrier."""

    def __init__(self, topology: Topology):
        self._topology = topology
        self._staged: list[dict[int, np.ndarray]] = [{} for _ in range(topology.node_count)]
        self._inbox: list[dict[int, np.ndarray]] = [{} for _ in range(topology.node_count)]

    def send(self, src: int, payload: np.ndarray) -> None:
        """Stage a copy of ``payload`` for every graph neighbor of ``src``."""
        for dst in self._topology.neighbors[src]:
            self._staged[dst][src] = payload.copy()

    def deliver(self) -> None:
        """Make all staged messages visible; called once per round."""
        for v in range(self._topology.node_count):
            self._inbox[v] = self._staged[v]
            self._staged[v] = {}

    def inbox(self, v: int) -> dict[int, np.ndarray]:
        return self._inbox[v]


@dataclass
class RoundReport:
    round_index: int
    r: list[np.ndarray]
    local_risks: list[float]
    global_risk: float
    consensus_gap: float
    J: list[float]
    delta_norm_sq: list[float]
    trusted_counts: list[int]
    rejected: list[bool]
    qp_converged: bool


@dataclass
class RiskTrace:
    """Full run output: one RoundReport per round plus run metadata."""

    reports: list[RoundReport]
    node_count: int
    test_sizes: list[int]
    config: EngineConfig
    final_r: list[np.ndarray]

    @property
    def rounds(self) -> int:
        return len(self.reports)

    def global_risks(self) -> np.ndarray:
        return np.array([rep.global_risk for rep in self.reports])

    def local_risks(self, v: int) -> np.ndarray:
        return np.array([rep.local_risks[v] for rep in self.reports])


class EngineState:
    """Precomputed per-node problem data plus mutable node states."""

    def __init__(self, cfg: EngineConfig, part: NodePartition, topo: Topology):
        if part.node_count != topo.node_count:
            raise ShapeMismatch(
                f"partition has {part.node_count} nodes, topology {topo.node_count}")
        if not part.augmented:
            part = augment(part)
        self.cfg = cfg
        self.topology = topo
        self.partition = part
        self.dim = part.dim
        V = topo.node_count
        self.upper = V * cfg.c_l

        # constant per-node operators: Q = Y X U^-1 X' Y, M = Y X U^-1, A = X' Y
        self.u_inv, self.Q, self.M, self.A = [], [], [], []
        self.test_matrix, self.test_labels = [], []
        for v in range(V):
            u_inv = build_u_inverse(self.dim, cfg.eta, len(topo.neighbors[v]))
            yx = part.label_diag[v][:, None] * part.augmented[v]
            self.u_inv.append(u_inv)
            self.M.append(yx * u_inv)
            self.Q.append(np.ascontiguousarray((yx * u_inv) @ yx.T))
            self.A.append(np.ascontiguousarray(yx.T))
            t = part.test[v]
            self.test_matrix.append(np.hstack([t.features, np.ones((len(t), 1))]))
            self.test_labels.append(t.labels)

        self._shrink_ops_cache: dict[tuple[int, int], tuple] = {}
        rng = np.random.default_rng(cfg.seed)
        p1 = self.dim + 1
        self.nodes: list[NodeState] = []
        for v in range(V):
            n_v = len(part.train[v])
            if cfg.init_mode == "zero":
                r = np.zeros(p1)
                lam = np.zeros(n_v)
                omega = {u: np.zeros(p1) for u in topo.neighbors[v]}
            else:
                lo, hi = -cfg.init_range, cfg.init_range
                r = rng.uniform(lo, hi, p1)
                lam = np.clip(rng.uniform(lo, hi, n_v), 0.0, self.upper)
                omega = {u: rng.uniform(lo, hi, p1) for u in topo.neighbors[v]}
            self.nodes.append(NodeState(
                r=r, lam=lam, alpha=np.zeros(p1), omega=omega,
                delta=np.zeros(self.dim), trusted=topo.neighbors[v]))
        self.mailbox = Mailbox(topo)
        self.t = 0
        self.all_qp_converged = True

    def workers(self) -> int:
        try:
            return max(1, int(os.environ.get(WORKERS_ENV, "1")))
        except ValueError:
            return 1

    def node_ops(self, v: int, neighbor_count: int):
        """Per-node operators for a given neighbor count (shrink variant cached)."""
        if neighbor_count == len(self.topology.neighbors[v]):
            return self.u_inv[v], self.Q[v], self.M[v], self.A[v]
        key = (v, neighbor_count)
        if key not in self._shrink_ops_cache:
            u_inv = build_u_inverse(self.dim, self.cfg.eta, neighbor_count)
            yx = self.partition.label_diag[v][:, None] * self.partition.augmented[v]
            m = yx * u_inv
            self._shrink_ops_cache[key] = (u_inv, np.ascontiguousarray(m @ yx.T), m, self.A[v])
        return self._shrink_ops_cache[key]


def init_run(cfg: EngineConfig, part: NodePartition, topo: Topology) -> EngineState:
    """Build an initialized engine state; deterministic per (cfg, seed)."""
    return EngineState(cfg, part, topo)


def local_discriminant(r: np.ndarray, x) -> float:
    """Score of a sample under a decision vector: dot([x, 1], r)."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] + 1 != r.shape[0]:
        raise DimensionMismatch(f"sample dim {x.shape[0]} vs decision dim {r.shape[0] - 1}")
    return float(x @ r[:-1] + r[-1])


def predict_labels(r: np.ndarray, features_aug: np.ndarray) -> np.ndarray:
    """Signs of the scores, with ties going to +1."""
    return np.where(features_aug @ r >= 0.0, 1.0, -1.0)


def _node_update(state: EngineState, v: int, va_cl: float, shrink: bool):
    node = state.nodes[v]
    cfg = state.cfg
    if shrink:
        u_inv, q, m, a = state.node_ops(v, max(1, len(node.trusted)))
    else:
        u_inv, q, m, a = state.node_ops(v, len(state.topology.neighbors[v]))
    f = 2.0 * node.alpha
    for u in node.trusted:
        f = f - 2.0 * cfg.eta * node.omega[u]
    if va_cl:
        f = f + va_cl * np.concatenate([node.delta, [0.0]])
    c = 1.0 + m @ f
    sol = solve_box_qp(BoxQP(q, c, state.upper, tol=cfg.qp_tol), warm_start=node.lam)
    node.lam = sol.lam
    node.r = u_inv * (a @ sol.lam - f)
    return sol.converged


def run_round(state: EngineState, adversary=None, defense=None):
    """Advance one round; returns (state, RoundReport). Mutates ``state``."""
    cfg = state.cfg
    topo = state.topology
    V = topo.node_count
    t = state.t
    va_cl = (adversary.compromised_count * cfg.c_l) if adversary is not None else 0.0

    # (a) adversary refresh, acting on previous-round decision vectors
    if adversary is not None and t % cfg.inner_rounds == 0:
        for v in range(V):
            state.nodes[v].delta = adversary.delta(t, v, state.nodes[v].r, cfg.c_l)

    # snapshot previous accepted round (residuals + rejection restore point)
    for node in state.nodes:
        node.prev = {
            "lam": node.lam.copy(), "r": node.r.copy(), "alpha": node.alpha.copy(),
            "omega": {u: w.copy() for u, w in node.omega.items()}, "J": node.J,
        }

    # (b) local multiplier and decision updates
    shrink = bool(defense is not None and getattr(defense, "shrink_quadratic", False))
    if state.workers() > 1:
        with ThreadPoolExecutor(max_workers=state.workers()) as pool:
            ok = list(pool.map(lambda v: _node_update(state, v, va_cl, shrink), range(V)))
    else:
        ok = [_node_update(state, v, va_cl, shrink) for v in range(V)]
    if not all(ok):
        state.all_qp_converged = False

    # (c) synchronous broadcast
    for v in range(V):
        state.mailbox.send(v, state.nodes[v].r)
    state.mailbox.deliver()

    # (d) trust refresh
    if defense is not None:
        for v in range(V):
            state.nodes[v].trusted = defense.trusted_set(
                state.nodes[v].r, state.mailbox.inbox(v), topo.neighbors[v])

    # (e) consensus variables over trusted neighbors
    for v in range(V):
        node = state.nodes[v]
        inbox = state.mailbox.inbox(v)
        acc = np.zeros(state.dim + 1)
        for u in node.trusted:
            node.omega[u] = 0.5 * (node.r + inbox[u])
            acc += node.r - inbox[u]
        node.alpha = node.alpha + 0.5 * cfg.eta * acc

    # (f) residuals and optional rejection
    rejected = [False] * V
    for v in range(V):
        node = state.nodes[v]
        j_new = combined_residual_node(
            node.omega, node.prev["omega"], node.alpha, node.prev["alpha"], cfg.eta)
        if defense is not None:
            rejected[v] = not defense.gate(node, j_new)
        else:
            node.J = j_new

    state.t = t + 1
    miscounts = [_node_misclassified(state, v) for v in range(V)]
    report = RoundReport(
        round_index=state.t,
        r=[node.r.copy() for node in state.nodes],
        local_risks=[m / len(state.test_labels[v]) for v, m in enumerate(miscounts)],
        global_risk=sum(miscounts) / sum(len(tl) for tl in state.test_labels),
        consensus_gap=consensus_gap([node.r for node in state.nodes]),
        J=[node.J for node in state.nodes],
        delta_norm_sq=[float(node.delta @ node.delta) for node in state.nodes],
        trusted_counts=[len(node.trusted) for node in state.nodes],
        rejected=rejected,
        qp_converged=all(ok),
    )
    return state, report


def _node_misclassified(state: EngineState, v: int) -> int:
    pred = predict_labels(state.nodes[v].r, state.test_matrix[v])
    return int(np.sum(pred != state.test_labels[v]))


def run(cfg: EngineConfig, part: NodePartition, topo: Topology,
        adversary=None, defense=None) -> RiskTrace:
    """Run the configured number of rounds and collect the full trace."""
    state = init_run(cfg, part, topo)
    reports = []
    for _ in range(cfg.rounds):
        state, rep = run_round(state, adversary, defense)
        reports.append(rep)
    return RiskTrace(
        reports=reports,
        node_count=topo.node_count,
        test_sizes=[len(tl) for tl in state.test_labels],
        config=cfg,
        final_r=[node.r.copy() for node in state.nodes],
    )
