"""Adversary configuration and the engine attack hook.

The attacker owns a set of compromised nodes; at each active round it
best-responds to the previous round's decision vector with the
closed-form budgeted perturbation (see :func:`dsvmsim.solvers.attacker_delta`).
Strategy presets expand a total budget cap into a concrete per-node
assignment using node degrees (higher-degree nodes make better targets).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapViolation, UnknownNode
from .solvers import AttackStep, attacker_delta
from .topology import Topology

__all__ = ["AttackerSpec", "AttackerHook", "attacker_hook", "expand_preset",
           "SingleNode", "HighDegreePair", "RandomNode"]


@dataclass(frozen=True)
class AttackerSpec:
    """Which nodes are compromised, their budgets, and when the attack starts."""

    compromised: frozenset[int]
    budget_per_node: dict[int, float]
    cost: float
    start_round: int = 0
    total_budget_cap: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "compromised", frozenset(self.compromised))
        if set(self.budget_per_node) != set(self.compromised):
            raise ValueError("budget_per_node keys must equal the compromised set")
        if any(b < 0 for b in self.budget_per_node.values()):
            raise ValueError("budgets must be nonnegative")
        if self.cost < 0:
            raise ValueError("cost must be nonnegative")
        if self.start_round < 0:
            raise ValueError("start_round must be >= 0")
        if (self.total_budget_cap is not None
                and sum(self.budget_per_node.values()) > self.total_budget_cap * (1 + 1e-12)):
            raise CapViolation(
                f"budgets sum to {sum(self.budget_per_node.values()):g}, "
                f"cap is {self.total_budget_cap:g}")

    def validate_against(self, topo: Topology) -> None:
        bad = [v for v in self.compromised if not (0 <= v < topo.node_count)]
        if bad:
            raise UnknownNode(f"compromised nodes {bad} not in the topology")


@dataclass
class AttackerHook:
    """Engine-facing adversary; returns each node's perturbation per round."""

    spec: AttackerSpec
    dim: int | None = field(default=None)

    @property
    def compromised_count(self) -> int:
        return len(self.spec.compromised)

    def delta(self, t: int, node: int, r: np.ndarray, c_l: float) -> np.ndarray:
        p = r.shape[0] - 1
        if node not in self.spec.compromised or t < self.spec.start_round:
            return np.zeros(p)
        a = self.compromised_count * c_l * r[:p]
        return attacker_delta(AttackStep(
            a=a, cost=self.spec.cost, budget=self.spec.budget_per_node[node]))


def attacker_hook(spec: AttackerSpec) -> AttackerHook:
    return AttackerHook(spec=spec)


# -- strategy presets --

@dataclass(frozen=True)
class SingleNode:
    """Spend the whole cap on one node."""
    node: int


@dataclass(frozen=True)
class HighDegreePair:
    """Split the cap over the two highest-degree nodes (ties by lowest id);
    balanced = 50/50, unbalanced = 75/25."""
    balanced: bool = True


@dataclass(frozen=True)
class RandomNode:
    """Spend the whole cap on one uniformly drawn node."""
    seed: int


def expand_preset(preset, topo: Topology, cap: float, cost: float,
                  start_round: int = 0) -> AttackerSpec:
    """Expand a strategy preset into a concrete AttackerSpec."""
    if isinstance(preset, SingleNode):
        if not (0 <= preset.node < topo.node_count):
            raise UnknownNode(f"node {preset.node} not in the topology")
        budgets = {preset.node: cap}
    elif isinstance(preset, HighDegreePair):
        order = sorted(range(topo.node_count),
                       key=lambda v: (-len(topo.neighbors[v]), v))
        first, second = order[0], order[1]
        if preset.balanced:
            budgets = {first: cap / 2, second: cap / 2}
        else:
            budgets = {first: 0.75 * cap, second: 0.25 * cap}
    elif isinstance(preset, RandomNode):
        rng = np.random.default_rng(preset.seed)
        budgets = {int(rng.integers(topo.node_count)): cap}
    else:
        raise TypeError(f"unknown strategy preset {preset!r}")
    spec = AttackerSpec(
        compromised=frozenset(budgets),
        budget_per_node=budgets,
        cost=cost,
        start_round=start_round,
        total_budget_cap=cap,
    )
    spec.validate_against(topo)
    return spec
