"""Scenario assembly and execution: config -> runs -> trace files.

A scenario file describes one experiment, possibly with named variants
(attack on/off, defense settings, alternative topologies). Every variant
runs with the same master seed; per-stage seeds (data generation,
partitioning, engine init) are derived from it, so variants differ only
in what they configure.

Outputs per scenario directory:

- ``trace.csv``       combined trace, one row per (variant, round, node)
- ``summary.txt``     final and trailing-window risks per variant
- ``config_echo.cfg`` the resolved configuration actually run
- ``risk_global.svg`` / ``risk_nodes.svg`` when figures are requested
"""

from __future__ import annotations

import importlib.resources
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import adversary as adv
from . import dataset as ds
from .config import RunConfig, load_config, run_id
from .errors import ConfigError, DsvmError
from .defenses import DefensePolicy, RejectionConfig, VerificationConfig
from .engine import EngineConfig, RiskTrace, run
from .metrics import moving_average
from .topology import Topology, make_topology

__all__ = ["ScenarioResult", "build_components", "run_scenario", "list_presets",
           "preset_path", "load_preset", "TRACE_COLUMNS"]

TRACE_COLUMNS = ("round", "node", "local_risk", "global_risk", "consensus_gap",
                 "J_v", "delta_norm_sq", "verified_count", "rejected")


@dataclass
class ScenarioResult:
    name: str
    out_dir: Path | None
    seed: int
    run_id: str
    traces: dict[str, RiskTrace]
    elapsed: dict[str, float]


def _derive_seeds(master: int) -> dict[str, int]:
    state = np.random.SeedSequence(master).generate_state(4)
    return {
        "dataset": int(state[0]),
        "partition": int(state[1]),
        "engine": int(state[2]),
        "topology": int(state[3]),
    }


def _build_dataset(cfg: RunConfig, seed: int) -> ds.LabeledSet:
    kind = cfg.require("dataset.kind").lower()
    explicit = cfg.get_int("dataset.seed")
    seed = explicit if explicit is not None else seed
    if kind == "gaussian":
        data = ds.gen_gaussian(
            n_per_class=cfg.get_int("dataset.n_per_class", 4000),
            mean_pos=cfg.get_floats("dataset.mean_pos", [1.0, 1.0]),
            mean_neg=cfg.get_floats("dataset.mean_neg", [3.0, 3.0]),
            covariance=cfg.get_matrix("dataset.cov", [[1.0, 0.0], [0.0, 1.0]]),
            seed=seed,
        )
    elif kind == "csv":
        label_col = cfg.require("dataset.label_column")
        data = ds.load_csv(
            cfg.require("dataset.path"),
            label_column=int(label_col) if _intlike(label_col) else label_col,
            positive_label=cfg.get("dataset.positive_label", "1"),
        )
    elif kind == "spambase-like":
        data = ds.gen_spambase_like(
            n_rows=cfg.get_int("dataset.rows", 4601),
            seed=seed,
            sep=cfg.get_float("dataset.sep", 0.45),
            label_noise=cfg.get_float("dataset.label_noise", 0.04),
        )
    else:
        raise ConfigError(f"dataset.kind: unknown kind {kind!r}")
    if cfg.get("dataset.normalize", "off").lower() in ("minmax", "min-max"):
        data = ds.minmax_scale(data)
    return data


def _intlike(s: str) -> bool:
    try:
        int(s)
        return True
    except ValueError:
        return False


def _build_topology(cfg: RunConfig, seed: int) -> Topology:
    kind = cfg.require("topology.kind").lower()
    return make_topology(
        kind,
        node_count=cfg.get_int("topology.nodes"),
        degree=cfg.get_int("topology.degree"),
        edges=cfg.get_edges("topology.edges"),
        seed=cfg.get_int("topology.seed", seed),
    )


def _build_attacker(cfg: RunConfig, topo: Topology) -> adv.AttackerHook | None:
    has_any = any(k.startswith("attacker.") for k in cfg.raw)
    if not cfg.get_bool("attacker.enabled", has_any):
        return None
    cost = cfg.get_float("attacker.cost", 0.0)
    start = cfg.get_int("attacker.start_round", 0)
    cap = cfg.get_float("attacker.cap")
    preset_name = cfg.get("attacker.preset")
    if preset_name is not None:
        if cap is None:
            raise ConfigError("attacker.preset requires attacker.cap")
        spec = adv.expand_preset(_strategy(preset_name), topo, cap, cost, start)
    else:
        nodes = cfg.get_ints("attacker.nodes")
        if not nodes:
            raise ConfigError("attacker.nodes (or attacker.preset) is required")
        budgets = cfg.get_floats("attacker.budgets")
        if budgets is None:
            raise ConfigError("attacker.budgets is required")
        if len(budgets) == 1:
            budgets = budgets * len(nodes)
        if len(budgets) != len(nodes):
            raise ConfigError("attacker.budgets must match attacker.nodes")
        spec = adv.AttackerSpec(
            compromised=frozenset(nodes),
            budget_per_node=dict(zip(nodes, budgets)),
            cost=cost,
            start_round=start,
            total_budget_cap=cap,
        )
        spec.validate_against(topo)
    return adv.attacker_hook(spec)


def _strategy(name: str):
    name = name.lower()
    if name.startswith("single:"):
        return adv.SingleNode(int(name.split(":", 1)[1]))
    if name == "pair_balanced":
        return adv.HighDegreePair(balanced=True)
    if name == "pair_unbalanced":
        return adv.HighDegreePair(balanced=False)
    if name.startswith("random:"):
        return adv.RandomNode(int(name.split(":", 1)[1]))
    raise ConfigError(f"attacker.preset: unknown strategy {name!r}")


def _build_defense(cfg: RunConfig) -> DefensePolicy | None:
    tau = cfg.get_float_or_off("defense.verification.tau")
    rho = cfg.get_float_or_off("defense.rejection.rho")
    if tau is None and rho is None:
        return None
    return DefensePolicy(
        verification=VerificationConfig(tau) if tau is not None else None,
        rejection=RejectionConfig(
            rho, j_init=cfg.get_float("defense.rejection.j_init", 1e18))
        if rho is not None else None,
        shrink_quadratic=cfg.get_bool("defense.verification.shrink_u", False),
    )


def build_components(cfg: RunConfig, seed_override: int | None = None):
    """Materialize (engine config, partition, topology, attacker, defense).

    Any domain error raised while assembling components (bad topology,
    insufficient data, unknown attacker node, ...) is a configuration
    problem and is re-raised as :class:`ConfigError`.
    """
    try:
        return _build_components(cfg, seed_override)
    except ConfigError:
        raise
    except (DsvmError, ValueError) as e:
        raise ConfigError(f"invalid scenario: {e}") from e


def _build_components(cfg: RunConfig, seed_override: int | None):
    master = seed_override if seed_override is not None else cfg.get_int("engine.seed", 0)
    seeds = _derive_seeds(master)
    data = _build_dataset(cfg, seeds["dataset"])
    topo = _build_topology(cfg, seeds["topology"])
    train = cfg.get("partition.train_per_node")
    if train is None:
        raise ConfigError("missing required key 'partition.train_per_node'")
    train_counts = cfg.get_ints("partition.train_per_node")
    part = ds.partition(
        data, topo,
        train_per_node=train_counts[0] if len(train_counts) == 1 else train_counts,
        test_per_node=cfg.get_int("partition.test_per_node", 500),
        seed=seeds["partition"],
    )
    engine_cfg = EngineConfig(
        c_l=cfg.get_float("engine.c_l", 1.0),
        eta=cfg.get_float("engine.eta", 1.0),
        rounds=cfg.get_int("engine.rounds", 400),
        seed=seeds["engine"],
        init_mode=cfg.get("engine.init", "zero"),
        init_range=cfg.get_float("engine.init_range", 1.0),
        inner_rounds=cfg.get_int("engine.inner_rounds", 1),
        qp_tol=cfg.get_float("engine.qp_tol", 1e-8),
    )
    attacker = _build_attacker(cfg, topo)
    defense = _build_defense(cfg)
    return engine_cfg, part, topo, attacker, defense


def run_variant(cfg: RunConfig, seed_override: int | None = None) -> RiskTrace:
    engine_cfg, part, topo, attacker, defense = build_components(cfg, seed_override)
    return run(engine_cfg, part, topo, attacker, defense)


def run_scenario(cfg: RunConfig, out_dir=None, seed_override: int | None = None,
                 emit_svg: bool = False, name: str | None = None) -> ScenarioResult:
    """Run every variant of a scenario and write trace files if out_dir given."""
    master = seed_override if seed_override is not None else cfg.get_int("engine.seed", 0)
    traces: dict[str, RiskTrace] = {}
    elapsed: dict[str, float] = {}
    for variant_name, variant_cfg in cfg.expand_variants():
        t0 = time.perf_counter()
        traces[variant_name] = run_variant(variant_cfg, seed_override=master)
        elapsed[variant_name] = time.perf_counter() - t0
    result = ScenarioResult(
        name=name or cfg.get("preset.name", "scenario"),
        out_dir=Path(out_dir) if out_dir is not None else None,
        seed=master,
        run_id=run_id(cfg, master),
        traces=traces,
        elapsed=elapsed,
    )
    if out_dir is not None:
        _write_outputs(result, cfg, emit_svg)
    return result


def _write_outputs(result: ScenarioResult, cfg: RunConfig, emit_svg: bool) -> None:
    out = result.out_dir
    out.mkdir(parents=True, exist_ok=True)
    multi = len(result.traces) > 1

    lines = [f"# run_id={result.run_id}", f"# seed={result.seed}",
             f"# created={time.strftime('%Y-%m-%dT%H:%M:%S')}"]
    header = (("variant",) if multi else ()) + TRACE_COLUMNS
    lines.append(",".join(header))
    for vname, trace in result.traces.items():
        for rep in trace.reports:
            for v in range(trace.node_count):
                row = ((vname,) if multi else ()) + (
                    rep.round_index, v,
                    f"{rep.local_risks[v]:.10g}", f"{rep.global_risk:.10g}",
                    f"{rep.consensus_gap:.10g}", f"{rep.J[v]:.10g}",
                    f"{rep.delta_norm_sq[v]:.10g}", rep.trusted_counts[v],
                    int(rep.rejected[v]))
                lines.append(",".join(str(x) for x in row))
    (out / "trace.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    window = cfg.get_int("output.ma_window", 1)
    summary = [f"run_id: {result.run_id}", f"seed: {result.seed}"]
    for vname, trace in result.traces.items():
        g = trace.global_risks()
        tail = g[-min(100, len(g)):]
        summary.append(
            f"{vname}: rounds={trace.rounds} final_global_risk={g[-1]:.4f} "
            f"final100_mean={float(np.mean(tail)):.4f} "
            f"ma{window}_final={float(moving_average(g, window)[-1]):.4f} "
            f"elapsed_s={result.elapsed[vname]:.2f}")
    (out / "summary.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")

    (out / "config_echo.cfg").write_text(cfg.canonical_text(), encoding="utf-8")

    if emit_svg:
        from . import plots
        plots.render_scenario_figures(result, out, ma_window=window)


# -- shipped presets ------------------------------------------------------

def _preset_dir():
    return importlib.resources.files("dsvmsim") / "presets"


def list_presets() -> list[str]:
    return sorted(p.name[:-4] for p in _preset_dir().iterdir() if p.name.endswith(".cfg"))


def preset_path(name: str):
    path = _preset_dir() / f"{name}.cfg"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(list_presets())}")
    return path


def load_preset(name: str) -> RunConfig:
    return load_config(preset_path(name))
