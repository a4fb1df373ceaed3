"""dsvmsim: consensus-ADMM distributed SVM training with adversaries.

A desk-scale simulator for training linear SVMs over a connected network
of nodes by consensus ADMM, with a budgeted data-poisoning adversary at
compromised nodes and two resilience defenses (neighbor verification and
update rejection). Shipped preset scenarios reproduce the attack/defense
risk dynamics at small scale; see the README and ``dsvmsim list-presets``.
"""

from .adversary import (AttackerHook, AttackerSpec, HighDegreePair, RandomNode,
                        SingleNode, attacker_hook, expand_preset)
from .config import RunConfig, load_config, parse_config_text
from .dataset import (LabeledSet, NodePartition, augment, gen_gaussian,
                      gen_spambase_like, load_csv, minmax_scale, partition)
from .defenses import (DefensePolicy, RejectionConfig, VerificationConfig,
                       combined_residual_global, combined_residual_node,
                       rejection_gate, verify_neighbors)
from .engine import (EngineConfig, EngineState, Mailbox, NodeState, RiskTrace,
                     RoundReport, init_run, local_discriminant, predict_labels,
                     run, run_round)
from .errors import (BadCovariance, CapViolation, ConfigError, DimensionMismatch,
                     DsvmError, EmptyTestSet, InfeasibleTopology, InsufficientData,
                     MissingColumn, NonNumericFeature, ParseError, ShapeMismatch,
                     SingleClassNode, SingularU, UnknownNode)
from .metrics import (consensus_gap, empirical_risk_global, empirical_risk_node,
                      moving_average)
from .scenario import (ScenarioResult, build_components, list_presets, load_preset,
                       run_scenario, run_variant)
from .solvers import (AttackStep, BoxQP, QPSolution, attacker_delta,
                      build_u_inverse, solve_box_qp)
from .topology import (Topology, is_connected, make_topology, network_degree,
                       node_degree)

__version__ = "0.1.0"
