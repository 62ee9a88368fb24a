"""Slotted-ALOHA medium-access game with dynamic altruism."""
from .errors import DomainError, HeterogeneousPlayers, NoRoot, NonSymmetric, NotConverged
from .game_model import (EPS, AltruismMode, GameSpec, PlayerParams, UtilityVariant, Variant,
                         altruism_factor, idle_time, mean_others_throughput, net_utility,
                         throughput, utility_gradient, utility_hessian_cross)
from .equilibrium import (NepResult, SymmetricCondition, best_response, find_heterogeneous_neps,
                          find_symmetric_neps, solve_heterogeneous_nep, symmetric_condition_eval,
                          symmetric_existence_report)
from .stability import (Stability, StabilityReport, dynamics_jacobian, gershgorin_check,
                        is_negative_definite, rosen_matrix, stability_report)
from .dynamics import BasinReport, FlowConfig, TrajectoryRecord, estimate_basins, flow_field, integrate
from .slot_sim import SlotBatchResult, estimate_observables, simulate_slots

__version__ = "0.1.0"
