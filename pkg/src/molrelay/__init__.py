"""Analytical performance of diffusive molecular communication links with relays.

The library models a drift-diffusion channel whose information carrier is a
burst of molecules, computes closed-form detection and error performance
for direct, dual-hop, and N-hop decode-and-forward links under ISI,
multi-source interference, and counting noise, derives channel capacity
over the source prior, and cross-validates every closed form against a
Monte Carlo simulator of the physical channel.
"""

from .capacity import (
    BudgetPoint,
    BudgetSweepResult,
    CapacityResult,
    budget_sweep,
    capacity,
    information_rate,
    mutual_information,
)
from .channel import (
    ArrivalProfile,
    DiffusionLink,
    arrival_probability,
    arrival_profile,
    hitting_time_pdf,
)
from .detection import (
    EffectiveOdds,
    ThresholdEntry,
    brute_force_prior_ratio,
    decide,
    effective_prior_ratio,
    optimal_threshold,
    prior_odds,
)
from .errors import (
    ConfigError,
    ContractError,
    IndistinguishableHypothesesError,
    MolrelayError,
    NumericalError,
    ParameterError,
    UninformativeRelayError,
)
from .moments import (
    EmissionSchedule,
    HypothesisMoments,
    MsiParams,
    direct_link_moments,
    hypothesis_moments,
    relay_to_destination_moments,
    relay_to_relay_moments,
    source_to_relay_moments,
)
from .montecarlo import (
    SimConfig,
    SimReport,
    mc_backend,
    simulate_chain,
    wilson_halfwidth,
)
from .performance import (
    ChainConfig,
    ChainReport,
    NodePerformance,
    brute_force_relayed_rates,
    chain_rates,
    error_probability,
    qfunc,
    relayed_rates,
    roc_sweep,
    single_link_rates,
    system_metrics,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalProfile",
    "BudgetPoint",
    "BudgetSweepResult",
    "CapacityResult",
    "ChainConfig",
    "ChainReport",
    "ConfigError",
    "ContractError",
    "DiffusionLink",
    "EffectiveOdds",
    "EmissionSchedule",
    "HypothesisMoments",
    "IndistinguishableHypothesesError",
    "MolrelayError",
    "MsiParams",
    "NodePerformance",
    "NumericalError",
    "ParameterError",
    "SimConfig",
    "SimReport",
    "ThresholdEntry",
    "UninformativeRelayError",
    "arrival_probability",
    "arrival_profile",
    "brute_force_prior_ratio",
    "brute_force_relayed_rates",
    "budget_sweep",
    "capacity",
    "chain_rates",
    "decide",
    "direct_link_moments",
    "effective_prior_ratio",
    "error_probability",
    "hitting_time_pdf",
    "hypothesis_moments",
    "information_rate",
    "mc_backend",
    "mutual_information",
    "optimal_threshold",
    "prior_odds",
    "qfunc",
    "relay_to_destination_moments",
    "relay_to_relay_moments",
    "relayed_rates",
    "roc_sweep",
    "simulate_chain",
    "single_link_rates",
    "source_to_relay_moments",
    "system_metrics",
    "wilson_halfwidth",
]
