"""chainforge: exact analysis of control strategies for chain assembly.

Core objects: configurations (multisets of chain lengths), gate models
(success merges, failure trims), quality tables (exact expected final
length under best or worst control), fixed strategies with exact and
Monte Carlo distributions, and resource estimates for weaving square
sheets from chains.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .chains import (
    CZ,
    Configuration,
    DPC,
    EMPTY,
    FUSION,
    Fuse,
    GATES,
    GateModel,
    HALT,
    Halt,
    KLM_CZ,
    apply_failure,
    apply_success,
    canonicalize,
    enumerate_configs,
    gate_from_name,
    legal_actions,
)
from .errors import ChainforgeError, GuardExceeded, ModelError, UnknownConfiguration
from .exact import Poly, Rational, format_rational, parse_probability, parse_rational
from .quality import (
    QualityTable,
    RunSpec,
    brute_force_value,
    build_quality_table,
    policy_action,
    quality,
    symbolic_quality,
)
from .strategies import (
    DistSummary,
    Greed,
    Modesty,
    STRATEGIES,
    Static,
    Strategy,
    TablePolicy,
    exact_distribution,
    simulate,
    strategy_decide,
    strategy_from_name,
)
from .weaving import (
    binomial_tail,
    cost_breakdown,
    exact_success,
    per_site_cost,
    solve_overhead,
    success_bound,
)

__all__ = [
    "__version__",
    "CZ",
    "Configuration",
    "DPC",
    "EMPTY",
    "FUSION",
    "Fuse",
    "GATES",
    "GateModel",
    "HALT",
    "Halt",
    "KLM_CZ",
    "ChainforgeError",
    "GuardExceeded",
    "ModelError",
    "UnknownConfiguration",
    "Poly",
    "Rational",
    "DistSummary",
    "Greed",
    "Modesty",
    "STRATEGIES",
    "Static",
    "Strategy",
    "TablePolicy",
    "QualityTable",
    "RunSpec",
    "apply_failure",
    "apply_success",
    "binomial_tail",
    "brute_force_value",
    "build_quality_table",
    "canonicalize",
    "cost_breakdown",
    "enumerate_configs",
    "exact_distribution",
    "exact_success",
    "format_rational",
    "gate_from_name",
    "legal_actions",
    "parse_probability",
    "parse_rational",
    "per_site_cost",
    "policy_action",
    "quality",
    "simulate",
    "solve_overhead",
    "strategy_decide",
    "strategy_from_name",
    "success_bound",
    "symbolic_quality",
]
