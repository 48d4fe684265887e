"""Model checking and strategy analysis for multi-seller diffusion auctions."""

from .analysis import (
    NeQuery,
    NeResult,
    NeViolation,
    StrategyQuery,
    StrategyResult,
    check_ne_direct,
    ne_formula,
    strategy_exists,
    translate,
)
from .auction import AllocationResult, evaluate, ranked_bidders, register_rule, smf_evaluate
from .checker import CheckQuery, CheckStats, check, check_strategic
from .errors import DamError
from .formula import SELF, Formula, desugar, format_formula, names_of
from .gadgets import (
    CnfInstance,
    QbfInstance,
    expressivity_pair,
    gen_qbf_gadget,
    gen_sat_gadget,
    qbf_oracle,
    read_dimacs,
    read_qdimacs,
    sat_oracle,
)
from .mechjson import load_mechanism, mechanism_from_dict, mechanism_to_dict, save_mechanism
from .model import (
    BUYER,
    SELLER,
    SKIP,
    AgentId,
    JointAction,
    MarketNetwork,
    Mechanism,
    action_precondition,
    apply_joint_action,
    joint_action,
    resolve_name,
    validate_mechanism,
)
from .parser import parse_formula

__version__ = "0.1.0"

__all__ = [
    "AgentId",
    "AllocationResult",
    "BUYER",
    "CheckQuery",
    "CheckStats",
    "CnfInstance",
    "DamError",
    "Formula",
    "JointAction",
    "MarketNetwork",
    "Mechanism",
    "NeQuery",
    "NeResult",
    "NeViolation",
    "QbfInstance",
    "SELF",
    "SELLER",
    "SKIP",
    "StrategyQuery",
    "StrategyResult",
    "action_precondition",
    "apply_joint_action",
    "check",
    "check_ne_direct",
    "check_strategic",
    "desugar",
    "evaluate",
    "expressivity_pair",
    "format_formula",
    "gen_qbf_gadget",
    "gen_sat_gadget",
    "joint_action",
    "load_mechanism",
    "mechanism_from_dict",
    "mechanism_to_dict",
    "names_of",
    "ne_formula",
    "parse_formula",
    "qbf_oracle",
    "ranked_bidders",
    "read_dimacs",
    "read_qdimacs",
    "register_rule",
    "resolve_name",
    "sat_oracle",
    "save_mechanism",
    "smf_evaluate",
    "strategy_exists",
    "translate",
    "validate_mechanism",
]
