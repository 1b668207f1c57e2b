"""Penalty-weighted QUBO modeling and simulated annealing for nurse scheduling."""

from .poly import (
    CompiledModel,
    DegreeError,
    Expr,
    IsingModel,
    Registry,
    binary,
    gate_penalty,
    label,
    logic_expr,
    quadratize,
)
from .anneal import AnnealParams, Sample, SampleSet, best, default_beta_range, sample
from .nsp import (
    BuiltModel,
    InstanceError,
    NspInstance,
    RuleReport,
    Schedule,
    assemble,
    check_rules,
    decode,
    instance_from_config,
    saturdays,
)
from .oracle import OracleResult, SizeError, brute_force_min, enumerate_feasible

__all__ = [
    "AnnealParams", "BuiltModel", "CompiledModel", "DegreeError", "Expr",
    "InstanceError", "IsingModel", "NspInstance", "OracleResult", "Registry",
    "RuleReport", "Sample", "SampleSet", "Schedule", "SizeError", "assemble",
    "best", "binary", "brute_force_min", "check_rules", "decode",
    "default_beta_range", "enumerate_feasible", "gate_penalty",
    "instance_from_config", "label", "logic_expr", "quadratize", "sample",
    "saturdays",
]

__version__ = "0.1.0"
