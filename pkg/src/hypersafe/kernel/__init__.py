"""Incremental proof kernel: rules, symbolic discharger, script interpreter."""

from .core import (GUARDED, UNGUARDED, Goal, ImpConfig, ImpHyp, ImpSystem,
                   LtsConfig, LtsHyp, ProofKernel)
from .script import ProofResult, parse_script, run_script
from .symbolic import (DEFAULT_BUDGET, DischargeResult, LinExpr,
                       MemoryInvariant, SCAtom, SCBool, SCCmp, SCNot, SCAnd,
                       SCOr, SymEvent, SymMemory, ValueExpr, discharge,
                       lin_add, lin_const, lin_scale, lin_sub, lin_var)

__all__ = [
    "GUARDED", "UNGUARDED", "Goal", "ImpConfig", "ImpHyp", "ImpSystem",
    "LtsConfig", "LtsHyp", "ProofKernel",
    "ProofResult", "parse_script", "run_script",
    "DEFAULT_BUDGET", "DischargeResult", "LinExpr", "MemoryInvariant",
    "SCAtom", "SCBool", "SCCmp", "SCNot", "SCAnd", "SCOr", "SymEvent",
    "SymMemory", "ValueExpr", "discharge",
    "lin_add", "lin_const", "lin_scale", "lin_sub", "lin_var",
]
