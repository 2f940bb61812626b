"""Epistemic model checking for the unfaithful-husbands puzzle."""

from .checker import IMPOSSIBLE, Surprisal, extension, holds, info_content, subjective_probability
from .errors import (
    CollapsedModelError,
    DomainError,
    ParseError,
    TruthfulnessViolation,
    UnsupportedScenario,
)
from .formula import nest_everyone, parse, render
from .kripke import KripkeModel, PointedModel, accessible, load_model, reachable, restrict, validate
from .village import (
    ScenarioSpec,
    Trace,
    at_least_one,
    build_village,
    check_S,
    check_T,
    run_protocol,
    run_protocol_fast,
)

__version__ = "0.1.0"

__all__ = [
    "IMPOSSIBLE",
    "CollapsedModelError",
    "DomainError",
    "KripkeModel",
    "ParseError",
    "PointedModel",
    "ScenarioSpec",
    "Surprisal",
    "Trace",
    "TruthfulnessViolation",
    "UnsupportedScenario",
    "accessible",
    "at_least_one",
    "build_village",
    "check_S",
    "check_T",
    "extension",
    "holds",
    "info_content",
    "load_model",
    "nest_everyone",
    "parse",
    "reachable",
    "render",
    "restrict",
    "run_protocol",
    "run_protocol_fast",
    "subjective_probability",
    "validate",
]
