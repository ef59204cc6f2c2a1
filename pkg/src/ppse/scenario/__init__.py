"""Scenario language, catalog and runner."""

from .builtins import builtin, builtin_names
from .dsl import parse, parse_syntax, render, tokenize
from .runner import Built, RunReport, build, default_tol, run
from .spec import Hamiltonian, Level, Measure, ScenarioSpec, Selection

__all__ = [
    "Built",
    "Hamiltonian",
    "Level",
    "Measure",
    "RunReport",
    "ScenarioSpec",
    "Selection",
    "build",
    "builtin",
    "builtin_names",
    "default_tol",
    "parse",
    "parse_syntax",
    "render",
    "run",
    "tokenize",
]
