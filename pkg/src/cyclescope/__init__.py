"""Reachability and cyclicity analysis for a small object-oriented language."""
from .domain import AbstractState, BOTTOM, Universe, join, leq, normalize
from .frontend import FrontendError, TypedProgram, load_program
from .classgraph import ClassGraph, build_class_graph
from .auxfacts import Facts, FactTable, build_fact_table
from .semantics import AnalysisConfig, AnalysisResult, Analyzer, analyze_program, top_state

__version__ = "0.1.0"

__all__ = [
    "AbstractState", "AnalysisConfig", "AnalysisResult", "Analyzer", "BOTTOM", "ClassGraph",
    "FactTable", "Facts", "FrontendError", "TypedProgram", "Universe", "analyze_program",
    "build_class_graph", "build_fact_table", "join", "leq", "load_program", "normalize", "top_state",
]
