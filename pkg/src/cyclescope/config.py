"""Configuration records shared by the library, the CLI and the scripts."""
from __future__ import annotations

from dataclasses import dataclass, field

from .randprog import GenConfig
from .semantics import AnalysisConfig
from .soundness import SoundnessConfig

MODES = ("analyze", "run", "check-soundness", "dump-class-graph")
INPUT_KINDS = ("top", "acyclic", "empty")


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation, after argument parsing."""

    mode: str
    paths: tuple[str, ...] = ()
    entry: str | None = None
    facts_path: str | None = None
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    input_kind: str = "top"
    output_format: str = "text"
    show_shallow: bool = False
    read_values: tuple[int, ...] = ()
    int_args: tuple[tuple[str, int], ...] = ()
    random_programs: int = 0
    seed: int = 0
    soundness: SoundnessConfig = field(default_factory=SoundnessConfig)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.input_kind not in INPUT_KINDS:
            raise ValueError(f"unknown input kind {self.input_kind!r}")
        if self.soundness.heap_bound < 0 or self.soundness.samples_per_method <= 0:
            raise ValueError("bounds must be positive")
        if self.random_programs < 0:
            raise ValueError("program count must be non-negative")


__all__ = ["AnalysisConfig", "GenConfig", "INPUT_KINDS", "MODES", "RunConfig", "SoundnessConfig"]
