"""
Workflow stages behind the command-line subcommands.
"""
from workflows.base import BaseStage
from workflows.kam_run import KamRunStage, run_kam
from workflows.lindstedt import LindstedtStage, run_lindstedt
from workflows.spectrum import SpectrumStage, run_spectrum
from workflows.uniqueness import UniquenessReport, UniquenessStage, run_uniqueness
from workflows.validate import ValidateStage, run_validate

__all__ = [
    "BaseStage",
    "KamRunStage", "run_kam",
    "LindstedtStage", "run_lindstedt",
    "SpectrumStage", "run_spectrum",
    "UniquenessReport", "UniquenessStage", "run_uniqueness",
    "ValidateStage", "run_validate",
]
