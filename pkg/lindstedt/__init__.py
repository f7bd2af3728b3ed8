"""
Lindstedt series: approximate tori and frequency expansions by order.
"""
from lindstedt.multiplier import MultiplierTable, multiplier, multiplier_table, nonresonance_check
from lindstedt.recursion import (
    assemble_seed,
    build_series,
    first_order,
    frequency_combination,
    lindstedt_step,
    residual_slope,
    twist_coefficient,
)
from lindstedt.series import (
    LindstedtReport,
    LindstedtSeries,
    NonresonanceReport,
    load_series,
    save_series,
    series_json,
)

__all__ = [
    "MultiplierTable", "multiplier", "multiplier_table", "nonresonance_check",
    "assemble_seed", "build_series", "first_order", "frequency_combination", "lindstedt_step",
    "residual_slope", "twist_coefficient",
    "LindstedtReport", "LindstedtSeries", "NonresonanceReport", "load_series", "save_series", "series_json",
]
