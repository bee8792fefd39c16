from src.experiments.runner import (
    SCHEMES,
    INITS,
    ConvergenceStudyError,
    run_single,
    alpha_sweep,
    convergence_study,
    keps_study,
    fit_slope,
)
from src.experiments.presets import Preset, PRESETS, get_preset
from src.experiments.output import emit_csv, read_sweep_csv, emit_plot_data

__all__ = [
    "SCHEMES",
    "INITS",
    "ConvergenceStudyError",
    "run_single",
    "alpha_sweep",
    "convergence_study",
    "keps_study",
    "fit_slope",
    "Preset",
    "PRESETS",
    "get_preset",
    "emit_csv",
    "read_sweep_csv",
    "emit_plot_data",
]
