from src.schemes.picard import PicardSolveError, monotone_tail, relative_increment
from src.schemes.gradp import (
    GradPSystemSpec,
    GradPState,
    GradPAssembler,
    assemble_gradp,
    darcy_initial_guess_gradp,
    picard_iterate_gradp,
    err_vs_exact_gradp,
    pressure_row_residual,
)
from src.schemes.mixed import (
    MixedSystemSpec,
    MixedState,
    MixedAssembler,
    assemble_mixed,
    darcy_initial_guess_mixed,
    picard_iterate_mixed,
    divergence_residual,
    err_vs_exact_mixed,
)

__all__ = [
    "PicardSolveError",
    "monotone_tail",
    "relative_increment",
    "GradPSystemSpec",
    "GradPState",
    "GradPAssembler",
    "assemble_gradp",
    "darcy_initial_guess_gradp",
    "picard_iterate_gradp",
    "err_vs_exact_gradp",
    "pressure_row_residual",
    "MixedSystemSpec",
    "MixedState",
    "MixedAssembler",
    "assemble_mixed",
    "darcy_initial_guess_mixed",
    "picard_iterate_mixed",
    "divergence_residual",
    "err_vs_exact_mixed",
]
