from src.models.experiment_models import (
    IterationReport,
    SweepRow,
    ConvergenceStudy,
    ConsistencyReport,
)

__all__ = ["IterationReport", "SweepRow", "ConvergenceStudy", "ConsistencyReport"]
