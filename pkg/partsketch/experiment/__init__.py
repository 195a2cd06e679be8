from .adhoc import AdhocOptions, analyze, run_analyze, run_sketch
from .config import FINEST, STRATEGY_CHOICES, ExperimentConfig
from .runner import Fig1Row, Fig2Row, prepare_workload, run_fig1, run_fig2, run_table1

__all__ = [
    "AdhocOptions",
    "analyze",
    "ExperimentConfig",
    "Fig1Row",
    "Fig2Row",
    "FINEST",
    "prepare_workload",
    "run_analyze",
    "run_fig1",
    "run_fig2",
    "run_sketch",
    "run_table1",
    "STRATEGY_CHOICES",
]
