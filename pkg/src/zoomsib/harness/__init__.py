"""Config-driven experiment runs: seeding, execution, aggregation, export."""
from .config import ExperimentConfig, load_config, parse_config, cell_seed
from .export import export
from .runner import ExperimentRecord, run_experiment, run_cell
from .stats import aggregate, aggregate_trajectories, loglog_slope

__all__ = [
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "cell_seed",
    "export",
    "ExperimentRecord",
    "run_experiment",
    "run_cell",
    "aggregate",
    "aggregate_trajectories",
    "loglog_slope",
]
