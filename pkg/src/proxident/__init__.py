"""Proximal gradient methods with structure identification tracking."""

from .experiments import fixtures_2d, gen_group_pball, gen_lasso, gen_nuclear, make_scenario, run_scenario
from .identification import compute_reference, identification_series, stability_metrics
from .inertia import ChambolleDossal, Liang, Nesterov, parse_schedule
from .regularizers import L1, DistPBall, GroupDistPBall, GroupOnSphere, Nuclear, RankEquals, ZeroCoordinate
from .smooth import CompositeProblem, LeastSquares
from .solvers import SolverConfig, Trace, run

__version__ = "0.1.0"

__all__ = [
    "ChambolleDossal",
    "CompositeProblem",
    "DistPBall",
    "GroupDistPBall",
    "GroupOnSphere",
    "L1",
    "LeastSquares",
    "Liang",
    "Nesterov",
    "Nuclear",
    "RankEquals",
    "SolverConfig",
    "Trace",
    "ZeroCoordinate",
    "compute_reference",
    "fixtures_2d",
    "gen_group_pball",
    "gen_lasso",
    "gen_nuclear",
    "identification_series",
    "make_scenario",
    "parse_schedule",
    "run",
    "run_scenario",
    "stability_metrics",
]
