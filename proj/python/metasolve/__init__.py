"""Hybrid-preconditioned Krylov meta-solvers and multi-objective comparison tools."""

from ._core import (
    CRITERIA,
    RESULTS_HEADER,
    RankError,
    assemble,
    dominates,
    enumerate_configs,
    grf_sample,
    mesh_info,
    pareto_set,
    preference_rank,
    read_results,
    rediscover,
    rescale,
    run_sweep,
    solve,
    solve_linear,
)

__all__ = [
    "CRITERIA",
    "RESULTS_HEADER",
    "RankError",
    "assemble",
    "dominates",
    "enumerate_configs",
    "grf_sample",
    "mesh_info",
    "pareto_set",
    "preference_rank",
    "read_results",
    "rediscover",
    "rescale",
    "run_sweep",
    "solve",
    "solve_linear",
]
