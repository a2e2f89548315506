"""QAOA Max-Cut statevector simulation and parameter-search benchmarking."""

from .bench import ExperimentRecord, approximation_ratio, build_benchmark, run_experiment
from .ged import graph_edit_distance
from .graphs import Graph, cut_value, generate_er, maxcut_bruteforce
from .optim import Bounds, local_optimize, multistart
from .sim import CutTable, QaoaParams, build_cut_table, expectation, qaoa_state

__version__ = "0.1.0"

__all__ = [
    "Bounds", "CutTable", "ExperimentRecord", "Graph", "QaoaParams",
    "approximation_ratio", "build_benchmark", "build_cut_table", "cut_value",
    "expectation", "generate_er", "graph_edit_distance", "local_optimize",
    "maxcut_bruteforce", "multistart", "qaoa_state", "run_experiment",
]
