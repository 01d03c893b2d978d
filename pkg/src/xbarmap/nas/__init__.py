"""Hardware-aware architecture search over an elastic MobilenetV3-style space."""

from .nsga2 import crowding_distance, fast_nondominated_sort, hypervolume_2d
from .search import (
    Candidate,
    Evaluator,
    SearchInfeasible,
    SearchResult,
    choose,
    evolve,
    front_csv,
    pareto_front,
    search,
)
from .space import DecodeError, Genome, SearchSpace, decode_genome, gene_names, parse_space
from .surrogate import ParamSurrogate, SurrogateError, TableSurrogate, surrogate_accuracy

__all__ = [
    "Candidate", "DecodeError", "Evaluator", "Genome", "ParamSurrogate", "SearchInfeasible",
    "SearchResult", "SearchSpace", "SurrogateError", "TableSurrogate", "choose", "crowding_distance",
    "decode_genome", "evolve", "fast_nondominated_sort", "front_csv", "gene_names", "hypervolume_2d",
    "pareto_front", "parse_space", "search", "surrogate_accuracy",
]
