"""Gray-box pseudo-Boolean optimization with the dynastic potential crossover."""

from ._kernels import BACKEND
from .chordal import (ChordalGraph, CliqueTree, Graph, RecombinationGraph, assign_subfunctions,
                      build_clique_tree, build_recombination_graph, fill_in,
                      maximum_cardinality_search)
from .crossover import (CrossoverReport, articulation_points_crossover, dpx, network_crossover,
                        partition_crossover, qir, uniform_crossover)
from .dp import BudgetExceeded, ExplorationPlan, dp_offspring, plan_exploration
from .landscape import (ContractError, MkLandscape, Subfunction, Vig, build_vig, evaluate,
                        evaluate_subfunction, generate_nkq, load_instance)
from .maxsat import ParseError, parse_maxsat

__version__ = "0.1.0"
