"""Large-scale black-box optimization benchmark suite with linear-cost rotations."""

from .functions import FUNCTIONS, Problem, ProblemDescriptor, build_problem, instance_parameters
from .harness import Budget, RunRecord, observe, one_plus_one_es, random_search, run_experiment, runtime_to_target
from .prng import RngState
from .structured_ops import (
    BlockDiagonalMatrix,
    Permutation,
    PermutedOrthogonalMatrix,
    SwapParams,
    block_sizes,
    generate_block_diagonal,
    truncated_uniform_swaps,
)
from .suite import SuiteConfig, TargetSet, default_targets, suite_iter

__version__ = "0.1.0"
