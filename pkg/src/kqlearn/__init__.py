"""Sparse kernel Q-learning with KOMP-compressed RKHS value functions."""

from .action_search import SearchConfig, maximize_action, softmax_value
from .envs import MOUNTAIN_CAR, PENDULUM, make_env
from .kernel import DimensionError, KernelConfig, SolverError, gram_matrix, kernel_eval
from .komp import CompressionBudget, CompressionReport, komp_compress
from .learner import LearnerConfig, LearnerState, SarsaTuple, hybrid_step, kq_step, semigradient_step
from .policy import RhoSchedule, select_action
from .qfunction import QFunction, hilbert_dist, hilbert_norm_sq, load_qfunction, save_qfunction
from .replay import ReplayBuffer, ReplayConfig

__all__ = [
    "CompressionBudget", "CompressionReport", "DimensionError", "KernelConfig", "LearnerConfig",
    "LearnerState", "MOUNTAIN_CAR", "PENDULUM", "QFunction", "ReplayBuffer", "ReplayConfig",
    "RhoSchedule", "SarsaTuple", "SearchConfig", "SolverError", "gram_matrix", "hilbert_dist",
    "hilbert_norm_sq", "hybrid_step", "kernel_eval", "komp_compress", "kq_step", "load_qfunction",
    "make_env", "maximize_action", "save_qfunction", "select_action", "semigradient_step",
    "softmax_value",
]
