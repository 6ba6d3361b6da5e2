"""
Power iteration shared by PaperRank and AuthorRank.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from loguru import logger
from scipy import sparse

from src.errors import ConvergenceError, ParameterError
from src.models import MetricVector


@dataclass(frozen=True, eq=False)
class RankResult:
    vector: MetricVector
    iterations: int
    residual: float


class RowPartitionedMatrix:
    """CSR matrix whose matvec runs in row blocks on a thread pool.

    Each output row is computed exactly as in a single-block product, so the
    result does not depend on the number of workers.
    """

    def __init__(self, matrix: sparse.csr_matrix, workers: int = 1):
        self.shape = matrix.shape
        self.workers = max(1, min(workers, matrix.shape[0] or 1))
        bounds = np.linspace(0, matrix.shape[0], self.workers + 1).astype(np.int64)
        self.blocks: List[sparse.csr_matrix] = [matrix[a:b] for a, b in zip(bounds[:-1], bounds[1:])]

    def dot(self, x: np.ndarray) -> np.ndarray:
        if self.workers == 1:
            return self.blocks[0] @ x
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            parts = list(pool.map(lambda block: block @ x, self.blocks))
        return np.concatenate(parts)


def check_damping(damping: float) -> None:
    if not 0.0 < damping < 1.0:
        raise ParameterError(f"damping must lie strictly between 0 and 1, got {damping}")


def power_iterate(
    step: Callable[[np.ndarray], np.ndarray],
    start: np.ndarray,
    tol: float,
    max_iters: int,
) -> Tuple[np.ndarray, int, float]:
    """Apply `step` until the max-norm relative change drops below `tol`."""
    if tol <= 0:
        raise ParameterError(f"tolerance must be positive, got {tol}")
    if start.size == 0:
        return start, 0, 0.0

    x = start
    residual = np.inf
    for iteration in range(1, max_iters + 1):
        nxt = step(x)
        scale = float(np.max(np.abs(nxt))) or 1.0
        residual = float(np.max(np.abs(nxt - x))) / scale
        x = nxt
        if residual < tol:
            logger.debug(f"Converged after {iteration} iterations (residual {residual:.3e})")
            return x, iteration, residual

    logger.error(f"No convergence after {max_iters} iterations (residual {residual:.3e})")
    raise ConvergenceError(max_iters, residual)
