"""Comparison methods: independent per-client learning and one global graph.

Both reuse the federated path's inner solver, so benchmark differences
come from the model, not from a different optimizer.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .client import LocalSolution, solve_local_to_convergence
from .objective import DistanceVector, HyperParams, pairwise_distance


def solve_igl(datasets, hp: HyperParams, tol: float = 1e-8,
              max_iter: int = 100_000) -> list[LocalSolution]:
    """Solve each client's graph problem independently (no communication)."""
    zs = [pairwise_distance(X) for X in datasets]
    with ThreadPoolExecutor(max_workers=max(1, len(zs))) as pool:
        futures = [
            pool.submit(solve_local_to_convergence, z, None, 0.0, hp, tol, max_iter)
            for z in zs
        ]
        return [f.result() for f in futures]


def solve_global(datasets, hp: HyperParams, tol: float = 1e-8,
                 max_iter: int = 100_000) -> LocalSolution:
    """Learn a single graph from all clients' data pooled together.

    The sample-weighted average of the per-client objectives keeps the data
    term at (1/N') sum_i z_i . w while the regularizer weights stay put, so
    pooling the raw distance vectors under the total sample count gives the
    same minimizer; one client reduces exactly to its independent problem.
    """
    zs = [pairwise_distance(X) for X in datasets]
    dims = {z.d for z in zs}
    if len(dims) != 1:
        raise ValueError(f"all datasets must share the node count, got {sorted(dims)}")
    z_pool = np.sum([z.z for z in zs], axis=0)
    n_total = sum(z.n for z in zs)
    pooled = DistanceVector(dims.pop(), z_pool, n_total)
    return solve_local_to_convergence(pooled, None, 0.0, hp, tol, max_iter)
