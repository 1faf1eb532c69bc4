"""Independent reference computations used to check the solvers.

Everything here is deliberately brute force: grids and enumeration, no
stationarity conditions, no greedy shortcuts shared with the code under
test beyond what a linear objective makes unavoidable.
"""

from __future__ import annotations

import numpy as np

from mrcap.model import ProblemInstance


def reduced_objective(instance: ProblemInstance, r: np.ndarray) -> np.ndarray:
    """Pooled-plan cost at allocation rows ``r`` (shape (M, N))."""
    rho = instance.cluster.rhoBar
    d = [c.derived for c in instance.classes]
    w = np.array([x.alpha * x.K for x in d])
    base = np.array([x.alpha * x.psiLow for x in d])
    return (rho * r + w / r - base).sum(axis=1)


def grid_search_reduced(instance: ProblemInstance, step_frac: float = 1e-3) -> float:
    """Minimum cost over a dense grid of the feasible box (N <= 3).

    The grid is augmented, for every class in turn, with the point that
    spends the remaining capacity on that class, so the oracle can land
    on the knapsack face between grid lines.
    """
    R = instance.cluster.R
    d = [c.derived for c in instance.classes]
    n = len(d)
    if n > 3:
        raise ValueError("grid oracle is limited to 3 classes")
    step = step_frac * R
    axes = []
    for x in d:
        pts = np.arange(x.rLow, x.rUp, step)
        pts = np.unique(np.append(pts, [x.rLow, x.rUp]))
        axes.append(pts)
    if int(np.prod([len(a) for a in axes])) > 5_000_000:
        raise ValueError("grid too large; pick a smaller instance")
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([g.ravel() for g in mesh], axis=-1)

    variants = [points]
    for j in range(n):
        filled = points.copy()
        remaining = R - (points.sum(axis=1) - points[:, j])
        filled[:, j] = np.clip(remaining, d[j].rLow, d[j].rUp)
        variants.append(filled)
    candidates = np.concatenate(variants, axis=0)
    feasible = candidates.sum(axis=1) <= R * (1 + 1e-12)
    candidates = candidates[feasible]
    if candidates.size == 0:
        raise ValueError("no feasible grid point")
    return float(reduced_objective(instance, candidates).min())


def random_feasible_allocations(
    instance: ProblemInstance, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Feasible box points: uniform draws, shrunk toward the minimum
    allocations when they overspend capacity."""
    d = [c.derived for c in instance.classes]
    r_low = np.array([x.rLow for x in d])
    r_up = np.array([x.rUp for x in d])
    spare = instance.cluster.R - r_low.sum()
    u = rng.uniform(size=(count, len(d)))
    extra = u * (r_up - r_low)
    over = extra.sum(axis=1)
    scale = np.where(over > spare, spare / np.maximum(over, 1e-300), 1.0)
    return r_low + extra * scale[:, None]
