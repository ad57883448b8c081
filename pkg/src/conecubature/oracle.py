"""
Monte Carlo Oracle

Plain Monte Carlo estimate of an integral over R^N, used to validate the
cubature runs. Points t are drawn uniformly on (-1, 1)^N and pushed through
the whole-space map, so each sample is f(x(t)) J(t) 2^N.

Samples are processed in fixed-size blocks, each with its own PCG64 stream
spawned from the run seed. Block statistics are merged in block order, so
the result depends on (seed, samples, block_size) only, never on the number
of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .integrands import BaseIntegrand, IntegrandSpec, build_integrand
from .mapping import PointFunction, whole_space_map

MIN_SAMPLES = 10_000
DEFAULT_BLOCK_SIZE = 1 << 16


class OracleResult(BaseModel):
    """Mean and standard error of the sample values."""

    model_config = ConfigDict(frozen=True)

    estimate: float
    stderr: float = Field(..., ge=0)
    samples: int = Field(..., ge=MIN_SAMPLES)
    seed: int
    dimension: int
    block_size: int
    generator: str = "PCG64"
    numpy_version: str = Field(default_factory=lambda: np.__version__)


# =============================================================================
# BLOCK STATISTICS
# =============================================================================


def _block_stats(
    f: PointFunction,
    dimension: int,
    size: int,
    seed: np.random.SeedSequence,
) -> tuple[int, float, float]:
    """(count, mean, sum of squared deviations) for one block."""
    rng = np.random.Generator(np.random.PCG64(seed))
    t = rng.uniform(-1.0, 1.0, size=(size, dimension))
    edge = np.any(np.abs(t) >= 1.0, axis=1)
    while np.any(edge):
        t[edge] = rng.uniform(-1.0, 1.0, size=(int(edge.sum()), dimension))
        edge = np.any(np.abs(t) >= 1.0, axis=1)

    x, jac = whole_space_map(t)
    values = np.asarray(f(x), dtype=float) * jac * 2.0**dimension
    mean = float(values.mean())
    m2 = float(np.sum((values - mean) ** 2))
    return size, mean, m2


def _merge(
    a: tuple[int, float, float],
    b: tuple[int, float, float],
) -> tuple[int, float, float]:
    """Pairwise update of count, mean and M2."""
    n_a, mean_a, m2_a = a
    n_b, mean_b, m2_b = b
    n = n_a + n_b
    delta = mean_b - mean_a
    mean = mean_a + delta * n_b / n
    m2 = m2_a + m2_b + delta * delta * n_a * n_b / n
    return n, mean, m2


# =============================================================================
# ESTIMATOR
# =============================================================================


def mc_estimate(
    target: IntegrandSpec | PointFunction,
    samples: int,
    seed: int,
    *,
    dimension: int | None = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int = 1,
) -> OracleResult:
    """
    Estimate the integral of `target` over R^N.

    `target` is an IntegrandSpec or a vectorised function of (K, N) points;
    plain functions need `dimension`.
    """
    if samples < MIN_SAMPLES:
        raise ValueError(f"samples must be >= {MIN_SAMPLES}, got {samples}")
    if block_size < 2:
        raise ValueError("block_size must be at least 2")

    if isinstance(target, IntegrandSpec):
        f: PointFunction = build_integrand(target)
        dim = target.matrix.N
    else:
        f = target
        if dimension is None and isinstance(target, BaseIntegrand):
            dimension = target.dimension
        if dimension is None:
            raise ValueError("dimension is required for a plain integrand function")
        dim = dimension

    n_blocks = math.ceil(samples / block_size)
    sizes = [min(block_size, samples - i * block_size) for i in range(n_blocks)]
    seeds = np.random.SeedSequence(seed).spawn(n_blocks)

    def run_block(i: int) -> tuple[int, float, float]:
        return _block_stats(f, dim, sizes[i], seeds[i])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(run_block, range(n_blocks)))
    else:
        stats = [run_block(i) for i in range(n_blocks)]

    total = stats[0]
    for block in stats[1:]:
        total = _merge(total, block)
    n, mean, m2 = total

    std = math.sqrt(m2 / (n - 1))
    return OracleResult(
        estimate=mean,
        stderr=std / math.sqrt(n),
        samples=n,
        seed=seed,
        dimension=dim,
        block_size=block_size,
    )


# =============================================================================
# EXPORTS
# =============================================================================


__all__ = [
    "MIN_SAMPLES",
    "DEFAULT_BLOCK_SIZE",
    "OracleResult",
    "mc_estimate",
]
