"""
Seeded, chunked Monte Carlo engine.

Trials are cut into fixed-size chunks and every chunk draws from its own
child of a numpy SeedSequence, so estimates depend only on (seed, trials,
chunk size) and never on how many worker threads ran the chunks.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 10_000


def default_threads() -> int:
    """Worker count from CRN_SENSE_THREADS, else 1."""
    return max(1, int(os.getenv("CRN_SENSE_THREADS", "1")))


class BernoulliEstimate(BaseModel):
    """Success frequency with its standard error."""

    model_config = ConfigDict(frozen=True)

    successes: int = Field(ge=0)
    trials: int = Field(ge=0)

    @property
    def mean(self) -> float:
        return self.successes / self.trials if self.trials else float("nan")

    @property
    def standard_error(self) -> float:
        if not self.trials:
            return float("nan")
        p = self.mean
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def interval(self) -> Tuple[float, float]:
        """95% normal-approximation interval clipped to [0, 1]."""
        half = 1.959963984540054 * self.standard_error
        return max(0.0, self.mean - half), min(1.0, self.mean + half)


class MeanEstimate(BaseModel):
    """Sample mean of a real-valued quantity with its standard error."""

    model_config = ConfigDict(frozen=True)

    mean: float
    standard_error: float
    trials: int

    @property
    def interval(self) -> Tuple[float, float]:
        half = 1.959963984540054 * self.standard_error
        return self.mean - half, self.mean + half


def chunk_sizes(trials: int, chunk: int = DEFAULT_CHUNK) -> List[int]:
    full, rest = divmod(trials, chunk)
    return [chunk] * full + ([rest] if rest else [])


def run_chunked(
    draw: Callable[[np.random.Generator, int], np.ndarray],
    trials: int,
    seed: int,
    threads: Optional[int] = None,
    chunk: int = DEFAULT_CHUNK,
) -> np.ndarray:
    """
    Evaluate `draw(rng, n)` over all chunks and concatenate the results in chunk order.

    Args:
        draw: Produces one array of per-trial outcomes for n trials
        trials: Total trial count
        seed: Root seed
        threads: Worker threads; defaults to CRN_SENSE_THREADS
        chunk: Trials per chunk
    """
    sizes = chunk_sizes(trials, chunk)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(np.random.default_rng(child), size) for child, size in zip(children, sizes)]
    workers = threads or default_threads()
    if workers == 1 or len(jobs) == 1:
        parts = [draw(rng, size) for rng, size in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: draw(*job), jobs))
    logger.debug(f"Monte Carlo: {trials} trials in {len(sizes)} chunks on {workers} threads")
    return np.concatenate(parts) if parts else np.zeros(0)


def estimate_mean(values: np.ndarray) -> MeanEstimate:
    """Mean and standard error of per-trial outcomes."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    spread = float(values.std(ddof=1)) if n > 1 else 0.0
    return MeanEstimate(mean=float(values.mean()), standard_error=spread / math.sqrt(n), trials=n)


def spawn_seeds(seed: int, count: int) -> List[int]:
    """Independent integer seeds for `count` sub-experiments."""
    return [int(child.generate_state(1)[0]) for child in np.random.SeedSequence(seed).spawn(count)]
