"""Seeded sampling and deterministic parallel evaluation.

Every Monte Carlo sample draws from its own counter-based stream keyed by
``(seed, sample_index)``, so a sample's value does not depend on which worker
computes it. Aggregation uses ``math.fsum`` over the index-ordered values,
which makes the mean bit-identical for any thread count.
"""

from __future__ import annotations

import contextvars
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

EXACT_CAP = 10**6


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Philox generator keyed by (seed, sample index)."""
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), index]))


def inverse_cdf(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(probs) - 1)


def parallel_map(fn: Callable[[int], float], n: int, threads: int = 1) -> np.ndarray:
    """Evaluate ``fn(i)`` for i in range(n) into an index-ordered array."""
    out = np.empty(n)
    if threads <= 1 or n < 2:
        for i in range(n):
            out[i] = fn(i)
        return out
    chunks = np.array_split(np.arange(n), min(threads * 4, n))

    def run(chunk):
        for i in chunk:
            out[i] = fn(int(i))

    with ThreadPoolExecutor(max_workers=threads) as pool:
        ctx = contextvars.copy_context()
        futures = [pool.submit(ctx.copy().run, run, c) for c in chunks]
        for f in futures:
            f.result()
    return out


def mean_and_stderr(values: np.ndarray) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


@dataclass
class ExperimentResult:
    """One experiment: bound, measured success, uncertainty and provenance."""

    bound: float
    value: float
    mode: str
    stderr: float = 0.0
    samples: int = 0
    seed: int | None = None
    extras: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    @property
    def confidence_interval(self) -> tuple[float, float]:
        half = 1.96 * self.stderr
        return self.value - half, self.value + half

    @property
    def margin(self) -> float:
        return self.value - self.bound


class Timer:
    def __init__(self):
        self.marks: dict[str, float] = {}

    def __call__(self, name: str):
        timer = self

        class _Ctx:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.marks[name] = time.perf_counter() - self.t0

        return _Ctx()


def mixed_radix(index: int, radix: int, length: int) -> tuple[int, ...]:
    """Digits of ``index`` in base ``radix``, most significant first."""
    digits = []
    for _ in range(length):
        index, r = divmod(index, radix)
        digits.append(r)
    return tuple(reversed(digits))


def check_exact_cap(count: int, what: str) -> None:
    from .errors import SizeCapError

    if count > EXACT_CAP:
        raise SizeCapError(f"exact enumeration of {count} {what} exceeds cap {EXACT_CAP}")


def product_weights(probs: np.ndarray, words: Sequence[Sequence[int]]) -> np.ndarray:
    return np.array([math.prod(probs[x] for x in w) for w in words])
