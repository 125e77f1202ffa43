"""Monte Carlo estimates of ``E[expr**n]`` for cross-checking the exact engine.

Randomness is split into fixed-size blocks.  Block ``i`` draws from numpy's
Philox counter-based generator keyed by ``SeedSequence(seed, spawn_key=(i,))``,
and block statistics are merged in block order, so the result depends only on
``(expr, n, samples, seed)`` and not on how many threads did the work.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exact import Fraction
from .moments import Kind, RVExpression, moment, parse_expression

DEFAULT_SEED = 20171019
BLOCK_SIZE = 1 << 16
MIN_SAMPLES = 1000
MAX_ORDER = 8
Z_LIMIT = 5.0
PRNG = "numpy.random.Philox (4x64); block i keyed by SeedSequence(seed, spawn_key=(i,))"

DEFAULT_PANEL: tuple[tuple[str, int], ...] = (
    ("U1+U2", 2),
    ("U1+U2+U3", 3),
    ("U1", 4),
    ("U1+1", 3),
    ("X1-1", 3),
    ("2*X1-1", 2),
    ("X1+2*X2-2", 2),
    ("X1+2*X2+3*X3-3", 2),
    ("U1*X1+U2*X2", 2),
    ("M1", 1),
    ("M1", 2),
    ("M1+M2", 2),
)


def default_seed() -> int:
    return int(os.environ.get("MF_SEED", DEFAULT_SEED))


def block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def expgamma_from_uniform(u):
    """Inverse CDF of the unit exponential."""
    return -np.log1p(-np.asarray(u, dtype=float))


def gamma_small_shape(shape, rng: np.random.Generator) -> np.ndarray:
    """Gamma(shape, 1) draws for ``0 < shape < 1`` via ``G(shape+1) * V**(1/shape)``."""
    shape = np.asarray(shape, dtype=float)
    boosted = rng.standard_gamma(shape + 1.0)
    v = rng.random(shape.shape)
    with np.errstate(under="ignore"):
        return boosted * v ** (1.0 / shape)


def sample_atoms(kind: Kind, rng: np.random.Generator, size: int) -> np.ndarray:
    kind = Kind(kind)
    if kind is Kind.UNIFORM:
        return rng.random(size)
    if kind is Kind.EXPGAMMA:
        return expgamma_from_uniform(rng.random(size))
    # shape drawn first, then a gamma with that shape
    shape = rng.random(size)
    # rng.random is on [0, 1); a zero shape is a point mass at 0
    out = np.zeros(size)
    pos = shape > 0
    out[pos] = gamma_small_shape(shape[pos], rng)
    return out


def sample_atom(kind: Kind, rng: np.random.Generator) -> float:
    return float(sample_atoms(kind, rng, 1)[0])


@dataclass(frozen=True)
class McResult:
    expr: str
    n: int
    estimate: float
    std_error: float
    samples: int
    seed: int
    exact: Fraction
    z_score: float
    prng: str = PRNG

    @property
    def within_tolerance(self) -> bool:
        return abs(self.z_score) <= Z_LIMIT


def _evaluate(expr: RVExpression, rng: np.random.Generator, size: int) -> np.ndarray:
    draws = {atom: sample_atoms(atom.kind, rng, size) for atom in expr.atoms}
    total = np.zeros(size)
    for term in expr.terms:
        value = np.full(size, float(term.coefficient))
        for atom in sorted(term.atoms):
            value = value * draws[atom]
        total += value
    return total


def _block_stats(expr: RVExpression, n: int, seed: int, block: int, size: int) -> tuple[int, float, float]:
    values = _evaluate(expr, block_generator(seed, block), size) ** n
    mean = float(values.mean())
    m2 = float(np.square(values - mean).sum())
    return size, mean, m2


def _merge(stats) -> tuple[int, float, float]:
    # Chan et al. pairwise update, applied in block order
    count, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in stats:
        if count == 0:
            count, mean, m2 = nb, mb, m2b
            continue
        delta = mb - mean
        total = count + nb
        mean = mean + delta * nb / total
        m2 = m2 + m2b + delta * delta * count * nb / total
        count = total
    return count, mean, m2


def mc_moment(
    expr: RVExpression | str,
    n: int,
    samples: int = 1_000_000,
    seed: int | None = None,
    threads: int = 1,
    max_order: int = MAX_ORDER,
) -> McResult:
    """Estimate ``E[expr**n]`` and compare it with the exact moment.

    Orders above ``max_order`` are refused: powers of gamma sums are heavy
    tailed and the sample standard error stops being a useful yardstick.
    """
    if isinstance(expr, str):
        expr = parse_expression(expr)
    if samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {samples}")
    if n < 0 or n > max_order:
        raise ValueError(f"moment order must be in [0, {max_order}], got {n}")
    seed = default_seed() if seed is None else int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")

    sizes = [BLOCK_SIZE] * (samples // BLOCK_SIZE)
    if samples % BLOCK_SIZE:
        sizes.append(samples % BLOCK_SIZE)
    jobs = list(enumerate(sizes))
    workers = threads if threads > 0 else (os.cpu_count() or 1)

    def run(job):
        block, size = job
        return _block_stats(expr, n, seed, block, size)

    if workers == 1:
        stats = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stats = list(pool.map(run, jobs))
    count, mean, m2 = _merge(stats)

    std_error = math.sqrt(m2 / (count - 1)) / math.sqrt(count)
    exact = moment(expr, n)
    diff = mean - float(exact)
    if std_error > 0:
        z = diff / std_error
    else:
        z = 0.0 if diff == 0 else math.copysign(math.inf, diff)
    return McResult(str(expr), n, mean, std_error, count, seed, exact, z)


def run_panel(
    panel=DEFAULT_PANEL, samples: int = 1_000_000, seed: int | None = None, threads: int = 1
) -> list[McResult]:
    return [mc_moment(text, n, samples, seed, threads) for text, n in panel]


def panel_ok(results, allowed_outliers: int = 1) -> bool:
    return sum(not r.within_tolerance for r in results) <= allowed_outliers
