"""Haar-uniform pure states, Monte-Carlo fidelity estimates, sphere integrals.

States are sampled by normalizing standard complex Gaussian vectors, which is
Haar-uniform on the unit sphere of C^n for every n. All Monte-Carlo entry
points are deterministic for a fixed ``(seed, samples, workers)`` triple:
worker streams are derived from the seed with ``numpy.random.SeedSequence``
and evaluated in a fixed order (workers only partition the stream, they do
not run concurrently here).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterator, Sequence

import numpy as np

from .linalg import as_matrix

DEFAULT_WORKERS = 1
_BATCH = 1 << 16


def sample_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """One Haar-uniform pure state on the unit sphere of C^n."""
    if n < 1:
        raise ValueError("state dimension must be at least 1")
    while True:
        z = rng.standard_normal(2 * n)
        v = z[0::2] + 1j * z[1::2]
        norm = np.linalg.norm(v)
        if norm > 1e-150:
            return v / norm


def sample_states(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-uniform states, stacked as rows of shape (count, n)."""
    if n < 1:
        raise ValueError("state dimension must be at least 1")
    z = rng.standard_normal((count, 2 * n))
    v = z[:, 0::2] + 1j * z[:, 1::2]
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    bad = norms[:, 0] <= 1e-150
    for i in np.flatnonzero(bad):
        v[i] = sample_state(n, rng)
        norms[i, 0] = 1.0
    return v / norms


def monomial_integral_exact(k: Sequence[int], n: int) -> Fraction:
    """Exact sphere average of prod_i |c_i|^(2 k_i) as a Fraction.

    Equals (n-1)! * prod_i k_i! / (n-1+sum_i k_i)!.
    """
    exps = tuple(int(x) for x in k)
    if len(exps) != n:
        raise ValueError(f"expected {n} exponents, got {len(exps)}")
    if any(x < 0 for x in exps):
        raise ValueError("exponents must be non-negative")
    total = sum(exps)
    if total == 0:
        raise ValueError("at least one exponent must be positive")
    num = factorial(n - 1)
    for x in exps:
        num *= factorial(x)
    return Fraction(num, factorial(n - 1 + total))


def monomial_integral(k: Sequence[int], n: int) -> float:
    """Exact monomial sphere integral, converted to float at the end."""
    return float(monomial_integral_exact(k, n))


@dataclass(frozen=True)
class McEstimate:
    """Monte-Carlo estimate with its standard error and provenance."""

    mean: float
    std_error: float
    samples: int
    seed: int

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.std_error < 0:
            raise ValueError("std_error must be non-negative")


@dataclass(frozen=True)
class Histogram:
    """Equal-width histogram of sampled fidelities."""

    edges: np.ndarray
    counts: np.ndarray
    samples: int
    seed: int

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def densities(self) -> np.ndarray:
        return self.counts / (self.samples * self.widths)


def _worker_sizes(samples: int, workers: int) -> list[int]:
    base, extra = divmod(samples, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def _fidelity_batches(
    m: np.ndarray, samples: int, seed: int, workers: int
) -> Iterator[np.ndarray]:
    """Yield batches of f = |<psi|m|psi>|^2 in a seed-deterministic order."""
    if workers < 1:
        raise ValueError("workers must be at least 1")
    n = m.shape[0]
    children = np.random.SeedSequence(seed).spawn(workers)
    for size, child in zip(_worker_sizes(samples, workers), children):
        rng = np.random.default_rng(child)
        done = 0
        while done < size:
            batch = min(_BATCH, size - done)
            states = sample_states(n, batch, rng)
            overlap = np.einsum("bi,ij,bj->b", states.conj(), m, states)
            yield np.abs(overlap) ** 2
            done += batch


def mc_moment(
    m: np.ndarray,
    order: int,
    samples: int,
    seed: int,
    workers: int = DEFAULT_WORKERS,
) -> McEstimate:
    """Monte-Carlo estimate of the Haar average of |<psi|m|psi>|^(2*order)."""
    m = as_matrix(m)
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if samples < 100:
        raise ValueError("samples must be at least 100")
    total = 0.0
    total_sq = 0.0
    for f in _fidelity_batches(m, samples, seed, workers):
        vals = f if order == 1 else f * f
        total += vals.sum()
        total_sq += (vals * vals).sum()
    mean = float(total / samples)
    var = max(0.0, (total_sq - samples * mean * mean) / (samples - 1))
    return McEstimate(
        mean=mean,
        std_error=float(np.sqrt(var / samples)),
        samples=samples,
        seed=seed,
    )


def mc_histogram(
    m: np.ndarray,
    bins: int,
    samples: int,
    seed: int,
    workers: int = DEFAULT_WORKERS,
    value_range: tuple[float, float] | None = None,
) -> Histogram:
    """Histogram of sampled fidelities f = |<psi|m|psi>|^2.

    ``value_range`` defaults to the observed [min, max]; pass the analytic
    support when comparing against a closed-form density so bins align with
    the support endpoints.
    """
    m = as_matrix(m)
    if bins < 2:
        raise ValueError("bins must be at least 2")
    if samples < bins:
        raise ValueError("samples must be at least bins")
    values = np.concatenate(list(_fidelity_batches(m, samples, seed, workers)))
    if value_range is None:
        lo, hi = float(values.min()), float(values.max())
        min_width = bins * np.finfo(float).eps * max(1.0, abs(lo), abs(hi))
        if hi - lo < min_width:
            # Constant fidelity up to rounding (e.g. the identity map): park
            # all mass in the top bin by opening a range just below it.
            lo = hi - 1e-9 * max(1.0, abs(hi))
        value_range = (lo, hi)
    else:
        # Keep boundary rounding dust (f = support edge +- ~1e-15) in range;
        # anything further out is genuinely outside and stays dropped.
        lo, hi = value_range
        slack = 1e-9 * max(1.0, abs(lo), abs(hi))
        values = np.where(np.abs(values - lo) <= slack, lo, values)
        values = np.where(np.abs(values - hi) <= slack, hi, values)
    counts, edges = np.histogram(values, bins=bins, range=value_range)
    return Histogram(edges=edges, counts=counts, samples=samples, seed=seed)
