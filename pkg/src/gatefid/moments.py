"""Closed-form fidelity moments over Haar-uniform input states.

For a linear map ``m`` on C^n the fidelity of an input state is
``f = |<psi|m|psi>|^2``. This module evaluates the exact Haar averages of
``f`` and ``f^2`` from traces of small matrix products, plus the restricted,
conditional, and Kraus-form variants. No eigendecompositions are used; every
formula is a polynomial in traces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    QubitSpectrum,
    adjoint,
    as_matrix,
    check_selector,
    classify,
    projector,
    restrict,
)
from .sampling import DEFAULT_WORKERS, sample_states

ACCEPTANCE_EPS = 1e-14
VARIANCE_CLAMP = 1e-10


class NoAcceptanceError(ValueError):
    """Post-selection keeps essentially no population in the subspace."""


@dataclass(frozen=True)
class MomentReport:
    """Mean, second moment and variance of the fidelity distribution."""

    n_eff: int
    mean: float
    second_moment: float | None = None
    variance: float | None = None
    method: str = "closed_form"
    raw_variance: float | None = None

    def __post_init__(self):
        if self.mean < 0:
            raise ValueError("mean must be non-negative")
        if self.variance is not None and self.variance < 0:
            raise ValueError("variance must be non-negative after clamping")
        if self.second_moment is not None and self.second_moment < self.mean**2 - 1e-12:
            raise ValueError("second moment inconsistent with mean")

    def as_dict(self) -> dict:
        out = {"n_eff": self.n_eff, "mean": self.mean, "method": self.method}
        if self.second_moment is not None:
            out["second_moment"] = self.second_moment
        if self.variance is not None:
            out["variance"] = self.variance
        return out


@dataclass(frozen=True, eq=False)
class GateSpec:
    """A target unitary, the map actually applied, and an optional subspace.

    With a subspace, the target must be block-diagonal with respect to it and
    unitary on it, so the restricted comparison matrix is unambiguous.
    """

    target: np.ndarray
    actual: np.ndarray
    subspace: tuple[int, ...] | None = None

    def __post_init__(self):
        target = as_matrix(self.target)
        actual = as_matrix(self.actual)
        if target.shape != actual.shape:
            raise ValueError(
                f"dimension mismatch: target {target.shape[0]} vs actual {actual.shape[0]}"
            )
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "actual", actual)
        if self.subspace is None:
            if not classify(target, DEFAULT_TOL).unitary:
                raise ValueError("target must be unitary within 1e-10")
            return
        sel = check_selector(self.subspace, target.shape[0])
        object.__setattr__(self, "subspace", sel)
        rest = tuple(i for i in range(target.shape[0]) if i not in sel)
        if rest:
            off = max(
                float(np.abs(target[np.ix_(sel, rest)]).max()),
                float(np.abs(target[np.ix_(rest, sel)]).max()),
            )
            if off > DEFAULT_TOL:
                raise ValueError("target must be block-diagonal over the subspace")
        if not classify(restrict(target, sel), DEFAULT_TOL).unitary:
            raise ValueError("target must be unitary on the subspace within 1e-10")


@dataclass(frozen=True, eq=False)
class KrausMap:
    """Operator-sum map rho -> sum_k G_k rho G_k^dagger.

    ``completeness_defect`` is the max-modulus entry of sum_k G_k^dagger G_k
    minus the identity; trace-decreasing maps (defect above 1e-10) are kept
    but flagged via :attr:`trace_preserving`.
    """

    operators: tuple[np.ndarray, ...]
    completeness_defect: float = field(init=False)

    def __post_init__(self):
        ops = tuple(as_matrix(g) for g in self.operators)
        if not ops:
            raise ValueError("a Kraus map needs at least one operator")
        dim = ops[0].shape[0]
        if any(g.shape[0] != dim for g in ops):
            raise ValueError("all Kraus operators must have the same dimension")
        object.__setattr__(self, "operators", ops)
        total = sum(adjoint(g) @ g for g in ops)
        defect = float(np.abs(total - np.eye(dim)).max())
        object.__setattr__(self, "completeness_defect", defect)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def trace_preserving(self) -> bool:
        return self.completeness_defect <= DEFAULT_TOL


def depolarizing_kraus(p: float) -> KrausMap:
    """Single-qubit depolarizing channel at error probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("depolarizing probability must lie in [0, 1]")
    ident = np.eye(2, dtype=np.complex128)
    sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    sy = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    sz = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    w0, w = np.sqrt(1.0 - 0.75 * p), np.sqrt(0.25 * p)
    return KrausMap((w0 * ident, w * sx, w * sy, w * sz))


def avg_fidelity(m: np.ndarray) -> float:
    """Haar-average fidelity [Tr(m m^dag) + |Tr m|^2] / (n (n+1))."""
    m = as_matrix(m)
    n = m.shape[0]
    gram = complex(np.trace(m @ adjoint(m)))
    assert abs(gram.imag) <= 1e-12 * max(1.0, abs(gram.real))
    return float((gram.real + abs(np.trace(m)) ** 2) / (n * (n + 1)))


def avg_fidelity_qubit_spectrum(s: QubitSpectrum) -> float:
    """Qubit-map average (|l0|^2 + |l1|^2 + Re(l0 conj(l1))) / 3."""
    l0, l1 = complex(s.lambda0), complex(s.lambda1)
    return (abs(l0) ** 2 + abs(l1) ** 2 + (l0 * l1.conjugate()).real) / 3.0


def fourth_moment_hermitian(s: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    """Haar average of <psi|s|psi>^4 for Hermitian (or anti-Hermitian) s.

    [6 Tr s^4 + 8 Tr s^3 Tr s + 3 (Tr s^2)^2 + 6 Tr s^2 (Tr s)^2 + (Tr s)^4]
    divided by n(n+1)(n+2)(n+3). Degree-4 homogeneity makes the same
    expression valid for anti-Hermitian input.
    """
    s = as_matrix(s)
    flags = classify(s, tol)
    if not (flags.hermitian or flags.anti_hermitian):
        raise ValueError("matrix is neither Hermitian nor anti-Hermitian")
    n = s.shape[0]
    s2 = s @ s
    t1 = complex(np.trace(s))
    t2 = complex(np.trace(s2))
    t3 = complex(np.trace(s2 @ s))
    t4 = complex(np.trace(s2 @ s2))
    if flags.hermitian:
        scale = max(1.0, abs(t1), abs(t2), abs(t3), abs(t4))
        assert max(abs(t.imag) for t in (t1, t2, t3, t4)) <= 1e-12 * scale
    total = 6 * t4 + 8 * t3 * t1 + 3 * t2 * t2 + 6 * t2 * t1 * t1 + t1**4
    assert abs(total.imag) <= 1e-10 * max(1.0, abs(total.real))
    return total.real / (n * (n + 1) * (n + 2) * (n + 3))


def fourth_moment_general(m: np.ndarray) -> float:
    """Haar average of |<psi|m|psi>|^4 for an arbitrary linear map."""
    m = as_matrix(m)
    n = m.shape[0]
    md = adjoint(m)
    mm = m @ m
    mdmd = md @ md
    mmd = m @ md
    t_m = complex(np.trace(m))
    t_md = t_m.conjugate()
    t_mm = complex(np.trace(mm))
    t_mdmd = complex(np.trace(mdmd))
    t_mmd = complex(np.trace(mmd))
    total = (
        4 * np.trace(mm @ mdmd)
        + 2 * np.trace(mmd @ mmd)
        + 4 * t_m * np.trace(m @ mdmd)
        + 4 * t_md * np.trace(mm @ md)
        + t_mm * t_mdmd
        + 2 * t_mmd * t_mmd
        + t_mm * t_md * t_md
        + t_m * t_m * t_mdmd
        + 4 * t_m * t_md * t_mmd
        + t_m * t_m * t_md * t_md
    )
    total = complex(total)
    assert abs(total.imag) <= 1e-10 * max(1.0, abs(total.real))
    return max(0.0, total.real / (n * (n + 1) * (n + 2) * (n + 3)))


def variance(m: np.ndarray) -> MomentReport:
    """Mean, second moment and variance sigma_f^2 = <f^2> - <f>^2."""
    m = as_matrix(m)
    mean = avg_fidelity(m)
    second = fourth_moment_general(m)
    raw = second - mean * mean
    assert raw >= -VARIANCE_CLAMP * max(1.0, second)
    return MomentReport(
        n_eff=m.shape[0],
        mean=mean,
        second_moment=second,
        variance=max(0.0, raw),
        raw_variance=raw if raw < 0 else None,
    )


def gate_moments(g: GateSpec, with_variance: bool = True) -> MomentReport:
    """Moment report for a gate spec, over the full space or its subspace."""
    if g.subspace is None:
        m = adjoint(g.target) @ g.actual
        return variance(m) if with_variance else MomentReport(
            n_eff=m.shape[0], mean=avg_fidelity(m)
        )
    return subspace_avg_fidelity(g, with_variance=with_variance)


def subspace_avg_fidelity(g: GateSpec, with_variance: bool = False) -> MomentReport:
    """Average fidelity over input states confined to the selected subspace.

    Uses the restricted comparison matrix
    ``m_rel = restrict(target^dag) @ restrict(actual)`` and the trace formula
    at the subspace dimension.
    """
    if g.subspace is None:
        raise ValueError("gate spec has no subspace selector")
    m_rel = restrict(adjoint(g.target), g.subspace) @ restrict(g.actual, g.subspace)
    if with_variance:
        return variance(m_rel)
    return MomentReport(n_eff=m_rel.shape[0], mean=avg_fidelity(m_rel))


def conditional_fidelity(g: GateSpec) -> float:
    """Average fidelity conditioned on the state staying in the subspace.

    The accepted state is renormalized and the overlap is weighted by the
    acceptance probability ||P u P psi||^2, giving

        F_c = [Tr(u0^dag P u P u^dag P u0) + |Tr(u0^dag P u P)|^2]
              / [(n_rel + 1) Tr(u^dag P u P)]

    with all traces over the full space.
    """
    if g.subspace is None:
        raise ValueError("gate spec has no subspace selector")
    n = g.target.shape[0]
    p = projector(g.subspace, n)
    u0d = adjoint(g.target)
    pup = p @ g.actual @ p
    den = complex(np.trace(adjoint(g.actual) @ pup))
    assert abs(den.imag) <= 1e-12 * max(1.0, abs(den.real))
    if den.real <= ACCEPTANCE_EPS:
        raise NoAcceptanceError("acceptance probability vanishes on the subspace")
    num = complex(np.trace(u0d @ pup @ adjoint(g.actual) @ p @ g.target))
    assert abs(num.imag) <= 1e-12 * max(1.0, abs(num.real))
    cross = abs(np.trace(u0d @ pup)) ** 2
    n_rel = len(g.subspace)
    return float((num.real + cross) / ((n_rel + 1) * den.real))


def kraus_avg_fidelity(k: KrausMap, target: np.ndarray) -> float:
    """Average fidelity of an operator-sum map against a target unitary.

    [Tr(sum_k M_k^dag M_k) + sum_k |Tr M_k|^2] / (n (n+1)) with
    M_k = target^dag G_k.
    """
    target = as_matrix(target)
    if target.shape[0] != k.dim:
        raise ValueError(
            f"dimension mismatch: target {target.shape[0]} vs Kraus {k.dim}"
        )
    if not classify(target, DEFAULT_TOL).unitary:
        raise ValueError("target must be unitary within 1e-10")
    n = k.dim
    u0d = adjoint(target)
    m_ks = [u0d @ g for g in k.operators]
    gram = sum(complex(np.trace(adjoint(mk) @ mk)) for mk in m_ks)
    assert abs(gram.imag) <= 1e-12 * max(1.0, abs(gram.real))
    if k.trace_preserving:
        assert abs(gram.real - n) <= 1e-8
    cross = sum(abs(np.trace(mk)) ** 2 for mk in m_ks)
    return float((gram.real + cross) / (n * (n + 1)))


@dataclass(frozen=True)
class DecompositionReport:
    """Monte-Carlo split of <f^2> into Hermitian, anti-Hermitian, cross parts."""

    mean_total: float
    mean_hermitian: float
    mean_anti: float
    mean_cross: float
    max_pointwise_gap: float
    samples: int
    seed: int


def sa_decomposition_check(
    m: np.ndarray, samples: int, seed: int, workers: int = DEFAULT_WORKERS
) -> DecompositionReport:
    """Check |<m>|^4 = |<S>|^4 + |<A>|^4 + 2|<S>|^2|<A>|^2 on one state stream.

    S and A are the Hermitian and anti-Hermitian parts of ``m``; all four
    expectations use the same sampled states so the identity holds per sample
    up to rounding, reported as ``max_pointwise_gap``.
    """
    m = as_matrix(m)
    sym = (m + adjoint(m)) / 2.0
    anti = (m - adjoint(m)) / 2.0
    n = m.shape[0]
    children = np.random.SeedSequence(seed).spawn(workers)
    totals = np.zeros(4)
    gap = 0.0
    base, extra = divmod(samples, workers)
    for w, child in enumerate(children):
        rng = np.random.default_rng(child)
        size = base + (1 if w < extra else 0)
        done = 0
        while done < size:
            batch = min(1 << 16, size - done)
            states = sample_states(n, batch, rng)
            q_m = np.einsum("bi,ij,bj->b", states.conj(), m, states)
            q_s = np.einsum("bi,ij,bj->b", states.conj(), sym, states)
            q_a = np.einsum("bi,ij,bj->b", states.conj(), anti, states)
            f_total = np.abs(q_m) ** 4
            f_sym = np.abs(q_s) ** 4
            f_anti = np.abs(q_a) ** 4
            f_cross = (np.abs(q_s) ** 2) * (np.abs(q_a) ** 2)
            totals += [f_total.sum(), f_sym.sum(), f_anti.sum(), f_cross.sum()]
            gap = max(
                gap, float(np.abs(f_total - (f_sym + f_anti + 2 * f_cross)).max())
            )
            done += batch
    means = totals / samples
    return DecompositionReport(
        mean_total=float(means[0]),
        mean_hermitian=float(means[1]),
        mean_anti=float(means[2]),
        mean_cross=float(means[3]),
        max_pointwise_gap=gap,
        samples=samples,
        seed=seed,
    )
