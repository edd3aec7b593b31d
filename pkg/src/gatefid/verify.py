"""Cross-module consistency checks, runnable from the CLI.

The quick level re-derives closed-form results from independent routes
(exact sphere integrals, worked rational values, the Hermitian/general
fourth-moment collapse, density-vs-trace moments) in a few seconds. The full
level adds Monte-Carlo agreement at larger sample counts, including the
reference two-piece histogram regeneration.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import moments, qubit_dist, sampling
from .linalg import QubitSpectrum, adjoint, projector
from .moments import GateSpec

QUICK_SEED = 20260810


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def reference_spectrum() -> QubitSpectrum:
    """The worked two-piece example shipped with the package."""
    return QubitSpectrum.ordered(
        0.7 * np.exp(1j * np.pi / 8), 0.8 * np.exp(1j * 4 * np.pi / 5)
    )


def reference_matrix() -> np.ndarray:
    s = reference_spectrum()
    return np.diag([s.lambda0, s.lambda1]).astype(np.complex128)


def _random_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))


def _random_spectrum(rng: np.random.Generator, min_sep: float = 0.05) -> QubitSpectrum:
    while True:
        z = rng.uniform(-1, 1, 4)
        l0, l1 = complex(z[0], z[1]), complex(z[2], z[3])
        if max(abs(l0), abs(l1)) <= 1.0 and abs(l0 - l1) >= min_sep:
            return QubitSpectrum.ordered(l0, l1)


def check_monomial_patterns() -> CheckResult:
    pattern_weights = {(4,): 24, (2, 2): 4, (3, 1): 6, (2, 1, 1): 2, (1, 1, 1, 1): 1}
    worst = 0.0
    ok = True
    for n in (4, 6):
        denom = n * (n + 1) * (n + 2) * (n + 3)
        for pattern, weight in pattern_weights.items():
            k = pattern + (0,) * (n - len(pattern))
            exact = sampling.monomial_integral_exact(k, n)
            if exact != Fraction(weight, denom):
                ok = False
            worst = max(worst, abs(sampling.monomial_integral(k, n) - weight / denom))
    return CheckResult("monomial_patterns", ok, f"max float gap {worst:.3g}")


def check_monomial_completeness() -> CheckResult:
    ok = True
    for n in range(2, 7):
        total = Fraction(0)
        for i in range(n):
            k = [0] * n
            k[i] = 2
            total += sampling.monomial_integral_exact(k, n)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                k = [0] * n
                k[i] = k[j] = 1
                total += sampling.monomial_integral_exact(k, n)
        ok = ok and total == 1
    return CheckResult("monomial_completeness", ok, "sum over (sum|c|^2)^2 expansion")


def check_hermitian_collapse(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (2, 3, 4, 5):
        for _ in range(10):
            raw = _random_matrix(rng, n)
            for part in ((raw + adjoint(raw)) / 2, (raw - adjoint(raw)) / 2):
                a = moments.fourth_moment_hermitian(part)
                b = moments.fourth_moment_general(part)
                worst = max(worst, abs(a - b) / max(abs(a), abs(b), 1e-300))
    return CheckResult("hermitian_collapse", worst <= 1e-12, f"max rel gap {worst:.3g}")


def check_distribution_moments(seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_moment = 0.0
    worst_mass = 0.0
    for _ in range(50):
        s = _random_spectrum(rng)
        dist = qubit_dist.normal_pdf(s)
        rep = qubit_dist.quadrature_moments(dist)
        m = np.diag([s.lambda0, s.lambda1]).astype(np.complex128)
        worst_moment = max(
            worst_moment,
            abs(rep.mean - moments.avg_fidelity(m)),
            abs(rep.second_moment - moments.fourth_moment_general(m)),
        )
        worst_mass = max(worst_mass, abs(dist.mass() - 1.0))
    ok = worst_moment <= 1e-9 and worst_mass <= 1e-10
    return CheckResult(
        "distribution_moments",
        ok,
        f"max moment gap {worst_moment:.3g}, max mass gap {worst_mass:.3g}",
    )


def check_worked_values() -> CheckResult:
    gaps = []
    m = np.diag([1.0, 0.0]).astype(np.complex128)
    rep = moments.variance(m)
    gaps += [abs(rep.mean - 1 / 3), abs(rep.second_moment - 1 / 5), abs(rep.variance - 4 / 45)]
    for alpha, expected in ((0.0, 2 / 3), (0.5, 14 / 15), (1.0, 1.0)):
        gaps.append(abs(moments.conditional_fidelity(_leaky_gate(alpha)) - expected))
    for p in (0.0, 0.2, 1.0):
        got = moments.kraus_avg_fidelity(moments.depolarizing_kraus(p), np.eye(2))
        gaps.append(abs(got - (1 - p / 2)))
    worst = max(gaps)
    return CheckResult("worked_values", worst <= 1e-12, f"max gap {worst:.3g}")


def _leaky_gate(alpha: float) -> GateSpec:
    s = np.sqrt(max(0.0, 1.0 - alpha * alpha))
    u = np.eye(3, dtype=np.complex128)
    u[1, 1] = alpha
    u[1, 2] = s
    u[2, 1] = -s
    u[2, 2] = np.conjugate(alpha)
    return GateSpec(target=np.eye(3), actual=u, subspace=(0, 1))


def check_mc_closed_form(seed: int, samples: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    cases = [reference_matrix()] + [_random_matrix(rng, n) / n for n in (2, 3, 4)]
    for i, m in enumerate(cases):
        for order, closed in (
            (1, moments.avg_fidelity(m)),
            (2, moments.fourth_moment_general(m)),
        ):
            est = sampling.mc_moment(m, order, samples, seed=seed + 17 * i + order)
            sigma = max(est.std_error, 1e-300)
            worst = max(worst, abs(est.mean - closed) / sigma)
    return CheckResult("mc_closed_form", worst <= 4.0, f"max |z| = {worst:.2f} sigma")


def check_histogram_regeneration(seed: int, samples: int, bins: int) -> CheckResult:
    dist = qubit_dist.normal_pdf(reference_spectrum())
    hist = sampling.mc_histogram(
        reference_matrix(), bins, samples, seed, value_range=dist.support()
    )
    cmp = qubit_dist.compare_histogram(dist, hist)
    ratio = cmp.chi_square / cmp.dof
    ok = ratio < 1.5 and cmp.sup_norm_density_gap < 0.05
    return CheckResult(
        "histogram_regeneration",
        ok,
        f"chi2/dof {ratio:.3f}, sup-norm gap {cmp.sup_norm_density_gap:.4f}",
    )


def check_mc_batch(seed: int, samples: int, per_dim: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    hits = 0
    total = 0
    for n in (2, 3, 4, 5):
        for i in range(per_dim):
            m = _random_matrix(rng, n) / n
            closed = moments.fourth_moment_general(m)
            est = sampling.mc_moment(m, 2, samples, seed=seed + 101 * n + i)
            total += 1
            if abs(est.mean - closed) <= 4.0 * max(est.std_error, 1e-300):
                hits += 1
    ok = hits >= 0.95 * total
    return CheckResult("mc_batch", ok, f"{hits}/{total} within 4 sigma")


def check_conditional_oracle(seed: int, samples: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for alpha in (0.0, 0.5, 1.0):
        g = _leaky_gate(alpha)
        got = moments.conditional_fidelity(g)
        est, se = _mc_conditional(g, samples, rng)
        worst = max(worst, abs(est - got) / max(se, 1e-300))
    return CheckResult("conditional_oracle", worst <= 4.0, f"max |z| = {worst:.2f} sigma")


def _mc_conditional(
    g: GateSpec, samples: int, rng: np.random.Generator, batches: int = 50
) -> tuple[float, float]:
    """Acceptance-weighted Monte-Carlo conditional fidelity over the subspace.

    Returns a batched ratio estimate with its standard error.
    """
    sel = list(g.subspace)
    n = g.target.shape[0]
    n_rel = len(sel)
    p = projector(g.subspace, n)
    num_op = p @ adjoint(g.target) @ p @ g.actual @ p
    den_op = p @ adjoint(g.actual) @ p @ g.actual @ p
    ratios = []
    per_batch = samples // batches
    for _ in range(batches):
        sub = sampling.sample_states(n_rel, per_batch, rng)
        states = np.zeros((per_batch, n), dtype=np.complex128)
        states[:, sel] = sub
        num = np.abs(np.einsum("bi,ij,bj->b", states.conj(), num_op, states)) ** 2
        den = np.einsum("bi,ij,bj->b", states.conj(), den_op, states).real
        ratios.append(num.mean() / den.mean())
    ratios = np.asarray(ratios)
    return float(ratios.mean()), float(ratios.std(ddof=1) / np.sqrt(batches))


def check_sa_decomposition(seed: int, samples: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    m = _random_matrix(rng, 3)
    rep = moments.sa_decomposition_check(m, samples, seed=seed)
    recombined = rep.mean_hermitian + rep.mean_anti + 2 * rep.mean_cross
    ok = rep.max_pointwise_gap <= 1e-12 * max(1.0, rep.mean_total) and (
        abs(recombined - rep.mean_total) <= 1e-12 * max(1.0, rep.mean_total)
    )
    return CheckResult(
        "sa_decomposition", ok, f"max pointwise gap {rep.max_pointwise_gap:.3g}"
    )


def run_checks(level: str = "quick", seed: int = QUICK_SEED) -> dict:
    """Run the named check suite; returns a JSON-ready report."""
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    checks = [
        check_monomial_patterns(),
        check_monomial_completeness(),
        check_hermitian_collapse(seed),
        check_distribution_moments(seed + 1),
        check_worked_values(),
        check_mc_closed_form(seed + 2, samples=20_000),
    ]
    if level == "full":
        checks += [
            check_histogram_regeneration(seed + 3, samples=1_000_000, bins=50),
            check_mc_batch(seed + 4, samples=100_000, per_dim=5),
            check_conditional_oracle(seed + 5, samples=100_000),
            check_sa_decomposition(seed + 6, samples=100_000),
        ]
    return {
        "level": level,
        "seed": seed,
        "passed": bool(all(c.passed for c in checks)),
        "checks": [
            {"name": c.name, "passed": bool(c.passed), "detail": c.detail}
            for c in checks
        ],
    }
