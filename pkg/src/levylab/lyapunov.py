"""Compact Lyapunov norms and the exact-resolvent estimate of U_1 q_x^2.

Two kinds of norm:

  gaussian   q_x(z)^2 = sum_n 2^n ||Q_{n+1} z - Q_n z||_E^2 + g(z)^2
  levy       q_x(z)^2 = sum_n a_n lambda_n c_n^2            + g(z)^2

with g(z) = sum_n 2^(-n/2) |<e_n^x, z>| over the fast-growth family, Q_n a
projection subsequence certified deterministically, and a_n nondecreasing
coefficients with sum a_n lambda_n < infinity.

The resolvent value v_0(z) = U_1 q_x^2 (z) is sampled exactly by exponential
time randomization: v_0(z) = E[q_x^2(z + Z_T)], T ~ Exp(1).  No quadrature,
no bias; the only error is statistical.
"""

from dataclasses import dataclass

import numpy as np

from .measures import (
    DEFAULT_CONFIDENCE,
    InstabilityError,
    LevyTriplet,
    McEstimate,
    sample_increments,
)
from .space import GrowthBasis, SpaceModel, project


class PreconditionError(ValueError):
    """The operation was called outside its proven hypotheses."""


def select_subsequence(model: SpaceModel, depth: int) -> list[int]:
    """Minimal strictly increasing m_1 < ... < m_depth with, at each level n,

        sqrt(lambda_{m+1}) <= 2^-n          (operator-norm certificate)
        sum_{k>m} lambda_k <= 8^-n          (Chebyshev tail certificate, t<=1)

    Tails are taken against the weight generator formula when one is known,
    so the certificates are those of the untruncated sequence.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    out: list[int] = []
    m = 0
    for n in range(1, depth + 1):
        m = max(m + 1, 1) if out else 1
        while m <= model.dim and not (
            np.sqrt(model.weight_after(m)) <= 2.0**-n
            and model.weight_tail(m) <= 8.0**-n
        ):
            m += 1
        if m > model.dim:
            raise ValueError(
                f"truncation dim={model.dim} cannot certify subsequence depth {n}"
            )
        out.append(m)
    return out


def _max_depth(model: SpaceModel) -> int:
    depth = 0
    try:
        while True:
            select_subsequence(model, depth + 1)
            depth += 1
    except ValueError:
        return depth


@dataclass(frozen=True)
class LyapunovNorm:
    """Evaluator for q_x with its certified coefficient data."""

    kind: str  # "gaussian" | "levy"
    model: SpaceModel
    growth_basis: GrowthBasis
    subseq: tuple[int, ...] = ()  # gaussian kind: m_1 < m_2 < ...
    alphas: np.ndarray | None = None  # levy kind: nondecreasing, sum a_n l_n < inf


def gaussian_norm(
    model: SpaceModel, growth_basis: GrowthBasis, depth: int | None = None
) -> LyapunovNorm:
    depth = _max_depth(model) if depth is None else depth
    subseq = tuple(select_subsequence(model, depth))
    return LyapunovNorm("gaussian", model, growth_basis, subseq=subseq)


def levy_norm(model: SpaceModel, growth_basis: GrowthBasis, alphas="2^n") -> LyapunovNorm:
    if isinstance(alphas, str):
        if alphas != "2^n":
            raise ValueError(f"unknown alpha formula {alphas!r}")
        a = 2.0 ** np.arange(1, model.dim + 1)
        if model.generator == "4^-n":
            pass  # sum 2^n 4^-n = 1 < infinity against the generator
    else:
        a = np.asarray(alphas, dtype=float)
        if a.shape != (model.dim,):
            raise ValueError("alphas must match the model dimension")
    if np.any(np.diff(a) < 0) or np.any(a <= 0):
        raise ValueError("alphas must be positive and nondecreasing")
    if not np.isfinite((a * model.weights).sum()):
        raise ValueError("sum alpha_n lambda_n must be finite")
    return LyapunovNorm("levy", model, growth_basis, alphas=a)


def _growth_sum(norm: LyapunovNorm, z: np.ndarray) -> np.ndarray:
    pair = np.abs(norm.growth_basis.pairings(z))
    w = 2.0 ** (-0.5 * np.arange(1, norm.growth_basis.depth + 1))
    return pair @ w


def q_x_eval(norm: LyapunovNorm, z: np.ndarray) -> np.ndarray:
    """q_x at a point or a batch (..., N) of points; exact at truncation."""
    z = np.asarray(z, dtype=float)
    w = norm.model.weights
    if norm.kind == "levy":
        first = np.sum(norm.alphas * w * z**2, axis=-1)
    else:
        bounds = (0,) + norm.subseq
        first = np.zeros(z.shape[:-1])
        for n in range(len(norm.subseq)):
            lo, hi = bounds[n], bounds[n + 1]
            first = first + 2.0**n * np.sum(w[lo:hi] * z[..., lo:hi] ** 2, axis=-1)
        # remainder block beyond the last certified projection
        tail = norm.subseq[-1]
        first = first + 2.0 ** len(norm.subseq) * np.sum(
            w[tail:] * z[..., tail:] ** 2, axis=-1
        )
    return np.sqrt(first + _growth_sum(norm, z) ** 2)


def _check_shrinking(samples: np.ndarray, what: str) -> None:
    half = samples[: samples.size // 2]
    se_half = half.std(ddof=1) / np.sqrt(half.size)
    se_full = samples.std(ddof=1) / np.sqrt(samples.size)
    if se_full > 0.95 * se_half + 1e-12:
        raise InstabilityError(
            f"{what}: stderr not shrinking; integrability against the "
            "increment law is suspect (weak second-moment bound check)"
        )


def v0_estimate(
    norm: LyapunovNorm,
    triplet: LevyTriplet,
    z: np.ndarray,
    n: int,
    rng: np.random.Generator,
    confidence: float = DEFAULT_CONFIDENCE,
) -> McEstimate:
    """v_0(z) = E[q_x^2(z + Z_T)], T ~ Exp(1): the exact U_1 q_x^2 sample."""
    t = rng.exponential(1.0, size=n)
    incr = sample_increments(triplet, t, n, rng)
    vals = q_x_eval(norm, np.asarray(z) + incr) ** 2
    _check_shrinking(vals, "v0_estimate")
    return McEstimate.from_samples(vals, confidence)


def qx_square_mean(
    norm: LyapunovNorm,
    triplet: LevyTriplet,
    t: float,
    n: int,
    rng: np.random.Generator,
    confidence: float = DEFAULT_CONFIDENCE,
) -> McEstimate:
    """Estimate of the q_x^2 mass of the increment law at time t."""
    incr = sample_increments(triplet, t, n, rng)
    return McEstimate.from_samples(q_x_eval(norm, incr) ** 2, confidence)


def moment_constant_estimate(
    norm: LyapunovNorm,
    triplet: LevyTriplet,
    t_grid,
    n: int,
    rng: np.random.Generator,
) -> float:
    """C_tilde with E q_x^2(Z_t) <= C_tilde (1 + t^2) over the time grid."""
    best = 0.0
    for t in t_grid:
        est = qx_square_mean(norm, triplet, t, n, rng)
        best = max(best, est.mean / (1.0 + t**2))
    return best


def supermedian_check(
    norm: LyapunovNorm,
    triplet: LevyTriplet,
    t: float,
    z_set,
    n: int,
    rng: np.random.Generator,
    confidence: float = DEFAULT_CONFIDENCE,
) -> list[str]:
    """Per-z verdicts on E[q_x^2(z + Z_t)] >= q_x^2(z).

    Proved only for the pure unit-H Gaussian semigroup; anything else is a
    precondition error (the jump case has two-sided bounds instead).
    """
    if not triplet.is_pure_unit_gaussian:
        raise PreconditionError(
            "supermedian inequality is proved only for the drift-free "
            "unit-H Gaussian semigroup"
        )
    verdicts = []
    for z in z_set:
        incr = sample_increments(triplet, t, n, rng)
        est = McEstimate.from_samples(
            q_x_eval(norm, np.asarray(z) + incr) ** 2, confidence
        )
        verdicts.append(est.verdict_at_least(float(q_x_eval(norm, z)) ** 2))
    return verdicts


def membership_Ex(
    kind: str,
    z_formula,
    n_grid,
    weights: str = "4^-n",
    alphas="2^n",
    divergence_slope: float = 1.5,
    bounded_slope: float = 1.1,
) -> dict:
    """Track q_x(z) across truncations for a coordinate-formula point.

    z_formula maps a SpaceModel to the coordinate vector of z at that
    truncation.  Verdict: "not in E_x" when q_x grows by at least
    divergence_slope per doubling of N, "in E_x" when the growth settles
    below bounded_slope, otherwise "inconclusive".
    """
    from .space import build_growth_basis, canonical_x, make_space

    n_grid = sorted(n_grid)
    values = []
    for dim in n_grid:
        model = make_space(dim, weights)
        growth_basis = build_growth_basis(model, canonical_x(model))
        norm = (
            gaussian_norm(model, growth_basis)
            if kind == "gaussian"
            else levy_norm(model, growth_basis, alphas)
        )
        values.append(float(q_x_eval(norm, z_formula(model))))
    values = np.array(values)
    if np.all(values < 1e-12):
        verdict = "in E_x"
    else:
        ratios = values[1:] / np.maximum(values[:-1], 1e-300)
        last = ratios[-1] if ratios.size else 1.0
        if last >= divergence_slope:
            verdict = "not in E_x"
        elif last <= bounded_slope:
            verdict = "in E_x"
        else:
            verdict = "inconclusive"
    return {"n_grid": list(n_grid), "q_values": values.tolist(), "verdict": verdict}
