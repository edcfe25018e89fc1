"""Increment laws of the truncated Levy semigroup and their moment checks.

The sampled law at time t is

    Z_t = t*b + sqrt(t)*G + sum_{i <= Poisson(t*intensity)} J_i,

with G a diagonal Gaussian in pairing coordinates and J the jump law of a
finite-intensity compound Poisson part.  Small jumps are truncated away and
their compensator is folded into the effective drift b, so only the law of
Z_t is represented, which is all the downstream estimators consume.

Every stochastic operation returns an McEstimate; assertions on estimates
yield three-valued verdicts (pass / fail / inconclusive).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm as _normal

from .space import SpaceModel, make_space

DEFAULT_CONFIDENCE = 0.999
DEFAULT_ATOL = 1e-9


class InstabilityError(RuntimeError):
    """A Monte Carlo estimate failed its convergence self-check."""


def z_value(confidence: float) -> float:
    """Two-sided normal quantile for the given confidence level."""
    return float(_normal.ppf(0.5 * (1.0 + confidence)))


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo estimate with its standard error.

    The verdict rule: pass when the target sits inside the confidence band,
    fail when it is more than three bands away, inconclusive in between.
    """

    mean: float
    stderr: float
    n_samples: int
    confidence: float = DEFAULT_CONFIDENCE

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie in (0, 1)")

    @classmethod
    def from_samples(
        cls, samples: np.ndarray, confidence: float = DEFAULT_CONFIDENCE
    ) -> "McEstimate":
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        mean = float(samples.mean())
        stderr = float(samples.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        return cls(mean=mean, stderr=stderr, n_samples=n, confidence=confidence)

    def merge(self, other: "McEstimate") -> "McEstimate":
        """Pool two shard estimates; associative and order-independent."""
        if other.confidence != self.confidence:
            raise ValueError("cannot merge estimates at different confidence")
        na, nb = self.n_samples, other.n_samples
        n = na + nb
        delta = other.mean - self.mean
        mean = self.mean + delta * nb / n
        m2a = self.stderr**2 * na * max(na - 1, 0)
        m2b = other.stderr**2 * nb * max(nb - 1, 0)
        m2 = m2a + m2b + delta**2 * na * nb / n
        stderr = np.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
        return McEstimate(mean, float(stderr), n, self.confidence)

    # -- three-valued assertions ------------------------------------------

    def _band(self) -> float:
        return z_value(self.confidence) * self.stderr

    def verdict(self, target: float, atol: float = DEFAULT_ATOL) -> str:
        gap = abs(self.mean - target)
        if gap <= self._band() + atol:
            return "pass"
        if gap > 3.0 * self._band() + atol:
            return "fail"
        return "inconclusive"

    def verdict_at_least(self, bound: float, atol: float = DEFAULT_ATOL) -> str:
        gap = bound - self.mean
        if gap <= self._band() + atol:
            return "pass"
        if gap > 3.0 * self._band() + atol:
            return "fail"
        return "inconclusive"

    def verdict_at_most(self, bound: float, atol: float = DEFAULT_ATOL) -> str:
        gap = self.mean - bound
        if gap <= self._band() + atol:
            return "pass"
        if gap > 3.0 * self._band() + atol:
            return "fail"
        return "inconclusive"


@dataclass(frozen=True)
class JumpMeasure:
    """Finite-intensity jump law: intensity plus a named jump distribution.

    kinds:
      "pointmass"  mixture of atoms (rows of `atoms` with weights `probs`)
      "poisson01"  embedded Dirac mass at a uniform point of (0,1) in the
                   sine-basis realization of L^2(0,1) in H^-1; coordinate n
                   of delta_u is sqrt(2)*sin(n*pi*u)
    """

    intensity: float
    kind: str
    atoms: np.ndarray | None = None
    probs: np.ndarray | None = None

    def __post_init__(self):
        if self.intensity <= 0:
            raise ValueError("jump intensity must be positive")
        if self.kind == "pointmass":
            atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
            object.__setattr__(self, "atoms", atoms)
            if self.probs is None:
                probs = np.full(atoms.shape[0], 1.0 / atoms.shape[0])
            else:
                probs = np.asarray(self.probs, dtype=float)
            if probs.shape != (atoms.shape[0],) or not np.isclose(probs.sum(), 1.0):
                raise ValueError("atom probabilities must sum to 1")
            if np.any(np.all(atoms == 0.0, axis=1)):
                raise ValueError("zero jumps are rejected: M({0}) = 0")
            object.__setattr__(self, "probs", probs)
        elif self.kind != "poisson01":
            raise ValueError(f"unknown jump kind {self.kind!r}")

    def sample(self, n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "pointmass":
            idx = rng.choice(self.atoms.shape[0], size=n, p=self.probs)
            return self.atoms[idx]
        u = rng.uniform(0.0, 1.0, size=n)
        k = np.arange(1, dim + 1)
        return np.sqrt(2.0) * np.sin(np.pi * np.outer(u, k))

    # closed-form jump moments against a fixed functional xi (H coordinates)

    def pairing_mean(self, xi: np.ndarray) -> float:
        """E<xi, J> for a single jump."""
        xi = np.asarray(xi, dtype=float)
        if self.kind == "pointmass":
            return float(self.probs @ (self.atoms @ xi))
        k = np.arange(1, xi.size + 1)
        # integral of sqrt(2) sin(k pi u) over (0,1)
        coef = np.sqrt(2.0) * (1.0 - (-1.0) ** k) / (k * np.pi)
        return float(xi @ coef)

    def pairing_second_moment(self, xi: np.ndarray) -> float:
        """E<xi, J>^2 for a single jump."""
        xi = np.asarray(xi, dtype=float)
        if self.kind == "pointmass":
            return float(self.probs @ (self.atoms @ xi) ** 2)
        # Parseval: xi is a finite sine combination, so int_0^1 xi(u)^2 du
        return float(xi @ xi)

    def mean_e_norm2(self, model: SpaceModel) -> float:
        """E ||J||_E^2, the second-E-moment certificate of the measure."""
        if self.kind == "pointmass":
            return float(self.probs @ model.e_norm2(self.atoms))
        return float(model.weights.sum())  # E sum lambda_n 2 sin^2 = sum lambda_n


@dataclass(frozen=True)
class LevyTriplet:
    """Effective drift, diagonal Gaussian part, optional compound Poisson part.

    gaussian_diag holds the variance rate of each pairing coordinate: the
    unit-H cylinder Gaussian of the Brownian case is all-ones, matching the
    variance identity t|l|^2 + l^2(z).
    """

    model: SpaceModel
    drift: np.ndarray
    gaussian_diag: np.ndarray
    jumps: JumpMeasure | None = None

    def __post_init__(self):
        d = np.asarray(self.drift, dtype=float)
        g = np.asarray(self.gaussian_diag, dtype=float)
        if d.shape != (self.model.dim,) or g.shape != (self.model.dim,):
            raise ValueError("drift and gaussian_diag must match the model dimension")
        if np.any(g < 0):
            raise ValueError("gaussian variances must be nonnegative")
        object.__setattr__(self, "drift", d)
        object.__setattr__(self, "gaussian_diag", g)
        if self.jumps is not None:
            if not np.isfinite(self.jumps.intensity * self.jumps.mean_e_norm2(self.model)):
                raise ValueError("jump measure must have finite second E-moment")

    @property
    def is_continuous(self) -> bool:
        return self.jumps is None

    @property
    def is_pure_unit_gaussian(self) -> bool:
        return (
            self.jumps is None
            and not self.drift.any()
            and np.all(self.gaussian_diag == 1.0)
        )


def brownian_triplet(model: SpaceModel) -> LevyTriplet:
    """The unit-H cylinder Brownian case."""
    return LevyTriplet(model, np.zeros(model.dim), np.ones(model.dim))


def poisson_example_space(dim: int = 32) -> SpaceModel:
    """Spectral realization of L^2(0,1) in H^-1: lambda_n = 1/(1 + n^2 pi^2)."""
    n = np.arange(1, dim + 1)
    return SpaceModel(1.0 / (1.0 + (n * np.pi) ** 2))


def poisson_example_triplet(dim: int = 32) -> LevyTriplet:
    """Poisson point measure on (0,1) embedded via the sine basis."""
    model = poisson_example_space(dim)
    return LevyTriplet(
        model,
        np.zeros(dim),
        np.zeros(dim),
        JumpMeasure(intensity=1.0, kind="poisson01"),
    )


def sample_increments(
    triplet: LevyTriplet, t, n: int, rng: np.random.Generator
) -> np.ndarray:
    """n independent draws of Z_t; t may be a scalar or a length-n array."""
    t = np.broadcast_to(np.asarray(t, dtype=float), (n,))
    if np.any(t <= 0):
        raise ValueError("time must be positive")
    dim = triplet.model.dim
    out = t[:, None] * triplet.drift
    scale = np.sqrt(t)[:, None] * np.sqrt(triplet.gaussian_diag)
    out = out + scale * rng.standard_normal((n, dim))
    if triplet.jumps is not None:
        counts = rng.poisson(t * triplet.jumps.intensity)
        total = int(counts.sum())
        if total:
            draws = triplet.jumps.sample(total, dim, rng)
            idx = np.repeat(np.arange(n), counts)
            np.add.at(out, idx, draws)
    return out


def sample_increment(
    triplet: LevyTriplet, t: float, rng: np.random.Generator
) -> np.ndarray:
    """One draw of Z_t; deterministic given the generator state."""
    return sample_increments(triplet, t, 1, rng)[0]


def pairing_second_moment(
    triplet: LevyTriplet,
    xi: np.ndarray,
    t: float,
    n: int,
    rng: np.random.Generator,
    confidence: float = DEFAULT_CONFIDENCE,
) -> McEstimate:
    """Monte Carlo estimate of the second pairing moment E<xi, Z_t>^2."""
    z = sample_increments(triplet, t, n, rng)
    vals = (z @ np.asarray(xi, dtype=float)) ** 2
    return McEstimate.from_samples(vals, confidence)


def pairing_second_moment_target(triplet: LevyTriplet, xi: np.ndarray, t: float) -> float:
    """Closed form of E<xi, Z_t>^2 in the effective-drift parametrization:

        t^2 (<xi,b> + L*E<xi,J>)^2 + t (sum xi_n^2 r_n + L*E<xi,J>^2).
    """
    xi = np.asarray(xi, dtype=float)
    mean_rate = float(xi @ triplet.drift)
    var_rate = float(xi**2 @ triplet.gaussian_diag)
    if triplet.jumps is not None:
        mean_rate += triplet.jumps.intensity * triplet.jumps.pairing_mean(xi)
        var_rate += triplet.jumps.intensity * triplet.jumps.pairing_second_moment(xi)
    return t**2 * mean_rate**2 + t * var_rate


def check_weak_moment_bound(
    triplet: LevyTriplet,
    t_grid,
    xi_set,
    n: int,
    rng: np.random.Generator,
    confidence: float = DEFAULT_CONFIDENCE,
    stability_tol: float = 0.2,
):
    """Empirical weak-second-moment bound: C_hat such that

        E<xi, Z_t>^2 <= C_hat (1 + t^2) |xi|^2   over the grid.

    C_hat must stay stable (within stability_tol) when the sample count
    doubles; a stderr that fails to shrink raises InstabilityError.
    """
    t_grid = list(t_grid)
    xi_set = [np.asarray(x, dtype=float) for x in xi_set]
    if not t_grid or not xi_set:
        raise ValueError("t_grid and xi_set must be nonempty")

    def _pass(m):
        report = []
        c_hat = 0.0
        for t in t_grid:
            for i, xi in enumerate(xi_set):
                est = pairing_second_moment(triplet, xi, t, m, rng, confidence)
                h2 = float(xi @ xi)
                ratio = est.mean / ((1.0 + t**2) * h2)
                c_hat = max(c_hat, ratio)
                report.append(
                    {"t": t, "xi_index": i, "estimate": est, "ratio": ratio}
                )
        return c_hat, report

    c1, report1 = _pass(n)
    c2, report2 = _pass(2 * n)
    for r1, r2 in zip(report1, report2):
        if r2["estimate"].stderr > 0.95 * r1["estimate"].stderr + DEFAULT_ATOL:
            raise InstabilityError(
                f"stderr not shrinking as 1/sqrt(n) at cell t={r1['t']}, "
                f"xi_index={r1['xi_index']}"
            )
    if abs(c2 - c1) > stability_tol * max(c1, c2):
        raise InstabilityError("C_hat unstable under doubling of sample count")
    return c2, {"cells": report2, "C_first_pass": c1, "stable": True}
