"""Truncated Hilbert-Schmidt triple E' in H in E.

Points are stored as pairing coordinates c_n = <e_n, z> of an H-orthonormal
basis {e_n} lying in E'.  One representation carries all three norms:

    |z|_H^2  = sum c_n^2,        ||z||_E^2 = sum lambda_n c_n^2,

with summable positive weights lambda_n.  Vectors are plain numpy arrays of
shape (..., N); batch axes broadcast through every operation.
"""

from dataclasses import dataclass

import numpy as np


class ConstructionError(ValueError):
    """A construction precondition failed (e.g. the point is too close to H)."""


def _weights_from_formula(formula: str, dim: int) -> np.ndarray:
    if formula == "4^-n":
        return 4.0 ** -np.arange(1, dim + 1)
    raise ValueError(f"unknown weight formula {formula!r}")


@dataclass(frozen=True)
class SpaceModel:
    """Truncation dimension plus the weight sequence defining the triple."""

    weights: np.ndarray
    generator: str | None = None  # formula name, if the weights came from one

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d sequence")
        if not np.all(w > 0):
            raise ValueError("weights must be strictly positive")
        if np.any(np.diff(w) > 0):
            raise ValueError("weights must be nonincreasing")

    @property
    def dim(self) -> int:
        return int(self.weights.size)

    def e_norm2(self, z: np.ndarray) -> np.ndarray:
        return np.sum(self.weights * np.asarray(z) ** 2, axis=-1)

    def h_norm2(self, z: np.ndarray) -> np.ndarray:
        return np.sum(np.asarray(z) ** 2, axis=-1)

    def e_norm(self, z: np.ndarray) -> np.ndarray:
        return np.sqrt(self.e_norm2(z))

    def h_norm(self, z: np.ndarray) -> np.ndarray:
        return np.sqrt(self.h_norm2(z))

    def pairing(self, xi: np.ndarray, z: np.ndarray) -> np.ndarray:
        """E'-E pairing <xi, z> for xi given in H coordinates."""
        return np.sum(np.asarray(xi) * np.asarray(z), axis=-1)

    def weight_tail(self, m: int) -> float:
        """sum_{k > m} lambda_k against the generator formula when known.

        With an explicit weight array the tail beyond the truncation is zero.
        """
        if self.generator == "4^-n":
            return (4.0 ** -m) / 3.0
        return float(self.weights[m:].sum())

    def weight_after(self, m: int) -> float:
        """lambda_{m+1} against the generator formula when known."""
        if self.generator == "4^-n":
            return 4.0 ** -(m + 1)
        return float(self.weights[m]) if m < self.dim else 0.0

    def basis_vector(self, n: int) -> np.ndarray:
        e = np.zeros(self.dim)
        e[n - 1] = 1.0
        return e


def make_space(dim: int = 32, weights="4^-n") -> SpaceModel:
    if isinstance(weights, str):
        return SpaceModel(_weights_from_formula(weights, dim), generator=weights)
    return SpaceModel(np.asarray(weights, dtype=float))


def canonical_x(model: SpaceModel) -> np.ndarray:
    """The distinguished off-H point with coordinates c_n = 2^(n/2).

    With weights 4^-n its E-norm stays bounded while the H-norm diverges,
    and the identity basis realizes the growth bound with equality.
    """
    return np.sqrt(2.0) ** np.arange(1, model.dim + 1)


def project(model: SpaceModel, n: int, z: np.ndarray) -> np.ndarray:
    """Coordinate projection: zero out pairing coordinates beyond n."""
    if not 1 <= n <= model.dim:
        raise ValueError(f"projection index {n} outside 1..{model.dim}")
    out = np.array(z, dtype=float, copy=True)
    out[..., n:] = 0.0
    return out


def norms(model: SpaceModel, z: np.ndarray) -> tuple[float, float]:
    """(E-norm, truncated H-norm).  H-norm growth across truncations is the
    caller's 'z not in H' diagnostic; at fixed N both values are finite."""
    return float(model.e_norm(z)), float(model.h_norm(z))


@dataclass(frozen=True)
class GrowthBasis:
    """Off-H point x with an H-orthonormal family of fast-growing pairings."""

    x: np.ndarray
    basis: np.ndarray  # (K, N), rows H-orthonormal, rows lie in E'
    growth_certificate: np.ndarray  # (K,), <e_n^x, x> >= 2^(n/2)

    @property
    def depth(self) -> int:
        return int(self.basis.shape[0])

    def pairings(self, z: np.ndarray) -> np.ndarray:
        """<e_n^x, z> for n = 1..K; batch axes broadcast."""
        return np.asarray(z) @ self.basis.T


def build_growth_basis(
    model: SpaceModel, x: np.ndarray, h_norm2_threshold: float = 100.0
) -> GrowthBasis:
    """Construct an H-orthonormal family with <e_n^x, x> >= 2^(n/2).

    Coordinates of x are consumed in consecutive blocks: block n is the
    shortest run of remaining coordinates whose H-mass reaches 2^(n/2), and
    e_n^x is the normalized restriction of x to that block.  Blocks have
    disjoint support, so orthonormality is structural, and each e_n^x is a
    finite coordinate combination, hence lies in E'.  For the canonical x
    (c_n = 2^(n/2)) every block is a single coordinate and the bound holds
    with equality.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise ValueError("x must be a coordinate vector of the model dimension")
    if model.h_norm2(x) < h_norm2_threshold:
        raise ConstructionError(
            f"truncated |x|_H^2 = {model.h_norm2(x):.3g} below the off-H "
            f"certificate threshold {h_norm2_threshold:.3g}"
        )
    rows, growth = [], []
    lo = 0
    n = 1
    while lo < model.dim:
        need2 = 2.0 ** n  # (2^(n/2))^2
        acc = 0.0
        hi = lo
        while hi < model.dim and acc < need2:
            acc += x[hi] ** 2
            hi += 1
        if acc < need2:
            break
        e = np.zeros(model.dim)
        e[lo:hi] = x[lo:hi] / np.sqrt(acc)
        rows.append(e)
        growth.append(np.sqrt(acc))
        lo = hi
        n += 1
    if not rows:
        raise ConstructionError(
            "growth deficit: no coordinate block of x reaches the required "
            "pairing 2^(1/2); x is too close to H at this truncation"
        )
    return GrowthBasis(x=x, basis=np.array(rows), growth_certificate=np.array(growth))
