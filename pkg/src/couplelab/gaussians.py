"""Gaussian laws: the closed-form oracle object shared by the kernel
chain-law computations and the divergence module."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Array = np.ndarray


@dataclass(frozen=True)
class GaussianLaw:
    """Mean vector plus covariance, diagonal (1-D array) or full (2-D)."""

    mean: Array
    cov: Array

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.asarray(self.cov, dtype=float)
        if cov.ndim == 0:
            cov = np.full(mean.size, float(cov))
        if cov.ndim == 1:
            if cov.size != mean.size:
                raise ValueError("diagonal covariance length mismatch")
            if np.any(cov < 0):
                raise ValueError("negative variance")
        elif cov.ndim == 2:
            if cov.shape != (mean.size, mean.size):
                raise ValueError("covariance shape mismatch")
            if not np.allclose(cov, cov.T, atol=1e-12):
                raise ValueError("covariance must be symmetric")
        else:
            raise ValueError("covariance must be 1-D (diagonal) or 2-D (full)")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def is_diagonal(self) -> bool:
        return self.cov.ndim == 1

    @property
    def variances(self) -> Array:
        """Diagonal of the covariance."""
        return self.cov if self.is_diagonal else np.diag(self.cov)

    def cov_matrix(self) -> Array:
        return np.diag(self.cov) if self.is_diagonal else self.cov

    def second_moment(self) -> float:
        """E ||X||^2."""
        return float(np.sum(self.variances) + np.sum(self.mean ** 2))

    def fourth_moment(self) -> float:
        """E ||X||^4 (diagonal covariance only)."""
        if not self.is_diagonal:
            raise NotImplementedError("fourth moment implemented for diagonal laws")
        s2, m = self.cov, self.mean
        mean_sq = np.sum(s2 + m ** 2)
        var_sq = np.sum(2.0 * s2 ** 2 + 4.0 * m ** 2 * s2)
        return float(var_sq + mean_sq ** 2)


def standard_law(d: int) -> GaussianLaw:
    return GaussianLaw(np.zeros(d), np.ones(d))


def point_law(x) -> GaussianLaw:
    """Dirac mass as a degenerate Gaussian (zero covariance)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return GaussianLaw(x, np.zeros(x.size))
