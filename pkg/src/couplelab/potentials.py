"""Target potentials with smoothness metadata.

A Potential bundles the callables (value, gradient, Hessian diagonal) with
the constants the bound formulas consume: an operator-norm bound L on the
Hessian, bounds M and N on the third and fourth derivative tensors, and a
strong-convexity constant alpha.  Both built-in families are separable
with a diagonal Hessian, which is what the Jacobian propagation in
`flows` relies on.

Conventions: the minimum sits at the origin with f(0) = 0 and grad f(0) = 0.
All callables broadcast over leading axes, positions have shape (..., d).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

Array = np.ndarray


@dataclass(frozen=True)
class Potential:
    """A target log-density -f with gradient and smoothness metadata."""

    dim: int
    f: Callable[[Array], Array]
    grad: Callable[[Array], Array]
    hess_diag: Callable[[Array], Array]
    L: float          # sup-norm bound on the Hessian
    M: float          # bound on the third derivative tensor
    N: float          # bound on the fourth derivative tensor
    alpha: float      # strong-convexity constant (0 if none claimed)
    kind: str         # "quadratic" | "smooth-nonquadratic"
    curvature: Array | None = None   # diagonal of the Hessian, quadratic kind only

    def with_metadata(self, **overrides) -> "Potential":
        """Copy with altered metadata (used by negative-control tests)."""
        return replace(self, **overrides)


def quadratic_potential(curvature, dim: int | None = None) -> Potential:
    """f(x) = sum_i omega_i^2 x_i^2 / 2 with diagonal positive curvature.

    `curvature` may be a scalar (broadcast to `dim`) or a 1-D array of
    per-coordinate second derivatives omega_i^2.
    """
    curv = np.asarray(curvature, dtype=float)
    if curv.ndim == 0:
        if dim is None:
            raise ValueError("scalar curvature requires dim")
        curv = np.full(dim, float(curv))
    if curv.ndim != 1 or np.any(curv <= 0):
        raise ValueError("curvature must be a positive scalar or 1-D array")
    d = curv.size
    if dim is not None and dim != d:
        raise ValueError(f"dim={dim} inconsistent with curvature of length {d}")

    def f(x):
        return 0.5 * np.sum(curv * np.asarray(x) ** 2, axis=-1)

    def grad(x):
        return curv * np.asarray(x)

    def hess_diag(x):
        return np.broadcast_to(curv, np.asarray(x).shape).copy()

    return Potential(dim=d, f=f, grad=grad, hess_diag=hess_diag,
                     L=float(curv.max()), M=0.0, N=0.0,
                     alpha=float(curv.min()), kind="quadratic", curvature=curv)


def _logcosh_derivative_bounds(c: float, grid_points: int = 200_001):
    # Dense 1-D grid search over the analytic derivative formulas of
    # g(t) = c*log cosh(t); the extrema of g''' and g'''' live well inside
    # |t| <= 10.  Separability makes the per-coordinate max equal the
    # operator norm of the full derivative tensor.
    t = np.linspace(-10.0, 10.0, grid_points)
    sech2 = 1.0 / np.cosh(t) ** 2
    tanh = np.tanh(t)
    g3 = -2.0 * c * sech2 * tanh
    g4 = c * (4.0 * sech2 * tanh ** 2 - 2.0 * sech2 ** 2)
    return float(np.abs(g3).max()), float(np.abs(g4).max())


def logcosh_potential(dim: int, c: float = 0.5) -> Potential:
    """Strongly log-concave non-quadratic test target.

    f(x) = ||x||^2/2 + c * sum_i log cosh(x_i).  Smoothness constants:
    L = 1 + c analytically, alpha = 1, and M, N from a dense grid search
    over the scalar derivative formulas.
    """
    if c < 0:
        raise ValueError("c must be nonnegative")
    M, N = _logcosh_derivative_bounds(c)

    def f(x):
        x = np.asarray(x, dtype=float)
        # log cosh computed stably through |x| + log1p(exp(-2|x|)) - log 2
        a = np.abs(x)
        logcosh = a + np.log1p(np.exp(-2.0 * a)) - np.log(2.0)
        return 0.5 * np.sum(x ** 2, axis=-1) + c * np.sum(logcosh, axis=-1)

    def grad(x):
        x = np.asarray(x, dtype=float)
        return x + c * np.tanh(x)

    def hess_diag(x):
        x = np.asarray(x, dtype=float)
        return 1.0 + c / np.cosh(x) ** 2

    return Potential(dim=dim, f=f, grad=grad, hess_diag=hess_diag,
                     L=1.0 + c, M=M, N=N, alpha=1.0,
                     kind="smooth-nonquadratic", curvature=None)


def hamiltonian(p: Potential, x: Array, v: Array) -> Array:
    """H(x, v) = f(x) + ||v||^2 / 2."""
    return p.f(x) + 0.5 * np.sum(np.asarray(v) ** 2, axis=-1)


def fd_hessian(p: Potential, x: Array, step: float = 1e-5) -> Array:
    """Full finite-difference Hessian at a single point x of shape (d,)."""
    x = np.asarray(x, dtype=float)
    d = x.size
    H = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = step
        H[:, j] = (p.grad(x + e) - p.grad(x - e)) / (2.0 * step)
    return 0.5 * (H + H.T)


def validate_curvature(p: Potential, xs: Array, step: float = 1e-5,
                       slack: float = 1e-6):
    """Check sampled finite-difference Hessians against the L metadata.

    Returns (max_norm, ok) where ok means every sampled Hessian satisfies
    ||H|| <= L * (1 + slack).  This is the detector the negative-control
    test trips by understating L.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    worst = 0.0
    for x in xs:
        H = fd_hessian(p, x, step)
        worst = max(worst, float(np.abs(np.linalg.eigvalsh(H)).max()))
    return worst, worst <= p.L * (1.0 + slack)
