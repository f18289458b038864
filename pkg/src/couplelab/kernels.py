"""Markov transition kernels and chain utilities.

Three kernels share one interface: the discretized HMC kernel (velocity
refresh followed by the Verlet flow), the exact HMC kernel (refresh
followed by the exact flow), and the unadjusted Langevin step.  On
quadratic-diagonal targets every kernel is an affine map of Gaussians, so
the module also provides the closed-form chain law used as the oracle by
the bound verification experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .flows import (FlowParams, PhasePoint, exact_flow,
                    quadratic_flow_coefficients, verlet_flow)
from .gaussians import GaussianLaw, point_law
from .potentials import Potential
from .rng import as_generator

Array = np.ndarray

UHMC_V = "uhmc_v"
EHMC = "ehmc"
ULA = "ula"


@dataclass(frozen=True)
class KernelSpec:
    """One transition kernel: kind, target potential, and its step parameters."""

    kind: str
    potential: Potential
    fp: FlowParams | None = None
    eta: float | None = None

    def __post_init__(self):
        if self.kind in (UHMC_V, EHMC):
            if self.fp is None:
                raise ValueError(f"{self.kind} requires FlowParams")
            if self.kind == UHMC_V and self.fp.is_exact:
                raise ValueError("uhmc_v requires h > 0")
            if self.kind == EHMC and not self.fp.is_exact:
                object.__setattr__(self, "fp", FlowParams(self.fp.T, 0.0))
            if not self.fp.stability(self.potential.L).map_exists:
                raise ValueError(
                    "rejected configuration: L*T^2 exceeds the stability "
                    f"ceiling ({self.potential.L * self.fp.T**2:.4g} > "
                    f"{0.4 * math.pi**2:.4g})")
        elif self.kind == ULA:
            if self.eta is None or self.eta <= 0:
                raise ValueError("ula requires eta > 0")
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return self.potential.dim


def kernel_step(spec: KernelSpec, x: Array, rng=None, noise: Array | None = None) -> Array:
    """One transition from x; the Gaussian draw may be forced via `noise`."""
    x = np.asarray(x, dtype=float)
    if noise is None:
        gen = as_generator(rng)
        noise = gen.standard_normal(x.shape)
    else:
        noise = np.asarray(noise, dtype=float)
    if spec.kind == UHMC_V:
        return verlet_flow(spec.potential, PhasePoint(x, noise), spec.fp).x
    if spec.kind == EHMC:
        return exact_flow(spec.potential, PhasePoint(x, noise), spec.fp.T).x
    # uLA: one Euler-Maruyama step of the overdamped dynamics
    return x - spec.eta * spec.potential.grad(x) + math.sqrt(2.0 * spec.eta) * noise


def run_chain(spec: KernelSpec, x0: Array, steps: int, rng) -> Array:
    """All iterates X_0..X_steps, reproducible from the stream."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    x = np.asarray(x0, dtype=float)
    gen = as_generator(rng)
    path = np.empty((steps + 1,) + x.shape)
    path[0] = x
    for k in range(steps):
        x = kernel_step(spec, x, gen)
        path[k + 1] = x
    return path


def synchronous_coupled_step(spec: KernelSpec, x: Array, y: Array,
                             rng=None, noise: Array | None = None):
    """Advance two chains with the same Gaussian draw."""
    x = np.asarray(x, dtype=float)
    if noise is None:
        gen = as_generator(rng)
        noise = gen.standard_normal(x.shape)
    return (kernel_step(spec, x, noise=noise),
            kernel_step(spec, y, noise=noise))


def chain_coefficients(spec: KernelSpec):
    """Per-coordinate (a, b) of the affine update X' = a X + b xi on a
    quadratic-diagonal target."""
    p = spec.potential
    if p.kind != "quadratic":
        raise ValueError("chain coefficients require a quadratic potential")
    if spec.kind in (UHMC_V, EHMC):
        return quadratic_flow_coefficients(p, spec.fp)
    a = 1.0 - spec.eta * p.curvature
    b = np.full(p.dim, math.sqrt(2.0 * spec.eta))
    return a, b


def gaussian_chain_law(spec: KernelSpec, init, steps) -> GaussianLaw:
    """Law of X_steps for a Gaussian (or point) start on a quadratic target.

    Per coordinate, with update coefficients (a, b):
        mean_k = a^k m_0,
        var_k  = a^{2k} s_0^2 + b^2 (1 - a^{2k}) / (1 - a^2).
    steps=math.inf returns the stationary law b^2 / (1 - a^2).
    """
    a, b = chain_coefficients(spec)
    if isinstance(init, GaussianLaw):
        if not init.is_diagonal:
            raise ValueError("chain law requires a diagonal initial covariance")
        m0, s0 = init.mean, init.cov
    else:
        law = point_law(init)
        m0, s0 = law.mean, law.cov
    if m0.size != spec.dim:
        raise ValueError("initial law dimension mismatch")

    if steps is math.inf or steps == math.inf:
        if np.any(np.abs(a) >= 1.0):
            raise ValueError("no stationary law: |a| >= 1 in some coordinate")
        return GaussianLaw(np.zeros_like(m0), b ** 2 / (1.0 - a ** 2))

    if not (isinstance(steps, (int, np.integer)) and steps >= 0):
        raise ValueError("steps must be a nonnegative integer or math.inf")
    ak = a ** steps
    a2k = ak ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        geom = np.where(np.abs(1.0 - a ** 2) > 1e-15,
                        (1.0 - a2k) / (1.0 - a ** 2),
                        float(steps))
    return GaussianLaw(ak * m0, a2k * s0 + b ** 2 * geom)


def stationary_law(spec: KernelSpec) -> GaussianLaw:
    return gaussian_chain_law(spec, np.zeros(spec.dim), math.inf)


def ula_step_law(p: Potential, eta: float, x: Array) -> GaussianLaw:
    """Law of one discrete Langevin step from the point x (quadratic target)."""
    if p.kind != "quadratic":
        raise ValueError("closed-form step law requires a quadratic potential")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return GaussianLaw((1.0 - eta * p.curvature) * x,
                       np.full(p.dim, 2.0 * eta))


def langevin_exact_law(p: Potential, t: float, x: Array) -> GaussianLaw:
    """Law of the exact overdamped Langevin semigroup at time t from the
    point x (quadratic target): the per-coordinate Ornstein-Uhlenbeck law."""
    if p.kind != "quadratic":
        raise ValueError("closed-form semigroup law requires a quadratic potential")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    curv = p.curvature
    return GaussianLaw(np.exp(-curv * t) * x,
                       (1.0 - np.exp(-2.0 * curv * t)) / curv)


def joint_chain_law(spec: KernelSpec, init: GaussianLaw, k: int):
    """Per-coordinate joint covariance of (X_0, X_k) for a Gaussian start.

    Returns (var0, cov0k, vark) arrays of length d; the joint law is
    Gaussian because the quadratic-target update is affine.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    a, _ = chain_coefficients(spec)
    if not init.is_diagonal:
        raise ValueError("joint chain law requires a diagonal initial covariance")
    lawk = gaussian_chain_law(spec, init, k)
    ak = a ** k
    return init.cov, ak * init.cov, lawk.cov
