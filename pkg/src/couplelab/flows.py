"""Hamiltonian flows: the discrete position-Verlet flow, the exact flow,
and their velocity Jacobians.

The step size h > 0 must divide the integration time T; h = 0 denotes the
exact flow.  All operations are pure and broadcast over leading axes of
the phase point, so verification sweeps run batched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .potentials import Potential, hamiltonian

Array = np.ndarray

STABILITY_CEILING = 0.4 * math.pi ** 2   # L*T^2 ceiling for coupling-map existence
REGULARITY_CEILING = 1.0 / 12.0          # L*(T^2 + T*h) ceiling for the map estimates


class PhasePoint(NamedTuple):
    """Position-velocity pair; both components share the trailing length d."""

    x: Array
    v: Array


class StabilityFlags(NamedTuple):
    map_exists: bool    # L*T^2 <= (2/5) pi^2
    regularity: bool    # L*(T^2 + T*h) <= 1/12


@dataclass(frozen=True)
class FlowParams:
    """Integration time T > 0 and step size h >= 0, with h dividing T.

    h = 0 selects the exact flow.
    """

    T: float
    h: float

    def __post_init__(self):
        if not (self.T > 0):
            raise ValueError("T must be positive")
        if self.h < 0:
            raise ValueError("h must be nonnegative")
        if self.h > 0:
            n = round(self.T / self.h)
            if n < 1 or abs(n * self.h - self.T) > 1e-9 * self.T:
                raise ValueError(
                    f"step size h={self.h} does not divide T={self.T}")

    @property
    def num_steps(self) -> int:
        if self.h == 0:
            raise ValueError("h=0 denotes the exact flow; no step count")
        return round(self.T / self.h)

    @property
    def is_exact(self) -> bool:
        return self.h == 0

    def stability(self, L: float) -> StabilityFlags:
        return StabilityFlags(
            map_exists=L * self.T ** 2 <= STABILITY_CEILING,
            regularity=L * (self.T ** 2 + self.T * self.h) <= REGULARITY_CEILING,
        )


def _check_finite(g: Array):
    if not np.all(np.isfinite(g)):
        raise FloatingPointError("non-finite gradient encountered")


def verlet_flow(p: Potential, z: PhasePoint, fp: FlowParams,
                return_path: bool = False):
    """Run N = T/h velocity Verlet steps from z.

    Each step is
        x_{j+1} = x_j + h v_j - (h^2/2) grad f(x_j)
        v_{j+1} = v_j - (h/2) (grad f(x_j) + grad f(x_{j+1}))
    With return_path=True, returns the list of PhasePoints at every grid
    time 0, h, ..., T.
    """
    if fp.is_exact:
        raise ValueError("h=0 denotes the exact flow; use exact_flow")
    h = fp.h
    x = np.asarray(z.x, dtype=float)
    v = np.asarray(z.v, dtype=float)
    g = p.grad(x)
    _check_finite(g)
    path = [PhasePoint(x, v)] if return_path else None
    for _ in range(fp.num_steps):
        x_new = x + h * v - 0.5 * h * h * g
        g_new = p.grad(x_new)
        _check_finite(g_new)
        v = v - 0.5 * h * (g + g_new)
        x, g = x_new, g_new
        if return_path:
            path.append(PhasePoint(x, v))
    return path if return_path else PhasePoint(x, v)


def _exact_flow_quadratic(curv: Array, z: PhasePoint, T: float) -> PhasePoint:
    omega = np.sqrt(curv)
    c, s = np.cos(omega * T), np.sin(omega * T)
    x = np.asarray(z.x, dtype=float)
    v = np.asarray(z.v, dtype=float)
    return PhasePoint(x * c + v * s / omega, -x * omega * s + v * c)


def exact_flow(p: Potential, z: PhasePoint, T: float, *,
               rtol: float = 1e-13, atol: float = 1e-14,
               energy_tol: float | None = 1e-10) -> PhasePoint:
    """Exact Hamiltonian flow for time T.

    Quadratic potentials use the closed-form rotation per coordinate.
    Otherwise an adaptive high-order solve (DOP853) stands in for the
    exact flow, and the Hamiltonian drift is checked against energy_tol
    (None skips the check: shooting solvers evaluate the flow on
    large-energy transients where only relative accuracy matters and the
    endpoint residual is the certificate).
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if p.kind == "quadratic":
        return _exact_flow_quadratic(p.curvature, z, T)

    x0 = np.asarray(z.x, dtype=float)
    v0 = np.asarray(z.v, dtype=float)
    shape = x0.shape

    def rhs(_, y):
        xv = y.reshape(2, *shape)
        return np.concatenate([xv[1].ravel(), -p.grad(xv[0]).ravel()])

    y0 = np.concatenate([x0.ravel(), v0.ravel()])
    sol = solve_ivp(rhs, (0.0, T), y0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"exact flow solver failed: {sol.message}")
    out = sol.y[:, -1].reshape(2, *shape)
    zT = PhasePoint(out[0], out[1])
    if energy_tol is not None:
        drift = np.max(np.abs(hamiltonian(p, zT.x, zT.v)
                              - hamiltonian(p, x0, v0)))
        if drift > energy_tol:
            raise RuntimeError(
                f"exact flow missed the energy tolerance: drift={drift:.3e}")
    return zT


def flow(p: Potential, z: PhasePoint, fp: FlowParams,
         energy_tol: float | None = 1e-10) -> PhasePoint:
    """Dispatch on h: Verlet for h > 0, exact flow for h = 0."""
    if fp.is_exact:
        return exact_flow(p, z, fp.T, energy_tol=energy_tol)
    return verlet_flow(p, z, fp)


def position_flow(p: Potential, x: Array, v: Array, fp: FlowParams,
                  energy_tol: float | None = 1e-10) -> Array:
    """Position component of the time-T flow started at (x, v)."""
    return flow(p, PhasePoint(np.asarray(x, float), np.asarray(v, float)), fp,
                energy_tol=energy_tol).x


def _quadratic_step_matrix(curv: Array, h: float) -> Array:
    # One Verlet step on f = omega^2 x^2 / 2, per coordinate: a (d, 2, 2) stack.
    d = curv.size
    A = np.empty((d, 2, 2))
    A[:, 0, 0] = 1.0 - 0.5 * curv * h * h
    A[:, 0, 1] = h
    A[:, 1, 0] = -curv * h * (1.0 - 0.25 * curv * h * h)
    A[:, 1, 1] = 1.0 - 0.5 * curv * h * h
    return A


def _matrix_power_2x2(A: Array, n: int) -> Array:
    # Repeated squaring on a (d, 2, 2) stack; n may reach 1e3 in scans.
    result = np.broadcast_to(np.eye(2), A.shape).copy()
    base = A.copy()
    while n > 0:
        if n & 1:
            result = base @ result
        base = base @ base
        n >>= 1
    return result


def quadratic_flow_coefficients(p: Potential, fp: FlowParams):
    """Per-coordinate (a, b) with position output a*x + b*v on a quadratic target."""
    if p.kind != "quadratic":
        raise ValueError("flow coefficients exist only for quadratic potentials")
    if fp.is_exact:
        omega = np.sqrt(p.curvature)
        return np.cos(omega * fp.T), np.sin(omega * fp.T) / omega
    A = _matrix_power_2x2(_quadratic_step_matrix(p.curvature, fp.h),
                          fp.num_steps)
    return A[:, 0, 0].copy(), A[:, 0, 1].copy()


def flow_jacobian_v(p: Potential, z: PhasePoint, fp: FlowParams,
                    step: float | None = None,
                    energy_tol: float | None = 1e-10) -> Array:
    """d(position output)/d(initial velocity), shape (..., d, d).

    Analytic (diagonal) for quadratic potentials; otherwise central finite
    differences with step 1e-5 * max(1, ||v||) per sample.
    """
    x = np.asarray(z.x, dtype=float)
    v = np.asarray(z.v, dtype=float)
    d = x.shape[-1]
    if p.kind == "quadratic":
        _, b = quadratic_flow_coefficients(p, fp)
        J = np.zeros(x.shape[:-1] + (d, d))
        idx = np.arange(d)
        J[..., idx, idx] = b
        return J

    if step is None:
        vnorm = np.linalg.norm(v, axis=-1, keepdims=True)
        step = 1e-5 * np.maximum(1.0, vnorm)          # (..., 1)
    step = np.asarray(step, dtype=float)
    cols = []
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        dv = step * e
        q_plus = position_flow(p, x, v + dv, fp, energy_tol=energy_tol)
        q_minus = position_flow(p, x, v - dv, fp, energy_tol=energy_tol)
        cols.append((q_plus - q_minus) / (2.0 * step))
    return np.stack(cols, axis=-1)


def phase_jacobian(p: Potential, z: PhasePoint, fp: FlowParams) -> Array:
    """Jacobian of the full phase-space flow, as per-coordinate 2x2 blocks
    of shape (..., d, 2, 2).

    Valid for separable potentials (diagonal Hessian), which covers both
    built-in families; propagated by the chain rule along the Verlet steps
    or by the variational equations along the exact flow.
    """
    x = np.asarray(z.x, dtype=float)
    v = np.asarray(z.v, dtype=float)
    if fp.is_exact:
        return _phase_jacobian_exact(p, x, v, fp.T)

    h = fp.h
    J = np.zeros(x.shape + (2, 2))
    J[..., 0, 0] = 1.0
    J[..., 1, 1] = 1.0
    g = p.grad(x)
    k = p.hess_diag(x)
    for _ in range(fp.num_steps):
        x_new = x + h * v - 0.5 * h * h * g
        k_new = p.hess_diag(x_new)
        # step Jacobian [[dx'/dx, dx'/dv], [dv'/dx, dv'/dv]] per coordinate
        s00 = 1.0 - 0.5 * h * h * k
        s01 = np.full_like(k, h)
        s10 = -0.5 * h * (k + k_new * s00)
        s11 = 1.0 - 0.5 * h * h * k_new
        S = np.stack([np.stack([s00, s01], axis=-1),
                      np.stack([s10, s11], axis=-1)], axis=-2)
        J = S @ J
        g_new = p.grad(x_new)
        v = v - 0.5 * h * (g + g_new)
        x, g, k = x_new, g_new, k_new
    return J


def _phase_jacobian_exact(p: Potential, x: Array, v: Array, T: float) -> Array:
    if p.kind == "quadratic":
        omega = np.sqrt(p.curvature)
        c, s = np.cos(omega * T), np.sin(omega * T)
        J = np.empty(x.shape + (2, 2))
        J[..., 0, 0] = c
        J[..., 0, 1] = s / omega
        J[..., 1, 0] = -omega * s
        J[..., 1, 1] = c
        return J

    shape = x.shape
    eye = np.zeros(shape + (2, 2))
    eye[..., 0, 0] = 1.0
    eye[..., 1, 1] = 1.0

    def rhs(_, y):
        st = y.reshape(6, *shape)
        xt, vt = st[0], st[1]
        J = st[2:].reshape(2, 2, *shape)
        k = p.hess_diag(xt)
        dJ0 = J[1]                      # d/dt of the position rows
        dJ1 = -k[None, ...] * J[0]      # d/dt of the velocity rows
        return np.concatenate([vt.ravel(), -p.grad(xt).ravel(),
                               dJ0.ravel(), dJ1.ravel()])

    y0 = np.concatenate([x.ravel(), v.ravel(),
                         np.moveaxis(eye, (-2, -1), (0, 1)).ravel()])
    sol = solve_ivp(rhs, (0.0, T), y0, method="DOP853", rtol=1e-12, atol=1e-14)
    if not sol.success:
        raise RuntimeError(f"variational solve failed: {sol.message}")
    st = sol.y[:, -1].reshape(6, *shape)
    J = st[2:].reshape(2, 2, *shape)
    return np.moveaxis(J, (0, 1), (-2, -1))


def phase_jacobian_det(p: Potential, z: PhasePoint, fp: FlowParams) -> Array:
    """Determinant of the full phase-space Jacobian (product over coordinates)."""
    J = phase_jacobian(p, z, fp)
    return np.prod(np.linalg.det(J), axis=-1)
