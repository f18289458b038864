"""One-shot coupling maps, constructed numerically.

Three velocity maps are solved by damped Newton shooting on the endpoint
positions:

  mixing map   q~_{T,h}(x, v) = q~_{T,h}(y, map(v))   (same discrete flow)
  bias map     q~_{T,h}(x, v) = q_T(x, map(v))        (discrete vs exact, same start)
  cross map    q~_{T,h}(x, v) = q_T(y, map(v))        (discrete vs exact, different starts)

The cross map is the composition of the bias map with the exact-flow
mixing map, and both constructions are exposed so they can be
cross-checked.  `verify_regularity` samples the maps and reports the
worst observed ratio against the pointwise and Jacobian growth bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .flows import (FlowParams, PhasePoint, REGULARITY_CEILING, exact_flow,
                    flow_jacobian_v, position_flow, quadratic_flow_coefficients,
                    verlet_flow)
from .potentials import Potential, validate_curvature
from .rng import RngStream

Array = np.ndarray

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
NEWTON_DAMPING = 0.5
MAP_JACOBIAN_STEP = 1e-4
POWER_ITERATIONS = 30

MIXING = "mixing"
BIAS = "bias"
CROSS = "cross"


def _pos(p, x, v, fp):
    # shooting evaluates flows on large-energy transients; accuracy is
    # governed by the relative solver tolerance and the endpoint residual
    return position_flow(p, x, v, fp, energy_tol=None)


class CouplingSolution(NamedTuple):
    """Solved initial velocity with endpoint mismatch diagnostics."""

    v_prime: Array
    residual: Array
    iterations: Array
    map_kind: str


class CouplingSolveError(RuntimeError):
    """Shooting failed to reach the endpoint tolerance; carries the best effort."""

    def __init__(self, message: str, solution: CouplingSolution):
        super().__init__(message)
        self.solution = solution


def first_order_map_constants(L: float, M: float, T: float) -> dict:
    """Coefficients of the first-order pointwise and Jacobian map estimates."""
    return {
        "p_xy": 3.0 / (2.0 * T),
        "p_v": 7.0 / (25.0 * T),
        "p_x": 49.0 * L / 180.0,
        "j_xy": 5.5 * M * T ** 2,
        "j_c": 44.0 / (135.0 * T),
        "j_v": (440.0 / 135.0) * M * T ** 2,
        "j_x": (352.0 / 675.0) * M * T,
    }


def _as_batch(*arrays):
    arrs = [np.asarray(a, dtype=float) for a in arrays]
    shape = np.broadcast_shapes(*(a.shape for a in arrs))
    arrs = [np.broadcast_to(a, shape).copy() for a in arrs]
    d = shape[-1]
    flat = [a.reshape(-1, d) for a in arrs]
    return flat, shape


def _newton_shoot(residual_fn: Callable, jac_fn: Callable, v0: Array,
                  tol: float, max_iter: int, damping: float) -> tuple:
    """Damped Newton on rows of (n, d); the callbacks receive (v_rows, idx)."""
    v = np.array(v0, dtype=float)
    n = v.shape[0]
    idx_all = np.arange(n)
    F = residual_fn(v, idx_all)
    res = np.linalg.norm(F, axis=-1)
    iters = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        active = np.flatnonzero(res > tol)
        if active.size == 0:
            break
        va, Fa, ra = v[active], F[active], res[active]
        J = jac_fn(va, active)
        try:
            step = np.linalg.solve(J, Fa[..., None])[..., 0]
        except np.linalg.LinAlgError:
            break
        t = np.ones(active.size)
        v_new = va - step
        F_new = residual_fn(v_new, active)
        r_new = np.linalg.norm(F_new, axis=-1)
        for _ in range(30):
            worse = np.flatnonzero(r_new > ra)
            if worse.size == 0:
                break
            t[worse] *= damping
            v_try = va[worse] - t[worse, None] * step[worse]
            F_try = residual_fn(v_try, active[worse])
            v_new[worse], F_new[worse] = v_try, F_try
            r_new[worse] = np.linalg.norm(F_try, axis=-1)
        improved = r_new < ra
        upd = active[improved]
        v[upd], F[upd], res[upd] = v_new[improved], F_new[improved], r_new[improved]
        iters[active] += 1
        if not np.any(improved):
            break
    return v, res, iters


def _finish(v, res, iters, shape, kind, tol):
    sol = CouplingSolution(v.reshape(shape), res.reshape(shape[:-1]),
                           iters.reshape(shape[:-1]), kind)
    worst = float(np.max(res)) if res.size else 0.0
    if worst > tol:
        bad = int(np.argmax(res))
        raise CouplingSolveError(
            f"{kind} map shooting stalled: worst residual {worst:.3e} "
            f"(tolerance {tol:.1e}) at flat sample {bad}", sol)
    return sol


def solve_mixing_map(p: Potential, x, y, v, fp: FlowParams, *,
                     tol: float = NEWTON_TOL,
                     max_iter: int = NEWTON_MAX_ITER) -> CouplingSolution:
    """Velocity at y making the two discrete trajectories meet at time T."""
    (xf, yf, vf), shape = _as_batch(x, y, v)
    if p.kind == "quadratic":
        a, b = quadratic_flow_coefficients(p, fp)
        if np.any(np.abs(b) < 1e-14):
            raise CouplingSolveError(
                "mixing map singular: zero velocity coefficient",
                CouplingSolution(vf.reshape(shape), np.full(shape[:-1], np.inf),
                                 np.zeros(shape[:-1], dtype=int), MIXING))
        vp = vf + (a / b) * (xf - yf)
        res = np.linalg.norm(_pos(p, yf, vp, fp)
                             - _pos(p, xf, vf, fp), axis=-1)
        return _finish(vp, res, np.zeros(vp.shape[0], dtype=int), shape,
                       MIXING, max(tol, 1e-9))

    target = _pos(p, xf, vf, fp)

    def residual_fn(vr, idx):
        return _pos(p, yf[idx], vr, fp) - target[idx]

    def jac_fn(vr, idx):
        return flow_jacobian_v(p, PhasePoint(yf[idx], vr), fp, energy_tol=None)

    v0 = vf + (3.0 / (2.0 * fp.T)) * (xf - yf)
    out = _newton_shoot(residual_fn, jac_fn, v0, tol, max_iter, NEWTON_DAMPING)
    return _finish(*out, shape, MIXING, tol)


def solve_bias_map(p: Potential, x, v, fp: FlowParams, *,
                   tol: float = NEWTON_TOL,
                   max_iter: int = NEWTON_MAX_ITER) -> CouplingSolution:
    """Velocity making the exact flow from x land on the discrete endpoint."""
    if fp.is_exact:
        (xf, vf), shape = _as_batch(x, v)
        return _finish(vf, np.zeros(vf.shape[0]), np.zeros(vf.shape[0], int),
                       shape, BIAS, tol)
    (xf, vf), shape = _as_batch(x, v)
    exact_fp = FlowParams(fp.T, 0.0)
    if p.kind == "quadratic":
        at, bt = quadratic_flow_coefficients(p, fp)          # discrete
        a0, b0 = quadratic_flow_coefficients(p, exact_fp)    # exact
        vp = ((at - a0) * xf + bt * vf) / b0
        res = np.linalg.norm(_pos(p, xf, vp, exact_fp)
                             - _pos(p, xf, vf, fp), axis=-1)
        return _finish(vp, res, np.zeros(vp.shape[0], dtype=int), shape,
                       BIAS, max(tol, 1e-9))

    target = _pos(p, xf, vf, fp)

    def residual_fn(vr, idx):
        return _pos(p, xf[idx], vr, exact_fp) - target[idx]

    def jac_fn(vr, idx):
        return flow_jacobian_v(p, PhasePoint(xf[idx], vr), exact_fp, energy_tol=None)

    out = _newton_shoot(residual_fn, jac_fn, vf.copy(), tol, max_iter,
                        NEWTON_DAMPING)
    return _finish(*out, shape, BIAS, tol)


def solve_cross_map(p: Potential, x, y, v, fp: FlowParams, *,
                    method: str = "compose", tol: float = NEWTON_TOL,
                    max_iter: int = NEWTON_MAX_ITER) -> CouplingSolution:
    """Velocity at y making the exact flow meet the discrete endpoint from x.

    method="compose" chains the bias map with the exact-flow mixing map;
    method="shoot" solves the defining equation directly.  The two agree
    to solver tolerance and the acceptance suite checks that.
    """
    (xf, yf, vf), shape = _as_batch(x, y, v)
    exact_fp = FlowParams(fp.T, 0.0)
    target = _pos(p, xf, vf, fp)

    if method == "compose":
        inner = solve_bias_map(p, xf, vf, fp, tol=tol, max_iter=max_iter)
        outer = solve_mixing_map(p, xf, yf, inner.v_prime, exact_fp,
                                 tol=tol, max_iter=max_iter)
        vp = outer.v_prime
        res = np.linalg.norm(_pos(p, yf, vp, exact_fp) - target,
                             axis=-1)
        iters = (np.asarray(inner.iterations) + np.asarray(outer.iterations))
        # two tol-accurate solves compose to a slightly looser endpoint match
        return _finish(vp, res, iters.astype(int), shape, CROSS,
                       max(3.0 * tol, 1e-9) if p.kind == "quadratic" else 3.0 * tol)
    if method != "shoot":
        raise ValueError("method must be 'compose' or 'shoot'")

    if p.kind == "quadratic":
        at, bt = quadratic_flow_coefficients(p, fp)
        a0, b0 = quadratic_flow_coefficients(p, exact_fp)
        vp = (at * xf + bt * vf - a0 * yf) / b0
        res = np.linalg.norm(_pos(p, yf, vp, exact_fp) - target,
                             axis=-1)
        return _finish(vp, res, np.zeros(vp.shape[0], dtype=int), shape,
                       CROSS, max(tol, 1e-9))

    def residual_fn(vr, idx):
        return _pos(p, yf[idx], vr, exact_fp) - target[idx]

    def jac_fn(vr, idx):
        return flow_jacobian_v(p, PhasePoint(yf[idx], vr), exact_fp, energy_tol=None)

    v0 = vf + (3.0 / (2.0 * fp.T)) * (xf - yf)
    out = _newton_shoot(residual_fn, jac_fn, v0, tol, max_iter, NEWTON_DAMPING)
    return _finish(*out, shape, CROSS, tol)


# ---------------------------------------------------------------------------
# map Jacobians and operator norms

def map_jacobian(map_fn: Callable[[Array], Array], v: Array,
                 step: float = MAP_JACOBIAN_STEP) -> Array:
    """Central finite differences of a velocity map, shape (..., d, d)."""
    v = np.asarray(v, dtype=float)
    d = v.shape[-1]
    cols = []
    for j in range(d):
        e = np.zeros(d)
        e[j] = step
        cols.append((map_fn(v + e) - map_fn(v - e)) / (2.0 * step))
    return np.stack(cols, axis=-1)


def operator_norm(mat: Array, iterations: int = POWER_ITERATIONS) -> Array:
    """Largest singular value by power iteration on A^T A."""
    A = np.asarray(mat, dtype=float)
    d = A.shape[-1]
    At = np.swapaxes(A, -1, -2)
    z = 1.0 + 1e-3 * np.arange(d)           # deterministic, asymmetric start
    z = np.broadcast_to(z / np.linalg.norm(z), A.shape[:-2] + (d,)).copy()
    for _ in range(iterations):
        w = (A @ z[..., None])[..., 0]
        z = (At @ w[..., None])[..., 0]
        nz = np.linalg.norm(z, axis=-1, keepdims=True)
        z = z / np.maximum(nz, 1e-300)
    return np.linalg.norm((A @ z[..., None])[..., 0], axis=-1)


# ---------------------------------------------------------------------------
# regularity verification sweeps

@dataclass(frozen=True)
class SamplerConfig:
    """How verify_regularity draws its (x, y, v) triples."""

    samples: int = 1000
    seed: int = 0
    scale_x: float = 1.0
    scale_y: float = 1.0
    scale_v: float = 1.0
    jacobian_step: float = MAP_JACOBIAN_STEP
    zero_threshold: float = 1e-6   # LHS below this counts as zero when RHS = 0


@dataclass
class RegularityReport:
    lemma_id: str
    samples: int
    max_ratio: float
    worst_sample: dict | None
    worst_residual: float
    preconditions: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (self.max_ratio <= 1.0
                and all(self.preconditions.values()))


def _ratio(lhs: Array, rhs: Array, zero_threshold: float) -> Array:
    out = np.empty_like(lhs)
    positive = rhs > 0
    out[positive] = lhs[positive] / rhs[positive]
    out[~positive] = np.where(lhs[~positive] <= zero_threshold, 0.0, np.inf)
    return out


def _norms(a: Array) -> Array:
    return np.linalg.norm(a, axis=-1)


def _mixing_lhs(p, fp, X, Y, V, cfg):
    sol = solve_mixing_map(p, X, Y, V, fp)
    return _norms(sol.v_prime - V), float(np.max(sol.residual))


def _bias_lhs(p, fp, X, V, cfg):
    sol = solve_bias_map(p, X, V, fp)
    return _norms(sol.v_prime - V), float(np.max(sol.residual))


def _cross_lhs(p, fp, X, Y, V, cfg):
    sol = solve_cross_map(p, X, Y, V, fp)
    return _norms(sol.v_prime - V), float(np.max(sol.residual))


def _map_jac_dev(solver, p, fp, X, Y, V, cfg):
    # operator norm of (d map / d v) - I via finite differences of the map
    if Y is None:
        def map_fn(vv):
            return solver(p, X, vv, fp).v_prime
    else:
        def map_fn(vv):
            return solver(p, X, Y, vv, fp).v_prime
    J = map_jacobian(map_fn, V, cfg.jacobian_step)
    dev = J - np.eye(J.shape[-1])
    base = solver(p, X, V, fp) if Y is None else solver(p, X, Y, V, fp)
    return operator_norm(dev), float(np.max(base.residual))


def _pointwise_second_order(L, M, T, h, X, V):
    nx, nv = _norms(X), _norms(V)
    return 2.0 * h * h * (L * nx / T + L * nv + M * nx ** 2 / T + M * T * nv ** 2)


def _jacobian_second_order_q(L, M, N, T, X, V):
    nx, nv = _norms(X), _norms(V)
    return (L + M * nx + M * T * nv + (M * M * T * T + N) * nx ** 2
            + (M * M * T ** 4 + N * T * T) * nv ** 2)


def _check(lemma_id, p, fp, X, Y, V, cfg):
    """Return (lhs, rhs, worst_residual, smoothness_ceiling) for one lemma."""
    L, M, N, T, h = p.L, p.M, p.N, fp.T, fp.h
    k = first_order_map_constants(L, M, T)
    dxy = _norms(X - Y) if Y is not None else None
    nx, nv = _norms(X), _norms(V)

    if lemma_id == "mixing-pointwise":
        lhs, res = _mixing_lhs(p, fp, X, Y, V, cfg)
        return lhs, (3.0 / (2.0 * T)) * dxy, res, REGULARITY_CEILING
    if lemma_id == "mixing-jacobian":
        lhs, res = _map_jac_dev(solve_mixing_map, p, fp, X, Y, V, cfg)
        return lhs, np.minimum(2.0 / 9.0, 5.5 * M * T * T * dxy), res, REGULARITY_CEILING
    if lemma_id == "cross-pointwise-2nd":
        lhs, res = _cross_lhs(p, fp, X, Y, V, cfg)
        rhs = (3.0 / (2.0 * T)) * dxy + _pointwise_second_order(L, M, T, h, X, V)
        return lhs, rhs, res, REGULARITY_CEILING
    if lemma_id == "cross-jacobian-2nd":
        lhs, res = _map_jac_dev(solve_cross_map, p, fp, X, Y, V, cfg)
        rhs = np.minimum(15.0 / 18.0,
                         5.5 * M * T * T * dxy
                         + (22.0 / 9.0) * h * h * _jacobian_second_order_q(L, M, N, T, X, V))
        return lhs, rhs, res, REGULARITY_CEILING
    if lemma_id == "cross-pointwise-1st":
        lhs, res = _cross_lhs(p, fp, X, Y, V, cfg)
        rhs = k["p_xy"] * dxy + h * k["p_v"] * nv + h * k["p_x"] * nx
        return lhs, rhs, res, REGULARITY_CEILING
    if lemma_id == "cross-jacobian-1st":
        lhs, res = _map_jac_dev(solve_cross_map, p, fp, X, Y, V, cfg)
        rhs = np.minimum(15.0 / 18.0,
                         k["j_xy"] * dxy
                         + h * (k["j_c"] + k["j_v"] * nv + k["j_x"] * nx))
        return lhs, rhs, res, REGULARITY_CEILING
    if lemma_id == "bias-pointwise-2nd":
        lhs, res = _bias_lhs(p, fp, X, V, cfg)
        return lhs, _pointwise_second_order(L, M, T, h, X, V), res, 1.0 / 6.0
    if lemma_id == "bias-jacobian-2nd":
        lhs, res = _map_jac_dev(solve_bias_map, p, fp, X, None, V, cfg)
        rhs = np.minimum(0.5, 2.0 * h * h * _jacobian_second_order_q(L, M, N, T, X, V))
        return lhs, rhs, res, 1.0 / 6.0
    if lemma_id == "bias-pointwise-1st":
        lhs, res = _bias_lhs(p, fp, X, V, cfg)
        rhs = 1.4 * h * (nv / (5.0 * T) + (7.0 / 36.0) * L * nx)
        return lhs, rhs, res, 1.0 / 6.0
    if lemma_id == "bias-jacobian-1st":
        lhs, res = _map_jac_dev(solve_bias_map, p, fp, X, None, V, cfg)
        rhs = np.minimum(0.5, (2.0 / 15.0) * h * (2.0 / T + 3.2 * M * T * nx
                                                  + 20.0 * M * T * T * nv))
        return lhs, rhs, res, 1.0 / 6.0
    if lemma_id == "flow-error-1st":
        lhs, res = _flow_error_lhs(p, fp, X, V)
        rhs = h * (0.24 * nv + (7.0 / 30.0) * L * T * nx)
        return lhs, rhs, res, 1.0 / 6.0
    raise KeyError(f"unknown lemma id {lemma_id!r}")


def _flow_error_lhs(p, fp, X, V):
    # max over grid times of the distance between the discrete and exact
    # trajectories started from the same phase point
    path = verlet_flow(p, PhasePoint(X, V), fp, return_path=True)
    worst = np.zeros(X.shape[:-1])
    for j, zt in enumerate(path[1:], start=1):
        zs = exact_flow(p, PhasePoint(X, V), j * fp.h)
        worst = np.maximum(worst, _norms(zt.x - zs.x))
    return worst, 0.0


LEMMA_IDS = (
    "mixing-pointwise", "mixing-jacobian",
    "cross-pointwise-2nd", "cross-jacobian-2nd",
    "cross-pointwise-1st", "cross-jacobian-1st",
    "bias-pointwise-2nd", "bias-jacobian-2nd",
    "bias-pointwise-1st", "bias-jacobian-1st",
    "flow-error-1st",
)

# lemmas whose smoothness precondition is the looser 1/6 budget
_LOOSE_BUDGET = {"bias-pointwise-2nd", "bias-jacobian-2nd",
                 "bias-pointwise-1st", "bias-jacobian-1st", "flow-error-1st"}


def verify_regularity(lemma_id: str, p: Potential, fp: FlowParams,
                      cfg: SamplerConfig | None = None) -> RegularityReport:
    """Sample (x, y, v), evaluate one growth bound, and report the worst ratio.

    The report also records every stability precondition that was
    enforced, including a finite-difference check of the curvature
    metadata; an understated L flips that flag.
    """
    cfg = cfg or SamplerConfig()
    if lemma_id not in LEMMA_IDS:
        raise KeyError(f"unknown lemma id {lemma_id!r}; known: {LEMMA_IDS}")
    gen = RngStream(cfg.seed, LEMMA_IDS.index(lemma_id)).generator()
    n, d = cfg.samples, p.dim
    X = cfg.scale_x * gen.standard_normal((n, d))
    Y = cfg.scale_y * gen.standard_normal((n, d))
    V = cfg.scale_v * gen.standard_normal((n, d))

    ceiling = 1.0 / 6.0 if lemma_id in _LOOSE_BUDGET else REGULARITY_CEILING
    budget = p.L * (fp.T ** 2 + fp.T * fp.h)
    n_probe = min(n, 32)
    _, curvature_ok = validate_curvature(p, X[:n_probe])
    preconditions = {
        "h_divides_T": True,
        "stability_map_exists": bool(fp.stability(p.L).map_exists),
        "smoothness_budget": bool(budget <= ceiling * (1.0 + 1e-12)),
        "curvature_metadata": bool(curvature_ok),
    }

    if n == 0:
        return RegularityReport(lemma_id, 0, 0.0, None, 0.0, preconditions)

    lhs, rhs, worst_res, _ = _check(lemma_id, p, fp, X, Y, V, cfg)
    ratios = _ratio(np.asarray(lhs, float), np.asarray(rhs, float),
                    cfg.zero_threshold)
    j = int(np.argmax(ratios))
    worst = {"x": X[j].copy(), "y": Y[j].copy(), "v": V[j].copy(),
             "lhs": float(lhs[j]), "rhs": float(np.asarray(rhs, float)[j])}
    return RegularityReport(lemma_id, n, float(ratios[j]),
                            worst if ratios[j] > 1.0 else None,
                            worst_res, preconditions)
