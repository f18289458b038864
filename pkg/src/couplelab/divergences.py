"""Divergence oracles and estimators.

Closed forms for Gaussian laws (KL, Renyi, W2, mutual information, Orlicz
norms), adaptive-quadrature estimators for one-dimensional density-ratio
integrals, and the perturbed-Gaussian bound formulas used by the bound
evaluators.  Infinity is a first-class value: the Gaussian Renyi closed
form detects the infinite case exactly, and the quadrature estimators
report infinity when the integrand exceeds the overflow guard.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad

from .gaussians import GaussianLaw

Array = np.ndarray

QUAD_RANGE = 40.0        # tails of exp(-x^2/2) are negligible beyond +-40
QUAD_RTOL = 1e-10
_LOG_GUARD = 700.0       # exp overflow guard for density-ratio integrands


class DivergenceValue(NamedTuple):
    """Nonnegative scalar (or +inf) tagged with the divergence it measures."""

    value: float
    kind: str


def _psd_sqrt(S: Array) -> Array:
    w, V = np.linalg.eigh(S)
    if np.any(w < -1e-10):
        raise np.linalg.LinAlgError("covariance not positive semidefinite")
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def _logdet_psd(S: Array) -> float:
    sign, logdet = np.linalg.slogdet(S)
    if sign <= 0:
        raise np.linalg.LinAlgError("singular covariance")
    return float(logdet)


def gaussian_kl(a: GaussianLaw, b: GaussianLaw) -> DivergenceValue:
    """KL(a || b) in closed form; diagonal fast path."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    dm = a.mean - b.mean
    if a.is_diagonal and b.is_diagonal:
        if np.any(a.cov <= 0) or np.any(b.cov <= 0):
            raise np.linalg.LinAlgError("singular covariance")
        r = a.cov / b.cov
        val = 0.5 * float(np.sum(r - 1.0 - np.log(r) + dm ** 2 / b.cov))
        return DivergenceValue(max(val, 0.0), "KL")
    Sa, Sb = a.cov_matrix(), b.cov_matrix()
    Sb_inv = np.linalg.inv(Sb)
    d = a.dim
    val = 0.5 * (np.trace(Sb_inv @ Sa) - d
                 + _logdet_psd(Sb) - _logdet_psd(Sa)
                 + dm @ Sb_inv @ dm)
    return DivergenceValue(max(float(val), 0.0), "KL")


def gaussian_renyi(q: float, a: GaussianLaw, b: GaussianLaw) -> DivergenceValue:
    """Renyi divergence of order q > 1 between Gaussian laws.

    Returns +inf exactly when the order-q mixture covariance
    q*cov_b + (1-q)*cov_a fails to be positive definite (per-coordinate
    detection in the diagonal case).
    """
    if not q > 1:
        raise ValueError("order q must exceed 1")
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    kind = f"Renyi({q:g})"
    dm = a.mean - b.mean
    if a.is_diagonal and b.is_diagonal:
        if np.any(a.cov <= 0) or np.any(b.cov <= 0):
            raise np.linalg.LinAlgError("singular covariance")
        sq = q * b.cov + (1.0 - q) * a.cov
        if np.any(sq <= 0):
            return DivergenceValue(math.inf, kind)
        quad_term = 0.5 * q * float(np.sum(dm ** 2 / sq))
        # log(sq/cov_b) via log1p keeps the q -> 1 limit fully accurate
        log_ratio = np.log1p((1.0 - q) * (a.cov / b.cov - 1.0))
        log_term = -0.5 / (q - 1.0) * float(
            np.sum(log_ratio + (q - 1.0) * np.log(a.cov / b.cov)))
        return DivergenceValue(max(quad_term + log_term, 0.0), kind)
    Sa, Sb = a.cov_matrix(), b.cov_matrix()
    Sq = q * Sb + (1.0 - q) * Sa
    w = np.linalg.eigvalsh(Sq)
    if np.any(w <= 0):
        return DivergenceValue(math.inf, kind)
    quad_term = 0.5 * q * float(dm @ np.linalg.solve(Sq, dm))
    log_term = -0.5 / (q - 1.0) * (
        _logdet_psd(Sq) - (1.0 - q) * _logdet_psd(Sa) - q * _logdet_psd(Sb))
    return DivergenceValue(max(quad_term + log_term, 0.0), kind)


# ---------------------------------------------------------------------------
# one-dimensional density-ratio quadrature (mixture-vs-standard-normal demo)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _log_normal_pdf(x, center=0.0):
    return -0.5 * (x - center) ** 2 - _LOG_SQRT_2PI


def _log_mixture_pdf(x, weights, centers):
    terms = np.array([math.log(w) + _log_normal_pdf(x, c)
                      for w, c in zip(weights, centers) if w > 0.0])
    m = terms.max()
    return m + math.log(np.exp(terms - m).sum())


def _checked_quad(f, lo, hi, points=None, rtol=QUAD_RTOL):
    val, err = quad(f, lo, hi, points=points, epsabs=1e-13, epsrel=rtol,
                    limit=400)
    if err > max(rtol * abs(val), 1e-12):
        raise RuntimeError(
            f"quadrature tolerance not met: value={val:.6g} err={err:.3g}")
    return val


def tv_kl_r2_demo(weights, centers):
    """TV, KL and Renyi-2 of a unit-variance Gaussian mixture against the
    standard Gaussian, by adaptive quadrature on the density ratio."""
    weights = np.asarray(weights, dtype=float)
    centers = np.asarray(centers, dtype=float)
    if weights.shape != centers.shape or weights.ndim != 1:
        raise ValueError("weights and centers must be 1-D and congruent")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be nonnegative and sum to 1")
    lo, hi = -QUAD_RANGE, QUAD_RANGE
    live = [c for w, c in zip(weights, centers) if w > 0.0]
    pts = sorted({float(c) for c in live} | {float(2 * c) for c in live}
                 | {0.0})
    pts = [x for x in pts if lo < x < hi]

    def tv_integrand(x):
        return abs(math.exp(_log_mixture_pdf(x, weights, centers))
                   - math.exp(_log_normal_pdf(x)))

    def kl_integrand(x):
        lm = _log_mixture_pdf(x, weights, centers)
        return math.exp(lm) * (lm - _log_normal_pdf(x))

    def r2_integrand(x):
        le = 2.0 * _log_mixture_pdf(x, weights, centers) - _log_normal_pdf(x)
        if le > _LOG_GUARD:
            raise OverflowError("integrand exceeds overflow guard")
        return math.exp(le)

    tv = 0.5 * _checked_quad(tv_integrand, lo, hi, points=pts)
    kl = _checked_quad(kl_integrand, lo, hi, points=pts)
    try:
        r2 = math.log(_checked_quad(r2_integrand, lo, hi, points=pts))
    except OverflowError:
        r2 = math.inf
    return (DivergenceValue(max(tv, 0.0), "TV"),
            DivergenceValue(max(kl, 0.0), "KL"),
            DivergenceValue(max(r2, 0.0), "Renyi(2)"))


# ---------------------------------------------------------------------------
# Wasserstein-2

def w2(a, b) -> DivergenceValue:
    """Wasserstein-2 distance.

    Gaussian laws in any dimension (closed form, diagonal fast path), or
    two equal-length 1-D sample arrays (sorted-sample quantile coupling).
    """
    if isinstance(a, GaussianLaw) and isinstance(b, GaussianLaw):
        if a.dim != b.dim:
            raise ValueError("dimension mismatch")
        dm2 = float(np.sum((a.mean - b.mean) ** 2))
        if a.is_diagonal and b.is_diagonal:
            bures = float(np.sum((np.sqrt(a.cov) - np.sqrt(b.cov)) ** 2))
        else:
            Sa, Sb = a.cov_matrix(), b.cov_matrix()
            rb = _psd_sqrt(Sb)
            cross = _psd_sqrt(rb @ Sa @ rb)
            bures = float(np.trace(Sa) + np.trace(Sb) - 2.0 * np.trace(cross))
        return DivergenceValue(math.sqrt(max(dm2 + bures, 0.0)), "W2")
    xs = np.asarray(a, dtype=float)
    ys = np.asarray(b, dtype=float)
    if xs.ndim != 1 or ys.ndim != 1:
        raise ValueError("empirical W2 is restricted to 1-D samples")
    if xs.size != ys.size or xs.size == 0:
        raise ValueError("dimension mismatch: need equal nonzero sample sizes")
    diff = np.sort(xs) - np.sort(ys)
    return DivergenceValue(float(np.sqrt(np.mean(diff ** 2))), "W2")


# ---------------------------------------------------------------------------
# Orlicz norms (psi(x) = exp(x^2) - 1) and the coupling-induced
# Orlicz-Wasserstein upper bound

def _gaussian_psi_log_mgf(law: GaussianLaw, lam: float) -> float:
    """log E exp(||X||^2 / lam^2) for a diagonal Gaussian; +inf if divergent."""
    s2 = law.cov if law.is_diagonal else np.linalg.eigvalsh(law.cov_matrix())
    if law.is_diagonal:
        m2 = law.mean ** 2
    else:
        # rotate into the eigenbasis; ||X|| is invariant
        w, V = np.linalg.eigh(law.cov_matrix())
        s2 = w
        m2 = (V.T @ law.mean) ** 2
    lam2 = lam * lam
    if np.any(lam2 <= 2.0 * s2):
        return math.inf
    return float(np.sum(-0.5 * np.log1p(-2.0 * s2 / lam2) + m2 / (lam2 - 2.0 * s2)))


def orlicz_norm(x, *, tol: float = 1e-12, max_expand: int = 200) -> float:
    """Smallest lam with E[exp(||X||^2/lam^2) - 1] <= 1.

    Accepts a GaussianLaw (closed-form mgf per coordinate, bisection on
    lam) or a sample array of shape (n,) or (n, d) (empirical mean,
    bisection).  A zero law or all-zero sample has norm 0.
    """
    if isinstance(x, GaussianLaw):
        def crit(lam):
            return _gaussian_psi_log_mgf(x, lam) - math.log(2.0)
        scale = math.sqrt(max(x.second_moment(), np.max(x.variances, initial=0.0)))
        if scale == 0.0:
            return 0.0
    else:
        samples = np.asarray(x, dtype=float)
        if samples.size == 0:
            raise ValueError("empty sample set")
        if samples.ndim == 1:
            samples = samples[:, None]
        r2 = np.sum(samples ** 2, axis=1)
        if np.all(r2 == 0.0):
            return 0.0
        scale = math.sqrt(float(r2.max()))

        def crit(lam):
            z = r2 / (lam * lam)
            if z.max() > _LOG_GUARD:
                return math.inf
            return float(np.mean(np.exp(z))) - 2.0

    lo = 0.0
    hi = max(scale, 1e-300)
    for _ in range(max_expand):
        if crit(hi) <= 0:
            break
        lo = hi
        hi *= 2.0
    else:
        raise RuntimeError(
            f"orlicz norm diverges at every probed scale; lower bound {lo:.6g}")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if crit(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return hi


def orlicz_coupling_bound(a: GaussianLaw, b: GaussianLaw) -> float:
    """Synchronous-coupling upper bound on the Orlicz-Wasserstein distance
    between two diagonal Gaussian laws.

    Under shared noise X - Y is Gaussian with mean m_a - m_b and standard
    deviations |s_a - s_b| per coordinate; the bound is its Orlicz norm.
    This is always an upper bound, never the true infimum over couplings.
    """
    if not (a.is_diagonal and b.is_diagonal):
        raise NotImplementedError("coupling bound implemented for diagonal laws")
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    diff = GaussianLaw(a.mean - b.mean,
                       (np.sqrt(a.cov) - np.sqrt(b.cov)) ** 2)
    return orlicz_norm(diff)


# ---------------------------------------------------------------------------
# mutual information of a jointly Gaussian vector

def mi_gaussian(joint: GaussianLaw, dx: int) -> DivergenceValue:
    """Mutual information between the first dx and remaining coordinates.

    MI = 0.5 (logdet Sigma_X + logdet Sigma_Y - logdet Sigma); a singular
    joint covariance (e.g. perfectly correlated blocks) reports +inf.
    """
    if not 0 < dx < joint.dim:
        raise ValueError("dx must split the joint dimension")
    S = joint.cov_matrix()
    Sx, Sy = S[:dx, :dx], S[dx:, dx:]
    try:
        val = 0.5 * (_logdet_psd(Sx) + _logdet_psd(Sy) - _logdet_psd(S))
    except np.linalg.LinAlgError:
        return DivergenceValue(math.inf, "MI")
    return DivergenceValue(max(float(val), 0.0), "MI")


def mi_gaussian_pairwise(var0: Array, cov0k: Array, vark: Array) -> DivergenceValue:
    """MI for coordinatewise-independent pairs with per-coordinate joint
    covariance [[var0, cov0k], [cov0k, vark]]."""
    var0 = np.asarray(var0, float)
    cov0k = np.asarray(cov0k, float)
    vark = np.asarray(vark, float)
    det = var0 * vark - cov0k ** 2
    if np.any(det <= 0):
        return DivergenceValue(math.inf, "MI")
    rho2 = cov0k ** 2 / (var0 * vark)
    return DivergenceValue(float(-0.5 * np.sum(np.log1p(-rho2))), "MI")


# ---------------------------------------------------------------------------
# perturbed-Gaussian divergence bounds (pushforward of the standard
# Gaussian through a near-identity map with displacement m1 and Jacobian
# deviation m2)

def perturbed_gaussian_kl_bound(m1: float, m2: float, d: int) -> float:
    """KL bound m1^2/2 + d m2^2 / (2 (1 - m2)) for 0 <= m2 < 1."""
    if m1 < 0 or not 0.0 <= m2 < 1.0:
        raise ValueError("need m1 >= 0 and 0 <= m2 < 1")
    return 0.5 * m1 ** 2 + d * m2 ** 2 / (2.0 * (1.0 - m2))


def perturbed_gaussian_renyi_bound(q: float, m1: float, m2: float, d: int) -> float:
    """Renyi-q bound d m2/(1 - m2) + sqrt(d) m1 + q m1^2 / 2."""
    if not q > 1:
        raise ValueError("order q must exceed 1")
    if m1 < 0 or not 0.0 <= m2 < 1.0:
        raise ValueError("need m1 >= 0 and 0 <= m2 < 1")
    return d * m2 / (1.0 - m2) + math.sqrt(d) * m1 + 0.5 * q * m1 ** 2
