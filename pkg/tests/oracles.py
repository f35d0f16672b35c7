"""Independent oracles shared by the test suite.

Everything here deliberately avoids the code paths under test: the normal CDF
is obtained by quadrature of the density, optimizers are value-comparison
searches, and the coefficient oracles are plain Monte Carlo.
"""

import math

import numpy as np
from scipy import integrate

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def quad_phi(x):
    """Normal CDF by adaptive quadrature of the density."""
    if x > 0:
        return 1.0 - quad_phi(-x)
    val, _ = integrate.quad(
        lambda y: math.exp(-0.5 * y * y) / _SQRT_2PI,
        -np.inf,
        x,
        epsabs=1e-14,
        epsrel=1e-13,
        limit=300,
    )
    return val


def mc_gamma_gdrift(a, b, ell, n_samples, seed):
    """Monte Carlo estimates of the diffusion and drift coefficients.

    Uses the Gaussian representation: with Z ~ N(-ell^2 b / 2, ell^2 a),
    gamma = ell^2 E[e^Z ^ 1] and g_drift = ell^2 E[e^Z 1{Z<0}].
    Returns (gamma_hat, gamma_se, gdrift_hat, gdrift_se).
    """
    rng = np.random.default_rng(seed)
    z = rng.normal(-0.5 * ell * ell * b, ell * math.sqrt(a), size=n_samples)
    capped = np.exp(np.minimum(z, 0.0))
    drift = np.where(z < 0.0, capped, 0.0)
    scale = ell * ell
    root_n = math.sqrt(n_samples)
    return (
        scale * capped.mean(),
        scale * capped.std() / root_n,
        scale * drift.mean(),
        scale * drift.std() / root_n,
    )


def golden_max(fn, lo, hi, tol=1e-9):
    """Value-only golden-section maximizer (oracle for derivative solvers)."""
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv * (hi - lo)
    x2 = lo + inv * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv * (hi - lo)
            f2 = fn(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv * (hi - lo)
            f1 = fn(x1)
    return 0.5 * (lo + hi)


def bisect_on(fn, target, lo, hi, iters=200):
    """Bisection for fn(x) == target with fn increasing on [lo, hi]."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fn(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
