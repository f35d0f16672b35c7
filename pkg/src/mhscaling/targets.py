"""One-dimensional target potentials and their moment functionals.

A :class:`Potential` bundles V and its first four derivatives for a
normalized density exp(-V).  Two built-ins are provided (standard Gaussian
and a bistable double well); arbitrary potentials can be wrapped with
:func:`custom_potential`.  Moment functionals of the potential under a law
(either the stationary one, by quadrature, or an empirical sample) feed the
tuning rules and the mean-field integrators.

All callables are vectorized over numpy arrays.  Potentials are immutable
after construction and safe to share across threads/processes; the built-in
constructors return module-level functions so instances pickle cleanly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, QuadratureError

__all__ = [
    "Potential",
    "MomentFunctionals",
    "gaussian_potential",
    "double_well_potential",
    "custom_potential",
    "potential_by_name",
    "stationary_moments",
    "stationary_coordinate_moments",
    "empirical_moments",
    "integrate_against_density",
    "sample_stationary",
]

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Potential:
    """A normalized 1-D potential with derivatives up to fourth order."""

    name: str
    eval_v: Callable
    d1: Callable
    d2: Callable
    d3: Callable
    d4: Callable
    smoothness_order: int
    # points where higher derivatives jump; quadrature splits there
    breakpoints: tuple = ()
    i_fisher: float = field(default=math.nan)

    def log_density(self, x):
        return -self.eval_v(x)


@dataclass(frozen=True)
class MomentFunctionals:
    """Moments of a potential under some law.

    a = E[(V')^2], b = E[V''], i_fisher = stationary Fisher-type constant of
    the target (metadata), mala_m4 = E[(V')^2 V'' + V'''' - 2 V''' V' - (V'')^2]
    (the combination steering the MALA step-variance regime).
    """

    a: float
    b: float
    i_fisher: float
    mala_m4: float


def integrate_against_density(p: Potential, fn, epsabs: float = 1e-10) -> float:
    """Integral of fn(x) * exp(-V(x)) over the line by adaptive quadrature."""
    edges = [-np.inf, *sorted(p.breakpoints), np.inf]
    total = 0.0
    err_total = 0.0
    for lo, hi in zip(edges, edges[1:]):
        val, err = integrate.quad(
            lambda x: fn(x) * math.exp(-float(p.eval_v(x))),
            lo,
            hi,
            epsabs=epsabs / max(len(edges) - 1, 1),
            epsrel=1e-12,
            limit=300,
        )
        total += val
        err_total += err
    if err_total > 100.0 * epsabs:
        raise QuadratureError(
            f"quadrature error estimate {err_total:.2e} exceeds budget for {p.name}"
        )
    return total


# -- built-in: standard Gaussian ---------------------------------------------


def _gauss_v(x):
    return 0.5 * np.asarray(x, dtype=float) ** 2 + _HALF_LOG_2PI


def _gauss_d1(x):
    return np.asarray(x, dtype=float)


def _gauss_d2(x):
    return np.ones_like(np.asarray(x, dtype=float))


def _gauss_zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


# -- built-in: double well ----------------------------------------------------
# Raw well: (x-1)^2 (x+1)^2 inside |x| <= 1, 4x^2 - 8|x| + 4 outside, plus an
# additive constant fitted at import time so that exp(-V) integrates to one.


def _dw_raw_v(x):
    x = np.asarray(x, dtype=float)
    inside = (x - 1.0) ** 2 * (x + 1.0) ** 2
    outside = 4.0 * x**2 - 8.0 * np.abs(x) + 4.0
    return np.where(np.abs(x) <= 1.0, inside, outside)


def _dw_d1(x):
    x = np.asarray(x, dtype=float)
    inside = 2.0 * (x - 1.0) * (x + 1.0) ** 2 + 2.0 * (x - 1.0) ** 2 * (x + 1.0)
    outside = 8.0 * x - 8.0 * np.sign(x)
    return np.where(np.abs(x) <= 1.0, inside, outside)


def _dw_d2(x):
    x = np.asarray(x, dtype=float)
    inside = (
        2.0 * (x + 1.0) ** 2
        + 8.0 * (x - 1.0) * (x + 1.0)
        + 2.0 * (x - 1.0) ** 2
    )
    return np.where(np.abs(x) <= 1.0, inside, 8.0)


def _dw_d3(x):
    # discontinuous at |x| = 1 (kept piecewise; kink documented)
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1.0, 24.0 * x, 0.0)


def _dw_d4(x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= 1.0, 24.0, 0.0)


@lru_cache(maxsize=1)
def _dw_shift() -> float:
    val = 0.0
    for lo, hi in ((-np.inf, -1.0), (-1.0, 1.0), (1.0, np.inf)):
        part, _ = integrate.quad(
            lambda x: math.exp(-float(_dw_raw_v(x))), lo, hi, epsabs=1e-13, limit=200
        )
        val += part
    return math.log(val)


def _dw_v(x):
    return _dw_raw_v(x) + _dw_shift()


def _validate_potential(p: Potential) -> None:
    mass = integrate_against_density(p, lambda x: 1.0)
    if abs(mass - 1.0) > 1e-6:
        raise DomainError(
            f"exp(-V) must integrate to 1, got {mass!r} for {p.name}"
        )
    # bounded curvature on a wide grid
    grid = np.linspace(-30.0, 30.0, 2001)
    if not (np.all(np.isfinite(p.d2(grid))) and np.all(np.isfinite(p.d3(grid)))):
        raise DomainError(f"second/third derivatives must be bounded for {p.name}")
    _check_derivatives(p)


def _stencil_d1(fn, grid, h):
    return (fn(grid - 2 * h) - 8 * fn(grid - h) + 8 * fn(grid + h) - fn(grid + 2 * h)) / (
        12 * h
    )


def _stencil_d2(fn, grid, h):
    return (
        -fn(grid - 2 * h)
        + 16 * fn(grid - h)
        - 30 * fn(grid)
        + 16 * fn(grid + h)
        - fn(grid + 2 * h)
    ) / (12 * h * h)


def _check_derivatives(p: Potential, tol: float = 1e-5) -> None:
    # Fourth-order stencils, chained (d3 against d1, d4 against d2) so the
    # truncation error stays below tol for any reasonably smooth potential.
    h = 1e-2
    grid = np.linspace(-3.0, 3.0, 241)
    if p.breakpoints:
        keep = np.ones_like(grid, dtype=bool)
        for bp in p.breakpoints:
            keep &= np.abs(np.abs(grid) - abs(bp)) > 3.5 * h
        grid = grid[keep]
    pairs = (
        (_stencil_d1(p.eval_v, grid, h), p.d1(grid)),
        (_stencil_d2(p.eval_v, grid, h), p.d2(grid)),
        (_stencil_d2(p.d1, grid, h), p.d3(grid)),
        (_stencil_d2(p.d2, grid, h), p.d4(grid)),
    )
    for got, want in pairs:
        if np.max(np.abs(got - want)) > tol:
            raise DomainError(f"derivative mismatch for {p.name}")


def _with_fisher(p: Potential) -> Potential:
    i_fisher = integrate_against_density(p, lambda x: float(p.d1(x)) ** 2)
    return Potential(
        name=p.name,
        eval_v=p.eval_v,
        d1=p.d1,
        d2=p.d2,
        d3=p.d3,
        d4=p.d4,
        smoothness_order=p.smoothness_order,
        breakpoints=p.breakpoints,
        i_fisher=i_fisher,
    )


@lru_cache(maxsize=1)
def gaussian_potential() -> Potential:
    """Standard Gaussian target, V(x) = x^2/2 + log(2 pi)/2."""
    p = Potential(
        name="gaussian",
        eval_v=_gauss_v,
        d1=_gauss_d1,
        d2=_gauss_d2,
        d3=_gauss_zero,
        d4=_gauss_zero,
        smoothness_order=4,
    )
    p = _with_fisher(p)
    _validate_potential(p)
    return p


@lru_cache(maxsize=1)
def double_well_potential() -> Potential:
    """Bistable double-well target with wells at +-1.

    Piecewise quartic inside |x| <= 1 and quadratic outside; V and V' are
    continuous across |x| = 1, V''' and V'''' jump there.  The additive
    normalization constant is computed numerically at construction.
    """
    p = Potential(
        name="double-well",
        eval_v=_dw_v,
        d1=_dw_d1,
        d2=_dw_d2,
        d3=_dw_d3,
        d4=_dw_d4,
        smoothness_order=2,
        breakpoints=(-1.0, 1.0),
    )
    p = _with_fisher(p)
    _validate_potential(p)
    return p


def custom_potential(
    name,
    eval_v,
    d1,
    d2,
    d3,
    d4,
    smoothness_order=2,
    breakpoints=(),
    normalize=False,
    trusted=False,
) -> Potential:
    """Wrap user-supplied closures as a Potential.

    With ``normalize=True`` an additive constant is fitted so exp(-V)
    integrates to one.  Unless ``trusted`` is set, the same construction
    checks as for the built-ins run (slow: several quadratures).
    """
    p = Potential(
        name=name,
        eval_v=eval_v,
        d1=d1,
        d2=d2,
        d3=d3,
        d4=d4,
        smoothness_order=smoothness_order,
        breakpoints=tuple(breakpoints),
    )
    if normalize:
        mass = integrate_against_density(p, lambda x: 1.0, epsabs=1e-12)
        shift = math.log(mass)
        base_v = eval_v
        p = Potential(
            name=name,
            eval_v=lambda x, _v=base_v, _s=shift: _v(x) + _s,
            d1=d1,
            d2=d2,
            d3=d3,
            d4=d4,
            smoothness_order=smoothness_order,
            breakpoints=tuple(breakpoints),
        )
    p = _with_fisher(p)
    if not trusted:
        _validate_potential(p)
    return p


def potential_by_name(name: str) -> Potential:
    """Look up a built-in target by its CLI identifier."""
    builtin = {
        "gaussian": gaussian_potential,
        "double-well": double_well_potential,
    }
    try:
        return builtin[name]()
    except KeyError:
        raise DomainError(
            f"unknown target {name!r}; available: {sorted(builtin)}"
        ) from None


def _mala_combination(p: Potential, x):
    d1 = p.d1(x)
    d2 = p.d2(x)
    return d1 * d1 * d2 + p.d4(x) - 2.0 * p.d3(x) * d1 - d2 * d2


def stationary_moments(p: Potential) -> MomentFunctionals:
    """Moments under the stationary density exp(-V), by quadrature.

    In exact arithmetic a == b == i_fisher and mala_m4 == 0 (integration by
    parts); each field is integrated independently so the identities double
    as a quadrature self-test.  Where the third derivative jumps (piecewise
    potentials), the weak fourth derivative carries point masses at the
    breakpoints; they are added to the classical integral, which is what
    makes the mala_m4 == 0 identity hold for the double well.
    """
    a = integrate_against_density(p, lambda x: float(p.d1(x)) ** 2)
    b = integrate_against_density(p, lambda x: float(p.d2(x)))
    m4 = integrate_against_density(p, lambda x: float(_mala_combination(p, x)))
    eps = 1e-12
    for c in p.breakpoints:
        jump = float(p.d3(c + eps)) - float(p.d3(c - eps))
        m4 += jump * math.exp(-float(p.eval_v(c)))
    return MomentFunctionals(a=a, b=b, i_fisher=p.i_fisher, mala_m4=m4)


def stationary_coordinate_moments(p: Potential) -> tuple[float, float]:
    """(E[x], E[x^2]) under exp(-V); equilibrium references for estimators."""
    mean = integrate_against_density(p, lambda x: x)
    second = integrate_against_density(p, lambda x: x * x)
    return mean, second


def empirical_moments(p: Potential, xs) -> MomentFunctionals:
    """Sample averages of the moment functionals over a coordinate vector."""
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        raise DomainError("empirical_moments requires a nonempty sample")
    d1 = p.d1(xs)
    return MomentFunctionals(
        a=float(np.mean(d1 * d1)),
        b=float(np.mean(p.d2(xs))),
        i_fisher=p.i_fisher,
        mala_m4=float(np.mean(_mala_combination(p, xs))),
    )


def sample_stationary(p: Potential, size: int, rng: np.random.Generator):
    """Draw from exp(-V).

    Exact for the Gaussian; otherwise inverse-transform on a dense quadrature
    grid (suitable for initializing chains, not for high-precision work).
    """
    if p.name == "gaussian":
        return rng.standard_normal(size)
    grid = np.linspace(-12.0, 12.0, 20001)
    density = np.exp(-np.asarray(p.eval_v(grid), dtype=float))
    cdf = np.concatenate(([0.0], np.cumsum((density[1:] + density[:-1]) / 2.0)))
    cdf *= np.diff(grid)[0]
    cdf /= cdf[-1]
    u = rng.uniform(size=size)
    return np.interp(u, cdf, grid)
