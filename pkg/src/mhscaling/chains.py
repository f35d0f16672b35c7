"""Finite-dimensional Metropolis chain simulators.

The random walk chain moves all n coordinates with one shared accept/reject
decision per step, the proposal standard deviation being ``ell / sqrt(n)``
with ``ell`` supplied by a pluggable :class:`Strategy`; the Langevin-adjusted
chain (``mala_step``) uses a drift-corrected proposal with the acceptance
exponent written out explicitly.

RNG discipline: each chain owns one counter-based generator (Philox) seeded
from a master seed; replicate independence comes from spawned seed sequences.
Within a step the n proposal normals are drawn as one block, so coordinate i
consumes position i of the block, and a single uniform decides acceptance.

A ChainState is confined to one worker at a time; potentials and strategies
are immutable and shareable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tuning
from .errors import ConcaveRegionError, DomainError
from .targets import Potential, empirical_moments

__all__ = [
    "Strategy",
    "ConstantEll",
    "ConstantAccNumeric",
    "ConstantAccAdaptive",
    "RateOptimal",
    "EntropyOptimalGaussian",
    "strategy_from_label",
    "ChainState",
    "StepRecord",
    "chain_rng",
    "choose_ell",
    "adaptive_update",
    "rwm_step",
    "mala_step",
    "run_chain",
    "run_mala",
    "write_trajectory_csv",
    "TRAJECTORY_HEADER",
]

# Fallback scale when the estimated curvature is nonpositive and a numeric
# rule has no finite optimum; a finite cap keeps the chain well defined.
DEFAULT_ELL_CAP = 10.0

# Moment ratios this small are indistinguishable from 0 and would break the
# acceptance-matching solve; clamp instead.
_S_FLOOR = 1e-12


@dataclass(frozen=True)
class Strategy:
    """Base class for step-scale strategies."""

    def label(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantEll(Strategy):
    ell: float

    def __post_init__(self):
        if not self.ell > 0.0:
            raise DomainError(f"constant ell must be > 0, got {self.ell!r}")

    def label(self) -> str:
        return f"constant-{self.ell:g}"


@dataclass(frozen=True)
class ConstantAccNumeric(Strategy):
    """Solve the limiting acceptance curve for a target rate each step."""

    alpha: float
    ell_cap: float = DEFAULT_ELL_CAP

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not self.ell_cap > 0.0:
            raise DomainError(f"ell_cap must be > 0, got {self.ell_cap!r}")

    def label(self) -> str:
        return f"acc-{self.alpha:g}-numeric"


@dataclass(frozen=True)
class ConstantAccAdaptive(Strategy):
    """Track a target acceptance rate by stochastic approximation.

    The log proposal standard deviation theta is nudged by
    gamma_{k+1} * (alpha_k - alpha) after every step, gamma_k = k**-exponent.
    alpha_k is the computed acceptance probability of the step; set
    ``use_indicator`` to feed the 0/1 acceptance outcome instead.
    """

    alpha: float
    gamma_exponent: float = 0.6
    theta0: float | None = None
    use_indicator: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not 0.5 < self.gamma_exponent <= 1.0:
            raise DomainError(
                f"gamma exponent must lie in (0.5, 1], got {self.gamma_exponent!r}"
            )

    def label(self) -> str:
        return f"acc-{self.alpha:g}-adaptive"


@dataclass(frozen=True)
class RateOptimal(Strategy):
    """Maximize the entropy production rate given the current moments."""

    ell_cap: float = DEFAULT_ELL_CAP

    def __post_init__(self):
        if not self.ell_cap > 0.0:
            raise DomainError(f"ell_cap must be > 0, got {self.ell_cap!r}")

    def label(self) -> str:
        return "rate-optimal"


@dataclass(frozen=True)
class EntropyOptimalGaussian(Strategy):
    """Minimize the Gaussian entropy derivative (Gaussian targets only)."""

    ell_cap: float = DEFAULT_ELL_CAP

    def __post_init__(self):
        if not self.ell_cap > 0.0:
            raise DomainError(f"ell_cap must be > 0, got {self.ell_cap!r}")

    def label(self) -> str:
        return "entropy-gaussian"


def strategy_from_label(text: str) -> Strategy:
    """Parse CLI-style strategy specs like 'constant:2.38' or 'alpha:0.27'."""
    kind, _, arg = text.partition(":")
    if kind == "constant":
        return ConstantEll(float(arg) if arg else 2.38)
    if kind == "alpha":
        return ConstantAccNumeric(float(arg) if arg else 0.27)
    if kind == "alpha-adaptive":
        return ConstantAccAdaptive(float(arg) if arg else 0.27)
    if kind == "star":
        return RateOptimal()
    if kind == "ent":
        return EntropyOptimalGaussian()
    raise DomainError(
        f"unknown strategy {text!r}; expected constant[:ell], alpha[:a], "
        "alpha-adaptive[:a], star or ent"
    )


@dataclass
class ChainState:
    coords: np.ndarray
    rng: np.random.Generator
    k: int = 0
    theta: float | None = None
    accept_count: int = 0


@dataclass(frozen=True)
class StepRecord:
    k: int
    ell_used: float
    accepted: bool
    acc_prob: float
    a_hat: float
    b_hat: float
    # coordinate moments, consumed by the experiment estimators
    m_hat: float = field(default=math.nan)
    s_hat: float = field(default=math.nan)


def chain_rng(seed) -> np.random.Generator:
    """Counter-based generator for a chain (accepts int or SeedSequence)."""
    return np.random.Generator(np.random.Philox(seed))


def choose_ell(strategy, a_hat, b_hat, m_hat, s_hat, n, theta=None) -> float:
    """Step constant for the current empirical moments.

    Numeric rules fall back to the strategy's ell_cap when the curvature
    estimate b_hat is nonpositive (no finite optimum exists there).
    """
    if isinstance(strategy, ConstantEll):
        return strategy.ell
    if isinstance(strategy, ConstantAccAdaptive):
        if theta is None:
            raise DomainError("adaptive strategy needs the current theta")
        return math.exp(theta) * math.sqrt(n)
    if isinstance(strategy, RateOptimal):
        try:
            return tuning.ell_star_ab(a_hat, b_hat).ell
        except ConcaveRegionError:
            return strategy.ell_cap
    if isinstance(strategy, ConstantAccNumeric):
        try:
            a_eff = max(a_hat, _S_FLOOR * abs(b_hat))
            return tuning.ell_alpha_ab(a_eff, b_hat, strategy.alpha).ell
        except ConcaveRegionError:
            return strategy.ell_cap
    if isinstance(strategy, EntropyOptimalGaussian):
        if s_hat > m_hat * m_hat + _S_FLOOR:
            return tuning.ell_ent_gaussian(m_hat, s_hat).ell
        # degenerate spread (e.g. a point start): same convention as the
        # moment ODE, fall back to the rate-optimal value
        try:
            return tuning.ell_star_ab(a_hat, b_hat).ell
        except ConcaveRegionError:
            return strategy.ell_cap
    raise DomainError(f"unknown strategy {strategy!r}")


def default_gamma_schedule(k: int, exponent: float = 0.6) -> float:
    return float(k) ** (-exponent) if k > 0 else 1.0


def adaptive_update(theta, acc_prob, alpha_target, k, schedule=None) -> float:
    """One stochastic-approximation step on the log proposal scale.

    theta_{k+1} = theta_k + gamma_{k+1} * (acc_prob - alpha_target); the
    proposal standard deviation at the next step is exp(theta_{k+1}).
    """
    gamma_k = schedule(k + 1) if schedule is not None else default_gamma_schedule(k + 1)
    return theta + gamma_k * (acc_prob - alpha_target)


def _initial_theta(strategy: ConstantAccAdaptive, n: int) -> float:
    if strategy.theta0 is not None:
        return strategy.theta0
    # start from the classic stationary-phase scale
    return math.log(2.38 / math.sqrt(n))


def rwm_step(state: ChainState, p: Potential, strategy: Strategy):
    """One random walk Metropolis step over all coordinates.

    Proposes coords + (ell / sqrt(n)) * G with a fresh normal block G,
    accepts with probability exp(sum V(x) - sum V(y)) ^ 1 using a single
    uniform, and re-estimates the moments from the full coordinate vector.
    """
    coords = state.coords
    n = coords.size
    d1 = p.d1(coords)
    a_hat = float(np.mean(d1 * d1))
    b_hat = float(np.mean(p.d2(coords)))
    m_hat = float(np.mean(coords))
    s_hat = float(np.mean(coords * coords))

    adaptive = isinstance(strategy, ConstantAccAdaptive)
    if adaptive and state.theta is None:
        state.theta = _initial_theta(strategy, n)
    ell = choose_ell(strategy, a_hat, b_hat, m_hat, s_hat, n, theta=state.theta)

    sigma = ell / math.sqrt(n)
    noise = state.rng.standard_normal(n)
    proposal = coords + sigma * noise
    log_ratio = float(np.sum(p.eval_v(coords)) - np.sum(p.eval_v(proposal)))
    acc_prob = math.exp(min(log_ratio, 0.0))
    accepted = state.rng.uniform() <= acc_prob
    if accepted:
        state.coords = proposal
        state.accept_count += 1

    if adaptive:
        innovation = float(accepted) if strategy.use_indicator else acc_prob
        state.theta = adaptive_update(
            state.theta,
            innovation,
            strategy.alpha,
            state.k,
            schedule=lambda k: default_gamma_schedule(k, strategy.gamma_exponent),
        )

    state.k += 1
    record = StepRecord(
        k=state.k,
        ell_used=ell,
        accepted=bool(accepted),
        acc_prob=acc_prob,
        a_hat=a_hat,
        b_hat=b_hat,
        m_hat=m_hat,
        s_hat=s_hat,
    )
    return state, record


def mala_step(state: ChainState, p: Potential, sigma: float):
    """One Langevin-adjusted step with proposal std sigma.

    The acceptance exponent is the explicit form
    sum_i [ V(x_i) - V(x_i + z_i)
            + ((g_i)^2 - (g_i - (sigma/2)(V'(x_i) + V'(x_i + z_i)))^2) / 2 ]
    with z_i = sigma g_i - (sigma^2 / 2) V'(x_i); its equivalence with the
    density-ratio form is covered by tests rather than assumed.
    """
    if not sigma > 0.0:
        raise DomainError(f"sigma must be > 0, got {sigma!r}")
    coords = state.coords
    n = coords.size
    d1_here = p.d1(coords)
    a_hat = float(np.mean(d1_here * d1_here))
    b_hat = float(np.mean(p.d2(coords)))
    m_hat = float(np.mean(coords))
    s_hat = float(np.mean(coords * coords))

    noise = state.rng.standard_normal(n)
    jump = sigma * noise - 0.5 * sigma * sigma * d1_here
    proposal = coords + jump
    reverse = noise - 0.5 * sigma * (d1_here + p.d1(proposal))
    exponent = float(
        np.sum(p.eval_v(coords))
        - np.sum(p.eval_v(proposal))
        + 0.5 * (np.sum(noise * noise) - np.sum(reverse * reverse))
    )
    acc_prob = math.exp(min(exponent, 0.0))
    accepted = state.rng.uniform() <= acc_prob
    if accepted:
        state.coords = proposal
        state.accept_count += 1
    state.k += 1
    record = StepRecord(
        k=state.k,
        ell_used=sigma,
        accepted=bool(accepted),
        acc_prob=acc_prob,
        a_hat=a_hat,
        b_hat=b_hat,
        m_hat=m_hat,
        s_hat=s_hat,
    )
    return state, record


def _run(init, p, steps, record_every, seed, rng, step_fn):
    coords = np.array(init, dtype=float).reshape(-1).copy()
    if coords.size < 1:
        raise DomainError("initial state must have at least one coordinate")
    if rng is None:
        rng = chain_rng(0 if seed is None else seed)
    state = ChainState(coords=coords, rng=rng)
    records = []
    for k in range(1, steps + 1):
        state, record = step_fn(state)
        if record_every and k % record_every == 0:
            records.append(record)
    return records, state


def run_chain(init, p: Potential, strategy: Strategy, steps: int,
              record_every: int = 1, seed=None, rng=None):
    """Run a random walk chain; deterministic for a given seed.

    Returns (records, final_state) where records holds every
    ``record_every``-th StepRecord.
    """
    return _run(
        init, p, steps, record_every, seed, rng,
        lambda state: rwm_step(state, p, strategy),
    )


def run_mala(init, p: Potential, sigma: float, steps: int,
             record_every: int = 1, seed=None, rng=None):
    """Run a Langevin-adjusted chain at fixed proposal std sigma."""
    return _run(
        init, p, steps, record_every, seed, rng,
        lambda state: mala_step(state, p, sigma),
    )


TRAJECTORY_HEADER = "k,ell_used,acc_prob,a_hat,b_hat"


def write_trajectory_csv(records, path) -> None:
    """Write step records in the exchange format (k,ell_used,acc_prob,a_hat,b_hat)."""
    with open(path, "w", newline="") as fh:
        fh.write(TRAJECTORY_HEADER + "\n")
        for r in records:
            fh.write(
                f"{r.k},{r.ell_used!r},{r.acc_prob!r},{r.a_hat!r},{r.b_hat!r}\n"
            )
