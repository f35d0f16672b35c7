import math

import numpy as np
import pytest

from mhscaling.coefficients import acc_rate, f1, f_rate, j_curve
from mhscaling.errors import ConcaveRegionError, DomainError
from mhscaling.tuning import (
    ell_alpha,
    ell_alpha_ab,
    ell_ent_gaussian,
    ell_star,
    ell_star_ab,
    golden_section_max,
    matched_alpha,
    x_star,
)

from oracles import golden_max


def test_x_star_value():
    assert x_star() == pytest.approx(1.22, abs=5e-3)

    def psi(x):
        return x * math.sqrt(2.0 / math.pi) * math.exp(-x * x / 8.0) - x * x * (
            0.5 * math.erfc(x / (2.0 * math.sqrt(2.0)))
        )

    assert x_star() == pytest.approx(golden_max(psi, 0.5, 4.0), abs=1e-7)


def test_ell_star_at_zero_is_sqrt_two():
    res = ell_star(0.0)
    assert res.converged
    assert res.ell == pytest.approx(math.sqrt(2.0), abs=1e-8)


def test_ell_star_at_one():
    assert ell_star(1.0).ell == pytest.approx(1.85, abs=0.01)


def test_ell_star_large_s_asymptotics():
    assert ell_star(1e4).ell / 100.0 == pytest.approx(x_star(), abs=0.02)


def test_ell_star_asymptotic_sandwich():
    gaps = [abs(ell_star(s).ell / math.sqrt(s) - x_star()) for s in (1e2, 1e3, 1e4)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_ell_star_is_the_argmax():
    for s in (0.0, 0.3, 1.0, 2.5, 40.0):
        res = ell_star(s)
        for delta in (-1e-3, -1e-5, 1e-5, 1e-3):
            assert f1(s, res.ell) >= f1(s, res.ell + delta)


def test_ell_star_continuity():
    for s in (0.0, 1.0):
        assert abs(ell_star(s + 1e-4).ell - ell_star(s).ell) < 1e-2


def test_ell_star_ab_scaling():
    assert ell_star_ab(1.0, 1.0).ell == pytest.approx(1.85, abs=0.01)
    assert ell_star_ab(4.0, 4.0).ell == pytest.approx(
        ell_star(1.0).ell / 2.0, rel=1e-12
    )


def test_ell_star_ab_against_golden_oracle():
    got = ell_star_ab(2.0, 0.5).ell
    oracle = golden_max(lambda ell: f_rate(2.0, 0.5, ell), 1e-4, 30.0, tol=1e-10)
    assert got == pytest.approx(oracle, abs=1e-6)


def test_ell_star_ab_scaling_law_property():
    rng = np.random.default_rng(17)
    for _ in range(20):
        a = float(rng.uniform(0.0, 6.0))
        b = float(rng.uniform(0.1, 4.0))
        lam = float(rng.uniform(0.2, 5.0))
        assert ell_star_ab(lam * a, lam * b).ell == pytest.approx(
            ell_star_ab(a, b).ell / math.sqrt(lam), abs=1e-8, rel=1e-8
        )


def test_ell_star_ab_rejects_nonpositive_curvature():
    with pytest.raises(ConcaveRegionError):
        ell_star_ab(1.0, 0.0)
    with pytest.raises(ConcaveRegionError):
        ell_star_ab(1.0, -2.0)


def test_ell_alpha_reference_point():
    assert ell_alpha(1.0, 0.234).ell == pytest.approx(2.38, abs=0.01)


def test_ell_alpha_small_s_limit():
    assert ell_alpha(1e-6, 0.37).ell == pytest.approx(
        math.sqrt(-2.0 * math.log(0.37)), abs=1e-3
    )


def test_ell_alpha_large_s_limit():
    from mhscaling.special import phi_inv

    assert ell_alpha(1e6, 0.27).ell / 1e3 == pytest.approx(
        -2.0 * phi_inv(0.27), abs=1e-3
    )


def test_ell_alpha_residuals_random():
    rng = np.random.default_rng(23)
    for _ in range(25):
        s = float(rng.uniform(0.01, 50.0))
        alpha = float(rng.uniform(0.02, 0.95))
        res = ell_alpha(s, alpha)
        assert abs(j_curve(s, res.ell) - alpha) <= 1e-10


def test_ell_alpha_domain():
    with pytest.raises(DomainError):
        ell_alpha(0.0, 0.3)
    with pytest.raises(DomainError):
        ell_alpha(1.0, 0.0)
    with pytest.raises(DomainError):
        ell_alpha(1.0, 1.0)


def test_ell_alpha_ab_matches_b_one():
    alpha = 0.31
    assert ell_alpha_ab(1.0, 1.0, alpha).ell == pytest.approx(
        ell_alpha(1.0, alpha).ell, rel=1e-13
    )


def test_ell_alpha_ab_double_well_start_moments():
    got = ell_alpha_ab(5.24, 5.24, 0.27).ell
    assert got == pytest.approx(ell_alpha(1.0, 0.27).ell / math.sqrt(5.24), rel=1e-12)


def test_ell_alpha_ab_acceptance_residual():
    res = ell_alpha_ab(3.0, 2.0, 0.3)
    assert acc_rate(3.0, 2.0, res.ell) == pytest.approx(0.3, abs=1e-9)


def test_matched_alpha_values():
    assert matched_alpha("near_equilibrium") == pytest.approx(0.35, abs=0.005)
    assert matched_alpha("s_to_zero") == pytest.approx(math.exp(-1.0), abs=1e-12)
    assert matched_alpha("s_to_infinity") == pytest.approx(0.27, abs=0.005)
    with pytest.raises(DomainError):
        matched_alpha("nonsense")


def test_f1_unimodality_single_sign_change():
    # one rise and one fall of successive differences on a geometric grid
    for s in (0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 10.0, 100.0):
        hi = max(6.0, 3.0 * x_star() * math.sqrt(s))
        grid = np.geomspace(1e-3, hi, 1000)
        vals = np.array([f1(s, float(ell)) for ell in grid])
        diffs = np.diff(vals)
        signs = np.sign(diffs[np.abs(diffs) > 1e-12])
        changes = int(np.sum(signs[1:] != signs[:-1]))
        assert changes == 1, (s, changes)


def test_golden_section_max_quadratic():
    argmax, _ = golden_section_max(lambda x: -(x - 2.3) ** 2, 0.0, 10.0)
    assert argmax == pytest.approx(2.3, abs=1e-7)


def test_ell_ent_gaussian_degenerate_convention():
    res = ell_ent_gaussian(0.0, 1.0)
    assert res.ell == pytest.approx(ell_star(1.0).ell, rel=1e-12)
    assert res.objective_value == 0.0


def test_ell_ent_gaussian_zero_mean_matches_rate_optimal():
    # with m = 0 the objective is a negative multiple of f1, so the
    # minimizer coincides with ell_star
    res = ell_ent_gaussian(0.0, 4.0)
    assert res.ell == pytest.approx(ell_star(4.0).ell, abs=1e-4)


def _ent_objective(m, s, ell):
    # twice dH/dt along the moment flow, written from the chain rule on
    # H = (s - ln(s - m^2) - 1) / 2 (independent route to the same objective)
    from mhscaling.coefficients import g_drift

    ds = f1(s, ell) * (1.0 - s)
    dm = -g_drift(s, 1.0, ell) * m
    return ds - (ds - 2.0 * m * dm) / (s - m * m)


@pytest.mark.parametrize("m,s", [(0.0, 4.0), (3.0, 10.0), (1.0, 2.0), (-2.0, 6.0)])
def test_ell_ent_gaussian_grid_oracle(m, s):
    res = ell_ent_gaussian(m, s)
    grid = np.linspace(1e-3, 12.0, 120001)
    vals = [_ent_objective(m, s, float(ell)) for ell in grid]
    oracle = float(grid[int(np.argmin(vals))])
    assert res.ell == pytest.approx(oracle, abs=1e-4)
    assert res.objective_value <= min(vals) + 1e-12


def test_ell_ent_gaussian_domain():
    with pytest.raises(DomainError):
        ell_ent_gaussian(2.0, 4.0)
    with pytest.raises(DomainError):
        ell_ent_gaussian(1.0, 0.5)
