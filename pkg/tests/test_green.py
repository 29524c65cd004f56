import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from conftest import golden
from pcfbands.cell import CellSpec, Disc
from pcfbands.errors import ExtrapolationError, ParameterRangeError
from pcfbands.fourier import BlochTheta
from pcfbands.green import (_pencil, arrow_bounds, bessel_j1_prime, disc_integral_u, green_derivative_identity,
                            green_g0, green_norm_sum, lattice_sum_difference, lower_ellipticity,
                            mollifier_hat, neumann_mu2, spectrum_bottom)

SAMPLES = [((0.5, 0.5), -1.0), ((0.5, 0.5), -0.5), ((0.5, 0.5), -0.1),
           ((0.5, 0.0), -1.0), ((0.5, 0.0), -0.5), ((0.5, 0.0), -0.1),
           ((0.25, 0.25), -1.0), ((0.25, 0.25), -0.5), ((0.25, 0.25), -0.1)]


def test_rejects_zero_theta_and_k_above_bottom():
    with pytest.raises(ParameterRangeError):
        green_g0((0.0, 0.0), -1.0)
    with pytest.raises(ParameterRangeError):
        green_g0((0.5, 0.5), spectrum_bottom((0.5, 0.5)) + 1.0)
    with pytest.raises(ParameterRangeError):
        green_g0((0.5, 0.5), 0.0, sigmas=(0.1, 0.05), radii=(0.15, 0.3))


def test_tableau_tolerance_enforced():
    with pytest.raises(ExtrapolationError):
        green_g0((0.5, 0.5), 0.0, cutoff=8, tol=1e-14)


def test_mollifier_normalized():
    assert mollifier_hat(np.array([0.0]), 0.1)[0] == 1.0
    assert np.all(mollifier_hat(np.linspace(0.1, 50, 100), 0.05) <= 1.0)


@pytest.mark.parametrize("theta", [(0.3, 0.1), (0.5, 0.25)])
def test_lattice_symmetries(theta):
    g = green_g0(theta, -0.5).value
    t1, t2 = theta
    for image in ((t2, t1), (1 - t1, 1 - t2), (1 - t1, t2)):
        assert green_g0(image, -0.5).value == pytest.approx(g, rel=1e-7)


@pytest.mark.parametrize("theta", [(0.5, 0.5), (0.25, 0.0)])
def test_increasing_in_k(theta):
    vals = [green_g0(theta, k).value for k in (-1.0, -0.5, 0.0, 0.5)]
    assert np.all(np.diff(vals) > 0)


def test_k_dependence_matches_lattice_sum():
    theta = (0.5, 0.25)
    g0 = green_g0(theta, 0.0).value
    for k in (-1.0, 0.5):
        assert green_g0(theta, k).value - g0 == pytest.approx(lattice_sum_difference(theta, k), rel=1e-4)


def test_dual_route_golden():
    g = golden("green_dual_route")
    val = green_g0((0.5, 0.5), 0.0).value
    assert val == pytest.approx(g["mollified"], rel=1e-10)
    assert val == pytest.approx(g["inverted"], rel=1e-6)


@pytest.mark.parametrize("theta,k", SAMPLES)
def test_derivative_identity(theta, k):
    fd, s = green_derivative_identity(theta, k)
    assert fd > 0
    assert fd == pytest.approx(s, rel=1e-2)


@settings(max_examples=10)
@given(st.tuples(st.floats(0.05, 0.95), st.floats(0.05, 0.95)), st.floats(-2.0, 0.0))
def test_norm_sum_bracketed(theta, k):
    coarse = green_norm_sum(theta, k, cutoff=32)
    fine = green_norm_sum(theta, k, cutoff=128)
    assert 0 < coarse.partial <= fine.partial <= coarse.upper
    assert np.all(np.diff(fine.partial_sums) >= 0)


@pytest.mark.parametrize("delta", [0.2, 0.1, 0.05])
def test_disc_integral_identity(delta):
    lhs, rhs = disc_integral_u(delta, (0.5, 0.5), cutoff=64)
    assert lhs > 0
    assert abs(lhs - rhs) / abs(rhs) < 1e-4


def test_disc_integral_scales_like_delta4_log():
    vals = [disc_integral_u(d, (0.5, 0.5), cutoff=64, g0=0.0)[0] for d in (0.1, 0.05)]
    pred = [-(np.pi / 2) * d**4 * np.log(d) for d in (0.1, 0.05)]
    ratio = [v / p for v, p in zip(vals, pred)]
    assert ratio[1] == pytest.approx(1.0, abs=0.5)
    assert abs(ratio[1] - 1.0) < abs(ratio[0] - 1.0)


def test_neumann_eigenvalue():
    mu2 = neumann_mu2()
    assert 3.38 < mu2 < 3.40
    x = np.sqrt(mu2)
    assert abs(special.jvp(1, x)) < 1e-9
    for t in (0.5, 1.0, 2.5, 4.0):
        assert bessel_j1_prime(t) == pytest.approx(special.jvp(1, t), abs=1e-14)


def test_lower_ellipticity():
    assert lower_ellipticity(1.0) == pytest.approx((3 - np.sqrt(5)) / 2)
    assert lower_ellipticity(1e-6) == pytest.approx(0.5, abs=1e-6)
    g = np.linspace(0.1, 20, 50)
    c = [lower_ellipticity(x) for x in g]
    assert np.all(np.diff(c) <= 0) and min(c) > 0


def test_trial_fields_decouple():
    K, B = _pencil(0.1, BlochTheta((0.5, 0.25)), CellSpec(Disc(0.1), 2.0, 1.0), 64)
    assert abs(K[0, 1]) < 1e-6 * abs(K[0, 0])
    assert abs(B[0, 1]) < 1e-6 * abs(B[0, 0])


def test_arrow_refuses_periodic_theta():
    with pytest.raises(ParameterRangeError):
        arrow_bounds(0.05, [(0.0, 0.0), (0.5, 0.5)])
    with pytest.raises(ParameterRangeError):
        arrow_bounds(0.05, [(0.5, 0.5)], CellSpec(Disc(0.1), 2.0, 1.0))


def test_arrow_upper_bound_dominates_direct_solve():
    from pcfbands.limit import solve_limit_spectrum

    delta = 0.1
    cell = CellSpec(Disc(delta), 2.0, 1.0)
    thetas = [(0.5, 0.5), (0.5, 0.0), (0.25, 0.25)]
    rep = arrow_bounds(delta, thetas, cell)
    for t, up in zip(thetas, rep.lambda2_upper):
        direct = solve_limit_spectrum(t, cell, k_max=2, cutoff=16, source_cutoff=2).eigenvalues[1]
        assert direct <= up


def test_arrow_log_trend():
    # lambda2 ~ c2 / (delta^2 |ln delta|) with c2 settling as delta shrinks
    c2 = [arrow_bounds(d, [(0.5, 0.5), (0.25, 0.0)]).empirical_c2 for d in (0.1, 0.05, 0.025)]
    assert c2[0] > c2[1] > c2[2] > 0
    assert c2[2] / c2[1] > 0.95
