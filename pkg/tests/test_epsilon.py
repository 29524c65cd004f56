import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import golden
from pcfbands.cell import CellSpec, Disc
from pcfbands.epsilon import (EpsilonTensors, assemble_epsilon_forms, build_epsilon_basis, check_eps,
                              constraint_energy, degenerate_tensors, eps_max, solve_epsilon_spectrum)
from pcfbands.errors import ParameterRangeError
from pcfbands.limit import solve_limit_spectrum


def test_eps_range_guard(disc_cell):
    assert eps_max(disc_cell) == pytest.approx(0.5)
    check_eps(0.5, disc_cell)
    for bad in (0.0, -0.1, 0.51):
        with pytest.raises(ParameterRangeError):
            check_eps(bad, disc_cell)
    with pytest.raises(ParameterRangeError):
        solve_epsilon_spectrum(0.6, (0.5, 0.5), disc_cell, cutoff=4, source_cutoff=None)


def test_tensors_symmetric(disc_cell):
    t = EpsilonTensors.of(0.2, disc_cell)
    assert np.array_equal(t.A1, t.A1.T)
    assert np.array_equal(t.A0, t.A0.T)
    assert np.all(np.linalg.eigvalsh(t.A1) > 0)


def test_constant_fields_in_kernel_with_closed_form_mass(disc_cell):
    K, B, basis = assemble_epsilon_forms(0.2, (0.0, 0.0), disc_cell, cutoff=6, source_cutoff=1)
    const = [i for i, (c, a, b) in enumerate(basis.modes) if a == 0 and b == 0]
    assert [basis.modes[i][0] for i in const] == [0, 1]
    assert np.allclose(K[const, :], 0, atol=1e-12)
    area = disc_cell.geometry.area
    expected = [1 - area + disc_cell.eps0 / disc_cell.eps1 * area, 1.0]
    assert np.allclose(np.diag(B[np.ix_(const, const)]).real, expected, rtol=1e-12)


def test_periodic_kernel(disc_cell):
    sp = solve_epsilon_spectrum(0.1, (0.0, 0.0), disc_cell, k_max=3, cutoff=8, source_cutoff=2)
    assert abs(sp.eigenvalues[0]) < 1e-8 and abs(sp.eigenvalues[1]) < 1e-8
    assert sp.eps == 0.1


def test_single_mode_forms_golden():
    g = golden("epsilon_single_mode")
    cell = CellSpec(Disc(g["radius"]), g["eps0"], g["eps1"])
    K, B, basis = assemble_epsilon_forms(g["eps"], tuple(g["theta"]), cell, cutoff=0, source_cutoff=None)
    assert basis.n_fields == 2
    Kg = np.array(g["K_real"]) + 1j * np.array(g["K_imag"])
    assert np.allclose(K, Kg, rtol=1e-12, atol=1e-12 * np.abs(Kg).max())
    assert np.allclose(B, g["B"], rtol=1e-12, atol=1e-14)


@given(st.floats(0.02, 0.4), st.floats(1.2, 5.0), st.floats(0.5, 3.0))
def test_tensor_expansion_is_fourth_order(frac, eps0_ratio, eps1):
    cell = CellSpec(Disc(0.3), eps0_ratio * eps1, eps1)
    eps = frac * eps_max(cell)
    a1, a0_q1, a0_q0 = degenerate_tensors(cell)

    def remainder(e):
        t = EpsilonTensors.of(e, cell)
        q1 = np.abs(t.A1 - a1 - e**2 * a0_q1).max()
        q0 = np.abs(e**2 * t.pref0 * t.A0 - e**2 * a0_q0).max()
        return q1, q0

    big = remainder(eps)
    small = remainder(eps / 2)
    for b, s in zip(big, small):
        if s > 1e-13:
            assert 14.0 < b / s < 17.0


def test_spectrum_approaches_limit(disc_cell):
    theta = (0.5, 0.5)
    lim = solve_limit_spectrum(theta, disc_cell, k_max=3, cutoff=8, source_cutoff=2).eigenvalues
    errs = [np.abs(solve_epsilon_spectrum(e, theta, disc_cell, k_max=3, cutoff=8, source_cutoff=2).eigenvalues
                   - lim).max() / lim.max() for e in (0.2, 0.1, 0.05)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.02


def test_constraint_energy_vanishes_with_eps(disc_cell):
    basis = build_epsilon_basis((0.5, 0.25), disc_cell, cutoff=8, source_cutoff=2)
    energies = []
    for e in (0.2, 0.1, 0.05):
        sp = solve_epsilon_spectrum(e, (0.5, 0.25), disc_cell, k_max=1, basis=basis)
        energies.append(constraint_energy(basis, disc_cell, sp.eigenvectors[:, 0]))
    assert energies[0] > energies[1] > energies[2] >= 0


def test_plane_waves_only_lock(disc_cell):
    # without the constrained fields the first band stays far above the limit as eps -> 0
    theta = (0.5, 0.5)
    lim = solve_limit_spectrum(theta, disc_cell, k_max=1, cutoff=8, source_cutoff=2).eigenvalues[0]
    pw = [solve_epsilon_spectrum(e, theta, disc_cell, k_max=1, cutoff=6, source_cutoff=None).eigenvalues[0]
          for e in (0.1, 0.05, 0.02)]
    aug = solve_epsilon_spectrum(0.02, theta, disc_cell, k_max=1, cutoff=8, source_cutoff=2).eigenvalues[0]
    assert pw[0] < pw[1] < pw[2]
    assert pw[2] > 1.1 * lim
    assert abs(aug - lim) < 0.01 * lim


def test_coefficients_roundtrip(disc_cell):
    basis = build_epsilon_basis((0.3, 0.1), disc_cell, cutoff=4, plane_wave_cutoff=2, source_cutoff=None)
    x = np.zeros(basis.n_fields, dtype=complex)
    x[0] = 1.0
    c, a, b = basis.modes[0]
    coeffs = basis.coefficients(x)
    assert coeffs[c, a + 4, b + 4] == 1.0
    assert np.count_nonzero(coeffs) == 1


def test_plane_wave_cutoff_validation(disc_cell):
    with pytest.raises(ValueError):
        build_epsilon_basis((0.3, 0.1), disc_cell, cutoff=4, plane_wave_cutoff=5)
