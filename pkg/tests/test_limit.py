import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import golden
from pcfbands.cell import CellSpec, Disc, Slab, gamma
from pcfbands.errors import RankCollapseError
from pcfbands.limit import (MulticellIndex, assemble_limit_forms, build_V_basis, limit_eigenfields,
                            solve_limit_spectrum, solve_multicell_spectrum)


def test_constants_span_kernel_with_closed_form_mass(disc_cell):
    basis = build_V_basis((0.0, 0.0), disc_cell, cutoff=8, source_cutoff=1)
    K, B = assemble_limit_forms(basis, disc_cell)
    c = slice(basis.n_fields - 2, basis.n_fields)
    assert np.allclose(K[c, :], 0, atol=1e-14)
    g = gamma(disc_cell)
    area = disc_cell.geometry.area
    assert np.allclose(np.diag(B[c, c]).real, [disc_cell.eps1 * (1 + g * area), disc_cell.eps1], rtol=1e-12)


@pytest.mark.parametrize("theta", [(0.0, 0.0), (0.5, 0.25), (0.13, 0.71)])
def test_forms_hermitian(disc_cell, theta):
    basis = build_V_basis(theta, disc_cell, cutoff=8, source_cutoff=2)
    K, B = assemble_limit_forms(basis, disc_cell)
    assert np.allclose(K, K.conj().T, atol=1e-13)
    assert np.allclose(B, B.conj().T, atol=1e-13)
    assert np.linalg.eigvalsh(basis.transform.conj().T @ B @ basis.transform).min() > 0


def test_single_source_forms_golden():
    g = golden("limit_forms_2x2")
    cell = CellSpec(Disc(g["radius"]), g["eps0"], g["eps1"])
    basis = build_V_basis(tuple(g["theta"]), cell, cutoff=32, source_cutoff=0)
    assert basis.n_fields == 2
    K, B = assemble_limit_forms(basis, cell)
    assert np.allclose(np.diag(K).real, np.diag(g["K"]), rtol=2e-3)
    assert np.allclose(np.diag(B).real, np.diag(g["B"]), rtol=2e-3)
    # the gradient and perpendicular fields decouple in both forms
    assert abs(K[0, 1]) < 1e-6 * abs(K[0, 0])
    assert abs(B[0, 1]) < 1e-6 * abs(B[0, 0])


@pytest.mark.parametrize("cell", [CellSpec(Disc(0.3), 2.0, 1.0), CellSpec(Slab(0.25, 0.75), 2.0, 1.0)])
def test_periodic_kernel(cell):
    sp = solve_limit_spectrum((0.0, 0.0), cell, k_max=3, cutoff=16, source_cutoff=2)
    assert abs(sp.eigenvalues[0]) < 1e-8 and abs(sp.eigenvalues[1]) < 1e-8
    assert sp.eigenvalues[2] > 1.0


def test_eigenvalues_scale_inversely_with_permittivity(disc_cell):
    sp1 = solve_limit_spectrum((0.3, 0.2), disc_cell, k_max=4, cutoff=8, source_cutoff=2)
    scaled = CellSpec(disc_cell.geometry, 2 * disc_cell.eps0, 2 * disc_cell.eps1)
    sp2 = solve_limit_spectrum((0.3, 0.2), scaled, k_max=4, cutoff=8, source_cutoff=2)
    assert np.allclose(sp2.eigenvalues, sp1.eigenvalues / 2, rtol=1e-10)


def test_self_convergence_small_disc():
    g = golden("limit_self_convergence")
    cell = CellSpec(Disc(0.1), 2.0, 1.0)
    errs = []
    for M, m in ((16, 2), (32, 4)):
        lam = solve_limit_spectrum((0.5, 0.5), cell, k_max=1, cutoff=M, source_cutoff=m).eigenvalues[0]
        errs.append(abs(lam - g["lambda1"]) / g["lambda1"])
    assert errs[1] < errs[0]
    assert errs[1] < 5e-4


@pytest.mark.parametrize("key", ["disc0.3@0.0,0.0", "disc0.3@0.5,0.25", "slab0.25-0.75@0.0,0.0",
                                 "slab0.25-0.75@0.5,0.25"])
def test_rank_counts_golden(key):
    g = golden("rank_counts")[key]
    name, th = key.split("@")
    geom = Disc(0.3) if name.startswith("disc") else Slab(0.25, 0.75)
    theta = tuple(float(x) for x in th.split(","))
    basis = build_V_basis(theta, CellSpec(geom, 2.0, 1.0), cutoff=32, source_cutoff=2)
    assert basis.n_fields == g["raw"]
    assert basis.dimension == g["retained"]


def test_no_sources_leaves_single_pair(disc_cell):
    basis = build_V_basis((0.5, 0.5), disc_cell, cutoff=8, source_cutoff=0)
    assert basis.n_fields == 2


def test_rank_collapse_raises(disc_cell):
    with pytest.raises(RankCollapseError):
        build_V_basis((0.5, 0.5), disc_cell, cutoff=8, source_cutoff=1, threshold=1.0)


def test_more_sources_lower_eigenvalues(disc_cell):
    # nested trial spaces at a fixed cutoff
    lo = solve_limit_spectrum((0.5, 0.0), disc_cell, k_max=4, cutoff=12, source_cutoff=1).eigenvalues
    hi = solve_limit_spectrum((0.5, 0.0), disc_cell, k_max=4, cutoff=12, source_cutoff=2).eigenvalues
    assert np.all(hi <= lo * (1 + 1e-10))


@settings(max_examples=10)
@given(st.tuples(st.floats(0, 0.999), st.floats(0, 0.999)))
def test_spectrum_nonnegative_and_sorted(theta):
    sp = solve_limit_spectrum(theta, CellSpec(Disc(0.3), 2.0, 1.0), k_max=4, cutoff=6, source_cutoff=1)
    assert np.all(np.diff(sp.eigenvalues) >= 0)
    assert sp.eigenvalues[0] >= 0


def test_spectrum_to_dict(disc_cell):
    d = solve_limit_spectrum((0.5, 0.5), disc_cell, k_max=2, cutoff=6, source_cutoff=1).to_dict()
    assert d["theta"] == [0.5, 0.5]
    assert len(d["eigenvalues"]) == 2
    assert d["resolution"]["cutoff"] == 6


def test_eigenfields_shape(disc_cell):
    sp, (z1, z2), coeffs = limit_eigenfields((0.5, 0.5), disc_cell, k_max=3, cutoff=6, source_cutoff=1)
    assert coeffs.shape == (3, 2, 13, 13)
    assert z1[0] == -6 and z2[-1] == 6


# multicell folding


def test_multicell_index_validation():
    with pytest.raises(ValueError):
        MulticellIndex((0, 1))
    with pytest.raises(ValueError):
        MulticellIndex((1, 2, 3))
    idx = MulticellIndex((2, 2))
    assert idx.n_cells == 4
    assert idx.quasi_momenta().tolist() == [[0, 0], [0, 0.5], [0.5, 0], [0.5, 0.5]]


def test_single_cell_torus_is_periodic_problem(disc_cell):
    a = solve_multicell_spectrum((1, 1), disc_cell, k_max=5, cutoff=8, source_cutoff=1).eigenvalues
    b = solve_limit_spectrum((0.0, 0.0), disc_cell, k_max=5, cutoff=8, source_cutoff=1).eigenvalues
    assert np.allclose(a, b, rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("N", [(2, 1), (2, 2)])
def test_multicell_spectrum_is_union_of_folded_thetas(disc_cell, N):
    idx = MulticellIndex(N)
    k = 6
    multi = solve_multicell_spectrum(idx, disc_cell, k_max=k, cutoff=6, source_cutoff=1).eigenvalues
    union = np.sort(np.concatenate([
        solve_limit_spectrum(tuple(t), disc_cell, k_max=k, cutoff=6, source_cutoff=1).eigenvalues
        for t in idx.quasi_momenta()]))[:k]
    assert np.allclose(multi, union, rtol=1e-8, atol=1e-8)
