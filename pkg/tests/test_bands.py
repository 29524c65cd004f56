import numpy as np
import pytest
from hypothesis import given, strategies as st

from pcfbands.bands import (BandStructure, GapRecord, detect_gaps, hausdorff_distance, high_symmetry_path,
                            map_gap_to_omega_k, sweep, sweep_epsilon, uniform_grid)
from pcfbands.cell import CellSpec, Disc
from pcfbands.errors import ParameterRangeError

point_sets = st.lists(st.floats(-100, 100), min_size=1, max_size=30)


def _bs(ev):
    ev = np.asarray(ev, dtype=float)
    return BandStructure(np.zeros((len(ev), 2)), ev)


def test_detect_gap_example():
    gaps = detect_gaps(_bs([[0, 2, 5], [1, 3, 6]]))
    assert [(g.index, g.lower, g.upper) for g in gaps] == [(1, 1.0, 2.0), (2, 3.0, 5.0)]
    assert gaps[1].width == 2.0
    assert gaps[1].relative_width == pytest.approx(0.5)


def test_touching_bands_have_no_gap():
    assert detect_gaps(_bs([[0, 1], [1, 2]])) == []


def test_gap_requires_positive_width():
    with pytest.raises(ValueError):
        GapRecord(1, 2.0, 2.0)


def test_unsorted_eigenvalues_rejected():
    with pytest.raises(ValueError):
        _bs([[2.0, 1.0]])


def test_spectrum_union():
    assert _bs([[0, 1, 5], [2, 3, 6]]).spectrum_union() == [(0.0, 3.0), (5.0, 6.0)]


def test_hausdorff_example():
    assert hausdorff_distance([0, 1], [0, 3]) == 2.0
    assert hausdorff_distance([0, 1, 10], [0, 1], window=5) == 0.0
    with pytest.raises(ValueError):
        hausdorff_distance([5.0], [6.0], window=1.0)


@given(point_sets, point_sets)
def test_hausdorff_symmetric_and_nonnegative(a, b):
    d = hausdorff_distance(a, b)
    assert d >= 0
    assert d == hausdorff_distance(b, a)
    assert hausdorff_distance(a, a) == 0


@given(point_sets, point_sets, point_sets)
def test_hausdorff_triangle_inequality(a, b, c):
    assert hausdorff_distance(a, c) <= hausdorff_distance(a, b) + hausdorff_distance(b, c) + 1e-9


@given(point_sets)
def test_hausdorff_matches_brute_force(a):
    b = [x / 2 + 1 for x in a[::2]]
    D = np.abs(np.subtract.outer(a, b))
    assert hausdorff_distance(a, b) == pytest.approx(max(D.min(axis=1).max(), D.min(axis=0).max()))


def test_grids():
    g = uniform_grid(4)
    assert g.shape == (16, 2) and g.max() == 0.75
    p = high_symmetry_path(4)
    assert len(p) == 13
    assert p[0].tolist() == [0, 0] and p[4].tolist() == [0.5, 0] and p[8].tolist() == [0.5, 0.5]


def test_finer_grid_widens_band_extents(disc_cell):
    res = {"cutoff": 6, "source_cutoff": 1}
    coarse = sweep("limit", disc_cell, uniform_grid(2), 4, res).extents
    fine = sweep("limit", disc_cell, uniform_grid(4), 4, res).extents
    assert np.all(fine[:, 0] <= coarse[:, 0] + 1e-12)
    assert np.all(fine[:, 1] >= coarse[:, 1] - 1e-12)


def test_sweep_deterministic_and_parallel_invariant(disc_cell):
    res = {"cutoff": 6, "source_cutoff": 1}
    thetas = uniform_grid(2)
    a = sweep("limit", disc_cell, thetas, 3, res)
    b = sweep("limit", disc_cell, thetas, 3, res, jobs=2)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)


def test_sweep_epsilon_shares_grid(disc_cell):
    out = sweep_epsilon(disc_cell, [(0.5, 0.5)], (0.2, 0.1), 2, {"cutoff": 6, "source_cutoff": 1})
    assert sorted(out) == [0.1, 0.2]
    assert out[0.1].eigenvalues.shape == (1, 2)


def test_sweep_rejects_other_solvers(disc_cell):
    with pytest.raises(ValueError):
        sweep("epsilon", disc_cell, [(0.5, 0.5)])


def test_omega_k_region_subcritical_and_approaches_critical_line(disc_cell):
    gap = GapRecord(2, 40.0, 50.0)
    region = map_gap_to_omega_k(gap, disc_cell, [0.2, 0.1, 0.05, 0.01])
    assert region.is_subcritical()
    w2, k2 = region.pairs[..., 0], region.pairs[..., 1]
    assert np.all((w2 > 40.0) & (w2 < 50.0))
    distance = w2 * disc_cell.mu * disc_cell.eps1 - k2
    assert np.all(np.diff(distance.max(axis=1)) < 0)
    assert distance[-1].max() < 1e-3 * w2.max()


def test_disjoint_gaps_give_disjoint_regions(disc_cell):
    r1 = map_gap_to_omega_k(GapRecord(1, 10.0, 20.0), disc_cell, [0.1])
    r2 = map_gap_to_omega_k(GapRecord(3, 30.0, 40.0), disc_cell, [0.1])
    assert r1.pairs[..., 0].max() < r2.pairs[..., 0].min()


def test_omega_k_guard(disc_cell):
    with pytest.raises(ParameterRangeError):
        map_gap_to_omega_k(GapRecord(1, 1.0, 2.0), disc_cell, [0.9])


def test_omega_k_cell_independent_of_geometry():
    cell = CellSpec(Disc(0.1), 3.0, 1.5, 2.0)
    region = map_gap_to_omega_k(GapRecord(1, 1.0, 2.0), cell, [0.1], n_omega=5)
    assert region.pairs.shape == (1, 5, 2)
    assert np.allclose(region.pairs[0, :, 1], region.pairs[0, :, 0] * 2.0 * (1.5 - 0.01))
