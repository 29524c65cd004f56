import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import golden
from pcfbands.slab import (F, SlabProblem, block_matrix, block_roots, build_M, full_roots, gap_edges,
                           kronig_penney, regular_M, smin, trace_bands)

SLAB = SlabProblem(0.25, 0.75, 2.0, 1.0)


def test_invalid_slab():
    with pytest.raises(ValueError):
        SlabProblem(0.6, 0.4)
    with pytest.raises(ValueError):
        SlabProblem(0.25, 0.75, 1.0, 2.0)


def test_weights():
    assert SLAB.gamma == 1.0
    assert SLAB.weights == (2.0, 1.0)


def test_matrix_shape_and_golden():
    g = golden("slab_matrix")
    M = build_M(g["lambda"], g["theta1"], SLAB)
    assert M.shape == (10, 10)
    expected = np.array(g["real"]) + 1j * np.array(g["imag"])
    assert np.allclose(M, expected, rtol=0, atol=1e-12)


def test_matrix_blocks_decouple():
    M = regular_M(3.7, 0.3, SLAB)
    for c in range(2):
        rows = list(range(c, 10, 2))
        other = list(range(1 - c, 10, 2))
        assert np.all(M[np.ix_(rows, other)] == 0)
        assert np.allclose(M[np.ix_(rows, rows)], block_matrix(3.7, 0.3, SLAB, c))


def test_constant_mode_at_zero():
    assert smin(0.0, 0.0, SLAB) < 1e-10
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert F(0.0, 0.0, SLAB) == 0


@pytest.mark.parametrize("lam", [25.0, 120.0])
def test_no_root_inside_gaps(lam):
    for t in np.linspace(0, 1, 9):
        assert abs(F(lam, t, SLAB)) > 1e-6
        assert smin(lam, t, SLAB, "regular") > 1e-4


@settings(max_examples=15)
@given(st.floats(0.0, 1.0), st.floats(0.5, 150.0), st.sampled_from([0, 1]))
def test_block_singular_iff_dispersion_relation(theta1, lam, c):
    # the 5x5 block is singular exactly when the scalar dispersion function equals cos(2 pi theta1)
    gap = abs(kronig_penney(lam, SLAB, c) - np.cos(2 * np.pi * theta1))
    s = smin(lam, theta1, SLAB, "tm" if c == 0 else "te")
    if gap > 1e-2:
        assert s > 1e-8


def test_first_band_at_half_period():
    g = golden("slab_bands")
    roots = block_roots(0.5, SLAB, window=(0.0, 20.0))
    assert roots[0] == pytest.approx(g["first_band_at_half"], rel=1e-8)


@pytest.mark.parametrize("theta1", [0.0, 0.175, 0.5])
def test_block_roots_match_full_system(theta1):
    b = block_roots(theta1, SLAB)
    f = full_roots(theta1, SLAB)
    assert len(b) == len(f)
    assert np.allclose(b, f, rtol=1e-8, atol=1e-8)


@pytest.mark.parametrize("index", [0, 7, 13, 20, 33])
def test_roots_match_golden_bands(index):
    g = golden("slab_bands")
    expected = g["bands"][index]
    roots = block_roots(g["thetas"][index], SLAB)
    assert np.allclose(roots[: len(expected)], expected, rtol=1e-6, atol=1e-6)


@pytest.mark.parametrize("theta1", [0.1, 0.3])
def test_reflection_symmetry(theta1):
    assert np.allclose(block_roots(theta1, SLAB), block_roots(1 - theta1, SLAB), rtol=1e-8, atol=1e-8)


def test_gap_edges_golden():
    g = golden("slab_bands")
    edges = gap_edges(SLAB)
    assert len(edges) == len(g["gap_edges"])
    assert np.allclose(edges, g["gap_edges"], rtol=1e-6)


def test_trace_bands_continuous():
    thetas = np.linspace(0, 0.5, 11)
    bs = trace_bands(SLAB, thetas, window=(-1.0, 100.0), k_max=4)
    assert bs.eigenvalues.shape == (11, 4)
    steps = np.abs(np.diff(bs.eigenvalues, axis=0))
    assert np.all(steps.max(axis=0) <= 10 * np.median(steps, axis=0))
    assert bs.eigenvalues[0, 0] == pytest.approx(0.0, abs=1e-8)
