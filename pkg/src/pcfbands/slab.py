"""Exact dispersion relation of the one-dimensional layered limit problem.

The field v = (v1, v2) depends on y in [0, 1).  It is constant (= C) on [a, b] and solves
-v'' = lam (eps0 - eps1) v on the rest of the period, with quasi-periodic end conditions and
the interface balances

    lam eps1 (b - a) C1 = (1 + 1/gamma)(v1'(a) - v1'(b)),
    lam eps1 (b - a) C2 = (1/gamma)(v2'(a) - v2'(b)).

For eps0 = 2, eps1 = 1 these are lam (b - a) C1 = 2(v1'(a) - v1'(b)) and
lam (b - a) C2 = v2'(a) - v2'(b).  Unknowns are ordered X = (C1, C2, A1_1, A1_2, A2_1, A2_2,
B1_1, B1_2, B2_1, B2_2) where v = A1 phi1 + A2 phi2 on [0, a) and v = B1 phi1 + B2 phi2 on
(b, 1].
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

from .bands import BandStructure, GapRecord, detect_gaps
from .errors import SpectrumError

log = logging.getLogger(__name__)

ROOT_TOL = 1e-8


@dataclass(frozen=True)
class SlabProblem:
    a: float = 0.25
    b: float = 0.75
    eps0: float = 2.0
    eps1: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.a < self.b < 1.0:
            raise ValueError(f"slab needs 0 < a < b < 1, got a={self.a}, b={self.b}")
        if not self.eps0 > self.eps1 > 0.0:
            raise ValueError("slab needs eps0 > eps1 > 0")

    @property
    def gamma(self) -> float:
        return (self.eps0 - self.eps1) / self.eps1

    @property
    def weights(self) -> tuple[float, float]:
        """Coefficients of the derivative jumps for the two components."""
        return (1.0 + 1.0 / self.gamma, 1.0 / self.gamma)

    @property
    def length(self) -> float:
        return self.b - self.a

    def kappa(self, lam: float) -> complex:
        """Principal square root of lam (eps0 - eps1)."""
        return complex(np.sqrt(complex(lam * (self.eps0 - self.eps1))))


def _exponential_system(lam: float, slab: SlabProblem):
    """(phi, dphi) evaluators for the literal ansatz e^{+-i kappa y}, or {1, y} at lam = 0."""
    if lam == 0.0:
        def phi(y):
            return np.array([1.0, y], dtype=complex)

        def dphi(y):
            return np.array([0.0, 1.0], dtype=complex)
    else:
        k = slab.kappa(lam)

        def phi(y):
            return np.array([np.exp(1j * k * y), np.exp(-1j * k * y)])

        def dphi(y):
            return np.array([1j * k * np.exp(1j * k * y), -1j * k * np.exp(-1j * k * y)])
    return phi, dphi


def _regular_system(lam: float, slab: SlabProblem):
    """(phi, dphi) for {cos kappa y, sin(kappa y)/kappa}: entire in lam, continuous through 0."""
    k2 = lam * (slab.eps0 - slab.eps1)
    k = np.sqrt(complex(k2))

    def sinc_k(y):
        x = k * y
        return y * (np.sinc(x / np.pi) if abs(x) > 0 else 1.0)

    def phi(y):
        return np.array([np.cos(k * y), sinc_k(y)], dtype=complex)

    def dphi(y):
        return np.array([-k2 * sinc_k(y), np.cos(k * y)], dtype=complex)

    return phi, dphi


def _component_rows(lam, theta1, slab, phi, dphi, weight):
    """Five conditions on (C, A1, A2, B1, B2) for one component."""
    a, b = slab.a, slab.b
    ph = np.exp(2j * np.pi * theta1)
    rows = np.zeros((5, 5), dtype=complex)
    # v(a) = C, v(b) = C
    rows[0, 0] = -1.0
    rows[0, 1:3] = phi(a)
    rows[1, 0] = -1.0
    rows[1, 3:5] = phi(b)
    # v(1) = e^{2 pi i theta} v(0), v'(1) = e^{2 pi i theta} v'(0)
    rows[2, 3:5] = phi(1.0)
    rows[2, 1:3] = -ph * phi(0.0)
    rows[3, 3:5] = dphi(1.0)
    rows[3, 1:3] = -ph * dphi(0.0)
    # lam eps1 (b - a) C = w (v'(a) - v'(b))
    rows[4, 0] = lam * slab.eps1 * slab.length
    rows[4, 1:3] = -weight * dphi(a)
    rows[4, 3:5] = weight * dphi(b)
    return rows


# column positions of (C, A1, A2, B1, B2) for each component in the 10-vector
_COLUMNS = ((0, 2, 4, 6, 8), (1, 3, 5, 7, 9))
# row positions of the five conditions for each component in the 10x10 matrix
_ROWS = ((0, 2, 4, 6, 8), (1, 3, 5, 7, 9))


def _assemble(blocks) -> np.ndarray:
    M = np.zeros((10, 10), dtype=complex)
    for c, blk in enumerate(blocks):
        M[np.ix_(_ROWS[c], _COLUMNS[c])] = blk
    return M


def build_M(lam: float, theta1: float, slab: SlabProblem = SlabProblem()) -> np.ndarray:
    """The 10x10 dispersion matrix with the exponential ansatz."""
    phi, dphi = _exponential_system(float(lam), slab)
    w = slab.weights
    return _assemble([_component_rows(lam, theta1, slab, phi, dphi, w[c]) for c in range(2)])


def block_matrix(lam: float, theta1: float, slab: SlabProblem, component: int,
                 regular: bool = True) -> np.ndarray:
    """5x5 system for one polarisation (component 0: the v1 system, 1: the v2 system)."""
    phi, dphi = (_regular_system if regular else _exponential_system)(float(lam), slab)
    return _component_rows(lam, theta1, slab, phi, dphi, slab.weights[component])


def regular_M(lam: float, theta1: float, slab: SlabProblem = SlabProblem()) -> np.ndarray:
    return _assemble([block_matrix(lam, theta1, slab, c) for c in range(2)])


def _normalize_rows(M: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(M, axis=1, keepdims=True)
    return M / np.where(n > 0, n, 1.0)


def F(lam: float, theta1: float, slab: SlabProblem = SlabProblem()) -> complex:
    """det M by LU with partial pivoting."""
    with warnings.catch_warnings():
        # an exactly singular M (a root) is a valid input: its determinant is 0
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(build_M(lam, theta1, slab))
    sign = (-1) ** int(np.sum(piv != np.arange(len(piv))))
    return complex(sign * np.prod(np.diag(lu)))


def smin(lam: float, theta1: float, slab: SlabProblem = SlabProblem(), matrix: str = "full") -> float:
    """Smallest singular value; ``matrix`` is "full" (literal ansatz), "regular" (row-normalized
    regular basis, 10x10), "tm" or "te" (row-normalized regular 5x5 blocks)."""
    if matrix == "full":
        M = build_M(lam, theta1, slab)
    elif matrix == "regular":
        M = _normalize_rows(regular_M(lam, theta1, slab))
    elif matrix in ("tm", "te"):
        M = _normalize_rows(block_matrix(lam, theta1, slab, 0 if matrix == "tm" else 1))
    else:
        raise ValueError(f"unknown matrix kind {matrix!r}")
    return float(linalg.svdvals(M)[-1])


def singular_values(lam: float, theta1: float, slab: SlabProblem, matrix: str = "regular") -> np.ndarray:
    if matrix == "regular":
        M = _normalize_rows(regular_M(lam, theta1, slab))
    else:
        M = _normalize_rows(block_matrix(lam, theta1, slab, 0 if matrix == "tm" else 1))
    return linalg.svdvals(M)


def kronig_penney(lam: float, slab: SlabProblem, component: int) -> float:
    """Scalar dispersion function D(lam) with D = cos(2 pi theta1) on the spectrum.

    The exterior interval has length L = 1 - (b - a); eliminating the exterior solution gives
    cos(2 pi theta1) = cos(kappa L) - lam eps1 (b - a) sin(kappa L) / (2 w kappa).
    """
    L = 1.0 - slab.length
    k2 = lam * (slab.eps0 - slab.eps1)
    k = np.sqrt(complex(k2))
    sinc = L * (np.sinc(k * L / np.pi) if k2 != 0 else 1.0)  # sin(kL)/k
    w = slab.weights[component]
    return float(np.real(np.cos(k * L) - lam * slab.eps1 * slab.length * sinc / (2.0 * w)))


@dataclass(frozen=True)
class Root:
    lam: float
    multiplicity: int
    component: str


def _refine(f, lo: float, hi: float, xtol: float) -> float:
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": xtol})
    return float(res.x)


def _golden(f, lo: float, mid: float, hi: float, tol: float) -> float:
    try:
        res = optimize.minimize_scalar(f, bracket=(lo, mid, hi), method="golden", tol=tol)
        x = float(res.x)
        if lo <= x <= hi:
            return x
    except ValueError:
        pass
    return _refine(f, lo, hi, tol * max(1.0, abs(mid)))


def _local_minima(f: np.ndarray) -> np.ndarray:
    i = np.arange(1, len(f) - 1)
    return i[(f[i] <= f[i - 1]) & (f[i] <= f[i + 1])]


def find_roots(theta1: float, slab: SlabProblem, window: tuple[float, float] = (-1.0, 200.0),
               step: float = 0.25, matrix: str = "tm", tol: float = ROOT_TOL,
               refine_tol: float = 1e-12, subdivisions: int = 16) -> list[Root]:
    """Roots of smin in the window for one matrix kind.

    A coarse scan locates local minima of smin; the neighbourhood of each is rescanned on a
    finer grid so that two roots inside one coarse step are both seen, and every fine local
    minimum is refined by golden-section search.
    """
    lo, hi = window
    g = lambda x: smin(x, theta1, slab, matrix)  # noqa: E731
    grid = np.arange(lo, hi + step, step)
    f = np.array([g(x) for x in grid])
    found: list[float] = []
    for i in _local_minima(f):
        a, b = grid[max(i - 2, 0)], grid[min(i + 2, len(grid) - 1)]
        fine = np.linspace(a, b, 4 * subdivisions + 1)
        ff = np.array([g(x) for x in fine])
        for j in _local_minima(ff):
            x = _golden(g, fine[j - 1], fine[j], fine[j + 1], refine_tol)
            if g(x) < tol and lo <= x <= hi:
                found.append(x)
    roots = []
    kind = "regular" if matrix in ("full", "regular") else matrix
    for x in _dedupe(found):
        sv = singular_values(x, theta1, slab, kind)
        roots.append(Root(x, max(int(np.sum(sv < np.sqrt(tol))), 1), matrix))
    close = [(r, t) for r, t in zip(roots, roots[1:]) if t.lam - r.lam < step]
    if close:
        warnings.warn(f"roots closer than the scan step {step} at theta1={theta1}; resolved by the "
                      f"fine rescan", stacklevel=2)
    return roots


def _dedupe(xs: list[float], rtol: float = 1e-7) -> list[float]:
    out: list[float] = []
    for x in sorted(xs):
        if out and abs(x - out[-1]) < rtol * max(1.0, abs(x)):
            continue
        out.append(x)
    return out


def root_values(roots: list[Root]) -> np.ndarray:
    """Root list expanded by multiplicity."""
    return np.array([r.lam for r in roots for _ in range(r.multiplicity)])


def block_roots(theta1: float, slab: SlabProblem, window=(-1.0, 200.0), step: float = 0.25) -> np.ndarray:
    """Union of the two polarisation root sets, with multiplicity."""
    vals = [root_values(find_roots(theta1, slab, window, step, m)) for m in ("tm", "te")]
    return np.sort(np.concatenate(vals))


def full_roots(theta1: float, slab: SlabProblem, window=(-1.0, 200.0), step: float = 0.25) -> np.ndarray:
    """Roots of the coupled 10x10 regular system, with multiplicity from the singular values."""
    return root_values(find_roots(theta1, slab, window, step, "regular"))


def trace_bands(slab: SlabProblem, thetas=None, window=(-1.0, 200.0), k_max: int | None = None,
                step: float = 0.25) -> BandStructure:
    """Ascending roots per theta1 (both polarisations, with multiplicity) as bands."""
    thetas = np.linspace(0.0, 1.0, 41) if thetas is None else np.asarray(thetas, dtype=float)
    per = [block_roots(t, slab, window, step) for t in thetas]
    counts = [len(r) for r in per]
    n = min(counts) if k_max is None else k_max
    if min(counts) < n:
        raise SpectrumError(f"only {min(counts)} roots in the window at some theta1; widen the window")
    if len(set(counts)) > 1:
        log.info("root count varies over theta1 (%s..%s); keeping %d bands", min(counts), max(counts), n)
    ev = np.array([r[:n] for r in per])
    return BandStructure(np.column_stack([thetas, np.zeros_like(thetas)]), ev, "slab1d",
                         {"a": slab.a, "b": slab.b, "eps0": slab.eps0, "eps1": slab.eps1, "window": list(window)})


def extract_gaps(bands: BandStructure) -> list[GapRecord]:
    return detect_gaps(bands)


def gap_edges(slab: SlabProblem, lam_max: float = 200.0, n: int = 20001) -> list[tuple[float, float]]:
    """Gap intervals of the union over theta1 of both polarisations' spectra, located from the
    scalar dispersion functions: a lam is in a band iff |D(lam)| <= 1 for some polarisation."""
    lam = np.linspace(0.0, lam_max, n)
    inband = np.zeros(n, dtype=bool)
    Ds = []
    for c in range(2):
        D = np.array([kronig_penney(x, slab, c) for x in lam])
        Ds.append(D)
        inband |= np.abs(D) <= 1.0
    gaps = []
    i = 0
    while i < n:
        if not inband[i]:
            j = i
            while j + 1 < n and not inband[j + 1]:
                j += 1
            if i > 0 and j < n - 1:
                lo = _edge(slab, lam[i - 1], lam[i])
                hi = _edge(slab, lam[j], lam[j + 1])
                gaps.append((lo, hi))
            i = j + 1
        else:
            i += 1
    return gaps


def _edge(slab: SlabProblem, x0: float, x1: float) -> float:
    """Band edge in [x0, x1]: where the smallest excess max(|D_c|) - 1 over components crosses 0."""
    def h(x):
        return min(abs(kronig_penney(x, slab, c)) for c in range(2)) - 1.0

    return float(optimize.brentq(h, x0, x1, xtol=1e-14, rtol=1e-15))
