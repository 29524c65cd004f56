"""Limit eigenproblem on the constrained space V(theta).

Fields are parametrized by source potentials: for sources f1, f2 supported in the
inclusion, u = grad a + grad_perp b with Delta a = f1, Delta b = f2.  Then div u = f1 and
div u^perp = -f2 vanish in the matrix by construction, and the divergence part of the
stiffness is an exact Gram matrix of the sources.

The stiffness is evaluated in the form

    (1/2 + 1/gamma) (<f1, g1> + <f2, g2>) + 1/2 int_{Q0} (grad u1 . grad v1 - grad u2 . grad v2)

which equals int grad u1 . grad v1 + (1/gamma)(...) on V because grad u1 and grad u2 have
equal magnitude in the matrix.  Only the inclusion integral is truncated; it is evaluated
on the truncated fields exactly as in the finite-contrast solver, so that solver reduces to
this one as the contrast parameter tends to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .cell import CellSpec, gamma
from .errors import IndefiniteMassError, RankCollapseError, SpectrumError
from .fourier import BlochTheta, FourierField, convolver

TWO_PI = 2.0 * np.pi
GRAM_THRESHOLD = 1e-10


@dataclass(frozen=True)
class Lattice:
    """Mode set exp(2 pi i (theta + q).y / N) for q in a box, on the torus [0,N1) x [0,N2)."""

    theta: BlochTheta
    period: tuple[int, int]
    lo: tuple[int, int]
    hi: tuple[int, int]

    @classmethod
    def cell(cls, theta: BlochTheta, cutoff: int) -> "Lattice":
        return cls(theta, (1, 1), (-cutoff, -cutoff), (cutoff, cutoff))

    @classmethod
    def multicell(cls, N: tuple[int, int], cutoff: int) -> "Lattice":
        # union of the per-theta boxes N z + j, z in [-M, M]^2, j in [0, N)
        lo = (-N[0] * cutoff, -N[1] * cutoff)
        hi = (N[0] * cutoff + N[0] - 1, N[1] * cutoff + N[1] - 1)
        return cls(BlochTheta((0.0, 0.0)), tuple(N), lo, hi)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.hi[0] - self.lo[0] + 1, self.hi[1] - self.lo[1] + 1)

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        return np.arange(self.lo[0], self.hi[0] + 1), np.arange(self.lo[1], self.hi[1] + 1)

    def wavevectors(self) -> tuple[np.ndarray, np.ndarray]:
        q1, q2 = self.indices()
        k1 = TWO_PI * (self.theta.theta[0] + q1) / self.period[0]
        k2 = TWO_PI * (self.theta.theta[1] + q2) / self.period[1]
        return np.meshgrid(k1, k2, indexing="ij")

    def zero_index(self) -> tuple[int, int] | None:
        if not self.theta.is_zero:
            return None
        return (-self.lo[0], -self.lo[1])

    def convolver(self, geometry):
        return convolver(geometry, self.shape, self.period)


@dataclass(frozen=True)
class MulticellIndex:
    """Size (N1, N2) of the torus [0,N1) x [0,N2) carrying one inclusion per unit cell."""

    N: tuple[int, int]

    def __post_init__(self) -> None:
        N = tuple(int(n) for n in self.N)
        if len(N) != 2 or N[0] < 1 or N[1] < 1:
            raise ValueError("multicell index must be a pair of positive integers")
        object.__setattr__(self, "N", N)

    @property
    def n_cells(self) -> int:
        return self.N[0] * self.N[1]

    def quasi_momenta(self) -> np.ndarray:
        """The folded theta values j / N, j in [0, N), row-major."""
        j1, j2 = np.meshgrid(np.arange(self.N[0]) / self.N[0], np.arange(self.N[1]) / self.N[1],
                             indexing="ij")
        return np.stack([j1.ravel(), j2.ravel()], axis=1)


@dataclass(frozen=True, eq=False)
class ConstrainedBasis:
    """Spanning set of V(theta): potential fields (plus constants when periodic).

    ``fields`` has shape (n_fields, 2, P1, P2).  Rows are ordered: gradient fields of all
    sources, then perpendicular-gradient fields of all sources, then constants.
    ``transform`` maps reduced coordinates to field coordinates and is orthonormal for the
    H1 Gram matrix.
    """

    theta: BlochTheta
    cutoff: int
    source_cutoff: int
    lattice: Lattice
    geometry: object
    sources: np.ndarray  # (n_src, 2) lattice indices p of chi0 exp(2 pi i (theta + p).y / N)
    source_matrix: np.ndarray  # (n_src, n_raw) combination of raw sources (mean projection)
    source_gram: np.ndarray  # exact <f_t, f_s> for the combined sources
    fields: np.ndarray
    n_constants: int
    gram: np.ndarray
    transform: np.ndarray
    gram_eigenvalues: np.ndarray = field(repr=False)

    @property
    def n_fields(self) -> int:
        return self.fields.shape[0]

    @property
    def n_sources(self) -> int:
        return self.sources.shape[0]

    @property
    def dimension(self) -> int:
        return self.transform.shape[1]

    def field(self, i: int) -> FourierField:
        """Basis field i as a FourierField (single-cell lattices only)."""
        if self.lattice.period != (1, 1):
            raise ValueError("multicell fields are not FourierFields")
        return FourierField(self.theta, self.cutoff, self.fields[i])

    def divergence_data(self) -> tuple[np.ndarray, np.ndarray]:
        """Source coefficients of div u and div u^perp per field, in raw-source coordinates."""
        ns = self.n_sources
        d = np.zeros((self.n_fields, ns), dtype=complex)
        dp = np.zeros((self.n_fields, ns), dtype=complex)
        d[:ns] = np.eye(ns)
        dp[ns : 2 * ns] = -np.eye(ns)
        return d, dp


def _raw_source_indices(lattice: Lattice, m: int) -> np.ndarray:
    n1, n2 = lattice.period
    out = []
    for j1 in range(n1):
        for j2 in range(n2):
            for a in range(-m, m + 1):
                for b in range(-m, m + 1):
                    out.append((n1 * a + j1, n2 * b + j2))
    return np.array(out, dtype=int)


def _source_coefficients(lattice: Lattice, conv, sources: np.ndarray) -> np.ndarray:
    """Coefficients chat_N(q - p) of chi0 exp(2 pi i (theta + p).y / N) on the box."""
    q1, q2 = lattice.indices()
    p1, p2 = lattice.shape
    out = np.empty((len(sources), p1, p2), dtype=complex)
    for s, (a, b) in enumerate(sources):
        i1 = q1 - a + p1 - 1
        i2 = q2 - b + p2 - 1
        ok1 = (i1 >= 0) & (i1 < 2 * p1 - 1)
        ok2 = (i2 >= 0) & (i2 < 2 * p2 - 1)
        block = np.zeros((p1, p2), dtype=complex)
        block[np.ix_(ok1, ok2)] = conv.kernel[np.ix_(i1[ok1], i2[ok2])]
        out[s] = block
    return out


def _exact_chat(geometry, period, d: np.ndarray) -> np.ndarray:
    """chat_N(d) for integer differences d (..., 2)."""
    n1, n2 = period
    mask = (d[..., 0] % n1 == 0) & (d[..., 1] % n2 == 0)
    out = np.zeros(d.shape[:-1], dtype=complex)
    xi = np.stack([d[..., 0] / n1, d[..., 1] / n2], axis=-1)
    out[mask] = geometry.fourier(xi[mask])
    return out


def build_lattice_basis(lattice: Lattice, cell: CellSpec, cutoff: int, source_cutoff: int,
                        threshold: float = GRAM_THRESHOLD) -> ConstrainedBasis:
    geometry = cell.geometry
    conv = lattice.convolver(geometry)
    raw = _raw_source_indices(lattice, source_cutoff)
    n_raw = len(raw)
    periodic = lattice.theta.is_zero
    area = geometry.area

    # exact raw Gram <f_r, f_r'> = chat(p_r' - p_r)
    diff = raw[None, :, :] - raw[:, None, :]  # [r', r] -> p_r' - p_r ... indexed [s, t]
    g_raw = _exact_chat(geometry, lattice.period, diff)  # g_raw[s, t] = <f_t, f_s>

    if periodic:
        # subtract mean: f~_r = f_r - (mean f_r / |Q0|) f_0
        zero = int(np.flatnonzero((raw[:, 0] == 0) & (raw[:, 1] == 0))[0])
        means = _exact_chat(geometry, lattice.period, -raw)
        keep = [r for r in range(n_raw) if r != zero]
        S = np.zeros((len(keep), n_raw), dtype=complex)
        for row, r in enumerate(keep):
            S[row, r] = 1.0
            S[row, zero] -= means[r] / area
        sources = raw[keep]
    else:
        S = np.eye(n_raw, dtype=complex)
        sources = raw
    # <f~_t, f~_s> = sum S[t, r] conj(S[s, r']) <f_r, f_r'>
    src_gram = S.conj() @ g_raw @ S.T
    src_gram = 0.5 * (src_gram + src_gram.conj().T)

    raw_coef = _source_coefficients(lattice, conv, raw)
    coef = np.tensordot(S, raw_coef, axes=(1, 0))
    k1, k2 = lattice.wavevectors()
    lam = k1**2 + k2**2
    zi = lattice.zero_index()
    if zi is not None:
        lam = lam.copy()
        lam[zi] = 1.0
        coef[:, zi[0], zi[1]] = 0.0
    pot = -coef / lam  # Delta a = f  ->  a_q = -f_q / lambda_q
    ns = len(sources)
    nc = 2 if periodic else 0
    p1, p2 = lattice.shape
    fields = np.zeros((2 * ns + nc, 2, p1, p2), dtype=complex)
    fields[:ns, 0] = 1j * k1 * pot
    fields[:ns, 1] = 1j * k2 * pot
    fields[ns : 2 * ns, 0] = -1j * k2 * pot
    fields[ns : 2 * ns, 1] = 1j * k1 * pot
    if periodic:
        fields[2 * ns, 0][zi] = 1.0
        fields[2 * ns + 1, 1][zi] = 1.0

    # H1 Gram: L2 by Parseval, gradient part exact (= source Gram)
    flat = fields.reshape(len(fields), -1)
    gram = flat.conj() @ flat.T
    gram[:ns, :ns] += src_gram
    gram[ns : 2 * ns, ns : 2 * ns] += src_gram
    gram = 0.5 * (gram + gram.conj().T)
    w, V = linalg.eigh(gram)
    keep = w > threshold * w[-1]
    if keep.sum() < 2:
        raise RankCollapseError(f"only {int(keep.sum())} independent fields survive filtering")
    T = V[:, keep] / np.sqrt(w[keep])
    return ConstrainedBasis(
        theta=lattice.theta,
        cutoff=cutoff,
        source_cutoff=source_cutoff,
        lattice=lattice,
        geometry=geometry,
        sources=sources,
        source_matrix=S,
        source_gram=src_gram,
        fields=fields,
        n_constants=nc,
        gram=gram,
        transform=T,
        gram_eigenvalues=w,
    )


def build_V_basis(theta, cell: CellSpec, cutoff: int = 32, source_cutoff: int = 4,
                  threshold: float = GRAM_THRESHOLD) -> ConstrainedBasis:
    """Basis of V(theta) from sources chi0 exp(2 pi i (theta + n).y), |n|_inf <= m."""
    theta = BlochTheta.of(theta)
    return build_lattice_basis(Lattice.cell(theta, cutoff), cell, cutoff, source_cutoff, threshold)


def field_gradients(basis: ConstrainedBasis) -> np.ndarray:
    """d_j u_c for every field, shape (n, 2, 2, P1, P2) indexed [field, c, j]."""
    k1, k2 = basis.lattice.wavevectors()
    u = basis.fields
    return np.stack([1j * k1 * u, 1j * k2 * u], axis=2)


def inclusion_gram(conv, a: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    """M[i, j] = int chi0 a_j conj(b_i) for stacked coefficient arrays (n, P1, P2)."""
    if b is None:
        b = a
    ta = conv.apply(a).reshape(len(a), -1)
    return b.reshape(len(b), -1).conj() @ ta.T


def _hermitian(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.conj().T)


def assemble_limit_forms(basis: ConstrainedBasis, cell: CellSpec) -> tuple[np.ndarray, np.ndarray]:
    """Stiffness K and mass B in field coordinates (before Gram reduction)."""
    g = gamma(cell)
    conv = basis.lattice.convolver(cell.geometry)
    ns = basis.n_sources
    n = basis.n_fields
    K = np.zeros((n, n), dtype=complex)
    K[:ns, :ns] = (0.5 + 1.0 / g) * basis.source_gram
    K[ns : 2 * ns, ns : 2 * ns] = (0.5 + 1.0 / g) * basis.source_gram
    du = field_gradients(basis)
    for j in range(2):
        K += 0.5 * inclusion_gram(conv, du[:, 0, j])
        K -= 0.5 * inclusion_gram(conv, du[:, 1, j])
    flat = basis.fields.reshape(n, -1)
    B = flat.conj() @ flat.T + g * inclusion_gram(conv, basis.fields[:, 0])
    B *= cell.eps1
    return _hermitian(K), _hermitian(B)


@dataclass(frozen=True, eq=False)
class Spectrum:
    theta: BlochTheta
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None
    resolution: dict = field(default_factory=dict)
    eps: float | None = None

    def to_dict(self) -> dict:
        out = {
            "theta": list(self.theta.theta),
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "resolution": dict(self.resolution),
        }
        if self.eps is not None:
            out["eps"] = self.eps
        return out


def reduced_eigh(K: np.ndarray, B: np.ndarray, T: np.ndarray, k_max: int):
    """Solve K x = lam B x on the range of T by Cholesky reduction of T* B T."""
    Kr = _hermitian(T.conj().T @ K @ T)
    Br = _hermitian(T.conj().T @ B @ T)
    if k_max > Kr.shape[0]:
        raise ValueError(f"k_max={k_max} exceeds basis dimension {Kr.shape[0]}")
    try:
        L = linalg.cholesky(Br, lower=True)
    except linalg.LinAlgError as exc:
        raise IndefiniteMassError("mass matrix is not positive definite") from exc
    Li_K = linalg.solve_triangular(L, Kr, lower=True)
    C = linalg.solve_triangular(L, Li_K.conj().T, lower=True).conj().T
    C = _hermitian(C)
    try:
        w, Y = linalg.eigh(C, subset_by_index=[0, k_max - 1])
    except linalg.LinAlgError as exc:
        raise SpectrumError(str(exc)) from exc
    X = T @ linalg.solve_triangular(L, Y, lower=True, trans="C")
    return w, X


def _clean(w: np.ndarray, K: np.ndarray) -> np.ndarray:
    # rounding-level negatives of a semidefinite form
    scale = max(np.abs(w).max(), 1.0)
    return np.where(np.abs(w) < 1e-12 * scale, 0.0, w)


def solve_limit_spectrum(theta, cell: CellSpec, k_max: int = 6, cutoff: int = 32,
                         source_cutoff: int = 4, threshold: float = GRAM_THRESHOLD) -> Spectrum:
    basis = build_V_basis(theta, cell, cutoff, source_cutoff, threshold)
    K, B = assemble_limit_forms(basis, cell)
    w, X = reduced_eigh(K, B, basis.transform, k_max)
    return Spectrum(
        basis.theta,
        _clean(w, K),
        X,
        {"cutoff": cutoff, "source_cutoff": source_cutoff, "dimension": basis.dimension},
    )


def solve_multicell_spectrum(N, cell: CellSpec, k_max: int = 6, cutoff: int = 32,
                             source_cutoff: int = 4, threshold: float = GRAM_THRESHOLD) -> Spectrum:
    """Periodic limit problem on the torus [0,N1) x [0,N2) with one inclusion per cell.

    The mode and source sets are the unions of the single-cell sets at theta = j/N, so the
    resolution matches single-cell solves at the same cutoffs.
    """
    N = (N if isinstance(N, MulticellIndex) else MulticellIndex(tuple(N))).N
    lattice = Lattice.multicell(N, cutoff)
    basis = build_lattice_basis(lattice, cell, cutoff, source_cutoff, threshold)
    K, B = assemble_limit_forms(basis, cell)
    w, X = reduced_eigh(K, B, basis.transform, k_max)
    return Spectrum(
        basis.theta,
        _clean(w, K),
        X,
        {"cutoff": cutoff, "source_cutoff": source_cutoff, "dimension": basis.dimension, "N": list(N)},
    )


def limit_eigenfields(theta, cell: CellSpec, k_max: int = 6, cutoff: int = 32, source_cutoff: int = 4,
                      threshold: float = GRAM_THRESHOLD):
    """Spectrum plus the Fourier coefficients of its eigenfields.

    Returns (spectrum, (z1, z2), coeffs) with coeffs of shape (k_max, 2, 2M+1, 2M+1).
    """
    basis = build_V_basis(theta, cell, cutoff, source_cutoff, threshold)
    K, B = assemble_limit_forms(basis, cell)
    w, X = reduced_eigh(K, B, basis.transform, k_max)
    coeffs = np.einsum("nk,ncij->kcij", X, basis.fields)
    sp = Spectrum(basis.theta, _clean(w, K), X,
                  {"cutoff": cutoff, "source_cutoff": source_cutoff, "dimension": basis.dimension})
    return sp, basis.lattice.indices(), coeffs
