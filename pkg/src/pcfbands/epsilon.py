"""High-contrast Bloch-cell eigenproblem at finite contrast parameter eps.

The cell form is

    (1/eps^2) int_{Q1} A1 grad u : grad v + 1/(eps0 - eps1 + eps^2) int_{Q0} A0 grad u : grad v

with mass rho = chi1 I + chi0 diag(eps0/eps1, 1).  With the gradient ordered as
(u1_1, u2_1, u1_2, u2_2) (u_c,d = d u_c / d y_d), the tensors act as

    A1 g.g = (1 - s)|grad u|^2 + s(|div u|^2 + |div u^perp|^2),   s = sqrt(1 - eps^2/eps1)
    A0 g.g = A1 g.g + gamma |grad u1|^2.

Trig polynomials cannot satisfy div u = div u^perp = 0 on an open set unless constant, so a
pure plane-wave space locks as eps -> 0.  The default trial space therefore joins low-order
plane waves with the constrained potential fields of the limit problem.  Every integral that
admits an exact value is evaluated exactly; the only truncated terms are inclusion integrals
of gradients of potential fields.  At eps -> 0 the potential-field block reduces to the limit
stiffness divided by eps1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from .cell import CellSpec, gamma
from .errors import ParameterRangeError, RankCollapseError
from .fourier import BlochTheta
from .limit import (
    GRAM_THRESHOLD,
    Lattice,
    Spectrum,
    _clean,
    _hermitian,
    build_lattice_basis,
    reduced_eigh,
)

# gradient ordering (u1_1, u2_1, u1_2, u2_2) -> (component c, derivative d)
GRADIENT_ORDER = ((0, 0), (1, 0), (0, 1), (1, 1))


def _tensor(s: float, diag: tuple[float, float]) -> np.ndarray:
    a, b = diag
    return np.array([
        [a, 0.0, 0.0, s],
        [0.0, b, -s, 0.0],
        [0.0, -s, a, 0.0],
        [s, 0.0, 0.0, b],
    ])


@dataclass(frozen=True)
class EpsilonTensors:
    eps: float
    eps0: float
    eps1: float

    @classmethod
    def of(cls, eps: float, cell: CellSpec) -> "EpsilonTensors":
        check_eps(eps, cell)
        return cls(float(eps), cell.eps0, cell.eps1)

    @property
    def s(self) -> float:
        return float(np.sqrt(1.0 - self.eps**2 / self.eps1))

    @property
    def A1(self) -> np.ndarray:
        return _tensor(self.s, (1.0, 1.0))

    @property
    def A0(self) -> np.ndarray:
        r = self.eps0 / self.eps1
        return _tensor(self.s, (r, 1.0))

    @property
    def pref1(self) -> float:
        return 1.0 / self.eps**2

    @property
    def pref0(self) -> float:
        return 1.0 / (self.eps0 - self.eps1 + self.eps**2)

    def scaled(self) -> tuple[np.ndarray, np.ndarray]:
        """eps^2 times the cell tensors: (chi1 part, chi0 part)."""
        return self.A1, self.eps**2 * self.pref0 * self.A0


def eps_max(cell: CellSpec) -> float:
    return 0.5 * min(np.sqrt(cell.eps1), np.sqrt(cell.eps0 - cell.eps1))


def check_eps(eps: float, cell: CellSpec) -> None:
    bound = eps_max(cell)
    if not (0.0 < eps <= bound):
        raise ParameterRangeError(f"eps={eps} outside (0, {bound:.6g}]")


def degenerate_tensors(cell: CellSpec) -> tuple[np.ndarray, np.ndarray]:
    """Leading and eps^2 tensors of the expansion: (a1 on Q1, a0 on Q1, a0 on Q0)."""
    a1 = _tensor(1.0, (1.0, 1.0))
    flip = np.array([
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
    ])
    a0_q1 = flip / (2.0 * cell.eps1)
    a0_q0 = _tensor(1.0, (cell.eps0 / cell.eps1, 1.0)) / (cell.eps0 - cell.eps1)
    return a1, a0_q1, a0_q0


def rho_tensor(cell: CellSpec) -> tuple[np.ndarray, np.ndarray]:
    return np.eye(2), np.diag([cell.eps0 / cell.eps1, 1.0])


@dataclass(frozen=True, eq=False)
class _Pieces:
    """Integrals needed by the stiffness, in field coordinates."""

    grad_q: np.ndarray  # int_Q grad u : grad v
    grad_q0: np.ndarray  # int_Q0 grad u : grad v
    grad1_q0: np.ndarray  # int_Q0 grad u1 . grad v1
    div_q: np.ndarray  # int_Q div div + div_perp div_perp
    div_q0: np.ndarray  # same over Q0
    mass: np.ndarray  # int rho u . v


@dataclass(frozen=True, eq=False)
class EpsilonBasis:
    """Plane waves e_c exp(2 pi i (theta + q).y), |q|_inf <= plane_wave_cutoff, followed by
    constrained potential fields on the cutoff box (when source_cutoff is not None)."""

    theta: BlochTheta
    cutoff: int
    plane_wave_cutoff: int
    source_cutoff: int | None
    lattice: Lattice
    modes: np.ndarray  # (nP, 3): component, q1, q2
    potential: object  # ConstrainedBasis or None
    n_potential: int
    gram: np.ndarray
    transform: np.ndarray
    pieces: _Pieces | None = None

    @property
    def n_plane(self) -> int:
        return len(self.modes)

    @property
    def n_fields(self) -> int:
        return self.n_plane + self.n_potential

    @property
    def dimension(self) -> int:
        return self.transform.shape[1]

    def coefficients(self, x: np.ndarray) -> np.ndarray:
        """Fourier coefficients (2, P1, P2) of the field with basis coordinates x."""
        M = self.cutoff
        out = np.zeros((2,) + self.lattice.shape, dtype=complex)
        for (c, a, b), w in zip(self.modes, x[: self.n_plane]):
            out[c, a + M, b + M] += w
        if self.n_potential:
            out += np.tensordot(x[self.n_plane :], self.potential.fields[: self.n_potential], axes=(0, 0))
        return out


def _plane_modes(M: int) -> np.ndarray:
    r = np.arange(-M, M + 1)
    Q1, Q2 = np.meshgrid(r, r, indexing="ij")
    q = np.stack([Q1.ravel(), Q2.ravel()], axis=1)
    return np.concatenate([
        np.column_stack([np.zeros(len(q), int), q]),
        np.column_stack([np.ones(len(q), int), q]),
    ])


def _divergences(fields: np.ndarray, k1: np.ndarray, k2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u1, u2 = fields[:, 0], fields[:, 1]
    div = 1j * k1 * u1 + 1j * k2 * u2
    divp = -1j * k1 * u2 + 1j * k2 * u1
    return div, divp


def _plane_symbols(modes: np.ndarray, theta) -> tuple[np.ndarray, ...]:
    k1 = 2 * np.pi * (theta[0] + modes[:, 1])
    k2 = 2 * np.pi * (theta[1] + modes[:, 2])
    c = modes[:, 0]
    # div and div_perp symbols of e_c e^{ik.y}
    div = np.where(c == 0, 1j * k1, 1j * k2)
    divp = np.where(c == 0, 1j * k2, -1j * k1)
    return k1, k2, div, divp


def _assemble_pieces(basis: EpsilonBasis, cell: CellSpec) -> _Pieces:
    g = gamma(cell)
    lat = basis.lattice
    M = basis.cutoff
    conv = lat.convolver(cell.geometry)
    modes = basis.modes
    nP = basis.n_plane
    nV = basis.n_potential
    n = nP + nV
    pk1, pk2, pdiv, pdivp = _plane_symbols(modes, lat.theta.theta)
    plam = pk1**2 + pk2**2
    pc = modes[:, 0]

    # plane-plane blocks: exact, chi0 coupling is chat(q - q')
    d = modes[:, None, 1:] - modes[None, :, 1:]
    chat = conv.kernel[d[..., 0] + lat.shape[0] - 1, d[..., 1] + lat.shape[1] - 1]
    same = pc[:, None] == pc[None, :]
    kk = pk1[:, None] * pk1[None, :] + pk2[:, None] * pk2[None, :]
    first = (pc[:, None] == 0) & (pc[None, :] == 0)
    eye = np.eye(nP)

    grad_q = np.zeros((n, n), dtype=complex)
    grad_q0 = np.zeros_like(grad_q)
    grad1_q0 = np.zeros_like(grad_q)
    div_q0 = np.zeros_like(grad_q)
    mass = np.zeros_like(grad_q)

    grad_q[:nP, :nP] = eye * plam
    grad_q0[:nP, :nP] = same * kk * chat
    grad1_q0[:nP, :nP] = first * kk * chat
    div_q0[:nP, :nP] = (pdiv.conj()[:, None] * pdiv[None, :] + pdivp.conj()[:, None] * pdivp[None, :]) * chat
    mass[:nP, :nP] = eye + g * first * chat

    if nV:
        cb = basis.potential
        ns = cb.n_sources
        fields = cb.fields[:nV]
        k1, k2 = lat.wavevectors()
        flat = fields.reshape(nV, 2, -1)
        grads = np.stack([1j * k1 * fields, 1j * k2 * fields], axis=2)  # [v, c, d]
        div, divp = _divergences(fields, k1, k2)
        cgrad = conv.apply(grads)
        cu1 = conv.apply(fields[:, 0])

        # potential-potential blocks
        src = np.zeros((nV, nV), dtype=complex)
        src[:ns, :ns] = cb.source_gram
        src[ns : 2 * ns, ns : 2 * ns] = cb.source_gram
        vv = slice(nP, n)
        grad_q[vv, vv] = src
        div_q0[vv, vv] = src
        g0 = np.zeros((nV, nV), dtype=complex)
        for c in range(2):
            for dd in range(2):
                g0 += grads[:, c, dd].reshape(nV, -1).conj() @ cgrad[:, c, dd].reshape(nV, -1).T
        grad_q0[vv, vv] = g0
        g1 = np.zeros((nV, nV), dtype=complex)
        for dd in range(2):
            g1 += grads[:, 0, dd].reshape(nV, -1).conj() @ cgrad[:, 0, dd].reshape(nV, -1).T
        grad1_q0[vv, vv] = g1
        mass[vv, vv] = flat[:, 0].conj() @ flat[:, 0].T + flat[:, 1].conj() @ flat[:, 1].T
        mass[vv, vv] += g * (fields[:, 0].reshape(nV, -1).conj() @ cu1.reshape(nV, -1).T)

        # plane rows against potential columns: read coefficients at the plane mode
        i1 = modes[:, 1] + M
        i2 = modes[:, 2] + M
        at = lambda arr: arr[..., i1, i2]  # noqa: E731
        uval = fields[:, pc, i1, i2].T  # (nP, nV): u_{v, c(p)} at q(p)
        grad_q[:nP, vv] = plam[:, None] * uval
        cg = cgrad[:, pc, :, i1, i2]  # separated advanced indices: (nP, nV, 2)
        row = -1j * pk1[:, None] * cg[..., 0] - 1j * pk2[:, None] * cg[..., 1]
        grad_q0[:nP, vv] = row
        grad1_q0[:nP, vv] = row * (pc == 0)[:, None]
        # div of a potential field lives in Q0, so its Q0 pairing is the whole-cell one
        div_q0[:nP, vv] = (pdiv.conj()[:, None] * at(div).T + pdivp.conj()[:, None] * at(divp).T)
        mass[:nP, vv] = uval + g * ((pc == 0)[:, None] * at(cu1).T)
        for A in (grad_q, grad_q0, grad1_q0, div_q0, mass):
            A[vv, :nP] = A[:nP, vv].conj().T

    return _Pieces(
        grad_q=_hermitian(grad_q),
        grad_q0=_hermitian(grad_q0),
        grad1_q0=_hermitian(grad1_q0),
        div_q=_hermitian(grad_q),
        div_q0=_hermitian(div_q0),
        mass=_hermitian(mass),
    )


def build_epsilon_basis(theta, cell: CellSpec, cutoff: int = 32, plane_wave_cutoff: int | None = None,
                        source_cutoff: int | None = 4,
                        threshold: float = GRAM_THRESHOLD) -> EpsilonBasis:
    theta = BlochTheta.of(theta)
    if plane_wave_cutoff is None:
        plane_wave_cutoff = cutoff if source_cutoff is None else max(2, cutoff // 4)
    if plane_wave_cutoff > cutoff:
        raise ValueError("plane_wave_cutoff must not exceed cutoff")
    lattice = Lattice.cell(theta, cutoff)
    modes = _plane_modes(plane_wave_cutoff)
    potential = None
    nV = 0
    if source_cutoff is not None:
        potential = build_lattice_basis(lattice, cell, cutoff, source_cutoff)
        # constants are already plane waves
        nV = potential.n_fields - potential.n_constants
    basis = EpsilonBasis(theta, cutoff, plane_wave_cutoff, source_cutoff, lattice, modes, potential, nV,
                         np.empty((0, 0)), np.empty((0, 0)))
    pieces = _assemble_pieces(basis, cell)
    # H1 Gram: L2 part plus the exact whole-cell gradient energy
    gram = _hermitian(_l2_gram(basis) + pieces.grad_q)
    w, V = linalg.eigh(gram)
    keep = w > threshold * w[-1]
    if keep.sum() < 2:
        raise RankCollapseError(f"only {int(keep.sum())} independent fields survive filtering")
    T = V[:, keep] / np.sqrt(w[keep])
    return replace(basis, gram=gram, transform=T, pieces=pieces)


def _l2_gram(basis: EpsilonBasis) -> np.ndarray:
    nP, nV = basis.n_plane, basis.n_potential
    n = nP + nV
    G = np.zeros((n, n), dtype=complex)
    G[:nP, :nP] = np.eye(nP)
    if nV:
        M = basis.cutoff
        fields = basis.potential.fields[:nV]
        flat = fields.reshape(nV, -1)
        G[nP:, nP:] = flat.conj() @ flat.T
        m = basis.modes
        uval = fields[:, m[:, 0], m[:, 1] + M, m[:, 2] + M].T
        G[:nP, nP:] = uval
        G[nP:, :nP] = uval.conj().T
    return G


def _pieces(basis: EpsilonBasis, cell: CellSpec) -> _Pieces:
    return basis.pieces if basis.pieces is not None else _assemble_pieces(basis, cell)


def epsilon_stiffness(pieces: _Pieces, tensors: EpsilonTensors, g: float) -> np.ndarray:
    s = tensors.s
    q1 = (1.0 - s) * (pieces.grad_q - pieces.grad_q0) + s * (pieces.div_q - pieces.div_q0)
    q0 = g * pieces.grad1_q0 + (1.0 - s) * pieces.grad_q0 + s * pieces.div_q0
    return _hermitian(tensors.pref1 * q1 + tensors.pref0 * q0)


def assemble_epsilon_forms(eps: float, theta, cell: CellSpec, cutoff: int = 32,
                           plane_wave_cutoff: int | None = None, source_cutoff: int | None = 4,
                           basis: EpsilonBasis | None = None) -> tuple[np.ndarray, np.ndarray, EpsilonBasis]:
    """Stiffness K_eps and mass B_rho in field coordinates, with the basis used."""
    tensors = EpsilonTensors.of(eps, cell)
    if basis is None:
        basis = build_epsilon_basis(theta, cell, cutoff, plane_wave_cutoff, source_cutoff)
    pieces = _pieces(basis, cell)
    K = epsilon_stiffness(pieces, tensors, gamma(cell))
    return K, pieces.mass, basis


def constraint_energy(basis: EpsilonBasis, cell: CellSpec, x: np.ndarray) -> float:
    """int_{Q1} |div u|^2 + |div u^perp|^2, the a1-energy of the field with coordinates x."""
    p = _pieces(basis, cell)
    return float(np.real(x.conj() @ (p.div_q - p.div_q0) @ x))


def solve_epsilon_spectrum(eps: float, theta, cell: CellSpec, k_max: int = 6, cutoff: int = 32,
                           plane_wave_cutoff: int | None = None, source_cutoff: int | None = 4,
                           basis: EpsilonBasis | None = None) -> Spectrum:
    K, B, basis = assemble_epsilon_forms(eps, theta, cell, cutoff, plane_wave_cutoff, source_cutoff, basis)
    w, X = reduced_eigh(K, B, basis.transform, k_max)
    return Spectrum(
        basis.theta,
        _clean(w, K),
        X,
        {
            "cutoff": cutoff,
            "plane_wave_cutoff": basis.plane_wave_cutoff,
            "source_cutoff": source_cutoff,
            "dimension": basis.dimension,
        },
        eps=float(eps),
    )
