"""Unit-cell geometry, materials and the axial-field reduction of Maxwell's equations.

The cell is Q = [0,1)^2 with an inclusion Q0 (high permittivity eps0) embedded in a
matrix Q1 = Q \\ Q0 (permittivity eps1).  Geometries are understood on the torus, so a
disc centred at the origin is a single inclusion per cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import special

from .errors import CriticalDispersionError, GeometryError, MaterialError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Disc:
    """Disc of radius ``radius`` centred at ``center`` (periodically extended)."""

    radius: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not 0.0 < self.radius < 0.5:
            raise GeometryError(f"disc radius must lie in (0, 1/2), got {self.radius}")

    @property
    def area(self) -> float:
        return np.pi * self.radius**2

    def fourier(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        rho = np.hypot(xi[..., 0], xi[..., 1])
        out = np.empty(rho.shape, dtype=complex)
        small = rho < 1e-14
        r = rho[~small]
        out[~small] = self.radius * special.j1(TWO_PI * self.radius * r) / r
        out[small] = self.area
        phase = np.exp(-1j * TWO_PI * (xi[..., 0] * self.center[0] + xi[..., 1] * self.center[1]))
        return out * phase

    def contains(self, y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
        d1 = (np.asarray(y1) - self.center[0] + 0.5) % 1.0 - 0.5
        d2 = (np.asarray(y2) - self.center[1] + 0.5) % 1.0 - 0.5
        return d1**2 + d2**2 < self.radius**2


@dataclass(frozen=True)
class Slab:
    """Inclusion [a, b] x [0, 1)."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not 0.0 < self.a < self.b < 1.0:
            raise GeometryError(f"slab needs 0 < a < b < 1, got a={self.a}, b={self.b}")

    @property
    def area(self) -> float:
        return self.b - self.a

    def fourier(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return _interval_ft(xi[..., 0], self.a, self.b) * _interval_ft(xi[..., 1], 0.0, 1.0)

    def contains(self, y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
        y1 = np.asarray(y1) % 1.0
        return (y1 >= self.a) & (y1 <= self.b) & np.ones_like(np.asarray(y2), dtype=bool)


@dataclass(frozen=True, eq=False)
class Raster:
    """Binary P x P raster over Q; cell (i, j) covers [i/P, (i+1)/P) x [j/P, (j+1)/P)."""

    mask: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.mask, dtype=bool)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GeometryError("raster must be a square 2-D array")
        p = m.shape[0]
        if p < 2 or p & (p - 1):
            raise GeometryError(f"raster size must be a power of two, got {p}")
        if not m.any() or m.all():
            raise GeometryError("raster must contain both phases")
        object.__setattr__(self, "mask", m)

    @property
    def size(self) -> int:
        return self.mask.shape[0]

    @property
    def area(self) -> float:
        return float(self.mask.sum()) / self.size**2

    def fourier(self, xi: np.ndarray) -> np.ndarray:
        # exact sum of per-cell integrals, no FFT
        xi = np.asarray(xi, dtype=float)
        shape = xi.shape[:-1]
        x1 = xi[..., 0].ravel()
        x2 = xi[..., 1].ravel()
        p = self.size
        h = 1.0 / p
        idx = np.arange(p)
        e1 = np.exp(-1j * TWO_PI * np.outer(x1, idx) * h)
        e2 = np.exp(-1j * TWO_PI * np.outer(x2, idx) * h)
        s = np.einsum("ni,ij,nj->n", e1, self.mask.astype(float), e2)
        cell = _cell_ft(x1, h) * _cell_ft(x2, h)
        return (s * cell).reshape(shape)

    def contains(self, y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
        p = self.size
        i = np.floor((np.asarray(y1) % 1.0) * p).astype(int) % p
        j = np.floor((np.asarray(y2) % 1.0) * p).astype(int) % p
        return self.mask[i, j]

    def __hash__(self) -> int:
        return hash(self.mask.tobytes())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Raster) and np.array_equal(self.mask, other.mask)


InclusionGeometry = Union[Disc, Slab, Raster]


def _interval_ft(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Integral of exp(-2 pi i x t) over t in [lo, hi]."""
    x = np.asarray(x, dtype=float)
    width = hi - lo
    mid = 0.5 * (lo + hi)
    return width * np.sinc(x * width) * np.exp(-1j * TWO_PI * x * mid)


def _cell_ft(x: np.ndarray, h: float) -> np.ndarray:
    return _interval_ft(x, 0.0, h)


def indicator_fourier(geometry: InclusionGeometry, n) -> np.ndarray | complex:
    """Fourier coefficient of the inclusion indicator, int_{Q0} exp(-2 pi i n.y) dy.

    ``n`` may be an integer 2-index, an array of shape (..., 2), or a real frequency
    (the latter gives the coefficient of the quasi-periodic extension of the indicator).
    """
    arr = np.asarray(n, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("frequency must have a trailing axis of length 2")
    out = geometry.fourier(arr)
    if arr.ndim == 1:
        return complex(out)
    return out


@dataclass(frozen=True)
class CellSpec:
    geometry: InclusionGeometry
    eps0: float
    eps1: float
    mu: float = 1.0

    def __post_init__(self) -> None:
        if not self.eps1 > 0.0:
            raise MaterialError(f"eps1 must be positive, got {self.eps1}")
        if not self.eps0 > self.eps1:
            raise MaterialError(f"high contrast requires eps0 > eps1, got eps0={self.eps0}, eps1={self.eps1}")
        if not self.mu > 0.0:
            raise MaterialError(f"mu must be positive, got {self.mu}")

    @property
    def gamma(self) -> float:
        return gamma(self)

    @property
    def inclusion_area(self) -> float:
        return self.geometry.area

    def scaled(self, s: float) -> "CellSpec":
        return CellSpec(self.geometry, self.eps0 * s, self.eps1 * s, self.mu)


def gamma(cell: CellSpec) -> float:
    """Contrast eps0/eps1 - 1."""
    if not cell.eps0 > cell.eps1:
        raise MaterialError("gamma requires eps0 > eps1")
    return cell.eps0 / cell.eps1 - 1.0


@dataclass(frozen=True)
class DispersionPair:
    omega2: float
    k2: float

    def __post_init__(self) -> None:
        if self.omega2 < 0 or self.k2 < 0:
            raise ValueError("omega2 and k2 must be non-negative")

    @property
    def omega(self) -> float:
        return float(np.sqrt(self.omega2))

    @property
    def k(self) -> float:
        return float(np.sqrt(self.k2))

    def is_admissible(self, cell: CellSpec) -> bool:
        return self.k2 < self.omega2 * cell.mu * min(cell.eps0, cell.eps1)

    def a_values(self, cell: CellSpec) -> tuple[float, float]:
        """Phase values (inclusion, matrix) of a = omega^2 eps mu - k^2."""
        return (
            self.omega2 * cell.eps0 * cell.mu - self.k2,
            self.omega2 * cell.eps1 * cell.mu - self.k2,
        )


CRITICAL_FLOOR = 1e-8


def _checked_a(pair: DispersionPair, cell: CellSpec, floor: float) -> tuple[float, float]:
    a0, a1 = pair.a_values(cell)
    for a, eps, name in ((a0, cell.eps0, "inclusion"), (a1, cell.eps1, "matrix")):
        if abs(a) <= floor * pair.omega2 * eps * cell.mu or a == 0.0:
            raise CriticalDispersionError(f"critical dispersion in the {name} phase: a = {a:.3e}")
    return a0, a1


@dataclass(frozen=True)
class TransverseFields:
    """Transverse components on the uniform grid y = (i/n, j/n)."""

    y1: np.ndarray
    y2: np.ndarray
    E1: np.ndarray
    E2: np.ndarray
    H1: np.ndarray
    H2: np.ndarray
    inclusion: np.ndarray = field(repr=False)


def phase_transverse(E3, H3, pair: DispersionPair, cell: CellSpec, phase: int,
                     floor: float = CRITICAL_FLOOR):
    """Transverse fields as Fourier fields, valid inside one phase (0 inclusion, 1 matrix)."""
    from .fourier import partial

    a0, a1 = _checked_a(pair, cell, floor)
    a = a0 if phase == 0 else a1
    eps = cell.eps0 if phase == 0 else cell.eps1
    k, w, mu = pair.k, pair.omega, cell.mu
    e1, e2 = partial(E3, 0), partial(E3, 1)
    h1, h2 = partial(H3, 0), partial(H3, 1)
    H1 = (1j * k * h1 - 1j * w * eps * e2) / a
    H2 = (1j * k * h2 + 1j * w * eps * e1) / a
    E1 = (1j * k * e1 + 1j * w * mu * h2) / a
    E2 = (1j * k * e2 - 1j * w * mu * h1) / a
    return E1, E2, H1, H2


def recover_transverse(E3, H3, pair: DispersionPair, cell: CellSpec, n: int | None = None,
                       floor: float = CRITICAL_FLOOR) -> TransverseFields:
    """Recover (E1, E2, H1, H2) from the axial fields on an n x n grid.

    The grid defaults to four times the Fourier cutoff per axis.
    """
    if E3.cutoff != H3.cutoff or E3.theta != H3.theta:
        raise ValueError("E3 and H3 must share theta and cutoff")
    if n is None:
        n = max(4 * E3.cutoff, 2 * E3.cutoff + 1)
    y = np.arange(n) / n
    y1, y2 = np.meshgrid(y, y, indexing="ij")
    inside = cell.geometry.contains(y1, y2)
    parts = [phase_transverse(E3, H3, pair, cell, p, floor) for p in (0, 1)]
    out = []
    for f0, f1 in zip(*parts):
        out.append(np.where(inside, f0.to_grid(n)[0], f1.to_grid(n)[0]))
    return TransverseFields(y1, y2, *out, inclusion=inside)


def maxwell_residuals(E3, H3, pair: DispersionPair, cell: CellSpec, phase: int,
                      n: int | None = None) -> np.ndarray:
    """Residuals of the six first-order equations inside one phase, on an n x n grid.

    Rows follow the order: H3,2 - ik H2 + iw eps E1; ik H1 - H3,1 + iw eps E2;
    H2,1 - H1,2 + iw eps E3; E3,2 - ik E2 - iw mu H1; ik E1 - E3,1 - iw mu H2;
    E2,1 - E1,2 - iw mu H3.  The third and sixth vanish only when the axial fields
    solve the axial Helmholtz system in that phase.
    """
    from .fourier import partial

    if n is None:
        n = max(4 * E3.cutoff, 2 * E3.cutoff + 1)
    E1, E2, H1, H2 = phase_transverse(E3, H3, pair, cell, phase)
    eps = cell.eps0 if phase == 0 else cell.eps1
    k, w, mu = pair.k, pair.omega, cell.mu
    res = [
        partial(H3, 1) - H2 * (1j * k) + E1 * (1j * w * eps),
        H1 * (1j * k) - partial(H3, 0) + E2 * (1j * w * eps),
        partial(H2, 0) - partial(H1, 1) + E3 * (1j * w * eps),
        partial(E3, 1) - E2 * (1j * k) - H1 * (1j * w * mu),
        E1 * (1j * k) - partial(E3, 0) - H2 * (1j * w * mu),
        partial(E2, 0) - partial(E1, 1) - H3 * (1j * w * mu),
    ]
    return np.stack([r.to_grid(n)[0] for r in res])


def beta_form(u, v, pair: DispersionPair, cell: CellSpec, floor: float = CRITICAL_FLOOR) -> complex:
    """The (omega, k) form beta(u, v) for 2-component fields u = (E3, H3), v.

    Phase integrals are evaluated exactly for trigonometric polynomials by indicator
    convolution.
    """
    from .fourier import partial, phase_inner

    if u.components != 2 or v.components != 2:
        raise ValueError("beta_form needs 2-component fields")
    a0, a1 = _checked_a(pair, cell, floor)
    k, w, mu = pair.k, pair.omega, cell.mu
    geom = cell.geometry
    du = [[partial(u.component(c), d) for d in range(2)] for c in range(2)]
    dv = [[partial(v.component(c), d) for d in range(2)] for c in range(2)]
    total = 0.0 + 0.0j
    for a, eps, inc in ((a0, cell.eps0, True), (a1, cell.eps1, False)):

        def ip(f, g):
            return phase_inner(f, g, geom, inclusion=inc)

        grad_part = eps * (ip(du[0][0], dv[0][0]) + ip(du[0][1], dv[0][1]))
        grad_part += mu * (ip(du[1][0], dv[1][0]) + ip(du[1][1], dv[1][1]))
        # {u1, conj v2} - {u2, conj v1} with {f, g} = f,1 g,2 - g,1 f,2
        bracket = (
            ip(du[0][0], dv[1][1]) - ip(du[0][1], dv[1][0])
            - ip(du[1][0], dv[0][1]) + ip(du[1][1], dv[0][0])
        )
        total += (w * w / a) * grad_part + (k * w / a) * bracket
    return complex(total)

