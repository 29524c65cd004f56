"""Truncated theta-quasi-periodic Fourier fields on the unit cell.

A field is sum_z c_z exp(2 pi i (theta + z).y) with z in {-M..M}^2; derivatives act
diagonally with multiplier 2 pi i (theta + z).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import fft as sfft

from .errors import NonSolvableError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class BlochTheta:
    theta: tuple[float, float]

    def __post_init__(self) -> None:
        t = tuple(float(x) % 1.0 for x in self.theta)
        t = tuple(0.0 if x == 1.0 else x for x in t)
        object.__setattr__(self, "theta", t)

    @classmethod
    def of(cls, theta) -> "BlochTheta":
        return theta if isinstance(theta, BlochTheta) else cls(tuple(theta))

    @property
    def is_zero(self) -> bool:
        return self.theta == (0.0, 0.0)

    def array(self) -> np.ndarray:
        return np.array(self.theta)

    def min_image_norm(self) -> float:
        """min over integer z of |theta + z|."""
        t = np.array(self.theta)
        t = np.minimum(t, 1.0 - t)
        return float(np.hypot(*t))


def mode_indices(cutoff: int) -> np.ndarray:
    return np.arange(-cutoff, cutoff + 1)


def wavevectors(theta: BlochTheta, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """(k1, k2) = 2 pi (theta + z) on the (2M+1) x (2M+1) mode grid."""
    z = mode_indices(cutoff)
    k1 = TWO_PI * (theta.theta[0] + z)
    k2 = TWO_PI * (theta.theta[1] + z)
    return np.meshgrid(k1, k2, indexing="ij")


@dataclass(frozen=True, eq=False)
class FourierField:
    theta: BlochTheta
    cutoff: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=complex)
        p = 2 * self.cutoff + 1
        if c.ndim == 2:
            c = c[None]
        if c.shape[1:] != (p, p) or c.shape[0] not in (1, 2):
            raise ValueError(f"coefficient array shape {c.shape} does not match cutoff {self.cutoff}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "theta", BlochTheta.of(self.theta))

    # construction
    @classmethod
    def zeros(cls, theta, cutoff: int, components: int = 1) -> "FourierField":
        p = 2 * cutoff + 1
        return cls(BlochTheta.of(theta), cutoff, np.zeros((components, p, p), dtype=complex))

    @classmethod
    def mode(cls, theta, cutoff: int, z: tuple[int, int], component_values=(1.0,)) -> "FourierField":
        """Single plane wave exp(2 pi i (theta + z).y) times the given component amplitudes."""
        f = np.zeros((len(component_values), 2 * cutoff + 1, 2 * cutoff + 1), dtype=complex)
        f[:, z[0] + cutoff, z[1] + cutoff] = component_values
        return cls(BlochTheta.of(theta), cutoff, f)

    @classmethod
    def constant(cls, cutoff: int, values) -> "FourierField":
        return cls.mode((0.0, 0.0), cutoff, (0, 0), tuple(values))

    @classmethod
    def random(cls, rng: np.random.Generator, theta, cutoff: int, components: int = 1,
               decay: float = 0.0) -> "FourierField":
        """Random complex coefficients, optionally damped by (1 + |theta+z|^2)^(-decay/2)."""
        p = 2 * cutoff + 1
        c = rng.standard_normal((components, p, p)) + 1j * rng.standard_normal((components, p, p))
        if decay:
            k1, k2 = wavevectors(BlochTheta.of(theta), cutoff)
            c *= (1.0 + (k1**2 + k2**2) / TWO_PI**2) ** (-decay / 2)
        return cls(BlochTheta.of(theta), cutoff, c)

    @classmethod
    def from_grid(cls, values: np.ndarray, theta, cutoff: int) -> "FourierField":
        """Project uniform-grid samples (components, n, n) onto the mode box."""
        theta = BlochTheta.of(theta)
        v = np.asarray(values, dtype=complex)
        if v.ndim == 2:
            v = v[None]
        n = v.shape[-1]
        y = np.arange(n) / n
        y1, y2 = np.meshgrid(y, y, indexing="ij")
        carrier = np.exp(-1j * TWO_PI * (theta.theta[0] * y1 + theta.theta[1] * y2))
        hat = np.fft.fft2(v * carrier, axes=(-2, -1)) / n**2
        z = mode_indices(cutoff) % n
        return cls(theta, cutoff, hat[:, z][:, :, z])

    # structure
    @property
    def components(self) -> int:
        return self.coeffs.shape[0]

    @property
    def size(self) -> int:
        return 2 * self.cutoff + 1

    def component(self, c: int) -> "FourierField":
        return FourierField(self.theta, self.cutoff, self.coeffs[c : c + 1])

    def wavevectors(self) -> tuple[np.ndarray, np.ndarray]:
        return wavevectors(self.theta, self.cutoff)

    def _same(self, other: "FourierField") -> None:
        if self.theta != other.theta or self.cutoff != other.cutoff:
            raise ValueError("fields live on different mode sets")

    def with_coeffs(self, coeffs: np.ndarray) -> "FourierField":
        return FourierField(self.theta, self.cutoff, coeffs)

    def __add__(self, other: "FourierField") -> "FourierField":
        self._same(other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "FourierField") -> "FourierField":
        self._same(other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, s: complex) -> "FourierField":
        return self.with_coeffs(self.coeffs * s)

    __rmul__ = __mul__

    def __truediv__(self, s: complex) -> "FourierField":
        return self.with_coeffs(self.coeffs / s)

    def __neg__(self) -> "FourierField":
        return self.with_coeffs(-self.coeffs)

    # norms
    def inner(self, other: "FourierField") -> complex:
        """L2 inner product int self . conj(other)."""
        self._same(other)
        return complex(np.vdot(other.coeffs, self.coeffs))

    def sobolev_norm(self, s: int = 0) -> float:
        k1, k2 = self.wavevectors()
        w = (1.0 + k1**2 + k2**2) ** s
        return float(np.sqrt(np.sum(w * np.abs(self.coeffs) ** 2)))

    def l2_norm(self) -> float:
        return self.sobolev_norm(0)

    def to_grid(self, n: int | None = None) -> np.ndarray:
        """Values on the grid y = (i/n, j/n), shape (components, n, n)."""
        if n is None:
            n = 2 * self.size
        if n < self.size:
            raise ValueError("grid too coarse for the mode box")
        hat = np.zeros((self.components, n, n), dtype=complex)
        z = mode_indices(self.cutoff) % n
        hat[:, z[:, None], z[None, :]] = self.coeffs
        vals = np.fft.ifft2(hat, axes=(-2, -1)) * n**2
        y = np.arange(n) / n
        y1, y2 = np.meshgrid(y, y, indexing="ij")
        return vals * np.exp(1j * TWO_PI * (self.theta.theta[0] * y1 + self.theta.theta[1] * y2))

    def dump_csv(self, path, component: int = 0) -> None:
        """Write (z1, z2, re, im) rows for one component."""
        z = mode_indices(self.cutoff)
        c = self.coeffs[component]
        with open(path, "w") as fh:
            fh.write("z1,z2,re,im\n")
            for i, z1 in enumerate(z):
                for j, z2 in enumerate(z):
                    fh.write(f"{z1},{z2},{c[i, j].real:.17g},{c[i, j].imag:.17g}\n")


def _scalar(f: FourierField) -> None:
    if f.components != 1:
        raise ValueError("expected a scalar field")


def _vector(u: FourierField) -> None:
    if u.components != 2:
        raise ValueError("expected a 2-component field")


def partial(f: FourierField, axis: int) -> FourierField:
    """Partial derivative in y_{axis+1}, componentwise."""
    k = f.wavevectors()[axis]
    return f.with_coeffs(1j * k * f.coeffs)


def grad(f: FourierField) -> FourierField:
    _scalar(f)
    k1, k2 = f.wavevectors()
    c = f.coeffs[0]
    return f.with_coeffs(np.stack([1j * k1 * c, 1j * k2 * c]))


def grad_perp(f: FourierField) -> FourierField:
    """(-f,2, f,1)."""
    _scalar(f)
    k1, k2 = f.wavevectors()
    c = f.coeffs[0]
    return f.with_coeffs(np.stack([-1j * k2 * c, 1j * k1 * c]))


def perp(u: FourierField) -> FourierField:
    """u^perp = (-u2, u1)."""
    _vector(u)
    return u.with_coeffs(np.stack([-u.coeffs[1], u.coeffs[0]]))


def div(u: FourierField) -> FourierField:
    _vector(u)
    k1, k2 = u.wavevectors()
    return u.with_coeffs((1j * k1 * u.coeffs[0] + 1j * k2 * u.coeffs[1])[None])


def div_perp(u: FourierField) -> FourierField:
    """div(u^perp) = -u2,1 + u1,2."""
    return div(perp(u))


def laplace_symbol(theta: BlochTheta, cutoff: int) -> np.ndarray:
    """lambda_z = 4 pi^2 |theta + z|^2."""
    k1, k2 = wavevectors(theta, cutoff)
    return k1**2 + k2**2


def laplace_solve(f: FourierField, theta=None, tol: float = 1e-10) -> FourierField:
    """Solve -Delta u = f coefficient-wise; zero-mean solution when theta = 0."""
    _scalar(f)
    if theta is not None and BlochTheta.of(theta) != f.theta:
        raise ValueError("theta does not match the field")
    lam = laplace_symbol(f.theta, f.cutoff)
    c = f.coeffs[0].copy()
    # theta = 0, or theta so small that 4 pi^2 |theta|^2 underflows
    kernel = lam == 0.0
    if kernel.any():
        scale = max(np.linalg.norm(c), 1.0)
        if np.abs(c[kernel]).max() > tol * scale:
            raise NonSolvableError("source has a component in the kernel (nonzero periodic mean)")
        lam = np.where(kernel, 1.0, lam)
        c[kernel] = 0.0
    return f.with_coeffs((c / lam)[None])


def apply_shifted(u: FourierField) -> FourierField:
    """Periodic-frame operator Delta + 4 pi i theta.grad - 4 pi^2 |theta|^2 acting on the
    periodic part p of u = exp(2 pi i theta.y) p; in coefficients it is multiplication by
    -4 pi^2 |theta + z|^2."""
    return u.with_coeffs(-laplace_symbol(u.theta, u.cutoff) * u.coeffs)


# indicator products -----------------------------------------------------------------


class IndicatorConvolver:
    """Toeplitz convolution with indicator coefficients on a rectangular mode box.

    ``period`` (N1, N2) describes a lattice whose modes are exp(2 pi i q.y / N) with the
    indicator Q-periodic, so only index differences divisible by N couple.
    """

    def __init__(self, geometry, shape: tuple[int, int], period: tuple[int, int] = (1, 1)):
        self.geometry = geometry
        self.shape = tuple(shape)
        self.period = tuple(period)
        p1, p2 = self.shape
        d1 = np.arange(-(p1 - 1), p1)
        d2 = np.arange(-(p2 - 1), p2)
        D1, D2 = np.meshgrid(d1, d2, indexing="ij")
        n1, n2 = self.period
        mask = (D1 % n1 == 0) & (D2 % n2 == 0)
        xi = np.stack([D1 / n1, D2 / n2], axis=-1)
        kern = np.zeros(D1.shape, dtype=complex)
        kern[mask] = geometry.fourier(xi[mask])
        self.kernel = kern
        self.fft_shape = (sfft.next_fast_len(2 * p1 - 1), sfft.next_fast_len(2 * p2 - 1))
        self._kernel_hat = sfft.fft2(kern, s=self.fft_shape)

    def coefficient(self, d1: int, d2: int) -> complex:
        p1, p2 = self.shape
        return self.kernel[d1 + p1 - 1, d2 + p2 - 1]

    def apply(self, a: np.ndarray) -> np.ndarray:
        """(chi0 * a) restricted to the box, for arrays with trailing shape ``shape``."""
        p1, p2 = self.shape
        ah = sfft.fft2(a, s=self.fft_shape, axes=(-2, -1))
        full = sfft.ifft2(ah * self._kernel_hat, axes=(-2, -1))
        return full[..., p1 - 1 : 2 * p1 - 1, p2 - 1 : 2 * p2 - 1]

    def integrate(self, a: np.ndarray, lo: tuple[int, int]) -> np.ndarray:
        """int chi0 * a over the cell (unit-area normalized); ``lo`` is the index of the
        first mode in each axis."""
        p1, p2 = self.shape
        # exp(2 pi i q.y) integrates against chi0 to chat(-q)
        i1 = p1 - 1 - lo[0] - np.arange(p1)
        i2 = p2 - 1 - lo[1] - np.arange(p2)
        return np.sum(a * self.kernel[np.ix_(i1, i2)], axis=(-2, -1))


@lru_cache(maxsize=32)
def convolver(geometry, shape: tuple[int, int], period: tuple[int, int] = (1, 1)) -> IndicatorConvolver:
    return IndicatorConvolver(geometry, shape, period)


def multiply_indicator(f: FourierField, geometry, inclusion: bool = True) -> FourierField:
    """chi0 * f (or chi1 * f) truncated to the working cutoff."""
    conv = convolver(geometry, (f.size, f.size))
    prod = conv.apply(f.coeffs)
    if not inclusion:
        prod = f.coeffs - prod
    return f.with_coeffs(prod)


def phase_inner(f: FourierField, g: FourierField, geometry, inclusion: bool = True) -> complex:
    """int over the inclusion (or matrix) of f * conj(g); exact for truncated fields."""
    f._same(g)
    return complex(np.vdot(g.coeffs, multiply_indicator(f, geometry, inclusion).coeffs))


def phase_norm(f: FourierField, geometry, inclusion: bool = True) -> float:
    return float(np.sqrt(max(phase_inner(f, f, geometry, inclusion).real, 0.0)))


def project_onto_V(u: FourierField, geometry) -> FourierField:
    """Correct a periodic field so that div v = 0 and div v^perp = 0 in the matrix.

    v = u - z with z = (w1,1 - w2,2, w1,2 + w2,1), where
    Delta w1 = chi1 div u - chi0 c1 and -Delta w2 = chi1 div u^perp - chi0 c2, and the
    constants c1, c2 make both right-hand sides mean-free.
    """
    _vector(u)
    if not u.theta.is_zero:
        raise ValueError("projection is only offered for periodic fields (theta = 0)")
    area = geometry.area
    conv = convolver(geometry, (u.size, u.size))
    m = u.cutoff
    chi_box = conv.kernel[m : 3 * m + 1, m : 3 * m + 1]  # chat(z) on the box

    def rhs(g: FourierField) -> FourierField:
        inside = conv.apply(g.coeffs[0])
        c = -complex(conv.integrate(g.coeffs[0], (-m, -m))) / area  # mean of g is zero
        return g.with_coeffs((g.coeffs[0] - inside - c * chi_box)[None])

    r1 = rhs(div(u))
    r2 = rhs(div_perp(u))
    w1 = -laplace_solve(r1, tol=1e-8)
    w2 = laplace_solve(r2, tol=1e-8)
    g1, g2 = grad(w1), grad(w2)
    z = u.with_coeffs(np.stack([g1.coeffs[0] - g2.coeffs[1], g1.coeffs[1] + g2.coeffs[0]]))
    return u - z


def gradient_split_terms(v: FourierField) -> tuple[float, float, float]:
    """(int |grad v|^2, int |div v|^2, int |div v^perp|^2)."""
    _vector(v)
    k1, k2 = v.wavevectors()
    gsq = float(np.sum((k1**2 + k2**2) * np.abs(v.coeffs) ** 2))
    return gsq, div(v).l2_norm() ** 2, div_perp(v).l2_norm() ** 2
