"""Quasi-periodic Green's function constant, the small-disc integral identity and bounds for
the limit spectrum with small inclusions.

G solves (-Delta - k) G = sum_n delta(y - n) e^{2 pi i theta.n} and near the origin
G = -(1/2 pi) ln r + g0(theta, k) + o(1).

g0 is obtained from a mollified source.  With psi the normalized self-convolution of the
indicator of a disc of radius sigma, the circular average of G_sigma = psi * G at radius
r > 2 sigma is

    sum_z psihat(theta + z) J0(2 pi |theta + z| r) / (4 pi^2 |theta + z|^2 - k)
        = m_sigma (Phi(r) + H(0) I0(kappa r))        (k = -kappa^2 < 0)

where Phi is the radial fundamental solution, H = G - Phi is smooth near the origin and
m_sigma = psihat(i kappa / 2 pi).  Analogous formulas hold for k = 0 and k > 0.  The relation
is exact, so the (sigma, r) tableau measures only truncation error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .cell import CellSpec, Disc, indicator_fourier
from .errors import ExtrapolationError, ParameterRangeError
from .fourier import BlochTheta, convolver

TWO_PI = 2.0 * np.pi
EULER_GAMMA = float(np.euler_gamma)


def _lattice(theta: BlochTheta, cutoff: int):
    z = np.arange(-cutoff, cutoff + 1)
    Z1, Z2 = np.meshgrid(z, z, indexing="ij")
    x1 = theta.theta[0] + Z1
    x2 = theta.theta[1] + Z2
    return x1, x2, np.hypot(x1, x2)


def spectrum_bottom(theta) -> float:
    """4 pi^2 min_z |theta + z|^2."""
    theta = BlochTheta.of(theta)
    return 4.0 * np.pi**2 * theta.min_image_norm() ** 2


def _check(theta: BlochTheta, k: float) -> None:
    if theta.is_zero:
        raise ParameterRangeError("theta = 0 is excluded")
    bottom = spectrum_bottom(theta)
    if not k < bottom:
        raise ParameterRangeError(f"k={k} is not below the spectrum bottom {bottom:.6g}")


def mollifier_hat(rho: np.ndarray, sigma: float) -> np.ndarray:
    """Fourier transform of the normalized self-convolution of a radius-sigma disc."""
    x = TWO_PI * sigma * np.asarray(rho, dtype=float)
    safe = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 1.0, 2.0 * special.j1(safe) / safe) ** 2


def _mollifier_mass(k: float, sigma: float) -> float:
    """int psi(y) R(|y|) dy for the radial regular solution R of (Delta + k) R = 0, R(0) = 1."""
    if k == 0.0:
        return 1.0
    kap = np.sqrt(abs(k))
    x = kap * sigma
    if k < 0:
        return float((2.0 * special.i1(x) / x) ** 2)
    return float((2.0 * special.j1(x) / x) ** 2)


def circular_mean(theta, k: float, sigma: float, r: float, cutoff: int = 128) -> float:
    """Circular average at radius r of the mollified Green's function (truncated series)."""
    theta = BlochTheta.of(theta)
    _, _, rho = _lattice(theta, cutoff)
    lam = 4.0 * np.pi**2 * rho**2
    terms = mollifier_hat(rho, sigma) * special.j0(TWO_PI * rho * r) / (lam - k)
    return float(np.sum(terms))


def _g0_from_mean(mean: float, k: float, sigma: float, r: float) -> float:
    m = _mollifier_mass(k, sigma)
    if k == 0.0:
        return mean + np.log(r) / TWO_PI
    kap = np.sqrt(abs(k))
    const = (np.log(kap / 2.0) + EULER_GAMMA) / TWO_PI
    if k < 0:
        phi = special.k0(kap * r) / TWO_PI
        h0 = (mean / m - phi) / special.i0(kap * r)
    else:
        phi = -0.25 * special.y0(kap * r)
        h0 = (mean / m - phi) / special.j0(kap * r)
    return float(h0 - const)


@dataclass(frozen=True)
class GreenConstant:
    theta: BlochTheta
    k: float
    value: float
    error: float
    meta: dict = field(default_factory=dict)


def green_g0(theta, k: float = 0.0, cutoff: int = 128, sigmas=(1 / 16, 1 / 32), radii=(1 / 4, 1 / 8),
             tol: float = 1e-6) -> GreenConstant:
    """g0(theta, k) from the mollified series, with a (sigma, r) tableau error estimate."""
    theta = BlochTheta.of(theta)
    k = float(k)
    _check(theta, k)
    sigmas = sorted(sigmas, reverse=True)
    for r in radii:
        if r < 2.0 * max(sigmas):
            raise ParameterRangeError(f"probe radius {r} must be at least twice the mollifier width")
    table = np.array([[_g0_from_mean(circular_mean(theta, k, s, r, cutoff), k, s, r) for s in sigmas]
                      for r in radii])
    # second-order Richardson step in sigma per radius, then average over radii
    if len(sigmas) >= 2:
        ratio = (sigmas[0] / sigmas[1]) ** 2
        rich = (ratio * table[:, 1] - table[:, 0]) / (ratio - 1.0)
    else:
        rich = table[:, 0]
    value = float(np.mean(rich))
    error = float(max(np.ptp(table), np.ptp(rich)))
    if error > tol:
        raise ExtrapolationError(f"g0 tableau spread {error:.3g} exceeds tolerance {tol:.3g}")
    return GreenConstant(theta, k, value, error,
                         {"cutoff": cutoff, "sigmas": list(sigmas), "radii": list(radii),
                          "table": table.tolist(), "richardson": rich.tolist()})


def lattice_sum_difference(theta, k: float, cutoff: int = 512) -> float:
    """g0(theta, k) - g0(theta, 0) = sum_z k / (lam_z (lam_z - k)), truncated."""
    theta = BlochTheta.of(theta)
    _check(theta, k)
    _, _, rho = _lattice(theta, cutoff)
    lam = 4.0 * np.pi**2 * rho**2
    return float(np.sum(k / (lam * (lam - k))))


def _tail_bound(theta: BlochTheta, k: float, cutoff: int, power: int) -> float:
    """Bound for sum over |z|_inf > cutoff of (4 pi^2 |theta + z|^2 - k)^-power.

    Each term is at most the integral of f(|x| - sqrt(2)/2) over the unit square centred at
    theta + z, and these squares lie outside the disc of radius cutoff + 1/2 - |theta|_inf.
    """
    r0 = cutoff + 0.5 - np.max(np.abs(theta.theta)) - np.sqrt(2.0) / 2.0
    if r0 <= 0:
        raise ParameterRangeError("cutoff too small for the tail bound")

    def f(t):
        return (4.0 * np.pi**2 * t**2 - k) ** (-power)

    val, _ = integrate.quad(lambda t: TWO_PI * (t + np.sqrt(2.0) / 2.0) * f(t), r0, np.inf)
    return float(val)


@dataclass(frozen=True)
class SpectralSum:
    partial: float
    tail_bound: float
    partial_sums: np.ndarray

    @property
    def upper(self) -> float:
        return self.partial + self.tail_bound


def green_norm_sum(theta, k: float, cutoff: int = 256) -> SpectralSum:
    """int_Q |G|^2 = sum_z (4 pi^2 |theta + z|^2 - k)^-2 with a bracketing tail bound."""
    theta = BlochTheta.of(theta)
    _check(theta, k)
    x1, x2, rho = _lattice(theta, cutoff)
    terms = (4.0 * np.pi**2 * rho**2 - k) ** -2.0
    z = np.arange(-cutoff, cutoff + 1)
    shell = np.maximum.outer(np.abs(z), np.abs(z))
    by_shell = np.bincount(shell.ravel(), weights=terms.ravel())
    partial = np.cumsum(by_shell)
    return SpectralSum(float(partial[-1]), _tail_bound(theta, k, cutoff, 2), partial)


def green_derivative_identity(theta, k: float, h: float = 1e-3, **kwargs) -> tuple[float, float]:
    """(central difference of g0 in k, spectral sum for int |G|^2)."""
    theta = BlochTheta.of(theta)
    _check(theta, k + h)
    gp = green_g0(theta, k + h, **kwargs).value
    gm = green_g0(theta, k - h, **kwargs).value
    s = green_norm_sum(theta, k)
    return (gp - gm) / (2.0 * h), s.partial + 0.5 * s.tail_bound


def disc_integral_u(delta: float, theta, cutoff: int = 64, g0: float | None = None,
                    **green_kwargs) -> tuple[float, float]:
    """(int_{B_delta} u for -Delta u = quasi-periodic disc indicator, closed form with g0).

    The left side is sum_z chat(theta + z)^2 / (4 pi^2 |theta + z|^2) with chat the Fourier
    transform of the centred disc; the right side is
    (pi/8) delta^4 - pi^2 delta^4 ((1/2 pi) ln delta - g0(theta)).
    """
    theta = BlochTheta.of(theta)
    if theta.is_zero:
        raise ParameterRangeError("theta = 0 is excluded")
    if not 0.0 < delta < 0.5:
        raise ParameterRangeError("delta must lie in (0, 1/2)")
    x1, x2, rho = _lattice(theta, cutoff)
    c = indicator_fourier(Disc(delta), np.stack([x1, x2], axis=-1)).real
    lhs = float(np.sum(c**2 / (4.0 * np.pi**2 * rho**2)))
    if g0 is None:
        g0 = green_g0(theta, 0.0, **green_kwargs).value
    rhs = np.pi / 8.0 * delta**4 - np.pi**2 * delta**4 * (np.log(delta) / TWO_PI - g0)
    return lhs, float(rhs)


# Neumann eigenvalue of the unit disc


def bessel_j1_prime(x: float, terms: int = 60) -> float:
    """J1'(x) from its power series."""
    total = 0.0
    term_factor = 1.0  # (-1)^m (x/2)^(2m) / (m! (m+1)!)
    for m in range(terms):
        if m > 0:
            term_factor *= -(x / 2.0) ** 2 / (m * (m + 1))
        total += (2 * m + 1) / 2.0 * term_factor
        if abs(term_factor) < 1e-18 and m > 5:
            break
    return total


def neumann_mu2(tol: float = 1e-10) -> float:
    """Square of the first positive zero of J1' (first nonzero Neumann eigenvalue of the unit
    disc), by bisection."""
    lo, hi = 1.5, 2.5
    flo = bessel_j1_prime(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = bessel_j1_prime(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    return root * root


# bounds for the small-inclusion limit spectrum


def lower_ellipticity(gamma: float) -> float:
    """Largest c with alpha(u, u) >= c int |grad u|^2 pointwise on constrained fields."""
    q0 = (2.0 + gamma - np.sqrt(gamma**2 + 4.0)) / (2.0 * gamma)
    return float(min(0.5, q0))


@dataclass(frozen=True, eq=False)
class ArrowBoundsReport:
    delta: float
    thetas: np.ndarray
    lambda1_upper: np.ndarray
    lambda2_upper: np.ndarray
    lambda2_chain: np.ndarray
    lambda3_lower: float
    mu2: float
    disc_integrals: np.ndarray
    constants: dict

    @property
    def lambda2_max(self) -> float:
        return float(np.max(self.lambda2_upper))

    @property
    def gap_certified(self) -> bool:
        """Upper bound for lambda2 below the rigorous lower bound for lambda3."""
        return self.lambda2_max < self.lambda3_lower

    @property
    def gap_unscaled(self) -> bool:
        """Upper bound for lambda2 below mu2 delta^-2 (the bound without ellipticity factors)."""
        return self.lambda2_max < self.mu2 / self.delta**2

    @property
    def empirical_c2(self) -> float:
        """c2 realized in lambda2 <= -c2 / (delta^2 ln delta)."""
        return float(self.lambda2_max * self.delta**2 * -np.log(self.delta))


def trial_fields(delta: float, theta: BlochTheta, cutoff: int):
    """Coefficients of u = grad N and v = grad_perp N, -Delta N = quasi-periodic disc indicator."""
    x1, x2, rho = _lattice(theta, cutoff)
    k1, k2 = TWO_PI * x1, TWO_PI * x2
    lam = k1**2 + k2**2
    N = indicator_fourier(Disc(delta), np.stack([x1, x2], axis=-1)) / lam
    u = np.stack([1j * k1 * N, 1j * k2 * N])
    v = np.stack([-1j * k2 * N, 1j * k1 * N])
    return u, v, (k1, k2)


def _pencil(delta: float, theta: BlochTheta, cell: CellSpec, cutoff: int):
    """2x2 stiffness and mass of the trial fields (field order u, v)."""
    g = cell.gamma
    u, v, (k1, k2) = trial_fields(delta, theta, cutoff)
    lam = k1**2 + k2**2
    area = np.pi * delta**2
    fields = [u, v]
    K = np.zeros((2, 2), dtype=complex)
    B = np.zeros((2, 2), dtype=complex)
    conv = convolver(Disc(delta), (2 * cutoff + 1, 2 * cutoff + 1))
    # div u = -chi, div_perp v = chi: each field has ||div||^2 + ||div_perp||^2 = area exactly;
    # the two source terms are orthogonal between u and v
    for i, a in enumerate(fields):
        for j, b in enumerate(fields):
            # int grad a1 . grad b1 on constrained fields: half the full gradient plus half
            # the whole-cell difference |grad a1|^2 - |grad a2|^2
            full = area if i == j else 0.0
            diff = np.sum(lam * (b[0] * np.conj(a[0]) - b[1] * np.conj(a[1])))
            K[i, j] = 0.5 * full + 0.5 * diff + (area / g if i == j else 0.0)
            l2 = np.sum(b[0] * np.conj(a[0]) + b[1] * np.conj(a[1]))
            inc = np.sum(np.conj(a[0]) * conv.apply(b[0]))
            B[i, j] = cell.eps1 * (l2 + g * inc)
    return 0.5 * (K + K.conj().T), 0.5 * (B + B.conj().T)


def arrow_bounds(delta: float, thetas, cell: CellSpec | None = None, cutoff: int = 64) -> ArrowBoundsReport:
    """Rayleigh-quotient upper bounds for lambda1, lambda2 and the lower bound for lambda3."""
    if cell is None:
        cell = CellSpec(Disc(delta), 2.0, 1.0)
    if not isinstance(cell.geometry, Disc):
        raise ParameterRangeError("bounds need a disc inclusion")
    if abs(cell.geometry.radius - delta) > 1e-15:
        raise ParameterRangeError("cell radius and delta differ")
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    rows = [BlochTheta.of(t) for t in thetas]
    if any(t.is_zero for t in rows):
        raise ParameterRangeError("theta = 0 rows are not bounded here; use the direct limit solve")
    g = cell.gamma
    mu2 = neumann_mu2()
    c_up = 1.0 + 1.0 / g
    c_low = lower_ellipticity(g)
    lam1, lam2, chain, ints = [], [], [], []
    for t in rows:
        K, B = _pencil(delta, t, cell, cutoff)
        w = np.sort(np.linalg.eigvals(np.linalg.solve(B, K)).real)
        lam1.append(w[0])
        lam2.append(w[1])
        lhs, _ = disc_integral_u(delta, t, cutoff, g0=0.0)
        ints.append(lhs)
        chain.append(c_up * np.pi * delta**2 / (cell.eps1 * lhs))
    return ArrowBoundsReport(
        delta=delta,
        thetas=np.array([t.array() for t in rows]),
        lambda1_upper=np.array(lam1),
        lambda2_upper=np.array(lam2),
        lambda2_chain=np.array(chain),
        lambda3_lower=c_low / cell.eps0 * mu2 / delta**2,
        mu2=mu2,
        disc_integrals=np.array(ints),
        constants={"upper_ellipticity": c_up, "lower_ellipticity": c_low, "eps0": cell.eps0,
                   "eps1": cell.eps1, "cutoff": cutoff},
    )
