"""Band structures, gap detection, Hausdorff comparison and (omega^2, k^2) gap maps."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cell import CellSpec
from .errors import ParameterRangeError, SpectrumError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BandStructure:
    """Eigenvalues per theta point: ``eigenvalues[i, k]`` is band k at ``thetas[i]``."""

    thetas: np.ndarray
    eigenvalues: np.ndarray
    solver: str = "limit"
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.ndim != 2 or len(ev) != len(self.thetas):
            raise ValueError("eigenvalues must have shape (n_theta, n_bands)")
        if np.any(np.diff(ev, axis=1) < -1e-9 * max(1.0, np.abs(ev).max())):
            raise ValueError("per-theta eigenvalues must be ascending")
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "thetas", np.asarray(self.thetas, dtype=float))

    @property
    def n_bands(self) -> int:
        return self.eigenvalues.shape[1]

    @property
    def extents(self) -> np.ndarray:
        """(n_bands, 2) array of [min, max] over theta."""
        return np.stack([self.eigenvalues.min(axis=0), self.eigenvalues.max(axis=0)], axis=1)

    def spectrum_union(self) -> list[tuple[float, float]]:
        """The union of band extents as disjoint closed intervals."""
        out: list[list[float]] = []
        for lo, hi in sorted(map(tuple, self.extents)):
            if out and lo <= out[-1][1]:
                out[-1][1] = max(out[-1][1], hi)
            else:
                out.append([lo, hi])
        return [(a, b) for a, b in out]

    def points(self, n_bands: int | None = None) -> np.ndarray:
        """All eigenvalues of the first ``n_bands`` bands as a flat point set."""
        return self.eigenvalues[:, : n_bands or self.n_bands].ravel()


@dataclass(frozen=True)
class GapRecord:
    index: int  # gap between band ``index`` and ``index + 1`` (1-based)
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not self.upper > self.lower:
            raise ValueError("gap width must be positive")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def relative_width(self) -> float:
        mid = 0.5 * (self.upper + self.lower)
        return self.width / mid if mid > 0 else float("inf")


def detect_gaps(bands: BandStructure | np.ndarray) -> list[GapRecord]:
    """Gaps between consecutive bands: max of band i strictly below min of band i+1."""
    ext = bands.extents if isinstance(bands, BandStructure) else np.asarray(bands, dtype=float)
    if len(ext) < 2:
        raise ValueError("gap detection needs at least two bands")
    gaps = []
    for i in range(len(ext) - 1):
        if ext[i, 1] < ext[i + 1, 0]:
            gaps.append(GapRecord(i + 1, float(ext[i, 1]), float(ext[i + 1, 0])))
    return gaps


def hausdorff_distance(S1, S2, window: float | None = None) -> float:
    """Symmetric Hausdorff distance of finite real point sets, optionally restricted to
    [0, window] first."""
    a = np.sort(np.asarray(S1, dtype=float).ravel())
    b = np.sort(np.asarray(S2, dtype=float).ravel())
    if window is not None:
        a = a[(a >= 0) & (a <= window)]
        b = b[(b >= 0) & (b <= window)]
    if a.size == 0 or b.size == 0:
        raise ValueError("window too small: a compared set is empty")
    return max(_directed(a, b), _directed(b, a))


def _directed(a: np.ndarray, b: np.ndarray) -> float:
    """max over x in a of the distance to sorted b."""
    idx = np.clip(np.searchsorted(b, a), 1, len(b) - 1)
    left = np.abs(a - b[idx - 1])
    right = np.abs(a - b[idx]) if len(b) > 1 else left
    return float(np.max(np.minimum(left, right)))


@dataclass(frozen=True, eq=False)
class OmegaKRegion:
    """Forbidden pairs (omega^2, k^2 = omega^2 mu (eps1 - eps^2)) for omega^2 in the gap."""

    gap: GapRecord
    eps_values: np.ndarray
    pairs: np.ndarray  # (n_eps, n_omega, 2)
    mu: float
    eps1: float

    def is_subcritical(self) -> bool:
        w2, k2 = self.pairs[..., 0], self.pairs[..., 1]
        return bool(np.all(k2 < w2 * self.mu * self.eps1))


def map_gap_to_omega_k(gap: GapRecord, cell: CellSpec, eps_values, n_omega: int = 33) -> OmegaKRegion:
    from .epsilon import check_eps

    eps_values = np.atleast_1d(np.asarray(eps_values, dtype=float))
    for e in eps_values:
        try:
            check_eps(float(e), cell)
        except ParameterRangeError as exc:
            raise ParameterRangeError(f"eps range violates the guard: {exc}") from exc
    # open interval: drop the endpoints
    w2 = np.linspace(gap.lower, gap.upper, n_omega + 2)[1:-1]
    pairs = np.empty((len(eps_values), len(w2), 2))
    for i, e in enumerate(eps_values):
        pairs[i, :, 0] = w2
        pairs[i, :, 1] = w2 * cell.mu * (cell.eps1 - e**2)
    region = OmegaKRegion(gap, eps_values, pairs, cell.mu, cell.eps1)
    if not region.is_subcritical():
        raise SpectrumError("emitted pair is not subcritical")
    return region


# theta grids


def uniform_grid(n1: int, n2: int | None = None) -> np.ndarray:
    """Grid points (i/n1, j/n2), row-major, covering [0,1)^2."""
    n2 = n1 if n2 is None else n2
    t1, t2 = np.meshgrid(np.arange(n1) / n1, np.arange(n2) / n2, indexing="ij")
    return np.stack([t1.ravel(), t2.ravel()], axis=1)


def high_symmetry_path(n: int) -> np.ndarray:
    """Gamma - X - M - Gamma with n points per leg (end point included once)."""
    corners = np.array([[0.0, 0.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.0]])
    pts = []
    for a, b in zip(corners[:-1], corners[1:]):
        for t in np.arange(n) / n:
            pts.append(a + t * (b - a))
    pts.append(corners[-1])
    return np.array(pts)


# sweeps


def _solve_one(task):
    from .limit import GRAM_THRESHOLD

    kind, theta, cell, k_max, res = task
    if kind == "limit":
        from .limit import solve_limit_spectrum

        sp = solve_limit_spectrum(theta, cell, k_max, res.get("cutoff", 32), res.get("source_cutoff", 4),
                                  res.get("threshold", GRAM_THRESHOLD))
        return [sp.eigenvalues]
    if kind == "epsilon":
        from .epsilon import build_epsilon_basis, solve_epsilon_spectrum

        basis = build_epsilon_basis(theta, cell, res.get("cutoff", 32), res.get("plane_wave_cutoff"),
                                    res.get("source_cutoff", 4), res.get("threshold", GRAM_THRESHOLD))
        return [
            solve_epsilon_spectrum(e, theta, cell, k_max, basis.cutoff, basis.plane_wave_cutoff,
                                   basis.source_cutoff, basis=basis).eigenvalues
            for e in res["eps"]
        ]
    raise ValueError(f"unknown solver {kind!r}")


def _run(tasks, jobs: int):
    if jobs <= 1:
        return [_solve_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves task order, so output never depends on scheduling
        return list(pool.map(_solve_one, tasks))


def sweep(solver: str, cell: CellSpec, thetas, k_max: int = 6, resolution: dict | None = None,
          jobs: int = 1) -> BandStructure:
    """Run the limit solver at every theta point."""
    if solver != "limit":
        raise ValueError("use sweep_epsilon for finite-contrast sweeps")
    res = dict(resolution or {})
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    tasks = [("limit", tuple(t), cell, k_max, res) for t in thetas]
    out = _collect(tasks, jobs)
    ev = np.array([o[0] for o in out])
    return BandStructure(thetas, ev, "limit", {"resolution": res, "k_max": k_max})


def sweep_epsilon(cell: CellSpec, thetas, eps_values, k_max: int = 6, resolution: dict | None = None,
                  jobs: int = 1) -> dict[float, BandStructure]:
    """Finite-contrast band structures for several eps, sharing the trial space per theta."""
    res = dict(resolution or {})
    res["eps"] = [float(e) for e in eps_values]
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    tasks = [("epsilon", tuple(t), cell, k_max, res) for t in thetas]
    out = _collect(tasks, jobs)
    meta = {k: v for k, v in res.items() if k != "eps"}
    return {
        e: BandStructure(thetas, np.array([o[i] for o in out]), "epsilon", {"resolution": meta, "eps": e,
                                                                             "k_max": k_max})
        for i, e in enumerate(res["eps"])
    }


def _collect(tasks, jobs):
    try:
        return _run(tasks, jobs)
    except Exception as exc:  # report which theta failed
        failures = []
        for t in tasks:
            try:
                _solve_one(t)
            except Exception as inner:  # noqa: BLE001
                failures.append(f"theta={t[1]}: {inner}")
        msg = "; ".join(failures) or str(exc)
        raise SpectrumError(f"sweep failed at {len(failures)} theta point(s): {msg}") from exc
