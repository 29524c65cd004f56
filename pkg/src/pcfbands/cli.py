"""Command-line driver: ``pcfbands <subcommand> --config FILE [--out DIR] [--jobs N] [--dump-fields]``.

Exit codes: 0 success, 1 solver failure, 2 configuration error.  CSV floats use 17
significant digits; JSON mirrors carry the same values plus the parsed configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .bands import (BandStructure, detect_gaps, hausdorff_distance, high_symmetry_path, map_gap_to_omega_k,
                    sweep, sweep_epsilon, uniform_grid)
from .cell import CellSpec, Disc, Slab
from .epsilon import check_eps
from .errors import ConfigError, ParameterRangeError, PcfError

log = logging.getLogger("pcfbands")

SUBCOMMANDS = ("bands", "gaps", "converge", "slab1d", "green", "arrow")


def fmt(x) -> str:
    return format(float(x), ".17g")


def _row(values) -> list[str]:
    return [v if isinstance(v, str) else (str(v) if isinstance(v, (int, np.integer)) else fmt(v)) for v in values]


def write_csv(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(_row(r))
    return path


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


# shared pieces


def theta_grid(cfg: cfgmod.RunConfig) -> np.ndarray:
    s = cfg.solver
    return uniform_grid(s.grid_n) if s.grid_kind == "uniform" else high_symmetry_path(s.grid_n)


def _resolution(cfg: cfgmod.RunConfig) -> dict:
    s = cfg.solver
    return {"cutoff": s.cutoff, "source_cutoff": s.source_cutoff, "threshold": s.threshold}


def limit_sweep(cfg: cfgmod.RunConfig, jobs: int, cell: CellSpec | None = None, thetas=None) -> BandStructure:
    thetas = theta_grid(cfg) if thetas is None else thetas
    return sweep("limit", cell or cfg.cell, thetas, cfg.solver.k_max, _resolution(cfg), jobs)


def comparison_window(cfg: cfgmod.RunConfig, bands: BandStructure) -> float:
    """Lambda window: configured, or window_factor times the top of band compare_bands."""
    if cfg.study.window is not None:
        return float(cfg.study.window)
    return cfg.study.window_factor * float(bands.extents[cfg.study.compare_bands - 1, 1])


def _check_eps_list(cfg: cfgmod.RunConfig) -> None:
    for i, e in enumerate(cfg.study.eps):
        try:
            check_eps(e, cfg.cell)
        except ParameterRangeError as exc:
            raise ConfigError(f"study.eps.{i}", str(exc)) from exc


def _band_rows(bands: BandStructure):
    for t, ev in zip(bands.thetas, bands.eigenvalues):
        for k, lam in enumerate(ev, start=1):
            yield (t[0], t[1], k, lam)


def _gap_rows(gaps):
    return [(g.index, g.lower, g.upper, g.width, g.relative_width) for g in gaps]


GAP_HEADER = ["band", "lower", "upper", "width", "relative_width"]


def _write_bands(out: Path, bands: BandStructure, stem: str = "bands") -> list[Path]:
    paths = [
        write_csv(out / f"{stem}.csv", ["theta1", "theta2", "band", "lambda"], _band_rows(bands)),
        write_csv(out / f"{stem}_extents.csv", ["band", "min", "max"],
                  [(k, lo, hi) for k, (lo, hi) in enumerate(bands.extents, start=1)]),
    ]
    return paths


def dump_fields(out: Path, cfg: cfgmod.RunConfig, thetas) -> list[Path]:
    """Fourier coefficients (z1, z2, re, im) of each eigenfield component, one file per
    (theta index, band, component)."""
    from .limit import limit_eigenfields

    d = out / "fields"
    d.mkdir(exist_ok=True)
    paths = []
    for i, t in enumerate(thetas):
        _, (z1, z2), coeffs = limit_eigenfields(tuple(t), cfg.cell, cfg.solver.k_max, cfg.solver.cutoff,
                                                cfg.solver.source_cutoff, cfg.solver.threshold)
        Z1, Z2 = np.meshgrid(z1, z2, indexing="ij")
        for k in range(coeffs.shape[0]):
            for c in range(2):
                a = coeffs[k, c]
                rows = zip(Z1.ravel(), Z2.ravel(), a.real.ravel(), a.imag.ravel())
                paths.append(write_csv(d / f"theta{i:03d}_band{k + 1}_u{c + 1}.csv", ["z1", "z2", "re", "im"],
                                       ((int(p), int(q), x, y) for p, q, x, y in rows)))
    return paths


# subcommands


def cmd_bands(cfg, out: Path, jobs: int, dump: bool) -> dict:
    bands = limit_sweep(cfg, jobs)
    _write_bands(out, bands)
    write_json(out / "bands.json", {"thetas": bands.thetas, "eigenvalues": bands.eigenvalues,
                                    "extents": bands.extents, "sigma0": bands.spectrum_union(),
                                    "meta": bands.meta, "config": cfg.raw})
    if dump:
        dump_fields(out, cfg, bands.thetas)
    return {"bands": bands.n_bands, "thetas": len(bands.thetas)}


def cmd_gaps(cfg, out: Path, jobs: int, dump: bool) -> dict:
    _check_eps_list(cfg)
    bands = limit_sweep(cfg, jobs)
    gaps = detect_gaps(bands)
    _write_bands(out, bands)
    write_csv(out / "gaps.csv", GAP_HEADER, _gap_rows(gaps))
    rows = []
    for g in gaps:
        region = map_gap_to_omega_k(g, cfg.cell, cfg.study.eps, cfg.study.n_omega)
        for e, pairs in zip(region.eps_values, region.pairs):
            rows.extend((g.index, e, w2, k2) for w2, k2 in pairs)
    write_csv(out / "omega_k.csv", ["band", "eps", "omega2", "k2"], rows)
    write_json(out / "gaps.json", {"gaps": [g.__dict__ for g in gaps], "extents": bands.extents,
                                   "sigma0": bands.spectrum_union(), "config": cfg.raw})
    return {"gaps": len(gaps)}


def cmd_converge(cfg, out: Path, jobs: int, dump: bool) -> dict:
    _check_eps_list(cfg)
    thetas = theta_grid(cfg)
    limit = limit_sweep(cfg, jobs, thetas=thetas)
    res = dict(_resolution(cfg), plane_wave_cutoff=cfg.solver.plane_wave_cutoff)
    eps_bands = sweep_epsilon(cfg.cell, thetas, cfg.study.eps, cfg.solver.k_max, res, jobs)
    window = comparison_window(cfg, limit)
    nb = cfg.study.compare_bands
    top = float(limit.extents[nb - 1, 1])
    rows = []
    for e in cfg.study.eps:
        d = hausdorff_distance(eps_bands[e].points(nb), limit.points(nb), window)
        rows.append((e, d, window, d / top))
    write_csv(out / "converge.csv", ["eps", "hausdorff", "window", "relative"], rows)
    _write_bands(out, limit, "limit_bands")
    write_csv(out / "eps_bands.csv", ["eps", "theta1", "theta2", "band", "lambda"],
              ((e,) + r for e in cfg.study.eps for r in _band_rows(eps_bands[e])))
    write_json(out / "converge.json", {"rows": rows, "window": window, "compare_bands": nb,
                                       "limit_extents": limit.extents,
                                       "eps_extents": {fmt(e): b.extents for e, b in eps_bands.items()},
                                       "config": cfg.raw})
    return {"distances": [r[1] for r in rows]}


def cmd_slab1d(cfg, out: Path, jobs: int, dump: bool) -> dict:
    from .slab import SlabProblem, gap_edges, trace_bands

    geom = cfg.cell.geometry
    if not isinstance(geom, Slab):
        raise ConfigError("geometry.type", "slab1d needs a slab geometry")
    prob = SlabProblem(geom.a, geom.b, cfg.cell.eps0, cfg.cell.eps1)
    s = cfg.slab1d
    thetas = np.linspace(0.0, 1.0, s.n_theta)
    bands = trace_bands(prob, thetas, s.lambda_window, s.k_max, s.step)
    write_csv(out / "slab_bands.csv", ["theta1", "band", "lambda"],
              ((r[0], r[2], r[3]) for r in _band_rows(bands)))
    gaps = detect_gaps(bands)
    write_csv(out / "slab_gaps.csv", GAP_HEADER, _gap_rows(gaps))
    edges = gap_edges(prob, s.lambda_window[1])
    write_csv(out / "slab_gap_edges.csv", ["lower", "upper"], edges)
    write_json(out / "slab1d.json", {"thetas": thetas, "eigenvalues": bands.eigenvalues, "gaps": _gap_rows(gaps),
                                     "gap_edges": edges, "config": cfg.raw})
    return {"bands": bands.n_bands, "gaps": len(gaps)}


def cmd_green(cfg, out: Path, jobs: int, dump: bool) -> dict:
    from .green import green_derivative_identity, green_g0

    g = cfg.green
    kw = {"cutoff": g.cutoff, "sigmas": g.sigmas, "radii": g.radii, "tol": g.tol}
    rows = []
    for t in g.thetas:
        for k in g.k:
            c = green_g0(t, k, **kw)
            fd, ssum = green_derivative_identity(t, k, **kw)
            rows.append((t[0], t[1], k, c.value, c.error, fd, ssum))
    write_csv(out / "green.csv", ["theta1", "theta2", "k", "g0", "g0_error", "dg0_dk_fd", "norm_sum"], rows)
    write_json(out / "green.json", {"rows": rows, "config": cfg.raw})
    return {"rows": len(rows)}


def cmd_arrow(cfg, out: Path, jobs: int, dump: bool) -> dict:
    from .green import arrow_bounds

    a = cfg.arrow
    cell = CellSpec(Disc(a.delta), cfg.cell.eps0, cfg.cell.eps1, cfg.cell.mu)
    grid = uniform_grid(a.grid_n)
    grid = grid[np.any(grid != 0.0, axis=1)]
    rep = arrow_bounds(a.delta, grid, cell, a.cutoff)
    write_csv(out / "arrow_bounds.csv",
              ["delta", "theta1", "theta2", "lambda1_upper", "lambda2_upper", "lambda2_chain", "lambda3_lower",
               "disc_integral"],
              ((a.delta, t[0], t[1], l1, l2, ch, rep.lambda3_lower, di) for t, l1, l2, ch, di in
               zip(rep.thetas, rep.lambda1_upper, rep.lambda2_upper, rep.lambda2_chain, rep.disc_integrals)))
    bands = limit_sweep(cfg, jobs, cell=cell)
    gaps = detect_gaps(bands)
    _write_bands(out, bands, "arrow_bands")
    write_csv(out / "arrow_gaps.csv", GAP_HEADER, _gap_rows(gaps))
    summary = {
        "delta": a.delta, "mu2": rep.mu2, "mu2_over_delta2": rep.mu2 / a.delta**2,
        "lambda2_upper_max": rep.lambda2_max, "lambda3_lower": rep.lambda3_lower,
        "gap_unscaled": rep.gap_unscaled, "gap_certified": rep.gap_certified,
        "empirical_c2": rep.empirical_c2, "direct_gap_2_3": any(g.index == 2 for g in gaps),
    }
    write_csv(out / "arrow_summary.csv", ["key", "value"],
              ((k, str(v) if isinstance(v, bool) else v) for k, v in summary.items()))
    write_json(out / "arrow.json", dict(summary, constants=rep.constants, gaps=_gap_rows(gaps), config=cfg.raw))
    return summary


COMMANDS = {
    "bands": cmd_bands,
    "gaps": cmd_gaps,
    "converge": cmd_converge,
    "slab1d": cmd_slab1d,
    "green": cmd_green,
    "arrow": cmd_arrow,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcfbands", description="Band structures of high-contrast fibre claddings.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for theta sweeps")
    p.add_argument("--dump-fields", action="store_true", help="write eigenfield coefficients (bands only)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs", "must be at least 1")
        cfg = cfgmod.load(args.config)
        out = Path(args.out or cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        summary = COMMANDS[args.subcommand](cfg, out, args.jobs, args.dump_fields)
    except (ConfigError, ParameterRangeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (PcfError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    print(f"{args.subcommand}: {json.dumps(_jsonable(summary), sort_keys=True)} -> {out}")
    return 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
