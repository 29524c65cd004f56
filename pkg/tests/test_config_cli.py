import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import golden
from pcfbands.cli import run
from pcfbands.config import parse
from pcfbands.errors import ConfigError

BASE = {"geometry": {"type": "disc", "radius": 0.3}, "materials": {"eps0": 2.0, "eps1": 1.0}}
SMALL = dict(BASE, solver={"cutoff": 6, "source_cutoff": 1, "k_max": 4, "grid": {"kind": "uniform", "n": 2}})


def _write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def _read(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.mark.parametrize("data,path", [
    ({"geometry": BASE["geometry"], "materials": {"eps1": 1.0}}, "materials.eps0"),
    ({"materials": BASE["materials"]}, "geometry"),
    (dict(BASE, solver={"cutoff": 0}), "solver.cutoff"),
    (dict(BASE, solver={"grid": {"kind": "spiral"}}), "solver.grid.kind"),
    (dict(BASE, bogus=1), "bogus"),
    ({"geometry": {"type": "disc"}, "materials": BASE["materials"]}, "geometry.radius"),
    ({"geometry": {"type": "disc", "radius": 0.7}, "materials": BASE["materials"]}, "geometry"),
    ({"geometry": BASE["geometry"], "materials": {"eps0": 1.0, "eps1": 1.0}}, "materials"),
    (dict(BASE, solver={"k_max": 2}), "study.compare_bands"),
])
def test_config_errors_name_key_path(data, path):
    with pytest.raises(ConfigError) as info:
        parse(data)
    assert info.value.path == path


def test_defaults_filled():
    cfg = parse(BASE)
    assert cfg.solver.cutoff == 32 and cfg.study.eps == (0.2, 0.1, 0.05)
    assert cfg.cell.mu == 1.0


def test_exit_codes(tmp_path, capsys):
    assert run(["bands", "--config", str(tmp_path / "missing.json")]) == 2
    bad = _write(tmp_path, {"geometry": BASE["geometry"], "materials": {"eps1": 1.0}})
    assert run(["bands", "--config", bad]) == 2
    assert "materials.eps0" in capsys.readouterr().err
    eps_bad = _write(tmp_path, dict(SMALL, study={"eps": [0.2, 0.9]}), "eps.json")
    assert run(["gaps", "--config", eps_bad, "--out", str(tmp_path / "o")]) == 2
    assert "study.eps.1" in capsys.readouterr().err
    collapse = _write(tmp_path, dict(BASE, solver={"cutoff": 4, "source_cutoff": 1, "threshold": 1.0, "k_max": 4,
                                                   "grid": {"n": 2}}), "rank.json")
    assert run(["bands", "--config", collapse, "--out", str(tmp_path / "r")]) == 1
    assert run(["slab1d", "--config", _write(tmp_path, SMALL, "s.json"), "--out", str(tmp_path / "s")]) == 2


def test_bands_outputs_and_determinism(tmp_path):
    cfg = _write(tmp_path, SMALL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["bands", "--config", cfg, "--out", str(a)]) == 0
    assert run(["bands", "--config", cfg, "--out", str(b), "--jobs", "2"]) == 0
    for name in ("bands.csv", "bands_extents.csv", "bands.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rows = _read(a / "bands.csv")
    assert len(rows) == 4 * 4
    assert list(rows[0]) == ["theta1", "theta2", "band", "lambda"]
    lam = float(rows[0]["lambda"])
    assert rows[0]["lambda"] == format(lam, ".17g")


def test_dump_fields(tmp_path):
    cfg = _write(tmp_path, dict(SMALL, solver=dict(SMALL["solver"], grid={"n": 1}, k_max=2),
                                study={"compare_bands": 2}))
    assert run(["bands", "--config", cfg, "--out", str(tmp_path / "f"), "--dump-fields"]) == 0
    files = sorted(p.name for p in (tmp_path / "f" / "fields").iterdir())
    assert files == ["theta000_band1_u1.csv", "theta000_band1_u2.csv", "theta000_band2_u1.csv",
                     "theta000_band2_u2.csv"]
    assert len(_read(tmp_path / "f" / "fields" / files[0])) == 13 * 13


def test_gaps_and_converge(tmp_path):
    cfg = _write(tmp_path, dict(SMALL, study={"eps": [0.2, 0.1], "n_omega": 3}))
    assert run(["gaps", "--config", cfg, "--out", str(tmp_path / "g")]) == 0
    gaps = _read(tmp_path / "g" / "gaps.csv")
    omega = _read(tmp_path / "g" / "omega_k.csv")
    assert len(omega) == len(gaps) * 2 * 3
    for r in omega:
        assert float(r["k2"]) < float(r["omega2"])
    assert run(["converge", "--config", cfg, "--out", str(tmp_path / "c")]) == 0
    rows = _read(tmp_path / "c" / "converge.csv")
    assert [float(r["eps"]) for r in rows] == [0.2, 0.1]
    assert all(float(r["hausdorff"]) >= 0 for r in rows)


def test_green_and_arrow(tmp_path):
    cfg = _write(tmp_path, dict(SMALL, green={"thetas": [[0.5, 0.5]], "k": [-0.5]},
                                arrow={"delta": 0.1, "grid_n": 2, "cutoff": 32}))
    assert run(["green", "--config", cfg, "--out", str(tmp_path / "g")]) == 0
    row = _read(tmp_path / "g" / "green.csv")[0]
    assert float(row["dg0_dk_fd"]) == pytest.approx(float(row["norm_sum"]), rel=1e-2)
    assert run(["arrow", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert len(_read(tmp_path / "a" / "arrow_bounds.csv")) == 3
    keys = {r["key"] for r in _read(tmp_path / "a" / "arrow_summary.csv")}
    assert {"lambda2_upper_max", "mu2_over_delta2", "gap_certified", "direct_gap_2_3"} <= keys


def test_slab1d_matches_golden(tmp_path):
    g = golden("slab_bands")
    cfg = _write(tmp_path, {"geometry": {"type": "slab", "a": 0.25, "b": 0.75},
                            "materials": {"eps0": 2.0, "eps1": 1.0}, "slab1d": {"k_max": 5}})
    assert run(["slab1d", "--config", cfg, "--out", str(tmp_path / "s")]) == 0
    rows = _read(tmp_path / "s" / "slab_bands.csv")
    lam = np.array([float(r["lambda"]) for r in rows]).reshape(41, 5)
    assert np.allclose(lam, g["bands"], rtol=1e-6, atol=1e-6)
    edges = [[float(r["lower"]), float(r["upper"])] for r in _read(tmp_path / "s" / "slab_gap_edges.csv")]
    assert np.allclose(edges, g["gap_edges"], rtol=1e-6)


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "pcfbands.cli", "bands", "--config", str(tmp_path / "none.json")],
                          capture_output=True, text=True)
    assert proc.returncode == 2
