"""JSON run configuration: schema, validation with key paths, and typed dataclasses.

Only ``geometry`` and ``materials`` are required; every other section falls back to the
defaults below.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .cell import CellSpec, Disc, Raster, Slab
from .errors import ConfigError, GeometryError, MaterialError

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_POS_INT = {"type": "integer", "minimum": 1}
_THETA = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

SCHEMA = {
    "type": "object",
    "required": ["geometry", "materials"],
    "additionalProperties": False,
    "properties": {
        "geometry": {
            "type": "object",
            "required": ["type"],
            "properties": {"type": {"enum": ["disc", "slab", "raster"]}},
            "allOf": [
                {
                    "if": {"properties": {"type": {"const": "disc"}}},
                    "then": {
                        "required": ["radius"],
                        "additionalProperties": False,
                        "properties": {"type": {}, "radius": _POS, "center": _THETA},
                    },
                },
                {
                    "if": {"properties": {"type": {"const": "slab"}}},
                    "then": {
                        "required": ["a", "b"],
                        "additionalProperties": False,
                        "properties": {"type": {}, "a": _NUM, "b": _NUM},
                    },
                },
                {
                    "if": {"properties": {"type": {"const": "raster"}}},
                    "then": {
                        "required": ["mask"],
                        "additionalProperties": False,
                        "properties": {
                            "type": {},
                            "mask": {"type": "array", "items": {"type": "array", "items": {"enum": [0, 1]}}},
                        },
                    },
                },
            ],
        },
        "materials": {
            "type": "object",
            "required": ["eps0", "eps1"],
            "additionalProperties": False,
            "properties": {"eps0": _POS, "eps1": _POS, "mu": _POS},
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "cutoff": _POS_INT,
                "source_cutoff": {"type": "integer", "minimum": 0},
                "plane_wave_cutoff": {"type": ["integer", "null"], "minimum": 1},
                "threshold": _POS,
                "k_max": _POS_INT,
                "grid": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"kind": {"enum": ["uniform", "path"]}, "n": _POS_INT},
                },
            },
        },
        "study": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "eps": {"type": "array", "items": _POS, "minItems": 1},
                "window": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "window_factor": _POS,
                "compare_bands": _POS_INT,
                "n_omega": _POS_INT,
            },
        },
        "slab1d": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_theta": {"type": "integer", "minimum": 2},
                "lambda_window": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                "step": _POS,
                "k_max": {"type": ["integer", "null"], "minimum": 1},
            },
        },
        "green": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "thetas": {"type": "array", "items": _THETA, "minItems": 1},
                "k": {"type": "array", "items": _NUM, "minItems": 1},
                "cutoff": _POS_INT,
                "sigmas": {"type": "array", "items": _POS, "minItems": 2},
                "radii": {"type": "array", "items": _POS, "minItems": 2},
                "tol": _POS,
            },
        },
        "arrow": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
                "grid_n": {"type": "integer", "minimum": 2},
                "cutoff": _POS_INT,
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string", "minLength": 1}},
        },
    },
}


@dataclass(frozen=True)
class SolverConfig:
    cutoff: int = 32
    source_cutoff: int = 4
    plane_wave_cutoff: int | None = None
    threshold: float = 1e-10
    k_max: int = 6
    grid_kind: str = "uniform"
    grid_n: int = 8

    def resolution(self) -> dict:
        return {"cutoff": self.cutoff, "source_cutoff": self.source_cutoff,
                "plane_wave_cutoff": self.plane_wave_cutoff}


@dataclass(frozen=True)
class StudyConfig:
    eps: tuple[float, ...] = (0.2, 0.1, 0.05)
    window: float | None = None  # None: window_factor x top of band compare_bands
    window_factor: float = 1.5
    compare_bands: int = 4
    n_omega: int = 33


@dataclass(frozen=True)
class Slab1DConfig:
    n_theta: int = 41
    lambda_window: tuple[float, float] = (-1.0, 200.0)
    step: float = 0.25
    k_max: int | None = None


@dataclass(frozen=True)
class GreenConfig:
    thetas: tuple[tuple[float, float], ...] = ((0.5, 0.5), (0.5, 0.0), (0.25, 0.25))
    k: tuple[float, ...] = (-1.0, -0.5, 0.0)
    cutoff: int = 128
    sigmas: tuple[float, ...] = (1 / 16, 1 / 32)
    radii: tuple[float, ...] = (1 / 4, 1 / 8)
    tol: float = 1e-6


@dataclass(frozen=True)
class ArrowConfig:
    delta: float = 0.05
    grid_n: int = 4
    cutoff: int = 64


@dataclass(frozen=True)
class RunConfig:
    cell: CellSpec
    solver: SolverConfig = SolverConfig()
    study: StudyConfig = StudyConfig()
    slab1d: Slab1DConfig = Slab1DConfig()
    green: GreenConfig = GreenConfig()
    arrow: ArrowConfig = ArrowConfig()
    output_dir: str = "out"
    raw: dict = field(default_factory=dict, compare=False, repr=False)


def _key_path(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "required":
        missing = [k for k in err.validator_value if k not in err.instance]
        parts.append(missing[0] if missing else "?")
    elif err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        if extra:
            parts.append(extra[0])
    return ".".join(parts) or "<root>"


def validate(data: dict) -> None:
    """Raise ConfigError naming the first offending key path."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        e = errors[0]
        raise ConfigError(_key_path(e), e.message)


def _geometry(g: dict):
    try:
        if g["type"] == "disc":
            return Disc(float(g["radius"]), tuple(float(c) for c in g.get("center", (0.0, 0.0))))
        if g["type"] == "slab":
            return Slab(float(g["a"]), float(g["b"]))
        return Raster(g["mask"])
    except GeometryError as exc:
        raise ConfigError("geometry", str(exc)) from exc


def parse(data: dict) -> RunConfig:
    validate(data)
    geom = _geometry(data["geometry"])
    m = data["materials"]
    try:
        cell = CellSpec(geom, float(m["eps0"]), float(m["eps1"]), float(m.get("mu", 1.0)))
    except MaterialError as exc:
        raise ConfigError("materials", str(exc)) from exc
    s = data.get("solver", {})
    grid = s.get("grid", {})
    solver = SolverConfig(
        cutoff=s.get("cutoff", 32),
        source_cutoff=s.get("source_cutoff", 4),
        plane_wave_cutoff=s.get("plane_wave_cutoff"),
        threshold=float(s.get("threshold", 1e-10)),
        k_max=s.get("k_max", 6),
        grid_kind=grid.get("kind", "uniform"),
        grid_n=grid.get("n", 8),
    )
    st = data.get("study", {})
    study = StudyConfig(
        eps=tuple(float(e) for e in st.get("eps", StudyConfig.eps)),
        window=st.get("window"),
        window_factor=float(st.get("window_factor", 1.5)),
        compare_bands=st.get("compare_bands", 4),
        n_omega=st.get("n_omega", 33),
    )
    if study.compare_bands > solver.k_max:
        raise ConfigError("study.compare_bands", "must not exceed solver.k_max")
    sl = data.get("slab1d", {})
    slab1d = Slab1DConfig(
        n_theta=sl.get("n_theta", 41),
        lambda_window=tuple(float(x) for x in sl.get("lambda_window", (-1.0, 200.0))),
        step=float(sl.get("step", 0.25)),
        k_max=sl.get("k_max"),
    )
    if not slab1d.lambda_window[0] < slab1d.lambda_window[1]:
        raise ConfigError("slab1d.lambda_window", "lower end must be below upper end")
    gr = data.get("green", {})
    green = GreenConfig(
        thetas=tuple(tuple(float(x) for x in t) for t in gr.get("thetas", GreenConfig.thetas)),
        k=tuple(float(x) for x in gr.get("k", GreenConfig.k)),
        cutoff=gr.get("cutoff", 128),
        sigmas=tuple(float(x) for x in gr.get("sigmas", GreenConfig.sigmas)),
        radii=tuple(float(x) for x in gr.get("radii", GreenConfig.radii)),
        tol=float(gr.get("tol", 1e-6)),
    )
    ar = data.get("arrow", {})
    arrow = ArrowConfig(delta=float(ar.get("delta", 0.05)), grid_n=ar.get("grid_n", 4), cutoff=ar.get("cutoff", 64))
    out = data.get("output", {}).get("dir", "out")
    return RunConfig(cell, solver, study, slab1d, green, arrow, out, data)


def load(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    return parse(data)
