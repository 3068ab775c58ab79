"""Experiment configs, the per-k pipelines and their on-disk artifacts.

Everything written is a pure function of the normalized config: no
timestamps, no absolute paths, floats printed with 17 significant digits.
"""

from __future__ import annotations

import csv
import functools
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .bump import TransitionFunction
from .expr import ExpressionError
from .geometry import Box, Disk, HypothesisError, Interval
from .joint import JointSlicer, SliceConfig, joint
from .mesh import DimensionError, boundary, build_disk_mesh, max_vertex_norm
from .oracles import FunctionGraphOracle, StepOracle
from .registry import RegistryError, lookup
from .smoothing import STEP_BOX, STEP_DISK, ContinuousFunction, SmoothingSchedule, make_sequence, make_step_sequence
from .verify import (DEFAULT_SLACK, VerificationReport, boundary_sphere_diagnostics, check_accumulation_containment,
                     check_boundedness, nonincreasing_within, slice_violations)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3

_INTERVAL = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 1, "maximum": 3},
        "m": {"type": "integer", "minimum": 1},
        "box": {"type": "array", "items": _INTERVAL, "minItems": 1, "maxItems": 3},
        "disk": {
            "type": "object",
            "properties": {
                "center": {"type": "array", "items": {"type": "number"}, "minItems": 1, "maxItems": 3},
                "radius": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["center", "radius"],
            "additionalProperties": False,
        },
        "functions": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "registry": {"type": "string"},
        "slice": {
            "type": "object",
            "properties": {
                "i": {"type": "integer", "minimum": 1},
                "j": {"type": "integer", "minimum": 1},
                "tix": _INTERVAL,
                "margin": {"type": ["number", "null"], "exclusiveMinimum": 0},
            },
            "required": ["i", "j", "tix"],
            "additionalProperties": False,
        },
        "schedule": {
            "type": "object",
            "properties": {
                "k_max": {"type": "integer", "minimum": 0, "maximum": 12},
                "delta0": {"type": "number", "exclusiveMinimum": 0},
                "delta_ratio": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "r0": {"type": "integer", "minimum": 1},
                "r_ratio": {"type": "integer", "minimum": 2},
            },
            "additionalProperties": False,
        },
        "tolerances": {
            "type": "object",
            "properties": {
                "containment": {"type": "number", "minimum": 0},
                "slack": {"type": "number", "minimum": 1},
                "boundary": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {"dir": {"type": "string"}},
            "additionalProperties": False,
        },
    },
    "required": ["n", "box", "disk"],
    "additionalProperties": False,
    "not": {"required": ["functions", "registry"]},
}

DEFAULT_SCHEDULE = {"k_max": 4, "delta0": 0.4, "delta_ratio": 0.5, "r0": 8, "r_ratio": 2}
DEFAULT_TOLERANCES = {"containment": 1e-2, "slack": DEFAULT_SLACK, "boundary": 1e-9}


class ConfigError(ValueError):
    """Invalid experiment configuration (exit status 2)."""


def fmt(x) -> str:
    return format(float(x), ".17g")


def normalize_config(raw: dict, k_max: int | None = None) -> dict:
    """Schema-validate and fill defaults; raises ConfigError."""
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None
    cfg = json.loads(json.dumps(raw))
    cfg["schedule"] = {**DEFAULT_SCHEDULE, **cfg.get("schedule", {})}
    if k_max is not None:
        if k_max < 0:
            raise ConfigError("--k-max must be nonnegative")
        cfg["schedule"]["k_max"] = int(k_max)
    cfg["tolerances"] = {**DEFAULT_TOLERANCES, **cfg.get("tolerances", {})}
    n = cfg["n"]
    if len(cfg["box"]) != n or len(cfg["disk"]["center"]) != n:
        raise ConfigError(f"box and disk center must have {n} coordinates")
    if any(not lo < hi for lo, hi in cfg["box"]):
        raise ConfigError("every box interval needs lo < hi")
    if "functions" in cfg:
        m = len(cfg["functions"])
        if cfg.setdefault("m", m) != m:
            raise ConfigError(f"m = {cfg['m']} but {m} function expressions were given")
    else:
        cfg.setdefault("m", 1)
    sl = cfg.get("slice")
    if sl is not None:
        sl.setdefault("margin", None)
        if sl["i"] > cfg["m"] or sl["j"] > n:
            raise ConfigError(f"slice indices i={sl['i']}, j={sl['j']} out of range for n={n}, m={cfg['m']}")
        if not sl["tix"][0] <= sl["tix"][1]:
            raise ConfigError("slice tix needs lo <= hi")
    return cfg


@dataclass
class Experiment:
    cfg: dict
    box: Box
    disk: Disk
    sched: SmoothingSchedule
    f: ContinuousFunction | None  # None for the set-valued step

    @property
    def n(self) -> int:
        return self.cfg["n"]

    @property
    def m(self) -> int:
        return self.cfg["m"]

    @property
    def k_max(self) -> int:
        return self.cfg["schedule"]["k_max"]

    @property
    def tol(self) -> dict:
        return self.cfg["tolerances"]

    def sequence(self):
        if self.f is None:
            return make_step_sequence(sched=self.sched)
        return make_sequence(self.f, self.box, self.disk, self.sched)

    def oracle(self):
        return StepOracle() if self.f is None else FunctionGraphOracle(self.f)

    def slice_config(self) -> SliceConfig:
        sl = self.cfg.get("slice")
        if sl is None:
            raise ConfigError("this command needs a 'slice' section")
        if self.f is None:
            raise ConfigError("slicing is only supported for single-valued functions")
        tix = Interval(*sl["tix"])
        return SliceConfig(sl["i"], sl["j"], TransitionFunction(self.box[sl["j"]], tix), sl["margin"])


def build_experiment(cfg: dict, need_function: bool = True) -> Experiment:
    """Turn a normalized config into domain objects; bad values become ConfigError or HypothesisError."""
    n, m = cfg["n"], cfg["m"]
    box = Box.from_bounds(cfg["box"])
    disk = Disk(tuple(cfg["disk"]["center"]), cfg["disk"]["radius"])
    if not disk.contains_box(box, strict=True):
        raise HypothesisError(f"box {cfg['box']} is not inside the interior of the disk")
    s = cfg["schedule"]
    try:
        sched = SmoothingSchedule(s["delta0"], s["delta_ratio"], s["r0"], s["r_ratio"], s["k_max"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    f = None
    if "functions" in cfg:
        try:
            f = ContinuousFunction.from_expressions(cfg["functions"], box)
        except ExpressionError as exc:
            raise ConfigError(f"bad function expression: {exc}") from None
    elif "registry" in cfg:
        item = lookup(cfg["registry"])
        if item == "step":
            if (n, m) != (1, 1) or box != STEP_BOX or disk != STEP_DISK:
                raise ConfigError("the step registry item needs n = m = 1, box [-1, 1] and disk radius 1.5 at 0")
        else:
            f = item(n, m, box)
    elif need_function:
        raise ConfigError("config needs 'functions' or 'registry'")
    return Experiment(cfg, box, disk, sched, f)


def _cached(seq):
    return replace(seq, builder=functools.lru_cache(maxsize=None)(seq.builder))


@dataclass
class RunResult:
    report: VerificationReport
    clouds: list[list[str]]
    header: list[str]
    extra_files: dict[str, tuple[list[str], list[list[str]]]]
    epsilon: dict[int, float]
    alpha: float | None = None


def _cloud_rows(k: int, vals: np.ndarray, on_bd: np.ndarray, dist: np.ndarray) -> list[list[str]]:
    return [[str(k), str(v)] + [fmt(c) for c in vals[v]] + [str(int(on_bd[v])), fmt(dist[v])]
            for v in range(vals.shape[0])]


def run_mesh(exp: Experiment) -> RunResult:
    report = VerificationReport()
    tol = exp.tol["boundary"]
    vrows, srows = [], []
    ok = True
    for k in range(exp.k_max + 1):
        M, emb = build_disk_mesh(exp.n, exp.disk, exp.sched.resolution(k))
        diag = boundary_sphere_diagnostics(M, emb, exp.disk, tol)
        ok &= diag["passed"]
        row = report.row(k)
        row.max_norm = max_vertex_norm(emb)
        row.boundary_deviation = diag["radial_deviation"]
        on_bd = np.zeros(emb.values.shape[0], dtype=bool)
        on_bd[M.boundary_vertices] = True
        for v in range(emb.values.shape[0]):
            vrows.append([str(k), str(v)] + [fmt(c) for c in emb.values[v]] + [str(int(on_bd[v]))])
        for s, simplex in enumerate(M.simplices):
            srows.append([str(k), str(s)] + [str(int(v)) for v in simplex])
        if not diag["passed"]:
            report.messages.append(f"k={k}: boundary-sphere check failed {diag}")
    report.flags["boundary_sphere"] = ok
    report.tolerances["boundary"] = tol
    xs = [f"x_{c}" for c in range(1, exp.n + 1)]
    extra = {
        "mesh_vertices.csv": (["k", "vertex_id"] + xs + ["on_boundary"], vrows),
        "mesh_simplices.csv": (["k", "simplex_id"] + [f"v_{c}" for c in range(exp.n + 1)], srows),
    }
    return RunResult(report, [], [], extra, {})


def run_approx(exp: Experiment, with_clouds: bool = True) -> RunResult:
    seq = _cached(exp.sequence())
    oracle = exp.oracle()
    K = exp.k_max
    report = VerificationReport()
    bound, bounded = check_boundedness(seq, K)
    report.flags["boundedness"] = bounded
    report.tolerances["declared_bound"] = seq.declared_bound
    check_accumulation_containment(seq, oracle, exp.box, K, exp.tol["containment"], exp.tol["slack"], report)
    sphere_ok = True
    clouds = []
    for k in range(K + 1):
        M, g = seq.item(k)
        diag = boundary_sphere_diagnostics(M, g, seq.disk, exp.tol["boundary"])
        sphere_ok &= diag["passed"]
        row = report.row(k)
        row.max_norm = max_vertex_norm(g)
        row.boundary_deviation = max(diag["radial_deviation"], diag["y_deviation"])
        if not diag["passed"]:
            report.messages.append(f"k={k}: boundary-sphere check failed")
        if with_clouds:
            vals = g.values
            on_bd = np.zeros(vals.shape[0], dtype=bool)
            on_bd[M.boundary_vertices] = True
            dist = oracle.graph_distances(vals[:, :exp.n], vals[:, exp.n:])
            clouds.extend(_cloud_rows(k, vals, on_bd, dist))
    report.flags["boundary_sphere"] = sphere_ok
    report.tolerances["boundary"] = exp.tol["boundary"]
    header = (["k", "vertex_id"] + [f"x_{c}" for c in range(1, exp.n + 1)]
              + [f"y_{c}" for c in range(1, exp.m + 1)] + ["on_boundary", "graph_distance"])
    return RunResult(report, clouds, header, {}, {})


def run_joint(exp: Experiment, with_clouds: bool = True) -> RunResult:
    cfg = exp.slice_config()
    parent = _cached(exp.sequence())
    gseq, goracle = joint(parent, cfg, exp.oracle())
    slicer = JointSlicer(parent, cfg)
    sliced = functools.lru_cache(maxsize=None)(slicer.slice)
    gseq = replace(gseq, builder=lambda k: (sliced(k).N, sliced(k).gprime))
    K = exp.k_max
    report = VerificationReport()
    report.tolerances["alpha"] = cfg.tf.alpha
    report.tolerances["delta_margin"] = cfg.delta_margin

    violations, eps = [], {}
    sphere_ok = True
    crossings_ok = True
    clouds = []
    for k in range(K + 1):
        res = sliced(k)
        eps[k] = res.epsilon_used
        row = report.row(k)
        row.epsilon = res.epsilon_used
        row.crossings = int(res.N.n_vertices)
        for v in slice_violations(res, cfg, parent):
            violations.append(f"k={k}: {v}")
        if exp.n == 1:
            crossings_ok &= res.N.n_vertices >= 1
        else:
            tol = max(exp.tol["boundary"], res.boundary_tolerance)
            diag = boundary_sphere_diagnostics(res.N, res.gprime, res.disk, tol)
            row.boundary_deviation = max(diag["radial_deviation"], diag["y_deviation"])
            if not diag["passed"]:
                sphere_ok = False
                report.messages.append(f"k={k}: slice boundary-sphere check failed")
            report.tolerances[f"slice_boundary_k{k}"] = tol
        Mk, gk = parent.item(k)
        sphere_ok &= boundary_sphere_diagnostics(Mk, gk, parent.disk, exp.tol["boundary"])["passed"]

    bound, bounded = check_boundedness(gseq, K)
    report.flags["boundedness"] = bounded
    report.tolerances["declared_bound"] = gseq.declared_bound
    check_accumulation_containment(gseq, goracle, gseq.box, K, exp.tol["containment"], exp.tol["slack"], report)
    for k in range(K + 1):
        report.row(k).max_norm = max_vertex_norm(sliced(k).gprime)

    mags = [abs(eps[k]) for k in range(K + 1)]
    report.flags["slice_invariants"] = not violations
    report.flags["epsilon_below_alpha"] = all(e < cfg.tf.alpha for e in mags)
    report.flags["epsilon_trend"] = nonincreasing_within(mags, exp.tol["slack"])
    report.flags["crossings"] = crossings_ok
    report.flags["boundary_sphere"] = sphere_ok
    report.messages.extend(violations)

    xs = [f"x_{c}" for c in range(1, exp.n + 1) if c != cfg.j]
    header = ["k", "vertex_id"] + xs + [f"y_{c}" for c in range(1, exp.m + 1)] + ["on_boundary", "graph_distance"]
    if with_clouds:
        for k in range(K + 1):
            res = sliced(k)
            vals = res.gprime.values
            on_bd = np.zeros(vals.shape[0], dtype=bool)
            on_bd[res.boundary_vertices] = True
            nn = exp.n - 1
            dist = goracle.graph_distances(vals[:, :nn], vals[:, nn:]) if vals.shape[0] else np.empty(0)
            clouds.extend(_cloud_rows(k, vals, on_bd, dist))
    return RunResult(report, clouds, header, {}, eps, cfg.tf.alpha)


REPORT_COLUMNS = ["k", "max_norm", "semidistance", "n_in_box", "boundary_deviation", "crossings", "epsilon",
                  "tolerance"]


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt(v)


def summary_text(command: str, cfg: dict, result: RunResult) -> str:
    rep = result.report
    label = cfg.get("registry") or "; ".join(cfg.get("functions", [])) or "-"
    lines = [f"macont {command}: n={cfg['n']} m={cfg['m']} function: {label}"]
    if cfg.get("slice"):
        sl = cfg["slice"]
        lines.append(f"slice: i={sl['i']} j={sl['j']} tix={sl['tix']}")
    lines.append("")
    lines.append(f"{'k':>3} {'max_norm':>12} {'semidist':>12} {'in_box':>8} {'bd_dev':>10} {'cross':>6} {'epsilon':>12}")
    for r in rep.rows:
        def num(v, w, spec=".4e"):
            return f"{'-':>{w}}" if isinstance(v, float) and math.isnan(v) else f"{v:>{w}{spec}}"
        cross = f"{r.crossings:>6d}" if r.crossings >= 0 else f"{'-':>6}"
        lines.append(f"{r.k:>3d} {num(r.max_norm, 12)} {num(r.semidistance, 12)} {r.n_in_box:>8d} "
                     f"{num(r.boundary_deviation, 10, '.2e')} {cross} {num(r.epsilon, 12)}")
    lines.append("")
    for name in sorted(rep.flags):
        lines.append(f"{'PASS' if rep.flags[name] else 'FAIL'}  {name}")
    for msg in rep.messages[:20]:
        lines.append(f"note: {msg}")
    lines.append("")
    lines.append("result: " + ("all checks passed" if rep.passed else "check failure"))
    return "\n".join(lines) + "\n"


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_artifacts(out: Path, command: str, cfg: dict, result: RunResult, with_clouds: bool = True) -> list[str]:
    out.mkdir(parents=True, exist_ok=True)
    files = []
    if with_clouds and result.header:
        _write_csv(out / "clouds.csv", result.header, result.clouds)
        files.append("clouds.csv")
    for name, (header, rows) in result.extra_files.items():
        _write_csv(out / name, header, rows)
        files.append(name)
    rep_rows = [[_cell(r.as_dict()[c]) for c in REPORT_COLUMNS] for r in result.report.rows]
    _write_csv(out / "report.csv", REPORT_COLUMNS, rep_rows)
    (out / "summary.txt").write_text(summary_text(command, cfg, result))
    files += ["report.csv", "summary.txt", "manifest.json"]
    public_cfg = {k: v for k, v in cfg.items() if k != "output"}
    manifest = {
        "package": {"name": "macont", "version": __version__},
        "command": command,
        "config": public_cfg,
        "tolerances": {k: float(v) for k, v in sorted(result.report.tolerances.items())},
        "alpha": result.alpha,
        "epsilon": {str(k): v for k, v in sorted(result.epsilon.items())},
        "flags": {k: bool(v) for k, v in sorted(result.report.flags.items())},
        "passed": result.report.passed,
        "files": sorted(files),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return files


def run_experiment(command: str, cfg: dict, out: Path | None) -> tuple[int, RunResult]:
    """Run ``command`` (mesh, approx, joint, verify) on a normalized config.

    Config problems raise ConfigError, HypothesisError, RegistryError or
    DimensionError; the caller maps them to exit status 2.
    """
    exp = build_experiment(cfg, need_function=command != "mesh")
    with_clouds = command != "verify"
    if command == "mesh":
        result = run_mesh(exp)
    elif command == "approx" or (command == "verify" and not cfg.get("slice")):
        result = run_approx(exp, with_clouds)
    elif command in ("joint", "verify"):
        result = run_joint(exp, with_clouds)
    else:
        raise ValueError(f"unknown command {command!r}")
    if out is not None:
        write_artifacts(out, command, cfg, result, with_clouds)
    return (EXIT_OK if result.report.passed else EXIT_CHECK_FAILED), result


CONFIG_ERRORS = (ConfigError, HypothesisError, RegistryError, DimensionError, ExpressionError)
