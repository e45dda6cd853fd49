"""Config-driven replicate sweeps comparing ``N1/n`` with the predicted fraction."""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import dist as dist_mod
from .branching import predict_giant_fraction
from .dist import DistributionError, SizeDistribution
from .explore import big_vertex_census, omega_log, omega_two_thirds
from .graphgen import (
    GraphParams,
    attribute_multiplicity,
    component_census,
    degree_census,
    limit_degree_pmf,
    sample_graph,
    tv_distance,
)

MASK64 = (1 << 64) - 1
TASKS = ("components", "degrees", "multiplicity", "explore")
CSV_FIELDS = ("n", "m", "rep", "seed", "n1", "n1_frac", "pred", "abs_err", "deg_tv", "max_fw", "wall_ms")
THREADS_ENV = "RIG_GIANT_THREADS"


class ConfigError(ValueError):
    pass


def _splitmix(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, n: int, replicate: int) -> int:
    """64-bit seed for one ``(n, replicate)`` cell, chained splitmix64 mixing."""
    z = _splitmix(master & MASK64)
    z = _splitmix(z ^ (n & MASK64))
    return _splitmix(z ^ (replicate & MASK64))


def parse_distribution(spec: Any) -> SizeDistribution:
    """``{"family": name, "params": {...}}`` or ``{"pmf": [[t, p], ...]}``."""
    if not isinstance(spec, dict):
        raise ConfigError("distribution must be a mapping with 'family' or 'pmf'")
    try:
        if "pmf" in spec:
            return dist_mod.make_distribution([(int(t), float(p)) for t, p in spec["pmf"]])
        if "family" in spec:
            params = spec.get("params", {})
            if not isinstance(params, dict):
                raise ConfigError("family params must be a mapping")
            return dist_mod.from_family(str(spec["family"]), **params)
    except DistributionError as exc:
        raise ConfigError(str(exc)) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed distribution: {exc}") from exc
    raise ConfigError("distribution needs 'family' or 'pmf'")


def parse_pmf_string(text: str) -> SizeDistribution:
    """``"t:p,t:p"`` shorthand used on the command line."""
    try:
        pairs = [(int(t), float(p)) for t, p in (item.split(":") for item in text.split(",") if item.strip())]
        return dist_mod.make_distribution(pairs)
    except DistributionError as exc:
        raise ConfigError(str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(f"bad pmf string {text!r}") from exc


def resolve_omega(rule, n: int) -> int:
    if rule in ("log", None):
        return omega_log(n)
    if rule in ("twothirds", "two-thirds"):
        return omega_two_thirds(n)
    try:
        k = int(rule)
    except (TypeError, ValueError):
        raise ConfigError(f"omega must be 'log', 'twothirds' or an integer, got {rule!r}") from None
    if k < 2:
        raise ConfigError("omega must be >= 2")
    return k


@dataclass(frozen=True)
class ExperimentConfig:
    distribution: dict
    beta: float
    n_values: tuple[int, ...]
    replicates: int = 1
    master_seed: int = 0
    tasks: tuple[str, ...] = ("components",)
    omega: Any = "log"
    output: str | None = None
    format: str = "csv"
    timing: bool = False

    def __post_init__(self):
        if not (isinstance(self.beta, (int, float)) and self.beta > 0):
            raise ConfigError("beta must be a positive number")
        if not self.n_values or any(int(n) < 1 for n in self.n_values):
            raise ConfigError("n_values must be a nonempty list of positive integers")
        if int(self.replicates) < 1:
            raise ConfigError("replicates must be >= 1")
        bad = set(self.tasks) - set(TASKS)
        if bad:
            raise ConfigError(f"unknown tasks {sorted(bad)}; known: {list(TASKS)}")
        if self.format not in ("csv", "jsonl"):
            raise ConfigError("format must be csv or jsonl")
        if self.omega not in ("log", "twothirds", "two-thirds"):
            resolve_omega(self.omega, 2)
        parse_distribution(self.distribution)

    @property
    def size_distribution(self) -> SizeDistribution:
        return parse_distribution(self.distribution)

    @classmethod
    def from_mapping(cls, raw: dict, **overrides) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a mapping")
        data = dict(raw)
        data.update({k: v for k, v in overrides.items() if v is not None})
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        for key in ("distribution", "beta", "n_values"):
            if key not in data:
                raise ConfigError(f"missing config key {key!r}")
        try:
            data["n_values"] = tuple(int(n) for n in data["n_values"])
            data["tasks"] = tuple(data.get("tasks", ("components",)))
            data["replicates"] = int(data.get("replicates", 1))
            data["master_seed"] = int(data.get("master_seed", 0))
            data["beta"] = float(data["beta"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        return cls(**data)


def load_config(path, **overrides) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix in (".yaml", ".yml"):
            import yaml

            raw = yaml.safe_load(text)
        else:
            raw = json.loads(text)
    except Exception as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return ExperimentConfig.from_mapping(raw, **overrides)


@dataclass
class ReportRow:
    n: int
    m: int
    rep: int
    seed: int
    n1: int | None = None
    n1_frac: float | None = None
    pred: float | None = None
    abs_err: float | None = None
    deg_tv: float | None = None
    deg_p0: float | None = None
    max_fw: int | None = None
    bound_ok: bool | None = None
    b_full: int | None = None
    b_regular: int | None = None
    b_simple: int | None = None
    wall_ms: float | None = None


def degree_tv(Q: SizeDistribution, beta: float, emp_pmf: np.ndarray) -> float:
    """TV distance from the limiting mixed-Poisson law, truncated far past its bulk."""
    peak = Q.max_size * Q.max_size / beta
    kmax = int(max(emp_pmf.size - 1, 10 * peak + 60))
    limit, _ = limit_degree_pmf(Q, beta, kmax)
    return tv_distance(emp_pmf, limit)


def run_replicate(cfg: ExperimentConfig, n: int, rep: int, pred: float) -> ReportRow:
    start = time.perf_counter()
    Q = cfg.size_distribution
    params = GraphParams.from_beta(n, cfg.beta)
    seed = derive_seed(cfg.master_seed, n, rep)
    g = sample_graph(params, Q, seed)
    row = ReportRow(n=n, m=params.m, rep=rep, seed=seed, pred=pred)
    if "components" in cfg.tasks:
        cc = component_census(g)
        row.n1 = cc.n1
        row.n1_frac = cc.n1 / n
        row.abs_err = abs(row.n1_frac - pred)
    if "degrees" in cfg.tasks:
        dc = degree_census(g)
        row.deg_tv = degree_tv(Q, cfg.beta, dc.pmf)
        row.deg_p0 = float(dc.pmf[0])
    if "multiplicity" in cfg.tasks:
        mult = attribute_multiplicity(g)
        row.max_fw = mult.max_f
        row.bound_ok = mult.bound_ok
    if "explore" in cfg.tasks:
        census = big_vertex_census(g, resolve_omega(cfg.omega, n))
        row.b_full, row.b_regular, row.b_simple = census.b_full, census.b_regular, census.b_simple
    if cfg.timing:
        row.wall_ms = (time.perf_counter() - start) * 1e3
    return row


def _run_cell(args) -> ReportRow:
    return run_replicate(*args)


def worker_count(jobs: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    workers = os.cpu_count() or 1
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer") from None
    return max(1, min(workers, jobs))


@dataclass
class ExperimentResult:
    rows: list[ReportRow]
    summary: list[dict] = field(default_factory=list)
    prediction: float = 0.0


def summarize(rows: Sequence[ReportRow], pred: float) -> list[dict]:
    out = []
    for n in sorted({r.n for r in rows}):
        cell = [r for r in rows if r.n == n]
        entry: dict[str, Any] = {"n": n, "m": cell[0].m, "replicates": len(cell), "pred": pred}
        fr = [r.n1_frac for r in cell if r.n1_frac is not None]
        if fr:
            entry["mean_n1_frac"] = float(np.mean(fr))
            entry["std_n1_frac"] = float(np.std(fr, ddof=1)) if len(fr) > 1 else 0.0
            entry["max_abs_err"] = max(abs(f - pred) for f in fr)
            entry["mean_abs_err"] = float(np.mean([abs(f - pred) for f in fr]))
        tv = [r.deg_tv for r in cell if r.deg_tv is not None]
        if tv:
            entry["mean_deg_tv"] = float(np.mean(tv))
            entry["max_deg_tv"] = max(tv)
            entry["mean_deg_p0"] = float(np.mean([r.deg_p0 for r in cell]))
        fw = [r.max_fw for r in cell if r.max_fw is not None]
        if fw:
            entry["max_fw"] = max(fw)
            entry["bound_ok_all"] = all(r.bound_ok for r in cell)
        bf = [r for r in cell if r.b_full is not None]
        if bf:
            for key in ("b_full", "b_regular", "b_simple"):
                entry[f"mean_{key}_frac"] = float(np.mean([getattr(r, key) / n for r in bf]))
        out.append(entry)
    return out


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    pred = predict_giant_fraction(cfg.size_distribution, cfg.beta)
    cells = [(cfg, n, r, pred) for n in cfg.n_values for r in range(cfg.replicates)]
    workers = worker_count(len(cells))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(c) for c in cells]
    rows.sort(key=lambda r: (cfg.n_values.index(r.n), r.rep))
    return ExperimentResult(rows, summarize(rows, pred), pred)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not isinstance(value, bool):
        return float(format(value, ".10g"))
    return value


def render_report(rows: Sequence[ReportRow], fmt: str = "csv") -> str:
    if not rows:
        raise ValueError("no rows to report")
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for r in rows:
            d = asdict(r)
            writer.writerow([_fmt(d[k]) for k in CSV_FIELDS])
        return buf.getvalue()
    if fmt == "jsonl":
        lines = []
        for r in rows:
            d = asdict(r)
            lines.append(json.dumps({k: _json_value(d[k]) for k in CSV_FIELDS}))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(rows: Sequence[ReportRow], path, fmt: str = "csv") -> Path:
    text = render_report(rows, fmt)
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report {path}: {exc}") from exc
    return path


def summary_json(result: ExperimentResult) -> str:
    return json.dumps({"prediction": result.prediction, "summary": result.summary}, indent=2, sort_keys=True)
