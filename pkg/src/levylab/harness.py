"""Experiment orchestration: config ingestion, execution, persistence.

Determinism contract: a fixed (config, seed) pair produces byte-identical
CSV output across runs and across worker counts.  Every experiment draws
from its own counter-based substream and rows are written in config order,
so parallel scheduling never reaches the output.  Wall-clock times are
reported only in the JSON detail, never in the CSV.
"""

import fnmatch
import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .rng import ALGORITHM
from .suite import REGISTRY

CSV_COLUMNS = ("experiment", "op", "param_hash", "mean", "stderr", "n", "target", "verdict", "seconds")


class ConfigError(ValueError):
    """The configuration file failed to parse or validate."""


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    operation: str
    parameters: dict = field(default_factory=dict)
    samples: int = 1000
    seed: int = 0
    confidence: float = 0.999

    def __post_init__(self):
        if self.operation not in REGISTRY:
            raise ConfigError(
                f"experiment {self.name!r}: unknown operation {self.operation!r}"
            )
        if self.samples < 100:
            raise ConfigError(f"experiment {self.name!r}: samples must be >= 100")
        if not 0.5 < self.confidence < 1.0:
            raise ConfigError(
                f"experiment {self.name!r}: confidence must lie in (0.5, 1)"
            )

    @property
    def param_hash(self) -> str:
        payload = json.dumps(
            {
                "operation": self.operation,
                "parameters": self.parameters,
                "samples": self.samples,
                "seed": self.seed,
                "confidence": self.confidence,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class RunRecord:
    spec: ExperimentSpec
    rows: list
    seconds: float
    error: str | None = None


_TOP_KEYS = {"seed", "out_dir", "workers", "experiments"}
_EXP_KEYS = {"name", "operation", "parameters", "samples", "confidence"}


def load_config(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno}: {exc.msg}")
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for i, exp in enumerate(raw.get("experiments", [])):
        bad = set(exp) - _EXP_KEYS
        if bad:
            raise ConfigError(f"experiment #{i}: unknown keys {sorted(bad)}")
        if "operation" not in exp:
            raise ConfigError(f"experiment #{i}: missing 'operation'")
    return raw


def _execute(spec: ExperimentSpec) -> RunRecord:
    t0 = time.perf_counter()
    try:
        rows = REGISTRY[spec.operation](
            spec.parameters, spec.samples, spec.seed, spec.confidence
        )
        return RunRecord(spec, rows, time.perf_counter() - t0)
    except Exception as exc:  # recorded, run continues
        return RunRecord(spec, [], time.perf_counter() - t0, error=f"{type(exc).__name__}: {exc}")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def run(
    config_path,
    seed: int | None = None,
    samples_scale: float = 1.0,
    out_dir=None,
    name_filter: str | None = None,
    workers: int = 1,
) -> dict:
    """Execute a config; returns a summary dict with the written paths and
    the exit code (0 clean, 1 when any experiment failed or errored)."""
    raw = load_config(config_path)
    base_seed = int(seed if seed is not None else raw.get("seed", 0))
    out = Path(out_dir if out_dir is not None else raw.get("out_dir", "."))
    workers = int(workers or raw.get("workers", 1))
    specs = []
    for exp in raw.get("experiments", []):
        op = exp["operation"]
        specs.append(
            ExperimentSpec(
                name=exp.get("name", op),
                operation=op,
                parameters=exp.get("parameters", {}),
                samples=max(100, int(exp.get("samples", 1000) * samples_scale)),
                seed=base_seed,
                confidence=float(exp.get("confidence", 0.999)),
            )
        )
    if name_filter:
        specs = [s for s in specs if fnmatch.fnmatch(s.name, name_filter)]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_execute, specs))
    else:
        records = [_execute(s) for s in specs]

    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "summary.csv"
    json_path = out / "detail.json"
    lines = [",".join(CSV_COLUMNS)]
    counts = {"pass": 0, "fail": 0, "inconclusive": 0, "error": 0, "info": 0}
    for rec in records:
        if rec.error is not None:
            counts["error"] += 1
            lines.append(
                ",".join(
                    [rec.spec.name, "error", rec.spec.param_hash, "", "", "", "", "error", ""]
                )
            )
            continue
        for row in rec.rows:
            verdict = row.get("verdict")
            counts[verdict if verdict in counts else "info"] += 1
            lines.append(
                ",".join(
                    [
                        rec.spec.name,
                        str(row["op"]),
                        rec.spec.param_hash,
                        _fmt(row.get("mean")),
                        _fmt(row.get("stderr")),
                        _fmt(row.get("n")),
                        _fmt(row.get("target")),
                        verdict or "",
                        "",  # wall time kept out of the CSV for determinism
                    ]
                )
            )
    csv_path.write_text("\n".join(lines) + "\n")
    detail = {
        "version": __version__,
        "rng_algorithm": ALGORITHM,
        "seed": base_seed,
        "counts": counts,
        "experiments": [
            {
                "name": rec.spec.name,
                "operation": rec.spec.operation,
                "param_hash": rec.spec.param_hash,
                "samples": rec.spec.samples,
                "confidence": rec.spec.confidence,
                "seconds": rec.seconds,
                "error": rec.error,
                "rows": [
                    {k: row.get(k) for k in ("op", "mean", "stderr", "n", "target", "verdict")}
                    for row in rec.rows
                ],
            }
            for rec in records
        ],
    }
    json_path.write_text(json.dumps(detail, indent=2) + "\n")
    exit_code = 1 if (counts["fail"] or counts["error"]) else 0
    return {
        "csv": csv_path,
        "json": json_path,
        "counts": counts,
        "exit_code": exit_code,
        "records": records,
    }


def verdict_aggregate(estimates, targets, tolerances=None) -> dict:
    """Three-valued verdict table for aligned estimates and targets."""
    if tolerances is None:
        tolerances = [1e-9] * len(estimates)
    if not (len(estimates) == len(targets) == len(tolerances)):
        raise ValueError("estimates, targets and tolerances must align")
    rows = []
    counts = {"pass": 0, "fail": 0, "inconclusive": 0}
    for est, tgt, tol in zip(estimates, targets, tolerances):
        v = est.verdict(tgt, atol=tol)
        counts[v] += 1
        rows.append({"estimate": est, "target": tgt, "verdict": v})
    return {"rows": rows, "counts": counts}
