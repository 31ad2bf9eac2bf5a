"""Snapshots, CSV series and run manifests."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .model import ModelParams
from .spectral import SpectralField, SpectralGrid, SymmetryError

SCHEMA_VERSION = 1
SYMMETRY_TOL = 1e-12


class SnapshotError(ValueError):
    pass


@dataclass
class Snapshot:
    schema_version: int
    time: float
    grid: dict
    params: dict
    sigma_observed: list[float]
    coefficients: np.ndarray

    def field(self) -> SpectralField:
        g = SpectralGrid(int(self.grid["n_modes"]), float(self.grid["length"]))
        return SpectralField(g, self.coefficients)

    def model_params(self) -> ModelParams:
        return ModelParams(**self.params)


def write_snapshot(fld: SpectralField, meta: Mapping[str, Any], path) -> None:
    """Write ``fld`` with ``meta`` keys time, params (ModelParams or dict), sigma_observed.

    Floats are written with Python's shortest round-trip repr, which reads
    back bit-exactly.
    """
    params = meta.get("params", {})
    if isinstance(params, ModelParams):
        params = params.as_dict()
    c = fld.coefficients
    doc = {
        "schema_version": SCHEMA_VERSION,
        "time": float(meta.get("time", 0.0)),
        "grid": {"n_modes": fld.grid.n_modes, "length": float(fld.grid.length)},
        "params": {k: float(v) for k, v in params.items()},
        "sigma_observed": [float(s) for s in meta.get("sigma_observed", [])],
        "coefficients": [[float(z.real), float(z.imag)] for z in c],
    }
    Path(path).write_text(json.dumps(doc, allow_nan=False) + "\n")


def read_snapshot(path) -> Snapshot:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"{path}: unreadable snapshot ({exc})") from None
    if not isinstance(doc, dict):
        raise SnapshotError(f"{path}: snapshot must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SnapshotError(f"{path}: unsupported schema_version {version!r}")
    try:
        grid = doc["grid"]
        pairs = np.asarray(doc["coefficients"], dtype=float)
        n = int(grid["n_modes"])
        if pairs.shape != (n, 2):
            raise SnapshotError(f"{path}: expected {n} [re, im] pairs, got shape {pairs.shape}")
        snap = Snapshot(
            schema_version=version,
            time=float(doc["time"]),
            grid={"n_modes": n, "length": float(grid["length"])},
            params=dict(doc["params"]),
            sigma_observed=[float(s) for s in doc["sigma_observed"]],
            coefficients=pairs[:, 0] + 1j * pairs[:, 1],
        )
    except (KeyError, TypeError) as exc:
        raise SnapshotError(f"{path}: missing or malformed field {exc}") from None
    res = snap.field().hermitian_residue()
    if res > SYMMETRY_TOL:
        raise SymmetryError(f"{path}: Hermitian residue {res:.3e} exceeds {SYMMETRY_TOL:g}")
    return snap


# -- CSV series ----------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return "%.17g" % v
    return str(v)


def _as_row(rec) -> dict:
    if dataclasses.is_dataclass(rec):
        return dataclasses.asdict(rec)
    return dict(rec)


def write_series(records: Iterable, path, header: list[str] | None = None) -> None:
    """CSV with one row per record; floats at 17 significant digits.

    Records are dataclasses or mappings with identical keys. An empty series
    produces a header-only file when ``header`` is given.
    """
    rows = [_as_row(r) for r in records]
    if header is None:
        if not rows:
            raise ValueError("empty series needs an explicit header")
        header = list(rows[0])
    for r in rows:
        if list(r) != header:
            raise ValueError(f"inhomogeneous record keys {list(r)} != {header}")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in header])


def read_series(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


# -- manifests -----------------------------------------------------------


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    tool_version: str
    subcommand: str
    args: dict
    config_echo: dict
    calibration: dict
    grid: dict
    params: dict
    outputs: list[dict] = field(default_factory=list)
    passed: bool | None = None
    summary: dict = field(default_factory=dict)
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    )

    def add_output(self, path, root) -> None:
        path = Path(path)
        self.outputs.append(
            {"path": str(path.relative_to(root)), "sha256": sha256_file(path)}
        )

    def write(self, path) -> None:
        write_json(self, path)

    @classmethod
    def read(cls, path) -> "RunManifest":
        doc = json.loads(Path(path).read_text())
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise ValueError(f"unknown manifest keys: {sorted(unknown)}")
        return cls(**doc)
