"""JSON/CSV interchange, content hashes and run manifests."""

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .spectral_measures import ContinuousSegment, SpectralMeasure

SCHEMA_VERSION = 1
VERSION = "0.1.0"


def _finite_or_none(v):
    v = float(v)
    return v if math.isfinite(v) else None


def _clean(obj):
    """Recursively map numpy scalars to Python and non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _finite_or_none(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


# -- measures ------------------------------------------------------------------

def measure_to_dict(mu: SpectralMeasure) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "label": mu.label,
        "atoms": [{"x": x, "mass": m} for x, m in mu.atoms],
        "segments": [{"a": s.a, "b": s.b,
                      "edge_exponent_left": s.edge_exponent_left,
                      "edge_exponent_right": s.edge_exponent_right,
                      "values": [float(v) for v in s.values]} for s in mu.segments],
    }


def measure_from_dict(d: dict) -> SpectralMeasure:
    try:
        version = d.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise DomainError(f"unsupported schema_version {version}")
        atoms = tuple((float(a["x"]), float(a["mass"])) for a in d.get("atoms", []))
        segs = tuple(ContinuousSegment(float(s["a"]), float(s["b"]),
                                       np.asarray(s["values"], dtype=float),
                                       float(s.get("edge_exponent_left", 0.5)),
                                       float(s.get("edge_exponent_right", 0.5)))
                     for s in d.get("segments", []))
    except (KeyError, TypeError, AttributeError) as exc:
        raise DomainError(f"malformed measure JSON: {exc!r}") from exc
    return SpectralMeasure(atoms, segs, str(d.get("label", "")))


def save_measure(mu: SpectralMeasure, path) -> None:
    Path(path).write_text(dumps(measure_to_dict(mu)), encoding="utf-8")


def load_measure(path) -> SpectralMeasure:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: invalid JSON ({exc})") from exc
    return measure_from_dict(d)


def content_hash(data) -> str:
    """64-bit hash (16 hex digits) of bytes, text or a JSON-able object."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    elif not isinstance(data, bytes):
        data = json.dumps(_clean(data), sort_keys=True, allow_nan=False).encode("utf-8")
    return hashlib.sha256(data).hexdigest()[:16]


def measure_hash(mu: SpectralMeasure) -> str:
    return content_hash(measure_to_dict(mu))


# -- tables ---------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def csv_text(header: Sequence[str], columns: Iterable[Sequence]) -> str:
    """Locale-independent CSV: '.' decimal point, '\\n' line ends, repr floats."""
    rows = zip(*columns)
    lines = [",".join(header)] + [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def profile_csv(profile) -> str:
    return csv_text(["t", "F", "f"], [profile.t_grid, profile.F_values, profile.f_values])


def distribution_csv(dist) -> str:
    return csv_text(["x", "cdf"], [dist.x_grid, dist.cdf_values])


def envelope(payload: dict, mu: SpectralMeasure, tolerances: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "profile": payload,
            "meta": {"source_measure_hash": measure_hash(mu),
                     "tolerances": tolerances, "version": VERSION}}


def read_csv(path) -> Tuple[List[str], np.ndarray]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:] if ln])
    return header, data


# -- manifests -----------------------------------------------------------------

@dataclass
class RunManifest:
    command_line: str
    config_hash: str
    tool_version: str = VERSION
    outputs: List[Tuple[str, str]] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def add(self, path) -> None:
        self.outputs.append((Path(path).name, content_hash(Path(path).read_bytes())))

    def to_dict(self) -> dict:
        return {"schema_version": self.schema_version, "command_line": self.command_line,
                "config_hash": self.config_hash, "tool_version": self.tool_version,
                "outputs": [{"path": p, "hash": h} for p, h in self.outputs]}

    def write(self, directory) -> Path:
        path = Path(directory) / "manifest.json"
        path.write_text(dumps(self.to_dict()), encoding="utf-8")
        return path

    def verify(self, directory) -> bool:
        """Recompute every listed hash against the files on disk."""
        d = Path(directory)
        return all(content_hash((d / p).read_bytes()) == h for p, h in self.outputs)
