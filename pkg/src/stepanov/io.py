"""CSV/JSON export and run manifests.

Floats are written with ``repr`` precision (``%.17g``) and rows in a fixed
order, so identical runs produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .metrics import AlmostPeriodSet
from .sde import Ensemble

MANIFEST_NAME = "manifest.json"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path: Path, header: Iterable[str], rows: Iterable[Iterable]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else ("inf" if f > 0 else "-inf" if f < 0 else "nan")
    return obj


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# -------------------------------------------------------------- exporters


def ensemble_csv(path: Path, ens: Ensemble, max_members: int | None = None) -> Path:
    """Columns ``member, t, x_1 .. x_d``, sorted by member then time."""
    n_mem = ens.size if max_members is None else min(ens.size, max_members)
    t = ens.times
    header = ["member", "t"] + [f"x_{i + 1}" for i in range(ens.dim)]

    def rows():
        for m in range(n_mem):
            vals = ens.paths[m]
            for k in range(len(t)):
                yield (m, t[k], *vals[k])

    return write_csv(path, header, rows())


def diagnostics_csv(path: Path, ens: Ensemble) -> Path:
    """Columns ``iter, supMeanSq``."""
    return write_csv(path, ["iter", "supMeanSq"], ((i + 1, v) for i, v in enumerate(ens.diagnostics)))


def scan_csv(path: Path, scan: AlmostPeriodSet) -> Path:
    """Columns ``tau, distance, overlap, accepted`` for every scanned shift."""
    rows = zip(scan.taus, scan.distances, scan.overlaps, scan.accepted)
    return write_csv(path, ["tau", "distance", "overlap", "accepted"], rows)


def periods_csv(path: Path, scan: AlmostPeriodSet) -> Path:
    """Column ``tau`` of accepted shifts."""
    return write_csv(path, ["tau"], ((p,) for p in scan.periods))


# -------------------------------------------------------------- manifests


@dataclass
class RunManifest:
    """Everything needed to re-run a command and verify its outputs."""

    command: str
    target: str
    overrides: dict = field(default_factory=dict)
    seed: int | None = None
    out_dir: str = ""
    checksums: dict = field(default_factory=dict)

    def record(self, paths: Iterable[Path]) -> None:
        for p in sorted(Path(x) for x in paths):
            self.checksums[p.name] = sha256(p)

    def write(self) -> Path:
        return write_json(Path(self.out_dir) / MANIFEST_NAME, asdict(self))

    @classmethod
    def load(cls, out_dir: Path) -> "RunManifest":
        d = json.loads((Path(out_dir) / MANIFEST_NAME).read_text())
        return cls(**d)

    def verify(self, base: Path | None = None) -> dict[str, bool]:
        """Checksum agreement of every recorded file in ``base`` (default ``out_dir``)."""
        base = Path(self.out_dir if base is None else base)
        return {
            name: (base / name).exists() and sha256(base / name) == digest
            for name, digest in self.checksums.items()
        }
