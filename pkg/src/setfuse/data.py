"""Dataset files, manifests, and the synthetic benchmark generator.

On disk a dataset is a directory of per-set CSV files (d rows, n columns,
no header; row k holds feature k across the set's samples) plus a manifest
CSV with header ``set_id,label,path`` whose paths are relative to the
manifest's directory.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .descriptors import ImageSet
from .errors import BadSpec, DimensionMismatch, IoError, ParseError, TooFewSamples

MANIFEST_HEADER = ["set_id", "label", "path"]
MANIFEST_NAME = "manifest.csv"
# %.17g round-trips any float64 exactly through text.
_FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class ManifestEntry:
    set_id: str
    label: str
    path: str


@dataclass(frozen=True)
class DatasetManifest:
    """Parsed manifest: root directory plus one entry per set file."""

    root: Path
    entries: tuple[ManifestEntry, ...]


def load_manifest(manifest_path) -> DatasetManifest:
    """Parse a manifest CSV; raises ``ParseError`` citing file and line."""
    path = Path(manifest_path)
    if not path.is_file():
        raise IoError(f"manifest not found: {path}")
    entries = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}:1: empty manifest") from None
        if [h.strip() for h in header] != MANIFEST_HEADER:
            raise ParseError(
                f"{path}:1: expected header {','.join(MANIFEST_HEADER)!r}, got {','.join(header)!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            entries.append(
                ManifestEntry(set_id=row[0].strip(), label=row[1].strip(), path=row[2].strip())
            )
    if not entries:
        raise ParseError(f"{path}: manifest lists no sets")
    return DatasetManifest(root=path.parent, entries=tuple(entries))


def _parse_set_file(path: Path) -> np.ndarray:
    if not path.is_file():
        raise IoError(f"set file not found: {path}")
    rows = []
    width = None
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            tokens = stripped.split(",")
            values = []
            for col, tok in enumerate(tokens, start=1):
                try:
                    values.append(float(tok))
                except ValueError:
                    raise ParseError(
                        f"{path}:{lineno}: column {col}: bad numeric token {tok.strip()!r}"
                    ) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ParseError(
                    f"{path}:{lineno}: row has {len(values)} columns, expected {width}"
                )
            rows.append(values)
    if not rows:
        raise ParseError(f"{path}: file holds no data rows")
    return np.asarray(rows, dtype=np.float64)


def load_dataset(manifest_path) -> list[ImageSet]:
    """Load every set listed in a manifest, validating shape agreement."""
    manifest = load_manifest(manifest_path)
    sets = []
    dim = None
    dim_source = None
    for entry in manifest.entries:
        features = _parse_set_file(manifest.root / entry.path)
        if features.shape[1] < 2:
            raise TooFewSamples(
                f"set {entry.set_id!r} ({entry.path}): needs at least 2 samples, "
                f"got {features.shape[1]}"
            )
        if dim is None:
            dim = features.shape[0]
            dim_source = entry.path
        elif features.shape[0] != dim:
            raise DimensionMismatch(
                f"set {entry.set_id!r} ({entry.path}) has {features.shape[0]} feature rows "
                f"but {dim_source} has {dim}"
            )
        sets.append(ImageSet(features=features, label=entry.label, set_id=entry.set_id))
    return sets


def save_dataset(sets, out_dir) -> Path:
    """Write per-set CSVs plus a manifest; returns the manifest path.

    Values are printed with enough digits to reproduce the float64 bits on
    reload.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for s in sets:
        fname = f"{s.set_id}.csv"
        np.savetxt(out / fname, s.features, fmt=_FLOAT_FMT, delimiter=",")
        rows.append([s.set_id, s.label, fname])
    manifest_path = out / MANIFEST_NAME
    with manifest_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        writer.writerows(rows)
    return manifest_path


def generate_synthetic(
    classes: int,
    sets_per_class: int,
    dim: int,
    samples: int,
    separation: float,
    seed: int,
) -> list[ImageSet]:
    """Synthetic image-set benchmark with controllable class separation.

    Class centers are drawn i.i.d. Gaussian with scale ``separation /
    sqrt(2)`` per coordinate, which makes the RMS distance between two
    centers ``separation * sqrt(dim)``. Each set then draws its own mean
    near its class center and its own random SPD covariance, and samples
    ``samples`` points from that Gaussian. Everything is a deterministic
    function of ``seed``.
    """
    if classes < 1 or sets_per_class < 1:
        raise BadSpec(f"classes and sets_per_class must be >= 1, got {classes}, {sets_per_class}")
    if dim < 2:
        raise BadSpec(f"dim must be >= 2, got {dim}")
    if samples < 2:
        raise BadSpec(f"samples must be >= 2, got {samples}")
    if separation < 0.0:
        raise BadSpec(f"separation must be >= 0, got {separation}")

    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((classes, dim)) * (separation / math.sqrt(2.0))
    sets = []
    for c in range(classes):
        for s in range(sets_per_class):
            mean = centers[c] + 0.5 * rng.standard_normal(dim)
            g = rng.standard_normal((dim, dim))
            cov = (g @ g.T) / dim + 0.25 * np.eye(dim)
            chol = np.linalg.cholesky(cov)
            features = mean[:, None] + chol @ rng.standard_normal((dim, samples))
            sets.append(
                ImageSet(
                    features=features,
                    label=f"class{c}",
                    set_id=f"class{c}_set{s}",
                )
            )
    return sets
