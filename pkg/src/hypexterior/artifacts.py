"""Deterministic CSV/JSON artifact writers with provenance headers.

Every file carries the sha256 of the resolved run configuration and the
package version; nothing time- or host-dependent is written, so reruns with
the same configuration are byte-identical.  CSV bodies are RFC-4180 rows
preceded by a single '#' provenance comment line (readable by pandas with
comment='#').
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__ as _pkg_version
from .model import RadialProfile

__all__ = [
    "config_hash",
    "provenance",
    "write_json",
    "write_profile_csv",
    "write_curve_csv",
    "write_shape_csv",
    "write_table_csv",
]


def _canonical(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


# artifact identity is location-independent: where a run writes must not
# change what it computes
_NON_IDENTITY_KEYS = ("out_dir",)


def config_hash(config: dict) -> str:
    ident = {k: v for k, v in config.items() if k not in _NON_IDENTITY_KEYS}
    blob = json.dumps(_canonical(ident), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def provenance(config: dict) -> dict:
    return {"config_sha256": config_hash(config), "artifact_version": _pkg_version}


def _fmt(x: float) -> str:
    return repr(float(x))


def write_json(path: Path | str, payload: dict, config: dict) -> Path:
    path = Path(path)
    doc = {"provenance": provenance(config), **_canonical(payload)}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


def _open_csv(path: Path, config: dict):
    fh = open(path, "w", newline="")
    prov = provenance(config)
    fh.write(f"# config_sha256={prov['config_sha256']} artifact_version={prov['artifact_version']}\n")
    return fh, csv.writer(fh, lineterminator="\n")


def write_profile_csv(path: Path | str, profile: RadialProfile, config: dict) -> Path:
    """Profile as r,value,derivative rows; the metadata JSON goes alongside."""
    path = Path(path)
    fh, writer = _open_csv(path, config)
    with fh:
        writer.writerow(["r", "value", "derivative"])
        for r, v, d in zip(profile.grid.nodes, profile.values, profile.derivatives):
            writer.writerow([_fmt(r), _fmt(v), _fmt(d)])
    return path


def profile_metadata(profile: RadialProfile) -> dict:
    meta = {k: v for k, v in profile.meta.items() if isinstance(v, (int, float, str))}
    meta.update({
        "r0": profile.r0,
        "r_max": profile.r_max,
        "decay_exponent": profile.decay_exponent,
        "weight_power": profile.weight_power,
        "grid_points": int(len(profile.grid)),
    })
    return meta


def write_curve_csv(path: Path | str, curve, config: dict) -> Path:
    path = Path(path)
    fh, writer = _open_csv(path, config)
    with fh:
        writer.writerow(["lambda", "sigma", "degree"])
        for lam, sig in curve.samples:
            writer.writerow([_fmt(lam), _fmt(sig), curve.degree])
    return path


def write_shape_csv(path: Path | str, shape, config: dict) -> Path:
    """Boundary shape samples: sphere coordinates plus the radius value."""
    path = Path(path)
    dim = shape.points.shape[1]
    fh, writer = _open_csv(path, config)
    with fh:
        writer.writerow([f"x{i + 1}" for i in range(dim)] + ["radius"])
        for pt, rad in zip(shape.points, shape.radii):
            writer.writerow([_fmt(c) for c in pt] + [_fmt(rad)])
    return path


def write_table_csv(path: Path | str, header: list[str], rows: list[list], config: dict) -> Path:
    path = Path(path)
    fh, writer = _open_csv(path, config)
    with fh:
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) if isinstance(x, float) else x for x in row])
    return path
