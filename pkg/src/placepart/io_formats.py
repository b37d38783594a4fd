"""File formats: trajectory/partition CSV, VPCF feature binaries, partition
SVG maps, and evaluation-report JSON.

All writers are deterministic byte-for-byte; all loaders reject structurally
invalid input instead of repairing it (the only documented exception is the
trajectory loader's timestamp re-sort).
"""

from __future__ import annotations

import colorsys
import csv
import json
import os
import struct
from pathlib import Path

import numpy as np

from .core import FeatureMatrix, Partition, Trajectory
from .evaluation import EvaluationReport

VPCF_MAGIC = b"VPCF"
VPCF_VERSION = 1
_HEADER = struct.Struct("<4sIII")  # magic, version, n_rows, dim (little-endian)


class FormatError(ValueError):
    """Structurally invalid input file."""


class BadMagicError(FormatError):
    pass


class TruncatedFileError(FormatError):
    pass


class NonFiniteValueError(FormatError):
    pass


# --- trajectory CSV ---------------------------------------------------------

TRAJECTORY_COLUMNS = ["sample_id", "timestamp_s", "x_m", "y_m", "heading_rad"]


def load_trajectory_csv(path: str | os.PathLike) -> Trajectory:
    """Five-column trajectory CSV; rows are re-sorted by timestamp on load."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise FormatError(f"{path}: empty file")
        if set(TRAJECTORY_COLUMNS) - set(reader.fieldnames):
            raise FormatError(
                f"{path}: header must contain columns {TRAJECTORY_COLUMNS}, "
                f"got {reader.fieldnames}"
            )
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(
                    (
                        int(row["sample_id"]),
                        float(row["timestamp_s"]),
                        float(row["x_m"]),
                        float(row["y_m"]),
                        float(row["heading_rad"]),
                    )
                )
            except (TypeError, ValueError, KeyError) as exc:
                raise FormatError(f"{path}: malformed row at line {lineno}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path}: no data rows")
    ids = [r[0] for r in rows]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise FormatError(f"{path}: duplicate sample_id {dupes[:5]}")
    cols = list(zip(*rows))
    return Trajectory.from_arrays(*cols, frame_note=f"loaded from {Path(path).name}")


def write_trajectory_csv(traj: Trajectory, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for s in traj.samples:
            writer.writerow(
                [s.sample_id, repr(s.timestamp), repr(s.pose.x), repr(s.pose.y), repr(s.pose.heading)]
            )


# --- feature files ----------------------------------------------------------


def write_features(matrix: FeatureMatrix, path: str | os.PathLike) -> None:
    """VPCF binary (float32 payload), or decimal CSV when path ends in .csv."""
    if str(path).endswith(".csv"):
        np.savetxt(path, matrix.values, delimiter=",", fmt="%.9g")
        return
    values = np.ascontiguousarray(matrix.values, dtype="<f4")
    if not np.all(np.isfinite(values)):
        raise NonFiniteValueError(f"{path}: refusing to write non-finite features")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(VPCF_MAGIC, VPCF_VERSION, matrix.n_rows, matrix.dim))
        fh.write(values.tobytes())


def load_features(path: str | os.PathLike) -> FeatureMatrix:
    if str(path).endswith(".csv"):
        values = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
        if not np.all(np.isfinite(values)):
            raise NonFiniteValueError(f"{path}: non-finite feature values")
        return FeatureMatrix(values)
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise TruncatedFileError(f"{path}: truncated header ({len(header)} bytes)")
        magic, version, n_rows, dim = _HEADER.unpack(header)
        if magic != VPCF_MAGIC:
            raise BadMagicError(f"{path}: bad magic {magic!r}")
        if version != VPCF_VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        payload = fh.read()
    expected = n_rows * dim * 4
    if len(payload) != expected:
        raise TruncatedFileError(
            f"{path}: payload is {len(payload)} bytes, header declares {expected}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(n_rows, dim)
    if not np.all(np.isfinite(values)):
        raise NonFiniteValueError(f"{path}: non-finite feature values")
    return FeatureMatrix(values)


# --- partition CSV ----------------------------------------------------------


def write_partition_csv(partition: Partition, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "class_id"])
        for sid, label in zip(partition.sample_ids, partition.labels):
            writer.writerow([sid, int(label)])


def load_partition_csv(path: str | os.PathLike) -> Partition:
    sample_ids = []
    labels = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"sample_id", "class_id"}:
            raise FormatError(f"{path}: expected header sample_id,class_id")
        for lineno, row in enumerate(reader, start=2):
            try:
                sample_ids.append(int(row["sample_id"]))
                labels.append(int(row["class_id"]))
            except (TypeError, ValueError) as exc:
                raise FormatError(f"{path}: malformed row at line {lineno}: {exc}") from exc
    if not sample_ids:
        raise FormatError(f"{path}: no data rows")
    try:
        return Partition(tuple(sample_ids), np.array(labels, dtype=np.int64))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# --- SVG partition map ------------------------------------------------------

GOLDEN_ANGLE_DEG = 137.50776405003785


def class_color(class_id: int, palette_seed: int = 0) -> str:
    """Deterministic palette: golden-angle hue stepping from a seed offset."""
    hue = ((class_id + palette_seed) * GOLDEN_ANGLE_DEG) % 360.0
    r, g, b = colorsys.hls_to_rgb(hue / 360.0, 0.5, 0.75)
    return "#{:02x}{:02x}{:02x}".format(round(r * 255), round(g * 255), round(b * 255))


def render_partition_svg(
    traj: Trajectory,
    partition: Partition,
    path: str | os.PathLike,
    point_radius_px: float = 2.0,
) -> None:
    """One circle per sample, colored by place class, affinely scaled to the canvas.

    The VPC_PALETTE_SEED environment variable rotates the palette.
    """
    if partition.sample_ids != traj.sample_ids:
        raise ValueError("partition does not cover this trajectory")
    palette_seed = int(os.environ.get("VPC_PALETTE_SEED", "0"))
    pos = traj.positions()
    lo = pos.min(axis=0)
    span = pos.max(axis=0) - lo
    size = 640.0
    margin = 4.0 * point_radius_px + 4.0
    scale = (size - 2 * margin) / max(span.max(), 1e-12)

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:g}" height="{size:g}" '
        f'viewBox="0 0 {size:g} {size:g}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for (x, y), label in zip(pos, partition.labels):
        px = margin + (x - lo[0]) * scale
        py = size - margin - (y - lo[1]) * scale  # y up in world, down in SVG
        lines.append(
            f'<circle cx="{px:.3f}" cy="{py:.3f}" r="{point_radius_px:g}" '
            f'fill="{class_color(int(label), palette_seed)}"/>'
        )
    lines.append("</svg>")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


# --- report JSON ------------------------------------------------------------


def _sig6(x: float) -> float:
    return float(f"{x:.6g}")


def report_to_dict(report: EvaluationReport, strategy: str, config: dict) -> dict:
    return {
        "strategy": strategy,
        "config": config,
        "n_classes": report.n_classes,
        "n_valid_tests": report.n_valid_tests,
        "n_invalid_tests": report.n_invalid_tests,
        "sr_top1": _sig6(report.sr_top1),
        f"sr_top{report.top_x}": _sig6(report.sr_topx),
        "nsr_top1": _sig6(report.nsr_top1),
        "mean_class_size": _sig6(report.mean_class_size),
        "class_size_histogram": [list(pair) for pair in report.class_size_histogram],
    }


def write_report_json(
    report: EvaluationReport, path: str | os.PathLike, strategy: str, config: dict
) -> None:
    payload = json.dumps(report_to_dict(report, strategy, config), indent=2) + "\n"
    Path(path).write_bytes(payload.encode("utf-8"))


def load_report_json(path: str | os.PathLike) -> dict:
    with open(path) as fh:
        return json.load(fh)
