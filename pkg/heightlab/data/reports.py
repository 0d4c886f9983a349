"""Report JSON, series CSV files and trajectory snapshots."""

import csv
import datetime
import json
import sys
import torch

from dataclasses import dataclass, field
from safetensors.torch import load_file, save_file

from heightlab import __version__
from heightlab.dynamics import HeightSeries, NormSeries
from heightlab.errors import NumericalFailure
from heightlab.operators import RangeBoundary


@dataclass
class Report:
    """Result of one command.

    Args:
        command (str): The command that produced the report.
        input (dict): Input descriptor (matrix hash, generator and params).
        properties (list[PropertyReport]): Algebraic property reports.
        verdicts (list[ConvexityVerdict]): Dynamics verdicts.
        summary (dict): Scalar summary values.
        config (dict): Echo of the effective configuration.
        timestamp (str, optional): UTC ISO-8601 time of creation.
    """

    command: str
    input: dict
    properties: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    timestamp: str | None = None
    version: str = __version__

    def stamp(self):
        now = datetime.datetime.now(datetime.timezone.utc)
        self.timestamp = now.isoformat()

    def violated(self):
        """Returns the tags of every violated property and verdict."""
        tags = [p.property for p in self.properties if p.violated]
        tags += [v.kind for v in self.verdicts if not v.holds]

        return tags

    def to_dict(self):
        res = {
            "command": self.command,
            "input": self.input,
            "properties": [p.to_dict() for p in self.properties],
            "verdicts": [v.to_dict() for v in self.verdicts],
            "summary": self.summary,
            "config": self.config,
            "version": self.version,
        }
        if self.timestamp is not None:
            res["timestamp"] = self.timestamp

        return res

    def dumps(self):
        """Serializes the report. Raises NumericalFailure if any value is
        NaN or infinite."""
        try:
            res = json.dumps(
                self.to_dict(), sort_keys=True, indent=2, allow_nan=False
            )
        except ValueError as e:
            raise NumericalFailure(f"Report holds a non-finite value: {e}")

        return res + "\n"


def write_report(report: Report, save_path: str | None = None):
    """Writes the report JSON to save_path, or to stdout if None."""
    if save_path is None:
        sys.stdout.write(report.dumps())
    else:
        with open(save_path, "w", encoding="utf-8") as f:
            f.write(report.dumps())


def _write_csv(save_path: str, header: list, rows):
    with open(save_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_height_csv(series: HeightSeries, save_path: str):
    header = ["t", "h", "hprime", "hsecond", "logh"]
    _write_csv(save_path, header, series.rows())


def write_range_csv(boundary: RangeBoundary, save_path: str):
    rows = (
        (theta, z.real, z.imag, boundary.m)
        for theta, z in zip(boundary.angles, boundary.boundary_points)
    )
    _write_csv(save_path, ["theta", "re", "im", "m"], rows)


def write_norms_csv(
    norms: NormSeries, save_path: str, series: HeightSeries | None = None
):
    """Writes t, E and, when a height series on the same grid is given, h."""
    columns = [norms.grid.tolist(), norms.E.tolist()]
    header = ["t", "E"]
    if series is not None:
        assert len(series.grid) == len(norms.grid), "Grids differ"
        columns.append(series.h.tolist())
        header.append("h")

    _write_csv(save_path, header, zip(*columns))


def save_snapshots(series: HeightSeries, save_path: str):
    """Saves u(t_k) as a float64 tensor of shape (N, n, 2) next to the grid."""
    assert series.snapshots is not None, "Series was built without snapshots"
    save_file(
        {
            "t": series.grid.points.contiguous(),
            "u": torch.view_as_real(series.snapshots).contiguous(),
            "u0": torch.view_as_real(series.u0).contiguous(),
        },
        save_path,
    )


def load_snapshots(load_path: str):
    """Returns (t, u) with u complex of shape (N, n)."""
    tensors = load_file(load_path)

    return tensors["t"], torch.view_as_complex(tensors["u"].contiguous())
