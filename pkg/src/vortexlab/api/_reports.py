# SPDX-FileCopyrightText: 2025-present vortexlab contributors
# SPDX-License-Identifier: MIT

# Part of vortexlab, a numerical laboratory for nonlocal vortex energies.
# Copyright (C) 2025-present vortexlab contributors
#
# Permission is hereby granted, free of charge, to any person obtaining a copy of this
# software and associated documentation files, to deal in the software without
# restriction, subject to the conditions of the MIT licence.  See LICENSES/MIT.txt.


"""Sweep reports and their CSV / plot-script emission."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Final

import numpy as np
from loguru import logger

from vortexlab.__about__ import __version__

if TYPE_CHECKING:
    from pathlib import Path

    from numpy.typing import NDArray

TABLE_HEADER: Final = ("eps", "value", "reference", "ratio", "wall_ms")


@dataclass(kw_only=True, frozen=True, slots=True)
class SweepRow:
    """One row of a sweep: a value against its reference at one epsilon.

    Note:
        Instances of this class are immutable once created.

    """

    eps: float
    """The length scale of the row (0 for experiments that do not sweep epsilon)."""

    value: float
    """The computed quantity."""

    reference: float
    """The quantity `value` is compared against."""

    wall_ms: float = 0.0
    """Wall time in milliseconds, or 0 when timing is not recorded."""

    extras: tuple[tuple[str, float], ...] = ()
    """Additional named diagnostics for this row."""

    @property
    def ratio(self) -> float:
        """value / reference, or NaN when the reference is 0."""
        if self.reference == 0:
            return math.nan
        return self.value / self.reference

    def extra(self, name: str) -> float:
        """Return the named extra diagnostic.

        Raises:
            KeyError: If the row has no such diagnostic.

        """
        for key, value in self.extras:
            if key == name:
                return value
        raise KeyError(name)


@dataclass(kw_only=True, frozen=True, slots=True)
class ReportMetadata:
    """Provenance of a report."""

    experiment: str = ""
    config_hash: str = ""
    seed: int = 0
    version: str = __version__


@dataclass(kw_only=True, frozen=True, slots=True)
class SweepReport:
    """The rows of a sweep, ordered by decreasing epsilon, plus their metadata.

    Note:
        Instances of this class are immutable once created.

    """

    rows: tuple[SweepRow, ...] = ()
    metadata: ReportMetadata = field(default_factory=ReportMetadata)
    passed: bool | None = None
    """Outcome of the acceptance check, or None when no check was run."""

    def __post_init__(self) -> None:
        """Validate the row order."""
        eps = [row.eps for row in self.rows]
        if any(a < b for a, b in zip(eps, eps[1:], strict=False)):
            message = f"Report rows must be ordered by decreasing eps, got: {eps}"
            raise ValueError(message)

    @property
    def ratios(self) -> tuple[float, ...]:
        """The ratio column."""
        return tuple(row.ratio for row in self.rows)

    def with_metadata(self, metadata: ReportMetadata) -> SweepReport:
        """Return a copy of the report carrying `metadata`."""
        return replace(self, metadata=metadata)

    def with_outcome(self, *, passed: bool) -> SweepReport:
        """Return a copy of the report carrying the acceptance outcome."""
        return replace(self, passed=passed)


def _format(value: float) -> str:
    # Shortest exact round-trip form.
    return repr(float(value))


def emit_table(
    report: SweepReport, path: Path, *, include_extras: bool = False
) -> None:
    """Write the report as CSV with the header `eps,value,reference,ratio,wall_ms`.

    The file holds the header and one line per row, nothing else; the metadata is
    recorded by [emit_plot_script][vortexlab.api.emit_plot_script].

    Args:
        report: The report to write.
        path: Destination file; parent directories must exist.
        include_extras: Append one column per extra diagnostic name, sorted by name.

    Raises:
        ValueError: If the file cannot be written.

    """
    extra_names = sorted({key for row in report.rows for key, _ in row.extras})
    header = list(TABLE_HEADER) + (extra_names if include_extras else [])
    try:
        with path.open("w", newline="", encoding="utf-8") as stream:
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(header)
            for row in report.rows:
                cells = [row.eps, row.value, row.reference, row.ratio, row.wall_ms]
                if include_extras:
                    extras = dict(row.extras)
                    cells += [extras.get(name, math.nan) for name in extra_names]
                writer.writerow([_format(cell) for cell in cells])
    except OSError as e:
        message = f"Unable to write report table: {path}"
        raise ValueError(message) from e
    logger.debug(f"Wrote {len(report.rows)} report rows to {path}")


def load_table(path: Path) -> NDArray[np.float64]:
    """Read a report table back as an array of shape (rows, columns)."""
    try:
        return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        message = f"Unable to read report table: {path}"
        raise ValueError(message) from e


def emit_plot_script(report: SweepReport, csv_path: Path, path: Path) -> None:
    """Write a gnuplot script that plots the ratio column of `csv_path` against eps.

    Raises:
        ValueError: If the file cannot be written.

    """
    meta = report.metadata
    lines = [
        "# vortexlab sweep report",
        f"# experiment: {meta.experiment}",
        f"# config_hash: {meta.config_hash}",
        f"# seed: {meta.seed}",
        f"# version: {meta.version}",
        f"# passed: {report.passed}",
        'set datafile separator ","',
        "set key autotitle columnhead",
        "set logscale x",
        'set xlabel "eps"',
        'set ylabel "value / reference"',
        f'plot "{csv_path.name}" using 1:4 with linespoints title "ratio"',
        "",
    ]
    try:
        path.write_text("\n".join(lines), encoding="utf-8")
    except OSError as e:
        message = f"Unable to write plot script: {path}"
        raise ValueError(message) from e
