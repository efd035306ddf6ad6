"""Panel CSV ingestion and serialization.

File format: a header row ``period,<treated>,<control>...`` followed by one
row per period.  Periods must be strictly increasing integers with no gaps
and every cell must parse as a finite real.  The treatment window (first
and last transition period, inclusive) is supplied separately, e.g. via the
``--window`` flag.
"""

from __future__ import annotations

import csv
import io as _io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .panel import Panel

# 17 significant digits: lossless float round-trip.
FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True)
class PanelFile:
    """Raw parsed panel CSV: periods plus one named series per unit."""

    periods: np.ndarray
    unit_labels: tuple[str, ...]
    values: np.ndarray  # shape (n_periods, n_units); column 0 is treated

    @property
    def n_periods(self) -> int:
        return self.periods.size


def read_panel_csv(source) -> PanelFile:
    """Parse a panel CSV from a path or file object.

    Malformed cells are reported with their line and column.
    """
    close = False
    if isinstance(source, (str, bytes)):
        fh = open(source, "r", newline="")
        close = True
    else:
        fh = source
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError("panel CSV is empty") from None
        header = [h.strip() for h in header]
        if len(header) < 3:
            raise ValidationError(
                "panel CSV needs a period column, a treated column, and at "
                f"least one control column; got {len(header)} columns"
            )
        periods = []
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValidationError(
                    f"line {line_no}: expected {len(header)} cells, got {len(row)}"
                )
            try:
                periods.append(int(row[0]))
            except ValueError:
                raise ValidationError(
                    f"line {line_no}, column 'period': {row[0]!r} is not an integer"
                ) from None
            vals = []
            for col, cell in zip(header[1:], row[1:]):
                try:
                    value = float(cell)
                except ValueError:
                    raise ValidationError(
                        f"line {line_no}, column {col!r}: {cell!r} is not a number"
                    ) from None
                if not math.isfinite(value):
                    raise ValidationError(
                        f"line {line_no}, column {col!r}: non-finite value"
                    )
                vals.append(value)
            rows.append(vals)
    finally:
        if close:
            fh.close()
    if len(rows) < 5:
        raise ValidationError("panel CSV has fewer than 5 data rows")
    periods = np.asarray(periods, dtype=int)
    gaps = np.diff(periods)
    if np.any(gaps <= 0):
        bad = periods[1:][gaps <= 0][0]
        raise ValidationError(f"periods must be strictly increasing; problem at {bad}")
    if np.any(gaps != 1):
        after = periods[:-1][gaps != 1][0]
        raise ValidationError(f"gap in periods after {after}")
    return PanelFile(
        periods=periods,
        unit_labels=tuple(header[1:]),
        values=np.asarray(rows, dtype=float),
    )


def parse_window(text: str) -> tuple[int, int]:
    """Parse an inclusive treatment window 'START:END' (or a single period)."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            start = end = int(parts[0])
        elif len(parts) == 2:
            start, end = int(parts[0]), int(parts[1])
        else:
            raise ValueError
    except ValueError:
        raise ValidationError(f"window must look like 'START:END', got {text!r}") from None
    if end < start:
        raise ValidationError(f"window end {end} precedes start {start}")
    return start, end


def panel_from_file(pf: PanelFile, window: tuple[int, int], log: bool = False) -> Panel:
    """Build an estimation panel from a parsed file and a treatment window.

    The window gives the first and last transition period (inclusive); the
    window must lie inside the observed range with at least two periods on
    each side.  ``log=True`` takes natural logs of all outcomes (requires
    strictly positive values).
    """
    start, end = window
    periods = pf.periods
    if start < periods[0] or end > periods[-1]:
        raise ValidationError(
            f"window {start}:{end} outside the observed range "
            f"{periods[0]}..{periods[-1]}"
        )
    n_pre = int(np.sum(periods < start))
    n_trans = int(np.sum((periods >= start) & (periods <= end)))
    n_post = int(np.sum(periods > end))
    if n_pre < 2 or n_post < 2:
        raise ValidationError(
            f"window {start}:{end} leaves {n_pre} pre- and {n_post} "
            "post-treatment periods; need at least 2 on each side"
        )
    values = pf.values
    if log:
        if np.any(values <= 0):
            raise ValidationError("log transform requires strictly positive outcomes")
        values = np.log(values)
    return Panel(
        treated=values[:, 0],
        controls=tuple(values[:, j] for j in range(1, values.shape[1])),
        n_pre=n_pre,
        n_transition=n_trans,
        n_post=n_post,
        treated_label=pf.unit_labels[0],
        control_labels=tuple(pf.unit_labels[1:]),
        periods=periods,
    )


def panel_to_csv(panel: Panel, destination) -> None:
    """Write a panel back to CSV with lossless float formatting."""
    if panel.periods is None:
        # Gap-free synthetic labels: pre-treatment periods are negative and
        # the transition block starts at 0.
        periods = np.arange(-panel.n_pre, panel.n_transition + panel.n_post)
    else:
        periods = panel.periods
    close = False
    if isinstance(destination, (str, bytes)):
        fh = open(destination, "w", newline="")
        close = True
    else:
        fh = destination
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["period", panel.treated_label, *panel.control_labels])
        cols = [panel.treated, *panel.controls]
        for i, period in enumerate(periods):
            writer.writerow([int(period)] + [FLOAT_FORMAT % col[i] for col in cols])
    finally:
        if close:
            fh.close()


def panel_to_csv_text(panel: Panel) -> str:
    buf = _io.StringIO()
    panel_to_csv(panel, buf)
    return buf.getvalue()
