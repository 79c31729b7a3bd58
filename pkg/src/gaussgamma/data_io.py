"""Reading price series, computing returns, and exporting plot-ready curves."""

from __future__ import annotations

import csv
import io
import math
import re
from importlib import resources
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import MissingColumn, ParseError, TooShort
from .mixture import MixtureModel

# plain decimal or scientific notation; no thousands separators, no
# underscores, no nan/inf
# Freedman-Diaconis explodes when the IQR is tiny relative to the span
MAX_AUTO_BINS = 10_000

_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class ReturnSeries:
    values: np.ndarray
    source: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size == 0:
            raise ValueError("a return series must be non-empty")
        if not np.all(np.isfinite(v)):
            raise ValueError("returns must be finite")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class HistogramSpec:
    bin_count: Optional[int] = None  # None: Freedman-Diaconis
    range: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.bin_count is not None and self.bin_count < 1:
            raise ValueError("bin_count must be >= 1")
        if self.range is not None and not self.range[0] < self.range[1]:
            raise ValueError("histogram range needs lo < hi")


def parse_number(text: str, line: int) -> float:
    s = text.strip()
    if not _NUMBER.match(s):
        raise ParseError(line, f"not a number: {text!r}")
    return float(s)


def _sniff_delimiter(first_line: str) -> str:
    return "\t" if "\t" in first_line else ","


def load_series(
    path: Union[str, Path],
    column: Union[str, int] = 0,
    has_header: bool = False,
) -> np.ndarray:
    """Read one numeric column of a comma- or tab-delimited file.

    ``column`` is a header name (requires ``has_header``) or a zero-based
    index.  Blank lines are skipped; row order is preserved.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        text = fh.read()
    lines = text.splitlines()
    first = next((ln for ln in lines if ln.strip()), "")
    reader = csv.reader(io.StringIO(text), delimiter=_sniff_delimiter(first))

    index: Optional[int] = None
    if isinstance(column, int) and not isinstance(column, bool):
        index = column
    elif isinstance(column, str) and column.strip().lstrip("-").isdigit() and not has_header:
        index = int(column)
    if index is not None and index < 0:
        raise MissingColumn(f"column index {index} is negative")

    values = []
    header_seen = not has_header
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if not header_seen:
            header_seen = True
            names = [c.strip() for c in row]
            if index is None:
                if column not in names:
                    raise MissingColumn(f"no column named {column!r} in header {names}")
                index = names.index(column)
            continue
        if index is None:
            raise MissingColumn(f"column {column!r} given by name but the file has no header")
        if index >= len(row):
            raise MissingColumn(f"line {line} has {len(row)} columns, column index {index} requested")
        values.append(parse_number(row[index], line))
    return np.asarray(values, dtype=float)


def prices_to_returns(prices: Sequence[float], log_returns: bool = False, source: str = "") -> ReturnSeries:
    """Day-over-day price differences (or log-price differences)."""
    p = np.asarray(prices, dtype=float)
    if p.size < 2:
        raise TooShort(f"need at least 2 prices, got {p.size}")
    if log_returns:
        if np.any(p <= 0):
            raise ValueError("log returns need strictly positive prices")
        p = np.log(p)
    return ReturnSeries(np.diff(p), source=source)


def freedman_diaconis_bins(data) -> int:
    x = np.asarray(data, dtype=float)
    q75, q25 = np.percentile(x, [75, 25])
    iqr = q75 - q25
    span = x.max() - x.min()
    if iqr <= 0 or span <= 0:
        return 1
    width = 2.0 * iqr / x.size ** (1.0 / 3.0)
    return int(min(MAX_AUTO_BINS, max(1, math.ceil(span / width))))


def histogram(data, spec: HistogramSpec = HistogramSpec()) -> tuple[np.ndarray, np.ndarray]:
    """Bin centres and relative counts (summing to one)."""
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise ValueError("data must be non-empty")
    bins = spec.bin_count if spec.bin_count is not None else freedman_diaconis_bins(x)
    lo, hi = spec.range if spec.range is not None else (x.min(), x.max())
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    total = counts.sum()
    if total == 0:
        raise ValueError(f"no data falls inside the histogram range [{lo}, {hi}]")
    rel = counts / total
    return 0.5 * (edges[:-1] + edges[1:]), rel


def density_curve(model: MixtureModel, lo: float, hi: float, points: int) -> tuple[np.ndarray, np.ndarray]:
    if not lo < hi:
        raise ValueError("density grid needs lo < hi")
    if points < 2:
        raise ValueError("density grid needs at least 2 points")
    x = np.linspace(lo, hi, points)
    return x, model.pdf(x)


def write_columns(path: Union[str, Path], header: Sequence[str], *columns) -> None:
    """Write equal-length columns as CSV with full round-trip precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def bundled_prices_path() -> Path:
    """Path of the synthetic 1514-day price file shipped with the package
    (columns ``day,price``)."""
    return Path(str(resources.files("gaussgamma") / "data" / "synthetic_prices.csv"))
