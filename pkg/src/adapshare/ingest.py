"""Control-channel trace ingestion: parse DCI-style CSV logs, keep the rows
that carry data grants, and resample per-millisecond PRB totals onto a
coarser uniform grid.

Pipeline: parse_dci_csv -> filter_data_transmissions -> resample_mean, then
merge_series pairs two one-sided results into a single (d_a, d_b) series.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .domain import DemandSeries

DCI_HEADER = ["sfn", "subframe", "rnti", "prb_count", "mcs", "dci_format", "timestamp"]

# DCI format tag that marks data transmissions in the traces we consume
DATA_DCI_FORMAT = "2B"


class SchemaMismatch(ValueError):
    """The trace file's header does not match the expected schema."""


class MalformedRow(ValueError):
    """A trace row failed validation; carries the 1-based row index."""

    def __init__(self, row: int, reason: str):
        super().__init__(f"row {row}: {reason}")
        self.row = row
        self.reason = reason


class AlignmentMismatch(ValueError):
    """Two series cannot be merged: spacing or timestamps disagree."""


@dataclass(frozen=True)
class DciRecord:
    """One decoded downlink control message."""

    sfn: int
    subframe: int
    rnti: int
    prb_count: int
    mcs: int
    dci_format: str
    timestamp: int  # milliseconds since epoch

    def __post_init__(self):
        if not 0 <= self.sfn <= 1023:
            raise ValueError(f"sfn out of range: {self.sfn}")
        if not 0 <= self.subframe <= 9:
            raise ValueError(f"subframe out of range: {self.subframe}")
        if self.prb_count < 0:
            raise ValueError(f"prb_count must be nonnegative: {self.prb_count}")


def parse_dci_csv(path) -> list[DciRecord]:
    """Parse a DCI trace CSV into records, in file order.

    Malformed rows raise MalformedRow with the offending row index rather
    than being skipped silently.
    """
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"DCI trace not found: {p}")
    records = []
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != DCI_HEADER:
            raise SchemaMismatch(f"{p}: expected header {','.join(DCI_HEADER)}, got {header}")
        for idx, cells in enumerate(reader, start=2):
            if not cells or (len(cells) == 1 and not cells[0].strip()):
                continue
            if len(cells) != len(DCI_HEADER):
                raise MalformedRow(idx, f"expected {len(DCI_HEADER)} fields, got {len(cells)}")
            try:
                rec = DciRecord(
                    sfn=int(cells[0]),
                    subframe=int(cells[1]),
                    rnti=int(cells[2]),
                    prb_count=int(cells[3]),
                    mcs=int(cells[4]),
                    dci_format=cells[5].strip(),
                    timestamp=int(cells[6]),
                )
            except ValueError as exc:
                raise MalformedRow(idx, str(exc)) from exc
            records.append(rec)
    return records


def filter_data_transmissions(records: list[DciRecord], dci_format: str = DATA_DCI_FORMAT) -> list[DciRecord]:
    """Keep only records with the given DCI format, order preserved."""
    return [r for r in records if r.dci_format == dci_format]


def millisecond_totals(records: list[DciRecord]) -> tuple[np.ndarray, np.ndarray]:
    """Sum prb_count over records sharing a millisecond timestamp.

    All grants in a subframe count toward network-level usage, regardless
    of RNTI. Returns (timestamps_ms, totals) sorted ascending.
    """
    if not records:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    ts = np.array([r.timestamp for r in records], dtype=np.int64)
    prbs = np.array([r.prb_count for r in records], dtype=np.float64)
    uniq, inverse = np.unique(ts, return_inverse=True)
    totals = np.zeros(len(uniq), dtype=np.float64)
    np.add.at(totals, inverse, prbs)
    return uniq, totals


def resample_mean(records: list[DciRecord], granularity_s: int, side_tag: str = "a") -> DemandSeries:
    """Average per-millisecond PRB totals into epoch-aligned windows of
    `granularity_s` seconds.

    Window k covers [k*G, (k+1)*G) milliseconds with G = granularity_s*1000;
    the output step's demand is the arithmetic mean of the totals falling in
    the window. Windows inside the covered span with no totals yield 0, so
    the output spacing stays uniform. Only the `side_tag` column is
    populated.
    """
    if granularity_s <= 0 or int(granularity_s) != granularity_s:
        raise ValueError(f"granularity_s must be a positive integer, got {granularity_s}")
    if side_tag not in ("a", "b"):
        raise ValueError(f"side_tag must be 'a' or 'b', got {side_tag!r}")
    if not records:
        raise ValueError("cannot resample an empty record list")
    ts_ms, totals = millisecond_totals(records)
    window_ms = int(granularity_s) * 1000
    windows = ts_ms // window_ms
    k0, k1 = int(windows[0]), int(windows[-1])
    n_windows = k1 - k0 + 1
    sums = np.zeros(n_windows, dtype=np.float64)
    counts = np.zeros(n_windows, dtype=np.int64)
    offsets = (windows - k0).astype(np.int64)
    np.add.at(sums, offsets, totals)
    np.add.at(counts, offsets, 1)
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    out_ts = (np.arange(k0, k1 + 1, dtype=np.int64)) * int(granularity_s)
    zeros = np.zeros_like(means)
    if side_tag == "a":
        return DemandSeries(out_ts, means, zeros, int(granularity_s))
    return DemandSeries(out_ts, zeros, means, int(granularity_s))


def merge_series(a: DemandSeries, b: DemandSeries) -> DemandSeries:
    """Pair two aligned series into one: a's populated column becomes d_a,
    b's becomes d_b."""
    if a.granularity != b.granularity:
        raise AlignmentMismatch(f"granularity mismatch: {a.granularity} vs {b.granularity}")
    if len(a) != len(b):
        raise AlignmentMismatch(f"length mismatch: {len(a)} vs {len(b)}")
    if not np.array_equal(a.timestamps, b.timestamps):
        raise AlignmentMismatch("timestamps are not aligned")
    col_a = a.column(a.populated_side() or "a")
    col_b = b.column(b.populated_side() or "b")
    return DemandSeries(a.timestamps.copy(), col_a.copy(), col_b.copy(), a.granularity)
