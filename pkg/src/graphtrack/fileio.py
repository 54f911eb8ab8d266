"""CSV and JSON file formats shared by the library and the CLI.

Edge lists are CSV with header ``i,j,weight`` (0-based node ids, i < j, one
row per nonzero edge).  Signal files are CSV with one signal per row and n
columns.  Floats are written with 17 significant digits so re-reading a file
reproduces the values bit-exactly.
"""

from __future__ import annotations

import csv
import json
import numpy as np

from .graphcore import EdgeIndexing


def fmt(x: float) -> str:
    """Round-trip float formatting (17 significant digits)."""
    return format(float(x), ".17g")


def write_edge_csv(path, indexing: EdgeIndexing, w) -> None:
    w = indexing.check_edge_vector(w)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "weight"])
        for e in np.nonzero(w)[0]:
            writer.writerow([int(indexing.rows[e]), int(indexing.cols[e]), fmt(w[e])])


def read_edge_csv(path, n: int | None = None) -> tuple[np.ndarray, EdgeIndexing]:
    """Read an edge list; n is inferred as max node id + 1 unless given."""
    entries = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            i, j, wt = int(row["i"]), int(row["j"]), float(row["weight"])
            if i >= j:
                raise ValueError(f"edge ({i}, {j}) violates i < j")
            entries.append((i, j, wt))
    if n is None:
        if not entries:
            raise ValueError("cannot infer node count from an empty edge list")
        n = max(j for _, j, _ in entries) + 1
    indexing = EdgeIndexing(n)
    w = np.zeros(indexing.r)
    for i, j, wt in entries:
        w[indexing.slot_of(i, j)] = wt
    return w, indexing


def write_signal_csv(path, signals) -> None:
    signals = np.atleast_2d(np.asarray(signals, dtype=float))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in signals:
            writer.writerow([fmt(x) for x in row])


def read_signal_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [[float(x) for x in row] for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"no signals in {path}")
    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise ValueError(f"ragged signal file {path}: row widths {sorted(widths)}")
    return np.asarray(rows)


def write_manifest(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
