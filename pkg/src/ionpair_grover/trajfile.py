"""Reading and writing trajectory files.

CSV layout::

    # tool: ionpair_grover <version>
    # q: <qubits>
    # marked: <bitstring>
    # scheme: paper|standard
    # iterations: <n>
    iteration,basis,bitstring,probability
    0,0,000,0.125
    ...

Rows are sorted by ``(iteration, basis)``; probabilities use ``repr`` of the
double so files round-trip exactly.  The JSON mirror holds the same header
as an object and the rows as ``[iteration, basis, bitstring, probability]``
lists.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from . import __version__
from .engine import Trajectory

COLUMNS = ("iteration", "basis", "bitstring", "probability")
SUM_TOL = 1e-9


@dataclass
class TrajectoryFile:
    header: dict
    rows: list

    def probabilities(self) -> np.ndarray:
        q = int(self.header["q"])
        n_rec = int(self.header["iterations"]) + 1
        out = np.zeros((n_rec, 2**q))
        for n, b, _, p in self.rows:
            out[n, b] = p
        return out


def from_trajectory(traj: Trajectory) -> TrajectoryFile:
    header = {
        "tool": f"ionpair_grover {__version__}",
        "q": traj.q,
        "marked": traj.marked.bitstring,
        "scheme": traj.scheme,
        "iterations": traj.n_iters,
    }
    if traj.is_extension:
        header["start"] = traj.start.bitstring
    probs = traj.probabilities
    rows = [
        (n, b, format(b, f"0{traj.q}b"), float(probs[n, b]))
        for n in range(probs.shape[0])
        for b in range(probs.shape[1])
    ]
    return TrajectoryFile(header, rows)


def dumps(tf: TrajectoryFile, fmt: str = "csv") -> str:
    if fmt == "json":
        return json.dumps({"header": tf.header, "rows": [list(r) for r in tf.rows]}, indent=1) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    for key, value in tf.header.items():
        buf.write(f"# {key}: {value}\n")
    buf.write(",".join(COLUMNS) + "\n")
    for n, b, bits, p in tf.rows:
        buf.write(f"{n},{b},{bits},{p!r}\n")
    return buf.getvalue()


def loads(text: str, fmt: str = "csv") -> TrajectoryFile:
    if fmt == "json":
        data = json.loads(text)
        rows = [(int(n), int(b), str(s), float(p)) for n, b, s, p in data["rows"]]
        return TrajectoryFile(data["header"], rows)
    header, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    if tuple(next(reader)) != COLUMNS:
        raise ValueError("unexpected column header")
    rows = [(int(n), int(b), s, float(p)) for n, b, s, p in reader]
    for key in ("q", "iterations"):
        header[key] = int(header[key])
    return TrajectoryFile(header, rows)


def check(tf: TrajectoryFile) -> list:
    """Problems with a file's invariants; empty when the file is valid."""
    problems = []
    keys = [(n, b) for n, b, _, _ in tf.rows]
    if keys != sorted(keys):
        problems.append("rows not sorted by (iteration, basis)")
    q = int(tf.header["q"])
    if len(tf.header["marked"]) != q:
        problems.append("marked bitstring length differs from q")
    sums = tf.probabilities().sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > SUM_TOL)
    if bad.size:
        problems.append(f"probabilities do not sum to 1 at iterations {bad.tolist()}")
    return problems
