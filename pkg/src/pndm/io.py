"""CSV output with a self-describing comment header.

Floats are written with ``repr``, the shortest decimal that round-trips.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .solvers import Trajectory


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def header_lines(command: str, config_lines: Iterable[str]) -> list[str]:
    return [f"# pndm {__version__} {command}", *(f"# {line}" for line in config_lines)]


def write_csv(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence],
    header: Sequence[str] = (),
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue())
    return path


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    """Return ``(columns, rows)``, skipping ``#`` comment lines."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    reader = csv.reader(lines)
    columns = next(reader)
    return columns, list(reader)


def trajectory_rows(traj: Trajectory):
    for step, ((t, x), n) in enumerate(zip(traj.states, traj.eval_counts)):
        yield [step, t, n, *x.tolist()]


def write_trajectory(path, traj: Trajectory, header: Sequence[str] = ()) -> Path:
    dim = traj.states[0][1].size
    cols = ["step", "t", "eval_count", *(f"x_{i}" for i in range(dim))]
    return write_csv(path, cols, trajectory_rows(traj), header)


def write_eps_log(path, traj: Trajectory, header: Sequence[str] = ()) -> Path:
    dim = traj.states[0][1].size
    cols = ["eval", "t", *(f"e_{i}" for i in range(dim))]
    rows = ([k + 1, t, *e.tolist()] for k, (t, e) in enumerate(traj.eps_log))
    return write_csv(path, cols, rows, header)


def load_trajectory(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(t, eval_count, states)`` from a trajectory CSV."""
    _, rows = read_csv(path)
    arr = np.array([[float(v) for v in r] for r in rows])
    return arr[:, 1], arr[:, 2].astype(int), arr[:, 3:]
