"""Time-series CSV, plain-text field snapshots and benchmark CSV output.

Snapshot layout (plain text, readable by any plotting tool)::

    ni nj nk dx dy
    t <time>
    <name> <d0> [<d1> ...]
    <values, one line per last-axis row>
    ...

Fields are written in C (row-major) order with 17 significant digits so a
round trip through the file is exact.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grid import Grid, State
from .stepper import total_volume

SNAPSHOT_FIELDS = ("zeta", "u", "v", "w", "nu_z")


class SnapshotError(ValueError):
    pass


@dataclass
class Snapshot:
    ni: int
    nj: int
    nk: int
    dx: float
    dy: float
    t: float
    fields: dict

    def to_state(self, grid: Grid) -> State:
        """Turn the stored fields into a State on ``grid``, checking every shape."""
        if (self.ni, self.nj, self.nk) != (grid.ni, grid.nj, grid.nk):
            raise SnapshotError(
                f"snapshot is {self.ni}x{self.nj}x{self.nk}, grid is {grid.ni}x{grid.nj}x{grid.nk}"
            )
        if not (np.isclose(self.dx, grid.dx) and np.isclose(self.dy, grid.dy)):
            raise SnapshotError("snapshot spacing does not match the grid")
        rest = State.rest(grid)
        kwargs = {}
        for name in SNAPSHOT_FIELDS:
            want = getattr(rest, name).shape
            if name not in self.fields:
                raise SnapshotError(f"snapshot lacks field {name!r}")
            arr = self.fields[name]
            if arr.shape != want:
                raise SnapshotError(f"field {name!r} has shape {arr.shape}, expected {want}")
            kwargs[name] = arr.copy()
        state = State(t=self.t, **kwargs)
        state.check(grid)
        return state


def write_snapshot(path, grid: Grid, state: State, extra=None):
    """Write the prognostic and diagnostic fields of ``state`` (plus ``h``)."""
    fields = {name: getattr(state, name) for name in SNAPSHOT_FIELDS}
    fields["h"] = grid.h
    fields.update(extra or {})
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"{grid.ni} {grid.nj} {grid.nk} {grid.dx:.17g} {grid.dy:.17g}\n")
        fh.write(f"t {state.t:.17g}\n")
        for name, arr in fields.items():
            arr = np.asarray(arr, dtype=float)
            fh.write(name + " " + " ".join(str(d) for d in arr.shape) + "\n")
            np.savetxt(fh, arr.reshape(-1, arr.shape[-1]), fmt="%.17g")
    return path


def read_snapshot(path) -> Snapshot:
    lines = Path(path).read_text().splitlines()
    try:
        head = lines[0].split()
        ni, nj, nk = (int(s) for s in head[:3])
        dx, dy = float(head[3]), float(head[4])
        tag, t = lines[1].split()
        if tag != "t":
            raise ValueError("second line must be 't <time>'")
        t = float(t)
        fields = {}
        pos = 2
        while pos < len(lines):
            if not lines[pos].strip():
                pos += 1
                continue
            name, *dims = lines[pos].split()
            shape = tuple(int(d) for d in dims)
            nrows = int(np.prod(shape[:-1], dtype=int)) if len(shape) > 1 else 1
            block = lines[pos + 1:pos + 1 + nrows]
            if len(block) != nrows:
                raise ValueError(f"field {name!r} is truncated")
            values = np.array([float(x) for row in block for x in row.split()])
            fields[name] = values.reshape(shape)
            pos += 1 + nrows
    except (IndexError, ValueError) as exc:
        raise SnapshotError(f"malformed snapshot {path}: {exc}") from None
    return Snapshot(ni, nj, nk, dx, dy, t, fields)


class SeriesWriter:
    """CSV time series: t, zeta at each probe, total volume, CG iterations."""

    def __init__(self, path, probes):
        self.probes = tuple(probes)
        self._fh = Path(path).open("w", newline="")
        self._csv = csv.writer(self._fh)
        self._csv.writerow(["t", *(f"zeta_{i}_{j}" for i, j in self.probes),
                            "volume", "cg_iterations"])

    def write(self, state: State, grid: Grid, cg_iterations: int):
        probes = [f"{state.zeta[i, j]:.10e}" for i, j in self.probes]
        self._csv.writerow([f"{state.t:.10g}", *probes,
                            f"{total_volume(state, grid):.16e}", cg_iterations])

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_benchmark_csv(path, table):
    with Path(path).open("w", newline="") as fh:
        table.to_csv(fh)
