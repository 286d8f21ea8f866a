"""Wall-clock scaling of the column-coupling phase with the number of layers."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .cases import standing_wave_case
from .stepper import PhaseTimer, step

CSV_COLUMNS = ("nk", "coupling_time_s", "cg_time_s", "total_s")


@dataclass(frozen=True)
class BenchRow:
    nk: int
    coupling_time_s: float
    cg_time_s: float
    total_s: float


@dataclass
class BenchmarkTable:
    coupling: str
    rows: list

    @property
    def slope(self):
        """Least-squares slope of log(coupling time) against log(nk); None for one row."""
        if len(self.rows) < 2:
            return None
        nk = np.log([r.nk for r in self.rows])
        t = np.log([r.coupling_time_s for r in self.rows])
        return float(np.polyfit(nk, t, 1)[0])

    def to_csv(self, fh=None):
        out = fh or io.StringIO()
        writer = csv.writer(out)
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([r.nk, f"{r.coupling_time_s:.6e}", f"{r.cg_time_s:.6e}", f"{r.total_s:.6e}"])
        return out.getvalue() if fh is None else None


def scaling_benchmark(layer_counts, coupling="recursive", cells=50, steps=10, warmup=2,
                      depth=10.0, repeats=3, amplitude=0.01) -> BenchmarkTable:
    """Time the standing-wave case for each layer count at fixed total depth.

    The horizontal grid (``cells`` x ``cells``) and step count are held
    fixed.  The default amplitude stays below the thinnest top layer used
    (depth / 160) so no layer dries at high layer counts.  For every layer
    count the timed block of ``steps`` steps is repeated ``repeats`` times and the fastest block is kept, which filters
    scheduler noise without changing what is measured.
    """
    layer_counts = list(layer_counts)
    if layer_counts != sorted(layer_counts):
        raise ValueError("layer counts must be ascending")
    rows = []
    for nk in layer_counts:
        case, _ = standing_wave_case("full", nk=nk, dx=500.0 / cells, depth=depth,
                                     amplitude=amplitude, coupling=coupling)
        state = case.state
        for _ in range(warmup):
            state, _info = step(state, case.grid, case.params, case.cfg)
        best = None
        for _ in range(max(1, repeats)):
            timer = PhaseTimer()
            s = state
            for _ in range(steps):
                s, _info = step(s, case.grid, case.params, case.cfg, timer)
            row = BenchRow(nk, timer.seconds["coupling"], timer.seconds["cg"], timer.total())
            if best is None or row.coupling_time_s < best.coupling_time_s:
                best = row
        rows.append(best)
    return BenchmarkTable(coupling, rows)


def fit_ok(slope, lo=None, hi=None):
    if slope is None or math.isnan(slope):
        return False
    return (lo is None or slope >= lo) and (hi is None or slope <= hi)
