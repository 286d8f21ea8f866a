import csv

import numpy as np
import pytest

from freesurf3d.bench import BenchmarkTable, BenchRow
from freesurf3d.config import ConfigError, load_config, parse_config
from freesurf3d.grid import GridSpec, State, build_grid
from freesurf3d.output import (
    SeriesWriter,
    SnapshotError,
    read_snapshot,
    write_benchmark_csv,
    write_snapshot,
)

BASE = """
[grid]
ni = 6
nj = 5
nk = 4
dx = 20
dy = 25
depth = 8

[physics]
f = 1e-4
nu_h = 0.5
nu_z = 0.02
friction = chezy
chezy = 60

[forcing]
tau_x = 0.1
tau_y = -0.05
rho = 1025

[time]
dt = 2
t_end = 20
coupling = direct

[output]
directory = results
probes = 1,1; 4,3
every = 2
"""


def with_section(text, extra):
    return BASE + "\n" + text + "\n" + extra


class TestParseConfig:
    def test_full_example(self, tmp_path):
        rc = parse_config(BASE, base_dir=tmp_path)
        assert (rc.grid.ni, rc.grid.nj, rc.grid.nk) == (6, 5, 4)
        np.testing.assert_allclose(rc.grid.dz_ref, 2.0)
        assert rc.grid.f == 1e-4 and rc.grid.g == 9.81
        assert rc.params.tau_wx == pytest.approx(0.1 / 1025)      # converted once, kinematic
        assert rc.params.tau_wy == pytest.approx(-0.05 / 1025)
        assert rc.params.friction == "chezy" and rc.params.chezy == 60
        assert rc.step.dt == 2 and rc.step.nsteps == 10 and rc.step.coupling == "direct"
        assert rc.output.directory == tmp_path / "results"
        assert rc.output.probes == ((1, 1), (4, 3))
        assert rc.initial.type == "rest"

    def test_layer_list(self):
        text = BASE.replace("depth = 8", "dz = 1, 2, 2, 3")
        rc = parse_config(text)
        np.testing.assert_array_equal(rc.grid.dz_ref, [1, 2, 2, 3])
        assert rc.grid.h[0, 0] == 8

    def test_initial_section(self, tmp_path):
        rc = parse_config(BASE + "\n[initial]\ntype = snapshot\npath = snap.txt\n", tmp_path)
        assert rc.initial.type == "snapshot" and rc.initial.path == tmp_path / "snap.txt"

    @pytest.mark.parametrize("mutate,match", [
        (lambda t: t.replace("[forcing]", "[wind]"), "section"),
        (lambda t: t.replace("dx = 20", "dx = twenty"), "dx"),
        (lambda t: t.replace("dx = 20", "dx = -20"), "positive"),
        (lambda t: t.replace("nk = 4", ""), "nk"),
        (lambda t: t.replace("friction = chezy", "friction = magic"), "friction"),
        (lambda t: t.replace("rho = 1025", "rho = 0"), "rho"),
        (lambda t: t.replace("coupling = direct", "coupling = lu"), "coupling"),
        (lambda t: t.replace("t_end = 20", "t_end = 1"), "t_end"),
        (lambda t: t.replace("probes = 1,1; 4,3", "probes = 9,9"), "outside"),
        (lambda t: t.replace("probes = 1,1; 4,3", "probes = 1"), "probe"),
        (lambda t: t.replace("depth = 8", "dz = 1, 2"), "dz"),
        (lambda t: t.replace("nu_h = 0.5", "nu_h = 0.5\nnu_v = 1"), "unknown"),
        (lambda t: t + "\n[initial]\ntype = snapshot\n", "path"),
        (lambda t: t + "\n[initial]\ntype = dambreak\n", "type"),
        (lambda t: "not an ini file", "parse"),
    ])
    def test_errors(self, mutate, match):
        with pytest.raises(ConfigError, match=match):
            parse_config(mutate(BASE))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.ini")

    def test_load_resolves_relative_paths(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text(BASE)
        assert load_config(path).output.directory == tmp_path / "results"


class TestSnapshot:
    @pytest.fixture
    def grid_state(self):
        h = np.full((4, 3), 3.0)
        h[0, 0] = 1.0
        grid = build_grid(GridSpec(4, 3, 3, 12.5, 7.0, np.ones(3), h))
        rng = np.random.default_rng(0)
        state = State.rest(grid)
        state.zeta = rng.normal(0, 0.1, state.zeta.shape)
        state.u = np.where(grid.u_mask, rng.normal(size=state.u.shape), 0.0)
        state.v = np.where(grid.v_mask, rng.normal(size=state.v.shape), 0.0)
        state.w = rng.normal(size=state.w.shape) / 3
        state.nu_z[:] = 1e-2 / 3
        state.t = 123.456789
        return grid, state

    def test_round_trip_is_exact(self, grid_state, tmp_path):
        grid, state = grid_state
        path = write_snapshot(tmp_path / "s.txt", grid, state)
        snap = read_snapshot(path)
        assert (snap.ni, snap.nj, snap.nk, snap.dx, snap.dy) == (4, 3, 3, 12.5, 7.0)
        back = snap.to_state(grid)
        assert back.t == state.t
        for name in ("zeta", "u", "v", "w", "nu_z"):
            np.testing.assert_array_equal(getattr(back, name), getattr(state, name))
        np.testing.assert_array_equal(snap.fields["h"], grid.h)

    def test_header_layout(self, grid_state, tmp_path):
        grid, state = grid_state
        lines = write_snapshot(tmp_path / "s.txt", grid, state).read_text().splitlines()
        assert lines[0].split() == ["4", "3", "3", "12.5", "7"]
        assert lines[1].startswith("t ")
        assert lines[2].split() == ["zeta", "4", "3"]
        assert len(lines[3].split()) == 3

    def test_shape_mismatch(self, grid_state, tmp_path):
        grid, state = grid_state
        path = write_snapshot(tmp_path / "s.txt", grid, state)
        other = build_grid(GridSpec.uniform(5, 3, 3, 12.5, 7.0, 3.0))
        with pytest.raises(SnapshotError):
            read_snapshot(path).to_state(other)

    def test_truncated_file(self, grid_state, tmp_path):
        grid, state = grid_state
        path = write_snapshot(tmp_path / "s.txt", grid, state)
        path.write_text("\n".join(path.read_text().splitlines()[:5]))
        with pytest.raises(SnapshotError):
            read_snapshot(path)


class TestCsvWriters:
    def test_series(self, tmp_path):
        grid = build_grid(GridSpec.uniform(3, 3, 2, 10.0, 10.0, 2.0))
        state = State.rest(grid)
        state.zeta[1, 2] = 0.05
        with SeriesWriter(tmp_path / "ts.csv", [(1, 2), (0, 0)]) as w:
            w.write(state, grid, 7)
        rows = list(csv.reader((tmp_path / "ts.csv").open()))
        assert rows[0] == ["t", "zeta_1_2", "zeta_0_0", "volume", "cg_iterations"]
        assert float(rows[1][1]) == 0.05 and float(rows[1][3]) == pytest.approx(1800.0 + 5.0)
        assert rows[1][4] == "7"

    def test_benchmark(self, tmp_path):
        table = BenchmarkTable("recursive", [BenchRow(10, 1e-3, 2e-3, 5e-3)])
        write_benchmark_csv(tmp_path / "b.csv", table)
        rows = list(csv.reader((tmp_path / "b.csv").open()))
        assert rows[0] == ["nk", "coupling_time_s", "cg_time_s", "total_s"]
        assert float(rows[1][3]) == pytest.approx(5e-3)
