import csv
import io
import math
import warnings

import numpy as np
import pytest

from sogeom import LoopTooCloseError
from sogeom.nodal import SCAN_DEFAULTS, ParamLoop, degeneracy_line, grid_scan, nodal_points, winding_number
from sogeom.phases import limit_phase, marginal_phase

PI = math.pi


def test_degeneracy_line_values():
    assert degeneracy_line(-0.5) == 1.0
    assert degeneracy_line(1.5, l=2) == -3.0


def test_degeneracy_line_extremal_rejected():
    with pytest.raises(ValueError):
        degeneracy_line(2.5, l=2)


def test_degeneracy_line_mu_zero_warns():
    with pytest.warns(UserWarning, match="singular"):
        assert degeneracy_line(0) == 0.0


def test_nodal_points_values():
    assert nodal_points(-0.5, 4 * PI) == [(PI, 1.0), (3 * PI, 1.0)]
    assert nodal_points(0.5, 3 * PI) == [(PI, -1.0), (3 * PI, -1.0)]
    assert nodal_points(0.5, 3.0) == []


def test_scan_small_grid_against_pointwise(ref_state):
    grid = grid_scan("S", ref_state, (0.0, 4 * PI), (-5.0, 7.0), 9, 13)
    assert grid.phase.shape == (9, 12)  # g = 0 column dropped
    assert 0.0 not in grid.gs
    for i, om in enumerate(grid.omegas):
        for j, g in enumerate(grid.gs):
            r = marginal_phase("S", ref_state, g, om)
            assert grid.defined[i, j] == r.defined
            if r.defined:
                assert grid.phase[i, j] == r.value
            assert grid.visibility[i, j] == r.visibility


def test_scan_parallel_identical(ref_state):
    a = grid_scan("S", ref_state, (0.0, 4 * PI), (-5.0, 7.0), 24, 17, jobs=1)
    b = grid_scan("S", ref_state, (0.0, 4 * PI), (-5.0, 7.0), 24, 17, jobs=3)
    assert a.to_csv() == b.to_csv()


def test_scan_features(ref_state):
    d = SCAN_DEFAULTS
    grid = grid_scan("S", ref_state, d["omega_range"], d["g_range"], d["nx"], d["ny"])
    i = int(np.argmin(np.abs(grid.omegas - PI)))
    j = int(np.argmin(np.abs(grid.gs - 1.0)))
    assert grid.omegas[i] == pytest.approx(PI) and grid.gs[j] == pytest.approx(1.0)
    assert not grid.defined[i, j]
    assert np.all(grid.phase[0, grid.defined[0]] == 0)
    undefined = np.argwhere(~grid.defined)
    assert set(undefined[:, 1]) == {j}


def test_scan_paschen_back_row(ref_state):
    grid = grid_scan("S", ref_state, (0.1, 3.0), (1000.0, 1000.0), 30, 1)
    pb = [limit_phase("paschen-back", "S", ref_state, om) for om in grid.omegas]
    assert np.max(np.abs(grid.phase[:, 0] - pb)) < 2e-3


def test_visibility_on_degeneracy_line(ref_state):
    grid = grid_scan("S", ref_state, (0.0, 4 * PI), (1.0, 1.0), 101, 1)
    assert np.max(np.abs(grid.visibility[:, 0] - np.abs(np.cos(grid.omegas / 2)))) < 1e-12


def test_csv_format(ref_state):
    grid = grid_scan("S", ref_state, (0.0, PI), (0.5, 1.0), 3, 2)
    text = grid.to_csv()
    assert "\r" not in text and text.endswith("\n")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["omega", "g", "phase", "visibility", "defined"]
    assert len(rows) == 1 + 6
    undefined = [r for r in rows[1:] if r[4] == "0"]
    # the whole g = 1 column lies on the degeneracy line
    assert [r[1] for r in undefined] == ["1"] * 3 and all(r[2] == "" for r in undefined)
    assert all(len(r[1]) <= 18 for r in rows[1:])


def test_scan_rejects_all_zero_g(ref_state):
    with pytest.raises(ValueError):
        grid_scan("S", ref_state, (0.0, 1.0), (0.0, 0.0), 2, 1)


def test_param_loop_closes_and_orients():
    loop = ParamLoop.rectangle((2.0, 4.0), (0.5, 1.5))
    assert np.array_equal(loop.points[0], loop.points[-1])
    assert loop.orientation == "ccw"
    assert loop.reversed().orientation == "cw"
    assert ParamLoop.rectangle((2.0, 4.0), (0.5, 1.5), clockwise=True).orientation == "cw"
    assert loop.signed_area == pytest.approx(2.0)


@pytest.mark.parametrize("pts", [
    [(1, -1), (2, 1), (2, 2)],
    [(1, 0), (2, 1), (2, 2)],
])
def test_param_loop_rejects_g_zero(pts):
    with pytest.raises(ValueError):
        ParamLoop(np.array(pts, dtype=float))


RECT = ParamLoop.rectangle((PI - 0.5, PI + 0.5), (0.5, 1.5))


@pytest.mark.parametrize("sub, loop, want", [
    ("S", RECT, 1),
    ("S", RECT.reversed(), -1),
    ("L", RECT, -1),
    ("S", ParamLoop.rectangle((0.5, 1.0), (2.0, 3.0)), 0),
    ("S", ParamLoop.rectangle((PI - 0.5, 3 * PI + 0.5), (0.5, 1.5)), 2),
])
def test_winding(ref_state, sub, loop, want):
    r = winding_number(sub, ref_state, loop)
    assert r.winding == want
    assert abs(r.change - 2 * PI * want) < 1e-9


def test_winding_sampling_invariant(ref_state):
    a = winding_number("S", ref_state, RECT, n_per_edge=16)
    b = winding_number("S", ref_state, RECT, n_per_edge=32)
    assert a.winding == b.winding == 1


def test_winding_negative_omega_node(ref_state):
    loop = ParamLoop.rectangle((-PI - 0.5, -PI + 0.5), (0.5, 1.5))
    assert abs(winding_number("S", ref_state, loop).winding) == 1


def test_winding_too_close(ref_state):
    loop = ParamLoop.rectangle((PI - 1e-4, PI + 0.5), (0.5, 1.5))
    with pytest.raises(LoopTooCloseError):
        winding_number("S", ref_state, loop)


def test_winding_trace_layout(ref_state):
    r = winding_number("S", ref_state, RECT, n_per_edge=8)
    assert tuple(r.trace[0][:2]) == tuple(RECT.points[0])
    assert r.trace[-1][2] - r.trace[0][2] == pytest.approx(r.change)
    assert "trace" not in r.to_dict(with_trace=False)
