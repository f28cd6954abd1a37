"""
Degeneracy lines, nodal points and winding detection in the ``(Omega, g)``
plane.

Marginal phases are undefined on the line ``g = -2 mu`` and the visibility
vanishes on it at ``Omega = (2p + 1) pi``.  A nodal point is detected by the
net change of the continuously tracked marginal phase around a closed loop.

Orientation of a :class:`ParamLoop` is measured with ``g`` on the horizontal
axis and ``Omega`` on the vertical axis, the layout of the phase surface
plotted over ``(g, Omega)``.  Vertices are nevertheless stored as
``(Omega, g)`` pairs.
"""

from __future__ import annotations

import csv
import io
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import LoopTooCloseError, NumericalDiagnosticError
from .phases import Subsystem, interference_sum, marginal_phase
from .spin_orbit import QuantumNumbers, twice

__all__ = [
    "ScanGrid",
    "ParamLoop",
    "WindingResult",
    "SCAN_DEFAULTS",
    "degeneracy_line",
    "nodal_points",
    "grid_scan",
    "winding_number",
]

SCAN_DEFAULTS = {
    "sub": "S",
    "l": 2,
    "mu": -0.5,
    "branch": "-",
    "omega_range": (0.0, 4 * math.pi),
    "g_range": (-5.0, 7.0),
    "nx": 201,
    "ny": 201,
}


def _check_interior(mu, l):
    if l is not None and abs(twice(mu)) >= 2 * l + 1:
        raise ValueError(f"mu = {mu} is extremal for l = {l}; its marginals never mix")


def degeneracy_line(mu, l: int | None = None) -> float:
    """Coupling ratio ``g = -2 mu`` at which the marginal states degenerate."""
    _check_interior(mu, l)
    g = -2.0 * float(mu)
    if g == 0.0:
        warnings.warn("degeneracy line coincides with the singular decoupling point g = 0", stacklevel=2)
    return g


def nodal_points(mu, omega_max: float, l: int | None = None) -> list[tuple[float, float]]:
    """Zero-visibility points ``((2p+1) pi, -2 mu)`` with ``p >= 0``."""
    _check_interior(mu, l)
    g = -2.0 * float(mu)
    pts = []
    p = 0
    while (2 * p + 1) * math.pi <= omega_max * (1 + 1e-15):
        pts.append(((2 * p + 1) * math.pi, g))
        p += 1
    return pts


@dataclass(frozen=True, eq=False)
class ScanGrid:
    """Marginal phase sampled on a rectangular ``(Omega, g)`` lattice.

    Arrays are indexed ``[i_omega, j_g]``.  Undefined cells hold ``nan``.
    """

    sub: Subsystem
    qn: QuantumNumbers
    omegas: np.ndarray
    gs: np.ndarray
    phase: np.ndarray
    visibility: np.ndarray
    defined: np.ndarray

    def rows(self):
        for i, om in enumerate(self.omegas):
            for j, g in enumerate(self.gs):
                yield om, g, self.phase[i, j], self.visibility[i, j], bool(self.defined[i, j])

    def to_csv(self, fh=None) -> str | None:
        """Write ``omega,g,phase,visibility,defined`` rows, Omega outermost."""
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["omega", "g", "phase", "visibility", "defined"])
        for om, g, ph, vis, ok in self.rows():
            w.writerow([_fmt(om), _fmt(g), _fmt(ph) if ok else "", _fmt(vis), 1 if ok else 0])
        return buf.getvalue() if fh is None else None


def _fmt(x: float) -> str:
    s = format(float(x), ".12g")
    return "0" if s == "-0" else s


def _axis(lo: float, hi: float, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("resolution must be positive")
    if n == 1:
        return np.array([float(lo)])
    return np.linspace(float(lo), float(hi), n)


def _scan_rows(args):
    sub, qn, omegas, gs = args
    out = []
    for om in omegas:
        row = [marginal_phase(sub, qn, g, om) for g in gs]
        out.append(row)
    return out


def grid_scan(sub, qn: QuantumNumbers, omega_range, g_range, nx: int, ny: int, jobs: int = 1) -> ScanGrid:
    """Evaluate the marginal phase on an ``nx`` by ``ny`` lattice.

    Both axes include their endpoints; a single point takes the lower bound.
    A ``g = 0`` column is dropped.  Cells are independent, so ``jobs > 1``
    spreads rows of constant Omega over worker processes.
    """
    sub = Subsystem.parse(sub)
    omegas = _axis(*omega_range, nx)
    gs = _axis(*g_range, ny)
    gs = gs[gs != 0.0]
    if len(gs) == 0:
        raise ValueError("g range contains no nonzero values")
    if jobs is None or jobs < 1:
        jobs = os.cpu_count() or 1
    if jobs == 1 or len(omegas) < 2 * jobs:
        rows = _scan_rows((sub, qn, omegas, gs))
    else:
        chunks = np.array_split(omegas, jobs)
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = ex.map(_scan_rows, [(sub, qn, c, gs) for c in chunks if len(c)])
            rows = [r for part in parts for r in part]
    phase = np.array([[c.value for c in r] for r in rows])
    vis = np.array([[c.visibility for c in r] for r in rows])
    ok = np.array([[c.defined for c in r] for r in rows], dtype=bool)
    return ScanGrid(sub, qn, omegas, gs, phase, vis, ok)


@dataclass(frozen=True, eq=False)
class ParamLoop:
    """Closed polyline in the ``(Omega, g)`` plane."""

    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2 or p.shape[1] != 2 or len(p) < 3:
            raise ValueError("a parameter loop needs at least three (omega, g) points")
        if not np.allclose(p[0], p[-1]):
            p = np.vstack([p, p[:1]])
        if len(p) < 4:
            raise ValueError("a parameter loop needs at least three distinct points")
        g = p[:, 1]
        if np.any(g == 0.0) or np.any(g[:-1] * g[1:] < 0):
            raise ValueError("parameter loops must not touch g = 0")
        object.__setattr__(self, "points", p)

    @classmethod
    def rectangle(cls, omega_range, g_range, clockwise: bool = False) -> "ParamLoop":
        (o0, o1), (g0, g1) = omega_range, g_range
        # counterclockwise in the (g, Omega) frame
        pts = [(o0, g0), (o0, g1), (o1, g1), (o1, g0)]
        if clockwise:
            pts = pts[::-1]
        return cls(np.array(pts, dtype=float))

    @property
    def signed_area(self) -> float:
        """Shoelace area with ``g`` as abscissa and Omega as ordinate."""
        x, y = self.points[:, 1], self.points[:, 0]
        return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))

    @property
    def orientation(self) -> str:
        return "ccw" if self.signed_area > 0 else "cw"

    def reversed(self) -> "ParamLoop":
        return ParamLoop(self.points[::-1].copy())


@dataclass(frozen=True)
class WindingResult:
    change: float
    winding: int
    depth: int
    trace: list = field(default_factory=list, repr=False)

    def to_dict(self, with_trace: bool = True) -> dict:
        d = {"change": self.change, "winding": self.winding, "depth": self.depth}
        if with_trace:
            d["trace"] = [list(t) for t in self.trace]
        return d


def _segment_hits_box(a, b, lo, hi) -> bool:
    """Liang-Barsky test of segment ``a -> b`` against an axis-aligned box."""
    t0, t1 = 0.0, 1.0
    d = b - a
    for k in range(2):
        if d[k] == 0.0:
            if not lo[k] <= a[k] <= hi[k]:
                return False
            continue
        u0, u1 = (lo[k] - a[k]) / d[k], (hi[k] - a[k]) / d[k]
        t0, t1 = max(t0, min(u0, u1)), min(t1, max(u0, u1))
        if t0 > t1:
            return False
    return True


def _check_margin(loop: ParamLoop, qn: QuantumNumbers, margin: float):
    if qn.extremal:
        return
    om_max = float(np.max(np.abs(loop.points[:, 0])))
    nodes = [(s * om, g) for om, g in nodal_points(qn.mu, om_max + 1.0) for s in (1, -1)]
    p = loop.points
    for om, g in nodes:
        lo = np.array([om - margin, g - margin])
        hi = np.array([om + margin, g + margin])
        for a, b in zip(p[:-1], p[1:]):
            if _segment_hits_box(a, b, lo, hi):
                raise LoopTooCloseError(
                    f"loop passes within {margin:g} of the nodal point (Omega, g) = ({om:.6g}, {g:.6g})")


def winding_number(sub, qn: QuantumNumbers, loop: ParamLoop, margin: float = 1e-3,
                   n_per_edge: int = 64, max_depth: int = 20) -> WindingResult:
    """Track the marginal phase continuously around ``loop``.

    Each step whose raw phase jump exceeds ``pi/2`` is bisected, up to
    ``max_depth`` levels.

    Returns
    -------
    WindingResult
        Net phase change, its rounded multiple of ``2 pi`` and the deepest
        bisection level used.  ``trace`` holds ``(omega, g, tracked phase)``.

    Raises
    ------
    LoopTooCloseError
        If the loop comes within ``margin`` of a nodal point.
    NumericalDiagnosticError
        If bisection fails to bring every step below ``pi/2``.
    """
    sub = Subsystem.parse(sub)
    _check_margin(loop, qn, margin)

    def z_at(p):
        return interference_sum(sub, qn, p[1], p[0])

    def walk(a, za, b, zb, depth):
        step = float(np.angle(zb / za))
        if abs(step) <= math.pi / 2:
            return [(b, step)], depth
        if depth >= max_depth:
            raise NumericalDiagnosticError(
                f"phase step {step:.3g} rad near (Omega, g) = ({a[0]:.6g}, {a[1]:.6g}) unresolved at depth {max_depth}")
        m = (a + b) / 2
        zm = z_at(m)
        left, d1 = walk(a, za, m, zm, depth + 1)
        right, d2 = walk(m, zm, b, zb, depth + 1)
        return left + right, max(d1, d2)

    p = loop.points
    start = p[0]
    z0 = z_at(start)
    acc = float(np.angle(z0))
    trace = [(float(start[0]), float(start[1]), acc)]
    depth = 0
    t = np.arange(1, n_per_edge + 1) / n_per_edge
    prev, zprev = start, z0
    for a, b in zip(p[:-1], p[1:]):
        for s in t:
            q = a + s * (b - a)
            zq = z_at(q)
            steps, d = walk(prev, zprev, q, zq, 0)
            depth = max(depth, d)
            for pt, dphi in steps:
                acc += dphi
                trace.append((float(pt[0]), float(pt[1]), acc))
            prev, zprev = q, zq
    change = acc - trace[0][2]
    winding = int(round(change / (2 * math.pi)))
    if abs(change - 2 * math.pi * winding) > 0.2:
        raise NumericalDiagnosticError(f"net phase change {change:.6g} is not close to a multiple of 2 pi")
    return WindingResult(change, winding, depth, trace)

