"""
Closed loops of the field direction on the unit sphere.

Two families are supported: circles of constant colatitude and geodesic
polygons.  Solid angles are oriented (counterclockwise seen from +z is
positive) and measured with the south pole outside the loop, so a
counterclockwise circle at colatitude ``theta0`` encloses
``2 pi (1 - cos theta0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qops import AngMom, Gauge, NORTH, rotations

__all__ = [
    "SphereLoop",
    "circle_loop",
    "polygon_loop",
    "polygon_solid_angle",
    "loop_from_spec",
    "section_frames",
    "section_patches",
]

_ZHAT = np.array([0.0, 0.0, 1.0])


def _to_angles(vecs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    theta = np.arccos(np.clip(vecs[:, 2], -1.0, 1.0))
    phi = np.arctan2(vecs[:, 1], vecs[:, 0])
    return theta, phi


def _to_vectors(theta, phi) -> np.ndarray:
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _slerp(a: np.ndarray, b: np.ndarray, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)[..., None]
    omega = math.acos(max(-1.0, min(1.0, float(a @ b))))
    if omega < 1e-15:
        return np.broadcast_to(a, t.shape[:-1] + (3,)).copy()
    s = math.sin(omega)
    return (np.sin((1 - t) * omega) * a + np.sin(t * omega) * b) / s


@dataclass(frozen=True, eq=False)
class SphereLoop:
    """A discretized closed path ``(theta_k, phi_k)`` with ``first == last``.

    Attributes
    ----------
    kind : {"circle", "polygon"}
    theta, phi : ndarray
        Sample angles, length ``n + 1``.
    solid_angle : float
        Oriented enclosed solid angle.
    """

    kind: str
    theta: np.ndarray
    phi: np.ndarray
    solid_angle: float
    theta0: float | None = None
    orientation: int = 1
    vertices: np.ndarray | None = None
    n_per_edge: int | None = None

    def __post_init__(self):
        v = self.vectors()
        if np.linalg.norm(v[0] - v[-1]) > 1e-12:
            raise ValueError("loop is not closed")
        gaps = np.arccos(np.clip(np.einsum("ij,ij->i", v[:-1], v[1:]), -1.0, 1.0))
        if np.any(gaps >= math.pi / 2):
            raise ValueError("adjacent samples must be closer than pi/2")
        if not -4 * math.pi < self.solid_angle < 4 * math.pi:
            raise ValueError("solid angle out of range")

    @property
    def n_samples(self) -> int:
        return len(self.theta) - 1

    def vectors(self) -> np.ndarray:
        return _to_vectors(self.theta, self.phi)

    def reversed(self) -> "SphereLoop":
        if self.kind == "circle":
            return circle_loop(self.theta0, self.n_samples, reverse=self.orientation > 0)
        return polygon_loop(self.vertices[::-1], self.n_per_edge)

    def refined(self) -> "SphereLoop":
        """The same loop sampled at double density."""
        if self.kind == "circle":
            return circle_loop(self.theta0, 2 * self.n_samples, reverse=self.orientation < 0)
        return polygon_loop(self.vertices, 2 * self.n_per_edge)

    def point_at(self, s) -> np.ndarray:
        """Unit field directions at arc-length fractions ``s`` in ``[0, 1]``."""
        s = np.asarray(s, dtype=float)
        if self.kind == "circle":
            return _to_vectors(np.full(s.shape, self.theta0), 2 * math.pi * self.orientation * s)
        verts = self.vertices
        nxt = np.roll(verts, -1, axis=0)
        lengths = np.arccos(np.clip(np.einsum("ij,ij->i", verts, nxt), -1.0, 1.0))
        cum = np.concatenate([[0.0], np.cumsum(lengths)])
        pos = np.clip(s, 0.0, 1.0) * cum[-1]
        edge = np.clip(np.searchsorted(cum, pos, side="right") - 1, 0, len(verts) - 1)
        out = np.empty(s.shape + (3,))
        for e in np.unique(edge):
            sel = edge == e
            t = (pos[sel] - cum[e]) / lengths[e]
            out[sel] = _slerp(verts[e], nxt[e], t)
        return out

    def to_spec(self) -> dict:
        if self.kind == "circle":
            return {"kind": "circle", "theta0": self.theta0, "samples": self.n_samples,
                    "reverse": self.orientation < 0}
        return {"kind": "polygon", "vertices": self.vertices.tolist(), "samples_per_edge": self.n_per_edge}


def circle_loop(theta0: float, n_samples: int = 256, reverse: bool = False) -> SphereLoop:
    """Circle of constant colatitude traversed once in ``phi``.

    Parameters
    ----------
    theta0 : float
        Colatitude in the open interval ``(0, pi)``.
    n_samples : int
        Number of distinct samples (the closing duplicate is added).
    reverse : bool
        Traverse clockwise seen from +z, which negates the solid angle.
    """
    theta0 = float(theta0)
    if not 0.0 < theta0 < math.pi:
        raise ValueError("theta0 must lie strictly between the poles")
    if n_samples < 8:
        raise ValueError("circle loops need at least 8 samples")
    sign = -1 if reverse else 1
    phi = sign * np.linspace(0.0, 2 * math.pi, n_samples + 1)
    theta = np.full(n_samples + 1, theta0)
    omega = sign * 2 * math.pi * (1 - math.cos(theta0))
    return SphereLoop("circle", theta, phi, omega, theta0=theta0, orientation=sign)


def _triangle_excess(a, b, c) -> float:
    """Unsigned spherical excess of a geodesic triangle (l'Huilier)."""
    sa = math.acos(max(-1.0, min(1.0, float(b @ c))))
    sb = math.acos(max(-1.0, min(1.0, float(c @ a))))
    sc = math.acos(max(-1.0, min(1.0, float(a @ b))))
    s = (sa + sb + sc) / 2
    prod = math.tan(s / 2) * math.tan((s - sa) / 2) * math.tan((s - sb) / 2) * math.tan((s - sc) / 2)
    return 4 * math.atan(math.sqrt(max(prod, 0.0)))


def _on_arc(p, a, b, tol=1e-9) -> bool:
    n = np.cross(a, b)
    nn = np.linalg.norm(n)
    if nn < tol:
        return np.linalg.norm(p - a) < tol or np.linalg.norm(p - b) < tol
    n = n / nn
    if abs(p @ n) > tol:
        return False
    return np.cross(a, p) @ n >= -tol and np.cross(p, b) @ n >= -tol


def polygon_solid_angle(vertices) -> float:
    """Oriented solid angle of a geodesic polygon.

    Sums signed triangle excesses over a fan from the north pole, so the
    south pole is taken to lie outside the loop.
    """
    v = np.asarray(vertices, dtype=float)
    v = v / np.linalg.norm(v, axis=1, keepdims=True)
    south = -_ZHAT
    total = 0.0
    for a, b in zip(v, np.roll(v, -1, axis=0)):
        if _on_arc(south, a, b):
            raise ValueError("loop passes through the south pole; enclosed solid angle is ambiguous")
        sign = np.sign(_ZHAT @ np.cross(a, b))
        if sign != 0:
            total += sign * _triangle_excess(_ZHAT, a, b)
    return float(total)


def polygon_loop(vertices, n_per_edge: int = 64) -> SphereLoop:
    """Geodesic polygon through the given unit vectors, in order."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 3 or len(v) < 3:
        raise ValueError("a polygon needs at least 3 vertices in R^3")
    norms = np.linalg.norm(v, axis=1)
    if np.any(norms < 1e-12):
        raise ValueError("zero vertex vector")
    v = v / norms[:, None]
    nxt = np.roll(v, -1, axis=0)
    dots = np.einsum("ij,ij->i", v, nxt)
    if np.any(dots < -1 + 1e-12):
        raise ValueError("adjacent antipodal vertices have no unique geodesic")
    if np.any(dots > 1 - 1e-15):
        raise ValueError("repeated adjacent vertices")
    if n_per_edge < 2:
        raise ValueError("n_per_edge must be at least 2")
    t = np.arange(n_per_edge) / n_per_edge
    pts = np.concatenate([_slerp(a, b, t) for a, b in zip(v, nxt)] + [v[:1]])
    theta, phi = _to_angles(pts)
    return SphereLoop("polygon", theta, phi, polygon_solid_angle(v), vertices=v, n_per_edge=n_per_edge)


def loop_from_spec(spec: dict) -> SphereLoop:
    """Build a loop from its JSON description.

    ``{"kind": "circle", "theta0": ..., "samples": ...}`` or
    ``{"kind": "polygon", "vertices": [[x, y, z], ...]}``.
    """
    kind = spec.get("kind")
    if kind == "circle":
        return circle_loop(spec["theta0"], int(spec.get("samples", 256)), bool(spec.get("reverse", False)))
    if kind == "polygon":
        return polygon_loop(spec["vertices"], int(spec.get("samples_per_edge", 64)))
    raise ValueError(f"unknown loop kind {kind!r}")


def section_patches(loop: SphereLoop, gauge: Gauge) -> np.ndarray:
    """Per-sample patch tags: ``"N"`` or ``"S"``."""
    return np.where(gauge.south_mask(loop.theta), "S", "N")


def section_frames(loop: SphereLoop, X: AngMom, gauge: Gauge = NORTH, reference=None) -> np.ndarray:
    """Rotated copies of ``reference`` along the loop, shape ``(n + 1, d)``."""
    ref = np.asarray(reference, dtype=complex)
    if abs(np.linalg.norm(ref) - 1.0) > 1e-10:
        raise ValueError("reference must be a unit vector")
    return rotations(X, loop.theta, loop.phi, gauge) @ ref
