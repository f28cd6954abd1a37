"""
Angular momentum matrices, product-space embeddings and rotation operators.

Basis ordering is fixed: orbital states run ``m = l, l-1, ..., -l`` and the
spin factor is ordered ``(+, -)``.  Product states ``|l, m>|s>`` are laid out
with the orbital index outermost, i.e. ``index = 2 * (l - m) + s``.

Rotations follow the convention

    U_X(theta, phi) = exp(-i phi X_z) exp(-i theta X_y) exp(+i phi X_z)

for the north patch and

    U~_X(theta, phi) = exp(-i phi X_z) exp(-i theta X_y) exp(-i phi X_z)

for the south patch.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "AngMom",
    "Gauge",
    "GaugeKind",
    "NORTH",
    "SOUTH",
    "PATCHED",
    "twice",
    "build_angmom",
    "product_angmom",
    "embed",
    "rotation",
    "rotations",
    "expm_hermitian",
]

_TOL = 1e-12


def twice(j) -> int:
    """Return ``2 j`` as an exact integer, rejecting non-half-integers."""
    if isinstance(j, Fraction):
        two = 2 * j
        if two.denominator != 1:
            raise ValueError(f"{j} is not a half-integer")
        return int(two)
    two = 2.0 * float(j)
    k = round(two)
    if not math.isfinite(two) or abs(two - k) > 1e-9:
        raise ValueError(f"{j} is not a half-integer")
    return int(k)


@dataclass(frozen=True, eq=False)
class AngMom:
    """Cartesian components of an angular momentum operator.

    ``two_j`` is ``2 j`` for an irreducible multiplet and ``None`` for a
    reducible composite such as ``J = L + S`` on the product space.
    """

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    two_j: int | None = None
    _y_eig: tuple = field(init=False, repr=False)

    def __post_init__(self):
        for a in (self.x, self.y, self.z):
            a.setflags(write=False)
        w, v = np.linalg.eigh(self.y)
        object.__setattr__(self, "_y_eig", (w, v))

    @property
    def j(self) -> float:
        if self.two_j is None:
            raise AttributeError("composite angular momentum has no single j")
        return self.two_j / 2

    @property
    def dim(self) -> int:
        return self.z.shape[0]

    @property
    def zdiag(self) -> np.ndarray:
        return np.real(np.diag(self.z))


@functools.lru_cache(maxsize=None)
def _angmom_cached(two_j: int) -> AngMom:
    d = two_j + 1
    j = two_j / 2
    m = j - np.arange(d)
    jp = np.zeros((d, d), dtype=complex)
    # J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>; m+1 sits one row above m
    for i in range(1, d):
        jp[i - 1, i] = math.sqrt(j * (j + 1) - m[i] * (m[i] + 1))
    jm = jp.conj().T
    x = (jp + jm) / 2
    y = (jp - jm) / 2j
    z = np.diag(m).astype(complex)
    return AngMom(x, y, z, two_j)


def build_angmom(j) -> AngMom:
    """Spin-``j`` matrices in the descending ``m`` basis.

    Parameters
    ----------
    j : int, float or Fraction
        Nonnegative half-integer.

    Returns
    -------
    AngMom
        Hermitian ``x, y, z`` components with ``[x, y] = i z``.
    """
    two_j = twice(j)
    if two_j < 0:
        raise ValueError(f"angular momentum must be nonnegative, got {j}")
    return _angmom_cached(two_j)


def embed(op_orbital, op_spin) -> np.ndarray:
    """Tensor product with the orbital factor first."""
    a = np.asarray(op_orbital)
    b = np.asarray(op_spin)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError("embed expects two square matrices")
    return np.kron(a, b)


@functools.lru_cache(maxsize=None)
def product_angmom(l: int) -> tuple[AngMom, AngMom, AngMom]:
    """``(L, S, J)`` acting on the ``2(2l+1)``-dimensional product space."""
    orb = build_angmom(l)
    spin = build_angmom(Fraction(1, 2))
    i_orb = np.eye(orb.dim)
    i_spin = np.eye(2)
    L = AngMom(*(embed(c, i_spin) for c in (orb.x, orb.y, orb.z)))
    S = AngMom(*(embed(i_orb, c) for c in (spin.x, spin.y, spin.z)))
    J = AngMom(L.x + S.x, L.y + S.y, L.z + S.z)
    return L, S, J


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i t h)`` for Hermitian ``h`` by spectral decomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


class GaugeKind(enum.Enum):
    NORTH = "north"
    SOUTH = "south"
    PATCHED = "patched"


@dataclass(frozen=True)
class Gauge:
    """Choice of local section for the rotated eigenvectors.

    ``PATCHED`` uses the north patch for ``theta <= theta_switch`` and the
    south patch beyond it, which is regular on the whole sphere.
    """

    kind: GaugeKind = GaugeKind.NORTH
    theta_switch: float = math.pi / 2

    def __post_init__(self):
        if self.kind is GaugeKind.PATCHED and not 0.0 < self.theta_switch < math.pi:
            raise ValueError("theta_switch must lie strictly inside (0, pi)")

    @classmethod
    def parse(cls, value) -> "Gauge":
        if isinstance(value, Gauge):
            return value
        return cls(GaugeKind(str(value).lower()))

    def south_mask(self, theta) -> np.ndarray:
        """Boolean mask of samples that use the south patch."""
        theta = np.asarray(theta, dtype=float)
        if self.kind is GaugeKind.NORTH:
            return np.zeros(theta.shape, dtype=bool)
        if self.kind is GaugeKind.SOUTH:
            return np.ones(theta.shape, dtype=bool)
        # tie at theta_switch goes to the north patch
        return theta > self.theta_switch


NORTH = Gauge(GaugeKind.NORTH)
SOUTH = Gauge(GaugeKind.SOUTH)
PATCHED = Gauge(GaugeKind.PATCHED)


def rotations(X: AngMom, theta, phi, gauge: Gauge = NORTH) -> np.ndarray:
    """Vectorized :func:`rotation` over arrays of angles.

    Returns an array of shape ``(n, d, d)``.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.broadcast_to(np.atleast_1d(np.asarray(phi, dtype=float)), theta.shape)
    if np.any(theta < -_TOL) or np.any(theta > math.pi + _TOL):
        raise ValueError("theta must lie in [0, pi]")
    w, v = X._y_eig
    # exp(-i theta X_y) for every theta
    mid = np.einsum("ik,nk,jk->nij", v, np.exp(-1j * np.outer(theta, w)), v.conj())
    mz = X.zdiag
    left = np.exp(-1j * np.outer(phi, mz))
    sign = np.where(gauge.south_mask(theta), -1.0, 1.0)
    right = np.exp(1j * sign[:, None] * np.outer(phi, mz))
    return left[:, :, None] * mid * right[:, None, :]


def rotation(X: AngMom, theta: float, phi: float, gauge: Gauge = NORTH) -> np.ndarray:
    """Rotation operator carrying the north pole to direction ``(theta, phi)``.

    Examples
    --------
    >>> S = build_angmom(0.5)
    >>> np.allclose(rotation(S, 0.0, 1.3), np.eye(2))
    True
    """
    return rotations(X, [theta], [phi], gauge)[0]
