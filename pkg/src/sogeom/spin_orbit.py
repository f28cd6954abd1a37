"""
Spin-orbit Hamiltonian of a hydrogenlike atom in a uniform field.

    H_n = g n.(L + 2S) + 2 L.S          (hbar = 1, LS coupling energy unit)

``H_z`` (field along +z) commutes with ``J_z`` and splits into two
one-dimensional extremal blocks ``|mu| = l + 1/2`` and ``2l`` two-dimensional
blocks spanned by ``|l, mu-1/2>|+>`` and ``|l, mu+1/2>|->``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import SingularCouplingError
from .qops import product_angmom, twice

__all__ = [
    "Branch",
    "QuantumNumbers",
    "BlockParams",
    "Block",
    "G_CAP",
    "check_coupling",
    "build_hamiltonian",
    "hamiltonian_along",
    "block_decompose",
    "block_params",
    "eigenvectors",
    "eigenvector",
    "energy",
    "spectrum",
    "interior_states",
]

G_CAP = 1e6


class Branch(enum.Enum):
    PLUS = "+"
    MINUS = "-"
    EXTREMAL = "extremal"

    @classmethod
    def parse(cls, value) -> "Branch | None":
        if value is None or isinstance(value, Branch):
            return value
        if value in (1, "+", "plus", "+1"):
            return cls.PLUS
        if value in (-1, "-", "minus", "-1"):
            return cls.MINUS
        if value in ("e", "extremal"):
            return cls.EXTREMAL
        raise ValueError(f"unknown branch {value!r}")


@dataclass(frozen=True)
class QuantumNumbers:
    """Labels ``(l, mu, branch)`` of an eigenstate of ``H_z``.

    ``mu`` is stored doubled (``two_mu``) so the label arithmetic is exact.
    """

    l: int
    two_mu: int
    branch: Branch

    def __post_init__(self):
        if not isinstance(self.l, (int, np.integer)) or self.l < 0:
            raise ValueError(f"l must be a nonnegative integer, got {self.l!r}")
        if self.two_mu % 2 == 0:
            raise ValueError("mu must be a half-odd-integer")
        if abs(self.two_mu) > 2 * self.l + 1:
            raise ValueError(f"|mu| = {abs(self.two_mu)}/2 exceeds l + 1/2 = {self.l + 0.5}")
        extremal = abs(self.two_mu) == 2 * self.l + 1
        if extremal != (self.branch is Branch.EXTREMAL):
            kind = "extremal" if extremal else "interior"
            raise ValueError(f"mu = {self.two_mu}/2 is {kind} for l = {self.l}; branch {self.branch.value!r} invalid")

    @classmethod
    def of(cls, l, mu, branch=None) -> "QuantumNumbers":
        """Build from a plain ``mu`` (float or Fraction).

        ``branch`` may be omitted for extremal states.
        """
        l = int(l) if float(l) == int(l) else l
        two_mu = twice(mu)
        extremal = abs(two_mu) == 2 * l + 1
        b = Branch.parse(branch)
        if b is None:
            if not extremal:
                raise ValueError("interior states need a branch '+' or '-'")
            b = Branch.EXTREMAL
        elif extremal and b is not Branch.EXTREMAL:
            # extremal states carry a single eigenvector; ignore a redundant sign
            b = Branch.EXTREMAL
        return cls(l, two_mu, b)

    @property
    def mu(self) -> float:
        return self.two_mu / 2

    @property
    def mu_frac(self) -> Fraction:
        return Fraction(self.two_mu, 2)

    @property
    def extremal(self) -> bool:
        return self.branch is Branch.EXTREMAL

    @property
    def sign(self) -> int:
        """Upper (+1) or lower (-1) sign of the paired formulas."""
        if self.branch is Branch.EXTREMAL:
            return 1 if self.two_mu > 0 else -1
        return 1 if self.branch is Branch.PLUS else -1

    def __str__(self):
        b = "" if self.extremal else f", {self.branch.value}"
        return f"(l={self.l}; mu={self.mu_frac}{b})"


@dataclass(frozen=True)
class BlockParams:
    E: float
    dE: float
    cos_alpha: float

    @property
    def sin_alpha(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.cos_alpha**2))


@dataclass(frozen=True)
class Block:
    two_mu: int
    indices: tuple[int, ...]

    @property
    def mu(self) -> float:
        return self.two_mu / 2


def check_coupling(g, cap: float = G_CAP) -> float:
    g = float(g)
    if not math.isfinite(g):
        raise ValueError(f"g must be finite, got {g}")
    if g == 0.0:
        raise SingularCouplingError()
    if abs(g) > cap:
        raise ValueError(f"|g| = {abs(g):g} exceeds the supported cap {cap:g}")
    return g


def _index(l: int, two_m: int, spin_up: bool) -> int:
    return 2 * ((2 * l - two_m) // 2) + (0 if spin_up else 1)


@functools.lru_cache(maxsize=None)
def _operators(l: int):
    """``(Mx, My, Mz, LS)`` with ``M = L + 2S`` on the product space."""
    L, S, _ = product_angmom(l)
    m = tuple(a + 2 * b for a, b in ((L.x, S.x), (L.y, S.y), (L.z, S.z)))
    # L.S = LzSz + (L+S- + L-S+)/2
    lp, sp = L.x + 1j * L.y, S.x + 1j * S.y
    ls = L.z @ S.z + (lp @ sp.conj().T + lp.conj().T @ sp) / 2
    ls = np.real_if_close(ls).astype(complex)
    out = (*m, ls)
    for a in out:
        a.setflags(write=False)
    return out


def hamiltonian_along(l: int, g: float, n) -> np.ndarray:
    """``H`` for an explicit unit field direction ``n``."""
    mx, my, mz, ls = _operators(l)
    return g * (n[0] * mx + n[1] * my + n[2] * mz) + 2 * ls


def build_hamiltonian(l: int, g, theta: float, phi: float) -> np.ndarray:
    """Hamiltonian for field direction ``(theta, phi)``.

    Raises
    ------
    SingularCouplingError
        If ``g == 0``.
    """
    g = check_coupling(g)
    if l < 0:
        raise ValueError("l must be nonnegative")
    n = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
    return hamiltonian_along(l, g, n)


def block_decompose(l: int) -> list[Block]:
    """Invariant subspaces of ``H_z`` labelled by ``mu``, descending."""
    if l < 0:
        raise ValueError("l must be nonnegative")
    blocks = []
    for two_mu in range(2 * l + 1, -2 * l - 2, -2):
        if two_mu == 2 * l + 1:
            idx = (_index(l, 2 * l, True),)
        elif two_mu == -(2 * l + 1):
            idx = (_index(l, -2 * l, False),)
        else:
            idx = (_index(l, two_mu - 1, True), _index(l, two_mu + 1, False))
        blocks.append(Block(two_mu, idx))
    return blocks


def _two_mu_interior(l: int, mu) -> int:
    two_mu = twice(mu)
    if two_mu % 2 == 0 or abs(two_mu) > 2 * l + 1:
        raise ValueError(f"mu = {mu} is not a valid label for l = {l}")
    if abs(two_mu) == 2 * l + 1:
        raise ValueError(f"mu = {mu} is extremal for l = {l}; it has no 2x2 block")
    return two_mu


def block_params(l: int, mu, g) -> BlockParams:
    """Energy centre, half splitting and mixing cosine of an interior block."""
    g = check_coupling(g)
    mu = _two_mu_interior(l, mu) / 2
    rad = g * g + 4 * g * mu + (2 * l + 1) ** 2
    # (g + 2 mu)^2 + (2l+1)^2 - 4 mu^2 with |mu| < l + 1/2
    assert rad > 0.0, "radicand must be positive for interior blocks"
    root = math.sqrt(rad)
    return BlockParams(g * mu - 0.5, 0.5 * root, (2 * mu + g) / root)


def _interior_pair(l: int, two_mu: int, g: float):
    ca = block_params(l, two_mu / 2, g).cos_alpha
    # alpha in [0, pi], so both half-angle functions are nonnegative
    return math.sqrt(max(0.0, (1 + ca) / 2)), math.sqrt(max(0.0, (1 - ca) / 2))


def eigenvectors(l: int, mu, g) -> tuple[np.ndarray, ...]:
    """Eigenvectors of ``H_z`` in block ``mu`` as full product-space vectors.

    Interior blocks return ``(psi_plus, psi_minus)``; extremal blocks return
    the single product state.
    """
    g = check_coupling(g)
    two_mu = twice(mu)
    dim = 2 * (2 * l + 1)
    block = next((b for b in block_decompose(l) if b.two_mu == two_mu), None)
    if block is None:
        raise ValueError(f"mu = {mu} is not a valid label for l = {l}")
    if len(block.indices) == 1:
        v = np.zeros(dim, dtype=complex)
        v[block.indices[0]] = 1.0
        return (v,)
    c, s = _interior_pair(l, two_mu, g)
    i, k = block.indices
    vp = np.zeros(dim, dtype=complex)
    vm = np.zeros(dim, dtype=complex)
    vp[i], vp[k] = c, s
    vm[i], vm[k] = -s, c
    return vp, vm


def eigenvector(qn: QuantumNumbers, g) -> np.ndarray:
    vecs = eigenvectors(qn.l, qn.mu, g)
    if qn.extremal:
        return vecs[0]
    return vecs[0] if qn.branch is Branch.PLUS else vecs[1]


def energy(qn: QuantumNumbers, g) -> float:
    g = check_coupling(g)
    if qn.extremal:
        # |l, +-l>|+->: +-g(l + 1) + l
        return qn.sign * g * (qn.l + 1) + qn.l
    p = block_params(qn.l, qn.mu, g)
    return p.E + qn.sign * p.dE


def interior_states(l: int):
    """All interior ``QuantumNumbers`` for a given ``l``."""
    for two_mu in range(2 * l - 1, -2 * l, -2):
        for b in (Branch.PLUS, Branch.MINUS):
            yield QuantumNumbers(l, two_mu, b)


def spectrum(l: int, g) -> np.ndarray:
    """Analytic eigenvalues of ``H_n`` (sorted ascending)."""
    states = [QuantumNumbers(l, 2 * l + 1, Branch.EXTREMAL), QuantumNumbers(l, -2 * l - 1, Branch.EXTREMAL)]
    states += list(interior_states(l))
    return np.sort([energy(q, g) for q in states])
