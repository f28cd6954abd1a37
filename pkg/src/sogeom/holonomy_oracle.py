"""
Numerical cross-checks of the closed-form phases.

Everything here is built from dense matrices only: reference eigenvectors come
from diagonalizing the numerically assembled ``H_z`` block, marginal states
from an explicit partial trace, and phases from discrete Bargmann products or
from integrating the Schrodinger equation along the loop.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import RefinementRequired
from .loops import SphereLoop, _to_angles, section_frames
from .phases import DEG_TOL, V_TOL, PhaseResult, Provenance, Subsystem, principal
from .qops import PATCHED, Gauge, build_angmom, product_angmom, rotations
from .spin_orbit import QuantumNumbers, block_decompose, build_hamiltonian, check_coupling, hamiltonian_along

__all__ = [
    "MarginalState",
    "EvolutionReport",
    "bargmann_phase",
    "min_overlap",
    "marginal_state",
    "mixed_phase",
    "reference_state",
    "level_gap",
    "oracle_total_phase",
    "oracle_marginal_phase",
    "tdse_evolve",
]

MIN_OVERLAP = 0.1
REFINE_OVERLAP = 0.9
MAX_REFINEMENTS = 8


def _overlaps(frames: np.ndarray) -> np.ndarray:
    f = np.asarray(frames, dtype=complex)
    if len(f) < 3:
        raise ValueError("a closed frame list needs at least three entries")
    if abs(abs(np.vdot(f[0], f[-1])) - 1.0) > 1e-8:
        raise ValueError("frame list is not closed (first and last differ by more than a phase)")
    ring = f[:-1]
    return np.einsum("ij,ij->i", ring.conj(), np.roll(ring, -1, axis=0))


def min_overlap(frames) -> float:
    return float(np.min(np.abs(_overlaps(frames))))


def bargmann_phase(frames) -> float:
    """Gauge-invariant discrete Berry phase of a closed list of states.

    Uses ``-arg prod_k <psi_k | psi_{k+1}>`` with the product closed back onto
    the first state, so a spin-up state carried around a cap of solid angle
    ``Omega`` gives ``-Omega / 2``.

    Raises
    ------
    RefinementRequired
        If any adjacent overlap is smaller than 0.1 in modulus.
    """
    ov = _overlaps(frames)
    if np.min(np.abs(ov)) < MIN_OVERLAP:
        raise RefinementRequired("adjacent states nearly orthogonal; sample the loop more densely")
    return principal(-float(np.sum(np.angle(ov))))


@dataclass(frozen=True, eq=False)
class MarginalState:
    rho: np.ndarray
    weights: np.ndarray
    vectors: np.ndarray

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))


def marginal_state(full_state, sub, l: int) -> MarginalState:
    """Reduced density matrix of L or S, eigen-decomposed (descending)."""
    sub = Subsystem.parse(sub)
    psi = np.asarray(full_state, dtype=complex)
    if psi.shape != (2 * (2 * l + 1),):
        raise ValueError(f"state dimension {psi.shape} does not match l = {l}")
    m = psi.reshape(2 * l + 1, 2)
    if sub is Subsystem.L:
        rho = m @ m.conj().T
    elif sub is Subsystem.S:
        rho = m.T @ m.conj()
    else:
        raise ValueError("marginal states exist for L and S only")
    rho = (rho + rho.conj().T) / 2
    w, v = np.linalg.eigh(rho)
    order = np.argsort(w)[::-1]
    return MarginalState(rho, np.clip(w[order], 0.0, 1.0), v[:, order].T.copy())


def mixed_phase(weights, eigen_frame_loops, deg_tol: float = DEG_TOL, v_tol: float = V_TOL) -> PhaseResult:
    """Weighted interference of eigenvector geometric phase factors.

    Parameters
    ----------
    weights : sequence of float
        Marginal eigenvalues, summing to one.
    eigen_frame_loops : sequence of array_like
        One closed frame list per weight.
    """
    w = np.asarray(weights, dtype=float)
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must sum to one")
    if len(w) != len(eigen_frame_loops):
        raise ValueError("one frame loop is needed per weight")
    z = 0j
    for wk, frames in zip(w, eigen_frame_loops):
        if wk > 0:
            z += wk * np.exp(1j * bargmann_phase(frames))
    vis = abs(z)
    top = np.sort(w)[::-1]
    degenerate = len(top) > 1 and top[1] > 0 and abs(top[0] - top[1]) < deg_tol
    if degenerate or vis < v_tol:
        return PhaseResult(math.nan, vis, False, Provenance.BARGMANN)
    return PhaseResult(principal(float(np.angle(z))), vis, True, Provenance.BARGMANN)


def reference_state(qn: QuantumNumbers, g) -> tuple[np.ndarray, float]:
    """Eigenvector and energy of ``H_z`` from a dense eigensolve of its block."""
    hz = build_hamiltonian(qn.l, g, 0.0, 0.0)
    block = next(b for b in block_decompose(qn.l) if b.two_mu == qn.two_mu)
    idx = list(block.indices)
    w, v = np.linalg.eigh(hz[np.ix_(idx, idx)])
    k = 0 if qn.sign < 0 and not qn.extremal else len(w) - 1
    psi = np.zeros(hz.shape[0], dtype=complex)
    psi[idx] = v[:, k]
    return psi, float(w[k])


def level_gap(qn: QuantumNumbers, g) -> float:
    """Distance from the followed level to the nearest other level."""
    psi, e = reference_state(qn, g)
    others = np.linalg.eigvalsh(build_hamiltonian(qn.l, g, 0.0, 0.0))
    d = np.abs(others - e)
    d = d[d > 1e-9]
    return float(d.min())


def _refined_frames(loop: SphereLoop, build):
    for _ in range(MAX_REFINEMENTS):
        frames = build(loop)
        if min(min_overlap(f) for f in frames) >= REFINE_OVERLAP:
            return loop, frames
        loop = loop.refined()
    return loop, build(loop)


def oracle_total_phase(qn: QuantumNumbers, g, loop: SphereLoop, gauge: Gauge = PATCHED) -> PhaseResult:
    """Bargmann phase of the rotated full eigenvector around ``loop``."""
    psi, _ = reference_state(qn, check_coupling(g))
    _, _, J = product_angmom(qn.l)
    _, (frames,) = _refined_frames(loop, lambda lp: [section_frames(lp, J, gauge, psi)])
    return PhaseResult(bargmann_phase(frames), 1.0, True, Provenance.BARGMANN)


def oracle_marginal_phase(sub, qn: QuantumNumbers, g, loop: SphereLoop, gauge: Gauge = PATCHED,
                          deg_tol: float = DEG_TOL, v_tol: float = V_TOL) -> PhaseResult:
    """Mixed-state phase of L or S from partial trace plus Bargmann products.

    The marginal eigenvectors at the loop start are carried by the subsystem
    rotation, which is exact because the marginals evolve unitarily.
    """
    sub = Subsystem.parse(sub)
    psi, _ = reference_state(qn, check_coupling(g))
    ms = marginal_state(psi, sub, qn.l)
    X = build_angmom(qn.l if sub is Subsystem.L else 0.5)
    keep = ms.weights > 1e-14
    weights = ms.weights[keep] / ms.weights[keep].sum()
    vecs = ms.vectors[keep]

    def build(lp):
        return [section_frames(lp, X, gauge, v) for v in vecs]

    _, frames = _refined_frames(loop, build)
    return mixed_phase(weights, frames, deg_tol, v_tol)


@dataclass(frozen=True)
class EvolutionReport:
    total_phase: float
    dynamic_phase: float
    geometric_phase: float
    leakage: float
    final_leakage: float
    norm_error: float
    ramp_time: float
    steps: int
    adiabatic: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def tdse_evolve(l: int, g, loop: SphereLoop, qn: QuantumNumbers, ramp_time: float,
                steps: int | None = None) -> EvolutionReport:
    """Integrate the Schrodinger equation while the field traverses ``loop``.

    The field direction moves at uniform arc-length speed over
    ``[0, ramp_time]``.  Classic fourth-order Runge-Kutta is used with the state
    renormalized after every step.

    Returns
    -------
    EvolutionReport
        ``geometric_phase = total_phase - dynamic_phase`` where the dynamic
        phase is ``-int <psi|H|psi> dt``.  ``leakage`` is the largest
        population found outside the followed instantaneous eigenvector.
    """
    g = check_coupling(g)
    if qn.l != l:
        raise ValueError("quantum numbers belong to a different l")
    if ramp_time <= 0:
        raise ValueError("ramp_time must be positive")
    T = float(ramp_time)
    ref, _ = reference_state(qn, g)
    hnorm = np.max(np.abs(np.linalg.eigvalsh(build_hamiltonian(l, g, 0.0, 0.0))))
    if steps is None:
        steps = max(10_000, int(math.ceil(20 * T * hnorm)))
    dt = T / steps

    # field directions at whole and half steps
    n_half = loop.point_at(np.arange(2 * steps + 1) / (2 * steps))
    theta, phi = _to_angles(n_half[::2])
    _, _, J = product_angmom(l)
    inst = rotations(J, theta, phi, PATCHED) @ ref

    def ham(k):
        return hamiltonian_along(l, g, n_half[k])

    psi = inst[0].copy()
    psi0 = psi.copy()
    energies = np.empty(steps + 1)
    leak = np.empty(steps + 1)
    norm_err = 0.0
    h_now = ham(0)
    energies[0] = np.real(np.vdot(psi, h_now @ psi))
    leak[0] = 0.0
    for k in range(steps):
        h_mid = ham(2 * k + 1)
        h_end = ham(2 * k + 2)
        k1 = -1j * (h_now @ psi)
        k2 = -1j * (h_mid @ (psi + 0.5 * dt * k1))
        k3 = -1j * (h_mid @ (psi + 0.5 * dt * k2))
        k4 = -1j * (h_end @ (psi + dt * k3))
        psi = psi + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        nrm = np.linalg.norm(psi)
        norm_err = max(norm_err, abs(nrm - 1.0))
        psi /= nrm
        h_now = h_end
        energies[k + 1] = np.real(np.vdot(psi, h_now @ psi))
        leak[k + 1] = 1.0 - abs(np.vdot(inst[k + 1], psi)) ** 2

    total = float(np.angle(np.vdot(psi0, psi)))
    dynamic = -float(np.trapezoid(energies, dx=dt))
    leakage = float(np.clip(leak.max(), 0.0, 1.0))
    adiabatic = leakage <= 0.1
    if not adiabatic:
        warnings.warn(f"non-adiabatic evolution: leakage {leakage:.3g} exceeds 0.1", RuntimeWarning, stacklevel=2)
    return EvolutionReport(
        total_phase=principal(total),
        dynamic_phase=dynamic,
        geometric_phase=principal(total - dynamic),
        leakage=leakage,
        final_leakage=float(np.clip(leak[-1], 0.0, 1.0)),
        norm_error=norm_err,
        ramp_time=T,
        steps=steps,
        adiabatic=adiabatic,
    )
