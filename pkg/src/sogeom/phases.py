"""
Closed-form adiabatic geometric phases of the atom and its two subsystems.

The marginal phases are evaluated from the complex interference sum of the
marginal eigenvalue weights and eigenvector phase factors, which is valid for
every solid angle; the arctan forms only agree with it on ``|Omega| < pi``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .exceptions import UndefinedPhaseError
from .spin_orbit import QuantumNumbers, block_params, check_coupling

__all__ = [
    "Subsystem",
    "Provenance",
    "Regime",
    "PhaseResult",
    "DEG_TOL",
    "V_TOL",
    "principal",
    "phase_of",
    "total_phase",
    "interference_sum",
    "marginal_phase",
    "visibility",
    "sum_rule_residual",
    "limit_phase",
]

DEG_TOL = 1e-12
V_TOL = 1e-12


class Subsystem(enum.Enum):
    L = "L"
    S = "S"
    J = "J"

    @classmethod
    def parse(cls, value) -> "Subsystem":
        return value if isinstance(value, Subsystem) else cls(str(value).upper())


class Provenance(enum.Enum):
    ANALYTIC = "analytic"
    BARGMANN = "bargmann"
    TDSE = "tdse"


class Regime(enum.Enum):
    PASCHEN_BACK = "paschen-back"
    ZEEMAN = "zeeman"


@dataclass(frozen=True)
class PhaseResult:
    """A geometric phase on the principal branch ``(-pi, pi]``.

    ``value`` is ``nan`` when ``defined`` is false.
    """

    value: float
    visibility: float
    defined: bool
    provenance: Provenance = Provenance.ANALYTIC

    def to_dict(self) -> dict:
        return {
            "value": self.value if self.defined else None,
            "visibility": self.visibility,
            "defined": self.defined,
            "provenance": self.provenance.value,
        }


def principal(x: float) -> float:
    """Reduce an angle to ``(-pi, pi]``."""
    return math.pi - (math.pi - x) % (2 * math.pi)


def phase_of(z: complex) -> float:
    """Argument of ``z / |z|`` on ``(-pi, pi]``.

    Raises
    ------
    UndefinedPhaseError
        If ``z == 0``.
    """
    if z == 0:
        raise UndefinedPhaseError("phase of zero is undefined")
    return principal(cmath.phase(z))


def total_phase(qn: QuantumNumbers, omega: float) -> PhaseResult:
    """Pure-state phase ``-mu Omega`` of the whole atom.

    Depends on neither the branch nor the coupling ratio.
    """
    return PhaseResult(principal(-qn.mu * omega), 1.0, True)


def _reduced_sum(sign: int, cos_alpha: float, omega: float) -> complex:
    # (1/2)[(1 + s c) e^{-i Omega/2} + (1 - s c) e^{+i Omega/2}]
    return complex(math.cos(omega / 2), -sign * cos_alpha * math.sin(omega / 2))


def _cos_alpha(qn: QuantumNumbers, g: float) -> float:
    return block_params(qn.l, qn.mu, g).cos_alpha


def interference_sum(sub, qn: QuantumNumbers, g, omega: float, cos_alpha: float | None = None) -> complex:
    """Weighted sum of marginal eigenvector phase factors.

    Its argument is the marginal geometric phase and its modulus the
    visibility.  ``cos_alpha`` overrides the value implied by ``g``.
    """
    sub = Subsystem.parse(sub)
    if sub is Subsystem.J:
        raise ValueError("interference_sum is defined for the L and S subsystems only")
    if qn.extremal:
        if sub is Subsystem.L:
            return cmath.exp(-1j * qn.sign * qn.l * omega)
        return cmath.exp(-1j * qn.sign * omega / 2)
    if cos_alpha is None:
        cos_alpha = _cos_alpha(qn, check_coupling(g))
    zs = _reduced_sum(qn.sign, cos_alpha, omega)
    if sub is Subsystem.S:
        return zs
    # L weights carry e^{-i(mu -+ 1/2)Omega}: factor out e^{-i mu Omega}
    return cmath.exp(-1j * qn.mu * omega) * zs.conjugate()


def visibility(qn: QuantumNumbers, g, omega: float) -> float:
    """Interference visibility, shared by the L and S subsystems."""
    if qn.extremal:
        return 1.0
    return abs(_reduced_sum(qn.sign, _cos_alpha(qn, check_coupling(g)), omega))


def marginal_phase(sub, qn: QuantumNumbers, g, omega: float,
                   deg_tol: float = DEG_TOL, v_tol: float = V_TOL) -> PhaseResult:
    """Mixed-state geometric phase of the orbital (L) or spin (S) subsystem.

    Parameters
    ----------
    sub : Subsystem or {"L", "S"}
    qn : QuantumNumbers
    g : float
        Zeeman to spin-orbit strength ratio, nonzero.
    omega : float
        Oriented solid angle of the loop.

    Returns
    -------
    PhaseResult
        Undefined on the degeneracy line (``cos alpha = 0``) and at
        vanishing visibility.
    """
    sub = Subsystem.parse(sub)
    if sub is Subsystem.J:
        raise ValueError("use total_phase for the whole system")
    g = check_coupling(g)
    if qn.extremal:
        return PhaseResult(phase_of(interference_sum(sub, qn, g, omega)), 1.0, True)
    ca = _cos_alpha(qn, g)
    z = interference_sum(sub, qn, g, omega, cos_alpha=ca)
    vis = abs(_reduced_sum(qn.sign, ca, omega))
    if abs(ca) < deg_tol or vis < v_tol:
        return PhaseResult(math.nan, vis, False)
    return PhaseResult(phase_of(z), vis, True)


def sum_rule_residual(qn: QuantumNumbers, g, omega: float) -> float:
    """``Gamma_L + Gamma_S - Gamma_J`` reduced to ``(-pi, pi]``.

    ``nan`` if either marginal phase is undefined.
    """
    gl = marginal_phase(Subsystem.L, qn, g, omega)
    gs = marginal_phase(Subsystem.S, qn, g, omega)
    if not (gl.defined and gs.defined):
        return math.nan
    return principal(gl.value + gs.value - total_phase(qn, omega).value)


def limit_phase(regime, sub, qn: QuantumNumbers, omega: float, g_sign: int = 1) -> float:
    """Asymptotic marginal phase in the Paschen-Back or Zeeman regime.

    Paschen-Back takes ``cos alpha -> sign(g)``; the weak-field regime takes
    ``cos alpha -> mu / (l + 1/2)``.
    """
    regime = Regime(regime) if not isinstance(regime, Regime) else regime
    sub = Subsystem.parse(sub)
    if qn.extremal:
        raise ValueError("limit formulas apply to interior blocks")
    if regime is Regime.PASCHEN_BACK:
        ca = 1.0 if g_sign > 0 else -1.0
    else:
        ca = qn.mu / (qn.l + 0.5)
    return phase_of(interference_sum(sub, qn, None, omega, cos_alpha=ca))
