"""Adiabatic geometric phases of hydrogenlike atoms with spin-orbit coupling."""

from .exceptions import (LoopTooCloseError, NumericalDiagnosticError, RefinementRequired,
                         SingularCouplingError, UndefinedPhaseError)
from .loops import SphereLoop, circle_loop, polygon_loop
from .nodal import ParamLoop, degeneracy_line, grid_scan, nodal_points, winding_number
from .phases import (PhaseResult, Regime, Subsystem, limit_phase, marginal_phase, phase_of,
                     sum_rule_residual, total_phase, visibility)
from .qops import NORTH, PATCHED, SOUTH, Gauge, build_angmom, embed, rotation
from .spin_orbit import (Branch, QuantumNumbers, block_decompose, block_params, build_hamiltonian,
                         eigenvectors)

__version__ = "0.1.0"
