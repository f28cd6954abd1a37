"""Invariant suites run by ``sogeom verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import holonomy_oracle as ho
from .loops import circle_loop, polygon_loop, section_frames
from .nodal import ParamLoop, grid_scan, winding_number
from .phases import (Regime, Subsystem, limit_phase, marginal_phase, principal, sum_rule_residual,
                     total_phase)
from .qops import NORTH, PATCHED, SOUTH, build_angmom, product_angmom, rotation
from .spin_orbit import (Branch, QuantumNumbers, block_decompose, block_params, build_hamiltonian,
                         interior_states, spectrum)

__all__ = ["Check", "SUITES", "run_suites"]


@dataclass
class Check:
    suite: str
    name: str
    residual: float
    tolerance: float
    passed: bool
    detail: dict | None = None

    def to_dict(self) -> dict:
        d = {"suite": self.suite, "name": self.name, "residual": self.residual,
             "tolerance": self.tolerance, "passed": self.passed}
        if self.detail:
            d["detail"] = self.detail
        return d


def _le(suite, name, residual, tol, detail=None):
    residual = float(residual)
    return Check(suite, name, residual, tol, bool(residual < tol), detail)


def _states(lmax):
    for l in range(lmax + 1):
        yield QuantumNumbers(l, 2 * l + 1, Branch.EXTREMAL)
        yield QuantumNumbers(l, -2 * l - 1, Branch.EXTREMAL)
        yield from interior_states(l)


def suite_algebra(rng, **_):
    out = []
    worst = 0.0
    for two_j in range(0, 8):
        X = build_angmom(two_j / 2)
        worst = max(worst, np.max(np.abs(X.x @ X.y - X.y @ X.x - 1j * X.z)))
    out.append(_le("algebra", "commutator [x,y] = i z", worst, 1e-12))

    uni = comp = spec = cov = 0.0
    for _ in range(100):
        l = int(rng.integers(0, 4))
        th, ph = rng.uniform(0, math.pi), rng.uniform(-math.pi, math.pi)
        g = float(rng.choice([-1, 1]) * rng.uniform(0.05, 5))
        L, S, J = product_angmom(l)
        for gauge in (NORTH, SOUTH, PATCHED):
            u = rotation(J, th, ph, gauge)
            uni = max(uni, np.max(np.abs(u.conj().T @ u - np.eye(len(u)))))
        uj = rotation(J, th, ph)
        comp = max(comp, np.max(np.abs(uj - rotation(L, th, ph) @ rotation(S, th, ph))))
        hz = build_hamiltonian(l, g, 0, 0)
        hn = build_hamiltonian(l, g, th, ph)
        spec = max(spec, np.max(np.abs(np.linalg.eigvalsh(hn) - np.linalg.eigvalsh(hz))))
        cov = max(cov, np.max(np.abs(hn - uj @ hz @ uj.conj().T)))
    out.append(_le("algebra", "rotation unitarity", uni, 1e-12))
    out.append(_le("algebra", "U_J = U_L U_S", comp, 1e-12))
    out.append(_le("algebra", "isospectrality", spec, 1e-10))
    out.append(_le("algebra", "covariance H_n = U_J H_z U_J^+", cov, 1e-10))

    blk = full = 0.0
    for l in range(4):
        for g in (-3.0, 0.3, 2.0, 40.0):
            hz = build_hamiltonian(l, g, 0, 0)
            for b in block_decompose(l):
                if len(b.indices) == 2:
                    p = block_params(l, b.mu, g)
                    w = np.linalg.eigvalsh(hz[np.ix_(b.indices, b.indices)])
                    blk = max(blk, abs(w[0] - (p.E - p.dE)), abs(w[1] - (p.E + p.dE)))
            full = max(full, np.max(np.abs(spectrum(l, g) - np.linalg.eigvalsh(hz))))
    out.append(_le("algebra", "block eigenvalues E +- dE", blk, 1e-10))
    out.append(_le("algebra", "spectrum completeness", full, 1e-10))
    return out


def suite_loops(rng, **_):
    out = []
    th = 1.1
    exact = 2 * math.pi * (1 - math.cos(th))
    errs = []
    for n in (64, 1024):
        verts = [[math.sin(th) * math.cos(p), math.sin(th) * math.sin(p), math.cos(th)]
                 for p in np.linspace(0, 2 * math.pi, n, endpoint=False)]
        errs.append(abs(polygon_loop(verts, 2).solid_angle - exact))
    ratio = errs[0] / errs[1]
    out.append(Check("loops", "polygon -> circle solid angle O(1/n^2)", ratio, 256.0,
                     bool(128 < ratio < 512), {"errors": errs}))
    c = circle_loop(th, 64)
    out.append(_le("loops", "orientation reversal negates Omega", abs(c.solid_angle + c.reversed().solid_angle), 1e-15))

    L, S, J = product_angmom(2)
    qn = QuantumNumbers.of(2, -0.5, "-")
    psi, _ = ho.reference_state(qn, 1.7)
    loop = polygon_loop([[1, 0, 0.3], [0, 1, -0.4], [-1, 0.2, -0.8], [0.2, -1, 0.5]], 256)
    vals = [ho.bargmann_phase(section_frames(loop, J, gauge, psi)) for gauge in (NORTH, SOUTH, PATCHED)]
    spread = max(abs(principal(v - vals[0])) for v in vals)
    out.append(_le("loops", "Bargmann gauge invariance N/S/patched", spread, 1e-10))
    return out


def suite_phases(rng, **_):
    out = []
    worst = 0.0
    n = 0
    while n < 1000:
        l = int(rng.integers(1, 4))
        two_mu = int(rng.choice(np.arange(-2 * l + 1, 2 * l, 2)))
        qn = QuantumNumbers(l, two_mu, Branch.PLUS if rng.random() < 0.5 else Branch.MINUS)
        g = float(rng.uniform(-5, 5))
        om = float(rng.uniform(0, 4 * math.pi))
        r = sum_rule_residual(qn, g, om)
        if math.isnan(r):
            continue
        worst = max(worst, abs(r))
        n += 1
    out.append(_le("phases", "sum rule Gamma_L + Gamma_S = Gamma_J", worst, 1e-10))

    sym = 0.0
    for qn in _states(3):
        if qn.extremal:
            continue
        flipped = QuantumNumbers(qn.l, -qn.two_mu, qn.branch)
        for g in (-2.2, 0.7, 3.0):
            for om in (0.4, 2.5, 5.9, 10.0):
                for sub in (Subsystem.L, Subsystem.S):
                    a = marginal_phase(sub, qn, g, om)
                    b = marginal_phase(sub, flipped, -g, om)
                    if a.defined and b.defined:
                        sym = max(sym, abs(principal(a.value + b.value)))
    out.append(_le("phases", "orientation symmetry", sym, 1e-10))

    qn = QuantumNumbers.of(2, -0.5, "-")
    pb = []
    for om in (math.pi / 3, math.pi / 2, 2.0):
        diffs = [abs(principal(marginal_phase("S", qn, g, om).value - limit_phase(Regime.PASCHEN_BACK, "S", qn, om)))
                 for g in (10.0, 100.0, 1000.0)]
        pb.append(diffs)
    mono = all(d[0] > d[1] > d[2] for d in pb)
    out.append(Check("phases", "Paschen-Back convergence", max(d[2] for d in pb), 2e-3,
                     bool(mono and max(d[2] for d in pb) < 2e-3), {"diffs": pb}))
    zm = 0.0
    for om in (math.pi / 3, math.pi / 2, 2.0):
        for g in (1e-4, -1e-4):
            for sub in (Subsystem.L, Subsystem.S):
                zm = max(zm, abs(principal(marginal_phase(sub, qn, g, om).value
                                           - limit_phase(Regime.ZEEMAN, sub, qn, om))))
    out.append(_le("phases", "Zeeman agreement at |g| = 1e-4", zm, 1e-4))
    return out


def suite_oracle(rng, samples: int = 8192, **_):
    out = []
    worst_p = worst_v = 0.0
    for l in (1, 2):
        for qn in interior_states(l):
            for g in (0.1, 1.5, 10.0):
                for th in (math.pi / 6, math.pi / 3, 2 * math.pi / 3):
                    loop = circle_loop(th, samples)
                    for sub in (Subsystem.L, Subsystem.S):
                        a = ho.oracle_marginal_phase(sub, qn, g, loop)
                        b = marginal_phase(sub, qn, g, loop.solid_angle)
                        if not (a.defined and b.defined):
                            continue
                        worst_p = max(worst_p, abs(principal(a.value - b.value)))
                        worst_v = max(worst_v, abs(a.visibility - b.visibility))
    out.append(_le("oracle", "mixed phase vs closed form", worst_p, 1e-3))
    out.append(_le("oracle", "visibility vs closed form", worst_v, 1e-3))

    tot = 0.0
    loop = circle_loop(math.pi / 3, samples)
    for qn in _states(2):
        for g in (0.5, 5.0):
            a = ho.oracle_total_phase(qn, g, loop)
            tot = max(tot, abs(principal(a.value - total_phase(qn, loop.solid_angle).value)))
    out.append(_le("oracle", "total phase -mu Omega", tot, 1e-4))
    return out


def suite_tdse(rng, ramp: float = 200.0, **_):
    qn = QuantumNumbers.of(1, 1.5)
    g = 2.0
    loop = circle_loop(math.pi / 3, 64)
    gap = ho.level_gap(qn, g)
    target = total_phase(qn, loop.solid_angle).value
    table = []
    for factor in (0.25, 0.5, 1.0):
        rep = ho.tdse_evolve(1, g, loop, qn, factor * ramp / gap)
        table.append({"ramp": factor * ramp, "leakage": rep.leakage, "norm_error": rep.norm_error,
                      "phase_error": abs(principal(rep.geometric_phase - target))})
    errs = [r["phase_error"] for r in table]
    leaks = [r["leakage"] for r in table]
    mono = errs[0] > errs[1] > errs[2] and leaks[0] > leaks[1] > leaks[2]
    return [Check("tdse", "adiabatic convergence is monotone in ramp time", errs[-1], float("inf"), bool(mono),
                  {"table": table, "gap": gap})]


def suite_nodal(rng, **_):
    out = []
    qn = QuantumNumbers.of(2, -0.5, "-")
    rect = ParamLoop.rectangle((math.pi - 0.5, math.pi + 0.5), (0.5, 1.5))
    cases = [
        ("ccw around (pi, 1)", rect, 1),
        ("cw around (pi, 1)", rect.reversed(), -1),
        ("non-enclosing", ParamLoop.rectangle((0.5, 1.0), (2.0, 3.0)), 0),
        ("around (pi, 1) and (3 pi, 1)", ParamLoop.rectangle((math.pi - 0.5, 3 * math.pi + 0.5), (0.5, 1.5)), 2),
    ]
    for name, loop, want in cases:
        r = winding_number("S", qn, loop)
        out.append(Check("nodal", f"winding {name}", abs(r.winding - want), 0.5, r.winding == want,
                         {"winding": r.winding, "change": r.change}))
    grid = grid_scan("S", qn, (0.0, 4 * math.pi), (1.0, 1.0), 101, 1)
    dev = np.max(np.abs(grid.visibility[:, 0] - np.abs(np.cos(grid.omegas / 2))))
    out.append(_le("nodal", "visibility |cos(Omega/2)| on degeneracy line", dev, 1e-12))
    return out


SUITES = {
    "algebra": suite_algebra,
    "loops": suite_loops,
    "phases": suite_phases,
    "oracle": suite_oracle,
    "tdse": suite_tdse,
    "nodal": suite_nodal,
}


def run_suites(names=("all",), samples: int = 8192, ramp: float = 200.0, seed: int = 0) -> list[Check]:
    if "all" in names:
        names = list(SUITES)
    checks = []
    for name in names:
        rng = np.random.default_rng(seed)
        checks.extend(SUITES[name](rng, samples=samples, ramp=ramp))
    return checks
