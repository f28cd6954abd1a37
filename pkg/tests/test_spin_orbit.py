import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sogeom import SingularCouplingError
from sogeom.qops import product_angmom, rotation
from sogeom.spin_orbit import (Branch, QuantumNumbers, block_decompose, block_params, build_hamiltonian,
                               eigenvector, eigenvectors, energy, interior_states, spectrum)

R2 = math.sqrt(2)


def _hand_built_h(g, theta, phi):
    """l = 1 Hamiltonian from explicitly written spin-1 and spin-1/2 matrices."""
    lx = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]]) / R2
    ly = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]]) / R2
    lz = np.diag([1.0, 0.0, -1.0])
    sx = np.array([[0, 1], [1, 0]]) / 2
    sy = np.array([[0, -1j], [1j, 0]]) / 2
    sz = np.diag([0.5, -0.5])
    n = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
    i2, i3 = np.eye(2), np.eye(3)
    L = [np.kron(a, i2) for a in (lx, ly, lz)]
    S = [np.kron(i3, a) for a in (sx, sy, sz)]
    return g * sum(n[k] * (L[k] + 2 * S[k]) for k in range(3)) + 2 * sum(L[k] @ S[k] for k in range(3))


@pytest.mark.parametrize("theta,phi", [(0.0, 0.0), (0.4, 1.1), (2.5, -2.0)])
def test_hamiltonian_matches_hand_built(theta, phi):
    np.testing.assert_allclose(build_hamiltonian(1, 2.0, theta, phi), _hand_built_h(2.0, theta, phi), atol=1e-14)


def test_north_pole_is_diagonal_field():
    h = build_hamiltonian(2, 0.7, 0.0, 1.3)
    L, S, _ = product_angmom(2)
    hz = 0.7 * (L.z + 2 * S.z) + 2 * (L.x @ S.x + L.y @ S.y + L.z @ S.z)
    np.testing.assert_allclose(h, hz, atol=1e-14)


def test_largest_eigenvalue_l1_g2():
    # oracle: dense eigensolve of the independently assembled 6x6 matrix
    w, v = np.linalg.eigh(_hand_built_h(2.0, 0.0, 0.0))
    assert w[-1] == pytest.approx(5.0, abs=1e-12)
    assert abs(v[0, -1]) == pytest.approx(1.0, abs=1e-12)
    assert energy(QuantumNumbers.of(1, 1.5), 2.0) == 5.0
    assert np.max(np.linalg.eigvalsh(build_hamiltonian(1, 2.0, 0.0, 0.0))) == pytest.approx(5.0, abs=1e-12)


def test_g_zero_rejected():
    with pytest.raises(SingularCouplingError, match="singular decoupling point"):
        build_hamiltonian(1, 0.0, 0.1, 0.2)


def test_g_cap():
    with pytest.raises(ValueError):
        build_hamiltonian(1, 2e6, 0.1, 0.2)


def test_blocks_l0():
    blocks = block_decompose(0)
    assert [b.two_mu for b in blocks] == [1, -1]
    assert all(len(b.indices) == 1 for b in blocks)


def test_blocks_l1():
    blocks = block_decompose(1)
    assert [len(b.indices) for b in blocks] == [1, 2, 2, 1]
    assert sum(len(b.indices) for b in blocks) == 6


@pytest.mark.parametrize("l", range(0, 5))
def test_blocks_partition_and_invariant(l):
    blocks = block_decompose(l)
    idx = sorted(i for b in blocks for i in b.indices)
    assert idx == list(range(2 * (2 * l + 1)))
    hz = build_hamiltonian(l, 1.3, 0.0, 0.0)
    _, _, J = product_angmom(l)
    for b in blocks:
        rest = [i for i in range(len(hz)) if i not in b.indices]
        assert np.max(np.abs(hz[np.ix_(b.indices, rest)]), initial=0.0) == 0.0
        assert np.allclose(np.diag(J.z.real)[list(b.indices)], b.mu)


def test_block_params_l1_mu_half_g2():
    # oracle: eigendecomposition of [[2, sqrt2], [sqrt2, -1]]
    w, v = np.linalg.eigh(np.array([[2.0, R2], [R2, -1.0]]))
    e, de = (w[1] + w[0]) / 2, (w[1] - w[0]) / 2
    cos_alpha = abs(v[0, 1]) ** 2 - abs(v[1, 1]) ** 2
    p = block_params(1, 0.5, 2.0)
    assert p.E == pytest.approx(e, abs=1e-12) == pytest.approx(0.5)
    assert p.dE == pytest.approx(de, abs=1e-12) == pytest.approx(2.06155, abs=1e-5)
    assert p.cos_alpha == pytest.approx(cos_alpha, abs=1e-12) == pytest.approx(0.72761, abs=1e-5)


@pytest.mark.parametrize("l,mu", [(1, 0.5), (1, -0.5), (3, 1.5), (3, -2.5)])
def test_degeneracy_cos_alpha_zero(l, mu):
    assert block_params(l, mu, -2 * mu).cos_alpha == 0.0


def test_paschen_back_cos_alpha_limit():
    assert block_params(2, -0.5, 1e6).cos_alpha == pytest.approx(1.0, abs=1e-10)
    assert block_params(2, -0.5, -1e6).cos_alpha == pytest.approx(-1.0, abs=1e-10)


def test_block_params_rejects_extremal():
    with pytest.raises(ValueError, match="extremal"):
        block_params(2, 2.5, 1.0)


def test_extremal_eigenvector():
    (v,) = eigenvectors(2, 2.5, 0.3)
    assert v[0] == 1 and np.count_nonzero(v) == 1
    (v,) = eigenvectors(2, -2.5, 0.3)
    assert v[-1] == 1 and np.count_nonzero(v) == 1


def test_interior_eigenvector_residual():
    hz = build_hamiltonian(1, 2.0, 0.0, 0.0)
    p = block_params(1, 0.5, 2.0)
    vp, vm = eigenvectors(1, 0.5, 2.0)
    assert np.linalg.norm(hz @ vp - (p.E + p.dE) * vp) < 1e-10
    assert np.linalg.norm(hz @ vm - (p.E - p.dE) * vm) < 1e-10
    assert abs(np.vdot(vp, vm)) < 1e-15


def test_balanced_eigenvector_on_degeneracy_line():
    vp, vm = eigenvectors(2, -0.5, 1.0)
    assert sorted(np.abs(vp[vp != 0])) == pytest.approx([1 / R2] * 2)
    assert sorted(np.abs(vm[vm != 0])) == pytest.approx([1 / R2] * 2)


@settings(max_examples=60, deadline=None)
@given(l=st.integers(0, 3), g=st.floats(-8, 8).filter(lambda x: abs(x) > 1e-3),
       theta=st.floats(0, math.pi), phi=st.floats(-4, 4))
def test_isospectral_and_covariant(l, g, theta, phi):
    hz = build_hamiltonian(l, g, 0.0, 0.0)
    hn = build_hamiltonian(l, g, theta, phi)
    assert np.max(np.abs(np.linalg.eigvalsh(hn) - np.linalg.eigvalsh(hz))) < 1e-10
    uj = rotation(product_angmom(l)[2], theta, phi)
    assert np.max(np.abs(hn - uj @ hz @ uj.conj().T)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(l=st.integers(0, 4), g=st.floats(-50, 50).filter(lambda x: abs(x) > 1e-3))
def test_analytic_spectrum_complete(l, g):
    hz = build_hamiltonian(l, g, 0.0, 0.0)
    assert np.max(np.abs(spectrum(l, g) - np.linalg.eigvalsh(hz))) < 1e-10
    for qn in interior_states(l):
        v = eigenvector(qn, g)
        assert np.linalg.norm(hz @ v - energy(qn, g) * v) < 1e-10


def test_quantum_numbers_validation():
    assert QuantumNumbers.of(2, 2.5).branch is Branch.EXTREMAL
    assert QuantumNumbers.of(2, -0.5, "-").sign == -1
    assert QuantumNumbers.of(2, -2.5).sign == -1
    with pytest.raises(ValueError):
        QuantumNumbers.of(2, 0.5)
    with pytest.raises(ValueError):
        QuantumNumbers.of(2, 3.5, "+")
    with pytest.raises(ValueError):
        QuantumNumbers.of(2, 1.0, "+")
