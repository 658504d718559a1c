from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from kerrcomb.cnoidal import base_wave_derivatives
from kerrcomb.errors import SolvabilityError, ValidationError
from kerrcomb.grid_ops import (PeriodicGrid, apply_symplectic, assemble_full_linearization,
                               assemble_scalar_operator, first_order_m_h, numerical_kernel,
                               similarity_transform, solve_on_complement)
from kerrcomb.profile_solver import WaveProfile


def test_spectral_derivatives_exact_on_trig():
    g = PeriodicGrid(64, 3.0)
    x = g.nodes
    w = np.pi / 3.0
    f = np.sin(3 * w * x) + np.cos(5 * w * x)
    assert np.max(np.abs(g.derivative(f) - (3 * w * np.cos(3 * w * x) - 5 * w * np.sin(5 * w * x)))) < 1e-12
    d2 = -(3 * w) ** 2 * np.sin(3 * w * x) - (5 * w) ** 2 * np.cos(5 * w * x)
    assert np.max(np.abs(g.d2 @ f - d2)) < 1e-11
    assert np.max(np.abs(g.derivative(f, 2) - d2)) < 1e-11


def test_grid_nodes_and_quadrature():
    g = PeriodicGrid(32, 2.0)
    assert g.nodes[0] == -2.0 and g.dx == pytest.approx(0.125)
    assert g.integrate(np.ones(32)) == pytest.approx(4.0)
    assert g.integrate(np.cos(np.pi * g.nodes / 2.0) ** 2) == pytest.approx(2.0)
    with pytest.raises(ValidationError):
        PeriodicGrid(31, 1.0)
    with pytest.raises(ValidationError):
        PeriodicGrid(32, 0.0)


def test_read_only_caches():
    g = PeriodicGrid(32, 1.0)
    with pytest.raises(ValueError):
        g.nodes[0] = 1.0
    with pytest.raises(ValueError):
        g.d2[0, 0] = 1.0


@given(st.integers(0, 2 ** 31))
@settings(max_examples=25)
def test_parity_split(seed):
    g = PeriodicGrid(32, 1.7)
    f = np.random.default_rng(seed).standard_normal(32)
    e, o = g.even_part(f), g.odd_part(f)
    assert np.allclose(e + o, f)
    assert np.allclose(g.reflect(e), e) and np.allclose(g.reflect(o), -o)
    assert abs(g.inner(e, o)) < 1e-12


def test_parity_bases_orthonormal_and_complete():
    g = PeriodicGrid(32, 1.0)
    be, bo = g.even_basis, g.odd_basis
    assert be.shape == (32, 17) and bo.shape == (32, 15)
    full = np.hstack([be, bo])
    assert np.allclose(full.T @ full, np.eye(32), atol=1e-13)
    for b, sign in ((be, 1), (bo, -1)):
        assert np.allclose(b[g.reflection_index], sign * b)
    bb = g.block_basis("even")
    assert bb.shape == (64, 34)
    with pytest.raises(ValidationError):
        g.block_basis("neither")


def test_scalar_operators_symmetric_with_known_kernels(wave05):
    g = wave05.grid
    phi0 = wave05.phi1
    _, dphi0, _ = base_wave_derivatives(0.5, g.nodes)
    lp = assemble_scalar_operator(g, phi0, "Lplus")
    lm = assemble_scalar_operator(g, phi0, "Lminus")
    for op in (lp, lm):
        assert np.array_equal(op.entries, op.entries.T)
    assert np.max(np.abs(lp @ dphi0)) < 1e-9
    assert np.max(np.abs(lm @ phi0)) < 1e-9
    ker = numerical_kernel(lp, 1e-8)
    assert len(ker) == 1
    assert abs(abs(np.dot(ker[0], dphi0)) / np.linalg.norm(dphi0) - 1) < 1e-8
    lt = assemble_scalar_operator(g, phi0 ** 2, "Ltilde")
    assert np.allclose(lt.entries, lm.entries)
    with pytest.raises(ValidationError):
        assemble_scalar_operator(g, phi0, "Lcross")
    with pytest.raises(ValidationError):
        assemble_scalar_operator(g, phi0[:-1], "Lplus")


def test_solve_on_complement(wave05):
    g = wave05.grid
    phi0 = wave05.phi1
    lm = assemble_scalar_operator(g, phi0, "Lminus")
    rhs = np.ones(g.n) - g.integrate(phi0) / g.inner(phi0, phi0) * phi0
    x = solve_on_complement(lm, rhs, [phi0])
    assert np.max(np.abs(lm @ x - rhs)) < 1e-9
    assert abs(g.inner(x, phi0)) < 1e-10
    with pytest.raises(SolvabilityError):
        solve_on_complement(lm, np.ones(g.n), [phi0])


def test_solve_rejects_non_symmetric():
    g = PeriodicGrid(32, 1.0)
    from kerrcomb.grid_ops import LinearOperatorMatrix

    op = LinearOperatorMatrix(np.triu(np.ones((32, 32))), "general")
    with pytest.raises(ValidationError):
        solve_on_complement(op, np.ones(32), [])


def test_full_linearization_structure(wave05):
    g = wave05.grid
    prof = WaveProfile(g, 0.8 * wave05.phi1, 0.6 * wave05.phi1, 1e-3, 7e-4, "stable", kappa=0.5)
    lh, jlh = assemble_full_linearization(g, prof)
    assert np.array_equal(lh.entries, lh.entries.T)
    # J L_h is Hamiltonian: (J L)^T J + J (J L) = 0 with J = [[0, I], [-I, 0]]
    n = g.n
    jmat = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    a = jlh.entries
    assert np.max(np.abs(a.T @ jmat + jmat @ a)) < 1e-10
    assert np.array_equal(a, apply_symplectic(lh.entries))
    assert jlh.params == {"h": 1e-3, "alpha": 7e-4, "residual": prof.residual_norm()}
    other = PeriodicGrid(g.n, g.half_period * 1.1)
    with pytest.raises(ValidationError):
        assemble_full_linearization(other, prof)


def test_similarity_transform_decouples_rotated_wave(wave05):
    # for phi = (a0 + i b0) phi0 the rotated operator is diag(L+, L-)
    g = wave05.grid
    a0, b0 = 0.6, -0.8
    prof = WaveProfile(g, a0 * wave05.phi1, b0 * wave05.phi1, 0.0, 0.0, "base", kappa=0.5)
    lh, _ = assemble_full_linearization(g, prof)
    m = similarity_transform(lh, a0, b0)
    lp = assemble_scalar_operator(g, wave05.phi1, "Lplus").entries
    lm = assemble_scalar_operator(g, wave05.phi1, "Lminus").entries
    z = np.zeros_like(lp)
    scale = np.max(np.abs(lp))
    assert np.max(np.abs(m.entries - np.block([[lp, z], [z, lm]]))) < 1e-14 * scale
    fo = first_order_m_h(g, wave05.phi1, np.zeros(g.n), np.zeros(g.n), a0, b0, 0.0, 0.0)
    assert np.max(np.abs(fo.entries - m.entries)) < 1e-14 * scale
