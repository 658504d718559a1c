import math

from hypothesis import given, settings, strategies as st
import mpmath
import numpy as np
import pytest

from kerrcomb.cnoidal import (base_wave, base_wave_derivatives, base_wave_params, quartic_roots,
                              roots_from_minimum, wave_from_roots)
from kerrcomb.elliptic import complete_integrals
from kerrcomb.errors import DomainError, RegimeError, ValidationError


@pytest.mark.parametrize("kappa", [0.3, 0.5, 0.7, 0.9])
def test_base_wave_solves_undriven_system(kappa):
    w = base_wave(kappa, 256)
    assert w.residual_norm() < 1e-8
    assert w.info["resolved"]
    p = w.info["params"]
    assert w.grid.integrate(w.phi1) == pytest.approx(math.pi, abs=1e-10)
    assert w.grid.inner(w.phi1, w.phi1) == pytest.approx(2 * p.amp * p.kappa.e_complete, abs=1e-10)


def test_params():
    p = base_wave_params(0.5)
    amp = 1 / math.sqrt(1.75)
    assert p.amp == pytest.approx(amp)
    assert p.half_period == pytest.approx(complete_integrals(0.5)[0] / amp)
    assert p.m_min == pytest.approx(amp * math.sqrt(0.75))


def test_wave_extremes(wave05):
    p = wave05.info["params"]
    assert np.max(wave05.phi1) == pytest.approx(p.amp, abs=1e-14)
    assert np.min(wave05.phi1) >= p.m_min - 1e-14
    assert wave05.odd_part_max() < 1e-14
    assert wave05.branch == "base" and wave05.h == 0.0


def test_derivatives_match_spectral(wave05):
    _, d1, d2 = base_wave_derivatives(0.5, wave05.grid.nodes)
    assert np.max(np.abs(wave05.grid.derivative(wave05.phi1) - d1)) < 1e-11
    assert np.max(np.abs(wave05.grid.derivative(wave05.phi1, 2) - d2)) < 1e-9


def test_first_integral_of_base_wave(wave05):
    # phi'^2 + phi^4 - phi^2 is constant along the wave
    phi, d1, _ = base_wave_derivatives(0.5, wave05.grid.nodes)
    c = d1 ** 2 + phi ** 4 - phi ** 2
    assert np.ptp(c) < 1e-14


@pytest.mark.parametrize("bad", [0.0, 1.0, 1.2, -0.5])
def test_modulus_domain(bad):
    with pytest.raises(DomainError):
        base_wave(bad)


@pytest.mark.parametrize("n", [16, 100, 255])
def test_grid_size(n):
    with pytest.raises(ValidationError):
        base_wave(0.5, n)


@given(st.floats(0.2, 0.7), st.floats(0.0, 0.01))
@settings(max_examples=40, deadline=None)
def test_quartic_roots_against_mpmath(m, h):
    c = m * m - m ** 4 - 2 * h * m
    roots = quartic_roots(h, c)
    assert max(abs(r) for r in roots.vieta_residuals()) < 1e-12
    with mpmath.workdps(40):
        ref = sorted(float(mpmath.re(r)) for r in mpmath.polyroots([1, 0, -1, 2 * h, c]))
    assert np.allclose(roots.zeta, ref, atol=1e-12)
    assert list(roots.zeta) == sorted(roots.zeta)


def test_regime_error_names_condition():
    with pytest.raises(RegimeError, match="discriminant|1/4"):
        quartic_roots(0.0, 0.3)


@pytest.mark.parametrize("kappa", [0.3, 0.5, 0.8])
def test_roots_reproduce_base_wave(kappa):
    p = base_wave_params(kappa)
    w = wave_from_roots(roots_from_minimum(p.m_min, 0.0), 256)
    assert w.kappa == pytest.approx(kappa, abs=1e-12)
    assert w.grid.half_period == pytest.approx(p.half_period, rel=1e-12)
    ref = base_wave(kappa, 256)
    # wave_from_roots is centered on its maximum, as is the base wave
    assert np.max(np.abs(w.phi1 - ref.phi1)) < 1e-12
    assert w.info["first_integral_residual"] < 1e-10


def test_roots_with_pump_give_periodic_wave():
    w = wave_from_roots(roots_from_minimum(0.6, 1e-3), 256)
    assert w.info["first_integral_residual"] < 1e-9
    # the wave solves phi'' - phi + 2 phi^3 = -h
    r = w.grid.derivative(w.phi1, 2) - w.phi1 + 2 * w.phi1 ** 3 + 1e-3
    assert np.max(np.abs(r)) < 1e-8
