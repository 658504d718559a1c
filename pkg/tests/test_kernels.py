import os
import subprocess
import sys

import numpy as np
import pytest

from kerrcomb import _fallback, kernels


def _backend_in_subprocess(env_value):
    env = dict(os.environ)
    env.pop("KERRCOMB_PURE_PYTHON", None)
    if env_value is not None:
        env["KERRCOMB_PURE_PYTHON"] = env_value
    out = subprocess.run([sys.executable, "-c", "import kerrcomb; print(kerrcomb.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_env_var_forces_fallback():
    assert _backend_in_subprocess("1") == "python"


def test_default_backend_is_compiled_when_built():
    try:
        from kerrcomb import _core  # noqa: F401
    except ImportError:
        pytest.skip("compiled extension not built")
    assert _backend_in_subprocess(None) == "compiled"
    assert kernels.BACKEND == "compiled" or os.environ.get("KERRCOMB_PURE_PYTHON")


def test_fallback_sncndn_identities():
    u = np.linspace(-20, 20, 501)
    for k in (0.0, 0.3, 0.9, 0.999999):
        sn, cn, dn = _fallback.sncndn(u, k)
        assert np.max(np.abs(sn ** 2 + cn ** 2 - 1)) < 1e-14
        assert np.max(np.abs(dn ** 2 + k * k * sn ** 2 - 1)) < 1e-14


def test_fallback_rotation_preserves_modulus():
    rng = np.random.default_rng(0)
    u = rng.standard_normal((2, 64)) + 1j * rng.standard_normal((2, 64))
    v = u.copy()
    _fallback.nonlinear_rotate(v, 0.1)
    assert np.allclose(np.abs(v), np.abs(u), rtol=0, atol=1e-15)
    assert np.allclose(v, u * np.exp(0.2j * np.abs(u) ** 2), atol=1e-14)
