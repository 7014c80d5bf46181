import os
import subprocess
import sys

import numpy as np
import pytest

from stiffkit import kernels
from stiffkit.generate import random_spd

BACKENDS = list(kernels.available())


def test_python_backend_always_available():
    assert "python" in BACKENDS


def test_compiled_backend_built():
    assert "cython" in BACKENDS, "extension not built; run pip install -e . --no-build-isolation"


@pytest.mark.parametrize("name", ["python", "cython", "auto"])
def test_backend_selection_via_env(name):
    if name == "cython" and "cython" not in BACKENDS:
        pytest.skip("extension not built")
    env = dict(os.environ, STIFFKIT_BACKEND=name)
    out = subprocess.run([sys.executable, "-c", "import stiffkit; print(stiffkit.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    assert out == (("cython" if "cython" in BACKENDS else "python") if name == "auto" else name)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get("fortran")


@pytest.fixture(params=range(20))
def problem(request):
    rng = np.random.default_rng(request.param)
    K = np.ascontiguousarray(random_spd(rng, 6, 1.0, 10.0))
    return K, rng.normal(size=6), np.asfortranarray(rng.normal(size=(6, 5))), rng.normal(size=3)


def test_rank1_parity(problem):
    K, col, _, _ = problem
    tau = 1e-12 * np.trace(K)
    res = [kernels.get(b).rank1_update(K, col, tau) for b in BACKENDS]
    for out, mu, u in res[1:]:
        assert np.abs(out - res[0][0]).max() <= 1e-12 * np.abs(K).max()
        assert mu == pytest.approx(res[0][1], rel=1e-14)


def test_trivial_parity(problem):
    K = problem[0]
    for p in range(6):
        outs = [kernels.get(b).trivial_update(K, p, 1e-12)[0] for b in BACKENDS]
        for o in outs:
            assert np.all(o[p] == 0.0) and np.all(o[:, p] == 0.0)
            assert np.abs(o - outs[0]).max() <= 1e-13 * np.abs(K).max()


def test_reduce_columns_parity(problem):
    K, _, J, _ = problem
    outs = [kernels.get(b).reduce_columns(K, J, 1e-12) for b in BACKENDS]
    for out, fail, mus in outs:
        assert fail == -1
        assert np.abs(out - outs[0][0]).max() <= 1e-11 * np.abs(K).max()
        np.testing.assert_allclose(mus, outs[0][2], rtol=1e-12)


def test_reduce_columns_reports_failure():
    J = np.asfortranarray(np.column_stack([np.eye(6)[0], np.eye(6)[0]]))
    for b in BACKENDS:
        _, fail, _ = kernels.get(b).reduce_columns(np.eye(6), J, 1e-12)
        assert fail == 1


def test_transport_parity(problem):
    K, _, _, v = problem
    outs = [kernels.get(b).transport(K, v) for b in BACKENDS]
    for o in outs:
        assert np.abs(o - outs[0]).max() <= 1e-12 * np.abs(outs[0]).max()
        np.testing.assert_array_equal(o, o.T)


def test_kernels_do_not_mutate_inputs(problem):
    K, col, J, v = problem
    K0, J0 = K.copy(), J.copy()
    for b in BACKENDS:
        mod = kernels.get(b)
        mod.rank1_update(K, col, 1e-12)
        mod.trivial_update(K, 2, 1e-12)
        mod.reduce_columns(K, J, 1e-12)
        mod.transport(K, v)
    np.testing.assert_array_equal(K, K0)
    np.testing.assert_array_equal(J, J0)
