"""The numba kernels and the numpy fallback must agree bitwise."""

import numpy as np
import pytest

import nonlocal_flow as nf
from nonlocal_flow import AtomListSpec, StepControl, backend
from nonlocal_flow import _kernels_numpy as knp

knb = pytest.importorskip("nonlocal_flow._kernels_numba")


@pytest.fixture(scope="module")
def random_states():
    rng = np.random.default_rng(20240811)
    states = []
    for _ in range(100):
        n = int(rng.integers(1, 65))
        values = rng.uniform(-3.0, 4.0, n)
        weights = rng.uniform(0.05, 2.0, n)
        states.append((values, weights))
    return states


def test_kahan_dot_bitwise(random_states):
    for values, weights in random_states:
        assert knp.kahan_dot(weights, values) == knb.kahan_dot(weights, values)


def test_reductions_bitwise(random_states):
    for values, weights in random_states:
        assert knp.reductions(values, weights) == knb.reductions(values, weights)


def test_rhs_bitwise(random_states):
    for values, weights in random_states:
        a = knp.rhs_from_lambda(values, 1.7)
        b = knb.rhs_from_lambda(values, 1.7)
        np.testing.assert_array_equal(a, b)


def test_ck_attempt_bitwise(random_states):
    for values, weights in random_states:
        y1, e1, s1 = knp.ck_attempt(values, weights, 0.01, 1e-12)
        y2, e2, s2 = knb.ck_attempt(values, weights, 0.01, 1e-12)
        assert s1 == s2
        if s1 == knp.STATUS_OK:
            np.testing.assert_array_equal(y1, y2)
            assert e1 == e2


def test_rk4_run_bitwise_over_many_steps():
    values = np.array([1.5, 3.0, 2.0, 1.0])
    weights = np.full(4, 0.25)
    y1, s1, n1 = knp.rk4_run(values, weights, 1e-3, 5000, 1e-12)
    y2, s2, n2 = knb.rk4_run(values, weights, 1e-3, 5000, 1e-12)
    assert (s1, n1) == (s2, n2)
    np.testing.assert_array_equal(y1, y2)


def test_scalar_kernel_bitwise():
    from nonlocal_flow._scalar import scalar_ck_attempt as plain

    for y0 in (1.5, 3.0, 0.3, -0.8):
        y, t = y0, 0.0
        for _ in range(50):
            r1 = plain(y, t, 0.02, 0.0, 2.1, -0.05)
            r2 = knb.scalar_ck_attempt(y, t, 0.02, 0.0, 2.1, -0.05)
            assert r1 == r2
            y = r1[0]
            t += 0.02


def test_full_evolve_identical_between_backends():
    e = nf.build_ensemble(AtomListSpec(((1.5, 0.5), (3.0, 0.5))))
    ctrl = StepControl(t_max=20.0)
    with backend.use("numpy"):
        rec_np = nf.evolve(e, ctrl)
    with backend.use("numba"):
        rec_nb = nf.evolve(e, ctrl)
    np.testing.assert_array_equal(rec_np.times, rec_nb.times)
    np.testing.assert_array_equal(rec_np.lambda_series, rec_nb.lambda_series)
    np.testing.assert_array_equal(rec_np.mass_series, rec_nb.mass_series)
    for (_, a), (_, b) in zip(rec_np.snapshots, rec_nb.snapshots):
        np.testing.assert_array_equal(a.values, b.values)


def test_evolve_deterministic_across_repeats():
    e = nf.build_ensemble(AtomListSpec(((1.5, 0.5), (3.0, 0.5))))
    ctrl = StepControl(t_max=10.0)
    rec1 = nf.evolve(e, ctrl)
    rec2 = nf.evolve(e, ctrl)
    np.testing.assert_array_equal(rec1.lambda_series, rec2.lambda_series)
    np.testing.assert_array_equal(rec1.final_ensemble.values,
                                  rec2.final_ensemble.values)


def test_backend_env_flag(monkeypatch):
    monkeypatch.setattr(backend, "_active", None)
    monkeypatch.setenv(backend.ENV_VAR, "numpy")
    assert backend.backend_name() == "numpy"
    monkeypatch.setattr(backend, "_active", None)
    monkeypatch.setenv(backend.ENV_VAR, "numba")
    assert backend.backend_name() == "numba"
    monkeypatch.setattr(backend, "_active", None)
    monkeypatch.setenv(backend.ENV_VAR, "nonsense")
    with pytest.raises(ValueError):
        backend.backend_name()
    monkeypatch.setattr(backend, "_active", None)
