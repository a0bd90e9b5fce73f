import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatchain.baths import (
    BathSpec,
    CouplingKernel,
    build_surface_operator,
    coupling_kernel,
    perturbation_objects,
    rate_matrix,
)
from heatchain.chain import ChainParams
from heatchain.errors import ParameterError
from heatchain.seeding import substream

from helpers import synthetic_spectrum

E_MINUS_HALF = 0.60653065971263342  # exp(-1/2)
E_MINUS_ONE = 0.36787944117144233  # exp(-1)


def _random_spectrum(rng, dim, spread=2.0):
    energies = np.sort(rng.uniform(-spread, spread, dim))
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    return synthetic_spectrum(energies, q)


def test_bath_spec_validation():
    for bad in (
        dict(temperature=0.0),
        dict(temperature=1.0, a0=0.0),
        dict(temperature=1.0, delta=0.0),
        dict(temperature=1.0, end="top"),
        dict(temperature=1.0, q_kind="banded"),
    ):
        with pytest.raises(ParameterError):
            BathSpec(**bad)


def test_projector_operator_single_site():
    params = ChainParams(k=3, n=6, lam=1.0, w=0.3, v=0.2, seed=1)
    spec = BathSpec(temperature=1.0, delta=5.0, end="left", q_strength=1.0)
    q = build_surface_operator(spec, params)
    expected = np.zeros((18, 18))
    expected[0, 0] = 1.0
    assert np.array_equal(q, expected)
    q_right = build_surface_operator(BathSpec(temperature=1.0, delta=5.0, end="right"), params)
    assert q_right[17, 17] == 1.0
    assert np.count_nonzero(q_right) == 1


def test_operator_independent_of_chain_length():
    spec = BathSpec(temperature=1.0, delta=5.0, end="right", q_kind="random",
                    q_strength=0.8, q_seed=42)
    entries = {}
    for k in (2, 8):
        params = ChainParams(k=k, n=5, lam=1.0, w=0.3, v=0.2, n_surf=2, seed=1)
        q = build_surface_operator(spec, params)
        sub = q[-2:, -2:]
        assert np.count_nonzero(q) == np.count_nonzero(sub)
        entries[k] = sub
    assert np.array_equal(entries[2], entries[8])


def test_random_operator_support_and_symmetry():
    params = ChainParams(k=2, n=6, lam=1.0, w=0.3, v=0.2, n_surf=2, seed=1)
    spec = BathSpec(temperature=1.0, delta=5.0, end="left", q_kind="random", q_seed=7)
    q = build_surface_operator(spec, params)
    assert np.array_equal(q, q.T)
    assert np.any(q[:2, :2] != 0.0)
    mask = np.zeros_like(q, dtype=bool)
    mask[:2, :2] = True
    assert np.all(q[~mask] == 0.0)


def test_kernel_wide_band_limit():
    rng = substream(5)
    spectrum = _random_spectrum(rng, 5)
    params = ChainParams(k=1, n=5, lam=1.0, w=0.0, v=0.2, seed=1)
    spec = BathSpec(temperature=1.0, a0=0.7, delta=np.inf, end="left")
    q = build_surface_operator(spec, params)
    x = coupling_kernel(q, spec, spectrum).x
    q_eig = spectrum.modes.T @ q @ spectrum.modes
    assert np.abs(x - 2 * np.pi * 0.7 * q_eig**2).max() < 1e-12


def test_kernel_direct_two_level_value():
    spectrum = synthetic_spectrum([0.0, 1.0])
    spec = BathSpec(temperature=1.0, a0=1.0 / (2 * np.pi), delta=1.0)
    q = np.array([[0.0, 1.0], [1.0, 0.0]])
    x = coupling_kernel(q, spec, spectrum).x
    assert x[0, 1] == pytest.approx(E_MINUS_HALF, abs=1e-15)
    assert x[1, 0] == x[0, 1]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), dim=st.integers(2, 7), delta=st.floats(0.5, 10.0))
def test_kernel_exactly_symmetric_and_nonnegative(seed, dim, delta):
    rng = substream(seed)
    spectrum = _random_spectrum(rng, dim)
    q = np.zeros((dim, dim))
    sub = rng.standard_normal((2, 2))
    q[:2, :2] = sub + sub.T
    spec = BathSpec(temperature=1.0, delta=delta)
    x = coupling_kernel(q, spec, spectrum).x
    assert np.abs(x - x.T).max() == 0.0
    assert x.min() >= 0.0


def test_kernel_dimension_mismatch():
    spectrum = synthetic_spectrum([0.0, 1.0])
    with pytest.raises(ParameterError):
        coupling_kernel(np.zeros((3, 3)), BathSpec(temperature=1.0, delta=1.0), spectrum)


def test_rate_matrix_two_level_values():
    spectrum = synthetic_spectrum([0.0, 1.0])
    kernel = CouplingKernel(x=np.array([[0.0, 1.0], [1.0, 0.0]]),
                            spec=BathSpec(temperature=0.5, delta=1.0))
    w = rate_matrix(kernel, 0.5, spectrum)  # beta = 2
    assert w.w[0, 1] == pytest.approx(math.e, rel=1e-15)
    assert w.w[1, 0] == pytest.approx(1.0 / math.e, rel=1e-15)
    assert w.w[0, 1] / w.w[1, 0] == pytest.approx(math.e**2, rel=1e-12)


def test_rate_matrix_requires_positive_temperature():
    spectrum = synthetic_spectrum([0.0, 1.0])
    kernel = CouplingKernel(x=np.eye(2), spec=BathSpec(temperature=1.0, delta=1.0))
    with pytest.raises(ParameterError):
        rate_matrix(kernel, 0.0, spectrum)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), dim=st.integers(2, 8), t=st.floats(0.2, 4.0))
def test_detailed_balance(seed, dim, t):
    rng = substream(seed)
    spectrum = _random_spectrum(rng, dim)
    a = rng.random((dim, dim))
    kernel = CouplingKernel(x=0.5 * (a + a.T), spec=BathSpec(temperature=t, delta=5.0))
    w = rate_matrix(kernel, t, spectrum).w
    e = spectrum.energies
    ratio = np.exp((e[None, :] - e[:, None]) / t)
    assert np.abs(w - ratio * w.T).max() <= 1e-12 * w.max()


def test_rate_temperature_derivative_matches_finite_difference():
    """dW/dT = (E_n - E_m) W / (2 T^2), checked against a central
    difference at h = 1e-5 T for all entries within 5 bandwidths."""
    rng = substream(9)
    spectrum = _random_spectrum(rng, 8)
    a = rng.random((8, 8))
    delta = 1.5
    kernel = CouplingKernel(x=0.5 * (a + a.T), spec=BathSpec(temperature=1.0, delta=delta))
    t = 0.9
    h = 1e-5 * t
    w0 = rate_matrix(kernel, t, spectrum).w
    fd = (rate_matrix(kernel, t + h, spectrum).w - rate_matrix(kernel, t - h, spectrum).w) / (2 * h)
    e = spectrum.energies
    predicted = (e[:, None] - e[None, :]) / (2 * t**2) * w0
    de = np.abs(e[:, None] - e[None, :])
    mask = (de <= 5 * delta) & (de > 0)
    rel = np.abs(fd - predicted)[mask] / np.abs(predicted)[mask]
    assert rel.max() <= 1e-6


def test_perturbation_objects_wide_temperature_limit():
    rng = substream(3)
    spectrum = _random_spectrum(rng, 5)
    a = rng.random((5, 5))
    kernel = CouplingKernel(x=0.5 * (a + a.T), spec=BathSpec(temperature=1.0, delta=5.0))
    pert = perturbation_objects(kernel, np.inf, spectrum)
    assert np.array_equal(pert.b, kernel.x)
    assert np.all(pert.a == 0.0)


def test_perturbation_two_level_values():
    spectrum = synthetic_spectrum([0.0, 1.0])
    kernel = CouplingKernel(x=np.array([[0.0, 1.0], [1.0, 0.0]]),
                            spec=BathSpec(temperature=0.5, delta=1.0))
    pert = perturbation_objects(kernel, 0.5, spectrum)  # beta0 = 2
    assert pert.b[0, 1] == pytest.approx(E_MINUS_ONE, rel=1e-15)
    assert pert.a[0] == pytest.approx(-4 * E_MINUS_ONE, rel=1e-14)
    assert pert.a[1] == pytest.approx(+4 * E_MINUS_ONE, rel=1e-14)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), dim=st.integers(3, 9), t0=st.floats(0.3, 3.0))
def test_perturbation_invariants(seed, dim, t0):
    rng = substream(seed)
    spectrum = _random_spectrum(rng, dim)
    a = rng.random((dim, dim))
    kernel = CouplingKernel(x=0.5 * (a + a.T), spec=BathSpec(temperature=t0, delta=5.0))
    pert = perturbation_objects(kernel, t0, spectrum)
    assert np.abs(pert.b - pert.b.T).max() == 0.0
    assert abs(pert.a.sum()) <= 1e-12 * np.abs(pert.a).max()


def test_equal_coupling_reduction_fixture():
    params = ChainParams(k=2, n=10, lam=1.0, w=0.3, v=0.2, seed=2)
    from heatchain.chain import diagonalize_chain, sample_chain_hamiltonian

    spectrum = diagonalize_chain(sample_chain_hamiltonian(params))
    spec1 = BathSpec(temperature=0.8, delta=8.0, end="left")
    spec2 = BathSpec(temperature=1.2, delta=8.0, end="left")
    q = build_surface_operator(spec1, params)
    x1 = coupling_kernel(q, spec1, spectrum).x
    x2 = coupling_kernel(q, spec2, spectrum).x
    assert np.array_equal(x1, x2)
