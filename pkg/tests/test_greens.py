import numpy as np
import pytest

from heatchain.chain import ChainParams, diagonalize_chain, sample_chain_hamiltonian, smoothed_level_density
from heatchain.errors import NumericalError, ParameterError
from heatchain.greens import (
    GreenProfile,
    average_level_density,
    bulk_green,
    pastur_solve,
    predicted_surface_halfwidth,
    strength_function_analytic,
    strength_function_empirical,
    suggested_eta,
)
from heatchain.seeding import substream

from helpers import synthetic_spectrum


def _params(k, n=200, lam=1.0, w=1.0, v=0.05, e1=0.0):
    return ChainParams(k=k, n=n, lam=lam, w=w, v=v, e1=e1, seed=1)


def test_single_block_closed_form():
    profile = pastur_solve(_params(1, w=0.0), np.array([0.0]), eta=1e-8)
    assert abs(profile.g_blocks[0, 0] - (-1j)) < 1e-6


def test_two_block_closed_form():
    profile = pastur_solve(_params(2), np.array([0.0]), eta=1e-8)
    target = -1j / np.sqrt(2.0)
    for g in profile.g_blocks[:, 0]:
        assert abs(g - target) < 1e-6


def test_eight_block_middle_values():
    profile = pastur_solve(_params(8), np.array([0.0]), eta=1e-8)
    target = -1j / np.sqrt(3.0)
    for k in (2, 3, 4, 5):  # innermost four blocks
        assert abs(profile.g_blocks[k, 0] - target) <= 0.05 * abs(target)


def test_bulk_green_values():
    lam_eff = np.sqrt(3.0)
    assert bulk_green(1.0, 1.0, 0.0) == pytest.approx(-1j / lam_eff, abs=1e-15)
    edge = bulk_green(1.0, 1.0, 2.0 * lam_eff)
    assert edge == pytest.approx(1.0 / lam_eff, abs=1e-15)
    assert edge.imag == 0.0
    # w = 0: plain semicircle of radius 2 lam
    inside = bulk_green(1.0, 0.0, np.array([-1.9, 0.0, 1.9]))
    assert np.all(inside.imag < 0.0)
    outside = bulk_green(1.0, 0.0, np.array([-2.1, 2.1]))
    assert np.all(outside.imag == 0.0)
    # decay like 1/E far outside
    assert bulk_green(1.0, 0.0, 50.0) == pytest.approx(1.0 / 50.0, rel=0.01)


def test_profile_herglotz_reflection_and_residual():
    params = _params(4, w=0.5)
    lam_eff = params.lam_eff
    grid = np.linspace(-2.5 * lam_eff, 2.5 * lam_eff, 501)
    profile = pastur_solve(params, grid, eta=0.02 * lam_eff)
    assert profile.residual <= 1e-10
    assert np.all(profile.g_blocks.imag < 0.0)
    flipped = profile.g_blocks[:, ::-1]
    assert np.abs(profile.g_blocks + np.conj(flipped)).max() <= 1e-10


def test_edge_block_exceeds_middle_at_band_center():
    # Edge blocks have one neighbor only, hence a smaller effective scale
    # and a larger |Im G(0)| = 1/lam_eff_local.
    profile = pastur_solve(_params(8, w=0.5), np.array([0.0]), eta=1e-8)
    g0 = profile.g_blocks[:, 0]
    assert abs(g0[0].imag) >= abs(g0[4].imag)
    assert abs(g0[-1].imag) >= abs(g0[3].imag)


def test_pastur_validation():
    params = _params(2, w=0.5)
    with pytest.raises(ParameterError):
        pastur_solve(params, np.array([0.0]), eta=0.0)
    with pytest.raises(ParameterError):
        pastur_solve(params, np.array([4.0 * params.lam_eff]), eta=0.1)


def test_nonconvergence_reports_energy():
    # tiny eta near the band edge stalls the damped iteration
    params = _params(1, w=0.0)
    with pytest.raises(NumericalError, match="E="):
        pastur_solve(params, np.array([2.0]), eta=1e-9)


def test_strength_function_pure_lorentzian():
    """Constant-G surface resolvent: a Breit-Wigner of half-width
    v^2 n / lam_eff = 0.5 with unit weight."""
    params = ChainParams(k=1, n=200, lam=1.0, w=0.0, v=np.sqrt(0.5 / 200), seed=1)
    grid = np.linspace(-3.0, 3.0, 6001)
    eta = 1e-4
    profile = GreenProfile(
        grid=grid, eta=eta, g_blocks=np.full((1, grid.size), -1j),
        g_surface=np.zeros(grid.size, dtype=complex), params=params, residual=0.0,
    )
    sf = strength_function_analytic(profile, params.v, params.n, 0.0)
    assert sf.values.max() == pytest.approx(1.0 / (np.pi * 0.5), rel=0.02)
    assert sf.width == pytest.approx(0.5, rel=0.02)
    assert abs(sf.center) < 0.01
    assert sf.fwhm == 2 * sf.width
    assert predicted_surface_halfwidth(profile, params.v, params.n) == pytest.approx(0.5, rel=1e-12)


def test_strength_function_decoupled_surface():
    params = _params(2, w=0.5, v=0.0, e1=0.4)
    lam_eff = params.lam_eff
    grid = np.linspace(-2.5 * lam_eff, 2.5 * lam_eff, 2001)
    eta = suggested_eta(params, empirical=False)
    profile = pastur_solve(params, grid, eta=eta)
    sf = strength_function_analytic(profile, 0.0, params.n, e1=0.4)
    assert sf.center == pytest.approx(0.4, abs=0.01)
    assert sf.width <= 0.2 * eta  # eta-limited line, eta removed
    assert np.trapezoid(sf.values, grid) == pytest.approx(1.0, rel=0.02)


def test_empirical_requires_ensemble_and_resolvable_eta():
    params = ChainParams(k=2, n=20, lam=1.0, w=0.3, v=0.2, seed=3)
    spectra = [diagonalize_chain(sample_chain_hamiltonian(params, substream(3, r)))
               for r in range(10)]
    grid = np.linspace(-2, 2, 201)
    with pytest.raises(ParameterError):
        strength_function_empirical(spectra[:5], 0, grid, 0.5)
    with pytest.raises(ParameterError):
        strength_function_empirical(spectra, 0, grid, 1e-6)


def test_empirical_surface_weight_is_complete():
    params = ChainParams(k=2, n=30, lam=1.0, w=0.3, v=0.2, seed=5)
    spec = diagonalize_chain(sample_chain_hamiltonian(params))
    assert abs((spec.modes[0, :] ** 2).sum() - 1.0) <= 1e-10


def test_empirical_decoupled_surface_line():
    params = ChainParams(k=2, n=60, lam=1.0, w=0.3, v=0.0, e1=0.4, seed=3)
    spectra = [diagonalize_chain(sample_chain_hamiltonian(params, substream(3, r)))
               for r in range(10)]
    lam_eff = params.lam_eff
    grid = np.linspace(-3 * lam_eff, 3 * lam_eff, 3001)
    eta = suggested_eta(params, empirical=True)
    sf = strength_function_empirical(spectra, 0, grid, eta)
    assert sf.center == pytest.approx(0.4, abs=1e-6)
    assert sf.width <= 1e-6  # all weight on one level
    assert np.trapezoid(sf.values, grid) == pytest.approx(1.0, rel=0.02)


def test_empirical_width_matches_analytic_curve(spectral_ensembles):
    params, spectra = spectral_ensembles[4]
    lam_eff = params.lam_eff
    grid = np.linspace(-3 * lam_eff, 3 * lam_eff, 801)
    profile = pastur_solve(params, grid, eta=suggested_eta(params, empirical=False))
    sf_an = strength_function_analytic(profile, params.v, params.n, 0.0)
    sf_mc = strength_function_empirical(spectra[:20], 0, grid, suggested_eta(params, empirical=True))
    assert sf_mc.width == pytest.approx(sf_an.width, rel=0.15)


def test_analytic_width_is_length_independent():
    widths = []
    for k in (2, 4, 8):
        params = _params(k, w=0.5, v=np.sqrt(0.5 / 200))
        lam_eff = params.lam_eff
        grid = np.linspace(-3 * lam_eff, 3 * lam_eff, 801)
        profile = pastur_solve(params, grid, eta=0.02 * lam_eff)
        widths.append(strength_function_analytic(profile, params.v, params.n, 0.0).width)
    assert (max(widths) - min(widths)) / min(widths) <= 0.10


def test_level_density_doubles_with_block_count():
    rho0 = {}
    for k in (2, 4):
        params = _params(k, w=0.25)
        profile = pastur_solve(params, np.array([0.0]), eta=0.02 * params.lam_eff)
        rho0[k] = average_level_density(profile, params.n)[0]
    assert rho0[4] / rho0[2] == pytest.approx(2.0, rel=0.03)


def test_level_density_integrates_to_state_count():
    params = _params(4, w=0.5)
    lam_eff = params.lam_eff
    grid = np.linspace(-3 * lam_eff, 3 * lam_eff, 1201)
    profile = pastur_solve(params, grid, eta=0.02 * lam_eff)
    rho = average_level_density(profile, params.n)
    assert np.trapezoid(rho, grid) == pytest.approx(params.dim, rel=0.03)


def test_level_density_matches_monte_carlo(spectral_ensembles):
    params, spectra = spectral_ensembles[2]
    lam_eff = params.lam_eff
    grid = np.linspace(-3 * lam_eff, 3 * lam_eff, 601)
    eta = suggested_eta(params, empirical=True)
    rho_pastur = average_level_density(pastur_solve(params, grid, eta=eta), params.n)
    rho_mc = np.zeros_like(grid)
    for s in spectra[:20]:
        rho_mc += smoothed_level_density(s, grid, eta)
    rho_mc /= 20
    bulk = np.abs(grid) <= 1.5 * lam_eff
    rel = np.abs(rho_mc[bulk] - rho_pastur[bulk]) / rho_pastur[bulk]
    assert rel.max() <= 0.05


def test_suggested_eta_conventions():
    params = _params(4, w=0.5)
    assert suggested_eta(params, empirical=False) == pytest.approx(0.02 * params.lam_eff)
    assert suggested_eta(params, empirical=True) == pytest.approx(
        3 * np.pi * params.lam_eff / params.dim
    )
