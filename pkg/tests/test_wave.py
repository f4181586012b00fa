import numpy as np
import pytest
import scipy.linalg as sla

from psdrom.integrator import integrate
from psdrom.wave import (
    WaveParams,
    assemble_wave_model,
    coarse_model,
    continuum_solution,
    discrete_hamiltonian,
    dxx_eigenvalues,
    full_model_eigenvalues,
    initial_condition,
    interpolate_periodic,
    reference_solution,
    second_difference,
    spline_bump,
)


def test_defaults():
    p = WaveParams()
    assert (p.n, p.dt, p.T, p.beta, p.omega0, p.c) == (500, 0.01, 50.0, 0.1, 0.05, 0.1)
    assert p.dx == pytest.approx(0.002)
    assert p.snapshot_stride == 50


def test_config_round_trip_and_unknown_keys():
    p = WaveParams(n=64, beta=0.0)
    assert WaveParams.from_string(p.to_string()) == p
    assert WaveParams.from_string("n = 32  # grid\nc = 0.2\n") == WaveParams(n=32, c=0.2)
    with pytest.raises(ValueError):
        WaveParams.from_string("gamma = 1\n")
    with pytest.raises(ValueError):
        WaveParams(n=0)


def test_spline_bump_values():
    np.testing.assert_allclose(spline_bump([0.0, 1.0, 2.0, 3.0]), [1.0, 0.25, 0.0, 0.0])
    # continuous first derivative at s = 1
    h = 1e-6
    left = (spline_bump(1.0) - spline_bump(1.0 - h)) / h
    right = (spline_bump(1.0 + h) - spline_bump(1.0)) / h
    assert left == pytest.approx(right, abs=1e-5)


def test_second_difference_spectrum():
    p = WaveParams(n=16)
    D = second_difference(p.n, p.dx)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(D)), np.sort(dxx_eigenvalues(p)), atol=1e-8)
    with pytest.raises(ValueError):
        second_difference(2, 0.5)


def test_model_energy_matches_discrete_hamiltonian(rng):
    p = WaveParams(n=32)
    model = assemble_wave_model(p)
    y = rng.standard_normal(64)
    assert model.energy(y) == pytest.approx(discrete_hamiltonian(p, y), rel=1e-12)


def test_full_model_eigenvalues_match_dense():
    p = WaveParams(n=24, beta=0.3)
    lam = full_model_eigenvalues(p)
    dense = sla.eigvals(assemble_wave_model(p).operator)
    for z in lam:
        assert np.min(np.abs(dense - z)) < 1e-9
    # each pair satisfies lambda^2 + beta lambda - c^2 b + omega0^2 = 0
    b = np.concatenate([dxx_eigenvalues(p)] * 2)
    np.testing.assert_allclose(lam**2 + p.beta * lam - p.c**2 * b + p.omega0**2, 0.0, atol=1e-10)


def test_reference_matches_matrix_exponential():
    p = WaveParams(n=20, beta=0.1)
    y0 = initial_condition(p)
    op = assemble_wave_model(p).operator
    for t in (0.0, 0.37, 5.0):
        np.testing.assert_allclose(reference_solution(p, t), sla.expm(op * t) @ y0, atol=1e-11)


def test_reference_handles_critical_damping():
    # beta = 2 omega0 makes the zero mode a double root
    p = WaveParams(n=20, beta=0.1, omega0=0.05)
    y0 = np.concatenate([np.ones(20), np.zeros(20)])
    out = reference_solution(p, 2.0, y0)
    np.testing.assert_allclose(out[:20], np.exp(-0.05 * 2.0) * (1 + 0.05 * 2.0), rtol=1e-13)


def test_midpoint_converges_to_reference():
    p = WaveParams(n=32, T=2.0)
    errs = []
    for dt in (0.02, 0.01):
        traj, _ = integrate(assemble_wave_model(p), initial_condition(p), dt, p.T)
        errs.append(np.linalg.norm(traj.states[-1] - reference_solution(p, p.T)))
    assert errs[1] < errs[0] / 3.5  # second order


def test_continuum_close_to_discrete_on_fine_grid():
    p = WaveParams(n=400)
    gap = np.linalg.norm(continuum_solution(p, 5.0) - reference_solution(p, 5.0)) * np.sqrt(p.dx)
    assert gap < 2e-3


def test_coarse_model_and_interpolation():
    p = WaveParams(n=100)
    model, y0, pc = coarse_model(p, 20)
    assert model.half_dim == 10 and pc.n == 10 and y0.shape == (20,)
    with pytest.raises(ValueError):
        coarse_model(p, 21)
    with pytest.raises(ValueError):
        coarse_model(p, 4)
    # linear data is reproduced away from the wraparound
    q = 3.0 * pc.grid
    fine = interpolate_periodic(pc, q, p)
    mask = (p.grid >= pc.grid[0]) & (p.grid <= pc.grid[-1])
    np.testing.assert_allclose(fine[mask], 3.0 * p.grid[mask], atol=1e-12)


def test_gradient_consistency(rng):
    p = WaveParams(n=16)
    model = assemble_wave_model(p)
    y = rng.standard_normal(32)
    h = 1e-6
    fd = np.array([
        (discrete_hamiltonian(p, y + h * e) - discrete_hamiltonian(p, y - h * e)) / (2 * h)
        for e in np.eye(32)
    ])
    # the model is canonical in H_d / dx
    np.testing.assert_allclose(fd / p.dx, model.gradient(y), rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(model.vector_field(y), model.operator @ y, atol=1e-10)


def test_spatial_energy_convergence():
    # q = sin(2 pi x), p = 0: continuum energy (c^2 (2 pi)^2 + omega0^2) / 4
    gaps = []
    for n in (16, 32, 64, 128):
        p = WaveParams(n=n, beta=0.0)
        y = np.concatenate([np.sin(2 * np.pi * p.grid), np.zeros(n)])
        exact = (p.c**2 * (2 * np.pi) ** 2 + p.omega0**2) / 4
        gaps.append(abs(discrete_hamiltonian(p, y) - exact))
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
