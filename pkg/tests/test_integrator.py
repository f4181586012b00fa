import numpy as np
import pytest
import scipy.linalg as sla

from psdrom.integrator import (
    EnergySeries,
    LinearMidpoint,
    StepFailure,
    integrate,
    midpoint_step_linear,
    midpoint_step_nonlinear,
    step_count,
)
from psdrom.reduction import ForcedHamiltonianModel
from psdrom.symplectic import poisson_matrix


def harmonic(omega=2.0, beta=0.0):
    S = np.diag([omega**2, 1.0])
    L = np.array([[0.0, 0.0], [0.0, -beta]])
    return ForcedHamiltonianModel.from_linear(poisson_matrix(1) @ S, L, S)


def test_linear_step_is_cayley_transform():
    op = np.array([[0.0, 1.0], [-4.0, -0.1]])
    dt = 0.05
    M = LinearMidpoint(op, dt).matrix()
    expected = np.linalg.solve(np.eye(2) - dt / 2 * op, np.eye(2) + dt / 2 * op)
    np.testing.assert_allclose(M, expected, rtol=1e-14)
    y = np.array([1.0, 0.5])
    np.testing.assert_allclose(midpoint_step_linear(op, y, dt), expected @ y, rtol=1e-14)


def test_nonlinear_step_matches_linear():
    op = np.array([[0.0, 1.0], [-4.0, -0.1]])
    y = np.array([1.0, 0.5])
    a = midpoint_step_nonlinear(lambda v: op @ v, y, 0.05)
    np.testing.assert_allclose(a, midpoint_step_linear(op, y, 0.05), atol=1e-13)


def test_harmonic_energy_conserved_exactly():
    m = harmonic()
    traj, E = integrate(m, [1.0, 0.0], 0.1, 100.0)
    assert E.max_relative_drift() < 1e-12
    # phase error of the midpoint rule: frequency 2/dt * atan(omega dt / 2)
    w = 2 / 0.1 * np.arctan(2.0 * 0.1 / 2)
    np.testing.assert_allclose(traj.states[-1, 0], np.cos(w * 100.0), atol=1e-9)


def test_damped_oscillator_energy_decreases():
    _, E = integrate(harmonic(beta=0.3), [1.0, 0.0], 0.01, 20.0)
    assert E.is_nonincreasing()
    assert E.values[-1] < 0.1 * E.values[0]


def test_pendulum_energy_nearly_conserved():
    m = ForcedHamiltonianModel(
        1,
        lambda x: 0.5 * x[1] ** 2 - np.cos(x[0]),
        lambda x: np.array([np.sin(x[0]), x[1]]),
        lambda x: np.zeros(1),
    )
    _, E = integrate(m, [1.0, 0.0], 0.05, 50.0)
    assert E.max_relative_drift() < 1e-3


def test_newton_failure_reports_residual():
    with pytest.raises(StepFailure) as info:
        midpoint_step_nonlinear(lambda v: v**3, np.array([5.0]), 1.0, max_iter=2)
    assert info.value.residual > 0


def test_newton_divergence_detected():
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(StepFailure):
            midpoint_step_nonlinear(lambda v: np.exp(v) * 1e3, np.array([5.0]), 1.0)


def test_blowup_stops_and_marks_energy_inf():
    op = np.array([[1.0, 0.0], [0.0, 1.0]])

    class Growing:
        operator = op
        tag = "growing"

        def energy(self, y):
            return float(y @ y)

    traj, E = integrate(Growing(), [1.0, 1.0], 0.1, 100.0, blowup_threshold=1e6)
    assert traj.blew_up and traj.blowup_time < 100.0
    assert np.isinf(E.values[-1])


def test_step_count_validation():
    assert step_count(0.01, 50.0) == 5000
    with pytest.raises(ValueError):
        step_count(0.03, 0.1)
    with pytest.raises(ValueError):
        step_count(0.0, 1.0)


def test_linear_midpoint_singular():
    with pytest.warns(sla.LinAlgWarning),  pytest.raises(np.linalg.LinAlgError):
        LinearMidpoint(np.eye(2) * 2.0, 1.0)


def test_propagator_eigenvalues_on_unit_circle_for_hamiltonian():
    S = np.diag([3.0, 1.0, 2.0, 1.0])
    M = LinearMidpoint(poisson_matrix(2) @ S, 0.2).matrix()
    np.testing.assert_allclose(np.abs(sla.eigvals(M)), 1.0, atol=1e-13)


def test_energy_series_csv(tmp_path):
    E = EnergySeries(np.array([0.0, 0.1]), np.array([1.0, 0.5]))
    E.to_csv(tmp_path / "e.csv", comment="x")
    assert (tmp_path / "e.csv").read_text().splitlines()[:2] == ["# x", "t,E"]


def test_forward_backward_returns_state():
    op = np.array([[0.0, 1.0, 0.0, 0.0], [-3.0, -0.2, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0], [1.0, 0.0, -2.0, -0.1]])
    y = np.array([0.3, -1.0, 0.8, 0.1])
    back = midpoint_step_linear(op, midpoint_step_linear(op, y, 0.05), -0.05)
    np.testing.assert_allclose(back, y, atol=1e-12)


def test_step_map_symplectic_without_damping(rng):
    C = rng.standard_normal((3, 3))
    S = np.block([[C @ C.T + np.eye(3), np.zeros((3, 3))], [np.zeros((3, 3)), np.eye(3)]])
    J = poisson_matrix(3)
    M = LinearMidpoint(J @ S, 0.1).matrix()
    np.testing.assert_allclose(M.T @ J @ M, J, atol=1e-10)
