import numpy as np
import pytest

from psdrom.stability import leading_mode, psd_stability, reduced_spectrum, table2_cell, wave_snapshots
from psdrom.wave import WaveParams


def test_leading_mode_of_diagonal():
    op = np.diag([-1.0, 0.5, -3.0])
    rep = leading_mode(op, np.array([0.0, 2.0, 0.0]), 3, 0.0)
    assert rep.lambda_star == pytest.approx(0.5)
    assert rep.a_star == pytest.approx(2.0)
    assert not rep.stable and rep.excited


def test_leading_mode_phase_normalized():
    op = np.array([[0.0, 1.0], [-1.0, 0.0]])
    rep = leading_mode(op, np.array([1.0, 0.0]), 2, 0.0)
    assert np.linalg.norm(rep.xi_star) == pytest.approx(1.0)
    lead = rep.xi_star[np.flatnonzero(np.abs(rep.xi_star) > 1e-12)[0]]
    assert lead.imag == pytest.approx(0.0) and lead.real > 0


def test_reduced_spectrum_validation():
    with pytest.raises(ValueError):
        reduced_spectrum(np.ones((2, 3)))
    with pytest.raises(ValueError):
        reduced_spectrum(np.array([[np.inf]]))


@pytest.fixture(scope="module")
def small():
    p = WaveParams(n=60, T=10.0)
    return p, wave_snapshots(p)


def test_snapshot_count(small):
    p, ens = small
    assert ens.count == 21 and ens.forces.shape == (60, 21)


def test_psd_reduced_spectrum_stable(small):
    p, ens = small
    for k in (4, 8, 12):
        rep = psd_stability(p, k, ens)
        assert rep.lambda_star.real <= 1e-12


def test_table2_cell_zero_snapshots_rejected():
    p = WaveParams(n=10, T=1.0)
    from psdrom.decomposition import SnapshotEnsemble

    ens = SnapshotEnsemble(np.zeros((20, 3)), [0.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        table2_cell(p, 0.1, 2, ens)


def test_unexcited_mode_flagged():
    rep = leading_mode(np.diag([1.0, -1.0]), np.array([0.0, 1.0]), 2, 0.0)
    assert rep.a_star == 0.0 and not rep.excited
