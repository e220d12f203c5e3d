import numpy as np
import pytest

from beamforming.channel import ChannelSet, sample_channel_set
from beamforming.slnr import slnr_beamformers, slnr_direction
from beamforming.utils import RngStream


def phase_aligned(a: np.ndarray, b: np.ndarray) -> float:
    """|⟨a, b⟩| / (‖a‖‖b‖): 1 quando as direções coincidem a menos de fase."""
    return abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))


def test_single_user_is_maximum_ratio_transmission():
    cs = sample_channel_set(4, 1, 0.1, 1.0, 1.0, RngStream(1))
    bf = slnr_beamformers(cs, 5.0)
    mrt = cs.h_est[0].conj() / np.linalg.norm(cs.h_est[0])
    assert np.allclose(bf.w[0], mrt * np.sqrt(5.0))


def test_direction_invariant_to_channel_scaling():
    cs = sample_channel_set(4, 3, 0.1, 1.0, 1.0, RngStream(2))
    h = np.array(cs.h_est)
    h[1] *= 3.7
    scaled = ChannelSet(h, cs.g_est, cs.eps, cs.sigma2, cs.varsigma2)
    assert phase_aligned(slnr_direction(cs, 1), slnr_direction(scaled, 1)) == pytest.approx(1.0, abs=1e-12)


def test_orthogonal_users_have_no_leakage():
    h = np.array([[1.0, 1j, 0.0], [1j, 1.0, 0.0]]) / np.sqrt(2)
    assert abs(np.vdot(h[0], h[1])) < 1e-15
    cs = ChannelSet(h, np.ones((2, 3)), 0.0, 1.0, 1.0)
    bf = slnr_beamformers(cs, 2.0)
    for i in range(2):
        assert phase_aligned(bf.w[i], h[i].conj()) == pytest.approx(1.0, abs=1e-12)


def test_equal_power_split():
    cs = sample_channel_set(8, 4, 0.1, 1.0, 1.0, RngStream(3))
    bf = slnr_beamformers(cs, 10.0)
    assert abs(bf.total_power - 10.0) < 1e-9
    assert np.allclose(np.sum(np.abs(bf.w) ** 2, axis=1), 2.5)


def test_rank_one_shortcut_matches_general_eigenvector():
    stream = RngStream(4)
    for trial in range(20):
        cs = sample_channel_set(6, 3, 0.1, 1.0, 1.0, stream.child(trial))
        for i in range(3):
            others = [k for k in range(3) if k != i]
            leak = cs.h_est[others]
            gram = cs.sigma2[i] * np.eye(6) + leak.conj().T @ leak
            target = np.linalg.solve(gram, np.outer(cs.h_est[i].conj(), cs.h_est[i]))
            vals, vecs = np.linalg.eig(target)
            dominant = vecs[:, np.argmax(np.abs(vals))]
            assert phase_aligned(slnr_direction(cs, i), dominant) == pytest.approx(1.0, abs=1e-9)
