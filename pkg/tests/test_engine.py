import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionpair_grover import engine
from ionpair_grover.engine import (
    Trajectory,
    apply_diffusion,
    apply_single_qubit,
    invert_marked,
    optimal_iterations,
    prepare_initial,
    recurrence_period,
    run_search,
    search_report,
)
from ionpair_grover.gates import TargetIndex, all_ones, build_diffusion, build_p, build_w, w_gate

from conftest import random_state, random_unitary

TOL = 1e-12
PSI1 = np.array([-1, 1j, 1j, 1]) / 2


def dense_single(gate, qubit, q):
    ops = [np.eye(2)] * q
    ops[qubit] = gate
    out = np.ones((1, 1))
    for op in ops:
        out = np.kron(out, op)
    return out


def test_prepare_initial():
    np.testing.assert_allclose(prepare_initial(2), PSI1, atol=TOL)
    psi3 = prepare_initial(3)
    assert abs(psi3[7] - (1 / np.sqrt(2)) ** 3) < TOL
    assert abs(abs(psi3[7]) ** 2 - 1 / 8) < TOL
    ones = np.zeros(32)
    ones[-1] = 1
    np.testing.assert_allclose(prepare_initial(5), build_w(5) @ ones, atol=TOL)
    with pytest.raises(ValueError):
        prepare_initial(1)


def test_apply_single_qubit_examples(rng):
    e11 = np.array([0, 0, 0, 1], dtype=complex)
    np.testing.assert_allclose(apply_single_qubit(e11, w_gate(), 1), np.array([0, 0, 1j, 1]) / np.sqrt(2), atol=TOL)
    psi = e11
    for k in range(2):
        psi = apply_single_qubit(psi, w_gate(), k)
    np.testing.assert_allclose(psi, prepare_initial(2), atol=TOL)
    with pytest.raises(ValueError):
        apply_single_qubit(e11, w_gate(), 2)


def test_apply_single_qubit_matches_dense(rng):
    psi = random_state(rng, 6)
    gate = random_unitary(rng, 2)
    np.testing.assert_allclose(apply_single_qubit(psi, gate, 3), dense_single(gate, 3, 6) @ psi, atol=TOL)
    assert abs(np.linalg.norm(apply_single_qubit(psi, gate, 3)) - 1) < 1e-12


def test_invert_marked():
    np.testing.assert_allclose(invert_marked(PSI1, all_ones(2)), np.array([-1, 1j, 1j, -1]) / 2, atol=TOL)
    psi = np.array([0.6, 0.8, 0, 0], dtype=complex)
    np.testing.assert_array_equal(invert_marked(psi, TargetIndex(2, 2)), psi)
    with pytest.raises(ValueError):
        invert_marked(PSI1, all_ones(3))


def test_invert_marked_matches_dense(rng):
    psi = random_state(rng, 7)
    t = TargetIndex(7, 77)
    assert np.max(np.abs(invert_marked(psi, t) - build_p(t) @ psi)) < TOL


def test_apply_diffusion_examples():
    np.testing.assert_allclose(apply_diffusion(np.array([-1, 1j, 1j, -1]) / 2), [0, 0, 0, 1], atol=TOL)
    e0 = np.zeros(8, dtype=complex)
    e0[0] = 1
    # first column of the 3-qubit diffusion pattern, normalised to 1/4
    np.testing.assert_allclose(apply_diffusion(e0), np.array([1, -1j, -1j, -1, -1j, -1, -1, -3j]) / 4, atol=TOL)


def test_apply_diffusion_matches_dense(rng):
    psi = random_state(rng, 8)
    assert np.max(np.abs(apply_diffusion(psi) - build_diffusion(8) @ psi)) < 1e-10


def test_run_search_two_qubits():
    traj = run_search(2, all_ones(2), 18)
    pm = traj.marked_probabilities
    assert abs(pm[1] - 1) < TOL
    assert abs(pm[2] - 0.25) < TOL
    np.testing.assert_allclose(traj.amplitudes[3], PSI1, atol=TOL)
    assert abs(pm[4] - 1) < TOL
    for n in range(1, 19, 3):
        assert abs(pm[n] - 1) < TOL
    for n in range(0, 19, 3):
        np.testing.assert_allclose(traj.amplitudes[n], PSI1, atol=TOL)


@pytest.mark.parametrize("index", [1, 2, 3, 4])
def test_any_two_qubit_target_found_in_one_step(index):
    t = TargetIndex.from_paper_index(2, index)
    assert abs(run_search(2, t, 1).marked_probabilities[1] - 1) < TOL


def test_three_qubit_pair_tracks_i_times_all_ones():
    amps = run_search(3, all_ones(3), 18).amplitudes
    # |000> carries the coefficient of the vector i|111>, i.e. amp(000) = -i amp(111)
    assert np.max(np.abs(amps[:, 0] + 1j * amps[:, 7])) < TOL
    assert np.max(np.abs(np.abs(amps[:, 0]) - np.abs(amps[:, 7]))) < TOL


def test_norm_preserved_over_100_iterations(rng):
    for q in (2, 5, 9):
        t = TargetIndex(q, int(rng.integers(2**q)))
        norms = np.linalg.norm(run_search(q, t, 100).amplitudes, axis=1)
        assert np.max(np.abs(norms - 1)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.floats(0, 2 * np.pi), st.data())
def test_global_phase_leaves_probabilities_unchanged(q, phi, data):
    t = TargetIndex(q, data.draw(st.integers(0, 2**q - 1)))
    base = run_search(q, t, 12)
    phased = run_search(q, t, 12, prepared=np.exp(1j * phi) * prepare_initial(q))
    np.testing.assert_allclose(phased.probabilities, base.probabilities, atol=1e-13)


def test_recurrence_period():
    assert recurrence_period(run_search(2, all_ones(2), 18), 1e-9) == 3
    assert recurrence_period(run_search(2, all_ones(2), 18), 1e-9, mode="state") == 3
    assert recurrence_period(run_search(3, all_ones(3), 18), 1e-9, max_period=9) is None
    psi = prepare_initial(2)
    constant = Trajectory(2, all_ones(2), np.array([psi, psi, psi]))
    assert recurrence_period(constant) == 1
    with pytest.raises(ValueError):
        recurrence_period(Trajectory(2, all_ones(2), psi[None, :]))


@pytest.mark.parametrize("n_items,n_sol,expected", [(4, 1, 1), (16, 1, 3), (8, 2, 1), (1024, 1, 25)])
def test_optimal_iterations(n_items, n_sol, expected):
    assert optimal_iterations(n_items, n_sol) == expected


@pytest.mark.parametrize("args", [(6, 1), (8, 0), (8, 9)])
def test_optimal_iterations_rejects(args):
    with pytest.raises(ValueError):
        optimal_iterations(*args)


def test_search_report():
    two = search_report(run_search(2, all_ones(2), 18))
    assert (two.peak_iteration, two.period) == (1, 3)
    assert abs(two.peak_probability - 1) < TOL
    assert [t.bitstring for t in two.co_maximal] == ["11"]

    three = search_report(run_search(3, all_ones(3), 18))
    assert [t.bitstring for t in three.co_maximal] == ["000", "111"]
    assert three.period is None

    traj4 = run_search(4, all_ones(4), 18)
    assert traj4.marked_probabilities[1:5].max() > 0.5
    four = search_report(traj4)
    assert [t.bitstring for t in four.co_maximal] == ["1111"]
    # dense-oracle regression value
    assert four.peak_iteration == 13
    assert four.peak_probability == pytest.approx(0.911982241221257, abs=1e-12)


def test_start_state_extension_is_flagged():
    traj = run_search(3, all_ones(3), 2, start=TargetIndex(3, 0))
    assert traj.is_extension
    assert not run_search(3, all_ones(3), 2).is_extension


def test_bad_arguments():
    with pytest.raises(ValueError):
        run_search(2, all_ones(2), -1)
    with pytest.raises(ValueError):
        run_search(3, all_ones(2), 1)
    with pytest.raises(ValueError):
        run_search(engine.MAX_ENGINE_QUBITS + 1, all_ones(engine.MAX_ENGINE_QUBITS + 1), 1)
