import numpy as np
import pytest
from hypothesis import given, strategies as st

from corpus import MODES, haar, random_experiment, symmetric_unitary
from ppse.apparatus import Eigenstructure, IntermediateModel, Mode
from ppse.ensemble import Experiment, SelectionEvent, density_for
from ppse.errors import DimensionMismatch, MissingThetaForProcess
from ppse.linalg import AntiunitaryOp, HilbertSpace, Operator, is_unitary
from ppse.timesym import (
    ROW_ONE,
    ROW_TWO,
    ProcessTag,
    appendix_a,
    appendix_a_experiment,
    appendix_b,
    appendix_b_experiment,
    appendix_b_theta,
    appendix_b_unitary,
    check_motion_reversal,
    process_amplitudes,
    process_weights,
    recover_initial,
    reset_variant,
    reverse_ppse,
    rotation_d,
    stages_reversible,
)

seeds = st.integers(0, 2**32 - 1)
modes = st.sampled_from(MODES)
unit = st.floats(0, 1)


def space(n):
    return HilbertSpace(tuple(f"e{i}" for i in range(n)))


# --- motion reversal ---


def test_motion_reversal_examples():
    k2 = AntiunitaryOp.conjugation(space(2))
    assert check_motion_reversal(np.eye(2), k2)
    c, s = np.cos(0.3), np.sin(0.3)
    assert not check_motion_reversal(np.array([[c, -s], [s, c]]), k2)
    assert check_motion_reversal(np.diag(np.exp([0.4j, -1.1j])), k2)
    assert check_motion_reversal(appendix_b_unitary(), appendix_b_theta())
    assert not check_motion_reversal(appendix_b_unitary(), AntiunitaryOp.conjugation(space(4)))
    with pytest.raises(DimensionMismatch):
        check_motion_reversal(np.eye(3), k2)


def test_time_reversal_operator_is_unitary_and_an_involution():
    th = appendix_b_theta()
    assert is_unitary(th.t, 1e-12)
    v = np.array([0.3, 0.1j, -0.5, 0.8 + 0.1j])
    # Theta^2 is a global phase
    w = th(th(v))
    assert abs(abs(np.vdot(v, w)) - np.vdot(v, v).real) < 1e-12


@given(seeds, st.integers(1, 5))
def test_motion_reversal_acts_on_vectors(seed, n):
    # vector route, independent of the matrix identity used by the check
    rng = np.random.default_rng(seed)
    u = symmetric_unitary(n, rng)
    th = AntiunitaryOp.conjugation(space(n))
    assert check_motion_reversal(u, th)
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    assert np.allclose(th.inverse()(u @ th(v)), u.conj().T @ v)


def test_motion_reversal_vector_route_for_fixture():
    th, u = appendix_b_theta(), appendix_b_unitary()
    for v in np.eye(4, dtype=complex):
        assert np.allclose(th.inverse()(u @ th(v)), u.conj().T @ v)


# --- the eight processes ---


@given(seeds, modes)
def test_process_two_is_conjugate_of_one(seed, mode):
    exp = random_experiment(np.random.default_rng(seed), mode)
    assert np.allclose(process_amplitudes(exp, "ii"), process_amplitudes(exp, "i").conj())
    assert np.allclose(process_weights(exp, "i"), density_for(exp).weights)


@given(seeds, modes)
def test_symmetric_dynamics_row_one_agrees(seed, mode):
    exp = random_experiment(np.random.default_rng(seed), mode, symmetric=True)
    assert stages_reversible(exp)
    forward = process_weights(exp, ProcessTag.I)
    for p in ROW_ONE[1:]:
        assert np.abs(process_weights(exp, p) - forward).max() < 1e-9
    rep = reverse_ppse(exp, ROW_ONE[1:])
    assert rep.passed(1e-9) and rep.motion_reversal


@given(seeds, modes)
def test_row_two_relations(seed, mode):
    exp = random_experiment(np.random.default_rng(seed), mode, symmetric=True)
    v, vi, vii, viii = (process_amplitudes(exp, p) for p in ROW_TWO)
    assert np.allclose(vii, v.conj()) and np.allclose(viii, vi.conj())


def test_processes_need_theta():
    exp = random_experiment(np.random.default_rng(1))
    with pytest.raises(MissingThetaForProcess):
        process_amplitudes(exp, "iii")
    with pytest.raises(MissingThetaForProcess):
        reverse_ppse(exp, ["ii", "iv"])
    assert reverse_ppse(exp, ["ii"]).passed(1e-9)


@given(seeds, modes)
def test_recovery_of_pre_selected_state(seed, mode):
    exp = random_experiment(np.random.default_rng(seed), mode)
    back, rec, prob = recover_initial(exp)
    a = np.kron(exp.pre.vector, np.eye(exp.p)[0])
    assert abs(abs(np.vdot(a, rec)) - 1) < 1e-9
    assert 0 < prob <= 1 + 1e-12
    assert abs(np.linalg.norm(back) - 1) < 1e-9


# --- reset convention ---


@given(seeds, modes)
def test_reset_matches_forward_without_free_evolution(seed, mode):
    # with no stage unitaries besides the (self-inverse) coupling, reading
    # |b>|ready> backwards gives amplitudes <a|c_kl><c_kl|b> summed as forward
    exp = random_experiment(np.random.default_rng(seed), mode).replace(u_ca=None, u_bc=None)
    if exp.model.mode is Mode.TWOSTEP:
        return
    assert np.allclose(reset_variant(exp), process_weights(exp, "i"))


def test_reset_differs_for_first_counter_example():
    rep = appendix_a(rotation_d(1 / np.sqrt(2)))
    assert rep.details["reset_deviation"] > 1e-3


# --- first counter-example ---


@given(unit)
def test_first_example_probabilities(x):
    # amplitudes -i/2 (k=0) and -i d_1j/2 (k=1) for post state (c00 + c1j)/sqrt(2)
    d = rotation_d(x)
    y = abs(d[0, 1])
    assert abs(appendix_a(d).probabilities[1] - y * y / (1 + y * y)) < 1e-9
    assert abs(appendix_a(d, post="c11").probabilities[1] - x * x / (1 + x * x)) < 1e-9


@given(seeds)
def test_first_example_joint_state_for_complex_d(seed):
    rng = np.random.default_rng(seed)
    d = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    rep = appendix_a(d)
    assert rep.details["joint_state_deviation"] < 1e-9
    assert rep.max_deviation < 1e-9 and rep.recovered_initial


def test_first_example_back_evolved_state():
    x = 0.6
    y = 0.8
    exp = appendix_a_experiment(rotation_d(x))
    back, _, _ = recover_initial(exp)
    sys, ptr = exp.model.system, exp.model.pointer

    def ket(s, g):
        return np.kron(sys.basis(s).amps, ptr.basis(g).amps)

    # derived by hand from U^dag = i (P+ - P-) + P0 applied to
    # (c00 + c12)(g0_1_1 + d12 g1_1_2)
    want = (1j * ket("c00", "g") + 1j * y * y * ket("c11", "g") - x * y * y * ket("c11", "g1_1_1")
            + x * x * y * ket("c12", "g1_1_2") + y * ket("c00", "g1_1_2") + ket("c12", "g0_1_1"))
    want /= np.linalg.norm(want)
    assert abs(abs(np.vdot(want, back)) - 1) < 1e-12


def test_first_example_unitary_is_real_symmetric():
    exp = appendix_a_experiment(rotation_d(0.5))
    u = exp.interaction
    assert np.allclose(u, u.T)
    assert stages_reversible(exp)


# --- second counter-example ---


def test_second_example_amplitudes_by_hand():
    # U a = (c00 + c12)/sqrt(2), the k=1 part c12 goes to c13, orthogonal to b
    assert np.allclose(process_amplitudes(appendix_b_experiment("original"), "i"), [0.5, 0])
    # interchanged: U a = (c00 + c13)/sqrt(2), c13 goes to c11, <b|c11> = 1/sqrt(2)
    assert np.allclose(process_amplitudes(appendix_b_experiment("interchanged"), "i"), [0.5, 0.5])
    assert abs(appendix_b("interchanged") - 0.5) < 1e-12
    assert abs(appendix_b("original")) < 1e-12
    assert abs(appendix_b("time-reversed")) < 1e-12


def test_second_example_row_one_symmetric():
    for v in ("original", "interchanged", "time-reversed"):
        exp = appendix_b_experiment(v)
        rep = reverse_ppse(exp, ROW_ONE[1:] + ROW_TWO)
        assert rep.motion_reversal
        assert rep.passed(1e-9)


def test_second_example_bad_variant():
    with pytest.raises(ValueError):
        appendix_b("sideways")
