"""Orthodox time reversal for pre- and post-selected ensembles.

A PPSE selected by ``|A>`` at ``t_a`` and ``|B>`` at ``t_b`` can be computed
eight ways, tagged (i) to (viii) here:

====  =======================================  ===========================
tag   path                                     amplitude through outcome o
====  =======================================  ===========================
i     A forward to B                           <B|V G W|A>
ii    B backward to A                          <A|W^ G V^|B>
iii   ~B forward to ~A, same unitaries         <~A|W_r ~G V_r|~B>
iv    ~B backward to ~A                        <~B|(W_r ~G V_r)^|~A>
v     ~A forward to ~B                         <~B|V ~G W|~A>
vi    B forward to A                           <A|V G W|B>
vii   ~A backward to ~B                        <~A|W^ ~G V^|~B>
viii  B backward to A                          <B|W^ G V^|A>
====  =======================================  ===========================

``W`` and ``V`` are the products of the stage unitaries before and after the
intermediate measurement, ``X^`` is the adjoint, ``~`` means the action of the
antiunitary ``Theta`` and ``W_r``, ``V_r`` apply the same stage unitaries in
reversed order.  Bras on the post-selection side carry the flat pointer (sum of
all outcome labels), kets on the pre-selection side the ready pointer.

If every stage unitary satisfies ``Theta^-1 U Theta = U^`` then (i) to (iv)
agree outcome by outcome.  In the second row (vii) and (viii) are always the
complex conjugates of (v) and (vi), while (v) and (vi) need not agree with
each other or with the first row.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from .apparatus import Eigenstructure, IntermediateModel, Mode, pointer_label
from .ensemble import (
    Experiment,
    SelectionEvent,
    density_for,
    flat_pointer,
    outcome_prob,
    ready_pointer,
    run_pipeline,
)
from .errors import (
    DimensionMismatch,
    EmptyEnsemble,
    ImpossibleSelection,
    MissingThetaForProcess,
)
from .linalg import (
    DEFAULT_TOL,
    AntiunitaryOp,
    HilbertSpace,
    Operator,
    SpectralData,
    embed,
    same_ray,
    unitary_from_spectrum,
)

EMPTY_TOL = 1e-20


class ProcessTag(enum.Enum):
    I = "i"
    II = "ii"
    III = "iii"
    IV = "iv"
    V = "v"
    VI = "vi"
    VII = "vii"
    VIII = "viii"

    @property
    def row(self):
        return 1 if self in ROW_ONE else 2

    @property
    def needs_theta(self):
        return self in (ProcessTag.III, ProcessTag.IV, ProcessTag.V, ProcessTag.VII)


ROW_ONE = (ProcessTag.I, ProcessTag.II, ProcessTag.III, ProcessTag.IV)
ROW_TWO = (ProcessTag.V, ProcessTag.VI, ProcessTag.VII, ProcessTag.VIII)


def check_motion_reversal(u, theta, tol=DEFAULT_TOL):
    """True iff ``Theta^-1 U Theta = U^dag``, i.e. ``T^dag U T = U^T``."""
    m = np.asarray(u.matrix if isinstance(u, Operator) else u, dtype=complex)
    t = theta.t
    if m.shape != t.shape:
        raise DimensionMismatch(f"operator of shape {m.shape} with antiunitary of shape {t.shape}")
    return bool(np.abs(t.conj().T @ m @ t - m.T).max() <= tol)


def joint_theta(exp):
    """Extend the system ``Theta`` to system (x) pointer with plain conjugation on the pointer."""
    if exp.theta is None:
        raise MissingThetaForProcess("this process needs a time-reversal operator", stage="timesym")
    return exp.theta.kron(exp.model.pointer)


def _apply(stages, v, adjoint=False, reverse=False):
    seq = list(reversed(stages)) if reverse else list(stages)
    for s in seq:
        v = (s.conj().T if adjoint else s) @ v
    return v


def process_amplitudes(exp, process):
    """Transition amplitude through every outcome projector for one process."""
    process = ProcessTag(process)
    n, p = exp.n, exp.p
    before, after = exp.stages_before(), exp.stages_after()
    a, b = exp.pre.vector, exp.post.vector
    ready, flat = ready_pointer(p), flat_pointer(p)
    gammas = [embed(g, 1, [n, p]) for g in exp.gamma().elements]
    if process.needs_theta:
        th = joint_theta(exp)
        gammas = [th.conjugate_operator(g) for g in gammas]

    out = []
    for g in gammas:
        if process is ProcessTag.I:
            ket = np.kron(a, ready)
            ket = _apply(after, g @ _apply(before, ket))
            amp = np.vdot(np.kron(b, flat), ket)
        elif process is ProcessTag.II:
            ket = np.kron(b, flat)
            ket = _apply(before, g @ _apply(after, ket, adjoint=True, reverse=True),
                         adjoint=True, reverse=True)
            amp = np.vdot(np.kron(a, ready), ket)
        elif process is ProcessTag.III:
            ket = th(np.kron(b, flat))
            ket = _apply(before, g @ _apply(after, ket, reverse=True), reverse=True)
            amp = np.vdot(th(np.kron(a, ready)), ket)
        elif process is ProcessTag.IV:
            ket = th(np.kron(a, ready))
            ket = _apply(after, g @ _apply(before, ket, adjoint=True), adjoint=True)
            amp = np.vdot(th(np.kron(b, flat)), ket)
        elif process is ProcessTag.V:
            ket = th(np.kron(a, ready))
            ket = _apply(after, g @ _apply(before, ket))
            amp = np.vdot(th(np.kron(b, flat)), ket)
        elif process is ProcessTag.VI:
            ket = np.kron(b, ready)
            ket = _apply(after, g @ _apply(before, ket))
            amp = np.vdot(np.kron(a, flat), ket)
        elif process is ProcessTag.VII:
            ket = th(np.kron(b, flat))
            ket = _apply(before, g @ _apply(after, ket, adjoint=True, reverse=True),
                         adjoint=True, reverse=True)
            amp = np.vdot(th(np.kron(a, ready)), ket)
        else:
            ket = np.kron(a, flat)
            ket = _apply(before, g @ _apply(after, ket, adjoint=True, reverse=True),
                         adjoint=True, reverse=True)
            amp = np.vdot(np.kron(b, ready), ket)
        out.append(amp)
    return np.array(out)


def process_weights(exp, process):
    amps = process_amplitudes(exp, process)
    mags = np.abs(amps) ** 2
    total = mags.sum()
    if total < EMPTY_TOL:
        raise EmptyEnsemble(f"process ({ProcessTag(process).value}) has no consistent outcome",
                            stage="timesym")
    return mags / total


@dataclass(frozen=True, eq=False)
class TimeSymReport:
    forward_weights: np.ndarray
    reverse_weights: dict
    max_deviation: float
    recovered_initial: object = None
    motion_reversal: object = None
    probabilities: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def deviation(self, process):
        w = self.reverse_weights[ProcessTag(process)]
        return float(np.abs(w - self.forward_weights).max())

    def passed(self, tol=1e-9):
        return self.max_deviation <= tol and self.recovered_initial is not False


def stages_reversible(exp, tol=None):
    """Whether every stage unitary passes the motion-reversal check under ``Theta``."""
    th = joint_theta(exp)
    tol = exp.tol if tol is None else tol
    return all(check_motion_reversal(s, th, tol) for s in exp.stages_before() + exp.stages_after())


def recover_initial(exp):
    """Propagate the physical post-selected state back to ``t_a``.

    Returns ``(back, recovered, prob)``: the system (x) pointer state at
    ``t_a`` before re-projection, its normalized projection onto
    ``|a_i>|ready>``, and the squared overlap.
    """
    _, _, final = run_pipeline(exp)
    t = final.psi[:, exp.pre.index + 1, :, exp.post.index + 1]
    b_tb = t.reshape(-1) / np.linalg.norm(t)
    back = _apply(exp.stages_before(),
                  _apply(exp.stages_after(), b_tb, adjoint=True, reverse=True),
                  adjoint=True, reverse=True)
    a = np.kron(exp.pre.vector, ready_pointer(exp.p))
    overlap = np.vdot(a, back)
    prob = float(abs(overlap) ** 2)
    if prob < exp.tol:
        raise ImpossibleSelection("reverse projection onto the pre-selected state vanishes",
                                  stage="timesym")
    recovered = overlap * a
    return back, recovered / np.linalg.norm(recovered), prob


def reverse_ppse(exp, process=(ProcessTag.II, ProcessTag.III)):
    """Weights from the requested processes, compared with forward process (i).

    ``max_deviation`` covers only requested processes of the first row, which
    must agree with (i) under motion-reversal symmetry.  Second-row deviations
    are recorded in ``details``.
    """
    if isinstance(process, (str, ProcessTag)):
        process = [process]
    tags = [ProcessTag(p) for p in process]
    forward = process_weights(exp, ProcessTag.I)
    weights, row_one, row_two = {}, [0.0], {}
    motion = None
    if any(t.needs_theta for t in tags):
        motion = stages_reversible(exp)
    for t in tags:
        w = process_weights(exp, t)
        weights[t] = w
        dev = float(np.abs(w - forward).max())
        if t.row == 1:
            row_one.append(dev)
        else:
            row_two[t.value] = dev
    recovered = None
    details = {"row_two_deviation": row_two}
    if ProcessTag.II in tags:
        back, rec, prob = recover_initial(exp)
        a = np.kron(exp.pre.vector, ready_pointer(exp.p))
        recovered = bool(same_ray(rec, a, exp.tol))
        details["back_evolved"] = back
        details["reverse_projection_prob"] = prob
    rho = density_for(exp)
    return TimeSymReport(forward, weights, max(row_one), recovered, motion,
                         rho.by_eigenvalue(), details)


def reset_variant(exp):
    """Reverse-time weights with the pointer reset to ready at ``t_b``.

    Starts from ``|b_j>|ready>``, runs every stage backwards and reads the
    pointer at ``t_a`` against ``|a_i>``.  There is no reason for these to
    match the forward weights.
    """
    n, p = exp.n, exp.p
    ket = np.kron(exp.post.vector, ready_pointer(p))
    ket = _apply(exp.stages_before(),
                 _apply(exp.stages_after(), ket, adjoint=True, reverse=True),
                 adjoint=True, reverse=True)
    psi = ket.reshape(n, p)
    amps = exp.pre.vector.conj() @ psi[:, 1:]
    mags = np.abs(amps) ** 2
    total = mags.sum()
    if total < EMPTY_TOL:
        raise EmptyEnsemble("reset variant leaves no outcome record", stage="reset")
    return mags / total


# --- the first counter-example ---------------------------------------------------

A_LABELS = ("c00", "c11", "c12")


def rotation_d(d11):
    """2x2 real rotation with top-left entry ``d11``; both rows have unit norm."""
    x = float(d11)
    y = np.sqrt(max(0.0, 1.0 - x * x))
    return np.array([[x, y], [-y, x]], dtype=complex)


def appendix_a_model(d, strict=False):
    space = HilbertSpace(A_LABELS)
    eigen = Eigenstructure.standard(space, (1, 2))
    return IntermediateModel(eigen, Mode.TWOSTEP, (np.eye(1), np.asarray(d)), strict_unitary=strict)


def appendix_a_vectors(model):
    """Energy eigenvectors of the interaction, grouped as ``{+1: [...], -1: [...], 0: [...]}``."""
    joint_sys = model.system
    ptr = model.pointer
    d = model.dcoeffs[1]

    def ket(s, tag=None):
        label = "g" if tag is None else pointer_label(tag)
        return np.kron(joint_sys.basis(s).amps, ptr.basis(label).amps)

    s2 = np.sqrt(2.0)
    chi0 = ket("c00", (0, 1, 1))
    chi11 = d[0, 0] * ket("c11", (1, 1, 1)) + d[0, 1] * ket("c12", (1, 1, 2))
    chi12 = d[1, 0] * ket("c11", (1, 2, 1)) + d[1, 1] * ket("c12", (1, 2, 2))
    plus = [(ket("c00") + chi0) / s2, (ket("c11") + chi11) / s2, (ket("c12") + chi12) / s2]
    minus = [(ket("c00") - chi0) / s2, (ket("c11") - chi11) / s2, (ket("c12") - chi12) / s2]
    tau1 = -d[0, 1].conjugate() * ket("c11", (1, 1, 1)) + d[0, 0].conjugate() * ket("c12", (1, 1, 2))
    tau2 = d[1, 1].conjugate() * ket("c11", (1, 2, 1)) - d[1, 0].conjugate() * ket("c12", (1, 2, 2))
    rest = null_space(np.column_stack(plus + minus + [tau1, tau2]).conj().T)
    return {1.0: plus, -1.0: minus, 0.0: [tau1, tau2] + list(rest.T)}


def appendix_a_spectrum(model, g=1.0):
    vecs = appendix_a_vectors(model)
    levels = ((g, vecs[1.0]), (-g, vecs[-1.0]), (0.0, vecs[0.0]))
    return SpectralData(model.joint, levels)


def appendix_a_experiment(d=None, strict=False, post="c12", g=1.0):
    """The first counter-example as an :class:`Experiment`.

    ``post`` names the second component of the post-selected state
    ``(|c00> + |post>)/sqrt(2)``.
    """
    d = rotation_d(1 / np.sqrt(2)) if d is None else np.asarray(d, dtype=complex)
    model = appendix_a_model(d, strict)
    spec = appendix_a_spectrum(model, g)
    u = unitary_from_spectrum(spec, np.pi / (2 * g)).matrix
    space = model.system
    s2 = np.sqrt(2.0)
    a = (space.basis("c00").amps + space.basis("c11").amps) / s2
    b = (space.basis("c00").amps + space.basis(post).amps) / s2
    theta = AntiunitaryOp.conjugation(space)
    return Experiment(model, SelectionEvent.of(a, "a"), SelectionEvent.of(b, "b"),
                      interaction=u, theta=theta)


def appendix_a_expected_tc(model):
    """The joint state right after the interaction, written out by hand."""
    d = model.dcoeffs[1]
    sys, ptr = model.system, model.pointer

    def ket(s, tag):
        return np.kron(sys.basis(s).amps, ptr.basis(pointer_label(tag)).amps)

    return -1j / np.sqrt(2) * (ket("c00", (0, 1, 1)) + d[0, 0] * ket("c11", (1, 1, 1))
                               + d[0, 1] * ket("c12", (1, 1, 2)))


def appendix_a(d=None, strict=False, post="c12", g=1.0):
    """Reproduce the first counter-example end to end.

    ``probabilities[1]`` is Prob[k=1]; ``details`` holds the deviation of the
    evolved state from the hand-written one, the reset-variant weights and
    their deviation from the forward weights.
    """
    exp = appendix_a_experiment(d, strict, post, g)
    a_tc = exp.interaction @ np.kron(exp.pre.vector, ready_pointer(exp.p))
    expected = appendix_a_expected_tc(exp.model)
    phase = np.vdot(expected, a_tc)
    joint_dev = float(np.abs(a_tc - phase / abs(phase) * expected).max()) if abs(phase) > 0 else 1.0

    procs = [ProcessTag.II]
    if stages_reversible(exp):
        procs.append(ProcessTag.III)
    report = reverse_ppse(exp, procs)
    reset = reset_variant(exp)
    details = dict(report.details)
    details.update(
        joint_state_deviation=joint_dev,
        reset_weights=reset,
        reset_deviation=float(np.abs(reset - report.forward_weights).max()),
        experiment=exp,
    )
    return TimeSymReport(report.forward_weights, report.reverse_weights, report.max_deviation,
                         report.recovered_initial, report.motion_reversal,
                         report.probabilities, details)


# --- the second counter-example --------------------------------------------------

B_LABELS = ("c00", "c11", "c12", "c13")
B_VARIANTS = ("original", "interchanged", "time-reversed")


def appendix_b_unitary():
    return np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0]], dtype=complex)


def appendix_b_theta():
    r = -(1 + 1j * np.sqrt(3)) / 2
    t = np.array([[np.sqrt(3), 0, 0, 0], [0, 1, r, 1], [0, r, 1, 1], [0, 1, 1, r]]) / np.sqrt(3)
    return AntiunitaryOp(Operator(HilbertSpace(B_LABELS), t))


def appendix_b_states(variant):
    e = np.eye(4, dtype=complex)
    s2 = np.sqrt(2.0)
    a, b = (e[0] + e[1]) / s2, (e[0] + e[2]) / s2
    if variant == "original":
        return a, b
    if variant == "interchanged":
        return b, a
    if variant == "time-reversed":
        th = appendix_b_theta()
        return th(b), th(a)
    raise ValueError(f"unknown variant {variant!r}; expected one of {B_VARIANTS}")


def appendix_b_experiment(variant):
    space = HilbertSpace(B_LABELS)
    model = IntermediateModel(Eigenstructure.standard(space, (1, 3)), Mode.COARSE)
    a, b = appendix_b_states(variant)
    u = appendix_b_unitary()
    return Experiment(model, SelectionEvent.of(a, "a"), SelectionEvent.of(b, "b"),
                      u_ca=u, u_bc=u, theta=appendix_b_theta())


def appendix_b(variant):
    """Prob[k=1] for one variant, through the full density-operator route."""
    return outcome_prob(density_for(appendix_b_experiment(variant)), 1)
