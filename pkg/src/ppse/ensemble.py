"""Pre- and post-selected ensembles.

Three independent routes to the intermediate outcome probabilities live here:

* the density-operator route: two-state vectors at the intermediate time,
  weights ``D_i`` from the transition amplitudes through each outcome
  projector, probabilities as ``Tr(rho Gamma_j)``;
* closed forms per apparatus mode, written directly in terms of system
  amplitudes ``<b|U|c><c|U|a>`` with no joint states;
* a brute-force oracle that pushes the full four-factor joint state
  (system, pre-selection apparatus, IMA pointer, post-selection apparatus)
  through every selection and interaction step and reads outcome
  amplitudes off the final tensor.

Joint pipeline tensors always have axes ``(system, pre, pointer, post)``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .apparatus import (
    Eigenstructure,
    GammaSet,
    IntermediateModel,
    Mode,
    gamma_set,
    interaction_operator,
)
from .errors import (
    DimensionMismatch,
    EmptyEnsemble,
    ImpossiblePostSelection,
    ImpossibleSelection,
    ModeMismatch,
    NonOrthonormalBasis,
    NotUnitary,
)
from .linalg import (
    DEFAULT_TOL,
    AntiunitaryOp,
    HilbertSpace,
    Operator,
    StateVector,
    apply_on_axes,
    embed,
    is_hermitian,
    is_unitary,
    orthonormal_columns,
)

EMPTY_TOL = 1e-20

SYSTEM, PRE, POINTER, POST = range(4)


def _vec(x):
    return np.asarray(x.amps if isinstance(x, StateVector) else x, dtype=complex).reshape(-1)


def _op(x):
    return None if x is None else np.asarray(x.matrix if isinstance(x, Operator) else x, dtype=complex)


@dataclass(frozen=True, eq=False)
class SelectionEvent:
    """Filtering on one eigenvector of a non-degenerate observable.

    ``basis`` holds the eigenbasis as columns; ``index`` picks the retained
    outcome.
    """

    basis: np.ndarray
    index: int
    label: str = "a"
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        b = np.array(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise DimensionMismatch(f"selection basis must be square, got shape {b.shape}")
        if not 0 <= self.index < b.shape[1]:
            raise IndexError(f"selection index {self.index} out of range for {b.shape[1]} outcomes")
        dev = orthonormal_columns(b)
        if dev > self.tol:
            raise NonOrthonormalBasis(f"selection basis deviates from orthonormality by {dev:.3g}")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def vector(self):
        return self.basis[:, self.index]

    @property
    def dim(self):
        return self.basis.shape[0]

    @classmethod
    def of(cls, vector, label="a", tol=DEFAULT_TOL):
        """Selection on ``vector``, completed to some orthonormal basis."""
        from .linalg import complete_basis

        v = _vec(vector)
        return cls(complete_basis([v / np.linalg.norm(v)], v.shape[0], tol), 0, label, tol)


def apparatus_coupling(ev):
    """Unitary on ``system (x) apparatus`` recording outcome ``j`` as ``|label_j>``.

    The apparatus has ``n + 1`` levels: ready, then one per outcome.  Each
    ``|e_j>|ready>`` is swapped with ``|e_j>|label_j>``.
    """
    n = ev.dim
    out = np.zeros((n * (n + 1), n * (n + 1)), dtype=complex)
    for j in range(n):
        e = ev.basis[:, j]
        swap = np.eye(n + 1)
        swap[[0, j + 1]] = swap[[j + 1, 0]]
        out += np.kron(np.outer(e, e.conj()), swap)
    return out


@dataclass(frozen=True, eq=False)
class Experiment:
    """Everything needed to define one pre- and post-selected ensemble.

    Stage operators act on the system only unless ``interaction`` is given,
    in which case that joint ``system (x) pointer`` unitary replaces the
    ideal measurement coupling derived from ``model``.
    """

    model: IntermediateModel
    pre: SelectionEvent
    post: SelectionEvent
    initial: Optional[np.ndarray] = None
    u_ca: Optional[np.ndarray] = None
    u_bc: Optional[np.ndarray] = None
    interaction: Optional[np.ndarray] = None
    theta: Optional[AntiunitaryOp] = None
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        n = self.model.system.dim
        for name in ("u_ca", "u_bc"):
            u = _op(getattr(self, name))
            if u is not None:
                if u.shape != (n, n):
                    raise DimensionMismatch(f"{name} has shape {u.shape}, expected {(n, n)}")
                if not is_unitary(u, self.tol):
                    raise NotUnitary(f"{name} is not unitary")
            object.__setattr__(self, name, u)
        w = _op(self.interaction)
        if w is not None:
            d = n * self.model.pointer.dim
            if w.shape != (d, d):
                raise DimensionMismatch(f"interaction has shape {w.shape}, expected {(d, d)}")
            if not is_unitary(w, self.tol):
                raise NotUnitary("joint interaction is not unitary")
        object.__setattr__(self, "interaction", w)
        if self.pre.dim != n or self.post.dim != n:
            raise DimensionMismatch("selection bases do not match the system dimension")
        if self.initial is not None:
            psi = _vec(self.initial)
            if psi.shape[0] != n:
                raise DimensionMismatch(f"initial state of length {psi.shape[0]}, expected {n}")
            object.__setattr__(self, "initial", psi / np.linalg.norm(psi))
        if self.theta is not None and self.theta.t.shape != (n, n):
            raise DimensionMismatch("theta must act on the system space")

    @property
    def n(self):
        return self.model.system.dim

    @property
    def p(self):
        return self.model.pointer.dim

    @property
    def psi(self):
        return self.pre.vector if self.initial is None else self.initial

    def coupling(self):
        if self.interaction is not None:
            return self.interaction
        return interaction_operator(self.model)

    def stages_before(self):
        """Joint operators from ``t_a`` to ``t_c``, earliest first."""
        stages = []
        if self.u_ca is not None:
            stages.append(np.kron(self.u_ca, np.eye(self.p)))
        stages.append(self.coupling())
        return stages

    def stages_after(self):
        """Joint operators from ``t_c`` to ``t_b``, earliest first."""
        if self.u_bc is None:
            return []
        return [np.kron(self.u_bc, np.eye(self.p))]

    def gamma(self):
        return gamma_set(self.model)

    def replace(self, **changes):
        import dataclasses

        return dataclasses.replace(self, **changes)


def ready_pointer(p):
    g = np.zeros(p, dtype=complex)
    g[0] = 1.0
    return g


def flat_pointer(p):
    """Unnormalized sum of every outcome label; picks out outcome amplitudes."""
    g = np.ones(p, dtype=complex)
    g[0] = 0.0
    return g


# --- selection pipeline -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PipelineState:
    """Unnormalized joint tensor after some stage.

    ``psi.ravel()`` has squared norm equal to the cumulative probability that
    every selection so far succeeded.
    """

    stage: str
    psi: np.ndarray
    pre_success: float = 1.0
    post_success: Optional[float] = None

    @property
    def success(self):
        return float(np.sum(np.abs(self.psi) ** 2))

    def normalized(self):
        return self.psi / np.sqrt(self.success)


def preselect(initial, ev, pointer_dim=1, tol=DEFAULT_TOL):
    """Couple the pre-selection apparatus and keep outcome ``ev.index``.

    Returns the state at ``t_a``: ``|a_i>|alpha_i>|ready>|beta>`` scaled by
    the amplitude ``<a_i|psi>``.
    """
    psi = _vec(initial)
    n = ev.dim
    if psi.shape[0] != n:
        raise DimensionMismatch(f"initial state of length {psi.shape[0]}, expected {n}")
    psi = psi / np.linalg.norm(psi)
    t = np.einsum("s,a,g,b->sagb", psi, ready_pointer(n + 1),
                  ready_pointer(pointer_dim), ready_pointer(n + 1))
    t = apply_on_axes(t, apparatus_coupling(ev), (SYSTEM, PRE))
    keep = np.einsum("s,a->sa", ev.vector, np.eye(n + 1)[ev.index + 1])
    proj = np.outer(keep.ravel(), keep.ravel().conj())
    t = apply_on_axes(t, proj, (SYSTEM, PRE))
    prob = float(np.sum(np.abs(t) ** 2))
    if prob < tol:
        raise ImpossibleSelection(
            f"pre-selection of outcome {ev.index} has probability {prob:.3g}", stage="preselect")
    return PipelineState("t_a", t, pre_success=min(prob, 1.0))


def evolve(state, stages):
    """Apply joint ``system (x) pointer`` stage operators to a pipeline state."""
    t = state.psi
    for op in stages:
        t = apply_on_axes(t, op, (SYSTEM, POINTER))
    return PipelineState("t_c", t, state.pre_success, state.post_success)


def postselect(state, u_bc, ev, tol=DEFAULT_TOL, strict=True):
    """Evolve to ``t_b``, couple the post-selection apparatus, keep ``ev.index``.

    ``post_success`` is the conditional probability of the retained outcome.
    With ``strict=False`` a vanishing outcome is recorded instead of raised.
    """
    t = state.psi
    before = float(np.sum(np.abs(t) ** 2))
    u = _op(u_bc)
    if u is not None:
        t = apply_on_axes(t, u, (SYSTEM,))
    t = apply_on_axes(t, apparatus_coupling(ev), (SYSTEM, POST))
    n = ev.dim
    keep = np.einsum("s,b->sb", ev.vector, np.eye(n + 1)[ev.index + 1])
    proj = np.outer(keep.ravel(), keep.ravel().conj())
    t = apply_on_axes(t, proj, (SYSTEM, POST))
    after = float(np.sum(np.abs(t) ** 2))
    ratio = min(after / before, 1.0) if before > 0 else 0.0
    if strict and ratio < tol:
        raise ImpossiblePostSelection(
            f"post-selection of outcome {ev.index} has probability {ratio:.3g}", stage="postselect")
    return PipelineState("t_b", t, state.pre_success, ratio)


def run_pipeline(exp, strict=True):
    """Pre-select, interact and post-select; return the states at t_a, t_c, t_b."""
    a = preselect(exp.psi, exp.pre, exp.p, exp.tol)
    c = evolve(a, exp.stages_before())
    b = postselect(c, exp.u_bc, exp.post, exp.tol, strict=strict)
    return a, c, b


# --- density-operator route ------------------------------------------------------


def two_state_vectors(exp):
    """``(|A;t_c>, |B;t_c>)`` on ``system (x) pointer``.

    ``|A;t_c>`` is the pre-selected state pushed through the interaction.
    ``|B;t_c>`` is the post-selected system state retrodicted to ``t_c`` with
    the pointer in the unnormalized sum of all outcome labels, so that
    ``<B|Gamma_i|A>`` is the transition amplitude through outcome ``i``.
    """
    a = np.kron(exp.pre.vector, ready_pointer(exp.p))
    for op in exp.stages_before():
        a = op @ a
    b = np.kron(exp.post.vector, flat_pointer(exp.p))
    for op in reversed(exp.stages_after()):
        b = op.conj().T @ b
    space = exp.model.joint
    return StateVector(space, a), StateVector(space, b)


@dataclass(frozen=True, eq=False)
class PPSEDensity:
    """``rho = sum_i D_i Gamma_i`` on the pointer space."""

    gamma: GammaSet
    weights: np.ndarray
    amplitudes: Optional[np.ndarray] = None
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (len(self.gamma),):
            raise DimensionMismatch(f"{w.shape[0]} weights for {len(self.gamma)} outcomes")
        if np.any(w < -self.tol) or abs(w.sum() - 1.0) > self.tol:
            raise ValueError(f"weights must be a probability vector, got {w}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def tags(self):
        return self.gamma.tags

    @property
    def rho(self):
        return sum(d * g for d, g in zip(self.weights, self.gamma.elements))

    def prob(self, selector):
        return outcome_prob(self, selector)

    def by_eigenvalue(self):
        ks = sorted({t[0] for t in self.tags})
        return {k: outcome_prob(self, k) for k in ks}

    def is_valid_state(self, tol=DEFAULT_TOL):
        rho = self.rho
        return (is_hermitian(rho, tol)
                and np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -tol
                and abs(np.trace(rho).real - 1.0) <= tol)


def ppse_density(a_tc, b_tc, gamma, n=None):
    """Weights ``D_i = |<B|Gamma_i|A>|^2 / sum_i |<B|Gamma_i|A>|^2``.

    ``a_tc`` and ``b_tc`` live on ``system (x) pointer``; each outcome
    projector is lifted there before the amplitude is taken.
    """
    a, b = _vec(a_tc), _vec(b_tc)
    p = gamma.space.dim
    if a.shape != b.shape:
        raise DimensionMismatch("two-state vectors live on different spaces")
    if n is None:
        n, rem = divmod(a.shape[0], p)
        if rem:
            raise DimensionMismatch(f"joint dimension {a.shape[0]} is not a multiple of {p}")
    amps = np.array([np.vdot(b, embed(g, 1, [n, p]) @ a) for g in gamma.elements])
    mags = np.abs(amps) ** 2
    total = mags.sum()
    if total < EMPTY_TOL:
        raise EmptyEnsemble("no outcome is consistent with both selections", stage="density")
    return PPSEDensity(gamma, mags / total, amps)


def outcome_prob(rho, selector):
    """``sum_j Tr(rho Gamma_j)`` over the outcomes picked by ``selector``."""
    idx = rho.gamma.select(selector)
    r = rho.rho
    val = sum(np.trace(r @ rho.gamma.elements[i]).real for i in idx)
    return float(min(max(val, 0.0), 1.0))


def density_for(exp):
    a, b = two_state_vectors(exp)
    return ppse_density(a, b, exp.gamma(), exp.n)


# --- closed forms ---------------------------------------------------------------


def prob_closed_form(mode, a, b, u_ca, u_bc, eigen, dcoeffs, k):
    """Probability that the pointer reports eigenvalue ``k``, per mode.

    Uses only system amplitudes ``<c_kl|U_ca|a>`` and ``<b|U_bc|c_km>``.
    """
    mode = Mode(mode)
    a, b = _vec(a), _vec(b)
    n = a.shape[0]
    u_ca = np.eye(n) if u_ca is None else _op(u_ca)
    u_bc = np.eye(n) if u_bc is None else _op(u_bc)
    if not isinstance(eigen, Eigenstructure):
        raise TypeError("eigen must be an Eigenstructure")
    if mode is Mode.NONDEGENERATE and any(s != 1 for s in eigen.sizes):
        raise ModeMismatch("non-degenerate closed form needs blocks of size 1")
    if mode is Mode.TWOSTEP and (dcoeffs is None or len(dcoeffs) != len(eigen.sizes)):
        raise ModeMismatch("two-step closed form needs one d-matrix per block")
    if not 0 <= k < len(eigen.sizes):
        raise ModeMismatch(f"no eigenvalue index {k}")

    fwd = u_ca @ a
    bwd = u_bc.conj().T @ b
    # into[k][l] = <c_kl|U_ca|a>,  out[k][l] = <b|U_bc|c_kl>
    into = [blk.conj().T @ fwd for blk in eigen.blocks]
    out = [bwd.conj() @ blk for blk in eigen.blocks]

    def weight(j):
        if mode is Mode.NONDEGENERATE:
            return abs(out[j][0]) ** 2 * abs(into[j][0]) ** 2
        if mode is Mode.COARSE:
            return abs(np.sum(out[j] * into[j])) ** 2
        if mode is Mode.FINE:
            return float(np.sum(np.abs(out[j] * into[j]) ** 2))
        d = np.asarray(dcoeffs[j], dtype=complex)
        # amplitude of pointer (j, r, s): <c_jr|U|a> d_rs <b|U|c_js>
        return float(np.sum(np.abs(into[j][:, None] * d * out[j][None, :]) ** 2))

    weights = [weight(j) for j in range(len(eigen.sizes))]
    total = sum(weights)
    if total < EMPTY_TOL:
        raise EmptyEnsemble("closed form denominator vanishes", stage="closed-form")
    return weights[k] / total


def closed_form_for(exp, k):
    return prob_closed_form(exp.model.mode, exp.pre.vector, exp.post.vector, exp.u_ca,
                            exp.u_bc, exp.model.eigen, exp.model.dcoeffs, k)


# --- oracle ---------------------------------------------------------------------


def oracle_prob(exp):
    """Per-outcome probabilities by explicit joint-state enumeration.

    Runs the four-factor state through pre-selection, the stage operators and
    post-selection, then sums ``|amplitude|^2`` of every final component whose
    pointer shows outcome ``o``.  Returns ``{tag: probability}``.
    """
    _, _, final = run_pipeline(exp, strict=True)
    t = final.psi
    weights = {}
    for o, tag in enumerate(exp.model.tags, start=1):
        weights[tag] = float(np.sum(np.abs(t[:, :, o, :]) ** 2))
    total = sum(weights.values())
    if total < EMPTY_TOL:
        raise EmptyEnsemble("no final component carries an outcome record", stage="oracle")
    return {tag: w / total for tag, w in weights.items()}


def oracle_by_eigenvalue(exp):
    probs = oracle_prob(exp)
    out = {}
    for tag, p in probs.items():
        out[tag[0]] = out.get(tag[0], 0.0) + p
    return out


# --- the three-box problem --------------------------------------------------------

BOXES = ("X", "Y", "Z")
REFERENCE_ROW = {"X": (1.0, 0.0, 0.0), "Y": (0.0, 1.0, 0.0), "Z": (1 / 3, 1 / 3, 1 / 3)}


def three_box_states():
    s = 1 / np.sqrt(3)
    return np.array([s, s, s], dtype=complex), np.array([s, s, -s], dtype=complex)


def three_box_experiment(box, u_ca=None, u_bc=None):
    """Look in one box: a two-outcome measurement with blocks ``{P}`` and the rest."""
    i = BOXES.index(box)
    space = HilbertSpace(BOXES)
    eye = np.eye(3)
    rest = [j for j in range(3) if j != i]
    eigen = Eigenstructure(space, (eye[:, [i]], eye[:, rest]))
    model = IntermediateModel(eigen, Mode.COARSE)
    a, b = three_box_states()
    return Experiment(model, SelectionEvent.of(a, "a"), SelectionEvent.of(b, "b"),
                      u_ca=u_ca, u_bc=u_bc)


@dataclass(frozen=True)
class ThreeBoxReport:
    box: str
    prob_found: float
    prob_not_found: float
    oracle_found: float
    weights: tuple
    all_boxes: tuple
    reference_row: tuple

    @property
    def matches_reference_diagonal(self):
        return abs(self.prob_found - self.reference_row[BOXES.index(self.box)]) < 1e-9


def three_box(box, evolution=None):
    """Probability of finding the particle when looking in ``box``.

    ``all_boxes`` gives, for contrast, the outcome distribution of a
    measurement that opens every box at once (non-degenerate, three outcomes).
    """
    u_ca, u_bc = evolution if evolution is not None else (None, None)
    exp = three_box_experiment(box, u_ca, u_bc)
    rho = density_for(exp)
    found = outcome_prob(rho, 0)
    oracle = oracle_by_eigenvalue(exp)[0]

    a, b = three_box_states()
    space = HilbertSpace(BOXES)
    every = IntermediateModel(Eigenstructure.standard(space, (1, 1, 1)), Mode.NONDEGENERATE)
    all_exp = Experiment(every, SelectionEvent.of(a), SelectionEvent.of(b), u_ca=u_ca, u_bc=u_bc)
    all_rho = density_for(all_exp)
    return ThreeBoxReport(
        box=box,
        prob_found=found,
        prob_not_found=outcome_prob(rho, 1),
        oracle_found=oracle,
        weights=tuple(float(w) for w in rho.weights),
        all_boxes=tuple(outcome_prob(all_rho, k) for k in range(3)),
        reference_row=REFERENCE_ROW[box],
    )
