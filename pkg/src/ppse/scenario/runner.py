"""Turn a :class:`ScenarioSpec` into an experiment and run every check on it."""

import json
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

from ..apparatus import Eigenstructure, IntermediateModel, Mode, pointer_label
from ..ensemble import (
    Experiment,
    SelectionEvent,
    closed_form_for,
    evolve,
    oracle_prob,
    outcome_prob,
    postselect,
    ppse_density,
    preselect,
    two_state_vectors,
)
from ..errors import ImpossiblePostSelection, PPSEError, SemanticError
from ..linalg import (
    DEFAULT_TOL,
    AntiunitaryOp,
    HilbertSpace,
    Operator,
    SpectralData,
    is_unitary,
    unitary_from_spectrum,
)
from ..timesym import ProcessTag, reset_variant, reverse_ppse

CHECK_TOL = 1e-9


def default_tol():
    """Tolerance from ``PPSE_TOL`` if set, else the library default."""
    raw = os.environ.get("PPSE_TOL")
    return float(raw) if raw else DEFAULT_TOL


@dataclass(frozen=True, eq=False)
class Built:
    spec: object
    experiment: Experiment
    warnings: tuple
    look: object  # eigenvalue index of the block holding the ``look`` label
    processes: tuple
    reset: bool
    tol: float


def _semantic(spec, key, exc, kind=None):
    line, col = spec.where(key)
    token = key[1] if isinstance(key, tuple) else key
    return SemanticError(line, col, getattr(exc, "message", str(exc)), str(token),
                         kind or type(exc).__name__)


def _fail(spec, key, message, kind):
    line, col = spec.where(key)
    token = key[1] if isinstance(key, tuple) else key
    return SemanticError(line, col, message, str(token), kind)


def build(spec, tol=None):
    """Check ``spec`` and assemble the :class:`Experiment` it describes.

    Every violation is raised as a :class:`SemanticError` located at the
    offending element.
    """
    if tol is None:
        tol = float(spec.option("tol", default_tol()))
    warnings = []
    try:
        space = HilbertSpace(spec.basis)
    except ValueError as exc:
        raise _fail(spec, "space", str(exc), "DuplicateLabel") from None
    n = space.dim

    for kind, items in (("state", spec.states), ("unitary", spec.unitaries)):
        seen = set()
        for name, _ in items:
            if name in seen:
                raise _fail(spec, (kind, name), f"{kind} {name} defined twice", "DuplicateName")
            seen.add(name)
    clash = {s for s, _ in spec.states} & {u for u, _ in spec.unitaries}
    if clash:
        name = sorted(clash)[0]
        raise _fail(spec, ("unitary", name), f"{name} is both a state and a matrix", "DuplicateName")

    strict_norm = bool(spec.option("strict_norm", False))
    states = {}
    for name, amps in spec.states:
        v = np.array(amps, dtype=complex)
        if v.shape[0] != n:
            raise _fail(spec, ("state", name), f"state {name} has {v.shape[0]} amplitudes, space has {n}",
                        "DimensionMismatch")
        norm = np.linalg.norm(v)
        if norm == 0:
            raise _fail(spec, ("state", name), f"state {name} is the zero vector", "NotNormalized")
        if abs(norm - 1.0) > tol:
            if strict_norm:
                raise _fail(spec, ("state", name), f"state {name} has norm {norm:.12g}", "NotNormalized")
            warnings.append(f"state {name} had norm {norm:.12g}; normalized")
        states[name] = v / norm

    matrices = {}
    for name, rows in spec.unitaries:
        if len({len(r) for r in rows}) != 1:
            raise _fail(spec, ("unitary", name), f"matrix {name} has ragged rows", "DimensionMismatch")
        m = np.array(rows, dtype=complex)
        if m.shape != (n, n):
            raise _fail(spec, ("unitary", name), f"matrix {name} has shape {m.shape}, expected {(n, n)}",
                        "DimensionMismatch")
        if name in ("U_ca", "U_bc", "theta") and not is_unitary(m, tol):
            raise _fail(spec, ("unitary", name), f"{name} is not unitary", "NotUnitary")
        matrices[name] = m

    model = _model(spec, space, states, tol)

    def selection(which):
        sel = getattr(spec, which)
        label = "a" if which == "preselect" else "b"
        try:
            if sel.basis in states:
                if sel.index != 0:
                    raise _fail(spec, which, f"a state basis has only index 0, got {sel.index}", "IndexError")
                return SelectionEvent.of(states[sel.basis], label, tol)
            if sel.basis in matrices:
                return SelectionEvent(matrices[sel.basis], sel.index, label, tol)
        except IndexError as exc:
            raise _fail(spec, which, str(exc), "IndexError") from None
        except PPSEError as exc:
            if isinstance(exc, SemanticError):
                raise
            raise _semantic(spec, which, exc) from None
        raise _fail(spec, which, f"unknown basis {sel.basis}", "UnknownName")

    pre, post = selection("preselect"), selection("postselect")

    interaction = None
    if spec.hamiltonian is not None:
        interaction = _interaction(spec, space, model, tol)

    theta = None
    if "theta" in matrices:
        theta = AntiunitaryOp(Operator(space, matrices["theta"]), tol)

    initial = spec.option("initial")
    if initial is not None:
        if initial not in states:
            raise _fail(spec, ("option", "initial"), f"unknown state {initial}", "UnknownName")
        initial = states[initial]

    try:
        exp = Experiment(model, pre, post, initial, matrices.get("U_ca"), matrices.get("U_bc"),
                         interaction, theta, tol)
    except PPSEError as exc:
        raise _semantic(spec, "scenario", exc) from None

    look = spec.option("look")
    look_k = None
    if look is not None:
        for k, block in enumerate(spec.measure.blocks):
            if look in block:
                look_k = k
        if look_k is None:
            raise _fail(spec, ("option", "look"), f"{look} is not in any measured block", "UnknownName")

    procs = spec.option("processes", ())
    if isinstance(procs, str):
        procs = (procs,)
    try:
        procs = tuple(ProcessTag(p) for p in procs)
    except ValueError:
        raise _fail(spec, ("option", "processes"), "processes are i, ii, ..., viii", "UnknownProcess") from None

    return Built(spec, exp, tuple(warnings), look_k, procs, bool(spec.option("reset", False)), tol)


def _model(spec, space, states, tol):
    m = spec.measure
    blocks = []
    for block in m.blocks:
        cols = []
        for label in block:
            if label in space.labels:
                cols.append(space.basis(label).amps)
            elif label in states:
                cols.append(states[label])
            else:
                raise _fail(spec, "measure", f"unknown label {label} in blocks", "UnknownName")
        blocks.append(np.column_stack(cols))
    try:
        eigen = Eigenstructure(space, tuple(blocks), tol=tol)
    except PPSEError as exc:
        raise _semantic(spec, "measure", exc) from None

    mode = Mode(m.mode)
    ds = None
    if m.d:
        given = {}
        for k, rows in m.d:
            if k in given:
                raise _fail(spec, ("d", k), f"d {k} given twice", "DuplicateName")
            if not 0 <= k < len(blocks):
                raise _fail(spec, ("d", k), f"no block {k}", "ModeMismatch")
            if len({len(r) for r in rows}) != 1:
                raise _fail(spec, ("d", k), f"d {k} has ragged rows", "DimensionMismatch")
            given[k] = np.array(rows, dtype=complex)
        ds = []
        for k, s in enumerate(eigen.sizes):
            if k in given:
                ds.append(given[k])
            elif s == 1:
                ds.append(np.eye(1))
            else:
                raise _fail(spec, "measure", f"two-step mode needs d {k}", "ModeMismatch")
        ds = tuple(ds)
    try:
        return IntermediateModel(eigen, mode, ds, bool(spec.option("strict_d", False)), tol)
    except PPSEError as exc:
        key = "measure"
        k = getattr(exc, "k", None)
        if k is not None and ("d", k) in spec.locations:
            key = ("d", k)
        raise _semantic(spec, key, exc) from None


def _interaction(spec, space, model, tol):
    h = spec.hamiltonian
    ptr = model.pointer
    levels, given = [], []
    for lev in h.levels:
        vecs = []
        for entries in lev.vectors:
            v = np.zeros(space.dim * ptr.dim, dtype=complex)
            for s, p, z in entries:
                if s not in space.labels or p not in ptr.labels:
                    raise _fail(spec, "hamiltonian", f"unknown joint label {s} {p}", "UnknownName")
                v[space.index(s) * ptr.dim + ptr.index(p)] += z
            norm = np.linalg.norm(v)
            if norm == 0:
                raise _fail(spec, "hamiltonian", "zero eigenvector", "NotNormalized")
            vecs.append(v / norm)
        given.extend(vecs)
        levels.append([lev.energy, vecs, lev.complement])
    if sum(lev.complement for lev in h.levels) > 1:
        raise _fail(spec, "hamiltonian", "only one level may take the complement", "IncompleteSpectrum")
    for lev in levels:
        if lev[2]:
            rest = null_space(np.column_stack(given).conj().T) if given else np.eye(space.dim * ptr.dim)
            lev[1] = lev[1] + list(rest.T)
    try:
        spectral = SpectralData(model.joint, tuple((e, v) for e, v, _ in levels), tol)
    except PPSEError as exc:
        raise _semantic(spec, "hamiltonian", exc) from None
    return unitary_from_spectrum(spectral, h.duration).matrix


# --- running ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RunReport:
    name: str
    mode: str
    tol: float
    tags: tuple
    outcome_probs: dict
    eigenvalue_probs: dict
    weights: tuple
    closed_form: dict
    oracle: dict
    pre_success: float
    post_success: float
    prob_found: object = None
    timesym: object = None
    reset: object = None
    warnings: tuple = field(default_factory=tuple)

    def to_dict(self):
        out = {
            "scenario": self.name,
            "mode": self.mode,
            "tolerance": self.tol,
            "selection": {"pre_success": self.pre_success, "post_success": self.post_success},
            "outcomes": dict(self.outcome_probs),
            "eigenvalues": {str(k): v for k, v in self.eigenvalue_probs.items()},
            "weights": list(self.weights),
            "closed_form": {str(k): v for k, v in self.closed_form.items()},
            "oracle": dict(self.oracle),
        }
        if self.prob_found is not None:
            out["prob_found"] = self.prob_found
        if self.timesym is not None:
            out["timesym"] = self.timesym
        if self.reset is not None:
            out["reset"] = self.reset
        out["warnings"] = list(self.warnings)
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def csv_rows(self):
        rows = [("outcome", k, v) for k, v in self.outcome_probs.items()]
        rows += [("eigenvalue", str(k), v) for k, v in self.eigenvalue_probs.items()]
        if self.prob_found is not None:
            rows.append(("found", self.name, self.prob_found))
        return rows

    def to_csv(self, with_name=False):
        head = "scenario,kind,key,probability" if with_name else "kind,key,probability"
        pre = f"{self.name}," if with_name else ""
        lines = [head] + [f"{pre}{k},{key},{v!r}" for k, key, v in self.csv_rows()]
        return "\n".join(lines) + "\n"

    def to_table(self):
        r = lambda x: f"{x:.6f}"
        lines = [f"scenario  {self.name}", f"mode      {self.mode}",
                 f"selection pre {r(self.pre_success)}  post {r(self.post_success)}", "",
                 f"{'outcome':<12}{'ABL':>12}{'oracle':>12}"]
        for k, v in self.outcome_probs.items():
            lines.append(f"{k:<12}{r(v):>12}{r(self.oracle[k]):>12}")
        lines += ["", f"{'eigenvalue':<12}{'ABL':>12}{'closed':>12}"]
        for k, v in self.eigenvalue_probs.items():
            lines.append(f"{k:<12}{r(v):>12}{r(self.closed_form[k]):>12}")
        if self.prob_found is not None:
            lines += ["", f"prob_found {r(self.prob_found)}"]
        if self.timesym is not None:
            lines += ["", "process   deviation"]
            for p, info in self.timesym["processes"].items():
                lines.append(f"{'(' + p + ')':<10}{info['deviation']:.3e}")
        if self.reset is not None:
            lines += ["", f"reset variant deviation {r(self.reset['deviation'])}"]
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines) + "\n"

    def format(self, fmt):
        return {"table": self.to_table, "json": self.to_json, "csv": self.to_csv}[fmt]()


def run(spec, tol=None, processes=None):
    """Run the full pipeline and every cross-check on a scenario.

    Typed errors propagate with their ``stage`` set.  Cross-check deviations
    above ``1e-9`` become warnings rather than errors.
    """
    built = spec if isinstance(spec, Built) else build(spec, tol)
    exp, spec = built.experiment, built.spec
    warnings = list(built.warnings)
    tags = exp.model.tags
    labels = [pointer_label(t) for t in tags]

    a = preselect(exp.psi, exp.pre, exp.p, exp.tol)
    c = evolve(a, exp.stages_before())
    b = postselect(c, exp.u_bc, exp.post, exp.tol, strict=False)
    a_tc, b_tc = two_state_vectors(exp)
    rho = ppse_density(a_tc, b_tc, exp.gamma(), exp.n)
    if b.post_success < exp.tol:
        raise ImpossiblePostSelection("post-selected outcome has vanishing probability",
                                      stage="postselect")

    outcomes = {lab: outcome_prob(rho, [t]) for lab, t in zip(labels, tags)}
    ks = sorted({t[0] for t in tags})
    by_k = {k: outcome_prob(rho, k) for k in ks}

    closed = {k: closed_form_for(exp, k) for k in ks}
    dev = max(abs(closed[k] - by_k[k]) for k in ks)
    if dev > CHECK_TOL:
        warnings.append(f"closed form differs from the ABL rule by {dev:.3e}")
    oracle_t = oracle_prob(exp)
    oracle = {lab: oracle_t[t] for lab, t in zip(labels, tags)}
    dev = max(abs(oracle[lab] - outcomes[lab]) for lab in labels)
    if dev > CHECK_TOL:
        warnings.append(f"oracle differs from the ABL rule by {dev:.3e}")

    procs = built.processes if processes is None else tuple(ProcessTag(p) for p in processes)
    procs = tuple(p for p in procs if p is not ProcessTag.I)
    timesym = None
    if procs:
        rep = reverse_ppse(exp, procs)
        info = {p.value: {"weights": [float(x) for x in rep.reverse_weights[p]],
                          "deviation": rep.deviation(p)} for p in procs}
        timesym = {"motion_reversal": rep.motion_reversal,
                   "recovered_initial": rep.recovered_initial,
                   "max_deviation": rep.max_deviation,
                   "processes": info}
        if rep.motion_reversal is False:
            warnings.append("a stage unitary fails the motion-reversal check under theta")
        if rep.max_deviation > CHECK_TOL:
            warnings.append(f"reverse-time weights differ from forward by {rep.max_deviation:.3e}")

    reset = None
    if built.reset:
        w = reset_variant(exp)
        reset = {"weights": [float(x) for x in w],
                 "deviation": float(np.abs(w - rho.weights).max())}

    found = by_k[built.look] if built.look is not None else None
    return RunReport(spec.name, exp.model.mode.value, exp.tol, tuple(labels), outcomes, by_k,
                     tuple(float(w) for w in rho.weights), closed, oracle,
                     a.pre_success, b.post_success, found, timesym, reset, tuple(warnings))
