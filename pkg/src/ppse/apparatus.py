"""The intermediate measuring apparatus (IMA).

An :class:`IntermediateModel` fixes the eigenstructure of the measured
observable, how finely the pointer resolves it (the four :class:`Mode`
values), and for the two-step mode the within-block transformation
coefficients ``d[k][l, m]``.  From it we derive the pointer Hilbert space, the
set of outcome projectors and the measurement interaction.

Outcome tags are tuples: ``(k,)`` when the pointer only reports the
eigenvalue, ``(k, l)`` when it resolves the preferred basis vector, and
``(k, l, m)`` in the two-step mode.  ``k`` counts eigenvalues from 0; ``l`` and
``m`` count vectors inside a block from 1.
"""

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    BadDCoeffRow,
    DimensionMismatch,
    IncompleteBasis,
    ModeMismatch,
    NonOrthonormalBasis,
    NotUnitary,
)
from .linalg import (
    DEFAULT_TOL,
    HilbertSpace,
    Operator,
    StateVector,
    is_unitary,
    orthonormal_columns,
    product_space,
)

READY = "g"


class Mode(enum.Enum):
    NONDEGENERATE = "nondegenerate"
    COARSE = "coarse"
    FINE = "fine"
    TWOSTEP = "twostep"


def pointer_label(tag):
    return READY + "_".join(str(t) for t in tag)


@dataclass(frozen=True, eq=False)
class Eigenstructure:
    """Eigenvalue blocks of an observable on the system space.

    ``blocks[k]`` is an ``(n, s_k)`` array whose columns are the preferred
    orthonormal basis ``|c_{k,1}>, ..., |c_{k,s_k}>`` of eigenspace ``k``.
    Degeneracy is declared by the block layout, never inferred from the
    numeric eigenvalues, which are carried as metadata only.
    """

    space: HilbertSpace
    blocks: tuple
    eigenvalues: Optional[tuple] = None
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        n = self.space.dim
        blocks = []
        for b in self.blocks:
            arr = np.array(b, dtype=complex)
            if arr.ndim == 1:
                arr = arr.reshape(n, 1)
            if arr.shape[0] != n or arr.shape[1] < 1:
                raise DimensionMismatch(f"eigenblock of shape {arr.shape} on a {n}-dim system")
            arr.setflags(write=False)
            blocks.append(arr)
        object.__setattr__(self, "blocks", tuple(blocks))
        if self.eigenvalues is None:
            object.__setattr__(self, "eigenvalues", tuple(float(k) for k in range(len(blocks))))
        else:
            vals = tuple(float(v) for v in self.eigenvalues)
            if len(vals) != len(blocks) or len(set(vals)) != len(vals):
                raise ModeMismatch("eigenvalues must be distinct, one per block")
            object.__setattr__(self, "eigenvalues", vals)

        total = sum(b.shape[1] for b in blocks)
        dev = orthonormal_columns(self.basis) if total else 0.0
        if dev > self.tol:
            raise NonOrthonormalBasis(f"eigenvectors deviate from orthonormality by {dev:.3g}")
        if total != n:
            raise IncompleteBasis(f"{total} eigenvectors for a {n}-dimensional system")

    @property
    def basis(self):
        return np.hstack(self.blocks)

    @property
    def sizes(self):
        return tuple(b.shape[1] for b in self.blocks)

    def vector(self, k, l):
        """``|c_{k,l}>`` with ``l`` counted from 1."""
        return self.blocks[k][:, l - 1]

    def block_projector(self, k):
        b = self.blocks[k]
        return b @ b.conj().T

    @classmethod
    def standard(cls, space, sizes, eigenvalues=None):
        """Blocks of consecutive standard basis vectors with the given sizes."""
        eye = np.eye(space.dim)
        blocks, start = [], 0
        for s in sizes:
            blocks.append(eye[:, start:start + s])
            start += s
        return cls(space, tuple(blocks), eigenvalues)


@dataclass(frozen=True, eq=False)
class GammaSet:
    """Rank-1 outcome projectors on the pointer space, one per tag."""

    space: HilbertSpace
    tags: tuple
    elements: tuple

    def __len__(self):
        return len(self.tags)

    def __iter__(self):
        return iter(zip(self.tags, self.elements))

    def index(self, tag):
        return self.tags.index(tuple(tag))

    def select(self, selector):
        """Indices of the elements picked out by ``selector``.

        ``selector`` is an eigenvalue index ``k``, a single tag, or an iterable
        of tags.
        """
        from .errors import UnknownOutcomeTag

        if isinstance(selector, (int, np.integer)):
            idx = [i for i, t in enumerate(self.tags) if t[0] == selector]
            if not idx:
                raise UnknownOutcomeTag(f"no outcome reports eigenvalue index {selector}")
            return idx
        if isinstance(selector, tuple) and all(isinstance(x, (int, np.integer)) for x in selector):
            selector = [selector]
        idx = []
        for tag in selector:
            tag = tuple(tag)
            if tag not in self.tags:
                raise UnknownOutcomeTag(f"unknown outcome tag {tag}")
            idx.append(self.tags.index(tag))
        return idx

    def total(self):
        return sum(self.elements)


@dataclass(frozen=True, eq=False)
class IntermediateModel:
    eigen: Eigenstructure
    mode: Mode
    dcoeffs: Optional[tuple] = None
    strict_unitary: bool = False
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.dcoeffs is not None:
            ds = tuple(np.array(d, dtype=complex).reshape(s, s) if np.size(d) == s * s
                       else np.array(d, dtype=complex)
                       for d, s in zip(self.dcoeffs, self.eigen.sizes))
            for d in ds:
                d.setflags(write=False)
            object.__setattr__(self, "dcoeffs", ds)
        validate_model(self)

    @property
    def system(self):
        return self.eigen.space

    @property
    def tags(self):
        tags = []
        for k, s in enumerate(self.eigen.sizes):
            if self.mode in (Mode.NONDEGENERATE, Mode.COARSE):
                tags.append((k,))
            elif self.mode is Mode.FINE:
                tags.extend((k, l) for l in range(1, s + 1))
            else:
                tags.extend((k, l, m) for l in range(1, s + 1) for m in range(1, s + 1))
        return tuple(tags)

    @property
    def pointer(self):
        """Pointer space: the ready state followed by one label per outcome."""
        return HilbertSpace((READY,) + tuple(pointer_label(t) for t in self.tags))

    @property
    def joint(self):
        return product_space(self.system, self.pointer)

    def d(self, k):
        """Effective coefficient matrix for block ``k``."""
        if self.mode is Mode.TWOSTEP:
            return self.dcoeffs[k]
        return np.eye(self.eigen.sizes[k])

    def branches(self, k, l):
        """``[(m, d_lm, tag)]``: where ``|c_kl> (x) |ready>`` is sent by the interaction."""
        d = self.d(k)
        out = []
        for m in range(1, self.eigen.sizes[k] + 1):
            coeff = d[l - 1, m - 1]
            if self.mode in (Mode.NONDEGENERATE, Mode.COARSE):
                tag = (k,)
            elif self.mode is Mode.FINE:
                tag = (k, l)
            else:
                tag = (k, l, m)
            if coeff != 0:
                out.append((m, coeff, tag))
        return out

    def tags_for(self, k):
        return tuple(t for t in self.tags if t[0] == k)


def validate_model(m):
    """Check every :class:`IntermediateModel` invariant; return ``True`` or raise."""
    sizes = m.eigen.sizes
    if m.mode is Mode.NONDEGENERATE and any(s != 1 for s in sizes):
        raise ModeMismatch(f"non-degenerate mode needs blocks of size 1, got sizes {sizes}")
    if m.mode is Mode.TWOSTEP:
        if m.dcoeffs is None or len(m.dcoeffs) != len(sizes):
            raise ModeMismatch("two-step mode needs one d-coefficient matrix per block")
        for k, (d, s) in enumerate(zip(m.dcoeffs, sizes)):
            if d.shape != (s, s):
                raise ModeMismatch(f"d-matrix for block {k} has shape {d.shape}, expected {(s, s)}")
            if not np.all(np.isfinite(d)):
                raise ModeMismatch(f"d-matrix for block {k} is not finite")
            for l in range(s):
                norm = float(np.sum(np.abs(d[l]) ** 2))
                if abs(norm - 1.0) > m.tol:
                    raise BadDCoeffRow(k, l + 1, norm)
            if m.strict_unitary and not is_unitary(d, m.tol):
                raise NotUnitary(f"d-matrix for block {k} is not unitary")
    elif m.dcoeffs is not None:
        raise ModeMismatch(f"d-coefficients are only meaningful in two-step mode, not {m.mode.value}")
    labels = m.pointer.labels
    if len(set(labels)) != len(labels):
        raise ModeMismatch("pointer labels are not distinct")
    return True


def gamma_set(m):
    validate_model(m)
    p = m.pointer
    elements = []
    for i in range(1, p.dim):
        e = np.zeros((p.dim, p.dim), dtype=complex)
        e[i, i] = 1.0
        elements.append(e)
    return GammaSet(p, m.tags, tuple(elements))


def _ready_and_records(m):
    """Columns ``|c_kl>|ready>`` and the orthonormal records they are swapped with."""
    n, p = m.system.dim, m.pointer.dim
    pointer_index = {t: i + 1 for i, t in enumerate(m.tags)}
    ready = np.zeros(p)
    ready[0] = 1.0
    sources, records = [], []
    for k, s in enumerate(m.eigen.sizes):
        for l in range(1, s + 1):
            sources.append(np.kron(m.eigen.vector(k, l), ready))
            chi = np.zeros(n * p, dtype=complex)
            for mm, coeff, tag in m.branches(k, l):
                g = np.zeros(p)
                g[pointer_index[tag]] = 1.0
                chi += coeff * np.kron(m.eigen.vector(k, mm), g)
            records.append(chi)
    return np.column_stack(sources), np.column_stack(records)


def interaction_operator(m):
    """Measurement interaction on ``system (x) pointer`` as a unitary matrix.

    It sends ``|c_kl>|ready>`` to ``sum_m d_lm |c_km>|g_klm>`` and back, and
    acts as the identity on everything orthogonal to those pairs.  The map is
    Hermitian as well as unitary, and real whenever the eigenbasis and the
    d-coefficients are real.
    """
    validate_model(m)
    r, chi = _ready_and_records(m)
    dim = r.shape[0]
    return (np.eye(dim) - r @ r.conj().T - chi @ chi.conj().T
            + chi @ r.conj().T + r @ chi.conj().T)


def interact(m, sys, u_ca=None):
    """Evolve ``sys`` by ``u_ca`` and couple it to the ready pointer.

    Returns the joint ``system (x) pointer`` state.
    """
    validate_model(m)
    a = np.asarray(sys.amps if isinstance(sys, StateVector) else sys, dtype=complex)
    if a.shape[0] != m.system.dim:
        raise DimensionMismatch(f"system state of length {a.shape[0]}, expected {m.system.dim}")
    if abs(np.linalg.norm(a) - 1.0) > m.tol:
        from .errors import NotNormalized

        raise NotNormalized("interact needs a normalized system state")
    if u_ca is not None:
        u = np.asarray(u_ca.matrix if isinstance(u_ca, Operator) else u_ca, dtype=complex)
        if not is_unitary(u, m.tol):
            raise NotUnitary("U(t_c, t_a) is not unitary")
        a = u @ a
    ready = np.zeros(m.pointer.dim)
    ready[0] = 1.0
    return StateVector(m.joint, interaction_operator(m) @ np.kron(a, ready))
