"""Dense complex linear algebra on small labelled Hilbert spaces.

States and operators are thin immutable wrappers around numpy arrays that
remember which :class:`HilbertSpace` they live on.  All functions also accept
bare arrays where the space is irrelevant, which is what the higher-level
modules use in their inner loops.
"""

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BadFactorIndex,
    DimensionMismatch,
    IncompleteSpectrum,
    NonOrthonormal,
    NotNormalized,
    NotUnitary,
)

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class HilbertSpace:
    labels: tuple

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if not labels:
            raise ValueError("a Hilbert space needs at least one basis state")
        if len(set(labels)) != len(labels):
            raise ValueError(f"basis labels are not unique: {labels}")
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self):
        return len(self.labels)

    def index(self, label):
        return self.labels.index(label)

    def basis(self, label_or_index):
        """Return the basis ket for a label or integer index."""
        i = label_or_index if isinstance(label_or_index, int) else self.index(label_or_index)
        v = np.zeros(self.dim, dtype=complex)
        v[i] = 1.0
        return StateVector(self, v)

    def __mul__(self, other):
        return product_space(self, other)


def product_space(*spaces):
    labels = [""]
    for s in spaces:
        labels = [f"{a}*{b}" if a else b for a in labels for b in s.labels]
    return HilbertSpace(tuple(labels))


def _finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains NaN or Inf")


@dataclass(frozen=True, eq=False)
class StateVector:
    space: HilbertSpace
    amps: np.ndarray
    normalized: bool = False
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        if amps.shape[0] != self.space.dim:
            raise DimensionMismatch(
                f"{amps.shape[0]} amplitudes for a space of dimension {self.space.dim}"
            )
        _finite(amps, "state vector")
        if self.normalized and abs(np.linalg.norm(amps) - 1.0) > self.tol:
            raise NotNormalized(f"state has norm {np.linalg.norm(amps):.12g}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amps))

    def normalize(self):
        n = self.norm
        if n == 0:
            raise NotNormalized("cannot normalize the zero vector")
        return StateVector(self.space, self.amps / n, normalized=True)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amps, dtype=dtype)

    def __getitem__(self, label):
        return self.amps[self.space.index(label)]


@dataclass(frozen=True, eq=False)
class Operator:
    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.space.dim, self.space.dim):
            raise DimensionMismatch(
                f"operator of shape {m.shape} on a space of dimension {self.space.dim}"
            )
        _finite(m, "operator")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, space):
        return cls(space, np.eye(space.dim))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return compose(self, other)
        if isinstance(other, StateVector):
            return apply(self, other)
        return NotImplemented


@dataclass(frozen=True, eq=False)
class AntiunitaryOp:
    """The antiunitary map ``v -> T @ conj(v)``."""

    unitary_part: Operator
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        if not is_unitary(self.unitary_part, self.tol):
            raise NotUnitary("unitary part of an antiunitary operator is not unitary")

    @classmethod
    def conjugation(cls, space):
        """Plain complex conjugation in the basis of ``space``."""
        return cls(Operator.identity(space))

    @property
    def space(self):
        return self.unitary_part.space

    @property
    def t(self):
        return self.unitary_part.matrix

    def __call__(self, v):
        return apply_antiunitary(self, v)

    def inverse(self):
        # (T K)^-1 = K T^dag = conj(T^dag) K = T^T K
        return AntiunitaryOp(Operator(self.space, self.t.T))

    def conjugate_operator(self, m):
        """Return ``Theta M Theta^-1`` as a matrix."""
        m = np.asarray(m)
        return self.t @ m.conj() @ self.t.conj().T

    def kron(self, other_space):
        """Extend to ``space (x) other_space`` with plain conjugation on the second factor."""
        joint = product_space(self.space, other_space)
        return AntiunitaryOp(Operator(joint, np.kron(self.t, np.eye(other_space.dim))))


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenvalues and orthonormal eigenvectors of a Hamiltonian.

    ``levels`` is a sequence of ``(energy, vectors)`` pairs; each vector is a
    :class:`StateVector` or an amplitude array on ``space``.
    """

    space: HilbertSpace
    levels: tuple
    tol: float = field(default=DEFAULT_TOL, repr=False)

    def __post_init__(self):
        levels = []
        for energy, vecs in self.levels:
            arrs = tuple(np.asarray(v, dtype=complex).reshape(-1) for v in vecs)
            for a in arrs:
                if a.shape[0] != self.space.dim:
                    raise DimensionMismatch(
                        f"eigenvector of length {a.shape[0]} on a space of dimension {self.space.dim}"
                    )
            levels.append((float(energy), arrs))
        object.__setattr__(self, "levels", tuple(levels))
        count = sum(len(v) for _, v in levels)
        if count != self.space.dim:
            raise IncompleteSpectrum(
                f"{count} eigenvectors supplied for a space of dimension {self.space.dim}"
            )
        gram = self.eigenvectors.conj().T @ self.eigenvectors
        dev = np.abs(gram - np.eye(count)).max()
        if dev > self.tol:
            raise NonOrthonormal(f"eigenvectors deviate from orthonormality by {dev:.3g}")

    @property
    def energies(self):
        return np.array([e for e, vecs in self.levels for _ in vecs])

    @property
    def eigenvectors(self):
        """Eigenvectors as the columns of a matrix."""
        return np.column_stack([v for _, vecs in self.levels for v in vecs])


def _arr(x):
    return np.asarray(x.amps if isinstance(x, StateVector) else x, dtype=complex)


def _mat(x):
    return np.asarray(x.matrix if isinstance(x, Operator) else x, dtype=complex)


def _same_space(x, y):
    sx = getattr(x, "space", None)
    sy = getattr(y, "space", None)
    if sx is not None and sy is not None and sx.dim != sy.dim:
        raise DimensionMismatch(f"dimensions {sx.dim} and {sy.dim} differ")
    return sx or sy


def tensor(u, v):
    """Tensor product ``u (x) v``; amplitude ``(i, j)`` is ``u[i] * v[j]``."""
    amps = np.kron(_arr(u), _arr(v))
    if isinstance(u, StateVector) and isinstance(v, StateVector):
        return StateVector(product_space(u.space, v.space), amps)
    return amps


def inner(u, v):
    """``<u|v>``, antilinear in the first argument."""
    _same_space(u, v)
    a, b = _arr(u), _arr(v)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector lengths {a.shape[0]} and {b.shape[0]} differ")
    return complex(np.vdot(a, b))


def projector(v, tol=DEFAULT_TOL):
    """``|v><v|`` for a unit vector ``v``."""
    a = _arr(v)
    n = np.linalg.norm(a)
    if abs(n - 1.0) > tol:
        raise NotNormalized(f"projector needs a unit vector, got norm {n:.12g}")
    m = np.outer(a, a.conj())
    if isinstance(v, StateVector):
        return Operator(v.space, m)
    return m


def apply(m, v):
    space = _same_space(m, v)
    mat, a = _mat(m), _arr(v)
    if mat.shape[1] != a.shape[0]:
        raise DimensionMismatch(f"operator of shape {mat.shape} applied to length {a.shape[0]}")
    out = mat @ a
    if isinstance(v, StateVector):
        return StateVector(space, out)
    return out


def adjoint(m):
    mat = _mat(m).conj().T
    if isinstance(m, Operator):
        return Operator(m.space, mat)
    return mat


def compose(m, n):
    """Matrix product ``m @ n`` (``n`` acts first)."""
    space = _same_space(m, n)
    a, b = _mat(m), _mat(n)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"cannot compose shapes {a.shape} and {b.shape}")
    out = a @ b
    if isinstance(m, Operator) or isinstance(n, Operator):
        return Operator(space, out)
    return out


def is_unitary(m, tol=DEFAULT_TOL):
    mat = _mat(m)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        return False
    return bool(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])).max() <= tol)


def is_hermitian(m, tol=DEFAULT_TOL):
    mat = _mat(m)
    return bool(np.abs(mat - mat.conj().T).max() <= tol)


def apply_antiunitary(theta, v):
    t = theta.t
    _same_space(theta, v)
    a = _arr(v)
    if t.shape[1] != a.shape[0]:
        raise DimensionMismatch(f"antiunitary of dimension {t.shape[0]} applied to length {a.shape[0]}")
    out = t @ a.conj()
    if isinstance(v, StateVector):
        return StateVector(theta.space, out)
    return out


def unitary_from_spectrum(spec, duration):
    """``U = sum_n exp(-i E_n t) |e_n><e_n|`` with ``hbar = 1``."""
    vecs = spec.eigenvectors
    phases = np.exp(-1j * spec.energies * duration)
    return Operator(spec.space, (vecs * phases) @ vecs.conj().T)


def embed(m, factor_index, spaces):
    """Lift an operator on ``spaces[factor_index]`` to the full tensor product."""
    if not 0 <= factor_index < len(spaces):
        raise BadFactorIndex(f"factor {factor_index} out of range for {len(spaces)} factors")
    dims = [s.dim if isinstance(s, HilbertSpace) else int(s) for s in spaces]
    mat = _mat(m)
    if mat.shape != (dims[factor_index], dims[factor_index]):
        raise DimensionMismatch(
            f"operator of shape {mat.shape} does not act on factor {factor_index} "
            f"(dimension {dims[factor_index]})"
        )
    out = np.eye(1, dtype=complex)
    for i, d in enumerate(dims):
        out = np.kron(out, mat if i == factor_index else np.eye(d))
    if all(isinstance(s, HilbertSpace) for s in spaces):
        return Operator(product_space(*spaces), out)
    return out


def apply_on_axes(psi, op, axes):
    """Apply ``op`` to the tensor factors ``axes`` of a state tensor.

    ``psi`` has one axis per factor; ``op`` acts on the product of the listed
    factors (in the listed order).  This avoids materialising
    ``I (x) op (x) I`` for large joint spaces.
    """
    axes = tuple(axes)
    sub = [psi.shape[a] for a in axes]
    op = np.asarray(op).reshape(sub + sub)
    k = len(axes)
    out = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def same_ray(u, v, tol=DEFAULT_TOL):
    """Phase-insensitive equality of two unit vectors: ``|<u|v>| >= 1 - tol``."""
    return abs(inner(u, v)) >= 1.0 - tol


def orthonormal_columns(vectors, tol=DEFAULT_TOL):
    """Deviation check helper: ``max |V^dag V - I|`` for the columns of ``vectors``."""
    v = np.asarray(vectors, dtype=complex)
    return float(np.abs(v.conj().T @ v - np.eye(v.shape[1])).max())


def complete_basis(vectors: Sequence, dim, tol=DEFAULT_TOL):
    """Extend orthonormal ``vectors`` to an orthonormal basis of ``C^dim``.

    The given vectors come first, in order; the rest span their orthogonal
    complement (deterministically, via Gram-Schmidt on the standard basis).
    """
    cols = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
    for e in np.eye(dim, dtype=complex):
        if len(cols) == dim:
            break
        w = e.copy()
        for _ in range(2):
            for c in cols:
                w = w - np.vdot(c, w) * c
        n = np.linalg.norm(w)
        if n > 1e-6:
            cols.append(w / n)
    basis = np.column_stack(cols)
    if orthonormal_columns(basis) > tol:
        raise NonOrthonormal("input vectors are not orthonormal")
    return basis
