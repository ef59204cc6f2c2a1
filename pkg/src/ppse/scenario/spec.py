"""Syntax-level description of a scenario.

A :class:`ScenarioSpec` holds exactly what the text says, with amplitudes
already folded to complex numbers.  Everything is stored in tuples so two
specs compare equal iff they render to the same text.  Source positions ride
along in ``locations`` and never take part in comparisons.
"""

from dataclasses import dataclass, field
from typing import Optional

MODES = ("nondegenerate", "coarse", "fine", "twostep")
RESERVED_UNITARIES = ("U_ca", "U_bc", "theta")
OPTION_KEYS = ("tol", "strict_norm", "strict_d", "processes", "reset", "initial", "look")


@dataclass(frozen=True)
class Level:
    """One energy level: explicit joint vectors, optionally plus the leftover complement.

    Each vector is a tuple of ``(system_label, pointer_label, amplitude)``.
    """

    energy: float
    vectors: tuple = ()
    complement: bool = False


@dataclass(frozen=True)
class Hamiltonian:
    levels: tuple
    duration: float


@dataclass(frozen=True)
class Measure:
    blocks: tuple
    mode: str
    d: tuple = ()  # ((k, rows), ...)


@dataclass(frozen=True)
class Selection:
    basis: str
    index: int


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    basis: tuple
    states: tuple  # ((name, amplitudes), ...)
    unitaries: tuple  # ((name, rows), ...)
    measure: Measure
    preselect: Selection
    postselect: Selection
    hamiltonian: Optional[Hamiltonian] = None
    options: tuple = ()  # ((key, value), ...)
    locations: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def dim(self):
        return len(self.basis)

    def state(self, name):
        return dict(self.states).get(name)

    def unitary(self, name):
        return dict(self.unitaries).get(name)

    def option(self, key, default=None):
        return dict(self.options).get(key, default)

    def where(self, key):
        """``(line, column)`` of a named element, or ``(1, 1)`` if unknown."""
        return self.locations.get(key, (1, 1))
