"""The catalog of ready-made scenarios."""

import numpy as np

from ..errors import UnknownBuiltin
from ..timesym import appendix_b_states, appendix_b_theta, appendix_b_unitary, rotation_d
from .spec import Hamiltonian, Level, Measure, ScenarioSpec, Selection

ROW_ONE = ("i", "ii", "iii", "iv")


def _rows(m):
    return tuple(tuple(complex(z) for z in row) for row in np.asarray(m))


def _vec(v):
    return tuple(complex(z) for z in v)


def three_box(box):
    s = 1 / np.sqrt(3)
    rest = tuple(b for b in "XYZ" if b != box)
    return ScenarioSpec(
        name=f"three-box-{box}",
        basis=("X", "Y", "Z"),
        states=(("A", _vec([s, s, s])), ("B", _vec([s, s, -s]))),
        unitaries=(("theta", _rows(np.eye(3))),),
        measure=Measure(((box,), rest), "coarse"),
        preselect=Selection("A", 0),
        postselect=Selection("B", 0),
        options=(("look", box), ("processes", ROW_ONE)),
    )


def appendix_a(d=None, reset=False, post="c12"):
    """First counter-example.  ``d`` is the 2x2 block of d-coefficients."""
    d = rotation_d(1 / np.sqrt(2)) if d is None else np.asarray(d, dtype=complex)
    h = 1 / np.sqrt(2)

    def pair(sys, chi, sign):
        return ((sys, "g", complex(h)),) + tuple((s, p, sign * h * z) for s, p, z in chi if z != 0)

    chi0 = (("c00", "g0_1_1", 1.0),)
    chi11 = (("c11", "g1_1_1", d[0, 0]), ("c12", "g1_1_2", d[0, 1]))
    chi12 = (("c11", "g1_2_1", d[1, 0]), ("c12", "g1_2_2", d[1, 1]))
    plus = tuple(pair(s, c, 1) for s, c in (("c00", chi0), ("c11", chi11), ("c12", chi12)))
    minus = tuple(pair(s, c, -1) for s, c in (("c00", chi0), ("c11", chi11), ("c12", chi12)))
    tau1 = (("c11", "g1_1_1", -np.conj(d[0, 1])), ("c12", "g1_1_2", np.conj(d[0, 0])))
    tau2 = (("c11", "g1_2_1", np.conj(d[1, 1])), ("c12", "g1_2_2", -np.conj(d[1, 0])))
    zero = tuple(tuple((s, p, complex(z)) for s, p, z in t if z != 0) for t in (tau1, tau2))
    zero = tuple(t for t in zero if t)

    e = np.eye(3)
    b = (e[0] + e[1 if post == "c11" else 2]) * h
    real = bool(np.all(np.asarray(d).imag == 0))
    opts = [("processes", ROW_ONE if real else ("i", "ii"))]
    if reset:
        opts.append(("reset", True))
    return ScenarioSpec(
        name="appendix-a-reset" if reset else "appendix-a",
        basis=("c00", "c11", "c12"),
        states=(("a", _vec((e[0] + e[1]) * h)), ("b", _vec(b))),
        unitaries=(("theta", _rows(np.eye(3))),),
        measure=Measure((("c00",), ("c11", "c12")), "twostep",
                        ((0, ((1 + 0j,),)), (1, _rows(d)))),
        preselect=Selection("a", 0),
        postselect=Selection("b", 0),
        hamiltonian=Hamiltonian(
            (Level(1.0, plus), Level(-1.0, minus), Level(0.0, zero, True)), np.pi / 2),
        options=tuple(opts),
    )


def appendix_b(variant):
    a, b = appendix_b_states(variant)
    u = _rows(appendix_b_unitary())
    return ScenarioSpec(
        name=f"appendix-b-{variant}",
        basis=("c00", "c11", "c12", "c13"),
        states=(("a", _vec(a)), ("b", _vec(b))),
        unitaries=(("U_ca", u), ("U_bc", u), ("theta", _rows(appendix_b_theta().t))),
        measure=Measure((("c00",), ("c11", "c12", "c13")), "coarse"),
        preselect=Selection("a", 0),
        postselect=Selection("b", 0),
        options=(("processes", ROW_ONE),),
    )


CATALOG = {
    "three-box-X": lambda: three_box("X"),
    "three-box-Y": lambda: three_box("Y"),
    "three-box-Z": lambda: three_box("Z"),
    "appendix-a": lambda: appendix_a(),
    "appendix-a-reset": lambda: appendix_a(reset=True),
    "appendix-b-original": lambda: appendix_b("original"),
    "appendix-b-interchanged": lambda: appendix_b("interchanged"),
    "appendix-b-time-reversed": lambda: appendix_b("time-reversed"),
}


def builtin_names():
    return tuple(CATALOG)


def builtin(name, **kwargs):
    """Look up a catalog scenario.  ``appendix-a`` accepts ``d`` and ``post``."""
    if name not in CATALOG:
        raise UnknownBuiltin(f"unknown builtin {name!r}; try one of {', '.join(CATALOG)}")
    if kwargs:
        if not name.startswith("appendix-a"):
            raise TypeError(f"builtin {name!r} takes no parameters")
        return appendix_a(reset=name.endswith("reset"), **kwargs)
    return CATALOG[name]()
