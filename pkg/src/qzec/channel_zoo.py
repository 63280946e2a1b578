"""Reference channels and the embedding of classical channels into Kraus form."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .distinguishability import TOL_ROW, InputEnsemble
from .quantum_core import KrausChannel, Povm, ValidationError

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class ClassicalDmc:
    """Row-stochastic matrix ``T[j, k] = p(k | j)``."""

    matrix: np.ndarray

    def __post_init__(self):
        t = np.array(self.matrix, dtype=float)
        if t.ndim != 2 or t.size == 0:
            raise ValidationError("DMC matrix must be a non-empty 2-D array")
        if np.any(t < 0) or np.any(t > 1) or not np.all(np.isfinite(t)):
            raise ValidationError("DMC entries must lie in [0, 1]")
        dev = float(np.max(np.abs(t.sum(axis=1) - 1)))
        if dev > TOL_ROW:
            raise ValidationError(f"DMC rows do not sum to 1 (deviation {dev:.3g})")
        t.setflags(write=False)
        object.__setattr__(self, "matrix", t)

    @property
    def inputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def outputs(self) -> int:
        return self.matrix.shape[1]


def embed_classical_dmc(dmc: ClassicalDmc, label: str = "dmc"):
    """Quantum channel, input ensemble and POVM that reproduce ``dmc`` exactly.

    Inputs and outputs share one computational basis of dimension max(l, m).
    Basis inputs beyond the l used ones are mapped to themselves so the map stays
    trace preserving; basis outputs beyond the m used ones are folded into the
    last POVM element so the transition matrix keeps exactly m columns.
    """
    t = dmc.matrix
    l, m = t.shape
    d = max(l, m)
    ops = []
    for j in range(l):
        for k in range(m):
            if t[j, k] > 0:
                e = np.zeros((d, d), dtype=np.complex128)
                e[k, j] = np.sqrt(t[j, k])
                ops.append(e)
    for j in range(l, d):
        e = np.zeros((d, d), dtype=np.complex128)
        e[j, j] = 1.0
        ops.append(e)
    elements = []
    for k in range(m):
        p = np.zeros((d, d), dtype=np.complex128)
        p[k, k] = 1.0
        elements.append(p)
    for k in range(m, d):
        elements[-1][k, k] = 1.0
    return (
        KrausChannel(tuple(ops), label=label),
        InputEnsemble.computational(d, l),
        Povm(tuple(elements)),
    )


def pentagon_dmc() -> ClassicalDmc:
    """Five inputs, each received as itself or its cyclic successor with probability 1/2."""
    t = np.zeros((5, 5))
    for i in range(5):
        t[i, i] = t[i, (i + 1) % 5] = 0.5
    return ClassicalDmc(t)


def identity_channel(d: int = 2) -> KrausChannel:
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return KrausChannel((np.eye(d, dtype=np.complex128),), label=f"identity-d{d}")


def bitflip_channel(q: float) -> KrausChannel:
    if not 0 <= q <= 1:
        raise ValueError(f"flip probability must be in [0, 1], got {q}")
    return KrausChannel(
        (np.sqrt(1 - q) * np.eye(2, dtype=np.complex128), np.sqrt(q) * PAULI_X),
        label=f"bitflip-q{q:g}",
    )


def depolarizing_channel(d: int = 2, p: float = 1.0) -> KrausChannel:
    """Qubit depolarizing channel with Pauli Kraus set; p = 1 sends every state to 1/2."""
    if d != 2:
        raise ValueError("only the qubit depolarizing channel is provided")
    if not 0 <= p <= 1:
        raise ValueError(f"noise parameter must be in [0, 1], got {p}")
    ops = (
        np.sqrt(1 - 3 * p / 4) * np.eye(2, dtype=np.complex128),
        np.sqrt(p / 4) * PAULI_X,
        np.sqrt(p / 4) * PAULI_Y,
        np.sqrt(p / 4) * PAULI_Z,
    )
    return KrausChannel(ops, label=f"depolarizing-p{p:g}")


ZOO_NAMES = ("pentagon", "identity-d<d>", "bitflip-q<q>", "depolarizing-p<p>")
_NUM = r"(\d+(?:\.\d*)?|\.\d+)"


def zoo_problem(name: str):
    """Resolve a zoo name to ``(channel, ensemble, povm)``.

    The ensemble and POVM are the natural ones: the embedding's basis for the
    pentagon, the computational basis otherwise.
    """
    name = name.strip().lower()
    if name == "pentagon":
        return embed_classical_dmc(pentagon_dmc(), label="pentagon")
    if name == "identity":
        name = "identity-d2"
    if mt := re.fullmatch(r"identity-d(\d+)", name):
        ch = identity_channel(int(mt.group(1)))
    elif mt := re.fullmatch(rf"bitflip-q{_NUM}", name):
        ch = bitflip_channel(float(mt.group(1)))
    elif mt := re.fullmatch(rf"depolarizing-p{_NUM}", name):
        ch = depolarizing_channel(2, float(mt.group(1)))
    else:
        raise KeyError(f"unknown zoo channel {name!r}; known forms: {', '.join(ZOO_NAMES)}")
    return ch, InputEnsemble.computational(ch.dim), Povm.computational(ch.dim)
