"""Measurement statistics and the adjacency relation between input states.

Outcome indices are 0-based throughout. An outcome is "possible" for a state
when its probability exceeds ``TOL_PROB``; that single threshold is what turns
floating-point probabilities into the exact zero/non-zero pattern that
zero-error decoding depends on, so it is deliberately tight.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .quantum_core import (
    TOL_NUM,
    TOL_ORTH,
    TOL_RANK,
    DensityOperator,
    DimensionError,
    KrausChannel,
    Povm,
    PureState,
    ValidationError,
    apply_channel,
    fix_phase,
    support_projector,
    trace_distance,
)

TOL_PROB = 1e-9
TOL_ROW = 1e-7


class NumericalDisagreement(RuntimeError):
    """Two independent numerical criteria for the same fact disagree."""


@dataclass(frozen=True, eq=False)
class InputEnsemble:
    """An ordered list of input states; the order fixes graph vertex indices."""

    states: tuple
    labels: tuple = ()

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise ValidationError("an ensemble needs at least one state")
        if len({s.dim for s in states}) != 1:
            raise DimensionError("ensemble states have different dimensions")
        labels = tuple(self.labels) if self.labels else tuple(str(i) for i in range(len(states)))
        if len(labels) != len(states):
            raise ValidationError("one label per state is required")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_vectors(cls, vectors, labels=()) -> "InputEnsemble":
        """Build from pure states, or from the columns of a 2-D array."""
        if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
            vectors = [vectors[:, k] for k in range(vectors.shape[1])]
        states = [DensityOperator.from_pure(v if isinstance(v, PureState) else PureState(v)) for v in vectors]
        return cls(tuple(states), tuple(labels))

    @classmethod
    def computational(cls, dim: int, count: int | None = None) -> "InputEnsemble":
        count = dim if count is None else count
        return cls(tuple(DensityOperator.basis(dim, i) for i in range(count)))

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def __len__(self) -> int:
        return len(self.states)

    def is_pure(self) -> bool:
        return all(s.is_pure() for s in self.states)


@dataclass(frozen=True)
class ASet:
    state_index: int
    outcomes: frozenset

    def sorted(self) -> list:
        return sorted(self.outcomes)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic matrix with entry (j, k) = p(outcome k | input j)."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float)
        if p.ndim != 2:
            raise ValidationError("transition matrix must be 2-D")
        if np.any(p < 0) or np.any(p > 1):
            raise ValidationError("transition probabilities must lie in [0, 1]")
        dev = np.max(np.abs(p.sum(axis=1) - 1.0))
        if dev > TOL_ROW:
            raise ValidationError(f"transition matrix rows do not sum to 1 (deviation {dev:.3g})")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def shape(self):
        return self.probabilities.shape


def _probability(sigma: np.ndarray, element: np.ndarray) -> float:
    # tr[sigma M] without forming the product
    p = float(np.real(np.sum(sigma * element.T)))
    if p < -TOL_NUM or p > 1 + TOL_NUM:
        raise ValidationError(f"probability {p:.3g} outside [0, 1]; is the element a valid effect?")
    return min(max(p, 0.0), 1.0)


def output_probabilities(sigma: DensityOperator, povm: Povm) -> np.ndarray:
    if sigma.dim != povm.dim:
        raise DimensionError(f"state has dimension {sigma.dim}, POVM has {povm.dim}")
    return np.array([_probability(sigma.matrix, m) for m in povm.elements])


def transition_probability(channel: KrausChannel, rho: DensityOperator, element) -> float:
    """p = tr[E(rho) M], clamped to [0, 1]."""
    element = np.asarray(element, dtype=np.complex128)
    if not (channel.dim == rho.dim == element.shape[0]):
        raise DimensionError("channel, state and POVM element dimensions differ")
    return _probability(apply_channel(channel, rho).matrix, element)


def transition_matrix(channel: KrausChannel, ensemble: InputEnsemble, povm: Povm) -> TransitionMatrix:
    if not (channel.dim == ensemble.dim == povm.dim):
        raise DimensionError("channel, ensemble and POVM dimensions differ")
    rows = [output_probabilities(apply_channel(channel, rho), povm) for rho in ensemble.states]
    return TransitionMatrix(np.vstack(rows))


def a_set(channel: KrausChannel, rho: DensityOperator, povm: Povm,
          tol_prob: float = TOL_PROB, state_index: int = 0) -> ASet:
    """Outcomes that occur with probability above ``tol_prob``."""
    if not (channel.dim == rho.dim == povm.dim):
        raise DimensionError("channel, state and POVM dimensions differ")
    probs = output_probabilities(apply_channel(channel, rho), povm)
    return ASet(state_index, frozenset(int(j) for j in np.flatnonzero(probs > tol_prob)))


def a_sets(channel: KrausChannel, ensemble: InputEnsemble, povm: Povm,
           tol_prob: float = TOL_PROB) -> list[ASet]:
    return [a_set(channel, rho, povm, tol_prob, i) for i, rho in enumerate(ensemble.states)]


def non_adjacent(channel: KrausChannel, rho1: DensityOperator, rho2: DensityOperator,
                 povm: Povm, tol_prob: float = TOL_PROB) -> bool:
    a1 = a_set(channel, rho1, povm, tol_prob)
    a2 = a_set(channel, rho2, povm, tol_prob)
    return a1.outcomes.isdisjoint(a2.outcomes)


def coarse_povm(povm: Povm, split: Sequence[Sequence[int]]) -> Povm:
    """Merge outcomes into two blocks, each element the sum of its block."""
    if len(split) != 2:
        raise ValueError("split must have exactly two blocks")
    first, second = (list(b) for b in split)
    if not first or not second:
        raise ValueError("both blocks must be non-empty")
    flat = first + second
    if sorted(flat) != list(range(len(povm))):
        raise ValueError(f"blocks must partition outcomes 0..{len(povm) - 1} exactly once")
    return Povm((sum(povm.elements[j] for j in first), sum(povm.elements[j] for j in second)))


def support_povm(channel: KrausChannel, rho1: DensityOperator) -> Povm:
    """Two-outcome projective test: the support of E(rho1) versus its complement."""
    p = support_projector(apply_channel(channel, rho1))
    return Povm((p, np.eye(p.shape[0]) - p))


def orthogonal_outputs(channel: KrausChannel, rho1: DensityOperator, rho2: DensityOperator) -> bool:
    """Whether the channel sends both states into orthogonal subspaces.

    Decided twice, from the product of support projectors and from the trace
    distance of the outputs; raises ``NumericalDisagreement`` if they differ.
    """
    if not (channel.dim == rho1.dim == rho2.dim):
        raise DimensionError("channel and state dimensions differ")
    s1, s2 = apply_channel(channel, rho1), apply_channel(channel, rho2)
    by_projectors = float(np.max(np.abs(support_projector(s1) @ support_projector(s2)))) <= TOL_ORTH
    by_distance = trace_distance(s1, s2) >= 1 - TOL_NUM
    if by_projectors != by_distance:
        raise NumericalDisagreement(
            f"support projectors say orthogonal={by_projectors}, trace distance "
            f"{trace_distance(s1, s2):.12g} says {by_distance}"
        )
    return by_projectors


def distinguishable(channel: KrausChannel, rho1: DensityOperator, rho2: DensityOperator,
                    tol_prob: float = TOL_PROB) -> bool:
    """Non-adjacency under the support-projector POVM of the first output."""
    return non_adjacent(channel, rho1, rho2, support_povm(channel, rho1), tol_prob)


def leading_support_vector(rho: DensityOperator) -> PureState:
    """Deterministic unit vector from the top eigenspace of ``rho``.

    Projects each computational basis vector onto the eigenspace of the largest
    eigenvalue and keeps the longest projection (lowest index on ties), so the
    choice does not depend on which basis LAPACK returns for a degenerate space.
    """
    vals, vecs = np.linalg.eigh(rho.matrix)
    top = vecs[:, vals >= vals[-1] - TOL_RANK]
    proj = top @ top.conj().T
    norms = np.linalg.norm(proj, axis=0)
    k = int(np.flatnonzero(norms >= norms.max() - 1e-12)[0])
    return PureState.normalized(fix_phase(proj[:, k] / norms[k]))


def purify_ensemble(ensemble: InputEnsemble,
                    selector: Callable[[DensityOperator], PureState] = leading_support_vector) -> InputEnsemble:
    """Replace every state by a pure state drawn from its own support."""
    pure = []
    for i, rho in enumerate(ensemble.states):
        v = selector(rho)
        p = support_projector(rho)
        leak = float(np.linalg.norm(v.amplitudes - p @ v.amplitudes))
        if leak > TOL_ORTH:
            raise ValidationError(f"selector returned a vector outside the support of state {i}")
        pure.append(DensityOperator.from_pure(v))
    return InputEnsemble(tuple(pure), ensemble.labels)
