"""Seeded random states, channels and structured test instances."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .quantum_core import DensityOperator, KrausChannel, Povm, PureState


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_unitary(dim: int, rng) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng_from(rng)) if dim > 1 else np.ones((1, 1), complex)


def random_pure_state(dim: int, rng) -> PureState:
    rng = rng_from(rng)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState.normalized(v)


def random_density(dim: int, rng, rank: int | None = None) -> DensityOperator:
    """Ginibre-distributed mixed state of the given rank (full rank by default)."""
    rng = rng_from(rng)
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityOperator(m / np.trace(m).real)


def random_channel(dim: int, n_kraus: int, rng, label: str = "random") -> KrausChannel:
    """Channel from a Haar isometry C^d -> C^(d*k), cut into k Kraus blocks."""
    u = random_unitary(dim * n_kraus, rng)
    iso = u[:, :dim]
    ops = tuple(iso[a * dim:(a + 1) * dim, :] for a in range(n_kraus))
    return KrausChannel(ops, label=label)


def random_stochastic(rows: int, cols: int, rng, zero_prob: float = 0.5,
                      min_entry: float = 0.05) -> np.ndarray:
    """Row-stochastic matrix with random zero pattern; nonzeros stay >= min_entry / cols."""
    rng = rng_from(rng)
    t = np.zeros((rows, cols))
    for j in range(rows):
        mask = rng.random(cols) >= zero_prob
        if not mask.any():
            mask[rng.integers(cols)] = True
        w = min_entry + rng.random(cols)
        t[j, mask] = w[mask]
        t[j] /= t[j].sum()
    return t


def structured_channel(dim: int, rng, label: str = "structured"):
    """A classical channel with sparse support, rotated by random unitaries on both sides.

    Returns ``(channel, input_basis)``; the columns of ``input_basis`` are the
    rotated classical inputs, so pairs of them are often perfectly distinguishable.
    """
    from .channel_zoo import embed_classical_dmc, ClassicalDmc

    rng = rng_from(rng)
    t = random_stochastic(dim, dim, rng, zero_prob=0.6)
    base, _, _ = embed_classical_dmc(ClassicalDmc(t))
    u_in = random_unitary(dim, rng)
    u_out = random_unitary(dim, rng)
    ops = tuple(u_out @ e @ u_in.conj().T for e in base.operators)
    return KrausChannel(ops, label=label), u_in


def random_trial_channel(dim: int, rng):
    """Draw one of several channel families for randomized proposition checks.

    Returns ``(channel, basis)`` where ``basis`` is a unitary whose columns are
    natural candidate inputs for that channel.
    """
    rng = rng_from(rng)
    kind = int(rng.integers(4))
    if kind == 0:
        u = random_unitary(dim, rng)
        return KrausChannel((u,), label="unitary"), random_unitary(dim, rng)
    if kind == 1:
        return structured_channel(dim, rng)
    if kind == 2:
        k = int(rng.integers(1, 4))
        return random_channel(dim, k, rng), random_unitary(dim, rng)
    # block-diagonal dephasing in a random basis: orthogonal blocks stay orthogonal
    u = random_unitary(dim, rng)
    cut = int(rng.integers(1, dim)) if dim > 1 else 1
    p0 = np.diag([1.0] * cut + [0.0] * (dim - cut)).astype(complex)
    p1 = np.eye(dim) - p0
    ops = (u @ p0 @ u.conj().T, u @ p1 @ u.conj().T)
    return KrausChannel(ops, label="dephasing"), u


def random_projective_povm(dim: int, rng) -> Povm:
    return Povm.projective(random_unitary(dim, rng))
