"""Density operators, Kraus channels, POVMs and the linear algebra they need.

Every object here is validated when it is built and is read-only afterwards,
so downstream code can assume the invariants without re-checking them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

TOL_HERM = 1e-8
TOL_TRACE = 1e-8
TOL_POVM = 1e-8
TOL_TP = 1e-8
TOL_PSD = 1e-8
TOL_NORM = 1e-8
TOL_RANK = 1e-9
TOL_NUM = 1e-7
TOL_RECON = 1e-7
TOL_ORTH = 1e-7

# Amplitudes closer than this to the largest magnitude tie for the phase anchor.
_PHASE_TIE = 1e-12


class ValidationError(ValueError):
    """An operator violates the invariant its type promises."""


class DimensionError(ValueError):
    """Operands live in Hilbert spaces of different dimension."""


def as_matrix(data, name: str = "matrix") -> np.ndarray:
    """Return a read-only complex128 copy of a square matrix."""
    m = np.array(data, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValidationError(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    m.setflags(write=False)
    return m


def hermitian_deviation(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def _min_eigenvalue(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])


def fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the first largest-magnitude amplitude is real positive."""
    mags = np.abs(vec)
    k = int(np.flatnonzero(mags >= mags.max() - _PHASE_TIE)[0])
    if mags[k] == 0:
        return vec.astype(np.complex128)
    return vec * (abs(vec[k]) / vec[k])


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A Hermitian, positive semidefinite, unit-trace matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "density operator")
        dev = hermitian_deviation(m)
        if dev > TOL_HERM:
            raise ValidationError(f"density operator is not Hermitian (deviation {dev:.3g})")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TOL_TRACE:
            raise ValidationError(f"density operator has trace {tr:.12g}, expected 1")
        lo = _min_eigenvalue(m)
        if lo < -TOL_PSD:
            raise ValidationError(f"density operator has negative eigenvalue {lo:.3g}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_pure(cls, state: "PureState | Sequence[complex]") -> "DensityOperator":
        vec = state.amplitudes if isinstance(state, PureState) else PureState(state).amplitudes
        return cls(np.outer(vec, vec.conj()))

    @classmethod
    def basis(cls, dim: int, index: int) -> "DensityOperator":
        m = np.zeros((dim, dim), dtype=np.complex128)
        m[index, index] = 1.0
        return cls(m)

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim, dtype=np.complex128) / dim)

    def rank(self, tol_rank: float = TOL_RANK) -> int:
        return int(np.sum(np.linalg.eigvalsh(self.matrix) > tol_rank))

    def is_pure(self, tol_rank: float = TOL_RANK) -> bool:
        return self.rank(tol_rank) == 1


@dataclass(frozen=True, eq=False)
class PureState:
    """A unit vector of amplitudes."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.array(self.amplitudes, dtype=np.complex128)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError(f"pure state must be a non-empty vector, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("pure state has non-finite amplitudes")
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > TOL_NORM:
            raise ValidationError(f"pure state has norm {norm:.12g}, expected 1")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def normalized(cls, vec: Sequence[complex]) -> "PureState":
        v = np.asarray(vec, dtype=np.complex128)
        return cls(v / np.linalg.norm(v))

    @classmethod
    def basis(cls, dim: int, index: int) -> "PureState":
        v = np.zeros(dim, dtype=np.complex128)
        v[index] = 1.0
        return cls(v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> DensityOperator:
        return DensityOperator.from_pure(self)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """A trace-preserving map given by its operator-sum elements."""

    operators: tuple
    label: str = ""

    def __post_init__(self):
        ops = tuple(as_matrix(op, f"Kraus operator {a}") for a, op in enumerate(self.operators))
        if not ops:
            raise ValidationError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        if any(op.shape != (d, d) for op in ops):
            raise DimensionError("Kraus operators have inconsistent shapes")
        dev = completeness_deviation(ops)
        if dev > TOL_TP:
            raise ValidationError(
                f"completeness check failed: max|sum E^dag E - 1| = {dev:.3g} > {TOL_TP:g}"
            )
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def __len__(self) -> int:
        return len(self.operators)


@dataclass(frozen=True, eq=False)
class Povm:
    """Positive operators summing to the identity."""

    elements: tuple

    def __post_init__(self):
        els = tuple(as_matrix(m, f"POVM element {j}") for j, m in enumerate(self.elements))
        if not els:
            raise ValidationError("a POVM needs at least one element")
        d = els[0].shape[0]
        if any(m.shape != (d, d) for m in els):
            raise DimensionError("POVM elements have inconsistent shapes")
        for j, m in enumerate(els):
            dev = hermitian_deviation(m)
            if dev > TOL_HERM:
                raise ValidationError(f"POVM element {j} is not Hermitian (deviation {dev:.3g})")
            lo = _min_eigenvalue(m)
            if lo < -TOL_PSD:
                raise ValidationError(f"POVM element {j} has negative eigenvalue {lo:.3g}")
        dev = float(np.max(np.abs(sum(els) - np.eye(d))))
        if dev > TOL_POVM:
            raise ValidationError(f"POVM elements do not sum to identity (deviation {dev:.3g})")
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    @classmethod
    def computational(cls, dim: int) -> "Povm":
        return cls.projective(np.eye(dim, dtype=np.complex128))

    @classmethod
    def projective(cls, basis: np.ndarray) -> "Povm":
        """Rank-one projectors onto the columns of a unitary matrix."""
        return cls(tuple(np.outer(basis[:, k], basis[:, k].conj()) for k in range(basis.shape[1])))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: tuple

    def reconstruct(self) -> np.ndarray:
        d = self.eigenvectors[0].dim
        out = np.zeros((d, d), dtype=np.complex128)
        for lam, v in zip(self.eigenvalues, self.eigenvectors):
            out += lam * np.outer(v.amplitudes, v.amplitudes.conj())
        return out

    def basis_matrix(self) -> np.ndarray:
        return np.column_stack([v.amplitudes for v in self.eigenvectors])


@dataclass(frozen=True)
class ChannelReport:
    deviation: float
    passed: bool
    n_operators: int
    tolerance: float = TOL_TP


def completeness_deviation(operators: Iterable[np.ndarray]) -> float:
    ops = [np.asarray(op, dtype=np.complex128) for op in operators]
    total = sum(op.conj().T @ op for op in ops)
    return float(np.max(np.abs(total - np.eye(ops[0].shape[0]))))


def validate_channel(channel: KrausChannel | Sequence) -> ChannelReport:
    """Report how far a Kraus list is from trace preservation.

    Accepts raw operator lists too, since an invalid list cannot be wrapped
    in a ``KrausChannel`` in the first place.
    """
    ops = channel.operators if isinstance(channel, KrausChannel) else [
        np.asarray(op, dtype=np.complex128) for op in channel
    ]
    if len(ops) == 0:
        return ChannelReport(deviation=float("inf"), passed=False, n_operators=0)
    dev = completeness_deviation(ops)
    return ChannelReport(deviation=dev, passed=dev <= TOL_TP, n_operators=len(ops))


def _check_dims(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise DimensionError(f"dimension mismatch: {dims}")


def apply_channel(channel: KrausChannel, rho: DensityOperator) -> DensityOperator:
    """Return sum_a E_a rho E_a^dagger."""
    _check_dims(channel.dim, rho.dim)
    out = sum(e @ rho.matrix @ e.conj().T for e in channel.operators)
    return DensityOperator((out + out.conj().T) / 2)


def spectral_decompose(rho: DensityOperator | np.ndarray, tol_rank: float = TOL_RANK) -> SpectralDecomposition:
    """Eigen-decomposition with descending eigenvalues and phase-fixed eigenvectors.

    Eigenvalues with magnitude at or below ``tol_rank`` are reported as exactly zero.
    Within a degenerate eigenspace the basis is whatever LAPACK returns.
    """
    m = rho.matrix if isinstance(rho, DensityOperator) else as_matrix(rho)
    dev = hermitian_deviation(m)
    if dev > TOL_HERM:
        raise ValidationError(f"matrix is not Hermitian (deviation {dev:.3g})")
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vals[np.abs(vals) <= tol_rank] = 0.0
    vals.setflags(write=False)
    vectors = tuple(PureState(fix_phase(vecs[:, k])) for k in order)
    return SpectralDecomposition(eigenvalues=vals, eigenvectors=vectors)


def support_projector(rho: DensityOperator, tol_rank: float = TOL_RANK) -> np.ndarray:
    vals, vecs = np.linalg.eigh(rho.matrix)
    keep = vecs[:, vals > tol_rank]
    p = keep @ keep.conj().T
    p.setflags(write=False)
    return p


def trace_distance(a: DensityOperator, b: DensityOperator) -> float:
    """Half the trace norm of ``a - b``, clipped to [0, 1].

    Both orderings are evaluated and averaged so the result is bit-for-bit symmetric.
    """
    _check_dims(a.dim, b.dim)

    def norm(diff):
        return float(np.sum(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2))))

    d = 0.25 * (norm(a.matrix - b.matrix) + norm(b.matrix - a.matrix))
    return min(max(d, 0.0), 1.0)


def overlap(u: PureState, v: PureState) -> complex:
    _check_dims(u.dim, v.dim)
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, mats)


def tensor(states: Sequence[DensityOperator]) -> DensityOperator:
    if not states:
        raise ValueError("tensor needs at least one state")
    if len(states) == 1:
        return states[0]
    return DensityOperator(kron_all([s.matrix for s in states]))


def tensor_povm(povms: Sequence[Povm]) -> Povm:
    """Product POVM; outcome order is row-major over the per-factor outcomes."""
    if not povms:
        raise ValueError("tensor_povm needs at least one POVM")
    if len(povms) == 1:
        return povms[0]
    elements = [np.ones((1, 1), dtype=np.complex128)]
    for p in povms:
        elements = [np.kron(a, b) for a in elements for b in p.elements]
    return Povm(tuple(elements))


def tensor_channel(channels: Sequence[KrausChannel]) -> KrausChannel:
    """Product channel with Kraus operators E_a (x) E_b (x) ... in row-major order."""
    if not channels:
        raise ValueError("tensor_channel needs at least one channel")
    if len(channels) == 1:
        return channels[0]
    ops = [np.ones((1, 1), dtype=np.complex128)]
    for ch in channels:
        ops = [np.kron(a, b) for a in ops for b in ch.operators]
    return KrausChannel(tuple(ops), label="(x)".join(ch.label for ch in channels))
