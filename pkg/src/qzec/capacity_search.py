"""Zero-error rate search over candidate (ensemble, POVM) pairs, plus validators.

The true zero-error capacity is a supremum over every input set, measurement and
block length. Nothing here enumerates that space. Every number returned is the
rate of an explicit code that has been re-checked from the measurement
statistics, so it is a certified lower bound and never more than that.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import sampling
from .distinguishability import (
    TOL_PROB,
    InputEnsemble,
    NumericalDisagreement,
    a_sets,
    coarse_povm,
    non_adjacent,
    orthogonal_outputs,
    output_probabilities,
    purify_ensemble,
    support_povm,
)
from .graph_engine import (
    DEFAULT_BUDGET,
    WORD_SEP,
    CliqueCertificate,
    Graph,
    build_characteristic_graph,
    clique_number,
    decode_vertex,
    graph_power,
    is_clique,
)
from .quantum_core import (
    TOL_NUM,
    TOL_ORTH,
    DensityOperator,
    KrausChannel,
    Povm,
    PureState,
    apply_channel,
    overlap,
    spectral_decompose,
    support_projector,
    tensor,
    tensor_channel,
    tensor_povm,
    trace_distance,
)

ENSEMBLE_STRATEGIES = ("output-eigenbasis", "computational", "kraus", "random")
POVM_STRATEGIES = ("average-output", "support", "computational")
LOWER_BOUND_NOTE = "certified lower bound"


@dataclass(frozen=True)
class SearchConfig:
    """Which candidates to try and how far to push the block length.

    Block length 3 builds graphs on l**3 vertices; keep ensembles small there.
    """

    n_max: int = 2
    ensemble_strategies: tuple = ENSEMBLE_STRATEGIES
    povm_strategies: tuple = POVM_STRATEGIES
    random_bases: int = 4
    kraus_basis_limit: int = 16
    augment: bool = False
    max_ensemble_size: int = 6
    seed: int = 0
    tol_prob: float = TOL_PROB
    budget: int = DEFAULT_BUDGET
    log_base: int = 2

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if self.log_base != 2:
            raise ValueError("rates are reported in bits; log_base must be 2")
        unknown = set(self.ensemble_strategies) - set(ENSEMBLE_STRATEGIES)
        unknown |= set(self.povm_strategies) - set(POVM_STRATEGIES)
        if unknown:
            raise ValueError(f"unknown candidate strategies: {sorted(unknown)}")
        if self.n_max > 3:
            warnings.warn(f"n_max={self.n_max}: graph powers grow as l**n", stacklevel=2)


@dataclass(frozen=True, eq=False)
class CapacityEstimate:
    rate: float
    n_star: int
    K: int
    ensemble: InputEnsemble
    povm: Povm
    certificate: CliqueCertificate
    exact: bool
    graph: Graph
    omega_by_n: tuple = ()
    candidate: str = ""
    note: str = LOWER_BOUND_NOTE

    @property
    def words(self) -> tuple:
        """Codewords of the certified code, as tuples of ensemble indices."""
        l = len(self.ensemble)
        return tuple(decode_vertex(v, l, self.n_star) for v in self.certificate.vertices)

    def word_labels(self) -> list:
        labels = self.ensemble.labels
        return [WORD_SEP.join(labels[i] for i in w) for w in self.words]


def _beats(k_a: int, n_a: int, k_b: int, n_b: int) -> bool:
    """Exact comparison of K_a**(1/n_a) > K_b**(1/n_b) on integers."""
    return k_a**n_b > k_b**n_a


def rate_for(channel: KrausChannel, ensemble: InputEnsemble, povm: Povm, n_max: int = 2,
             tol_prob: float = TOL_PROB, budget: int = DEFAULT_BUDGET,
             candidate: str = "") -> CapacityEstimate:
    """Best (1/n) log2 omega(G^n) over n = 1..n_max for one (ensemble, POVM) pair."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    g = build_characteristic_graph(channel, ensemble, povm, tol_prob)
    best = None
    omegas = []
    exact = True
    for n in range(1, n_max + 1):
        if not g.edges:
            # every power of an edgeless graph is edgeless
            cert = CliqueCertificate((0,), 1)
        else:
            cert = clique_number(graph_power(g, n), budget)
        exact &= cert.exact
        omegas.append((n, cert.size))
        if best is None or _beats(cert.size, n, best[1].size, best[0]):
            best = (n, cert)
    n_star, cert = best
    return CapacityEstimate(
        rate=math.log2(cert.size) / n_star,
        n_star=n_star,
        K=cert.size,
        ensemble=ensemble,
        povm=povm,
        certificate=cert,
        exact=exact,
        graph=g,
        omega_by_n=tuple(omegas),
        candidate=candidate,
    )


def verify_estimate(channel: KrausChannel, estimate: CapacityEstimate,
                    tol_prob: float = TOL_PROB) -> bool:
    """Recheck a code from the raw statistics of its codewords.

    Builds each codeword as a tensor product state, sends it through the n-fold
    product channel and measures with the product POVM. The code is zero-error
    iff every two codewords have disjoint sets of possible output words.
    """
    n = estimate.n_star
    states = estimate.ensemble.states
    big_channel = tensor_channel([channel] * n)
    big_povm = tensor_povm([estimate.povm] * n)
    supports = []
    for word in estimate.words:
        sigma = apply_channel(big_channel, tensor([states[i] for i in word]))
        probs = output_probabilities(sigma, big_povm)
        supports.append(set(np.flatnonzero(probs > tol_prob).tolist()))
    return all(
        supports[i].isdisjoint(supports[j])
        for i in range(len(supports)) for j in range(i + 1, len(supports))
    )


def _same_rays(b1: np.ndarray, b2: np.ndarray) -> bool:
    return b1.shape == b2.shape and np.allclose(np.abs(b1.conj().T @ b2).max(axis=0), 1.0, atol=1e-9)


def _eigenbasis(h: np.ndarray) -> np.ndarray:
    return spectral_decompose(h).basis_matrix()


def candidate_bases(channel: KrausChannel, config: SearchConfig) -> list[tuple[str, np.ndarray]]:
    """Orthonormal input bases, tagged, in evaluation order and without duplicates."""
    d = channel.dim
    rng = sampling.rng_from(config.seed)
    found: list[tuple[str, np.ndarray]] = []

    def add(tag, basis):
        if not any(_same_rays(basis, b) for _, b in found):
            found.append((tag, basis))

    for strategy in config.ensemble_strategies:
        if strategy == "output-eigenbasis":
            add("m", _eigenbasis(apply_channel(channel, DensityOperator.maximally_mixed(d)).matrix))
        elif strategy == "computational":
            add("", np.eye(d, dtype=np.complex128))
        elif strategy == "kraus":
            for a, e in enumerate(channel.operators[: config.kraus_basis_limit]):
                for part, h in (("h", (e + e.conj().T) / 2), ("a", (e - e.conj().T) / 2j)):
                    if np.allclose(h, h[0, 0] * np.eye(d), atol=1e-12):
                        continue
                    add(f"k{a}{part}", _eigenbasis(h))
        elif strategy == "random":
            for r in range(config.random_bases):
                add(f"r{r}", sampling.random_unitary(d, rng))
    return found


def _basis_ensemble(tag: str, basis: np.ndarray) -> InputEnsemble:
    labels = [f"{tag}.{k}" if tag else str(k) for k in range(basis.shape[1])]
    return InputEnsemble.from_vectors(basis, labels)


def candidate_povms(channel: KrausChannel, ensemble: InputEnsemble,
                    strategies: Sequence[str] = POVM_STRATEGIES) -> list[tuple[str, Povm]]:
    d = channel.dim
    outputs = [apply_channel(channel, rho) for rho in ensemble.states]
    povms = []
    for strategy in strategies:
        if strategy == "average-output":
            mean = sum(s.matrix for s in outputs) / len(outputs)
            povms.append(("avg", Povm.projective(_eigenbasis(mean))))
        elif strategy == "support":
            povms.append(("supp", _support_povm_greedy(outputs, d)))
        elif strategy == "computational":
            povms.append(("comp", Povm.computational(d)))
    return povms


def _support_povm_greedy(outputs: Sequence[DensityOperator], d: int) -> Povm:
    """Mutually orthogonal output-support projectors, completed by the complement."""
    chosen: list[np.ndarray] = []
    for s in outputs:
        p = support_projector(s)
        if all(np.max(np.abs(p @ q)) <= TOL_ORTH for q in chosen):
            chosen.append(p)
    rest = np.eye(d) - sum(chosen)
    if np.trace(rest).real > 0.5:
        chosen.append(rest)
    return Povm(tuple(chosen))


def _trivial_estimate(channel: KrausChannel) -> CapacityEstimate:
    ens = InputEnsemble.computational(channel.dim, 1)
    return rate_for(channel, ens, Povm.computational(channel.dim), 1, candidate="trivial")


def estimate_capacity(channel: KrausChannel, config: SearchConfig | None = None,
                      extra_candidates: Sequence[tuple[InputEnsemble, Povm]] = ()) -> CapacityEstimate:
    """Best certified zero-error rate over the configured candidates.

    Mixed states in ``extra_candidates`` are replaced by pure states from their
    supports before evaluation, which can only add edges. Ties go to the
    earliest candidate. The result is always re-verified from first principles.
    """
    config = config or SearchConfig()
    d = channel.dim
    ceiling = math.log2(d)
    candidates: list[tuple[str, InputEnsemble, Povm]] = []
    for i, (ens, povm) in enumerate(extra_candidates):
        if not ens.is_pure():
            ens = purify_ensemble(ens)
        candidates.append((f"given{i}", ens, povm))
    bases = candidate_bases(channel, config)
    for tag, basis in bases:
        ens = _basis_ensemble(tag, basis)
        for ptag, povm in candidate_povms(channel, ens, config.povm_strategies):
            candidates.append((f"{tag or 'comp'}/{ptag}", ens, povm))

    if not candidates:
        warnings.warn("no candidates configured; reporting rate 0", stacklevel=2)
        return _trivial_estimate(channel)

    best: CapacityEstimate | None = None
    for name, ens, povm in candidates:
        est = rate_for(channel, ens, povm, config.n_max, config.tol_prob, config.budget, name)
        if best is None or _beats(est.K, est.n_star, best.K, best.n_star):
            best = est
        if best.rate >= ceiling - 1e-12:
            break

    if config.augment and best.rate < ceiling - 1e-12:
        best = _augment(channel, best, bases, config)

    if not verify_estimate(channel, best, config.tol_prob):
        raise NumericalDisagreement(f"code from candidate {best.candidate} failed re-verification")
    return best


def _augment(channel, best: CapacityEstimate, bases, config: SearchConfig) -> CapacityEstimate:
    """Greedily add non-orthogonal pure states while they raise the rate."""
    pool = [(f"{tag or 'c'}.{k}", basis[:, k]) for tag, basis in bases for k in range(basis.shape[1])]
    ptag = best.candidate.rsplit("/", 1)[-1]
    strategy = {"avg": "average-output", "supp": "support", "comp": "computational"}.get(ptag)
    for label, vec in pool:
        if len(best.ensemble) >= config.max_ensemble_size:
            break
        rho = DensityOperator.from_pure(PureState(vec))
        if any(abs(np.vdot(vec, s.matrix @ vec) - 1) < 1e-9 for s in best.ensemble.states):
            continue
        ens = InputEnsemble(best.ensemble.states + (rho,), best.ensemble.labels + (label,))
        povm = candidate_povms(channel, ens, (strategy,))[0][1] if strategy else best.povm
        est = rate_for(channel, ens, povm, config.n_max, config.tol_prob, config.budget,
                       best.candidate + "+aug")
        if _beats(est.K, est.n_star, best.K, best.n_star):
            best = est
    return best


@dataclass(frozen=True, eq=False)
class DichotomyResult:
    bits: int
    heuristic: bool
    witness: tuple | None = None


def qubit_dichotomy(channel: KrausChannel, config: SearchConfig | None = None) -> DichotomyResult:
    """1 if some candidate orthonormal pair stays perfectly distinguishable, else 0.

    A 1 comes with a witness pair and is certain. A 0 only means the finite
    search found nothing, so it is flagged ``heuristic``.
    """
    if channel.dim != 2:
        raise ValueError(f"qubit_dichotomy needs a qubit channel, got dimension {channel.dim}")
    config = config or SearchConfig()
    for _, basis in candidate_bases(channel, config):
        r0 = DensityOperator.from_pure(PureState(basis[:, 0]))
        r1 = DensityOperator.from_pure(PureState(basis[:, 1]))
        if orthogonal_outputs(channel, r0, r1):
            return DichotomyResult(1, False, (basis[:, 0].copy(), basis[:, 1].copy()))
    return DichotomyResult(0, True, None)


@dataclass(frozen=True)
class Prop1Report:
    holds: bool
    edges: int
    rate_n1: float
    consistent: bool


def verify_proposition_1(channel: KrausChannel, ensemble: InputEnsemble, povm: Povm,
                         tol_prob: float = TOL_PROB) -> Prop1Report:
    """Positive one-shot rate iff the characteristic graph has an edge."""
    est = rate_for(channel, ensemble, povm, 1, tol_prob)
    has_edge = bool(est.graph.edges)
    return Prop1Report(has_edge, len(est.graph.edges), est.rate, has_edge == (est.rate > 0))


@dataclass
class PairReport:
    pairs_tested: int = 0
    non_adjacent_pairs: int = 0
    orthogonal_pairs: int = 0
    max_overlap: float = 0.0
    violations: list = field(default_factory=list)
    pure_non_adjacent: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _trial_pair(channel, basis, rng):
    """Two input states, plus their vectors when both are pure."""
    d = channel.dim
    kind = int(rng.integers(4))
    if kind == 0 and d >= 2:
        i, j = rng.choice(d, size=2, replace=False)
        v1, v2 = basis[:, i], basis[:, j]
    elif kind <= 1:
        v1 = basis[:, int(rng.integers(d))]
        v2 = sampling.random_pure_state(d, rng).amplitudes
    else:
        if kind == 2 and d >= 2:
            # mixtures over disjoint sets of basis vectors
            perm = rng.permutation(d)
            cut = int(rng.integers(1, d))
            blocks = perm[:cut], perm[cut:]
        else:
            blocks = np.arange(d), np.arange(d)
        rhos = []
        for blk in blocks:
            w = rng.random(len(blk)) + 0.05
            w /= w.sum()
            m = sum(wk * np.outer(basis[:, k], basis[:, k].conj()) for wk, k in zip(w, blk))
            rhos.append(DensityOperator(m))
        return rhos[0], rhos[1], None
    return (DensityOperator.from_pure(PureState(v1)), DensityOperator.from_pure(PureState(v2)),
            (v1, v2))


def _pair_povms(channel, rho1, rho2, basis, rng) -> list[Povm]:
    d = channel.dim
    return [
        support_povm(channel, rho1),
        support_povm(channel, rho2),
        Povm.projective(basis),
        Povm.computational(d),
        sampling.random_projective_povm(d, rng),
    ]


def _coarse_grain_check(channel, rho1, rho2, povm, tol_prob) -> str | None:
    """The two-outcome merge of a separating POVM must be a perfect test."""
    sets = a_sets(channel, InputEnsemble((rho1, rho2)), povm, tol_prob)
    first = sorted(sets[0].outcomes)
    second = [j for j in range(len(povm)) if j not in sets[0].outcomes]
    if not first or not second:
        return "separating POVM has an empty block"
    merged = coarse_povm(povm, (first, second))
    s1, s2 = apply_channel(channel, rho1), apply_channel(channel, rho2)
    p1 = float(np.real(np.trace(s1.matrix @ merged.elements[0])))
    p2 = float(np.real(np.trace(s2.matrix @ merged.elements[1])))
    if abs(p1 - 1) > TOL_NUM or abs(p2 - 1) > TOL_NUM:
        return f"coarse-grained POVM is not perfect: p1={p1:.12g}, p2={p2:.12g}"
    return None


def check_pure_pair(channel: KrausChannel, v1, v2) -> list[str]:
    """Orthogonality and the contraction chain for a non-adjacent pure pair."""
    u, w = PureState(v1), PureState(v2)
    r1, r2 = u.density(), w.density()
    problems = []
    ov = abs(overlap(u, w))
    if ov > TOL_ORTH:
        problems.append(f"non-adjacent pure states overlap |<v1|v2>| = {ov:.3g}")
    d_in = trace_distance(r1, r2)
    d_out = trace_distance(apply_channel(channel, r1), apply_channel(channel, r2))
    if not (1 + TOL_NUM >= d_in >= d_out - TOL_NUM and abs(d_out - 1) <= TOL_NUM):
        problems.append(f"contraction chain fails: D(in)={d_in:.12g}, D(out)={d_out:.12g}")
    return problems


def _resolve_trial(channel, dims, t, rng):
    if channel is None:
        d = dims[t % len(dims)]
        return sampling.random_trial_channel(d, rng)
    if rng.random() < 0.5:
        bases = candidate_bases(channel, SearchConfig(random_bases=0))
        return channel, bases[int(rng.integers(len(bases)))][1]
    return channel, sampling.random_unitary(channel.dim, rng)


def verify_proposition_2(channel: KrausChannel | None = None, trials: int = 100, seed: int = 0,
                         dims: Sequence[int] = (2, 3, 4), tol_prob: float = TOL_PROB) -> PairReport:
    """Randomized check that non-adjacency and orthogonal output supports coincide.

    With ``channel=None`` every trial draws a fresh channel of dimension cycling
    through ``dims``. One direction: whenever some tested POVM separates the pair,
    the outputs must be orthogonal and merging that POVM into two outcomes must give
    a perfect test. Other direction: orthogonal outputs must be separated by the
    support-projector POVM.
    """
    rng = np.random.default_rng(seed)
    report = PairReport()
    for t in range(trials):
        ch, basis = _resolve_trial(channel, dims, t, rng)
        rho1, rho2, vecs = _trial_pair(ch, basis, rng)
        report.pairs_tested += 1
        try:
            orth = orthogonal_outputs(ch, rho1, rho2)
        except NumericalDisagreement as exc:
            report.violations.append(f"trial {t}: {exc}")
            continue
        report.orthogonal_pairs += orth
        separating = [p for p in _pair_povms(ch, rho1, rho2, basis, rng) if non_adjacent(ch, rho1, rho2, p, tol_prob)]
        if separating:
            report.non_adjacent_pairs += 1
            if not orth:
                report.violations.append(f"trial {t} ({ch.label}): non-adjacent but outputs not orthogonal")
            for p in separating:
                msg = _coarse_grain_check(ch, rho1, rho2, p, tol_prob)
                if msg:
                    report.violations.append(f"trial {t} ({ch.label}): {msg}")
            if vecs is not None:
                report.pure_non_adjacent.append((ch, vecs[0], vecs[1]))
                report.max_overlap = max(report.max_overlap, abs(np.vdot(vecs[0], vecs[1])))
        elif orth:
            report.violations.append(f"trial {t} ({ch.label}): orthogonal outputs but support POVM fails")
    return report


def verify_proposition_4(channel: KrausChannel | None = None, trials: int = 200, seed: int = 0,
                         dims: Sequence[int] = (2, 3, 4), tol_prob: float = TOL_PROB) -> PairReport:
    """Every non-adjacent pure pair found is orthogonal and obeys the contraction chain."""
    rng = np.random.default_rng(seed)
    report = PairReport()
    for t in range(trials):
        ch, basis = _resolve_trial(channel, dims, t, rng)
        rho1, rho2, vecs = _trial_pair(ch, basis, rng)
        if vecs is None:
            continue
        report.pairs_tested += 1
        d_in, d_out = trace_distance(rho1, rho2), trace_distance(apply_channel(ch, rho1), apply_channel(ch, rho2))
        if d_out > d_in + TOL_NUM:
            report.violations.append(f"trial {t}: channel expanded trace distance {d_in:.12g} -> {d_out:.12g}")
        if not any(non_adjacent(ch, rho1, rho2, p, tol_prob) for p in _pair_povms(ch, rho1, rho2, basis, rng)):
            continue
        report.non_adjacent_pairs += 1
        report.pure_non_adjacent.append((ch, vecs[0], vecs[1]))
        report.max_overlap = max(report.max_overlap, abs(np.vdot(vecs[0], vecs[1])))
        report.violations.extend(f"trial {t}: {m}" for m in check_pure_pair(ch, *vecs))
    return report


@dataclass(frozen=True)
class Prop3Report:
    edges_original: int
    edges_purified: int
    edges_preserved: bool
    omega_original: tuple
    omega_purified: tuple

    @property
    def holds(self) -> bool:
        return self.edges_preserved and all(
            b >= a for (_, a), (_, b) in zip(self.omega_original, self.omega_purified)
        )


def verify_proposition_3(channel: KrausChannel, mixed_ensemble: InputEnsemble, povm: Povm,
                         n_values: Sequence[int] = (1, 2), tol_prob: float = TOL_PROB) -> Prop3Report:
    """Purifying an ensemble keeps every edge and never lowers a clique number."""
    pure = purify_ensemble(mixed_ensemble)
    g0 = build_characteristic_graph(channel, mixed_ensemble, povm, tol_prob)
    g1 = build_characteristic_graph(channel, pure, povm, tol_prob)

    def omegas(g):
        return tuple((n, clique_number(graph_power(g, n)).size if g.edges else 1) for n in n_values)

    return Prop3Report(
        edges_original=len(g0.edges),
        edges_purified=len(g1.edges),
        edges_preserved=g0.edges <= g1.edges,
        omega_original=omegas(g0),
        omega_purified=omegas(g1),
    )


PROP3_ZOO = ("pentagon", "identity-d3", "bitflip-q0.5", "depolarizing-p0.3", "depolarizing-p1")


def random_mixed_ensemble(dim: int, rng, max_states: int = 5) -> InputEnsemble:
    """Mixtures of a few computational basis states each, occasionally fully mixed-up."""
    rng = sampling.rng_from(rng)
    states = []
    for _ in range(int(rng.integers(2, max_states + 1))):
        if rng.random() < 0.2:
            states.append(sampling.random_density(dim, rng))
            continue
        r = int(rng.integers(1, min(dim, 2) + 1))
        idx = rng.choice(dim, size=r, replace=False)
        w = rng.random(r) + 0.1
        m = np.zeros((dim, dim), dtype=np.complex128)
        m[idx, idx] = w / w.sum()
        states.append(DensityOperator(m))
    return InputEnsemble(tuple(states))


def run_proposition_3_suite(trials: int = 100, seed: int = 0, zoo: Sequence[str] = PROP3_ZOO,
                            n_values: Sequence[int] = (1, 2)) -> list[tuple[str, Prop3Report]]:
    from .channel_zoo import zoo_problem

    rng = np.random.default_rng(seed)
    out = []
    for t in range(trials):
        name = zoo[t % len(zoo)]
        channel, _, povm = zoo_problem(name)
        ens = random_mixed_ensemble(channel.dim, rng)
        out.append((name, verify_proposition_3(channel, ens, povm, n_values)))
    return out


def certificate_is_valid(estimate: CapacityEstimate) -> bool:
    """The certificate is a clique of the stated size in the n_star-th power."""
    g = graph_power(estimate.graph, estimate.n_star) if estimate.graph.edges else estimate.graph
    cert = estimate.certificate
    if not estimate.graph.edges:
        return cert.size == 1
    return cert.size == len(cert.vertices) == estimate.K and is_clique(g, cert.vertices)
