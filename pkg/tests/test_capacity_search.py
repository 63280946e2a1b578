import math
from itertools import combinations

import numpy as np
import pytest

from qzec import sampling
from qzec.capacity_search import (
    SearchConfig,
    candidate_bases,
    certificate_is_valid,
    estimate_capacity,
    qubit_dichotomy,
    random_mixed_ensemble,
    rate_for,
    run_proposition_3_suite,
    verify_estimate,
    verify_proposition_1,
    verify_proposition_2,
    verify_proposition_3,
    verify_proposition_4,
)
from qzec.channel_zoo import (
    ClassicalDmc,
    bitflip_channel,
    depolarizing_channel,
    embed_classical_dmc,
    identity_channel,
    zoo_problem,
)
from qzec.distinguishability import InputEnsemble, output_probabilities
from qzec.graph_engine import build_characteristic_graph, clique_number, graph_power, shannon_graph
from qzec.quantum_core import DensityOperator, Povm, apply_channel, tensor, tensor_channel, tensor_povm

HALF_LOG2_5 = 0.5 * math.log2(5)


class TestRateFor:
    def test_identity_qubit(self):
        est = rate_for(identity_channel(2), InputEnsemble.computational(2), Povm.computational(2), 2)
        assert (est.rate, est.n_star, est.K) == (1.0, 1, 2)

    def test_pentagon(self):
        est = rate_for(*zoo_problem("pentagon"), n_max=2)
        assert est.n_star == 2 and est.K == 5
        assert est.rate == pytest.approx(1.160964047443681, abs=1e-12)
        assert dict(est.omega_by_n) == {1: 2, 2: 5}
        assert certificate_is_valid(est) and verify_estimate(zoo_problem("pentagon")[0], est)

    def test_depolarizing(self):
        est = rate_for(depolarizing_channel(2, 1), InputEnsemble.computational(2), Povm.computational(2), 2)
        assert est.rate == 0.0 and est.K == 1 and est.n_star == 1

    def test_monotone_in_n_max(self):
        ch, ens, povm = zoo_problem("pentagon")
        rates = [rate_for(ch, ens, povm, n).rate for n in (1, 2, 3)]
        assert rates == sorted(rates)
        assert rates[0] == 1.0

    def test_n_max_zero(self):
        with pytest.raises(ValueError):
            rate_for(identity_channel(2), InputEnsemble.computational(2), Povm.computational(2), 0)

    def test_matches_classical_pipeline(self, rng):
        for _ in range(10):
            t = sampling.random_stochastic(int(rng.integers(2, 6)), int(rng.integers(2, 6)), rng)
            ch, ens, povm = embed_classical_dmc(ClassicalDmc(t))
            est = rate_for(ch, ens, povm, 2)
            g = shannon_graph(t)
            assert est.graph.edges == g.edges
            k2 = clique_number(graph_power(g, 2)).size if g.edges else 1
            assert dict(est.omega_by_n)[2] == k2


def _product_law_instance(rng):
    d = int(rng.integers(2, 4))
    ch, basis = sampling.random_trial_channel(d, rng)
    l = int(rng.integers(2, 5))
    vecs = [basis[:, k % d] if rng.random() < 0.7 else sampling.random_pure_state(d, rng).amplitudes
            for k in range(l)]
    ens = InputEnsemble.from_vectors(vecs)
    povm = Povm.projective(basis) if rng.random() < 0.5 else Povm.computational(d)
    return ch, ens, povm


def test_product_law_against_tensor_statistics(rng):
    """Edges of G^2 are exactly the pairs of two-letter codewords with disjoint output supports."""
    seen_edges = 0
    for _ in range(15):
        ch, ens, povm = _product_law_instance(rng)
        g2 = graph_power(build_characteristic_graph(ch, ens, povm), 2)
        big_ch, big_povm = tensor_channel([ch, ch]), tensor_povm([povm, povm])
        l = len(ens)
        supports = []
        for a in range(l * l):
            rho = tensor([ens.states[a // l], ens.states[a % l]])
            probs = output_probabilities(apply_channel(big_ch, rho), big_povm)
            supports.append(set(np.flatnonzero(probs > 1e-9)))
        for a, b in combinations(range(l * l), 2):
            assert g2.adjacent(a, b) == supports[a].isdisjoint(supports[b])
        seen_edges += len(g2.edges)
    assert seen_edges > 0


class TestEstimateCapacity:
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_identity(self, d):
        est = estimate_capacity(identity_channel(d))
        assert est.rate == math.log2(d) and est.n_star == 1

    def test_pentagon(self):
        ch, _, _ = zoo_problem("pentagon")
        est = estimate_capacity(ch)
        assert est.rate >= HALF_LOG2_5 - 1e-12
        assert est.note == "certified lower bound"

    def test_depolarizing(self):
        assert estimate_capacity(depolarizing_channel(2, 1)).rate == 0.0

    def test_candidates_are_pure(self):
        ch, _, _ = zoo_problem("pentagon")
        mixed = InputEnsemble((DensityOperator(np.diag([0.5, 0.5, 0, 0, 0])),
                               DensityOperator(np.diag([0, 0, 0.5, 0.5, 0]))))
        est = estimate_capacity(ch, SearchConfig(ensemble_strategies=(), povm_strategies=()),
                                [(mixed, Povm.computational(5))])
        assert est.ensemble.is_pure() and est.rate == 1.0

    def test_empty_candidates_warn(self):
        with pytest.warns(UserWarning):
            est = estimate_capacity(identity_channel(2), SearchConfig(ensemble_strategies=()))
        assert est.rate == 0.0

    def test_deterministic(self):
        ch = sampling.random_channel(3, 2, 7)
        a, b = estimate_capacity(ch, SearchConfig(seed=3)), estimate_capacity(ch, SearchConfig(seed=3))
        assert (a.rate, a.candidate, a.certificate) == (b.rate, b.candidate, b.certificate)

    def test_dimension_ceiling(self, rng):
        for d in (2, 3, 4):
            ch, _ = sampling.random_trial_channel(d, rng)
            assert estimate_capacity(ch, SearchConfig(random_bases=2)).rate <= math.log2(d) + 1e-12

    def test_monotone_in_candidates(self, rng):
        ch, _ = sampling.structured_channel(4, rng)
        small = estimate_capacity(ch, SearchConfig(ensemble_strategies=("computational",)))
        large = estimate_capacity(ch)
        assert large.rate >= small.rate

    def test_augment_never_hurts(self):
        ch, _, _ = zoo_problem("pentagon")
        plain = estimate_capacity(ch, SearchConfig(n_max=1))
        aug = estimate_capacity(ch, SearchConfig(n_max=1, augment=True))
        assert aug.rate >= plain.rate

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SearchConfig(n_max=0)
        with pytest.raises(ValueError):
            SearchConfig(log_base=10)
        with pytest.raises(ValueError):
            SearchConfig(povm_strategies=("sdp",))

    def test_bitflip_found_via_kraus_basis(self):
        tags = [t for t, _ in candidate_bases(bitflip_channel(0.5), SearchConfig())]
        assert any(t.startswith("k") for t in tags)
        assert estimate_capacity(bitflip_channel(0.5)).rate == 1.0


class TestQubitDichotomy:
    def test_identity(self):
        assert qubit_dichotomy(identity_channel(2)).bits == 1

    def test_depolarizing(self):
        res = qubit_dichotomy(depolarizing_channel(2, 1))
        assert res.bits == 0 and res.heuristic

    def test_bitflip(self):
        res = qubit_dichotomy(bitflip_channel(0.5))
        assert res.bits == 1 and not res.heuristic
        v0, v1 = res.witness
        assert abs(np.vdot(v0, v1)) < 1e-12

    def test_needs_qubit(self):
        with pytest.raises(ValueError):
            qubit_dichotomy(identity_channel(3))


class TestPropositionValidators:
    def test_prop1(self):
        assert verify_proposition_1(identity_channel(2), InputEnsemble.computational(2), Povm.computational(2)).holds
        rep = verify_proposition_1(depolarizing_channel(2, 1), InputEnsemble.computational(2), Povm.computational(2))
        assert not rep.holds and rep.consistent
        rep = verify_proposition_1(*zoo_problem("pentagon"))
        assert rep.holds and rep.edges == 5 and rep.consistent

    def test_prop2_identity(self):
        rep = verify_proposition_2(identity_channel(2), trials=100, seed=1)
        assert rep.ok and rep.non_adjacent_pairs > 0

    def test_prop2_random(self):
        rep = verify_proposition_2(None, trials=100, seed=2, dims=(3,))
        assert rep.ok and rep.non_adjacent_pairs > 0

    def test_prop2_depolarizing(self):
        rep = verify_proposition_2(depolarizing_channel(2, 1), trials=100, seed=3)
        assert rep.ok and rep.non_adjacent_pairs == 0 and rep.orthogonal_pairs == 0

    def test_prop3_pure_unchanged(self):
        ch, ens, povm = zoo_problem("pentagon")
        rep = verify_proposition_3(ch, ens, povm)
        assert rep.holds and rep.edges_original == rep.edges_purified == 5

    def test_prop3_pentagon_blocks(self):
        ch, _, povm = zoo_problem("pentagon")
        mixtures = []
        for i in range(5):
            m = np.zeros((5, 5))
            m[i, i], m[(i + 1) % 5, (i + 1) % 5] = 0.6, 0.4
            mixtures.append(DensityOperator(m))
        rep = verify_proposition_3(ch, InputEnsemble(tuple(mixtures)), povm)
        # oracle: mixed A-sets {i, i+1, i+2} pairwise intersect in a 5-cycle; pure ones give C5
        assert rep.edges_original == 0 and rep.edges_purified == 5
        assert rep.omega_purified == ((1, 2), (2, 5)) and rep.holds

    def test_prop3_depolarizing(self, rng):
        ch = depolarizing_channel(2, 1)
        rep = verify_proposition_3(ch, random_mixed_ensemble(2, rng), Povm.computational(2))
        assert rep.edges_original == rep.edges_purified == 0 and rep.holds

    def test_prop3_suite(self):
        assert all(r.holds for _, r in run_proposition_3_suite(25, seed=4))

    def test_prop4_identity(self):
        rep = verify_proposition_4(identity_channel(3), trials=100, seed=5)
        assert rep.ok and rep.non_adjacent_pairs > 0 and rep.max_overlap < 1e-12

    def test_prop4_pentagon(self):
        rep = verify_proposition_4(zoo_problem("pentagon")[0], trials=100, seed=6)
        assert rep.ok and rep.non_adjacent_pairs > 0

    def test_prop4_random(self):
        rep = verify_proposition_4(None, trials=200, seed=7, dims=(4,))
        assert rep.ok and rep.non_adjacent_pairs > 0
