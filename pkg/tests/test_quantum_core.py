import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qzec import sampling
from qzec.channel_zoo import bitflip_channel, depolarizing_channel, identity_channel
from qzec.quantum_core import (
    TOL_NUM,
    TOL_RANK,
    TOL_RECON,
    DensityOperator,
    DimensionError,
    KrausChannel,
    Povm,
    PureState,
    ValidationError,
    apply_channel,
    overlap,
    spectral_decompose,
    support_projector,
    tensor,
    tensor_povm,
    trace_distance,
    validate_channel,
)

from conftest import KET0, KET1, KETP, dm, superop_apply

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestConstruction:
    def test_density_rejects_bad_trace(self):
        with pytest.raises(ValidationError, match="trace"):
            DensityOperator(np.eye(2))

    def test_density_rejects_non_hermitian(self):
        with pytest.raises(ValidationError, match="Hermitian"):
            DensityOperator(np.array([[0.5, 0.3], [0.0, 0.5]]))

    def test_density_rejects_negative(self):
        with pytest.raises(ValidationError, match="negative"):
            DensityOperator(np.diag([1.5, -0.5]))

    def test_density_rejects_nan(self):
        with pytest.raises(ValidationError, match="non-finite"):
            DensityOperator(np.array([[np.nan, 0], [0, 1]]))

    def test_values_are_read_only(self):
        rho = dm(KET0)
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 0

    def test_pure_state_norm(self):
        with pytest.raises(ValidationError, match="norm"):
            PureState([1, 1])

    def test_channel_rejects_incomplete(self):
        with pytest.raises(ValidationError, match="completeness"):
            KrausChannel((np.eye(2), np.eye(2)))

    def test_channel_rejects_empty(self):
        with pytest.raises(ValidationError):
            KrausChannel(())

    def test_povm_rejects_bad_sum(self):
        with pytest.raises(ValidationError, match="identity"):
            Povm((np.eye(2), np.eye(2)))

    def test_povm_rejects_negative_element(self):
        with pytest.raises(ValidationError, match="negative"):
            Povm((np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])))


class TestApplyChannel:
    def test_identity_channel_is_identity(self, rng):
        rho = sampling.random_density(3, rng)
        out = apply_channel(identity_channel(3), rho)
        np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-15)

    def test_bitflip_half_on_zero(self):
        # hand oracle: 1/2 |0><0| + 1/2 X|0><0|X = diag(1/2, 1/2)
        out = apply_channel(bitflip_channel(0.5), dm(KET0))
        np.testing.assert_allclose(out.matrix, np.diag([0.5, 0.5]), atol=1e-15)

    def test_full_depolarizing_on_zero(self):
        out = apply_channel(depolarizing_channel(2, 1.0), dm(KET0))
        np.testing.assert_allclose(out.matrix, np.eye(2) / 2, atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            apply_channel(identity_channel(3), dm(KET0))

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, d=st.integers(2, 4), k=st.integers(1, 4))
    def test_matches_superoperator_oracle(self, seed, d, k):
        rng = np.random.default_rng(seed)
        ch = sampling.random_channel(d, k, rng)
        rho = sampling.random_density(d, rng)
        expected = superop_apply(ch.operators, rho.matrix)
        np.testing.assert_allclose(apply_channel(ch, rho).matrix, expected, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, d=st.integers(2, 5), k=st.integers(1, 5))
    def test_preserves_trace_and_positivity(self, seed, d, k):
        rng = np.random.default_rng(seed)
        out = apply_channel(sampling.random_channel(d, k, rng), sampling.random_density(d, rng, rank=1))
        assert abs(np.trace(out.matrix).real - 1) <= 1e-8
        assert np.linalg.eigvalsh(out.matrix)[0] >= -1e-8

    @settings(max_examples=80, deadline=None)
    @given(seed=seeds, d=st.integers(2, 4), k=st.integers(1, 4))
    def test_contractivity(self, seed, d, k):
        rng = np.random.default_rng(seed)
        ch = sampling.random_channel(d, k, rng)
        r1 = sampling.random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        r2 = sampling.random_density(d, rng, rank=int(rng.integers(1, d + 1)))
        d_out = trace_distance(apply_channel(ch, r1), apply_channel(ch, r2))
        assert d_out <= trace_distance(r1, r2) + TOL_NUM


class TestValidateChannel:
    def test_identity_passes_exactly(self):
        rep = validate_channel(identity_channel(2))
        assert rep.passed and rep.deviation == 0.0

    def test_double_identity_fails(self):
        rep = validate_channel([np.eye(2), np.eye(2)])
        assert not rep.passed
        assert rep.deviation == pytest.approx(1.0)

    def test_empty_list_fails(self):
        assert not validate_channel([]).passed


class TestSpectral:
    def test_maximally_mixed(self):
        sd = spectral_decompose(DensityOperator.maximally_mixed(2))
        np.testing.assert_allclose(sd.eigenvalues, [0.5, 0.5])
        np.testing.assert_allclose(sd.reconstruct(), np.eye(2) / 2, atol=1e-15)

    def test_pure_zero(self):
        sd = spectral_decompose(dm(KET0))
        np.testing.assert_array_equal(sd.eigenvalues, [1.0, 0.0])
        np.testing.assert_allclose(sd.eigenvectors[0].amplitudes, KET0, atol=1e-15)

    def test_diagonal(self):
        sd = spectral_decompose(DensityOperator(np.diag([0.25, 0.75])))
        np.testing.assert_allclose(sd.eigenvalues, [0.75, 0.25])
        np.testing.assert_allclose(sd.eigenvectors[0].amplitudes, KET1, atol=1e-15)
        np.testing.assert_allclose(sd.eigenvectors[1].amplitudes, KET0, atol=1e-15)

    def test_phase_convention(self, rng):
        sd = spectral_decompose(sampling.random_density(4, rng))
        for v in sd.eigenvectors:
            k = int(np.argmax(np.abs(v.amplitudes)))
            assert abs(v.amplitudes[k].imag) < 1e-15 and v.amplitudes[k].real > 0

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError):
            spectral_decompose(np.array([[1, 1], [0, 0]]))

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, d=st.integers(1, 6))
    def test_reconstruction_and_orthonormality(self, seed, d):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        h = a + a.conj().T
        sd = spectral_decompose(h)
        assert np.max(np.abs(sd.reconstruct() - h)) <= TOL_RECON
        b = sd.basis_matrix()
        assert np.max(np.abs(b.conj().T @ b - np.eye(d))) <= 1e-10
        assert np.all(np.diff(sd.eigenvalues) <= 0)


class TestSupportProjector:
    def test_pure(self):
        np.testing.assert_allclose(support_projector(dm(KET0)), np.diag([1, 0]), atol=1e-15)

    def test_full_rank(self):
        np.testing.assert_allclose(support_projector(DensityOperator.maximally_mixed(2)), np.eye(2), atol=1e-15)

    def test_rank_two(self):
        p = support_projector(DensityOperator(np.diag([0.9, 0.1, 0.0])))
        np.testing.assert_allclose(p, np.diag([1, 1, 0]), atol=1e-15)

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, d=st.integers(2, 5), data=st.data())
    def test_idempotent_and_captures_state(self, seed, d, data):
        rng = np.random.default_rng(seed)
        rank = data.draw(st.integers(1, d))
        rho = sampling.random_density(d, rng, rank=rank)
        p = support_projector(rho)
        assert np.max(np.abs(p @ p - p)) <= TOL_NUM
        assert np.max(np.abs(p - p.conj().T)) <= TOL_NUM
        assert np.trace(rho.matrix @ p).real >= 1 - d * TOL_RANK
        assert round(np.trace(p).real) == rank


class TestTraceDistance:
    def test_self(self, rng):
        rho = sampling.random_density(3, rng)
        assert trace_distance(rho, rho) == 0.0

    def test_orthogonal(self):
        assert trace_distance(dm(KET0), dm(KET1)) == pytest.approx(1.0, abs=1e-15)

    def test_zero_plus(self):
        # oracle: eigenvalues of [[1/2, -1/2], [-1/2, -1/2]] are +-sqrt(1/2)
        assert trace_distance(dm(KET0), dm(KETP)) == pytest.approx(0.7071067811865476, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            trace_distance(dm(KET0), DensityOperator.maximally_mixed(3))

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, d=st.integers(2, 4))
    def test_metric_and_svd_oracle(self, seed, d):
        rng = np.random.default_rng(seed)
        a, b, c = (sampling.random_density(d, rng, rank=int(rng.integers(1, d + 1))) for _ in range(3))
        svd = 0.5 * np.linalg.svd(a.matrix - b.matrix, compute_uv=False).sum()
        assert trace_distance(a, b) == pytest.approx(svd, abs=1e-12)
        assert trace_distance(a, b) == trace_distance(b, a)
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + TOL_NUM


class TestTensorAndOverlap:
    def test_single(self):
        rho = dm(KETP)
        assert tensor([rho]) is rho

    def test_zero_one(self):
        m = tensor([dm(KET0), dm(KET1)]).matrix
        expected = np.zeros((4, 4))
        expected[1, 1] = 1
        np.testing.assert_array_equal(m, expected)

    def test_trace_multiplicative(self, rng):
        t = tensor([sampling.random_density(2, rng), sampling.random_density(3, rng)])
        assert t.dim == 6
        assert np.trace(t.matrix).real == pytest.approx(1.0, abs=1e-12)

    def test_empty(self):
        with pytest.raises(ValueError):
            tensor([])

    def test_tensor_povm_order(self):
        p = tensor_povm([Povm.computational(2), Povm.computational(3)])
        assert len(p) == 6 and p.dim == 6
        # outcome (1, 2) is index 1*3 + 2
        assert p.elements[5][5, 5] == 1

    def test_overlaps(self):
        z, o, p = PureState(KET0), PureState(KET1), PureState(KETP)
        assert overlap(z, z) == 1
        assert overlap(z, o) == 0
        assert overlap(z, p) == pytest.approx(np.sqrt(0.5))

    def test_overlap_is_conjugate_linear(self):
        u = PureState(np.array([1j, 0]))
        assert overlap(u, PureState(KET0)) == pytest.approx(-1j)
