import json

import numpy as np
import pytest

from cvwitness import (
    CovarianceMatrix,
    NotStandardFormError,
    TwoModeStandardParams,
    aitken_factorize,
    gaussian_purity,
    partial_transpose_bob,
    partition,
    random_standard,
    random_two_mode_params,
    schur_complement,
    split_standard,
    standard_form_reduce_two_mode,
    symplectic_eigenvalues,
    symplectic_form,
    thermal,
    tmsv,
    two_mode_symplectic_pair,
    two_mode_symplectic_pair_pt,
    vacuum,
    validate_bona_fide,
)
from conftest import product_cm, rotated


class TestCovarianceMatrix:
    def test_rejects_non_square(self):
        with pytest.raises(ValueError, match="square"):
            CovarianceMatrix(np.ones((2, 3)))

    def test_rejects_odd_size(self):
        with pytest.raises(ValueError, match="2n x 2n"):
            CovarianceMatrix(np.eye(3))

    def test_rejects_asymmetric(self):
        m = np.eye(4)
        m[0, 1] = 1e-6
        with pytest.raises(ValueError, match="symmetric"):
            CovarianceMatrix(m)

    def test_rejects_non_finite(self):
        m = np.eye(4)
        m[0, 0] = np.nan
        with pytest.raises(ValueError, match="finite"):
            CovarianceMatrix(m)

    def test_rejects_bad_n_alice(self):
        with pytest.raises(ValueError, match="n_alice"):
            CovarianceMatrix(np.eye(4), n_alice=2)

    def test_block_ordering_round_trip(self, rng):
        v = random_standard(3, seed=5)
        again = CovarianceMatrix(v.block_matrix, ordering="block")
        np.testing.assert_allclose(again.matrix, v.matrix, rtol=0, atol=0)

    def test_json_round_trip(self, tmp_path):
        v = tmsv(0.37)
        path = tmp_path / "cm.json"
        v.save(path)
        back = CovarianceMatrix.load(path)
        np.testing.assert_allclose(back.matrix, v.matrix, rtol=0, atol=0)
        assert back.n_modes == 2 and back.n_alice == 1

    def test_load_block_ordering_file(self, tmp_path):
        v = random_standard(2, seed=8)
        payload = {
            "n_modes": 2,
            "n_alice": 1,
            "ordering": "block",
            "matrix": v.block_matrix.tolist(),
        }
        path = tmp_path / "blk.json"
        path.write_text(json.dumps(payload))
        back = CovarianceMatrix.load(path)
        np.testing.assert_allclose(back.matrix, v.matrix, atol=1e-15)

    def test_malformed_record(self):
        with pytest.raises(ValueError, match="malformed"):
            CovarianceMatrix.from_dict({"n_modes": 2})


class TestValidateBonaFide:
    def test_vacuum_saturates(self):
        report = validate_bona_fide(vacuum(3))
        assert report.bona_fide
        assert abs(report.min_rs_eigenvalue) < 1e-12

    def test_sub_vacuum_violates(self):
        report = validate_bona_fide(0.25 * np.eye(2))
        assert report.symmetric and report.positive_definite
        assert not report.rs_ur_satisfied
        assert report.min_rs_eigenvalue == pytest.approx(-0.25, abs=1e-12)

    def test_tmsv_is_physical(self):
        report = validate_bona_fide(tmsv(0.5))
        assert report.bona_fide

    def test_asymmetric_raw_input_flagged(self):
        m = 0.5 * np.eye(4)
        m[0, 1] = 1e-3
        report = validate_bona_fide(m)
        assert not report.symmetric

    def test_non_finite_raises(self):
        m = np.eye(4)
        m[2, 2] = np.inf
        with pytest.raises(ValueError, match="finite"):
            validate_bona_fide(m)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            validate_bona_fide(np.eye(3))


class TestSymplecticEigenvalues:
    def test_vacuum(self):
        np.testing.assert_allclose(symplectic_eigenvalues(vacuum(2)), [0.5, 0.5])

    def test_product_state_reads_diagonals(self):
        vals = symplectic_eigenvalues(product_cm(1.0, 0.7))
        np.testing.assert_allclose(vals, [1.0, 0.7], atol=1e-12)

    def test_tmsv_is_pure(self):
        # analytic spectrum of the two-mode squeezed vacuum: both 1/2
        vals = symplectic_eigenvalues(tmsv(0.5))
        np.testing.assert_allclose(vals, [0.5, 0.5], atol=1e-10)

    def test_rejects_non_positive_definite(self):
        m = np.diag([1.0, 1.0, -0.1, 1.0])
        with pytest.raises(np.linalg.LinAlgError, match="positive definite"):
            symplectic_eigenvalues(m)

    def test_matches_two_mode_closed_form(self):
        # general eigensolver route vs the discriminant formulas
        for seed in range(100):
            params = random_two_mode_params(seed=seed)
            cm = params.to_covariance_matrix()
            got = symplectic_eigenvalues(cm)
            want = two_mode_symplectic_pair(params)[::-1]
            np.testing.assert_allclose(got, want, atol=1e-10)
            got_pt = symplectic_eigenvalues(partial_transpose_bob(cm))
            want_pt = two_mode_symplectic_pair_pt(params)[::-1]
            np.testing.assert_allclose(got_pt, want_pt, atol=1e-10)


class TestPartialTranspose:
    def test_product_cm_unchanged(self):
        cm = product_cm(1.3, 0.8)
        np.testing.assert_allclose(partial_transpose_bob(cm).matrix, cm.matrix)

    def test_tmsv_flips_momentum_correlation(self):
        r = 0.5
        flipped = partial_transpose_bob(tmsv(r))
        assert flipped.matrix[1, 3] == pytest.approx(np.sinh(2 * r) / 2)
        assert flipped.matrix[0, 2] == pytest.approx(np.sinh(2 * r) / 2)

    def test_involution(self, rng):
        for seed in range(5):
            cm = random_standard(3, seed=seed)
            twice = partial_transpose_bob(partial_transpose_bob(cm))
            np.testing.assert_allclose(twice.matrix, cm.matrix, rtol=0, atol=0)

    def test_preserves_symmetry_and_definiteness(self):
        for seed in range(5):
            cm = random_standard(2, seed=seed)
            pt = partial_transpose_bob(cm)
            assert np.allclose(pt.matrix, pt.matrix.T)
            assert np.linalg.eigvalsh(pt.matrix).min() > 0


class TestSplitStandard:
    def test_vacuum(self):
        sf = split_standard(vacuum(2))
        np.testing.assert_allclose(sf.vq, 0.5 * np.eye(2))
        np.testing.assert_allclose(sf.vp, 0.5 * np.eye(2))

    def test_off_diagonal_signs_for_tmsv(self):
        sf = split_standard(tmsv(0.3))
        assert sf.vq[0, 1] == pytest.approx(np.sinh(0.6) / 2)
        assert sf.vp[0, 1] == pytest.approx(-np.sinh(0.6) / 2)

    def test_rejects_qp_correlations(self):
        m = 0.5 * np.eye(4)
        m[0, 3] = m[3, 0] = 0.1
        with pytest.raises(NotStandardFormError) as err:
            split_standard(CovarianceMatrix(m), tol=1e-9)
        assert err.value.max_qp_entry == pytest.approx(0.1)

    def test_det_factorization(self, assorted_cms):
        for cm in assorted_cms:
            sf = split_standard(cm)
            det_v = np.linalg.det(cm.matrix)
            det_split = np.linalg.det(sf.vq) * np.linalg.det(sf.vp)
            assert abs(det_v - det_split) / abs(det_v) < 1e-12

    def test_reconstruction(self):
        cm = tmsv(0.8)
        back = split_standard(cm).to_covariance_matrix()
        np.testing.assert_allclose(back.matrix, cm.matrix, atol=1e-15)


class TestPartition:
    def test_reassembly_exact(self):
        for seed in range(4):
            cm = random_standard(3, seed=seed)
            part = partition(cm)
            k = 2 * cm.n_alice
            rebuilt = np.block(
                [[part.alice, part.cross], [part.cross.T, part.bob]]
            )
            assert np.array_equal(rebuilt, cm.matrix)
            assert part.bob.shape == (2, 2)
            assert part.cross.shape == (k, 2)


class TestSchurComplement:
    def test_product_cm_gives_other_block(self):
        cm = product_cm(1.3, 0.8)
        np.testing.assert_allclose(schur_complement(cm, "B"), 1.3 * np.eye(2))
        np.testing.assert_allclose(schur_complement(cm, "A"), 0.8 * np.eye(2))

    def test_tmsv_over_alice(self):
        b = np.cosh(1.0) / 2
        got = schur_complement(tmsv(0.5), "A")
        np.testing.assert_allclose(got, np.eye(2) / (4 * b), atol=1e-14)

    def test_determinant_identity(self):
        for seed in range(100):
            cm = random_standard(np.random.default_rng(seed).integers(2, 5), seed=seed)
            det_v = np.linalg.det(cm.matrix)
            part = partition(cm)
            for over, block in (("B", part.bob), ("A", part.alice)):
                schur = schur_complement(cm, over)
                lhs = np.linalg.det(schur)
                rhs = det_v / np.linalg.det(block)
                assert abs(lhs - rhs) / abs(rhs) < 1e-12

    def test_singular_block_raises(self):
        m = np.diag([1.0, 1.0, 0.0, 0.0])
        with pytest.raises(np.linalg.LinAlgError, match="positive definite"):
            schur_complement(CovarianceMatrix(m), "B")

    def test_bad_over_value(self):
        with pytest.raises(ValueError, match="over"):
            schur_complement(vacuum(2), "C")


class TestAitkenFactorize:
    def test_product_cm(self):
        cm = product_cm(1.1, 0.9)
        t, d = aitken_factorize(cm)
        np.testing.assert_allclose(t, np.eye(4))
        np.testing.assert_allclose(d, cm.matrix)

    def test_reconstruction(self, assorted_cms):
        for cm in assorted_cms:
            if cm.n_modes < 2:
                continue
            t, d = aitken_factorize(cm)
            resid = np.abs(t @ d @ t.T - cm.matrix).max()
            assert resid < 1e-12 * max(np.abs(cm.matrix).max(), 1.0)

    def test_unimodular(self):
        cm = random_standard(3, seed=11)
        t, _ = aitken_factorize(cm)
        assert np.linalg.det(t) == 1.0

    def test_block_structure(self):
        cm = tmsv(0.5)
        t, d = aitken_factorize(cm)
        np.testing.assert_allclose(d[:2, 2:], 0.0, atol=0)
        np.testing.assert_allclose(t[2:, :2], 0.0, atol=0)
        np.testing.assert_allclose(d[2:, 2:], partition(cm).bob)


class TestTwoModeParams:
    def test_ordering_invariants(self):
        with pytest.raises(ValueError, match="b1 >= b2"):
            TwoModeStandardParams(0.7, 1.0, 0.0, 0.0)
        with pytest.raises(ValueError, match="b2 >= 1/2"):
            TwoModeStandardParams(1.0, 0.4, 0.0, 0.0)
        with pytest.raises(ValueError, match=r"c >= \|d\|"):
            TwoModeStandardParams(1.0, 0.8, 0.1, 0.3)

    def test_symplectic_pair_product_state(self):
        params = TwoModeStandardParams(1.0, 0.7, 0.0, 0.0)
        assert two_mode_symplectic_pair(params) == pytest.approx((0.7, 1.0))

    def test_negative_discriminant_rejected(self):
        # c >= |d| holds but the parameters are far from physical
        params = TwoModeStandardParams(1.0, 0.5, 1.0, -1.0)
        with pytest.raises(ValueError, match="discriminant"):
            two_mode_symplectic_pair(params)


class TestStandardFormReduce:
    def test_already_standard_tmsv(self):
        r = 0.5
        params, s_local = standard_form_reduce_two_mode(tmsv(r))
        assert params.b1 == pytest.approx(np.cosh(2 * r) / 2, abs=1e-12)
        assert params.b2 == pytest.approx(np.cosh(2 * r) / 2, abs=1e-12)
        assert params.c == pytest.approx(np.sinh(2 * r) / 2, abs=1e-12)
        assert params.d == pytest.approx(-np.sinh(2 * r) / 2, abs=1e-12)
        # s_local is a local symplectic: the transform must stay in standard
        # form with the same parameters
        w = s_local @ tmsv(r).matrix @ s_local.T
        np.testing.assert_allclose(np.abs(w), np.abs(tmsv(r).matrix), atol=1e-12)

    def test_round_trip_under_rotations(self, rng):
        for r in (0.2, 0.5, 1.1):
            cm = tmsv(r)
            for _ in range(5):
                thetas = rng.uniform(0, 2 * np.pi, size=2)
                params, s_local = standard_form_reduce_two_mode(rotated(cm, thetas))
                assert params.b1 == pytest.approx(np.cosh(2 * r) / 2, abs=1e-9)
                assert params.b2 == pytest.approx(np.cosh(2 * r) / 2, abs=1e-9)
                assert params.c == pytest.approx(np.sinh(2 * r) / 2, abs=1e-9)
                assert params.d == pytest.approx(-np.sinh(2 * r) / 2, abs=1e-9)

    def test_spectrum_preserved(self, rng):
        for seed in range(100):
            base = random_two_mode_params(seed=seed).to_covariance_matrix()
            cm = rotated(base, rng.uniform(0, 2 * np.pi, size=2))
            params, s_local = standard_form_reduce_two_mode(cm)
            want = symplectic_eigenvalues(cm)
            got = two_mode_symplectic_pair(params)[::-1]
            np.testing.assert_allclose(got, want, atol=1e-9)
            # the reduced matrix is genuinely standard form
            w = CovarianceMatrix(s_local @ cm.matrix @ s_local.T)
            sf = split_standard(w, tol=1e-8)
            assert abs(sf.vq[0, 1]) >= abs(sf.vp[0, 1]) - 1e-9

    def test_params_invariant_under_local_rotations(self, rng):
        base = random_two_mode_params(seed=77).to_covariance_matrix()
        ref, _ = standard_form_reduce_two_mode(base)
        for _ in range(10):
            cm = rotated(base, rng.uniform(0, 2 * np.pi, size=2))
            params, _ = standard_form_reduce_two_mode(cm)
            assert params.b1 == pytest.approx(ref.b1, abs=1e-9)
            assert params.b2 == pytest.approx(ref.b2, abs=1e-9)
            assert params.c == pytest.approx(ref.c, abs=1e-9)
            assert params.d == pytest.approx(ref.d, abs=1e-9)

    def test_rejects_non_physical(self):
        with pytest.raises(ValueError, match="bona fide"):
            standard_form_reduce_two_mode(CovarianceMatrix(0.25 * np.eye(4)))

    def test_rejects_wrong_mode_count(self):
        with pytest.raises(ValueError, match="two-mode"):
            standard_form_reduce_two_mode(vacuum(3))


class TestGaussianPurity:
    def test_vacuum_pure(self):
        assert gaussian_purity(vacuum(3)) == pytest.approx(1.0)

    def test_thermal_half(self):
        assert gaussian_purity(thermal([0.5])) == pytest.approx(0.5)

    def test_tmsv_pure_any_r(self):
        for r in (0.0, 0.4, 1.5):
            assert gaussian_purity(tmsv(r)) == pytest.approx(1.0, abs=1e-10)

    def test_non_positive_determinant(self):
        with pytest.raises(ValueError, match="determinant"):
            gaussian_purity(np.diag([1.0, -1.0, 1.0, 1.0]))


class TestGlobalInvariants:
    def test_williamson_bound_and_spectrum_floor(self, assorted_cms):
        for cm in assorted_cms:
            n = cm.n_modes
            assert np.linalg.det(cm.matrix) >= 2.0 ** (-2 * n) - 1e-12
            assert symplectic_eigenvalues(cm).min() >= 0.5 - 1e-10

    def test_symplectic_form_squares_to_minus_one(self):
        j = symplectic_form(3)
        np.testing.assert_allclose(j @ j, -np.eye(6))
