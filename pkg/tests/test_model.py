import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypuio.errors import ValidationError
from hypuio.model import (NonlinearitySpec, PlantSpec, SectorBound, SpeedProfile, as_matrix,
                          build_sector_matrix, evaluate_rho, he, lipschitz_constant,
                          validate_sector_bound)


class TestAsMatrix:
    def test_scalar_becomes_1x1(self):
        assert as_matrix(3.0).shape == (1, 1)

    def test_nested_rows_are_kept(self):
        assert as_matrix([[1, 1]]).shape == (1, 2)
        assert as_matrix([[1], [1]]).shape == (2, 1)

    def test_flat_list_is_rejected(self):
        with pytest.raises(ValidationError, match="row-major"):
            as_matrix([1, 2, 3])

    def test_shape_check(self):
        with pytest.raises(ValidationError):
            as_matrix([[1, 2]], "C", shape=(2, None))


class TestSpeedProfile:
    def test_constant(self):
        prof = SpeedProfile.constant([np.sqrt(2), 2.0])
        np.testing.assert_allclose(prof(0.3), np.diag([np.sqrt(2), 2.0]))
        assert prof.diag(np.linspace(0, 1, 5)).shape == (5, 2)

    def test_example1_max_speed(self, plant1):
        # 1 + z^2 peaks at z = 1 with value 2, exp(-z) <= 1
        assert plant1.Lambda.max_speed(np.linspace(0, 1, 1001)) == pytest.approx(2.0)

    def test_samples_interpolate(self):
        z = np.linspace(0, 1, 101)
        prof = SpeedProfile.from_samples(z, 1.0 + z)
        assert prof.diag([0.255])[0, 0] == pytest.approx(1.255)

    def test_samples_need_enough_points(self):
        z = np.linspace(0, 1, 50)
        with pytest.raises(ValidationError, match="101"):
            SpeedProfile.from_samples(z, 1.0 + z)

    def test_samples_must_be_uniform(self):
        z = np.linspace(0, 1, 101) ** 2
        with pytest.raises(ValidationError, match="uniform"):
            SpeedProfile.from_samples(z, 1.0 + z)

    def test_nonpositive_speed_detected(self):
        prof = SpeedProfile.from_function(lambda z: 0.5 - z, 1)
        with pytest.raises(ValidationError, match="positive"):
            prof.check()


class TestSectorBound:
    def test_sector_matrix_scalar(self):
        M = build_sector_matrix(SectorBound(0.0, 0.5))
        np.testing.assert_array_equal(M, [[0.0, 0.5], [0.5, -1.0]])

    def test_form_matches_expanded_expression(self, rng):
        # [dy; df]' M [dy; df] = dy df - df^2 for U1 = 0, U2 = 1/2
        M = build_sector_matrix(SectorBound(0.0, 0.5))
        for dy, df in rng.normal(size=(20, 2)):
            v = np.array([dy, df])
            assert v @ M @ v == pytest.approx(dy * df - df * df)

    def test_symmetric(self, rng):
        U1 = rng.normal(size=(3, 3))
        M = build_sector_matrix(SectorBound(U1, U1 + np.eye(3)))
        np.testing.assert_array_equal(M, M.T)

    def test_check_rejects_negative_U1(self):
        with pytest.raises(ValidationError, match="U1"):
            SectorBound(-1.0, 1.0).check()

    def test_check_rejects_U2_not_above_U1(self):
        with pytest.raises(ValidationError, match="U2 - U1"):
            SectorBound(1.0, 1.0).check()

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            SectorBound(np.eye(2), 1.0)


class TestValidateSector:
    def test_tanh_inside(self):
        res = validate_sector_bound(NonlinearitySpec.tanh(0.0, 0.5), samples=41)
        assert res.ok and res.worst >= 0

    def test_identity_sits_on_boundary(self):
        # slope-one map: form dy df - df^2 vanishes identically
        res = validate_sector_bound(NonlinearitySpec(lambda y: y, SectorBound(0.0, 0.5)))
        assert res.ok
        assert res.worst == pytest.approx(0.0, abs=1e-12)

    def test_steeper_map_rejected(self):
        res = validate_sector_bound(NonlinearitySpec(lambda y: 1.5 * y, SectorBound(0.0, 0.5)))
        assert not res.ok and res.worst < 0

    def test_vector_tanh(self):
        spec = NonlinearitySpec(np.tanh, SectorBound(np.zeros((2, 2)), 0.5 * np.eye(2)))
        assert validate_sector_bound(spec, samples=15).ok


class TestLipschitz:
    def test_unit_sector(self):
        assert lipschitz_constant(SectorBound(0.0, 0.5)) == pytest.approx(2.0)

    def test_shifted_sector(self):
        assert lipschitz_constant(SectorBound(1.0, 2.0)) == pytest.approx(32 / 5)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-4, 4), min_size=3, max_size=3),
           st.lists(st.floats(-4, 4), min_size=3, max_size=3))
    def test_rho_bounded_by_lipschitz(self, x, e):
        spec = NonlinearitySpec.tanh(0.0, 0.5)
        T = np.array([[1.0, 0.5, 0.0]])
        rho = evaluate_rho(spec, T, np.array(x), np.array(e))
        ell = lipschitz_constant(spec.bound)
        te = T @ np.array(e)
        assert rho @ rho <= ell * (te @ te) + 1e-12


class TestRho:
    def test_zero_error(self):
        spec = NonlinearitySpec.tanh()
        assert evaluate_rho(spec, [[1.0, 0.0]], np.array([0.3, -2.0]), np.zeros(2)) == 0.0

    def test_definition(self):
        spec = NonlinearitySpec.tanh()
        x, e = np.array([0.3, 1.0]), np.array([0.1, 0.0])
        assert evaluate_rho(spec, [[1.0, 0.0]], x, e)[0] == pytest.approx(
            np.tanh(0.3) - np.tanh(0.2))

    def test_shape_error(self):
        with pytest.raises(ValidationError):
            evaluate_rho(NonlinearitySpec.tanh(), [[1.0, 0.0]], np.zeros(3), np.zeros(3))


class TestPlantSpec:
    def test_example_dimensions(self, plant1, plant2):
        for p in (plant1, plant2):
            assert (p.n_x, p.n_chi, p.n_u, p.n_w, p.n_y1, p.n_y2, p.n_t) == (2, 3, 1, 1, 1, 2, 1)
            p.check()

    def test_example1_data(self, plant1):
        np.testing.assert_array_equal(plant1.S, [[1], [0]])
        np.testing.assert_array_equal(plant1.T, [[1, 0]])
        np.testing.assert_array_equal(plant1.C, [[1, 1]])
        np.testing.assert_allclose(plant1.Lambda(0.5), np.diag([1.25, np.exp(-0.5)]))

    def test_example2_data(self, plant2):
        np.testing.assert_array_equal(plant2.E, [[0], [0], [1]])
        np.testing.assert_array_equal(plant2.T, [[0, 1]])
        np.testing.assert_array_equal(plant2.C, [[1, 0]])
        np.testing.assert_allclose(plant2.Lambda(0.2), np.diag([np.sqrt(2), 2.0]))

    def test_bad_shape_named(self, plant1):
        with pytest.raises(ValidationError, match="PlantSpec: "):
            plant1.replace(A=np.eye(2))

    def test_he(self):
        X = np.array([[1.0, 2.0], [0.0, 3.0]])
        np.testing.assert_array_equal(he(X), [[2, 2], [2, 6]])
