"""Model container: validation, classification, moments, decoupling, certificates."""

import json
import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from adkit import (
    ModelSpec,
    ValidationError,
    classify,
    decouple,
    generator_apply,
    lyapunov_certificate,
    mean_x,
    mean_y,
    spec_from_json,
    spec_hash,
    spec_to_json,
    stationary_moments,
    validate,
)
from conftest import make_sub_spec, make_super_spec, random_subcritical


def _spec(**over):
    base = dict(
        n=1, a=2.0, b=1.0, m=np.array([0.5]), kappa=np.array([0.5]),
        theta=np.array([[1.0]]), rho=np.eye(2), y0=1.0, x0=np.array([0.0]),
    )
    base.update(over)
    return ModelSpec(**base)


class TestValidate:
    def test_reference_instance_is_admissible(self, sub_spec):
        assert validate(sub_spec) == []

    def test_zero_immigration_rejected(self):
        codes = [v.code for v in validate(_spec(a=0.0))]
        assert "a_not_positive" in codes

    def test_mixed_sign_theta_rejected(self):
        spec = _spec(
            n=2, theta=np.array([[1.0, 0.0], [0.0, -1.0]]), rho=np.eye(3),
            m=np.zeros(2), kappa=np.zeros(2), x0=np.zeros(2),
        )
        codes = [v.code for v in validate(spec)]
        assert "theta_mixed_sign" in codes

    def test_upper_triangular_rho_rejected(self):
        rho = np.array([[1.0, 0.5], [0.0, 1.0]])
        codes = [v.code for v in validate(_spec(rho=rho))]
        assert "rho_not_lower_triangular" in codes

    def test_nonpositive_rho_diagonal_rejected(self):
        rho = np.array([[1.0, 0.0], [0.5, -1.0]])
        codes = [v.code for v in validate(_spec(rho=rho))]
        assert "rho_diagonal_not_positive" in codes

    def test_zero_y0_rejected(self):
        codes = [v.code for v in validate(_spec(y0=0.0))]
        assert "y0_not_positive" in codes

    def test_violations_carry_messages(self):
        for v in validate(_spec(a=0.0, y0=-1.0)):
            assert isinstance(v.code, str) and v.code
            assert isinstance(v.message, str) and v.message


class TestClassify:
    def test_subcritical_example(self):
        spec = _spec(
            n=2, b=3.0, theta=np.array([[1.0, 0.0], [0.0, 2.0]]), rho=np.eye(3),
            m=np.zeros(2), kappa=np.zeros(2), x0=np.zeros(2),
        )
        rc = classify(spec)
        assert rc.label == "Subcritical"
        assert rc.b == 3.0
        assert rc.lambda_min_theta == pytest.approx(1.0)
        assert rc.lambda_max_theta == pytest.approx(2.0)

    def test_critical_example(self):
        rc = classify(_spec(b=0.0, theta=np.array([[0.0]])))
        assert rc.label == "Critical"

    def test_supercritical_example(self):
        rc = classify(_spec(b=-1.0, theta=np.array([[-2.0]])))
        assert rc.label == "Supercritical"

    def test_positive_b_negative_theta_is_supercritical(self):
        rc = classify(_spec(b=1.0, theta=np.array([[-2.0]])))
        assert rc.label == "Supercritical"

    def test_zero_b_positive_theta_is_critical(self):
        rc = classify(_spec(b=0.0, theta=np.array([[3.0]])))
        assert rc.label == "Critical"

    def test_invariant_under_rho_rescaling(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            spec = random_subcritical(rng, n=2)
            scaled = ModelSpec(
                n=spec.n, a=spec.a, b=spec.b, m=spec.m, kappa=spec.kappa,
                theta=spec.theta, rho=spec.rho * float(rng.uniform(0.1, 4.0)),
                y0=spec.y0, x0=spec.x0,
            )
            assert classify(scaled).label == classify(spec).label


class TestMeanY:
    def test_zero_reversion(self):
        assert mean_y(_spec(b=0.0, theta=np.array([[0.0]])), t=3.0, ey0=1.0) == pytest.approx(7.0)

    def test_stationary_fixed_point(self, sub_spec):
        for t in (0.1, 1.0, 9.0):
            assert mean_y(sub_spec, t=t, ey0=2.0) == pytest.approx(2.0, abs=1e-12)

    def test_halflife_substitution(self, sub_spec):
        assert mean_y(sub_spec, t=math.log(2.0), ey0=0.0) == pytest.approx(1.0, abs=1e-12)


class TestMeanX:
    def test_initial_condition(self, general_spec):
        out = mean_x(general_spec, t=0.0, ey0=1.0, ex0=np.array([0.3, -0.2]))
        assert np.allclose(out, [0.3, -0.2], atol=1e-12)

    def test_long_run_limit(self):
        spec = _spec(theta=np.array([[2.0]]), kappa=np.array([1.0]))
        out = mean_x(spec, t=60.0, ey0=2.0, ex0=np.array([0.0]))
        assert out[0] == pytest.approx(-0.75, abs=1e-9)

    def test_unit_time_value(self):
        spec = _spec(theta=np.array([[2.0]]), kappa=np.array([1.0]))
        out = mean_x(spec, t=1.0, ey0=2.0, ex0=np.array([0.0]))
        assert out[0] == pytest.approx(-0.75 * (1.0 - math.exp(-2.0)), abs=1e-9)

    @pytest.mark.parametrize(
        "b, theta",
        [
            (0.0, [[0.0]]),            # both rates vanish
            (1.0, [[0.0]]),            # drift-free X block, mean-reverting Y
            (0.0, [[1.0]]),            # critical Y, contracting X
            (1.0, [[1.0]]),            # theta spectrum equal to b
            (1.0, [[2.0]]),            # generic distinct rates
        ],
    )
    def test_matches_ode_oracle(self, b, theta):
        spec = _spec(b=b, theta=np.array(theta), kappa=np.array([0.7]), m=np.array([0.4]))
        ey0, ex0 = 1.3, np.array([-0.6])

        def rhs(t, x):
            return spec.m - spec.kappa * mean_y(spec, t, ey0) - spec.theta @ x

        sol = solve_ivp(rhs, (0.0, 1.7), ex0, rtol=1e-11, atol=1e-12, dense_output=True)
        for t in (0.4, 1.0, 1.7):
            assert mean_x(spec, t, ey0, ex0)[0] == pytest.approx(sol.sol(t)[0], abs=1e-8)

    def test_matches_ode_oracle_coupled_n2(self):
        spec = ModelSpec(
            n=2, a=1.5, b=0.7, m=np.array([0.4, -0.3]), kappa=np.array([0.2, 0.6]),
            theta=np.array([[1.0, 0.2], [0.0, 1.5]]), rho=np.eye(3),
            y0=1.0, x0=np.zeros(2),
        )
        ey0, ex0 = 0.8, np.array([0.5, -0.5])

        def rhs(t, x):
            return spec.m - spec.kappa * mean_y(spec, t, ey0) - spec.theta @ x

        sol = solve_ivp(rhs, (0.0, 2.0), ex0, rtol=1e-11, atol=1e-12, dense_output=True)
        got = mean_x(spec, 2.0, ey0, ex0)
        assert np.allclose(got, sol.sol(2.0), atol=1e-8)

    def test_semigroup_property(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            spec = random_subcritical(rng, n=2)
            ey0 = float(rng.uniform(0.2, 2.0))
            ex0 = rng.uniform(-1.0, 1.0, size=2)
            t, s = 0.6, 0.9
            ey_t = mean_y(spec, t, ey0)
            ex_t = mean_x(spec, t, ey0, ex0)
            direct_y = mean_y(spec, t + s, ey0)
            direct_x = mean_x(spec, t + s, ey0, ex0)
            assert mean_y(spec, s, ey_t) == pytest.approx(direct_y, abs=1e-9)
            assert np.allclose(mean_x(spec, s, ey_t, ex_t), direct_x, atol=1e-9)


class TestStationaryMoments:
    def test_reference_values(self, sub_spec):
        mom = stationary_moments(sub_spec)
        assert mom["mean_y_inf"] == pytest.approx(2.0)
        assert mom["inv_mean_y_inf"] == pytest.approx(2.0 / 3.0)

    def test_boundary_of_moment_condition(self):
        with pytest.raises(ValidationError, match="a"):
            stationary_moments(_spec(a=0.5))  # a == sigma1^2 / 2

    def test_requires_positive_b(self):
        with pytest.raises(ValidationError):
            stationary_moments(_spec(b=-1.0, theta=np.array([[-2.0]])))


class TestDecouple:
    @staticmethod
    def _coupled():
        return ModelSpec(
            n=1, a=2.0, b=1.0, m=np.array([1.0]), kappa=np.array([1.0]),
            theta=np.array([[2.0]]), rho=np.array([[1.0, 0.0], [0.5, 1.0]]),
            y0=1.0, x0=np.array([0.25]),
        )

    def test_identity_on_decoupled_input(self, sub_spec):
        out = decouple(sub_spec)
        assert np.array_equal(out.rho, sub_spec.rho)
        assert np.array_equal(out.m, sub_spec.m)
        assert np.array_equal(out.kappa, sub_spec.kappa)
        assert np.array_equal(out.x0, sub_spec.x0)

    def test_example_values(self):
        out = decouple(self._coupled())
        assert out.m[0] == pytest.approx(0.0, abs=1e-14)
        assert out.kappa[0] == pytest.approx(1.5, abs=1e-14)
        assert np.allclose(out.rho[1:, 0], 0.0)
        assert out.rho[1, 1] == pytest.approx(1.0)
        assert out.a == 2.0 and out.b == 1.0
        assert np.array_equal(out.theta, np.array([[2.0]]))
        # x is shifted by -(rho_J1 / rho11) * y0
        assert out.x0[0] == pytest.approx(0.25 - 0.5 * 1.0, abs=1e-14)

    def test_output_is_admissible(self):
        assert validate(decouple(self._coupled())) == []

    def test_idempotent(self):
        once = decouple(self._coupled())
        twice = decouple(once)
        for field in ("a", "b", "y0"):
            assert getattr(twice, field) == getattr(once, field)
        for field in ("m", "kappa", "theta", "rho", "x0"):
            assert np.array_equal(getattr(twice, field), getattr(once, field))


class TestLyapunovCertificate:
    def test_example_constants(self, sub_spec):
        cert = lyapunov_certificate(sub_spec, c=1.0, r=2.0)
        assert cert.c1 == pytest.approx(7.0)
        assert cert.c2 == pytest.approx(1.0)
        assert np.allclose(cert.c3, [[1.0]])
        assert np.allclose(cert.c4, [-5.0])
        assert cert.d == pytest.approx(18.5)

    def test_zero_kappa_unbounded_r(self):
        spec = _spec(kappa=np.array([0.0]))
        cert = lyapunov_certificate(spec, c=1.0, r=1000.0)
        assert cert.r == 1000.0
        assert math.isinf(cert.r_bound)

    def test_c_at_boundary_rejected(self, sub_spec):
        with pytest.raises(ValidationError):
            lyapunov_certificate(sub_spec, c=2.0)

    def test_requires_subcritical(self, super_spec):
        with pytest.raises(ValidationError):
            lyapunov_certificate(super_spec)

    def test_defaults_satisfy_open_intervals(self):
        rng = np.random.default_rng(41)
        for _ in range(20):
            spec = random_subcritical(rng, n=2)
            cert = lyapunov_certificate(spec)
            top = 2.0 * min(classify(spec).lambda_min_theta, spec.b)
            assert 0.0 < cert.c < top
            assert 0.0 < cert.r < cert.r_bound or math.isinf(cert.r_bound)

    def test_drift_inequality_on_lattice(self):
        rng = np.random.default_rng(43)
        specs = [make_sub_spec()] + [random_subcritical(rng, n=1) for _ in range(3)]
        ys = np.linspace(0.0, 50.0, 41)
        xs = np.linspace(-50.0, 50.0, 41)
        for spec in specs:
            cert = lyapunov_certificate(spec)
            worst = -np.inf
            for y in ys:
                for x in xs:
                    lhs = generator_apply(spec, cert.r, (y, np.array([x])))
                    lhs += cert.c * (y * y + cert.r * x * x)
                    worst = max(worst, lhs)
            assert worst <= cert.d + 1e-9


class TestGeneratorApply:
    def test_reference_point(self, sub_spec):
        assert generator_apply(sub_spec, 2.0, (1.0, np.array([0.0]))) == pytest.approx(5.0)

    def test_origin_vanishes(self, sub_spec):
        assert generator_apply(sub_spec, 2.0, (0.0, np.array([0.0]))) == pytest.approx(0.0)

    def test_certificate_inequality_at_reference_point(self, sub_spec):
        cert = lyapunov_certificate(sub_spec, c=1.0, r=2.0)
        lhs = generator_apply(sub_spec, 2.0, (1.0, np.array([0.0]))) + cert.c * 1.0
        assert lhs == pytest.approx(6.0)
        assert lhs <= cert.d

    def test_matches_finite_difference_generator(self):
        # Oracle: apply the second-order operator to V via central differences.
        spec = ModelSpec(
            n=1, a=2.0, b=1.0, m=np.array([1.0]), kappa=np.array([1.0]),
            theta=np.array([[2.0]]), rho=np.array([[1.2, 0.0], [0.4, 0.9]]),
            y0=1.0, x0=np.array([0.0]),
        )
        r = 1.5
        y, x = 0.8, 0.6

        def V(yy, xx):
            return yy * yy + r * xx * xx

        h = 1e-5
        dVy = (V(y + h, x) - V(y - h, x)) / (2 * h)
        dVx = (V(y, x + h) - V(y, x - h)) / (2 * h)
        dVyy = (V(y + h, x) - 2 * V(y, x) + V(y - h, x)) / h**2
        dVxx = (V(y, x + h) - 2 * V(y, x) + V(y, x - h)) / h**2
        dVyx = (
            V(y + h, x + h) - V(y + h, x - h) - V(y - h, x + h) + V(y - h, x - h)
        ) / (4 * h * h)
        drift_y = spec.a - spec.b * y
        drift_x = spec.m[0] - spec.kappa[0] * y - spec.theta[0, 0] * x
        gram = spec.rho @ spec.rho.T
        expected = (
            drift_y * dVy
            + drift_x * dVx
            + 0.5 * y * (gram[0, 0] * dVyy + 2 * gram[0, 1] * dVyx + gram[1, 1] * dVxx)
        )
        got = generator_apply(spec, r, (y, np.array([x])))
        assert got == pytest.approx(expected, rel=1e-6)


class TestSerialization:
    def test_round_trip_preserves_fields(self, general_spec):
        back = spec_from_json(spec_to_json(general_spec))
        assert back.n == general_spec.n
        for field in ("a", "b", "y0"):
            assert getattr(back, field) == getattr(general_spec, field)
        for field in ("m", "kappa", "theta", "rho", "x0"):
            assert np.array_equal(getattr(back, field), getattr(general_spec, field))

    def test_json_key_layout(self, sub_spec):
        doc = json.loads(spec_to_json(sub_spec))
        assert set(doc) == {"n", "a", "b", "m", "kappa", "theta", "rho", "y0", "x0"}
        assert doc["theta"] == [[1.0]]
        assert doc["rho"] == [[1.0, 0.0], [0.0, 1.0]]

    def test_malformed_json_rejected(self):
        with pytest.raises(ValidationError):
            spec_from_json("{not json")

    def test_missing_key_rejected(self, sub_spec):
        doc = json.loads(spec_to_json(sub_spec))
        del doc["kappa"]
        with pytest.raises(ValidationError):
            spec_from_json(json.dumps(doc))

    def test_hash_is_stable(self, sub_spec):
        assert spec_hash(sub_spec) == "ee2e0f62612d0dc1"
        assert spec_hash(sub_spec) == spec_hash(make_sub_spec())

    def test_hash_distinguishes_specs(self, sub_spec):
        assert spec_hash(sub_spec) != spec_hash(make_super_spec())
