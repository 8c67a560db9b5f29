import numpy as np
import hypothesis as hyp
import hypothesis.strategies as st
import pytest

from geodisc.errors import UnsupportedOrder
from geodisc.jets import Jet, JetTangent, jet_of_curve, unzip_jet_tangent
from geodisc.lifts import (
    canonical_symplectic_matrix,
    check_symplectomorphism,
    closed_form_lifted_midpoint,
    cotangent_lift,
    higher_order_lift,
    pair_symplectic_matrix,
    second_order_phase_map,
    tangent_lift,
    tangent_lifted_symplectic_matrix,
)
from geodisc.maps import midpoint_map, sphere_initial_point_map, theta_map, verify_discretization_axioms


class TestTangentLift:
    def test_midpoint_tangent_lift_is_componentwise(self, rng):
        lifted = tangent_lift(midpoint_map(2))
        q, v, qd, vd = (rng.normal(size=2) for _ in range(4))
        (a, ad), (b, bd) = lifted(q, v, qd, vd)
        assert np.allclose(a, q - v / 2) and np.allclose(b, q + v / 2)
        assert np.allclose(ad, qd - vd / 2, atol=1e-7)
        assert np.allclose(bd, qd + vd / 2, atol=1e-7)


class TestHigherOrderLift:
    def test_midpoint_second_lift_value(self):
        lift = higher_order_lift(midpoint_map(1), 2)
        x = np.array([1.0, 2.0, 3.0, 4.0, 6.0, 8.0])  # base slots, fiber slots
        out = lift.forward_flat(x)
        assert np.allclose(out, [-1.0, -1.0, -1.0, 3.0, 5.0, 7.0], atol=1e-12)

    def test_exact_and_fd_backends_agree(self, rng):
        a = higher_order_lift(midpoint_map(2), 2, derivative_mode="exact")
        b = higher_order_lift(midpoint_map(2), 2, derivative_mode="fd")
        x = rng.normal(size=12)
        assert np.allclose(a.forward_flat(x), b.forward_flat(x), atol=1e-8)

    def test_inverse_roundtrip(self, rng):
        lift = higher_order_lift(midpoint_map(2), 2)
        x = rng.normal(size=12)
        xt = JetTangent.from_flat(x, 2, 2)
        jm, jp = lift.forward(xt)
        back = lift.inverse(jm, jp)
        assert np.allclose(back.flat(), x, atol=1e-10)

    def test_order_cap(self):
        with pytest.raises(UnsupportedOrder):
            higher_order_lift(midpoint_map(1), 5)

    def test_lifted_map_satisfies_axioms(self, rng):
        D = higher_order_lift(theta_map(1, 0.25), 2).as_discretization_map()
        report = verify_discretization_axioms(D, [rng.normal(size=3) for _ in range(10)])
        assert report.passed, str(report)

    def test_third_order_lift_runs(self, rng):
        lift = higher_order_lift(midpoint_map(1), 3, derivative_mode="fd")
        x = rng.normal(size=8)
        out = lift.forward_flat(x)
        base, fiber = x[:4], x[4:]
        assert np.allclose(out, np.concatenate([base - fiber / 2, base + fiber / 2]), atol=1e-5)


class TestCotangentLift:
    def test_midpoint_closed_form_value(self):
        C = cotangent_lift(midpoint_map(1))
        m0, p0, m1, p1 = C.forward([1.0], [2.0], [0.4], [0.6])
        assert np.allclose(np.concatenate([m0, p0, m1, p1]), [0.8, 1.7, 1.2, 2.3], atol=1e-12)

    def test_forward_inverse_roundtrip(self, rng):
        C = cotangent_lift(midpoint_map(3))
        x = rng.normal(size=12)
        y = C.forward_flat(x)
        assert np.allclose(C.inverse_flat(y), x, atol=1e-10)

    def test_matches_closed_form_everywhere(self, rng):
        C = second_order_phase_map(2)
        F = closed_form_lifted_midpoint(2)
        for _ in range(50):
            x = rng.normal(size=16)
            assert np.allclose(C.forward_flat(x), F.forward_flat(x), atol=1e-12)
            assert np.allclose(C.inverse_flat(x), F.inverse_flat(x), atol=1e-12)

    def test_lift_of_nonsymmetric_base(self, rng):
        # theta != 1/2 still yields a valid discretization map on T*Q.
        C = cotangent_lift(theta_map(1, 0.25))
        D = C.as_discretization_map()
        report = verify_discretization_axioms(D, [rng.normal(size=2) for _ in range(10)])
        assert report.passed, str(report)

    @hyp.given(st.integers(0, 2 ** 31 - 1))
    def test_roundtrip_property(self, seed):
        rng = np.random.default_rng(seed)
        C = cotangent_lift(midpoint_map(2))
        x = rng.normal(size=8)
        assert np.allclose(C.inverse_flat(C.forward_flat(x)), x, atol=1e-9)


class TestSymplecticStructure:
    def test_canonical_matrix_shape(self):
        O = canonical_symplectic_matrix(2)
        assert np.allclose(O, [[0, 0, 1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, -1, 0, 0]])
        assert np.allclose(O.T, -O)

    def test_pair_and_tangent_matrices_are_antisymmetric(self):
        for M in (pair_symplectic_matrix(2), tangent_lifted_symplectic_matrix(2)):
            assert np.allclose(M.T, -M)

    def test_lifted_midpoint_is_symplectomorphism(self, rng):
        C = second_order_phase_map(1)
        report = check_symplectomorphism(C, [rng.normal(size=8) for _ in range(25)])
        assert report.passed, str(report)
        assert report.max_defect < 1e-9

    def test_lifted_theta_map_is_symplectomorphism(self, rng):
        C = cotangent_lift(theta_map(2, 0.25))
        report = check_symplectomorphism(C, [rng.normal(size=8) for _ in range(10)])
        assert report.passed, str(report)

    def test_non_symplectic_map_detected(self, rng):
        # Scaling one momentum block breaks the pairing.
        class Scaled:
            dim = 2

            def forward_flat(self, x):
                y = closed_form_lifted_midpoint(1).forward_flat(x)
                y = y.copy()
                y[2:4] *= 1.05
                return y

        report = check_symplectomorphism(Scaled(), [rng.normal(size=8) for _ in range(3)])
        assert not report.passed


class TestSphereLift:
    def _curve(self, rng):
        a = rng.normal(size=3)
        a /= np.linalg.norm(a)
        B = rng.normal(size=(3, 3)) * 0.3
        Cf = rng.normal(size=(3, 3)) * 0.3

        def curve(t):
            v = a + B[0] * t + B[1] * t * t + B[2] * t**3
            q = v / np.linalg.norm(v)
            raw = Cf[0] + Cf[1] * t + Cf[2] * t * t
            xi = raw - (q @ raw) * q
            return np.concatenate([q, xi])

        return curve

    def test_second_lift_matches_jet_oracle(self, rng):
        lift = higher_order_lift(sphere_initial_point_map(), 2)
        worst = 0.0
        for _ in range(10):
            curve = self._curve(rng)
            j = jet_of_curve(curve, 2)
            jm, jp = lift.forward(unzip_jet_tangent(j))

            def plus_curve(t, c=curve):
                z = c(t)
                w = z[:3] + z[3:]
                return w / np.linalg.norm(w)

            op = jet_of_curve(plus_curve, 2)
            om = jet_of_curve(lambda t, c=curve: c(t)[:3], 2)
            worst = max(worst, float(np.max(np.abs(jp.flat() - op.flat()))))
            worst = max(worst, float(np.max(np.abs(jm.flat() - om.flat()))))
        assert worst < 1e-7, worst

    def test_zero_fiber_reproduces_base_jet(self, rng):
        # With no fiber motion both outputs follow the base point's jet.
        lift = higher_order_lift(sphere_initial_point_map(), 2)
        q, _ = rng.normal(size=3), None
        q = q / np.linalg.norm(q)
        base = Jet((q, np.zeros(3), np.zeros(3)))
        xt = JetTangent(base, (np.zeros(3), np.zeros(3), np.zeros(3)))
        jm, jp = lift.forward(xt)
        assert np.allclose(jm.flat(), base.flat(), atol=1e-7)
        assert np.allclose(jp.flat(), base.flat(), atol=1e-7)
