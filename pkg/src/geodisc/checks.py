"""Self-verification suites behind ``geodisc check``.

Each suite measures a defect against an independent reference (a closed form,
a jet-of-curve oracle, an exactly known flow, or a structural identity) and
reports one CheckResult per case.  Tolerances are fixed here, not configurable:
they are part of what the suite asserts.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .hamiltonian import second_order_hamiltonian, integrate, symplectic_step
from .jets import JetTangent, jet_of_curve, unzip_jet_tangent
from .lifts import (
    canonical_symplectic_matrix,
    check_symplectomorphism,
    closed_form_lifted_midpoint,
    cotangent_lift,
    higher_order_lift,
    second_order_phase_map,
)
from .maps import (
    midpoint_map,
    se2_exp_map,
    sphere_geodesic_midpoint_map,
    sphere_initial_point_map,
    theta_map,
    verify_discretization_axioms,
)
from .control import obstacle_potential
from .numeric import jacobian_fd

Array = np.ndarray


@dataclass(frozen=True)
class CheckResult:
    suite: str
    case: str
    status: str  # "pass" | "fail" | "info"
    defect: float
    tolerance: float

    @property
    def failed(self) -> bool:
        return self.status == "fail"

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "case": self.case,
            "status": self.status,
            "defect": self.defect,
            "tolerance": self.tolerance,
        }


def _result(suite: str, case: str, defect: float, tol: float, info: bool = False) -> CheckResult:
    if info:
        status = "info"
    else:
        status = "pass" if defect <= tol else "fail"
    return CheckResult(suite=suite, case=case, status=status, defect=float(defect), tolerance=float(tol))


# ---------------------------------------------------------------------------
# samplers


def _random_sphere_point(rng, scale: float = 0.4) -> tuple[Array, Array]:
    q = rng.normal(size=3)
    q /= np.linalg.norm(q)
    xi = rng.normal(size=3) * scale
    xi -= (q @ xi) * q
    return q, xi


def _sphere_tangent_curve(rng, scale: float = 0.3) -> Callable[[float], Array]:
    """Smooth curve t -> (q(t), xi(t)) in the tangent bundle of the sphere:
    a normalized polynomial base curve with a projected polynomial fiber."""
    a = rng.normal(size=3)
    a /= np.linalg.norm(a)
    B = rng.normal(size=(3, 3)) * scale
    Cf = rng.normal(size=(3, 3)) * scale

    def curve(t: float) -> Array:
        v = a + B[0] * t + B[1] * t * t + B[2] * t**3
        q = v / np.linalg.norm(v)
        raw = Cf[0] + Cf[1] * t + Cf[2] * t * t
        xi = raw - (q @ raw) * q
        return np.concatenate([q, xi])

    return curve


# ---------------------------------------------------------------------------
# suites


def _midpoint_cotangent_closed_form(x: Array, d: int, inverse: bool) -> Array:
    """Cotangent lift of the midpoint rule in closed form: every block is a
    midpoint average (forward) or average/difference pair (inverse)."""
    a, b, c, e = x[:d], x[d : 2 * d], x[2 * d : 3 * d], x[3 * d :]
    if inverse:
        return np.concatenate([0.5 * (a + c), 0.5 * (b + e), c - a, e - b])
    return np.concatenate([a - 0.5 * c, b - 0.5 * e, a + 0.5 * c, b + 0.5 * e])


def closed_form_suite(rng) -> list[CheckResult]:
    """Generic cotangent lift of the midpoint rule against its closed form,
    both on T*Q and (through the tangent lift) on the second-order phase
    space T*(TQ)."""
    out = []
    tol = 1e-12
    for n in (1, 3):
        C = cotangent_lift(midpoint_map(n))
        fwd = inv = 0.0
        for _ in range(100):
            x = rng.normal(size=4 * n)
            fwd = max(fwd, float(np.max(np.abs(C.forward_flat(x) - _midpoint_cotangent_closed_form(x, n, False)))))
            inv = max(inv, float(np.max(np.abs(C.inverse_flat(x) - _midpoint_cotangent_closed_form(x, n, True)))))
        out.append(_result("closed-form", f"T*Q forward n={n}", fwd, tol))
        out.append(_result("closed-form", f"T*Q inverse n={n}", inv, tol))

        CL = second_order_phase_map(n)
        F = closed_form_lifted_midpoint(n)
        fwd = inv = 0.0
        for _ in range(100):
            x = rng.normal(size=8 * n)
            fwd = max(fwd, float(np.max(np.abs(CL.forward_flat(x) - F.forward_flat(x)))))
            inv = max(inv, float(np.max(np.abs(CL.inverse_flat(x) - F.inverse_flat(x)))))
        out.append(_result("closed-form", f"T*(TQ) forward n={n}", fwd, tol))
        out.append(_result("closed-form", f"T*(TQ) inverse n={n}", inv, tol))
    return out


def _midpoint_second_lift_closed_form(x: Array, n: int) -> Array:
    """Slotwise q_r -+ v_r / 2 on a flat order-2 tangent jet."""
    base, fiber = x[: 3 * n], x[3 * n :]
    return np.concatenate([base - fiber / 2.0, base + fiber / 2.0])


def second_lift_suite(rng) -> list[CheckResult]:
    """Order-2 lift of the midpoint rule against the slotwise closed form, on
    both derivative backends, plus the -+I/2 fiber blocks of its Jacobian."""
    out = []
    n = 2
    for mode, tol in (("exact", 1e-9), ("fd", 1e-6)):
        lift = higher_order_lift(midpoint_map(n), 2, derivative_mode=mode)
        worst = 0.0
        for _ in range(30):
            x = rng.normal(size=6 * n)
            worst = max(
                worst,
                float(np.max(np.abs(lift.forward_flat(x) - _midpoint_second_lift_closed_form(x, n)))),
            )
        out.append(_result("second-lift", f"closed form ({mode} backend)", worst, tol))

    lift = higher_order_lift(midpoint_map(n), 2)
    worst = 0.0
    for _ in range(10):
        x = np.concatenate([rng.normal(size=3 * n), np.zeros(3 * n)])
        J = lift.jacobian_forward_flat(x)
        blocks = np.block(
            [[-0.5 * np.eye(3 * n)], [0.5 * np.eye(3 * n)]]
        )
        worst = max(worst, float(np.max(np.abs(J[:, 3 * n :] - blocks))))
    out.append(_result("second-lift", "fiber-origin tangent blocks -+I/2", worst, 1e-7))
    return out


def axiom_suite(rng) -> list[CheckResult]:
    """Both defining conditions of every shipped discretization map."""
    tol = 1e-7
    out = []
    flat = [rng.uniform(-2.0, 2.0, size=2) for _ in range(25)]
    cases: list[tuple[str, object, list]] = [("midpoint n=2", midpoint_map(2), flat)]
    for theta in (0.0, 0.25, 0.5, 1.0):
        cases.append((f"theta={theta}", theta_map(2, theta), flat))

    sphere_pts = [_random_sphere_point(rng)[0] for _ in range(25)]
    cases.append(("sphere initial-point", sphere_initial_point_map(), sphere_pts))
    cases.append(("sphere geodesic-midpoint", sphere_geodesic_midpoint_map(), sphere_pts))

    se2_pts = [np.array([rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2.0, 2.0)]) for _ in range(25)]
    cases.append(("se2 exponential", se2_exp_map(), se2_pts))

    lifted = second_order_phase_map(1).as_discretization_map()
    cases.append(("cotangent-lifted midpoint on T*(TQ)", lifted, [rng.normal(size=4) for _ in range(25)]))

    for label, D, samples in cases:
        rep = verify_discretization_axioms(D, samples, tol=tol)
        defect = max(rep.max_condition1, rep.max_condition2)
        out.append(_result("axioms", label, defect, tol))
    return out


def symplecto_suite(rng) -> list[CheckResult]:
    """S^T Omega S identity for the lifted midpoint on T*(TQ), n in {1, 3}."""
    out = []
    tol = 1e-6
    for n in (1, 3):
        C = second_order_phase_map(n)
        samples = [rng.normal(size=8 * n) for _ in range(100)]
        rep = check_symplectomorphism(C, samples, tol=tol)
        out.append(_result("symplectomorphism", f"lifted midpoint n={n}", rep.max_defect, tol))
    return out


def _one_step_jacobian(C, H, h: float, z0: Array, eps: float = 1e-4) -> Array:
    d = z0.size
    M = np.empty((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = eps
        zp = symplectic_step(C, H, h, z0 + e, tol=1e-13)
        zm = symplectic_step(C, H, h, z0 - e, tol=1e-13)
        M[:, i] = (zp - zm) / (2.0 * eps)
    return M


def step_symplecticity_suite(rng) -> list[CheckResult]:
    """M^T Omega M = Omega for the one-step map, free and obstacle systems."""
    out = []
    tol = 1e-6
    h = 0.01

    n = 1
    C = second_order_phase_map(n)
    H = second_order_hamiltonian(n)
    Om = canonical_symplectic_matrix(2 * n)
    worst = 0.0
    for _ in range(20):
        z0 = rng.normal(size=4 * n)
        M = _one_step_jacobian(C, H, h, z0)
        worst = max(worst, float(np.max(np.abs(M.T @ Om @ M - Om))))
    out.append(_result("step-symplecticity", "free n=1", worst, tol))

    n = 3
    C = second_order_phase_map(n)
    V, gV, _ = obstacle_potential(1.0, 1.0, (0.0, 0.0), n)
    H = second_order_hamiltonian(n, V, gV)
    Om = canonical_symplectic_matrix(2 * n)
    worst = 0.0
    for _ in range(20):
        z0 = rng.normal(size=4 * n) * 0.3
        # Keep the position comfortably outside the obstacle.
        rho = 1.8 + rng.uniform(0.0, 1.5)
        ang = rng.uniform(0.0, 2 * np.pi)
        z0[0], z0[1] = rho * np.cos(ang), rho * np.sin(ang)
        M = _one_step_jacobian(C, H, h, z0)
        worst = max(worst, float(np.max(np.abs(M.T @ Om @ M - Om))))
    out.append(_result("step-symplecticity", "obstacle n=3", worst, tol))
    return out


def free_spline_suite() -> list[CheckResult]:
    """Conservation over a long free run: p0 exactly, H to rounding."""
    out = []
    C = second_order_phase_map(1)
    H = second_order_hamiltonian(1)
    z0 = np.array([0.0, 0.1, 0.01, 0.2])
    traj = integrate(C, H, 0.01, 10_000, z0)
    p0 = np.stack([s.p0 for s in traj.states])
    out.append(_result("free-spline", "p0 drift over 1e4 steps", float(np.max(np.abs(p0 - p0[0]))), 1e-12))
    out.append(
        _result(
            "free-spline",
            "H drift over 1e4 steps",
            float(np.max(np.abs(traj.energies - traj.energies[0]))),
            1e-10,
        )
    )
    return out


def convergence_suite(h_values: Sequence[float] = (0.04, 0.02, 0.01)) -> list[CheckResult]:
    """Observed global order against the exactly known cubic free flow."""
    out = []
    C = second_order_phase_map(1)
    H = second_order_hamiltonian(1)
    z0 = np.array([0.0, 0.0, 12.0, 6.0])
    T = 1.0
    # Exact flow: p0 constant, p1 linear, qdot and q its integrals.
    q_exact = z0[0] + z0[1] * T + z0[3] * T**2 / 2.0 - z0[2] * T**3 / 6.0
    errs = []
    for h in h_values:
        traj = integrate(C, H, h, int(round(T / h)), z0)
        errs.append(abs(traj.states[-1].q[0] - q_exact))
    for i in range(len(errs) - 1):
        ratio = h_values[i] / h_values[i + 1]
        order = float(np.log(errs[i] / errs[i + 1]) / np.log(ratio))
        out.append(
            _result(
                "convergence",
                f"order h={h_values[i]}->{h_values[i + 1]}: observed {order:.4f}",
                abs(order - 2.0),
                0.1,
            )
        )
    return out


def _normalized_curve_second_derivative(q, xi, qd, xid, qdd, xidd, squared: bool) -> Array:
    """Closed form for the second t-derivative of (q + xi)/|q + xi| along a
    tangent-bundle curve.  ``squared`` selects the (xi . xid)^2 variant of the
    final term; the linear variant is kept for an informational comparison."""
    w = q + xi
    wd = qd + xid
    wdd = qdd + xidd
    r = np.linalg.norm(w)
    s = float(xi @ xid)
    last = (s * s if squared else s) * 3.0 * w / r**5
    return wdd / r - (2.0 * s * wd + (float(xid @ xid) + float(xi @ xidd)) * w) / r**3 + last


def sphere_lift_suite(rng) -> list[CheckResult]:
    """Order-2 lift of the sphere initial-point map against a jet-of-curve
    oracle, plus informational comparisons with the two closed-form variants."""
    out = []
    lift = higher_order_lift(sphere_initial_point_map(), 2)
    worst = 0.0
    worst_lin = 0.0
    worst_sq = 0.0
    for _ in range(50):
        curve = _sphere_tangent_curve(rng)
        j_in = jet_of_curve(curve, 2)
        xt = unzip_jet_tangent(j_in)
        jm, jp = lift.forward(xt)

        # Oracle: push the curve through the map pointwise, then take its jet.
        def minus_curve(t: float, c=curve) -> Array:
            return c(t)[:3]

        def plus_curve(t: float, c=curve) -> Array:
            z = c(t)
            w = z[:3] + z[3:]
            return w / np.linalg.norm(w)

        om = jet_of_curve(minus_curve, 2)
        op = jet_of_curve(plus_curve, 2)
        d = max(
            float(np.max(np.abs(jm.flat() - om.flat()))),
            float(np.max(np.abs(jp.flat() - op.flat()))),
        )
        worst = max(worst, d)

        q, xi = j_in.slot(0)[:3], j_in.slot(0)[3:]
        qd, xid = j_in.slot(1)[:3], j_in.slot(1)[3:]
        qdd, xidd = j_in.slot(2)[:3], j_in.slot(2)[3:]
        ref = jp.slot(2)
        lin = _normalized_curve_second_derivative(q, xi, qd, xid, qdd, xidd, squared=False)
        sq = _normalized_curve_second_derivative(q, xi, qd, xid, qdd, xidd, squared=True)
        worst_lin = max(worst_lin, float(np.max(np.abs(lin - ref))))
        worst_sq = max(worst_sq, float(np.max(np.abs(sq - ref))))
    out.append(_result("sphere-lift", "jet-of-curve oracle (50 points)", worst, 1e-7))
    out.append(
        _result("sphere-lift", "closed-form variant, squared final term", worst_sq, 1e-6, info=True)
    )
    out.append(
        _result("sphere-lift", "closed-form variant, linear final term", worst_lin, 1e-6, info=True)
    )
    return out


SUITES: dict[str, Callable] = {
    "closed-form": closed_form_suite,
    "second-lift": second_lift_suite,
    "axioms": axiom_suite,
    "symplectomorphism": symplecto_suite,
    "step-symplecticity": step_symplecticity_suite,
    "free-spline": free_spline_suite,
    "convergence": convergence_suite,
    "sphere-lift": sphere_lift_suite,
}


def run_all(
    seed: int = 0,
    suites: Iterable[str] | None = None,
    h_values: Sequence[float] = (0.04, 0.02, 0.01),
) -> list[CheckResult]:
    names = list(suites) if suites else list(SUITES)
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s): {', '.join(unknown)}")
    results: list[CheckResult] = []
    for name in names:
        fn = SUITES[name]
        if name == "convergence":
            results.extend(fn(h_values))
        elif name in ("free-spline",):
            results.extend(fn())
        else:
            results.extend(fn(np.random.default_rng(seed)))
    return results
