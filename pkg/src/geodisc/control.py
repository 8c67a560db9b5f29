"""Acceleration-controlled optimal control problems and their solvers.

Three problem families: the free spline (minimum integrated squared
acceleration between fixed endpoint positions and velocities), the same with a
repulsive obstacle potential added to the running cost, and the planar
rigid-body run in chart coordinates q = (x, y, theta) with the obstacle acting
on (x, y) only.

Boundary-value problems are solved by single shooting: Newton iteration on the
initial costates (p0(0), p1(0)) of the forward symplectic flow, with
finite-difference sensitivities (the problems here have n <= 3, so a 2n x 2n
FD Jacobian is cheap).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BadDiscretization,
    NonConvergence,
    ObstaclePenetration,
    SingularPotential,
    StartInsideObstacle,
)
from .hamiltonian import HamiltonianSystem, SecondOrderState, Trajectory, integrate, second_order_hamiltonian
from .lifts import CotangentLiftedMap, second_order_phase_map
from .numeric import as_vector, newton_solve

Array = np.ndarray

#: Potential denominators at or below this are treated as "on the obstacle".
SINGULAR_CLEARANCE = 1e-9


def grid_steps(T: float, h: float) -> int:
    """Number of steps N with T = N h, rejecting grids that do not divide."""
    if h <= 0 or T <= 0:
        raise BadDiscretization(f"need positive horizon and step, got T={T}, h={h}")
    ratio = T / h
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise BadDiscretization(f"horizon T={T} is not an integer multiple of h={h}")
    return n


def obstacle_potential(tau: float, r: float, center, n: int):
    """Repulsive potential tau / (|xy - center|^2 - r^2) on the first two
    coordinates, with closed-form gradient and a clearance function.

    Returns (V, gradV, clearance); clearance(q) = |xy - center|^2 - r^2.  V and
    gradV raise SingularPotential once the clearance drops to ~0, so a caller
    can never see a nonpositive clearance from a state that evaluated cleanly.
    """
    if n < 2:
        raise ValueError("obstacle potential needs at least coordinates (x, y)")
    if r <= 0:
        raise ValueError("obstacle radius must be positive")
    c = as_vector(center, name="center")
    if c.size != 2:
        raise ValueError("obstacle center must have exactly two components")

    def clearance(q) -> float:
        d = np.asarray(q, dtype=float)[:2] - c
        return float(d @ d) - r * r

    def _checked(q) -> float:
        s = clearance(q)
        if s <= SINGULAR_CLEARANCE:
            raise SingularPotential(
                f"state at squared clearance {s:.3e} is on or inside the obstacle"
            )
        return s

    def V(q) -> float:
        return tau / _checked(q)

    def gradV(q) -> Array:
        s = _checked(q)
        g = np.zeros(np.asarray(q).size)
        g[:2] = -2.0 * tau * (np.asarray(q, dtype=float)[:2] - c) / (s * s)
        return g

    return V, gradV, clearance


@dataclass(frozen=True)
class OCProblem:
    """A two-point boundary problem for an acceleration-controlled system.

    ``potential`` enters the running cost (when ``include_potential_in_cost``)
    and shapes the dynamics through the Hamiltonian; the free spline has none.
    """

    n: int
    T: float
    h: float
    q_start: Array
    qdot_start: Array
    q_end: Array
    qdot_end: Array
    potential: Callable[[Array], float] | None = None
    grad_potential: Callable[[Array], Array] | None = None
    clearance: Callable[[Array], float] | None = None
    tau: float | None = None
    r: float | None = None
    center: Array | None = None
    include_potential_in_cost: bool = True
    kind: str = "free"

    def __post_init__(self):
        for name in ("q_start", "qdot_start", "q_end", "qdot_end"):
            v = as_vector(getattr(self, name), name=name)
            if v.size != self.n:
                raise ValueError(f"{name} must have dimension {self.n}")
            object.__setattr__(self, name, v)
        if self.r is not None and self.r <= 0:
            raise ValueError("obstacle radius must be positive")
        object.__setattr__(self, "steps", grid_steps(self.T, self.h))

    steps: int = field(init=False, default=0)


def make_free_spline(n: int, boundary, T: float, h: float) -> OCProblem:
    """Problem with running cost |u|^2 / 2 and the four endpoint conditions
    ``boundary`` = (q_start, qdot_start, q_end, qdot_end)."""
    q0, v0, q1, v1 = boundary
    return OCProblem(n=n, T=float(T), h=float(h), q_start=q0, qdot_start=v0, q_end=q1, qdot_end=v1)


def make_obstacle_problem(
    n: int,
    tau: float,
    r: float,
    center,
    boundary,
    T: float,
    h: float,
    include_potential_in_cost: bool = True,
) -> OCProblem:
    """Free-spline problem plus the repulsive potential tau/(|xy-c|^2 - r^2).

    Both boundary positions must be strictly outside the obstacle.
    """
    V, gradV, clearance = obstacle_potential(tau, r, center, n)
    q0, v0, q1, v1 = boundary
    for label, q in (("start", q0), ("end", q1)):
        if clearance(as_vector(q)) <= 0:
            raise StartInsideObstacle(f"boundary {label} position lies inside the obstacle")
    return OCProblem(
        n=n,
        T=float(T),
        h=float(h),
        q_start=q0,
        qdot_start=v0,
        q_end=q1,
        qdot_end=v1,
        potential=V,
        grad_potential=gradV,
        clearance=clearance,
        tau=float(tau),
        r=float(r),
        center=as_vector(center),
        include_potential_in_cost=include_potential_in_cost,
        kind="obstacle",
    )


def hamiltonian_for(prob: OCProblem) -> HamiltonianSystem:
    return second_order_hamiltonian(prob.n, prob.potential, prob.grad_potential)


def hermite_costates(q0, v0, q1, v1, T: float) -> tuple[Array, Array]:
    """Initial costates of the interpolating cubic: p1(0) = qddot(0) and
    p0(0) = -qdddot.  This is the exact free-spline solution, and serves as
    the default shooting guess elsewhere."""
    q0, v0, q1, v1 = (as_vector(z) for z in (q0, v0, q1, v1))
    d = q1 - q0
    p1 = 6.0 * d / T**2 - (4.0 * v0 + 2.0 * v1) / T
    p0 = 12.0 * d / T**3 - 6.0 * (v0 + v1) / T**2
    return p0, p1


def running_cost(
    traj: Trajectory,
    potential: Callable[[Array], float] | None = None,
    rule: str = "left",
) -> float:
    """Quadrature of |u|^2 / 2 (+ V(q) when given) along the trajectory.

    ``rule`` is "left" (rectangle at each step's left state, matching the
    piecewise control reconstruction) or "trapezoid".
    """
    vals = np.array(
        [
            0.5 * float(u @ u) + (float(potential(s.q)) if potential is not None else 0.0)
            for u, s in zip(traj.controls, traj.states)
        ]
    )
    if rule == "left":
        return float(traj.h * np.sum(vals[:-1]))
    if rule == "trapezoid":
        return float(traj.h * (np.sum(vals) - 0.5 * (vals[0] + vals[-1])))
    raise ValueError(f"unknown quadrature rule {rule!r}")


def cost_of(traj: Trajectory, prob: OCProblem, rule: str = "left") -> float:
    """Discrete cost of a trajectory under the problem's running cost."""
    V = prob.potential if prob.include_potential_in_cost else None
    return running_cost(traj, V, rule=rule)


@dataclass
class ShootingResult:
    p0: Array
    p1: Array
    trajectory: Trajectory
    defect: float
    cost: float
    converged: bool
    message: str = ""


def shoot(
    prob: OCProblem,
    C: CotangentLiftedMap | None = None,
    guess: tuple | None = None,
    tol: float = 1e-10,
    max_iter: int = 40,
) -> ShootingResult:
    """Solve the two-point boundary problem by single shooting.

    Newton iteration runs on the endpoint map (p0(0), p1(0)) -> (q(T) - q_end,
    qdot(T) - qdot_end).  The default guess is the interpolating-cubic costate
    pair, which is exact for the free spline.  Obstacle problems damp Newton
    trials whose forward flow penetrates the obstacle; a guess whose own flow
    already penetrates raises ObstaclePenetration.

    On NonConvergence the best iterate found is returned with converged=False
    rather than raising.
    """
    n = prob.n
    if C is None:
        C = second_order_phase_map(n)
    H = hamiltonian_for(prob)
    if guess is None:
        guess = hermite_costates(prob.q_start, prob.qdot_start, prob.q_end, prob.qdot_end, prob.T)
    x0 = np.concatenate([as_vector(guess[0]), as_vector(guess[1])])
    if x0.size != 2 * n:
        raise ValueError(f"costate guess must have {2 * n} entries")

    def flow(x: Array) -> Trajectory:
        z0 = np.concatenate([prob.q_start, prob.qdot_start, x])
        try:
            return integrate(C, H, prob.h, prob.steps, z0)
        except SingularPotential as exc:
            raise ObstaclePenetration(str(exc)) from exc

    def residual(x: Array) -> Array:
        end = flow(x).states[-1]
        return np.concatenate([end.q - prob.q_end, end.qdot - prob.qdot_end])

    message = ""
    try:
        x = newton_solve(
            residual,
            x0,
            tol=tol,
            max_iter=max_iter,
            backtracking=prob.potential is not None,
        )
        converged = True
    except NonConvergence as exc:
        x = exc.x_best
        converged = False
        message = str(exc)

    traj = flow(x)
    end = traj.states[-1]
    defect = float(
        max(np.max(np.abs(end.q - prob.q_end)), np.max(np.abs(end.qdot - prob.qdot_end)))
    )
    return ShootingResult(
        p0=x[:n],
        p1=x[n:],
        trajectory=traj,
        defect=defect,
        cost=cost_of(traj, prob),
        converged=converged and defect <= tol,
        message=message,
    )


@dataclass
class SE2Report:
    """Summary of a planar rigid-body run."""

    trajectory: Trajectory
    clearances: Array
    min_clearance: float
    h_drift: float
    cost: float
    csv_path: str | None = None
    svg_path: str | None = None

    @property
    def final_state(self) -> SecondOrderState:
        return self.trajectory.states[-1]

    def summary(self) -> str:
        f = self.final_state
        return "\n".join(
            [
                "final q      = [%s]" % " ".join("%.6g" % v for v in f.q),
                "final qdot   = [%s]" % " ".join("%.6g" % v for v in f.qdot),
                "H drift      = %.6g" % self.h_drift,
                "min clearance= %.6g" % self.min_clearance,
                "cost J       = %.6g" % self.cost,
            ]
        )


def run_se2_experiment(config) -> SE2Report:
    """Forward run of the planar rigid body q = (x, y, theta) with the
    repulsive potential on (x, y), Euclidean kinetic terms, and the lifted
    discretization chosen by the config.

    ``config`` supplies tau, r, center, h, steps, the full initial phase state,
    and optional csv/svg output paths (see the cli module).  Artifacts are
    written when paths are set.  Raises SingularPotential if the flow reaches
    the obstacle boundary.
    """
    n = 3
    V, gradV, clearance = obstacle_potential(config.tau, config.r, config.center, n)
    H = second_order_hamiltonian(n, V, gradV)
    C = second_order_phase_map(n, base=config.base_map(n)) if hasattr(config, "base_map") else second_order_phase_map(n)
    state = config.initial_state
    z0 = state.flat() if isinstance(state, SecondOrderState) else as_vector(state)
    if z0.size != 4 * n:
        raise ValueError(f"se2 initial state needs {4 * n} numbers, got {z0.size}")
    traj = integrate(C, H, config.h, config.steps, z0)
    clearances = np.array([clearance(s.q) for s in traj.states])
    drift = float(np.max(np.abs(traj.energies - traj.energies[0])))
    report = SE2Report(
        trajectory=traj,
        clearances=clearances,
        min_clearance=float(np.min(clearances)),
        h_drift=drift,
        cost=running_cost(traj, V),
        csv_path=getattr(config, "csv_out", None),
        svg_path=getattr(config, "svg_out", None),
    )
    if report.csv_path:
        from .artifacts import write_trajectory_csv

        write_trajectory_csv(report.csv_path, traj, clearances)
    if report.svg_path:
        from .artifacts import write_xy_svg

        write_xy_svg(
            report.svg_path,
            traj.positions()[:, :2],
            circle=(float(config.center[0]), float(config.center[1]), float(config.r)),
        )
    return report
