"""Implicit symplectic one-step method driven by a cotangent-lifted
discretization map, specialized to second-order (acceleration-controlled)
systems.

Phase points live on T*(TQ) with Q = R^n and are ordered
(q, qdot, p0, p1); m = (q, qdot) is the tangent-bundle point and p = (p0, p1)
its conjugate momenta.  For the running cost |qddot|^2 / 2 + V(q) the
Hamiltonian is

    H(q, qdot, p0, p1) = |p1|^2 / 2 + p0 . qdot - V(q),

whose flow enforces qddot = p1 (so p1 is the control) and q'''' + grad V = 0.

One step of size h solves, with (m, p, mdot, pdot) the lifted-map preimage of
the step endpoints (z0, z1),

    mdot = h dH/dp(m, p),      pdot = -h dH/dm(m, p)

for z1 by a chord Newton iteration.  With the midpoint-family lifts this is an
implicit midpoint scheme on the phase space and conserves quadratic first
integrals to machine precision.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import NonConvergence, SingularJacobian, TooFewPoints
from .lifts import CotangentLiftedMap
from .numeric import as_vector, jacobian_fd, taylor_derivatives

Array = np.ndarray


@dataclass(frozen=True)
class HamiltonianSystem:
    """A Hamiltonian on T*M with closed-form partial gradients.

    ``dim`` is the dimension of M; phase points split as (m, p) with m and p of
    that length.
    """

    dim: int
    value: Callable[[Array, Array], float]
    grad_m: Callable[[Array, Array], Array]
    grad_p: Callable[[Array, Array], Array]


def second_order_hamiltonian(
    n: int,
    potential: Callable[[Array], float] | None = None,
    grad_potential: Callable[[Array], Array] | None = None,
) -> HamiltonianSystem:
    """Hamiltonian |p1|^2/2 + p0 . qdot - V(q) on T*(T R^n).

    ``potential`` and ``grad_potential`` must be supplied together; omitting
    both gives the free (quartically flat) system.
    """
    if (potential is None) != (grad_potential is None):
        raise ValueError("supply potential and grad_potential together or not at all")

    def value(m: Array, p: Array) -> float:
        q, qdot = m[:n], m[n:]
        p0, p1 = p[:n], p[n:]
        v = float(potential(q)) if potential is not None else 0.0
        return 0.5 * float(p1 @ p1) + float(p0 @ qdot) - v

    def grad_m(m: Array, p: Array) -> Array:
        q = m[:n]
        out = np.empty(2 * n)
        out[:n] = -np.asarray(grad_potential(q), dtype=float) if grad_potential is not None else 0.0
        out[n:] = p[:n]
        return out

    def grad_p(m: Array, p: Array) -> Array:
        out = np.empty(2 * n)
        out[:n] = m[n:]
        out[n:] = p[n:]
        return out

    return HamiltonianSystem(dim=2 * n, value=value, grad_m=grad_m, grad_p=grad_p)


@dataclass(frozen=True)
class SecondOrderState:
    """A phase point (q, qdot, p0, p1) of a second-order system."""

    q: Array
    qdot: Array
    p0: Array
    p1: Array

    def __post_init__(self):
        for name in ("q", "qdot", "p0", "p1"):
            object.__setattr__(self, name, as_vector(getattr(self, name), name=name))
        n = self.q.size
        if any(getattr(self, name).size != n for name in ("qdot", "p0", "p1")):
            raise ValueError("all four components must share one dimension")

    @property
    def n(self) -> int:
        return self.q.size

    def flat(self) -> Array:
        return np.concatenate([self.q, self.qdot, self.p0, self.p1])

    @classmethod
    def from_flat(cls, z, n: int) -> "SecondOrderState":
        z = np.asarray(z, dtype=float)
        if z.size != 4 * n:
            raise ValueError(f"expected {4 * n} entries, got {z.size}")
        return cls(z[:n], z[n : 2 * n], z[2 * n : 3 * n], z[3 * n :])


@dataclass
class Trajectory:
    """States produced by :func:`integrate`, with per-state energy and control
    (the control of the second-order problem is u = qddot = p1)."""

    h: float
    states: list[SecondOrderState]
    energies: Array
    controls: Array

    @property
    def steps(self) -> int:
        return len(self.states) - 1

    @property
    def times(self) -> Array:
        return self.h * np.arange(len(self.states))

    def positions(self) -> Array:
        return np.stack([s.q for s in self.states])


def trajectory_from_positions(q_samples, h: float) -> Trajectory:
    """Wrap raw position samples as a Trajectory with zeroed momenta, mostly
    for residual postprocessing of externally produced curves."""
    q = np.asarray(q_samples, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    zeros = np.zeros_like(q[0])
    states = [SecondOrderState(row, zeros, zeros, zeros) for row in q]
    return Trajectory(h=float(h), states=states, energies=np.zeros(len(states)), controls=np.zeros_like(q))


# ---------------------------------------------------------------------------
# Legendre transform of second-order Lagrangians


def _partial_gradient(L, args: tuple[Array, ...], which: int) -> Array:
    """Gradient of L with respect to one vector argument, by central differences."""
    x = args[which]
    eps = 1e-5 * max(1.0, float(np.max(np.abs(x))))
    g = np.empty_like(x)
    for i in range(x.size):
        bump = np.zeros_like(x)
        bump[i] = eps
        hi = list(args)
        lo = list(args)
        hi[which] = x + bump
        lo[which] = x - bump
        g[i] = (float(L(*hi)) - float(L(*lo))) / (2 * eps)
    return g


def legendre_second_order(L) -> Callable[..., SecondOrderState]:
    """Momenta of a second-order Lagrangian L(q, qdot, qddot).

    Returns a function of the third-order jet (q, qdot, qddot, qdddot) giving
    the state with

        p1 = dL/dqddot,
        p0 = dL/dqdot - d/dt (dL/dqddot),

    the time derivative taken along the jet.  Derivatives of the black-box L
    come from finite differences.
    """

    def transform(q, qdot, qddot, qdddot) -> SecondOrderState:
        q, qdot, qddot, qdddot = (as_vector(z) for z in (q, qdot, qddot, qdddot))

        def p1_along(t: float) -> Array:
            a = q + t * qdot + 0.5 * t * t * qddot + t**3 / 6.0 * qdddot
            b = qdot + t * qddot + 0.5 * t * t * qdddot
            c = qddot + t * qdddot
            return _partial_gradient(L, (a, b, c), 2)

        p1, dp1 = taylor_derivatives(p1_along, 0.0, 1)
        p0 = _partial_gradient(L, (q, qdot, qddot), 1) - dp1
        return SecondOrderState(q, qdot, p0, p1)

    return transform


def lagrangian_energy(L, q, qdot, qddot, qdddot) -> float:
    """Energy qdot . p0 + qddot . p1 - L of a second-order Lagrangian along a
    third-order jet."""
    state = legendre_second_order(L)(q, qdot, qddot, qdddot)
    return float(state.qdot @ state.p0) + float(np.asarray(qddot, dtype=float) @ state.p1) - float(
        L(state.q, state.qdot, as_vector(qddot))
    )


# ---------------------------------------------------------------------------
# the one-step method


def step_residual(C: CotangentLiftedMap, H: HamiltonianSystem, h: float, z0) -> Callable[[Array], Array]:
    """Residual in the unknown right endpoint z1 whose root defines one step."""
    d = C.dim
    if H.dim != d:
        raise ValueError(f"Hamiltonian lives on T*R^{H.dim} but the map expects dimension {d}")
    z0 = as_vector(z0, name="z0")
    if z0.size != 2 * d:
        raise ValueError(f"phase points have {2 * d} coordinates, got {z0.size}")
    m0, p0 = z0[:d], z0[d:]

    def residual(z1: Array) -> Array:
        m, p, mdot, pdot = C.inverse(m0, p0, z1[:d], z1[d:])
        return np.concatenate([mdot - h * H.grad_p(m, p), pdot + h * H.grad_m(m, p)])

    return residual


def _chord_newton(residual, x0: Array, J: Array | None, tol: float, max_iter: int):
    """Newton iteration reusing one Jacobian, refreshed only on stalls.

    Returns (solution, jacobian_used) so callers integrating many steps can
    carry the factorization across steps.
    """
    x = x0.copy()
    r = residual(x)
    best_x, best_norm = x.copy(), float(np.max(np.abs(r)))
    refreshed = J is None
    if J is None:
        J = jacobian_fd(residual, x)
    for it in range(max_iter):
        norm = float(np.max(np.abs(r)))
        if norm <= tol:
            # One last correction so long integrations are not limited by tol.
            try:
                x = x - np.linalg.solve(J, r)
            except np.linalg.LinAlgError:
                pass
            return x, J
        try:
            dx = np.linalg.solve(J, r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian("one-step linearization is singular") from exc
        x = x - dx
        r = residual(x)
        new_norm = float(np.max(np.abs(r)))
        if new_norm < best_norm:
            best_x, best_norm = x.copy(), new_norm
        if new_norm > 0.5 * norm and new_norm > tol:
            # Insufficient contraction: the carried Jacobian is stale.
            if refreshed:
                continue
            J = jacobian_fd(residual, x)
            refreshed = True
    if float(np.max(np.abs(r))) <= tol:
        try:
            x = x - np.linalg.solve(J, r)
        except np.linalg.LinAlgError:
            pass
        return x, J
    raise NonConvergence(
        f"one-step solve stalled at residual {best_norm:.3e} (tol {tol:.1e})",
        x_best=best_x,
        residual_norm=best_norm,
        iterations=max_iter,
    )


def symplectic_step(
    C: CotangentLiftedMap,
    H: HamiltonianSystem,
    h: float,
    z0,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> Array:
    """Advance one step of size h from the phase point z0 (flat, length 4n).

    The Newton iteration starts from z1 = z0 and reuses a single
    finite-difference Jacobian of the residual (exact for the affine systems
    arising from midpoint-family lifts)."""
    z0 = as_vector(z0, name="z0")
    residual = step_residual(C, H, h, z0)
    z1, _ = _chord_newton(residual, z0, None, tol, max_iter)
    return z1


def integrate(
    C: CotangentLiftedMap,
    H: HamiltonianSystem,
    h: float,
    steps: int,
    z0,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> Trajectory:
    """Run ``steps`` steps of the one-step method, recording energy and control
    at every state.

    The residual Jacobian is carried across steps and refreshed only when a
    step stalls, which makes the affine (free and nearly free) cases cost one
    linear solve per step.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if steps < 1:
        raise ValueError("need at least one step")
    d = C.dim
    if d % 2 != 0:
        raise ValueError("second-order trajectories need an even-dimensional base")
    n = d // 2
    z = as_vector(z0, name="z0") if not isinstance(z0, SecondOrderState) else z0.flat()
    states = [SecondOrderState.from_flat(z, n)]
    energies = [H.value(z[:d], z[d:])]
    J = None
    for _ in range(steps):
        residual = step_residual(C, H, h, z)
        try:
            z, J = _chord_newton(residual, z, J, tol, max_iter)
        except NonConvergence:
            # One retry with a fresh Jacobian before giving up.
            z, J = _chord_newton(residual, z, None, tol, max_iter)
        states.append(SecondOrderState.from_flat(z, n))
        energies.append(H.value(z[:d], z[d:]))
    controls = np.stack([s.p1 for s in states])
    return Trajectory(h=h, states=states, energies=np.asarray(energies), controls=controls)


def fourth_order_residual(traj: Trajectory, grad_potential=None) -> Array:
    """Infinity norms of the centered fourth-difference defect
    (q_{k-2} - 4 q_{k-1} + 6 q_k - 4 q_{k+1} + q_{k+2})/h^4 + grad V(q_k)
    at the interior nodes k = 2 .. N-2."""
    q = traj.positions()
    if q.shape[0] < 5:
        raise TooFewPoints("need at least five states for a fourth difference")
    h4 = traj.h**4
    out = []
    for k in range(2, q.shape[0] - 2):
        r = (q[k - 2] - 4 * q[k - 1] + 6 * q[k] - 4 * q[k + 1] + q[k + 2]) / h4
        if grad_potential is not None:
            r = r + np.asarray(grad_potential(q[k]), dtype=float)
        out.append(float(np.max(np.abs(r))))
    return np.asarray(out)
