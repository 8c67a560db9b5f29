"""Lifts of discretization maps: tangent, higher-order and cotangent.

Lifting moves a discretization map between spaces:

* :func:`tangent_lift` differentiates the map along curves, producing a map
  that discretizes velocity dynamics.
* :func:`higher_order_lift` pushes order-k jets through the map.  Working in
  flat chart coordinates, a tangent vector to the order-k jet space is first
  rearranged into a jet of a tangent-bundle curve (:func:`~geodisc.jets.zip_jet_tangent`)
  and then pushed forward slot by slot.
* :func:`cotangent_lift` turns a discretization map on a space M into one on
  its phase space T*M.  Covectors ride along the inverse transpose of the base
  Jacobian; the resulting map is a symplectomorphism between the tangent lift
  of the canonical symplectic form and the difference of the two pullbacks on
  the product, which :func:`check_symplectomorphism` verifies numerically.

The generic constructions are the production path.  The closed forms for the
midpoint family double as independent test oracles.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SingularJacobian, UnsupportedOrder
from .jets import Jet, JetTangent, jet_pushforward, unzip_jet_tangent, zip_jet_tangent
from .maps import DiscretizationMap, midpoint_map
from .numeric import MAX_TAYLOR_ORDER, as_vector, jacobian_fd

Array = np.ndarray


def tangent_lift(D: DiscretizationMap):
    """First derivative of a discretization map along curves.

    Returns a callable (q, v, qdot, vdot) -> ((q_minus, w_minus), (q_plus, w_plus))
    where the point pair is D.forward(q, v) and the velocity pair is the base
    Jacobian applied to (qdot, vdot).
    """
    n = D.dim

    def lifted(q, v, qdot, vdot):
        q = as_vector(q, name="q")
        v = as_vector(v, name="v")
        w = np.concatenate([as_vector(qdot, name="qdot"), as_vector(vdot, name="vdot")])
        a, b = D.forward(q, v)
        dw = D.jacobian_forward(q, v) @ w
        return (a, dw[:n]), (b, dw[n:])

    return lifted


class HigherOrderDiscretizationMap:
    """Order-k lift of a base discretization map.

    Maps a tangent vector to the order-k jet space (base jet z, fiber velocity
    zdot) to a pair of order-k jets, by pushing the zipped jet through the base
    map.  ``derivative_mode`` controls how derivatives of the base map enter:

    * ``"exact"`` (only for bases with a constant Jacobian): the lift is affine
      and is precomputed as a matrix, so evaluations are exact and cheap.
    * ``"fd"``: all base derivatives come from finite differences.
    * ``"auto"``: exact when available, fd otherwise.
    """

    def __init__(self, base: DiscretizationMap, order: int, derivative_mode: str = "auto"):
        if not isinstance(order, (int, np.integer)) or order < 0 or order > MAX_TAYLOR_ORDER:
            raise UnsupportedOrder(f"lift order must be an integer in [0, {MAX_TAYLOR_ORDER}], got {order!r}")
        if derivative_mode == "auto":
            derivative_mode = "exact" if base.jacobian_constant else "fd"
        if derivative_mode not in ("exact", "fd"):
            raise ValueError(f"unknown derivative_mode {derivative_mode!r}")
        if derivative_mode == "exact" and not base.jacobian_constant:
            raise ValueError("exact mode needs a base map with a constant Jacobian")
        self.base = base
        self.order = int(order)
        self.derivative_mode = derivative_mode
        self.base_dim = base.dim
        self.dim = (self.order + 1) * base.dim
        self.name = f"lift{self.order}({base.name})" if base.name else f"lift{self.order}"
        if derivative_mode == "exact":
            zero = np.zeros(base.dim)
            J = base.jacobian_forward(zero, zero)
            offset = base.forward_flat(np.zeros(2 * base.dim))
            self._forward_affine = self._assemble_affine(J, offset)
            Jinv = np.linalg.inv(J)
            self._inverse_affine = self._assemble_affine(Jinv, -Jinv @ offset)

    def _assemble_affine(self, J: Array, offset: Array) -> tuple[Array, Array]:
        """Affine representation of the lifted flat map when the base map is
        x -> J x + offset: slot r transforms by J alone for r >= 1."""
        n, k = self.base_dim, self.order
        N = self.dim
        M = np.zeros((2 * N, 2 * N))
        d = np.zeros(2 * N)
        for r in range(k + 1):
            rows_a = slice(r * n, (r + 1) * n)
            rows_b = slice(N + r * n, N + (r + 1) * n)
            cols_q = slice(r * n, (r + 1) * n)
            cols_v = slice(N + r * n, N + (r + 1) * n)
            M[rows_a, cols_q] = J[:n, :n]
            M[rows_a, cols_v] = J[:n, n:]
            M[rows_b, cols_q] = J[n:, :n]
            M[rows_b, cols_v] = J[n:, n:]
        d[0:n] = offset[:n]
        d[N : N + n] = offset[n:]
        return M, d

    # -- jet-structured interface ----------------------------------------
    def forward(self, xt: JetTangent) -> tuple[Jet, Jet]:
        if xt.order != self.order or xt.dim != self.base_dim:
            raise ValueError(f"expected an order-{self.order} tangent over R^{self.base_dim}")
        y = self.forward_flat(xt.flat())
        return (
            Jet.from_flat(y[: self.dim], self.order, self.base_dim),
            Jet.from_flat(y[self.dim :], self.order, self.base_dim),
        )

    def inverse(self, jm: Jet, jp: Jet) -> JetTangent:
        if jm.order != self.order or jp.order != self.order:
            raise ValueError(f"expected order-{self.order} jets")
        x = self.inverse_flat(np.concatenate([jm.flat(), jp.flat()]))
        return JetTangent.from_flat(x, self.order, self.base_dim)

    # -- flat interface ---------------------------------------------------
    def forward_flat(self, x) -> Array:
        x = np.asarray(x, dtype=float)
        if self.derivative_mode == "exact":
            M, d = self._forward_affine
            return M @ x + d
        xt = JetTangent.from_flat(x, self.order, self.base_dim)
        pushed = self._pushforward(zip_jet_tangent(xt), inverse=False)
        jm, jp = _split_pair_jet(pushed)
        return np.concatenate([jm.flat(), jp.flat()])

    def inverse_flat(self, y) -> Array:
        y = np.asarray(y, dtype=float)
        if self.derivative_mode == "exact":
            M, d = self._inverse_affine
            return M @ y + d
        jm = Jet.from_flat(y[: self.dim], self.order, self.base_dim)
        jp = Jet.from_flat(y[self.dim :], self.order, self.base_dim)
        paired = Jet(tuple(np.concatenate([a, b]) for a, b in zip(jm.derivs, jp.derivs)))
        pushed = self._pushforward(paired, inverse=True)
        return unzip_jet_tangent(pushed).flat()

    def _pushforward(self, j: Jet, inverse: bool) -> Jet:
        F = self.base.inverse_flat if inverse else self.base.forward_flat
        jac = None
        if not inverse and self.base.jacobian_fn is not None:
            jac = lambda x: self.base.jacobian_forward(x[: self.base_dim], x[self.base_dim :])
        method = "chain" if self.order <= 2 else "curve"
        return jet_pushforward(F, j, method=method, jacobian=jac)

    def jacobian_forward_flat(self, x) -> Array:
        if self.derivative_mode == "exact":
            return self._forward_affine[0].copy()
        return jacobian_fd(self.forward_flat, np.asarray(x, dtype=float))

    def as_discretization_map(self) -> DiscretizationMap:
        """View the lifted map as a plain discretization map on R^dim."""
        N = self.dim

        def fwd(z, zdot):
            y = self.forward_flat(np.concatenate([z, zdot]))
            return y[:N], y[N:]

        def inv(a, b):
            x = self.inverse_flat(np.concatenate([a, b]))
            return x[:N], x[N:]

        jac_fn = None
        if self.derivative_mode == "exact":
            M = self._forward_affine[0]
            jac_fn = lambda z, zdot: M
        return DiscretizationMap(
            dim=N,
            forward_fn=fwd,
            inverse_fn=inv,
            jacobian_fn=jac_fn,
            jacobian_constant=self.derivative_mode == "exact",
            name=self.name,
        )


def higher_order_lift(D: DiscretizationMap, order: int, derivative_mode: str = "auto") -> HigherOrderDiscretizationMap:
    """Lift a discretization map to order-k jet spaces."""
    return HigherOrderDiscretizationMap(D, order, derivative_mode)


def _split_pair_jet(j: Jet) -> tuple[Jet, Jet]:
    n = j.dim // 2
    return Jet(tuple(d[:n] for d in j.derivs)), Jet(tuple(d[n:] for d in j.derivs))


class CotangentLiftedMap:
    """Phase-space lift of a discretization map on M = R^m.

    Maps a tangent vector (m, p, mdot, pdot) of T*M to a pair of phase points
    ((m0, p0), (m1, p1)).  The point pair is the base map applied to (m, mdot);
    the covectors solve, with J the base Jacobian at (m, mdot) and covectors as
    rows,

        (-p0, p1) = (pdot, p) . J^{-1}        (forward)
        (pdot, p) = (-p0, p1) . J             (inverse)

    The construction makes the map a discretization map on T*M in its own
    right (see ``as_discretization_map``) and a symplectomorphism, checked by
    :func:`check_symplectomorphism`.
    """

    def __init__(self, base: DiscretizationMap):
        self.base = base
        self.dim = base.dim
        self.name = f"cotangent({base.name})" if base.name else "cotangent"
        self._J_const = None
        if base.jacobian_constant:
            zero = np.zeros(base.dim)
            self._J_const = base.jacobian_forward(zero, zero)
            self._J_const_T_inv = np.linalg.inv(self._J_const.T)

    def _jacobian(self, m: Array, mdot: Array) -> Array:
        if self._J_const is not None:
            return self._J_const
        return self.base.jacobian_forward(m, mdot)

    def forward(self, m, p, mdot, pdot) -> tuple[Array, Array, Array, Array]:
        m = as_vector(m, name="m")
        p = as_vector(p, name="p")
        mdot = as_vector(mdot, name="mdot")
        pdot = as_vector(pdot, name="pdot")
        m0, m1 = self.base.forward(m, mdot)
        rhs = np.concatenate([pdot, p])
        if self._J_const is not None:
            c = self._J_const_T_inv @ rhs
        else:
            J = self._jacobian(m, mdot)
            try:
                c = np.linalg.solve(J.T, rhs)
            except np.linalg.LinAlgError as exc:
                raise SingularJacobian("base Jacobian is singular, covector transport undefined") from exc
        d = self.dim
        return m0, -c[:d], m1, c[d:]

    def inverse(self, m0, p0, m1, p1) -> tuple[Array, Array, Array, Array]:
        m0 = as_vector(m0, name="m0")
        p0 = as_vector(p0, name="p0")
        m1 = as_vector(m1, name="m1")
        p1 = as_vector(p1, name="p1")
        m, mdot = self.base.inverse(m0, m1)
        col = self._jacobian(m, mdot).T @ np.concatenate([-p0, p1])
        d = self.dim
        return m, col[d:], mdot, col[:d]

    # -- flat views: input (m, p, mdot, pdot), output (m0, p0, m1, p1) ----
    def forward_flat(self, x) -> Array:
        x = np.asarray(x, dtype=float)
        d = self.dim
        m0, p0, m1, p1 = self.forward(x[:d], x[d : 2 * d], x[2 * d : 3 * d], x[3 * d :])
        return np.concatenate([m0, p0, m1, p1])

    def inverse_flat(self, y) -> Array:
        y = np.asarray(y, dtype=float)
        d = self.dim
        m, p, mdot, pdot = self.inverse(y[:d], y[d : 2 * d], y[2 * d : 3 * d], y[3 * d :])
        return np.concatenate([m, p, mdot, pdot])

    def as_discretization_map(self) -> DiscretizationMap:
        """The lifted map is itself a discretization map on T*M = R^{2m}."""
        d = self.dim

        def fwd(z, zdot):
            m0, p0, m1, p1 = self.forward(z[:d], z[d:], zdot[:d], zdot[d:])
            return np.concatenate([m0, p0]), np.concatenate([m1, p1])

        def inv(a, b):
            m, p, mdot, pdot = self.inverse(a[:d], a[d:], b[:d], b[d:])
            return np.concatenate([m, p]), np.concatenate([mdot, pdot])

        return DiscretizationMap(dim=2 * d, forward_fn=fwd, inverse_fn=inv, name=self.name)


def cotangent_lift(D: DiscretizationMap) -> CotangentLiftedMap:
    """Lift a discretization map on M to the phase space T*M."""
    return CotangentLiftedMap(D)


class _ClosedFormLiftedMidpoint:
    """Hand-written cotangent lift of the once-lifted midpoint map, used as a
    reference oracle: all four blocks are midpoint averages."""

    def __init__(self, n: int):
        self.dim = 2 * n
        self.name = f"closed-form-lifted-midpoint(n={n})"

    def forward(self, m, p, mdot, pdot):
        m, p, mdot, pdot = (as_vector(z) for z in (m, p, mdot, pdot))
        return m - 0.5 * mdot, p - 0.5 * pdot, m + 0.5 * mdot, p + 0.5 * pdot

    def inverse(self, m0, p0, m1, p1):
        m0, p0, m1, p1 = (as_vector(z) for z in (m0, p0, m1, p1))
        return 0.5 * (m0 + m1), 0.5 * (p0 + p1), m1 - m0, p1 - p0

    def forward_flat(self, x):
        x = np.asarray(x, dtype=float)
        d = self.dim
        m0, p0, m1, p1 = self.forward(x[:d], x[d : 2 * d], x[2 * d : 3 * d], x[3 * d :])
        return np.concatenate([m0, p0, m1, p1])

    def inverse_flat(self, y):
        y = np.asarray(y, dtype=float)
        d = self.dim
        m, p, mdot, pdot = self.inverse(y[:d], y[d : 2 * d], y[2 * d : 3 * d], y[3 * d :])
        return np.concatenate([m, p, mdot, pdot])


def closed_form_lifted_midpoint(n: int) -> _ClosedFormLiftedMidpoint:
    """Closed-form cotangent lift of the first-order lift of the midpoint map
    on R^n (test oracle; the generic construction is the production path)."""
    return _ClosedFormLiftedMidpoint(n)


def second_order_phase_map(n: int, base: DiscretizationMap | None = None, derivative_mode: str = "auto") -> CotangentLiftedMap:
    """Discretization map on the phase space of second-order dynamics on R^n:
    the cotangent lift of the first-order lift of a base map (midpoint unless
    overridden)."""
    if base is None:
        base = midpoint_map(n)
    return cotangent_lift(higher_order_lift(base, 1, derivative_mode).as_discretization_map())


# ---------------------------------------------------------------------------
# symplectic structure matrices and the symplectomorphism check


def canonical_symplectic_matrix(d: int) -> Array:
    """Matrix of sum_i dx^i wedge dp_i in coordinates (x, p) on R^{2d}."""
    O = np.zeros((2 * d, 2 * d))
    O[:d, d:] = np.eye(d)
    O[d:, :d] = -np.eye(d)
    return O


def pair_symplectic_matrix(d: int) -> Array:
    """Difference of the canonical forms pulled back from the two factors, in
    coordinates (m0, p0, m1, p1): minus the canonical block on the first pair,
    plus on the second."""
    w = canonical_symplectic_matrix(d)
    O = np.zeros((4 * d, 4 * d))
    O[: 2 * d, : 2 * d] = -w
    O[2 * d :, 2 * d :] = w
    return O


def tangent_lifted_symplectic_matrix(d: int) -> Array:
    """Matrix of the tangent lift of the canonical form in coordinates
    (m, p, mdot, pdot): dm wedge dpdot plus dmdot wedge dp."""
    I = np.eye(d)
    O = np.zeros((4 * d, 4 * d))
    O[0 * d : 1 * d, 3 * d : 4 * d] = I   # dm ^ dpdot
    O[3 * d : 4 * d, 0 * d : 1 * d] = -I
    O[2 * d : 3 * d, 1 * d : 2 * d] = I   # dmdot ^ dp
    O[1 * d : 2 * d, 2 * d : 3 * d] = -I
    return O


@dataclass(frozen=True)
class SymplectomorphismReport:
    name: str
    tol: float
    defects: Sequence[float]

    @property
    def max_defect(self) -> float:
        return max(self.defects, default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_defect <= self.tol

    def __str__(self):
        status = "ok" if self.passed else "FAILED"
        return f"symplectomorphism[{self.name}] {status}: max defect {self.max_defect:.2e}, tol {self.tol:.1e}"


def check_symplectomorphism(C, samples, tol: float = 1e-6, eps: float | None = None) -> SymplectomorphismReport:
    """Verify numerically that a cotangent-lifted map sends the tangent lift of
    the canonical form to the paired difference form.

    For each sample x in R^{4m} the finite-difference Jacobian S of the flat
    forward map must satisfy S^T Omega_pair S = Omega_tangent.
    """
    d = C.dim
    target = tangent_lifted_symplectic_matrix(d)
    pair = pair_symplectic_matrix(d)
    defects = []
    for x in samples:
        x = as_vector(x, name="sample")
        S = jacobian_fd(C.forward_flat, x, eps=eps)
        defects.append(float(np.max(np.abs(S.T @ pair @ S - target))))
    return SymplectomorphismReport(name=getattr(C, "name", "map"), tol=tol, defects=tuple(defects))
