"""Jets of curves and their pushforwards.

A ``Jet`` of order k stores the raw derivatives (c(0), c'(0), ..., c^(k)(0))
of a curve c: R -> R^n; slot r is the plain r-th derivative, not the Taylor
coefficient.  ``to_normalized`` / ``from_normalized`` convert between the two
scalings.

``jet_pushforward`` maps the jet of c to the jet of F o c.  Two backends:

* ``"chain"`` (orders <= 2): explicit chain rule, using a closed-form Jacobian
  and second directional derivative of F when supplied, finite differences
  otherwise.
* ``"curve"`` (orders <= 4): rebuild the polynomial curve, compose with F and
  differentiate the composition.  Slower and slightly less accurate, but fully
  independent of the chain-rule path, which makes it the oracle of choice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import UnsupportedOrder
from .numeric import MAX_TAYLOR_ORDER, _eval_vector, jacobian_fd, taylor_derivatives

Array = np.ndarray


def _coerce_slots(slots) -> tuple[Array, ...]:
    out = []
    for s in slots:
        v = np.atleast_1d(np.asarray(s, dtype=float))
        if v.ndim != 1:
            raise ValueError(f"jet slot must be a vector, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("jet slot contains non-finite entries")
        out.append(v)
    if not out:
        raise ValueError("a jet needs at least the order-zero slot")
    dim = out[0].size
    if any(v.size != dim for v in out):
        raise ValueError("jet slots must share one dimension")
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Jet:
    """Order-k jet of a curve in R^n, stored as raw derivatives."""

    derivs: Sequence

    def __post_init__(self):
        object.__setattr__(self, "derivs", _coerce_slots(self.derivs))

    @property
    def order(self) -> int:
        return len(self.derivs) - 1

    @property
    def dim(self) -> int:
        return self.derivs[0].size

    def slot(self, r: int) -> Array:
        return self.derivs[r]

    def flat(self) -> Array:
        return np.concatenate(self.derivs)

    @classmethod
    def from_flat(cls, x, order: int, dim: int) -> "Jet":
        x = np.asarray(x, dtype=float)
        if x.size != (order + 1) * dim:
            raise ValueError(f"expected {(order + 1) * dim} entries, got {x.size}")
        return cls(tuple(x[r * dim : (r + 1) * dim] for r in range(order + 1)))


def to_normalized(j: Jet) -> Jet:
    """Rescale slot r by 1/r!, turning derivatives into Taylor coefficients."""
    return Jet(tuple(d / math.factorial(r) for r, d in enumerate(j.derivs)))


def from_normalized(j: Jet) -> Jet:
    """Inverse of :func:`to_normalized`."""
    return Jet(tuple(d * math.factorial(r) for r, d in enumerate(j.derivs)))


@dataclass(frozen=True, eq=False)
class JetTangent:
    """A tangent vector to the space of order-k jets: a base jet plus a fiber
    velocity for every slot."""

    base: Jet
    fiber: Sequence

    def __post_init__(self):
        object.__setattr__(self, "fiber", _coerce_slots(self.fiber))
        if len(self.fiber) != len(self.base.derivs):
            raise ValueError("fiber must have one velocity per jet slot")
        if self.fiber[0].size != self.base.dim:
            raise ValueError("fiber dimension must match the base jet")

    @property
    def order(self) -> int:
        return self.base.order

    @property
    def dim(self) -> int:
        return self.base.dim

    def flat(self) -> Array:
        return np.concatenate([self.base.flat(), np.concatenate(self.fiber)])

    @classmethod
    def from_flat(cls, x, order: int, dim: int) -> "JetTangent":
        x = np.asarray(x, dtype=float)
        half = (order + 1) * dim
        if x.size != 2 * half:
            raise ValueError(f"expected {2 * half} entries, got {x.size}")
        return cls(
            Jet.from_flat(x[:half], order, dim),
            tuple(x[half + r * dim : half + (r + 1) * dim] for r in range(order + 1)),
        )


def zip_jet_tangent(xt: JetTangent) -> Jet:
    """Identify a tangent vector to jet space with a jet of a tangent-bundle
    curve: slot r of the result is (base_r, fiber_r) stacked.

    In flat coordinates this is a pure permutation; its inverse is
    :func:`unzip_jet_tangent`.
    """
    return Jet(tuple(np.concatenate([b, f]) for b, f in zip(xt.base.derivs, xt.fiber)))


def unzip_jet_tangent(j: Jet) -> JetTangent:
    """Split a jet of a tangent-bundle curve back into base and fiber parts."""
    if j.dim % 2 != 0:
        raise ValueError("need an even-dimensional jet to unzip")
    n = j.dim // 2
    return JetTangent(
        Jet(tuple(d[:n] for d in j.derivs)),
        tuple(d[n:] for d in j.derivs),
    )


def jet_of_curve(c: Callable[[float], Array], order: int, method: str = "fd") -> Jet:
    """Order-k jet of a black-box curve at t = 0."""
    return Jet(tuple(taylor_derivatives(c, 0.0, order, method=method)))


def directional_second_derivative(F, x: Array, u: Array) -> Array:
    """d^2/dt^2 F(x + t u) at t = 0 via a fourth-order central stencil.

    The probe direction is normalized so the step size is independent of |u|.
    """
    nu = float(np.linalg.norm(u))
    if nu == 0.0:
        return np.zeros_like(_eval_vector(F, x))
    e = u / nu
    h = 6e-3 * max(1.0, float(np.max(np.abs(x))))
    v0 = _eval_vector(F, x)
    v1p = _eval_vector(F, x + h * e)
    v1m = _eval_vector(F, x - h * e)
    v2p = _eval_vector(F, x + 2 * h * e)
    v2m = _eval_vector(F, x - 2 * h * e)
    return (-v2p + 16 * v1p - 30 * v0 + 16 * v1m - v2m) / (12 * h * h) * (nu * nu)


def jet_pushforward(
    F: Callable[[Array], Array],
    j: Jet,
    method: str = "auto",
    jacobian: Callable[[Array], Array] | None = None,
    second_directional: Callable[[Array, Array], Array] | None = None,
) -> Jet:
    """Jet of F o c given the jet of c.

    ``jacobian`` and ``second_directional`` supply closed-form derivatives of F
    for the chain backend; omitted ones fall back to finite differences.
    ``second_directional(x, u)`` must return D^2F(x)[u, u].
    """
    k = j.order
    if method == "auto":
        method = "chain" if k <= 2 else "curve"
    if method == "chain":
        if k > 2:
            raise UnsupportedOrder("the chain backend covers jet orders <= 2; use method='curve'")
        x0 = j.derivs[0]
        slots = [_eval_vector(F, x0)]
        if k >= 1:
            J = np.asarray(jacobian(x0), dtype=float) if jacobian is not None else jacobian_fd(F, x0)
            slots.append(J @ j.derivs[1])
        if k >= 2:
            if second_directional is not None:
                s2 = np.atleast_1d(np.asarray(second_directional(x0, j.derivs[1]), dtype=float))
            else:
                s2 = directional_second_derivative(F, x0, j.derivs[1])
            slots.append(s2 + J @ j.derivs[2])
        return Jet(tuple(slots))
    if method == "curve":
        if k > MAX_TAYLOR_ORDER:
            raise UnsupportedOrder(f"jet order {k} exceeds the supported maximum {MAX_TAYLOR_ORDER}")
        coeffs = [d / math.factorial(r) for r, d in enumerate(j.derivs)]

        def composed(t: float) -> Array:
            c = coeffs[-1]
            for a in coeffs[-2::-1]:
                c = a + t * c
            return F(c)

        return Jet(tuple(taylor_derivatives(composed, 0.0, k, method="fd")))
    raise ValueError(f"unknown method {method!r}, expected 'auto', 'chain' or 'curve'")
