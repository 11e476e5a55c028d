"""Truncated second-order Taylor arithmetic and a finite-difference oracle.

A :class:`Jet` carries an array of values together with their exact first
and second partial derivatives with respect to the ``2n`` coordinates of a
point on TM (``x`` first, then ``y``).  Jets are array valued: a single jet
may hold a whole tensor, and ``einsum`` contractions propagate derivatives
through the product rule.

Differentiating a jet lowers its order by one.  Fields built from order-2
inputs can therefore be differentiated twice, which is all the geometry
needs (curvature uses derivatives of connection coefficients, which are
themselves first derivatives of the frames).
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

_DERIV_LETTERS = "YZ"


class EvaluationDomainError(ValueError):
    """Raised when a scalar evaluator fails at the requested point."""


class PointOutsideDomain(ValueError):
    """Raised when a point (or a finite-difference stencil) leaves the domain."""


class Jet:
    """Array-valued truncated Taylor expansion of order 0, 1 or 2.

    ``val`` has shape ``S``; ``grad`` has shape ``S + (m,)`` and ``hess``
    shape ``S + (m, m)``.  Missing derivatives (``None``) mean the order was
    truncated.
    """

    __slots__ = ("val", "grad", "hess")
    __array_ufunc__ = None  # make numpy defer to the reflected jet operators

    def __init__(self, val, grad=None, hess=None):
        self.val = np.asarray(val, dtype=float)
        self.grad = None if grad is None else np.asarray(grad, dtype=float)
        self.hess = None if hess is None or grad is None else np.asarray(hess, dtype=float)

    # -- construction -----------------------------------------------------
    @classmethod
    def variables(cls, values: Sequence[float]) -> "Jet":
        """Independent coordinates: grad is the identity, hess is zero."""
        v = np.asarray(values, dtype=float)
        m = v.shape[0]
        return cls(v, np.eye(m), np.zeros((m, m, m)))

    @classmethod
    def constant(cls, val, m: int, order: int = 2) -> "Jet":
        v = np.asarray(val, dtype=float)
        g = np.zeros(v.shape + (m,)) if order >= 1 else None
        h = np.zeros(v.shape + (m, m)) if order >= 2 else None
        return cls(v, g, h)

    # -- shape helpers ----------------------------------------------------
    @property
    def order(self) -> int:
        if self.grad is None:
            return 0
        return 1 if self.hess is None else 2

    @property
    def shape(self) -> tuple:
        return self.val.shape

    @property
    def ndim(self) -> int:
        return self.val.ndim

    @property
    def nvars(self) -> int | None:
        return None if self.grad is None else self.grad.shape[-1]

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        if order == 1:
            return Jet(self.val, self.grad)
        return Jet(self.val)

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        g = None if self.grad is None else self.grad[key]
        h = None if self.hess is None else self.hess[key]
        return Jet(self.val[key], g, h)

    def transpose(self, *axes) -> "Jet":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        k = self.ndim
        g = None if self.grad is None else self.grad.transpose(axes + (k,))
        h = None if self.hess is None else self.hess.transpose(axes + (k, k + 1))
        return Jet(self.val.transpose(axes), g, h)

    def swap(self, a: int, b: int) -> "Jet":
        axes = list(range(self.ndim))
        axes[a], axes[b] = axes[b], axes[a]
        return self.transpose(tuple(axes))

    def reshape(self, *shape) -> "Jet":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        m = self.nvars
        g = None if self.grad is None else self.grad.reshape(shape + (m,))
        h = None if self.hess is None else self.hess.reshape(shape + (m, m))
        return Jet(self.val.reshape(shape), g, h)

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, shape={self.shape}, val={self.val!r})"

    # -- differentiation --------------------------------------------------
    def partials(self) -> "Jet":
        """All first partials as a jet with a trailing coordinate axis."""
        if self.grad is None:
            raise ValueError("cannot differentiate an order-0 jet")
        return Jet(self.grad, self.hess)

    def d(self, k: int) -> "Jet":
        """Partial derivative along coordinate ``k``."""
        if self.grad is None:
            raise ValueError("cannot differentiate an order-0 jet")
        h = None if self.hess is None else self.hess[..., k, :]
        return Jet(self.grad[..., k], h)

    # -- arithmetic -------------------------------------------------------
    def __neg__(self) -> "Jet":
        return Jet(-self.val,
                   None if self.grad is None else -self.grad,
                   None if self.hess is None else -self.hess)

    def __pos__(self) -> "Jet":
        return self

    def __add__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            val = self.val + other
            return Jet(val, _fit(self.grad, val.shape, 1), _fit(self.hess, val.shape, 2))
        order = min(self.order, other.order)
        a, b = self.truncate(order), other.truncate(order)
        # derivative axes are trailing, so leading shapes broadcast as usual
        val = a.val + b.val
        grad = None if order < 1 else a.grad + b.grad
        hess = None if order < 2 else a.hess + b.hess
        return Jet(val, grad, hess)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        return self + (-other)

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            other = np.asarray(other, dtype=float)
            return Jet(self.val * other,
                       None if self.grad is None else self.grad * other[..., None],
                       None if self.hess is None else self.hess * other[..., None, None])
        order = min(self.order, other.order)
        a, b = self.truncate(order), other.truncate(order)
        val = a.val * b.val
        grad = hess = None
        if order >= 1:
            grad = a.grad * b.val[..., None] + a.val[..., None] * b.grad
        if order >= 2:
            ga, gb = a.grad[..., :, None], b.grad[..., None, :]
            hess = (a.hess * b.val[..., None, None] + a.val[..., None, None] * b.hess
                    + ga * gb + np.swapaxes(ga * gb, -1, -2))
        return Jet(val, grad, hess)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet":
        return self.reciprocal() * other

    def __pow__(self, k: int) -> "Jet":
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        out: Jet | float = 1.0
        for _ in range(int(k)):
            out = self * out
        return out if isinstance(out, Jet) else Jet.constant(out, self.nvars or 0, self.order)

    def reciprocal(self) -> "Jet":
        v = self.val
        return self._chain(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def _chain(self, f0, f1, f2) -> "Jet":
        """Apply a scalar function given its value and first two derivatives."""
        grad = hess = None
        if self.grad is not None:
            grad = f1[..., None] * self.grad
        if self.hess is not None:
            g = self.grad
            hess = f1[..., None, None] * self.hess + f2[..., None, None] * g[..., :, None] * g[..., None, :]
        return Jet(f0, grad, hess)


def _fit(arr, shape, extra):
    if arr is None:
        return None
    return np.broadcast_to(arr, tuple(shape) + arr.shape[arr.ndim - extra:]).copy()


# -- elementwise functions (dispatch on jets and plain numbers) -------------

def sin(z):
    if isinstance(z, Jet):
        s, c = np.sin(z.val), np.cos(z.val)
        return z._chain(s, c, -s)
    return np.sin(z)


def cos(z):
    if isinstance(z, Jet):
        s, c = np.sin(z.val), np.cos(z.val)
        return z._chain(c, -s, -c)
    return np.cos(z)


def exp(z):
    if isinstance(z, Jet):
        e = np.exp(z.val)
        return z._chain(e, e, e)
    return np.exp(z)


def log(z):
    if isinstance(z, Jet):
        if np.any(z.val <= 0):
            raise EvaluationDomainError("log of a non-positive value")
        v = z.val
        return z._chain(np.log(v), 1.0 / v, -1.0 / v**2)
    if np.any(np.asarray(z) <= 0):
        raise EvaluationDomainError("log of a non-positive value")
    return np.log(z)


def sqrt(z):
    if isinstance(z, Jet):
        if np.any(z.val < 0):
            raise EvaluationDomainError("sqrt of a negative value")
        r = np.sqrt(z.val)
        return z._chain(r, 0.5 / r, -0.25 / r**3)
    if np.any(np.asarray(z) < 0):
        raise EvaluationDomainError("sqrt of a negative value")
    return np.sqrt(z)


# -- array-level helpers ---------------------------------------------------

def value(z):
    """Plain value of a jet or a number."""
    return z.val if isinstance(z, Jet) else np.asarray(z, dtype=float)


def as_jet(z, like: Jet) -> Jet:
    if isinstance(z, Jet):
        return z
    return Jet.constant(z, like.nvars, like.order)


def stack(items, axis: int = 0):
    """Stack jets and/or numbers; nested lists become nested axes."""
    if isinstance(items, (list, tuple)):
        parts = [stack(it, 0) for it in items]
        jets = [p for p in parts if isinstance(p, Jet)]
        if not jets:
            return np.stack([np.asarray(p, dtype=float) for p in parts], axis=axis)
        order = min(j.order for j in jets)
        m = jets[0].nvars
        parts = [as_jet(p, jets[0]).truncate(order) if isinstance(p, Jet)
                 else Jet.constant(np.broadcast_to(np.asarray(p, dtype=float), jets[0].shape), m, order)
                 for p in parts]
        val = np.stack([p.val for p in parts], axis=axis)
        g = np.stack([p.grad for p in parts], axis=axis) if order >= 1 else None
        h = np.stack([p.hess for p in parts], axis=axis) if order >= 2 else None
        return Jet(val, g, h)
    return items


def einsum(subscripts: str, a, b=None):
    """``np.einsum`` for one or two operands, either of which may be a jet.

    Derivative axes are appended as trailing indices, so subscripts must be
    explicit (no ellipsis) and must not use the letters ``Y`` or ``Z``.
    """
    if b is None:
        if not isinstance(a, Jet):
            return np.einsum(subscripts, a)
        ins, out = subscripts.split("->")
        y, z = _DERIV_LETTERS
        g = None if a.grad is None else np.einsum(f"{ins}{y}->{out}{y}", a.grad)
        h = None if a.hess is None else np.einsum(f"{ins}{y}{z}->{out}{y}{z}", a.hess)
        return Jet(np.einsum(subscripts, a.val), g, h)

    ins, out = subscripts.split("->")
    sa, sb = ins.split(",")
    y, z = _DERIV_LETTERS
    ja, jb = isinstance(a, Jet), isinstance(b, Jet)
    if not ja and not jb:
        return np.einsum(subscripts, a, b)
    if ja and jb:
        order = min(a.order, b.order)
        a, b = a.truncate(order), b.truncate(order)
    else:
        order = a.order if ja else b.order
    va, vb = value(a), value(b)
    val = np.einsum(subscripts, va, vb, optimize=False)
    grad = hess = None
    if order >= 1:
        grad = 0.0
        if ja:
            grad = grad + np.einsum(f"{sa}{y},{sb}->{out}{y}", a.grad, vb)
        if jb:
            grad = grad + np.einsum(f"{sa},{sb}{y}->{out}{y}", va, b.grad)
    if order >= 2:
        hess = 0.0
        if ja:
            hess = hess + np.einsum(f"{sa}{y}{z},{sb}->{out}{y}{z}", a.hess, vb)
        if jb:
            hess = hess + np.einsum(f"{sa},{sb}{y}{z}->{out}{y}{z}", va, b.hess)
        if ja and jb:
            cross = np.einsum(f"{sa}{y},{sb}{z}->{out}{y}{z}", a.grad, b.grad)
            hess = hess + cross + np.swapaxes(cross, -1, -2)
    return Jet(val, grad, hess)


def contract(subscripts: str, *operands):
    """Chain of pairwise jet einsums, left to right.

    ``contract("ab,bc,cd->ad", A, B, C)`` contracts ``A`` with ``B`` keeping
    every index still needed downstream, then with ``C``.
    """
    ins, out = subscripts.split("->")
    specs = ins.split(",")
    if len(specs) != len(operands):
        raise ValueError("operand count does not match subscripts")
    if len(specs) == 1:
        return einsum(subscripts, operands[0])
    acc, acc_spec = operands[0], specs[0]
    for k in range(1, len(specs)):
        rest = "".join(specs[k + 1:]) + out
        keep = "".join(dict.fromkeys(c for c in acc_spec + specs[k] if c in rest))
        if k == len(specs) - 1:
            keep = out
        acc = einsum(f"{acc_spec},{specs[k]}->{keep}", acc, operands[k])
        acc_spec = keep
    return acc


def inv(m):
    """Matrix inverse of a square jet (or plain array)."""
    if not isinstance(m, Jet):
        return np.linalg.inv(m)
    v = np.linalg.inv(m.val)
    grad = hess = None
    if m.grad is not None:
        # d(M^-1) = -M^-1 dM M^-1
        grad = -np.einsum("ij,jkY,kl->ilY", v, m.grad, v)
    if m.hess is not None:
        t = np.einsum("ij,jkY->ikY", v, m.grad)
        hess = (np.einsum("ikY,klZ,lm->imYZ", t, t, v)
                + np.einsum("ikZ,klY,lm->imYZ", t, t, v)
                - np.einsum("ij,jkYZ,kl->ilYZ", v, m.hess, v))
    return Jet(v, grad, hess)


# -- evaluators -------------------------------------------------------------

ScalarEvaluator = Callable[[Sequence, Sequence], object]


def jet_evaluate(f: ScalarEvaluator, x: Sequence[float], y: Sequence[float]) -> Jet:
    """Value, gradient and Hessian of ``f(x, y)`` by Taylor propagation.

    ``grad`` is ordered ``(d/dx^0..d/dx^{n-1}, d/dy^0..d/dy^{n-1})``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    z = Jet.variables(np.concatenate([x, y]))
    xs = [z[k] for k in range(n)]
    ys = [z[n + k] for k in range(n)]
    try:
        out = f(xs, ys)
    except EvaluationDomainError:
        raise
    except (ArithmeticError, ValueError, FloatingPointError) as exc:
        raise EvaluationDomainError(str(exc)) from exc
    out = stack(out) if isinstance(out, (list, tuple)) else out
    if not isinstance(out, Jet):
        out = Jet.constant(out, 2 * n)
    return out


def fd_partial(f: ScalarEvaluator, x: Sequence[float], y: Sequence[float], slot: int,
               h: float = 1e-5, domain=None) -> np.ndarray:
    """Central difference of ``f`` along coordinate ``slot`` (x slots first)."""
    if h <= 0:
        raise ValueError("step must be positive")
    z = np.concatenate([np.asarray(x, dtype=float), np.asarray(y, dtype=float)])
    n = z.shape[0] // 2
    e = np.zeros_like(z)
    e[slot] = h
    zp, zm = z + e, z - e
    if domain is not None:
        for w in (zp, zm):
            if not domain.contains(w[:n], w[n:]):
                raise PointOutsideDomain("finite-difference stencil leaves the domain")
    fp = np.asarray(stack(f(list(zp[:n]), list(zp[n:]))), dtype=float)
    fm = np.asarray(stack(f(list(zm[:n]), list(zm[n:]))), dtype=float)
    return (fp - fm) / (2.0 * h)


def fd_second(f: ScalarEvaluator, x, y, i: int, j: int, h: float = 1e-3) -> np.ndarray:
    """Nested central difference for the mixed partial along slots i, j."""
    z = np.concatenate([np.asarray(x, dtype=float), np.asarray(y, dtype=float)])
    n = z.shape[0] // 2

    def shifted(si, sj):
        w = z.copy()
        w[i] += si * h
        w[j] += sj * h
        return np.asarray(stack(f(list(w[:n]), list(w[n:]))), dtype=float)

    return (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) / (4.0 * h * h)
