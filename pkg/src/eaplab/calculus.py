"""Adapted derivatives and generic h-/v-covariant derivatives.

Tensor components are dense arrays (plain or :class:`~eaplab.jets.Jet`)
whose axes are tagged by a *signature*: a tuple of slot tags, each one of
``HU, HL, VU, VL`` (horizontal/vertical, upper/lower) or ``MESH`` for the
field label ``i``, which is inert under covariant differentiation.

A :class:`PointData` bundles the order-2 jets of the frames and the
nonlinear connection at one point, plus a memo table so the derived objects
(connections, torsion, curvature, ...) are built once per point.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable

import numpy as np

from . import jets
from .jets import Jet
from .spaces import SpaceDefinition, SpacePoint, field_jets


class SlotKind(Enum):
    H = "H"
    V = "V"
    M = "M"


@dataclass(frozen=True)
class Slot:
    kind: SlotKind
    upper: bool

    def __repr__(self) -> str:
        if self.kind is SlotKind.M:
            return "MESH"
        return f"{self.kind.value}{'^' if self.upper else '_'}"


HU = Slot(SlotKind.H, True)
HL = Slot(SlotKind.H, False)
VU = Slot(SlotKind.V, True)
VL = Slot(SlotKind.V, False)
MESH = Slot(SlotKind.M, False)


class SignatureMismatch(ValueError):
    pass


@dataclass(frozen=True)
class TensorBlock:
    signature: tuple
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(jets.value(self.data), dtype=float)
        n = data.shape[0] if data.ndim else 0
        if data.ndim != len(self.signature) or any(s != n for s in data.shape):
            raise SignatureMismatch(f"array shape {data.shape} does not fit signature {self.signature}")
        object.__setattr__(self, "data", data)


@dataclass(frozen=True)
class TensorField:
    signature: tuple
    evaluator: Callable  # PointData -> jet array


_IDX = "abcdefghijklmnop"


class PointData:
    """Order-2 jets of ``Lh``, ``Lv``, ``N`` and their coframes at one point."""

    def __init__(self, space: SpaceDefinition, p: SpacePoint):
        self.space = space
        self.p = p
        self.n = space.n
        self.Lh, self.Lv, self.N = field_jets(space, p)
        for name, m in (("horizontal", self.Lh), ("vertical", self.Lv)):
            det = float(np.linalg.det(m.val))
            if abs(det) < 1e-10:
                from .spaces import SingularFrame
                raise SingularFrame(name, det)
        # Ch[i, alpha] = lambda_i_alpha: the transposed inverse of Lh
        self.Ch = jets.inv(self.Lh).swap(0, 1)
        self.Cv = jets.inv(self.Lv).swap(0, 1)
        self._memo: dict = {}

    def memo(self, key, build):
        if key not in self._memo:
            self._memo[key] = build()
        return self._memo[key]

    # -- adapted derivatives -------------------------------------------------
    def delta(self, J: Jet) -> Jet:
        """``delta_mu J`` appended as a trailing H-lower axis."""
        return delta(J, self.N)

    def vdot(self, J: Jet) -> Jet:
        """``dot-partial_c J`` appended as a trailing V-lower axis."""
        return vdot(J, self.n)

    @property
    def liouville(self) -> Jet:
        """The components ``y^a`` as an order-2 jet."""
        n = self.n
        z = Jet.variables(np.concatenate([self.p.x, self.p.y]))
        return z[n:]


@lru_cache(maxsize=16)
def _cached(space: SpaceDefinition, xb: bytes, yb: bytes) -> PointData:
    return PointData(space, SpacePoint(np.frombuffer(xb), np.frombuffer(yb)))


def at(space: SpaceDefinition, p: SpacePoint) -> PointData:
    """Point data for ``(space, p)``; recently used points are cached."""
    return _cached(space, p.x.tobytes(), p.y.tobytes())


def delta(J: Jet, N: Jet) -> Jet:
    n = N.shape[0]
    D = J.partials()
    r = J.ndim
    s = _IDX[:r]
    dx = D[(slice(None),) * r + (slice(0, n),)]
    dy = D[(slice(None),) * r + (slice(n, 2 * n),)]
    return dx - jets.einsum(f"{s}w,wv->{s}v", dy, N)


def vdot(J: Jet, n: int) -> Jet:
    D = J.partials()
    return D[(slice(None),) * J.ndim + (slice(n, 2 * n),)]


def delta_derivative(f, space: SpaceDefinition, p: SpacePoint, mu: int) -> float:
    """``delta_mu f = d_mu f - N^a_mu dot-d_a f`` for a scalar evaluator ``f(x, y)``."""
    from .spaces import evaluate_nlc
    g = jets.jet_evaluate(f, p.x, p.y)
    N = evaluate_nlc(space, p)
    n = space.n
    return float(g.grad[mu] - N[:, mu] @ g.grad[n:])


def nlc_curvature(pd: PointData) -> Jet:
    """``R[a, mu, nu] = delta_nu N^a_mu - delta_mu N^a_nu`` (order-1 jet)."""
    def build():
        dN = pd.delta(pd.N)  # dN[a, mu, nu] = delta_nu N^a_mu
        return dN - dN.swap(1, 2)
    return pd.memo("Rnl", build)


# -- generic covariant derivative ----------------------------------------------

def _connection_terms(T, signature, hblock, vblock):
    """Sum of the connection terms of a covariant derivative.

    ``hblock[alpha, eps, w]`` acts on H slots and ``vblock[a, d, w]`` on V
    slots; ``w`` is the differentiation slot, appended last.
    """
    r = len(signature)
    s = _IDX[:r]
    total = None
    for k, slot in enumerate(signature):
        if slot.kind is SlotKind.M:
            continue
        G = hblock if slot.kind is SlotKind.H else vblock
        tin = s[:k] + "u" + s[k + 1:]
        tout = s[:k] + "v" + s[k + 1:] + "w"
        if slot.upper:
            term = jets.einsum(f"{tin},vuw->{tout}", T, G)
        else:
            term = -jets.einsum(f"{tin},uvw->{tout}", T, G)
        total = term if total is None else total + term
    return total


def _check(T, signature):
    if T.ndim != len(signature):
        raise SignatureMismatch(f"tensor of rank {T.ndim} given signature of length {len(signature)}")


def h_cov(pd: PointData, T: Jet, signature, D) -> Jet:
    """h-covariant derivative ``T_{|mu}`` under the d-connection ``D``."""
    _check(T, signature)
    out = pd.delta(T)
    extra = _connection_terms(T, signature, D.G_hh, D.G_vv_h)
    return out if extra is None else out + extra


def v_cov(pd: PointData, T: Jet, signature, D) -> Jet:
    """v-covariant derivative ``T_{||c}`` under the d-connection ``D``."""
    _check(T, signature)
    out = pd.vdot(T)
    extra = _connection_terms(T, signature, D.C_hh_v, D.C_vv_v)
    return out if extra is None else out + extra


def h_covariant_derivative(field: TensorField, D, space: SpaceDefinition, p: SpacePoint) -> TensorBlock:
    pd = at(space, p)
    Dc = D(pd) if callable(D) else D
    out = h_cov(pd, field.evaluator(pd), field.signature, Dc)
    return TensorBlock(tuple(field.signature) + (HL,), jets.value(out))


def v_covariant_derivative(field: TensorField, D, space: SpaceDefinition, p: SpacePoint) -> TensorBlock:
    pd = at(space, p)
    Dc = D(pd) if callable(D) else D
    out = v_cov(pd, field.evaluator(pd), field.signature, Dc)
    return TensorBlock(tuple(field.signature) + (VL,), jets.value(out))
