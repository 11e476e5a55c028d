"""Canonical, dual and symmetric d-connections, torsion, contortion and the
basic vector.

Connection coefficients are stored as

* ``G_hh[alpha, mu, nu]  = Gamma^alpha_{mu nu}``
* ``G_vv_h[a, b, nu]     = Gamma^a_{b nu}``
* ``C_hh_v[alpha, mu, c] = C^alpha_{mu c}``
* ``C_vv_v[a, b, c]      = C^a_{bc}``

Functions taking a :class:`~eaplab.calculus.PointData` return jets (so the
coefficients can be differentiated once more); the ``(space, p)`` wrappers
return plain arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .calculus import HL, HU, MESH, VL, VU, PointData, at, h_cov, nlc_curvature, v_cov
from .metric import metric_jets, natural
from .spaces import SpaceDefinition, SpacePoint

BLOCKS = ("G_hh", "G_vv_h", "C_hh_v", "C_vv_v")


@dataclass(frozen=True)
class Connection:
    G_hh: object
    G_vv_h: object
    C_hh_v: object
    C_vv_v: object

    def blocks(self) -> dict:
        return {k: getattr(self, k) for k in BLOCKS}

    def values(self) -> "Connection":
        return Connection(*(np.array(jets.value(getattr(self, k))) for k in BLOCKS))

    def dual(self) -> "Connection":
        return dual_connection(self)

    def symmetric(self) -> "Connection":
        return symmetric_connection(self)


def dual_connection(D: Connection) -> Connection:
    """Swap the lower indices of the hh- and vvv-blocks."""
    return Connection(_swap(D.G_hh), D.G_vv_h, D.C_hh_v, _swap(D.C_vv_v))


def symmetric_connection(D: Connection) -> Connection:
    """Symmetrize the hh- and vvv-blocks in their lower indices."""
    return Connection(0.5 * (D.G_hh + _swap(D.G_hh)), D.G_vv_h, D.C_hh_v,
                      0.5 * (D.C_vv_v + _swap(D.C_vv_v)))


def _swap(a):
    return a.swap(1, 2) if isinstance(a, jets.Jet) else np.swapaxes(a, 1, 2)


# -- the four connections at a point -----------------------------------------

def canonical(pd: PointData) -> Connection:
    """``Gamma = lambda_i^alpha delta_nu lambda_i_mu`` and analogues."""
    def build():
        return Connection(
            jets.einsum("ia,imn->amn", pd.Lh, pd.delta(pd.Ch)),
            jets.einsum("ia,ibn->abn", pd.Lv, pd.delta(pd.Cv)),
            jets.einsum("ia,imc->amc", pd.Lh, pd.vdot(pd.Ch)),
            jets.einsum("ia,ibc->abc", pd.Lv, pd.vdot(pd.Cv)),
        )
    return pd.memo("canonical", build)


def dual(pd: PointData) -> Connection:
    return pd.memo("dual", lambda: dual_connection(canonical(pd)))


def symmetric(pd: PointData) -> Connection:
    return pd.memo("symmetric", lambda: symmetric_connection(canonical(pd)))


CONNECTIONS = {
    "canonical": canonical,
    "natural": natural,
    "dual": dual,
    "symmetric": symmetric,
}


def frame_derivatives(pd: PointData, D: Connection):
    """Covariant derivatives of the upper frames under ``D``.

    Returns ``(Lh_|, Lh_||, Lv_|, Lv_||)`` with the mesh index first, e.g.
    ``Lh_|[i, alpha, mu] = lambda_i^alpha_{|mu}``.
    """
    sh, sv = (MESH, HU), (MESH, VU)
    return (h_cov(pd, pd.Lh, sh, D), v_cov(pd, pd.Lh, sh, D),
            h_cov(pd, pd.Lv, sv, D), v_cov(pd, pd.Lv, sv, D))


def coframe_derivatives(pd: PointData, D: Connection):
    """Covariant derivatives of the lower coframes under ``D``."""
    sh, sv = (MESH, HL), (MESH, VL)
    return (h_cov(pd, pd.Ch, sh, D), v_cov(pd, pd.Ch, sh, D),
            h_cov(pd, pd.Cv, sv, D), v_cov(pd, pd.Cv, sv, D))


# -- contortion ----------------------------------------------------------------

@dataclass(frozen=True)
class Contortion:
    g_hh: object    # gamma^alpha_{mu nu}
    g_vv_h: object  # gamma^a_{b mu}
    g_hh_v: object  # gamma^alpha_{mu c}
    g_vv_v: object  # gamma^a_{bc}

    def values(self) -> "Contortion":
        return Contortion(*(np.array(jets.value(getattr(self, k)))
                            for k in ("g_hh", "g_vv_h", "g_hh_v", "g_vv_v")))


def contortion_jets(pd: PointData) -> Contortion:
    """``gamma = lambda_i^. lambda_i_{. o|}`` (o-derivatives under the natural connection)."""
    def build():
        Chh, Chv, Cvh, Cvv = coframe_derivatives(pd, natural(pd))
        return Contortion(
            jets.einsum("ia,imn->amn", pd.Lh, Chh),
            jets.einsum("ia,ibm->abm", pd.Lv, Cvh),
            jets.einsum("ia,imc->amc", pd.Lh, Chv),
            jets.einsum("ia,ibc->abc", pd.Lv, Cvv),
        )
    return pd.memo("contortion", build)


def contortion_difference(pd: PointData) -> Contortion:
    """Canonical minus natural coefficients."""
    c, o = canonical(pd), natural(pd)
    return Contortion(c.G_hh - o.G_hh, c.G_vv_h - o.G_vv_h, c.C_hh_v - o.C_hh_v, c.C_vv_v - o.C_vv_v)


def contortion(space: SpaceDefinition, p: SpacePoint) -> Contortion:
    return contortion_jets(at(space, p)).values()


def canonical_via_contortion_jets(pd: PointData) -> Connection:
    """Natural connection plus the frame-contracted o-derivatives of the coframes."""
    def build():
        o = natural(pd)
        g = contortion_jets(pd)
        return Connection(o.G_hh + g.g_hh, o.G_vv_h + g.g_vv_h, o.C_hh_v + g.g_hh_v, o.C_vv_v + g.g_vv_v)
    return pd.memo("canonical_via_contortion", build)


def canonical_connection(space: SpaceDefinition, p: SpacePoint) -> Connection:
    return canonical(at(space, p)).values()


def canonical_via_contortion(space: SpaceDefinition, p: SpacePoint) -> Connection:
    return canonical_via_contortion_jets(at(space, p)).values()


# -- torsion -------------------------------------------------------------------

@dataclass(frozen=True)
class Torsion:
    Lam: object  # Lambda^alpha_{mu nu}
    Rnl: object  # R^a_{mu nu}
    Chv: object  # C^alpha_{mu c}
    P: object    # P^a_{mu c}
    Tv: object   # T^a_{bc}

    def values(self) -> "Torsion":
        return Torsion(*(np.array(jets.value(getattr(self, k))) for k in TORSION_BLOCKS))


TORSION_BLOCKS = ("Lam", "Rnl", "Chv", "P", "Tv")


def torsion_of(pd: PointData, D: Connection) -> Torsion:
    dN = pd.vdot(pd.N)  # dN[a, mu, c] = dot-d_c N^a_mu
    return Torsion(
        D.G_hh - _swap(D.G_hh),
        nlc_curvature(pd),
        D.C_hh_v,
        dN - _swap(D.G_vv_h),
        D.C_vv_v - _swap(D.C_vv_v),
    )


def torsion_jets(pd: PointData, which: str = "canonical") -> Torsion:
    return pd.memo(("torsion", which), lambda: torsion_of(pd, CONNECTIONS[which](pd)))


def torsion(D, space: SpaceDefinition, p: SpacePoint) -> Torsion:
    """Torsion of ``D`` (a connection name or a ``PointData -> Connection`` function)."""
    pd = at(space, p)
    if isinstance(D, str):
        return torsion_jets(pd, D).values()
    return torsion_of(pd, D(pd)).values()


# -- lowered forms, basic vector, relations ----------------------------------------

def lowered_contortion(pd: PointData):
    """All-lower contortion blocks ``(g_{amn}, g_{abm}, g_{amc}, g_{abc})`` (values)."""
    gh, gv, _, _ = (jets.value(g) for g in metric_jets(pd))
    g = contortion_jets(pd).values()
    return (np.einsum("ae,emn->amn", gh, g.g_hh), np.einsum("ad,dbm->abm", gv, g.g_vv_h),
            np.einsum("ae,emc->amc", gh, g.g_hh_v), np.einsum("ad,dbc->abc", gv, g.g_vv_v))


def contortion_from_torsion(T: Torsion, gh: np.ndarray, gv: np.ndarray):
    """All-lower ``gamma_{amn}`` and ``gamma_{abc}`` from the torsion alone."""
    L = np.einsum("ae,emn->amn", jets.value(gh), jets.value(T.Lam))
    Tl = np.einsum("ad,dbc->abc", jets.value(gv), jets.value(T.Tv))
    # [a, m, n] <- L[a, m, n] + L[n, m, a] + L[m, n, a]
    g_h = 0.5 * (L + L.transpose(2, 1, 0) + L.transpose(2, 0, 1))
    g_v = 0.5 * (Tl + Tl.transpose(2, 1, 0) + Tl.transpose(2, 0, 1))
    return g_h, g_v


@dataclass(frozen=True)
class BasicVector:
    C_h: np.ndarray
    C_v: np.ndarray


def basic_vector(T: Torsion, g: Contortion | None = None) -> BasicVector:
    """``C_mu = Lambda^alpha_{mu alpha}``, ``C_b = T^a_{ba}``; with ``g``, the contortion traces."""
    if g is None:
        return BasicVector(np.einsum("ama->m", jets.value(T.Lam)), np.einsum("aba->b", jets.value(T.Tv)))
    return BasicVector(np.einsum("ama->m", jets.value(g.g_hh)), np.einsum("aba->b", jets.value(g.g_vv_v)))


def basic_vector_jets(pd: PointData):
    """Order-1 jets of ``(C_mu, C_a)`` for the canonical torsion."""
    def build():
        T = torsion_jets(pd)
        return jets.einsum("ama->m", T.Lam), jets.einsum("aba->b", T.Tv)
    return pd.memo("basic_vector", build)


def torsion_contortion_relations(pd: PointData) -> dict[str, float]:
    """Residuals of the four torsion/contortion relations."""
    T = torsion_jets(pd).values()
    To = torsion_jets(pd, "natural").values()
    g = contortion_jets(pd).values()
    return {
        "Lambda": float(np.abs(T.Lam - (g.g_hh - g.g_hh.transpose(0, 2, 1))).max()),
        "P": float(np.abs(T.P - (-g.g_vv_h.transpose(0, 2, 1) + To.P)).max()),
        "C": float(np.abs(T.Chv - (g.g_hh_v + To.Chv)).max()),
        "T": float(np.abs(T.Tv - (g.g_vv_v - g.g_vv_v.transpose(0, 2, 1))).max()),
    }
