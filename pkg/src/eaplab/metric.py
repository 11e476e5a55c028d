"""The hv-metric built from the frames, the natural metric d-connection and
metricity residuals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .calculus import HL, VL, PointData, at, h_cov, v_cov
from .spaces import CoFramePair, FramePair, SpaceDefinition, SpacePoint


class InconsistentFrame(ValueError):
    pass


class SingularMetric(ValueError):
    pass


@dataclass(frozen=True)
class HvMetric:
    g_h: np.ndarray
    g_v: np.ndarray
    g_h_inv: np.ndarray
    g_v_inv: np.ndarray


def metric_from_frame(cf: CoFramePair, f: FramePair, tol: float = 1e-10) -> HvMetric:
    """``g_ab = sum_i lambda_i_a lambda_i_b``; inverses from the upper frames."""
    n = f.Lh.shape[0]
    if (np.abs(f.Lh.T @ cf.Ch - np.eye(n)).max() > tol
            or np.abs(f.Lv.T @ cf.Cv - np.eye(n)).max() > tol):
        raise InconsistentFrame("coframe is not dual to the frame")
    return HvMetric(cf.Ch.T @ cf.Ch, cf.Cv.T @ cf.Cv, f.Lh.T @ f.Lh, f.Lv.T @ f.Lv)


# -- jets of the metric ----------------------------------------------------------

def metric_jets(pd: PointData):
    """``(g_h, g_v, g_h_inv, g_v_inv)`` as order-2 jets."""
    def build():
        gh = jets.einsum("ia,ib->ab", pd.Ch, pd.Ch)
        gv = jets.einsum("ia,ib->ab", pd.Cv, pd.Cv)
        ghi = jets.einsum("ia,ib->ab", pd.Lh, pd.Lh)
        gvi = jets.einsum("ia,ib->ab", pd.Lv, pd.Lv)
        return gh, gv, ghi, gvi
    return pd.memo("metric", build)


def hv_metric(pd: PointData) -> HvMetric:
    return HvMetric(*(jets.value(g) for g in metric_jets(pd)))


def natural(pd: PointData):
    """Natural metric d-connection from the Christoffel-type closed formulas."""
    from .connections import Connection

    def build():
        gh, gv, ghi, gvi = metric_jets(pd)
        for g in (gh, gv):
            if abs(np.linalg.det(g.val)) < 1e-12:
                raise SingularMetric("metric block is singular")
        dgh = pd.delta(gh)  # dgh[e, n, m] = delta_m g_{e n}
        christ = dgh.transpose(0, 2, 1) + dgh - dgh.transpose(2, 0, 1)
        G_hh = 0.5 * jets.einsum("ae,emn->amn", ghi, christ)

        dN = pd.vdot(pd.N)  # dN[a, n, b] = dot-d_b N^a_n
        dgv = pd.delta(gv)  # dgv[b, c, n] = delta_n g_bc
        inner = (dgv.transpose(0, 2, 1)
                 - jets.einsum("dc,dnb->bnc", gv, dN)
                 - jets.einsum("bd,dnc->bnc", gv, dN))
        G_vv_h = dN.transpose(0, 2, 1) + 0.5 * jets.einsum("ac,bnc->abn", gvi, inner)

        vgh = pd.vdot(gh)  # vgh[m, e, c] = dot-d_c g_{m e}
        C_hh_v = 0.5 * jets.einsum("ae,mec->amc", ghi, vgh)

        vgv = pd.vdot(gv)  # vgv[d, c, b] = dot-d_b g_dc
        christ_v = vgv.transpose(0, 2, 1) + vgv - vgv.transpose(2, 0, 1)
        C_vv_v = 0.5 * jets.einsum("ad,dbc->abc", gvi, christ_v)
        return Connection(G_hh, G_vv_h, C_hh_v, C_vv_v)
    return pd.memo("natural", build)


def natural_connection(space: SpaceDefinition, p: SpacePoint):
    return natural(at(space, p)).values()


def natural_via_lambda(pd: PointData):
    """Natural connection written through the frames and their o-derivatives."""
    from .calculus import MESH
    from .connections import Connection

    def build():
        nat = natural(pd)
        sh, sv = (MESH, HL), (MESH, VL)
        Ch_h = h_cov(pd, pd.Ch, sh, nat)
        Cv_h = h_cov(pd, pd.Cv, sv, nat)
        Ch_v = v_cov(pd, pd.Ch, sh, nat)
        Cv_v = v_cov(pd, pd.Cv, sv, nat)
        return Connection(
            jets.einsum("ia,imn->amn", pd.Lh, pd.delta(pd.Ch) - Ch_h),
            jets.einsum("ia,ibn->abn", pd.Lv, pd.delta(pd.Cv) - Cv_h),
            jets.einsum("ia,imc->amc", pd.Lh, pd.vdot(pd.Ch) - Ch_v),
            jets.einsum("ia,ibc->abc", pd.Lv, pd.vdot(pd.Cv) - Cv_v),
        )
    return pd.memo("natural_via_lambda", build)


def natural_connection_via_lambda(space: SpaceDefinition, p: SpacePoint):
    return natural_via_lambda(at(space, p)).values()


def metricity_tensors(pd: PointData, D):
    """``(g_{ab|m}, g_{ab||c}, g_{ab|m}, g_{ab||c})`` for the h- then v-metric."""
    gh, gv, _, _ = metric_jets(pd)
    sh, sv = (HL, HL), (VL, VL)
    return (jets.value(h_cov(pd, gh, sh, D)), jets.value(v_cov(pd, gh, sh, D)),
            jets.value(h_cov(pd, gv, sv, D)), jets.value(v_cov(pd, gv, sv, D)))


def metricity_residual(D, space: SpaceDefinition, p: SpacePoint) -> tuple[float, float, float, float]:
    """Max-abs of ``g_{ab|m}``, ``g_{ab||c}`` (horizontal) then the vertical pair.

    ``D`` is a function ``PointData -> Connection`` (e.g. ``connections.canonical``).
    """
    pd = at(space, p)
    return tuple(float(np.abs(t).max()) for t in metricity_tensors(pd, D(pd)))
