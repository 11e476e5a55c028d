"""Curvature of d-connections: the general coefficient formulas, the
torsion/contortion closed forms for the natural, dual and symmetric
connections, contractions and Bianchi residuals.

Every bundle is stored in one slot order:

* ``R_hh[alpha, beta, mu, nu]``, ``R_vh[a, b, mu, nu]``
* ``P_h[alpha, beta, nu, c]``,   ``P_v[a, b, nu, c]``
* ``S_h[alpha, beta, b, c]``,    ``S_v[a, b, c, d]``

Closed forms that read more naturally with permuted slots (for instance
the dual curvature indexed ``beta nu mu``) are transposed into this order
where they are built.  The covariant derivatives ``|`` and ``||`` inside the
closed forms are those of the canonical connection.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .calculus import HL, HU, VL, VU, PointData, at, h_cov, nlc_curvature, v_cov
from .connections import (CONNECTIONS, Connection, basic_vector_jets, canonical, contortion_jets,
                          torsion_jets)
from .metric import metric_jets

CURVATURE_BLOCKS = ("R_hh", "R_vh", "P_h", "P_v", "S_h", "S_v")


@dataclass(frozen=True)
class CurvatureBundle:
    R_hh: np.ndarray
    R_vh: np.ndarray
    P_h: np.ndarray
    P_v: np.ndarray
    S_h: np.ndarray
    S_v: np.ndarray

    def blocks(self) -> dict:
        return {k: getattr(self, k) for k in CURVATURE_BLOCKS}

    def max_abs(self) -> float:
        return max(float(np.abs(v).max()) for v in self.blocks().values())

    def __sub__(self, other: "CurvatureBundle") -> "CurvatureBundle":
        return CurvatureBundle(*(getattr(self, k) - getattr(other, k) for k in CURVATURE_BLOCKS))

    def scaled(self, c: float) -> "CurvatureBundle":
        return CurvatureBundle(*(c * getattr(self, k) for k in CURVATURE_BLOCKS))


def _v(a):
    return np.asarray(jets.value(a), dtype=float)


def cyclic(a: np.ndarray, axes=(1, 2, 3)) -> np.ndarray:
    """Cyclic sum over three axes: ``A[..i j k..] + A[..j k i..] + A[..k i j..]``."""
    i, j, k = axes
    perm1 = list(range(a.ndim))
    perm2 = list(range(a.ndim))
    # B[.., i, j, k] = A[.., j, k, i]
    perm1[i], perm1[j], perm1[k] = j, k, i
    perm2[i], perm2[j], perm2[k] = k, i, j
    return a + a.transpose(perm1) + a.transpose(perm2)


# -- general formulas ------------------------------------------------------------

def curvature_of(pd: PointData, D: Connection) -> CurvatureBundle:
    """Six curvature blocks of ``D`` from its coefficients and their derivatives."""
    R = _v(nlc_curvature(pd))          # R[d, mu, nu]
    dN = _v(pd.vdot(pd.N))             # dN[a, nu, c] = dot-d_c N^a_nu
    P = dN - _v(D.G_vv_h).transpose(0, 2, 1)  # P^d_{nu c}
    G, Gv, Ch, Cv = (_v(D.G_hh), _v(D.G_vv_h), _v(D.C_hh_v), _v(D.C_vv_v))

    dG = _v(pd.delta(D.G_hh))          # dG[a, b, n, m] = delta_m Gamma^a_{b n}
    R_hh = (dG.transpose(0, 1, 3, 2) - dG
            + np.einsum("ebn,aem->abmn", G, G) - np.einsum("ebm,aen->abmn", G, G)
            + np.einsum("abd,dnm->abmn", Ch, R))
    dGv = _v(pd.delta(D.G_vv_h))
    R_vh = (dGv.transpose(0, 1, 3, 2) - dGv
            + np.einsum("cbn,acm->abmn", Gv, Gv) - np.einsum("cbm,acn->abmn", Gv, Gv)
            + np.einsum("abd,dnm->abmn", Cv, R))

    C_h_bar = _v(h_cov(pd, D.C_hh_v, (HU, HL, VL), D))  # [a, b, c, nu]
    P_h = (_v(pd.vdot(D.G_hh)) - C_h_bar.transpose(0, 1, 3, 2)
           + np.einsum("abd,dnc->abnc", Ch, P))
    C_v_bar = _v(h_cov(pd, D.C_vv_v, (VU, VL, VL), D))
    P_v = (_v(pd.vdot(D.G_vv_h)) - C_v_bar.transpose(0, 1, 3, 2)
           + np.einsum("abd,dnc->abnc", Cv, P))

    dC = _v(pd.vdot(D.C_hh_v))         # dC[a, b, c, x] = dot-d_x C^a_{b c}
    S_h = (dC.transpose(0, 1, 3, 2) - dC
           + np.einsum("ebc,aex->abxc", Ch, Ch) - np.einsum("ebx,aec->abxc", Ch, Ch))
    dCv = _v(pd.vdot(D.C_vv_v))        # dCv[a, b, d, c] = dot-d_c C^a_{b d}
    S_v = (dCv.transpose(0, 1, 3, 2) - dCv
           + np.einsum("ebd,aec->abcd", Cv, Cv) - np.einsum("ebc,aed->abcd", Cv, Cv))
    return CurvatureBundle(R_hh, R_vh, P_h, P_v, S_h, S_v)


def curvature_jets(pd: PointData, which: str) -> CurvatureBundle:
    return pd.memo(("curvature", which), lambda: curvature_of(pd, CONNECTIONS[which](pd)))


def curvature_direct(D, space, p) -> CurvatureBundle:
    """Curvature of ``D`` (connection name or ``PointData -> Connection``)."""
    pd = at(space, p)
    if isinstance(D, str):
        return curvature_jets(pd, D)
    return curvature_of(pd, D(pd))


# -- shared canonical ingredients ----------------------------------------------------

@dataclass
class _Parts:
    Lam: np.ndarray
    R: np.ndarray
    C: np.ndarray
    P: np.ndarray
    T: np.ndarray
    gh: np.ndarray
    gv: np.ndarray
    ghi: np.ndarray
    gvi: np.ndarray
    Lam_h: np.ndarray  # Lambda^a_{mn|b}   [a, m, n, b]
    Lam_v: np.ndarray  # Lambda^a_{mn||c}  [a, m, n, c]
    T_h: np.ndarray    # T^a_{bc|m}        [a, b, c, m]
    T_v: np.ndarray    # T^a_{bc||d}       [a, b, c, d]


def _parts(pd: PointData) -> _Parts:
    def build():
        D = canonical(pd)
        Tj = torsion_jets(pd)
        gh, gv, ghi, gvi = (_v(g) for g in metric_jets(pd))
        return _Parts(
            _v(Tj.Lam), _v(Tj.Rnl), _v(Tj.Chv), _v(Tj.P), _v(Tj.Tv), gh, gv, ghi, gvi,
            _v(h_cov(pd, Tj.Lam, (HU, HL, HL), D)), _v(v_cov(pd, Tj.Lam, (HU, HL, HL), D)),
            _v(h_cov(pd, Tj.Tv, (VU, VL, VL), D)), _v(v_cov(pd, Tj.Tv, (VU, VL, VL), D)),
        )
    return pd.memo("parts", build)


@dataclass
class _Gamma:
    hh: np.ndarray   # gamma^a_{mn}      [a, m, n]
    vvh: np.ndarray  # gamma^a_{b m}
    hhv: np.ndarray  # gamma^a_{m c}
    vvv: np.ndarray  # gamma^a_{bc}
    hh_h: np.ndarray   # gamma^a_{mn|x}   [a, m, n, x]
    hh_v: np.ndarray   # gamma^a_{mn||c}
    vvh_h: np.ndarray  # gamma^a_{bm|x}
    vvh_v: np.ndarray  # gamma^a_{bm||c}
    hhv_h: np.ndarray  # gamma^a_{mc|x}
    hhv_v: np.ndarray  # gamma^a_{mc||d}
    vvv_h: np.ndarray  # gamma^a_{bc|x}
    vvv_v: np.ndarray  # gamma^a_{bc||d}


def _gamma(pd: PointData) -> _Gamma:
    def build():
        D = canonical(pd)
        g = contortion_jets(pd)
        sig = {"hh": (HU, HL, HL), "vvh": (VU, VL, HL), "hhv": (HU, HL, VL), "vvv": (VU, VL, VL)}
        arrays = {}
        for key, attr in (("hh", "g_hh"), ("vvh", "g_vv_h"), ("hhv", "g_hh_v"), ("vvv", "g_vv_v")):
            J = getattr(g, attr)
            arrays[key] = _v(J)
            arrays[key + "_h"] = _v(h_cov(pd, J, sig[key], D))
            arrays[key + "_v"] = _v(v_cov(pd, J, sig[key], D))
        return _Gamma(**arrays)
    return pd.memo("gamma_parts", build)


# -- natural connection ----------------------------------------------------------------

def natural_formula(pd: PointData) -> CurvatureBundle:
    """Natural curvature written through the contortion and canonical torsion."""
    t, g = _parts(pd), _gamma(pd)
    Lam, R, C, P, T = t.Lam, t.R, t.C, t.P, t.T
    # (a): (g^a_{bm|n} - g^a_{bn|m}) + (g^e_{bn} g^a_{em} - g^e_{bm} g^a_{en})
    #      - g^a_{be} Lam^e_{nm} - g^a_{bd} R^d_{nm}
    R_hh = (g.hh_h - g.hh_h.transpose(0, 1, 3, 2)
            + np.einsum("ebn,aem->abmn", g.hh, g.hh) - np.einsum("ebm,aen->abmn", g.hh, g.hh)
            - np.einsum("abe,enm->abmn", g.hh, Lam) - np.einsum("abd,dnm->abmn", g.hhv, R))
    R_vh = (g.vvh_h - g.vvh_h.transpose(0, 1, 3, 2)
            + np.einsum("dbn,adm->abmn", g.vvh, g.vvh) - np.einsum("dbm,adn->abmn", g.vvh, g.vvh)
            - np.einsum("abe,enm->abmn", g.vvh, Lam) - np.einsum("abd,dnm->abmn", g.vvv, R))
    # (c): (g^a_{bc|n} - g^a_{bn||c}) + (g^e_{bn} g^a_{ec} - g^e_{bc} g^a_{en})
    #      - g^a_{be} C^e_{nc} - g^a_{bd} P^d_{nc}
    P_h = (g.hhv_h.transpose(0, 1, 3, 2) - g.hh_v
           + np.einsum("ebn,aec->abnc", g.hh, g.hhv) - np.einsum("ebc,aen->abnc", g.hhv, g.hh)
           - np.einsum("abe,enc->abnc", g.hh, C) - np.einsum("abd,dnc->abnc", g.hhv, P))
    P_v = (g.vvv_h.transpose(0, 1, 3, 2) - g.vvh_v
           + np.einsum("dbn,adc->abnc", g.vvh, g.vvv) - np.einsum("dbc,adn->abnc", g.vvv, g.vvh)
           - np.einsum("abe,enc->abnc", g.vvh, C) - np.einsum("abd,dnc->abnc", g.vvv, P))
    # (e): (g^a_{bb'||c} - g^a_{bc||b'}) + (g^e_{bc} g^a_{eb'} - g^e_{bb'} g^a_{ec}) - g^a_{bd} T^d_{cb'}
    S_h = (g.hhv_v - g.hhv_v.transpose(0, 1, 3, 2)
           + np.einsum("ebc,aex->abxc", g.hhv, g.hhv) - np.einsum("ebx,aec->abxc", g.hhv, g.hhv)
           - np.einsum("abd,dcx->abxc", g.hhv, T))
    # (f): (g^a_{bc||d} - g^a_{bd||c}) + (g^e_{bd} g^a_{ec} - g^e_{bc} g^a_{ed}) - g^a_{be} T^e_{dc}
    S_v = (g.vvv_v - g.vvv_v.transpose(0, 1, 3, 2)
           + np.einsum("ebd,aec->abcd", g.vvv, g.vvv) - np.einsum("ebc,aed->abcd", g.vvv, g.vvv)
           - np.einsum("abe,edc->abcd", g.vvv, T))
    return CurvatureBundle(R_hh, R_vh, P_h, P_v, S_h, S_v)


# -- dual connection ------------------------------------------------------------------

def dual_formula(pd: PointData) -> CurvatureBundle:
    """Dual curvature from the canonical torsion and its derivatives."""
    t = _parts(pd)
    Lam, R, C, P, T = t.Lam, t.R, t.C, t.P, t.T
    n = Lam.shape[0]
    # R~^a_{b n m} = Lam^a_{m n|b} + cyc_{b m n} C^a_{b x} R^x_{m n}.  The slot after
    # beta is nu, so [a, b, i, j] takes mu = j, nu = i.
    CR = np.einsum("abx,xmn->abmn", C, R)
    R_hh = t.Lam_h.transpose(0, 3, 2, 1) + cyclic(CR).transpose(0, 1, 3, 2)
    # R~^a_{b n m} = R^d_{m n} T^a_{d b}
    R_vh = np.einsum("dmn,adb->abmn", R, T).transpose(0, 1, 3, 2)
    # P~^a_{b m c} = Lam^a_{m b||c} + Lam^a_{e b} C^e_{m c}
    P_h = t.Lam_v.transpose(0, 2, 1, 3) + np.einsum("aeb,emc->abmc", Lam, C)
    # P~^a_{b m c} = T^a_{bc|m} + T^a_{db} P^d_{mc}
    P_v = t.T_h.transpose(0, 1, 3, 2) + np.einsum("adb,dmc->abmc", T, P)
    S_h = np.zeros((n, n, n, n))
    # S~^a_{bcd} = T^a_{dc||b}
    S_v = t.T_v.transpose(0, 3, 2, 1)
    return CurvatureBundle(R_hh, R_vh, P_h, P_v, S_h, S_v)


# -- symmetric connection -------------------------------------------------------------

def symmetric_formula(pd: PointData) -> CurvatureBundle:
    """Symmetric curvature; mixed blocks are half the dual ones."""
    t = _parts(pd)
    Lam, T = t.Lam, t.T
    n = Lam.shape[0]
    d = dual_formula(pd)
    # R^^a_{b n m} = 1/2 (Lam^a_{bn|m} - Lam^a_{bm|n}) + 1/4 (Lam^e_{bn} Lam^a_{me} - Lam^e_{bm} Lam^a_{ne})
    #              + 1/2 Lam^e_{nm} Lam^a_{be}; the slot after beta is nu, so this is
    #              already in storage order
    R_hh = (0.5 * (t.Lam_h - t.Lam_h.transpose(0, 1, 3, 2))
          + 0.25 * (np.einsum("ebn,ame->abnm", Lam, Lam) - np.einsum("ebm,ane->abnm", Lam, Lam))
          + 0.5 * np.einsum("enm,abe->abnm", Lam, Lam))
    # S^^a_{bcd} = 1/2 (T^a_{bc||d} - T^a_{bd||c}) + 1/4 (T^e_{bc} T^a_{de} - T^e_{bd} T^a_{ce})
    #            + 1/2 T^e_{dc} T^a_{eb}
    S_v = (0.5 * (t.T_v - t.T_v.transpose(0, 1, 3, 2))
           + 0.25 * (np.einsum("ebc,ade->abcd", T, T) - np.einsum("ebd,ace->abcd", T, T))
           + 0.5 * np.einsum("edc,aeb->abcd", T, T))
    return CurvatureBundle(R_hh, 0.5 * d.R_vh, 0.5 * d.P_h, 0.5 * d.P_v, np.zeros((n, n, n, n)), S_v)


FORMULAS = {
    "natural": natural_formula,
    "dual": dual_formula,
    "symmetric": symmetric_formula,
}


def natural_curvature_formula(space, p) -> CurvatureBundle:
    return natural_formula(at(space, p))


def dual_curvature_formula(space, p) -> CurvatureBundle:
    return dual_formula(at(space, p))


def symmetric_curvature_formula(space, p) -> CurvatureBundle:
    return symmetric_formula(at(space, p))


# -- contractions ------------------------------------------------------------------------

class UnknownConnectionTag(KeyError):
    pass


@dataclass(frozen=True)
class CurvatureContractions:
    Ric_h: np.ndarray     # R_{beta mu}
    scalar_h: float       # g^{beta mu} R_{beta mu}
    P_hc: np.ndarray      # P_{beta c}
    P_vc: np.ndarray      # P_{b nu}
    Ric_v: np.ndarray     # S_{bc}
    scalar_v: float       # g^{bc} S_{bc}

    def fields(self) -> dict:
        return {k: getattr(self, k) for k in ("Ric_h", "scalar_h", "P_hc", "P_vc", "Ric_v", "scalar_v")}

    def max_diff(self, other: "CurvatureContractions") -> dict[str, float]:
        a, b = self.fields(), other.fields()
        return {k: float(np.abs(np.asarray(a[k]) - np.asarray(b[k])).max()) for k in a}

    def scaled(self, c: float) -> "CurvatureContractions":
        return CurvatureContractions(*(c * np.asarray(v) for v in self.fields().values()))


@dataclass(frozen=True)
class ContractionReport:
    which: str
    direct: CurvatureContractions
    formula: CurvatureContractions

    def residuals(self) -> dict[str, float]:
        return self.direct.max_diff(self.formula)


def trace(bundle: CurvatureBundle, gh: np.ndarray, gv: np.ndarray) -> CurvatureContractions:
    """Contract a bundle by index tracing.

    ``R_{b m} = R^a_{b m a}``, ``P_{b c} = -P^a_{b a c}``, ``P_{b n} = P^d_{b n d}``,
    ``S_{bc} = S^d_{b c d}``; scalars use the inverse metrics ``gh``, ``gv``.
    """
    Ric_h = np.einsum("abma->bm", bundle.R_hh)
    Ric_v = np.einsum("dbcd->bc", bundle.S_v)
    return CurvatureContractions(
        Ric_h, float(np.einsum("bm,bm->", gh, Ric_h)),
        -np.einsum("abac->bc", bundle.P_h), np.einsum("dbnd->bn", bundle.P_v),
        Ric_v, float(np.einsum("bc,bc->", gv, Ric_v)),
    )


@dataclass
class _Basic:
    Ch: np.ndarray    # C_mu
    Cv: np.ndarray    # C_a
    Ch_h: np.ndarray  # C_{mu|nu}   [mu, nu]
    Ch_v: np.ndarray  # C_{mu||c}
    Cv_h: np.ndarray  # C_{a|nu}
    Cv_v: np.ndarray  # C_{a||c}


def _basic(pd: PointData) -> _Basic:
    def build():
        D = canonical(pd)
        ch, cv = basic_vector_jets(pd)
        return _Basic(_v(ch), _v(cv), _v(h_cov(pd, ch, (HL,), D)), _v(v_cov(pd, ch, (HL,), D)),
                      _v(h_cov(pd, cv, (VL,), D)), _v(v_cov(pd, cv, (VL,), D)))
    return pd.memo("basic_parts", build)


def _natural_closed(pd: PointData) -> CurvatureContractions:
    t, g, c = _parts(pd), _gamma(pd), _basic(pd)
    ghi, gvi = t.ghi, t.gvi
    # (g) R_{bm} = (g^a_{bm|a} - C_{b|m}) - C_e g^e_{bm} + g^a_{be} g^e_{ma} - g^a_{bd} R^d_{am}
    Ric_h = (np.einsum("abma->bm", g.hh_h) - c.Ch_h - np.einsum("e,ebm->bm", c.Ch, g.hh)
             + np.einsum("abe,ema->bm", g.hh, g.hh) - np.einsum("abd,dam->bm", g.hhv, t.R))
    # (h) 1/2 (Om^{am}_{m|a} - C_a Om^{am}_m) - C^m_{|m} + g^{am}_e g^e_{ma} - g^{am}_d R^d_{am}
    Om_h = g.hh_h + g.hh_h.transpose(0, 2, 1, 3)   # Om^a_{bm|x}
    Om = g.hh + g.hh.transpose(0, 2, 1)
    sc_h = (0.5 * (np.einsum("bm,abma->", ghi, Om_h) - np.einsum("a,bm,abm->", c.Ch, ghi, Om))
            - np.einsum("mn,nm->", ghi, c.Ch_h)
            + np.einsum("mb,abe,ema->", ghi, g.hh, g.hh) - np.einsum("mb,abd,dam->", ghi, g.hhv, t.R))
    # (i) P_{bc} = (C_{b||c} - g^a_{bc|a}) + C_e g^e_{bc} + g^a_{be} (C^e_{ac} - g^e_{ac}) + g^a_{bd} P^d_{ac}
    P_hc = (c.Ch_v - np.einsum("abca->bc", g.hhv_h) + np.einsum("e,ebc->bc", c.Ch, g.hhv)
            + np.einsum("abe,eac->bc", g.hh, t.C - g.hhv) + np.einsum("abd,dac->bc", g.hhv, t.P))
    # (j) P_{bn} = (C_{b|n} - g^d_{bn||d}) + C_d g^d_{bn} - g^d_{be} g^e_{dn}
    #             - g^d_{be} C^e_{nd} - g^e_{bd} P^d_{ne}
    P_vc = (c.Cv_h - np.einsum("dbnd->bn", g.vvh_v) + np.einsum("d,dbn->bn", c.Cv, g.vvh)
            - np.einsum("dbe,edn->bn", g.vvv, g.vvh) - np.einsum("dbe,end->bn", g.vvh, t.C)
            - np.einsum("ebd,dne->bn", g.vvv, t.P))
    # (k) S_{bc} = (g^d_{bc||d} - C_{b||c}) - C_d g^d_{bc} + g^d_{be} g^e_{cd}
    Ric_v = (np.einsum("dbcd->bc", g.vvv_v) - c.Cv_v - np.einsum("d,dbc->bc", c.Cv, g.vvv)
             + np.einsum("dbe,ecd->bc", g.vvv, g.vvv))
    # (l) 1/2 (Om^{ad}_{d||a} - C_a Om^{ad}_d) - C^d_{||d} + g^{ad}_c g^c_{da}
    Omv_v = g.vvv_v + g.vvv_v.transpose(0, 2, 1, 3)
    Omv = g.vvv + g.vvv.transpose(0, 2, 1)
    sc_v = (0.5 * (np.einsum("bd,abda->", gvi, Omv_v) - np.einsum("a,bd,abd->", c.Cv, gvi, Omv))
            - np.einsum("cd,dc->", gvi, c.Cv_v) + np.einsum("db,abc,cda->", gvi, g.vvv, g.vvv))
    return CurvatureContractions(Ric_h, float(sc_h), P_hc, P_vc, Ric_v, float(sc_v))


def _dual_closed(pd: PointData) -> CurvatureContractions:
    t, c = _parts(pd), _basic(pd)
    # (f) R_{bn} = -C_{n|b} + cyc_{b n a} C^a_{b x} R^x_{a n}, the a-slot contracted
    cyc = (np.einsum("abx,xan->bn", t.C, t.R) + np.einsum("anx,xba->bn", t.C, t.R)
           + np.einsum("aax,xnb->bn", t.C, t.R))
    Ric_h = -c.Ch_h.T + cyc
    # (h) P_{bc} = C_{b||c} + Lam^a_{be} C^e_{ac};  (i) P_{bm} = C_{b|m} + T^a_{db} P^d_{ma}
    P_hc = c.Ch_v + np.einsum("abe,eac->bc", t.Lam, t.C)
    P_vc = c.Cv_h + np.einsum("adb,dma->bm", t.T, t.P)
    # (j) S_{bd} = -C_{d||b}
    Ric_v = -c.Cv_v.T
    return CurvatureContractions(Ric_h, float(-np.einsum("mn,nm->", t.ghi, c.Ch_h)), P_hc, P_vc,
                                 Ric_v, float(-np.einsum("cd,dc->", t.gvi, c.Cv_v)))


def _symmetric_closed(pd: PointData) -> CurvatureContractions:
    t, c = _parts(pd), _basic(pd)
    d = _dual_closed(pd)
    Lam, T = t.Lam, t.T
    # (f) R_{bn} = 1/2 R~_{bn} - 1/4 (C_a Lam^a_{nb} + Lam^a_{ne} Lam^e_{ab})
    Ric_h = 0.5 * d.Ric_h - 0.25 * (np.einsum("a,anb->bn", c.Ch, Lam) + np.einsum("ane,eab->bn", Lam, Lam))
    # (g) 1/2 R~ - 1/4 Lam^{ab}_e Lam^e_{ab}
    sc_h = 0.5 * d.scalar_h - 0.25 * np.einsum("bg,age,eab->", t.ghi, Lam, Lam)
    # (j) S_{bd} = 1/2 S~_{bd} - 1/4 (C_a T^a_{db} + T^a_{de} T^e_{ab})
    Ric_v = 0.5 * d.Ric_v - 0.25 * (np.einsum("a,adb->bd", c.Cv, T) + np.einsum("ade,eab->bd", T, T))
    sc_v = 0.5 * d.scalar_v - 0.25 * np.einsum("bg,age,eab->", t.gvi, T, T)
    return CurvatureContractions(Ric_h, float(sc_h), 0.5 * d.P_hc, 0.5 * d.P_vc, Ric_v, float(sc_v))


_CLOSED = {"natural": _natural_closed, "dual": _dual_closed, "symmetric": _symmetric_closed}


def contract(bundle: CurvatureBundle, which: str, space, p) -> ContractionReport:
    """Contractions of ``bundle`` (the curvature of connection ``which``) by tracing and
    by the torsion/contortion closed forms."""
    if which not in _CLOSED:
        raise UnknownConnectionTag(which)
    pd = at(space, p)
    t = _parts(pd)
    return ContractionReport(which, trace(bundle, t.ghi, t.gvi), _CLOSED[which](pd))


def contractions(which: str, space, p) -> ContractionReport:
    if which not in _CLOSED:
        raise UnknownConnectionTag(which)
    return contract(curvature_jets(at(space, p), which), which, space, p)


# -- Bianchi-type identities of the canonical connection ------------------------------------

@dataclass(frozen=True)
class BianchiReport:
    residuals: dict   # name -> max-abs residual
    trivial: dict     # name -> True when every term of the identity vanishes

    def max(self) -> float:
        return max(self.residuals.values())


def bianchi_residuals(space, p, zero_tol: float = 1e-12) -> BianchiReport:
    """Cyclic torsion identities of the canonical connection and their traces.

    * ``cyc_{b m n}(Lam^a_{bm|n} + Lam^e_{mn} Lam^a_{be} + R^x_{bm} C^a_{nx}) = 0``
    * ``cyc_{b c d}(T^a_{bc||d} + T^e_{cd} T^a_{be}) = 0``
    * the traces ``a = n`` and ``a = d`` written through the basic vector.
    """
    pd = at(space, p)
    t, c = _parts(pd), _basic(pd)
    Lam, R, C, T = t.Lam, t.R, t.C, t.T
    X = t.Lam_h + np.einsum("emn,abe->abmn", Lam, Lam) + np.einsum("xbm,anx->abmn", R, C)
    Y = t.T_v + np.einsum("ecd,abe->abcd", T, T)
    lam_lhs = np.einsum("abma->bm", t.Lam_h)
    # traced form: (C_{b|m} - C_{m|b}) + C_e Lam^e_{bm} + cyc_{b m a} R^x_{m b} C^a_{a x}
    lam_rhs = (c.Ch_h - c.Ch_h.T + np.einsum("e,ebm->bm", c.Ch, Lam)
               + np.einsum("xmb,aax->bm", R, C) + np.einsum("xam,abx->bm", R, C)
               + np.einsum("xba,amx->bm", R, C))
    t_lhs = np.einsum("dbcd->bc", t.T_v)
    t_rhs = c.Cv_v - c.Cv_v.T + np.einsum("d,dbc->bc", c.Cv, T)
    res = {
        "lambda_cyclic": float(np.abs(cyclic(X)).max()),
        "T_cyclic": float(np.abs(cyclic(Y)).max()),
        "lambda_traced": float(np.abs(lam_lhs - lam_rhs).max()),
        "T_traced": float(np.abs(t_lhs - t_rhs).max()),
    }
    h_zero = max(np.abs(X).max(), np.abs(lam_lhs).max(), np.abs(lam_rhs).max()) < zero_tol
    v_zero = max(np.abs(Y).max(), np.abs(t_lhs).max(), np.abs(t_rhs).max()) < zero_tol
    trivial = {"lambda_cyclic": bool(h_zero), "lambda_traced": bool(h_zero),
               "T_cyclic": bool(v_zero), "T_traced": bool(v_zero)}
    return BianchiReport(res, trivial)
