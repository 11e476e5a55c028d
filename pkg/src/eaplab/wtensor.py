"""W-tensors: non-commutativity of the covariant derivatives of the frames.

Blocks are stored in the slot order of the commutators that define them:

* ``W_hhh[alpha, beta, nu, mu]``: ``lambda^alpha_{|nu|mu} - lambda^alpha_{|mu|nu} = lambda^beta W``
* ``W_hhv[a, b, nu, mu]``:        same with ``lambda^a``
* ``W_vhh[alpha, beta, nu, c]``:  ``lambda^alpha_{|nu||c} - lambda^alpha_{||c|nu}``
* ``W_vhv[a, b, nu, c]``
* ``W_vvh[alpha, beta, b, c]``:   ``lambda^alpha_{||b||c} - lambda^alpha_{||c||b}``
* ``W_vvv[a, b, c, d]``
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets
from .calculus import HL, HU, MESH, VL, VU, PointData, at, h_cov, v_cov
from .connections import CONNECTIONS, Connection, frame_derivatives
from .curvature import CURVATURE_BLOCKS, _gamma, _parts, curvature_jets, cyclic, natural_formula, symmetric_formula

W_BLOCKS = ("W_hhh", "W_hhv", "W_vhh", "W_vhv", "W_vvh", "W_vvv")


@dataclass(frozen=True)
class WBundle:
    W_hhh: np.ndarray
    W_hhv: np.ndarray
    W_vhh: np.ndarray
    W_vhv: np.ndarray
    W_vvh: np.ndarray
    W_vvv: np.ndarray

    def blocks(self) -> dict:
        return {k: getattr(self, k) for k in W_BLOCKS}

    def max_abs(self) -> float:
        return max(float(np.abs(v).max()) for v in self.blocks().values())

    def __sub__(self, other: "WBundle") -> "WBundle":
        return WBundle(*(getattr(self, k) - getattr(other, k) for k in W_BLOCKS))

    def scaled(self, c: float) -> "WBundle":
        return WBundle(*(c * getattr(self, k) for k in W_BLOCKS))


def _v(a):
    return np.asarray(jets.value(a), dtype=float)


def _swap_last(a):
    return a.transpose(0, 1, 3, 2)


# -- commutator route ----------------------------------------------------------------

def w_of(pd: PointData, D: Connection) -> WBundle:
    """Second covariant derivatives of the frames under ``D``, contracted with the coframes."""
    Lh_h, Lh_v, Lv_h, Lv_v = frame_derivatives(pd, D)
    sh, sv = (MESH, HU, HL), (MESH, VU, HL)
    shv, svv = (MESH, HU, VL), (MESH, VU, VL)
    hh = _v(h_cov(pd, Lh_h, sh, D))    # lambda_i^alpha_{|nu|mu}   [i, alpha, nu, mu]
    hv = _v(v_cov(pd, Lh_h, sh, D))    # lambda_i^alpha_{|nu||c}
    vh = _v(h_cov(pd, Lh_v, shv, D))   # lambda_i^alpha_{||c|nu}   [i, alpha, c, nu]
    vv = _v(v_cov(pd, Lh_v, shv, D))   # lambda_i^alpha_{||b||c}
    Vhh = _v(h_cov(pd, Lv_h, sv, D))
    Vhv = _v(v_cov(pd, Lv_h, sv, D))
    Vvh = _v(h_cov(pd, Lv_v, svv, D))
    Vvv = _v(v_cov(pd, Lv_v, svv, D))
    Ch, Cv = _v(pd.Ch), _v(pd.Cv)

    def lower(X, C):
        return np.einsum("ib,iaxy->abxy", C, X)

    return WBundle(
        lower(hh - _swap_last(hh), Ch),
        lower(Vhh - _swap_last(Vhh), Cv),
        lower(hv - _swap_last(vh), Ch),
        lower(Vhv - _swap_last(Vvh), Cv),
        lower(vv - _swap_last(vv), Ch),
        lower(Vvv - _swap_last(Vvv), Cv),
    )


def w_jets(pd: PointData, which: str) -> WBundle:
    return pd.memo(("w", which), lambda: w_of(pd, CONNECTIONS[which](pd)))


def w_via_commutator(D, space, p) -> WBundle:
    """W-tensors of ``D`` (a connection name or a ``PointData -> Connection`` function)."""
    pd = at(space, p)
    if isinstance(D, str):
        return w_jets(pd, D)
    return w_of(pd, D(pd))


def w_covariant(pd: PointData, D: Connection) -> WBundle:
    """The same commutators applied to the lower coframes, contracted with the frames.

    ``lambda_{i beta|nu|mu} - lambda_{i beta|mu|nu}`` contracted with ``lambda_i^alpha``;
    this differs from :func:`w_of` by an overall sign.
    """
    Ch_h, Ch_v, Cv_h, Cv_v = (h_cov(pd, pd.Ch, (MESH, HL), D), v_cov(pd, pd.Ch, (MESH, HL), D),
                              h_cov(pd, pd.Cv, (MESH, VL), D), v_cov(pd, pd.Cv, (MESH, VL), D))
    sh, shv = (MESH, HL, HL), (MESH, HL, VL)
    sv, svv = (MESH, VL, HL), (MESH, VL, VL)
    hh = _v(h_cov(pd, Ch_h, sh, D))
    hv = _v(v_cov(pd, Ch_h, sh, D))
    vh = _v(h_cov(pd, Ch_v, shv, D))
    vv = _v(v_cov(pd, Ch_v, shv, D))
    Vhh = _v(h_cov(pd, Cv_h, sv, D))
    Vhv = _v(v_cov(pd, Cv_h, sv, D))
    Vvh = _v(h_cov(pd, Cv_v, svv, D))
    Vvv = _v(v_cov(pd, Cv_v, svv, D))
    Lh, Lv = _v(pd.Lh), _v(pd.Lv)

    def raise_(X, L):
        return np.einsum("ia,ibxy->abxy", L, X)

    return WBundle(
        raise_(hh - _swap_last(hh), Lh),
        raise_(Vhh - _swap_last(Vhh), Lv),
        raise_(hv - _swap_last(vh), Lh),
        raise_(Vhv - _swap_last(Vvh), Lv),
        raise_(vv - _swap_last(vv), Lh),
        raise_(Vvv - _swap_last(Vvv), Lv),
    )


# -- closed formulas --------------------------------------------------------------------

def natural_w(pd: PointData) -> WBundle:
    """Natural W-tensors from the contortion and the canonical torsion."""
    t, g = _parts(pd), _gamma(pd)
    Lam = t.Lam
    # [a, b, n, m]: (g^a_{bm|n} - g^a_{bn|m}) + (g^e_{bn} g^a_{em} - g^e_{bm} g^a_{en}) - g^a_{be} Lam^e_{nm}
    W_hhh = (_swap_last(g.hh_h) - g.hh_h
             + np.einsum("ebn,aem->abnm", g.hh, g.hh) - np.einsum("ebm,aen->abnm", g.hh, g.hh)
             - np.einsum("abe,enm->abnm", g.hh, Lam))
    W_hhv = (_swap_last(g.vvh_h) - g.vvh_h
             + np.einsum("dbn,adm->abnm", g.vvh, g.vvh) - np.einsum("dbm,adn->abnm", g.vvh, g.vvh)
             - np.einsum("abe,enm->abnm", g.vvh, Lam))
    # [a, b, n, c]: (g^a_{bc|n} - g^a_{bn||c}) + (g^e_{bn} g^a_{ec} - g^e_{bc} g^a_{en})
    #               + (g^d_{cn} g^a_{bd} - g^e_{nc} g^a_{be})
    W_vhh = (_swap_last(g.hhv_h) - g.hh_v
             + np.einsum("ebn,aec->abnc", g.hh, g.hhv) - np.einsum("ebc,aen->abnc", g.hhv, g.hh)
             + np.einsum("dcn,abd->abnc", g.vvh, g.hhv) - np.einsum("enc,abe->abnc", g.hhv, g.hh))
    W_vhv = (_swap_last(g.vvv_h) - g.vvh_v
             + np.einsum("dbn,adc->abnc", g.vvh, g.vvv) - np.einsum("dbc,adn->abnc", g.vvv, g.vvh)
             + np.einsum("dcn,abd->abnc", g.vvh, g.vvv) - np.einsum("enc,abe->abnc", g.hhv, g.vvh))
    # the vertical-vertical blocks are the natural S-curvatures with the last slots swapped
    S = natural_formula(pd)
    return WBundle(W_hhh, W_hhv, W_vhh, W_vhv, _swap_last(S.S_h), _swap_last(S.S_v))


def dual_w(pd: PointData) -> WBundle:
    """Dual W-tensors from the canonical torsion and its derivatives."""
    t = _parts(pd)
    Lam, R, C, T = t.Lam, t.R, t.C, t.T
    n = Lam.shape[0]
    zero = np.zeros((n, n, n, n))
    # [a, b, n, m]: Lam^a_{nm|b} + Lam^e_{nm} Lam^a_{eb} + cyc_{n m b} C^a_{bx} R^x_{nm}.
    # Expanding the commutator puts the contracted index first in Lam^a_{eb}.
    CR = np.einsum("abx,xnm->abnm", C, R)
    W_hhh = t.Lam_h.transpose(0, 3, 1, 2) + np.einsum("enm,aeb->abnm", Lam, Lam) + cyclic(CR)
    # [a, b, n, c]: Lam^a_{nb||c}
    W_vhh = t.Lam_v.transpose(0, 2, 1, 3)
    # [a, b, n, c]: T^a_{bc|n}
    W_vhv = _swap_last(t.T_h)
    # [a, b, d, c]: T^a_{dc||b} + T^e_{dc} T^a_{eb}
    W_vvv = t.T_v.transpose(0, 3, 1, 2) + np.einsum("edc,aeb->abdc", T, T)
    return WBundle(W_hhh, zero, W_vhh, W_vhv, zero.copy(), W_vvv)


def symmetric_w(pd: PointData) -> WBundle:
    """Symmetric W-tensors: curvature blocks and halves of the dual ones."""
    R = symmetric_formula(pd)
    d = dual_w(pd)
    n = R.R_hh.shape[0]
    zero = np.zeros((n, n, n, n))
    return WBundle(_swap_last(R.R_hh), zero, 0.5 * d.W_vhh, 0.5 * d.W_vhv, zero.copy(), _swap_last(R.S_v))


W_FORMULAS = {"natural": natural_w, "dual": dual_w, "symmetric": symmetric_w}


def w_natural_formula(space, p) -> WBundle:
    return natural_w(at(space, p))


def w_dual_formula(space, p) -> WBundle:
    return dual_w(at(space, p))


def w_symmetric_formula(space, p) -> WBundle:
    return symmetric_w(at(space, p))


# -- cyclic identities --------------------------------------------------------------------

def w_cyclic_parts(space, p) -> dict[str, np.ndarray]:
    """Cyclic sums over ``(b, m, n)`` of ``W^a_{b n m}`` per connection, of
    ``R^x_{m b} C^a_{n x}`` and of ``Lam^e_{mn} Lam^a_{be}``."""
    pd = at(space, p)
    t = _parts(pd)
    out = {w: cyclic(_swap_last(w_jets(pd, w).W_hhh)) for w in ("natural", "dual", "symmetric")}
    out["RC"] = cyclic(np.einsum("xmb,anx->abmn", t.R, t.C))
    out["LL"] = cyclic(np.einsum("emn,abe->abmn", t.Lam, t.Lam))
    return out


def w_cyclic_report(space, p) -> dict[str, float]:
    """Residuals of the cyclic W identities.

    ``natural`` and ``symmetric``: ``cyc W = cyc RC``.  ``dual_2RC``: ``cyc W = 2 cyc RC``;
    ``dual``: ``cyc W = 2 cyc RC + 2 cyc LL``, which is what the commutator gives.
    The two dual forms coincide when ``cyc LL`` vanishes, e.g. always in dimension 2.
    """
    c = w_cyclic_parts(space, p)
    return {
        "natural": float(np.abs(c["natural"] - c["RC"]).max()),
        "symmetric": float(np.abs(c["symmetric"] - c["RC"]).max()),
        "dual_2RC": float(np.abs(c["dual"] - 2.0 * c["RC"]).max()),
        "dual": float(np.abs(c["dual"] - 2.0 * c["RC"] - 2.0 * c["LL"]).max()),
        "cyclic_LL": float(np.abs(c["LL"]).max()),
    }


def w_cyclic_residual(space, p) -> tuple[float, float]:
    """``(max over natural/symmetric of cyc W - cyc RC, cyc W_dual - 2 cyc RC)``."""
    r = w_cyclic_report(space, p)
    return max(r["natural"], r["symmetric"]), r["dual_2RC"]


# -- census -------------------------------------------------------------------------------

# W block -> curvature block with the same index kinds
_PARTNER = {"W_hhh": "R_hh", "W_hhv": "R_vh", "W_vhh": "P_h", "W_vhv": "P_v", "W_vvh": "S_h", "W_vvv": "S_v"}
# pairs (connection, W block) -> (connection, W block) related by a factor 1/2
HALF_PAIRS = ((("symmetric", "W_vhh"), ("dual", "W_vhh")), (("symmetric", "W_vhv"), ("dual", "W_vhv")))


@dataclass
class CensusReport:
    space: str
    samples: int
    labels: dict = field(default_factory=dict)      # "conn:block" -> zero | curvature | half | independent
    matches: dict = field(default_factory=dict)     # "conn:block" -> matched curvature block
    half_residuals: dict = field(default_factory=dict)
    degenerate: bool = False

    def count(self, label: str) -> int:
        return sum(1 for v in self.labels.values() if v == label)

    def summary(self) -> dict[str, int]:
        return {k: self.count(k) for k in ("zero", "curvature", "half", "independent")}

    def nonzero(self) -> int:
        return len(self.labels) - self.count("zero")


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    return float(np.linalg.norm(a - b) / scale) if scale > 0 else 0.0


def w_census(space, samples, zero_tol: float = 1e-8, rel_tol: float = 1e-8) -> CensusReport:
    """Sort the 18 non-canonical W blocks into zero / curvature-equal / half-duplicate / independent.

    A block is *zero* when its max-abs over the samples is below ``zero_tol``;
    *curvature* when it equals the curvature block of the same index kinds
    (same connection, either order of the last two slots) to relative Frobenius
    distance ``rel_tol``; *half* when it is exactly half of another W block.
    """
    pts = list(samples)
    conns = ("natural", "dual", "symmetric")
    W = {(c, k): [] for c in conns for k in W_BLOCKS}
    Rc = {(c, k): [] for c in conns for k in CURVATURE_BLOCKS}
    for p in pts:
        pd = at(space, p)
        for c in conns:
            for k, v in w_jets(pd, c).blocks().items():
                W[(c, k)].append(v)
            for k, v in curvature_jets(pd, c).blocks().items():
                Rc[(c, k)].append(v)
    W = {k: np.stack(v) for k, v in W.items()}
    Rc = {k: np.stack(v) for k, v in Rc.items()}

    rep = CensusReport(getattr(space, "name", str(space)), len(pts))
    for (a, ka), (b, kb) in HALF_PAIRS:
        rep.half_residuals[f"{a}:{ka}"] = float(np.abs(W[(a, ka)] - 0.5 * W[(b, kb)]).max())
    half_of = {f"{a}:{ka}": (b, kb) for (a, ka), (b, kb) in HALF_PAIRS}
    for (c, k), arr in W.items():
        key = f"{c}:{k}"
        if np.abs(arr).max() < zero_tol:
            rep.labels[key] = "zero"
            continue
        partner = Rc[(c, _PARTNER[k])]
        hit = None
        if _rel(arr, partner) < rel_tol:
            hit = _PARTNER[k]
        elif _rel(arr, partner.swapaxes(-1, -2)) < rel_tol:
            hit = _PARTNER[k] + " (last slots swapped)"
        if hit is not None:
            rep.labels[key] = "curvature"
            rep.matches[key] = hit
        elif key in half_of and _rel(arr, 0.5 * W[half_of[key]]) < rel_tol:
            rep.labels[key] = "half"
        else:
            rep.labels[key] = "independent"
    rep.degenerate = rep.count("zero") == len(rep.labels)
    return rep
