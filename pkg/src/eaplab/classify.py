"""Cartan-type, Berwald-type and CB-condition residuals, classification and
the consequence suites that go with each regime.

The canonical connection is of Cartan type when the Liouville field ``y^a``
satisfies ``y^a_{|mu} = 0`` and ``y^a_{||c} = delta^a_c``; of Berwald type
when ``dot-d_b N^a_mu = Gamma^a_{b mu}`` and ``C^alpha_{mu c} = 0``; the
CB-condition is both at once.  Each suite evaluates the consequences of its
regime at sample points and returns a :class:`~eaplab.checks.SuiteReport`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets
from .calculus import HL, HU, VU, PointData, at, h_cov, v_cov
from .checks import (TOL_D1, TOL_D2, Check, SuiteReport, compare, mask_checks, maxabs,
                     resolve_samples, vanishes)
from .connections import CONNECTIONS, canonical, contortion_jets, torsion_jets
from .curvature import _gamma, _parts, curvature_jets
from .metric import metric_jets
from .spaces import SpaceDefinition, SpacePoint
from .wtensor import W_BLOCKS, _PARTNER, w_jets

PASS_TOL = 1e-9
FAIL_TOL = 1e-3
HOMOGENEITY_TOL = 1e-10
NONCANONICAL = ("natural", "dual", "symmetric")


class PreconditionFailed(ValueError):
    def __init__(self, space: str, regime: str, residual: float):
        super().__init__(f"{space!r} is not of {regime} type (residual {residual:.3e})")
        self.space = space
        self.residual = residual


class PreconditionNotCartan(PreconditionFailed):
    pass


class PreconditionNotBerwald(PreconditionFailed):
    pass


class PreconditionNotCB(PreconditionFailed):
    pass


def _v(a):
    return np.asarray(jets.value(a), dtype=float)


def _swap_last(a):
    return a.transpose(0, 1, 3, 2)


# -- the regime residuals ---------------------------------------------------------

def liouville_derivatives(pd: PointData, which: str = "canonical"):
    """``(y^a_{|mu}, y^a_{||c})`` under the named connection, as ``[a, mu]`` and ``[a, c]``."""
    D = CONNECTIONS[which](pd)
    y = pd.liouville
    return _v(h_cov(pd, y, (VU,), D)), _v(v_cov(pd, y, (VU,), D))


def _cartan(pd: PointData, which: str = "canonical") -> tuple[float, float]:
    yh, yv = liouville_derivatives(pd, which)
    return maxabs(yh), maxabs(yv - np.eye(pd.n))


def _berwald(pd: PointData) -> tuple[float, float]:
    D = canonical(pd)
    dN = _v(pd.vdot(pd.N))  # [a, mu, b]
    return maxabs(dN - _v(D.G_vv_h).transpose(0, 2, 1)), maxabs(_v(D.C_hh_v))


def cartan_residual(space: SpaceDefinition, p: SpacePoint) -> tuple[float, float]:
    """Max-abs of ``y^a_{|mu}`` and of ``y^a_{||c} - delta^a_c`` (canonical connection)."""
    return _cartan(at(space, p))


def berwald_residual(space: SpaceDefinition, p: SpacePoint) -> tuple[float, float]:
    """Max-abs of ``dot-d_b N^a_mu - Gamma^a_{b mu}`` and of ``C^alpha_{mu c}``."""
    return _berwald(at(space, p))


def induced_nlc(space: SpaceDefinition, p: SpacePoint) -> np.ndarray:
    """``N^a_mu = y^b lambda_i^a d_mu lambda_i_b`` with plain x-derivatives."""
    pd = at(space, p)
    n = pd.n
    dCv = _v(pd.Cv.partials())[..., :n]  # [i, b, mu]
    return np.einsum("b,ia,ibm->am", p.y, _v(pd.Lv), dCv)


# -- classification -------------------------------------------------------------------

LABELS = ("generic", "cartan", "berwald", "cb", "indeterminate")


@dataclass
class ClassificationReport:
    space: str
    label: str
    residuals: dict
    samples: int
    tol: float
    fail_tol: float
    consistent: bool = True  # Cartan with C^alpha_{mu c} = 0 must be Berwald
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"space": self.space, "label": self.label, "residuals": dict(sorted(self.residuals.items())),
                "samples": self.samples, "tolerance": self.tol, "fail_tolerance": self.fail_tol,
                "consistent": self.consistent, "notes": list(self.notes)}


def _verdict(values, tol: float, fail_tol: float) -> str:
    worst = max(values)
    if worst < tol:
        return "pass"
    if worst > fail_tol:
        return "fail"
    return "gray"


def classify(space: SpaceDefinition, samples=50, seed: int = 42, tol: float = PASS_TOL,
             fail_tol: float = FAIL_TOL) -> ClassificationReport:
    """Label a space by the worst regime residuals over the sample points.

    Residuals below ``tol`` pass, above ``fail_tol`` fail; anything in between
    makes the label ``indeterminate``.
    """
    pts = resolve_samples(space, samples, seed)
    res = {"cartan_horizontal": 0.0, "cartan_vertical": 0.0, "berwald_nlc": 0.0, "berwald_C": 0.0}
    for p in pts:
        pd = at(space, p)
        ch, cv = _cartan(pd)
        bn, bc = _berwald(pd)
        for k, v in zip(res, (ch, cv, bn, bc)):
            res[k] = max(res[k], v)
    cartan = _verdict((res["cartan_horizontal"], res["cartan_vertical"]), tol, fail_tol)
    berwald = _verdict((res["berwald_nlc"], res["berwald_C"]), tol, fail_tol)
    if "gray" in (cartan, berwald):
        label = "indeterminate"
    else:
        label = {("pass", "pass"): "cb", ("pass", "fail"): "cartan",
                 ("fail", "pass"): "berwald", ("fail", "fail"): "generic"}[(cartan, berwald)]
    rep = ClassificationReport(space.name, label, res, len(pts), tol, fail_tol)
    if cartan == "pass" and res["berwald_C"] < tol:
        rep.consistent = res["berwald_nlc"] < tol
        if not rep.consistent:
            rep.notes.append("Cartan type with vanishing C^alpha_{mu c} but not Berwald type")
    return rep


# -- helpers for the suites -------------------------------------------------------------

def _require(space, pts, regime: str, exc, tol: float = PASS_TOL) -> None:
    worst = 0.0
    for p in pts:
        pd = at(space, p)
        if regime in ("Cartan", "CB"):
            worst = max(worst, *_cartan(pd))
        if regime in ("Berwald", "CB"):
            worst = max(worst, *_berwald(pd))
    if not worst < tol:
        raise exc(space.name, regime, worst)


def _observe_mask(pd: PointData, observed: dict) -> None:
    for c in NONCANONICAL:
        for k, v in curvature_jets(pd, c).blocks().items():
            key = f"{c}:{k}"
            observed[key] = max(observed.get(key, 0.0), maxabs(v))


def _finish(rep: SuiteReport, observed: dict, expected, name: str, anchor: str) -> SuiteReport:
    rep.extend(mask_checks(name, anchor, observed, expected))
    if all(v < 1e-12 for v in observed.values()):
        rep.notes.append("all curvature blocks vanish: the identity checks are degenerate")
    return rep


def _vertical_homogeneity(space, p: SpacePoint, pd: PointData, scales=(0.5, 2.0)):
    """Residuals of ``lambda_a(x, t y) = lambda_a(x, y)`` (and ``g_ab``) plus the Euler check.

    The scaled points may leave the sampling domain, so the frame is evaluated
    directly rather than through the domain-checked point data.
    """
    Cv = _v(pd.Cv)
    gv = Cv.T @ Cv
    scaled = 0.0
    for t in scales:
        _, Lv = space.lambda_eval(list(p.x), list(t * p.y))
        Ct = np.linalg.inv(np.asarray(jets.stack(Lv), dtype=float)).T
        scaled = max(scaled, maxabs(Ct - Cv), maxabs(Ct.T @ Ct - gv))
    euler = maxabs(np.einsum("icb,b->ic", _v(pd.vdot(pd.Cv)), p.y))
    return scaled, euler


def _liouville_identities(pd: PointData, which: str) -> list[Check]:
    """The Liouville-field identities tying torsion to curvature under ``which``."""
    T = torsion_jets(pd, which).values()
    K = curvature_jets(pd, which)
    y = pd.p.y
    a = f"cartan.liouville_identities.{which}"
    return [
        compare(f"liouville.{which}.R", a, T.Rnl, np.einsum("b,abnm->amn", y, K.R_vh), TOL_D2),
        compare(f"liouville.{which}.P", a, T.P, np.einsum("b,abmc->amc", y, K.P_v), TOL_D2),
        compare(f"liouville.{which}.T", a, T.Tv, np.einsum("d,adcb->abc", y, K.S_v), TOL_D2),
    ]


# -- Cartan type ------------------------------------------------------------------------

CARTAN_NONZERO = ("natural:R_hh", "natural:P_h", "natural:S_h", "dual:R_hh", "dual:P_h",
                  "symmetric:R_hh", "symmetric:P_h")


def cartan_consequence_suite(space: SpaceDefinition, samples=50, seed: int = 42) -> SuiteReport:
    """Consequences of a Cartan-type canonical connection."""
    pts = resolve_samples(space, samples, seed)
    _require(space, pts, "Cartan", PreconditionNotCartan)
    rep = SuiteReport("cartan", space.name, len(pts))
    observed: dict = {}
    for p in pts:
        pd = at(space, p)
        T = torsion_jets(pd).values()
        g = contortion_jets(pd).values()
        t = _parts(pd)
        gm = _gamma(pd)
        A = "cartan.consequences"
        rep.extend([
            vanishes("torsion.R", A, T.Rnl, TOL_D1),
            vanishes("torsion.P", A, T.P, TOL_D1),
            vanishes("torsion.T", A, T.Tv, TOL_D1),
            vanishes("contortion.vv_v", A, g.g_vv_v, TOL_D1),
            vanishes("contortion.vv_h", A, g.g_vv_h, TOL_D1),
            vanishes("berwald_nlc_part", A, T.P, TOL_D1,
                     note="dot-d_b N^a_mu - Gamma^a_{b mu}, i.e. the canonical P-torsion"),
            vanishes("natural.torsion.P", A, torsion_jets(pd, "natural").values().P, TOL_D1),
        ])
        Cc = _v(canonical(pd).C_vv_v)
        for c in NONCANONICAL:
            rep.add(compare(f"vertical_coefficients.{c}", A, _v(CONNECTIONS[c](pd).C_vv_v), Cc, TOL_D1))
        scaled, euler = _vertical_homogeneity(space, p, pd)
        rep.add(Check("homogeneity.scaling", "cartan.homogeneity", scaled, HOMOGENEITY_TOL))
        rep.add(Check("homogeneity.euler", "cartan.homogeneity", euler, HOMOGENEITY_TOL))
        for c in ("canonical", "natural"):
            rep.extend(_liouville_identities(pd, c))
        for c in NONCANONICAL:
            ch, cv = _cartan(pd, c)
            rep.add(Check(f"propagation.{c}.horizontal", "cartan.propagation", ch, TOL_D1))
            rep.add(Check(f"propagation.{c}.vertical", "cartan.propagation", cv, TOL_D1))

        K = {c: curvature_jets(pd, c) for c in NONCANONICAL}
        W = {c: w_jets(pd, c) for c in NONCANONICAL}
        B = "cartan.curvature_relations"
        for c in NONCANONICAL:
            for k in ("R_vh", "P_v", "S_v"):
                rep.add(vanishes(f"curvature.{c}.{k}", B, getattr(K[c], k), TOL_D2))
        rep.add(compare("curvature.dual.R_hh", B, K["dual"].R_hh, t.Lam_h.transpose(0, 3, 2, 1), TOL_D2))
        rep.add(compare("w.natural.W_hhh_is_curvature", B, W["natural"].W_hhh, _swap_last(K["natural"].R_hh),
                        TOL_D2))
        for c, k in (("natural", "W_hhv"), ("natural", "W_vhv"), ("natural", "W_vvv"), ("dual", "W_vhv"),
                     ("symmetric", "W_vhv"), ("dual", "W_vvv"), ("symmetric", "W_vvv")):
            rep.add(vanishes(f"w.{c}.{k}", B, getattr(W[c], k), TOL_D2))
        for c in NONCANONICAL:
            rep.add(vanishes(f"w.{c}.cyclic", B, _cyclic_bmn(_swap_last(W[c].W_hhh)), TOL_D2,
                             note="trivial in dimension 2"))

        F = "cartan.w_formulas"
        hh, hhv = gm.hh, gm.hhv
        nat_vhh = (_swap_last(gm.hhv_h) - gm.hh_v
                   + np.einsum("ebn,aec->abnc", hh, hhv) - np.einsum("ebc,aen->abnc", hhv, hh)
                   - np.einsum("enc,abe->abnc", hhv, hh))
        rep.add(compare("w_formula.natural.W_vhh", F, W["natural"].W_vhh, nat_vhh, TOL_D2))
        rep.add(compare("w_formula.dual.W_hhh", F, W["dual"].W_hhh, _dual_hhh(t), TOL_D2,
                        note="contracted index first in the quadratic torsion term"))
        rep.add(compare("w_formula.dual.W_vhh", F, W["dual"].W_vhh, t.Lam_v.transpose(0, 2, 1, 3), TOL_D2))
        _observe_mask(pd, observed)
    return _finish(rep, observed, CARTAN_NONZERO, "mask.cartan", "cartan.curvature_mask")


def _cyclic_bmn(a: np.ndarray) -> np.ndarray:
    from .curvature import cyclic
    return cyclic(a)


def _dual_hhh(t) -> np.ndarray:
    """``Lam^a_{nm|b} + Lam^e_{nm} Lam^a_{eb}`` at ``[a, b, n, m]``."""
    return t.Lam_h.transpose(0, 3, 1, 2) + np.einsum("enm,aeb->abnm", t.Lam, t.Lam)


# -- Berwald type -----------------------------------------------------------------------

# expected nonzero curvature blocks; the P_v entries cannot be met, see berwald_consequence_suite
BERWALD_NONZERO = tuple(f"{c}:{k}" for c in NONCANONICAL for k in ("R_hh", "R_vh", "P_v", "S_v"))


def berwald_consequence_suite(space: SpaceDefinition, samples=50, seed: int = 42) -> SuiteReport:
    """Consequences of a Berwald-type canonical connection.

    The expected pattern has the three ``P_v`` blocks nonzero.  They vanish
    identically in every Berwald-type space: with ``dot-d_b N^a_mu =
    Gamma^a_{b mu}`` the h-derivative of ``T^a_{bc}`` reduces to the
    antisymmetric part of ``dot-d_c dot-d_b N``, which is zero.  The check
    ``torsion.T_h`` records that identity and the mask check reports the
    mismatch instead of hiding it.
    """
    pts = resolve_samples(space, samples, seed)
    _require(space, pts, "Berwald", PreconditionNotBerwald)
    rep = SuiteReport("berwald", space.name, len(pts))
    observed: dict = {}
    n = space.n
    for p in pts:
        pd = at(space, p)
        D, o = canonical(pd), CONNECTIONS["natural"](pd)
        T = torsion_jets(pd).values()
        Tj = torsion_jets(pd)
        g = contortion_jets(pd)
        gv = g.values()
        t = _parts(pd)
        gm = _gamma(pd)
        gh = metric_jets(pd)[0]
        A = "berwald.consequences"
        rep.extend([
            vanishes("torsion.P", A, T.P, TOL_D1),
            vanishes("horizontal_coframe.y_derivative", A, _v(pd.vdot(pd.Ch)), TOL_D1),
            vanishes("horizontal_metric.y_derivative", A, _v(pd.vdot(gh)), TOL_D1),
            vanishes("natural.C_hh_v", A, _v(o.C_hh_v), TOL_D1),
            vanishes("contortion.hh_v", A, gv.g_hh_v, TOL_D1),
            vanishes("canonical.G_hh.y_derivative", A, _v(pd.vdot(D.G_hh)), TOL_D2),
            vanishes("natural.G_hh.y_derivative", A, _v(pd.vdot(o.G_hh)), TOL_D2),
            vanishes("torsion.Lam.y_derivative", A, _v(pd.vdot(Tj.Lam)), TOL_D2),
            vanishes("contortion.hh.y_derivative", A, _v(pd.vdot(g.g_hh)), TOL_D2),
            vanishes("contortion.vv_h", A, gv.g_vv_h, TOL_D1),
            vanishes("natural.torsion.P", A, torsion_jets(pd, "natural").values().P, TOL_D1),
            compare("natural.G_vv_h", A, _v(o.G_vv_h), _v(D.G_vv_h), TOL_D1),
            vanishes("torsion.T_h", A, t.T_h, TOL_D2, note="identically zero under the Berwald condition"),
        ])
        # x-only closed forms of the hh-coefficients
        dCh = _v(pd.Ch.partials())[..., :n]          # [i, m, n] = d_n lambda_i_m
        rep.add(compare("canonical.G_hh.x_only_form", A, _v(D.G_hh),
                        np.einsum("ia,imn->amn", _v(pd.Lh), dCh), TOL_D1))
        dg = _v(gh.partials())[..., :n]              # [m, e, n] = d_n g_me
        gi = _v(metric_jets(pd)[2])
        S = np.einsum("nem->mne", dg) + np.einsum("men->mne", dg) - dg
        christ = 0.5 * np.einsum("ae,mne->amn", gi, S)
        rep.add(compare("natural.G_hh.x_only_form", A, _v(o.G_hh), christ, TOL_D1))

        K = {c: curvature_jets(pd, c) for c in NONCANONICAL}
        W = {c: w_jets(pd, c) for c in NONCANONICAL}
        B = "berwald.curvature_relations"
        rep.add(compare("curvature.natural.R_vh", B, K["natural"].R_vh,
                        np.einsum("abd,dmn->abmn", gm.vvv, t.R), TOL_D2))
        rep.add(vanishes("curvature.natural.P_h", B, K["natural"].P_h, TOL_D2))
        rep.add(vanishes("curvature.natural.S_h", B, K["natural"].S_h, TOL_D2))
        rep.add(compare("curvature.dual.R_hh", B, K["dual"].R_hh, t.Lam_h.transpose(0, 3, 2, 1), TOL_D2))
        rep.add(vanishes("curvature.dual.P_h", B, K["dual"].P_h, TOL_D2))
        rep.add(vanishes("curvature.symmetric.P_h", B, K["symmetric"].P_h, TOL_D2))
        rep.add(compare("curvature.dual.P_v_is_w", B, K["dual"].P_v, W["dual"].W_vhv, TOL_D2))
        for c, k in (("natural", "W_hhv"), ("natural", "W_vhh"), ("dual", "W_vhh"), ("symmetric", "W_vhh")):
            rep.add(vanishes(f"w.{c}.{k}", B, getattr(W[c], k), TOL_D2))

        F = "berwald.w_formulas"
        hh = gm.hh
        nat_hhh = (_swap_last(gm.hh_h) - gm.hh_h
                   + np.einsum("ebn,aem->abnm", hh, hh) - np.einsum("ebm,aen->abnm", hh, hh)
                   - np.einsum("abe,enm->abnm", hh, t.Lam))
        rep.add(compare("w_formula.natural.W_hhh", F, W["natural"].W_hhh, nat_hhh, TOL_D2))
        rep.add(compare("w_formula.natural.W_vhv", F, W["natural"].W_vhv, _swap_last(gm.vvv_h), TOL_D2))
        rep.add(compare("w_formula.dual.W_hhh", F, W["dual"].W_hhh, _dual_hhh(t), TOL_D2,
                        note="contracted index first in the quadratic torsion term"))
        rep.add(compare("w_formula.dual.W_vvv", F, W["dual"].W_vvv,
                        t.T_v.transpose(0, 3, 1, 2) + np.einsum("edc,aeb->abdc", t.T, t.T), TOL_D2,
                        note="contracted index first in the quadratic torsion term"))
        _observe_mask(pd, observed)
    return _finish(rep, observed, BERWALD_NONZERO, "mask.berwald", "berwald.curvature_mask")


# -- CB-condition -------------------------------------------------------------------------

CB_NONZERO = ("natural:R_hh", "dual:R_hh", "symmetric:R_hh")


def cb_consequence_suite(space: SpaceDefinition, samples=50, seed: int = 42) -> SuiteReport:
    """Consequences of the CB-condition (Cartan and Berwald type together)."""
    pts = resolve_samples(space, samples, seed)
    _require(space, pts, "CB", PreconditionNotCB)
    rep = SuiteReport("cb", space.name, len(pts))
    observed: dict = {}
    for p in pts:
        pd = at(space, p)
        Tj = torsion_jets(pd)
        T = Tj.values()
        g = contortion_jets(pd)
        gv = g.values()
        t = _parts(pd)
        gm = _gamma(pd)
        A = "cb.torsion_contortion"
        rep.extend([
            vanishes("torsion.R", A, T.Rnl, TOL_D1),
            vanishes("torsion.C", A, T.Chv, TOL_D1),
            vanishes("torsion.P", A, T.P, TOL_D1),
            vanishes("torsion.T", A, T.Tv, TOL_D1),
            vanishes("contortion.vv_h", A, gv.g_vv_h, TOL_D1),
            vanishes("contortion.hh_v", A, gv.g_hh_v, TOL_D1),
            vanishes("contortion.vv_v", A, gv.g_vv_v, TOL_D1),
            vanishes("torsion.Lam.y_derivative", A, _v(pd.vdot(Tj.Lam)), TOL_D2),
            vanishes("contortion.hh.y_derivative", A, _v(pd.vdot(g.g_hh)), TOL_D2),
        ])
        for c, f in CONNECTIONS.items():
            rep.add(vanishes(f"{c}.G_hh.y_derivative", "cb.x_only", _v(pd.vdot(f(pd).G_hh)), TOL_D2))

        K = {c: curvature_jets(pd, c) for c in NONCANONICAL}
        B = "cb.curvature_formulas"
        Lam, Lh, hh = t.Lam, t.Lam_h, gm.hh
        nat = (gm.hh_h - _swap_last(gm.hh_h)
               + np.einsum("ebn,aem->abmn", hh, hh) - np.einsum("ebm,aen->abmn", hh, hh)
               + np.einsum("abe,emn->abmn", hh, Lam))
        sym = (0.5 * (Lh - _swap_last(Lh))
               + 0.25 * (np.einsum("ebm,ane->abmn", Lam, Lam) - np.einsum("ebn,ame->abmn", Lam, Lam))
               + 0.5 * np.einsum("emn,abe->abmn", Lam, Lam))
        rep.add(compare("curvature.natural.R_hh", B, K["natural"].R_hh, nat, TOL_D2))
        rep.add(compare("curvature.dual.R_hh", B, K["dual"].R_hh, Lh.transpose(0, 3, 2, 1), TOL_D2))
        rep.add(compare("curvature.symmetric.R_hh", B, K["symmetric"].R_hh, sym, TOL_D2))

        W = {c: w_jets(pd, c) for c in NONCANONICAL}
        rep.add(compare("w_formula.dual.W_hhh", "cb.single_w", W["dual"].W_hhh, _dual_hhh(t), TOL_D2,
                        note="contracted index first in the quadratic torsion term"))
        others = 0.0
        for c in NONCANONICAL:
            for k in W_BLOCKS:
                if (c, k) == ("dual", "W_hhh"):
                    continue
                w, r = getattr(W[c], k), getattr(K[c], _PARTNER[k])
                others = max(others, min(maxabs(w), maxabs(w - r), maxabs(w - _swap_last(r))))
        rep.add(Check("w.others_zero_or_curvature", "cb.single_w", others, TOL_D2))
        _observe_mask(pd, observed)
    return _finish(rep, observed, CB_NONZERO, "mask.cb", "cb.curvature_mask")


SUITES = {"cartan": cartan_consequence_suite, "berwald": berwald_consequence_suite, "cb": cb_consequence_suite}
