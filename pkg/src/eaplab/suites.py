"""Verification suites over sample points of a space.

Each suite evaluates a family of identities at every sample point and merges
the residuals into one :class:`~eaplab.checks.SuiteReport`.  The regime
suites (Cartan, Berwald, CB) live in :mod:`eaplab.classify`; ``run_suite``
dispatches to both and turns a failed regime precondition into a failing
check instead of an exception.
"""
from __future__ import annotations

import numpy as np

from . import jets
from .calculus import at
from .checks import Check, SuiteReport, Tolerances, compare, maxabs, resolve_samples, vanishes
from .classify import SUITES as REGIME_SUITES
from .classify import PreconditionFailed, classify
from .connections import (CONNECTIONS, basic_vector, canonical, canonical_via_contortion_jets,
                          contortion_from_torsion, contortion_jets, frame_derivatives, lowered_contortion,
                          torsion_contortion_relations, torsion_jets)
from .curvature import FORMULAS, bianchi_residuals, contractions, curvature_jets
from .metric import hv_metric, metricity_tensors, natural_via_lambda
from .spaces import SpaceDefinition, evaluate_frame, invert_frame, kronecker_residual
from .wtensor import HALF_PAIRS, W_FORMULAS, w_covariant, w_cyclic_report, w_jets

GENERAL = ("metric", "torsion", "curvature", "bianchi", "wtensor")
SUITE_NAMES = GENERAL + ("cartan", "berwald", "cb", "all")
NONCANONICAL = ("natural", "dual", "symmetric")


def _v(a):
    return np.asarray(jets.value(a), dtype=float)


def _conn_diff(a, b) -> float:
    return max(maxabs(_v(getattr(a, k)) - _v(getattr(b, k))) for k in ("G_hh", "G_vv_h", "C_hh_v", "C_vv_v"))


# -- metric -----------------------------------------------------------------------------

def metric_checks(pd, tol: Tolerances) -> list[Check]:
    out = []
    m = hv_metric(pd)
    n = pd.n
    A = "metric.frame_metric"
    out.append(vanishes("inverse.h", A, m.g_h_inv @ m.g_h - np.eye(n), tol.algebraic))
    out.append(vanishes("inverse.v", A, m.g_v_inv @ m.g_v - np.eye(n), tol.algebraic))
    parts = ("h_h", "h_v", "v_h", "v_v")
    for c in ("canonical", "natural"):
        for k, t in zip(parts, metricity_tensors(pd, CONNECTIONS[c](pd))):
            out.append(vanishes(f"metricity.{c}.{k}", "metric.metricity", t, tol.d1))
    T = torsion_jets(pd).values()
    L = np.einsum("ae,emn->amn", m.g_h, T.Lam)
    Tl = np.einsum("ad,dbc->abc", m.g_v, T.Tv)
    closed = {"h_h": L + L.transpose(1, 0, 2), "v_v": Tl + Tl.transpose(1, 0, 2)}
    d = metricity_tensors(pd, CONNECTIONS["dual"](pd))
    s = metricity_tensors(pd, CONNECTIONS["symmetric"](pd))
    B = "metric.nonmetricity"
    for k, dk, sk in zip(parts, d, s):
        if k in closed:
            out.append(compare(f"nonmetricity.dual.{k}", B, dk, closed[k], tol.d1))
            out.append(compare(f"nonmetricity.symmetric_half.{k}", B, sk, 0.5 * dk, tol.d1))
        else:
            out.append(vanishes(f"nonmetricity.dual.{k}", B, dk, tol.d1))
            out.append(vanishes(f"nonmetricity.symmetric.{k}", B, sk, tol.d1))
    o = CONNECTIONS["natural"](pd)
    out.append(vanishes("natural.G_hh.symmetry", "metric.natural", _v(o.G_hh) - _v(o.G_hh).transpose(0, 2, 1),
                        tol.algebraic))
    out.append(vanishes("natural.C_vv_v.symmetry", "metric.natural",
                        _v(o.C_vv_v) - _v(o.C_vv_v).transpose(0, 2, 1), tol.algebraic))
    out.append(Check("natural.via_frames", "metric.natural_two_routes",
                     _conn_diff(natural_via_lambda(pd), o), tol.d1))
    return out


# -- torsion / contortion -------------------------------------------------------------------

def torsion_checks(pd, tol: Tolerances) -> list[Check]:
    out = []
    A = "connections.frames"
    f = evaluate_frame(pd.space, pd.p)
    out.append(Check("kronecker", A, kronecker_residual(f, invert_frame(f)), tol.algebraic))
    D = canonical(pd)
    for k, t in zip(("Lh_h", "Lh_v", "Lv_h", "Lv_v"), frame_derivatives(pd, D)):
        out.append(vanishes(f"ap_condition.{k}", "connections.ap_condition", _v(t), tol.d1))
    out.append(Check("canonical.via_contortion", "connections.canonical_two_routes",
                     _conn_diff(canonical_via_contortion_jets(pd), D), tol.d1))

    # lambda derivatives under the dual and symmetric connections
    T = torsion_jets(pd).values()
    Lh, Lv = _v(pd.Lh), _v(pd.Lv)
    dual_h = np.einsum("ib,amb->iam", Lh, T.Lam)
    dual_v = np.einsum("ib,acb->iac", Lv, T.Tv)
    fd = [_v(t) for t in frame_derivatives(pd, CONNECTIONS["dual"](pd))]
    fs = [_v(t) for t in frame_derivatives(pd, CONNECTIONS["symmetric"](pd))]
    B = "connections.frame_derivatives"
    out += [compare("dual.Lh_h", B, fd[0], dual_h, tol.d1), vanishes("dual.Lh_v", B, fd[1], tol.d1),
            vanishes("dual.Lv_h", B, fd[2], tol.d1), compare("dual.Lv_v", B, fd[3], dual_v, tol.d1),
            vanishes("symmetric.Lh_v", B, fs[1], tol.d1), vanishes("symmetric.Lv_h", B, fs[2], tol.d1),
            compare("symmetric_half.Lh_h", B, fs[0], 0.5 * fd[0], tol.algebraic),
            compare("symmetric_half.Lv_v", B, fs[3], 0.5 * fd[3], tol.algebraic)]

    C = "connections.torsion"
    for c in CONNECTIONS:
        Tc = torsion_jets(pd, c).values()
        out.append(vanishes(f"antisymmetry.{c}.Lam", C, Tc.Lam + Tc.Lam.transpose(0, 2, 1), tol.algebraic))
        out.append(vanishes(f"antisymmetry.{c}.Tv", C, Tc.Tv + Tc.Tv.transpose(0, 2, 1), tol.algebraic))
    out.append(vanishes("antisymmetry.Rnl", C, T.Rnl + T.Rnl.transpose(0, 2, 1), tol.algebraic))
    Td, Ts, To = (torsion_jets(pd, c).values() for c in ("dual", "symmetric", "natural"))
    out += [compare("pattern.dual.Lam", C, Td.Lam, -T.Lam, tol.algebraic),
            compare("pattern.dual.Tv", C, Td.Tv, -T.Tv, tol.algebraic),
            vanishes("pattern.symmetric.Lam", C, Ts.Lam, tol.algebraic),
            vanishes("pattern.symmetric.Tv", C, Ts.Tv, tol.algebraic),
            vanishes("pattern.natural.Lam", C, To.Lam, tol.algebraic),
            vanishes("pattern.natural.Tv", C, To.Tv, tol.algebraic)]

    E = "connections.contortion"
    g = contortion_jets(pd)
    gv = g.values()
    for k, b in zip(("hh", "vv_h", "hh_v", "vv_v"), lowered_contortion(pd)):
        out.append(vanishes(f"contortion.skew.{k}", E, b + b.transpose(1, 0, 2), tol.algebraic))
    for k in ("g_hh", "g_vv_h", "g_hh_v", "g_vv_v"):
        out.append(vanishes(f"contortion.trace.{k}", E, np.einsum("aan->n", getattr(gv, k)), tol.algebraic))
    o = CONNECTIONS["natural"](pd)
    diff = (_v(D.G_hh) - _v(o.G_hh), _v(D.G_vv_h) - _v(o.G_vv_h), _v(D.C_hh_v) - _v(o.C_hh_v),
            _v(D.C_vv_v) - _v(o.C_vv_v))
    out.append(Check("contortion.as_difference", E,
                     max(maxabs(a - b) for a, b in zip(diff, (gv.g_hh, gv.g_vv_h, gv.g_hh_v, gv.g_vv_v))), tol.d1))
    m = hv_metric(pd)
    gh_low, _, _, gv_low = lowered_contortion(pd)
    fh, fv = contortion_from_torsion(T, m.g_h, m.g_v)
    out.append(compare("contortion.from_torsion.hh", E, gh_low, fh, tol.d1))
    out.append(compare("contortion.from_torsion.vv_v", E, gv_low, fv, tol.d1))
    for k, r in torsion_contortion_relations(pd).items():
        out.append(Check(f"torsion_contortion.{k}", E, r, tol.d1))
    C1, C2 = basic_vector(T), basic_vector(T, gv)
    out.append(compare("basic_vector.h", E, C1.C_h, C2.C_h, tol.algebraic))
    out.append(compare("basic_vector.v", E, C1.C_v, C2.C_v, tol.algebraic))
    return out


# -- curvature ----------------------------------------------------------------------------

def curvature_checks(pd, tol: Tolerances) -> list[Check]:
    out = [vanishes(f"canonical.{k}", "curvature.canonical_vanishes", v, tol.d2)
           for k, v in curvature_jets(pd, "canonical").blocks().items()]
    for c in NONCANONICAL:
        diff = curvature_jets(pd, c) - FORMULAS[c](pd)
        for k, v in diff.blocks().items():
            out.append(vanishes(f"formula.{c}.{k}", "curvature.two_routes", v, tol.d2))
        for k, r in contractions(c, pd.space, pd.p).residuals().items():
            out.append(Check(f"contraction.{c}.{k}", "curvature.contractions", r, tol.d2))
    Kd, Ks = curvature_jets(pd, "dual"), curvature_jets(pd, "symmetric")
    for k in ("R_vh", "P_h", "P_v"):
        out.append(compare(f"symmetric_half.{k}", "curvature.symmetric_half", getattr(Ks, k),
                           0.5 * getattr(Kd, k), tol.d2))
    return out


def bianchi_checks(pd, tol: Tolerances) -> list[Check]:
    rep = bianchi_residuals(pd.space, pd.p)
    return [Check(f"bianchi.{k}", "curvature.bianchi", r, tol.d2, rep.trivial[k]) for k, r in rep.residuals.items()]


# -- W-tensors ---------------------------------------------------------------------------------

def wtensor_checks(pd, tol: Tolerances) -> list[Check]:
    out = [vanishes(f"canonical.{k}", "wtensor.canonical_vanishes", v, tol.d2)
           for k, v in w_jets(pd, "canonical").blocks().items()]
    for c in NONCANONICAL:
        W = w_jets(pd, c)
        for k, v in (W - W_FORMULAS[c](pd)).blocks().items():
            out.append(vanishes(f"formula.{c}.{k}", "wtensor.two_routes", v, tol.d2))
        cov = w_covariant(pd, CONNECTIONS[c](pd))
        out.append(Check(f"coframe_route.{c}", "wtensor.coframe_route", (cov.scaled(-1.0) - W).max_abs(), tol.d2))
    cyc = w_cyclic_report(pd.space, pd.p)
    for k in ("natural", "symmetric", "dual"):
        out.append(Check(f"cyclic.{k}", "wtensor.cyclic", cyc[k], tol.d2))
    for (a, ka), (b, kb) in HALF_PAIRS:
        out.append(compare(f"half.{a}.{ka}", "wtensor.symmetric_half", getattr(w_jets(pd, a), ka),
                           0.5 * getattr(w_jets(pd, b), kb), tol.d1))
    return out


CHECKS = {"metric": metric_checks, "torsion": torsion_checks, "curvature": curvature_checks,
          "bianchi": bianchi_checks, "wtensor": wtensor_checks}


def general_suite(name: str, space: SpaceDefinition, samples=50, seed: int = 42,
                  tol: Tolerances | None = None) -> SuiteReport:
    tol = tol or Tolerances()
    pts = resolve_samples(space, samples, seed)
    rep = SuiteReport(name, space.name, len(pts))
    for p in pts:
        rep.extend(CHECKS[name](at(space, p), tol))
    return rep


def regime_suite(name: str, space: SpaceDefinition, samples=50, seed: int = 42) -> SuiteReport:
    try:
        return REGIME_SUITES[name](space, samples, seed)
    except PreconditionFailed as exc:
        rep = SuiteReport(name, space.name, len(resolve_samples(space, samples, seed)))
        rep.add(Check("precondition", f"{name}.precondition", exc.residual, 1e-9, note=str(exc)))
        return rep


def regimes_for(label: str) -> tuple[str, ...]:
    """The most specific regime suite for a label; CB spaces are too special for the Cartan or
    Berwald curvature masks, whose generic nonzero blocks vanish there."""
    return {"cb": ("cb",), "cartan": ("cartan",), "berwald": ("berwald",)}.get(label, ())


def run_suite(name: str, space: SpaceDefinition, samples=50, seed: int = 42,
              tol: Tolerances | None = None) -> list[SuiteReport]:
    """Run one suite, or for ``all`` every general suite plus the regime suites the space qualifies for."""
    if name not in SUITE_NAMES:
        raise KeyError(name)
    if name in GENERAL:
        return [general_suite(name, space, samples, seed, tol)]
    if name != "all":
        return [regime_suite(name, space, samples, seed)]
    out = [general_suite(k, space, samples, seed, tol) for k in GENERAL]
    label = classify(space, samples, seed).label
    out += [regime_suite(k, space, samples, seed) for k in regimes_for(label)]
    return out


# -- derivative oracle ----------------------------------------------------------------------------

def jet_oracle_residual(space: SpaceDefinition, points, h: float = 1e-5) -> float:
    """Worst ``|jet - central difference| / (1 + |jet|)`` over all first partials of ``Lh, Lv, N``."""
    from .spaces import field_jets
    worst = 0.0
    n = space.n
    for p in points:
        Lh, Lv, N = field_jets(space, p)
        z0 = np.concatenate([p.x, p.y])
        fd = []
        for k in range(2 * n):
            vals = []
            for s in (1.0, -1.0):
                z = z0.copy()
                z[k] += s * h
                x, y = list(z[:n]), list(z[n:])
                A, B = space.lambda_eval(x, y)
                vals.append([np.asarray(jets.stack(A), float), np.asarray(jets.stack(B), float),
                             np.asarray(jets.stack(space.nlc_eval(x, y)), float)])
            fd.append([(a - b) / (2 * h) for a, b in zip(*vals)])
        for j, J in enumerate((Lh, Lv, N)):
            est = np.stack([fd[k][j] for k in range(2 * n)], axis=-1)
            worst = max(worst, float(np.max(np.abs(J.grad - est) / (1.0 + np.abs(J.grad)))))
    return worst
