"""The ten primary acceptance criteria, one summary line each.

Every test records a PASS/FAIL line that is printed in the terminal summary
(and immediately with ``pytest -s``).  Criterion 8 includes an expected
Berwald curvature mask that cannot be met; that part is a strict xfail and
its line reports FAIL together with the reason.
"""
import time

import numpy as np
import pytest

from eaplab.calculus import _cached, at
from eaplab.checks import FAIL
from eaplab.classify import berwald_consequence_suite, cartan_consequence_suite, cb_consequence_suite, classify
from eaplab.connections import (CONNECTIONS, basic_vector, canonical_connection, canonical_via_contortion,
                                contortion, frame_derivatives, lowered_contortion, contortion_from_torsion,
                                torsion, torsion_contortion_relations, torsion_jets)
from eaplab.curvature import FORMULAS, bianchi_residuals, contractions, curvature_direct, curvature_jets
from eaplab.metric import hv_metric, metricity_residual, metricity_tensors
from eaplab.spaces import CATALOG_NAMES, builtin_space, evaluate_frame, invert_frame, kronecker_residual
from eaplab.suites import jet_oracle_residual
from eaplab.wtensor import HALF_PAIRS, W_FORMULAS, w_census, w_cyclic_report, w_jets, w_via_commutator

from conftest import ACCEPTANCE_LINES

SEED = 42
NONCANONICAL = ("natural", "dual", "symmetric")


def record(k: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  [{k:>2}] {title}: {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)


def maxabs(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.abs(a).max()) if a.size else 0.0


@pytest.fixture(scope="module")
def generic2_points():
    sp = builtin_space("generic2")
    return sp, sp.sample(20, seed=SEED)


def test_criterion_01_canonical_curvature_vanishes():
    _cached.cache_clear()
    t0 = time.perf_counter()
    worst = 0.0
    for name in CATALOG_NAMES:
        sp = builtin_space(name)
        for p in sp.sample(50, seed=SEED):
            worst = max(worst, curvature_direct("canonical", sp, p).max_abs())
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 10.0
    record(1, "canonical curvature vanishes", ok,
           f"max {worst:.2e} < 1e-9 over 5 spaces x 50 points in {elapsed:.2f} s (< 10 s)")
    assert worst < 1e-9
    assert elapsed < 10.0


def test_criterion_02_canonical_w_vanishes():
    worst = 0.0
    for name in CATALOG_NAMES:
        sp = builtin_space(name)
        for p in sp.sample(50, seed=SEED):
            worst = max(worst, w_via_commutator("canonical", sp, p).max_abs())
    record(2, "canonical W-tensors vanish", worst < 1e-8, f"max {worst:.2e} < 1e-8 over 5 spaces x 50 points")
    assert worst < 1e-8


def test_criterion_03_metricity():
    metric, closed, half = 0.0, 0.0, 0.0
    for name in CATALOG_NAMES:
        sp = builtin_space(name)
        for p in sp.sample(20, seed=SEED):
            for c in ("canonical", "natural"):
                metric = max(metric, *metricity_residual(CONNECTIONS[c], sp, p))
            pd = at(sp, p)
            m = hv_metric(pd)
            T = torsion_jets(pd).values()
            L = np.einsum("ae,emn->amn", m.g_h, T.Lam)
            Tl = np.einsum("ad,dbc->abc", m.g_v, T.Tv)
            d = metricity_tensors(pd, CONNECTIONS["dual"](pd))
            s = metricity_tensors(pd, CONNECTIONS["symmetric"](pd))
            closed = max(closed, maxabs(d[0] - L - L.transpose(1, 0, 2)), maxabs(d[1]), maxabs(d[2]),
                         maxabs(d[3] - Tl - Tl.transpose(1, 0, 2)))
            half = max(half, *(maxabs(a - 0.5 * b) for a, b in zip(s, d)))
    ok = max(metric, closed, half) < 1e-10
    record(3, "metricity", ok, f"canonical/natural {metric:.2e}, dual closed forms {closed:.2e}, "
                               f"symmetric = half dual {half:.2e} (all < 1e-10)")
    assert ok


def test_criterion_04_two_route_equivalence(generic2_points):
    sp, pts = generic2_points
    curv = w = conn = cont = 0.0
    for p in pts:
        pd = at(sp, p)
        for c in NONCANONICAL:
            curv = max(curv, (curvature_jets(pd, c) - FORMULAS[c](pd)).max_abs())
            w = max(w, (w_jets(pd, c) - W_FORMULAS[c](pd)).max_abs())
        a, b = canonical_connection(sp, p), canonical_via_contortion(sp, p)
        conn = max(conn, *(maxabs(x - y) for x, y in zip(a.blocks().values(), b.blocks().values())))
        m = hv_metric(pd)
        gh, _, _, gv = lowered_contortion(pd)
        fh, fv = contortion_from_torsion(torsion_jets(pd).values(), m.g_h, m.g_v)
        cont = max(cont, maxabs(gh - fh), maxabs(gv - fv))
    ok = curv < 1e-8 and w < 1e-8 and conn < 1e-10 and cont < 1e-10
    record(4, "two-route equivalence", ok, f"curvature {curv:.2e}, W {w:.2e} (< 1e-8); canonical connection "
                                           f"{conn:.2e}, contortion {cont:.2e} (< 1e-10)")
    assert ok


def test_criterion_05_algebraic_identities():
    skew = trace = anti = kron = rel = lam = 0.0
    for name in CATALOG_NAMES:
        sp = builtin_space(name)
        for p in sp.sample(20, seed=SEED):
            pd = at(sp, p)
            for b in lowered_contortion(pd):
                skew = max(skew, maxabs(b + b.transpose(1, 0, 2)))
            g = contortion(sp, p)
            for k in ("g_hh", "g_vv_h", "g_hh_v", "g_vv_v"):
                trace = max(trace, maxabs(np.einsum("aan->n", getattr(g, k))))
            for c in CONNECTIONS:
                T = torsion(c, sp, p)
                anti = max(anti, maxabs(T.Lam + T.Lam.transpose(0, 2, 1)), maxabs(T.Tv + T.Tv.transpose(0, 2, 1)),
                           maxabs(T.Rnl + T.Rnl.transpose(0, 2, 1)))
            f = evaluate_frame(sp, p)
            kron = max(kron, kronecker_residual(f, invert_frame(f)))
            rel = max(rel, *torsion_contortion_relations(pd).values())
            T = torsion_jets(pd).values()
            Lh, Lv = f.Lh, f.Lv
            fd = [np.asarray(x.val) for x in frame_derivatives(pd, CONNECTIONS["dual"](pd))]
            fs = [np.asarray(x.val) for x in frame_derivatives(pd, CONNECTIONS["symmetric"](pd))]
            lam = max(lam, maxabs(fd[0] - np.einsum("ib,amb->iam", Lh, T.Lam)), maxabs(fd[1]), maxabs(fd[2]),
                      maxabs(fd[3] - np.einsum("ib,acb->iac", Lv, T.Tv)),
                      *(maxabs(a - 0.5 * b) for a, b in zip(fs, fd)))
    ok = max(skew, trace, kron) < 1e-12 and anti == 0.0 and rel < 1e-10 and lam < 1e-10
    record(5, "algebraic identities", ok,
           f"contortion skew {skew:.1e}, traces {trace:.1e}, Kronecker {kron:.1e} (< 1e-12); torsion "
           f"antisymmetry {anti:.1e} (exact); torsion-contortion {rel:.1e}, frame derivatives {lam:.1e} (< 1e-10)")
    assert ok


def test_criterion_06_bianchi_and_cyclic(generic2_points):
    sp, pts = generic2_points
    bianchi = max(bianchi_residuals(sp, p).max() for p in pts)
    cyc = 0.0
    for s in (sp, builtin_space("generic3")):
        for p in (pts if s is sp else s.sample(5, seed=SEED)):
            r = w_cyclic_report(s, p)
            cyc = max(cyc, r["natural"], r["symmetric"], r["dual"])
    ok = bianchi < 1e-8 and cyc < 1e-8
    record(6, "Bianchi and cyclic W identities", ok,
           f"Bianchi {bianchi:.2e}, cyclic W {cyc:.2e} (< 1e-8; dual form with its quadratic torsion term, "
           f"also checked in dimension 3)")
    assert ok


def test_criterion_07_contractions(generic2_points):
    sp, pts = generic2_points
    worst = max(max(contractions(c, sp, p).residuals().values()) for p in pts for c in NONCANONICAL)
    record(7, "contractions", worst < 1e-8, f"closed forms vs index tracing {worst:.2e} < 1e-8")
    assert worst < 1e-8


EXPECTED_LABELS = {"flat": "cb", "cb2": "cb", "cartan2": "cartan", "berwald2": "berwald", "generic2": "generic"}


def _regime_reports():
    return (cartan_consequence_suite(builtin_space("cartan2"), 50, SEED),
            berwald_consequence_suite(builtin_space("berwald2"), 50, SEED),
            cb_consequence_suite(builtin_space("cb2"), 50, SEED))


@pytest.fixture(scope="module")
def regime_reports():
    return _regime_reports()


def _identity_residual(rep) -> float:
    return max(c.residual for k, c in rep.checks.items() if not k.startswith("mask."))


def test_criterion_08_classification_and_regime_suites(regime_reports):
    labels = {name: classify(builtin_space(name), 50, SEED).label for name in EXPECTED_LABELS}
    again = {name: classify(builtin_space(name), 50, SEED).label for name in EXPECTED_LABELS}
    cartan, berwald, cb = regime_reports
    ident = max(_identity_residual(r) for r in regime_reports)
    homog = cartan.max_residual("homogeneity")
    masks_ok = {r.suite: all(r.checks[f"mask.{r.suite}.{k}"].status != FAIL for k in ("zeros", "nonzeros"))
                for r in regime_reports}
    bw = berwald.checks["mask.berwald.nonzeros"]
    ok = labels == EXPECTED_LABELS and all(masks_ok.values())
    record(8, "classification regimes", ok,
           f"labels {'match' if labels == EXPECTED_LABELS else labels}; suite identities {ident:.2e} < 1e-9, "
           f"homogeneity {homog:.2e} < 1e-10; Cartan and CB masks reproduced; Berwald mask NOT reproduced: "
           f"{bw.note}. The P_v blocks vanish identically under the Berwald condition "
           f"(h-derivative of T^a_bc is zero), so this part is unattainable")
    # the attainable parts are hard requirements
    assert labels == EXPECTED_LABELS and labels == again
    assert ident < 1e-9 and homog < 1e-10
    assert masks_ok["cartan"] and masks_ok["cb"]
    assert berwald.checks["mask.berwald.zeros"].status != FAIL
    assert [c.name for c in berwald.failures()] == ["mask.berwald.nonzeros"]


@pytest.mark.xfail(strict=True, reason="the three P_v curvature blocks vanish identically in Berwald-type "
                                       "spaces, so only 9 of the 12 expected nonzero blocks can appear")
def test_criterion_08_berwald_mask_has_twelve_nonzero_blocks(regime_reports):
    assert regime_reports[1].checks["mask.berwald.nonzeros"].status != FAIL


def test_criterion_09_w_census(generic2_points):
    sp, pts = generic2_points
    rep = w_census(sp, pts)
    s = rep.summary()
    half = max(rep.half_residuals.values())
    ok = s["zero"] == 4 and s["curvature"] == 4 and half < 1e-10
    record(9, "W census on generic2", ok, f"{s['zero']} zero, {s['curvature']} curvature-equal, {s['half']} half, "
                                          f"{s['independent']} independent; half relations {half:.2e} < 1e-10")
    assert ok
    assert len(HALF_PAIRS) == s["half"] == 2


def test_criterion_10_jet_oracle():
    worst = 0.0
    for name in CATALOG_NAMES:
        sp = builtin_space(name)
        worst = max(worst, jet_oracle_residual(sp, sp.sample(20, seed=SEED), h=1e-5))
    record(10, "jet vs central differences", worst < 1e-5,
           f"max |jet - fd| / (1 + |jet|) = {worst:.2e} < 1e-5 over 5 spaces x 20 points")
    assert worst < 1e-5
