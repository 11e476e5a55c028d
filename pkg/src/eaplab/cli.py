"""Command-line front end: ``list``, ``eval``, ``classify`` and ``verify``.

Exit codes: 0 when everything passes, 1 when a check fails (or a
classification is indeterminate), 2 for usage and configuration errors.
JSON output is UTF-8 with sorted keys and carries no timestamp, so identical
invocations produce byte-identical reports.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields, is_dataclass

import numpy as np

from . import __version__
from .calculus import at, nlc_curvature
from .checks import Tolerances
from .classify import classify, induced_nlc
from .connections import CONNECTIONS, basic_vector, contortion_jets, torsion_jets
from .curvature import curvature_jets
from .field_theory import lagrangians
from .jets import PointOutsideDomain
from .metric import hv_metric
from .spaces import CATALOG_NAMES, SpacePoint, UnknownSpace, builtin_space, catalog
from .suites import SUITE_NAMES, run_suite
from .wtensor import w_jets

SCHEMA = "eaplab.report/1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UnknownObject(KeyError):
    pass


@dataclass(frozen=True)
class VerifyConfig:
    space: str
    suite: str = "all"
    samples: int = 50
    seed: int = 42
    tol: Tolerances = Tolerances()

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("--samples must be at least 1")
        if self.suite not in SUITE_NAMES:
            raise ValueError(f"unknown suite {self.suite!r}")


# -- object selectors for eval ------------------------------------------------------------

def _blocks(obj) -> dict:
    if is_dataclass(obj):
        return {f.name: np.asarray(getattr(obj, f.name), dtype=float) for f in fields(obj)}
    return {"value": np.asarray(obj, dtype=float)}


def _conn_selector(kind: str):
    def get(space, p, which):
        pd = at(space, p)
        if which not in CONNECTIONS:
            raise UnknownObject(f"{kind}.{which}")
        if kind == "connection":
            return _blocks(CONNECTIONS[which](pd).values())
        if kind == "torsion":
            return _blocks(torsion_jets(pd, which).values())
        if kind == "curvature":
            return curvature_jets(pd, which).blocks()
        return w_jets(pd, which).blocks()
    return get


def _plain(fn):
    def get(space, p, which):
        if which is not None:
            raise UnknownObject(which)
        return fn(space, p)
    return get


def _frame(space, p):
    pd = at(space, p)
    return {"Lh": pd.Lh.val, "Lv": pd.Lv.val, "Ch": pd.Ch.val, "Cv": pd.Cv.val}


def _metric(space, p):
    return _blocks(hv_metric(at(space, p)))


def _nlc(space, p):
    pd = at(space, p)
    return {"N": pd.N.val, "R": np.asarray(nlc_curvature(pd).val), "induced": induced_nlc(space, p)}


def _contortion(space, p):
    return _blocks(contortion_jets(at(space, p)).values())


def _basic(space, p):
    return _blocks(basic_vector(torsion_jets(at(space, p)).values()))


def _lagrangian(space, p):
    return _blocks(lagrangians(space, p))


OBJECTS = {
    "frame": _plain(_frame),
    "metric": _plain(_metric),
    "nlc": _plain(_nlc),
    "contortion": _plain(_contortion),
    "basic_vector": _plain(_basic),
    "lagrangian": _plain(_lagrangian),
    "connection": _conn_selector("connection"),
    "torsion": _conn_selector("torsion"),
    "curvature": _conn_selector("curvature"),
    "wtensor": _conn_selector("wtensor"),
}
OBJECT_HELP = ("frame, metric, nlc, contortion, basic_vector, lagrangian, "
               "connection.X, torsion.X, curvature.X, wtensor.X with X in " + ", ".join(CONNECTIONS))


def evaluate_object(space, p: SpacePoint, selector: str) -> dict:
    head, _, tail = selector.partition(".")
    if head not in OBJECTS:
        raise UnknownObject(selector)
    which = tail or None
    if head in ("connection", "torsion", "curvature", "wtensor") and which is None:
        which = "canonical"
    return OBJECTS[head](space, p, which)


# -- output helpers ------------------------------------------------------------------------------

def _json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False, default=_default)


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _format_block(name: str, arr: np.ndarray) -> list[str]:
    arr = np.asarray(arr)
    lines = [f"{name}  shape={arr.shape}  max|.|={np.abs(arr).max() if arr.size else 0.0:.3e}"]
    if arr.ndim == 0:
        lines.append(f"  {float(arr):.12g}")
        return lines
    for idx in np.ndindex(arr.shape):
        if abs(arr[idx]) > 0:
            lines.append(f"  [{','.join(map(str, idx))}] {arr[idx]: .12e}")
    return lines


# -- subcommands ------------------------------------------------------------------------------------

def cmd_list(args) -> int:
    entries = [sp.descriptor() for sp in catalog().values()]
    if args.json:
        _emit(_json(entries), args.out)
    else:
        _emit("\n".join(f"{d['name']:<10} n={d['n']}  {d['classification']:<8} {d['description']}"
                        for d in entries), args.out)
    return EXIT_OK


def _point(space, args) -> SpacePoint:
    p = SpacePoint.parse(args.point) if args.point else space.sample(1, seed=args.seed)[0]
    space.check(p)
    return p


def cmd_eval(args) -> int:
    space = builtin_space(args.space)
    p = _point(space, args)
    blocks = evaluate_object(space, p, args.object)
    if args.json:
        doc = {"schema": SCHEMA, "version": __version__, "space": space.name, "point": str(p),
               "object": args.object, "blocks": {k: np.asarray(v).tolist() for k, v in blocks.items()}}
        _emit(_json(doc), args.out)
    else:
        lines = [f"{args.object} on {space.name} at {p}"]
        for k, v in blocks.items():
            lines += _format_block(k, v)
        _emit("\n".join(lines), args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    space = builtin_space(args.space)
    rep = classify(space, args.samples, args.seed)
    if args.json:
        doc = {"schema": SCHEMA, "version": __version__, "seed": args.seed, **rep.as_dict()}
        _emit(_json(doc), args.out)
    else:
        lines = [f"{space.name}: {rep.label}"] + [f"  {k:<18} {v:.3e}" for k, v in sorted(rep.residuals.items())]
        lines += [f"  note: {n}" for n in rep.notes]
        _emit("\n".join(lines), args.out)
    return EXIT_OK if rep.label != "indeterminate" and rep.consistent else EXIT_FAIL


def _tolerances(args) -> Tolerances:
    base = Tolerances()
    return Tolerances(args.tol_algebraic if args.tol_algebraic is not None else base.algebraic,
                      args.tol_d1 if args.tol_d1 is not None else base.d1,
                      args.tol_d2 if args.tol_d2 is not None else base.d2)


def cmd_verify(cfg: VerifyConfig) -> tuple[dict, int]:
    space = builtin_space(cfg.space)
    reports = run_suite(cfg.suite, space, cfg.samples, cfg.seed, cfg.tol)
    summary = {"pass": 0, "fail": 0, "degenerate": 0}
    for r in reports:
        for k, v in r.counts().items():
            summary[k] += v
    doc = {
        "schema": SCHEMA,
        "version": __version__,
        "space": space.descriptor(),
        "config": {"suite": cfg.suite, "samples": cfg.samples, "seed": cfg.seed,
                   "tolerances": {"algebraic": cfg.tol.algebraic, "d1": cfg.tol.d1, "d2": cfg.tol.d2}},
        "suites": [r.as_dict() for r in reports],
        "summary": summary,
        "passed": summary["fail"] == 0,
    }
    return doc, EXIT_OK if doc["passed"] else EXIT_FAIL


def _verify(args) -> int:
    cfg = VerifyConfig(args.space, args.suite, args.samples, args.seed, _tolerances(args))
    doc, code = cmd_verify(cfg)
    if args.json:
        _emit(_json(doc), args.out)
    else:
        lines = []
        for s in doc["suites"]:
            c = s["summary"]
            lines.append(f"{s['suite']:<10} {s['space']:<9} pass={c['pass']} degenerate={c['degenerate']} "
                         f"fail={c['fail']}")
            for chk in s["checks"]:
                if chk["status"] == "fail":
                    lines.append(f"  FAIL {chk['check']}: {chk['residual']:.3e} > {chk['tolerance']:.1e}"
                                 + (f" ({chk['note']})" if chk.get("note") else ""))
            lines += [f"  note: {n}" for n in s["notes"]]
        lines.append("PASS" if doc["passed"] else "FAIL")
        _emit("\n".join(lines), args.out)
    return code


# -- parser ------------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--out", metavar="FILE", help="write output to FILE instead of stdout")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--samples", type=int, default=50)
    sampling.add_argument("--seed", type=int, default=42)
    sampling.add_argument("--tol-algebraic", type=float)
    sampling.add_argument("--tol-d1", type=float)
    sampling.add_argument("--tol-d2", type=float)

    ap = argparse.ArgumentParser(prog="eaplab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"eaplab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("list", parents=[common], help="list the built-in spaces")

    ev = sub.add_parser("eval", parents=[common], help="evaluate an object at one point")
    ev.add_argument("--space", required=True)
    ev.add_argument("--point", help="'x1,..,xn;y1,..,yn' (default: first seeded sample)")
    ev.add_argument("--object", default="torsion.canonical", help=OBJECT_HELP)
    ev.add_argument("--seed", type=int, default=42)

    cl = sub.add_parser("classify", parents=[common, sampling], help="Cartan / Berwald / CB classification")
    cl.add_argument("--space", required=True)

    ve = sub.add_parser("verify", parents=[common, sampling], help="run verification suites")
    ve.add_argument("--space", required=True)
    ve.add_argument("--suite", choices=SUITE_NAMES, default="all")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    handlers = {"list": cmd_list, "eval": cmd_eval, "classify": cmd_classify, "verify": _verify}
    try:
        return handlers[args.command](args)
    except (UnknownSpace, UnknownObject) as exc:
        print(f"eaplab: unknown name: {exc.args[0]}", file=sys.stderr)
    except (PointOutsideDomain, ValueError) as exc:
        print(f"eaplab: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
