"""Residual records and suite reports shared by the verification suites.

A :class:`Check` is one named residual compared against a tolerance.  A
check is *degenerate* when the identity it tests holds only because both
sides vanish; degenerate checks count as passing but are reported
separately.  Reports over several sample points merge by taking the worst
residual, so the order in which points are visited does not matter.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

PASS, FAIL, DEGENERATE = "pass", "fail", "degenerate"

# tolerance tiers: purely algebraic, one derivative of the frames, two derivatives
TOL_ALGEBRAIC = 1e-12
TOL_D1 = 1e-10
TOL_D2 = 1e-8
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class Tolerances:
    algebraic: float = TOL_ALGEBRAIC
    d1: float = TOL_D1
    d2: float = TOL_D2

    def __post_init__(self):
        for k in ("algebraic", "d1", "d2"):
            if not getattr(self, k) > 0:
                raise ValueError(f"tolerance {k} must be positive")

    def tier(self, name: str) -> float:
        return {"algebraic": self.algebraic, "d1": self.d1, "d2": self.d2}[name]


@dataclass
class Check:
    name: str
    anchor: str
    residual: float
    tol: float
    degenerate: bool = False
    note: str = ""

    @property
    def status(self) -> str:
        if not self.residual <= self.tol:  # NaN fails
            return FAIL
        return DEGENERATE if self.degenerate else PASS

    def merge(self, other: "Check") -> "Check":
        return Check(self.name, self.anchor, max(self.residual, other.residual), self.tol,
                     self.degenerate and other.degenerate, self.note or other.note)

    def as_dict(self) -> dict:
        d = {"check": self.name, "anchor": self.anchor, "residual": self.residual,
             "tolerance": self.tol, "status": self.status}
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class SuiteReport:
    suite: str
    space: str
    samples: int = 0
    checks: dict = field(default_factory=dict)  # name -> Check
    notes: list = field(default_factory=list)

    def add(self, check: Check) -> None:
        old = self.checks.get(check.name)
        self.checks[check.name] = check if old is None else old.merge(check)

    def extend(self, checks: Iterable[Check]) -> None:
        for c in checks:
            self.add(c)

    def merge(self, other: "SuiteReport") -> "SuiteReport":
        out = SuiteReport(self.suite, self.space, self.samples + other.samples,
                          dict(self.checks), self.notes + [n for n in other.notes if n not in self.notes])
        out.extend(other.checks.values())
        return out

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks.values())

    @property
    def degenerate(self) -> bool:
        return bool(self.checks) and all(c.status == DEGENERATE for c in self.checks.values())

    def failures(self) -> list[Check]:
        return [c for c in self.checks.values() if c.status == FAIL]

    def max_residual(self, prefix: str = "") -> float:
        vals = [c.residual for k, c in self.checks.items() if k.startswith(prefix)]
        return max(vals) if vals else 0.0

    def counts(self) -> dict[str, int]:
        out = {PASS: 0, FAIL: 0, DEGENERATE: 0}
        for c in self.checks.values():
            out[c.status] += 1
        return out

    def as_dict(self) -> dict:
        return {"suite": self.suite, "space": self.space, "samples": self.samples,
                "checks": [self.checks[k].as_dict() for k in sorted(self.checks)],
                "summary": self.counts(), "notes": list(self.notes)}


def maxabs(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.abs(a).max()) if a.size else 0.0


def compare(name: str, anchor: str, lhs, rhs, tol: float, zero_tol: float = ZERO_TOL,
            note: str = "") -> Check:
    """``max|lhs - rhs|``, flagged degenerate when both sides vanish."""
    lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
    deg = maxabs(lhs) < zero_tol and maxabs(rhs) < zero_tol
    return Check(name, anchor, maxabs(lhs - rhs), tol, deg, note)


def vanishes(name: str, anchor: str, value, tol: float, note: str = "") -> Check:
    return Check(name, anchor, maxabs(value), tol, False, note)


def resolve_samples(space, samples, seed: int = 42) -> list:
    """A sample count is expanded to seeded points; a sequence is used as given."""
    if isinstance(samples, (int, np.integer)):
        if samples < 1:
            raise ValueError("sample count must be at least 1")
        return space.sample(int(samples), seed=seed)
    pts = list(samples)
    if not pts:
        raise ValueError("no sample points given")
    return pts


def mask_checks(name: str, anchor: str, observed: dict, expected: Sequence[str],
                nonzero_tol: float = 1e-6, zero_tol: float = 1e-9) -> list[Check]:
    """Compare a zero/nonzero mask with the expected set of nonzero keys.

    ``observed`` maps keys to the max-abs over all samples.  Two checks come
    back: ``<name>.zeros`` counts expected-zero keys that are not below
    ``zero_tol``; ``<name>.nonzeros`` counts expected-nonzero keys that are not
    above ``nonzero_tol``.  Both pass only at residual 0.  When every observed
    block vanishes the second check is flagged degenerate and not counted.
    """
    zeros = sorted(k for k, v in observed.items() if k not in expected and not v < zero_tol)
    missing = sorted(k for k, v in observed.items() if k in expected and not v > nonzero_tol)
    all_zero = all(v < zero_tol for v in observed.values())
    found = sum(1 for k in expected if observed.get(k, 0.0) > nonzero_tol)
    z = Check(f"{name}.zeros", anchor, float(len(zeros)), 0.0, False,
              "unexpected nonzero: " + ", ".join(zeros) if zeros else "")
    nz = Check(f"{name}.nonzeros", anchor, 0.0 if all_zero else float(len(missing)), 0.0, all_zero,
               f"{found} of {len(expected)} expected blocks nonzero"
               + ("; vanishing: " + ", ".join(missing) if missing else ""))
    return [z, nz]
