"""Points on TM, space definitions and the built-in catalog.

A space is given by ``2n`` parallelization fields (``n`` horizontal
components ``Lh[i, alpha]`` and ``n`` vertical components ``Lv[i, a]``, with
the field label ``i`` on the first axis) and a nonlinear connection
``N[a, mu]``.  Evaluators take coordinate lists ``x`` and ``y`` whose
entries may be floats or :class:`~eaplab.jets.Jet` scalars, so the same
closed-form expression yields values, exact derivatives and finite
differences.

Catalog (all n = 2 unless noted; ``t = x0 + x1`` etc. written with 0-based
indices):

``flat``
    identity frames, ``N = 0``.
``generic2`` (also ``generic(n)``)
    ``Lh[i, k] = delta + 0.1 sin((i+1) x_k + 0.5 y_{(i+k) mod n} + 0.3 i)``,
    ``Lv[i, k] = delta + 0.1 cos(x_{(i+k) mod n} - 0.7 y_k + 0.5 i)``,
    ``N[a, mu] = 0.1 y_a cos(x_mu) + 0.15 y_{(a+mu) mod n} sin(x_{(mu+1) mod n} + 0.3 a)``;
    the second term keeps ``R^a_{mu nu}`` away from zero.
``cartan2``
    ``Lv`` is the rotation by ``theta = x0 + x1``; ``Lh`` depends on x and y;
    ``N[a, mu] = y_b Lv[i, a] d_mu Cv[i, b]``, which for a rotation is
    ``(y1, -y0)`` in every column.
``berwald2``
    ``Lh`` depends on x only; the vertical coframe is ``Cv = H(y0) B(x)``
    with ``B`` lower triangular, first row ``(1, 0)``, and
    ``H = [[exp(0.2 sin y0), 0.15 sin y0], [0.1 cos y0, 1]]``; ``N = y_b K[a, b, mu] + phi[a, mu]`` where
    ``K = B^-1 d_mu B`` and ``phi`` is nonzero only in the row ``a = 1``.
``cb2``
    the ``berwald2`` frames with ``H = I`` and ``phi = 0``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import jets
from .jets import Jet, PointOutsideDomain


class UnknownSpace(KeyError):
    pass


class SingularFrame(ValueError):
    """A frame block is (numerically) singular; ``block`` names it."""

    def __init__(self, block: str, det: float):
        super().__init__(f"{block} frame is singular (|det| = {det:.3e})")
        self.block = block
        self.det = det


@dataclass(frozen=True)
class SpacePoint:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(-1)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if x.shape != y.shape:
            raise ValueError("x and y must have the same dimension")
        if not np.linalg.norm(y) > 0:
            raise ValueError("y = 0 lies on the zero section")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @classmethod
    def parse(cls, text: str) -> "SpacePoint":
        """Parse ``"x1,..,xn;y1,..,yn"``."""
        try:
            xs, ys = text.split(";")
            return cls([float(t) for t in xs.split(",")], [float(t) for t in ys.split(",")])
        except ValueError as exc:
            raise ValueError(f"cannot parse point {text!r}: expected 'x1,..,xn;y1,..,yn'") from exc

    def scaled(self, t: float) -> "SpacePoint":
        return SpacePoint(self.x, t * self.y)

    def __str__(self) -> str:
        return ",".join(f"{v:.17g}" for v in self.x) + ";" + ",".join(f"{v:.17g}" for v in self.y)


@dataclass(frozen=True)
class FramePair:
    Lh: np.ndarray  # Lh[i, alpha] = lambda_i^alpha
    Lv: np.ndarray  # Lv[i, a] = lambda_i^a


@dataclass(frozen=True)
class CoFramePair:
    Ch: np.ndarray  # Ch[i, alpha] = lambda_i_alpha
    Cv: np.ndarray  # Cv[i, a] = lambda_i_a


@dataclass(frozen=True)
class Domain:
    lo: float = -1.0
    hi: float = 1.0
    r_min: float = 0.5
    r_max: float = 1.5

    def contains(self, x, y) -> bool:
        x, y = np.asarray(x), np.asarray(y)
        r = np.linalg.norm(y)
        return bool(np.all(x >= self.lo) and np.all(x <= self.hi) and self.r_min <= r <= self.r_max)

    def sample(self, n: int, count: int, seed: int = 42) -> list[SpacePoint]:
        """Uniform x in the box, uniform direction and radius for y."""
        rng = np.random.default_rng(seed)
        pts = []
        for _ in range(count):
            x = rng.uniform(self.lo, self.hi, size=n)
            d = rng.normal(size=n)
            d /= np.linalg.norm(d)
            r = rng.uniform(self.r_min, self.r_max)
            pts.append(SpacePoint(x, r * d))
        return pts


Evaluator = Callable[[Sequence, Sequence], object]


@dataclass(frozen=True)
class SpaceDefinition:
    name: str
    n: int
    lambda_eval: Callable  # (x, y) -> (Lh, Lv) nested lists
    nlc_eval: Callable  # (x, y) -> N[a][mu]
    domain: Domain = field(default_factory=Domain)
    claims: str = "generic"
    description: str = ""

    def descriptor(self) -> dict:
        d = self.domain
        return {
            "name": self.name,
            "n": self.n,
            "domain": {"x_box": [d.lo, d.hi], "y_radius": [d.r_min, d.r_max]},
            "classification": self.claims,
            "description": self.description,
        }

    def check(self, p: SpacePoint) -> None:
        if p.n != self.n:
            raise ValueError(f"point has dimension {p.n}, space {self.name!r} has n = {self.n}")
        if not self.domain.contains(p.x, p.y):
            raise PointOutsideDomain(f"{p} lies outside the domain of {self.name!r}")

    def sample(self, count: int, seed: int = 42) -> list[SpacePoint]:
        return self.domain.sample(self.n, count, seed)


# -- evaluation -------------------------------------------------------------

def evaluate_frame(space: SpaceDefinition, p: SpacePoint) -> FramePair:
    space.check(p)
    Lh, Lv = space.lambda_eval(list(p.x), list(p.y))
    return FramePair(np.asarray(jets.stack(Lh), dtype=float), np.asarray(jets.stack(Lv), dtype=float))


def evaluate_nlc(space: SpaceDefinition, p: SpacePoint) -> np.ndarray:
    space.check(p)
    return np.asarray(jets.stack(space.nlc_eval(list(p.x), list(p.y))), dtype=float)


def invert_frame(f: FramePair, threshold: float = 1e-10) -> CoFramePair:
    """Coframes with ``Lh.T @ Ch = I`` and ``Lh @ Ch.T = I`` (likewise vertical)."""
    out = []
    for name, m in (("horizontal", f.Lh), ("vertical", f.Lv)):
        det = float(np.linalg.det(m))
        if abs(det) < threshold:
            raise SingularFrame(name, det)
        out.append(np.linalg.inv(m).T)
    return CoFramePair(*out)


def kronecker_residual(f: FramePair, cf: CoFramePair) -> float:
    """Largest deviation among the four frame/coframe duality relations."""
    n = f.Lh.shape[0]
    eye = np.eye(n)
    return max(
        np.abs(np.einsum("ia,ib->ab", f.Lh, cf.Ch) - eye).max(),
        np.abs(np.einsum("ia,ja->ij", f.Lh, cf.Ch) - eye).max(),
        np.abs(np.einsum("ia,ib->ab", f.Lv, cf.Cv) - eye).max(),
        np.abs(np.einsum("ia,ja->ij", f.Lv, cf.Cv) - eye).max(),
    )


def condition_number(space: SpaceDefinition, points: Sequence[SpacePoint]) -> float:
    worst = 1.0
    for p in points:
        f = evaluate_frame(space, p)
        worst = max(worst, np.linalg.cond(f.Lh), np.linalg.cond(f.Lv))
    return float(worst)


# -- catalog ----------------------------------------------------------------

def _eye(n):
    return [[1.0 if i == k else 0.0 for k in range(n)] for i in range(n)]


def flat(n: int = 2) -> SpaceDefinition:
    def lam(x, y):
        return _eye(n), _eye(n)

    def nlc(x, y):
        return [[0.0] * n for _ in range(n)]

    return SpaceDefinition("flat" if n == 2 else f"flat{n}", n, lam, nlc, claims="cb",
                           description="identity frames and vanishing nonlinear connection")


def generic(n: int = 2, twist: float = 0.15) -> SpaceDefinition:
    """Frames and nonlinear connection depending on both x and y.

    ``N^a_mu = 0.1 y^a cos x^mu + twist * y^(a+mu) sin(x^(mu+1) + 0.3 a)`` (indices mod n).
    The first term alone is integrable (``R^a_{mu nu} = 0``); the twist term makes the
    nonlinear connection curved so that every curvature tail is exercised.
    """
    def lam(x, y):
        Lh = [[(1.0 if i == k else 0.0) + 0.1 * jets.sin((i + 1) * x[k] + 0.5 * y[(i + k) % n] + 0.3 * i)
               for k in range(n)] for i in range(n)]
        Lv = [[(1.0 if i == k else 0.0) + 0.1 * jets.cos(x[(i + k) % n] - 0.7 * y[k] + 0.5 * i)
               for k in range(n)] for i in range(n)]
        return Lh, Lv

    def nlc(x, y):
        N = [[0.1 * y[a] * jets.cos(x[mu]) for mu in range(n)] for a in range(n)]
        if twist:
            N = [[N[a][mu] + twist * y[(a + mu) % n] * jets.sin(x[(mu + 1) % n] + 0.3 * a)
                  for mu in range(n)] for a in range(n)]
        return N

    desc = "frames and nonlinear connection depending on both x and y"
    if not twist:
        desc += "; integrable nonlinear connection"
    return SpaceDefinition(f"generic{n}", n, lam, nlc, claims="generic", description=desc)


def cartan2() -> SpaceDefinition:
    def lam(x, y):
        th = x[0] + x[1]
        c, s = jets.cos(th), jets.sin(th)
        Lh = [[1.0 + 0.1 * jets.sin(x[0] + y[0]), 0.1 * jets.cos(x[1] - y[1])],
              [0.1 * jets.sin(x[1] + y[0] * y[1]), 1.0 + 0.1 * jets.cos(x[0] - 0.5 * y[1])]]
        Lv = [[c, s], [-s, c]]
        return Lh, Lv

    def nlc(x, y):
        # y^b Lv[i, a] d_mu Cv[i, b] with Cv = Lv (orthogonal) and d theta = (1, 1)
        return [[y[1], y[1]], [-y[0], -y[0]]]

    return SpaceDefinition("cartan2", 2, lam, nlc, claims="cartan",
                           description="vertical frame a rotation by x0 + x1, horizontal frame y-dependent, "
                                       "nonlinear connection induced by the vertical frame")


def _b_parts(x):
    beta = 0.2 * jets.sin(x[0] + 0.5 * x[1])
    sigma = 0.1 * jets.cos(x[0] - x[1])
    dbeta = [0.2 * jets.cos(x[0] + 0.5 * x[1]), 0.1 * jets.cos(x[0] + 0.5 * x[1])]
    dsigma = [-0.1 * jets.sin(x[0] - x[1]), 0.1 * jets.sin(x[0] - x[1])]
    return beta, sigma, dbeta, dsigma


def _xonly_horizontal(x):
    return [[1.0 + 0.1 * jets.sin(x[0]), 0.05 * jets.cos(x[0] + x[1])],
            [0.1 * jets.sin(x[1] - 0.5 * x[0]), 1.0 + 0.1 * jets.cos(x[1])]]


def _phi(x):
    return [[0.0, 0.0], [0.05 * (1.0 + 0.5 * jets.sin(x[0] * x[1])), 0.05 * jets.cos(x[0]) + 0.02 * x[0]]]


def _vertical_twist(y0):
    """``H(y0)``: the y-dependent left factor of the ``berwald2`` vertical coframe."""
    return [[jets.exp(0.2 * jets.sin(y0)), 0.15 * jets.sin(y0)], [0.1 * jets.cos(y0), 1.0]]


def _triangular_space(name: str, dependent: bool, claims: str, description: str) -> SpaceDefinition:
    def lam(x, y):
        beta, sigma, _, _ = _b_parts(x)
        es = jets.exp(-sigma)
        bit = [[1.0, -beta * es], [0.0, es]]  # B^{-T} for B = [[1, 0], [beta, e^sigma]]
        if not dependent:
            return _xonly_horizontal(x), bit
        # Cv = H(y0) B(x), so Lv = H^{-T} B^{-T}
        (p, q), (r, s) = _vertical_twist(y[0])
        det = p * s - q * r
        hit = [[s / det, -r / det], [-q / det, p / det]]
        Lv = [[hit[i][0] * bit[0][k] + hit[i][1] * bit[1][k] for k in range(2)] for i in range(2)]
        return _xonly_horizontal(x), Lv

    def nlc(x, y):
        beta, sigma, dbeta, dsigma = _b_parts(x)
        es = jets.exp(-sigma)
        # K[a][b][mu] = (B^-1 d_mu B)[a, b]; the first row vanishes
        N = [[0.0, 0.0], [y[0] * es * dbeta[mu] + y[1] * dsigma[mu] for mu in range(2)]]
        if dependent:
            phi = _phi(x)
            N = [[N[a][mu] + phi[a][mu] for mu in range(2)] for a in range(2)]
        return N

    return SpaceDefinition(name, 2, lam, nlc, claims=claims, description=description)


def berwald2() -> SpaceDefinition:
    return _triangular_space(
        "berwald2", True, "berwald",
        "horizontal frame x-only; vertical coframe H(y0) B(x); "
        "nonlinear connection y^b Gamma^a_b_mu(x) plus a nonzero offset phi")


def cb2() -> SpaceDefinition:
    return _triangular_space(
        "cb2", False, "cb",
        "both frames x-only; nonlinear connection y^b Gamma^a_b_mu(x)")


def berwald_offset(x) -> np.ndarray:
    """The offset ``phi[a, mu]`` built into ``berwald2``."""
    return np.asarray(jets.stack(_phi(list(x))), dtype=float)


_BUILDERS = {
    "flat": flat,
    "generic2": generic,
    "cartan2": cartan2,
    "berwald2": berwald2,
    "cb2": cb2,
}

CATALOG_NAMES = tuple(_BUILDERS)


def builtin_space(name: str) -> SpaceDefinition:
    if name in _BUILDERS:
        return _BUILDERS[name]()
    for prefix, builder in (("flat", flat), ("generic", generic)):
        rest = name[len(prefix):]
        if name.startswith(prefix) and rest.isdigit() and int(rest) >= 1:
            return builder(int(rest))
    raise UnknownSpace(name)


def catalog() -> dict[str, SpaceDefinition]:
    return {name: builtin_space(name) for name in CATALOG_NAMES}


def descriptors_json() -> str:
    return json.dumps([builtin_space(n).descriptor() for n in CATALOG_NAMES], indent=2)


# -- jets of the defining fields ----------------------------------------------

def field_jets(space: SpaceDefinition, p: SpacePoint) -> tuple[Jet, Jet, Jet]:
    """Order-2 jets of ``Lh``, ``Lv`` and ``N`` at ``p``."""
    space.check(p)
    n = space.n
    z = Jet.variables(np.concatenate([p.x, p.y]))
    xs = [z[k] for k in range(n)]
    ys = [z[n + k] for k in range(n)]
    Lh, Lv = space.lambda_eval(xs, ys)
    N = space.nlc_eval(xs, ys)
    out = []
    for arr in (Lh, Lv, N):
        s = jets.stack(arr)
        out.append(s if isinstance(s, Jet) else Jet.constant(s, 2 * n))
    return tuple(out)
