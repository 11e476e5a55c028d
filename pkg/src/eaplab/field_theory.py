"""Scalar Lagrangian densities built from the canonical torsion.

``H_{ab} = Lam^n_{e a} Lam^e_{n b} - C_a C_b`` and
``V_{ab} = T^d_{e a} T^e_{d b} - C_a C_b`` are contracted with the inverse
metrics and weighted by the determinants of the lowered coframes, with the
field label as the row index.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import at
from .connections import basic_vector, torsion_jets
from .metric import hv_metric
from .spaces import SpaceDefinition, SpacePoint


@dataclass(frozen=True)
class LagrangianValues:
    H_ab: np.ndarray
    H_scalar: float
    H_density: float
    V_ab: np.ndarray
    V_scalar: float
    V_density: float
    det_h: float  # det(lambda_i_alpha)
    det_v: float  # det(lambda_i_a)

    def as_dict(self) -> dict:
        return {"H_ab": self.H_ab.tolist(), "H_scalar": self.H_scalar, "H_density": self.H_density,
                "V_ab": self.V_ab.tolist(), "V_scalar": self.V_scalar, "V_density": self.V_density,
                "det_h": self.det_h, "det_v": self.det_v}


def lagrangians(space: SpaceDefinition, p: SpacePoint) -> LagrangianValues:
    pd = at(space, p)
    T = torsion_jets(pd).values()
    C = basic_vector(T)
    m = hv_metric(pd)
    H = np.einsum("nea,enb->ab", T.Lam, T.Lam) - np.outer(C.C_h, C.C_h)
    V = np.einsum("dea,edb->ab", T.Tv, T.Tv) - np.outer(C.C_v, C.C_v)
    hs = float(np.einsum("ab,ab->", m.g_h_inv, H))
    vs = float(np.einsum("ab,ab->", m.g_v_inv, V))
    dh = float(np.linalg.det(pd.Ch.val))
    dv = float(np.linalg.det(pd.Cv.val))
    return LagrangianValues(H, hs, dh * hs, V, vs, dv * vs, dh, dv)
