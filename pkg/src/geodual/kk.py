"""Kaluza-Klein lift of the vector-scalar Hamiltonian.

The 5x5 inverse metric has the conformal 4-block, U^mu in the mixed slots
and a constant g^55. Contracting with (p_mu, p_5) reproduces the
Bekenstein-Sanders Hamiltonian once p_5 solves

    g55 p5^2 + 2 (p.U) p5 + 2 sinh(2 phi) (p.U)^2 = 0.

The factor 1/2m multiplies both Hamiltonians.

On the plus branch p5 ~ 2(p.U)/g55, and the contraction cancels two terms of
that size, so a one-ulp error in p5 costs ~eps (p.U)^2/|g55|. p5 and the
contraction are therefore carried in np.longdouble (80-bit on x86-64 Linux;
plain double elsewhere).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ComplexRoot, DivergentBranch, NormViolation
from .tensor import Metric4

BRANCHES = ("minus", "plus")
LD = np.longdouble


def _check_norm(g: Metric4, u_contra):
    u_co = g.g @ u_contra
    n = float(u_co @ u_contra)
    if abs(n + 1.0) > 1e-8:
        raise NormViolation(f"U.U = {n:.12g}, expected -1")


def bs_metric(g: Metric4, u_contra, phi_conf) -> Metric4:
    """gtilde^{mn} = e^{-2phi}(g^{mn} + U^m U^n) - e^{2phi} U^m U^n."""
    u = np.asarray(u_contra, dtype=float)
    _check_norm(g, u)
    uu = np.outer(u, u)
    inv = np.exp(-2.0 * phi_conf) * (g.inv + uu) - np.exp(2.0 * phi_conf) * uu
    inv = 0.5 * (inv + inv.T)
    return Metric4(g=np.linalg.inv(inv), inv=inv)


def kk_hamiltonian_direct(g: Metric4, u_contra, phi_conf, p, m=1.0):
    """(1/2m) [e^{-2phi} g^{mn} p_m p_n - 2 sinh(2phi) (U^m p_m)^2]."""
    u = np.asarray(u_contra, dtype=float)
    _check_norm(g, u)
    p = np.asarray(p, dtype=LD)
    up = np.asarray(u, dtype=LD) @ p
    two_phi = LD(2) * LD(phi_conf)
    val = np.exp(-two_phi) * (p @ np.asarray(g.inv, dtype=LD) @ p) - LD(2) * np.sinh(two_phi) * up * up
    return float(val / LD(2 * m))


def discriminant(phi_conf, g55):
    return 1.0 - 2.0 * g55 * np.sinh(2.0 * phi_conf)


def solve_p5(u_contra, p, phi_conf, g55, branch="minus"):
    """Fifth momentum that makes the 5D contraction match the 4D Hamiltonian.

    minus: -(p.U)/g55 (1 - sqrt(D)), evaluated as -(p.U) 2 sinh(2phi) / (1 + sqrt(D))
           so it stays accurate as g55 -> 0 and equals -(p.U) sinh(2phi) there.
    plus:  -(p.U)/g55 (1 + sqrt(D)); diverges at g55 = 0.
    """
    if branch not in BRANCHES:
        raise ValueError(f"branch must be one of {BRANCHES}")
    sh = np.sinh(LD(2) * LD(phi_conf))
    D = LD(1) - LD(2) * LD(g55) * sh
    if D < 0:
        raise ComplexRoot(f"1 - 2 g55 sinh(2 phi) = {float(D):.6g} < 0")
    up = np.asarray(u_contra, dtype=LD) @ np.asarray(p, dtype=LD)
    r = np.sqrt(D)
    if branch == "minus":
        return -up * LD(2) * sh / (LD(1) + r)
    if g55 == 0.0:
        raise DivergentBranch("plus branch of p5 diverges at g55 = 0")
    return -up / LD(g55) * (LD(1) + r)


@dataclass(frozen=True)
class FiveMetric:
    hat_g: Metric4
    u_contra: np.ndarray
    g55: float

    def matrix(self):
        """Full symmetric 5x5 inverse metric g^{AB}."""
        out = np.zeros((5, 5))
        out[:4, :4] = self.hat_g.inv
        out[:4, 4] = self.u_contra
        out[4, :4] = self.u_contra
        out[4, 4] = self.g55
        return out


@dataclass(frozen=True)
class FiveMomentum:
    p: np.ndarray
    p5: float


def five_metric(g: Metric4, u_contra, phi_conf, g55) -> FiveMetric:
    """Block metric with hat block e^{-2phi} g^{mn}, held in long double."""
    s = np.exp(LD(-2) * LD(phi_conf))
    return FiveMetric(Metric4(g=np.asarray(g.g, dtype=LD) / s, inv=s * np.asarray(g.inv, dtype=LD)),
                      np.asarray(u_contra, dtype=float), float(g55))


def kk_contract(fm: FiveMetric, pm: FiveMomentum, m=1.0):
    """(1/2m) [ghat^{mn} p_m p_n + 2 p5 (p.U) + p5^2 g55]."""
    p = np.asarray(pm.p, dtype=LD)
    up = np.asarray(fm.u_contra, dtype=LD) @ p
    p5 = LD(pm.p5)
    quad = p @ np.asarray(fm.hat_g.inv, dtype=LD) @ p
    return float((quad + p5 * (LD(2) * up + p5 * LD(fm.g55))) / LD(2 * m))


def p5_root_residual(u_contra, p, phi_conf, g55, p5):
    """g55 p5^2 + 2(p.U) p5 + 2 sinh(2phi) (p.U)^2, relative to (p.U)^2."""
    up = np.asarray(u_contra, dtype=LD) @ np.asarray(p, dtype=LD)
    p5 = LD(p5)
    res = LD(g55) * p5 * p5 + LD(2) * up * p5 + LD(2) * np.sinh(LD(2) * LD(phi_conf)) * up * up
    scale = max(up * up, abs(LD(g55)) * p5 * p5, LD(1e-300))
    return float(res / scale)
