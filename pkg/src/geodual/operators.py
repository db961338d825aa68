"""First-order differential operators on functions of U_mu with affine coefficients.

An operator acts on psi(U) as

    A psi = (a0 + a . U) psi + (v0 + M U)_g d psi / d U_g

The set is closed under commutators, which is all that is needed to
assemble the gauge-generator algebra at one spacetime point without
ever materializing a Hilbert space. Coefficients are complex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import DIM


@dataclass(frozen=True)
class AffineOp:
    a0: complex
    a: np.ndarray  # (4,)
    v0: np.ndarray  # (4,)
    M: np.ndarray  # (4, 4)

    @classmethod
    def zero(cls):
        return cls(0j, np.zeros(DIM, complex), np.zeros(DIM, complex), np.zeros((DIM, DIM), complex))

    @classmethod
    def scalar(cls, c):
        z = cls.zero()
        return cls(complex(c), z.a, z.v0, z.M)

    @classmethod
    def mult(cls, a, a0=0.0):
        """Multiplication by the affine function a0 + a.U."""
        z = cls.zero()
        return cls(complex(a0), np.asarray(a, dtype=complex), z.v0, z.M)

    @classmethod
    def coord(cls, mu):
        """Multiplication by U_mu."""
        e = np.zeros(DIM, complex)
        e[mu] = 1.0
        return cls.mult(e)

    def __add__(self, o: "AffineOp"):
        return AffineOp(self.a0 + o.a0, self.a + o.a, self.v0 + o.v0, self.M + o.M)

    def __sub__(self, o: "AffineOp"):
        return self + (-1.0) * o

    def __rmul__(self, c):
        return AffineOp(c * self.a0, c * self.a, c * self.v0, c * self.M)

    @property
    def is_multiplication(self):
        return not (np.any(self.v0) or np.any(self.M))

    def mult_value(self, u):
        """Value of the multiplicative part at U."""
        return self.a0 + self.a @ np.asarray(u, dtype=complex)

    def vector_value(self, u):
        """Derivative-part coefficients V_g(U)."""
        return self.v0 + self.M @ np.asarray(u, dtype=complex)


def commutator(A: AffineOp, B: AffineOp) -> AffineOp:
    """[a + V.d, b + W.d] = (V.db - W.da) + (V.dW - W.dV).d"""
    a0 = B.a @ A.v0 - A.a @ B.v0
    a = B.a @ A.M - A.a @ B.M
    v0 = B.M @ A.v0 - A.M @ B.v0
    M = B.M @ A.M - A.M @ B.M
    return AffineOp(a0, a, v0, M)


def rotation_generator(inv, lam, gam) -> AffineOp:
    """N^{lg} = -i (U^l d/dU_g - U^g d/dU_l), with U^l = g^{la} U_a."""
    M = np.zeros((DIM, DIM), complex)
    M[gam, :] += -1j * inv[lam, :]
    M[lam, :] -= -1j * inv[gam, :]
    z = AffineOp.zero()
    return AffineOp(0j, z.a, z.v0, M)


def contract_generators(inv, coeff) -> AffineOp:
    """sum_{lg} coeff_{lg} N^{lg} for a c-number coefficient matrix."""
    out = AffineOp.zero()
    for lam in range(DIM):
        for gam in range(DIM):
            c = coeff[lam, gam]
            if c != 0.0:
                out = out + c * rotation_generator(inv, lam, gam)
    return out
