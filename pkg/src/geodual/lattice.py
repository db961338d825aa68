"""Matter wave on a uniform 4D lattice, its current and the field-equation residual.

Sites are integer 4-tuples; the coordinate of site i is origin + h * i.
All derivatives are second-order central differences.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import BoundarySite, ConfigError
from .gauge import GaugeContext, as_real, field_strength_from, o_tensor_from
from .tensor import DIM

O_COUPLINGS = ("eps", "unit")


@dataclass(frozen=True)
class WaveSample:
    psi: np.ndarray  # complex, shape (n, n, n, n)
    h: float
    M: float = 1.0
    origin: np.ndarray = None

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("grid spacing must be positive")
        psi = np.array(self.psi, dtype=complex)
        if psi.ndim != DIM:
            raise ValueError("psi must be a 4D array")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)
        origin = np.zeros(DIM) if self.origin is None else np.asarray(self.origin, dtype=float)
        object.__setattr__(self, "origin", origin)

    @property
    def shape(self):
        return self.psi.shape

    def coords(self, site):
        return self.origin + self.h * np.asarray(site, dtype=float)

    def check_interior(self, site, margin=1):
        site = tuple(int(i) for i in site)
        for i, n in zip(site, self.shape):
            if i < margin or i > n - 1 - margin:
                raise BoundarySite(f"site {site} needs a {margin}-site margin on a {self.shape} grid")
        return site

    def center_site(self):
        return tuple(n // 2 for n in self.shape)

    # ---- profiles

    @classmethod
    def from_function(cls, fn, n, h, M=1.0, origin=None):
        origin = np.zeros(DIM) if origin is None else np.asarray(origin, dtype=float)
        axes = [origin[a] + h * np.arange(n) for a in range(DIM)]
        X = np.meshgrid(*axes, indexing="ij")
        return cls(fn(np.stack(X, axis=-1)), h, M, origin)

    @classmethod
    def plane_wave(cls, n, h, q, amp=1.0, M=1.0, origin=None):
        """psi = amp exp(i q_mu x^mu)."""
        q = np.asarray(q, dtype=float)
        return cls.from_function(lambda X: amp * np.exp(1j * (X @ q)), n, h, M, origin)

    @classmethod
    def gaussian(cls, n, h, center, width, q=(0.0, 0.0, 0.0, 0.0), amp=1.0, M=1.0, origin=None):
        """Gaussian packet amp exp(-|x - c|^2 / 2 w^2 + i q.x); real when q = 0."""
        c = np.asarray(center, dtype=float)
        q = np.asarray(q, dtype=float)

        def fn(X):
            d = X - c
            env = amp * np.exp(-np.sum(d * d, axis=-1) / (2.0 * width**2))
            return env if not np.any(q) else env * np.exp(1j * (X @ q))

        return cls.from_function(fn, n, h, M, origin)

    # ---- CSV: one row per site, flat C-order index

    def to_csv(self, path):
        flat = self.psi.ravel()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["site", "re", "im"])
            for i, z in enumerate(flat):
                w.writerow([i, repr(float(z.real)), repr(float(z.imag))])

    @classmethod
    def from_csv(cls, path, n, h, M=1.0, origin=None):
        size = n**DIM
        psi = np.zeros(size, dtype=complex)
        seen = np.zeros(size, dtype=bool)
        with open(path, newline="") as fh:
            rows = csv.reader(fh)
            header = next(rows, None)
            if header != ["site", "re", "im"]:
                raise ConfigError("grid.psi_csv", f"expected header site,re,im, got {header}")
            for line, row in enumerate(rows, start=2):
                try:
                    i, re, im = int(row[0]), float(row[1]), float(row[2])
                except (ValueError, IndexError) as exc:
                    raise ConfigError("grid.psi_csv", f"line {line}: {exc}") from None
                if not 0 <= i < size:
                    raise ConfigError("grid.psi_csv", f"line {line}: site {i} outside grid of {size}")
                psi[i] = complex(re, im)
                seen[i] = True
        if not seen.all():
            raise ConfigError("grid.psi_csv", f"{int((~seen).sum())} sites missing")
        return cls(psi.reshape((n,) * DIM), h, M, origin)


def _shift(site, axis, d):
    s = list(site)
    s[axis] += d
    return tuple(s)


def central_gradient(values_at, site, h):
    """d/dx^mu by central differences; ``values_at`` maps a site tuple to an array."""
    return np.array([(np.asarray(values_at(_shift(site, a, 1))) - np.asarray(values_at(_shift(site, a, -1)))) / (2.0 * h)
                     for a in range(DIM)])


# ------------------------------------------------------------------ current


def matter_current(w: WaveSample, ctx: GaugeContext, site):
    """j_mu = -(i eps / 2M) { psi* (d - i eps U) psi - ((d + i eps U) psi*) psi }.

    U comes from ctx at the site coordinate (U = 0 if ctx.u is None).
    """
    site = w.check_interior(site, 1)
    eps = ctx.gen.eps
    psi = w.psi[site]
    dpsi = central_gradient(lambda s: w.psi[s], site, w.h)
    x = w.coords(site)
    u = ctx.u.u_co(x) if ctx.u is not None else np.zeros(DIM)
    cpsi = np.conj(psi)
    cdpsi = np.conj(dpsi)
    bracket = cpsi * (dpsi - 1j * eps * u * psi) - (cdpsi + 1j * eps * u * cpsi) * psi
    return as_real(-1j * eps / (2.0 * w.M) * bracket, "current")


# ------------------------------------------------------------ field equation


@dataclass(frozen=True)
class FieldEquationTerms:
    divergence: np.ndarray
    current: np.ndarray
    o_term: np.ndarray

    @property
    def residual(self):
        return self.divergence - self.current + self.o_term


class _LatticeFields:
    """Per-site cache of U and f for one residual evaluation."""

    def __init__(self, ctx: GaugeContext, w: WaveSample):
        self.ctx = ctx
        self.w = w
        self._u = {}
        self._f = {}

    def u(self, site):
        if site not in self._u:
            self._u[site] = self.ctx.u.u_co(self.w.coords(site))
        return self._u[site]

    def f(self, site):
        if site not in self._f:
            jac = central_gradient(self.u, site, self.w.h)
            lg = self.ctx.local(self.w.coords(site), self.u(site))
            self._f[site] = field_strength_from(lg, jac).f
        return self._f[site]


def field_equation_terms(ctx: GaugeContext, w: WaveSample, site, o_coupling="eps") -> FieldEquationTerms:
    """Pieces of d^nu f_{mu nu} - j_mu + 2i c f_{ls} O^{ls}_mu.

    c = eps by default; o_coupling="unit" uses c = 1 instead. With O = 2i Ocoef
    the last term is -4 c f_{ls} Ocoef^{ls}_mu.
    """
    if o_coupling not in O_COUPLINGS:
        raise ValueError(f"o_coupling must be one of {O_COUPLINGS}")
    site = w.check_interior(site, 2)
    fields = _LatticeFields(ctx, w)
    x = w.coords(site)
    m = ctx.metric.eval(x)
    dF = central_gradient(fields.f, site, w.h)  # [b, mu, nu]
    div = np.einsum("nb,bmn->m", m.inv, dF)
    j = matter_current(w, ctx, site)
    lg = ctx.local(x, fields.u(site))
    O = o_tensor_from(lg)  # [g, a, b]
    O_up = np.einsum("la,sb,mg,gab->lsm", m.inv, m.inv, m.g, O)
    c = lg.eps if o_coupling == "eps" else 1.0
    o_term = -4.0 * c * np.einsum("ls,lsm->m", fields.f(site), O_up)
    return FieldEquationTerms(div, j, o_term)


def field_equation_residual(ctx: GaugeContext, w: WaveSample, site, o_coupling="eps"):
    return field_equation_terms(ctx, w, site, o_coupling).residual
