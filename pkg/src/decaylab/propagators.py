"""Exact-in-time Fourier multiplier propagators on periodic grids.

Sign conventions (with the transform u^(xi) = int u(x) exp(-i xi x) dx):

* free Schrodinger, d_t u + i Lap u = 0     -> multiplier exp(+i t |xi|^2)
* Airy,            d_t u - d_xxx u = 0      -> multiplier exp(-i t xi^3)
* even order 2k,   i d_t u + d^{2k} u = 0   -> multiplier exp(i (-1)^k t xi^2k)

All multipliers have unit modulus, so mass and every Fourier-side norm are
conserved exactly; the only numerical error sources are spatial truncation
and wrap-around, which the guard below monitors. The commutation tests in
the operators module pin these conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import GridSpec, SampledField, l2_norm

__all__ = [
    "DispersionPolynomial",
    "schrodinger",
    "airy",
    "even_order",
    "propagate",
    "group_property_check",
    "edge_mass_fraction",
    "plan_grid",
]


@dataclass(frozen=True)
class DispersionPolynomial:
    """Constant-coefficient evolution fixed by a named normalization."""

    normalization: str  # "schrodinger" | "airy" | "even_order"
    degree: int

    def __post_init__(self):
        if self.normalization == "schrodinger" and self.degree != 2:
            raise ValueError("the Schrodinger normalization has degree 2")
        if self.normalization == "airy" and self.degree != 3:
            raise ValueError("the Airy normalization has degree 3")
        if self.normalization == "even_order" and (self.degree < 2 or self.degree % 2):
            raise ValueError("the even-order family needs degree 2k >= 2")
        if self.degree < 2:
            raise ValueError("dispersion degree must be >= 2")

    @property
    def monomial_coefficient(self) -> complex:
        """s such that the 1-d evolution symbol is sigma(xi) = s * xi^degree."""
        if self.normalization == "schrodinger":
            return 1j
        if self.normalization == "airy":
            return -1j
        k = self.degree // 2
        return 1j * (-1.0) ** k

    def symbol_1d(self, xi: np.ndarray) -> np.ndarray:
        return self.monomial_coefficient * xi**self.degree

    def group_speed(self, xi) -> np.ndarray:
        """|d Im sigma / d xi| = degree * |xi|^(degree-1)."""
        return self.degree * np.abs(xi) ** (self.degree - 1)


def schrodinger() -> DispersionPolynomial:
    return DispersionPolynomial("schrodinger", 2)


def airy() -> DispersionPolynomial:
    return DispersionPolynomial("airy", 3)


def even_order(k: int) -> DispersionPolynomial:
    return DispersionPolynomial("even_order", 2 * int(k))


def _evolution_multiplier(disp: DispersionPolynomial, grid: GridSpec, t: float) -> np.ndarray:
    if grid.dim == 1:
        xi = grid.wavenumbers(0)
        return np.exp(t * disp.symbol_1d(xi))
    if disp.normalization != "schrodinger":
        raise ValueError(f"{disp.normalization} propagation is one-dimensional only")
    k1 = grid.wavenumbers(0)[:, None]
    k2 = grid.wavenumbers(1)[None, :]
    return np.exp(1j * t * (k1**2 + k2**2))


def propagate(u0: SampledField, disp: DispersionPolynomial, t: float) -> SampledField:
    """Evolve u0 by time t through the unit-modulus multiplier."""
    mult = _evolution_multiplier(disp, u0.grid, t)
    out = np.fft.ifftn(np.fft.fftn(u0.as_complex()) * mult)
    if disp.normalization == "airy" and u0.kind == "real":
        # sigma(-xi) = conj(sigma(xi)), so real data stay real
        return SampledField(u0.grid, out.real, "real")
    return SampledField(u0.grid, out, "complex")


def group_property_check(u0: SampledField, disp: DispersionPolynomial, s: float, t: float) -> float:
    """|| U(s+t) u0 - U(t) U(s) u0 ||_2 / || u0 ||_2."""
    direct = propagate(u0, disp, s + t)
    stepped = propagate(propagate(u0, disp, s), disp, t)
    diff = direct.as_complex() - stepped.as_complex()
    denom = l2_norm(u0)
    if denom == 0.0:
        return 0.0
    num = math.sqrt(float(np.sum(np.abs(diff) ** 2)) * u0.grid.cell_volume)
    return num / denom


def edge_mass_fraction(field: SampledField, band: float = 0.05) -> float:
    """Fraction of L2 mass within ``band`` of the periodic box boundary.

    An experiment flags a propagated sample as wrap-around contaminated when
    this exceeds 1e-6 and excludes it from fits.
    """
    w = np.abs(field.values) ** 2
    total = float(w.sum())
    if total == 0.0:
        return 0.0
    mask = np.zeros(field.values.shape, dtype=bool)
    for ax in range(field.grid.dim):
        n = field.grid.points[ax]
        edge = max(1, int(round(0.5 * band * n)))
        idx = [slice(None)] * field.grid.dim
        idx[ax] = slice(0, edge)
        mask[tuple(idx)] = True
        idx[ax] = slice(n - edge, n)
        mask[tuple(idx)] = True
    return float(w[mask].sum()) / total


def plan_grid(
    datum,
    disp: DispersionPolynomial,
    t_max: float,
    points: int = None,
    band_tol: float = 1e-12,
    safety: float = 1.15,
) -> GridSpec:
    """Domain sizing rule: half-width >= support + t_max * max band group speed.

    The effective band is the wavenumber radius holding all but ``band_tol``
    of the datum's spectral mass (closed form for Gaussian data). Points
    default to the next power of two with Nyquist above the band.
    """
    lo, hi = datum.support_bounds(band_tol)
    supp = float(max(abs(lo).max(), abs(hi).max()))
    band = datum.bandwidth(band_tol)
    half = safety * (supp + t_max * float(disp.group_speed(band)))
    if points is None:
        spacing_needed = math.pi / (1.25 * band)
        points = 1 << max(3, math.ceil(math.log2(2.0 * half / spacing_needed)))
    return GridSpec.centered(half, points, dim=datum.ndim)
