"""Hermite-Gauss transverse mode algebra.

Normalized waist-plane mode functions, cavity Gouy phases and resonance
combs, and two-/three-mode overlap integrals evaluated by tensor-product
Gauss-Hermite quadrature.  All overlaps are taken at a common waist plane
(thin-crystal approximation): integrands are polynomials times Gaussians,
so the quadrature is exact once the order exceeds half the polynomial
degree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite as _herm
from scipy.constants import c

__all__ = [
    "BeamGeometry",
    "HGMode",
    "CavityGeometry",
    "evaluate_mode",
    "gouy_resonance_frequencies",
    "overlap3",
    "free_spectral_range",
    "one_way_gouy_phase",
    "cavity_waist_radius",
    "accumulated_gouy_phase",
    "rayleigh_range",
]

_WAIST_POSITION_TOL = 1e-12  # m; overlaps require a common waist plane


@dataclass(frozen=True)
class BeamGeometry:
    """Gaussian beam parameters at the waist plane."""

    wavelength: float        # m
    waist_radius: float      # m
    waist_position: float = 0.0  # m along the cavity axis

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")
        if self.waist_radius <= 0:
            raise ValueError(f"waist_radius must be > 0, got {self.waist_radius}")


@dataclass(frozen=True)
class HGMode:
    """Transverse Hermite-Gauss mode TEM_mn with a frequency offset.

    The offset is measured relative to the reference carrier (half the
    pump frequency); a frequency-degenerate mode has offset 0.
    """

    m: int
    n: int
    geometry: BeamGeometry
    frequency_offset: float = 0.0  # Hz

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ValueError(f"mode orders must be non-negative, got ({self.m}, {self.n})")

    @property
    def order(self) -> int:
        return self.m + self.n


@dataclass(frozen=True)
class CavityGeometry:
    """Linear plano-concave cavity: flat input mirror, spherical output mirror."""

    length: float                       # m
    mirror_radius_of_curvature: float   # m
    round_trip_path: float = field(default=0.0)

    def __post_init__(self):
        if not 0 < self.length < self.mirror_radius_of_curvature:
            raise ValueError("cavity outside stability range: require 0 < length < mirror curvature radius")
        if self.round_trip_path == 0.0:
            object.__setattr__(self, "round_trip_path", 2.0 * self.length)


def _factorial(m: int) -> float:
    out = 1.0
    for i in range(2, m + 1):
        out *= i
    return out


def _hermite_poly_part(m: int, w: float, x):
    """Polynomial part of the 1D mode factor, i.e. h_m(x) without its Gaussian."""
    coeffs = np.zeros(m + 1)
    coeffs[m] = 1.0
    norm = (2.0 / np.pi) ** 0.25 / np.sqrt(2.0 ** m * _factorial(m) * w)
    return norm * _herm.hermval(np.sqrt(2.0) * np.asarray(x) / w, coeffs)


def _mode_1d(m: int, w: float, x):
    x = np.asarray(x, dtype=float)
    return _hermite_poly_part(m, w, x) * np.exp(-(x ** 2) / w ** 2)


def evaluate_mode(mode: HGMode, x, y):
    """Normalized waist-plane mode function u_mn(x, y) in 1/m.

    Real by convention (no Gouy or curvature phase at the waist plane);
    integral of |u|^2 over the transverse plane is 1.
    """
    w = mode.geometry.waist_radius
    return _mode_1d(mode.m, w, x) * _mode_1d(mode.n, w, y)


def rayleigh_range(geometry: BeamGeometry, refractive_index: float = 1.0) -> float:
    """pi w0^2 n / lambda; pass the medium index for propagation inside a crystal."""
    return np.pi * geometry.waist_radius ** 2 * refractive_index / geometry.wavelength


def free_spectral_range(cavity: CavityGeometry) -> float:
    """c / round-trip path, in Hz."""
    return c / cavity.round_trip_path


def one_way_gouy_phase(cavity: CavityGeometry) -> float:
    """Single-pass Gouy phase increment of the fundamental, arccos(sqrt(g1 g2))."""
    g = 1.0 - cavity.length / cavity.mirror_radius_of_curvature
    if not 0.0 < g < 1.0:
        raise ValueError("cavity outside stability range")
    return float(np.arccos(np.sqrt(g)))


def cavity_waist_radius(cavity: CavityGeometry, wavelength: float) -> float:
    """Fundamental-mode waist radius at the flat mirror of the plano-concave cavity."""
    z_r = np.sqrt(cavity.length * (cavity.mirror_radius_of_curvature - cavity.length))
    return float(np.sqrt(z_r * wavelength / np.pi))


def gouy_resonance_frequencies(cavity: CavityGeometry, max_order: int, q: int = 0):
    """Resonance comb nu(q, N) = FSR (q + (N+1) dzeta/pi) for N = m+n up to max_order.

    Returns a list of (q, N, frequency_hz); modes sharing m+n are exactly
    degenerate.  Raises for an unstable cavity.
    """
    fsr = free_spectral_range(cavity)
    dz = one_way_gouy_phase(cavity)
    return [(q, order, fsr * (q + (order + 1) * dz / np.pi)) for order in range(max_order + 1)]


def accumulated_gouy_phase(z1: float, z2: float, z_rayleigh: float) -> float:
    """Gouy phase of the fundamental accumulated between axial positions z1 and z2."""
    return float(np.arctan(z2 / z_rayleigh) - np.arctan(z1 / z_rayleigh))


def _overlap3_at_order(pump: HGMode, signal: HGMode, idler: HGMode, order: int) -> float:
    wp = pump.geometry.waist_radius
    ws = signal.geometry.waist_radius
    wi = idler.geometry.waist_radius
    a = 1.0 / wp ** 2 + 1.0 / ws ** 2 + 1.0 / wi ** 2  # total Gaussian exponent
    t, v = _herm.hermgauss(order)
    x = t / np.sqrt(a)
    # tensor-product rule; the e^{-a r^2} factor is absorbed by the weights
    px = _hermite_poly_part(pump.m, wp, x) * _hermite_poly_part(signal.m, ws, x) \
        * _hermite_poly_part(idler.m, wi, x)
    py = _hermite_poly_part(pump.n, wp, x) * _hermite_poly_part(signal.n, ws, x) \
        * _hermite_poly_part(idler.n, wi, x)
    grid = np.outer(px, py)
    weights = np.outer(v, v)
    return float(np.sum(weights * grid) / a)


def overlap3(pump: HGMode, signal: HGMode, idler: HGMode,
             start_order: int = 32, max_order: int = 512) -> float:
    """Three-mode waist-plane overlap integral of u_p u_s u_i, in 1/m.

    Gauss-Hermite tensor quadrature with automatic order escalation: the
    order doubles until two successive evaluations agree to 1e-9 relative.
    Symmetric under signal/idler exchange.  All three beams must share the
    waist position (thin-crystal approximation).
    """
    zs = [m.geometry.waist_position for m in (pump, signal, idler)]
    if max(zs) - min(zs) > _WAIST_POSITION_TOL:
        raise ValueError("overlap3 requires a common waist position for all three modes")
    prev = _overlap3_at_order(pump, signal, idler, start_order)
    order = start_order
    while order < max_order:
        order *= 2
        cur = _overlap3_at_order(pump, signal, idler, order)
        scale = max(abs(cur), abs(prev), 1e-300)
        if abs(cur - prev) <= 1e-9 * scale or (abs(cur) < 1e-290 and abs(prev) < 1e-290):
            return cur
        prev = cur
    raise ValueError(f"overlap3 quadrature did not converge by order {max_order}")
