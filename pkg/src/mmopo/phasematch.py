"""Quasi-phase-matching in the periodically poled crystal.

Collinear type-0 interaction on a single polarization axis: a Sellmeier
model with a linear thermo-optic correction gives n(lambda, T), the
first-order poling grating supplies 2 pi / period, and the focused-beam
Gouy phase enters as an additive longitudinal wavevector offset averaged
over the crystal.  The signal/idler solver walks the energy-conserving
family lambda_s = c/(nu_0 + d), lambda_i = c/(nu_0 - d) and bisects the
total mismatch to zero.
"""

from __future__ import annotations

import configparser
import csv
import math
from dataclasses import dataclass
from importlib import resources

from scipy.constants import c, zero_Celsius

__all__ = [
    "SellmeierModel",
    "PolingSpec",
    "load_sellmeier",
    "refractive_index",
    "qpm_mismatch",
    "solve_signal_idler",
    "degeneracy_temperature",
    "calibrate_poling_period",
    "write_tuning_curve",
]

_DK_TOL = 1e-3       # rad/m, solver residual target
_T_TOL = 0.01        # K, degeneracy-temperature bisection tolerance
_ENERGY_TOL = 1e-6   # relative, energy-conservation precondition


@dataclass(frozen=True)
class SellmeierModel:
    """n(lambda, T) = sellmeier(lambda) + dn/dT(lambda) (T - T_ref).

    Wavelengths inside the formula are in micrometres; the public API is
    SI (metres, kelvin).
    """

    a: float
    b1: float
    c1: float
    b2: float
    c2: float
    d3: float
    d2: float
    d1: float
    d0: float
    reference_temperature_k: float
    wavelength_min_m: float
    wavelength_max_m: float
    temperature_min_k: float
    temperature_max_k: float


def load_sellmeier(path=None) -> SellmeierModel:
    """Read a coefficient file; with no path, load the bundled KTP z-axis set."""
    cp = configparser.ConfigParser()
    if path is None:
        text = resources.files("mmopo").joinpath("data/ktp_z_sellmeier.ini").read_text()
        cp.read_string(text)
    else:
        with open(path) as fh:
            cp.read_file(fh)
    s, t, v = cp["sellmeier"], cp["thermo_optic"], cp["validity"]
    return SellmeierModel(
        a=s.getfloat("a"), b1=s.getfloat("b1"), c1=s.getfloat("c1"),
        b2=s.getfloat("b2"), c2=s.getfloat("c2"),
        d3=t.getfloat("d3"), d2=t.getfloat("d2"), d1=t.getfloat("d1"), d0=t.getfloat("d0"),
        reference_temperature_k=t.getfloat("reference_temperature_c") + zero_Celsius,
        wavelength_min_m=v.getfloat("wavelength_min_um") * 1e-6,
        wavelength_max_m=v.getfloat("wavelength_max_um") * 1e-6,
        temperature_min_k=v.getfloat("temperature_min_c") + zero_Celsius,
        temperature_max_k=v.getfloat("temperature_max_c") + zero_Celsius,
    )


@dataclass(frozen=True)
class PolingSpec:
    """First-order poling grating and crystal operating conditions."""

    poling_period: float          # m
    temperature: float            # K
    crystal_length: float = 0.010  # m

    def __post_init__(self):
        if self.poling_period <= 0:
            raise ValueError(f"poling period must be > 0, got {self.poling_period}")
        if self.crystal_length <= 0:
            raise ValueError(f"crystal length must be > 0, got {self.crystal_length}")


def refractive_index(model: SellmeierModel, wavelength: float, temperature: float) -> float:
    """Index at wavelength (m) and temperature (K), with range checks."""
    if not model.wavelength_min_m <= wavelength <= model.wavelength_max_m:
        raise ValueError(
            f"wavelength {wavelength * 1e9:.1f} nm outside validity range "
            f"[{model.wavelength_min_m * 1e9:.0f}, {model.wavelength_max_m * 1e9:.0f}] nm")
    if not model.temperature_min_k <= temperature <= model.temperature_max_k:
        raise ValueError(
            f"temperature {temperature:.2f} K outside validity range "
            f"[{model.temperature_min_k:.2f}, {model.temperature_max_k:.2f}] K")
    lam = wavelength * 1e6
    l2 = lam * lam
    n0 = math.sqrt(model.a + model.b1 / (l2 - model.c1) + model.b2 / (l2 - model.c2))
    dndt = (model.d3 / lam ** 3 + model.d2 / l2 + model.d1 / lam + model.d0) * 1e-5
    return n0 + dndt * (temperature - model.reference_temperature_k)


def qpm_mismatch(model: SellmeierModel, poling: PolingSpec, lam_s: float, lam_i: float,
                 gouy_correction: float = 0.0, lam_p: float = 532e-9) -> float:
    """Total wavevector mismatch Dk in rad/m, zero when phase-matched.

    Dk = 2 pi (n_p/lam_p - n_s/lam_s - n_i/lam_i) - 2 pi/period + gouy.
    Signal and idler must satisfy energy conservation with the pump to
    1e-6 relative.
    """
    lhs = 1.0 / lam_s + 1.0 / lam_i
    rhs = 1.0 / lam_p
    if abs(lhs - rhs) > _ENERGY_TOL * rhs:
        raise ValueError(
            f"energy conservation violated: 1/lam_s + 1/lam_i deviates from 1/lam_p by "
            f"{abs(lhs - rhs) / rhs:.3e} relative")
    T = poling.temperature
    n_p = refractive_index(model, lam_p, T)
    n_s = refractive_index(model, lam_s, T)
    n_i = refractive_index(model, lam_i, T)
    return (2.0 * math.pi * (n_p / lam_p - n_s / lam_s - n_i / lam_i)
            - 2.0 * math.pi / poling.poling_period + gouy_correction)


def _mismatch_at_split(model, poling, nu0, split, gouy, lam_p):
    lam_s = c / (nu0 + split)
    lam_i = c / (nu0 - split)
    return qpm_mismatch(model, poling, lam_s, lam_i, gouy, lam_p)


def solve_signal_idler(model: SellmeierModel, poling: PolingSpec,
                       gouy_correction: float = 0.0, lam_p: float = 532e-9):
    """Phase-matched signal/idler pair around degeneracy, lam_s < lam_i.

    The pair is parametrized by the frequency splitting d around half the
    pump frequency, which keeps energy conservation exact; d is bisected
    until |Dk| < 1e-3 rad/m.  Raises when no sign change of Dk exists in
    the search range (then no phase-matched pair exists).
    """
    nu0 = c / lam_p / 2.0
    dk0 = _mismatch_at_split(model, poling, nu0, 0.0, gouy_correction, lam_p)
    lam_deg = c / nu0
    if abs(dk0) < _DK_TOL:
        return lam_deg, lam_deg
    # largest splitting that keeps both wavelengths inside the model validity
    split_max = min(nu0 - c / model.wavelength_max_m, c / model.wavelength_min_m - nu0)
    split_max *= 0.999999
    dk_edge = _mismatch_at_split(model, poling, nu0, split_max, gouy_correction, lam_p)
    if dk0 * dk_edge > 0.0:
        raise ValueError("no phase-matched pair in range: mismatch does not change sign "
                         f"between degeneracy ({dk0:.3e}) and the validity edge ({dk_edge:.3e})")
    lo, hi = 0.0, split_max
    f_lo = dk0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = _mismatch_at_split(model, poling, nu0, mid, gouy_correction, lam_p)
        if abs(f_mid) < _DK_TOL:
            return c / (nu0 + mid), c / (nu0 - mid)
        if f_lo * f_mid <= 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    raise ValueError("phase-matching bisection did not reach the residual tolerance")


def degeneracy_temperature(model: SellmeierModel, poling: PolingSpec,
                           gouy_correction: float = 0.0, lam_p: float = 532e-9) -> float:
    """Temperature (K) at which the degenerate pair is phase-matched.

    Bisection on T over the model validity range to 0.01 K; raises when
    the degenerate mismatch does not cross zero in range.
    """
    lam_deg = 2.0 * lam_p

    def dk_at(tk):
        spec = PolingSpec(poling.poling_period, tk, poling.crystal_length)
        return qpm_mismatch(model, spec, lam_deg, lam_deg, gouy_correction, lam_p)

    lo, hi = model.temperature_min_k, model.temperature_max_k
    f_lo, f_hi = dk_at(lo), dk_at(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise ValueError("no degeneracy temperature in the model validity range")
    while hi - lo > _T_TOL:
        mid = 0.5 * (lo + hi)
        f_mid = dk_at(mid)
        if f_lo * f_mid <= 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def calibrate_poling_period(model: SellmeierModel, temperature: float,
                            lam_p: float = 532e-9, gouy_correction: float = 0.0) -> float:
    """Poling period that phase-matches the degenerate pair at the given temperature.

    This is the bulk calibration step standing in for the manufacturer
    specification; by default the Gouy term is excluded so the period
    describes the plane-wave crystal.
    """
    lam_deg = 2.0 * lam_p
    n_p = refractive_index(model, lam_p, temperature)
    n_s = refractive_index(model, lam_deg, temperature)
    dk_material = 2.0 * math.pi * (n_p / lam_p - 2.0 * n_s / lam_deg) + gouy_correction
    if dk_material <= 0.0:
        raise ValueError("material mismatch non-positive; first-order poling cannot compensate")
    return 2.0 * math.pi / dk_material


def write_tuning_curve(model: SellmeierModel, poling: PolingSpec, temperatures,
                       path, gouy_correction: float = 0.0, lam_p: float = 532e-9) -> None:
    """CSV of (temperature_k, lam_s_nm, lam_i_nm) over a temperature scan."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["temperature_k", "lambda_signal_nm", "lambda_idler_nm"])
        for tk in temperatures:
            spec = PolingSpec(poling.poling_period, tk, poling.crystal_length)
            try:
                lam_s, lam_i = solve_signal_idler(model, spec, gouy_correction, lam_p)
            except ValueError:
                continue
            writer.writerow([f"{tk:.12g}", f"{lam_s * 1e9:.12g}", f"{lam_i * 1e9:.12g}"])
