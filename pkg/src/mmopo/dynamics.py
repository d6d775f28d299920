"""Mean-field steady states and analytic quadrature-noise spectra.

The cavity holds the signal supermodes (equal amplitude loss gamma per
round trip, round-trip time tau); the pump makes a single pass through
the crystal.  Below threshold the intracavity pump mean follows the
drive; once supermode 1 reaches its oscillation condition the pump mean
clamps to gamma/Lambda_1 and every other supermode keeps the squeezing it
had at threshold, whatever the pump power.

Spectra are two-sided, normalized to shot noise = 1, with Omega = 2 pi f:

    v_min(f) = 1 - eta 4 sigma / ((1+sigma)^2 + (Omega tau/gamma)^2)
    v_max(f) = 1 + eta 4 sigma / ((1-sigma)^2 + (Omega tau/gamma)^2)

where sigma_k = |Lambda_k <b>| / gamma is the normalized gain of
supermode k at the operating point and eta collects escape and detection
efficiency.  At eta = 1 the uncertainty product v_min v_max is exactly 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np
from scipy.constants import c, h

from .coupling import SupermodeSet

__all__ = [
    "CavityParams",
    "PumpDrive",
    "OperatingPoint",
    "SqueezingSpectrum",
    "CavityFigures",
    "derive_cavity_figures",
    "steady_state",
    "signed_gain",
    "quadrature_spectrum",
    "threshold_variance",
    "clamping_scan",
    "pump_photon_flux_in",
    "pump_photon_flux_consumed",
    "signal_photon_flux_out",
    "variance_db",
    "write_spectrum_csv",
]

_CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class CavityParams:
    """Round-trip losses of the signal cavity.

    gamma is the amplitude loss coefficient, half the total round-trip
    intensity loss; the finesse and bandwidth derive from it.  If a
    measured finesse is supplied it must agree with 2 pi / (2 gamma)
    within 2%.
    """

    round_trip_time: float                # s
    input_coupler_transmission: float     # intensity fraction
    output_coupler_transmission: float    # intensity fraction
    intracavity_loss: float               # intensity fraction per round trip
    finesse_hint: float | None = None

    def __post_init__(self):
        for name in ("input_coupler_transmission", "output_coupler_transmission", "intracavity_loss"):
            val = getattr(self, name)
            if not 0.0 < val < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {val}")
        if self.round_trip_time <= 0:
            raise ValueError(f"round_trip_time must be > 0, got {self.round_trip_time}")
        if not 0.0 < self.escape_efficiency < 1.0:
            raise ValueError("escape efficiency out of (0, 1); check coupler/loss values")
        if self.finesse_hint is not None:
            fin = math.pi / self.gamma
            if abs(fin - self.finesse_hint) > 0.02 * self.finesse_hint:
                raise ValueError(
                    f"supplied finesse {self.finesse_hint} disagrees with derived {fin:.1f} by more than 2%")

    @property
    def gamma(self) -> float:
        return 0.5 * (self.input_coupler_transmission + self.output_coupler_transmission
                      + self.intracavity_loss)

    @property
    def escape_efficiency(self) -> float:
        return self.output_coupler_transmission / (2.0 * self.gamma)


class CavityFigures(NamedTuple):
    finesse: float
    escape_efficiency: float
    bandwidth_fwhm_hz: float


def derive_cavity_figures(params: CavityParams) -> CavityFigures:
    """Finesse 2pi/(2 gamma), escape T_out/(2 gamma), FWHM bandwidth gamma/(pi tau)."""
    g = params.gamma
    return CavityFigures(
        finesse=math.pi / g,
        escape_efficiency=params.escape_efficiency,
        bandwidth_fwhm_hz=g / (math.pi * params.round_trip_time),
    )


@dataclass(frozen=True)
class PumpDrive:
    """Single-pass pump drive.

    threshold_power_w is the input power at which supermode 1 starts to
    oscillate; the dimensionless pump parameter is r = sqrt(P / P_th).
    """

    power_w: float
    threshold_power_w: float
    phase: float = 0.0
    wavelength_m: float = 532e-9

    def __post_init__(self):
        if self.power_w < 0:
            raise ValueError(f"pump power must be >= 0, got {self.power_w}")
        if self.threshold_power_w <= 0:
            raise ValueError(f"threshold power must be > 0, got {self.threshold_power_w}")
        if self.wavelength_m <= 0:
            raise ValueError(f"pump wavelength must be > 0, got {self.wavelength_m}")

    @property
    def r(self) -> float:
        return math.sqrt(self.power_w / self.threshold_power_w)


@dataclass(frozen=True)
class OperatingPoint:
    """Mean-field steady state.

    pump_mean is the intracavity pump amplitude in units of
    gamma/Lambda_1, so |pump_mean| = r below threshold and exactly 1 once
    clamped.  oscillating_amplitude is the supermode-1 amplitude with
    |A|^2 equal to the intracavity photon number under the photon-flux
    convention (see steady_state).
    """

    pump_mean: complex
    oscillating_amplitude: complex
    regime: str                      # "below" | "at" | "above"
    pump: PumpDrive = field(compare=False)
    amplitude_scale: float = field(default=0.0, compare=False)  # kappa of |A|^2 = kappa (r-1)

    @property
    def pump_mean_abs(self) -> float:
        return abs(self.pump_mean)


def _pump_photon_energy(pump: PumpDrive) -> float:
    return h * c / pump.wavelength_m


def pump_photon_flux_in(pump: PumpDrive) -> float:
    """Input pump photon flux P / (h nu_p), photons per second."""
    return pump.power_w / _pump_photon_energy(pump)


def steady_state(pump: PumpDrive, s: SupermodeSet, params: CavityParams) -> OperatingPoint:
    """Solve the mean-field fixed point with single-pass pump depletion.

    Below threshold (r <= 1) nothing oscillates and the pump mean follows
    the drive.  Above threshold the oscillation condition of supermode 1
    pins the path-averaged pump amplitude at gamma/Lambda_1 (clamping);
    the oscillating photon number follows from photon-flux bookkeeping:
    the pump flux lost to conversion, Phi_th (r^2 - (2 - r)^2) =
    4 Phi_th (r - 1), feeds signal+idler photons at twice that rate, and
    balancing against the cavity decay 2 gamma |A|^2 / tau gives
    |A|^2 = kappa (r - 1) with kappa = 4 Phi_th tau / gamma.
    """
    r = pump.r
    gamma = params.gamma
    threshold_flux = pump.threshold_power_w / _pump_photon_energy(pump)
    kappa = 4.0 * threshold_flux * params.round_trip_time / gamma
    phase = complex(math.cos(pump.phase), math.sin(pump.phase))
    if r < 1.0 - _CLAMP_TOL:
        return OperatingPoint(pump_mean=r * phase, oscillating_amplitude=0.0 + 0.0j,
                              regime="below", pump=pump, amplitude_scale=kappa)
    if r <= 1.0 + _CLAMP_TOL:
        return OperatingPoint(pump_mean=1.0 * phase, oscillating_amplitude=0.0 + 0.0j,
                              regime="at", pump=pump, amplitude_scale=kappa)
    amp = math.sqrt(kappa * (r - 1.0))
    return OperatingPoint(pump_mean=1.0 * phase, oscillating_amplitude=amp + 0.0j,
                          regime="above", pump=pump, amplitude_scale=kappa)


def pump_photon_flux_consumed(op: OperatingPoint, params: CavityParams) -> float:
    """Pump photons per second converted to signal/idler pairs at steady state."""
    return params.gamma / params.round_trip_time * abs(op.oscillating_amplitude) ** 2


def signal_photon_flux_out(op: OperatingPoint, params: CavityParams) -> float:
    """Total signal+idler photon flux leaving the cavity (all loss channels)."""
    return 2.0 * params.gamma / params.round_trip_time * abs(op.oscillating_amplitude) ** 2


def signed_gain(k: int, s: SupermodeSet, op: OperatingPoint) -> float:
    """Normalized parametric gain of supermode k at the operating point.

    sigma_signed = (Lambda_k / Lambda_1) |pump_mean|; its magnitude is the
    sigma of the spectra and its sign selects the squeezed quadrature.
    """
    return s.gain_ratio(k) * abs(op.pump_mean)


@dataclass(frozen=True)
class SqueezingSpectrum:
    """Quadrature variances against analysis frequency, shot noise = 1."""

    supermode_index: int
    frequencies: np.ndarray
    v_min: np.ndarray
    v_max: np.ndarray
    squeezed_quadrature_angle: float
    sigma: float
    efficiency: float


def quadrature_spectrum(k: int, s: SupermodeSet, op: OperatingPoint, params: CavityParams,
                        detection_efficiency: float = 1.0,
                        frequencies: Iterable[float] = (0.0,)) -> SqueezingSpectrum:
    """Analytic squeezing spectrum of supermode k (1-based index).

    eta = escape x detection efficiency.  Rejects sigma_k > 1 (a second
    supermode past its own threshold is outside the model) and, above
    threshold, k = 1 (the bright mode's quantum noise is out of scope).
    The squeezed quadrature sits at pi/2 (phase) for positive signed gain
    and at 0 (amplitude) for negative, in the pump-referenced frame.
    """
    if not 0.0 < detection_efficiency <= 1.0:
        raise ValueError(f"detection efficiency must lie in (0, 1], got {detection_efficiency}")
    if op.regime == "above" and k == 1:
        raise ValueError("supermode 1 carries the bright field above threshold; "
                         "its quantum noise is not modeled")
    g = signed_gain(k, s, op)
    sigma = abs(g)
    if sigma > 1.0 + 1e-12:
        raise ValueError(f"inconsistent operating point: sigma_{k} = {sigma:.6f} > 1")
    sigma = min(sigma, 1.0)
    f = np.asarray(list(frequencies), dtype=float)
    eta = params.escape_efficiency * detection_efficiency
    om_norm = 2.0 * np.pi * f * params.round_trip_time / params.gamma
    v_min = 1.0 - eta * 4.0 * sigma / ((1.0 + sigma) ** 2 + om_norm ** 2)
    v_max = 1.0 + eta * 4.0 * sigma / ((1.0 - sigma) ** 2 + om_norm ** 2)
    angle = 0.5 * np.pi if g >= 0 else 0.0
    return SqueezingSpectrum(supermode_index=k, frequencies=f, v_min=v_min, v_max=v_max,
                             squeezed_quadrature_angle=angle, sigma=sigma, efficiency=eta)


def threshold_variance(k: int, s: SupermodeSet) -> float:
    """Zero-frequency squeezed variance at threshold, ((|L_k|-|L_1|)/(|L_k|+|L_1|))^2."""
    lam_k = abs(s.eigenvalues[k - 1])
    lam_1 = abs(s.dominant)
    if lam_1 == 0.0:
        raise ValueError("dominant eigenvalue is zero; no threshold exists")
    return ((lam_k - lam_1) / (lam_k + lam_1)) ** 2


def clamping_scan(k: int, powers: Iterable[float], s: SupermodeSet, params: CavityParams,
                  pump_template: PumpDrive, detection_efficiency: float = 1.0):
    """Zero-frequency v_min of supermode k across an above-threshold power scan.

    Every power must be at or above the supermode-1 threshold and k must
    not be 1.  Returns rows (power_w, pump_mean_abs, v_min); the v_min
    column is constant, which is the clamping signature.
    """
    if k == 1:
        raise ValueError("clamping scan is defined for the non-oscillating supermodes (k != 1)")
    rows = []
    for p in powers:
        if p < pump_template.threshold_power_w * (1.0 - 1e-12):
            raise ValueError(f"clamping scan power {p} W below threshold "
                             f"{pump_template.threshold_power_w} W")
        pump = PumpDrive(p, pump_template.threshold_power_w, pump_template.phase,
                         pump_template.wavelength_m)
        op = steady_state(pump, s, params)
        spec = quadrature_spectrum(k, s, op, params, detection_efficiency, (0.0,))
        rows.append((p, op.pump_mean_abs, float(spec.v_min[0])))
    return rows


def variance_db(v) -> np.ndarray:
    """10 log10(V); negative for squeezing."""
    return 10.0 * np.log10(np.asarray(v, dtype=float))


def write_spectrum_csv(spec: SqueezingSpectrum, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frequency_hz", "v_min", "v_max", "v_min_db", "v_max_db"])
        for f, vmin, vmax in zip(spec.frequencies, spec.v_min, spec.v_max):
            writer.writerow([f"{f:.12g}", f"{vmin:.12g}", f"{vmax:.12g}",
                             f"{float(variance_db(vmin)):.12g}", f"{float(variance_db(vmax)):.12g}"])
