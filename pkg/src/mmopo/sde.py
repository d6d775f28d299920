"""Stochastic trajectories, homodyne records and PSD estimation.

Each supermode quadrature is an Ornstein-Uhlenbeck process driven by
vacuum input noise (two-sided input PSD 1/2, intracavity stationary
variance 1/2 at zero gain):

    dX = -(gamma/tau)(1 - sigma_s) X dt + sqrt(gamma/tau) dW
    dY = -(gamma/tau)(1 + sigma_s) Y dt + sqrt(gamma/tau) dW'

with sigma_s the signed gain of the supermode.  Output records come from
the input-output relation on the same noise stream,

    x_out = sqrt(2 gamma/tau) X - x_in,

scaled to shot-noise units, so a vacuum mode gives a flat unit PSD and
the squeezed-quadrature PSD reproduces the analytic Lorentzian of the
dynamics module; the Euler discretization is exact at zero frequency and
biased by O(gamma dt/tau) elsewhere.

Noise streams are counter-based (Philox) and derived from (master seed,
supermode index, stream tag), so trajectories and ensembles are
reproducible and parallelizable without correlation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .coupling import SupermodeSet
from .dynamics import CavityParams, OperatingPoint, signed_gain

__all__ = [
    "Trajectory",
    "LocalOscillator",
    "HomodyneRecord",
    "NoiseEstimate",
    "simulate_trajectory",
    "simulate_supermodes",
    "homodyne_record",
    "estimate_psd",
    "shot_noise_correction",
    "apply_shot_noise_correction",
    "write_record_csv",
    "write_psd_csv",
]

_STABILITY_FRACTION = 0.1     # dt <= tau/(10 gamma)
_BURN_IN_DECAY_TIMES = 10.0   # discarded start-up, in units of the slowest 1/theta

# stream tags for the per-(seed, mode) Philox substreams
_TAG_X, _TAG_Y = 0, 1
_TAG_DETECTION_VACUUM, _TAG_BRIGHT = 101, 102


def _stream(seed: int, mode_index: int, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence(entropy=int(seed), spawn_key=(int(mode_index), int(tag)))))


@dataclass(frozen=True)
class Trajectory:
    """Quadrature time series of one or more supermodes, shot-noise units.

    x_out/y_out are the output-field records used for homodyne synthesis;
    x_intra/y_intra the intracavity quadratures (stationary variance 1/2
    for a vacuum mode).  Rows follow supermode_indices (1-based).
    """

    dt: float
    steps: int
    supermode_indices: tuple[int, ...]
    x_out: np.ndarray
    y_out: np.ndarray
    x_intra: np.ndarray
    y_intra: np.ndarray
    rng_seed: int
    gamma: float
    round_trip_time: float

    def mode_row(self, k: int) -> int:
        try:
            return self.supermode_indices.index(k)
        except ValueError:
            raise ValueError(f"supermode {k} not present in trajectory") from None


def _simulate_single(theta_rate: float, noise_rate: float, dt: float, steps: int,
                     rng: np.random.Generator):
    """Euler chain X_{n+1} = (1 - theta dt) X_n + sqrt(noise_rate dt) xi_n.

    Returns (intracavity X_n, input samples xi_n) after a burn-in long
    enough to reach the stationary state.
    """
    a = 1.0 - theta_rate * dt
    b = np.sqrt(noise_rate * dt)
    burn = int(np.ceil(_BURN_IN_DECAY_TIMES / max(theta_rate * dt, 1e-6)))
    xi = rng.standard_normal(steps + burn)
    # X_n depends on xi_{n-1}, xi_{n-2}, ...: one-step-delayed AR(1) filter
    x_full = lfilter([0.0, b], [1.0, -a], xi)
    return x_full[burn:], xi[burn:]


def simulate_supermodes(indices, op: OperatingPoint, s: SupermodeSet, params: CavityParams,
                        dt: float, steps: int, seed: int) -> Trajectory:
    """Integrate the linearized quadrature equations for several supermodes.

    Each supermode must be strictly below its own threshold (sigma < 1);
    dt must respect the explicit-integration bound tau/(10 gamma).  The
    same (seed, indices, parameters) always returns identical arrays.
    """
    gamma, tau = params.gamma, params.round_trip_time
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if dt > _STABILITY_FRACTION * tau / gamma:
        raise ValueError(f"dt = {dt:.3e} s violates the stability bound tau/(10 gamma) = "
                         f"{_STABILITY_FRACTION * tau / gamma:.3e} s")
    indices = tuple(int(k) for k in indices)
    if len(indices) == 0:
        raise ValueError("at least one supermode index is required")
    rate = gamma / tau
    n_modes = len(indices)
    x_out = np.empty((n_modes, steps))
    y_out = np.empty((n_modes, steps))
    x_intra = np.empty((n_modes, steps))
    y_intra = np.empty((n_modes, steps))
    # sqrt(2 gamma/tau) X - x_in, rescaled by the white-noise sample amplitude
    # sqrt(1/(2 dt)) so that a vacuum output is unit-variance white noise
    out_gain = 2.0 * np.sqrt(rate * dt)
    for row, k in enumerate(indices):
        g = signed_gain(k, s, op)
        if abs(g) >= 1.0:
            raise ValueError(f"supermode {k} is at or beyond its own threshold "
                             f"(sigma = {abs(g):.6f}); linearized noise model invalid")
        if op.regime == "above" and k == 1:
            raise ValueError("supermode 1 carries the bright field above threshold; "
                             "its quantum noise is not modeled")
        x, xi_x = _simulate_single((1.0 - g) * rate, rate, dt, steps,
                                   _stream(seed, k, _TAG_X))
        y, xi_y = _simulate_single((1.0 + g) * rate, rate, dt, steps,
                                   _stream(seed, k, _TAG_Y))
        x_intra[row], y_intra[row] = x, y
        x_out[row] = out_gain * x - xi_x
        y_out[row] = out_gain * y - xi_y
    return Trajectory(dt=dt, steps=steps, supermode_indices=indices,
                      x_out=x_out, y_out=y_out, x_intra=x_intra, y_intra=y_intra,
                      rng_seed=int(seed), gamma=gamma, round_trip_time=tau)


def simulate_trajectory(k: int, op: OperatingPoint, s: SupermodeSet, params: CavityParams,
                        dt: float, steps: int, seed: int) -> Trajectory:
    """Single-supermode convenience wrapper around simulate_supermodes."""
    return simulate_supermodes((k,), op, s, params, dt, steps, seed)


@dataclass(frozen=True)
class LocalOscillator:
    """Homodyne local-oscillator settings.

    mode holds the LO decomposition over the trajectory's supermodes
    (unit norm); phase selects the measured quadrature; the mode-matching
    visibility enters the effective detection efficiency squared.
    """

    mode: np.ndarray
    phase: float = 0.0
    power_w: float = 1e-3
    visibility: float = 1.0

    def __post_init__(self):
        vec = np.asarray(self.mode, dtype=float)
        object.__setattr__(self, "mode", vec)
        if abs(np.linalg.norm(vec) - 1.0) > 1e-10:
            raise ValueError(f"LO mode vector must have unit norm, got {np.linalg.norm(vec):.12f}")
        if self.power_w <= 0:
            raise ValueError("LO power must be > 0")
        if not 0.0 < self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in (0, 1], got {self.visibility}")


@dataclass(frozen=True)
class HomodyneRecord:
    """Photocurrent record in LO-calibrated shot-noise units."""

    lo_mode: np.ndarray
    lo_phase: float
    lo_power: float
    bright_power: float
    samples: np.ndarray
    dt: float
    efficiency: float    # escape x detection x visibility^2 applied to the record


def homodyne_record(traj: Trajectory, lo: LocalOscillator,
                    escape_efficiency: float = 1.0, detection_efficiency: float = 1.0,
                    bright_power_w: float = 0.0) -> HomodyneRecord:
    """Project the multimode output field onto the LO mode at the LO phase.

    The projection is linear in the LO coefficients on a fixed noise
    realization.  Detection imperfections (escape, photodiode efficiency,
    visibility^2) mix in a seeded vacuum stream; a bright co-detected
    mode of power P_b adds an independent white noise floor P_b / P_LO,
    which is what the shot-noise correction later removes.
    """
    if len(lo.mode) != len(traj.supermode_indices):
        raise ValueError(f"LO vector has {len(lo.mode)} coefficients for "
                         f"{len(traj.supermode_indices)} trajectory modes")
    if bright_power_w < 0:
        raise ValueError("bright power must be >= 0")
    proj = (np.cos(lo.phase) * (lo.mode @ traj.x_out)
            + np.sin(lo.phase) * (lo.mode @ traj.y_out))
    eta = escape_efficiency * detection_efficiency * lo.visibility ** 2
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"effective efficiency {eta} out of (0, 1]")
    samples = proj
    if eta < 1.0:
        vac = _stream(traj.rng_seed, 0, _TAG_DETECTION_VACUUM).standard_normal(traj.steps)
        samples = np.sqrt(eta) * proj + np.sqrt(1.0 - eta) * vac
    if bright_power_w > 0.0:
        rho = bright_power_w / lo.power_w
        bright = _stream(traj.rng_seed, 0, _TAG_BRIGHT).standard_normal(traj.steps)
        samples = samples + np.sqrt(rho) * bright
    return HomodyneRecord(lo_mode=lo.mode, lo_phase=lo.phase, lo_power=lo.power_w,
                          bright_power=bright_power_w, samples=samples, dt=traj.dt,
                          efficiency=eta)


@dataclass(frozen=True)
class NoiseEstimate:
    """Averaged-periodogram PSD, calibrated so unit-variance white noise -> 1."""

    frequencies: np.ndarray
    psd: np.ndarray
    n_segments: int
    confidence: float          # nominal relative standard error, 1/sqrt(n_segments)
    psd_standard_error: np.ndarray  # empirical per-bin standard error of the mean


def estimate_psd(rec: HomodyneRecord, segment_length: int) -> NoiseEstimate:
    """Welch estimate with a Hann window and 50% overlap.

    Normalization is fixed by the white-noise calibration: a record of
    independent unit-variance samples averages to PSD = 1 in every bin,
    making bins directly comparable to the analytic SqueezingSpectrum.
    """
    x = np.asarray(rec.samples, dtype=float)
    n = segment_length
    if n < 8:
        raise ValueError("segment length must be at least 8 samples")
    if x.size < 2 * n:
        raise ValueError(f"record too short: {x.size} samples < 2 x segment length {n}")
    win = np.hanning(n)
    norm = np.sum(win ** 2)
    hop = n // 2
    starts = range(0, x.size - n + 1, hop)
    segs = np.stack([x[i:i + n] for i in starts])
    periodograms = np.abs(np.fft.rfft(segs * win, axis=1)) ** 2 / norm
    n_segments = periodograms.shape[0]
    psd = periodograms.mean(axis=0)
    se = periodograms.std(axis=0, ddof=1) / np.sqrt(n_segments)
    freqs = np.arange(n // 2 + 1) / (n * rec.dt)
    return NoiseEstimate(frequencies=freqs, psd=psd, n_segments=n_segments,
                         confidence=1.0 / np.sqrt(n_segments), psd_standard_error=se)


def shot_noise_correction(lo_power: float, bright_power: float) -> float:
    """Factor multiplying the LO-only shot-noise calibration, (P_LO + P_b)/P_LO."""
    if lo_power <= 0:
        raise ValueError("LO power must be > 0 to calibrate shot noise")
    if bright_power < 0:
        raise ValueError("bright power must be >= 0")
    return (lo_power + bright_power) / lo_power


def apply_shot_noise_correction(est: NoiseEstimate, factor: float) -> NoiseEstimate:
    """Renormalize a PSD to the corrected shot-noise reference."""
    if factor <= 0:
        raise ValueError("correction factor must be > 0")
    return NoiseEstimate(frequencies=est.frequencies, psd=est.psd / factor,
                         n_segments=est.n_segments, confidence=est.confidence,
                         psd_standard_error=est.psd_standard_error / factor)


def write_record_csv(rec: HomodyneRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "photocurrent_shot_units"])
        for i, v in enumerate(rec.samples):
            writer.writerow([f"{i * rec.dt:.12g}", f"{v:.12g}"])


def write_psd_csv(est: NoiseEstimate, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frequency_hz", "psd_shot_units", "standard_error", "n_segments"])
        for f, p, se in zip(est.frequencies, est.psd, est.psd_standard_error):
            writer.writerow([f"{f:.12g}", f"{p:.12g}", f"{se:.12g}", est.n_segments])
