"""Relative-phase error signal and classical phase-sensitive gain.

An auxiliary interferometer doubles the seed in a single pass and beats
it against the pump.  The interference term varies as

    s(phi) = 2 sqrt(eta_d) sqrt(I_pump) I_seed cos(2 phi - phi_0)

with phi the seed-pump relative phase (pi-periodic through the factor 2)
and phi_0 an offset set by the crystal position.  The seeded cavity gain
interpolates between 1/(1-sigma)^2 at the amplification phase and
1/(1+sigma)^2 at deamplification; with phi_0 tuned to zero the extrema of
s and G coincide, which is the correlation the lock relies on.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LockScenario",
    "error_signal",
    "parametric_gain",
    "lock_point",
    "write_lock_sweep",
]


@dataclass(frozen=True)
class LockScenario:
    """Interferometer drive powers and geometry offset."""

    pump_intensity: float           # W of green at the interferometer
    seed_intensity: float           # W of infrared seed
    offset_phase: float = 0.0       # rad, set by the crystal position
    doubling_efficiency: float = 1e-4  # 1/W, single-pass: P_doubled = eff * I_seed^2

    def __post_init__(self):
        if self.pump_intensity < 0 or self.seed_intensity < 0:
            raise ValueError("interferometer intensities must be >= 0")
        if self.doubling_efficiency <= 0:
            raise ValueError("doubling efficiency must be > 0")

    @property
    def doubled_power(self) -> float:
        """Single-pass frequency-doubled seed power, quadratic in the seed."""
        return self.doubling_efficiency * self.seed_intensity ** 2


def error_signal(sc: LockScenario, phi) -> np.ndarray | float:
    """Interference signal between pump and doubled seed at relative phase phi.

    Amplitude 2 sqrt(doubling_efficiency); scales as sqrt(I_pump) and
    linearly in I_seed, and is exactly pi-periodic in phi.
    """
    amp = 2.0 * math.sqrt(sc.doubling_efficiency) * math.sqrt(sc.pump_intensity) * sc.seed_intensity
    return amp * np.cos(2.0 * np.asarray(phi, dtype=float) - sc.offset_phase)


def parametric_gain(phi, sigma: float) -> np.ndarray | float:
    """Classical seeded intensity gain of the below-threshold cavity.

    G(phi) = cos^2(phi)/(1-sigma)^2 + sin^2(phi)/(1+sigma)^2, the standard
    intracavity result for a seed decomposed onto the amplified and
    deamplified quadratures.  Requires 0 <= sigma < 1.
    """
    if not 0.0 <= sigma < 1.0:
        raise ValueError(f"pump parameter sigma must lie in [0, 1), got {sigma}")
    phi = np.asarray(phi, dtype=float)
    return np.cos(phi) ** 2 / (1.0 - sigma) ** 2 + np.sin(phi) ** 2 / (1.0 + sigma) ** 2


def lock_point(sc: LockScenario, target: str) -> float:
    """Servo phase in [0, pi) holding the chosen gain extremum.

    The loop dithers phi and nulls ds/dphi, so the usable lock points are
    the two stationary points of s in [0, pi): the maximum at phi_0/2
    (amplification when phi_0 = 0) and the minimum at phi_0/2 + pi/2
    (deamplification).  The opposite curvature signs of the two points is
    what lets one feedback polarity select each target; shifting phi_0 by
    delta moves both points by delta/2.
    """
    if target not in ("amplification", "deamplification"):
        raise ValueError(f"target must be 'amplification' or 'deamplification', got {target!r}")
    base = 0.5 * sc.offset_phase
    if target == "deamplification":
        base += 0.5 * math.pi
    return base % math.pi


def write_lock_sweep(sc: LockScenario, sigma: float, phases, path) -> None:
    """CSV sweep of (phi, error signal, parametric gain)."""
    phases = np.asarray(list(phases), dtype=float)
    s = error_signal(sc, phases)
    g = parametric_gain(phases, sigma)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["phase_rad", "error_signal", "parametric_gain"])
        for row in zip(phases, s, g):
            writer.writerow([f"{row[0]:.12g}", f"{row[1]:.12g}", f"{row[2]:.12g}"])
