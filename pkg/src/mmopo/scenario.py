"""Scenario files: flat sectioned key-value configs binding all modules.

Keys carry explicit units in their names (cavity.length_mm, ...) so the
files stay diff-friendly and language-neutral.  A validated Scenario can
be serialized back and re-read into an identical object.  The bundled
paper scenario encodes every number the source experiment states.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.constants import c, zero_Celsius

from . import coupling, dynamics, hgmodes, locking, phasematch

__all__ = ["Scenario", "ScenarioError", "load_scenario", "load_paper_scenario",
           "paper_scenario_text"]


class ScenarioError(Exception):
    """Configuration validation failure, carrying the offending key path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class ModeSpec:
    m: int
    n: int
    offset_ghz: float


@dataclass(frozen=True)
class Scenario:
    # cavity
    length_mm: float
    mirror_radius_of_curvature_mm: float
    input_coupler_transmission: float
    output_coupler_transmission: float
    intracavity_loss: float
    finesse: float | None
    # pump
    pump_wavelength_nm: float
    pump_power_mw: float
    threshold_power_mw: float
    waist_ratio: float
    pump_phase_rad: float
    # basis
    signal_wavelength_nm: float
    modes: tuple[ModeSpec, ...]
    # detection
    detection_efficiency: float
    visibility: float
    lo_power_mw: float
    bright_power_mw: float
    # phasematch
    sellmeier_file: str
    crystal_length_mm: float
    crystal_center_offset_mm: float
    calibration_temperature_c: float
    temperature_c: float
    # locking
    green_power_mw: float
    seed_power_mw: float
    lock_offset_phase_rad: float
    doubling_efficiency_per_w: float
    # sweeps
    frequency_min_mhz: float
    frequency_max_mhz: float
    frequency_points: int
    power_min_mw: float
    power_max_mw: float
    power_points: int
    phase_points: int
    # sde
    sde_dt_fraction: float
    sde_segment_length: int
    sde_segments: int
    sde_ensemble: int
    # rng
    master_seed: int

    # ---------------------------------------------------------------- builders

    def cavity_geometry(self) -> hgmodes.CavityGeometry:
        return hgmodes.CavityGeometry(self.length_mm * 1e-3,
                                      self.mirror_radius_of_curvature_mm * 1e-3)

    def cavity_params(self) -> dynamics.CavityParams:
        tau = self.cavity_geometry().round_trip_path / c
        return dynamics.CavityParams(
            round_trip_time=tau,
            input_coupler_transmission=self.input_coupler_transmission,
            output_coupler_transmission=self.output_coupler_transmission,
            intracavity_loss=self.intracavity_loss,
            finesse_hint=self.finesse,
        )

    def signal_geometry(self) -> hgmodes.BeamGeometry:
        lam = self.signal_wavelength_nm * 1e-9
        w = hgmodes.cavity_waist_radius(self.cavity_geometry(), lam)
        return hgmodes.BeamGeometry(wavelength=lam, waist_radius=w)

    def pump_mode(self) -> hgmodes.HGMode:
        sig = self.signal_geometry()
        geom = hgmodes.BeamGeometry(wavelength=self.pump_wavelength_nm * 1e-9,
                                    waist_radius=self.waist_ratio * sig.waist_radius)
        return hgmodes.HGMode(0, 0, geom)

    def mode_basis(self) -> coupling.ModeBasis:
        sig = self.signal_geometry()
        modes = tuple(hgmodes.HGMode(sp.m, sp.n, sig, sp.offset_ghz * 1e9)
                      for sp in self.modes)
        return coupling.ModeBasis(modes=modes, pump=self.pump_mode())

    def supermodes(self) -> coupling.SupermodeSet:
        basis = self.mode_basis()
        return coupling.diagonalize(coupling.build_coupling_matrix(basis), basis)

    def pump_drive(self, power_w: float | None = None) -> dynamics.PumpDrive:
        return dynamics.PumpDrive(
            power_w=self.pump_power_mw * 1e-3 if power_w is None else power_w,
            threshold_power_w=self.threshold_power_mw * 1e-3,
            phase=self.pump_phase_rad,
            wavelength_m=self.pump_wavelength_nm * 1e-9,
        )

    def sellmeier(self) -> phasematch.SellmeierModel:
        if self.sellmeier_file == "builtin":
            return phasematch.load_sellmeier()
        return phasematch.load_sellmeier(self.sellmeier_file)

    def gouy_correction(self) -> float:
        """Longitudinal wavevector offset from the focused-beam Gouy phase, rad/m.

        Accumulated over the crystal span with in-medium Rayleigh ranges,
        (zeta_s + zeta_i - zeta_p) / L_crystal.
        """
        model = self.sellmeier()
        t_k = self.temperature_c + zero_Celsius
        lam_s = self.signal_wavelength_nm * 1e-9
        lam_p = self.pump_wavelength_nm * 1e-9
        n_s = phasematch.refractive_index(model, lam_s, t_k)
        n_p = phasematch.refractive_index(model, lam_p, t_k)
        sig = self.signal_geometry()
        zr_s = hgmodes.rayleigh_range(sig, n_s)
        zr_p = hgmodes.rayleigh_range(
            hgmodes.BeamGeometry(lam_p, self.waist_ratio * sig.waist_radius), n_p)
        lc = self.crystal_length_mm * 1e-3
        z1 = self.crystal_center_offset_mm * 1e-3 - lc / 2.0
        z2 = z1 + lc
        zeta_s = hgmodes.accumulated_gouy_phase(z1, z2, zr_s)
        zeta_p = hgmodes.accumulated_gouy_phase(z1, z2, zr_p)
        return (2.0 * zeta_s - zeta_p) / lc

    def poling(self) -> phasematch.PolingSpec:
        """Poling spec with the period calibrated to bulk degeneracy at the nominal T."""
        model = self.sellmeier()
        period = phasematch.calibrate_poling_period(
            model, self.calibration_temperature_c + zero_Celsius,
            lam_p=self.pump_wavelength_nm * 1e-9)
        return phasematch.PolingSpec(poling_period=period,
                                     temperature=self.temperature_c + zero_Celsius,
                                     crystal_length=self.crystal_length_mm * 1e-3)

    def lock_scenario(self) -> locking.LockScenario:
        return locking.LockScenario(pump_intensity=self.green_power_mw * 1e-3,
                                    seed_intensity=self.seed_power_mw * 1e-3,
                                    offset_phase=self.lock_offset_phase_rad,
                                    doubling_efficiency=self.doubling_efficiency_per_w)

    def frequency_grid(self) -> np.ndarray:
        return np.linspace(self.frequency_min_mhz * 1e6, self.frequency_max_mhz * 1e6,
                           self.frequency_points)

    def power_grid(self) -> np.ndarray:
        return np.linspace(self.power_min_mw * 1e-3, self.power_max_mw * 1e-3,
                           self.power_points)

    def phase_grid(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.phase_points)

    def sde_dt(self) -> float:
        params = self.cavity_params()
        return self.sde_dt_fraction * params.round_trip_time / params.gamma

    # ------------------------------------------------------------- validation

    def validate(self) -> "Scenario":
        def check(cond, path, msg):
            if not cond:
                raise ScenarioError(path, msg)

        check(self.length_mm > 0, "cavity.length_mm", "must be > 0")
        check(self.length_mm < self.mirror_radius_of_curvature_mm,
              "cavity.mirror_radius_of_curvature_mm",
              "cavity unstable: length must be smaller than the mirror curvature radius")
        for key in ("input_coupler_transmission", "output_coupler_transmission",
                    "intracavity_loss"):
            check(0.0 < getattr(self, key) < 1.0, f"cavity.{key}", "must lie in (0, 1)")
        check(self.finesse is None or self.finesse > 0, "cavity.finesse", "must be > 0")
        check(self.pump_wavelength_nm > 0, "pump.wavelength_nm", "must be > 0")
        check(self.pump_power_mw >= 0, "pump.power_mw", "must be >= 0")
        check(self.threshold_power_mw > 0, "pump.threshold_power_mw", "must be > 0")
        check(self.waist_ratio > 0, "pump.waist_ratio", "must be > 0")
        check(self.signal_wavelength_nm > 0, "basis.signal_wavelength_nm", "must be > 0")
        check(len(self.modes) > 0, "basis.modes_ghz", "mode basis must not be empty")
        labels = [(sp.m, sp.n, sp.offset_ghz) for sp in self.modes]
        check(len(set(labels)) == len(labels), "basis.modes_ghz",
              "basis modes must be pairwise distinct")
        for sp in self.modes:
            check(sp.m >= 0 and sp.n >= 0, "basis.modes_ghz", "mode orders must be >= 0")
        check(0.0 < self.detection_efficiency <= 1.0, "detection.efficiency",
              "must lie in (0, 1]")
        check(0.0 < self.visibility <= 1.0, "detection.visibility", "must lie in (0, 1]")
        check(self.lo_power_mw > 0, "detection.lo_power_mw", "must be > 0")
        check(self.bright_power_mw >= 0, "detection.bright_power_mw", "must be >= 0")
        check(self.crystal_length_mm > 0, "phasematch.crystal_length_mm", "must be > 0")
        check(self.green_power_mw >= 0, "locking.green_power_mw", "must be >= 0")
        check(self.seed_power_mw >= 0, "locking.seed_power_mw", "must be >= 0")
        check(self.doubling_efficiency_per_w > 0, "locking.doubling_efficiency_per_w",
              "must be > 0")
        check(self.frequency_points >= 1, "sweeps.frequency_points", "must be >= 1")
        check(self.frequency_max_mhz >= self.frequency_min_mhz >= 0.0,
              "sweeps.frequency_min_mhz", "grid must be non-negative and monotone")
        check(self.power_points >= 1, "sweeps.power_points", "must be >= 1")
        check(0.0 <= self.power_min_mw <= self.power_max_mw,
              "sweeps.power_min_mw", "grid must be non-negative and monotone")
        check(self.phase_points >= 2, "sweeps.phase_points", "must be >= 2")
        check(0.0 < self.sde_dt_fraction <= 0.1, "sde.dt_fraction",
              "must lie in (0, 0.1] (explicit-integration stability)")
        check(self.sde_segment_length >= 8, "sde.segment_length", "must be >= 8")
        check(self.sde_segments >= 1, "sde.segments", "must be >= 1")
        check(self.sde_ensemble >= 1, "sde.ensemble", "must be >= 1")
        return self

    # ------------------------------------------------------------------- io

    def save(self, path) -> None:
        cp = configparser.ConfigParser()
        cp["cavity"] = {
            "length_mm": _fmt(self.length_mm),
            "mirror_radius_of_curvature_mm": _fmt(self.mirror_radius_of_curvature_mm),
            "input_coupler_transmission": _fmt(self.input_coupler_transmission),
            "output_coupler_transmission": _fmt(self.output_coupler_transmission),
            "intracavity_loss": _fmt(self.intracavity_loss),
        }
        if self.finesse is not None:
            cp["cavity"]["finesse"] = _fmt(self.finesse)
        cp["pump"] = {
            "wavelength_nm": _fmt(self.pump_wavelength_nm),
            "power_mw": _fmt(self.pump_power_mw),
            "threshold_power_mw": _fmt(self.threshold_power_mw),
            "waist_ratio": _fmt(self.waist_ratio),
            "phase_rad": _fmt(self.pump_phase_rad),
        }
        cp["basis"] = {
            "signal_wavelength_nm": _fmt(self.signal_wavelength_nm),
            "modes_ghz": " ; ".join(f"{sp.m} {sp.n} {_fmt(sp.offset_ghz)}"
                                    for sp in self.modes),
        }
        cp["detection"] = {
            "efficiency": _fmt(self.detection_efficiency),
            "visibility": _fmt(self.visibility),
            "lo_power_mw": _fmt(self.lo_power_mw),
            "bright_power_mw": _fmt(self.bright_power_mw),
        }
        cp["phasematch"] = {
            "sellmeier_file": self.sellmeier_file,
            "crystal_length_mm": _fmt(self.crystal_length_mm),
            "crystal_center_offset_mm": _fmt(self.crystal_center_offset_mm),
            "calibration_temperature_c": _fmt(self.calibration_temperature_c),
            "temperature_c": _fmt(self.temperature_c),
        }
        cp["locking"] = {
            "green_power_mw": _fmt(self.green_power_mw),
            "seed_power_mw": _fmt(self.seed_power_mw),
            "offset_phase_rad": _fmt(self.lock_offset_phase_rad),
            "doubling_efficiency_per_w": _fmt(self.doubling_efficiency_per_w),
        }
        cp["sweeps"] = {
            "frequency_min_mhz": _fmt(self.frequency_min_mhz),
            "frequency_max_mhz": _fmt(self.frequency_max_mhz),
            "frequency_points": str(self.frequency_points),
            "power_min_mw": _fmt(self.power_min_mw),
            "power_max_mw": _fmt(self.power_max_mw),
            "power_points": str(self.power_points),
            "phase_points": str(self.phase_points),
        }
        cp["sde"] = {
            "dt_fraction": _fmt(self.sde_dt_fraction),
            "segment_length": str(self.sde_segment_length),
            "segments": str(self.sde_segments),
            "ensemble": str(self.sde_ensemble),
        }
        cp["rng"] = {"master_seed": str(self.master_seed)}
        with open(path, "w") as fh:
            cp.write(fh)


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def _parse_modes(raw: str) -> tuple[ModeSpec, ...]:
    out = []
    for chunk in raw.split(";"):
        parts = chunk.split()
        if not parts:
            continue
        if len(parts) != 3:
            raise ScenarioError("basis.modes_ghz",
                                f"mode entry {chunk.strip()!r} is not 'm n offset_ghz'")
        try:
            out.append(ModeSpec(int(parts[0]), int(parts[1]), float(parts[2])))
        except ValueError as exc:
            raise ScenarioError("basis.modes_ghz", f"cannot parse {chunk.strip()!r}: {exc}")
    return tuple(out)


def _get(cp, section, key, conv, path=None):
    path = path or f"{section}.{key}"
    try:
        raw = cp[section][key]
    except KeyError:
        raise ScenarioError(path, "missing required key")
    try:
        return conv(raw)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(path, f"cannot parse {raw!r}: {exc}")


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file; raises ScenarioError on any defect."""
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ScenarioError(str(path), "scenario file not found or unreadable")
    return _scenario_from_parser(cp).validate()


def _scenario_from_parser(cp: configparser.ConfigParser) -> Scenario:
    finesse = None
    if cp.has_option("cavity", "finesse"):
        finesse = _get(cp, "cavity", "finesse", float)
    return Scenario(
        length_mm=_get(cp, "cavity", "length_mm", float),
        mirror_radius_of_curvature_mm=_get(cp, "cavity", "mirror_radius_of_curvature_mm", float),
        input_coupler_transmission=_get(cp, "cavity", "input_coupler_transmission", float),
        output_coupler_transmission=_get(cp, "cavity", "output_coupler_transmission", float),
        intracavity_loss=_get(cp, "cavity", "intracavity_loss", float),
        finesse=finesse,
        pump_wavelength_nm=_get(cp, "pump", "wavelength_nm", float),
        pump_power_mw=_get(cp, "pump", "power_mw", float),
        threshold_power_mw=_get(cp, "pump", "threshold_power_mw", float),
        waist_ratio=_get(cp, "pump", "waist_ratio", float),
        pump_phase_rad=_get(cp, "pump", "phase_rad", float),
        signal_wavelength_nm=_get(cp, "basis", "signal_wavelength_nm", float),
        modes=_get(cp, "basis", "modes_ghz", _parse_modes),
        detection_efficiency=_get(cp, "detection", "efficiency", float),
        visibility=_get(cp, "detection", "visibility", float),
        lo_power_mw=_get(cp, "detection", "lo_power_mw", float),
        bright_power_mw=_get(cp, "detection", "bright_power_mw", float),
        sellmeier_file=_get(cp, "phasematch", "sellmeier_file", str),
        crystal_length_mm=_get(cp, "phasematch", "crystal_length_mm", float),
        crystal_center_offset_mm=_get(cp, "phasematch", "crystal_center_offset_mm", float),
        calibration_temperature_c=_get(cp, "phasematch", "calibration_temperature_c", float),
        temperature_c=_get(cp, "phasematch", "temperature_c", float),
        green_power_mw=_get(cp, "locking", "green_power_mw", float),
        seed_power_mw=_get(cp, "locking", "seed_power_mw", float),
        lock_offset_phase_rad=_get(cp, "locking", "offset_phase_rad", float),
        doubling_efficiency_per_w=_get(cp, "locking", "doubling_efficiency_per_w", float),
        frequency_min_mhz=_get(cp, "sweeps", "frequency_min_mhz", float),
        frequency_max_mhz=_get(cp, "sweeps", "frequency_max_mhz", float),
        frequency_points=_get(cp, "sweeps", "frequency_points", int),
        power_min_mw=_get(cp, "sweeps", "power_min_mw", float),
        power_max_mw=_get(cp, "sweeps", "power_max_mw", float),
        power_points=_get(cp, "sweeps", "power_points", int),
        phase_points=_get(cp, "sweeps", "phase_points", int),
        sde_dt_fraction=_get(cp, "sde", "dt_fraction", float),
        sde_segment_length=_get(cp, "sde", "segment_length", int),
        sde_segments=_get(cp, "sde", "segments", int),
        sde_ensemble=_get(cp, "sde", "ensemble", int),
        master_seed=_get(cp, "rng", "master_seed", int),
    )


def paper_scenario_text() -> str:
    """The bundled scenario reproducing the source experiment's numbers."""
    return resources.files("mmopo").joinpath("data/paper.scenario").read_text()


def load_paper_scenario() -> Scenario:
    cp = configparser.ConfigParser()
    cp.read_string(paper_scenario_text())
    return _scenario_from_parser(cp).validate()
