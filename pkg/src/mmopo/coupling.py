"""Parametric coupling matrix over a signal-mode basis and its supermodes.

Entries are three-mode overlaps of (pump, mode, mode'), normalized to the
fundamental-pair reference so the matrix is dimensionless; pairs whose
frequency offsets do not cancel, or whose combined parity is odd, are
exactly zero.  The symmetric matrix is diagonalized with cyclic Jacobi
rotations; the eigenvectors are the supermodes, each evolving
independently with gain eigenvalue Lambda_k.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .hgmodes import HGMode, overlap3

__all__ = [
    "ModeBasis",
    "CouplingMatrix",
    "SupermodeSet",
    "build_coupling_matrix",
    "diagonalize",
    "threshold_powers",
    "write_supermode_table",
]

_FREQ_MATCH_TOL = 1e-3   # Hz; offsets must cancel to this tolerance to couple
_SYMMETRY_TOL = 1e-12
_JACOBI_TOL = 1e-14
_TIE_TOL = 1e-10


@dataclass(frozen=True)
class ModeBasis:
    """Ordered signal-mode basis plus the pump mode driving it."""

    modes: tuple[HGMode, ...]
    pump: HGMode

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(self.modes) == 0:
            raise ValueError("mode basis must not be empty")
        labels = [(m.m, m.n, m.frequency_offset) for m in self.modes]
        if len(set(labels)) != len(labels):
            raise ValueError("basis modes must be pairwise distinct in (m, n, frequency offset)")
        geoms = {(m.geometry.wavelength, m.geometry.waist_radius, m.geometry.waist_position)
                 for m in self.modes}
        if len(geoms) != 1:
            raise ValueError("all basis modes must share one signal beam geometry")

    def __len__(self) -> int:
        return len(self.modes)


@dataclass(frozen=True)
class CouplingMatrix:
    """Real symmetric coupling matrix, normalized to the fundamental-pair reference."""

    entries: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.entries, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"coupling matrix must be square, got shape {g.shape}")
        asym = np.max(np.abs(g - g.T)) if g.size else 0.0
        if asym > _SYMMETRY_TOL * max(1.0, np.max(np.abs(g))):
            raise ValueError(f"coupling matrix asymmetry {asym:.3e} exceeds tolerance")
        object.__setattr__(self, "entries", g)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class SupermodeSet:
    """Eigenpairs of the coupling matrix, sorted by descending |Lambda|.

    eigenvectors[:, k] holds the coefficients of supermode k over the
    original mode basis; the matrix is orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    basis: ModeBasis | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def dominant(self) -> float:
        """Lambda_1, the eigenvalue of largest modulus."""
        return float(self.eigenvalues[0])

    def gain_ratio(self, k: int) -> float:
        """Lambda_k / Lambda_1 for the 1-based supermode index k."""
        if not 1 <= k <= self.n:
            raise ValueError(f"supermode index {k} out of range 1..{self.n}")
        return float(self.eigenvalues[k - 1] / self.eigenvalues[0])


def build_coupling_matrix(basis: ModeBasis) -> CouplingMatrix:
    """Overlap-derived coupling matrix over the basis, in reference units.

    G[l][l'] = overlap3(pump, mode_l, mode_l') / Gamma00 when the two
    frequency offsets cancel, else 0, with Gamma00 the overlap of the same
    pump with a fundamental pair at the signal geometry.  Parity-forbidden
    entries are exactly zero.
    """
    n = len(basis)
    pump = basis.pump
    sig_geom = basis.modes[0].geometry
    ref = overlap3(pump, HGMode(0, 0, sig_geom), HGMode(0, 0, sig_geom))
    if ref == 0.0:
        raise ValueError("fundamental-pair reference overlap is zero; cannot normalize")
    g = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            mi, mj = basis.modes[i], basis.modes[j]
            if abs(mi.frequency_offset + mj.frequency_offset) > _FREQ_MATCH_TOL:
                continue
            if (pump.m + mi.m + mj.m) % 2 or (pump.n + mi.n + mj.n) % 2:
                continue  # integrand odd in x or y
            g[i, j] = g[j, i] = overlap3(pump, mi, mj) / ref
    return CouplingMatrix(g)


def _jacobi_eigh(a: np.ndarray, tol: float = _JACOBI_TOL, max_sweeps: int = 100):
    """Cyclic Jacobi eigensolver for a real symmetric matrix.

    Returns (eigenvalues, eigenvectors as columns), unsorted.  Designed
    for the small dense matrices that arise here (n of order 10).
    """
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, np.max(np.abs(a)))
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(a[p, q]))
                if abs(a[p, q]) <= tol * scale:
                    continue
                apq, app, aqq = a[p, q], a[p, p], a[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot_p, rot_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * rot_p - s * rot_q
                a[:, q] = s * rot_p + c * rot_q
                rot_p, rot_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rot_p - s * rot_q
                a[q, :] = s * rot_p + c * rot_q
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if off <= tol * scale:
            break
    return np.diag(a).copy(), v


def _canonical_order(vals: np.ndarray, vecs: np.ndarray):
    """Deterministic eigenpair ordering and sign convention.

    Sort by descending |Lambda|; near-ties are broken first by the lowest
    basis index of the largest-magnitude coefficient, then by descending
    signed Lambda.  Each vector is flipped so that coefficient is positive.
    """
    n = len(vals)
    scale = max(1.0, float(np.max(np.abs(vals))))
    argmaxes = []
    for k in range(n):
        vec = vecs[:, k]
        mx = np.max(np.abs(vec))
        idx = int(np.argmax(np.abs(vec) >= mx - _TIE_TOL))
        if vec[idx] < 0:
            vecs[:, k] = -vec
        argmaxes.append(idx)

    # group near-equal |Lambda| so float dust from the solver cannot reorder ties
    quant = np.round(np.abs(vals) / (scale * _TIE_TOL))
    order = sorted(range(n), key=lambda k: (-quant[k], argmaxes[k], -vals[k]))
    return vals[order], vecs[:, order]


def diagonalize(g: CouplingMatrix, basis: ModeBasis | None = None) -> SupermodeSet:
    """Supermode decomposition of the coupling matrix.

    Raises for a non-symmetric input; the returned eigenvector matrix is
    orthonormal and reconstructs the input to 1e-10.
    """
    a = np.asarray(g.entries, dtype=float)
    asym = np.max(np.abs(a - a.T)) if a.size else 0.0
    if asym > _SYMMETRY_TOL * max(1.0, np.max(np.abs(a))):
        raise ValueError(f"matrix asymmetry {asym:.3e} exceeds 1e-12; not a coupling matrix")
    vals, vecs = _jacobi_eigh(0.5 * (a + a.T))
    vals, vecs = _canonical_order(vals, vecs)
    return SupermodeSet(eigenvalues=vals, eigenvectors=vecs, basis=basis)


def threshold_powers(s: SupermodeSet, reference_threshold: float) -> list[float]:
    """Oscillation threshold of each supermode, P_th(k) = ref (Lambda_1/Lambda_k)^2.

    reference_threshold is the pump power at which supermode 1 oscillates.
    A zero eigenvalue maps to an infinite threshold (the mode never
    oscillates), reported as math.inf rather than an error.
    """
    if reference_threshold <= 0:
        raise ValueError(f"reference threshold must be > 0 W, got {reference_threshold}")
    lam1 = s.dominant
    out = []
    for lam in s.eigenvalues:
        out.append(math.inf if lam == 0.0 else reference_threshold * (lam1 / lam) ** 2)
    return out


def write_supermode_table(s: SupermodeSet, reference_threshold: float, path) -> None:
    """CSV table: index, relative eigenvalue, threshold (W), basis coefficients."""
    thresholds = threshold_powers(s, reference_threshold)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        coeff_names = [f"coeff_{i}" for i in range(s.n)]
        writer.writerow(["supermode_index", "eigenvalue_relative", "threshold_w"] + coeff_names)
        for k in range(s.n):
            row = [k + 1, f"{s.eigenvalues[k]:.12g}",
                   "inf" if math.isinf(thresholds[k]) else f"{thresholds[k]:.12g}"]
            row += [f"{c:.12g}" for c in s.eigenvectors[:, k]]
            writer.writerow(row)
