"""Momentum-space analysis of the nodal chain.

With k_y, k_z as parameters, the Bloch Hamiltonian is
H(k_x) = b_y S^y + b_z S^z with b_y = -2 t0 cos k_x and
b_z = 2 t0 sin k_x + m'(k_y, k_z), bands E = +-sqrt(b_y^2 + b_z^2).
Band touchings are confined to the k_x = +-pi/2 planes and trace closed
loops in (k_y, k_z); each gapped k_x line carries a winding number
nu in {0, 1} equal to 1 exactly when (b_y, b_z) encircles the origin,
i.e. when |m'| < 2 t0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .defaults import DEFAULTS
from .effective import effective_zeeman


class GapClosedError(ValueError):
    """Raised when a winding number is requested on or next to a nodal line."""


@dataclass(frozen=True)
class BlochPoint:
    k_x: float
    k_y: float
    k_z: float
    b_y: float
    b_z: float
    e_plus: float
    e_minus: float

    @property
    def winding_defined(self) -> bool:
        return self.e_plus > 0.0


def bloch_fields(k_x: float, k_y: float, k_z: float, t0: float,
                 big_m: float, d: float) -> BlochPoint:
    """Bloch pseudo-fields and band energies at one momentum point."""
    m_eff = effective_zeeman(big_m, d, k_y, k_z)
    b_y = -2.0 * t0 * math.cos(k_x)
    b_z = 2.0 * t0 * math.sin(k_x) + m_eff
    e = math.hypot(b_y, b_z)
    return BlochPoint(k_x=k_x, k_y=k_y, k_z=k_z, b_y=b_y, b_z=b_z,
                      e_plus=e, e_minus=-e)


def band_energies_grid(k_x: float, k_y: np.ndarray, k_z: np.ndarray,
                       t0: float, big_m: float, d: float) -> np.ndarray:
    """Upper band E+ on a (k_y, k_z) mesh at fixed k_x."""
    ky, kz = np.meshgrid(k_y, k_z, indexing="ij")
    m_eff = big_m + 2.0 * d * (np.cos(ky) + np.cos(kz))
    b_y = -2.0 * t0 * math.cos(k_x)
    b_z = 2.0 * t0 * math.sin(k_x) + m_eff
    return np.hypot(b_y, b_z)


def winding_analytic(m_eff: float, t0: float) -> int:
    """Closed-form winding number: (sgn(m'+2t0) - sgn(m'-2t0)) / 2.

    1 exactly when |m'| < 2 t0, 0 when |m'| > 2 t0; the gap-closing values
    m' = +-2 t0 are rejected.
    """
    if m_eff == 2.0 * t0 or m_eff == -2.0 * t0 or abs(
            abs(m_eff) - 2.0 * t0) < 1e-14 * max(1.0, 2.0 * t0):
        raise GapClosedError("on nodal loop: |m'| = 2 t0, winding undefined")
    return 1 if abs(m_eff) < 2.0 * t0 else 0


@dataclass(frozen=True)
class WindingResult:
    nu: int
    raw: float
    min_gap: float


def winding_integral(k_y: float, k_z: float, t0: float, big_m: float,
                     d: float, n_kx: int | None = None,
                     min_gap: float | None = None) -> WindingResult:
    """Winding number by discretized integration around the k_x circle.

    Accumulates the turning angle of the unit vector (b_y, b_z), which is
    an exact multiple of 2*pi for any closed gapped path as long as no
    single step advances the angle by more than pi; the rounded integer and
    the raw accumulated value are both returned.  Orientation is fixed so
    the topological phase gives +1, matching the closed form.
    """
    if n_kx is None:
        n_kx = DEFAULTS["winding_n_kx"]
    if n_kx < 64:
        raise ValueError("n_kx must be >= 64")
    if min_gap is None:
        min_gap = DEFAULTS["winding_min_gap"] * t0
    m_eff = effective_zeeman(big_m, d, k_y, k_z)
    kx = np.linspace(-math.pi, math.pi, n_kx + 1)
    b_y = -2.0 * t0 * np.cos(kx)
    b_z = 2.0 * t0 * np.sin(kx) + m_eff
    gaps = np.hypot(b_y, b_z)
    gap = float(gaps.min())
    if gap < min_gap:
        raise GapClosedError(
            f"nodal line proximity: min gap {gap:.3e} below {min_gap:.3e}")
    angles = np.arctan2(b_z, b_y)
    steps = np.diff(angles)
    steps = (steps + math.pi) % (2.0 * math.pi) - math.pi
    if np.abs(steps).max() > 0.5 * math.pi:
        raise GapClosedError(
            "nodal line proximity: angle step exceeded pi/2; refine n_kx")
    raw = -float(steps.sum()) / (2.0 * math.pi)
    return WindingResult(nu=int(round(raw)), raw=raw, min_gap=gap)


def _loci_targets(t0: float):
    # E=0 requires k_x = +-pi/2 and m' = -+2 t0 (opposite signs pair up)
    return {"kx_plus": -2.0 * t0, "kx_minus": +2.0 * t0}


def nodal_loci(big_m: float, d: float, t0: float,
               resolution: int | None = None,
               refine_tol: float | None = None) -> dict:
    """Nodal-loop point sets in the k_x = +pi/2 and k_x = -pi/2 planes.

    Marching-squares level-set extraction of m'(k_y,k_z) = -+2 t0 on a
    uniform grid over [-pi, pi)^2, with every crossing refined along its
    grid edge by bisection so the returned points satisfy E = 0 to
    refine_tol * t0.  Empty arrays mean no loop in that plane.
    """
    if resolution is None:
        resolution = DEFAULTS["loci_grid"]
    if refine_tol is None:
        refine_tol = DEFAULTS["loci_refine_tol"]
    ks = np.linspace(-math.pi, math.pi, resolution + 1)
    ky, kz = np.meshgrid(ks, ks, indexing="ij")
    m_eff = big_m + 2.0 * d * (np.cos(ky) + np.cos(kz))
    out = {}
    for plane, target in _loci_targets(t0).items():
        f = m_eff - target
        points = []

        def refine(p_lo, p_hi, axis, other):
            fn = lambda u: (big_m + 2.0 * d * (
                (math.cos(u) + math.cos(other)) if axis == 0
                else (math.cos(other) + math.cos(u)))) - target
            lo, hi = p_lo, p_hi
            flo = fn(lo)
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                fm = fn(mid)
                if abs(fm) < refine_tol * t0:
                    return mid
                if (flo < 0) == (fm < 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            return 0.5 * (lo + hi)

        for i in range(resolution + 1):
            for j in range(resolution):
                # edges along k_z at fixed k_y, then transposed role below
                if f[i, j] == 0.0:
                    points.append((ks[i], ks[j]))
                if (f[i, j] < 0) != (f[i, j + 1] < 0):
                    kz_c = refine(ks[j], ks[j + 1], axis=1, other=ks[i])
                    points.append((ks[i], kz_c))
        for j in range(resolution + 1):
            for i in range(resolution):
                if (f[i, j] < 0) != (f[i + 1, j] < 0):
                    ky_c = refine(ks[i], ks[i + 1], axis=0, other=ks[j])
                    points.append((ky_c, ks[j]))
        out[plane] = (np.array(points, dtype=float)
                      if points else np.empty((0, 2)))
    return out


PHASE_LABELS = ("trivial-gapped", "one-loop-kx-plus", "one-loop-kx-minus",
                "two-loops", "nontrivial-gapped", "critical")


@dataclass(frozen=True)
class PhaseDiagramCell:
    big_m: float
    d: float
    label: str
    winding_map: np.ndarray
    k_grid: np.ndarray


def classify_phase(big_m: float, d: float, t0: float,
                   grid: int | None = None,
                   tol: float = 1e-12) -> PhaseDiagramCell:
    """Phase label at one (M, d) plus a winding map over (k_y, k_z).

    m' sweeps [M - 4d, M + 4d]; a loop lives in the k_x = +pi/2 plane when
    that range crosses -2 t0 and in the k_x = -pi/2 plane when it crosses
    +2 t0.  No crossing means a uniformly gapped plane, nontrivial when
    |m'| stays below 2 t0.  Exact window-boundary hits are labeled
    critical rather than folded into a neighbor.
    """
    if d < 0:
        raise ValueError("d must be >= 0")
    if grid is None:
        grid = DEFAULTS["phase_map_grid"]
    lo, hi = big_m - 4.0 * d, big_m + 4.0 * d
    scale = max(1.0, abs(t0))
    boundaries = (abs(lo + 2.0 * t0), abs(hi + 2.0 * t0),
                  abs(lo - 2.0 * t0), abs(hi - 2.0 * t0))
    if min(boundaries) <= tol * scale:
        label = "critical"
    else:
        plus_plane = lo < -2.0 * t0 < hi      # m' = -2 t0 reachable
        minus_plane = lo < 2.0 * t0 < hi      # m' = +2 t0 reachable
        if plus_plane and minus_plane:
            label = "two-loops"
        elif plus_plane:
            label = "one-loop-kx-plus"
        elif minus_plane:
            label = "one-loop-kx-minus"
        elif abs(lo) < 2.0 * t0 and abs(hi) < 2.0 * t0:
            label = "nontrivial-gapped"
        else:
            label = "trivial-gapped"
    ks = np.linspace(-math.pi, math.pi, grid)
    ky, kz = np.meshgrid(ks, ks, indexing="ij")
    m_eff = big_m + 2.0 * d * (np.cos(ky) + np.cos(kz))
    winding_map = (np.abs(m_eff) < 2.0 * t0).astype(int)
    return PhaseDiagramCell(big_m=big_m, d=d, label=label,
                            winding_map=winding_map, k_grid=ks)
