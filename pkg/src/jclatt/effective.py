"""Rotating-frame effective spin-1/2 lattice models.

In the frame rotating with every cell's dressed energies plus a
spin-dependent offset m, the resonantly driven lattice reduces to a
tight-binding chain: a Zeeman term m S^z per site plus one complex hopping
amplitude per transition per link.  The chain ordering is site-major,
spin-minor: index(l, up) = 2(l-1), index(l, down) = 2(l-1)+1.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import polariton_amplitudes
from .model import (SPIN_DOWN, SPIN_UP, TRANSITIONS, DriveSchedule,
                    LatticeSpec, dressed_photon_amplitude)
from .units import to_mhz

_SPIN_INDEX = {SPIN_UP: 0, SPIN_DOWN: 1}
_SPIN_SIGN = {SPIN_UP: 1.0, SPIN_DOWN: -1.0}


@dataclass(frozen=True)
class EffectiveLatticeParams:
    """Zeeman energy and per-link hopping table of the effective chain.

    hoppings is a tuple (one entry per link) of dicts mapping
    (alpha, alpha') -> (amplitude, phase); the requested matrix element is
    amplitude * exp(i*phase) on |alpha>_l <alpha'|_{l+1}.
    """

    n_cells: int
    zeeman: float
    hoppings: tuple

    def __post_init__(self):
        if len(self.hoppings) != self.n_cells - 1:
            raise ValueError("need one hopping map per link")
        for table in self.hoppings:
            for (amp, phase) in table.values():
                if amp < 0:
                    raise ValueError("hopping amplitudes must be >= 0")
                if not -math.pi < phase <= math.pi + 1e-12:
                    raise ValueError("phases must lie in (-pi, pi]")

    @classmethod
    def uniform(cls, n_cells: int, zeeman: float,
                table: dict) -> "EffectiveLatticeParams":
        return cls(n_cells=n_cells, zeeman=zeeman,
                   hoppings=tuple(dict(table) for _ in range(n_cells - 1)))


def build_effective_hamiltonian(params: EffectiveLatticeParams) -> np.ndarray:
    """Dense 2N x 2N Hermitian matrix of the effective chain."""
    n = params.n_cells
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    for l in range(n):
        h[2 * l, 2 * l] = params.zeeman
        h[2 * l + 1, 2 * l + 1] = -params.zeeman
    for l, table in enumerate(params.hoppings):
        for (alpha, alpha_p), (amp, phase) in table.items():
            i = 2 * l + _SPIN_INDEX[alpha]
            j = 2 * (l + 1) + _SPIN_INDEX[alpha_p]
            h[i, j] += amp * cmath.exp(1j * phase)
            h[j, i] += amp * cmath.exp(-1j * phase)
    return h


@dataclass(frozen=True)
class NodalLoopParams:
    """Chain with on-site m' S^z and +-i t0_eff hoppings.

    m' may be given directly or derived from the synthetic momenta:
    m' = M + 2 d (cos k_y + cos k_z).
    """

    n_cells: int
    t0_eff: float
    m_eff: float

    def __post_init__(self):
        if self.t0_eff <= 0:
            raise ValueError("t0_eff must be positive")

    @classmethod
    def from_momentum(cls, n_cells: int, t0_eff: float, big_m: float,
                      d: float, k_y: float, k_z: float) -> "NodalLoopParams":
        return cls(n_cells=n_cells, t0_eff=t0_eff,
                   m_eff=effective_zeeman(big_m, d, k_y, k_z))


def effective_zeeman(big_m: float, d: float, k_y: float, k_z: float) -> float:
    """m'(k_y, k_z) = M + 2 d (cos k_y + cos k_z)."""
    return big_m + 2.0 * d * (math.cos(k_y) + math.cos(k_z))


def build_nodal_chain(params: NodalLoopParams) -> np.ndarray:
    """2N x 2N chain: on-site m' S^z; link blocks
    [[+i, +i], [-i, -i]] * t0_eff (rows: site-l spin, cols: site-(l+1) spin).
    """
    n, t0, m = params.n_cells, params.t0_eff, params.m_eff
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    block = 1j * t0 * np.array([[1.0, 1.0], [-1.0, -1.0]])
    for l in range(n):
        h[2 * l, 2 * l] = m
        h[2 * l + 1, 2 * l + 1] = -m
    for l in range(n - 1):
        h[2 * l:2 * l + 2, 2 * l + 2:2 * l + 4] = block
        h[2 * l + 2:2 * l + 4, 2 * l:2 * l + 2] = block.conj().T
    return h


def nodal_effective_params(params: NodalLoopParams) -> EffectiveLatticeParams:
    """Gauge-equivalent uniform-phase parameterization of the nodal chain.

    Conjugating the nodal chain with V = sum_l (-i)^(l-1) I_l turns the
    +-i hoppings into the real pattern -t (up,up), -t (up,down),
    +t (down,up), +t (down,down).
    """
    t0 = params.t0_eff
    table = {
        (SPIN_UP, SPIN_UP): (t0, math.pi),
        (SPIN_UP, SPIN_DOWN): (t0, math.pi),
        (SPIN_DOWN, SPIN_UP): (t0, 0.0),
        (SPIN_DOWN, SPIN_DOWN): (t0, 0.0),
    }
    return EffectiveLatticeParams.uniform(params.n_cells, params.m_eff, table)


def gauge_matrix(n_cells: int) -> np.ndarray:
    """Diagonal of V = sum_l (-i)^(l-1) I_l in the 2N polariton ordering."""
    phases = (-1j) ** np.arange(n_cells)
    return np.repeat(phases, 2)


def gauge_transform(obj: np.ndarray, direction: str = "to_nodal") -> np.ndarray:
    """Apply the site-phase gauge V to a 2N state or 2N x 2N operator.

    "to_nodal" maps an operator H to V^+ H V and a state psi to V^+ psi;
    "from_nodal" applies the inverse.  Site-local spin operators commute
    with V and are unchanged.
    """
    obj = np.asarray(obj)
    if obj.shape[0] % 2:
        raise ValueError("dimension must be 2*n_cells")
    v = gauge_matrix(obj.shape[0] // 2)
    if direction == "from_nodal":
        v = v.conj()
    if obj.ndim == 1:
        return v.conj() * obj
    if obj.ndim == 2 and obj.shape[0] == obj.shape[1]:
        return (v.conj()[:, None] * obj) * v[None, :]
    raise ValueError("expected a 2N vector or 2N x 2N matrix")


def effective_params_from_schedule(lattice: LatticeSpec,
                                   schedule: DriveSchedule, m: float,
                                   freq_tol: float = 1e-6
                                   ) -> EffectiveLatticeParams:
    """Rotating-frame hopping model realized by a drive schedule.

    For each link and transition, the rotating rate of
    |alpha>_l <alpha'|_{l+1} is Delta = (E_{l,a} - m s_a) -
    (E_{l+1,a'} - m s_a'); a tone at |Delta| survives the rotating-wave
    average and contributes t0 * parity * exp(-i sgn(Delta) theta), where
    theta is the tone's waveform phase and parity is the product of
    dressed-state photon amplitudes (negative for spin flips).  All other
    tones are dropped.
    """
    if schedule.n_links != lattice.n_links:
        raise ValueError("schedule link count does not match the lattice")
    hoppings = []
    for link in range(1, lattice.n_links + 1):
        table = {}
        for alpha, alpha_p in TRANSITIONS:
            delta = ((lattice.level(link, alpha) - m * _SPIN_SIGN[alpha])
                     - (lattice.level(link + 1, alpha_p)
                        - m * _SPIN_SIGN[alpha_p]))
            if delta == 0.0:
                continue
            parity = (dressed_photon_amplitude(alpha)
                      * dressed_photon_amplitude(alpha_p))
            coeff = 0.0 + 0.0j
            for tone in schedule.link_tones(link):
                if abs(tone.frequency - abs(delta)) <= freq_tol:
                    theta = tone.sign * tone.phase
                    coeff += (tone.amplitude * math.copysign(1.0, parity)
                              * cmath.exp(-1j * math.copysign(1.0, delta)
                                          * theta))
            if coeff != 0:
                table[(alpha, alpha_p)] = (abs(coeff),
                                           _phase_in_range(cmath.phase(coeff)))
        hoppings.append(table)
    return EffectiveLatticeParams(n_cells=lattice.n_cells, zeeman=m,
                                  hoppings=tuple(hoppings))


def _phase_in_range(phi: float) -> float:
    if phi <= -math.pi:
        phi += 2.0 * math.pi
    return phi


def rotating_frame_map(lab_state: np.ndarray, lattice: LatticeSpec, basis,
                       m: float, t: float) -> np.ndarray:
    """Map a lab-frame state to rotating-frame polariton amplitudes.

    Projects onto the single-excitation polariton sector and multiplies the
    |alpha>_l amplitude by exp(+i (E_{l,alpha} -+ m) t) (minus for up, plus
    for down).  Norm equals the single-excitation-sector weight.
    """
    amps = polariton_amplitudes(basis, lab_state)
    out = np.empty_like(amps)
    for l in range(lattice.n_cells):
        e_up = lattice.level(l + 1, SPIN_UP)
        e_down = lattice.level(l + 1, SPIN_DOWN)
        out[l, 0] = amps[l, 0] * cmath.exp(1j * (e_up - m) * t)
        out[l, 1] = amps[l, 1] * cmath.exp(1j * (e_down + m) * t)
    return out


def effective_params_to_dict(params: EffectiveLatticeParams) -> dict:
    """JSON-serializable form (frequencies in MHz, phases in rad)."""
    return {
        "n_cells": params.n_cells,
        "zeeman_mhz": to_mhz(params.zeeman),
        "links": [[{"from": a, "to": b, "t0_mhz": to_mhz(amp),
                    "phase_rad": phase}
                   for (a, b), (amp, phase) in sorted(table.items())]
                  for table in params.hoppings],
    }


def effective_params_from_dict(data: dict) -> EffectiveLatticeParams:
    from .units import mhz
    hoppings = tuple(
        {(e["from"], e["to"]): (mhz(e["t0_mhz"]), float(e["phase_rad"]))
         for e in link}
        for link in data["links"])
    return EffectiveLatticeParams(n_cells=int(data["n_cells"]),
                                  zeeman=mhz(float(data["zeeman_mhz"])),
                                  hoppings=hoppings)


def write_matrix_csv(matrix: np.ndarray, path) -> None:
    """Dense complex matrix as text: one row per entry, re/im pair."""
    m = np.asarray(matrix)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("row,col,re,im\n")
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                fh.write(f"{i},{j},{float(m[i, j].real)!r},"
                         f"{float(m[i, j].imag)!r}\n")


def read_matrix_csv(path) -> np.ndarray:
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        assert header.strip() == "row,col,re,im"
        for line in fh:
            i, j, re_s, im_s = line.strip().split(",")
            rows.append((int(i), int(j), float(re_s), float(im_s)))
    dim = max(r[0] for r in rows) + 1
    out = np.zeros((dim, max(r[1] for r in rows) + 1), dtype=complex)
    for i, j, re_v, im_v in rows:
        out[i, j] = re_v + 1j * im_v
    return out


@dataclass
class RwaReport:
    ok: bool
    violations: list
    n_checks: int


def validate_rwa(lattice: LatticeSpec, schedule: DriveSchedule,
                 m: float = 0.0, min_ratio: float = 20.0,
                 freq_tol: float = 1e-6) -> RwaReport:
    """Frequency-addressing validity report.

    Checks, per link: every tone frequency and every pairwise tone
    difference is at least min_ratio times the largest tone amplitude, and
    no tone sits in the danger zone of an unintended transition (detuned by
    less than min_ratio * t0 without being resonant).
    """
    violations = []
    checks = 0
    for link in range(1, schedule.n_links + 1):
        tones = schedule.link_tones(link)
        if not tones:
            continue
        t0_max = max(tone.amplitude for tone in tones)
        # "no less than" the ratio: the boundary case passes, so back the
        # floor off by a few ulps
        floor = min_ratio * t0_max * (1.0 - 1e-12)
        for k, tone in enumerate(tones):
            checks += 1
            if tone.frequency < floor:
                violations.append(
                    f"link {link} tone {k}: frequency "
                    f"{to_mhz(tone.frequency):.4g} MHz below "
                    f"{min_ratio:g} x t0")
            for k2 in range(k + 1, len(tones)):
                checks += 1
                sep = abs(tone.frequency - tones[k2].frequency)
                if sep < floor:
                    violations.append(
                        f"link {link}: tones {k} and {k2} separated by "
                        f"{to_mhz(sep):.4g} MHz < {min_ratio:g} x t0")
        # crosstalk with unintended transitions of the same link
        for alpha, alpha_p in TRANSITIONS:
            delta = abs((lattice.level(link, alpha) - m * _SPIN_SIGN[alpha])
                        - (lattice.level(link + 1, alpha_p)
                           - m * _SPIN_SIGN[alpha_p]))
            for k, tone in enumerate(tones):
                checks += 1
                detuning = abs(tone.frequency - delta)
                if detuning <= freq_tol:
                    continue  # resonant by design
                if detuning < floor:
                    violations.append(
                        f"link {link} tone {k}: detuned by only "
                        f"{to_mhz(detuning):.4g} MHz from the "
                        f"{alpha}->{alpha_p} transition")
    return RwaReport(ok=not violations, violations=violations,
                     n_checks=checks)
