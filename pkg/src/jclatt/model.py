"""Lattice definition, dressed (polariton) levels, and multi-tone drives.

A chain of resonator+transmon cells, alternating between an A type (odd
sites) and a B type (even sites).  Each cell's single-excitation
eigenstates |up> = (|0e> + |1g>)/sqrt(2) and |down> = (|0e> - |1g>)/sqrt(2)
at energies omega +/- g form a pseudo-spin-1/2.  Inter-cell photon hopping
J_l(t) is a sum of cosine tones, each addressing one pseudo-spin transition
by matching its energy interval.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .defaults import DEFAULTS
from .units import TWO_PI, mhz, to_mhz

SPIN_UP = "up"
SPIN_DOWN = "down"
SPINS = (SPIN_UP, SPIN_DOWN)
TRANSITIONS = (
    (SPIN_UP, SPIN_UP),
    (SPIN_DOWN, SPIN_DOWN),
    (SPIN_UP, SPIN_DOWN),
    (SPIN_DOWN, SPIN_UP),
)

# Photon amplitude of each dressed state: <0g| a |alpha> = dressed_parity/sqrt(2).
# Derived from |up> = (|0e> + |1g>)/sqrt(2), |down> = (|0e> - |1g>)/sqrt(2);
# the sign pattern is what makes spin-flip hopping elements negative.
_DRESSED_VEC = {SPIN_UP: np.array([1.0, 1.0]) / math.sqrt(2.0),
                SPIN_DOWN: np.array([1.0, -1.0]) / math.sqrt(2.0)}


def dressed_photon_amplitude(alpha: str) -> float:
    """<0g|a|alpha> for a single cell, computed from the dressed vectors."""
    # basis order (|0e>, |1g>); a annihilates the photon of the |1g> part only
    return float(_DRESSED_VEC[alpha][1])


@dataclass(frozen=True)
class UnitCellParams:
    """Bare frequency and JC coupling of one resonator+transmon cell (rad/us)."""

    omega: float
    g: float

    def __post_init__(self):
        if self.g <= 0:
            raise ValueError(f"JC coupling must be positive, got g={self.g}")
        ratio = self.g / self.omega
        if ratio >= DEFAULTS["g_over_omega_max"]:
            raise ValueError(
                f"g/omega = {ratio:.3f} is outside the JC regime (>= "
                f"{DEFAULTS['g_over_omega_max']})")
        if ratio > DEFAULTS["g_over_omega_warn"]:
            warnings.warn(
                f"g/omega = {ratio:.3f} is large; JC approximation degraded",
                stacklevel=2)

    @classmethod
    def from_mhz(cls, omega_mhz: float, g_mhz: float) -> "UnitCellParams":
        return cls(omega=mhz(omega_mhz), g=mhz(g_mhz))


@dataclass(frozen=True)
class DressedLevels:
    """Single-cell eigenenergies: ground 0, polaritons omega +/- g."""

    e_ground: float
    e_up: float
    e_down: float


def dressed_levels(cell: UnitCellParams) -> DressedLevels:
    """Lowest three JC eigenenergies of one cell: (0, omega+g, omega-g)."""
    return DressedLevels(e_ground=0.0, e_up=cell.omega + cell.g,
                         e_down=cell.omega - cell.g)


@dataclass(frozen=True)
class LatticeSpec:
    """Chain of n_cells alternating A/B cells (odd sites A, even sites B)."""

    n_cells: int
    cell_a: UnitCellParams
    cell_b: UnitCellParams

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("n_cells must be >= 1")

    def cell(self, site: int) -> UnitCellParams:
        """Cell parameters at 1-indexed site (odd -> A, even -> B)."""
        if not 1 <= site <= self.n_cells:
            raise ValueError(f"site {site} outside 1..{self.n_cells}")
        return self.cell_a if site % 2 == 1 else self.cell_b

    def level(self, site: int, alpha: str) -> float:
        lv = dressed_levels(self.cell(site))
        return lv.e_up if alpha == SPIN_UP else lv.e_down

    @property
    def n_links(self) -> int:
        return self.n_cells - 1


@dataclass(frozen=True)
class LinkIntervals:
    """Energy intervals |E_{l,a} - E_{l+1,a'}| and phase signs for one link."""

    link: int
    intervals: dict
    signs: dict
    degenerate: tuple


def hopping_intervals(lattice: LatticeSpec, link: int) -> LinkIntervals:
    """Four transition intervals across link l and their sign factors.

    sign = sgn(E_{l,alpha} - E_{l+1,alpha'}); an exactly degenerate pair is
    assigned sign +1 with a warning, since the phase-sign convention is
    undefined there.
    """
    if not 1 <= link <= lattice.n_links:
        raise ValueError(f"link {link} outside 1..{lattice.n_links}")
    intervals, signs, degenerate = {}, {}, []
    for alpha, alpha_p in TRANSITIONS:
        diff = lattice.level(link, alpha) - lattice.level(link + 1, alpha_p)
        intervals[(alpha, alpha_p)] = abs(diff)
        if diff == 0.0:
            degenerate.append((alpha, alpha_p))
            signs[(alpha, alpha_p)] = 1
        else:
            signs[(alpha, alpha_p)] = 1 if diff > 0 else -1
    if degenerate:
        warnings.warn(
            f"link {link}: degenerate hopping interval(s) {degenerate}; "
            "sign set to +1", stacklevel=2)
    return LinkIntervals(link=link, intervals=intervals, signs=signs,
                         degenerate=tuple(degenerate))


@dataclass(frozen=True)
class DriveTone:
    """One cosine tone of an inter-cell coupling.

    Contributes 4*amplitude*cos(frequency*t + sign*phase) to J_l(t); the
    stored amplitude is the effective hopping t0, the waveform prefactor is
    4*t0.
    """

    amplitude: float
    frequency: float
    phase: float
    sign: int = 1

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("tone amplitude must be >= 0")
        if self.frequency < 0:
            raise ValueError("tone frequency must be >= 0")
        if self.sign not in (1, -1):
            raise ValueError("tone sign must be +1 or -1")


@dataclass(frozen=True)
class DriveSchedule:
    """Per-link tone lists; link l couples sites l and l+1 (1-indexed)."""

    tones: tuple

    def __post_init__(self):
        for link_tones in self.tones:
            if len(link_tones) > 4:
                raise ValueError("a link carries at most 4 tones")

    @property
    def n_links(self) -> int:
        return len(self.tones)

    def link_tones(self, link: int):
        return self.tones[link - 1]


def drive_value(schedule: DriveSchedule, link: int, t) -> float:
    """J_l(t) = sum over tones of 4*t0*cos(w_d*t + sign*phase)."""
    t = np.asarray(t, dtype=float)
    total = np.zeros_like(t)
    for tone in schedule.link_tones(link):
        total = total + 4.0 * tone.amplitude * np.cos(
            tone.frequency * t + tone.sign * tone.phase)
    return float(total) if total.ndim == 0 else total


def validate_tone_separation(schedule: DriveSchedule,
                             factor: float | None = None) -> list:
    """Frequency-addressing check: tone spacings on each link must exceed
    factor * (largest tone amplitude on the link).  Returns violation
    strings (empty = pass)."""
    if factor is None:
        factor = DEFAULTS["tone_separation_factor"]
    violations = []
    for link in range(1, schedule.n_links + 1):
        tones = schedule.link_tones(link)
        if len(tones) < 2:
            continue
        t0_max = max(tone.amplitude for tone in tones)
        # separations of exactly factor x t0 are acceptable ("no less than")
        floor = factor * t0_max * (1.0 - 1e-12)
        for i in range(len(tones)):
            for j in range(i + 1, len(tones)):
                sep = abs(tones[i].frequency - tones[j].frequency)
                if sep < floor:
                    violations.append(
                        f"link {link}: tones at {to_mhz(tones[i].frequency):.4g} "
                        f"and {to_mhz(tones[j].frequency):.4g} MHz separated by "
                        f"{to_mhz(sep):.4g} MHz < {factor:g} x t0 = "
                        f"{to_mhz(factor * t0_max):.4g} MHz")
    return violations


def _tone_frequency(interval: float, spin_conserving: bool, m: float) -> float:
    # spin-flip tones are detuned by 2m to imprint the Zeeman splitting
    return interval if spin_conserving else interval - 2.0 * m


def four_tone_schedule(lattice: LatticeSpec, m: float, hoppings: dict,
                       check_separation: bool = True) -> DriveSchedule:
    """Drive schedule realizing a target rotating-frame hopping model.

    hoppings maps (alpha, alpha') -> (t0, phi) and requests the
    rotating-frame matrix element t0 * exp(i*phi) on |alpha>_l <alpha'|_{l+1}
    for every link, on top of a Zeeman splitting m.

    The waveform phase assigned to each tone folds in two conventions that
    the rotating-frame reduction produces: the resonant exponential keeps
    exp(-i * sgn * theta), and the dressed-state photon amplitudes
    contribute a parity factor (-1 for spin-flip transitions).  Tones that
    end up with identical (frequency, phase) on a link are merged; requests
    that collide at one frequency with inconsistent phases or amplitudes
    are rejected, since one physical tone cannot satisfy both.
    """
    links = []
    for link in range(1, lattice.n_links + 1):
        li = hopping_intervals(lattice, link)
        assigned = []
        for (alpha, alpha_p), (t0, phi) in hoppings.items():
            if t0 == 0.0:
                continue
            conserving = alpha == alpha_p
            freq = _tone_frequency(li.intervals[(alpha, alpha_p)],
                                   conserving, m)
            if freq <= 0:
                raise ValueError(
                    f"link {link} {alpha}->{alpha_p}: detuning 2m exceeds the "
                    "hopping interval; tone frequency would be non-positive")
            parity = (dressed_photon_amplitude(alpha)
                      * dressed_photon_amplitude(alpha_p))
            s = li.signs[(alpha, alpha_p)]
            # realized element is t0*sgn(parity)*exp(-i*s*theta); solve for
            # the waveform phase theta that makes it t0*exp(i*phi)
            theta = s * ((math.pi if parity < 0 else 0.0) - phi)
            assigned.append(DriveTone(amplitude=t0, frequency=freq,
                                      phase=_wrap_phase(theta / s), sign=s))
        links.append(tuple(_merge_tones(assigned, link)))
    schedule = DriveSchedule(tones=tuple(links))
    if check_separation:
        for msg in validate_tone_separation(schedule):
            warnings.warn(msg, stacklevel=2)
    return schedule


def _wrap_phase(phi: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.fmod(phi + math.pi, TWO_PI)
    if w <= 0:
        w += TWO_PI
    return w - math.pi


def _merge_tones(tones: list, link: int) -> list:
    merged: list[DriveTone] = []
    for tone in tones:
        for k, other in enumerate(merged):
            if abs(tone.frequency - other.frequency) < 1e-9 * max(
                    1.0, other.frequency):
                theta_a = _wrap_phase(tone.sign * tone.phase)
                theta_b = _wrap_phase(other.sign * other.phase)
                same_phase = abs(_wrap_phase(theta_a - theta_b)) < 1e-9
                same_amp = abs(tone.amplitude - other.amplitude) < 1e-12 * max(
                    1.0, other.amplitude)
                if not (same_phase and same_amp):
                    raise ValueError(
                        f"link {link}: transitions share the tone frequency "
                        f"{to_mhz(tone.frequency):.6g} MHz but require "
                        "inconsistent amplitude/phase; they cannot be "
                        "addressed by one tone")
                break
        else:
            merged.append(tone)
    return merged


def nodal_drive_schedule(lattice: LatticeSpec, t0: float,
                         m: float) -> DriveSchedule:
    """Two-tone-per-link schedule realizing the nodal chain.

    Requires the degenerate-interval lattice (equal cell frequencies,
    different couplings), where the four transitions collapse onto one
    spin-conserving and one spin-flip interval, so the target hoppings
    (+i t0 up-up, -i t0 down-down, +i t0 up-down, -i t0 down-up) are driven
    by two tones per link.
    """
    if abs(lattice.cell_a.omega - lattice.cell_b.omega) > 1e-9:
        raise ValueError("nodal drive needs equal A/B cell frequencies")
    if abs(lattice.cell_a.g - lattice.cell_b.g) < 1e-9:
        raise ValueError("nodal drive needs different A/B couplings")
    half_pi = math.pi / 2.0
    targets = {
        (SPIN_UP, SPIN_UP): (t0, half_pi),
        (SPIN_DOWN, SPIN_DOWN): (t0, -half_pi),
        (SPIN_UP, SPIN_DOWN): (t0, half_pi),
        (SPIN_DOWN, SPIN_UP): (t0, -half_pi),
    }
    schedule = four_tone_schedule(lattice, m, targets)
    for link in range(1, schedule.n_links + 1):
        if len(schedule.link_tones(link)) != 2:
            raise RuntimeError("nodal schedule did not reduce to two tones")
    return schedule


def rabi_schedule(lattice: LatticeSpec, link: int, transition: tuple,
                  t0: float, m: float = 0.0) -> DriveSchedule:
    """Single resonant tone on one link addressing one transition."""
    if transition not in TRANSITIONS:
        raise ValueError(f"unknown transition {transition}")
    li = hopping_intervals(lattice, link)
    links = []
    for lk in range(1, lattice.n_links + 1):
        if lk != link:
            links.append(())
            continue
        alpha, alpha_p = transition
        conserving = alpha == alpha_p
        freq = _tone_frequency(li.intervals[transition], conserving, m)
        parity = (dressed_photon_amplitude(alpha)
                  * dressed_photon_amplitude(alpha_p))
        s = li.signs[transition]
        theta = s * ((math.pi if parity < 0 else 0.0) - 0.0)
        links.append((DriveTone(amplitude=t0, frequency=freq,
                                phase=_wrap_phase(theta / s), sign=s),))
    return DriveSchedule(tones=tuple(links))


# ---------------------------------------------------------------------------
# JSON (de)serialization; file values are plain MHz, not angular.

def lattice_to_dict(lattice: LatticeSpec) -> dict:
    return {
        "n_cells": lattice.n_cells,
        "cell_a": {"omega_mhz": to_mhz(lattice.cell_a.omega),
                   "g_mhz": to_mhz(lattice.cell_a.g)},
        "cell_b": {"omega_mhz": to_mhz(lattice.cell_b.omega),
                   "g_mhz": to_mhz(lattice.cell_b.g)},
    }


def lattice_from_dict(data: dict) -> LatticeSpec:
    return LatticeSpec(
        n_cells=int(data["n_cells"]),
        cell_a=UnitCellParams.from_mhz(data["cell_a"]["omega_mhz"],
                                       data["cell_a"]["g_mhz"]),
        cell_b=UnitCellParams.from_mhz(data["cell_b"]["omega_mhz"],
                                       data["cell_b"]["g_mhz"]),
    )


def schedule_to_dict(schedule: DriveSchedule) -> dict:
    return {"links": [[{"t0_mhz": to_mhz(tone.amplitude),
                        "frequency_mhz": to_mhz(tone.frequency),
                        "phase_rad": tone.phase,
                        "sign": tone.sign}
                       for tone in link] for link in schedule.tones]}


def schedule_from_dict(data: dict) -> DriveSchedule:
    return DriveSchedule(tones=tuple(
        tuple(DriveTone(amplitude=mhz(t["t0_mhz"]),
                        frequency=mhz(t["frequency_mhz"]),
                        phase=float(t["phase_rad"]),
                        sign=int(t["sign"])) for t in link)
        for link in data["links"]))
