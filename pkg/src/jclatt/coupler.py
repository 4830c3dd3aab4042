"""SQUID + series-inductor coupler: flux waveforms realizing multi-tone
photon hopping.

The junction pair acts as a flux-tunable inductance
L_S(Phi) = phi0 / (2 I_c cos(Phi / 2 phi0)); with the dc bias at an
integer number of flux quanta and the ac waveform

    Phi_ac(t) = 2 phi0 arccos[ -1 / (1 + sum_j Omega_j (cos(w_j t + p_j) + 1)) ]

the combination L_S + L collapses to a pure multi-cosine,
-(phi0 / 2 I_c) sum_j Omega_j cos(w_j t + p_j), so the cross-coupling of
the two resonator end currents carries exactly one spectral line per
drive tone with amplitude 4 t0_j set by

    t0_j = phi0 Omega_j sqrt(w_l w_{l+1} / (L_l L_{l+1})) / (8 I_c).

This module works in SI units (rad/s, H, F, A, Wb); the lattice layer's
rad/us amplitudes are converted at the interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

# reduced flux quantum hbar/(2e), in Wb
PHI0 = 1.054571817e-34 / (2.0 * 1.602176634e-19)

RAD_PER_US_TO_RAD_PER_S = 1e6


@dataclass(frozen=True)
class SquidCircuit:
    """Coupler circuit between two neighbouring resonators.

    i_c: junction critical current (A); l_series: series inductor (H);
    n_dc: dc flux bias in units of 4 pi phi0 (integer, keeps the squid at
    an effective zero-flux point); res_inductance / res_capacitance: total
    (L, C) of the resonators on each side (H, F); mode frequency is
    omega = pi / sqrt(L C).
    """

    i_c: float
    l_series: float
    n_dc: int
    res_inductance: tuple
    res_capacitance: tuple
    res_omega: tuple | None = None

    def __post_init__(self):
        if self.i_c <= 0:
            raise ValueError("critical current must be positive")
        if self.l_series <= 0:
            raise ValueError("series inductance must be positive")
        if self.n_dc < 1 or int(self.n_dc) != self.n_dc:
            raise ValueError("n_dc must be a positive integer")
        if self.res_omega is not None:
            for side in (0, 1):
                expected = self.omega(side)
                if abs(self.res_omega[side] - expected) > 1e-10 * expected:
                    raise ValueError(
                        f"resonator omega[{side}] inconsistent with L, C: "
                        f"{self.res_omega[side]:.6e} vs {expected:.6e}")

    @property
    def phi_dc(self) -> float:
        return 4.0 * math.pi * self.n_dc * PHI0

    def omega(self, side: int) -> float:
        """Mode angular frequency pi/sqrt(LC) of side 0 (left) or 1."""
        return math.pi / math.sqrt(self.res_inductance[side]
                                   * self.res_capacitance[side])

    def coupling_prefactor(self) -> float:
        """sqrt(w_l w_{l+1} / (L_l L_{l+1}))."""
        return math.sqrt(self.omega(0) * self.omega(1)
                         / (self.res_inductance[0] * self.res_inductance[1]))


def default_circuit(l_series: float | None = None) -> SquidCircuit:
    """Representative parameter set: 6 GHz resonators, I_c chosen so a
    3 MHz effective hopping needs Omega ~= 0.04.  These are inputs, not
    fitted values."""
    l_res = 2e-9
    omega = 2.0 * math.pi * 6e9
    c_res = math.pi ** 2 / (l_res * omega ** 2)
    if l_series is None:
        l_series = PHI0 / (2.0 * 1.65e-6)
    return SquidCircuit(i_c=1.65e-6, l_series=l_series, n_dc=1,
                        res_inductance=(l_res, l_res),
                        res_capacitance=(c_res, c_res))


@dataclass(frozen=True)
class FluxTone:
    """One tone of the ac flux drive: dimensionless amplitude Omega,
    angular frequency (rad/s), phase (rad)."""

    omega_amp: float
    frequency: float
    phase: float

    def __post_init__(self):
        if self.omega_amp < 0:
            raise ValueError("Omega must be >= 0")
        if self.frequency <= 0:
            raise ValueError("tone frequency must be positive")


@dataclass(frozen=True)
class FluxDrive:
    tones: tuple

    @property
    def omega_sum(self) -> float:
        return sum(t.omega_amp for t in self.tones)

    def ac_excursion_over_phi0(self) -> float:
        """Peak-to-peak span of Phi_ac in units of phi0.

        The synthesis waveform intentionally rides the arccos branch over
        an O(phi0) span even for weak tones; the quoted small-flux
        condition applies to the linearized dc-bias regime, so the span is
        reported rather than enforced.
        """
        lo = _arccos_arg(self, None)
        return 2.0 * (math.pi - math.acos(lo))


def _arccos_arg(drive: FluxDrive, t):
    """Argument of the arccos; at t=None returns its extreme value."""
    if t is None:
        den = 1.0 + 2.0 * drive.omega_sum
        return -1.0 / den
    den = 1.0
    for tone in drive.tones:
        den += tone.omega_amp * (math.cos(tone.frequency * t + tone.phase)
                                 + 1.0)
    return -1.0 / den


def squid_inductance(phi_ext: float, circuit: SquidCircuit) -> float:
    """L_S = phi0 / (2 I_c cos(phi_ext / 2 phi0)).

    Diverges at half-integer flux; inputs within 1e-6 (in units of the
    junction phase) of the divergence are rejected.
    """
    x = phi_ext / (2.0 * PHI0)
    distance = abs(math.remainder(x - 0.5 * math.pi, math.pi))
    if distance < 1e-6:
        raise ZeroDivisionError(
            "squid inductance diverges: flux within 1e-6 of a "
            "half-integer point")
    return PHI0 / (2.0 * circuit.i_c * math.cos(x))


def flux_waveform(drive: FluxDrive, t) -> float | np.ndarray:
    """Phi_ac(t) on the principal arccos branch [0, pi] (argument lies in
    [-1, 0), i.e. the branch segment (pi/2, pi])."""
    t_arr = np.asarray(t, dtype=float)
    den = np.ones_like(t_arr)
    for tone in drive.tones:
        den = den + tone.omega_amp * (np.cos(tone.frequency * t_arr
                                             + tone.phase) + 1.0)
    arg = -1.0 / den
    if np.any(arg < -1.0) or np.any(arg > 1.0):
        raise ValueError("arccos argument left [-1, 1]; invalid flux drive")
    out = 2.0 * PHI0 * np.arccos(arg)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CouplerCoefficient:
    """Instantaneous Eq.-level coefficients of the coupler energy."""

    cross: float          # of (a+_l + a_l)(a+_{l+1} + a_{l+1}), rad/s
    same_site: tuple      # frequency-shift coefficients of each (a+ + a)^2


def coupler_coefficient(circuit: SquidCircuit, drive: FluxDrive,
                        t) -> CouplerCoefficient:
    phi = flux_waveform(drive, t)
    l_s = squid_inductance(circuit.phi_dc + phi, circuit)
    total = l_s + circuit.l_series
    cross = -circuit.coupling_prefactor() * total
    same = tuple(circuit.omega(side) / (2.0 * circuit.res_inductance[side])
                 * total for side in (0, 1))
    return CouplerCoefficient(cross=cross, same_site=same)


def cross_coefficient_series(circuit: SquidCircuit, drive: FluxDrive,
                             times: np.ndarray) -> np.ndarray:
    phi = flux_waveform(drive, times)
    x = (circuit.phi_dc + phi) / (2.0 * PHI0)
    l_s = PHI0 / (2.0 * circuit.i_c * np.cos(x))
    return -circuit.coupling_prefactor() * (l_s + circuit.l_series)


def tone_amplitude(circuit: SquidCircuit, omega_amp: float) -> float:
    """Effective hopping t0_j (rad/s) produced by flux amplitude Omega_j."""
    return (PHI0 * omega_amp * circuit.coupling_prefactor()
            / (8.0 * circuit.i_c))


def omega_for_hopping(circuit: SquidCircuit, t0: float) -> float:
    """Flux amplitude Omega_j for a target hopping t0 (rad/s)."""
    return 8.0 * circuit.i_c * t0 / (PHI0 * circuit.coupling_prefactor())


def series_inductance_for(circuit: SquidCircuit,
                          drive: FluxDrive) -> float:
    """L = phi0 (sum Omega_j + 1) / (2 I_c): cancels the dc part of L_S."""
    return PHI0 * (drive.omega_sum + 1.0) / (2.0 * circuit.i_c)


@dataclass
class ToneRecovery:
    frequency: float
    target_amplitude: float
    recovered_amplitude: float
    amplitude_error: float
    target_phase: float
    recovered_phase: float
    phase_error: float


@dataclass
class RoundTripReport:
    tones: list
    max_spurious_fraction: float
    ac_excursion_over_phi0: float

    @property
    def ok(self) -> bool:
        return all(t.amplitude_error <= 0.01 for t in self.tones) and all(
            t.phase_error <= 1e-3 for t in self.tones)


def _common_period(freqs) -> float:
    """Common period of commensurate angular frequencies (rad/s)."""
    fracs = [Fraction(f / (2.0 * math.pi * 1e6)).limit_denominator(10 ** 6)
             for f in freqs]
    den = 1
    for fr in fracs:
        den = den * fr.denominator // math.gcd(den, fr.denominator)
    nums = [fr.numerator * (den // fr.denominator) for fr in fracs]
    g = 0
    for n in nums:
        g = math.gcd(g, n)
    base_mhz = Fraction(g, den)
    period_us = 1.0 / float(base_mhz)
    slowest = max(2.0 * math.pi / f for f in freqs) * 1e6
    if period_us > 1e4 * slowest:
        raise ValueError(
            "tone frequencies are too close to incommensurate for an "
            "integer-cycle spectrum; adjust them to rational MHz ratios")
    return period_us * 1e-6


def verify_roundtrip(circuit: SquidCircuit, drive: FluxDrive,
                     targets, n_samples: int = 1 << 14) -> RoundTripReport:
    """Spectral check that the coupler cross-coefficient reproduces the
    target tones.

    targets: list of (amplitude_4t0, frequency, phase) in rad/s units.
    Samples the coefficient over one exact common period and reads the
    FFT bins at the tone frequencies; every other bin is reported as
    spurious content relative to the largest target line.
    """
    period = _common_period([t[1] for t in targets])
    times = np.arange(n_samples) * (period / n_samples)
    series = cross_coefficient_series(circuit, drive, times)
    spec = np.fft.rfft(series) / n_samples
    spec[1:] *= 2.0
    freqs_bin = np.fft.rfftfreq(n_samples, d=period / n_samples)

    tones_out = []
    used_bins = {0}
    for (amp4, freq, phase) in targets:
        k = freq / (2.0 * math.pi) * period
        k_int = int(round(k))
        if abs(k - k_int) > 1e-6:
            raise ValueError("tone does not sit on an integer FFT bin")
        used_bins.add(k_int)
        line = spec[k_int]
        rec_amp = abs(line)
        rec_phase = math.atan2(line.imag, line.real)
        dphi = (rec_phase - phase + math.pi) % (2.0 * math.pi) - math.pi
        tones_out.append(ToneRecovery(
            frequency=freq, target_amplitude=amp4, recovered_amplitude=rec_amp,
            amplitude_error=abs(rec_amp - amp4) / amp4,
            target_phase=phase, recovered_phase=rec_phase,
            phase_error=abs(dphi)))
    ref = max(abs(t[0]) for t in targets)
    mask = np.ones(len(spec), dtype=bool)
    for k in used_bins:
        mask[k] = False
    spurious = float(np.abs(spec[mask]).max() / ref) if mask.any() else 0.0
    return RoundTripReport(tones=tones_out, max_spurious_fraction=spurious,
                           ac_excursion_over_phi0=drive.ac_excursion_over_phi0())


@dataclass
class FluxSynthesis:
    drive: FluxDrive
    l_series: float
    circuit: SquidCircuit
    report: RoundTripReport


def synthesize_flux_for_hopping(target_tones, circuit: SquidCircuit,
                                omega_amp_max: float = 1.0) -> FluxSynthesis:
    """Invert the tone map: target DriveTone list (rad/us units) ->
    flux drive and series inductance, verified by round trip.

    Each lattice tone 4 t0 cos(w t + s*phi) becomes a flux tone at the
    same frequency and literal phase with Omega_j set by the amplitude
    relation; L cancels the static part of L_S.  Amplitudes requiring
    Omega beyond omega_amp_max are rejected as too strong for the
    inductance model.
    """
    flux_tones = []
    targets = []
    for tone in target_tones:
        if tone.amplitude <= 0:
            raise ValueError("target tone amplitudes must be positive")
        t0_si = tone.amplitude * RAD_PER_US_TO_RAD_PER_S
        freq_si = tone.frequency * RAD_PER_US_TO_RAD_PER_S
        omega_amp = omega_for_hopping(circuit, t0_si)
        if omega_amp > omega_amp_max:
            raise ValueError(
                f"drive too strong: required Omega = {omega_amp:.3f} exceeds "
                f"{omega_amp_max:g}; the junction inductance model breaks "
                "down")
        theta = tone.sign * tone.phase
        flux_tones.append(FluxTone(omega_amp=omega_amp, frequency=freq_si,
                                   phase=theta))
        targets.append((4.0 * t0_si, freq_si, theta))
    drive = FluxDrive(tones=tuple(flux_tones))
    l_series = series_inductance_for(circuit, drive)
    tuned = SquidCircuit(i_c=circuit.i_c, l_series=l_series,
                         n_dc=circuit.n_dc,
                         res_inductance=circuit.res_inductance,
                         res_capacitance=circuit.res_capacitance)
    report = verify_roundtrip(tuned, drive, targets)
    return FluxSynthesis(drive=drive, l_series=l_series, circuit=tuned,
                         report=report)
