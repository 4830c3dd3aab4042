import math

import numpy as np
import pytest

from jclatt.coupler import (PHI0, FluxDrive, FluxTone, SquidCircuit,
                            coupler_coefficient, cross_coefficient_series,
                            default_circuit, flux_waveform, omega_for_hopping,
                            series_inductance_for, squid_inductance,
                            synthesize_flux_for_hopping, tone_amplitude)
from jclatt.model import DriveTone
from jclatt.units import mhz


@pytest.fixture(scope="module")
def circuit():
    return default_circuit()


class TestSquidInductance:
    def test_zero_flux(self, circuit):
        assert squid_inductance(0.0, circuit) == pytest.approx(
            PHI0 / (2.0 * circuit.i_c))

    def test_dc_bias_periodicity(self, circuit):
        # Phi_dc = 4 pi n'' phi0 is an integer number of periods
        assert squid_inductance(circuit.phi_dc, circuit) == pytest.approx(
            squid_inductance(0.0, circuit))

    def test_divergence_raised(self, circuit):
        with pytest.raises(ZeroDivisionError, match="diverges"):
            squid_inductance(math.pi * PHI0, circuit)

    def test_resonator_frequency(self, circuit):
        assert circuit.omega(0) / (2 * math.pi) == pytest.approx(6e9,
                                                                 rel=1e-6)

    def test_inconsistent_omega_rejected(self, circuit):
        with pytest.raises(ValueError, match="inconsistent"):
            SquidCircuit(i_c=circuit.i_c, l_series=circuit.l_series,
                         n_dc=1, res_inductance=circuit.res_inductance,
                         res_capacitance=circuit.res_capacitance,
                         res_omega=(1.0, 1.0))


class TestFluxWaveform:
    def test_no_tones_constant(self):
        drive = FluxDrive(tones=())
        assert flux_waveform(drive, 0.0) == pytest.approx(
            2.0 * math.pi * PHI0)
        assert flux_waveform(drive, 1e-9) == pytest.approx(
            2.0 * math.pi * PHI0)

    def test_trough_equals_static_value(self):
        w = 2 * math.pi * 1e8
        drive = FluxDrive(tones=(FluxTone(0.05, w, 0.0),))
        t_trough = math.pi / w  # cos = -1
        assert flux_waveform(drive, t_trough) == pytest.approx(
            2.0 * math.pi * PHI0, rel=1e-12)

    def test_periodicity(self):
        w = 2 * math.pi * 1e8
        drive = FluxDrive(tones=(FluxTone(0.03, w, 0.4),))
        t = np.linspace(0.0, 2e-8, 64)
        period = 2 * math.pi / w
        a = flux_waveform(drive, t)
        b = flux_waveform(drive, t + period)
        assert np.abs(a - b).max() < 1e-12 * PHI0

    def test_negative_amplitude_rejected(self):
        with pytest.raises(ValueError):
            FluxTone(-0.1, 1.0, 0.0)


class TestCouplerCoefficient:
    def test_static_drive_no_modulation(self, circuit):
        drive = FluxDrive(tones=())
        tuned = SquidCircuit(i_c=circuit.i_c,
                             l_series=series_inductance_for(circuit, drive),
                             n_dc=1, res_inductance=circuit.res_inductance,
                             res_capacitance=circuit.res_capacitance)
        times = np.linspace(0.0, 1e-8, 32)
        series = cross_coefficient_series(tuned, drive, times)
        assert np.abs(series).max() < 1e-6 * abs(
            tone_amplitude(circuit, 0.05))

    def test_amplitude_formula(self, circuit):
        # t0 = phi0 Omega sqrt(w w'/(L L')) / (8 I_c)
        omega_amp = 0.04
        expect = (PHI0 * omega_amp * circuit.coupling_prefactor()
                  / (8 * circuit.i_c))
        assert tone_amplitude(circuit, omega_amp) == pytest.approx(expect)
        assert omega_for_hopping(circuit, expect) == pytest.approx(omega_amp)

    def test_same_site_shift_reported(self, circuit):
        drive = FluxDrive(tones=(FluxTone(0.04, 2 * math.pi * 1e8, 0.0),))
        coeff = coupler_coefficient(circuit, drive, 1.3e-9)
        assert len(coeff.same_site) == 2
        # shift coefficient = omega/(2 L) * (L_S + L)
        phi = flux_waveform(drive, 1.3e-9)
        total = squid_inductance(circuit.phi_dc + phi,
                                 circuit) + circuit.l_series
        expect = circuit.omega(0) / (2 * circuit.res_inductance[0]) * total
        assert coeff.same_site[0] == pytest.approx(expect)


class TestSynthesis:
    def test_single_tone_round_trip(self, circuit):
        tone = DriveTone(amplitude=mhz(3.0), frequency=mhz(100.0),
                         phase=0.7, sign=1)
        syn = synthesize_flux_for_hopping([tone], circuit)
        assert syn.drive.tones[0].omega_amp <= 0.05
        rec = syn.report.tones[0]
        assert rec.amplitude_error <= 0.01
        assert rec.phase_error <= 1e-3
        assert syn.report.ok

    def test_two_tone_nodal_lines(self, circuit):
        tones = [DriveTone(mhz(3.0), mhz(100.0), -math.pi / 2, 1),
                 DriveTone(mhz(3.0), mhz(295.0), math.pi / 2, 1)]
        syn = synthesize_flux_for_hopping(tones, circuit)
        for rec in syn.report.tones:
            assert rec.amplitude_error <= 0.01
            assert rec.phase_error <= 1e-3
        assert syn.report.max_spurious_fraction < 0.05

    def test_inverse_of_amplitude_map(self, circuit):
        tone = DriveTone(amplitude=mhz(1.7), frequency=mhz(200.0),
                         phase=0.0, sign=1)
        syn = synthesize_flux_for_hopping([tone], circuit)
        back = tone_amplitude(syn.circuit, syn.drive.tones[0].omega_amp)
        assert back == pytest.approx(mhz(1.7) * 1e6, rel=1e-12)

    def test_zero_target_inductance(self, circuit):
        drive = FluxDrive(tones=())
        assert series_inductance_for(circuit, drive) == pytest.approx(
            PHI0 / (2 * circuit.i_c))

    def test_too_strong_rejected(self, circuit):
        tone = DriveTone(amplitude=mhz(3000.0), frequency=mhz(100.0),
                         phase=0.0, sign=1)
        with pytest.raises(ValueError, match="too strong"):
            synthesize_flux_for_hopping([tone], circuit)

    def test_ac_identity(self, circuit):
        # L_S(Phi_dc + Phi_ac) + L == -(phi0/2Ic) sum Omega cos(w t + p)
        tones = (FluxTone(0.03, 2 * math.pi * 1e8, 0.3),
                 FluxTone(0.02, 2 * math.pi * 3e8, -1.1))
        drive = FluxDrive(tones=tones)
        l_tot = series_inductance_for(circuit, drive)
        tuned = SquidCircuit(i_c=circuit.i_c, l_series=l_tot, n_dc=1,
                             res_inductance=circuit.res_inductance,
                             res_capacitance=circuit.res_capacitance)
        times = np.linspace(0.0, 2e-8, 97)
        phi = flux_waveform(drive, times)
        got = np.array([squid_inductance(tuned.phi_dc + p, tuned)
                        for p in phi]) + l_tot
        expect = -(PHI0 / (2 * circuit.i_c)) * sum(
            tn.omega_amp * np.cos(tn.frequency * times + tn.phase)
            for tn in tones)
        assert np.abs(got - expect).max() < 1e-12 * PHI0 / circuit.i_c
