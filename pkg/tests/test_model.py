import json
import math

import numpy as np
import pytest

from jclatt.model import (SPIN_DOWN, SPIN_UP, DriveSchedule, DriveTone,
                          LatticeSpec, UnitCellParams, dressed_levels,
                          dressed_photon_amplitude, drive_value,
                          four_tone_schedule, hopping_intervals,
                          nodal_drive_schedule, rabi_schedule,
                          schedule_from_dict, schedule_to_dict,
                          validate_tone_separation)
from jclatt.units import TWO_PI, mhz, to_mhz

from conftest import nodal_lattice


class TestUnitCell:
    def test_dressed_levels_reference_values(self):
        cell = UnitCellParams.from_mhz(6000.0, 300.0)
        lv = dressed_levels(cell)
        assert lv.e_ground == 0.0
        assert lv.e_up == pytest.approx(mhz(6300.0), rel=1e-14)
        assert lv.e_down == pytest.approx(mhz(5700.0), rel=1e-14)

    def test_dressed_levels_direct_formula(self):
        lv = dressed_levels(UnitCellParams.from_mhz(6000.0, 200.0))
        assert to_mhz(lv.e_up) == pytest.approx(6200.0, abs=1e-9)

    def test_degenerate_limit_small_g(self):
        # splitting closes linearly as g -> 0 (floating cancellation limits
        # how small g can be probed against omega ~ 2 pi x 6000)
        lv = dressed_levels(UnitCellParams.from_mhz(6000.0, 1e-3))
        assert lv.e_up - lv.e_down == pytest.approx(2.0 * mhz(1e-3),
                                                    rel=1e-8)

    def test_zero_coupling_rejected(self):
        with pytest.raises(ValueError):
            UnitCellParams(omega=mhz(6000.0), g=0.0)

    def test_jc_regime_enforced(self):
        with pytest.raises(ValueError):
            UnitCellParams.from_mhz(6000.0, 1300.0)

    def test_jc_regime_warning(self):
        with pytest.warns(UserWarning):
            UnitCellParams.from_mhz(6000.0, 700.0)


class TestLattice:
    def test_alternating_assignment(self, ab_lattice):
        assert ab_lattice.cell(1) is ab_lattice.cell_a
        assert ab_lattice.cell(2) is ab_lattice.cell_b
        lat = LatticeSpec(5, ab_lattice.cell_a, ab_lattice.cell_b)
        assert lat.cell(3) is lat.cell_a
        assert lat.cell(4) is lat.cell_b

    def test_single_cell_allowed(self, ab_lattice):
        lat = LatticeSpec(1, ab_lattice.cell_a, ab_lattice.cell_b)
        assert lat.n_links == 0


class TestHoppingIntervals:
    def test_reference_set(self, ab_lattice):
        li = hopping_intervals(ab_lattice, 1)
        got = sorted(to_mhz(v) for v in li.intervals.values())
        assert got == pytest.approx([220.0, 320.0, 380.0, 920.0], abs=1e-9)

    def test_identical_cells_pattern(self):
        cell = UnitCellParams.from_mhz(6000.0, 300.0)
        lat = LatticeSpec(2, cell, cell)
        with pytest.warns(UserWarning, match="degenerate"):
            li = hopping_intervals(lat, 1)
        vals = sorted(to_mhz(v) for v in li.intervals.values())
        assert vals == pytest.approx([0.0, 0.0, 600.0, 600.0], abs=1e-9)
        assert li.signs[(SPIN_UP, SPIN_UP)] == 1
        assert li.signs[(SPIN_DOWN, SPIN_DOWN)] == 1
        assert set(li.degenerate) == {(SPIN_UP, SPIN_UP),
                                      (SPIN_DOWN, SPIN_DOWN)}

    def test_nodal_set_collapses_to_two_intervals(self):
        li = hopping_intervals(nodal_lattice(2), 1)
        assert to_mhz(li.intervals[(SPIN_UP, SPIN_UP)]) == pytest.approx(100.0)
        assert to_mhz(li.intervals[(SPIN_DOWN, SPIN_DOWN)]) == pytest.approx(100.0)
        assert to_mhz(li.intervals[(SPIN_UP, SPIN_DOWN)]) == pytest.approx(300.0)
        assert to_mhz(li.intervals[(SPIN_DOWN, SPIN_UP)]) == pytest.approx(300.0)

    def test_interval_identity_against_levels(self, ab_lattice):
        # independent recomputation from the dressed levels
        li = hopping_intervals(ab_lattice, 1)
        lv1 = dressed_levels(ab_lattice.cell(1))
        lv2 = dressed_levels(ab_lattice.cell(2))
        key = {SPIN_UP: "e_up", SPIN_DOWN: "e_down"}
        for (a, b), val in li.intervals.items():
            expect = abs(getattr(lv1, key[a]) - getattr(lv2, key[b]))
            assert val == pytest.approx(expect, rel=1e-14)


class TestDriveValue:
    def test_quarter_phase_zero(self):
        sched = DriveSchedule(tones=((DriveTone(1.0, 10.0, math.pi / 2, 1),),))
        assert drive_value(sched, 1, 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_zero_phase_prefactor(self):
        for sign in (1, -1):
            sched = DriveSchedule(tones=((DriveTone(2.5, 10.0, 0.0, sign),),))
            assert drive_value(sched, 1, 0.0) == pytest.approx(10.0)

    def test_nodal_schedule_starts_at_zero(self, t0):
        sched = nodal_drive_schedule(nodal_lattice(4), t0, mhz(2.0))
        for link in (1, 2, 3):
            assert drive_value(sched, link, 0.0) == pytest.approx(0.0,
                                                                  abs=1e-9)

    def test_periodicity_commensurate(self):
        sched = DriveSchedule(tones=((DriveTone(1.0, TWO_PI * 100.0, 0.3, 1),
                                      DriveTone(0.5, TWO_PI * 40.0, -1.0, -1)),))
        period = 1.0 / 20.0  # gcd(100, 40) = 20 MHz
        t = np.linspace(0.0, 0.05, 400)
        a = drive_value(sched, 1, t)
        b = drive_value(sched, 1, t + period)
        assert np.abs(a - b).max() < 1e-12 * np.abs(a).max()


class TestScheduleBuilders:
    def test_nodal_two_tones_per_link(self, t0):
        sched = nodal_drive_schedule(nodal_lattice(6), t0, mhz(2.473))
        for link in range(1, 6):
            tones = sched.link_tones(link)
            assert len(tones) == 2
            freqs = sorted(to_mhz(tn.frequency) for tn in tones)
            assert freqs[0] == pytest.approx(100.0)
            assert freqs[1] == pytest.approx(300.0 - 2 * 2.473)

    def test_nodal_requires_degenerate_lattice(self, ab_lattice, t0):
        with pytest.raises(ValueError, match="equal A/B cell frequencies"):
            nodal_drive_schedule(ab_lattice, t0, 0.0)

    def test_four_tone_counts(self, ab_lattice, t0):
        hoppings = {k: (t0, 0.0) for k in
                    ((SPIN_UP, SPIN_UP), (SPIN_DOWN, SPIN_DOWN),
                     (SPIN_UP, SPIN_DOWN), (SPIN_DOWN, SPIN_UP))}
        sched = four_tone_schedule(ab_lattice, 0.0, hoppings)
        assert len(sched.link_tones(1)) == 4

    def test_incompatible_shared_tone_rejected(self, t0):
        # on the degenerate lattice up-up and down-down share a frequency;
        # requesting inconsistent phases cannot be realized by one tone
        hoppings = {(SPIN_UP, SPIN_UP): (t0, 0.3),
                    (SPIN_DOWN, SPIN_DOWN): (t0, 0.1)}
        with pytest.raises(ValueError, match="one tone"):
            four_tone_schedule(nodal_lattice(2), 0.0, hoppings)

    def test_rabi_schedule_single_tone(self, ab_lattice, t0):
        sched = rabi_schedule(ab_lattice, 1, (SPIN_UP, SPIN_DOWN), t0)
        assert len(sched.link_tones(1)) == 1
        assert to_mhz(sched.link_tones(1)[0].frequency) == pytest.approx(920.0)

    def test_detuning_shifts_flip_tones_only(self, ab_lattice, t0):
        m = mhz(5.0)
        sched = rabi_schedule(ab_lattice, 1, (SPIN_UP, SPIN_DOWN), t0, m)
        assert to_mhz(sched.link_tones(1)[0].frequency) == pytest.approx(910.0)
        sched2 = rabi_schedule(ab_lattice, 1, (SPIN_UP, SPIN_UP), t0, m)
        assert to_mhz(sched2.link_tones(1)[0].frequency) == pytest.approx(380.0)


class TestValidation:
    def test_tone_separation_violation_named(self):
        t0 = mhz(3.0)
        sched = DriveSchedule(tones=((DriveTone(t0, mhz(100.0), 0.0, 1),
                                      DriveTone(t0, mhz(100.0) + 5 * t0,
                                                0.0, 1)),))
        msgs = validate_tone_separation(sched)
        assert len(msgs) == 1 and "link 1" in msgs[0]

    def test_max_four_tones(self):
        tones = tuple(DriveTone(1.0, 10.0 * (k + 1), 0.0, 1)
                      for k in range(5))
        with pytest.raises(ValueError, match="at most 4"):
            DriveSchedule(tones=(tones,))

    def test_dressed_parity_signs(self):
        assert dressed_photon_amplitude(SPIN_UP) == pytest.approx(
            1 / math.sqrt(2))
        assert dressed_photon_amplitude(SPIN_DOWN) == pytest.approx(
            -1 / math.sqrt(2))


class TestSerialization:
    def test_schedule_round_trip(self, ab_lattice, t0):
        sched = rabi_schedule(ab_lattice, 1, (SPIN_DOWN, SPIN_UP), t0,
                              mhz(1.5))
        data = json.loads(json.dumps(schedule_to_dict(sched)))
        back = schedule_from_dict(data)
        for link in range(1, sched.n_links + 1):
            for a, b in zip(sched.link_tones(link), back.link_tones(link)):
                assert a.amplitude == pytest.approx(b.amplitude, rel=1e-12)
                assert a.frequency == pytest.approx(b.frequency, rel=1e-12)
                assert a.phase == pytest.approx(b.phase)
                assert a.sign == b.sign
