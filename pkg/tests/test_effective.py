import math

import numpy as np
import pytest

from jclatt.dynamics import (IntegratorConfig, evolve_effective, evolve_pure,
                             lab_system, single_excitation_state)
from jclatt.effective import (EffectiveLatticeParams, NodalLoopParams,
                              build_effective_hamiltonian, build_nodal_chain,
                              effective_params_from_schedule,
                              effective_zeeman, gauge_matrix, gauge_transform,
                              nodal_effective_params, rotating_frame_map,
                              validate_rwa)
from jclatt.edges import analytic_edge_states
from jclatt.model import (SPIN_DOWN, SPIN_UP, DriveSchedule, DriveTone,
                          four_tone_schedule, nodal_drive_schedule,
                          rabi_schedule)
from jclatt.units import mhz

from conftest import nodal_lattice

UP, DOWN = SPIN_UP, SPIN_DOWN
ALL = ((UP, UP), (DOWN, DOWN), (UP, DOWN), (DOWN, UP))


class TestEffectiveHamiltonian:
    def test_zeeman_only_spectrum(self):
        params = EffectiveLatticeParams.uniform(4, 2.5, {})
        evals = np.linalg.eigvalsh(build_effective_hamiltonian(params))
        assert np.allclose(sorted(evals), [-2.5] * 4 + [2.5] * 4)

    def test_single_hopping_two_cells(self):
        params = EffectiveLatticeParams.uniform(2, 0.0,
                                                {(UP, UP): (1.7, 0.0)})
        evals = np.linalg.eigvalsh(build_effective_hamiltonian(params))
        assert np.allclose(sorted(evals), [-1.7, 0.0, 0.0, 1.7])

    def test_nodal_chain_two_cells_flat(self):
        h = build_nodal_chain(NodalLoopParams(n_cells=2, t0_eff=1.3,
                                              m_eff=0.0))
        evals = np.linalg.eigvalsh(h)
        assert np.allclose(sorted(evals), [-2.6, 0.0, 0.0, 2.6])

    def test_chiral_symmetry_exact(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            n = rng.integers(2, 9)
            h = build_nodal_chain(NodalLoopParams(
                n_cells=int(n), t0_eff=float(rng.uniform(0.5, 3.0)),
                m_eff=float(rng.uniform(-4.0, 4.0))))
            x = np.kron(np.eye(n), np.array([[0, 1], [1, 0]]))
            assert np.abs(x @ h @ x + h).max() < 1e-14
            evals = np.sort(np.linalg.eigvalsh(h))
            assert np.abs(evals + evals[::-1]).max() < 1e-10

    def test_nodal_parameterization_matches_chain(self):
        nodal = NodalLoopParams(n_cells=5, t0_eff=1.1, m_eff=0.63)
        h_uniform = build_effective_hamiltonian(nodal_effective_params(nodal))
        h_nod = build_nodal_chain(nodal)
        assert np.abs(gauge_transform(h_uniform, "to_nodal")
                      - h_nod).max() < 1e-14

    def test_midgap_pair_in_topological_window(self):
        m_eff = effective_zeeman(0.0, 1.0, 0.0, 0.7 * math.pi)
        h = build_nodal_chain(NodalLoopParams(20, 1.0, m_eff))
        evals = np.sort(np.abs(np.linalg.eigvalsh(h)))
        assert evals[1] < 1e-3
        assert evals[2] > 1e-2


class TestGauge:
    def test_first_site_unchanged(self):
        v = gauge_matrix(4)
        assert v[0] == 1.0 and v[1] == 1.0

    def test_unitary(self):
        v = gauge_matrix(6)
        assert np.allclose(np.abs(v), 1.0)

    def test_spectra_preserved(self):
        nodal = NodalLoopParams(n_cells=6, t0_eff=1.0, m_eff=0.8)
        h1 = build_effective_hamiltonian(nodal_effective_params(nodal))
        h2 = gauge_transform(h1, "to_nodal")
        e1 = np.linalg.eigvalsh(h1)
        e2 = np.linalg.eigvalsh(h2)
        assert np.abs(e1 - e2).max() < 1e-12 * np.abs(e1).max()

    def test_site_local_spin_ops_invariant(self):
        n = 4
        for site in range(n):
            sx = np.zeros((2 * n, 2 * n), dtype=complex)
            sx[2 * site, 2 * site + 1] = 1.0
            sx[2 * site + 1, 2 * site] = 1.0
            assert np.abs(gauge_transform(sx, "to_nodal") - sx).max() < 1e-15
            sz = np.zeros((2 * n, 2 * n), dtype=complex)
            sz[2 * site, 2 * site] = 1.0
            sz[2 * site + 1, 2 * site + 1] = -1.0
            assert np.abs(gauge_transform(sz, "to_nodal") - sz).max() < 1e-15

    def test_gauge_strips_edge_state_ladder(self):
        pair = analytic_edge_states(8, 0.8, 1.0)
        psi = pair.psi_left.reshape(-1)
        stripped = gauge_transform(psi, "from_nodal")
        # V psi removes the i^(l-1) ladder, leaving a real profile
        assert np.abs(stripped.imag).max() < 1e-14

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        psi = rng.normal(size=8) + 1j * rng.normal(size=8)
        back = gauge_transform(gauge_transform(psi, "to_nodal"),
                               "from_nodal")
        assert np.abs(psi - back).max() < 1e-15


class TestScheduleReduction:
    def test_nodal_schedule_realizes_chain(self, t0):
        lat = nodal_lattice(5)
        m = mhz(2.473)
        sched = nodal_drive_schedule(lat, t0, m)
        eff = effective_params_from_schedule(lat, sched, m)
        h_eff = build_effective_hamiltonian(eff)
        h_nod = build_nodal_chain(NodalLoopParams(5, t0, m))
        assert np.abs(h_eff - h_nod).max() < 1e-12 * t0

    def test_four_tone_round_trip_generic(self, ab_lattice, t0):
        rng = np.random.default_rng(11)
        targets = {k: (t0 * rng.uniform(0.5, 1.0),
                       float(rng.uniform(-math.pi, math.pi)))
                   for k in ALL}
        m = mhz(4.0)
        sched = four_tone_schedule(ab_lattice, m, targets)
        eff = effective_params_from_schedule(ab_lattice, sched, m)
        for k, (amp, phase) in targets.items():
            got_amp, got_phase = eff.hoppings[0][k]
            assert got_amp == pytest.approx(amp, rel=1e-12)
            assert math.remainder(got_phase - phase,
                                  2 * math.pi) == pytest.approx(0.0,
                                                                abs=1e-12)

    def test_rabi_schedule_single_link_coupling(self, ab_lattice, t0):
        sched = rabi_schedule(ab_lattice, 1, (UP, DOWN), t0)
        eff = effective_params_from_schedule(ab_lattice, sched, 0.0)
        table = eff.hoppings[0]
        assert (UP, DOWN) in table
        assert table[(UP, DOWN)][0] == pytest.approx(t0, rel=1e-12)


class TestRotatingFrameMap:
    def test_identity_at_t0(self, ab_lattice, ab_basis):
        psi = single_excitation_state(ab_basis, 1, "up")
        amps = rotating_frame_map(psi, ab_lattice, ab_basis, 0.0, 0.0)
        assert amps[0, 0] == pytest.approx(1.0)

    def test_norm_is_sector_projection(self, ab_lattice, ab_basis):
        rng = np.random.default_rng(5)
        psi = rng.normal(size=ab_basis.dim) + 1j * rng.normal(
            size=ab_basis.dim)
        psi /= np.linalg.norm(psi)
        amps = rotating_frame_map(psi, ab_lattice, ab_basis, mhz(2.0), 0.37)
        from jclatt.hamiltonian import polariton_amplitudes
        expect = np.linalg.norm(polariton_amplitudes(ab_basis, psi))
        assert np.linalg.norm(amps) == pytest.approx(expect, rel=1e-12)

    def test_density_invariant_under_map(self, ab_lattice, ab_basis):
        # per-site polariton density only picks up phases, never weight
        rng = np.random.default_rng(6)
        psi = rng.normal(size=ab_basis.dim) + 1j * rng.normal(
            size=ab_basis.dim)
        psi /= np.linalg.norm(psi)
        from jclatt.hamiltonian import polariton_amplitudes
        before = np.abs(polariton_amplitudes(ab_basis, psi)) ** 2
        after = np.abs(rotating_frame_map(psi, ab_lattice, ab_basis,
                                          mhz(3.0), 1.234)) ** 2
        assert np.abs(before.sum(axis=1) - after.sum(axis=1)).max() < 1e-14


@pytest.mark.slow
class TestFrameConsistency:
    def test_two_cell_rotating_frame_matches_effective(self, ab_lattice,
                                                       ab_basis, t0):
        """Full no-RWA evolution mapped to the rotating frame agrees with
        the effective two-level dynamics over three Rabi periods."""
        transition = (UP, DOWN)
        sched = rabi_schedule(ab_lattice, 1, transition, t0)
        system = lab_system(ab_lattice, sched, ab_basis)
        psi0 = single_excitation_state(ab_basis, 1, "up")
        t_final = 3.0 * math.pi / t0
        record = evolve_pure(system, psi0, t_final,
                             IntegratorConfig(n_records=61))

        eff = effective_params_from_schedule(ab_lattice, sched, 0.0)
        h_eff = build_effective_hamiltonian(eff)
        psi0_eff = np.zeros(4, dtype=complex)
        psi0_eff[0] = 1.0
        traj = evolve_effective(h_eff, psi0_eff, record.times)

        fidelities = []
        for k, t in enumerate(record.times):
            amps = np.empty((2, 2), dtype=complex)
            c_up = (record.c0e[k] + record.c1g[k]) / math.sqrt(2)
            c_down = (record.c0e[k] - record.c1g[k]) / math.sqrt(2)
            amps[:, 0] = c_up
            amps[:, 1] = c_down
            # apply the rotating-frame phases
            for site in (1, 2):
                e_up = ab_lattice.level(site, UP)
                e_down = ab_lattice.level(site, DOWN)
                amps[site - 1, 0] *= np.exp(1j * e_up * t)
                amps[site - 1, 1] *= np.exp(1j * e_down * t)
            fidelities.append(abs(np.vdot(traj[k], amps.reshape(-1))) ** 2)
        fidelities = np.array(fidelities)
        assert fidelities.min() >= 0.99
        third_cycle = record.times >= 2.0 * math.pi / t0
        assert fidelities[third_cycle].max() >= 0.997


class TestSerialization:
    def test_params_dict_round_trip(self, t0):
        from jclatt.effective import (effective_params_from_dict,
                                      effective_params_to_dict)
        import json
        nodal = NodalLoopParams(n_cells=3, t0_eff=t0, m_eff=0.4 * t0)
        params = nodal_effective_params(nodal)
        data = json.loads(json.dumps(effective_params_to_dict(params)))
        back = effective_params_from_dict(data)
        h1 = build_effective_hamiltonian(params)
        h2 = build_effective_hamiltonian(back)
        assert np.abs(h1 - h2).max() < 1e-12 * t0

    def test_matrix_csv_round_trip(self, tmp_path):
        from jclatt.effective import read_matrix_csv, write_matrix_csv
        h = build_nodal_chain(NodalLoopParams(n_cells=3, t0_eff=1.0,
                                              m_eff=0.7))
        path = tmp_path / "h.csv"
        write_matrix_csv(h, path)
        back = read_matrix_csv(path)
        assert np.array_equal(h, back)


class TestRwaValidation:
    def test_reference_parameters_pass(self, ab_lattice, t0):
        hoppings = {k: (t0, 0.0) for k in ALL}
        for m_mhz in (0.0, 20.0, -20.0):
            sched = four_tone_schedule(ab_lattice, mhz(m_mhz), hoppings)
            report = validate_rwa(ab_lattice, sched, mhz(m_mhz))
            assert report.ok, report.violations

    def test_close_tones_fail_with_names(self, ab_lattice, t0):
        sched = DriveSchedule(tones=((
            DriveTone(t0, mhz(380.0), 0.0, 1),
            DriveTone(t0, mhz(380.0) + 5 * t0, 0.0, 1)),))
        report = validate_rwa(ab_lattice, sched)
        assert not report.ok
        assert any("tones 0 and 1" in v for v in report.violations)
