import math

import numpy as np
import pytest
import scipy.sparse as sp

from jclatt.basis import build_basis
from jclatt.hamiltonian import (build_lab_hamiltonian, lab_hamiltonian_parts,
                                polariton_amplitudes, polariton_projectors,
                                polariton_vectors, populations,
                                qubit_photon_imbalance_op,
                                total_excitation_operator)
from jclatt.model import (SPIN_DOWN, SPIN_UP, DriveSchedule, LatticeSpec,
                          UnitCellParams, rabi_schedule)
from jclatt.units import mhz

from conftest import nodal_lattice


def comm_norm(a, b):
    c = a @ b - b @ a
    return 0.0 if c.nnz == 0 else abs(c).max()


@pytest.fixture(scope="module")
def small_lattice():
    return LatticeSpec(2, UnitCellParams.from_mhz(6000.0, 300.0),
                       UnitCellParams.from_mhz(5650.0, 270.0))


@pytest.fixture(scope="module")
def small_basis(small_lattice):
    return build_basis(small_lattice)


class TestLabHamiltonian:
    def test_hermitian_at_sampled_times(self, small_lattice, small_basis):
        sched = rabi_schedule(small_lattice, 1, (SPIN_UP, SPIN_DOWN),
                              mhz(3.0))
        for t in (0.0, 0.123, 0.5):
            op = build_lab_hamiltonian(small_lattice, sched, small_basis, t)
            d = op.matrix - op.matrix.getH()
            dev = 0.0 if d.nnz == 0 else abs(d).max()
            assert dev <= 1e-12 * abs(op.matrix).max()

    def test_excitation_conservation_without_cr(self, small_lattice,
                                                small_basis):
        sched = rabi_schedule(small_lattice, 1, (SPIN_DOWN, SPIN_UP),
                              mhz(3.0))
        n_exc = total_excitation_operator(small_basis)
        for t in (0.0, 0.21):
            h = build_lab_hamiltonian(small_lattice, sched, small_basis, t,
                                      include_counter_rotating=False)
            assert comm_norm(h.matrix, n_exc) == 0.0

    def test_cr_breaks_conservation(self, small_lattice, small_basis):
        sched = rabi_schedule(small_lattice, 1, (SPIN_DOWN, SPIN_UP),
                              mhz(3.0))
        h = build_lab_hamiltonian(small_lattice, sched, small_basis, 0.1,
                                  include_counter_rotating=True)
        n_exc = total_excitation_operator(small_basis)
        assert comm_norm(h.matrix, n_exc) > 1.0

    def test_single_cell_polariton_spectrum(self):
        lat = LatticeSpec(1, UnitCellParams.from_mhz(6000.0, 300.0),
                          UnitCellParams.from_mhz(5650.0, 270.0))
        basis = build_basis(lat, 2, 2)
        h = build_lab_hamiltonian(lat, DriveSchedule(tones=()), basis, 0.0,
                                  include_counter_rotating=False)
        evals = np.linalg.eigvalsh(h.to_dense())
        target = {0.0, mhz(5700.0), mhz(6300.0)}
        for e in target:
            assert np.min(np.abs(evals - e)) < 1e-9

    def test_drive_enters_linearly(self, small_lattice, small_basis):
        sched = rabi_schedule(small_lattice, 1, (SPIN_UP, SPIN_UP), mhz(3.0))
        parts = lab_hamiltonian_parts(small_lattice, small_basis, True)
        h0 = build_lab_hamiltonian(small_lattice, sched, small_basis, 0.0,
                                   parts=parts).matrix
        from jclatt.model import drive_value
        j0 = drive_value(sched, 1, 0.0)
        static = sp.diags(parts.e_ref.astype(complex)) + parts.static
        assert abs((h0 - static - j0 * parts.links[0])).max() < 1e-12


class TestPolaritonOps:
    def test_dressed_overlap(self, small_basis):
        up, down = polariton_vectors(small_basis, 1)
        i0e, _ = small_basis.single_excitation_indices()
        assert up[i0e[0]] == pytest.approx(1 / math.sqrt(2))
        assert down[i0e[0]] == pytest.approx(1 / math.sqrt(2))

    def test_sx_flips_spin(self, small_basis):
        ops = polariton_projectors(small_basis, 2)
        up, down = polariton_vectors(small_basis, 2)
        assert np.linalg.norm(ops.sx @ up - down) < 1e-12
        assert np.linalg.norm(ops.sx @ down - up) < 1e-12

    def test_projectors_idempotent(self, small_basis):
        ops = polariton_projectors(small_basis, 1)
        for p in (ops.proj_up, ops.proj_down):
            assert abs((p @ p - p)).max() < 1e-12

    def test_sz_traceless_on_site_block(self, small_basis):
        ops = polariton_projectors(small_basis, 1)
        assert abs(ops.sz.diagonal().sum()) < 1e-12

    def test_sx_equals_imbalance_on_single_excitation_sector(self,
                                                             small_basis):
        # S^x_l == (sigma+ sigma- - a+ a)_l restricted to the sector
        basis = small_basis
        sector = np.flatnonzero(basis.total_excitations == 1)
        for site in (1, 2):
            ops = polariton_projectors(basis, site)
            imb = qubit_photon_imbalance_op(basis, site)
            a = ops.sx.toarray()[np.ix_(sector, sector)]
            b = imb.toarray()[np.ix_(sector, sector)]
            assert np.abs(a - b).max() < 1e-12

    def test_amplitude_extraction(self, small_basis):
        up, _ = polariton_vectors(small_basis, 1)
        amps = polariton_amplitudes(small_basis, up)
        assert amps[0, 0] == pytest.approx(1.0)
        assert abs(amps[0, 1]) < 1e-15
        assert np.abs(amps[1]).max() < 1e-15

    def test_populations(self, small_basis):
        up, _ = polariton_vectors(small_basis, 1)
        q, n = populations(small_basis, up)
        assert q[0] == pytest.approx(0.5)
        assert n[0] == pytest.approx(0.5)
        assert q[1] == pytest.approx(0.0)


class TestBasisMismatch:
    def test_wrong_basis_rejected(self, small_lattice):
        wrong = build_basis(nodal_lattice(3))
        sched = rabi_schedule(small_lattice, 1, (SPIN_UP, SPIN_UP), mhz(3.0))
        with pytest.raises(ValueError, match="different cell count"):
            build_lab_hamiltonian(small_lattice, sched, wrong, 0.0)
