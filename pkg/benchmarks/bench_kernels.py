"""Benchmark: numba kernels vs the pure numpy/scipy fallback.

Run directly:  python benchmarks/bench_kernels.py
The fallback path is the same one selected by JCLATT_DISABLE_NUMBA=1.
"""

import math
import time

import numpy as np

import jclatt.kernels as kernels
from jclatt.basis import build_basis
from jclatt.dynamics import lab_system, single_excitation_state
from jclatt.effective import effective_zeeman
from jclatt.kernels import propagate_lindblad, propagate_pure
from jclatt.model import LatticeSpec, UnitCellParams, nodal_drive_schedule
from jclatt.units import mhz


def build(n_cells):
    lattice = LatticeSpec(n_cells, UnitCellParams.from_mhz(6000.0, 200.0),
                          UnitCellParams.from_mhz(6000.0, 100.0))
    t0 = mhz(3.0)
    m = effective_zeeman(0.0, t0, 0.0, 0.7 * math.pi)
    basis = build_basis(lattice)
    schedule = nodal_drive_schedule(lattice, t0, m)
    return lab_system(lattice, schedule, basis)


def time_pure(system, n_steps, use_numba):
    kernels.HAVE_NUMBA = use_numba
    basis = system.basis
    psi0 = single_excitation_state(basis, 1, "0e")
    dt = 2e-6
    wtab = system.drive_table(np.arange(2 * n_steps + 1) * (0.5 * dt))
    i0e, i1g = basis.single_excitation_indices()
    args = (psi0, system.parts.e_ref, system.channel_matrix, wtab, dt,
            n_steps, np.array([0, n_steps]), basis.qubits, basis.photons,
            i0e, i1g)
    propagate_pure(*args)  # warm-up (JIT compile)
    tic = time.perf_counter()
    propagate_pure(*args)
    return (time.perf_counter() - tic) / n_steps


def time_lindblad(system, n_steps, use_numba):
    kernels.HAVE_NUMBA = use_numba
    basis = system.basis
    psi0 = single_excitation_state(basis, 1, "0e")
    rho0 = np.outer(psi0, psi0.conj())
    dt = 2e-6
    wtab = system.drive_table(np.arange(2 * n_steps + 1) * (0.5 * dt))
    i0e, i1g = basis.single_excitation_indices()
    from jclatt.hamiltonian import (annihilation_op, qubit_lower_op,
                                    qubit_z_diagonal)
    n = system.lattice.n_cells
    jump_ops = []
    for site in range(1, n + 1):
        for op in (annihilation_op(basis, site), qubit_lower_op(basis, site)):
            coo = op.tocoo()
            jump_ops.append((coo.col.astype(np.int64),
                             coo.row.astype(np.int64),
                             coo.data.astype(np.complex128)))
    zmat = np.zeros((basis.dim, basis.dim))
    for site in range(1, n + 1):
        z = qubit_z_diagonal(basis, site)
        zmat += np.outer(z, z)
    gamma = mhz(0.005)
    k2 = basis.total_excitations.astype(float)
    f_elem = gamma * ((zmat - n) - 0.5 * (k2[:, None] + k2[None, :]))
    args = (rho0, system.parts.e_ref, system.channel_matrix, wtab, dt,
            n_steps, gamma, jump_ops, f_elem, np.array([0, n_steps]),
            np.array([n_steps]), basis.qubits, basis.photons, i0e, i1g)
    propagate_lindblad(*args)
    tic = time.perf_counter()
    propagate_lindblad(*args)
    return (time.perf_counter() - tic) / n_steps


def main():
    have_numba = kernels.HAVE_NUMBA
    print(f"numba available: {have_numba}")
    print(f"{'kernel':<28}{'dim':>7}{'numpy ms/step':>15}"
          f"{'numba ms/step':>15}{'speedup':>9}")
    rows = [
        ("pure state RK4", build(8), time_pure, 2000),
        ("pure state RK4", build(20), time_pure, 500),
        ("density matrix RK4", build(4), time_lindblad, 200),
        ("density matrix RK4", build(6), time_lindblad, 50),
    ]
    for name, system, fn, n_steps in rows:
        t_np = fn(system, n_steps, use_numba=False)
        t_nb = fn(system, n_steps, use_numba=True) if have_numba else float(
            "nan")
        speed = t_np / t_nb if have_numba else float("nan")
        print(f"{name:<28}{system.basis.dim:>7}{t_np * 1e3:>15.3f}"
              f"{t_nb * 1e3:>15.3f}{speed:>9.1f}")
    kernels.HAVE_NUMBA = have_numba


if __name__ == "__main__":
    main()
