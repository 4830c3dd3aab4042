"""Lab-frame Hamiltonian assembly on the truncated product space.

H(t) = sum_l omega_l (n_l + q_l)                      [reference diagonal]
     + sum_l g_l (sigma+_l a_l + h.c.)                [on-site JC]
     + sum_l J_l(t) (a+_l a_{l+1} + h.c.)             [photon hopping]
     + H_c  (optional counter-rotating part:
             sum_l g_l (sigma+_l a+_l + h.c.) + sum_l J_l(t)(a+_l a+_{l+1} + h.c.))

The drive-independent pieces are cached as sparse parts so time evolution
only rescales per-link blocks by J_l(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import HilbertBasis, LatticeOperator, coo_to_csr
from .model import DriveSchedule, LatticeSpec, drive_value


@dataclass
class LabHamiltonianParts:
    """Schedule-independent pieces of the lab Hamiltonian."""

    lattice: LatticeSpec
    basis: HilbertBasis
    include_counter_rotating: bool
    e_ref: np.ndarray          # reference diagonal, rad/us
    static: sp.csr_matrix      # on-site g terms (JC, plus CR if enabled)
    links: tuple               # per-link photon blocks multiplied by J_l(t)

    @property
    def dim(self) -> int:
        return self.basis.dim


def _shifted_index(basis: HilbertBasis, i: int, changes) -> int | None:
    occ = basis.occupations[i].copy()
    for site, dq, dn in changes:
        q = occ[2 * (site - 1)] + dq
        n = occ[2 * (site - 1) + 1] + dn
        if not (0 <= q <= 1 and 0 <= n <= basis.n_ph_max):
            return None
        occ[2 * (site - 1)] = q
        occ[2 * (site - 1) + 1] = n
    return basis._index.get(occ.tobytes())


def lab_hamiltonian_parts(lattice: LatticeSpec, basis: HilbertBasis,
                          include_counter_rotating: bool = True
                          ) -> LabHamiltonianParts:
    if basis.n_cells != lattice.n_cells:
        raise ValueError("basis was built for a different cell count")
    n = lattice.n_cells
    omegas = np.array([lattice.cell(s).omega for s in range(1, n + 1)])
    gs = np.array([lattice.cell(s).g for s in range(1, n + 1)])

    e_ref = (basis.qubits @ omegas) + (basis.photons @ omegas)

    rows, cols, vals = [], [], []
    for i in range(basis.dim):
        for site in range(1, n + 1):
            q = basis.qubits[i, site - 1]
            nps = basis.photons[i, site - 1]
            # sigma+ a : |q=0, n> -> |q=1, n-1>, amp g*sqrt(n)
            if q == 0 and nps >= 1:
                j = _shifted_index(basis, i, [(site, +1, -1)])
                if j is not None:
                    amp = gs[site - 1] * math.sqrt(nps)
                    rows += [j, i]
                    cols += [i, j]
                    vals += [amp, amp]
            if include_counter_rotating:
                # sigma+ a+ : |q=0, n> -> |q=1, n+1>, amp g*sqrt(n+1)
                if q == 0 and nps < basis.n_ph_max:
                    j = _shifted_index(basis, i, [(site, +1, +1)])
                    if j is not None:
                        amp = gs[site - 1] * math.sqrt(nps + 1)
                        rows += [j, i]
                        cols += [i, j]
                        vals += [amp, amp]
    static = coo_to_csr(basis.dim, rows, cols, vals)

    links = []
    for link in range(1, n):
        rows, cols, vals = [], [], []
        for i in range(basis.dim):
            nl = basis.photons[i, link - 1]
            nr = basis.photons[i, link]
            # a+_l a_{l+1}
            if nr >= 1 and nl < basis.n_ph_max:
                j = _shifted_index(basis, i, [(link, 0, +1), (link + 1, 0, -1)])
                if j is not None:
                    amp = math.sqrt(nl + 1) * math.sqrt(nr)
                    rows += [j, i]
                    cols += [i, j]
                    vals += [amp, amp]
            if include_counter_rotating:
                # a+_l a+_{l+1}
                if nl < basis.n_ph_max and nr < basis.n_ph_max:
                    j = _shifted_index(basis, i,
                                       [(link, 0, +1), (link + 1, 0, +1)])
                    if j is not None:
                        amp = math.sqrt(nl + 1) * math.sqrt(nr + 1)
                        rows += [j, i]
                        cols += [i, j]
                        vals += [amp, amp]
        links.append(coo_to_csr(basis.dim, rows, cols, vals))

    return LabHamiltonianParts(lattice=lattice, basis=basis,
                               include_counter_rotating=include_counter_rotating,
                               e_ref=np.asarray(e_ref, dtype=float),
                               static=static, links=tuple(links))


def build_lab_hamiltonian(lattice: LatticeSpec, schedule: DriveSchedule,
                          basis: HilbertBasis, t: float,
                          include_counter_rotating: bool = True,
                          parts: LabHamiltonianParts | None = None
                          ) -> LatticeOperator:
    """Full lab-frame H(t) as a sparse Hermitian operator."""
    if schedule.n_links != lattice.n_links:
        raise ValueError("schedule link count does not match the lattice")
    if parts is None:
        parts = lab_hamiltonian_parts(lattice, basis, include_counter_rotating)
    h = sp.diags(parts.e_ref.astype(complex), format="csr") + parts.static
    for link in range(1, lattice.n_cells):
        j = drive_value(schedule, link, t)
        if j != 0.0:
            h = h + j * parts.links[link - 1]
    return LatticeOperator(basis=basis, matrix=h.tocsr())


def total_excitation_operator(basis: HilbertBasis) -> sp.csr_matrix:
    return sp.diags(basis.total_excitations.astype(complex), format="csr")


def populations(basis: HilbertBasis, psi: np.ndarray):
    """Per-site qubit excitation and photon number expectations."""
    w = np.abs(psi) ** 2
    return basis.qubits.T.astype(float) @ w, basis.photons.T.astype(float) @ w


def polariton_vectors(basis: HilbertBasis, site: int):
    """Full-space vectors of |up>_site and |down>_site (others in |0g>)."""
    i0e, i1g = basis.single_excitation_indices()
    up = np.zeros(basis.dim, dtype=complex)
    down = np.zeros(basis.dim, dtype=complex)
    r = 1.0 / math.sqrt(2.0)
    up[i0e[site - 1]] = r
    up[i1g[site - 1]] = r
    down[i0e[site - 1]] = r
    down[i1g[site - 1]] = -r
    return up, down


def polariton_amplitudes(basis: HilbertBasis, psi: np.ndarray) -> np.ndarray:
    """(n_cells, 2) projections onto |up>_l, |down>_l."""
    i0e, i1g = basis.single_excitation_indices()
    r = 1.0 / math.sqrt(2.0)
    out = np.empty((basis.n_cells, 2), dtype=complex)
    out[:, 0] = (psi[i0e] + psi[i1g]) * r
    out[:, 1] = (psi[i0e] - psi[i1g]) * r
    return out


@dataclass
class SitePolaritonOps:
    """|up><up|, |down><down|, |up><down|, S^x and S^z at one site, embedded
    in the full space."""

    site: int
    proj_up: sp.csr_matrix
    proj_down: sp.csr_matrix
    flip: sp.csr_matrix
    sx: sp.csr_matrix
    sz: sp.csr_matrix


def polariton_projectors(basis: HilbertBasis, site: int) -> SitePolaritonOps:
    up, down = polariton_vectors(basis, site)
    up_s = sp.csr_matrix(up.reshape(-1, 1))
    down_s = sp.csr_matrix(down.reshape(-1, 1))
    proj_up = (up_s @ up_s.getH()).tocsr()
    proj_down = (down_s @ down_s.getH()).tocsr()
    flip = (up_s @ down_s.getH()).tocsr()
    return SitePolaritonOps(site=site, proj_up=proj_up, proj_down=proj_down,
                            flip=flip, sx=(flip + flip.getH()).tocsr(),
                            sz=(proj_up - proj_down).tocsr())


def qubit_photon_imbalance_op(basis: HilbertBasis, site: int) -> sp.csr_matrix:
    """(sigma+ sigma- - a+ a) at one site; equals S^x on the
    single-excitation sector."""
    q = basis.qubits[:, site - 1].astype(float)
    n = basis.photons[:, site - 1].astype(float)
    return sp.diags((q - n).astype(complex), format="csr")


def annihilation_op(basis: HilbertBasis, site: int) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for i in range(basis.dim):
        n = basis.photons[i, site - 1]
        if n >= 1:
            j = _shifted_index(basis, i, [(site, 0, -1)])
            if j is not None:
                rows.append(j)
                cols.append(i)
                vals.append(math.sqrt(n))
    return sp.coo_matrix((vals, (rows, cols)),
                         shape=(basis.dim, basis.dim),
                         dtype=np.complex128).tocsr()


def qubit_lower_op(basis: HilbertBasis, site: int) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for i in range(basis.dim):
        if basis.qubits[i, site - 1] == 1:
            j = _shifted_index(basis, i, [(site, -1, 0)])
            if j is not None:
                rows.append(j)
                cols.append(i)
                vals.append(1.0)
    return sp.coo_matrix((vals, (rows, cols)),
                         shape=(basis.dim, basis.dim),
                         dtype=np.complex128).tocsr()


def qubit_z_diagonal(basis: HilbertBasis, site: int) -> np.ndarray:
    """Diagonal of sigma^z_l (+1 excited, -1 ground) over the basis."""
    return (2.0 * basis.qubits[:, site - 1].astype(float)) - 1.0
