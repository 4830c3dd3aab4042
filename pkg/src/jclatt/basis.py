"""Truncated product Hilbert space and sparse Hermitian operators.

Each site carries a qubit (g/e) and a photon mode truncated at n_ph_max;
the global basis keeps every product state whose total excitation count
(photons plus qubit excitations) is at most n_exc_max.  The truncation is
needed because the counter-rotating terms do not conserve the excitation
number; they couple manifolds differing by two.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .defaults import DEFAULTS


class HilbertBasis:
    """Ordered basis of occupation states (q_1..q_N, n_1..n_N).

    States are sorted by total excitation count, then lexicographically by
    the occupation tuple, so the global ground state |G> (all |0g>) has
    index 0.  The index map is a bijection by construction.
    """

    def __init__(self, n_cells: int, n_ph_max: int, n_exc_max: int):
        if n_ph_max < 1 or n_exc_max < 1:
            raise ValueError("n_ph_max and n_exc_max must be >= 1")
        cap = n_cells * (n_ph_max + 1)
        if n_exc_max > cap:
            raise ValueError(
                f"n_exc_max={n_exc_max} exceeds the maximum possible "
                f"excitation count {cap} for this lattice")
        self.n_cells = n_cells
        self.n_ph_max = n_ph_max
        self.n_exc_max = n_exc_max

        states = []

        def extend(occ, used):
            site = len(occ) // 2
            if site == n_cells:
                states.append(tuple(occ))
                return
            for q in (0, 1):
                if used + q > n_exc_max:
                    continue
                for n in range(n_ph_max + 1):
                    if used + q + n > n_exc_max:
                        break
                    occ.extend((q, n))
                    extend(occ, used + q + n)
                    del occ[-2:]

        extend([], 0)
        states.sort(key=lambda s: (sum(s), s))
        arr = np.array(states, dtype=np.int8).reshape(len(states), 2 * n_cells)
        self.occupations = arr
        self.qubits = np.ascontiguousarray(arr[:, 0::2])
        self.photons = np.ascontiguousarray(arr[:, 1::2])
        self.total_excitations = arr.sum(axis=1).astype(np.int64)
        self._index = {row.tobytes(): i for i, row in enumerate(arr)}
        self.dim = len(states)

    def index_of(self, qubits, photons) -> int:
        occ = np.empty(2 * self.n_cells, dtype=np.int8)
        occ[0::2] = qubits
        occ[1::2] = photons
        return self._index[occ.tobytes()]

    def index_shift(self, i: int, site: int, dq: int = 0, dn: int = 0):
        """Index of state i with site occupations shifted, or None if it
        leaves the truncated space.  site is 1-indexed."""
        q = int(self.qubits[i, site - 1]) + dq
        n = int(self.photons[i, site - 1]) + dn
        if not (0 <= q <= 1 and 0 <= n <= self.n_ph_max):
            return None
        occ = self.occupations[i].copy()
        occ[2 * (site - 1)] = q
        occ[2 * (site - 1) + 1] = n
        return self._index.get(occ.tobytes())

    def single_excitation_indices(self):
        """Indices (i_0e, i_1g) per site of the two single-excitation states."""
        n = self.n_cells
        i0e = np.empty(n, dtype=np.int64)
        i1g = np.empty(n, dtype=np.int64)
        zeros = np.zeros(n, dtype=np.int8)
        for site in range(n):
            q = zeros.copy()
            q[site] = 1
            i0e[site] = self.index_of(q, zeros)
            p = zeros.copy()
            p[site] = 1
            i1g[site] = self.index_of(zeros, p)
        return i0e, i1g

    def state_label(self, i: int) -> str:
        parts = []
        for site in range(self.n_cells):
            q = "e" if self.qubits[i, site] else "g"
            parts.append(f"{int(self.photons[i, site])}{q}")
        return "|" + ",".join(parts) + ">"

    def __len__(self):
        return self.dim

    def __repr__(self):
        return (f"HilbertBasis(n_cells={self.n_cells}, n_ph_max="
                f"{self.n_ph_max}, n_exc_max={self.n_exc_max}, "
                f"dim={self.dim})")


def build_basis(n_cells, n_ph_max=None, n_exc_max=None) -> HilbertBasis:
    """Construct the truncated basis; accepts a LatticeSpec or a cell count."""
    if hasattr(n_cells, "n_cells"):
        n_cells = n_cells.n_cells
    if n_ph_max is None:
        n_ph_max = DEFAULTS["n_ph_max"]
    if n_exc_max is None:
        n_exc_max = DEFAULTS["n_exc_max"]
    return HilbertBasis(int(n_cells), int(n_ph_max), int(n_exc_max))


@dataclass
class LatticeOperator:
    """Sparse Hermitian operator tied to a basis."""

    basis: HilbertBasis
    matrix: sp.csr_matrix

    def __post_init__(self):
        m = self.matrix
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ValueError("operator dimensions do not match the basis")
        dev = _hermiticity_deviation(m)
        scale = max(1e-300, abs(m).max() if m.nnz else 0.0)
        if dev > DEFAULTS["hermiticity_rtol"] * scale:
            raise ValueError(
                f"operator is not Hermitian: max |H - H^+| = {dev:.3e} "
                f"vs scale {scale:.3e}")

    @property
    def dim(self) -> int:
        return self.basis.dim

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def expectation(self, psi: np.ndarray) -> float:
        return float(np.real(np.vdot(psi, self.matrix @ psi)))


def _hermiticity_deviation(m: sp.spmatrix) -> float:
    d = m - m.getH()
    return 0.0 if d.nnz == 0 else abs(d).max()


def coo_to_csr(dim: int, rows, cols, vals) -> sp.csr_matrix:
    m = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim),
                      dtype=np.complex128)
    m.sum_duplicates()
    return m.tocsr()


def warn_if_large_for_density_matrix(basis: HilbertBasis):
    if basis.dim > DEFAULTS["lindblad_dim_guard"]:
        warnings.warn(
            f"basis dimension {basis.dim} exceeds the density-matrix guard "
            f"({DEFAULTS['lindblad_dim_guard']}); Lindblad propagation will "
            "be slow and memory-hungry", stacklevel=2)
