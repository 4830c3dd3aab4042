import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from jclatt.basis import LatticeOperator, build_basis


def brute_force_states(n_cells, n_ph_max, n_exc_max):
    """Independent enumeration oracle over the full product space."""
    local = [(q, n) for q in (0, 1) for n in range(n_ph_max + 1)]
    keep = []
    for combo in itertools.product(local, repeat=n_cells):
        if sum(q + n for q, n in combo) <= n_exc_max:
            flat = tuple(x for qn in combo for x in qn)
            keep.append(flat)
    return sorted(keep, key=lambda s: (sum(s), s))


class TestDimensions:
    @pytest.mark.parametrize("n,ph,exc,dim", [
        (2, 1, 1, 5),
        (1, 1, 2, 4),
        (2, 2, 3, 23),
    ])
    def test_known_dimensions(self, n, ph, exc, dim):
        assert build_basis(n, ph, exc).dim == dim

    def test_against_brute_force(self):
        for n, ph, exc in [(2, 2, 3), (3, 1, 2), (3, 2, 4), (1, 3, 4)]:
            basis = build_basis(n, ph, exc)
            oracle = brute_force_states(n, ph, exc)
            assert basis.dim == len(oracle)
            assert [tuple(row) for row in basis.occupations] == oracle

    def test_large_lattice_count(self):
        # N=20 double-excitation count cross-checked by combinatorics: with
        # 2N modes (qubits hard-core, photons up to 2), two quanta occupy
        # either two distinct modes or one photon mode twice
        basis = build_basis(20, 2, 2)
        n = 20
        singles = 2 * n
        doubles = (2 * n) * (2 * n - 1) // 2 + n
        assert basis.dim == 1 + singles + doubles == 841

    def test_nonsensical_truncation_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            build_basis(2, 1, 5)
        with pytest.raises(ValueError):
            build_basis(2, 0, 1)


class TestIndexing:
    def test_bijection(self):
        basis = build_basis(3, 2, 3)
        for i in range(basis.dim):
            assert basis.index_of(basis.qubits[i], basis.photons[i]) == i

    def test_ground_state_first(self):
        basis = build_basis(4, 2, 3)
        assert basis.total_excitations[0] == 0
        assert basis.index_of(np.zeros(4, np.int8), np.zeros(4, np.int8)) == 0

    def test_single_excitation_indices(self):
        basis = build_basis(3, 2, 3)
        i0e, i1g = basis.single_excitation_indices()
        for site in range(3):
            assert basis.qubits[i0e[site], site] == 1
            assert basis.photons[i0e[site]].sum() == 0
            assert basis.photons[i1g[site], site] == 1
            assert basis.qubits[i1g[site]].sum() == 0

    def test_labels(self):
        basis = build_basis(2, 1, 1)
        assert basis.state_label(0) == "|0g,0g>"


class TestLatticeOperator:
    def test_rejects_non_hermitian(self):
        basis = build_basis(2, 1, 1)
        m = sp.lil_matrix((basis.dim, basis.dim), dtype=complex)
        m[0, 1] = 1.0
        with pytest.raises(ValueError, match="Hermitian"):
            LatticeOperator(basis=basis, matrix=m.tocsr())

    def test_accepts_hermitian(self):
        basis = build_basis(2, 1, 1)
        rng = np.random.default_rng(0)
        a = rng.normal(size=(basis.dim, basis.dim)) \
            + 1j * rng.normal(size=(basis.dim, basis.dim))
        h = sp.csr_matrix(a + a.conj().T)
        op = LatticeOperator(basis=basis, matrix=h)
        assert op.dim == basis.dim

    def test_dimension_mismatch(self):
        basis = build_basis(2, 1, 1)
        with pytest.raises(ValueError, match="dimensions"):
            LatticeOperator(basis=basis,
                            matrix=sp.eye(3, format="csr", dtype=complex))
