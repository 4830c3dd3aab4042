import math

import pytest

from jclatt.basis import build_basis
from jclatt.model import LatticeSpec, UnitCellParams
from jclatt.units import mhz


@pytest.fixture(scope="session")
def ab_lattice():
    """Two-cell addressing lattice: distinct frequencies and couplings."""
    return LatticeSpec(2, UnitCellParams.from_mhz(6000.0, 300.0),
                       UnitCellParams.from_mhz(5650.0, 270.0))


def nodal_lattice(n_cells):
    """Equal-frequency lattice whose transition intervals collapse to the
    spin-conserving/spin-flip pair (100, 300) MHz."""
    return LatticeSpec(n_cells, UnitCellParams.from_mhz(6000.0, 200.0),
                       UnitCellParams.from_mhz(6000.0, 100.0))


@pytest.fixture(scope="session")
def t0():
    return mhz(3.0)


@pytest.fixture(scope="session")
def m_nontrivial(t0):
    # k_y = 0, k_z = 0.7 pi, M = 0, d = t0
    return 2.0 * t0 * (1.0 + math.cos(0.7 * math.pi))


@pytest.fixture(scope="session")
def m_trivial(t0):
    return 2.0 * t0 * (1.0 + math.cos(0.3 * math.pi))


@pytest.fixture(scope="session")
def ab_basis(ab_lattice):
    return build_basis(ab_lattice)
