"""Open-boundary spectra and analytic edge states of the nodal chain.

In the topological regime |m'| < 2 t0 the open chain carries a pair of
near-zero modes exponentially localized at the two ends.  Solving
H psi = 0 with the exponential ansatz psi(l) = xi^(l-1) chi gives
xi = i m' / (2 t0) with spinor (|up> + |down>)/sqrt(2) for the left mode,
and the mirrored solution with (|up> - |down>)/sqrt(2) on the right; the
decay ratio per site is q = m' / (2 t0) and the i^(l-1) phase ladder is
intrinsic to the +-i hopping pattern of the chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .defaults import DEFAULTS
from .effective import NodalLoopParams, build_nodal_chain, effective_zeeman


@dataclass(frozen=True)
class SpectrumResult:
    """Sorted eigen-decomposition of the open nodal chain."""

    n_cells: int
    t0_eff: float
    m_eff: float
    energies: np.ndarray      # ascending, length 2N
    states: np.ndarray        # columns matching energies, (2N, 2N)
    midgap: bool
    midgap_energies: np.ndarray
    bulk_gap: float

    def zero_subspace(self) -> np.ndarray:
        """(2N, 2) columns spanning the two smallest-|E| eigenvectors."""
        order = np.argsort(np.abs(self.energies))
        return self.states[:, order[:2]]


def open_chain_spectrum(n_cells: int, t0: float, big_m: float, d: float,
                        k_y: float, k_z: float,
                        midgap_threshold: float | None = None,
                        bulk_factor: float | None = None) -> SpectrumResult:
    """Diagonalize the finite chain and flag a mid-gap zero-mode pair.

    The pair is flagged when the two smallest |E| are below
    midgap_threshold * t0 while the next level exceeds bulk_factor times
    that threshold.
    """
    if n_cells < 2:
        raise ValueError("n_cells must be >= 2")
    if midgap_threshold is None:
        midgap_threshold = DEFAULTS["midgap_threshold"]
    if bulk_factor is None:
        bulk_factor = DEFAULTS["midgap_bulk_factor"]
    m_eff = effective_zeeman(big_m, d, k_y, k_z)
    h = build_nodal_chain(NodalLoopParams(n_cells=n_cells, t0_eff=t0,
                                          m_eff=m_eff))
    energies, states = np.linalg.eigh(h)
    order = np.argsort(np.abs(energies))
    pair = np.abs(energies[order[:2]])
    bulk_gap = float(np.abs(energies[order[2]]))
    flag = bool(pair.max() < midgap_threshold * t0
                and bulk_gap > bulk_factor * midgap_threshold * t0)
    return SpectrumResult(n_cells=n_cells, t0_eff=t0, m_eff=m_eff,
                          energies=energies, states=states, midgap=flag,
                          midgap_energies=energies[order[:2]],
                          bulk_gap=bulk_gap)


@dataclass(frozen=True)
class EdgeStatePair:
    """Closed-form left/right edge states of the finite chain.

    psi_left(l)  = i^(l-1) A q^(l-1) (|up> + |down>)/sqrt(2) * sqrt(2)
    psi_right(l) = i^(l-1) A q^(N-l) (|up> - |down>)/sqrt(2) * sqrt(2)
    with q = m'/(2 t0), lambda = ln(1/|q|), and
    A = sqrt((1 - q^2) / (2 (1 - q^(2N)))) normalizing each state to one.
    """

    n_cells: int
    t0_eff: float
    m_eff: float
    q: float
    decay_rate: float
    amplitude: float
    psi_left: np.ndarray     # (N, 2) complex, spin columns (up, down)
    psi_right: np.ndarray


def analytic_edge_states(n_cells: int, m_eff: float,
                         t0: float) -> EdgeStatePair:
    if n_cells < 2:
        raise ValueError("n_cells must be >= 2")
    if abs(m_eff) >= 2.0 * t0:
        raise ValueError(
            "no edge states in trivial phase: requires |m'| < 2 t0")
    q = m_eff / (2.0 * t0)
    assert abs(q) < 1.0
    amp = math.sqrt((1.0 - q * q) / (2.0 * (1.0 - q ** (2 * n_cells))))
    decay = math.inf if q == 0.0 else math.log(1.0 / abs(q))
    sites = np.arange(n_cells)
    ladder = (1j ** sites)
    left = np.zeros((n_cells, 2), dtype=complex)
    right = np.zeros((n_cells, 2), dtype=complex)
    left[:, 0] = ladder * amp * q ** sites
    left[:, 1] = left[:, 0]
    right[:, 0] = ladder * amp * q ** (n_cells - 1 - sites)
    right[:, 1] = -right[:, 0]
    return EdgeStatePair(n_cells=n_cells, t0_eff=t0, m_eff=m_eff, q=q,
                         decay_rate=decay, amplitude=amp,
                         psi_left=left, psi_right=right)


def strip_gauge(state: np.ndarray) -> np.ndarray:
    """Divide out the i^(l-1) site-phase ladder from an (N, 2) state."""
    sites = np.arange(state.shape[0])
    return state / (1j ** sites)[:, None]


def chiral_split_zero_modes(spectrum: SpectrumResult):
    """Left/right zero modes from the numeric pair, split deterministically.

    The degenerate numeric pair mixes the two edges; diagonalizing the
    total chiral operator (sigma_x on the spin of every site) inside the
    2D subspace separates them: eigenvalue ~ +1 is the left state,
    ~ -1 the right.
    """
    sub = spectrum.zero_subspace()
    n = spectrum.n_cells
    cx = np.kron(np.eye(n), np.array([[0.0, 1.0], [1.0, 0.0]]))
    proj = sub.conj().T @ cx @ sub
    vals, vecs = np.linalg.eigh(proj)
    mixed = sub @ vecs
    left = mixed[:, np.argmax(vals)]
    right = mixed[:, np.argmin(vals)]
    return left.reshape(n, 2), right.reshape(n, 2)


@dataclass(frozen=True)
class OverlapReport:
    left_fidelity: float
    right_fidelity: float
    left_subspace_fidelity: float
    right_subspace_fidelity: float
    left_residuals: np.ndarray
    right_residuals: np.ndarray


def edge_overlap(spectrum: SpectrumResult,
                 analytic: EdgeStatePair) -> OverlapReport:
    """Fidelities between numeric and analytic edge pairs.

    Per-edge fidelity |<numeric|analytic>|^2 is computed after the
    deterministic chiral split and optimal global-phase alignment; the
    subspace fidelity projects the analytic state onto the full 2D numeric
    zero subspace, which is insensitive to how the degenerate pair mixes.
    """
    if spectrum.n_cells != analytic.n_cells:
        raise ValueError("size mismatch between numeric and analytic states")
    num_left, num_right = chiral_split_zero_modes(spectrum)
    sub = spectrum.zero_subspace()

    def best(num, ana):
        a = ana.ravel()
        nvec = num.ravel()
        inner = np.vdot(nvec, a)
        fid = abs(inner) ** 2
        phase = inner / abs(inner) if abs(inner) > 0 else 1.0
        residual = np.abs(nvec * phase - a).reshape(ana.shape)
        proj = sub.conj().T @ a
        return fid, float(np.linalg.norm(proj) ** 2), residual

    lf, lsub, lres = best(num_left, analytic.psi_left)
    rf, rsub, rres = best(num_right, analytic.psi_right)
    return OverlapReport(left_fidelity=float(lf), right_fidelity=float(rf),
                         left_subspace_fidelity=lsub,
                         right_subspace_fidelity=rsub,
                         left_residuals=lres, right_residuals=rres)
