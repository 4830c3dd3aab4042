"""Hot propagation kernels: fixed-step RK4 in the interaction picture.

The state is integrated in the frame rotating with the reference diagonal
(bare omega per site), where the residual Hamiltonian is a static sparse
matrix whose per-entry weights are 1 (on-site g terms) or J_l(t) (per-link
photon blocks) sandwiched between diagonal phase vectors exp(-i E_ref t).
The phase vectors advance by a precomputed half-step phasor and are
re-synchronized exactly every few hundred steps.

Kernels are numba-compiled when available; setting JCLATT_DISABLE_NUMBA=1
selects a pure numpy/scipy path with identical semantics (used as a
correctness oracle and for the bundled benchmark).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

_DISABLED = os.environ.get("JCLATT_DISABLE_NUMBA", "0") == "1"
try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # no-op decorator for the fallback path
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


RENORM_EVERY = 512


@dataclass
class ChannelMatrix:
    """One CSR sparsity pattern whose entries carry a channel id.

    Channel 0 has unit weight; channel c >= 1 is scaled by the link drive
    J_c(t) at apply time.
    """

    dim: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    chan: np.ndarray
    n_channels: int
    static: sp.csr_matrix
    links: tuple

    def weighted_csr(self, w: np.ndarray) -> sp.csr_matrix:
        m = sp.csr_matrix((self.data * w[self.chan], self.indices,
                           self.indptr), shape=(self.dim, self.dim))
        return m


def build_channel_matrix(static: sp.csr_matrix, links) -> ChannelMatrix:
    dim = static.shape[0]
    rows, cols, vals, chans = [], [], [], []
    for c, m in enumerate([static, *links]):
        coo = m.tocoo()
        rows.append(coo.row.astype(np.int64))
        cols.append(coo.col.astype(np.int64))
        vals.append(coo.data.astype(np.complex128))
        chans.append(np.full(coo.nnz, c, dtype=np.int64))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    chans = np.concatenate(chans)
    order = np.lexsort((chans, cols, rows))
    rows, cols, vals, chans = rows[order], cols[order], vals[order], chans[order]
    indptr = np.zeros(dim + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    indptr = np.cumsum(indptr)
    return ChannelMatrix(dim=dim, indptr=indptr, indices=cols, data=vals,
                         chan=chans, n_channels=len(links) + 1,
                         static=static.tocsr(),
                         links=tuple(m.tocsr() for m in links))


# ---------------------------------------------------------------------------
# pure-state RK4

@njit(cache=True)
def _rhs_pure(pv, y, w, indptr, indices, data, chan, tmp, out):
    dim = y.shape[0]
    for i in range(dim):
        tmp[i] = pv[i] * y[i]
    for i in range(dim):
        acc = 0.0 + 0.0j
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k] * w[chan[k]] * tmp[indices[k]]
        out[i] = -1j * np.conj(pv[i]) * acc


@njit(cache=True)
def _rk4_pure_numba(psi, eref, indptr, indices, data, chan, wtab, dt,
                    n_steps, rec_steps, qubits, photons, i0e, i1g,
                    norms, qpop, ppop, c0e, c1g):
    dim = psi.shape[0]
    n_sites = qubits.shape[1]
    half = 0.5 * dt
    ph_half = np.empty(dim, np.complex128)
    pv = np.empty(dim, np.complex128)
    for i in range(dim):
        ph_half[i] = complex(math.cos(eref[i] * half), -math.sin(eref[i] * half))
        pv[i] = 1.0 + 0.0j
    pv1 = np.empty(dim, np.complex128)
    pv2 = np.empty(dim, np.complex128)
    k1 = np.empty(dim, np.complex128)
    k2 = np.empty(dim, np.complex128)
    k3 = np.empty(dim, np.complex128)
    k4 = np.empty(dim, np.complex128)
    stage = np.empty(dim, np.complex128)
    tmp = np.empty(dim, np.complex128)

    rec_ptr = 0
    for step in range(n_steps + 1):
        if rec_ptr < rec_steps.shape[0] and step == rec_steps[rec_ptr]:
            nrm = 0.0
            for i in range(dim):
                nrm += (psi[i].real * psi[i].real + psi[i].imag * psi[i].imag)
            norms[rec_ptr] = math.sqrt(nrm)
            for l in range(n_sites):
                aq = 0.0
                ap = 0.0
                for i in range(dim):
                    w2 = psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
                    aq += w2 * qubits[i, l]
                    ap += w2 * photons[i, l]
                qpop[rec_ptr, l] = aq
                ppop[rec_ptr, l] = ap
                c0e[rec_ptr, l] = pv[i0e[l]] * psi[i0e[l]]
                c1g[rec_ptr, l] = pv[i1g[l]] * psi[i1g[l]]
            rec_ptr += 1
        if step == n_steps:
            break

        for i in range(dim):
            pv1[i] = pv[i] * ph_half[i]
            pv2[i] = pv1[i] * ph_half[i]
        w0 = wtab[2 * step]
        w1 = wtab[2 * step + 1]
        w2_ = wtab[2 * step + 2]

        _rhs_pure(pv, psi, w0, indptr, indices, data, chan, tmp, k1)
        for i in range(dim):
            stage[i] = psi[i] + half * k1[i]
        _rhs_pure(pv1, stage, w1, indptr, indices, data, chan, tmp, k2)
        for i in range(dim):
            stage[i] = psi[i] + half * k2[i]
        _rhs_pure(pv1, stage, w1, indptr, indices, data, chan, tmp, k3)
        for i in range(dim):
            stage[i] = psi[i] + dt * k3[i]
        _rhs_pure(pv2, stage, w2_, indptr, indices, data, chan, tmp, k4)
        sixth = dt / 6.0
        for i in range(dim):
            psi[i] = psi[i] + sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i])
            pv[i] = pv2[i]
        if (step + 1) % RENORM_EVERY == 0:
            t = (step + 1) * dt
            for i in range(dim):
                x = eref[i] * t
                pv[i] = complex(math.cos(x), -math.sin(x))
    # lab-frame final state
    for i in range(dim):
        psi[i] = pv[i] * psi[i]


def _rk4_pure_numpy(psi, eref, cm: ChannelMatrix, wtab, dt, n_steps,
                    rec_steps, qubits, photons, i0e, i1g,
                    norms, qpop, ppop, c0e, c1g):
    dim = psi.shape[0]
    half = 0.5 * dt
    ph_half = np.exp(-1j * eref * half)
    pv = np.ones(dim, dtype=complex)
    qf = qubits.astype(float)
    pf = photons.astype(float)

    def rhs(pv_s, y, w):
        tmp = pv_s * y
        u = cm.static @ tmp
        for c, link in enumerate(cm.links, start=1):
            if w[c] != 0.0:
                u += w[c] * (link @ tmp)
        return -1j * (np.conj(pv_s) * u)

    rec_ptr = 0
    for step in range(n_steps + 1):
        if rec_ptr < len(rec_steps) and step == rec_steps[rec_ptr]:
            w2 = np.abs(psi) ** 2
            norms[rec_ptr] = math.sqrt(float(w2.sum()))
            qpop[rec_ptr] = w2 @ qf
            ppop[rec_ptr] = w2 @ pf
            c0e[rec_ptr] = pv[i0e] * psi[i0e]
            c1g[rec_ptr] = pv[i1g] * psi[i1g]
            rec_ptr += 1
        if step == n_steps:
            break
        pv1 = pv * ph_half
        pv2 = pv1 * ph_half
        k1 = rhs(pv, psi, wtab[2 * step])
        k2 = rhs(pv1, psi + half * k1, wtab[2 * step + 1])
        k3 = rhs(pv1, psi + half * k2, wtab[2 * step + 1])
        k4 = rhs(pv2, psi + dt * k3, wtab[2 * step + 2])
        psi += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        pv = pv2
        if (step + 1) % RENORM_EVERY == 0:
            pv = np.exp(-1j * eref * ((step + 1) * dt))
    psi *= pv


@dataclass
class PureRecords:
    times: np.ndarray
    norms: np.ndarray
    qubit_pop: np.ndarray
    photon_pop: np.ndarray
    c0e: np.ndarray
    c1g: np.ndarray
    final_state_lab: np.ndarray


def propagate_pure(psi0, eref, cm: ChannelMatrix, wtab, dt, n_steps,
                   rec_steps, qubits, photons, i0e, i1g) -> PureRecords:
    nrec = len(rec_steps)
    n_sites = qubits.shape[1]
    norms = np.empty(nrec)
    qpop = np.empty((nrec, n_sites))
    ppop = np.empty((nrec, n_sites))
    c0e = np.empty((nrec, n_sites), dtype=complex)
    c1g = np.empty((nrec, n_sites), dtype=complex)
    psi = np.array(psi0, dtype=complex, copy=True)
    if HAVE_NUMBA:
        _rk4_pure_numba(psi, np.asarray(eref, float), cm.indptr, cm.indices,
                        cm.data, cm.chan, wtab, dt, n_steps,
                        np.asarray(rec_steps, np.int64),
                        np.ascontiguousarray(qubits, np.int8),
                        np.ascontiguousarray(photons, np.int8),
                        np.asarray(i0e, np.int64), np.asarray(i1g, np.int64),
                        norms, qpop, ppop, c0e, c1g)
    else:
        _rk4_pure_numpy(psi, np.asarray(eref, float), cm, wtab, dt, n_steps,
                        np.asarray(rec_steps, np.int64), qubits, photons,
                        np.asarray(i0e, np.int64), np.asarray(i1g, np.int64),
                        norms, qpop, ppop, c0e, c1g)
    times = np.asarray(rec_steps, float) * dt
    return PureRecords(times=times, norms=norms, qubit_pop=qpop,
                       photon_pop=ppop, c0e=c0e, c1g=c1g,
                       final_state_lab=psi)


# ---------------------------------------------------------------------------
# Lindblad RK4 (density matrix)

@njit(cache=True)
def _lindblad_rhs(pv, rho, w, indptr, indices, data, chan, gamma,
                  jump_ptr, jump_src, jump_dst, jump_amp, f_elem, buf, out):
    dim = rho.shape[0]
    # buf = V(w) @ (P rho); out accumulates -i [Vt, rho] + dissipators
    for j in range(dim):
        for col in range(dim):
            out[j, col] = pv[j] * rho[j, col]
    for i in range(dim):
        for col in range(dim):
            buf[i, col] = 0.0 + 0.0j
        for k in range(indptr[i], indptr[i + 1]):
            v = data[k] * w[chan[k]]
            j = indices[k]
            for col in range(dim):
                buf[i, col] += v * out[j, col]
    # A = conj(pv) . buf ; out = -i (A - A^H) + f_elem * rho
    for i in range(dim):
        for j in range(dim):
            buf[i, j] = np.conj(pv[i]) * buf[i, j]
    for i in range(dim):
        for j in range(dim):
            a = buf[i, j] - np.conj(buf[j, i])
            out[i, j] = -1j * a + f_elem[i, j] * rho[i, j]
    # jump terms: gamma * Gamma rho Gamma^+
    n_ops = jump_ptr.shape[0] - 1
    for op in range(n_ops):
        lo = jump_ptr[op]
        hi = jump_ptr[op + 1]
        for p in range(lo, hi):
            sp_ = jump_src[p]
            dp = jump_dst[p]
            ap = jump_amp[p]
            for q in range(lo, hi):
                out[dp, jump_dst[q]] += (gamma * ap * np.conj(jump_amp[q])
                                         * rho[sp_, jump_src[q]])


@njit(cache=True)
def _rk4_lindblad_numba(rho, eref, indptr, indices, data, chan, wtab, dt,
                        n_steps, gamma, jump_ptr, jump_src, jump_dst,
                        jump_amp, f_elem, rec_steps, qubits, photons,
                        i0e, i1g, traces, qpop, ppop, blocks,
                        snap_steps, snaps):
    dim = rho.shape[0]
    n_sites = qubits.shape[1]
    half = 0.5 * dt
    ph_half = np.empty(dim, np.complex128)
    pv = np.empty(dim, np.complex128)
    for i in range(dim):
        ph_half[i] = complex(math.cos(eref[i] * half), -math.sin(eref[i] * half))
        pv[i] = 1.0 + 0.0j
    pv1 = np.empty(dim, np.complex128)
    pv2 = np.empty(dim, np.complex128)
    k1 = np.empty((dim, dim), np.complex128)
    k2 = np.empty((dim, dim), np.complex128)
    k3 = np.empty((dim, dim), np.complex128)
    k4 = np.empty((dim, dim), np.complex128)
    stage = np.empty((dim, dim), np.complex128)
    buf = np.empty((dim, dim), np.complex128)

    rec_ptr = 0
    snap_ptr = 0
    for step in range(n_steps + 1):
        if rec_ptr < rec_steps.shape[0] and step == rec_steps[rec_ptr]:
            tr = 0.0
            for i in range(dim):
                tr += rho[i, i].real
            traces[rec_ptr] = tr
            for l in range(n_sites):
                aq = 0.0
                ap = 0.0
                for i in range(dim):
                    aq += rho[i, i].real * qubits[i, l]
                    ap += rho[i, i].real * photons[i, l]
                qpop[rec_ptr, l] = aq
                ppop[rec_ptr, l] = ap
                ia = i0e[l]
                ib = i1g[l]
                blocks[rec_ptr, l, 0, 0] = rho[ia, ia]
                blocks[rec_ptr, l, 0, 1] = pv[ia] * rho[ia, ib] * np.conj(pv[ib])
                blocks[rec_ptr, l, 1, 0] = pv[ib] * rho[ib, ia] * np.conj(pv[ia])
                blocks[rec_ptr, l, 1, 1] = rho[ib, ib]
            rec_ptr += 1
        if snap_ptr < snap_steps.shape[0] and step == snap_steps[snap_ptr]:
            for i in range(dim):
                for j in range(dim):
                    snaps[snap_ptr, i, j] = pv[i] * rho[i, j] * np.conj(pv[j])
            snap_ptr += 1
        if step == n_steps:
            break

        for i in range(dim):
            pv1[i] = pv[i] * ph_half[i]
            pv2[i] = pv1[i] * ph_half[i]
        w0 = wtab[2 * step]
        w1 = wtab[2 * step + 1]
        w2_ = wtab[2 * step + 2]

        _lindblad_rhs(pv, rho, w0, indptr, indices, data, chan, gamma,
                      jump_ptr, jump_src, jump_dst, jump_amp, f_elem, buf, k1)
        for i in range(dim):
            for j in range(dim):
                stage[i, j] = rho[i, j] + half * k1[i, j]
        _lindblad_rhs(pv1, stage, w1, indptr, indices, data, chan, gamma,
                      jump_ptr, jump_src, jump_dst, jump_amp, f_elem, buf, k2)
        for i in range(dim):
            for j in range(dim):
                stage[i, j] = rho[i, j] + half * k2[i, j]
        _lindblad_rhs(pv1, stage, w1, indptr, indices, data, chan, gamma,
                      jump_ptr, jump_src, jump_dst, jump_amp, f_elem, buf, k3)
        for i in range(dim):
            for j in range(dim):
                stage[i, j] = rho[i, j] + dt * k3[i, j]
        _lindblad_rhs(pv2, stage, w2_, indptr, indices, data, chan, gamma,
                      jump_ptr, jump_src, jump_dst, jump_amp, f_elem, buf, k4)
        sixth = dt / 6.0
        for i in range(dim):
            for j in range(dim):
                rho[i, j] = rho[i, j] + sixth * (k1[i, j] + 2.0 * (k2[i, j]
                                                 + k3[i, j]) + k4[i, j])
            pv[i] = pv2[i]
        if (step + 1) % RENORM_EVERY == 0:
            t = (step + 1) * dt
            for i in range(dim):
                x = eref[i] * t
                pv[i] = complex(math.cos(x), -math.sin(x))
    # lab frame final
    for i in range(dim):
        for j in range(dim):
            rho[i, j] = pv[i] * rho[i, j] * np.conj(pv[j])


def _rk4_lindblad_numpy(rho, eref, cm: ChannelMatrix, wtab, dt, n_steps,
                        gamma, jump_ops, f_elem, rec_steps, qubits, photons,
                        i0e, i1g, traces, qpop, ppop, blocks,
                        snap_steps, snaps):
    dim = rho.shape[0]
    half = 0.5 * dt
    ph_half = np.exp(-1j * eref * half)
    pv = np.ones(dim, dtype=complex)
    qf = qubits.astype(float)
    pf = photons.astype(float)

    def rhs(pv_s, r, w):
        b = pv_s[:, None] * r
        u = cm.static @ b
        for c, link in enumerate(cm.links, start=1):
            if w[c] != 0.0:
                u += w[c] * (link @ b)
        a = np.conj(pv_s)[:, None] * u
        out = -1j * (a - a.conj().T) + f_elem * r
        for (src, dst, amp) in jump_ops:
            out[np.ix_(dst, dst)] += gamma * (
                (amp[:, None] * amp.conj()[None, :]) * r[np.ix_(src, src)])
        return out

    rec_ptr = 0
    snap_ptr = 0
    for step in range(n_steps + 1):
        if rec_ptr < len(rec_steps) and step == rec_steps[rec_ptr]:
            diag = np.real(np.diag(rho))
            traces[rec_ptr] = diag.sum()
            qpop[rec_ptr] = diag @ qf
            ppop[rec_ptr] = diag @ pf
            for l in range(qubits.shape[1]):
                ia, ib = i0e[l], i1g[l]
                blocks[rec_ptr, l, 0, 0] = rho[ia, ia]
                blocks[rec_ptr, l, 0, 1] = pv[ia] * rho[ia, ib] * np.conj(pv[ib])
                blocks[rec_ptr, l, 1, 0] = pv[ib] * rho[ib, ia] * np.conj(pv[ia])
                blocks[rec_ptr, l, 1, 1] = rho[ib, ib]
            rec_ptr += 1
        if snap_ptr < len(snap_steps) and step == snap_steps[snap_ptr]:
            snaps[snap_ptr] = (pv[:, None] * rho) * np.conj(pv)[None, :]
            snap_ptr += 1
        if step == n_steps:
            break
        pv1 = pv * ph_half
        pv2 = pv1 * ph_half
        k1 = rhs(pv, rho, wtab[2 * step])
        k2 = rhs(pv1, rho + half * k1, wtab[2 * step + 1])
        k3 = rhs(pv1, rho + half * k2, wtab[2 * step + 1])
        k4 = rhs(pv2, rho + dt * k3, wtab[2 * step + 2])
        rho += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        pv = pv2
        if (step + 1) % RENORM_EVERY == 0:
            pv = np.exp(-1j * eref * ((step + 1) * dt))
    rho *= pv[:, None]
    rho *= np.conj(pv)[None, :]


@dataclass
class LindbladRecords:
    times: np.ndarray
    traces: np.ndarray
    qubit_pop: np.ndarray
    photon_pop: np.ndarray
    site_blocks: np.ndarray      # (nrec, N, 2, 2) lab-frame 0e/1g blocks
    snapshot_times: np.ndarray
    snapshots: np.ndarray        # (nsnap, dim, dim) lab frame
    final_rho_lab: np.ndarray


def propagate_lindblad(rho0, eref, cm: ChannelMatrix, wtab, dt, n_steps,
                       gamma, jump_ops, f_elem, rec_steps, snap_steps,
                       qubits, photons, i0e, i1g) -> LindbladRecords:
    dim = rho0.shape[0]
    nrec = len(rec_steps)
    nsnap = len(snap_steps)
    n_sites = qubits.shape[1]
    traces = np.empty(nrec)
    qpop = np.empty((nrec, n_sites))
    ppop = np.empty((nrec, n_sites))
    blocks = np.empty((nrec, n_sites, 2, 2), dtype=complex)
    snaps = np.empty((nsnap, dim, dim), dtype=complex)
    rho = np.array(rho0, dtype=complex, copy=True)
    if HAVE_NUMBA:
        jump_ptr, jump_src, jump_dst, jump_amp = _pack_jumps(jump_ops)
        _rk4_lindblad_numba(rho, np.asarray(eref, float), cm.indptr,
                            cm.indices, cm.data, cm.chan, wtab, dt, n_steps,
                            gamma, jump_ptr, jump_src, jump_dst, jump_amp,
                            f_elem, np.asarray(rec_steps, np.int64),
                            np.ascontiguousarray(qubits, np.int8),
                            np.ascontiguousarray(photons, np.int8),
                            np.asarray(i0e, np.int64),
                            np.asarray(i1g, np.int64),
                            traces, qpop, ppop, blocks,
                            np.asarray(snap_steps, np.int64), snaps)
    else:
        _rk4_lindblad_numpy(rho, np.asarray(eref, float), cm, wtab, dt,
                            n_steps, gamma, jump_ops, f_elem,
                            np.asarray(rec_steps, np.int64), qubits, photons,
                            np.asarray(i0e, np.int64),
                            np.asarray(i1g, np.int64),
                            traces, qpop, ppop, blocks,
                            np.asarray(snap_steps, np.int64), snaps)
    return LindbladRecords(times=np.asarray(rec_steps, float) * dt,
                           traces=traces, qubit_pop=qpop, photon_pop=ppop,
                           site_blocks=blocks,
                           snapshot_times=np.asarray(snap_steps, float) * dt,
                           snapshots=snaps, final_rho_lab=rho)


def _pack_jumps(jump_ops):
    ptr = [0]
    srcs, dsts, amps = [], [], []
    for (src, dst, amp) in jump_ops:
        srcs.append(np.asarray(src, np.int64))
        dsts.append(np.asarray(dst, np.int64))
        amps.append(np.asarray(amp, np.complex128))
        ptr.append(ptr[-1] + len(src))
    if not srcs:
        return (np.zeros(1, np.int64), np.zeros(0, np.int64),
                np.zeros(0, np.int64), np.zeros(0, np.complex128))
    return (np.asarray(ptr, np.int64), np.concatenate(srcs),
            np.concatenate(dsts), np.concatenate(amps))
