"""Config-driven command line interface.

    jclatt <subcommand> --config <file> [--out <dir>] [--force]

Subcommands cover momentum-space analysis (bands, phases, loci), open-chain
edge analysis (edge-spectrum, edge-wavefunctions), dynamics experiments
(rabi, edge-dynamics, chiral, sweep), flux synthesis (synthesize), and
validate (schema + physics report, no computation).  Outputs are CSV data
files plus a summary.json embedding the config hash and tool version;
identical configs produce byte-identical outputs.

Exit codes: 0 success, 2 schema violation, 3 physics validation failure
(overridable with --force), 4 numerical abort.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .config import (ConfigError, EXPERIMENTS, basis_args_from_config,
                     circuit_from_config, config_hash, integrator_from_config,
                     lattice_from_config, load_config, noise_from_config,
                     physics_findings, zeeman_from_config)
from .defaults import DEFAULTS
from .units import mhz, to_mhz

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_PHYSICS = 3
EXIT_NUMERICAL = 4


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.12g" % float(x)
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_summary(outdir, cfg, payload):
    payload = dict(payload)
    payload["config_hash"] = config_hash(cfg)
    payload["tool_version"] = __version__
    with open(os.path.join(outdir, "summary.json"), "w",
              encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(x):
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x)}")


# ---------------------------------------------------------------------------
# experiment runners

def run_bands(cfg, outdir):
    from .effective import effective_zeeman
    from .topology import band_energies_grid
    top = cfg["topology"]
    t0 = mhz(float(top["t0_mhz"]))
    big_m = float(top.get("big_m_over_t0", 0.0)) * t0
    d = float(top.get("d_over_t0", 1.0)) * t0
    k_x = float(top.get("k_x_over_pi", 0.5)) * math.pi
    grid = int(top.get("grid", DEFAULTS["winding_map_grid"]))
    ks = np.linspace(-math.pi, math.pi, grid)
    e_plus = band_energies_grid(k_x, ks, ks, t0, big_m, d)
    rows = []
    wrows = []
    for i, ky in enumerate(ks):
        for j, kz in enumerate(ks):
            e = e_plus[i, j] / t0
            rows.append((ky / math.pi, kz / math.pi, e, -e))
            m_eff = effective_zeeman(big_m, d, ky, kz)
            # -1 marks points sitting on a nodal line (winding undefined)
            if abs(abs(m_eff) - 2.0 * t0) < 1e-12 * t0:
                nu = -1
            else:
                nu = 1 if abs(m_eff) < 2.0 * t0 else 0
            wrows.append((ky / math.pi, kz / math.pi, nu))
    write_csv(os.path.join(outdir, "bands.csv"),
              ["k_y_over_pi", "k_z_over_pi", "e_plus_over_t0",
               "e_minus_over_t0"], rows)
    write_csv(os.path.join(outdir, "winding_map.csv"),
              ["k_y_over_pi", "k_z_over_pi", "winding_number"], wrows)
    return {"experiment": "bands", "k_x_over_pi": k_x / math.pi,
            "min_gap_over_t0": float(e_plus.min() / t0),
            "checks": {"grid_written": True}}


def run_phases(cfg, outdir):
    from .topology import classify_phase
    top = cfg["topology"]
    t0 = mhz(float(top["t0_mhz"]))
    m_lo, m_hi = top.get("m_range_over_t0", (-6.0, 6.0))
    d_lo, d_hi = top.get("d_range_over_t0", (0.0, 3.0))
    m_steps = int(top.get("m_steps", 61))
    d_steps = int(top.get("d_steps", 31))
    rows = []
    counts = {}
    for big_m in np.linspace(m_lo, m_hi, m_steps):
        for d in np.linspace(d_lo, d_hi, d_steps):
            cell = classify_phase(big_m * t0, d * t0, t0, grid=3)
            counts[cell.label] = counts.get(cell.label, 0) + 1
            rows.append((big_m, d, cell.label))
    write_csv(os.path.join(outdir, "phase_diagram.csv"),
              ["big_m_over_t0", "d_over_t0", "label"], rows)
    return {"experiment": "phases", "label_counts": counts,
            "checks": {"all_labeled": sum(counts.values()) == len(rows)}}


def run_loci(cfg, outdir):
    from .topology import bloch_fields, nodal_loci
    top = cfg["topology"]
    t0 = mhz(float(top["t0_mhz"]))
    big_m = float(top.get("big_m_over_t0", 0.0)) * t0
    d = float(top.get("d_over_t0", 1.0)) * t0
    res = int(top.get("resolution", DEFAULTS["loci_grid"]))
    loci = nodal_loci(big_m, d, t0, resolution=res)
    rows = []
    max_residual = 0.0
    for plane, pts in sorted(loci.items()):
        k_x = math.pi / 2 if plane == "kx_plus" else -math.pi / 2
        for (ky, kz) in pts:
            e = bloch_fields(k_x, ky, kz, t0, big_m, d).e_plus
            max_residual = max(max_residual, e / t0)
            rows.append((plane, ky / math.pi, kz / math.pi))
    write_csv(os.path.join(outdir, "loci.csv"),
              ["plane", "k_y_over_pi", "k_z_over_pi"], rows)
    return {"experiment": "loci",
            "points": {p: len(v) for p, v in sorted(loci.items())},
            "max_energy_residual_over_t0": max_residual,
            "checks": {"on_zero_level": max_residual < 1e-8}}


def run_edge_spectrum(cfg, outdir):
    from .edges import open_chain_spectrum
    from .topology import GapClosedError, winding_analytic
    from .effective import effective_zeeman
    edge = cfg["edge"]
    t0 = mhz(float(edge["t0_mhz"]))
    n = int(edge["n_cells"])
    big_m = float(edge.get("big_m_over_t0", 0.0)) * t0
    d = float(edge.get("d_over_t0", 1.0)) * t0
    k_y = float(edge.get("k_y_over_pi", 0.0)) * math.pi
    lo, hi, count = edge.get("k_z_over_pi_range", (0.0, 1.0, 51))
    rows = []
    flags = []
    for kz_pi in np.linspace(float(lo), float(hi), int(count)):
        spec = open_chain_spectrum(n, t0, big_m, d, k_y, kz_pi * math.pi)
        m_eff = effective_zeeman(big_m, d, k_y, kz_pi * math.pi)
        try:
            nu = winding_analytic(m_eff, t0)
        except GapClosedError:
            nu = -1
        flags.append((kz_pi, spec.midgap, nu))
        for idx, e in enumerate(spec.energies):
            rows.append((kz_pi, idx, e / t0, spec.midgap))
    write_csv(os.path.join(outdir, "edge_spectrum.csv"),
              ["k_z_over_pi", "index", "energy_over_t0", "midgap_pair"],
              rows)
    write_csv(os.path.join(outdir, "midgap_flags.csv"),
              ["k_z_over_pi", "midgap_pair", "winding_analytic"], flags)
    agree = all(bool(f[1]) <= (f[2] == 1) for f in flags)
    return {"experiment": "edge-spectrum", "n_cells": n,
            "midgap_count": sum(1 for f in flags if f[1]),
            "checks": {"midgap_only_in_topological_range": agree}}


def run_edge_wavefunctions(cfg, outdir):
    from .edges import (analytic_edge_states, chiral_split_zero_modes,
                        edge_overlap, open_chain_spectrum, strip_gauge)
    edge = cfg["edge"]
    t0 = mhz(float(edge["t0_mhz"]))
    n = int(edge["n_cells"])
    big_m = float(edge.get("big_m_over_t0", 0.0)) * t0
    d = float(edge.get("d_over_t0", 1.0)) * t0
    k_y = float(edge.get("k_y_over_pi", 0.0)) * math.pi
    k_z = float(edge.get("k_z_over_pi", 0.7)) * math.pi
    spec = open_chain_spectrum(n, t0, big_m, d, k_y, k_z)
    ana = analytic_edge_states(n, spec.m_eff, t0)
    num_left, num_right = chiral_split_zero_modes(spec)
    report = edge_overlap(spec, ana)
    rows = []
    for label, num, an in (("left", num_left, ana.psi_left),
                           ("right", num_right, ana.psi_right)):
        ns = strip_gauge(num)
        pivot = ns[np.unravel_index(np.argmax(np.abs(ns)), ns.shape)]
        ns = ns * (abs(pivot) / pivot)
        asr = strip_gauge(an)
        for site in range(n):
            for s, spin in enumerate(("up", "down")):
                rows.append((label, site + 1, spin,
                             num[site, s].real, num[site, s].imag,
                             an[site, s].real, an[site, s].imag,
                             ns[site, s].real, ns[site, s].imag,
                             asr[site, s].real))
    write_csv(os.path.join(outdir, "edge_wavefunctions.csv"),
              ["edge", "site", "spin", "numeric_re", "numeric_im",
               "analytic_re", "analytic_im", "stripped_numeric_re",
               "stripped_numeric_im", "stripped_analytic_re"], rows)
    return {"experiment": "edge-wavefunctions", "n_cells": n,
            "m_eff_over_t0": spec.m_eff / t0, "q": ana.q,
            "left_fidelity": report.left_fidelity,
            "right_fidelity": report.right_fidelity,
            "checks": {"overlap_high": min(report.left_fidelity,
                                           report.right_fidelity) > 0.99}}


def run_rabi_cmd(cfg, outdir):
    from .dynamics import run_rabi_test, run_unmatched_tone_test
    lattice = lattice_from_config(cfg)
    drive = cfg["drive"]
    t0 = mhz(float(drive["t0_mhz"]))
    transition = tuple(drive.get("transition", ("up", "down")))
    m = zeeman_from_config(cfg)
    n_cycles = int(drive.get("n_cycles", 3))
    n_ph, n_exc = basis_args_from_config(cfg)
    from .basis import build_basis
    basis = build_basis(lattice, n_ph, n_exc)
    icfg = integrator_from_config(cfg)
    res = run_rabi_test(lattice, transition, t0, m, n_cycles, basis, icfg,
                        cfg.get("include_counter_rotating", True))
    write_csv(os.path.join(outdir, "rabi.csv"),
              ["t_us", "target_population", "initial_population"],
              zip(res.times, res.target_population, res.initial_population))
    write_csv(os.path.join(outdir, "rabi_peaks.csv"),
              ["cycle", "peak_population"],
              [(k + 1, p) for k, p in enumerate(res.cycle_peaks)])
    other = "down" if transition[0] == "up" else "up"
    sur = run_unmatched_tone_test(lattice, transition, other, t0,
                                  basis=basis, config=icfg)
    return {"experiment": "rabi", "transition": list(transition),
            "rabi_period_us": res.rabi_period,
            "cycle_peaks": list(res.cycle_peaks),
            "unmatched_min_survival": sur.min_survival,
            "unmatched_max_nontarget": sur.max_nontarget,
            "checks": {"addressing_works": res.cycle_peaks[-1] > 0.99,
                       "unmatched_survives": sur.min_survival > 0.99}}


def _dynamics_pieces(cfg):
    lattice = lattice_from_config(cfg)
    t0 = mhz(float(cfg["drive"]["t0_mhz"]))
    m = zeeman_from_config(cfg)
    n_ph, n_exc = basis_args_from_config(cfg)
    from .basis import build_basis
    basis = build_basis(lattice, n_ph, n_exc)
    return lattice, t0, m, basis


def run_edge_dynamics(cfg, outdir):
    from .dynamics import run_edge_detection
    lattice, t0, m, basis = _dynamics_pieces(cfg)
    res = run_edge_detection(
        lattice, t0, m, side=cfg.get("side", "left"),
        t_final=float(cfg.get("duration_us", DEFAULTS["edge_window_us"])),
        noise=noise_from_config(cfg), basis=basis,
        config=integrator_from_config(cfg),
        include_counter_rotating=cfg.get("include_counter_rotating", True))
    rec = res.record
    n = lattice.n_cells
    header = ["t_us"] + [f"density_site_{k + 1}" for k in range(n)]
    write_csv(os.path.join(outdir, "edge_densities.csv"), header,
              (np.column_stack([rec.times, rec.polariton_density])))
    write_csv(os.path.join(outdir, "edge_site_populations.csv"),
              ["t_us", "qubit_excitation", "photon_number"],
              zip(rec.times, rec.qubit_pop[:, res.edge_site - 1],
                  rec.photon_pop[:, res.edge_site - 1]))
    return {"experiment": "edge-dynamics", "side": res.side,
            "m_eff_over_t0": m / t0,
            "edge_density_final": res.edge_density_final,
            "edge_is_maximal": res.edge_is_maximal,
            "qubit_photon_correlation": res.qubit_photon_correlation,
            "final_densities": list(rec.polariton_density[-1]),
            "checks": {"norm_conserved":
                       bool(np.abs(rec.norm - 1).max() < 1e-5)}}


def run_chiral_cmd(cfg, outdir):
    from .dynamics import run_chiral_center
    lattice, t0, m, basis = _dynamics_pieces(cfg)
    res = run_chiral_center(
        lattice, t0, m,
        t_final=float(cfg.get("duration_us", DEFAULTS["chiral_window_us"])),
        noise=noise_from_config(cfg), basis=basis,
        config=integrator_from_config(cfg),
        include_counter_rotating=cfg.get("include_counter_rotating", True))
    rec = res.record
    cum = np.concatenate([[0.0], np.cumsum(
        0.5 * (rec.chiral_center[1:] + rec.chiral_center[:-1])
        * np.diff(rec.times))])
    with np.errstate(invalid="ignore", divide="ignore"):
        running = np.where(rec.times > 0, cum / np.maximum(rec.times, 1e-30),
                           rec.chiral_center)
    write_csv(os.path.join(outdir, "chiral_center.csv"),
              ["t_us", "chiral_center", "running_average"],
              zip(rec.times, rec.chiral_center, running))
    return {"experiment": "chiral", "m_eff_over_t0": m / t0,
            "center": res.center, "nu_estimate": res.nu_estimate,
            "center_drift": res.center_drift,
            "checks": {"norm_conserved":
                       bool(np.abs(rec.norm - 1).max() < 1e-5)}}


def run_sweep(cfg, outdir):
    from .dynamics import run_decoherence_sweep
    from .effective import effective_zeeman
    from .model import LatticeSpec
    lattice = lattice_from_config(cfg)
    sweep = cfg["sweep"]
    t0 = mhz(float(cfg["drive"]["t0_mhz"]))
    k_tr = float(sweep.get("k_z_trivial_over_pi", 0.3)) * math.pi
    k_nt = float(sweep.get("k_z_nontrivial_over_pi", 0.7)) * math.pi
    m_tr = effective_zeeman(0.0, t0, 0.0, k_tr)
    m_nt = effective_zeeman(0.0, t0, 0.0, k_nt)
    gammas = [mhz(float(g)) for g in sweep["gammas_mhz"]]
    n_list = [int(n) for n in sweep["n_cells_list"]]

    def lattice_for(n):
        return LatticeSpec(n_cells=n, cell_a=lattice.cell_a,
                           cell_b=lattice.cell_b)

    rows = run_decoherence_sweep(
        sweep["experiment"], lattice_for, t0, m_tr, m_nt, gammas, n_list,
        t_final=float(sweep.get("duration_us", cfg.get("duration_us", 1.0))),
        config=integrator_from_config(cfg),
        include_counter_rotating=cfg.get("include_counter_rotating", True))
    if sweep["experiment"] == "edge":
        write_csv(os.path.join(outdir, "sweep.csv"),
                  ["phase", "gamma_mhz", "n_cells", "edge_density_final",
                   "edge_is_maximal"],
                  [(r["phase"], to_mhz(r["gamma"]), r["n_cells"],
                    r["edge_density_final"], r["edge_is_maximal"])
                   for r in rows])
    else:
        write_csv(os.path.join(outdir, "sweep.csv"),
                  ["phase", "gamma_mhz", "n_cells", "center", "nu_estimate",
                   "center_drift"],
                  [(r["phase"], to_mhz(r["gamma"]), r["n_cells"],
                    r["center"], r["nu_estimate"], r["center_drift"])
                   for r in rows])
    metric = ("edge_density_final" if sweep["experiment"] == "edge"
              else "center")
    sep_ok = True
    for n in n_list:
        for g in gammas:
            tr = [r for r in rows if r["phase"] == "trivial"
                  and r["n_cells"] == n and r["gamma"] == g]
            nt = [r for r in rows if r["phase"] == "nontrivial"
                  and r["n_cells"] == n and r["gamma"] == g]
            if tr and nt and nt[0][metric] <= tr[0][metric]:
                sep_ok = False
    return {"experiment": "sweep", "kind": sweep["experiment"],
            "rows": len(rows),
            "checks": {"phases_separated": sep_ok}}


def run_synthesize(cfg, outdir):
    from .coupler import synthesize_flux_for_hopping
    from .model import DriveTone
    tones = [DriveTone(amplitude=mhz(float(t["t0_mhz"])),
                       frequency=mhz(float(t["frequency_mhz"])),
                       phase=float(t.get("phase_rad", 0.0)),
                       sign=int(t.get("sign", 1)))
             for t in cfg["synthesize"]["tones"]]
    circuit = circuit_from_config(cfg)
    syn = synthesize_flux_for_hopping(tones, circuit)
    flux = {
        "l_series_nh": syn.l_series * 1e9,
        "tones": [{"omega_amp": t.omega_amp,
                   "frequency_mhz": t.frequency / (2e6 * math.pi),
                   "phase_rad": t.phase} for t in syn.drive.tones],
        "ac_excursion_over_phi0": syn.report.ac_excursion_over_phi0,
    }
    with open(os.path.join(outdir, "flux_drive.json"), "w",
              encoding="utf-8") as fh:
        json.dump(flux, fh, sort_keys=True, indent=2)
        fh.write("\n")
    write_csv(os.path.join(outdir, "synthesis_verification.csv"),
              ["frequency_mhz", "target_amplitude_mhz",
               "recovered_amplitude_mhz", "amplitude_error",
               "target_phase_rad", "recovered_phase_rad", "phase_error_rad"],
              [(t.frequency / (2e6 * math.pi),
                t.target_amplitude / (2e6 * math.pi),
                t.recovered_amplitude / (2e6 * math.pi),
                t.amplitude_error, t.target_phase, t.recovered_phase,
                t.phase_error) for t in syn.report.tones])
    return {"experiment": "synthesize",
            "max_spurious_fraction": syn.report.max_spurious_fraction,
            "l_series_nh": syn.l_series * 1e9,
            "checks": {"round_trip_ok": syn.report.ok}}


_RUNNERS = {
    "bands": run_bands,
    "phases": run_phases,
    "loci": run_loci,
    "edge-spectrum": run_edge_spectrum,
    "edge-wavefunctions": run_edge_wavefunctions,
    "rabi": run_rabi_cmd,
    "edge-dynamics": run_edge_dynamics,
    "chiral": run_chiral_cmd,
    "sweep": run_sweep,
    "synthesize": run_synthesize,
}


def run(config_path, outdir, force=False) -> int:
    try:
        cfg = load_config(config_path)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    findings = physics_findings(cfg)
    if findings:
        for f in findings:
            print(f"physics: {f}", file=sys.stderr)
        if not force:
            print("refusing to run (--force overrides)", file=sys.stderr)
            return EXIT_PHYSICS
    os.makedirs(outdir, exist_ok=True)
    from .dynamics import NumericalAbort
    from .topology import GapClosedError
    try:
        payload = _RUNNERS[cfg["experiment"]](cfg, outdir)
    except (NumericalAbort, GapClosedError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        # hard physics invariants cannot be forced through
        print(f"physics: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    payload["physics_findings"] = findings
    write_summary(outdir, cfg, payload)
    checks = payload.get("checks", {})
    for name, ok in sorted(checks.items()):
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    print(f"outputs written to {outdir}")
    return EXIT_OK


def validate(config_path) -> int:
    try:
        cfg = load_config(config_path)
    except (ConfigError, OSError) as exc:
        print(f"schema: FAIL ({exc})")
        return EXIT_SCHEMA
    print("schema: PASS")
    findings = physics_findings(cfg)
    if findings:
        for f in findings:
            print(f"physics: {f}")
        print(f"physics: {len(findings)} finding(s)")
    else:
        print("physics: PASS")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="jclatt",
        description="Driven Jaynes-Cummings lattice simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*EXPERIMENTS, "run", "validate"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        if name != "validate":
            p.add_argument("--out", default="out")
            p.add_argument("--force", action="store_true")
    args = parser.parse_args(argv)
    if args.command == "validate":
        return validate(args.config)
    if args.command != "run":
        # subcommand must match the config's experiment
        try:
            cfg = load_config(args.config)
        except (ConfigError, OSError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_SCHEMA
        if cfg.get("experiment") != args.command:
            print(f"config is for experiment {cfg.get('experiment')!r}, "
                  f"not {args.command!r}", file=sys.stderr)
            return EXIT_SCHEMA
    return run(args.config, args.out, args.force)


if __name__ == "__main__":
    sys.exit(main())
