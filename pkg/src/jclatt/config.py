"""Experiment configuration: JSON schema validation and object building.

Config files carry plain frequencies in MHz (converted to angular rad/us
on load) and are validated strictly: unknown keys anywhere are rejected
before any computation.  Physics-level checks (JC regime, tone
separations, truncation sanity) are reported separately so the CLI can
distinguish schema errors (exit 2) from physics vetoes (exit 3).
"""

from __future__ import annotations

import hashlib
import json
import math

from .defaults import DEFAULTS
from .effective import effective_zeeman, validate_rwa
from .model import (SPIN_DOWN, SPIN_UP, LatticeSpec, UnitCellParams,
                    nodal_drive_schedule, rabi_schedule, schedule_from_dict,
                    validate_tone_separation)
from .units import mhz

EXPERIMENTS = ("bands", "phases", "loci", "edge-spectrum",
               "edge-wavefunctions", "rabi", "edge-dynamics", "chiral",
               "sweep", "synthesize")

_CELL_KEYS = {"omega_mhz", "g_mhz"}
_SECTION_KEYS = {
    "lattice": {"n_cells", "cell_a", "cell_b"},
    "basis": {"n_ph_max", "n_exc_max"},
    "integrator": {"frame", "dt_us", "n_records", "max_phase_step_slow",
                   "max_phase_step_cr", "drift_budget", "convergence_check"},
    "noise": {"gamma_mhz"},
    "drive": {"kind", "t0_mhz", "m_mhz", "transition", "links", "n_cycles"},
    "momentum": {"big_m_over_t0", "d_over_t0", "k_y_over_pi", "k_z_over_pi"},
    "topology": {"t0_mhz", "big_m_over_t0", "d_over_t0", "k_x_over_pi",
                 "grid", "n_kx", "resolution", "m_range_over_t0",
                 "d_range_over_t0", "m_steps", "d_steps"},
    "edge": {"n_cells", "t0_mhz", "big_m_over_t0", "d_over_t0",
             "k_y_over_pi", "k_z_over_pi", "k_z_over_pi_range"},
    "sweep": {"experiment", "gammas_mhz", "n_cells_list", "duration_us",
              "k_z_trivial_over_pi", "k_z_nontrivial_over_pi"},
    "circuit": {"i_c_ua", "l_res_nh", "c_res_pf", "n_dc"},
    "synthesize": {"tones"},
}
_TOP_KEYS = {"experiment", "seed", "duration_us", "side",
             "include_counter_rotating"} | set(_SECTION_KEYS)

_REQUIRED = {
    "bands": ["topology"],
    "phases": ["topology"],
    "loci": ["topology"],
    "edge-spectrum": ["edge"],
    "edge-wavefunctions": ["edge"],
    "rabi": ["lattice", "drive"],
    "edge-dynamics": ["lattice", "drive"],
    "chiral": ["lattice", "drive"],
    "sweep": ["lattice", "drive", "sweep"],
    "synthesize": ["synthesize"],
}


class ConfigError(ValueError):
    """Schema violation in a config file."""


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    errors = schema_errors(cfg)
    if errors:
        raise ConfigError("; ".join(errors))
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def schema_errors(cfg: dict) -> list:
    errors = []
    if not isinstance(cfg, dict):
        return ["config root must be an object"]
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        errors.append(f"unknown top-level keys: {sorted(unknown)}")
    exp = cfg.get("experiment")
    if exp not in EXPERIMENTS:
        errors.append(f"experiment must be one of {EXPERIMENTS}, got {exp!r}")
        return errors
    for section, allowed in _SECTION_KEYS.items():
        if section in cfg:
            if not isinstance(cfg[section], dict):
                errors.append(f"section {section!r} must be an object")
                continue
            bad = set(cfg[section]) - allowed
            if bad:
                errors.append(f"unknown keys in {section!r}: {sorted(bad)}")
    if "lattice" in cfg and isinstance(cfg["lattice"], dict):
        for cell in ("cell_a", "cell_b"):
            sub = cfg["lattice"].get(cell)
            if isinstance(sub, dict):
                bad = set(sub) - _CELL_KEYS
                if bad:
                    errors.append(f"unknown keys in lattice.{cell}: "
                                  f"{sorted(bad)}")
    for section in _REQUIRED[exp]:
        if section not in cfg:
            errors.append(f"experiment {exp!r} requires section "
                          f"{section!r}")
    if exp in ("rabi", "edge-dynamics", "chiral", "sweep"):
        kind = cfg.get("drive", {}).get("kind")
        expected = "rabi" if exp == "rabi" else "nodal"
        if kind != expected:
            errors.append(f"experiment {exp!r} needs drive.kind "
                          f"{expected!r}, got {kind!r}")
    return errors


def physics_findings(cfg: dict) -> list:
    """Physics-validation report: list of finding strings (empty = pass)."""
    findings = []
    exp = cfg["experiment"]
    lattice = None
    if "lattice" in cfg:
        try:
            import warnings as _w
            with _w.catch_warnings(record=True) as caught:
                _w.simplefilter("always")
                lattice = lattice_from_config(cfg)
            findings.extend(str(w.message) for w in caught)
        except ValueError as exc:
            findings.append(str(exc))
            return findings
    if "basis" in cfg:
        b = cfg["basis"]
        n_ph = int(b.get("n_ph_max", DEFAULTS["n_ph_max"]))
        n_exc = int(b.get("n_exc_max", DEFAULTS["n_exc_max"]))
        if lattice is not None and n_exc > lattice.n_cells * (n_ph + 1):
            findings.append("n_exc_max exceeds the lattice capacity")
        if n_exc < 3 and cfg.get("include_counter_rotating", True):
            findings.append(
                "n_exc_max < 3 cannot represent counter-rotating "
                "admixtures of single-excitation states")
    if lattice is not None and cfg.get("drive", {}).get("kind") in (
            "nodal", "rabi", "tones"):
        try:
            schedule, m = schedule_from_config(cfg, lattice)
        except ValueError as exc:
            findings.append(str(exc))
            return findings
        findings.extend(validate_tone_separation(schedule))
        report = validate_rwa(lattice, schedule, m)
        findings.extend(report.violations)
    return findings


# ---------------------------------------------------------------------------
# builders

def lattice_from_config(cfg: dict) -> LatticeSpec:
    lat = cfg["lattice"]
    return LatticeSpec(
        n_cells=int(lat["n_cells"]),
        cell_a=UnitCellParams.from_mhz(float(lat["cell_a"]["omega_mhz"]),
                                       float(lat["cell_a"]["g_mhz"])),
        cell_b=UnitCellParams.from_mhz(float(lat["cell_b"]["omega_mhz"]),
                                       float(lat["cell_b"]["g_mhz"])))


def zeeman_from_config(cfg: dict) -> float:
    """Effective Zeeman m in rad/us, from drive.m_mhz or the momentum block."""
    drive = cfg.get("drive", {})
    if "m_mhz" in drive:
        return mhz(float(drive["m_mhz"]))
    mom = cfg.get("momentum")
    if mom is None:
        return 0.0
    t0 = mhz(float(cfg["drive"]["t0_mhz"]))
    return effective_zeeman(
        float(mom.get("big_m_over_t0", 0.0)) * t0,
        float(mom.get("d_over_t0", 1.0)) * t0,
        float(mom.get("k_y_over_pi", 0.0)) * math.pi,
        float(mom.get("k_z_over_pi", 0.0)) * math.pi)


def schedule_from_config(cfg: dict, lattice: LatticeSpec):
    drive = cfg["drive"]
    kind = drive["kind"]
    m = zeeman_from_config(cfg)
    if kind == "nodal":
        t0 = mhz(float(drive["t0_mhz"]))
        return nodal_drive_schedule(lattice, t0, m), m
    if kind == "rabi":
        t0 = mhz(float(drive["t0_mhz"]))
        transition = tuple(drive["transition"])
        if transition[0] not in (SPIN_UP, SPIN_DOWN) or \
                transition[1] not in (SPIN_UP, SPIN_DOWN):
            raise ValueError(f"bad transition {transition}")
        return rabi_schedule(lattice, 1, transition, t0, m), m
    if kind == "tones":
        return schedule_from_dict(drive), m
    raise ValueError(f"unknown drive kind {kind!r}")


def basis_args_from_config(cfg: dict):
    b = cfg.get("basis", {})
    return (int(b.get("n_ph_max", DEFAULTS["n_ph_max"])),
            int(b.get("n_exc_max", DEFAULTS["n_exc_max"])))


def integrator_from_config(cfg: dict):
    from .dynamics import IntegratorConfig
    icfg = cfg.get("integrator", {})
    kwargs = {}
    if "frame" in icfg:
        kwargs["frame"] = icfg["frame"]
    if icfg.get("dt_us") is not None:
        kwargs["dt"] = float(icfg["dt_us"])
    if "n_records" in icfg:
        kwargs["n_records"] = int(icfg["n_records"])
    if "max_phase_step_slow" in icfg:
        kwargs["max_phase_step_slow"] = float(icfg["max_phase_step_slow"])
    if "max_phase_step_cr" in icfg:
        kwargs["max_phase_step_cr"] = float(icfg["max_phase_step_cr"])
    if icfg.get("drift_budget") is not None:
        kwargs["drift_budget"] = float(icfg["drift_budget"])
    if "convergence_check" in icfg:
        kwargs["convergence_check"] = bool(icfg["convergence_check"])
    return IntegratorConfig(**kwargs)


def noise_from_config(cfg: dict):
    from .dynamics import NoiseSpec
    if "noise" not in cfg:
        return None
    gamma = mhz(float(cfg["noise"].get("gamma_mhz", 0.0)))
    return NoiseSpec(gamma=gamma) if gamma > 0 else None


def circuit_from_config(cfg: dict):
    from .coupler import default_circuit, SquidCircuit
    if "circuit" not in cfg:
        return default_circuit()
    c = cfg["circuit"]
    l_res = tuple(x * 1e-9 for x in c.get("l_res_nh", (2.0, 2.0)))
    c_res = tuple(x * 1e-12 for x in c.get("c_res_pf", (3.4723, 3.4723)))
    return SquidCircuit(i_c=float(c.get("i_c_ua", 1.65)) * 1e-6,
                        l_series=1e-9, n_dc=int(c.get("n_dc", 1)),
                        res_inductance=l_res, res_capacitance=c_res)
