"""Driven Jaynes-Cummings lattice simulator.

Builds the lab-frame multi-tone-driven lattice Hamiltonian, its
rotating-frame spin-1/2 reduction, nodal-loop momentum-space topology,
open-boundary edge states, Schroedinger/Lindblad dynamics, and the
SQUID-coupler flux synthesis layer, with a config-driven CLI.
"""

__version__ = "0.1.0"

from .basis import HilbertBasis, LatticeOperator, build_basis
from .model import (DressedLevels, DriveSchedule, DriveTone, LatticeSpec,
                    UnitCellParams, dressed_levels, drive_value,
                    four_tone_schedule, hopping_intervals,
                    nodal_drive_schedule, rabi_schedule)
from .effective import (EffectiveLatticeParams, NodalLoopParams,
                        build_effective_hamiltonian, build_nodal_chain,
                        effective_params_from_schedule, effective_zeeman,
                        gauge_transform, rotating_frame_map, validate_rwa)
from .topology import (BlochPoint, GapClosedError, PhaseDiagramCell,
                       bloch_fields, classify_phase, nodal_loci,
                       winding_analytic, winding_integral)
from .edges import (EdgeStatePair, SpectrumResult, analytic_edge_states,
                    edge_overlap, open_chain_spectrum)
from .dynamics import (IntegratorConfig, NoiseSpec, NumericalAbort,
                       TrajectoryRecord, evolve_effective, evolve_lindblad,
                       evolve_pure, lab_system, run_chiral_center,
                       run_decoherence_sweep, run_edge_detection,
                       run_rabi_test)
from .coupler import (FluxDrive, FluxTone, SquidCircuit, coupler_coefficient,
                      default_circuit, flux_waveform, squid_inductance,
                      synthesize_flux_for_hopping)

__all__ = [
    "__version__",
    # basis / operators
    "HilbertBasis", "LatticeOperator", "build_basis",
    # lattice model and drives
    "DressedLevels", "DriveSchedule", "DriveTone", "LatticeSpec",
    "UnitCellParams", "dressed_levels", "drive_value", "four_tone_schedule",
    "hopping_intervals", "nodal_drive_schedule", "rabi_schedule",
    # effective chain
    "EffectiveLatticeParams", "NodalLoopParams",
    "build_effective_hamiltonian", "build_nodal_chain",
    "effective_params_from_schedule", "effective_zeeman", "gauge_transform",
    "rotating_frame_map", "validate_rwa",
    # momentum space
    "BlochPoint", "GapClosedError", "PhaseDiagramCell", "bloch_fields",
    "classify_phase", "nodal_loci", "winding_analytic", "winding_integral",
    # edges
    "EdgeStatePair", "SpectrumResult", "analytic_edge_states",
    "edge_overlap", "open_chain_spectrum",
    # dynamics
    "IntegratorConfig", "NoiseSpec", "NumericalAbort", "TrajectoryRecord",
    "evolve_effective", "evolve_lindblad", "evolve_pure", "lab_system",
    "run_chiral_center", "run_decoherence_sweep", "run_edge_detection",
    "run_rabi_test",
    # coupler
    "FluxDrive", "FluxTone", "SquidCircuit", "coupler_coefficient",
    "default_circuit", "flux_waveform", "squid_inductance",
    "synthesize_flux_for_hopping",
]
