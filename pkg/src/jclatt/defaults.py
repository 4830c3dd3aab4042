"""Central table of default numeric thresholds and grid sizes.

Every tolerance or grid default used by the library lives here and can be
overridden per call or per config file.  See README for the documented
table.
"""

DEFAULTS = {
    # Hilbert space truncation
    "n_ph_max": 2,
    "n_exc_max": 3,
    # basis size above which density-matrix propagation warns
    "lindblad_dim_guard": 2000,
    # JC regime validation: hard error / warning thresholds on g/omega
    "g_over_omega_max": 0.2,
    "g_over_omega_warn": 0.1,
    # frequency-addressing separation: tone spacing >= factor * t0
    "tone_separation_factor": 20.0,
    # Hermiticity tolerance (relative to max |H|)
    "hermiticity_rtol": 1e-12,
    # fixed-step RK4: phase advanced per step by slow (resonant/detuned)
    # terms and by counter-rotating terms, in radians
    "max_phase_step_slow": 0.05,
    "max_phase_step_cr": 0.60,
    # pure-state norm drift / density-matrix trace drift abort threshold
    "norm_drift_max": 1e-6,
    # density-matrix positivity abort threshold (most negative eigenvalue)
    "positivity_min_eig": -1e-6,
    # records per trajectory
    "n_records": 1200,
    # momentum-space grids
    "winding_n_kx": 512,
    "winding_map_grid": 201,
    "phase_map_grid": 41,
    "loci_grid": 256,
    # winding integral refuses below this gap (units of t0_eff)
    "winding_min_gap": 1e-6,
    # open-chain mid-gap detection: |E| < threshold * t0_eff and
    # bulk gap > bulk_factor * threshold * t0_eff
    "midgap_threshold": 1e-3,
    "midgap_bulk_factor": 10.0,
    # loci refinement: |m' -+ 2 t0| tolerance relative to t0_eff
    "loci_refine_tol": 1e-10,
    # time-averaged chiral center window (us)
    "chiral_window_us": 2.0,
    "edge_window_us": 0.5,
}
