"""Realizability-preserving finite-volume solver for five-moment kinetic closures."""

from ._qbmm import (
    DEFAULT_A,
    Error,
    bgk_source,
    eqmom_forward,
    eqmom_invert,
    eqmom_m5,
    hankel,
    hll_flux,
    hyqmom_forward,
    hyqmom_invert,
    hyqmom_m5,
    initial_state,
    is_strictly_realizable,
    margins,
    maxwellian_moments,
    mu_star,
    preset_names,
    run,
    simulate,
    wave_speeds,
)

__all__ = [
    "DEFAULT_A",
    "Error",
    "bgk_source",
    "eqmom_forward",
    "eqmom_invert",
    "eqmom_m5",
    "hankel",
    "hll_flux",
    "hyqmom_forward",
    "hyqmom_invert",
    "hyqmom_m5",
    "initial_state",
    "is_strictly_realizable",
    "margins",
    "maxwellian_moments",
    "mu_star",
    "preset_names",
    "run",
    "simulate",
    "wave_speeds",
]
