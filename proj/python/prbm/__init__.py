"""Partially reflected Brownian motion toolkit.

Thin Python view of the compiled core: analytic half-space and disk laws,
Monte Carlo walkers, discrete Dirichlet-to-Neumann operators on lattices and
the chord coarse-graining comparison.
"""

from ._core import (
    Lattice,
    PrbmError,
    absorption_distribution,
    absorption_probability_disk,
    analytic_spectrum,
    annulus_impedance,
    ball_spread_density,
    disk_spread_density,
    dtn_matrix,
    dtn_spectrum,
    fixture_names,
    koch_channel,
    lsa_compare,
    poisson_kernel_disk,
    run_cli,
    self_transport,
    simulate,
    spread_density_halfplane,
    spread_kernel,
    stopping_time_cdf,
    stopping_time_density,
    stopping_time_sample,
    total_flux,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
