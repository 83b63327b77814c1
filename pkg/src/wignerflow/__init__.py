"""Wigner quasi-probability flow analysis.

Phase-space currents of (an)harmonic quantum systems, their departure
from classical Liouvillian transport, and the continuity-equation fluxes
of probability, purity, von Neumann and Renyi entropies across classical
periodic orbits.
"""

from .classical import ClassicalOrbit, orbit_frame, period_quadrature, solve_orbit
from .currents import (
    CurrentField,
    MaskedField,
    MaskedVectorField,
    continuity_residual,
    current_k,
    current_x,
    delta_current,
    div_w,
    phase_velocity,
    wigner_current,
)
from .errors import ConfigError, RejectionError, WignerFlowError
from .fluxes import (
    FluxReport,
    OrbitRegion,
    interpolate_on_orbit,
    oracle_flux,
    orbit_interior_mask,
    period_accumulation,
    purity_flux,
    renyi_flux,
    sigma_flux,
    svn_flux,
    volume_term,
)
from .grid import (
    CoordinateGrid,
    DimensionlessMap,
    PhaseSpaceGrid,
    integrate_volume,
    partial_derivative,
)
from .observables import (
    WeylSymbol,
    expectation,
    hamiltonian_symbol,
    momentum_symbol,
    position_symbol,
    purity,
    renyi_entropy,
    unit_symbol,
    von_neumann_entropy,
)
from .potentials import PotentialModel, double_well, harmonic, pure_quartic, quartic_perturbed
from .states import (
    StateSpec,
    Wavefunction,
    WignerField,
    cat,
    coherent,
    evaluate_state,
    evolve_wavefunction,
    harmonic_eigenstate,
    superposition,
    wigner_transform,
)

__version__ = "0.1.0"
