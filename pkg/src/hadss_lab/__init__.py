"""Numerical checks of rigidity identities in the half anti-de Sitter--Schwarzschild model."""

from .errors import (ConfigError, ContractError, DomainError, GeometryError,
                     HadssError, IntegrationError, PreconditionError,
                     SolverError)
from .foliation import (FoliationTrace, LapseIdentityResidual, cmc_flow,
                        h_prime_at_zero, lapse_identity_check,
                        lemma41_model_check, mean_curvature_sign_check,
                        normalisation_check, swept_volume)
from .geometry import (GraphSurface, SurfaceGeometry, area, boundary_data,
                       gauss_bonnet_residual, integrate_scalar, slice_surface,
                       surface_geometry)
from .grid import HemisphereGrid, build_grid
from .jacobi import (OperatorAssembly, SpectralResult, area_estimate_check,
                     assemble, first_eigenpair, index_form, spectrum,
                     spectrum_pairs)
from .mass import (MassDerivativeTerms, MassReport, mass_derivative_terms,
                   minimal_disk_mass, modified_hawking_mass)
from .suite import run_suite
from .variation import (VariationFamily, fd_derivative,
                        first_variation_area_rhs, first_variation_mass_rhs,
                        second_variation_area_check,
                        stability_inequality_value, variation_family)
from .warp import (AmbientCurvature, WarpParams, WarpProfile, horizon_radius,
                   integrate_warp, mass_from_radius, ricci_normal,
                   scalar_curvature, slice_data)

__version__ = "0.1.0"

__all__ = [
    # errors
    "ConfigError", "ContractError", "DomainError", "GeometryError",
    "HadssError", "IntegrationError", "PreconditionError", "SolverError",
    # warp
    "AmbientCurvature", "WarpParams", "WarpProfile", "horizon_radius",
    "integrate_warp", "mass_from_radius", "ricci_normal", "scalar_curvature",
    "slice_data",
    # grids and surfaces
    "HemisphereGrid", "build_grid", "GraphSurface", "SurfaceGeometry", "area",
    "boundary_data", "gauss_bonnet_residual", "integrate_scalar",
    "slice_surface", "surface_geometry",
    # Jacobi operator
    "OperatorAssembly", "SpectralResult", "area_estimate_check", "assemble",
    "first_eigenpair", "index_form", "spectrum", "spectrum_pairs",
    # mass
    "MassDerivativeTerms", "MassReport", "mass_derivative_terms",
    "minimal_disk_mass", "modified_hawking_mass",
    # variations
    "VariationFamily", "fd_derivative", "first_variation_area_rhs",
    "first_variation_mass_rhs", "second_variation_area_check",
    "stability_inequality_value", "variation_family",
    # foliation
    "FoliationTrace", "LapseIdentityResidual", "cmc_flow", "h_prime_at_zero",
    "lapse_identity_check", "lemma41_model_check",
    "mean_curvature_sign_check", "normalisation_check", "swept_volume",
    # suite
    "run_suite", "__version__",
]
