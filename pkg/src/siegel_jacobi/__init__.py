"""Jacobi group actions, invariant metrics and Laplacians on the Siegel-Jacobi space."""

from .geometry import (
    Chart,
    MetricParams,
    MetricTensor,
    NumericalError,
    ScalarField,
    laplace_beltrami_apply,
    laplacian_apply,
    metric_quadratic_form,
    metric_tensor,
    pullback_metric,
    scalar_curvature,
    volume_density,
)
from .group import (
    DomainError,
    HeisenbergElement,
    JacobiGroupElement,
    JacobiPoint,
    SiegelPoint,
    SymplecticMatrix,
    TangentVector,
    act_jacobi,
    act_siegel,
    generators,
    heisenberg_mul,
    jacobi_inverse,
    jacobi_mul,
    random_element,
    tangent_map,
)
from .reduction import (
    LatticeBasis,
    ReductionResult,
    is_minkowski_reduced,
    is_siegel_reduced,
    jacobi_reduce,
    lattice_coords,
    minkowski_reduce,
    siegel_reduce,
    siegel_volume,
)
from .spectral import (
    EigenCandidate,
    TorusBasisIndex,
    bessel_k,
    check_eigenfunction,
    eigenfunction_catalog,
    riemann_conditions,
    torus_basis_fn,
    torus_inner_product,
    torus_laplacian_apply,
)

__all__ = [name for name in dir() if not name.startswith("_")]
