"""Independent numerical checks: integration over phase-space domains and exact samplers."""

from gibbs.oracle.integrate import (
    Domain,
    Estimate,
    GofResult,
    SampleBatch,
    gauss_quadrature,
    gaussian_truncation,
    gof_statistic,
    mc_integrate,
)

__all__ = [
    "Domain",
    "Estimate",
    "GofResult",
    "SampleBatch",
    "gauss_quadrature",
    "gaussian_truncation",
    "gof_statistic",
    "mc_integrate",
]
