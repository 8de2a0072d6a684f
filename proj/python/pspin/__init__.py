"""Spherical mixed p-spin dynamics laboratory.

Thin Python layer over the compiled core: critical constants, the stationary
(FDT) solvers, the two-time integrator, non-crossing kernel utilities, and the
finite-N Langevin oracle.
"""

from pspin._core import (  # noqa: F401
    Mixture,
    PspinError,
    SoftPotential,
    TwoTimeGrid,
    __version__,
    apply_psi,
    beta_c,
    catalan,
    critical_profile,
    enumerate_nc,
    fdt_violation,
    gamma_of_beta,
    h_kernel,
    load_checkpoint,
    q_of_beta,
    response_bound_check,
    run_acceptance,
    save_checkpoint,
    simulate,
    solve_fdt,
    solve_soft,
    solve_spherical,
)

__all__ = [
    "Mixture",
    "PspinError",
    "SoftPotential",
    "TwoTimeGrid",
    "__version__",
    "apply_psi",
    "beta_c",
    "catalan",
    "critical_profile",
    "enumerate_nc",
    "fdt_violation",
    "gamma_of_beta",
    "h_kernel",
    "load_checkpoint",
    "q_of_beta",
    "response_bound_check",
    "run_acceptance",
    "save_checkpoint",
    "simulate",
    "solve_fdt",
    "solve_soft",
    "solve_spherical",
]
