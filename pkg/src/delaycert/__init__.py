"""Delay-independent regions of attraction for monotone time-delay systems.

Typical use::

    from delaycert import example15, certify_region
    cert = certify_region(example15(r=0.5), [2.2, 2.0])
    cert.verified, cert.zeta
"""
from .certify import (Certificate, CertificationInfeasible, CertifyConfig, CheckResult, RazumikhinProfile,
                      certify_global, certify_point, certify_region, certify_shifted, compute_h, compute_T,
                      compute_V, compute_zeta, compute_zeta_global, run_sweep, select_tp, verify_field_sign,
                      verify_level_set)
from .core import Box, DenseTrajectory, HistorySegment, cmp_leq, cmp_ll, first_below, running_min, window_sup
from .integrate import (DivergenceError, EventSpec, IntegratorConfig, first_crossing, integrate_bounding,
                        integrate_dde, integrate_ode, integrate_ode_backward, write_csv)
from .systems import (CATALOG, ConfigurationError, DelaySignal, SystemDescriptor, catalog_system,
                      check_quasimonotonicity, check_subhomogeneity, domain_box, example15, from_expressions,
                      linear_positive, load_system, make_bounding_system, scalar_shifted, shift_to_origin)

__version__ = "0.1.0"

__all__ = [
    "Box", "CATALOG", "Certificate", "CertificationInfeasible", "CertifyConfig", "CheckResult",
    "ConfigurationError", "DelaySignal", "DenseTrajectory", "DivergenceError", "EventSpec", "HistorySegment",
    "IntegratorConfig", "RazumikhinProfile", "SystemDescriptor", "catalog_system", "certify_global",
    "certify_point", "certify_region", "certify_shifted", "check_quasimonotonicity", "check_subhomogeneity",
    "cmp_leq", "cmp_ll", "compute_T", "compute_V", "compute_h", "compute_zeta", "compute_zeta_global",
    "domain_box", "example15", "first_below", "first_crossing", "from_expressions", "integrate_bounding",
    "integrate_dde", "integrate_ode", "integrate_ode_backward", "linear_positive", "load_system",
    "make_bounding_system", "run_sweep", "running_min", "scalar_shifted", "select_tp", "shift_to_origin",
    "verify_field_sign", "verify_level_set", "window_sup", "write_csv",
]
