"""Slowly decaying singular inner functions built from Cantor-type Frostman measures."""

__version__ = "0.1.0"

from .cantor import (
    ArcMass,
    CantorModel,
    NodeAddress,
    arc_mass,
    build_model,
    calibrate_scaling,
    hausdorff_lower_bound,
    hausdorff_upper_bound,
    node_arc,
    verify_frostman,
)
from .gauge import DecayProfile, Gauge, PowerGauge, gauge_g, gauge_h, gauge_h_inverse, omega, regularize_omega
from .poisson import PointEval, PointMass, log_modulus, poisson_kernel, split_bound, value
from .scan import (
    ScanReport,
    certify_estimate,
    fast_bound_check,
    min_on_circle,
    min_on_disk,
    radial_probe,
)
