"""Invariant suites run by ``slowdecay verify``.

Each suite returns a plain dict with at least a boolean ``passed``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .cantor import CantorModel, calibrate_scaling, verify_frostman
from .gauge import PI
from .poisson import evaluate, poisson_kernel, split_bound

NORMALIZATION_RADII = (0.0, 0.5, 0.9, 0.99)


def frostman_suite(model: CantorModel, gauge, theta_grid=4096, scale_grid=512) -> dict:
    rep = verify_frostman(model, gauge, theta_grid, scale_grid)
    # the stored scale must not exceed what a fresh calibration allows
    c_safe, _ = calibrate_scaling(model.with_scale(1.0), gauge, model.depth)
    within = model.mass_scale <= c_safe * (1 + 1e-12)
    mass_ok = model.total_mass <= gauge.h_pi * (1 + 1e-15)
    return {
        "passed": bool(rep.passed and within and mass_ok),
        "max_ratio": rep.max_ratio,
        "argmax_theta": rep.theta,
        "argmax_t": rep.t,
        "mass_scale": model.mass_scale,
        "calibrated_scale": c_safe,
        "total_mass_within_h_pi": bool(mass_ok),
    }


def kernel_integral(r: float) -> float:
    """Adaptive quadrature of P_r over [0, pi]."""
    val, _ = integrate.quad(lambda s: poisson_kernel(r, s), 0.0, PI,
                            points=[0.0], epsabs=1e-13, epsrel=1e-13, limit=500)
    return val


def normalization_suite(radii=NORMALIZATION_RADII, tol: float = 1e-9) -> dict:
    errors = {str(r): abs(kernel_integral(r) - PI) for r in radii}
    return {"passed": all(e <= tol for e in errors.values()), "errors": errors}


def mean_value_gap(measure, z: complex, rho: float = 0.05, n: int = 360,
                   tol: float = 1e-9) -> tuple[float, float]:
    """|average of u over the circle |w - z| = rho  -  u(z)|, and the summed bound."""
    phis = 2 * PI * np.arange(n) / n
    pts = z + rho * np.exp(1j * phis)
    total = 0.0
    bound = 0.0
    for w in pts:
        ev = evaluate(measure, abs(w), [np.angle(w)], tol)
        total += ev.u[0]
        bound += ev.error[0]
    centre = evaluate(measure, abs(z), [np.angle(z)], tol)
    gap = abs(total / n - centre.u[0])
    return gap, bound / n + centre.error[0]


def mean_value_suite(measure, count: int = 20, seed: int = 0, tol: float = 1e-9) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    passed = True
    for _ in range(count):
        rad = rng.uniform(0.0, 0.85)
        z = rad * np.exp(1j * rng.uniform(-PI, PI))
        gap, bound = mean_value_gap(measure, z, tol=tol)
        worst = max(worst, gap)
        passed &= gap <= 1e-6 + bound
    return {"passed": bool(passed), "max_gap": worst}


def split_bound_suite(model: CantorModel, gauge, radii=(0.0, 0.5, 0.9, 0.99, 0.999),
                      thetas=64, tol: float = 1e-9) -> dict:
    angles = -PI + 2 * PI * (np.arange(thetas) + 1) / thetas
    worst = -math.inf
    for r in radii:
        u = evaluate(model, r, angles, tol).u
        for eps in (PI * (1 - r), PI, PI * math.sqrt(1 - r)):
            eps = min(max(eps, 1e-300), PI)
            near, far = split_bound(gauge, r, eps)
            worst = max(worst, float(u.max()) - (near + far))
    return {"passed": bool(worst <= tol), "max_excess": worst}


def scaling_suite(model: CantorModel, scales=(0.5, 0.25), radii=(0.5, 0.9, 0.99),
                  thetas=32, tol: float = 1e-9) -> dict:
    angles = -PI + 2 * PI * (np.arange(thetas) + 1) / thetas
    unit = model.with_scale(1.0)
    worst = 0.0
    passed = True
    for r in radii:
        base = evaluate(unit, r, angles, tol)
        for c in scales:
            scaled = evaluate(model.with_scale(c), r, angles, tol)
            gap = np.abs(scaled.u - c * base.u)
            worst = max(worst, float(gap.max()))
            passed &= bool(np.all(gap <= scaled.error + c * base.error + 1e-15))
    return {"passed": bool(passed), "max_gap": worst}


def run_all(model: CantorModel, gauge) -> dict:
    suites = {
        "frostman": frostman_suite(model, gauge),
        "normalization": normalization_suite(),
        "mean_value": mean_value_suite(model),
        "split_bound": split_bound_suite(model, gauge),
        "scaling": scaling_suite(model),
    }
    return {"passed": all(s["passed"] for s in suites.values()), "suites": suites}
