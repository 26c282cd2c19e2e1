"""Minimum-modulus scans and certification of the decay estimate.

All comparisons are made on u = -log|S| so that nothing underflows when
|S| is astronomically small.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .cantor import CantorModel
from .gauge import PI, DomainError
from .poisson import PointMass, PrecisionError, evaluate, reduce_angle

GOLDEN = (math.sqrt(5) - 1) / 2
CSV_FIELDS = ["r", "min_modulus_lo", "min_modulus_hi", "argmin_theta", "omega_r",
              "proof_bound", "pass_estimate", "pass_proof_chain"]


class CircleMin(NamedTuple):
    lo: float
    hi: float
    argmin_theta: float
    u_max: float
    error: float
    evaluations: int


@dataclass
class ScanReport:
    r: float
    min_modulus_lo: float
    min_modulus_hi: float
    argmin_theta: float
    omega_r: float
    proof_bound: float
    pass_estimate: bool
    pass_proof_chain: bool
    u_max: float = math.nan
    indeterminate: bool = False

    @property
    def passed(self) -> bool:
        return self.pass_estimate and self.pass_proof_chain and not self.indeterminate


def scan_angles(measure, r: float) -> np.ndarray:
    """Equispaced grid of width ~ (1 - r) plus shallow Cantor endpoints, sorted."""
    n = max(1024, math.ceil(64 / (1 - r)))
    grid = -PI + 2 * PI * (np.arange(n) + 1) / n
    parts = [grid]
    if isinstance(measure, CantorModel):
        k = 0
        while k <= measure.depth and measure.lengths[k] >= 1 - r:
            parts.append(reduce_angle(measure.endpoints(k)))
            k += 1
    elif isinstance(measure, PointMass):
        parts.append(reduce_angle(np.array([measure.angle])))
    return np.unique(np.concatenate(parts))


def _golden_max(f, a: float, b: float, resolution: float):
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    best = max((f1, x1), (f2, x2), key=lambda p: p[0])
    while b - a > resolution:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
            cand = (f1, x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
            cand = (f2, x2)
        if cand[0] > best[0]:
            best = cand
    return best


def min_on_circle(measure, r: float, tol: float = 1e-9) -> CircleMin:
    """Minimum of |S| on |z| = r, via the maximum of u over the circle.

    The returned bracket is [exp(-u_max - tol), exp(-u_max + tol)]; its upper
    end is certified, its lower end is only as good as the angular grid.
    """
    if not 0 <= r < 1:
        raise DomainError("radius must lie in [0, 1)")
    thetas = scan_angles(measure, r)
    ev = evaluate(measure, r, thetas, tol)
    i = int(np.argmax(ev.u))
    u_best, theta_best, err = float(ev.u[i]), float(thetas[i]), float(ev.error[i])
    count = thetas.size
    if r > 0:
        lo = thetas[i - 1] if i > 0 else theta_best - 2 * PI / thetas.size
        hi = thetas[i + 1] if i + 1 < thetas.size else theta_best + 2 * PI / thetas.size
        errs = {}

        def f(t):
            e = evaluate(measure, r, [t], tol)
            errs[t] = float(e.error[0])
            return float(e.u[0])

        u_ref, t_ref = _golden_max(f, float(lo), float(hi), 1e-3 * (1 - r))
        count += len(errs)
        if u_ref > u_best:
            u_best, theta_best, err = u_ref, float(reduce_angle(t_ref)), errs[t_ref]
    return CircleMin(math.exp(-u_best - tol), math.exp(-u_best + tol), theta_best,
                     u_best, err, count)


def min_on_disk(measure, r: float, tol: float = 1e-9) -> CircleMin:
    """Minimum of |S| on |z| <= r.  S has no zeros, so it sits on the circle."""
    return min_on_circle(measure, r, tol)


def polar_grid_max_u(measure, r: float, n_radii: int = 100, n_angles: int = 100,
                     tol: float = 1e-9) -> float:
    """Largest u over a coarse polar grid filling |z| <= r."""
    best = -math.inf
    thetas = -PI + 2 * PI * (np.arange(n_angles) + 1) / n_angles
    for rho in np.linspace(0.0, r, n_radii):
        best = max(best, float(evaluate(measure, float(rho), thetas, tol).u.max()))
    return best


def certify_estimate(model, gauge, radii, tol: float = 1e-9) -> list[ScanReport]:
    """One ScanReport per radius; precision failures are marked indeterminate."""
    profile = gauge.profile
    reports = []
    for r in radii:
        r = float(r)
        if not 0 <= r < 1:
            raise DomainError(f"radius {r!r} outside [0, 1)")
        omega_r = float(profile.omega(r))
        log_bound = 3 * PI * float(gauge.g(PI * (1 - r)))
        proof_bound = math.exp(-log_bound)
        try:
            cm = min_on_circle(model, r, tol)
        except PrecisionError:
            reports.append(ScanReport(r, math.nan, math.nan, math.nan, omega_r, proof_bound,
                                      False, False, indeterminate=True))
            continue
        log_omega = math.log(omega_r)
        reports.append(ScanReport(
            r=r,
            min_modulus_lo=cm.lo,
            min_modulus_hi=cm.hi,
            argmin_theta=cm.argmin_theta,
            omega_r=omega_r,
            proof_bound=proof_bound,
            pass_estimate=-cm.u_max - tol >= log_omega,
            pass_proof_chain=cm.u_max <= -log_omega + tol,
            u_max=cm.u_max,
        ))
    return reports


class FastBound(NamedTuple):
    infimum: float
    values: np.ndarray


def fast_bound_check(a: float, radii) -> FastBound:
    """(min_{|z|<=r} |S|)^(1-r) for the point mass a, over the radii."""
    if not a > 0:
        raise DomainError("mass must be positive")
    radii = np.asarray(radii, dtype=float)
    pm = PointMass(0.0, a)
    values = np.array([math.exp(-(1 - r) * float(evaluate(pm, float(r), [0.0]).u[0]))
                       for r in radii])
    return FastBound(float(values.min()) if values.size else math.inf, values)


def radial_probe(measure, theta_star: float, radii, tol: float = 1e-9) -> np.ndarray:
    """|S(r e^{i theta*})| along the radius through a support point."""
    if isinstance(measure, CantorModel):
        if not measure.contains(theta_star, min(10, measure.depth)):
            raise DomainError("theta_star is not inside a generation-10 arc")
    elif isinstance(measure, PointMass):
        if float(reduce_angle(theta_star - measure.angle)) != 0:
            raise DomainError("theta_star is not the atom")
    return np.array([math.exp(-float(evaluate(measure, float(r), [theta_star], tol).u[0]))
                     for r in radii])


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return format(float(x), ".17g")


def reports_to_csv(reports: list[ScanReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    extra = any(rep.indeterminate for rep in reports)
    writer.writerow(CSV_FIELDS + (["status"] if extra else []))
    for rep in reports:
        row = [_fmt(getattr(rep, name)) for name in CSV_FIELDS]
        if extra:
            row.append("indeterminate" if rep.indeterminate else "ok")
        writer.writerow(row)
    return buf.getvalue()


def reports_to_json(reports: list[ScanReport]) -> str:
    rows = []
    for rep in reports:
        d = asdict(rep)
        rows.append({k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()})
    return json.dumps(rows, indent=2, sort_keys=True)
