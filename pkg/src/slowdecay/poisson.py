"""Evaluation of the singular inner function attached to a Cantor measure.

With F_r(s) = (1 + r e^{is}) / (1 - r e^{is}) = P_r(s) + i Q_r(s),

    S(r e^{i theta}) = exp(-int F_r(theta - t) dmu(t)),

so u = -log|S| is the Poisson integral of mu and v = arg(1/S) its conjugate.

The integral is computed by descending the Cantor tree.  A node of mass m
centred at x is symmetric about x, so odd moments vanish and

    int F(theta - t) dmu_node = m * sum_{k<K} F^(2k)(theta - x) mom_2k / (2k)! + R,
    |R| <= m * sup_node |F^(2K)| * mom_2K / (2K)!.

The sup is bounded through the partial-fraction expansion
F(s) = i cot((s + i delta)/2), delta = log(1/r), whose poles are at
s = 2 pi k - i delta.  A node at generation n is accepted when its bound is
at most tol * 2**-n, so the accepted bounds sum to at most tol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .cantor import CantorModel
from .gauge import PI, DomainError

TWO_PI = 2 * PI
TAYLOR_TERMS = 4
CHUNK = 2048


class PrecisionError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PointMass:
    """Point mass ``mass`` at ``angle``; closed-form test hook."""

    angle: float = 0.0
    mass: float = 1.0

    @property
    def total_mass(self) -> float:
        return self.mass

    def with_scale(self, c: float) -> PointMass:
        return PointMass(self.angle, self.mass * c)


class PointEval(NamedTuple):
    log_modulus_neg: float
    phase: float
    error_bound: float
    nodes_visited: int

    @property
    def modulus(self) -> float:
        return math.exp(-self.log_modulus_neg)

    def to_dict(self) -> dict:
        return {
            "log_modulus_neg": self.log_modulus_neg,
            "modulus": self.modulus,
            "phase": self.phase,
            "error_bound": self.error_bound,
        }


class Evaluation(NamedTuple):
    u: np.ndarray
    v: np.ndarray
    error: np.ndarray
    nodes: np.ndarray


def _check_r(r):
    if not 0 <= r < 1:
        raise DomainError("radius must lie in [0, 1)")


def reduce_angle(s):
    """Reduce to (-pi, pi]."""
    s = np.asarray(s, dtype=float)
    out = s - TWO_PI * np.round(s / TWO_PI)
    return np.where(out <= -PI, out + TWO_PI, out)


def _denominator(r, s):
    # 1 + r^2 - 2 r cos s without cancellation near s = 0, r = 1
    return (1 - r) ** 2 + 4 * r * np.sin(s / 2) ** 2


def poisson_kernel(r, s):
    _check_r(r)
    out = (1 - r) * (1 + r) / _denominator(r, np.asarray(s, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def conjugate_kernel(r, s):
    _check_r(r)
    s = np.asarray(s, dtype=float)
    out = 2 * r * np.sin(s) / _denominator(r, s)
    return float(out) if np.ndim(out) == 0 else out


def _numerators(jmax):
    """N_j with (w d/dw)^j 1/(1-w) = N_j(w) / (1-w)^(j+1)."""
    nums = [np.array([1.0])]
    for j in range(jmax):
        n = nums[-1]
        dn = npoly.polyder(n) if n.size > 1 else np.array([0.0])
        a = npoly.polymul([0.0, 1.0], npoly.polymul(dn, [1.0, -1.0]))
        b = (j + 1) * npoly.polymul([0.0, 1.0], n)
        nums.append(npoly.polyadd(a, b))
    return nums


_NUMERATORS = _numerators(2 * TAYLOR_TERMS)


def kernel_derivative(r, s, j):
    """j-th derivative in s of F_r(s) = P_r(s) + i Q_r(s)."""
    s = np.asarray(s, dtype=float)
    if j == 0:
        den = _denominator(r, s)
        return ((1 - r) * (1 + r) + 2j * r * np.sin(s)) / den
    w = r * np.exp(1j * s)
    q = (1 - r) + 2 * r * np.sin(s / 2) ** 2 - 1j * r * np.sin(s)
    num = npoly.polyval(w, _NUMERATORS[j])
    return 2 * (1j**j) * num / q ** (j + 1)


def derivative_bound(r, dist, j):
    """Bound on |F_r^(j)(s)| over all s at circular distance >= dist from 0."""
    if r == 0:
        return np.zeros_like(np.asarray(dist, dtype=float))
    delta = -math.log(r)
    near = (np.asarray(dist) ** 2 + delta**2) ** (-(j + 1) / 2)
    far = 2 * (1 + 1 / (2 * j)) / PI ** (j + 1)
    return 2 * math.factorial(j) * (near + far)


class _Moments:
    """Even moments of the normalized generation-n node measures, bracketed."""

    def __init__(self, model: CantorModel, K: int):
        ell = model.lengths
        N = model.depth
        lo = np.zeros((N + 1, K + 1))
        hi = np.zeros((N + 1, K + 1))
        lo[:, 0] = hi[:, 0] = 1.0
        for k in range(1, K + 1):
            hi[N, k] = (ell[N] / 2) ** (2 * k)
        for n in range(N - 1, -1, -1):
            a = model.offsets[n]
            for k in range(1, K + 1):
                coeffs = [math.comb(2 * k, 2 * i) * a ** (2 * k - 2 * i) for i in range(k + 1)]
                lo[n, k] = sum(c * lo[n + 1, i] for i, c in enumerate(coeffs))
                hi[n, k] = min(sum(c * hi[n + 1, i] for i, c in enumerate(coeffs)), (ell[n] / 2) ** (2 * k))
        self.mid = (lo + hi) / 2
        self.half = (hi - lo) / 2
        self.hi = hi


_MOMENT_CACHE: dict[int, tuple[CantorModel, _Moments]] = {}


def _moments(model: CantorModel) -> _Moments:
    key = id(model)
    hit = _MOMENT_CACHE.get(key)
    if hit is not None and hit[0] is model:
        return hit[1]
    mom = _Moments(model, TAYLOR_TERMS)
    if len(_MOMENT_CACHE) > 32:
        _MOMENT_CACHE.clear()
    _MOMENT_CACHE[key] = (model, mom)
    return mom


def _evaluate_chunk(model: CantorModel, r: float, thetas: np.ndarray, tol: float):
    K = TAYLOR_TERMS
    P = thetas.size
    mom = _moments(model)
    M = model.total_mass
    facts = [math.factorial(2 * k) for k in range(K + 1)]
    u = np.zeros(P)
    v = np.zeros(P)
    err = np.zeros(P)
    nodes = np.zeros(P, dtype=np.int64)
    pidx = np.arange(P)
    center = np.full(P, model.base_center)
    worst = 0.0
    for n in range(model.depth + 1):
        if pidx.size == 0:
            break
        nodes += np.bincount(pidx, minlength=P)
        s = reduce_angle(thetas[pidx] - center)
        dist = np.maximum(np.abs(s) - model.lengths[n] / 2, 0.0)
        rem = derivative_bound(r, dist, 2 * K) * (mom.hi[n, K] / facts[K])
        last = n == model.depth
        accept = (M * rem <= tol) | last
        if accept.any():
            sa = s[accept]
            total = np.zeros(sa.shape, dtype=complex)
            slack = rem[accept]
            for k in range(K):
                d = kernel_derivative(r, sa, 2 * k)
                total += d * (mom.mid[n, k] / facts[k])
                if k:
                    slack = slack + np.abs(d) * (mom.half[n, k] / facts[k])
            m = model.node_mass(n)
            pa = pidx[accept]
            u += np.bincount(pa, weights=m * total.real, minlength=P)
            v += np.bincount(pa, weights=m * total.imag, minlength=P)
            err += np.bincount(pa, weights=m * slack, minlength=P)
            if last:
                worst = max(worst, float((M * rem[accept]).max()) / tol)
        refine = ~accept
        pidx = pidx[refine]
        c = center[refine]
        a = model.offsets[n] if not last else 0.0
        pidx = np.concatenate([pidx, pidx])
        center = np.concatenate([c - a, c + a])
    return u, v, err, nodes, worst


def evaluate(measure, r: float, thetas, tol: float = 1e-9) -> Evaluation:
    """u, v and certified error bounds at r e^{i theta} for an array of angles."""
    _check_r(r)
    if not tol > 0:
        raise DomainError("tol must be positive")
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if isinstance(measure, PointMass):
        s = thetas - measure.angle
        u = measure.mass * poisson_kernel(r, s) * np.ones_like(thetas)
        v = measure.mass * conjugate_kernel(r, s) * np.ones_like(thetas)
        zero = np.zeros_like(thetas)
        return Evaluation(u, v, zero, np.ones(thetas.shape, dtype=np.int64))
    if r == 0:
        total = np.full(thetas.shape, measure.total_mass)
        return Evaluation(total, np.zeros_like(thetas), np.zeros_like(thetas),
                          np.ones(thetas.shape, dtype=np.int64))
    parts = []
    for i in range(0, thetas.size, CHUNK):
        part = _evaluate_chunk(measure, r, thetas[i:i + CHUNK], tol)
        # fail on the first chunk that misses, not after the whole grid
        if np.any(part[2] > tol):
            extra = _extra_generations(measure, part[4])
            raise PrecisionError(
                f"tolerance {tol:g} unreachable at r = {r!r} with {measure.depth} generations; "
                f"about {measure.depth + extra} needed"
            )
        parts.append(part)
    u, v, err, nodes = (np.concatenate([p[j] for p in parts]) for j in range(4))
    return Evaluation(u, v, err, nodes)


def _extra_generations(model: CantorModel, excess: float) -> int:
    ell = model.lengths
    rho = ell[-1] / ell[-2] if len(ell) > 1 else 0.5
    per_gen = 2 * (1 / max(rho, 1e-300)) ** (2 * TAYLOR_TERMS)
    return max(1, math.ceil(math.log(max(excess, 2.0)) / math.log(per_gen)))


def log_modulus(measure, r: float, theta: float, tol: float = 1e-9) -> PointEval:
    ev = evaluate(measure, r, [theta], tol)
    phase = float(math.remainder(ev.v[0], TWO_PI))
    return PointEval(float(ev.u[0]), phase, float(ev.error[0]), int(ev.nodes[0]))


def value(measure, r: float, theta: float, tol: float = 1e-9) -> complex:
    ev = log_modulus(measure, r, theta, tol)
    return complex(np.exp(-(ev.log_modulus_neg + 1j * ev.phase)))


def split_bound(gauge, r: float, epsilon: float) -> tuple[float, float]:
    """Near-field and far-field bounds on u(r e^{i theta}) for split radius epsilon."""
    _check_r(r)
    if not 0 < epsilon <= PI:
        raise DomainError("epsilon must lie in (0, pi]")
    g = float(gauge.g(epsilon))
    return 2 / (1 - r) * epsilon * g, PI * g
