"""Decay profiles and the gauge functions derived from them.

A decay profile is the prescribed lower envelope ``omega`` for the minimum
modulus.  From it we derive

    g(t) = log(1 / omega(1 - t/pi)) / (3 pi)
    h(t) = min(sqrt(t), inf_{s in [t, pi]} s g(s))

on (0, pi].  ``h`` is the measure function used to build the Cantor set and
its Frostman measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

PI = math.pi
FAMILIES = ("reciprocal-log", "iterated-log", "power", "table")


class InvalidProfileError(ValueError):
    pass


class DomainError(ValueError):
    pass


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _unwrap(arr, scalar):
    return float(arr) if scalar else arr


@dataclass(frozen=True)
class DecayProfile:
    """An admissible decay profile.

    Internally every family is evaluated through the gap ``d = 1 - r`` so that
    radii extremely close to 1 keep full relative precision.
    """

    family: str
    scale: float = 0.5
    exponent: float = 1.0
    breakpoints: tuple[tuple[float, float], ...] = ()
    tail: DecayProfile | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidProfileError(f"unknown profile family {self.family!r}")
        if self.family == "table":
            _check_table(self.breakpoints, self.tail)
            return
        if not self.scale > 0:
            raise InvalidProfileError("omega must be > 0 (scale must be positive)")
        if self.family == "power" and not self.exponent > 0:
            raise InvalidProfileError("omega must tend to 0 (power exponent must be positive)")
        w0 = float(self.omega_gap(1.0))
        if not w0 < 1:
            raise InvalidProfileError(f"omega must be < 1 (omega(0) = {w0!r})")

    def omega_gap(self, d):
        """omega(1 - d) for gaps d in (0, 1]."""
        d, scalar = _as_array(d)
        with np.errstate(divide="ignore", over="ignore"):
            if self.family == "reciprocal-log":
                out = self.scale / np.log(math.e + 1.0 / d)
            elif self.family == "iterated-log":
                out = self.scale / np.log(math.e + np.log(math.e + 1.0 / d))
            elif self.family == "power":
                out = self.scale * d**self.exponent / math.e
            else:
                out = self._table_gap(d)
        return _unwrap(out, scalar)

    def _table_gap(self, d, r=None):
        radii = np.array([p[0] for p in self.breakpoints])
        values = np.array([p[1] for p in self.breakpoints])
        r_last, v_last = radii[-1], values[-1]
        d_last = 1.0 - r_last
        # scaled tail joins the last breakpoint continuously
        k = v_last / self.tail.omega_gap(d_last)
        inner = np.interp(1.0 - d if r is None else r, radii, values)
        outer = k * self.tail.omega_gap(np.minimum(d, d_last))
        return np.where(d < d_last, outer, inner)

    def neg_log_omega_gap(self, d):
        """-log omega(1 - d), without underflow for fast power profiles."""
        if self.family == "power":
            d, scalar = _as_array(d)
            with np.errstate(divide="ignore"):
                out = 1.0 - math.log(self.scale) - self.exponent * np.log(d)
            return _unwrap(out, scalar)
        with np.errstate(divide="ignore"):
            return -np.log(self.omega_gap(d))

    def omega(self, r):
        r, scalar = _as_array(r)
        if np.any((r < 0) | (r >= 1)) or np.any(np.isnan(r)):
            raise DomainError("radius must lie in [0, 1)")
        if self.family == "table":
            # interpolate in r itself so breakpoint values are reproduced exactly
            return _unwrap(self._table_gap(1.0 - r, r), scalar)
        return _unwrap(self.omega_gap(1.0 - r), scalar)

    def radius_below(self, delta: float) -> float:
        """A radius r_delta with omega(r) < delta for every r > r_delta.

        Returns 1.0 when r_delta is closer to 1 than double precision resolves.
        """
        if not delta > 0:
            raise DomainError("delta must be positive")
        if delta > self.omega_gap(1.0):
            return 0.0
        if self.family == "reciprocal-log":
            x = self.scale / delta
            d = 1.0 / (math.exp(x) - math.e) if x < 700 else 0.0
        elif self.family == "iterated-log":
            x = self.scale / delta
            inner = math.exp(x) - math.e if x < 700 else math.inf
            d = 1.0 / (math.exp(inner) - math.e) if inner < 700 else 0.0
        elif self.family == "power":
            d = (delta * math.e / self.scale) ** (1.0 / self.exponent)
        else:
            radii = [p[0] for p in self.breakpoints]
            values = [p[1] for p in self.breakpoints]
            for i in range(1, len(radii)):
                if values[i] < delta:
                    r0, r1, v0, v1 = radii[i - 1], radii[i], values[i - 1], values[i]
                    return r0 + (r1 - r0) * (v0 - delta) / (v0 - v1) if v0 > delta else r0
            k = values[-1] / self.tail.omega_gap(1.0 - radii[-1])
            return max(radii[-1], self.tail.radius_below(delta / k))
        # 1.0 means no radius representable below 1 gets there
        return max(0.0, 1.0 - d)

    def to_dict(self) -> dict[str, Any]:
        if self.family == "table":
            return {
                "family": "table",
                "breakpoints": [list(p) for p in self.breakpoints],
                "tail": self.tail.to_dict(),
            }
        out: dict[str, Any] = {"family": self.family, "scale": self.scale}
        if self.family == "power" and self.exponent != 1.0:
            out["exponent"] = self.exponent
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DecayProfile:
        try:
            family = data["family"]
        except (KeyError, TypeError):
            raise InvalidProfileError("profile must carry a 'family' field") from None
        if family == "table":
            if "tail" not in data:
                raise InvalidProfileError("table profiles need an analytic 'tail'")
            tail = cls.from_dict(data["tail"])
            pts = tuple((float(r), float(v)) for r, v in data.get("breakpoints", []))
            return cls("table", breakpoints=pts, tail=tail)
        return cls(
            family,
            scale=float(data.get("scale", 0.5)),
            exponent=float(data.get("exponent", 1.0)),
        )


def _check_table(points, tail):
    if tail is None or tail.family == "table":
        raise InvalidProfileError("table profiles need an analytic tail family")
    if not points:
        raise InvalidProfileError("table profile needs at least one breakpoint")
    prev = -math.inf
    for r, v in points:
        if not 0 <= r < 1:
            raise InvalidProfileError(f"breakpoint radius {r!r} outside [0, 1)")
        if not r > prev:
            raise InvalidProfileError("breakpoint radii must be strictly increasing")
        if not v < 1:
            raise InvalidProfileError(f"omega must be < 1 (got {v!r} at r = {r!r})")
        if not v > 0:
            raise InvalidProfileError(f"omega must be > 0 (got {v!r} at r = {r!r})")
        prev = r
    if any(b[1] > a[1] for a, b in zip(points, points[1:])):
        raise InvalidProfileError("table breakpoints must be nonincreasing; use regularize_omega")


def regularize_omega(raw_samples, tail: DecayProfile) -> DecayProfile:
    """Least nonincreasing piecewise-linear majorant of the samples, with tail.

    Beyond the last sample the tail family is rescaled to meet the last
    envelope value, so the result is continuous and still tends to 0.
    """
    samples = [(float(r), float(v)) for r, v in raw_samples]
    if not samples:
        raise InvalidProfileError("need at least one sample")
    for r, v in samples:
        if not v < 1:
            raise InvalidProfileError(f"omega must be < 1 (got {v!r} at r = {r!r})")
        if not v > 0:
            raise InvalidProfileError(f"omega must be > 0 (got {v!r} at r = {r!r})")
    envelope = []
    running = 0.0
    for r, v in reversed(samples):
        running = max(running, v)
        envelope.append((r, running))
    envelope.reverse()
    return DecayProfile("table", breakpoints=tuple(envelope), tail=tail)


def omega(profile: DecayProfile, r):
    return profile.omega(r)


def _check_t(t):
    if np.any(~((t > 0) & (t <= PI))):
        raise DomainError("arc scale t must lie in (0, pi]")


class Gauge:
    """The pair (g, h) built from a decay profile.

    ``h`` uses the exact closed form ``min(sqrt(t), t g(t))`` when ``s g(s)``
    is nondecreasing on the sample grid.  Otherwise the suffix infimum is
    replaced by a lower bound: on each grid cell [s_j, s_{j+1}] we have
    s g(s) >= s_j g(s_{j+1}) because g is nonincreasing.
    """

    kind = "profile"

    def __init__(self, profile: DecayProfile, t_min: float = 1e-16, nodes: int = 4096):
        self.profile = profile
        self.t_min = t_min
        self.nodes = nodes
        s = np.geomspace(t_min, PI, nodes)
        s[-1] = PI
        gs = self.g(s)
        sg = s * gs
        self.closed_form = bool(np.all(np.diff(sg) >= 0))
        self._grid = s
        self._g_grid = gs
        cells = np.append(s[:-1] * gs[1:], PI * gs[-1])
        self._suffix = np.minimum.accumulate(cells[::-1])[::-1]
        self.h_pi = float(self.h(PI))

    def g(self, t):
        t, scalar = _as_array(t)
        _check_t(t)
        out = self.profile.neg_log_omega_gap(t / PI) / (3 * PI)
        return _unwrap(out, scalar)

    def h(self, t):
        t, scalar = _as_array(t)
        _check_t(t)
        root = np.sqrt(t)
        if self.closed_form:
            out = np.minimum(root, t * self.g(t))
        else:
            j = np.searchsorted(self._grid, t, side="right")
            inner = j < self.nodes
            jj = np.minimum(j, self.nodes - 1)
            cell = np.where(inner, np.minimum(t * self._g_grid[jj], self._suffix[jj]), np.inf)
            last = PI * self._g_grid[-1]
            out = np.minimum(root, np.where(inner, cell, last))
        return _unwrap(out, scalar)

    def h_inverse_bracket(self, y: float) -> tuple[float, float]:
        """Adjacent-ish pair (lo, hi) with h(lo) < y <= h(hi); hi is the leftmost preimage."""
        if not 0 < y <= self.h_pi:
            raise DomainError(f"y = {y!r} outside (0, h(pi)] = (0, {self.h_pi!r}]")
        lo, hi = 1e-300, PI
        if self.h(lo) >= y:
            return 0.0, lo
        while True:
            mid = math.sqrt(lo * hi) if hi > 4 * lo else 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                return lo, hi
            if self.h(mid) >= y:
                hi = mid
            else:
                lo = mid

    def h_inverse(self, y: float) -> float:
        return self.h_inverse_bracket(y)[1]

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "profile",
            "profile": self.profile.to_dict(),
            "t_min": self.t_min,
            "nodes": self.nodes,
        }


class PowerGauge:
    """Classical gauge h(t) = t**alpha, bypassing any decay profile.

    Test hook: alpha = log 2 / log 3 gives the middle-thirds geometry.
    ``g`` is taken as h(t)/t so that h <= t g holds with equality.
    """

    kind = "power"
    profile = None

    def __init__(self, alpha: float = math.log(2) / math.log(3)):
        if not 0 < alpha <= 1:
            raise DomainError("alpha must lie in (0, 1]")
        self.alpha = alpha
        self.h_pi = PI**alpha

    def g(self, t):
        t, scalar = _as_array(t)
        _check_t(t)
        return _unwrap(t ** (self.alpha - 1), scalar)

    def h(self, t):
        t, scalar = _as_array(t)
        _check_t(t)
        return _unwrap(t**self.alpha, scalar)

    def h_inverse_bracket(self, y: float) -> tuple[float, float]:
        if not 0 < y <= self.h_pi:
            raise DomainError(f"y = {y!r} outside (0, h(pi)]")
        t = min(y ** (1.0 / self.alpha), PI)
        while t < PI and self.h(t) < y:
            t = math.nextafter(t, math.inf)
        while t > 0 and self.h(math.nextafter(t, 0.0)) >= y:
            t = math.nextafter(t, 0.0)
        return math.nextafter(t, 0.0), t

    def h_inverse(self, y: float) -> float:
        return self.h_inverse_bracket(y)[1]

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "power", "alpha": self.alpha}


def gauge_from_dict(data: dict[str, Any]):
    kind = data.get("kind", "profile")
    if kind == "power":
        return PowerGauge(float(data["alpha"]))
    if kind == "profile":
        return Gauge(
            DecayProfile.from_dict(data["profile"]),
            t_min=float(data.get("t_min", 1e-16)),
            nodes=int(data.get("nodes", 4096)),
        )
    raise InvalidProfileError(f"unknown gauge kind {kind!r}")


def gauge_g(gauge, t):
    return gauge.g(t)


def gauge_h(gauge, t):
    return gauge.h(t)


def gauge_h_inverse(gauge, y):
    return gauge.h_inverse(y)
