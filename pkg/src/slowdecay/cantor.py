"""Generalized binary Cantor sets and their Frostman measures.

Generation n holds 2**n closed arcs of common length ``lengths[n]``; each arc
has two children of the next length, flush with its two ends.  The measure
gives every generation-n arc the mass ``total_mass * 2**-n``.  Arcs live on
the real line inside the base arc ``[base_center - l0/2, base_center + l0/2]``
and are read modulo 2 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, NamedTuple

import numpy as np

from .gauge import PI, DomainError, gauge_from_dict

TWO_PI = 2 * PI
MAX_GENERATIONS = 64
MIN_LENGTH = 1e-18
# node mass below which arc_mass stops descending, relative to the total
MASS_RESOLUTION_BITS = 50
CALIBRATION_GENERATIONS = 40
# generations kept between the calibration scales and the mass resolution
CALIBRATION_MARGIN = 10
POSITION_RESOLUTION = 1e-12


class ConstructionError(RuntimeError):
    pass


class CalibrationError(RuntimeError):
    pass


class ArcMass(NamedTuple):
    value: float
    lo: float
    hi: float


@dataclass(frozen=True)
class NodeAddress:
    generation: int
    path: str = ""

    def __post_init__(self):
        if self.generation < 0 or len(self.path) != self.generation:
            raise DomainError("path length must equal the generation")
        if set(self.path) - {"0", "1"}:
            raise DomainError("path must be a bit string")


@dataclass(frozen=True, eq=False)
class CantorModel:
    lengths: np.ndarray
    gauge: Any = None
    base_center: float = 0.0
    mass_scale: float = 1.0
    m0: float = 1.0
    calibration: dict | None = None
    offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lengths = np.asarray(self.lengths, dtype=float)
        if lengths.ndim != 1 or lengths.size == 0:
            raise ConstructionError("lengths must be a nonempty 1-d array")
        if np.any(lengths[1:] > lengths[:-1] / 2):
            raise ConstructionError("nesting violated: need l_{n+1} <= l_n / 2")
        if not 0 < lengths[0] <= TWO_PI:
            raise ConstructionError("base arc length must lie in (0, 2 pi]")
        lengths.setflags(write=False)
        object.__setattr__(self, "lengths", lengths)
        # child centres sit at parent centre -/+ offsets[n]
        offsets = (lengths[:-1] - lengths[1:]) / 2
        offsets.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)

    @property
    def depth(self) -> int:
        return len(self.lengths) - 1

    @property
    def total_mass(self) -> float:
        return self.mass_scale * self.m0

    @property
    def base_arc(self) -> tuple[float, float]:
        half = self.lengths[0] / 2
        return self.base_center - half, self.base_center + half

    def node_mass(self, generation: int) -> float:
        return math.ldexp(self.total_mass, -generation)

    def with_scale(self, c: float) -> CantorModel:
        return replace(self, mass_scale=c)

    def shifted(self, delta: float) -> CantorModel:
        return replace(self, base_center=self.base_center + delta)

    def endpoints(self, generation: int) -> np.ndarray:
        """Left and right endpoints of every generation-n arc, sorted."""
        centers = np.array([self.base_center])
        for n in range(generation):
            a = self.offsets[n]
            centers = np.stack([centers - a, centers + a], axis=1).ravel()
        half = self.lengths[generation] / 2
        return np.stack([centers - half, centers + half], axis=1).ravel()

    @property
    def position_error(self) -> float:
        """Bound on the float error of any node endpoint or centre."""
        G = min(self.depth, MASS_RESOLUTION_BITS)
        return (G + 3) * 2.0**-53 * (abs(self.base_center) + self.lengths[0])

    def cdf_units(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Bracket of mu((-inf, x]) in integer units of total_mass * 2**-G.

        Works on the unwrapped line.  Exact integer arithmetic, so that masses
        of short arcs do not suffer cancellation.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        G = min(self.depth, MASS_RESOLUTION_BITS)
        start, end = self.base_arc
        lo = np.zeros(x.shape, dtype=np.int64)
        lo[x >= end] = 1 << G
        active = np.flatnonzero((x >= start) & (x < end))
        xa = x[active]
        center = np.full(xa.shape, self.base_center)
        acc = np.zeros(xa.shape, dtype=np.int64)
        for n in range(G):
            half = self.lengths[n] / 2
            child = self.lengths[n + 1]
            left_end = center - half + child
            right_start = center + half - child
            go_left = xa <= left_end
            go_right = xa >= right_start
            unit = np.int64(1 << (G - n - 1))
            acc[~go_left] += unit
            keep = go_left | go_right
            a = self.offsets[n]
            center = np.where(go_left, center - a, center + a)
            if not keep.all():
                lo[active[~keep]] = acc[~keep]
                active, xa, center, acc = active[keep], xa[keep], center[keep], acc[keep]
            if active.size == 0:
                break
        hi = lo.copy()
        lo[active] = acc
        hi[active] = acc + 1
        return lo, hi

    def _units_to_mass(self, units):
        G = min(self.depth, MASS_RESOLUTION_BITS)
        return np.ldexp(units.astype(float), -G) * self.total_mass

    def arc_mass_many(self, a, b) -> tuple[np.ndarray, np.ndarray]:
        """Lower and upper mass brackets for closed arcs [a, b] (radians)."""
        a = np.atleast_1d(np.asarray(a, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        width = b - a
        if np.any(width < 0) or np.any(width > TWO_PI) or np.any(~np.isfinite(width)):
            raise DomainError("arc length must lie in [0, 2 pi]")
        full = width >= TWO_PI
        lo = np.zeros(a.shape, dtype=np.int64)
        hi = np.zeros(a.shape, dtype=np.int64)
        start, end = self.base_arc
        # shift each arc so that its left end lies in [start - 2 pi, start)
        k = np.floor((a - start) / TWO_PI) + 1
        a0 = a - k * TWO_PI
        for shift in (0.0, TWO_PI):
            sa, sb = a0 + shift, b - k * TWO_PI + shift
            hit = (sb >= start) & (sa <= end) & ~full
            if not hit.any():
                continue
            idx = np.flatnonzero(hit)
            # float endpoints may sit up to eps away from the exact ones
            eps = self.position_error
            blo = self.cdf_units(sb[idx] - eps)[0]
            bhi = self.cdf_units(sb[idx] + eps)[1]
            alo = self.cdf_units(sa[idx] - eps)[0]
            ahi = self.cdf_units(sa[idx] + eps)[1]
            lo[idx] += np.maximum(blo - ahi, 0)
            hi[idx] += bhi - alo
        G = min(self.depth, MASS_RESOLUTION_BITS)
        lo[full] = 1 << G
        hi[full] = 1 << G
        return self._units_to_mass(lo), self._units_to_mass(hi)

    def contains(self, theta: float, generation: int) -> bool:
        """Whether theta (mod 2 pi) lies in some generation-n arc."""
        start, end = self.base_arc
        x = start + (theta - start) % TWO_PI
        if x > end:
            return False
        center = self.base_center
        for n in range(generation):
            half = self.lengths[n] / 2
            child = self.lengths[n + 1]
            if x <= center - half + child:
                center -= self.offsets[n]
            elif x >= center + half - child:
                center += self.offsets[n]
            else:
                return False
        return True

    def to_dict(self) -> dict[str, Any]:
        return {
            "gauge": self.gauge.to_dict() if self.gauge is not None else None,
            "base_center": self.base_center,
            "m0": self.m0,
            "mass_scale": self.mass_scale,
            "depth": self.depth,
            "lengths": [float(x) for x in self.lengths],
            "calibration": self.calibration,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CantorModel:
        lengths = data["lengths"]
        if len(lengths) != int(data["depth"]) + 1:
            raise ValueError(
                f"schema error: lengths has {len(lengths)} entries, depth says {int(data['depth']) + 1}"
            )
        gauge = gauge_from_dict(data["gauge"]) if data.get("gauge") else None
        return cls(
            np.array(lengths, dtype=float),
            gauge=gauge,
            base_center=float(data["base_center"]),
            mass_scale=float(data["mass_scale"]),
            m0=float(data["m0"]),
            calibration=data.get("calibration"),
        )


def node_arc(model: CantorModel, addr: NodeAddress) -> tuple[float, float]:
    if addr.generation > model.depth:
        raise DomainError(f"generation {addr.generation} beyond materialized depth {model.depth}")
    start = model.base_arc[0]
    for n, bit in enumerate(addr.path):
        if bit == "1":
            start += model.lengths[n] - model.lengths[n + 1]
    return start, start + model.lengths[addr.generation]


def arc_mass(model: CantorModel, arc: tuple[float, float]) -> ArcMass:
    """Mass of the closed arc, with a two-sided bracket."""
    a, b = arc
    lo, hi = model.arc_mass_many(a, b)
    return ArcMass(float(lo[0] + hi[0]) / 2, float(lo[0]), float(hi[0]))


def generation_lengths(gauge, m0: float, depth: int) -> np.ndarray:
    h_pi = gauge.h_pi

    def fit(y):
        if y >= h_pi:
            return PI
        t = gauge.h_inverse_bracket(y)[0]
        return t

    lengths = [fit(m0)]
    if not lengths[0] > 1e-300:
        raise ConstructionError(f"base length underflows (h(pi) = {h_pi!r}, m0 = {m0!r})")
    for n in range(1, depth + 1):
        ell = min(fit(math.ldexp(m0, -n)), lengths[-1] / 2)
        if ell < MIN_LENGTH:
            break
        lengths.append(ell)
    return np.array(lengths)


def build_model(
    gauge,
    depth_hint: int = MAX_GENERATIONS,
    m0: float | None = None,
    base_center: float = 0.0,
    calibrate: bool = True,
) -> CantorModel:
    """Cantor model for the gauge, with its mass scale calibrated.

    ``m0`` defaults to ``min(1, h(pi))`` so that generation 0 already obeys
    the total-mass bound.
    """
    if depth_hint < 1:
        raise DomainError("depth_hint must be >= 1")
    if m0 is None:
        m0 = min(1.0, gauge.h_pi)
    if not m0 > 0:
        raise ConstructionError("m0 must be positive")
    depth = min(depth_hint, MAX_GENERATIONS)
    lengths = generation_lengths(gauge, m0, depth)
    model = CantorModel(lengths, gauge=gauge, base_center=base_center, m0=m0)
    if calibrate:
        c, report = calibrate_scaling(model, gauge, model.depth)
        model = replace(model, mass_scale=c, calibration=report)
    return model


def _path_centers(model: CantorModel, generation: int, paths) -> np.ndarray:
    centers = []
    for path in paths:
        c = model.base_center
        for n, bit in enumerate(path[:generation]):
            c += model.offsets[n] if bit == "1" else -model.offsets[n]
        centers.append(c)
    return np.array(centers)


def critical_anchors(model: CantorModel, max_generation: int, full_depth: int = 10,
                     samples: int = 16, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints of generation-k arcs used as critical arc anchors.

    Every endpoint up to ``full_depth``; deeper generations use the extremal
    paths plus a seeded random sample of nodes.  Returns (points, generation).
    """
    rng = np.random.default_rng(seed)
    pts, gens = [], []
    for k in range(min(max_generation, model.depth) + 1):
        if k <= full_depth:
            e = model.endpoints(k)
        else:
            paths = ["0" * k, "1" * k, "0" + "1" * (k - 1), "1" + "0" * (k - 1),
                     ("01" * k)[:k], ("10" * k)[:k]]
            paths += ["".join(rng.choice(["0", "1"], size=k)) for _ in range(samples)]
            c = _path_centers(model, k, paths)
            half = model.lengths[k] / 2
            e = np.concatenate([c - half, c + half])
        pts.append(e)
        gens.append(np.full(e.shape, k))
    return np.concatenate(pts), np.concatenate(gens)


def calibrate_scaling(model: CantorModel, gauge, max_generation: int) -> tuple[float, dict]:
    """Mass scale c = min(1, h(pi)/m0, 1/(2M)).

    M is the largest ratio mu(arc)/h(half-width) of the unscaled measure over
    arcs anchored at arc endpoints, with widths taken from the generation
    lengths, the sibling gaps and their midpoints.
    """
    unit = model.with_scale(1.0)
    G = max(1, min(max_generation, CALIBRATION_GENERATIONS, model.depth))
    # arc positions are only resolved to about 1e-16 in absolute terms
    while G > 1 and model.lengths[G] < POSITION_RESOLUTION:
        G -= 1
    # below this generation the mass bracket slack rivals the node masses
    resolved = min(G, min(model.depth, MASS_RESOLUTION_BITS) - CALIBRATION_MARGIN)
    ell = model.lengths
    widths = [ell[0]]
    for j in range(1, G + 1):
        gap = ell[j - 1] - ell[j]
        widths += [ell[j], gap, 0.5 * (ell[j] + gap), ell[j - 1], 0.5 * (ell[j] + ell[j - 1])]
    widths = np.unique(np.clip(np.array(widths), 1e-300, TWO_PI))
    anchors, _ = critical_anchors(unit, G)
    per_width = np.zeros(widths.shape)
    for i, w in enumerate(widths):
        hw = gauge.h(min(w / 2, PI))
        for a, b in ((anchors, anchors + w), (anchors - w, anchors)):
            _, hi = unit.arc_mass_many(a, b)
            per_width[i] = max(per_width[i], hi.max() / hw)
    M = float(per_width.max())
    if not math.isfinite(M) or M <= 0:
        raise CalibrationError(f"non-finite Frostman ratio {M!r}")
    # ratios must settle at fine scales; a steady climb means no finite constant
    if resolved >= 2:
        keep = widths >= ell[resolved]
        w_res, r_res = widths[keep], per_width[keep]
        fine = r_res[: max(1, len(w_res) // 4)]
        coarse = r_res[len(w_res) // 4:]
        if coarse.size and fine.max() > 4 * coarse.max():
            worst = float(w_res[int(np.argmax(fine))])
            raise CalibrationError(f"Frostman ratio grows at fine scales (width {worst!r})")
    c = min(1.0, gauge.h_pi / model.m0, 1.0 / (2 * M))
    return c, {"M": M, "generations": G, "c": c}


@dataclass
class FrostmanReport:
    max_ratio: float
    theta: float
    t: float
    passed: bool
    arcs_checked: int


def verify_frostman(model: CantorModel, gauge, theta_grid: int = 4096, scale_grid: int = 512,
                    endpoint_depth: int = 25, chunk: int = 1 << 18) -> FrostmanReport:
    """Max over a grid of mu([theta - t, theta + t]) / h(t); passes iff <= 1.

    Centres: ``theta_grid`` equispaced angles, plus every arc whose edge sits
    on a sampled generation endpoint (all endpoints of shallow generations).
    """
    if theta_grid < 64 or scale_grid < 64:
        raise DomainError("grids must have at least 64 points")
    depth = min(endpoint_depth, model.depth)
    ts = np.geomspace(model.lengths[depth], PI, scale_grid)
    ts[-1] = PI
    hs = gauge.h(ts)
    thetas = -PI + TWO_PI * (np.arange(theta_grid) + 1) / theta_grid
    anchors, _ = critical_anchors(model, depth)
    best = (-1.0, 0.0, 0.0)
    count = 0
    for t, ht in zip(ts, hs):
        for centers in (thetas, anchors + t, anchors - t):
            for s in range(0, centers.size, chunk):
                c = centers[s:s + chunk]
                _, hi = model.arc_mass_many(c - t, c + t)
                i = int(np.argmax(hi))
                ratio = hi[i] / ht
                count += c.size
                if ratio > best[0]:
                    best = (float(ratio), float(c[i]), float(t))
    return FrostmanReport(best[0], best[1], best[2], best[0] <= 1.0, count)


def hausdorff_upper_bound(model: CantorModel, generation: int) -> float:
    """h-sum 2**n h(l_n) of the canonical generation-n cover."""
    if not 0 <= generation <= model.depth:
        raise DomainError("generation not materialized")
    t = min(model.lengths[generation], PI)
    return math.ldexp(float(model.gauge.h(t)), generation)


def hausdorff_lower_bound(model: CantorModel) -> float:
    """mu(T); any cover by arcs of half-widths t_i has sum h(t_i) >= mu(T)."""
    return model.total_mass
