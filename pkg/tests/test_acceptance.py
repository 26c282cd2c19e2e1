"""The eight acceptance criteria, one test each, each printing PASS or FAIL."""

import csv
import json
import math
import time

import numpy as np
import pytest

from conftest import record_acceptance
from slowdecay import (
    PointMass,
    build_model,
    fast_bound_check,
    hausdorff_lower_bound,
    hausdorff_upper_bound,
    log_modulus,
    verify_frostman,
)
from slowdecay.cli import main
from slowdecay.poisson import derivative_bound, evaluate, reduce_angle, poisson_kernel
from slowdecay.scan import min_on_disk, polar_grid_max_u
from slowdecay.suites import mean_value_suite, normalization_suite, scaling_suite

PI = math.pi
RADII = [0.0, 0.5, 0.9, 0.99, 0.999, 1 - 1e-4]
SCAN_TOL = 1e-6
ORACLE_GENERATION = 20


@pytest.fixture(scope="module")
def headline(tmp_path_factory, rlog_gauge):
    """Build the reciprocal-log model and run the CLI scan, timed end to end."""
    work = tmp_path_factory.mktemp("acceptance")
    start = time.perf_counter()
    model = build_model(rlog_gauge)
    model_path = work / "model.json"
    model_path.write_text(json.dumps(model.to_dict()))
    out = work / "scan.csv"
    radii = ",".join(repr(r) for r in RADII)
    code = main(["scan", "--model", str(model_path), "--radii", radii, "--tol", str(SCAN_TOL),
                 "--out", str(out)])
    elapsed = time.perf_counter() - start
    rows = list(csv.DictReader(out.open()))
    return {"code": code, "rows": rows, "elapsed": elapsed, "model": model}


def test_criterion_1_certification(headline):
    rows = headline["rows"]
    ok = (headline["code"] == 0 and len(rows) == len(RADII)
          and all(row["pass_estimate"] == "true" for row in rows) and headline["elapsed"] <= 300)
    record_acceptance(1, ok, f"pass_estimate at {len(rows)} radii, {headline['elapsed']:.1f} s")
    assert ok


def test_criterion_2_proof_chain(headline, rlog_gauge):
    worst = -math.inf
    ulps = 0.0
    for row in headline["rows"]:
        r = float(row["r"])
        omega_r = float(row["omega_r"])
        u_max = -math.log(float(row["min_modulus_hi"])) + SCAN_TOL
        worst = max(worst, u_max - math.log(1 / omega_r))
        ulps = max(ulps, abs(float(row["proof_bound"]) - omega_r) / math.ulp(omega_r))
        assert omega_r == rlog_gauge.profile.omega(r)
    ok = worst <= 1e-6 and ulps <= 4
    record_acceptance(2, ok, f"max u - log(1/omega) = {worst:.3g}, proof_bound within {ulps:.0f} ulp")
    assert ok


def test_criterion_3_frostman(headline, rlog_gauge):
    model = headline["model"]
    rep = verify_frostman(model, rlog_gauge, theta_grid=4096, scale_grid=512,
                          endpoint_depth=min(25, model.depth))
    record_acceptance(3, rep.passed, f"max ratio {rep.max_ratio:.4f} over {rep.arcs_checked} arcs")
    assert rep.passed and rep.max_ratio <= 1


def random_cover(model, rng, max_generation=12):
    """Half-widths of a random finite arc cover of the support.

    Each node is either split or covered by an arc containing it (enlarged
    and shifted at random).
    """
    halves = []
    stack = [0]
    while stack:
        n = stack.pop()
        if n < max_generation and rng.random() < 0.8:
            stack += [n + 1, n + 1]
            continue
        half = model.lengths[n] / 2
        halves.append(min(half * (1 + rng.exponential(0.3)), PI))
    return np.array(halves)


def test_criterion_4_hausdorff(headline, middle_thirds):
    model = headline["model"]
    upper_ok = all(hausdorff_upper_bound(model, n) <= model.m0 for n in range(min(40, model.depth) + 1))
    classical = max(abs(hausdorff_upper_bound(middle_thirds, n) - 1) for n in range(middle_thirds.depth + 1))
    lower = hausdorff_lower_bound(model)
    rng = np.random.default_rng(2024)
    gauge = model.gauge
    sums = [float(gauge.h(random_cover(model, rng)).sum()) for _ in range(50)]
    covers_ok = min(sums) >= model.mass_scale * model.m0 - 1e-12
    ok = upper_ok and classical <= 1e-12 and lower > 0 and covers_ok
    record_acceptance(4, ok, f"classical deviation {classical:.1e}, lower {lower:.4f}, "
                             f"min cover sum {min(sums):.4f}")
    assert ok


def test_criterion_5_point_mass():
    errs = [abs(log_modulus(PointMass(), r, 0.0).log_modulus_neg - (1 + r) / (1 - r))
            for r in (0.25, 0.5, 0.9, 0.99)]
    radii = np.array([0.0, 0.25, 0.5, 0.9, 0.99, 0.999, 1 - 1e-6])
    fb = fast_bound_check(1.0, radii)
    fb_err = float(np.max(np.abs(fb.values - np.exp(-(1 + radii)))))
    ok = max(errs) <= 1e-10 and fb_err <= 1e-10 and bool(np.all(fb.values > math.exp(-2)))
    record_acceptance(5, ok, f"closed-form error {max(errs):.1e}, fast bound error {fb_err:.1e}")
    assert ok


def flat_midpoint_sum(model, r, theta, n):
    """Generation-n midpoint sum of u and a bound on its own error.

    The node measures are symmetric about their centres, so the first-order
    Taylor term cancels; the remainder is at most m sup|F''| (l_n/2)^2 / 2.
    """
    ends = model.endpoints(n)
    centres = (ends[0::2] + ends[1::2]) / 2
    m = model.node_mass(n)
    half = model.lengths[n] / 2
    s = reduce_angle(theta - centres)
    u = m * poisson_kernel(r, s).sum()
    dist = np.maximum(np.abs(s) - half, 0.0)
    err = m * derivative_bound(r, dist, 2).sum() * half**2 / 2
    # pairwise summation of 2^n positive terms
    err += (n + 2) * np.finfo(float).eps * u
    return float(u), float(err)


def test_criterion_6_quadrature_oracle(headline):
    model = headline["model"]
    rng = np.random.default_rng(6)
    radii = rng.uniform(0.0, 0.99, 100)
    thetas = rng.uniform(-PI, PI, 100)
    worst = -math.inf
    for r, th in zip(radii, thetas):
        ev = evaluate(model, float(r), [th], tol=1e-10)
        ref, ref_err = flat_midpoint_sum(model, float(r), th, ORACLE_GENERATION)
        worst = max(worst, abs(ev.u[0] - ref) - (ev.error[0] + ref_err))
    ok = worst <= 0
    record_acceptance(6, ok, f"100 points vs generation-{ORACLE_GENERATION} sum, "
                             f"worst excess over bounds {worst:.2e}")
    assert ok


def test_criterion_7_analytic_sanity(headline):
    model = headline["model"]
    norm = normalization_suite(tol=1e-9)
    mv = mean_value_suite(model, count=20, seed=7)
    sc = scaling_suite(model)
    ok = norm["passed"] and mv["passed"] and sc["passed"]
    record_acceptance(7, ok, f"normalization max error {max(norm['errors'].values()):.1e}, "
                             f"mean-value max gap {mv['max_gap']:.1e}, scaling max gap {sc['max_gap']:.1e}")
    assert ok


def test_criterion_8_minimum_structure(headline):
    rows = headline["rows"]
    logs = [math.log(float(row["min_modulus_hi"])) for row in rows]
    monotone = all(b <= a + 1e-8 for a, b in zip(logs, logs[1:]))
    model = headline["model"]
    tol = 1e-9
    gaps = []
    for r in (0.5, 0.9):
        circle = min_on_disk(model, r, tol)
        gaps.append(polar_grid_max_u(model, r, tol=tol) - circle.u_max)
    disk_ok = max(gaps) <= 2 * tol
    ok = monotone and disk_ok
    record_acceptance(8, ok, f"log minima nonincreasing: {monotone}, disk excess {max(gaps):.1e}")
    assert ok
