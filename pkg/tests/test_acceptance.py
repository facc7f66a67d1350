"""Acceptance criteria, one test each.

Every test prints a ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line, collected into an "acceptance criteria" section at the end of the
pytest run, so any ``pytest`` invocation doubles as a readable report.  The
reference results are checked through the same CLI commands a user runs.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from dextrous.certify import DextrousSpec, classify_batch, point_admissible
from dextrous.cli import main
from dextrous.interval import Interval, add, div, mul, neg, pow2, sqrt, sub
from dextrous.kinematics import MachineModel, Pose, jacobian_pair, transmission_factors, transmission_factors_batch
from dextrous.search import CubeSearchConfig, find_largest_cube
from conftest import ACCEPTANCE_LINES
from oracles import (
    TABLE_EDGES,
    TABLE_LAMBDAS,
    exact_in,
    generalized_det,
    grid_cube_oracle,
    random_interval,
    random_reachable,
    sample_in,
    sqrt_in,
    uranesx,
)

ORTHO = MachineModel.orthoglide()
SPEC = DextrousSpec.from_psi_max(2.0)

CUBE_ARGV = ["find-cube", "--machine", "orthoglide", "--psi-max", "2", "--alpha", "0.001", "--deterministic"]
SWEEP_ARGV = ["sweep", "--lambdas", ",".join(str(lam) for lam in TABLE_LAMBDAS), "--alpha", "0.001"]


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, detail


def run_cli(argv) -> tuple[int, str, float]:
    buf = io.StringIO()
    saved, sys.stdout = sys.stdout, buf
    t0 = time.perf_counter()
    try:
        code = main(list(argv))
    finally:
        sys.stdout = saved
    return code, buf.getvalue(), time.perf_counter() - t0


@pytest.fixture(scope="module")
def cube_run():
    return run_cli(CUBE_ARGV)


@pytest.fixture(scope="module")
def sweep_run():
    return run_cli(SWEEP_ARGV)


def test_criterion_1_orthoglide_cube(cube_run):
    code, out, secs = cube_run
    cube = json.loads(out)["cube"]
    edge, center = cube["edge"], cube["center"]
    ok = code == 0 and 0.634 <= edge <= 0.654 and all(abs(c - 0.086) <= 0.02 for c in center) and secs <= 600
    verdict(1, ok, f"edge {edge:.4f} in [0.634, 0.654], center {center} within 0.02 of 0.086, {secs:.1f}s")


def test_criterion_2_uranesx_sweep(sweep_run):
    code, out, secs = sweep_run
    rows = list(csv.DictReader(io.StringIO(out)))
    edges = [float(r["edge"]) if r["status"] == "ok" else math.nan for r in rows]
    close = all(abs(e - t) <= 0.01 for e, t in zip(edges, TABLE_EDGES)) and len(edges) == len(TABLE_EDGES)
    decreasing = all(a >= b for a, b in zip(edges, edges[1:]))
    ok = code == 0 and close and decreasing and secs <= 300
    verdict(2, ok, f"edges {edges} vs {list(TABLE_EDGES)} (+-0.01), non-increasing={decreasing}, {secs:.1f}s")


def test_criterion_3_isotropy():
    psi = transmission_factors(ORTHO, Pose(0.0, 0.0, 0.0)).psi
    err = max(abs(p - 1.0) for p in psi)
    verdict(3, err <= 1e-12, f"psi at origin {psi}, max deviation {err:.2e} <= 1e-12")


def test_criterion_4_determinant_identity():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for model in (ORTHO, uranesx(0.1)):
        for p in random_reachable(model, rng, 1000):
            sigma = rng.uniform(0.0, 5.0)
            jp = jacobian_pair(model, p)
            J = np.linalg.solve(jp.A, jp.B)
            det_a = np.linalg.det(jp.A)
            lhs = np.linalg.det(J @ J.T - sigma * np.eye(3)) * det_a**2
            worst = max(worst, abs(lhs - generalized_det(model, p, sigma)) / max(1.0, det_a**2))
    verdict(4, worst <= 1e-9, f"2000 poses, worst scaled residual {worst:.2e} <= 1e-9")


def _boxes_with_verdict(model, rng, want: int, n_each: int) -> np.ndarray:
    found = []
    while len(found) < n_each:
        c = rng.uniform(-0.9, 0.9, (400, model.dim))
        h = np.exp(rng.uniform(np.log(0.002), np.log(0.2), (400, 1)))
        boxes = np.stack([c - h, c + h], axis=-1)
        found.extend(boxes[classify_batch(model, boxes, SPEC) == want])
    return np.array(found[:n_each])


def test_criterion_5_classification_soundness():
    rng = np.random.default_rng(5)
    violations = 0
    for want in (1, -1):
        for bounds in _boxes_with_verdict(ORTHO, rng, want, 200):
            pts = bounds[:, 0] + rng.random((10_000, 3)) * (bounds[:, 1] - bounds[:, 0])
            ok = point_admissible(ORTHO, pts, SPEC)
            violations += int((~ok).sum()) if want == 1 else int(ok.sum())
    verdict(5, violations == 0, f"200 Inside + 200 Outside boxes x 1e4 samples, {violations} violations")


def _exact_result(op: str, a: float, b: float):
    fa, fb = Fraction(a), Fraction(b)
    return {"add": fa + fb, "sub": fa - fb, "mul": fa * fb, "div": fa / fb if fb else None, "pow2": fa * fa, "neg": -fa}[op]


def test_criterion_6_interval_containment():
    rng = np.random.default_rng(6)
    binary = {"add": add, "sub": sub, "mul": mul, "div": div}
    unary = {"pow2": pow2, "neg": neg, "sqrt": sqrt}
    names = list(binary) + list(unary)
    violations = 0
    for _ in range(100_000):
        op = names[rng.integers(len(names))]
        x = Interval(*random_interval(rng))
        a = sample_in(rng, x.lo, x.hi)
        if op in unary:
            if op == "sqrt":
                x = Interval(abs(x.lo), abs(x.hi)) if x.lo >= 0 else Interval(0.0, max(abs(x.lo), abs(x.hi)))
                a = sample_in(rng, x.lo, x.hi)
                r = sqrt(x)
                violations += not sqrt_in(a, r.lo, r.hi)
                continue
            r = unary[op](x)
            violations += not exact_in(_exact_result(op, a, 0.0), r.lo, r.hi)
            continue
        y = Interval(*random_interval(rng))
        if op == "div" and y.lo <= 0.0 <= y.hi:
            y = Interval(abs(y.hi) + 1.0, abs(y.hi) + 2.0)
        b = sample_in(rng, y.lo, y.hi)
        r = binary[op](x, y)
        violations += not exact_in(_exact_result(op, a, b), r.lo, r.hi)
    verdict(6, violations == 0, f"1e5 op/operand/sample triples, {violations} containment violations")


def test_criterion_7_grid_oracle():
    bb = find_largest_cube(ORTHO, CubeSearchConfig(spec=SPEC, alpha=0.01))
    edge, center = grid_cube_oracle(ORTHO, SPEC, 0.01)
    diff = abs(bb.edge - edge)
    verdict(7, diff <= 0.03, f"branch-and-bound {bb.edge:.3f} vs grid oracle {edge:.3f} (center {np.round(center, 3).tolist()}), |diff| {diff:.3f} <= 0.03")


def test_criterion_8_z_invariance():
    rng = np.random.default_rng(8)
    worst = 0.0
    for lam in TABLE_LAMBDAS:
        m = uranesx(lam)
        xy = rng.uniform(-0.3, 0.3, (100, 2))
        ref = transmission_factors_batch(m, np.column_stack([xy, np.zeros(100)]))
        for z in (-0.5, 0.5):
            psi = transmission_factors_batch(m, np.column_stack([xy, np.full(100, z)]))
            worst = max(worst, float(np.max(np.abs(psi - ref))))
    verdict(8, worst <= 1e-12, f"100 points x z in (-0.5, 0, 0.5) x 5 lambdas, max difference {worst:.2e} <= 1e-12")


def test_criterion_9_determinism(cube_run, sweep_run):
    cube_again, sweep_again = run_cli(CUBE_ARGV), run_cli(SWEEP_ARGV)
    same_cube = cube_again[:2] == cube_run[:2]
    same_sweep = sweep_again[:2] == sweep_run[:2]
    verdict(9, same_cube and same_sweep, f"repeat runs byte-identical: find-cube {same_cube}, sweep {same_sweep}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
