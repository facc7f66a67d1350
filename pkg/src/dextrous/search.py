"""Largest axis-aligned cube (or square) enclosed in the dextrous workspace.

The search runs in two phases.  First, the certified cube centred at the
origin is grown in steps of ``alpha``, which seeds the best half-edge ``W``.
Second, a FIFO list of candidate-centre boxes is processed.  A box is dropped
when no point of it can centre a cube of half-edge ``W + alpha``.  Otherwise
its midpoint is probed for a bigger cube, and the box is halved while it is
wider than ``alpha``.

Guarantee: the returned cube is certified inside.  The claim that no cube
with half-edge ``W + alpha`` exists holds only at the ``alpha`` resolution of
the candidate boxes.  Centres are probed only at box midpoints, so a better
centre strictly inside a box narrower than ``alpha`` can go unseen.
"""

from __future__ import annotations

import math
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np

from .certify import DEFAULT_BUDGET, DextrousSpec, Verdict, classify, classify_batch, reach_status
from .errors import BudgetExhausted
from .kinematics import MachineKind, MachineModel, radicand_exprs, transmission_factors_batch

# Relative slack before a float-evaluated point counts as violating the bounds
# when it is used to discard candidate centres.
PRUNE_MARGIN = 1e-9

# Boxes per vectorised classification call.  With PAVE_BUDGET levels a proof
# holds at most 2**PAVE_BUDGET leaves, which bounds peak memory.
PAVE_CHUNK = 1024
# Zero-exclusion depth while paving; undetermined boxes are refined anyway.
PAVE_BUDGET = 12


@dataclass(frozen=True)
class CubeSearchConfig:
    spec: DextrousSpec = field(default_factory=lambda: DextrousSpec.from_psi_max(2.0))
    alpha: float = 0.001
    initial_domain: np.ndarray | None = None
    max_boxes: int = 5_000_000
    budget: int = DEFAULT_BUDGET
    samples_per_axis: int = 5

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.max_boxes < 1:
            raise ValueError("max_boxes must be at least 1")

    def domain(self, model: MachineModel) -> np.ndarray:
        if self.initial_domain is not None:
            dom = np.asarray(self.initial_domain, dtype=float)
            if dom.shape != (model.dim, 2):
                raise ValueError(f"initial domain must have shape ({model.dim}, 2)")
            return dom
        return np.tile([-model.L, model.L], (model.dim, 1)).astype(float)


@dataclass
class SearchStats:
    boxes: int = 0
    classify_calls: int = 0
    wall_ms: float = 0.0


@dataclass(frozen=True)
class CubeResult:
    """Best certified cube: ``center ± half_edge`` on every axis.

    ``edge = 2 * half_edge``.  For the UraneSX the result is an x-y square.
    """

    center: tuple[float, ...]
    half_edge: float
    alpha: float
    stats: SearchStats
    incomplete: bool = False

    @property
    def edge(self) -> float:
        return 2.0 * self.half_edge

    def bounds(self) -> np.ndarray:
        c = np.asarray(self.center)
        return np.column_stack([c - self.half_edge, c + self.half_edge])


def _cube(center: np.ndarray, half_edge: float) -> np.ndarray:
    return np.column_stack([center - half_edge, center + half_edge])


def _lattice(bounds: np.ndarray, n: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, n) for lo, hi in bounds]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(bounds))


class _Grower:
    """Certified cube growth at a fixed centre, with bookkeeping."""

    def __init__(self, model: MachineModel, cfg: CubeSearchConfig, stats: SearchStats):
        self.model = model
        self.cfg = cfg
        self.stats = stats
        self.domain = cfg.domain(model)

    def k_cap(self, center: np.ndarray) -> int:
        room = np.minimum(center - self.domain[:, 0], self.domain[:, 1] - center)
        return max(int(math.floor(float(room.min()) / self.cfg.alpha + 1e-9)), 0)

    def sampled_ok(self, center: np.ndarray, k: int) -> bool:
        pts = _lattice(_cube(center, k * self.cfg.alpha), self.cfg.samples_per_axis)
        return bool(np.all(self.cfg.spec.admits(transmission_factors_batch(self.model, pts))))

    def certified(self, center: np.ndarray, k: int) -> bool:
        # A sampled violation already rules out an inside verdict.
        if not self.sampled_ok(center, k):
            return False
        self.stats.classify_calls += 1
        verdict = classify(self.model, _cube(center, k * self.cfg.alpha), self.cfg.spec, self.cfg.budget)
        return verdict.code is Verdict.INSIDE

    def gallop(self, center: np.ndarray, base: int, step: int = 1) -> int:
        """Largest certified ``k`` given that ``base`` is certified (or 0).

        Tries ``base + step`` and doubles ``step`` after every success; after a
        failure the step falls back to 1 from the last certified value.  Stops
        when ``base + 1`` fails.
        """
        cap = self.k_cap(center)
        while True:
            k = min(base + step, cap)
            if k <= base:
                return base
            if self.certified(center, k):
                base = k
                step *= 2
            elif step == 1 or k == base + 1:
                return base
            else:
                step = 1


def grow_cube_at(
    model: MachineModel,
    center: Sequence[float],
    cfg: CubeSearchConfig | None = None,
    stats: SearchStats | None = None,
) -> float:
    """Largest certified half-edge ``k * alpha`` of a cube centred at ``center``.

    ``k`` starts at 1 and doubles while the cube certifies; after the first
    failure the increments restart at 1 from the last certified ``k``.
    Returns 0.0 when even ``k = 1`` fails.
    """
    cfg = cfg or CubeSearchConfig()
    stats = stats if stats is not None else SearchStats()
    c = np.asarray(center, dtype=float)[: model.dim]
    if c.shape != (model.dim,):
        raise ValueError(f"center needs {model.dim} coordinates")
    k = _Grower(model, cfg, stats).gallop(c, 0)
    return k * cfg.alpha


def _fruitless(model: MachineModel, box: np.ndarray, half_edge: float, cfg: CubeSearchConfig, domain) -> bool:
    """True when no point of ``box`` can centre a cube of ``half_edge`` in the workspace.

    Every cube centred in ``box`` contains the common core
    ``[box.hi - h, box.lo + h]``.  A core point that violates the bounds
    therefore rules out the whole box.
    """
    lo = np.maximum(box[:, 0], domain[:, 0] + half_edge)
    hi = np.minimum(box[:, 1], domain[:, 1] - half_edge)
    if np.any(lo > hi):
        return True
    core = np.column_stack([box[:, 1] - half_edge, box[:, 0] + half_edge])
    if np.any(core[:, 0] > core[:, 1]):
        return False
    if reach_status(model, core[None])[0] == -1:
        return True
    pts = _lattice(core, cfg.samples_per_axis)
    psi = transmission_factors_batch(model, pts)
    spec = cfg.spec
    with np.errstate(invalid="ignore"):
        bad = (
            np.any(~np.isfinite(psi), axis=-1)
            | np.any(psi < spec.psi_min * (1.0 - PRUNE_MARGIN), axis=-1)
            | np.any(psi > spec.psi_max * (1.0 + PRUNE_MARGIN), axis=-1)
        )
    if np.any(bad):
        # unreachable points must be truly outside, not rounding noise
        qs = radicand_exprs(*_pad(pts[bad].T), model)
        clearly_bad = np.isfinite(psi[bad]).all(axis=-1) | np.any(np.stack(qs) < -PRUNE_MARGIN, axis=0)
        return bool(np.any(clearly_bad))
    return False


def _pad(coords):
    coords = list(coords)
    if len(coords) == 2:
        coords.append(0.0)
    return coords


def find_largest_cube(model: MachineModel, cfg: CubeSearchConfig | None = None) -> CubeResult:
    """Largest certified cube (Orthoglide) or square (UraneSX) in the dextrous workspace.

    Raises :class:`BudgetExhausted` (``.partial`` holds the best result so far)
    when more than ``cfg.max_boxes`` candidate boxes would be processed.
    """
    cfg = cfg or CubeSearchConfig()
    t0 = time.perf_counter()
    stats = SearchStats()
    grower = _Grower(model, cfg, stats)
    domain = grower.domain
    alpha = cfg.alpha

    best_center = np.zeros(model.dim)
    best_k = grower.gallop(best_center, 0)

    queue: deque[np.ndarray] = deque([domain.copy()])
    while queue:
        if stats.boxes >= cfg.max_boxes:
            stats.wall_ms = (time.perf_counter() - t0) * 1e3
            partial_result = CubeResult(tuple(best_center.tolist()), best_k * alpha, alpha, stats, True)
            raise BudgetExhausted(f"candidate box cap {cfg.max_boxes} reached", partial_result)
        box = queue.popleft()
        stats.boxes += 1
        target = best_k + 1
        if _fruitless(model, box, target * alpha, cfg, domain):
            continue

        mid = 0.5 * (box[:, 0] + box[:, 1])
        if target <= grower.k_cap(mid) and grower.certified(mid, target):
            best_k = grower.gallop(mid, target)
            best_center = mid

        widths = box[:, 1] - box[:, 0]
        if widths.max() <= alpha:
            continue
        axis = int(np.argmax(widths))
        cut = 0.5 * (box[axis, 0] + box[axis, 1])
        left = box.copy()
        right = box.copy()
        left[axis, 1] = cut
        right[axis, 0] = cut
        queue.append(left)
        queue.append(right)

    stats.wall_ms = (time.perf_counter() - t0) * 1e3
    return CubeResult(tuple(best_center.tolist()), best_k * alpha, alpha, stats)


def joint_travel(model: MachineModel, result: CubeResult, samples: int = 201) -> float:
    """Largest stroke any linear joint needs to sweep the result's x-y square at fixed z.

    Only meaningful for the UraneSX, where the z extent is set by the joint
    limits: the z range must cover the square's edge plus this travel.
    """
    if model.kind is not MachineKind.URANESX:
        raise ValueError("joint travel is defined for the UraneSX x-y square")
    pts = _lattice(result.bounds(), samples)
    qs = radicand_exprs(pts[:, 0], pts[:, 1], 0.0, model)
    roots = np.sqrt(np.maximum(np.stack(qs), 0.0))
    return float((roots.max(axis=1) - roots.min(axis=1)).max())



def _classify_codes(model, spec, budget, boxes):
    codes = []
    for i in range(0, len(boxes), PAVE_CHUNK):
        codes.extend(int(c) for c in classify_batch(model, boxes[i : i + PAVE_CHUNK], spec, budget))
    return codes


def pave_dextrous_workspace(
    model: MachineModel,
    spec: DextrousSpec,
    resolution: float,
    *,
    budget: int = PAVE_BUDGET,
    max_boxes: int = 2_000_000,
    initial_domain: np.ndarray | None = None,
    workers: int = 1,
) -> list[tuple[np.ndarray, Verdict]]:
    """Cover the initial domain with inside / outside / boundary boxes.

    Undetermined boxes are halved until narrower than ``resolution`` and then
    emitted as boundary boxes (``Verdict.UNDETERMINED``).  Processing goes
    level by level, so the output order does not depend on ``workers``.
    """
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    domain = (
        np.asarray(initial_domain, dtype=float)
        if initial_domain is not None
        else np.tile([-model.L, model.L], (model.dim, 1)).astype(float)
    )
    out: list[tuple[np.ndarray, Verdict]] = []
    level = [domain]
    seen = 0
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while level:
            seen += len(level)
            if seen > max_boxes:
                raise BudgetExhausted(f"paving box cap {max_boxes} reached", out)
            if pool is None:
                codes = _classify_codes(model, spec, budget, level)
            else:
                chunk = max(1, len(level) // (4 * workers))
                parts = [level[i : i + chunk] for i in range(0, len(level), chunk)]
                job = partial(_classify_codes, model, spec, budget)
                codes = [c for part in pool.map(job, parts) for c in part]
            nxt = []
            for box, code in zip(level, codes):
                verdict = Verdict(code)
                widths = box[:, 1] - box[:, 0]
                if verdict is not Verdict.UNDETERMINED or widths.max() < resolution:
                    out.append((box, verdict))
                    continue
                axis = int(np.argmax(widths))
                cut = 0.5 * (box[axis, 0] + box[axis, 1])
                left, right = box.copy(), box.copy()
                left[axis, 1] = cut
                right[axis, 0] = cut
                nxt.extend((left, right))
            level = nxt
    finally:
        if pool is not None:
            pool.shutdown()
    return out
