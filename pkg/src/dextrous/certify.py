"""Box verification: is a Cartesian box inside or outside the dextrous workspace?

A box is *inside* when every pose in it has all transmission factors in
``[psi_min, psi_max]``.  The check evaluates the eigenvalues at the box
midpoint, then proves with interval arithmetic that neither threshold
``sigma_min`` nor ``sigma_max`` is an eigenvalue of ``J J^T`` anywhere in the
box (no zero of ``det(B B^T - sigma A A^T)``).  Eigenvalues move continuously,
so the midpoint's situation extends to the whole box.  A box whose midpoint
violates a bound is *outside* when the violated threshold is likewise never
reached.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import partial

import numpy as np

from . import iarray
from .interval import Box
from .kinematics import (
    MachineKind,
    MachineModel,
    char_poly_expr,
    det_a_expr,
    radicand_exprs,
    transmission_factors_batch,
)

# Maximum bisection depth of one zero-exclusion proof.  A cube touching the
# workspace boundary to within 1e-3 needs roughly 40 levels in 3D.
DEFAULT_BUDGET = 48
# Hard cap on boxes examined by one zero-exclusion proof.
MAX_LEAVES = 60_000


@dataclass(frozen=True)
class DextrousSpec:
    psi_min: float
    psi_max: float

    def __post_init__(self):
        if not (0.0 < self.psi_min <= 1.0 <= self.psi_max):
            raise ValueError(f"need 0 < psi_min <= 1 <= psi_max, got [{self.psi_min}, {self.psi_max}]")

    @classmethod
    def from_psi_max(cls, psi_max: float, psi_min: float | None = None) -> "DextrousSpec":
        return cls(1.0 / psi_max if psi_min is None else psi_min, psi_max)

    @property
    def sigma_min(self) -> float:
        return self.psi_min * self.psi_min

    @property
    def sigma_max(self) -> float:
        return self.psi_max * self.psi_max

    def admits(self, psi) -> np.ndarray:
        """Pointwise test on an array of transmission factors (last axis = 3)."""
        psi = np.asarray(psi)
        with np.errstate(invalid="ignore"):
            return np.all((psi >= self.psi_min) & (psi <= self.psi_max), axis=-1)


class Verdict(enum.IntEnum):
    INSIDE = 1
    UNDETERMINED = 0
    OUTSIDE = -1


@dataclass(frozen=True)
class BoxVerdict:
    code: Verdict
    witness: tuple[float, float, float] | None = None

    def __bool__(self):
        return self.code is Verdict.INSIDE


class Reach(str, enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    STRADDLES = "straddles"


def as_bounds(model: MachineModel, box) -> np.ndarray:
    """``(d, 2)`` float array of a box in the machine's search space."""
    arr = box.as_array() if isinstance(box, Box) else np.asarray(box, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (d, 2) bounds, got shape {arr.shape}")
    if model.kind is MachineKind.URANESX and arr.shape[0] == 3:
        arr = arr[:2]
    if arr.shape[0] != model.dim:
        raise ValueError(f"{model.kind.value} boxes have {model.dim} dimensions, got {arr.shape[0]}")
    return arr


def _pad(coords):
    if len(coords) == 2:
        return coords[0], coords[1], 0.0
    return tuple(coords)


def _radicand_bounds(model: MachineModel, batch: np.ndarray):
    qs = radicand_exprs(*_pad(iarray.natural_vars(batch)), model)
    lo = np.stack([q.lo for q in qs], axis=-1)
    hi = np.stack([q.hi for q in qs], axis=-1)
    return lo, hi


def reach_status(model: MachineModel, batch: np.ndarray) -> np.ndarray:
    """Vectorised :func:`in_reachable_domain` for ``(n, d, 2)`` batches.

    Returns +1 (inside), -1 (outside), 0 (straddles) per box.
    """
    lo, hi = _radicand_bounds(model, batch)
    out = np.zeros(len(batch), dtype=int)
    out[np.all(lo >= 0.0, axis=-1)] = 1
    out[np.any(hi < 0.0, axis=-1)] = -1
    return out


def in_reachable_domain(model: MachineModel, box) -> Reach:
    """Where ``box`` sits relative to the intersection of the leg cylinders."""
    code = reach_status(model, as_bounds(model, box)[None])[0]
    return {1: Reach.INSIDE, -1: Reach.OUTSIDE, 0: Reach.STRADDLES}[int(code)]


def _char_poly(model, sigma, *coords):
    return char_poly_expr(*_pad(coords), model, sigma)


def _det_a(model, *coords):
    return det_a_expr(*_pad(coords), model)


def _exclude(fn, bounds: np.ndarray, budget: int, max_leaves: int = MAX_LEAVES) -> bool:
    """Prove that ``fn`` has no zero over ``bounds`` by adaptive bisection.

    Sub-boxes whose enclosure excludes 0 are dropped; the rest are halved
    along their widest axis, up to ``budget`` levels.  The proof is abandoned
    as soon as two sampled midpoints show opposite signs (a root certainly
    exists) or the leaf cap is hit.
    """
    return bool(_exclude_many(fn, bounds[None], budget, max_leaves)[0])


def _exclude_many(fn, roots: np.ndarray, budget: int, max_leaves: int = MAX_LEAVES) -> np.ndarray:
    """:func:`_exclude` applied to each box of an ``(n, d, 2)`` batch at once.

    Each root keeps its own sign record and leaf count, so the answer for a
    box does not depend on the rest of the batch.
    """
    n = len(roots)
    proven = np.zeros(n, dtype=bool)
    failed = np.zeros(n, dtype=bool)
    pos = np.zeros(n, dtype=bool)
    neg = np.zeros(n, dtype=bool)
    examined = np.zeros(n, dtype=np.int64)
    boxes = roots.astype(float)
    owner = np.arange(n)
    for depth in range(budget + 1):
        if len(boxes):
            keep = iarray.enclose(fn, boxes).contains_zero()
            boxes, owner = boxes[keep], owner[keep]
        alive = np.zeros(n, dtype=bool)
        alive[owner] = True
        proven |= ~alive & ~failed
        if len(boxes) == 0:
            break
        examined += np.bincount(owner, minlength=n)
        if depth == budget:
            break
        failed |= examined > max_leaves
        mids = 0.5 * (boxes[..., 0] + boxes[..., 1])
        with np.errstate(invalid="ignore"):
            vals = np.asarray(fn(*[mids[:, j] for j in range(mids.shape[1])]), dtype=float)
        vals = np.broadcast_to(vals, (len(boxes),))
        finite = np.isfinite(vals)
        failed[owner[finite & (vals == 0.0)]] = True
        pos[owner[finite & (vals > 0.0)]] = True
        neg[owner[finite & (vals < 0.0)]] = True
        failed |= pos & neg
        live = ~failed[owner]
        boxes, owner = boxes[live], owner[live]
        if len(boxes) == 0:
            break
        boxes = _split(boxes)
        owner = np.concatenate([owner, owner])
    return proven


def _split(boxes: np.ndarray) -> np.ndarray:
    widths = boxes[..., 1] - boxes[..., 0]
    axis = np.argmax(widths, axis=-1)
    idx = np.arange(len(boxes))
    cut = 0.5 * (boxes[idx, axis, 0] + boxes[idx, axis, 1])
    left = boxes.copy()
    right = boxes.copy()
    left[idx, axis, 1] = cut
    right[idx, axis, 0] = cut
    return np.concatenate([left, right])


def zero_excluded(model: MachineModel, box, sigma: float, budget: int = DEFAULT_BUDGET) -> bool:
    """True when ``det(B B^T - sigma A A^T)`` provably has no zero in ``box``.

    False means "possible zero": either a root exists or the proof ran out of
    budget.  The box must lie in the reachable domain.
    """
    return _exclude(partial(_char_poly, model, float(sigma)), as_bounds(model, box), budget)


def det_a_excluded(model: MachineModel, box, budget: int = DEFAULT_BUDGET) -> bool:
    """True when ``det(A)`` provably stays away from zero over ``box``."""
    return _exclude(partial(_det_a, model), as_bounds(model, box), budget)


def classify(
    model: MachineModel,
    box,
    spec: DextrousSpec,
    budget: int = DEFAULT_BUDGET,
) -> BoxVerdict:
    """Inside (+1), outside (-1) or undetermined (0) with respect to ``spec``.

    Boxes crossing a cylinder boundary, or touching it, are undetermined;
    boxes entirely beyond one are outside.  A singular midpoint gives an
    undetermined verdict.  The witness holds the midpoint eigenvalues of
    ``J J^T`` when they could be computed.
    """
    bounds = as_bounds(model, box)
    batch = bounds[None]
    q_lo, q_hi = _radicand_bounds(model, batch)
    if np.any(q_hi < 0.0):
        return BoxVerdict(Verdict.OUTSIDE)
    if not np.all(q_lo > 0.0):
        return BoxVerdict(Verdict.UNDETERMINED)

    mid = 0.5 * (bounds[:, 0] + bounds[:, 1])
    psi = transmission_factors_batch(model, mid[None])[0]
    if not np.all(np.isfinite(psi)):
        return BoxVerdict(Verdict.UNDETERMINED)
    sigma = psi * psi
    witness = tuple(float(s) for s in sigma)
    s_min, s_max = spec.sigma_min, spec.sigma_max

    if np.all((sigma > s_min) & (sigma < s_max)):
        if (
            zero_excluded(model, bounds, s_max, budget)
            and zero_excluded(model, bounds, s_min, budget)
            and det_a_excluded(model, bounds, budget)
        ):
            return BoxVerdict(Verdict.INSIDE, witness)
        return BoxVerdict(Verdict.UNDETERMINED, witness)

    if sigma[-1] > s_max and zero_excluded(model, bounds, s_max, budget):
        return BoxVerdict(Verdict.OUTSIDE, witness)
    if sigma[0] < s_min and zero_excluded(model, bounds, s_min, budget):
        return BoxVerdict(Verdict.OUTSIDE, witness)
    return BoxVerdict(Verdict.UNDETERMINED, witness)


def classify_batch(
    model: MachineModel,
    boxes,
    spec: DextrousSpec,
    budget: int = DEFAULT_BUDGET,
) -> np.ndarray:
    """Verdict codes for an ``(n, d, 2)`` batch, identical to calling :func:`classify` per box."""
    batch = np.stack([as_bounds(model, b) for b in boxes]) if len(boxes) else np.zeros((0, model.dim, 2))
    n = len(batch)
    codes = np.full(n, int(Verdict.UNDETERMINED), dtype=int)
    if n == 0:
        return codes
    q_lo, q_hi = _radicand_bounds(model, batch)
    outside = np.any(q_hi < 0.0, axis=-1)
    codes[outside] = int(Verdict.OUTSIDE)
    todo = ~outside & np.all(q_lo > 0.0, axis=-1)

    mids = 0.5 * (batch[..., 0] + batch[..., 1])
    sigma = np.full((n, 3), np.nan)
    if np.any(todo):
        sigma[todo] = transmission_factors_batch(model, mids[todo]) ** 2
    todo &= np.all(np.isfinite(sigma), axis=-1)
    s_min, s_max = spec.sigma_min, spec.sigma_max
    char_max = partial(_char_poly, model, float(s_max))
    char_min = partial(_char_poly, model, float(s_min))

    def excluded(fn, mask):
        ok = np.zeros(n, dtype=bool)
        idx = np.flatnonzero(mask)
        if len(idx):
            ok[idx] = _exclude_many(fn, batch[idx], budget)
        return ok

    with np.errstate(invalid="ignore"):
        interior = todo & np.all((sigma > s_min) & (sigma < s_max), axis=-1)
        above = todo & ~interior & (sigma[:, -1] > s_max)
        below = todo & ~interior & (sigma[:, 0] < s_min)
    ok = excluded(char_max, interior)
    ok = excluded(char_min, ok)
    ok = excluded(partial(_det_a, model), ok)
    codes[ok] = int(Verdict.INSIDE)
    out_hi = excluded(char_max, above)
    out_lo = excluded(char_min, below & ~out_hi)
    codes[out_hi | out_lo] = int(Verdict.OUTSIDE)
    return codes


def point_admissible(model: MachineModel, points, spec: DextrousSpec) -> np.ndarray:
    """Boolean mask: reachable, nonsingular and within the bounds (float evaluation)."""
    return spec.admits(transmission_factors_batch(model, points))
