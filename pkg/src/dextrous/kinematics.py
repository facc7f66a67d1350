"""Geometry and first-order kinematics of the Orthoglide and the UraneSX.

Both machines are three PRPaR legs of length ``L`` driven by linear joints.
Leg ``i`` links the joint point ``a_i`` to the platform point ``b_i``; the joint
rates and the tool-centre velocity satisfy ``A p' = B rho'`` with ``A`` whose
rows are ``(b_i - a_i)^T`` and ``B = diag(eta_i)``, ``eta_i = (b_i - a_i) . e_i``.
The velocity transmission factors are the square roots of the eigenvalues of
``J J^T`` where ``J = A^{-1} B``.

Everything that has to be evaluated both at points and over boxes
(:func:`leg_terms`, :func:`char_poly_expr`, :func:`det_a_expr`) is written
against the arithmetic protocol of :mod:`dextrous.iarray` so the same code
produces floats, interval enclosures and interval gradients.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import iarray
from .eigen import symmetric_eigvals
from .errors import InvalidGeometry, OutsideReachableDomain, SingularConfiguration
from .interval import Box, Interval

# Reference design from the UraneSX normalisation (L = 1).
URANESX_R = 7.0 / 13.0
URANESX_r = 3.0 / 26.0

SINGULAR_TOL = 1e-12


class MachineKind(str, enum.Enum):
    ORTHOGLIDE = "orthoglide"
    URANESX = "uranesx"


@dataclass(frozen=True)
class MachineModel:
    """Immutable description of one machine.

    ``R``, ``r`` and ``anchor_angles`` only matter for the UraneSX, where the
    effective base radius is ``R + lam``.  ``branch_signs`` pick the assembly
    mode of each leg: ``rho_i = (p . e_i) + s_i * sqrt(radicand_i)``.
    The Orthoglide default ``(-1, -1, -1)`` puts every linear joint on the
    negative side of its axis, which makes ``J = I`` at the origin and places
    the best cube in the positive octant.
    """

    kind: MachineKind
    L: float = 1.0
    R: float = URANESX_R
    r: float = URANESX_r
    lam: float = 0.0
    branch_signs: tuple[int, int, int] = (-1, -1, -1)
    anchor_angles: tuple[float, float, float] = (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)
    _anchors: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", MachineKind(self.kind))
        object.__setattr__(self, "branch_signs", tuple(int(s) for s in self.branch_signs))
        if not (self.L > 0 and math.isfinite(self.L)):
            raise InvalidGeometry(f"leg length must be positive, got {self.L}")
        if len(self.branch_signs) != 3 or any(s not in (-1, 1) for s in self.branch_signs):
            raise InvalidGeometry(f"branch signs must be three values in {{-1, +1}}: {self.branch_signs}")
        if self.kind is MachineKind.URANESX:
            if not self.r > 0:
                raise InvalidGeometry(f"platform radius must be positive, got r={self.r}")
            if not self.R_eff > self.r:
                raise InvalidGeometry(f"need R' > r, got R'={self.R_eff}, r={self.r}")
            if not self.offset < self.L:
                raise InvalidGeometry(
                    f"need R' - r < L to avoid parallel singularities, got {self.offset} >= {self.L}"
                )
            anchors = tuple(
                (self.offset * math.cos(phi), self.offset * math.sin(phi)) for phi in self.anchor_angles
            )
        else:
            anchors = ()
        object.__setattr__(self, "_anchors", anchors)

    @classmethod
    def orthoglide(cls, L: float = 1.0, branch_signs=(-1, -1, -1)) -> "MachineModel":
        return cls(MachineKind.ORTHOGLIDE, L=L, branch_signs=tuple(branch_signs))

    @classmethod
    def uranesx(
        cls,
        R: float = URANESX_R,
        r: float = URANESX_r,
        lam: float = 0.0,
        L: float = 1.0,
        branch_signs=(1, 1, 1),
    ) -> "MachineModel":
        return cls(MachineKind.URANESX, L=L, R=R, r=r, lam=lam, branch_signs=tuple(branch_signs))

    @property
    def R_eff(self) -> float:
        return self.R + self.lam

    @property
    def offset(self) -> float:
        """Distance ``R' - r`` from the origin to each cylinder axis."""
        return self.R_eff - self.r

    @property
    def anchors(self) -> tuple[tuple[float, float], ...]:
        """Cylinder axes ``(c_x, c_y)`` of the UraneSX legs."""
        return self._anchors

    @property
    def dim(self) -> int:
        """Dimension of the search space: 3 for the Orthoglide, 2 (x-y) for the UraneSX."""
        return 3 if self.kind is MachineKind.ORTHOGLIDE else 2

    @property
    def axes(self) -> np.ndarray:
        if self.kind is MachineKind.ORTHOGLIDE:
            return np.eye(3)
        return np.tile([0.0, 0.0, 1.0], (3, 1))


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"pose coordinates must be finite: {self}")

    @classmethod
    def of(cls, coords: Sequence[float]) -> "Pose":
        return cls(*(float(c) for c in coords))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class JointCoordinates:
    rho: tuple[float, float, float]


@dataclass(frozen=True)
class JacobianPair:
    A: np.ndarray
    eta: tuple[float, float, float]

    @property
    def B(self) -> np.ndarray:
        return np.diag(self.eta)


@dataclass(frozen=True)
class TransmissionFactors:
    psi: tuple[float, float, float]
    sigma: tuple[float, float, float]

    def within(self, psi_min: float, psi_max: float) -> bool:
        return all(psi_min <= p <= psi_max for p in self.psi)


def leg_terms(model: MachineModel, x, y, z):
    """Radicands, leg vectors ``b_i - a_i`` and ``eta_i`` for generic coordinates.

    Returns ``(radicands, rows, etas)``.  For the UraneSX, ``z`` cancels out of
    every leg vector; it is accepted only to keep a single signature.
    """
    s = model.branch_signs
    radicands = radicand_exprs(x, y, z, model)
    roots = [iarray.sqrt(q) for q in radicands]
    if model.kind is MachineKind.ORTHOGLIDE:
        etas = [roots[i] * float(-s[i]) for i in range(3)]
        rows = (
            (etas[0], y, z),
            (x, etas[1], z),
            (x, y, etas[2]),
        )
        return radicands, rows, tuple(etas)
    dx = [x - cx for cx, _ in model.anchors]
    dy = [y - cy for _, cy in model.anchors]
    etas = tuple(roots[i] * float(-s[i]) for i in range(3))
    rows = tuple((dx[i], dy[i], etas[i]) for i in range(3))
    return radicands, rows, etas


def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _det3(m11, m12, m13, m21, m22, m23, m31, m32, m33):
    return m11 * (m22 * m33 - m23 * m32) - m12 * (m21 * m33 - m23 * m31) + m13 * (m21 * m32 - m22 * m31)


def char_poly_expr(x, y, z, model: MachineModel, sigma: float):
    """``det(B B^T - sigma A A^T)`` by cofactor expansion.

    Uses ``eta_i^2 = radicand_i`` and ``|b_i - a_i|^2 = L^2`` on the diagonal,
    both identities of the leg-length constraint, which keeps the diagonal
    free of interval dependency.
    """
    radicands, rows, _ = leg_terms(model, x, y, z)
    sL2 = sigma * model.L * model.L
    d1 = radicands[0] - sL2
    d2 = radicands[1] - sL2
    d3 = radicands[2] - sL2
    o12 = _dot(rows[0], rows[1]) * (-sigma)
    o13 = _dot(rows[0], rows[2]) * (-sigma)
    o23 = _dot(rows[1], rows[2]) * (-sigma)
    return d1 * (d2 * d3 - iarray.square(o23)) - o12 * (o12 * d3 - o23 * o13) + o13 * (o12 * o23 - d2 * o13)


def det_a_expr(x, y, z, model: MachineModel):
    _, rows, _ = leg_terms(model, x, y, z)
    return _det3(*rows[0], *rows[1], *rows[2])


def radicand_exprs(x, y, z, model: MachineModel):
    """``L^2`` minus the squared distance to each leg's cylinder axis."""
    L2 = model.L * model.L
    sq = iarray.square
    if model.kind is MachineKind.ORTHOGLIDE:
        return (
            L2 - (sq(y) + sq(z)),
            L2 - (sq(x) + sq(z)),
            L2 - (sq(x) + sq(y)),
        )
    return tuple(L2 - (sq(x - cx) + sq(y - cy)) for cx, cy in model.anchors)


def _coords(model: MachineModel, pose) -> tuple[float, float, float]:
    if isinstance(pose, Pose):
        return pose.x, pose.y, pose.z
    c = tuple(float(v) for v in pose)
    if len(c) == 2:
        return c[0], c[1], 0.0
    return c  # type: ignore[return-value]


def inverse_kinematics(model: MachineModel, pose) -> JointCoordinates:
    x, y, z = _coords(model, pose)
    radicands = radicand_exprs(x, y, z, model)
    if any(q < 0.0 for q in radicands):
        raise OutsideReachableDomain(f"pose {(x, y, z)} is outside the reachable domain of {model.kind.value}")
    roots = [math.sqrt(q) for q in radicands]
    s = model.branch_signs
    if model.kind is MachineKind.ORTHOGLIDE:
        base = (x, y, z)
        rho = tuple(base[i] + s[i] * roots[i] for i in range(3))
    else:
        rho = tuple(z + s[i] * roots[i] for i in range(3))
    return JointCoordinates(rho)  # type: ignore[arg-type]


def joint_points(model: MachineModel, joints: JointCoordinates) -> np.ndarray:
    """Positions ``a_i`` of the three joint points (rows)."""
    rho = joints.rho
    if model.kind is MachineKind.ORTHOGLIDE:
        return np.diag(rho)
    return np.array([[cx, cy, rho[i]] for i, (cx, cy) in enumerate(model.anchors)])


def jacobian_pair(model: MachineModel, pose) -> JacobianPair:
    x, y, z = _coords(model, pose)
    joints = inverse_kinematics(model, (x, y, z))
    legs = np.array([x, y, z]) - joint_points(model, joints)
    eta = tuple(float(legs[i] @ model.axes[i]) for i in range(3))
    return JacobianPair(A=legs, eta=eta)  # type: ignore[arg-type]


def singularity_margins(model: MachineModel, pose) -> tuple[float, float]:
    """``(det A, det B)`` at the pose."""
    jp = jacobian_pair(model, pose)
    return float(np.linalg.det(jp.A)), float(jp.eta[0] * jp.eta[1] * jp.eta[2])


# Eigenvalue spread of J J^T beyond which the closed form loses digits on the
# small eigenvalues; those matrices go through an SVD of J instead.
SPREAD_LIMIT = 1e3


def factors_of(J: np.ndarray) -> np.ndarray:
    """Sorted transmission factors (singular values of ``J``) for ``(n, 3, 3)`` stacks.

    The closed-form eigenvalues of ``J J^T`` are used where the spread is
    moderate; badly conditioned matrices fall back to an SVD, which keeps
    every factor accurate to machine precision relative to the largest.
    """
    sigma = np.maximum(symmetric_eigvals(J @ np.swapaxes(J, -1, -2)), 0.0)
    psi = np.sqrt(sigma)
    with np.errstate(invalid="ignore", divide="ignore"):
        wide = ~(sigma[:, 2] <= SPREAD_LIMIT * sigma[:, 0])
    if np.any(wide):
        psi[wide] = np.linalg.svd(J[wide], compute_uv=False)[:, ::-1]
    return psi


def transmission_factors(model: MachineModel, pose) -> TransmissionFactors:
    jp = jacobian_pair(model, pose)
    det_a = np.linalg.det(jp.A)
    if abs(det_a) < SINGULAR_TOL * model.L**3:
        raise SingularConfiguration(f"det(A) = {det_a:.3e} at {_coords(model, pose)}")
    J = np.linalg.solve(jp.A, np.diag(jp.eta))
    psi = factors_of(J[None])[0]
    sigma = psi * psi
    return TransmissionFactors(psi=tuple(psi.tolist()), sigma=tuple(sigma.tolist()))  # type: ignore[arg-type]


def transmission_factors_batch(model: MachineModel, points) -> np.ndarray:
    """Sorted transmission factors at many points, shape ``(n, 3)``.

    Rows are NaN where the point is unreachable or ``A`` is singular.  Points
    may have 2 (``z = 0``) or 3 coordinates.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[1] == 2:
        P = np.column_stack([P, np.zeros(len(P))])
    x, y, z = P[:, 0], P[:, 1], P[:, 2]
    radicands, rows, etas = _point_terms(model, x, y, z)
    reachable = np.all(np.stack(radicands, axis=-1) >= 0.0, axis=-1)
    A = np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)
    eta = np.stack(etas, axis=-1)
    det_a = np.linalg.det(A)
    ok = reachable & (np.abs(det_a) >= SINGULAR_TOL * model.L**3)
    A_safe = np.where(ok[:, None, None], A, np.eye(3))
    J = np.linalg.solve(A_safe, eta[:, :, None] * np.eye(3))
    psi = factors_of(J)
    psi[~ok] = np.nan
    return psi


def _point_terms(model, x, y, z):
    with np.errstate(invalid="ignore"):
        radicands, rows, etas = leg_terms(model, x, y, z)
    n = len(x)
    rows = tuple(tuple(np.broadcast_to(np.asarray(c, dtype=float), (n,)) for c in row) for row in rows)
    etas = tuple(np.nan_to_num(e, nan=0.0) for e in etas)
    rows = tuple(tuple(np.nan_to_num(c, nan=0.0) for c in row) for row in rows)
    return radicands, rows, etas


def interval_char_poly_value(model: MachineModel, box: Box, sigma: float, form: str = "natural") -> Interval:
    """Interval containing ``det(B B^T - sigma A A^T)`` over every pose of ``box``.

    ``form="natural"`` is the inclusion-isotone natural extension;
    ``form="centered"`` intersects it with the mean-value form (tighter, but not
    isotone because the expansion point moves with the box).
    """
    bounds = _box_bounds(model, box)
    _check_reachable(model, bounds)
    if form == "natural":
        val = char_poly_expr(*_pad(iarray.natural_vars(bounds)), model, sigma)
    elif form == "centered":
        val = iarray.enclose(lambda *c: char_poly_expr(*_pad(c), model, sigma), bounds)
    else:
        raise ValueError(f"unknown form {form!r}")
    return Interval(float(val.lo[0]), float(val.hi[0]))


def _pad(coords):
    if len(coords) == 2:
        return coords[0], coords[1], 0.0
    return coords


def _box_bounds(model: MachineModel, box) -> np.ndarray:
    arr = box.as_array() if isinstance(box, Box) else np.asarray(box, dtype=float)
    if model.kind is MachineKind.URANESX and arr.shape[0] == 3:
        arr = arr[:2]
    return arr[None]


def _check_reachable(model: MachineModel, bounds: np.ndarray):
    radicands = radicand_exprs(*_pad(iarray.natural_vars(bounds)), model)
    for q in radicands:
        if np.any(q.hi < 0.0):
            raise OutsideReachableDomain("box lies entirely outside a leg cylinder")
