"""Interval-certified dextrous workspace of the Orthoglide and UraneSX machines."""

from .certify import (
    BoxVerdict,
    DextrousSpec,
    Reach,
    Verdict,
    classify,
    classify_batch,
    in_reachable_domain,
    zero_excluded,
)
from .errors import (
    BudgetExhausted,
    DegenerateAxis,
    DextrousError,
    DivisionByZeroInterval,
    EmptyDomain,
    InvalidGeometry,
    OutsideReachableDomain,
    SingularConfiguration,
)
from .interval import EMPTY, Box, Interval
from .kinematics import (
    JacobianPair,
    JointCoordinates,
    MachineKind,
    MachineModel,
    Pose,
    TransmissionFactors,
    interval_char_poly_value,
    inverse_kinematics,
    jacobian_pair,
    singularity_margins,
    transmission_factors,
)
from .search import CubeResult, CubeSearchConfig, find_largest_cube, grow_cube_at, pave_dextrous_workspace

__version__ = "0.1.0"
