"""7-DoF serial arm kinematics: FK, geometric Jacobian, manipulability.

The arm is described by a modified-DH table (one row per joint) plus a fixed
flange transform; the bundled model is a Panda-class arm using the published
parameters, with the flange as end-effector (no gripper offset).

All functions broadcast over leading batch axes of `q`, so a (N, 7) batch of
configurations yields (N, 3) positions, (N, 3, 3) rotations and (N, 6, 7)
Jacobians in one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, SingularityError


@dataclass(frozen=True)
class DhRow:
    """Modified-DH parameters for one revolute joint."""

    a: float        # link length [m]
    d: float        # link offset [m]
    alpha: float    # link twist [rad]
    theta_offset: float = 0.0  # added to the joint variable [rad]


@dataclass(frozen=True)
class ArmModel:
    """A 7-joint serial arm: DH table, flange offset, joint limits."""

    dh: tuple[DhRow, ...]
    flange_offset: float            # translation along the last z axis [m]
    q_lo: np.ndarray                # [rad]
    q_hi: np.ndarray                # [rad]

    def __post_init__(self):
        if len(self.dh) != 7:
            raise ContractViolationError(f"DH table must have exactly 7 rows, got {len(self.dh)}")
        q_lo = np.array(self.q_lo, dtype=float)
        q_hi = np.array(self.q_hi, dtype=float)
        if q_lo.shape != (7,) or q_hi.shape != (7,) or not np.all(q_lo < q_hi):
            raise ContractViolationError("joint limits must be 7-vectors with lo < hi")
        q_lo.flags.writeable = False
        q_hi.flags.writeable = False
        object.__setattr__(self, "q_lo", q_lo)
        object.__setattr__(self, "q_hi", q_hi)

    @property
    def n_joints(self) -> int:
        return 7


@dataclass
class JointState:
    """Joint positions and velocities."""

    q: np.ndarray    # [rad]
    qd: np.ndarray   # [rad/s]

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.qd = np.asarray(self.qd, dtype=float)
        if self.q.shape != (7,) or self.qd.shape != (7,):
            raise ContractViolationError("q and qd must be 7-vectors")
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.qd))):
            raise ContractViolationError("non-finite joint state")


def panda_model() -> ArmModel:
    """Panda-class 7-DoF arm, modified-DH convention, flange end-effector."""
    dh = (
        DhRow(a=0.0,     d=0.333, alpha=0.0),
        DhRow(a=0.0,     d=0.0,   alpha=-np.pi / 2),
        DhRow(a=0.0,     d=0.316, alpha=np.pi / 2),
        DhRow(a=0.0825,  d=0.0,   alpha=np.pi / 2),
        DhRow(a=-0.0825, d=0.384, alpha=-np.pi / 2),
        DhRow(a=0.0,     d=0.0,   alpha=np.pi / 2),
        DhRow(a=0.088,   d=0.0,   alpha=np.pi / 2),
    )
    q_lo = np.array([-2.8973, -1.7628, -2.8973, -3.0718, -2.8973, -0.0175, -2.8973])
    q_hi = np.array([2.8973, 1.7628, 2.8973, -0.0698, 2.8973, 3.7525, 2.8973])
    return ArmModel(dh=dh, flange_offset=0.107, q_lo=q_lo, q_hi=q_hi)


# A wide, well-conditioned home configuration [rad].
PANDA_READY = np.array([0.0, -np.pi / 4, 0.0, -3 * np.pi / 4, 0.0, np.pi / 2, np.pi / 4])


def _chain_frames(model: ArmModel, q: np.ndarray):
    """Cumulative base-frame rotation and origin of every joint frame.

    Returns (rots, origins) with shapes (..., 8, 3, 3) and (..., 8, 3):
    entries 0..6 are the joint frames, entry 7 is the flange.
    """
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 7:
        raise ContractViolationError(f"q must have 7 joint values, got shape {q.shape}")
    batch = q.shape[:-1]
    rots = np.empty(batch + (8, 3, 3))
    origins = np.empty(batch + (8, 3))
    r = np.broadcast_to(np.eye(3), batch + (3, 3)).copy()
    p = np.zeros(batch + (3,))
    for i, row in enumerate(model.dh):
        # Modified DH: Rx(alpha) . Tx(a) . Rz(theta) . Tz(d)
        ca, sa = np.cos(row.alpha), np.sin(row.alpha)
        theta = q[..., i] + row.theta_offset
        ct, st = np.cos(theta), np.sin(theta)
        # Local transform split as rotation block and translation.
        zero = np.zeros_like(ct)
        one = np.ones_like(ct)
        r_local = np.stack([
            np.stack([ct, -st, zero], axis=-1),
            np.stack([st * ca, ct * ca, -sa * one], axis=-1),
            np.stack([st * sa, ct * sa, ca * one], axis=-1),
        ], axis=-2)
        t_local = np.stack([row.a * one, -sa * row.d * one, ca * row.d * one], axis=-1)
        p = p + np.einsum("...ij,...j->...i", r, t_local)
        r = r @ r_local
        rots[..., i, :, :] = r
        origins[..., i, :] = p
    # Flange: pure translation along the last z axis.
    rots[..., 7, :, :] = r
    origins[..., 7, :] = p + model.flange_offset * r[..., :, 2]
    return rots, origins


def forward_kinematics(model: ArmModel, q: np.ndarray):
    """End-effector pose: translation (..., 3) and rotation (..., 3, 3)."""
    rots, origins = _chain_frames(model, q)
    return origins[..., 7, :], rots[..., 7, :, :]


def link_origins(model: ArmModel, q: np.ndarray) -> np.ndarray:
    """Base-frame origins of all joint frames plus the flange, (..., 8, 3)."""
    _, origins = _chain_frames(model, q)
    return origins


def jacobian(model: ArmModel, q: np.ndarray) -> np.ndarray:
    """Geometric Jacobian in the base frame, (..., 6, 7).

    Column i is (z_i x (p_e - p_i); z_i) for revolute joint i. The top 3x7
    block maps joint rates to end-effector translational velocity.
    """
    rots, origins = _chain_frames(model, q)
    z = rots[..., :7, :, 2]                      # (..., 7, 3) joint axes
    p = origins[..., :7, :]                      # (..., 7, 3) joint origins
    p_e = origins[..., 7:8, :]                   # (..., 1, 3)
    jv = np.cross(z, p_e - p)                    # (..., 7, 3)
    return np.concatenate([jv, z], axis=-1).swapaxes(-1, -2)  # (..., 6, 7)


def manipulability(model: ArmModel, q: np.ndarray, translational: bool = False):
    """Yoshikawa manipulability index sqrt(det(J Jt)), >= 0.

    Uses the full 6x7 Jacobian by default; `translational=True` restricts to
    the 3x7 positional block. Cholesky of J Jt gives det; near singularities
    where Cholesky fails the product of singular values is used instead.
    Values that are negative within numerical noise are floored to 0.
    """
    j = jacobian(model, q)
    if translational:
        j = j[..., :3, :]
    jjt = j @ j.swapaxes(-1, -2)
    try:
        chol = np.linalg.cholesky(jjt)
        diag = np.diagonal(chol, axis1=-2, axis2=-1)
        m = np.prod(diag, axis=-1)
    except np.linalg.LinAlgError:
        sv = np.linalg.svd(j, compute_uv=False)
        m = np.prod(sv, axis=-1)
    m = np.where(m < 0, 0.0, m)
    return m if m.ndim else float(m)


def damped_pseudoinverse(j_v: np.ndarray, mu_dls: float) -> np.ndarray:
    """Damped least-squares pseudoinverse Jt (J Jt + mu^2 I)^-1.

    For mu_dls = 0 and full-rank J this is the Moore-Penrose pseudoinverse;
    a singular J Jt with mu_dls = 0 raises SingularityError.
    """
    if mu_dls < 0:
        raise ContractViolationError("mu_dls must be >= 0")
    j_v = np.asarray(j_v, dtype=float)
    m = j_v.shape[-2]
    jjt = j_v @ j_v.swapaxes(-1, -2) + (mu_dls**2) * np.eye(m)
    try:
        sol = np.linalg.solve(jjt, j_v)          # (J Jt + mu^2 I)^-1 J
    except np.linalg.LinAlgError as exc:
        raise SingularityError(
            "J Jt is singular and no damping was applied (mu_dls = 0)"
        ) from exc
    return sol.swapaxes(-1, -2)
