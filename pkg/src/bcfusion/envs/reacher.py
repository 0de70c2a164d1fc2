"""Kinematic 7-DoF reacher with a manipulability-shaped sparse reward.

The observation is a 20-vector: q (7) [rad], qd (7) [rad/s], goal error
e_t (3) [m] and end-effector position e_p (3) [m]. Actions are normalised
joint velocities in [-1, 1]^7, scaled by `qd_max` and integrated with joint
limits clamped. Reward is 1 within `e_threshold` of the goal and the
manipulability index otherwise; episodes always run the full horizon.

There is no mesh collision model; a self-proximity proxy flags steps where
two non-adjacent link points (trunk, shoulder, elbow, wrist, hand) come
within `self_proximity_dist` of each other.
"""

from __future__ import annotations

import numpy as np

from ..errors import ArenaError, ContractViolationError
from ..kinematics import ArmModel, JointState, forward_kinematics, link_origins, manipulability

REACHER_STATE_DIM = 20

Q_SLICE = slice(0, 7)
QD_SLICE = slice(7, 14)
GOAL_ERR_SLICE = slice(14, 17)
EE_POS_SLICE = slice(17, 20)

# link_origins() frame indices for the proximity proxy; consecutive entries
# are adjacent links, and frames sharing an origin are collapsed.
_PROXY_POINT_FRAMES = (0, 2, 4, 7)   # shoulder, elbow, wrist, hand


class ReacherWorld:
    """Mutable reacher episode state; one logical owner at a time."""

    def __init__(self, model: ArmModel, dt: float = 0.01, qd_max: float = 1.74,
                 e_threshold: float = 0.05, max_steps: int = 1000,
                 goal_region: str = "in", min_goal_dist: float = 0.15,
                 self_proximity_dist: float = 0.08, limit_margin: float = 0.1,
                 manip_translational: bool = False):
        if goal_region not in ("in", "out"):
            raise ContractViolationError("goal_region must be 'in' or 'out'")
        self.model = model
        self.dt = dt
        self.qd_max = qd_max
        self.e_threshold = e_threshold
        self.max_steps = max_steps
        self.goal_region = goal_region
        self.min_goal_dist = min_goal_dist
        self.self_proximity_dist = self_proximity_dist
        self.limit_margin = limit_margin
        self.manip_translational = manip_translational
        span = model.q_hi - model.q_lo
        self._q_sample_lo = model.q_lo + limit_margin * span
        self._q_sample_hi = model.q_hi - limit_margin * span
        self.joints = None
        self.goal = None
        self.step_count = 0
        self._done = True

    def _goal_in_region(self, g) -> bool:
        # Training goals live in the positive-x half of the workspace.
        return bool(g[0] > 0) == (self.goal_region == "in")

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        """Random interior start configuration and a reachable goal."""
        q = rng.uniform(self._q_sample_lo, self._q_sample_hi)
        p_start, _ = forward_kinematics(self.model, q)
        for _ in range(1000):
            q_goal = rng.uniform(self._q_sample_lo, self._q_sample_hi)
            g, _ = forward_kinematics(self.model, q_goal)
            if self._goal_in_region(g) and np.linalg.norm(g - p_start) >= self.min_goal_dist:
                return self.reset_to(q, g)
        raise ArenaError(f"could not sample a {self.goal_region}-region goal")

    def reset_to(self, q, goal) -> np.ndarray:
        """Scripted reset for tests and fixed scenarios."""
        q = np.asarray(q, dtype=float)
        self.joints = JointState(q=np.clip(q, self.model.q_lo, self.model.q_hi),
                                 qd=np.zeros(7))
        self.goal = np.asarray(goal, dtype=float).copy()
        self.step_count = 0
        self._done = False
        return self.observe()

    def observe(self) -> np.ndarray:
        p, _ = forward_kinematics(self.model, self.joints.q)
        return np.concatenate([self.joints.q, self.joints.qd, self.goal - p, p])

    def self_proximity(self) -> bool:
        pts = link_origins(self.model, self.joints.q)[list(_PROXY_POINT_FRAMES)]
        pts = np.concatenate([np.zeros((1, 3)), pts])   # prepend the trunk base
        n = pts.shape[0]
        for i in range(n):
            for j in range(i + 2, n):
                if np.linalg.norm(pts[i] - pts[j]) < self.self_proximity_dist:
                    return True
        return False

    def step(self, action) -> tuple[np.ndarray, float, bool, dict]:
        """Integrate one control period with normalised joint velocities."""
        if self._done:
            raise ContractViolationError("step() called on a finished episode")
        action = np.asarray(action, dtype=float)
        if action.shape != (7,) or not np.all(np.isfinite(action)):
            raise ContractViolationError(f"action must be a finite 7-vector, got {action!r}")
        action = np.clip(action, -1.0, 1.0)
        qd_cmd = action * self.qd_max
        q_old = self.joints.q
        q_new = np.clip(q_old + qd_cmd * self.dt, self.model.q_lo, self.model.q_hi)
        self.joints = JointState(q=q_new, qd=(q_new - q_old) / self.dt)
        self.step_count += 1

        p, _ = forward_kinematics(self.model, q_new)
        e_norm = float(np.linalg.norm(self.goal - p))
        m = float(manipulability(self.model, q_new, translational=self.manip_translational))
        at_goal = e_norm < self.e_threshold
        reward = 1.0 if at_goal else m
        done = self.step_count >= self.max_steps
        self._done = done
        info = {
            "goal": at_goal,
            "e_norm": e_norm,
            "manipulability": m,
            "self_proximity": self.self_proximity(),
            "ee": p,
        }
        return self.observe(), reward, done, info
