"""Classical controllers and their conversion into action distributions.

Two deterministic controllers are provided: an artificial-potential-field
(APF) velocity controller for planar navigation and a resolved-rate motion
controller (RRMC) for the 7-DoF reacher. `ControlPriorWrapper` turns any
deterministic controller into a Gaussian action distribution by pushing
sensor noise through it with Monte Carlo sampling:

    mu    = mean_k a(s_k),   s_k ~ N(s, sigma_model^2)
    sig^2 = max(mean_k (a(s_k) - mu)^2, sigma_d^2)

The per-dimension floor sigma_d keeps the prior from collapsing to a delta,
which would freeze out the policy entirely during fusion.

Controllers are callables over state vectors and broadcast over a leading
batch axis, so one call evaluates all MC samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, PriorEvaluationError
from .fusion import ActionDistribution
from .kinematics import ArmModel, damped_pseudoinverse, jacobian


@dataclass(frozen=True)
class SensorNoiseModel:
    """Per-state-dimension noise stds, in the units of each feature."""

    stds: np.ndarray

    def __post_init__(self):
        stds = np.array(self.stds, dtype=float)
        if stds.ndim != 1 or not np.all(np.isfinite(stds)) or np.any(stds < 0):
            raise ContractViolationError("noise stds must be finite and >= 0")
        stds.flags.writeable = False
        object.__setattr__(self, "stds", stds)

    @property
    def state_dim(self) -> int:
        return self.stds.size


class ControlPriorWrapper:
    """Deterministic controller + noise model + MC sampler + variance floor."""

    def __init__(self, controller, noise: SensorNoiseModel, n_samples: int, floor_std):
        if n_samples < 2:
            raise ContractViolationError(f"need at least 2 MC samples, got {n_samples}")
        floor_std = np.array(floor_std, dtype=float)
        if floor_std.ndim != 1 or np.any(floor_std <= 0) or not np.all(np.isfinite(floor_std)):
            raise ContractViolationError("floor stds must be finite and > 0 per dimension")
        self.controller = controller
        self.noise = noise
        self.n_samples = int(n_samples)
        self.floor_std = floor_std

    def distribution(self, state: np.ndarray, rng: np.random.Generator) -> ActionDistribution:
        return mc_prior_distribution(self, state, rng)


def mc_propagate(controller, state, noise_std, n_samples, rng):
    """Push state noise through a controller; returns (mean, raw std).

    The raw std is the population std of the sampled actions, before any
    floor is applied.
    """
    state = np.asarray(state, dtype=float)
    samples = rng.normal(state, noise_std, size=(n_samples,) + state.shape)
    try:
        actions = np.asarray(controller(samples), dtype=float)
    except Exception as exc:
        raise PriorEvaluationError(
            f"control prior failed on MC samples around state {state!r}"
        ) from exc
    if actions.shape[0] != n_samples or actions.ndim != 2:
        raise PriorEvaluationError(
            f"controller returned shape {actions.shape} for {n_samples} sampled states"
        )
    mean = actions.mean(axis=0)
    std = np.sqrt(np.square(actions - mean).mean(axis=0))
    return mean, std


def mc_prior_distribution(wrapper: ControlPriorWrapper, state, rng) -> ActionDistribution:
    """The wrapped controller's action distribution at one state."""
    mean, raw_std = mc_propagate(
        wrapper.controller, state, wrapper.noise.stds, wrapper.n_samples, rng
    )
    return ActionDistribution(mean, np.maximum(raw_std, wrapper.floor_std))


# ---------------------------------------------------------------------------
# APF navigation controller
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ApfParams:
    """Potential-field gains. The defaults are deliberately repulsion-heavy:
    they produce the visible corridor oscillation this controller is known
    for. `smooth()` is a tamer tuning suitable as an expert baseline."""

    k_att: float = 2.2       # attractive pull magnitude
    k_rep: float = 0.12      # repulsive gain
    d0: float = 0.8          # repulsion cutoff distance [m]
    k_omega: float = 2.0     # heading gain
    d_taper: float = 2.0     # attraction fades linearly inside this radius [m]
    v_cmd_max: float = 1.0   # command bounds, normalised units
    w_cmd_max: float = 1.0
    allow_reverse: bool = False

    def __post_init__(self):
        if min(self.k_att, self.k_rep, self.d0, self.k_omega, self.d_taper) <= 0:
            raise ContractViolationError("APF gains, d0 and d_taper must be > 0")

    @staticmethod
    def smooth() -> "ApfParams":
        """Tight, quick tuning without the deliberate oscillation."""
        return ApfParams(k_att=2.8, k_rep=0.06, d0=0.5, k_omega=3.0, d_taper=0.35)


class ApfController:
    """Maps a navigation state vector to a (v, w) command in [-1, 1]^2.

    State layout: 15 lidar bin ranges [m], goal error in the robot frame
    (forward, left) [m], previous action (ignored). Attraction is the
    conic-parabolic well: magnitude k_att toward the goal, fading linearly
    inside d_taper; each lidar bin closer than d0 pushes away along its bin
    direction with the classic (1/r - 1/d0)/r^2 profile. The linear command
    is the force component along the heading (no reversing by default), the
    angular command steers toward the net force.
    """

    def __init__(self, params: ApfParams, bin_angles: np.ndarray):
        self.params = params
        self.bin_angles = np.asarray(bin_angles, dtype=float)
        self._bin_dirs = np.stack(
            [np.cos(self.bin_angles), np.sin(self.bin_angles)], axis=-1
        )  # (15, 2)

    def __call__(self, state: np.ndarray) -> np.ndarray:
        s = np.asarray(state, dtype=float)
        squeeze = s.ndim == 1
        s = np.atleast_2d(s)
        n_bins = self.bin_angles.size
        ranges = s[:, :n_bins]
        goal_err = s[:, n_bins:n_bins + 2]
        p = self.params

        dist = np.linalg.norm(goal_err, axis=-1)
        at_goal = dist < 1e-9
        safe_dist = np.where(dist > 1e-9, dist, 1.0)
        pull = p.k_att * np.minimum(dist / p.d_taper, 1.0) / safe_dist
        force = pull[:, None] * goal_err

        r = np.maximum(ranges, 1e-6)
        mag = np.where(r < p.d0, p.k_rep * (1.0 / r - 1.0 / p.d0) / r**2, 0.0)
        force -= mag @ self._bin_dirs

        v_lo = -p.v_cmd_max if p.allow_reverse else 0.0
        v = np.clip(force[:, 0], v_lo, p.v_cmd_max)
        w = np.clip(p.k_omega * np.arctan2(force[:, 1], force[:, 0]), -p.w_cmd_max, p.w_cmd_max)
        cmd = np.stack([v, w], axis=-1)
        cmd[at_goal] = 0.0
        return cmd[0] if squeeze else cmd


def apf_action(state, params: ApfParams, bin_angles) -> np.ndarray:
    """One-shot APF evaluation; see ApfController."""
    return ApfController(params, bin_angles)(state)


# ---------------------------------------------------------------------------
# RRMC reaching controller
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RrmcParams:
    """Resolved-rate gains: end-effector velocity gain, damped-least-squares
    damping, and the joint-velocity limit used both to clamp and to
    normalise the command."""

    gain: float = 2.0        # end-effector velocity gain [1/s]
    mu_dls: float = 1e-2     # damping for the pseudoinverse
    qd_limit: float = 1.74   # joint velocity limit [rad/s]

    def __post_init__(self):
        if self.gain <= 0 or self.mu_dls < 0 or self.qd_limit <= 0:
            raise ContractViolationError("gain and qd_limit must be > 0, mu_dls >= 0")


class RrmcController:
    """Maps a reacher state vector to normalised joint velocities in [-1, 1]^7.

    State layout: q (7), qd (7), goal error e_t (3), end-effector position
    (3). The command is the damped pseudoinverse of the translational
    Jacobian applied to gain * e_t, clamped to the joint-velocity limit and
    divided by it.
    """

    def __init__(self, params: RrmcParams, model: ArmModel):
        self.params = params
        self.model = model

    def __call__(self, state: np.ndarray) -> np.ndarray:
        s = np.asarray(state, dtype=float)
        squeeze = s.ndim == 1
        s = np.atleast_2d(s)
        q = s[:, :7]
        e_t = s[:, 14:17]
        j_v = jacobian(self.model, q)[:, :3, :]
        pinv = damped_pseudoinverse(j_v, self.params.mu_dls)
        qd = np.einsum("bij,bj->bi", pinv, self.params.gain * e_t)
        cmd = np.clip(qd, -self.params.qd_limit, self.params.qd_limit) / self.params.qd_limit
        return cmd[0] if squeeze else cmd


def rrmc_action(state, params: RrmcParams, model: ArmModel) -> np.ndarray:
    """One-shot RRMC evaluation; see RrmcController."""
    return RrmcController(params, model)(state)
