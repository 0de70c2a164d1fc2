"""2D PointGoal navigation: unicycle robot, binned lidar, sparse reward.

The observation is a 19-vector: 15 lidar bin ranges [m] over the forward
180 degrees, the goal error in the robot frame (forward, left) [m], and the
previously executed normalised action (v, w). Reward is 1 within
`d_threshold` of the goal, else 0; episodes run to the fixed horizon and do
not end on goal, only on collision or the step cap.

Arenas are JSON files: {"walls": [[x1,y1,x2,y2], ...],
"boxes": [[cx,cy,w,h], ...], "start_region": [xmin,ymin,xmax,ymax],
"goal_region": [...]} with coordinates in meters. The bundled arenas are
addressable by name; five have obstacle layouts used for in-distribution
runs, the two corridor arenas are deliberately unlike them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ArenaError, ContractViolationError
from . import geometry

NAV_STATE_DIM = 19
LIDAR_N_BINS = 15
LIDAR_FOV = np.pi

LIDAR_SLICE = slice(0, 15)
GOAL_ERR_SLICE = slice(15, 17)
PREV_ACTION_SLICE = slice(17, 19)

BUNDLED_ARENAS = ("open", "arena1", "arena2", "arena3", "arena4", "arena5",
                  "corridor_straight", "corridor_bend")
TRAINING_ARENAS = ("arena1", "arena2", "arena3", "arena4", "arena5")
OOD_ARENAS = ("corridor_straight", "corridor_bend")


def bin_angles(n_bins: int = LIDAR_N_BINS, fov: float = LIDAR_FOV) -> np.ndarray:
    """Bin center angles relative to the heading, rightmost first."""
    half = fov / 2
    width = fov / n_bins
    return -half + width * (np.arange(n_bins) + 0.5)


@dataclass(frozen=True)
class Arena:
    name: str
    walls: np.ndarray          # (W, 4) segments [m]
    boxes: np.ndarray          # (B, 4) center/size [m]
    start_region: np.ndarray   # [xmin, ymin, xmax, ymax]
    goal_region: np.ndarray

    @property
    def segments(self) -> np.ndarray:
        """All obstacle edges (walls plus box outlines) for raycasting."""
        return np.concatenate([self.walls, geometry.boxes_to_segments(self.boxes)])

    @property
    def bounds(self) -> np.ndarray:
        pts = self.walls.reshape(-1, 2)
        return np.array([pts[:, 0].min(), pts[:, 1].min(), pts[:, 0].max(), pts[:, 1].max()])


def load_arena(name_or_path) -> Arena:
    """Load a bundled arena by name or any arena JSON by path."""
    if isinstance(name_or_path, str) and name_or_path in BUNDLED_ARENAS:
        text = resources.files("bcfusion.envs").joinpath(
            f"arenas/{name_or_path}.json").read_text(encoding="utf-8")
    else:
        path = Path(name_or_path)
        if not path.exists():
            raise ArenaError(f"unknown arena {name_or_path!r} "
                             f"(bundled: {', '.join(BUNDLED_ARENAS)})")
        text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
        walls = np.asarray(doc["walls"], dtype=float).reshape(-1, 4)
        boxes = np.asarray(doc.get("boxes", []), dtype=float).reshape(-1, 4)
        start = np.asarray(doc["start_region"], dtype=float)
        goal = np.asarray(doc["goal_region"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ArenaError(f"malformed arena definition {name_or_path!r}: {exc}") from exc
    if walls.shape[0] == 0 or start.shape != (4,) or goal.shape != (4,):
        raise ArenaError(f"arena {name_or_path!r} needs walls and 4-element regions")
    return Arena(doc.get("name", str(name_or_path)), walls, boxes, start, goal)


class NavWorld:
    """Mutable navigation episode state; one logical owner at a time."""

    def __init__(self, arena: Arena | str, dt: float = 0.05, v_max: float = 0.25,
                 w_max: float = 1.0, robot_radius: float = 0.15, max_range: float = 5.0,
                 n_rays: int = 180, d_threshold: float = 0.3, max_steps: int = 500,
                 min_start_goal: float = 3.0):
        self.arena = load_arena(arena) if isinstance(arena, (str, Path)) else arena
        self.dt = dt
        self.v_max = v_max
        self.w_max = w_max
        self.robot_radius = robot_radius
        self.max_range = max_range
        self.n_rays = n_rays
        self.d_threshold = d_threshold
        self.max_steps = max_steps
        self.min_start_goal = min_start_goal
        self._segments = self.arena.segments
        rays_per_bin = n_rays // LIDAR_N_BINS
        if rays_per_bin * LIDAR_N_BINS != n_rays:
            raise ContractViolationError("n_rays must be a multiple of 15")
        half = LIDAR_FOV / 2
        self._ray_offsets = -half + LIDAR_FOV * (np.arange(n_rays) + 0.5) / n_rays
        self._rays_per_bin = rays_per_bin
        self.pose = None           # (x, y, theta)
        self.goal = None           # (x, y)
        self.step_count = 0
        self._prev_action = np.zeros(2)
        self._done = True

    # -- reset ------------------------------------------------------------

    def _sample_free(self, region, rng, margin):
        for _ in range(1000):
            p = rng.uniform(region[:2], region[2:])
            if geometry.clearance(p, self._segments, self.arena.boxes) >= margin:
                return p
        raise ArenaError(
            f"could not sample a free point in region {region} of arena {self.arena.name!r}"
        )

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        """Sample collision-free start and goal in their regions."""
        margin = self.robot_radius + 0.05
        for _ in range(1000):
            start = self._sample_free(self.arena.start_region, rng, margin)
            goal = self._sample_free(self.arena.goal_region, rng, margin)
            if np.linalg.norm(goal - start) >= self.min_start_goal:
                break
        else:
            raise ArenaError(
                f"could not satisfy min start-goal distance {self.min_start_goal} "
                f"in arena {self.arena.name!r}"
            )
        heading = rng.uniform(-np.pi, np.pi)
        return self.reset_to(start, goal, heading)

    def reset_to(self, start_xy, goal_xy, heading: float) -> np.ndarray:
        """Scripted reset for tests and fixed scenarios."""
        self.pose = np.array([start_xy[0], start_xy[1], heading], dtype=float)
        self.goal = np.asarray(goal_xy, dtype=float).copy()
        self.step_count = 0
        self._prev_action = np.zeros(2)
        self._done = False
        return self.observe()

    # -- sensing ----------------------------------------------------------

    def lidar_scan(self) -> np.ndarray:
        """15 bin ranges: minimum ray distance per 12-degree sector."""
        x, y, theta = self.pose
        ranges = geometry.ray_ranges(
            (x, y), theta + self._ray_offsets, self._segments, self.max_range
        )
        return ranges.reshape(LIDAR_N_BINS, self._rays_per_bin).min(axis=1)

    def observe(self) -> np.ndarray:
        x, y, theta = self.pose
        dx, dy = self.goal[0] - x, self.goal[1] - y
        c, s = np.cos(theta), np.sin(theta)
        err = np.array([c * dx + s * dy, -s * dx + c * dy])
        return np.concatenate([self.lidar_scan(), err, self._prev_action])

    def distance_to_goal(self) -> float:
        return float(np.linalg.norm(self.goal - self.pose[:2]))

    # -- stepping ---------------------------------------------------------

    def step(self, action) -> tuple[np.ndarray, float, bool, dict]:
        """Advance one control period with a normalised (v, w) command."""
        if self._done:
            raise ContractViolationError("step() called on a finished episode")
        action = np.asarray(action, dtype=float)
        if action.shape != (2,) or not np.all(np.isfinite(action)):
            raise ContractViolationError(f"action must be a finite 2-vector, got {action!r}")
        action = np.clip(action, -1.0, 1.0)
        v = action[0] * self.v_max
        w = action[1] * self.w_max
        x, y, theta = self.pose
        x += v * np.cos(theta) * self.dt
        y += v * np.sin(theta) * self.dt
        theta = (theta + w * self.dt + np.pi) % (2 * np.pi) - np.pi
        self.pose = np.array([x, y, theta])
        self._prev_action = action
        self.step_count += 1

        collision = geometry.clearance(
            self.pose[:2], self._segments, self.arena.boxes) < self.robot_radius
        d_target = self.distance_to_goal()
        at_goal = d_target < self.d_threshold
        reward = 1.0 if at_goal else 0.0
        done = collision or self.step_count >= self.max_steps
        self._done = done
        info = {
            "collision": bool(collision),
            "goal": bool(at_goal),
            "d_target": d_target,
            "pose": self.pose.copy(),
        }
        return self.observe(), reward, done, info
