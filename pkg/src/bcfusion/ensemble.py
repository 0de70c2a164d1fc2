"""Policy ensembles: MLP members, surrogate members, and mixture collapse.

An ensemble of M stochastic policies is treated as a uniformly weighted
Gaussian mixture per action dimension and collapsed to a single Gaussian by
moment matching:

    mu    = mean_m(mu_m)
    sig^2 = mean_m(sig_m^2 + mu_m^2) - mu^2

The collapsed std grows with member disagreement, which is what flags states
the ensemble was never trained on. Member stds are always carried through,
never discarded.

Two member kinds are supported: `MlpPolicy` (tanh MLP with a Gaussian head,
loadable from a JSON weights file) and `SurrogatePolicy` (a deterministic
expert controller plus a seeded smooth perturbation field, used to exercise
the toolkit without any trained weights).
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ContractViolationError,
    EmptyEnsembleError,
    MalformedEnsembleError,
    NonFiniteParameterError,
    ShapeMismatchError,
)
from .fusion import ActionDistribution

logger = logging.getLogger(__name__)

WEIGHTS_FORMAT_VERSION = 1

# Emitted stds are exp(log_std) clamped to this range; keeps fusion well
# conditioned regardless of what the head produces.
LOG_STD_MIN = np.log(1e-4)
LOG_STD_MAX = np.log(1e1)


class MlpPolicy:
    """Feed-forward policy: tanh hidden layers, a linear (mean, log-std) head.

    `layers` is a sequence of (w, b) pairs with w of shape (out, in); the head
    maps the last hidden width to 2n outputs (n means, then n log-stds).
    """

    def __init__(self, layers: Sequence[tuple[np.ndarray, np.ndarray]], head_w, head_b,
                 activation: str = "tanh"):
        if activation != "tanh":
            raise ContractViolationError(f"unsupported activation {activation!r}")
        self.activation = activation
        self.layers = [(np.array(w, dtype=float), np.array(b, dtype=float)) for w, b in layers]
        self.head_w = np.array(head_w, dtype=float)
        self.head_b = np.array(head_b, dtype=float)
        self._validate()

    def _validate(self):
        width = None
        for i, (w, b) in enumerate(self.layers):
            if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
                raise ShapeMismatchError(f"layer {i}: w {w.shape} and b {b.shape} do not compose")
            if width is not None and w.shape[1] != width:
                raise ShapeMismatchError(
                    f"layer {i}: input width {w.shape[1]} != previous output width {width}"
                )
            width = w.shape[0]
        if self.head_w.ndim != 2 or self.head_b.ndim != 1 \
                or self.head_w.shape[0] != self.head_b.shape[0]:
            raise ShapeMismatchError(
                f"head: w {self.head_w.shape} and b {self.head_b.shape} do not compose"
            )
        if width is not None and self.head_w.shape[1] != width:
            raise ShapeMismatchError(
                f"head input width {self.head_w.shape[1]} != last hidden width {width}"
            )
        if self.head_w.shape[0] % 2 != 0:
            raise ShapeMismatchError("head must emit an even number of outputs (means, log-stds)")
        for arr in self._param_arrays():
            if not np.all(np.isfinite(arr)):
                raise NonFiniteParameterError("non-finite network parameter")

    def _param_arrays(self):
        for w, b in self.layers:
            yield w
            yield b
        yield self.head_w
        yield self.head_b

    @property
    def input_dim(self) -> int:
        return self.layers[0][0].shape[1] if self.layers else self.head_w.shape[1]

    @property
    def action_dim(self) -> int:
        return self.head_w.shape[0] // 2

    def forward(self, state: np.ndarray) -> ActionDistribution:
        """Deterministic inference for one state vector."""
        x = np.asarray(state, dtype=float)
        if x.shape != (self.input_dim,):
            raise ContractViolationError(
                f"state width {x.shape} does not match network input ({self.input_dim},)"
            )
        for w, b in self.layers:
            x = np.tanh(w @ x + b)
        out = self.head_w @ x + self.head_b
        n = self.action_dim
        log_std = np.clip(out[n:], LOG_STD_MIN, LOG_STD_MAX)
        return ActionDistribution(out[:n], np.exp(log_std))


class SurrogatePolicy:
    """Test double for a trained policy member.

    Wraps a deterministic expert controller and adds a smooth pseudo-random
    perturbation field (a fixed sum of 8 sinusoids over the state features,
    seeded per member). Inside the expert's training region the perturbation
    amplitude is sigma_in / 2, so member means differ by at most sigma_in;
    outside, the amplitude grows by the divergence gain g, so disagreement
    between members scales with g.
    """

    N_SINUSOIDS = 8

    def __init__(self, expert: Callable[[np.ndarray], np.ndarray],
                 in_region: Callable[[np.ndarray], bool],
                 input_dim: int, action_dim: int,
                 sigma_in: float, divergence_gain: float, member_seed):
        if sigma_in <= 0:
            raise ContractViolationError("sigma_in must be > 0")
        if divergence_gain < 0:
            raise ContractViolationError("divergence_gain must be >= 0")
        self.expert = expert
        self.in_region = in_region
        self._input_dim = int(input_dim)
        self._action_dim = int(action_dim)
        self.sigma_in = float(sigma_in)
        self.divergence_gain = float(divergence_gain)
        rng = np.random.default_rng(member_seed)
        k = self.N_SINUSOIDS
        # Frequencies ~N(0,1) per state feature; phases uniform. Fixed by seed.
        self._freq = rng.normal(0.0, 1.0, size=(self._action_dim, k, self._input_dim))
        self._phase = rng.uniform(0.0, 2.0 * np.pi, size=(self._action_dim, k))

    @property
    def input_dim(self) -> int:
        return self._input_dim

    @property
    def action_dim(self) -> int:
        return self._action_dim

    def perturbation(self, state: np.ndarray) -> np.ndarray:
        """Smooth field in [-1, 1]^n: mean of 8 sinusoids of the state."""
        phases = self._freq @ np.asarray(state, dtype=float) + self._phase
        return np.sin(phases).mean(axis=1)

    def forward(self, state: np.ndarray) -> ActionDistribution:
        x = np.asarray(state, dtype=float)
        if x.shape != (self._input_dim,):
            raise ContractViolationError(
                f"state width {x.shape} does not match surrogate input ({self._input_dim},)"
            )
        amp = self.sigma_in / 2.0
        if not self.in_region(x):
            amp += self.divergence_gain
        mean = np.asarray(self.expert(x), dtype=float) + amp * self.perturbation(x)
        std = np.full(self._action_dim, np.clip(self.sigma_in, 1e-4, 1e1))
        return ActionDistribution(mean, std)


@dataclass
class PolicyEnsemble:
    """M policies sharing input/output widths, immutable once built."""

    members: list
    checksum: str | None = None

    def __post_init__(self):
        if len(self.members) < 1:
            raise EmptyEnsembleError("ensemble must have at least one member")
        dims = {(m.input_dim, m.action_dim) for m in self.members}
        if len(dims) != 1:
            raise ShapeMismatchError(f"members disagree on widths: {sorted(dims)}")

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def input_dim(self) -> int:
        return self.members[0].input_dim

    @property
    def action_dim(self) -> int:
        return self.members[0].action_dim

    def predict(self, state: np.ndarray) -> ActionDistribution:
        return ensemble_predict(self, state)


def member_forward(policy, state: np.ndarray) -> ActionDistribution:
    """Run a single member on one state vector."""
    return policy.forward(state)


def ensemble_predict(ens: PolicyEnsemble, state: np.ndarray) -> ActionDistribution:
    """Collapse the member mixture to one Gaussian by moment matching."""
    if ens.size < 1:
        raise ContractViolationError("empty ensemble")
    outs = [member_forward(m, state) for m in ens.members]
    means = np.stack([o.means for o in outs])
    stds = np.stack([o.stds for o in outs])
    mu = means.mean(axis=0)
    var = (stds**2 + means**2).mean(axis=0) - mu**2
    if np.any(var < -1e-12):
        raise ContractViolationError(f"mixture variance < 0 beyond tolerance: {var.min()}")
    # Mild negatives are cancellation noise (identical members); floor them.
    var = np.maximum(var, 1e-12)
    return ActionDistribution(mu, np.sqrt(var))


# ---------------------------------------------------------------------------
# Weights file I/O
#
# Schema: {"format_version": 1, "input_dim": int, "action_dim": int,
#          "members": [{"layers": [{"w": [[...]], "b": [...]}],
#                       "head_w": [[...]], "head_b": [...]}]}
# Matrices are row-major nested lists of IEEE-754 doubles.
# ---------------------------------------------------------------------------


def _params_checksum(members: list[MlpPolicy]) -> str:
    h = hashlib.sha256()
    for m in members:
        for arr in m._param_arrays():
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    return h.hexdigest()


def save_ensemble(path, ens: PolicyEnsemble) -> None:
    """Write an MLP ensemble to the JSON weights format."""
    members = []
    for m in ens.members:
        if not isinstance(m, MlpPolicy):
            raise ContractViolationError("only MLP ensembles can be saved to the weights format")
        members.append({
            "layers": [{"w": w.tolist(), "b": b.tolist()} for w, b in m.layers],
            "head_w": m.head_w.tolist(),
            "head_b": m.head_b.tolist(),
        })
    doc = {
        "format_version": WEIGHTS_FORMAT_VERSION,
        "input_dim": ens.input_dim,
        "action_dim": ens.action_dim,
        "members": members,
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_ensemble(path) -> PolicyEnsemble:
    """Load and validate an ensemble weights file.

    Raises FileNotFoundError, MalformedEnsembleError, ShapeMismatchError,
    NonFiniteParameterError or EmptyEnsembleError as appropriate.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedEnsembleError(f"not valid JSON: {path}") from exc
    if not isinstance(doc, dict):
        raise MalformedEnsembleError(f"top level must be an object: {path}")
    if doc.get("format_version") != WEIGHTS_FORMAT_VERSION:
        raise MalformedEnsembleError(
            f"unsupported format_version {doc.get('format_version')!r}: {path}"
        )
    try:
        input_dim = int(doc["input_dim"])
        action_dim = int(doc["action_dim"])
        raw_members = doc["members"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedEnsembleError(f"missing or bad required key: {path}") from exc
    if not isinstance(raw_members, list):
        raise MalformedEnsembleError(f"'members' must be a list: {path}")
    if len(raw_members) == 0:
        raise EmptyEnsembleError(f"file declares zero members: {path}")

    members = []
    for i, raw in enumerate(raw_members):
        try:
            layers = [(np.array(layer["w"], dtype=float), np.array(layer["b"], dtype=float))
                      for layer in raw["layers"]]
            head_w = np.array(raw["head_w"], dtype=float)
            head_b = np.array(raw["head_b"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedEnsembleError(f"member {i} is malformed: {path}") from exc
        policy = MlpPolicy(layers, head_w, head_b)
        if policy.input_dim != input_dim or policy.action_dim != action_dim:
            raise ShapeMismatchError(
                f"member {i} widths ({policy.input_dim}, {policy.action_dim}) "
                f"do not match declared ({input_dim}, {action_dim}): {path}"
            )
        members.append(policy)

    checksum = _params_checksum(members)
    logger.info("loaded ensemble %s: M=%d, sha256=%s", path, len(members), checksum)
    return PolicyEnsemble(members, checksum=checksum)


def build_surrogate_ensemble(expert: Callable[[np.ndarray], np.ndarray],
                             in_region: Callable[[np.ndarray], bool],
                             input_dim: int, action_dim: int,
                             n_members: int = 5, sigma_in: float = 0.1,
                             divergence_gain: float = 10.0, seed=0) -> PolicyEnsemble:
    """Build M surrogate members around one expert controller.

    Members agree (to within sigma_in) on states inside the training region
    and diverge, with spread growing in `divergence_gain`, outside it. Fully
    determined by the seed.
    """
    if n_members < 2:
        raise ContractViolationError("a surrogate ensemble needs M >= 2 for disagreement")
    seeds = np.random.SeedSequence(seed).spawn(n_members)
    members = [
        SurrogatePolicy(expert, in_region, input_dim, action_dim,
                        sigma_in, divergence_gain, member_seed=s)
        for s in seeds
    ]
    return PolicyEnsemble(members)
