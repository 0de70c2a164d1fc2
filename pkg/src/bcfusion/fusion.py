"""Gaussian action distributions and their precision-weighted composition.

Every controller in this toolkit emits an action as a vector of independent
univariate Gaussians. Two such outputs are combined by the normalised product
of their densities, which for Gaussians is again Gaussian per dimension:

    mu    = (mu_a * sig_b^2 + mu_b * sig_a^2) / (sig_a^2 + sig_b^2)
    sig^2 = sig_a^2 * sig_b^2 / (sig_a^2 + sig_b^2)

The normalisation constant is never materialised; the closed form above
absorbs it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError

# Stds below this are raised before fusing to keep the variance ratio finite.
STD_FLOOR = 1e-9


@dataclass(frozen=True)
class GaussianSpec:
    """A single univariate Gaussian (mean, std), std strictly positive."""

    mean: float
    std: float

    def __post_init__(self):
        if not np.isfinite(self.mean):
            raise ContractViolationError(f"mean must be finite, got {self.mean}")
        if not np.isfinite(self.std) or self.std <= 0.0:
            raise ContractViolationError(f"std must be finite and > 0, got {self.std}")


class ActionDistribution:
    """A diagonal Gaussian over an n-dimensional action.

    Dimensions are statistically independent by construction; means and stds
    are stored as read-only float64 arrays of equal length n >= 1.
    """

    __slots__ = ("means", "stds")

    def __init__(self, means, stds):
        means = np.array(means, dtype=float)
        stds = np.array(stds, dtype=float)
        if means.ndim != 1 or means.shape != stds.shape or means.size < 1:
            raise ContractViolationError(
                f"means/stds must be equal-length 1-D vectors, got {means.shape} and {stds.shape}"
            )
        if not np.all(np.isfinite(means)):
            raise ContractViolationError("non-finite mean in action distribution")
        if not (np.all(np.isfinite(stds)) and np.all(stds > 0.0)):
            raise ContractViolationError("stds must be finite and strictly positive")
        means.flags.writeable = False
        stds.flags.writeable = False
        self.means = means
        self.stds = stds

    @property
    def n(self) -> int:
        return self.means.size

    @property
    def dims(self) -> tuple[GaussianSpec, ...]:
        return tuple(GaussianSpec(float(m), float(s)) for m, s in zip(self.means, self.stds))

    def __eq__(self, other):
        return (
            isinstance(other, ActionDistribution)
            and np.array_equal(self.means, other.means)
            and np.array_equal(self.stds, other.stds)
        )

    def __repr__(self):
        return f"ActionDistribution(means={self.means!r}, stds={self.stds!r})"


@dataclass(frozen=True)
class ActionVector:
    """A concrete action with the per-dimension bounds it was clamped to."""

    values: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        lo = np.array(self.lo, dtype=float)
        hi = np.array(self.hi, dtype=float)
        if not (values.shape == lo.shape == hi.shape) or values.ndim != 1:
            raise ContractViolationError("values and bounds must be equal-length vectors")
        if not np.all(np.isfinite(values)):
            raise ContractViolationError("non-finite action value")
        if np.any(values < lo) or np.any(values > hi):
            raise ContractViolationError("action value outside its bounds")
        for name, arr in (("values", values), ("lo", lo), ("hi", hi)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class FusionStepRecord:
    """Everything produced by one composition step, for logging."""

    policy: ActionDistribution
    prior: ActionDistribution
    fused: ActionDistribution
    action: ActionVector
    floor_engaged: bool = False


def _check_bounds(lo, hi, n):
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,))
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
        raise ContractViolationError("bounds must be finite with lo < hi per dimension")
    return lo, hi


def fuse(policy: ActionDistribution, prior: ActionDistribution) -> ActionDistribution:
    """Compose two diagonal Gaussians by their normalised product.

    Raises ContractViolationError on dimension mismatch. Input stds below
    STD_FLOOR are raised to it first (see `floor_would_engage`).
    """
    if policy.n != prior.n:
        raise ContractViolationError(
            f"dimension mismatch: policy has {policy.n} dims, prior has {prior.n}"
        )
    va = np.maximum(policy.stds, STD_FLOOR) ** 2
    vb = np.maximum(prior.stds, STD_FLOOR) ** 2
    total = va + vb
    means = (policy.means * vb + prior.means * va) / total
    variances = va * vb / total
    return ActionDistribution(means, np.sqrt(variances))


def floor_would_engage(policy: ActionDistribution, prior: ActionDistribution) -> bool:
    """True when `fuse` would raise any input std to the numerical floor."""
    return bool(np.any(policy.stds < STD_FLOOR) or np.any(prior.stds < STD_FLOOR))


def sample_action(dist: ActionDistribution, rng: np.random.Generator, lo, hi) -> ActionVector:
    """Draw one action per dimension, then clamp to [lo, hi].

    Deterministic given the generator state; clamping happens after sampling,
    the distribution is not truncated.
    """
    lo, hi = _check_bounds(lo, hi, dist.n)
    raw = rng.normal(dist.means, dist.stds)
    return ActionVector(np.clip(raw, lo, hi), lo, hi)


def mode_action(dist: ActionDistribution, lo, hi) -> ActionVector:
    """Deterministic variant of `sample_action`: clamped per-dimension means."""
    lo, hi = _check_bounds(lo, hi, dist.n)
    return ActionVector(np.clip(dist.means, lo, hi), lo, hi)


def bcf_step(
    policy_out: ActionDistribution,
    prior_out: ActionDistribution,
    rng: np.random.Generator,
    lo=-1.0,
    hi=1.0,
    deterministic: bool = False,
) -> tuple[ActionVector, FusionStepRecord]:
    """One composition step: fuse, then select an action from the composite.

    Returns the executed action and a record holding all three distributions.
    """
    fused = fuse(policy_out, prior_out)
    if deterministic:
        action = mode_action(fused, lo, hi)
    else:
        action = sample_action(fused, rng, lo, hi)
    record = FusionStepRecord(
        policy=policy_out,
        prior=prior_out,
        fused=fused,
        action=action,
        floor_engaged=floor_would_engage(policy_out, prior_out),
    )
    return action, record
