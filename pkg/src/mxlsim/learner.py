"""Per-link update engines: full, entrywise-masked, and sporadic learning.

Every variant maintains a Hermitian dual matrix Y and plays the mirror
image X = A * exp(Y)/(1 + tr exp(Y)):

* full:     Y <- Y + gamma_n * Vhat            every round;
* masked:   Y <- Y + gamma_n * (Delta o Vhat)  with a symmetric 0/1
            Bernoulli(p) mask Delta drawn fresh each round, so missing
            gradient entries simply do not move their dual entries;
* sporadic: on Bernoulli(p) delivery rounds only,
            Y <- Y + gamma_{n_k} * Vhat, where n_k counts this link's
            own deliveries; undelivered rounds leave the state (and the
            step-size index) untouched.

States carry either a plain (M, M) dual matrix or a stack of diagonal
blocks (S, n, n); feasibility (Hermitian, positive definite, trace
strictly below the bound) is preserved by construction for arbitrary
bounded gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .geometry import mirror_weights, strict_trace_clamp
from .hermitian import dagger, hermitize, require_hermitian
from .schedule import StepSchedule

__all__ = [
    "FeedbackStrategy",
    "LearnerState",
    "MaskedGradient",
    "make_state",
    "mirror_image",
    "mask_gradient",
    "mxl_step",
    "mxl_i_step",
    "mxl_s_step",
    "run_round",
    "feedback_entry_count",
]


@dataclass(frozen=True)
class FeedbackStrategy:
    """Which part of the gradient reaches the transmitter each round.

    kind is one of "full", "incomplete" (each entry delivered with
    probability p, Hermitian-symmetrically) or "sporadic" (the whole
    matrix delivered with probability p).  p = 1 makes either variant
    coincide with full feedback.
    """

    kind: str
    p: float = 1.0

    def __post_init__(self):
        if self.kind not in ("full", "incomplete", "sporadic"):
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.kind == "full" and self.p != 1.0:
            raise ValueError("full feedback has no delivery probability")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"delivery probability must lie in (0, 1], got {self.p}")

    @classmethod
    def full(cls) -> "FeedbackStrategy":
        return cls("full", 1.0)

    @classmethod
    def incomplete(cls, p: float) -> "FeedbackStrategy":
        return cls("incomplete", p)

    @classmethod
    def sporadic(cls, p: float) -> "FeedbackStrategy":
        return cls("sporadic", p)


@dataclass(frozen=True)
class LearnerState:
    """One link's dual/primal pair plus its delivery counter."""

    link_id: int
    y: np.ndarray          # (M, M) or (S, n, n) Hermitian dual variable
    x: np.ndarray          # bound * mirror image of y, same shape
    bound: float = 1.0
    feedback_count: int = 0


def _action_axes(y: np.ndarray) -> tuple:
    # (M, M) -> eigenvalue axis only; (S, n, n) -> block and eigenvalue axes.
    return (-1,) if y.ndim == 2 else (-2, -1)


def mirror_image(y: np.ndarray, bound: float = 1.0,
                 with_potential: bool = False):
    """bound * exp(Y)/(1 + tr exp(Y)) on a plain matrix or a block stack.

    For block input the trace in the normalizer runs over all blocks,
    so the whole block-diagonal action shares one normalization.  With
    `with_potential` the log-partition log(1 + tr exp(Y)) is returned
    as well.
    """
    y = np.asarray(y)
    w, v = np.linalg.eigh(y)
    axes = _action_axes(y)
    weights, hstar = mirror_weights(w, axes=axes)
    x = bound * hermitize((v * weights[..., None, :]) @ dagger(v))
    trace = np.einsum("...ii->...", x).real
    if len(axes) == 2:
        trace = trace.sum(axis=-1)
    x = strict_trace_clamp(x, trace, bound)
    if with_potential:
        return x, hstar
    return x


def make_state(link_id: int, dim: int, bound: float = 1.0,
               n_blocks: int | None = None, y0: np.ndarray | None = None) -> LearnerState:
    """Fresh state; Y = 0 by default, i.e. the uniform action bound*I/(M+1)."""
    if y0 is None:
        shape = (dim, dim) if n_blocks is None else (n_blocks, dim, dim)
        y0 = np.zeros(shape, dtype=complex)
    else:
        y0 = require_hermitian(np.asarray(y0, dtype=complex), name="initial dual")
    return LearnerState(link_id=link_id, y=y0, x=mirror_image(y0, bound), bound=bound)


@dataclass(frozen=True)
class MaskedGradient:
    """A gradient as it survives the feedback channel."""

    matrix: np.ndarray        # Delta o Vhat (masked) or Vhat (sporadic)
    mask: np.ndarray | None = None
    delivered: bool = True


def mask_gradient(v: np.ndarray, p: float, rng: np.random.Generator) -> MaskedGradient:
    """Bernoulli(p)-mask each lower-triangle entry and mirror it upward.

    Only positions inside the trailing matrices are drawn, so the
    structural zeros of a block stack are never "transmitted".  The
    mask is exactly symmetric, keeping the masked gradient Hermitian.
    """
    v = np.asarray(v)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"delivery probability must lie in [0, 1], got {p}")
    n = v.shape[-1]
    rows, cols = np.tril_indices(n)
    keep = (rng.random(v.shape[:-2] + (rows.size,)) < p).astype(float)
    mask = np.zeros(v.shape[:-2] + (n, n))
    mask[..., rows, cols] = keep
    mask[..., cols, rows] = keep
    return MaskedGradient(matrix=mask * v, mask=mask)


def _stepped(state: LearnerState, y_new: np.ndarray, count: int | None = None) -> LearnerState:
    x_new = mirror_image(y_new, state.bound)
    if count is None:
        count = state.feedback_count
    return replace(state, y=y_new, x=x_new, feedback_count=count)


def mxl_step(state: LearnerState, v: np.ndarray, gamma_n: float) -> LearnerState:
    """Full-feedback ascent step: Y += gamma_n * Vhat, then re-mirror."""
    v = np.asarray(v)
    require_hermitian(v, name="gradient")
    return _stepped(state, state.y + gamma_n * v)


def mxl_i_step(state: LearnerState, masked: MaskedGradient, gamma_n: float) -> LearnerState:
    """Masked step: Y += gamma_n * (Delta o Vhat); unmasked entries freeze."""
    m = masked.matrix
    if masked.mask is not None and not np.array_equal(masked.mask,
                                                      np.swapaxes(masked.mask, -1, -2)):
        raise ValueError("mask must be symmetric")
    require_hermitian(m, name="masked gradient")
    return _stepped(state, state.y + gamma_n * m)


def mxl_s_step(state: LearnerState, v: np.ndarray, delivered: bool,
               sched: StepSchedule) -> LearnerState:
    """Sporadic step: on delivery, bump this link's counter and use
    gamma at the counter; otherwise leave the state untouched."""
    if not delivered:
        return state
    v = np.asarray(v)
    require_hermitian(v, name="gradient")
    count = state.feedback_count + 1
    return _stepped(state, state.y + float(sched.gamma(count)) * v, count)


def feedback_entry_count(v: np.ndarray) -> int:
    """Entries in one full feedback message: S * n^2 for a block stack."""
    v = np.asarray(v)
    return int(np.prod(v.shape[-2:])) * int(np.prod(v.shape[:-2], dtype=int))


def _tril_count(mask: np.ndarray) -> int:
    n = mask.shape[-1]
    rows, cols = np.tril_indices(n)
    return int(round(float(mask[..., rows, cols].sum())))


def run_round(states: list[LearnerState], gradients: list[np.ndarray],
              strategy: FeedbackStrategy, sched: StepSchedule, n: int,
              rngs: list[np.random.Generator]) -> tuple[list[LearnerState], list[int]]:
    """Apply one round of the chosen strategy to every link.

    Each link consumes only its own random stream (mask or delivery
    draws), so permuting the link order never changes any individual
    trajectory.  Returns the new states and the number of scalar
    entries each link's receiver actually transmitted this round.
    """
    if not (len(states) == len(gradients) == len(rngs)):
        raise ValueError("states, gradients and rngs must align")
    new_states: list[LearnerState] = []
    costs: list[int] = []
    gamma_n = float(sched.gamma(n))
    for state, v, rng in zip(states, gradients, rngs):
        if strategy.kind == "full":
            new_states.append(mxl_step(state, v, gamma_n))
            costs.append(feedback_entry_count(v))
        elif strategy.kind == "incomplete":
            masked = mask_gradient(v, strategy.p, rng)
            new_states.append(mxl_i_step(state, masked, gamma_n))
            costs.append(_tril_count(masked.mask))
        else:
            delivered = bool(rng.random() < strategy.p)
            new_states.append(mxl_s_step(state, v, delivered, sched))
            costs.append(feedback_entry_count(v) if delivered else 0)
    return new_states, costs
