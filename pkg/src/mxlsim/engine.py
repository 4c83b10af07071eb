"""Batched multi-run simulation engine.

One call advances R independent experiment runs of a K-link game in
lockstep: the per-run dual variables are stacked as (R, K, S, b, b) and
every round does one batched eigendecomposition (the mirror map), one
batched game evaluation, the per-link randomness draws, and the
strategy-specific dual update.

Randomness discipline: a single master seed spawns one substream per
(purpose, run, link) via ``SeedSequence`` spawn keys.  Channels and
gradient noise never depend on the feedback strategy, so strategies
compared under the same master seed see common random numbers; masks
and delivery indicators live on their own per-link streams, which makes
the two reduced-feedback variants at p = 1 reproduce the full-feedback
trajectory bit for bit.

The recorded per-link divergence to a reference action X* is the
Fenchel coupling h(X*_k) + log(1 + tr exp(Y_k)) - tr(Y_k X*_k), which
equals the quantum KL divergence d(X*_k, X_k(n)) of the played action
exactly, but reuses the eigenvalues already computed for the mirror
step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hermitian import hermitize
from .learner import FeedbackStrategy, mirror_image
from .mimo import ChannelOperator, NetworkConfig, draw_channels, game_eval
from .schedule import StepSchedule

__all__ = [
    "PURPOSE_CHANNEL",
    "PURPOSE_NOISE",
    "PURPOSE_MASK",
    "PURPOSE_DELIVERY",
    "PURPOSE_INIT",
    "PURPOSE_NE_DRAWS",
    "substream",
    "MimoEnvironment",
    "SimulationResult",
    "simulate",
    "reference_entropy",
]

# Purpose tags for substream spawning; part of the reproducibility contract.
(PURPOSE_CHANNEL, PURPOSE_NOISE, PURPOSE_MASK,
 PURPOSE_DELIVERY, PURPOSE_INIT, PURPOSE_NE_DRAWS) = range(6)


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Deterministic, decorrelated generator for (purpose, run, link, ...)."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


class MimoEnvironment:
    """The MIMO energy-efficiency game as seen by the engine."""

    def __init__(self, cfg: NetworkConfig, channels: np.ndarray | None = None):
        self.cfg = cfg
        self.channels = channels
        self.sigma2 = cfg.sigma2
        self.noise_kind = "gaussian"
        self.n_links = cfg.links
        self.block_shape = (cfg.subcarriers, cfg.n_tx, cfg.n_tx)
        self.channel_mode = cfg.channel_mode
        self.op = None
        if cfg.channel_mode == "static":
            if channels is None:
                raise ValueError("static mode needs a drawn channel set")
            self.op = ChannelOperator(channels)

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        return draw_channels(self.cfg, rng)

    def evaluate(self, x: np.ndarray, h: np.ndarray):
        if self.op is not None:
            ge = game_eval(x, None, self.cfg, op=self.op)
        else:
            ge = game_eval(x, h, self.cfg)
        return ge.gradients, ge.ee


@dataclass
class SimulationResult:
    """Per-round records of a batch of runs plus the final learner state."""

    divergence: np.ndarray | None   # (N, R, K) per-link KL to X*, or None
    ee: np.ndarray                  # (N, R, K) per-link utility/EE values
    cost: np.ndarray                # (N, R, K) transmitted entries, int64
    y_final: np.ndarray             # (R, K, S, b, b)
    counters: np.ndarray            # (R, K) sporadic delivery counts

    @property
    def joint_divergence(self) -> np.ndarray | None:
        """(N, R) divergence of the joint action: sum over links."""
        return None if self.divergence is None else self.divergence.sum(axis=-1)


def reference_entropy(xstar: np.ndarray) -> np.ndarray:
    """h(X*_k) per link for a stack (K, S, b, b) of feasible actions."""
    w = np.linalg.eigvalsh(xstar)
    if np.any(w <= 0.0):
        raise ValueError("reference actions must be positive definite")
    t = np.sum(w, axis=(-2, -1))
    if np.any(t >= 1.0):
        raise ValueError("reference actions must have trace < 1")
    return np.sum(w * np.log(w), axis=(-2, -1)) + (1.0 - t) * np.log(1.0 - t)


def _draw_noise(rng: np.random.Generator, shape: tuple, sigma2: float,
                kind: str, out: np.ndarray | None = None) -> np.ndarray:
    """Raw real components of the complex gradient noise, shape (2,) + shape.

    Gaussian: each component N(0, sigma2/2), so complex entries have
    variance sigma2.  Uniform: each component U(-a, a) with a = sqrt(1.5
    sigma2) for the same variance but bounded support (keeps
    sum |Vhat|^2 almost surely finite).
    """
    if out is None:
        out = np.empty((2,) + shape)
    if kind == "gaussian":
        rng.standard_normal(out=out)
        out *= np.sqrt(sigma2 / 2.0)
    elif kind == "uniform":
        rng.random(out=out)
        out *= 2.0 * np.sqrt(1.5 * sigma2)
        out -= np.sqrt(1.5 * sigma2)
    else:
        raise ValueError(f"unknown noise kind {kind!r}")
    return out


def simulate(env, sched: StepSchedule, strategy: FeedbackStrategy, runs: int,
             iters: int, master_seed: int, y0: np.ndarray,
             xstar: np.ndarray | None = None) -> SimulationResult:
    """Run `runs` seeded replicas of the game for `iters` rounds.

    y0 is the common initial dual variable, shape (K, S, b, b); xstar,
    when given, enables divergence tracking.  Round n plays
    X(n) = mirror(Y(n-1)), records EE and divergence at X(n), then
    applies the strategy's dual update with the round-n feedback.
    """
    y0 = np.asarray(y0, dtype=complex)
    n_links = env.n_links
    s_blocks, b, _ = env.block_shape
    if y0.shape != (n_links, s_blocks, b, b):
        raise ValueError(f"y0 must have shape {(n_links, s_blocks, b, b)}")

    y = np.broadcast_to(y0, (runs,) + y0.shape).copy()
    counters = np.zeros((runs, n_links), dtype=np.int64)
    ee = np.empty((iters, runs, n_links))
    cost = np.zeros((iters, runs, n_links), dtype=np.int64)
    div = None
    h_const = None
    if xstar is not None:
        xstar = np.asarray(xstar, dtype=complex)
        h_const = reference_entropy(xstar)
        div = np.empty((iters, runs, n_links))

    noise_rngs = [[substream(master_seed, PURPOSE_NOISE, r, k)
                   for k in range(n_links)] for r in range(runs)]
    mask_rngs = delivery_rngs = None
    if strategy.kind == "incomplete":
        mask_rngs = [[substream(master_seed, PURPOSE_MASK, r, k)
                      for k in range(n_links)] for r in range(runs)]
        rows, cols = np.tril_indices(b)
    elif strategy.kind == "sporadic":
        delivery_rngs = [[substream(master_seed, PURPOSE_DELIVERY, r, k)
                          for k in range(n_links)] for r in range(runs)]

    if env.channel_mode == "static":
        h = env.channels
        chan_rngs = h_parts = None
    elif env.channel_mode == "iid":
        chan_rngs = [substream(master_seed, PURPOSE_CHANNEL, 1 + r)
                     for r in range(runs)]
        cfg = env.cfg
        h_parts = np.empty((runs, cfg.links, cfg.links, cfg.subcarriers,
                            cfg.n_rx, cfg.n_tx, 2))
        h = None
    else:
        h = None
        chan_rngs = h_parts = None

    full_entries = s_blocks * b * b

    for i in range(iters):
        n = i + 1
        x, log_partition = mirror_image(y, with_potential=True)

        if div is not None:
            pairing = np.einsum("ksab,rksba->rk", xstar, y).real
            div[i] = np.maximum(h_const + log_partition - pairing, 0.0)

        if chan_rngs is not None:
            # same draw layout as mimo.draw_channels, buffered per run
            for r in range(runs):
                chan_rngs[r].standard_normal(out=h_parts[r])
            h_parts *= 1.0 / np.sqrt(2.0)
            h = h_parts.view(np.complex128)[..., 0]

        grads, ee_vals = env.evaluate(x, h)
        if not np.all(np.isfinite(ee_vals)):
            bad = np.argwhere(~np.isfinite(np.asarray(ee_vals)))[0]
            raise FloatingPointError(
                f"non-finite utility at round {n} (run {bad[0]}, link {bad[-1]}); "
                "aborting the simulation")
        ee[i] = ee_vals

        if env.sigma2 > 0.0:
            zparts = np.empty((runs, n_links, 2, s_blocks, b, b))
            for r in range(runs):
                for k in range(n_links):
                    _draw_noise(noise_rngs[r][k], (s_blocks, b, b),
                                env.sigma2, env.noise_kind, out=zparts[r, k])
            z = zparts[:, :, 0] + 1j * zparts[:, :, 1]
            grads += hermitize(z)

        if strategy.kind == "full":
            y += float(sched.gamma(n)) * grads
            cost[i] = full_entries
        elif strategy.kind == "incomplete":
            draws = np.empty((runs, n_links, s_blocks, rows.size))
            for r in range(runs):
                for k in range(n_links):
                    mask_rngs[r][k].random(out=draws[r, k])
            keep = (draws < strategy.p).astype(float)
            mask = np.zeros((runs, n_links, s_blocks, b, b))
            mask[..., rows, cols] = keep
            mask[..., cols, rows] = keep
            cost[i] = keep.sum(axis=(-2, -1)).astype(np.int64)
            y += float(sched.gamma(n)) * (mask * grads)
        else:
            delivered = np.empty((runs, n_links), dtype=bool)
            for r in range(runs):
                for k in range(n_links):
                    delivered[r, k] = delivery_rngs[r][k].random() < strategy.p
            counters += delivered
            gam = np.where(delivered,
                           sched.gamma(np.maximum(counters, 1)), 0.0)
            y += gam[..., None, None, None] * grads
            cost[i] = np.where(delivered, full_entries, 0)

    return SimulationResult(divergence=div, ee=ee, cost=cost,
                            y_final=y, counters=counters)
