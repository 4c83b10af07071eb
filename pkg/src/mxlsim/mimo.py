"""Multicarrier multi-user MIMO energy-efficiency game.

K transmitter-receiver links share S orthogonal subcarriers; link k
shapes a block-diagonal transmit covariance Q_k (one N_t x N_t PSD
block per subcarrier, total power tr Q_k <= P_max) and cares about its
energy efficiency

    EE_k = r_k / (tr Q_k + P_c),

with the Shannon rate (natural log)

    r_k = logdet(I + sum_j H_jk Q_j H_jk†) - logdet(I + sum_{j≠k} H_jk Q_j H_jk†).

EE_k is not concave in Q_k, but under the change of variables

    X_k = (P_c + P_max)/P_max * Q_k / (P_c + tr Q_k)

the transformed utility is concave in X_k over {X ≽ 0, tr X <= 1} and
takes the same value as EE_k at the matching Q_k.  This module supplies
channel generation, both directions of the variable change, rate / EE /
utility evaluation, the analytic utility gradient (the quantity a
receiver would feed back), additive-noise synthesis for that gradient,
and the per-round signaling-cost accounting.

The interference sums here use the covariance Q_j of the *interfering*
transmitter j; that is the only reading under which the whitened form
logdet(I + H~ Q_k H~†) reproduces r_k.

Array layout: channels H[k, j, s] is the N_r x N_t channel from
transmitter k to receiver j on subcarrier s; covariances/actions are
stacks (K, S, N_t, N_t).  Evaluation routines accept extra leading
batch axes on both operands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hermitian import dagger, hermitize

__all__ = [
    "NetworkConfig",
    "default_network",
    "dbm_to_watts",
    "draw_channels",
    "to_adjusted",
    "from_adjusted",
    "rate_from_covariances",
    "achievable_rate",
    "effective_channel",
    "energy_efficiency",
    "utility",
    "gradient",
    "GameEval",
    "game_eval",
    "noisy_gradient",
    "feedback_cost",
]


def dbm_to_watts(dbm: float) -> float:
    """20 dBm -> 0.1 W, 30 dBm -> 1 W; all internal math is in linear units."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class NetworkConfig:
    """Static description of the network and its noise environment."""

    links: int                 # K transmitter-receiver pairs
    n_tx: int                  # transmit antennas N_t
    n_rx: int                  # receive antennas N_r
    subcarriers: int           # S
    p_circuit: float           # circuit power P_c, watts
    p_max: float               # transmit power budget P_max, watts
    sigma2: float = 1.0        # gradient-noise variance
    channel_mode: str = "static"   # "static" or "iid" (redrawn each round)

    def __post_init__(self):
        for name in ("links", "n_tx", "n_rx", "subcarriers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.p_circuit <= 0 or self.p_max <= 0:
            raise ValueError("powers must be positive")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        if self.channel_mode not in ("static", "iid"):
            raise ValueError(f"unknown channel_mode {self.channel_mode!r}")

    @property
    def trace_ratio(self) -> float:
        """(P_c + P_max)/P_max, the trace scale of the variable change."""
        return (self.p_circuit + self.p_max) / self.p_max


def default_network(**overrides) -> NetworkConfig:
    """The benchmark network: 9 links, 4x8 antennas, 3 subcarriers,
    P_c = 20 dBm, P_max = 30 dBm, unit gradient-noise variance."""
    base = dict(links=9, n_tx=4, n_rx=8, subcarriers=3,
                p_circuit=dbm_to_watts(20.0), p_max=dbm_to_watts(30.0),
                sigma2=1.0, channel_mode="static")
    base.update(overrides)
    return NetworkConfig(**base)


def draw_channels(cfg: NetworkConfig, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. circularly-symmetric complex Gaussian entries, unit variance.

    Shape (K, K, S, N_r, N_t); index [k, j, s] is transmitter k to
    receiver j on subcarrier s.
    """
    shape = (cfg.links, cfg.links, cfg.subcarriers, cfg.n_rx, cfg.n_tx)
    parts = rng.standard_normal(shape + (2,))
    parts *= 1.0 / np.sqrt(2.0)
    return parts.view(np.complex128)[..., 0]


def _block_trace(a: np.ndarray) -> np.ndarray:
    # trace over the trailing (S, n, n) blocks
    return np.einsum("...sii->...", a).real


def to_adjusted(q: np.ndarray, cfg: NetworkConfig) -> np.ndarray:
    """Covariance -> action: X = trace_ratio * Q / (P_c + tr Q).

    Maps the power budget boundary tr Q = P_max onto tr X = 1.
    """
    q = np.asarray(q)
    tr = _block_trace(q)
    return cfg.trace_ratio * q / (cfg.p_circuit + tr)[..., None, None, None]


def from_adjusted(x: np.ndarray, cfg: NetworkConfig) -> np.ndarray:
    """Action -> covariance, the inverse of :func:`to_adjusted`.

    With c = trace_ratio: tr Q = P_c tr X / (c - tr X) and
    Q = (P_c + tr Q) X / c, which collapses to
    Q = P_c P_max X / (P_c + P_max (1 - tr X)).
    """
    x = np.asarray(x)
    tr = _block_trace(x)
    beta = cfg.p_circuit + cfg.p_max * (1.0 - tr)
    coeff = cfg.p_circuit * cfg.p_max / beta
    return coeff[..., None, None, None] * x


def _covariance_terms(q: np.ndarray, h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(I + total received covariance, own-signal term) per (k, s).

    q: (..., K, S, nt, nt), h: (..., K, K, S, nr, nt).  Returns
    R[..., k, s] = I + sum_j H_jk Q_j H_jk†  and  P_kk[..., k, s].
    """
    q = np.asarray(q)
    h = np.asarray(h)
    t = h @ q[..., :, None, :, :, :]          # T[j, k, s] = H_jks Q_js
    p = t @ dagger(h)                          # P[j, k, s] = H Q H†
    p_own = np.einsum("...jjsab->...jsab", p)
    nr = h.shape[-2]
    r_full = np.sum(p, axis=-5) + np.eye(nr)
    return r_full, p_own


def _received_covariance_batched(q: np.ndarray, h: np.ndarray) -> np.ndarray:
    """I + sum_j H_jk Q_j H_jk† for per-sample channel stacks.

    Folds the receiver index into GEMM rows and the interferer index
    into GEMM columns, so the interference sum costs two layout copies
    and two batched products instead of K^2 separate small ones.
    """
    j_dim, k_dim, s_dim, nr, nt = h.shape[-5:]
    # (..., J, S, K*nr, nt)
    h_rows = np.ascontiguousarray(np.moveaxis(h, -4, -3)).reshape(
        h.shape[:-5] + (j_dim, s_dim, k_dim * nr, nt))
    tq = h_rows @ q                            # (..., J, S, K*nr, nt)
    # (..., K, S, nr, J*nt)
    def to_cols(a):
        a = a.reshape(a.shape[:-2] + (k_dim, nr, nt))       # (..., J, S, K, nr, nt)
        a = np.moveaxis(a, (-5, -3, -2), (-2, -5, -3))      # (..., K, S, nr, J, nt)
        return np.ascontiguousarray(a).reshape(a.shape[:-2] + (j_dim * nt,))
    cols_tq = to_cols(tq)
    cols_h = to_cols(h_rows)
    return cols_tq @ dagger(cols_h) + np.eye(nr)


def rate_from_covariances(q: np.ndarray, h: np.ndarray) -> np.ndarray:
    """All links' Shannon rates r_k (nats) from covariances, shape (..., K)."""
    r_full, p_own = _covariance_terms(q, h)
    _, ld_full = np.linalg.slogdet(r_full)
    _, ld_intf = np.linalg.slogdet(r_full - p_own)
    return np.sum(ld_full - ld_intf, axis=-1)


def achievable_rate(k: int, q: np.ndarray, h: np.ndarray) -> float:
    """Shannon rate of link k at the covariance profile q."""
    return float(rate_from_covariances(q, h)[..., k])


def effective_channel(k: int, q: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Whitened direct channel (I + interference)^(-1/2) H_kk, per subcarrier.

    Shape (S, nr, nt).  Satisfies
    r_k = sum_s logdet(I + H~_ks Q_ks H~_ks†).
    """
    q = np.asarray(q)
    h = np.asarray(h)
    r_full, p_own = _covariance_terms(q, h)
    w_intf = r_full[..., k, :, :, :] - p_own[..., k, :, :, :]
    vals, vecs = np.linalg.eigh(w_intf)
    inv_sqrt = hermitize((vecs * (vals ** -0.5)[..., None, :]) @ dagger(vecs))
    return inv_sqrt @ h[..., k, k, :, :, :]


def energy_efficiency(k: int, q: np.ndarray, h: np.ndarray, cfg: NetworkConfig) -> float:
    """EE_k = r_k / (tr Q_k + P_c), in nats per unit energy."""
    rate = achievable_rate(k, q, h)
    tr_k = float(_block_trace(np.asarray(q)[..., k, :, :, :]))
    return rate / (tr_k + cfg.p_circuit)


def utility(k: int, x: np.ndarray, h: np.ndarray, cfg: NetworkConfig) -> float:
    """Transformed utility of link k at the joint action profile x.

        u_k(X) = phi_k * logdet(I + P_c P_max H~ X_k H~† / beta_k),
        beta_k = P_c + P_max (1 - tr X_k),
        phi_k  = beta_k / (P_c (P_c + P_max)),

    with the whitening H~ built from the other links' covariances
    from_adjusted(X_j).  Concave in X_k with the others held fixed, and
    equal in value to EE_k at the matching covariance profile.
    """
    x = np.asarray(x)
    pc, pm = cfg.p_circuit, cfg.p_max
    tr_k = float(_block_trace(x[..., k, :, :, :]))
    beta = pc + pm * (1.0 - tr_k)
    phi = beta / (pc * (pc + pm))
    h_eff = effective_channel(k, from_adjusted(x, cfg), h)
    inner = h_eff @ x[..., k, :, :, :] @ dagger(h_eff)
    nr = inner.shape[-1]
    _, ld = np.linalg.slogdet(np.eye(nr) + (pc * pm / beta) * inner)
    return phi * float(np.sum(ld, axis=-1))


class ChannelOperator:
    """Precomputed quadratic form of one channel set.

    The received covariance R[k, s] = I + sum_j H_jks Q_js H_jks† is a
    fixed linear map from the stacked covariances to the stacked
    receive-side matrices; materializing it once per channel set turns
    the per-round interference sum into one GEMM per subcarrier, which
    is what makes long static-channel experiments cheap.
    """

    def __init__(self, h: np.ndarray):
        h = np.asarray(h)
        if h.ndim != 5:
            raise ValueError("ChannelOperator expects one unbatched channel set")
        k, _, s, nr, nt = h.shape
        self.dims = (k, s, nr, nt)
        self.h_own = np.ascontiguousarray(np.einsum("jjsab->jsab", h))
        # wmap[s, (j, b, c), (k, a, d)] = H[j,k,s,a,b] * conj(H[j,k,s,d,c])
        w = np.einsum("jksab,jksdc->sjbckad", h, h.conj())
        self.wmap = np.ascontiguousarray(w.reshape(s, k * nt * nt, k * nr * nr))

    def received_covariance(self, q: np.ndarray) -> np.ndarray:
        """(..., K, S, nt, nt) covariances -> (..., K, S, nr, nr) of
        I + total received covariance at each receiver."""
        k, s, nr, nt = self.dims
        lead = q.shape[:-4]
        batch = int(np.prod(lead, dtype=np.int64)) if lead else 1
        qs = np.moveaxis(q, -3, 0).reshape(s, batch, k * nt * nt)
        out = qs @ self.wmap
        out = out.reshape((s,) + lead + (k, nr, nr))
        return np.moveaxis(out, 0, -3) + np.eye(nr)


@dataclass(frozen=True)
class GameEval:
    """One joint evaluation of the game: feedback gradients, rates, EE."""

    gradients: np.ndarray    # (..., K, S, nt, nt) Hermitian
    rates: np.ndarray        # (..., K) nats
    ee: np.ndarray           # (..., K)


def game_eval(x: np.ndarray, h: np.ndarray | None, cfg: NetworkConfig,
              op: ChannelOperator | None = None) -> GameEval:
    """Evaluate every link's utility gradient, rate and EE at once.

    The gradient of u_k in X_k (others fixed) reduces, after folding the
    variable change back in, to

        V_k = P_max/(P_c+P_max) * [ M_k + (tr(M_k Q_k) - r_k)/P_c * I ],

    with M_k = H_kk† R_k^{-1} H_kk the whitened direct-channel quadratic
    form and R_k = I + sum_j H_jk Q_j H_jk† the full received
    covariance; the identity P_c P_max X_k / beta_k = Q_k folds the
    trace factor of the variable change into R_k itself.  The rate
    drops out of the same solve through
    r_ks = -logdet(I - M_ks Q_ks), so one batched linear solve per
    round covers gradients, rates and EE.
    """
    x = np.asarray(x)
    pc, pm = cfg.p_circuit, cfg.p_max
    q = from_adjusted(x, cfg)
    if op is not None:
        r_full = op.received_covariance(q)
        h_own = op.h_own
    elif h is not None and np.asarray(h).ndim == 5:
        op = ChannelOperator(h)
        r_full = op.received_covariance(q)
        h_own = op.h_own
    else:
        h = np.asarray(h)
        r_full = _received_covariance_batched(q, h)
        h_own = np.einsum("...jjsab->...jsab", h)

    sol = np.linalg.solve(r_full, np.broadcast_to(h_own, r_full.shape[:-1]
                                                  + (h_own.shape[-1],)))
    whitened = hermitize(dagger(h_own) @ sol)
    nt = x.shape[-1]
    _, ld = np.linalg.slogdet(np.eye(nt) - whitened @ q)
    rates = -np.sum(ld, axis=-1)
    tr_mq = np.einsum("...ksab,...ksba->...k", whitened, q).real
    scal = (tr_mq - rates) / pc
    grads = (pm / (pc + pm)) * (whitened + scal[..., None, None, None] * np.eye(nt))
    grads = hermitize(grads)

    tr_q = _block_trace(q)
    ee = rates / (tr_q + pc)
    return GameEval(gradients=grads, rates=rates, ee=ee)


def gradient(k: int, x: np.ndarray, h: np.ndarray, cfg: NetworkConfig) -> np.ndarray:
    """Analytic gradient of u_k in X_k at the joint profile x, (S, nt, nt)."""
    return game_eval(x, h, cfg).gradients[..., k, :, :, :]


def noisy_gradient(v: np.ndarray, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Receiver-side estimate: V plus the Hermitian part of i.i.d. complex
    Gaussian noise with per-entry variance sigma2 (block support only)."""
    v = np.asarray(v)
    if sigma2 == 0.0:
        return v
    parts = rng.standard_normal((2,) + v.shape)
    z = np.sqrt(sigma2 / 2.0) * (parts[0] + 1j * parts[1])
    return v + hermitize(z)


def feedback_cost(strategy, cfg: NetworkConfig, masks: np.ndarray | None = None,
                  deliveries: np.ndarray | None = None) -> np.ndarray:
    """Scalar entries transmitted per link this round, shape (K,).

    Counting convention: a full gradient message counts S * N_t^2
    entries per link.  Under entrywise masking only the delivered
    lower-triangle positions count (the upper triangle is implied by
    Hermitian symmetry), so full masking at p = 1 counts
    S * N_t (N_t + 1) / 2.  A sporadic delivery counts the full
    S * N_t^2; silence counts zero.
    """
    k, s, nt = cfg.links, cfg.subcarriers, cfg.n_tx
    full = s * nt * nt
    if strategy.kind == "full":
        return np.full(k, full, dtype=np.int64)
    if strategy.kind == "incomplete":
        if masks is None:
            raise ValueError("masked accounting needs the realized masks")
        rows, cols = np.tril_indices(nt)
        per_link = masks[..., rows, cols].sum(axis=(-2, -1))
        return np.asarray(np.round(per_link), dtype=np.int64)
    if strategy.kind == "sporadic":
        if deliveries is None:
            raise ValueError("sporadic accounting needs the delivery indicators")
        return np.where(np.asarray(deliveries, dtype=bool), full, 0).astype(np.int64)
    raise ValueError(f"unknown strategy kind {strategy.kind!r}")
