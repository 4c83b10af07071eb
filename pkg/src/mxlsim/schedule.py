"""Power-law step-size schedules and their derived convergence quantities.

The schedule is gamma_n = alpha * n^(-nu) with nu in (0.5, 1], which
makes sum(gamma_n) diverge while sum(gamma_n^2) converges.  On top of
it this module provides:

* the supremum eps = sup_n (gamma_n - gamma_{n+1}) / gamma_n^2 and its
  closed-form upper envelope eps_bar(nu)/alpha;
* the first and second moments of the effective random step consumed by
  a learner that advances its step index only on Bernoulli(p) delivery
  events (``sporadic_*``), together with truncated-sum identity checks;
* a Chernoff-based upper bound for the effective-step ratio
  ring2_n / bar_n and its exact binomial evaluation;
* deterministic iteration of the mean-divergence recursions

      D_{n+1} = (1 - p B gamma_n) D_n + p C gamma_n^2          (masked)
      D_{n+1} = (1 - B bar_n) D_n + C ring2_n                  (sporadic)

  against their claimed envelopes  lambda * gamma_n  and
  mu * ring2_n / bar_n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

__all__ = [
    "StepSchedule",
    "RateBoundParams",
    "epsilon_sup",
    "epsilon_bar",
    "sporadic_mean",
    "sporadic_second_moment",
    "sporadic_moment_curves",
    "SumIdentityReport",
    "check_sum_identities",
    "rate_ratio_bound",
    "exact_rate_ratio",
    "RecursionCheck",
    "bound_recursion_mxli",
    "bound_recursion_mxls",
]


@dataclass(frozen=True)
class StepSchedule:
    """gamma_n = alpha * n^(-nu), alpha > 0, nu in (0.5, 1]."""

    alpha: float
    nu: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.5 < self.nu <= 1.0:
            raise ValueError(f"nu must lie in (0.5, 1], got {self.nu}")

    def gamma(self, n):
        """Step size at index n (scalar or array of indices >= 1)."""
        return self.alpha * np.asarray(n, dtype=float) ** (-self.nu)


@dataclass(frozen=True)
class RateBoundParams:
    """Constants feeding the divergence recursions.

    B  -- strong-stability constant of the equilibrium,
    C  -- almost-sure bound on sum_{i,j} |Vhat_{ij}|^2,
    p  -- delivery probability (per entry for masked, per round for sporadic).
    """

    B: float
    C: float
    p: float = 1.0

    def __post_init__(self):
        if not self.B > 0:
            raise ValueError("B must be positive")
        if self.C < 0:
            raise ValueError("C must be nonnegative")
        if not 0.0 < self.p <= 1.0:
            raise ValueError("p must lie in (0, 1]")


def epsilon_sup(sched: StepSchedule, n_max: int = 100_000) -> float:
    """sup_n (gamma_n - gamma_{n+1}) / gamma_n^2.

    For nu = 1 the sequence increases to its limit 1/alpha, which is
    returned exactly.  For nu < 1 the sequence peaks at small n and
    decays to zero, so the max over n <= n_max is the supremum.
    """
    if sched.nu == 1.0:
        return 1.0 / sched.alpha
    n = np.arange(1, n_max + 1, dtype=float)
    g = sched.gamma(n)
    g_next = sched.gamma(n + 1.0)
    return float(np.max((g - g_next) / g**2))


def epsilon_bar(nu: float) -> float:
    """Closed-form upper envelope of x^(-nu) (1 - (1+x)^(-nu)) on (0, 1].

    Multiplied by 1/alpha it dominates :func:`epsilon_sup`; it equals 1
    exactly at nu = 1.
    """
    if not 0.5 < nu <= 1.0:
        raise ValueError(f"nu must lie in (0.5, 1], got {nu}")
    if nu == 1.0:
        return 1.0
    split = np.log2(1.5)
    if nu > split:
        return nu * ((1.0 - nu) / (2.0 * nu)) ** (1.0 - nu)
    return 1.0 - 2.0 ** (-nu)


def _delivery_weights(p: float, n: int) -> np.ndarray:
    """P[step index = l] for l = 1..n after n rounds at delivery prob p.

    The index equals one plus a Binomial(n-1, p) count, conditioned on a
    delivery in round n; the weights are evaluated through the binomial
    pmf (log-space internally), stable up to n ~ 1e5.
    """
    return p * binom.pmf(np.arange(n), n - 1, p)


def sporadic_mean(sched: StepSchedule, p: float, n: int) -> float:
    """bar_n = E[gamma_{n_k} eta_k(n)], the mean effective step at round n."""
    _check_prob(p)
    if p == 1.0:
        return float(sched.gamma(n))
    return float(_delivery_weights(p, n) @ sched.gamma(np.arange(1, n + 1)))


def sporadic_second_moment(sched: StepSchedule, p: float, n: int) -> float:
    """ring2_n = E[(gamma_{n_k} eta_k(n))^2]."""
    _check_prob(p)
    if p == 1.0:
        return float(sched.gamma(n) ** 2)
    return float(_delivery_weights(p, n) @ sched.gamma(np.arange(1, n + 1)) ** 2)


def _check_prob(p: float):
    if not 0.0 < p <= 1.0:
        raise ValueError(f"delivery probability must lie in (0, 1], got {p}")


def sporadic_moment_curves(sched: StepSchedule, p: float,
                           n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """(bar_n, ring2_n) for n = 1..n_max via the Pascal-triangle recurrence.

    The delivery-count weights w_{n,l} satisfy
    w_{n,l} = (1-p) w_{n-1,l} + p w_{n-1,l-1}, so the whole prefix costs
    O(n_max^2) adds instead of n_max separate pmf evaluations.
    """
    _check_prob(p)
    gamma = sched.gamma(np.arange(1, n_max + 1))
    if p == 1.0:
        return gamma.copy(), gamma**2
    q = 1.0 - p
    gbar = np.empty(n_max)
    gring2 = np.empty(n_max)
    w = np.zeros(n_max)
    w[0] = p
    gbar[0] = w[0] * gamma[0]
    gring2[0] = w[0] * gamma[0] ** 2
    for n in range(2, n_max + 1):
        head = w[:n].copy()
        head *= q
        head[1:] += p * w[:n - 1]
        w[:n] = head
        gbar[n - 1] = w[:n] @ gamma[:n]
        gring2[n - 1] = w[:n] @ gamma[:n] ** 2
    return gbar, gring2


@dataclass(frozen=True)
class SumIdentityReport:
    """Truncated-sum diagnostics for the sporadic step moments."""

    n_trunc: int
    p: float
    mean_gap: float            # sum gamma - sum bar over n <= N (mass leaked)
    square_gap: float          # same for the squares
    mean_tail_bound: float     # analytic bound on the leak
    square_tail_bound: float
    mean_identity_residual: float    # exact finite-N rearrangement residual
    square_identity_residual: float
    jensen_ok: bool            # bar_n^2 <= ring2_n for every n <= N

    @property
    def ok(self) -> bool:
        return (self.jensen_ok
                and self.mean_gap <= self.mean_tail_bound + 1e-12
                and self.square_gap <= self.square_tail_bound + 1e-12
                and self.mean_identity_residual < 1e-9
                and self.square_identity_residual < 1e-9)


def check_sum_identities(sched: StepSchedule, p: float, n_trunc: int) -> SumIdentityReport:
    """Verify the redistribution identities sum bar = sum gamma (and squares).

    The identities hold for the infinite sums; a truncation at N keeps
    only the fraction P[delivery l reached by round N] of each gamma_l,
    so the partial sums differ by sum_l gamma_l P[Binomial(N, p) < l].
    The report carries that leak, an analytic tail bound for it
    (the gamma-mass above p*N - sqrt(N log N) plus a Hoeffding-small
    remainder), the residual of the exact finite-N rearrangement, and
    the Jensen inequality bar_n^2 <= ring2_n.
    """
    _check_prob(p)
    if n_trunc < 100:
        raise ValueError("n_trunc must be at least 100")
    n = n_trunc
    gamma = sched.gamma(np.arange(1, n + 1))
    gbar, gring2 = sporadic_moment_curves(sched, p, n)

    mean_gap = float(gamma.sum() - gbar.sum())
    square_gap = float((gamma**2).sum() - gring2.sum())

    # Exact finite-N identity: sum_{m<=N} bar_m = sum_l gamma_l P[B(N,p) >= l].
    keep = binom.sf(np.arange(1, n + 1) - 1, n, p)
    mean_identity_residual = abs(float(gbar.sum() - gamma @ keep))
    square_identity_residual = abs(float(gring2.sum() - gamma**2 @ keep))

    cut = int(max(1, np.ceil(p * n - np.sqrt(n * max(np.log(n), 1.0)))))
    slip = np.exp(-2.0 * max(p * n - (cut - 1), 0.0) ** 2 / n)  # Hoeffding
    mean_tail_bound = float(gamma[cut - 1:].sum() + gamma[:cut - 1].sum() * slip)
    square_tail_bound = float((gamma[cut - 1:] ** 2).sum()
                              + (gamma[:cut - 1] ** 2).sum() * slip)

    jensen_ok = bool(np.all(gbar**2 <= gring2 * (1.0 + 1e-12) + 1e-300))
    return SumIdentityReport(
        n_trunc=n, p=p, mean_gap=mean_gap, square_gap=square_gap,
        mean_tail_bound=mean_tail_bound, square_tail_bound=square_tail_bound,
        mean_identity_residual=mean_identity_residual,
        square_identity_residual=square_identity_residual, jensen_ok=jensen_ok,
    )


def rate_ratio_bound(sched: StepSchedule, p: float, n: int, xi: float = 0.5) -> float:
    """Chernoff-based upper bound for the effective-step ratio at round n+1:

        ring2_{n+1} / bar_{n+1}
            <= (exp(-xi^2 p n / 2) gamma_1^2
                + gamma_{floor((1-xi) p n) + 2}^2) / gamma_{floor(p n) + 2}.

    Valid because gamma is convex and decreasing in the index.
    """
    _check_prob(p)
    if not 0.0 < xi < 1.0:
        raise ValueError(f"xi must lie in (0, 1), got {xi}")
    g1 = float(sched.gamma(1))
    num = (np.exp(-0.5 * xi**2 * p * n) * g1**2
           + float(sched.gamma(int((1.0 - xi) * p * n) + 2)) ** 2)
    den = float(sched.gamma(int(p * n) + 2))
    return num / den


def exact_rate_ratio(sched: StepSchedule, p: float, n: int) -> float:
    """ring2_n / bar_n from the exact binomial sums."""
    return sporadic_second_moment(sched, p, n) / sporadic_mean(sched, p, n)


@dataclass(frozen=True)
class RecursionCheck:
    """Outcome of iterating a divergence recursion against its envelope."""

    condition_ok: bool
    message: str
    epsilon: float
    coefficient: float | None          # lambda or mu when the condition holds
    d: np.ndarray = field(repr=False)  # recursion iterated as an equality
    bound: np.ndarray | None = field(repr=False, default=None)
    violations: int | None = None

    @property
    def holds(self) -> bool:
        return bool(self.condition_ok and self.violations == 0)


def bound_recursion_mxli(params: RateBoundParams, sched: StepSchedule,
                         d1: float, n_iters: int) -> RecursionCheck:
    """Iterate D_{n+1} = (1 - p B gamma_n) D_n + p C gamma_n^2 from D_1.

    Requires eps < p B < 1/gamma_1; under it the sequence stays below
    lambda * gamma_n with lambda = max(D_1/gamma_1, p C/(p B - eps)).
    A violated condition is reported, never silently ignored.
    """
    eps = epsilon_sup(sched)
    g1 = float(sched.gamma(1))
    gamma = sched.gamma(np.arange(1, n_iters + 1))
    d = np.empty(n_iters)
    d[0] = d1
    pb = params.p * params.B
    for i in range(n_iters - 1):
        d[i + 1] = (1.0 - pb * gamma[i]) * d[i] + params.p * params.C * gamma[i] ** 2
    if not eps < pb < 1.0 / g1:
        msg = (f"condition violated: need eps < p*B < 1/gamma_1, "
               f"got eps={eps:.6g}, p*B={pb:.6g}, 1/gamma_1={1.0 / g1:.6g}")
        return RecursionCheck(False, msg, eps, None, d)
    lam = max(d1 / g1, params.p * params.C / (pb - eps))
    bound = lam * gamma
    violations = int(np.sum(d > bound * (1.0 + 1e-12)))
    return RecursionCheck(True, "condition holds", eps, lam, d, bound, violations)


def bound_recursion_mxls(params: RateBoundParams, sched: StepSchedule,
                         d1: float, n_iters: int) -> RecursionCheck:
    """Iterate D_{n+1} = (1 - B bar_n) D_n + C ring2_n from D_1.

    The envelope is mu * ring2_n / bar_n with
    mu = max(D_1/gamma_1, C/(B - eps)) and
    eps = max_n (ring2_n/bar_n - ring2_{n+1}/bar_{n+1}) / ring2_n,
    under the condition eps < B < 1/gamma_1.  With p = 1 this reduces
    exactly to :func:`bound_recursion_mxli` at full delivery.
    """
    gbar, gring2 = sporadic_moment_curves(sched, params.p, n_iters + 1)
    ratio = gring2 / gbar
    eps = float(np.max((ratio[:-1] - ratio[1:]) / gring2[:-1]))
    g1 = float(sched.gamma(1))
    d = np.empty(n_iters)
    d[0] = d1
    for i in range(n_iters - 1):
        d[i + 1] = (1.0 - params.B * gbar[i]) * d[i] + params.C * gring2[i]
    if not eps < params.B < 1.0 / g1:
        msg = (f"condition violated: need eps < B < 1/gamma_1, "
               f"got eps={eps:.6g}, B={params.B:.6g}, 1/gamma_1={1.0 / g1:.6g}")
        return RecursionCheck(False, msg, eps, None, d)
    mu = max(d1 / g1, params.C / (params.B - eps))
    bound = mu * ratio[:n_iters]
    violations = int(np.sum(d > bound * (1.0 + 1e-12)))
    return RecursionCheck(True, "condition holds", eps, mu, d, bound, violations)
