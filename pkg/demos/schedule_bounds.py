# demos/schedule_bounds.py
#
# Every closed-form schedule quantity in one place: the step-ratio
# supremum and its analytic envelope, the effective-step moments of a
# sporadic learner, the truncated-sum identities, the Chernoff ratio
# bound, and the two divergence recursions against their envelopes.
#
# Run:
#   python -m demos.schedule_bounds
#
# Output: figures/schedule_bounds.png (when matplotlib is available)

import numpy as np

from mxlsim.schedule import (RateBoundParams, StepSchedule, bound_recursion_mxli,
                             bound_recursion_mxls, check_sum_identities,
                             epsilon_bar, epsilon_sup, exact_rate_ratio,
                             rate_ratio_bound, sporadic_moment_curves)


def main():
    sched = StepSchedule(alpha=0.2, nu=0.7)
    print("=" * 72)
    print(f"Schedule gamma_n = {sched.alpha} * n^-{sched.nu}")
    print("=" * 72)

    eps = epsilon_sup(sched)
    env = epsilon_bar(sched.nu) / sched.alpha
    print(f"\nstep-ratio sup (gamma_n - gamma_n+1)/gamma_n^2 = {eps:.6f}")
    print(f"closed-form envelope epsilon_bar(nu)/alpha      = {env:.6f}")

    p = 0.5
    gbar, gring2 = sporadic_moment_curves(sched, p, 2000)
    print(f"\nsporadic effective steps at p = {p}:")
    for n in (1, 10, 100, 1000):
        print(f"  n={n:5d}  mean {gbar[n-1]:.6f}  rms^2 {gring2[n-1]:.8f}  "
              f"ratio {gring2[n-1]/gbar[n-1]:.6f}  (gamma_n {float(sched.gamma(n)):.6f})")

    rep = check_sum_identities(sched, p, 2000)
    print(f"\ntruncated-sum identities at N = 2000:")
    print(f"  sum gamma - sum mean = {rep.mean_gap:.4f} "
          f"(analytic tail bound {rep.mean_tail_bound:.4f})")
    print(f"  squares              = {rep.square_gap:.6f} "
          f"(bound {rep.square_tail_bound:.6f})")
    print(f"  exact rearrangement residuals: {rep.mean_identity_residual:.1e}, "
          f"{rep.square_identity_residual:.1e}")

    print("\nChernoff bound on the effective-step ratio (xi = 0.5):")
    for n in (20, 100, 400):
        exact = exact_rate_ratio(sched, p, n + 1)
        bound = rate_ratio_bound(sched, p, n)
        print(f"  n={n:4d}  exact {exact:.6f}  <=  bound {bound:.6f}")

    print("\ndivergence recursions with B = 4, C = 1, D1 = 1:")
    rec_i = bound_recursion_mxli(RateBoundParams(B=4.0, C=1.0, p=1.0), sched,
                                 1.0, 10_000)
    print(f"  masked/full : condition {rec_i.condition_ok}, coefficient "
          f"{rec_i.coefficient:.3f}, violations {rec_i.violations}")
    rec_s = bound_recursion_mxls(RateBoundParams(B=4.0, C=1.0, p=0.5), sched,
                                 1.0, 5_000)
    print(f"  sporadic    : condition {rec_s.condition_ok}, coefficient "
          f"{rec_s.coefficient:.3f}, violations {rec_s.violations}")
    bad = bound_recursion_mxli(RateBoundParams(B=20.0, C=1.0, p=1.0), sched,
                               1.0, 100)
    print(f"  B too large : {bad.message}")

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("\nmatplotlib not installed; skipping the figure")
        return

    import os
    os.makedirs("figures", exist_ok=True)
    n2k = np.arange(1, 2001)
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    axes[0].loglog(n2k, sched.gamma(n2k), label=r"$\gamma_n$")
    axes[0].loglog(n2k, gbar, label=r"mean effective step ($p=0.5$)")
    axes[0].loglog(n2k, gring2 / gbar, label=r"ratio $\mathring\gamma^2/\bar\gamma$")
    axes[0].set_xlabel("n")
    axes[0].legend()
    axes[0].set_title("effective steps of a sporadic learner")
    n10k = np.arange(1, rec_i.d.size + 1)
    n5k = np.arange(1, rec_s.d.size + 1)
    axes[1].loglog(n10k, rec_i.d, label="masked recursion")
    axes[1].loglog(n10k, rec_i.bound, "--", label="envelope $\\lambda\\gamma_n$")
    axes[1].loglog(n5k, rec_s.d, label="sporadic recursion")
    axes[1].loglog(n5k, rec_s.bound, "--",
                   label=r"envelope $\mu\mathring\gamma^2/\bar\gamma$")
    axes[1].set_xlabel("n")
    axes[1].legend()
    axes[1].set_title("divergence recursions vs envelopes")
    fig.tight_layout()
    fig.savefig("figures/schedule_bounds.png", dpi=150)
    print("\nsaved: figures/schedule_bounds.png")


if __name__ == "__main__":
    main()
