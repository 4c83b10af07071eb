# demos/feedback_comparison.py
#
# Desk-scale rerun of the benchmark network comparison: 9 links,
# 4x8 antennas, 3 subcarriers, gamma_n = 0.2 n^-0.7, unit gradient
# noise, static channel.  The five feedback settings share channel and
# noise randomness, so the curves differ only through the feedback
# mechanism.  The run count is reduced to 30 here; pass --full for the
# benchmark's 100.
#
# Run:
#   python -m demos.feedback_comparison [--full]
#
# Output: figures/feedback_comparison.png (when matplotlib is available)

import sys

import numpy as np

from mxlsim import harness


def main():
    runs = 100 if "--full" in sys.argv[1:] else 30
    cfg = harness.default_config(runs=runs, iters=1000)
    print(f"estimating the equilibrium reference "
          f"(static channel, seed {cfg.seed}) ...")
    ne = harness.estimate_ne(cfg)
    print(f"  stationarity: tail change {ne.tail_change:.2e} "
          f"(converged={ne.converged})")

    print(f"running the five feedback settings, {runs} runs x "
          f"{cfg.iters} rounds each ...")
    rep = harness.compare_strategies(cfg, ne=ne)

    print(f"\n{'setting':16s} {'AUC':>10s} {'D_1000/D_1':>12s}")
    for label in rep.labels:
        curve = rep.mean_div[label]
        print(f"{label:16s} {rep.auc[label]:10.1f} {curve[-1]/curve[0]:12.4f}")
    print("\nwithin-family sensitivity gap (p = 0.5 vs p = 0.2):")
    for fam, gap in rep.sensitivity_gap.items():
        print(f"  {fam:12s} {gap:.4f}")
    print("\nsporadic delivery tracks the full-feedback curve far more "
          "closely than entrywise masking at the same delivery rate, and "
          "is much less sensitive to the delivery probability.")

    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping the figure")
        return

    import os
    os.makedirs("figures", exist_ok=True)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    n = np.arange(1, cfg.iters + 1)
    for label in rep.labels:
        ax.semilogy(n, rep.mean_div[label], label=label)
    ax.set_xlabel("round")
    ax.set_ylabel("mean divergence to the equilibrium")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig("figures/feedback_comparison.png", dpi=150)
    print("saved: figures/feedback_comparison.png")


if __name__ == "__main__":
    main()
