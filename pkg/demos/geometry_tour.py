# demos/geometry_tour.py
#
# A walk through the entropic geometry that drives every learning
# variant in this package: the mirror map, the quantum KL divergence,
# the Fenchel coupling, and the one-step descent inequality.
#
# Run:
#   python -m demos.geometry_tour

import numpy as np

from mxlsim.geometry import (conjugate, entropy, fenchel_coupling, mirror_map,
                             quantum_kl, three_point_check)
from mxlsim.hermitian import random_hermitian, trace_norm


def main():
    rng = np.random.default_rng(0)
    dim = 4

    print("=" * 72)
    print("Entropic geometry of {X > 0, tr X < 1}")
    print("=" * 72)

    y = random_hermitian(rng, dim)
    x = mirror_map(y)
    print(f"\nmirror_map(Y) for a random Hermitian Y ({dim}x{dim}):")
    print(f"  eigenvalues: {np.round(np.linalg.eigvalsh(x), 4)}")
    print(f"  trace      : {np.trace(x).real:.6f}  (always < 1)")
    print(f"  h(X)       : {entropy(x):+.6f}")
    print(f"  h*(Y)      : {conjugate(y):+.6f}")

    print("\nFenchel coupling equals the divergence to the mirrored point:")
    for _ in range(3):
        xstar = mirror_map(random_hermitian(rng, dim))
        f = fenchel_coupling(xstar, y)
        d = quantum_kl(xstar, x)
        print(f"  F(X*, Y) = {f:.10f}   d(X*, G(Y)) = {d:.10f}   "
              f"|diff| = {abs(f - d):.1e}")

    print("\nDivergence dominates the squared trace-norm distance (x 1/4):")
    for _ in range(3):
        a = mirror_map(random_hermitian(rng, dim))
        b = mirror_map(random_hermitian(rng, dim))
        d = quantum_kl(a, b)
        q = 0.25 * trace_norm(a - b) ** 2
        print(f"  d = {d:.6f}  >=  {q:.6f}  (quarter squared distance)")

    print("\nOne-step descent inequality on 10000 random triples:")
    ok = 0
    for _ in range(10_000):
        xstar = mirror_map(random_hermitian(rng, dim))
        yy = random_hermitian(rng, dim, scale=2.0)
        u = random_hermitian(rng, dim, scale=0.7)
        ok += three_point_check(xstar, yy, u)
    print(f"  F(X*, Y+U) <= F(X*, Y) + tr((G(Y)-X*)U) + ||U||_inf^2 "
          f"held {ok}/10000 times")

    print("\nDone.")


if __name__ == "__main__":
    main()
