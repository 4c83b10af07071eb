"""Dense complex Hermitian linear algebra on plain ndarrays.

Matrix functions are computed through the Hermitian eigendecomposition,
which is exact for Hermitian inputs and exposes the eigenvalues needed
by the norms.  All routines accept stacked operands of shape
``(..., M, M)`` and act on the trailing two axes.  Block-diagonal
operands are kept as stacks of blocks ``(..., S, n, n)``; materializing
the full ``(S*n, S*n)`` matrix is an explicit conversion so that
per-block work stays at ``S * O(n^3)``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "HERMITIAN_ATOL",
    "dagger",
    "hermitize",
    "hermitian_defect",
    "is_hermitian",
    "require_hermitian",
    "expm",
    "logm",
    "trace_norm",
    "spectral_norm",
    "hadamard",
    "blocks_to_full",
    "full_to_blocks",
    "block_trace",
    "random_hermitian",
]

# Tolerance below which an input counts as Hermitian.
HERMITIAN_ATOL = 1e-12


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose of the trailing two axes."""
    return np.conj(np.swapaxes(np.asarray(a), -1, -2))


def hermitize(a: np.ndarray) -> np.ndarray:
    """Hermitian part (A + A†)/2.

    Fixed point on Hermitian input; projects the skew-Hermitian part of
    anything else (e.g. a gradient estimate corrupted by additive noise).
    """
    a = np.asarray(a)
    if a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square trailing axes, got shape {a.shape}")
    return 0.5 * (a + dagger(a))


def hermitian_defect(a: np.ndarray) -> float:
    """Largest entrywise distance to the Hermitian part, max |A - A†|/2."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return 0.5 * float(np.max(np.abs(a - dagger(a))))


def is_hermitian(a: np.ndarray, atol: float = HERMITIAN_ATOL) -> bool:
    return hermitian_defect(a) <= atol


def require_hermitian(a: np.ndarray, atol: float = 1e-8, name: str = "input") -> np.ndarray:
    """Return the symmetrized copy of `a`, rejecting gross violations.

    Small defects (below `atol`, e.g. float roundoff) are silently
    projected away; anything larger is an invalid input.
    """
    a = np.asarray(a)
    defect = hermitian_defect(a)
    if defect > atol:
        raise ValueError(f"{name} is not Hermitian (defect {defect:.3e} > {atol:.1e})")
    return hermitize(a)


def _eig_apply(w: np.ndarray, v: np.ndarray, fw: np.ndarray) -> np.ndarray:
    """Reassemble U diag(f(w)) U† from an eigendecomposition."""
    return hermitize((v * fw[..., None, :]) @ dagger(v))


def expm(h: np.ndarray) -> np.ndarray:
    """Matrix exponential of a Hermitian matrix, U diag(e^w) U†.

    The result is Hermitian positive definite.
    """
    h = require_hermitian(h, name="expm input")
    w, v = np.linalg.eigh(h)
    return _eig_apply(w, v, np.exp(w))


def logm(p: np.ndarray, floor: float = 1e-14) -> np.ndarray:
    """Matrix logarithm of a positive definite Hermitian matrix.

    Inverse of :func:`expm` on spectra that stay clear of zero; an
    eigenvalue at or below `floor` means the input is singular for our
    purposes and is rejected.
    """
    p = require_hermitian(p, name="logm input")
    w, v = np.linalg.eigh(p)
    if np.any(w <= floor):
        raise ValueError(
            f"logm requires eigenvalues > {floor:.1e}, got min {float(np.min(w)):.3e}"
        )
    return _eig_apply(w, v, np.log(w))


def _abs_eigvals(h: np.ndarray) -> np.ndarray:
    h = require_hermitian(h, name="norm input")
    return np.abs(np.linalg.eigvalsh(h))


def trace_norm(h: np.ndarray):
    """Sum of absolute eigenvalues; equals trace(H) for PSD H."""
    res = np.sum(_abs_eigvals(h), axis=-1)
    return float(res) if res.ndim == 0 else res


def spectral_norm(h: np.ndarray):
    """Largest absolute eigenvalue."""
    res = np.max(_abs_eigvals(h), axis=-1)
    return float(res) if res.ndim == 0 else res


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Entrywise product.

    A real symmetric mask times a Hermitian matrix is again Hermitian,
    which is what keeps entrywise-masked gradient updates feasible.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return a * b


def blocks_to_full(blocks: np.ndarray) -> np.ndarray:
    """Materialize a stack of diagonal blocks (..., S, n, n) as (..., S*n, S*n)."""
    b = np.asarray(blocks)
    if b.ndim < 3:
        raise ValueError("expected at least (S, n, n)")
    s, n = b.shape[-3], b.shape[-1]
    out = np.zeros(b.shape[:-3] + (s * n, s * n), dtype=b.dtype)
    for i in range(s):
        out[..., i * n:(i + 1) * n, i * n:(i + 1) * n] = b[..., i, :, :]
    return out


def full_to_blocks(full: np.ndarray, n_blocks: int) -> np.ndarray:
    """Extract the diagonal blocks of (..., S*n, S*n) as (..., S, n, n)."""
    f = np.asarray(full)
    m = f.shape[-1]
    if m % n_blocks:
        raise ValueError(f"dimension {m} not divisible into {n_blocks} blocks")
    n = m // n_blocks
    out = np.empty(f.shape[:-2] + (n_blocks, n, n), dtype=f.dtype)
    for i in range(n_blocks):
        out[..., i, :, :] = f[..., i * n:(i + 1) * n, i * n:(i + 1) * n]
    return out


def block_trace(blocks: np.ndarray):
    """Trace of the block-diagonal matrix: sum of per-block traces."""
    res = np.einsum("...sii->...", np.asarray(blocks))
    return complex(res).real if res.ndim == 0 else res.real


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0,
                     shape: tuple = ()) -> np.ndarray:
    """Random Hermitian matrices with i.i.d. Gaussian entries, for tests and probes."""
    full = shape + (dim, dim)
    z = rng.standard_normal(full) + 1j * rng.standard_normal(full)
    return hermitize(scale * z)
