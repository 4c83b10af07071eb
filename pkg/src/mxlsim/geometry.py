"""Entropic geometry of the spectrahedron {X ≻ 0, tr X < 1}.

The generating entropy is a modified von Neumann entropy

    h(X) = tr(X log X) + (1 - tr X) log(1 - tr X),

whose convex conjugate over the spectrahedron has the closed form
h*(Y) = log(1 + tr exp(Y)) and whose gradient map

    G(Y) = exp(Y) / (1 + tr exp(Y))

sends any Hermitian Y to a strictly feasible point.  The Bregman
divergence of h is a generalized quantum Kullback-Leibler divergence,
and the Fenchel coupling F(X*, Y) = h(X*) + h*(Y) - tr(Y X*) equals
that divergence evaluated at the mirrored point G(Y).

All exponentials are evaluated in spectral-shift form (subtract the
positive part of the top eigenvalue, fold it back algebraically), so
the maps stay finite for any finite Hermitian argument.

Everything here is for the normalized trace bound A = 1; a general
bound is handled upstream by rescaling X/A.
"""

from __future__ import annotations

import numpy as np

from .hermitian import dagger, hermitize, require_hermitian

__all__ = [
    "entropy",
    "conjugate",
    "mirror_map",
    "mirror_weights",
    "quantum_kl",
    "fenchel_coupling",
    "three_point_check",
]

_EIG_FLOOR = 1e-14


def _feasible_eigvals(x: np.ndarray, name: str) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and trace of a strictly feasible point, or a domain error."""
    x = require_hermitian(x, name=name)
    w = np.linalg.eigvalsh(x)
    t = np.sum(w, axis=-1)
    if np.any(w <= _EIG_FLOOR):
        raise ValueError(f"{name} must be positive definite (min eig "
                         f"{float(np.min(w)):.3e})")
    if np.any(t >= 1.0):
        raise ValueError(f"{name} must have trace < 1 (got {float(np.max(t)):.6f})")
    return w, t


def entropy(x: np.ndarray):
    """h(X) = tr(X log X) + (1 - tr X) log(1 - tr X) for feasible X."""
    w, t = _feasible_eigvals(x, "entropy argument")
    res = np.sum(w * np.log(w), axis=-1) + (1.0 - t) * np.log(1.0 - t)
    return float(res) if np.ndim(res) == 0 else res


def conjugate(y: np.ndarray):
    """h*(Y) = log(1 + tr exp(Y)), evaluated shift-stably for any finite Y."""
    y = require_hermitian(y, name="conjugate argument")
    w = np.linalg.eigvalsh(y)
    m = np.maximum(np.max(w, axis=-1), 0.0)
    res = m + np.log(np.exp(-m) + np.sum(np.exp(w - m[..., None]), axis=-1))
    return float(res) if np.ndim(res) == 0 else res


def mirror_weights(eigvals: np.ndarray, axes) -> tuple[np.ndarray, np.ndarray]:
    """Normalized weights e^w / (1 + sum e^w) plus the log-partition.

    `axes` selects which trailing axes of `eigvals` form one action (its
    blocks and eigenvalue index); anything before is batch.  Returns
    ``(weights, log(1 + sum e^w))`` with the sum taken over `axes`.
    """
    m = np.maximum(np.max(eigvals, axis=axes, keepdims=True), 0.0)
    e = np.exp(eigvals - m)
    denom = np.exp(-m) + np.sum(e, axis=axes, keepdims=True)
    hstar = m + np.log(denom)
    return e / denom, np.squeeze(hstar, axis=axes)


def strict_trace_clamp(x: np.ndarray, trace: np.ndarray, bound: float = 1.0):
    """Rescale actions whose floating-point trace reached the bound.

    For spectra beyond ~37 the true margin bound - tr G(Y) drops below
    the resolution of float64, so the assembled matrix can round onto
    the boundary; scaling by (1 - 4 eps) keeps the strict-feasibility
    contract at an error no larger than the eigendecomposition's own
    roundoff.  Returns x untouched when every trace is already interior.
    """
    over = trace >= bound
    if not np.any(over):
        return x
    scale = np.where(over, bound * (1.0 - 4.0 * np.finfo(float).eps) / trace, 1.0)
    scale = np.asarray(scale).reshape(np.shape(scale) + (1,) * (x.ndim - np.ndim(scale)))
    return x * scale


def mirror_map(y: np.ndarray) -> np.ndarray:
    """G(Y) = exp(Y)/(1 + tr exp(Y)): strictly feasible for any Hermitian Y."""
    y = require_hermitian(y, name="mirror_map argument")
    w, v = np.linalg.eigh(y)
    weights, _ = mirror_weights(w, axes=(-1,))
    x = hermitize((v * weights[..., None, :]) @ dagger(v))
    return strict_trace_clamp(x, np.einsum("...ii->...", x).real)


def quantum_kl(xstar: np.ndarray, x: np.ndarray):
    """Generalized quantum KL divergence of feasible points.

    d(X*, X) = tr(X*(log X* - log X))
               + (1 - tr X*) log((1 - tr X*)/(1 - tr X)).

    Nonnegative, zero iff the arguments coincide; it is the Bregman
    divergence of :func:`entropy`.
    """
    wstar, tstar = _feasible_eigvals(xstar, "quantum_kl reference")
    x = require_hermitian(x, name="quantum_kl argument")
    wx, vx = np.linalg.eigh(x)
    tx = np.sum(wx, axis=-1)
    if np.any(wx <= _EIG_FLOOR):
        raise ValueError("quantum_kl argument must be positive definite")
    if np.any(tx >= 1.0):
        raise ValueError("quantum_kl argument must have trace < 1")
    log_x = hermitize((vx * np.log(wx)[..., None, :]) @ dagger(vx))
    cross = np.einsum("...ab,...ba->...", xstar, log_x).real
    res = (np.sum(wstar * np.log(wstar), axis=-1) - cross
           + (1.0 - tstar) * (np.log(1.0 - tstar) - np.log(1.0 - tx)))
    return float(res) if np.ndim(res) == 0 else res


def fenchel_coupling(xstar: np.ndarray, y: np.ndarray):
    """F(X*, Y) = h(X*) + h*(Y) - tr(Y X*).

    Nonnegative (Fenchel-Young), and equal to quantum_kl(X*, G(Y)).
    """
    pairing = np.einsum("...ab,...ba->...", np.asarray(y), np.asarray(xstar)).real
    res = entropy(xstar) + conjugate(y) - pairing
    return float(res) if np.ndim(res) == 0 else res


def three_point_check(xstar: np.ndarray, y: np.ndarray, u: np.ndarray,
                      slack: float = 1e-9) -> bool:
    """Check the dual-step descent inequality

        F(X*, Y+U) <= F(X*, Y) + tr((G(Y) - X*) U) + ||U||_inf^2

    within `slack`.  It follows from the strong smoothness of h* and is
    the one-step engine behind every convergence bound in this package.
    """
    u = require_hermitian(u, name="three_point_check step")
    lhs = fenchel_coupling(xstar, np.asarray(y) + u)
    linear = np.einsum("...ab,...ba->...", mirror_map(y) - np.asarray(xstar), u).real
    sq = np.max(np.abs(np.linalg.eigvalsh(u)), axis=-1) ** 2
    rhs = fenchel_coupling(xstar, y) + linear + sq
    return bool(np.all(lhs <= rhs + slack))
