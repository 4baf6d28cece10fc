"""Generalized soft thresholding and the tensor Schatten p-norm proximal map."""

from dataclasses import dataclass

import numpy as np

from .tensor3 import (
    as_tensor3,
    inverse_permutation,
    map_slices,
    mode3_dft,
    rotate_mode,
    slice_singular_values,
    to_real,
)

# n x K x V  <->  n x V x K: cluster mode goes third so each frequency slice
# mixes the lateral (sample x view) slabs of the clusters
ROTATION = (0, 2, 1)


@dataclass(frozen=True)
class ProxParams:
    tau: float
    p: float
    rotate: bool = True
    gst_tol: float = 1e-10
    gst_max_iter: int = 100
    symmetric: bool = False

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        if not self.tau >= 0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}")
        if self.gst_max_iter < 1:
            raise ValueError("gst_max_iter must be >= 1")


def gst_threshold(tau, p):
    """Value below which generalized soft thresholding returns exactly zero."""
    if p == 1:
        return tau
    nu = (2.0 * tau * (1.0 - p)) ** (1.0 / (2.0 - p))
    return nu + tau * p * nu ** (p - 1.0)


def gst(sigma, tau, p, tol=1e-10, max_iter=100):
    """Elementwise ``argmin_{d >= 0} 0.5 (d - sigma)^2 + tau d^p``.

    ``sigma`` may be a scalar or an array of nonnegative values. For ``p == 1``
    this is the ordinary soft threshold. Otherwise values at or below the GST
    threshold go to zero and the rest run the fixed point
    ``d <- sigma - tau p d^(p-1)`` from ``d = sigma``.
    """
    s = np.asarray(sigma, dtype=np.float64)
    if np.any(s < 0):
        raise ValueError("gst expects nonnegative inputs")
    if tau == 0:
        out = s.copy()
    elif p == 1:
        out = np.maximum(s - tau, 0.0)
    else:
        out = np.zeros_like(s)
        active = s > gst_threshold(tau, p)
        target = s[active]
        d = target.copy()
        running = np.arange(d.size)
        for _ in range(max_iter):
            if running.size == 0:
                break
            d_next = target[running] - tau * p * d[running] ** (p - 1.0)
            moved = np.abs(d_next - d[running]) >= tol
            d[running] = d_next
            # each entry stops on its own, so arrays agree with scalar calls
            running = running[moved]
        out[active] = d
    return out if out.ndim else float(out)


def gst_scalar(sigma, tau, p, tol=1e-10, max_iter=100):
    return float(gst(float(sigma), tau, p, tol, max_iter))


def _shrink_slice(params):
    def shrink(M):
        u, s, vh = np.linalg.svd(M, full_matrices=False)
        d = gst(s, params.tau, params.p, params.gst_tol, params.gst_max_iter)
        return (u * d) @ vh

    return shrink


def prox_schatten_p(Z, params):
    """Proximal map of ``tau * ||.||_Sp^p`` with slice-wise GST on singular values.

    With ``params.rotate`` the prox acts on the ``n x V x K`` rotation of an
    ``n x K x V`` input and the result is rotated back.
    """
    Z = as_tensor3(Z)
    if np.iscomplexobj(Z):
        raise ValueError("prox_schatten_p expects a real tensor")
    if params.tau == 0:
        return Z.copy()
    X = rotate_mode(Z, ROTATION) if params.rotate else Z
    Xbar = map_slices(_shrink_slice(params), mode3_dft(X), symmetric=params.symmetric)
    X = to_real(mode3_dft(Xbar, inverse=True), "schatten prox")
    if params.rotate:
        X = rotate_mode(X, inverse_permutation(ROTATION))
    return np.ascontiguousarray(X)


def schatten_p_norm(T, p, rotate=False):
    """``(sum over frequency slices and singular values of sigma^p)^(1/p)``."""
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    T = as_tensor3(T)
    if rotate:
        T = rotate_mode(T, ROTATION)
    s = slice_singular_values(T)
    return float(np.sum(s**p) ** (1.0 / p))
