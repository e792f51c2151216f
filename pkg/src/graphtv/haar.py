"""Discrete Haar transforms (1D and bivariate) and soft thresholding.

The bivariate basis is the multiresolution family: one constant vector
plus, for each level j and shift (k1, k2), the three oriented wavelets
obtained by tensoring the 1D box/mother pair at the *same* scale.
Sampled on a dyadic N x N grid (N = 2^m) these vectors are exactly
orthogonal once renormalized to unit Euclidean length, and the fast
pyramid below computes the coefficients in O(N^2) operations.

Canonical coefficient order: slot 0 is the constant; level j occupies
slots [4^j, 4^(j+1)), split into the three orientations in the order
(0,1), (1,0), (1,1) (wavelet along the second / first / both axes),
each block flattened row-major in (k1, k2).
"""
from __future__ import annotations

import numpy as np

_SQRT2 = np.sqrt(2.0)


def _check_power_of_two(N: int) -> int:
    if N < 1 or (N & (N - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {N}")
    return int(N.bit_length() - 1)


def haar_transform_1d(x: np.ndarray) -> np.ndarray:
    """Orthonormal 1D Haar analysis.

    Slot 0 holds the scaling coefficient ``<x, 1/sqrt(N)>``; level j
    (coarsest j = 0) occupies slots [2^j, 2^(j+1)).
    """
    x = np.asarray(x, dtype=float)
    N = x.shape[0]
    levels = _check_power_of_two(N)
    out = np.empty(N)
    approx = x
    for j in range(levels - 1, -1, -1):
        detail = (approx[0::2] - approx[1::2]) / _SQRT2
        approx = (approx[0::2] + approx[1::2]) / _SQRT2
        out[2**j : 2 ** (j + 1)] = detail
    out[0] = approx[0] if N > 1 else x[0]
    return out


def inverse_1d(c: np.ndarray) -> np.ndarray:
    """Inverse of :func:`haar_transform_1d`."""
    c = np.asarray(c, dtype=float)
    N = c.shape[0]
    levels = _check_power_of_two(N)
    approx = c[:1].copy()
    for j in range(levels):
        detail = c[2**j : 2 ** (j + 1)]
        up = np.empty(2 ** (j + 1))
        up[0::2] = (approx + detail) / _SQRT2
        up[1::2] = (approx - detail) / _SQRT2
        approx = up
    return approx


def haar_transform_2d(x: np.ndarray) -> np.ndarray:
    """Bivariate Haar analysis of an N x N signal (N a power of two).

    Returns the length-N^2 coefficient vector in the canonical order; the
    first coefficient equals ``N * mean(x)``.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("expected a square 2D array")
    N = x.shape[0]
    levels = _check_power_of_two(N)
    out = np.empty(N * N)
    approx = x
    for j in range(levels - 1, -1, -1):
        b00 = approx[0::2, 0::2]
        b10 = approx[1::2, 0::2]
        b01 = approx[0::2, 1::2]
        b11 = approx[1::2, 1::2]
        approx = (b00 + b10 + b01 + b11) / 2.0
        d01 = (b00 + b10 - b01 - b11) / 2.0  # wavelet along axis 1
        d10 = (b00 - b10 + b01 - b11) / 2.0  # wavelet along axis 0
        d11 = (b00 - b10 - b01 + b11) / 2.0
        base = 4**j
        out[base : 2 * base] = d01.reshape(-1)
        out[2 * base : 3 * base] = d10.reshape(-1)
        out[3 * base : 4 * base] = d11.reshape(-1)
    out[0] = approx[0, 0]
    return out


def inverse_2d(c: np.ndarray) -> np.ndarray:
    """Inverse of :func:`haar_transform_2d`; returns the N x N signal."""
    c = np.asarray(c, dtype=float)
    total = c.shape[0]
    N = int(round(np.sqrt(total)))
    if N * N != total:
        raise ValueError("coefficient vector length must be a perfect square")
    levels = _check_power_of_two(N)
    approx = c[:1].reshape(1, 1).copy()
    for j in range(levels):
        side = 2**j
        base = 4**j
        d01 = c[base : 2 * base].reshape(side, side)
        d10 = c[2 * base : 3 * base].reshape(side, side)
        d11 = c[3 * base : 4 * base].reshape(side, side)
        up = np.empty((2 * side, 2 * side))
        up[0::2, 0::2] = (approx + d01 + d10 + d11) / 2.0
        up[1::2, 0::2] = (approx + d01 - d10 - d11) / 2.0
        up[0::2, 1::2] = (approx - d01 + d10 - d11) / 2.0
        up[1::2, 1::2] = (approx - d01 - d10 + d11) / 2.0
        approx = up
    return approx


def haar_basis_2d(N: int) -> np.ndarray:
    """Explicit orthonormal basis matrix O (N^2 x N^2).

    Columns follow the canonical coefficient order and rows the row-major
    flattening of the image, so ``haar_transform_2d(x) == O.T @ x.ravel()``.
    Each sampled basis vector is divided by its Euclidean norm, which
    makes O exactly orthogonal.  Intended for moderate N (testing and
    inspection); the pyramid transforms are the fast path.
    """
    levels = _check_power_of_two(N)
    n2 = N * N
    O = np.empty((n2, n2))
    O[:, 0] = 1.0 / N
    i1 = np.arange(N)[:, None]
    i2 = np.arange(N)[None, :]
    for j in range(levels):
        side = 2**j
        base = 4**j
        for e_idx, (e1, e2) in enumerate(((0, 1), (1, 0), (1, 1))):
            for k1 in range(side):
                for k2 in range(side):
                    u = _sampled_1d_factor(e1, j, k1, i1, N)
                    v = _sampled_1d_factor(e2, j, k2, i2, N)
                    vec = (u * v).reshape(-1)
                    col = base * (1 + e_idx) + k1 * side + k2
                    O[:, col] = vec / np.linalg.norm(vec)
    return O


def _sampled_1d_factor(e: int, j: int, k: int, i, N: int) -> np.ndarray:
    """H^e(2^j t - k) sampled at t = i/N (box e=0, mother wavelet e=1)."""
    t = 2**j * (i / N) - k
    inside = (t >= 0) & (t < 1)
    if e == 0:
        return np.where(inside, 1.0, 0.0)
    return np.where(inside & (t < 0.5), 1.0, 0.0) - np.where(inside & (t >= 0.5), 1.0, 0.0)


def soft_threshold(y: np.ndarray, tau: float) -> np.ndarray:
    """Componentwise shrinkage toward zero: sgn(y) * max(|y| - tau, 0)."""
    y = np.asarray(y, dtype=float)
    return np.sign(y) * np.maximum(np.abs(y) - tau, 0.0)


def haar_denoise_2d(y: np.ndarray, sigma: float) -> np.ndarray:
    """Soft thresholding in the bivariate Haar basis.

    Thresholds every coefficient (the mean slot included) at the
    universal level ``sigma * sqrt(2 log n)`` with n = N^2.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 2 or y.shape[0] != y.shape[1]:
        raise ValueError("expected a square 2D array")
    n = y.size
    tau = sigma * np.sqrt(2.0 * np.log(n)) if sigma > 0 else 0.0
    return inverse_2d(soft_threshold(haar_transform_2d(y), tau))
