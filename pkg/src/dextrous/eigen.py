"""Closed-form eigenvalues of real symmetric 3x3 matrices (trigonometric method)."""

from __future__ import annotations

import numpy as np


def symmetric_eigvals(S: np.ndarray) -> np.ndarray:
    """Eigenvalues of symmetric ``S`` (shape ``(..., 3, 3)``), sorted ascending.

    Uses the shifted, scaled matrix ``(S - q I) / p`` whose determinant gives the
    cosine of three times the eigen-angle.  Diagonal inputs are returned directly.
    """
    S = np.asarray(S, dtype=float)
    batch = S.shape[:-2]
    S = S.reshape(-1, 3, 3)

    off = S[:, 0, 1] ** 2 + S[:, 0, 2] ** 2 + S[:, 1, 2] ** 2
    diag = np.stack([S[:, 0, 0], S[:, 1, 1], S[:, 2, 2]], axis=-1)
    q = diag.sum(axis=-1) / 3.0
    p2 = ((diag - q[:, None]) ** 2).sum(axis=-1) + 2.0 * off
    p = np.sqrt(p2 / 6.0)

    safe_p = np.where(p > 0.0, p, 1.0)
    Bm = (S - q[:, None, None] * np.eye(3)) / safe_p[:, None, None]
    r = np.clip(np.linalg.det(Bm) / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0

    top = q + 2.0 * p * np.cos(phi)
    bottom = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    middle = 3.0 * q - top - bottom
    out = np.stack([bottom, middle, top], axis=-1)

    is_diag = off == 0.0
    if np.any(is_diag):
        out[is_diag] = np.sort(diag[is_diag], axis=-1)
    out = np.sort(out, axis=-1)
    return out.reshape(batch + (3,))
