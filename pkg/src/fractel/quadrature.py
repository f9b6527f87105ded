"""Vectorised adaptive Gauss-Legendre quadrature over many intervals at once."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import QuadratureFailure


@lru_cache(maxsize=16)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``n``-point rule mapped to [0, 1]."""
    x, w = leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _panel_sums(func, idx, a, b, order):
    u, w = gauss_legendre(order)
    h = (b - a)[:, None]
    t = a[:, None] + h * u
    vals = func(t.ravel(), np.repeat(idx, order)).reshape(t.shape)
    return (h * w * vals).sum(axis=1)


def integrate_batch(func, lo, hi, *, rel_tol, abs_tol, max_panels, order=10, initial=4):
    """Integrate ``func`` over ``[lo[i], hi[i]]`` for every ``i`` simultaneously.

    ``func(t, idx)`` receives flat arrays of abscissae and the batch index
    each abscissa belongs to, and returns integrand values.  Panels are
    bisected until the two-half estimate agrees with the whole-panel one to
    a share of ``max(abs_tol, rel_tol*|I|)`` proportional to panel length.
    ``abs_tol`` may be a scalar or one value per interval.

    Returns ``(values, error_estimates)``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    nb = lo.size
    if nb == 0:
        return np.zeros(0), np.zeros(0)
    abs_tol = np.broadcast_to(np.asarray(abs_tol, dtype=float), (nb,))
    length = hi - lo
    edges = lo[:, None] + length[:, None] * np.linspace(0.0, 1.0, initial + 1)
    idx = np.repeat(np.arange(nb), initial)
    a = edges[:, :-1].ravel()
    b = edges[:, 1:].ravel()
    coarse = _panel_sums(func, idx, a, b, order)
    total = np.bincount(idx, coarse, minlength=nb)
    value = np.zeros(nb)
    err = np.zeros(nb)
    panels = np.full(nb, initial)
    while idx.size:
        mid = 0.5 * (a + b)
        left = _panel_sums(func, idx, a, mid, order)
        right = _panel_sums(func, idx, mid, b, order)
        fine = left + right
        e = np.abs(fine - coarse)
        total = total + np.bincount(idx, fine - coarse, minlength=nb)
        share = np.where(length[idx] > 0, (b - a) / np.where(length[idx] > 0, length[idx], 1.0), 1.0)
        tol = np.maximum(abs_tol[idx], rel_tol * np.abs(total[idx])) * share
        done = (e <= tol) | (b - a <= 1e-13 * np.maximum(1.0, np.abs(a)))
        np.add.at(value, idx[done], fine[done])
        np.add.at(err, idx[done], e[done])
        keep = ~done
        if not keep.any():
            break
        idx_k = idx[keep]
        panels += np.bincount(idx_k, minlength=nb)
        if np.any(panels > max_panels):
            worst = int(np.argmax(panels))
            raise QuadratureFailure(
                f"adaptive quadrature exceeded {max_panels} panels on [{lo[worst]:.6g}, {hi[worst]:.6g}]"
            )
        a = np.concatenate([a[keep], mid[keep]])
        b = np.concatenate([mid[keep], b[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
        idx = np.concatenate([idx_k, idx_k])
    return value, err


def fixed_rule(a: float, b: float, n: int, panels: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Composite ``n``-point Gauss-Legendre nodes and weights on ``[a, b]``."""
    u, w = gauss_legendre(n)
    edges = np.linspace(a, b, panels + 1)
    h = np.diff(edges)[:, None]
    return (edges[:-1, None] + h * u).ravel(), (h * w).ravel()


def graded_rule(a: float, b: float, n: int, levels: int, ratio: float = 0.15) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on ``[a, b]`` with panels shrinking geometrically toward ``b``.

    Suited to integrands with an integrable power singularity at ``b``.
    """
    length = b - a
    cuts = [b - length * ratio**k for k in range(levels)] + [b]
    edges = np.array([a] + cuts[1:])
    edges = np.unique(edges)
    u, w = gauss_legendre(n)
    h = np.diff(edges)[:, None]
    return (edges[:-1, None] + h * u).ravel(), (h * w).ravel()
