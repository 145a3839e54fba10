"""Independent per-pair assembly mirrors used as oracles.

These re-derive the dense weights one pair at a time with plain Python
loops and scalar accumulation, sharing only the kernel density and
coefficient evaluators with the library.  Agreement is asserted bitwise.
"""

import numpy as np

from nlhomog import LocallyPeriodicCoefficient, PeriodicCoefficient


def naive_assemble_1d(kernel, coeff, eps, grid, s=4, band_width=4.0):
    pts = grid.centers()
    n = grid.size
    h = grid.h
    inv_eps = 1.0 / eps
    scale = eps ** (-(1 + kernel.alpha))
    offs = -0.5 * h + (np.arange(s) + 0.5) * (h / s)
    xi = pts / eps
    if isinstance(coeff, PeriodicCoefficient) and coeff.is_constant:
        def lam_at(i, j):
            return float(coeff.value)
    elif isinstance(coeff, LocallyPeriodicCoefficient):
        def lam_at(i, j):
            return float(coeff.evaluate(
                np.array([pts[i]]), np.array([pts[j]]),
                np.array([xi[i]]), np.array([xi[j]]))[0])
    else:
        def lam_at(i, j):
            return float(coeff.evaluate(np.array([xi[i]]), np.array([xi[j]]))[0])
    W = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            diff = pts[i] - pts[j]
            if s > 1 and abs(diff) <= band_width * eps:
                acc = 0.0
                for a in range(s):
                    for b in range(s):
                        delta = offs[a] - offs[b]
                        acc += float(kernel.density(
                            np.array([(diff + delta) * inv_eps]))[0])
                pb = acc / (s * s)
            else:
                pb = float(kernel.density(np.array([diff * inv_eps]))[0])
            w = ((scale * pb) * lam_at(i, j)) * h
            W[i, j] = w
            W[j, i] = w
    return W


def naive_assemble_2d_const(kernel, lam, eps, grid, s=4, band_width=4.0):
    pts = grid.centers()
    n = grid.size
    h = grid.h
    inv_eps = 1.0 / eps
    scale = eps ** (-(2 + kernel.alpha))
    hd = h * h
    offs = -0.5 * h + (np.arange(s) + 0.5) * (h / s)
    W = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            dx = pts[i, 0] - pts[j, 0]
            dy = pts[i, 1] - pts[j, 1]
            dist = np.sqrt(dx * dx + dy * dy)
            if s > 1 and dist <= band_width * eps:
                acc = 0.0
                for a1 in range(s):
                    for a2 in range(s):
                        for b1 in range(s):
                            for b2 in range(s):
                                zx = (dx + (offs[a1] - offs[b1])) * inv_eps
                                zy = (dy + (offs[a2] - offs[b2])) * inv_eps
                                acc += float(kernel.density(
                                    np.array([[zx, zy]]))[0])
                pb = acc / float(s**4)
            else:
                pb = float(kernel.density(
                    np.array([[dx * inv_eps, dy * inv_eps]]))[0])
            w = ((scale * pb) * lam) * hd
            W[i, j] = w
            W[j, i] = w
    return W
