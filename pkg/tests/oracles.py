"""Independent brute-force references used by the solver tests."""

import math

import numpy as np


def golden_section(f, a, b, tol=1e-10, max_iter=200):
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def scalar_argmin(f, lo, hi, step=1e-4):
    """Grid search at ``step`` followed by golden-section refinement around the best node."""
    grid = np.arange(lo, hi + step, step)
    vals = f(grid)
    k = int(np.argmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    return golden_section(lambda t: float(f(np.array(t))), a, b)


def prox_l1_bruteforce(v, alpha):
    """argmin_t alpha |t| + (t - v)^2 / 2."""
    span = abs(v) + alpha + 1
    return scalar_argmin(lambda t: alpha * np.abs(t) + 0.5 * (t - v) ** 2, -span, span)


def augmented_lagrangian_grad_omega(omega, x, z, hyp, cfg):
    """d/d omega of ||y-Aw||^2 + l1 ||Gw||^2 + z'(x - Bw) + rho/2 ||x - Bw||^2."""
    A, B, y = hyp.A, hyp.B, hyp.y
    return (
        -2 * A.T @ (y - A @ omega)
        + 2 * cfg.lambda1 * hyp.gamma ** 2 * omega
        - B.T @ z
        - cfg.rho * B.T @ (x - B @ omega)
    )


def block_psnr(a, b):
    mse = np.mean((np.asarray(a, float) - np.asarray(b, float)) ** 2)
    return math.inf if mse == 0 else 10 * math.log10(255 ** 2 / mse)
