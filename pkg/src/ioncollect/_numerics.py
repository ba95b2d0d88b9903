"""Small numerical kernels: Jacobi eigensolver, adaptive Simpson, golden section."""

from __future__ import annotations

import math

import numpy as np

from .errors import IntegrationError, SolverError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def jacobi_eigh(a, tol=1e-14, max_sweeps=100):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, v)`` with ascending eigenvalues ``w`` and orthonormal
    eigenvectors in the columns of ``v``. The first non-negligible component
    of every eigenvector is made positive so the output is unique.

    Iteration stops once the Frobenius norm of the off-diagonal part falls
    below ``tol`` times the Frobenius norm of ``a``.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("jacobi_eigh expects a square matrix")
    n = a.shape[0]
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return np.diag(a).copy(), v

    offdiag = ~np.eye(n, dtype=bool)
    off = math.inf
    for _ in range(max_sweeps):
        off = math.sqrt(np.sum(a[offdiag] ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise SolverError(f"Jacobi iteration did not converge in {max_sweeps} sweeps", residual=off)

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    for j in range(n):
        col = v[:, j]
        lead = np.flatnonzero(np.abs(col) > 1e-12 * np.max(np.abs(col)))[0]
        if col[lead] < 0:
            v[:, j] = -col
    return w, v


def adaptive_simpson(f, a, b, rtol=1e-8, atol=1e-12, panels=64, max_level=40):
    """Integrate a vectorized ``f`` over ``[a, b]`` by adaptive Simpson.

    The interval starts as ``panels`` equal panels. Each level evaluates the
    Simpson rule on every pending panel and on its two halves; panels whose
    error estimate ``|S2 - S1| / 15`` is within their share of the global
    tolerance ``max(atol, rtol * |I|)`` are accepted (with the Richardson
    correction), the rest are bisected.

    Returns ``(integral, error_estimate)``.
    """
    if b == a:
        return 0.0, 0.0
    if b < a:
        val, err = adaptive_simpson(f, b, a, rtol, atol, panels, max_level)
        return -val, err
    length = b - a
    edges = np.linspace(a, b, int(panels) + 1)
    lo, hi = edges[:-1], edges[1:]
    accepted = 0.0
    accepted_err = 0.0
    for _ in range(max_level):
        mid = 0.5 * (lo + hi)
        x = np.concatenate([lo, 0.5 * (lo + mid), mid, 0.5 * (mid + hi), hi])
        fx = np.asarray(f(x), dtype=float).reshape(5, -1)
        h = hi - lo
        s1 = h / 6.0 * (fx[0] + 4.0 * fx[2] + fx[4])
        s2 = h / 12.0 * (fx[0] + 4.0 * fx[1] + 2.0 * fx[2] + 4.0 * fx[3] + fx[4])
        err = np.abs(s2 - s1) / 15.0
        estimate = accepted + float(np.sum(s2))
        tol = max(atol, rtol * abs(estimate))
        ok = err <= tol * h / length
        accepted += float(np.sum(s2[ok] + (s2[ok] - s1[ok]) / 15.0))
        accepted_err += float(np.sum(err[ok]))
        if ok.all():
            return accepted, accepted_err
        lo_bad, mid_bad, hi_bad = lo[~ok], mid[~ok], hi[~ok]
        lo = np.concatenate([lo_bad, mid_bad])
        hi = np.concatenate([mid_bad, hi_bad])
        order = np.argsort(lo, kind="stable")
        lo, hi = lo[order], hi[order]
    pending = float(np.sum(s2[~ok]))
    raise IntegrationError(
        f"adaptive Simpson did not converge after {max_level} levels",
        estimate=accepted + pending,
        error=accepted_err + float(np.sum(err[~ok])),
    )


def golden_section_max(f, lo, hi, rtol=1e-6, max_iter=500):
    """Maximize a unimodal ``f`` on ``[lo, hi]`` by golden-section search.

    Stops when the bracket is narrower than ``rtol`` times its midpoint
    magnitude. Returns ``(x_best, f_best)`` over all evaluated points.
    """
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    best = (x1, f1) if f1 >= f2 else (x2, f2)
    for _ in range(max_iter):
        if hi - lo <= rtol * max(abs(0.5 * (lo + hi)), 1e-300):
            break
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = f(x1)
            if f1 > best[1]:
                best = (x1, f1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = f(x2)
            if f2 > best[1]:
                best = (x2, f2)
    return best
