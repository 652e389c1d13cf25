"""Hot numeric kernels: simultaneous root iteration and circle quadrature.

Two interchangeable implementations live here: numba ``@njit`` kernels and
pure-numpy fallbacks.  The active backend is chosen at import time:

* ``RANDFUN_NUMBA=0`` in the environment forces the numpy path;
* otherwise numba is used when importable.

Both paths implement identical algorithms; within one backend results are
bit-reproducible.  ``benchmarks/bench_kernels.py`` times them side by side.
"""

from __future__ import annotations

import math
import os

import numpy as np

_FORCED_OFF = os.environ.get("RANDFUN_NUMBA", "").strip() == "0"

try:  # pragma: no cover - exercised via both backends in CI
    if _FORCED_OFF:
        raise ImportError("numba disabled by RANDFUN_NUMBA=0")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return deco

BACKEND = "numba" if HAVE_NUMBA else "numpy"

ABERTH_TOL = 1e-13
ABERTH_MAX_ITER = 400


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def _horner_pair_numpy(c, z):
    """Evaluate p and p' at points z; c ascending, c[-1] != 0."""
    c = np.asarray(c, dtype=np.complex128)
    z = np.asarray(z, dtype=np.complex128)
    deg = len(c) - 1
    p = np.full(z.shape, c[deg], dtype=np.complex128)
    dp = np.zeros(z.shape, dtype=np.complex128)
    for k in range(deg - 1, -1, -1):
        dp = dp * z + p
        p = p * z + c[k]
    return p, dp


def _aberth_numpy(c, tol=ABERTH_TOL, max_iter=ABERTH_MAX_ITER):
    c = np.asarray(c, dtype=np.complex128)
    deg = len(c) - 1
    radius = (abs(c[0]) / abs(c[deg])) ** (1.0 / deg)
    ang = 2.0 * np.pi * np.arange(deg) / deg + 0.35
    x = radius * np.exp(1j * ang)
    abs_c = np.abs(c)
    eps_floor = 8.0 * np.finfo(float).eps * (deg + 1)
    niter = 0
    for it in range(max_iter):
        niter = it + 1
        p, dp = _horner_pair_numpy(c, x)
        # rounding-error envelope of the Horner evaluation at each point
        env = np.polyval(abs_c[::-1], np.abs(x))
        settled = np.abs(p) <= eps_floor * env
        w = np.where(dp != 0, p / np.where(dp == 0, 1, dp), 0.0)
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, 1.0)
        s = (1.0 / diff).sum(axis=1) - 1.0
        denom = 1.0 - w * s
        corr = np.where(denom != 0, w / np.where(denom == 0, 1, denom), w)
        corr = np.where(settled, 0.0, corr)
        x = x - corr
        if np.max(np.abs(corr)) <= tol * (1.0 + np.max(np.abs(x))):
            return x, niter, True
    return x, niter, False


def _circle_eval_numpy(c, radius, n_nodes):
    theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    z = radius * np.exp(1j * theta)
    p, _ = _horner_pair_numpy(c, z)
    return p


def _argp_mean_numpy(c, radius, n_nodes):
    theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    z = radius * np.exp(1j * theta)
    p, dp = _horner_pair_numpy(c, z)
    return complex(np.mean(z * dp / p))


def _log_abs_stats_numpy(c, radius, n_nodes):
    p = _circle_eval_numpy(c, radius, n_nodes)
    mods = np.abs(p)
    tiny = np.finfo(np.float64).tiny
    logs = np.log(np.maximum(mods, tiny))
    return float(np.mean(logs)), float(np.min(logs))


# ---------------------------------------------------------------------------
# numba kernels (same algorithms, loop form)
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _aberth_numba(c, tol, max_iter):  # pragma: no cover - jitted
        deg = c.shape[0] - 1
        radius = (abs(c[0]) / abs(c[deg])) ** (1.0 / deg)
        x = np.empty(deg, dtype=np.complex128)
        for k in range(deg):
            ang = 2.0 * np.pi * k / deg + 0.35
            x[k] = radius * (math.cos(ang) + 1j * math.sin(ang))
        eps_floor = 8.0 * 2.220446049250313e-16 * (deg + 1)
        niter = 0
        for it in range(max_iter):
            niter = it + 1
            max_corr = 0.0
            max_abs = 0.0
            for i in range(deg):
                xi = x[i]
                axi = abs(xi)
                p = c[deg]
                dp = 0.0 + 0.0j
                env = abs(c[deg])
                for k in range(deg - 1, -1, -1):
                    dp = dp * xi + p
                    p = p * xi + c[k]
                    env = env * axi + abs(c[k])
                if abs(p) <= eps_floor * env:
                    # at the rounding-noise floor: no better location exists
                    ax = abs(x[i])
                    if ax > max_abs:
                        max_abs = ax
                    continue
                if dp != 0:
                    w = p / dp
                else:
                    w = 0.0 + 0.0j
                s = 0.0 + 0.0j
                for j in range(deg):
                    if j != i:
                        s += 1.0 / (xi - x[j])
                denom = 1.0 - w * s
                if denom != 0:
                    corr = w / denom
                else:
                    corr = w
                x[i] = xi - corr
                ac = abs(corr)
                if ac > max_corr:
                    max_corr = ac
                ax = abs(x[i])
                if ax > max_abs:
                    max_abs = ax
            if max_corr <= tol * (1.0 + max_abs):
                return x, niter, True
        return x, niter, False

    @njit(cache=True, nogil=True)
    def _circle_eval_numba(c, radius, n_nodes):  # pragma: no cover
        deg = c.shape[0] - 1
        out = np.empty(n_nodes, dtype=np.complex128)
        for k in range(n_nodes):
            ang = 2.0 * np.pi * k / n_nodes
            z = radius * (math.cos(ang) + 1j * math.sin(ang))
            p = c[deg]
            for m in range(deg - 1, -1, -1):
                p = p * z + c[m]
            out[k] = p
        return out

    @njit(cache=True, nogil=True)
    def _argp_mean_numba(c, radius, n_nodes):  # pragma: no cover
        deg = c.shape[0] - 1
        acc = 0.0 + 0.0j
        for k in range(n_nodes):
            ang = 2.0 * np.pi * k / n_nodes
            z = radius * (math.cos(ang) + 1j * math.sin(ang))
            p = c[deg]
            dp = 0.0 + 0.0j
            for m in range(deg - 1, -1, -1):
                dp = dp * z + p
                p = p * z + c[m]
            acc += z * dp / p
        return acc / n_nodes

    @njit(cache=True, nogil=True)
    def _log_abs_stats_numba(c, radius, n_nodes):  # pragma: no cover
        deg = c.shape[0] - 1
        tiny = 2.2250738585072014e-308
        acc = 0.0
        mn = 1e308
        for k in range(n_nodes):
            ang = 2.0 * np.pi * k / n_nodes
            z = radius * (math.cos(ang) + 1j * math.sin(ang))
            p = c[deg]
            for m in range(deg - 1, -1, -1):
                p = p * z + c[m]
            v = abs(p)
            if v < tiny:
                v = tiny
            lv = math.log(v)
            acc += lv
            if lv < mn:
                mn = lv
        return acc / n_nodes, mn


# ---------------------------------------------------------------------------
# public dispatch
# ---------------------------------------------------------------------------

def aberth_roots(c, tol=ABERTH_TOL, max_iter=ABERTH_MAX_ITER):
    """All roots of the polynomial with ascending coefficients ``c``.

    Requires c[0] != 0 and c[-1] != 0 (deflate zeros at the origin and
    trailing zero coefficients before calling).  Returns (roots, niter,
    converged).
    """
    c = np.ascontiguousarray(c, dtype=np.complex128)
    if HAVE_NUMBA:
        return _aberth_numba(c, tol, max_iter)
    return _aberth_numpy(c, tol, max_iter)


def circle_eval(c, radius, n_nodes):
    """p(radius * e^{2 pi i k / n_nodes}) for k = 0..n_nodes-1."""
    c = np.ascontiguousarray(c, dtype=np.complex128)
    if HAVE_NUMBA:
        return _circle_eval_numba(c, float(radius), int(n_nodes))
    return _circle_eval_numpy(c, float(radius), int(n_nodes))


def argp_mean(c, radius, n_nodes):
    """Trapezoid value of (1/2 pi i) * contour integral of p'/p on a circle."""
    c = np.ascontiguousarray(c, dtype=np.complex128)
    if HAVE_NUMBA:
        return _argp_mean_numba(c, float(radius), int(n_nodes))
    return _argp_mean_numpy(c, float(radius), int(n_nodes))


def log_abs_stats(c, radius, n_nodes):
    """(mean, min) of log|p| over equispaced nodes on a circle."""
    c = np.ascontiguousarray(c, dtype=np.complex128)
    if HAVE_NUMBA:
        return _log_abs_stats_numba(c, float(radius), int(n_nodes))
    return _log_abs_stats_numpy(c, float(radius), int(n_nodes))


def horner_many(c, z):
    """Evaluate the polynomial at arbitrary complex points (numpy path)."""
    p, _ = _horner_pair_numpy(c, z)
    return p


def warmup():
    """Trigger JIT compilation of all kernels (no-op on the numpy path)."""
    c = np.array([-1.0, 0.0, 0.0, 1.0], dtype=np.complex128)
    aberth_roots(c)
    circle_eval(c, 1.5, 8)
    argp_mean(c, 1.5, 8)
    log_abs_stats(c, 1.5, 8)
