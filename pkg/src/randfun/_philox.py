"""Counter-based random numbers (Philox4x64-10).

Every random quantity in this package is derived from a Philox block keyed by
``(seed, domain)`` with the counter carrying ``(block, index, trial, 0)``.
A draw therefore depends only on those integers, never on call order, which
makes Monte Carlo runs reproducible under any chunking or thread count and
lets samples share coefficients across truncation degrees.

The generator is implemented with vectorized uint64 numpy arithmetic; it is
bit-exact against ``numpy.random.Philox`` (which advances its counter once
before producing the first block -- see the unit tests).
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)

# Domain separators: distinct streams per purpose, all under one user seed.
DOMAIN_COEFF = np.uint64(0x52414E4446554E31)
DOMAIN_ANGLES = np.uint64(0x52414E4446554E32)
DOMAIN_SIGNS = np.uint64(0x52414E4446554E33)
DOMAIN_SETS = np.uint64(0x52414E4446554E34)
DOMAIN_FREQS = np.uint64(0x52414E4446554E35)


def _mulhilo(a, b):
    """Full 64x64 -> 128 bit product of uint64 arrays, as (hi, lo)."""
    a_lo = a & _LO32
    a_hi = a >> _SH32
    b_lo = b & _LO32
    b_hi = b >> _SH32
    lo_lo = a_lo * b_lo
    hi_lo = a_hi * b_lo
    lo_hi = a_lo * b_hi
    hi_hi = a_hi * b_hi
    cross = (lo_lo >> _SH32) + (hi_lo & _LO32) + lo_hi
    hi = hi_hi + (hi_lo >> _SH32) + (cross >> _SH32)
    lo = a * b
    return hi, lo


def philox4x64(c0, c1, c2, c3, k0, k1):
    """Philox4x64-10 block function on uint64 arrays (broadcasting)."""
    arrs = [np.atleast_1d(np.asarray(a, dtype=np.uint64))
            for a in (c0, c1, c2, c3, k0, k1)]
    shape = np.broadcast_shapes(*(a.shape for a in arrs))
    c0, c1, c2, c3, k0, k1 = (
        np.broadcast_to(a, shape).copy() for a in arrs
    )
    with np.errstate(over="ignore"):
        for _ in range(10):
            hi0, lo0 = _mulhilo(c0, _M0)
            hi1, lo1 = _mulhilo(c2, _M1)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
            k0 = k0 + _W0
            k1 = k1 + _W1
    return c0, c1, c2, c3


def _uniform01(words):
    """Map uint64 words to doubles in [0, 1), 53 random bits."""
    return (words >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def _blocks(seed, domain, trial, index, block=0):
    seed = np.uint64(seed)
    trial = np.asarray(trial, dtype=np.uint64)
    index = np.asarray(index, dtype=np.uint64)
    block = np.asarray(block, dtype=np.uint64)
    return philox4x64(block, index, trial, np.uint64(0), seed, domain)


def gaussian_coeffs(seed, trial, indices):
    """Standard complex Gaussians (density e^{-|z|^2}/pi) per (trial, index)."""
    w0, w1, _, _ = _blocks(seed, DOMAIN_COEFF, trial, indices)
    u1 = _uniform01(w0)
    u2 = _uniform01(w1)
    radius = np.sqrt(-np.log1p(-u1))
    return radius * np.exp(2j * np.pi * u2)


def rademacher_coeffs(seed, trial, indices):
    """Independent signs +-1 with equal probability per (trial, index)."""
    w0, _, _, _ = _blocks(seed, DOMAIN_COEFF, trial, indices)
    signs = 1.0 - 2.0 * (w0 >> np.uint64(63)).astype(np.float64)
    return signs.astype(np.complex128)

def steinhaus_coeffs(seed, trial, indices):
    """Unimodular factors e^{2 pi i gamma}, gamma uniform on [0,1)."""
    w0, _, _, _ = _blocks(seed, DOMAIN_COEFF, trial, indices)
    return np.exp(2j * np.pi * _uniform01(w0))


def uniform_angles(seed, trial, count, domain=DOMAIN_ANGLES):
    """``count`` uniform angles in [0, 2pi) for one trial."""
    w0, _, _, _ = _blocks(seed, domain, trial, np.arange(count))
    return 2.0 * np.pi * _uniform01(w0)


def uniform_angles_matrix(seed, trial0, trials, count, domain=DOMAIN_ANGLES):
    """(trials, count) angles; row t equals uniform_angles(seed, trial0+t)."""
    t_idx, n_idx = np.meshgrid(
        np.arange(trial0, trial0 + trials, dtype=np.uint64),
        np.arange(count, dtype=np.uint64),
        indexing="ij",
    )
    w0, _, _, _ = _blocks(seed, domain, t_idx, n_idx)
    return 2.0 * np.pi * _uniform01(w0)


def uniform01(seed, trial, count, domain=DOMAIN_SETS):
    """``count`` uniforms in [0, 1) for one trial."""
    w0, _, _, _ = _blocks(seed, domain, trial, np.arange(count))
    return _uniform01(w0)


def rademacher_matrix(seed, trials, dim, domain=DOMAIN_SIGNS):
    """(trials, dim) array of +-1 signs, row t reproducible from (seed, t)."""
    t_idx, n_idx = np.meshgrid(
        np.arange(trials, dtype=np.uint64),
        np.arange(dim, dtype=np.uint64),
        indexing="ij",
    )
    w0, _, _, _ = _blocks(seed, domain, t_idx, n_idx)
    return 1.0 - 2.0 * (w0 >> np.uint64(63)).astype(np.float64)


def gaussian_matrix(seed, trials, dim, domain=DOMAIN_COEFF):
    """(trials, dim) array of standard complex Gaussians."""
    t_idx, n_idx = np.meshgrid(
        np.arange(trials, dtype=np.uint64),
        np.arange(dim, dtype=np.uint64),
        indexing="ij",
    )
    w0, w1, _, _ = _blocks(seed, domain, t_idx, n_idx)
    radius = np.sqrt(-np.log1p(-_uniform01(w0)))
    return radius * np.exp(2j * np.pi * _uniform01(w1))
