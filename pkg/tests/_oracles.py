"""Closed-form reference values used across the test modules.

Everything here is computed independently of the library code: transforms
from textbook formulas, tails from erfc, and the random stream from a
from-scratch reimplementation of the documented recurrence.
"""

import math

import numpy as np


def gauss_hat(lam, scale=1.0):
    """Transform of e^{-(t/scale)^2}: scale sqrt(pi) e^{-(scale lam)^2/4}."""
    lam = np.asarray(lam, dtype=np.float64)
    return (scale * math.sqrt(math.pi)
            * np.exp(-(scale * lam) ** 2 / 4.0)).astype(np.complex128)


def indicator_hat(lam, a=0.0, b=1.0):
    """Transform of the indicator of [a, b]."""
    lam = np.asarray(lam, dtype=np.float64)
    out = np.empty(lam.shape, dtype=np.complex128)
    small = np.abs(lam) < 1e-12
    out[small] = b - a
    ls = lam[~small]
    out[~small] = (np.exp(-1j * ls * a) - np.exp(-1j * ls * b)) / (1j * ls)
    return out


def two_sided_exp_hat(lam, rate=1.0):
    """Transform of e^{-rate|t|}: 2 rate / (rate^2 + lam^2)."""
    lam = np.asarray(lam, dtype=np.float64)
    return (2.0 * rate / (rate * rate + lam * lam)).astype(np.complex128)


def gauss_tail(s, scale=1.0):
    """Two-sided tail mass of e^{-(t/scale)^2} beyond |t| = s."""
    return scale * math.sqrt(math.pi) * math.erfc(s / scale)


def splitmix64_reference(seed, count):
    """The documented recurrence, written out stepwise with plain ints."""
    mask = (1 << 64) - 1
    state = seed & mask
    out = []
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        z = z ^ (z >> 31)
        out.append((z >> 11) * 2.0 ** -53)
    return np.array(out)
