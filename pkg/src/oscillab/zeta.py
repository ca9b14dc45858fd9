"""Riemann zeta function and its derivative for complex arguments.

Euler-Maclaurin summation on the strip ``-2 <= Re s < 8``, a truncated Euler
product for ``Re s >= 8`` (cost independent of the height), and the functional
equation for ``Re s < -2``.  All entry points accept scalars or arrays.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy import optimize, special

from .errors import PoleError

EM_TERMS = 14
EULER_PRODUCT_ABSCISSA = 8.0
FIRST_ZERO_HEIGHT = 14.134725141734693

# B_{2k} / (2k)! for k = 1..EM_TERMS
_BERNOULLI = special.bernoulli(2 * EM_TERMS)
_EM_COEFFS = np.array(
    [_BERNOULLI[2 * k] / math.factorial(2 * k) for k in range(1, EM_TERMS + 1)]
)
_CHUNK = 1 << 21


def _primes_upto(n):
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.nonzero(sieve)[0]


_EULER_PRIMES = _primes_upto(2000).astype(float)


def em_cutoff(t):
    """Number of Dirichlet terms used by Euler-Maclaurin at height ``t``.

    The value is rounded up to a coarse grid so that it depends only on the
    argument, never on which batch the argument is evaluated in.
    """
    n = 20 + np.ceil(np.abs(np.asarray(t, dtype=float)) / 2.0)
    return (16 * np.ceil(n / 16)).astype(np.int64)


def _euler_prime_bound(sigma):
    # smallest P with P^(1-sigma)/(sigma-1) < 1e-18
    sigma = float(sigma)
    p = math.exp((18 * math.log(10) - math.log(sigma - 1)) / (sigma - 1))
    return min(max(p, 3.0), _EULER_PRIMES[-1])


def _euler_log_zeta(s, with_derivative=False):
    """log zeta(s) and zeta'/zeta(s) via the Euler product, for Re s >= 8."""
    s = np.asarray(s, dtype=complex)
    out = np.empty(s.shape, dtype=complex)
    dout = np.empty(s.shape, dtype=complex) if with_derivative else None
    if s.size == 0:
        return out, dout
    pmax = _euler_prime_bound(s.real.min())
    primes = _EULER_PRIMES[_EULER_PRIMES <= pmax]
    logp = np.log(primes)
    flat = s.ravel()
    step = max(1, _CHUNK // len(primes))
    o = out.ravel()
    d = dout.ravel() if with_derivative else None
    for i in range(0, flat.size, step):
        block = flat[i : i + step]
        pw = np.exp(-np.outer(block, logp))
        o[i : i + step] = -np.log1p(-pw).sum(axis=1)
        if with_derivative:
            d[i : i + step] = -(logp * pw / (1.0 - pw)).sum(axis=1)
    return out, dout


def _em_group(s, n_terms, with_derivative):
    """Euler-Maclaurin sum for a batch sharing one cutoff ``n_terms``."""
    logn = np.log(np.arange(1, n_terms, dtype=float))
    N = float(n_terms)
    logN = math.log(N)
    zs = np.empty(s.shape, dtype=complex)
    dzs = np.empty(s.shape, dtype=complex) if with_derivative else None
    step = max(1, _CHUNK // len(logn))
    for i in range(0, s.size, step):
        b = s[i : i + step]
        terms = np.exp(-np.outer(b, logn))
        head = terms.sum(axis=1)
        Nms = np.exp(-b * logN)
        z = head + N * Nms / (b - 1.0) + 0.5 * Nms
        if with_derivative:
            dz = -(terms * logn).sum(axis=1)
            dz += N * Nms * (-logN / (b - 1.0) - 1.0 / (b - 1.0) ** 2)
            dz += -0.5 * logN * Nms
        poch = b.copy()
        dpoch = np.ones_like(b)
        Npow = Nms / N
        for k in range(1, EM_TERMS + 1):
            if k > 1:
                a1 = b + (2 * k - 3)
                a2 = b + (2 * k - 2)
                dpoch = dpoch * a1 * a2 + poch * (a1 + a2)
                poch = poch * a1 * a2
                Npow = Npow / (N * N)
            c = _EM_COEFFS[k - 1]
            z += c * poch * Npow
            if with_derivative:
                dz += c * (dpoch - logN * poch) * Npow
        zs[i : i + step] = z
        if with_derivative:
            dzs[i : i + step] = dz
    return zs, dzs


def _em(s, with_derivative):
    cut = em_cutoff(s.imag)
    zs = np.empty(s.shape, dtype=complex)
    dzs = np.empty(s.shape, dtype=complex) if with_derivative else None
    for n in np.unique(cut):
        idx = np.nonzero(cut == n)[0]
        z, dz = _em_group(s[idx], int(n), with_derivative)
        zs[idx] = z
        if with_derivative:
            dzs[idx] = dz
    return zs, dzs


def _chi_log(s):
    # log of chi(s) = 2^s pi^(s-1) sin(pi s/2) Gamma(1-s), up to the sine factor
    return s * math.log(2.0) + (s - 1.0) * math.log(math.pi) + special.loggamma(1.0 - s)


def _upper(s, with_derivative):
    """zeta (and zeta') for a flat array with Im s >= 0 and s != 1."""
    z = np.empty(s.shape, dtype=complex)
    dz = np.empty(s.shape, dtype=complex) if with_derivative else None
    high = s.real >= EULER_PRODUCT_ABSCISSA
    low = s.real < -2.0
    mid = ~(high | low)
    if high.any():
        lz, dl = _euler_log_zeta(s[high], with_derivative)
        z[high] = np.exp(lz)
        if with_derivative:
            dz[high] = z[high] * dl
    if mid.any():
        a, b = _em(s[mid], with_derivative)
        z[mid] = a
        if with_derivative:
            dz[mid] = b
    if low.any():
        sl = s[low]
        refl, drefl = _upper(1.0 - sl, with_derivative)
        chi = np.exp(_chi_log(sl)) * np.sin(np.pi * sl / 2.0)
        z[low] = chi * refl
        if with_derivative:
            dlogchi = (
                math.log(2.0)
                + math.log(math.pi)
                + (np.pi / 2.0) / np.tan(np.pi * sl / 2.0)
                - special.psi(1.0 - sl)
            )
            dz[low] = chi * (dlogchi * refl - drefl)
    return z, dz


def _evaluate(s, with_derivative):
    arr = np.asarray(s, dtype=complex)
    scalar = arr.ndim == 0
    flat = arr.ravel()
    if np.any(flat == 1.0):
        raise PoleError("zeta has a pole at s = 1")
    flip = flat.imag < 0
    work = np.where(flip, np.conj(flat), flat)
    z, dz = _upper(work, with_derivative)
    z = np.where(flip, np.conj(z), z).reshape(arr.shape)
    if with_derivative:
        dz = np.where(flip, np.conj(dz), dz).reshape(arr.shape)
    if scalar:
        return (complex(z), complex(dz)) if with_derivative else complex(z)
    return (z, dz) if with_derivative else z


def zeta(s):
    """Riemann zeta function; scalar in, complex out, arrays elementwise."""
    return _evaluate(s, False)


def zeta_prime(s):
    """Derivative of the zeta function."""
    return _evaluate(s, True)[1]


def zeta_and_prime(s):
    return _evaluate(s, True)


def log_zeta_high(s):
    """log zeta(s) for Re s >= 8 via the Euler product (principal branch)."""
    s = np.asarray(s, dtype=complex)
    if np.any(s.real < EULER_PRODUCT_ABSCISSA):
        raise ValueError("log_zeta_high needs Re s >= 8")
    return _euler_log_zeta(s)[0]


def hardy_z(t):
    """Hardy's Z function, real on the real axis."""
    t = np.asarray(t, dtype=float)
    theta = special.loggamma(0.25 + 0.5j * t).imag - 0.5 * t * math.log(math.pi)
    return (np.exp(1j * theta) * zeta(0.5 + 1j * t)).real


@dataclass(frozen=True)
class ZetaConstants:
    euler_gamma: float
    first_zero_height: float
    two_s0: complex
    s0: complex


@lru_cache(maxsize=None)
def zeta_constants():
    """Named constants, with the first zero re-checked against a Z sign change."""
    located = optimize.brentq(lambda t: float(hardy_z(t)), 14.13, 14.14, xtol=1e-13)
    if abs(located - FIRST_ZERO_HEIGHT) > 5e-7:
        raise RuntimeError(f"first zero check failed: bracketed {located!r}")
    two_s0 = complex(0.5, FIRST_ZERO_HEIGHT)
    if abs(zeta(two_s0)) >= 1e-8:
        raise RuntimeError("zeta does not vanish at the hard-coded first zero")
    return ZetaConstants(
        euler_gamma=float(np.euler_gamma),
        first_zero_height=FIRST_ZERO_HEIGHT,
        two_s0=two_s0,
        s0=two_s0 / 2,
    )
