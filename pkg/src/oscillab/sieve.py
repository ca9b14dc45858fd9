"""Sieving of the five arithmetic sequences, prefix sums and the binary cache.

Every kind except the von Mangoldt function is multiplicative, so a value is
the product of a prime-power factor over the factorisation of ``n``.  Small
primes (up to ``sqrt(n_max)``) are stripped off with strided slices; whatever
is left of ``n`` afterwards is 1 or a single large prime.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import enum
import math
import struct

import numba
import numpy as np

from .errors import (
    ArgumentError,
    CacheMagicError,
    CacheMismatchError,
    CacheTruncatedError,
    CacheVersionError,
    RangeError,
)

CACHE_MAGIC = b"OSC1"
CACHE_VERSION = 1
_HEADER = struct.Struct("<4sHBdQ")
BLOCK = 1 << 17
MAX_PARTITION_EXPONENT = 64


class Tag(enum.IntEnum):
    DIVISOR = 1
    SQUAREFREE_DIVISORS = 2
    TWISTED = 3
    VON_MANGOLDT = 4
    ABELIAN = 5


@dataclass(frozen=True)
class SequenceKind:
    tag: Tag
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "tag", Tag(self.tag))
        if self.tag is Tag.TWISTED:
            if not self.theta or not math.isfinite(self.theta):
                raise ArgumentError("TWISTED needs a finite theta != 0")
        else:
            object.__setattr__(self, "theta", 0.0)

    @property
    def multiplicative(self):
        return self.tag is not Tag.VON_MANGOLDT

    @property
    def name(self):
        return self.tag.name.lower()


DIVISOR = SequenceKind(Tag.DIVISOR)
SQUAREFREE = SequenceKind(Tag.SQUAREFREE_DIVISORS)
VON_MANGOLDT = SequenceKind(Tag.VON_MANGOLDT)
ABELIAN = SequenceKind(Tag.ABELIAN)


def twisted(theta=1.0):
    return SequenceKind(Tag.TWISTED, float(theta))


@dataclass(frozen=True, eq=False)
class ArithmeticSequence:
    """Values ``a_1..a_{n_max}``; ``values[0]`` is an unused zero slot."""

    kind: SequenceKind
    n_max: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values.setflags(write=False)

    def __getitem__(self, n):
        return self.values[n]


@dataclass(frozen=True, eq=False)
class PrefixTable:
    """Prefix sums ``prefix[n] = a_1 + ... + a_n`` with ``prefix[0] = 0``.

    ``kind`` is None for synthetic tables built from arbitrary values.
    """

    kind: SequenceKind | None
    n_max: int
    prefix: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.prefix.setflags(write=False)
        self.values.setflags(write=False)

    @classmethod
    def from_sequence(cls, seq):
        return cls(seq.kind, seq.n_max, kahan_prefix(seq.values), seq.values)

    @classmethod
    def from_values(cls, values, kind=None):
        """Synthetic table; ``values[k]`` is ``a_{k+1}``."""
        v = np.concatenate([[0.0], np.asarray(values, dtype=float)])
        return cls(kind, len(v) - 1, kahan_prefix(v), v)


@numba.njit(cache=True)
def _kahan_cumsum(values):
    out = np.empty_like(values)
    total = 0.0
    comp = 0.0
    for i in range(values.shape[0]):
        y = values[i] - comp
        t = total + y
        comp = (t - total) - y
        total = t
        out[i] = total
    return out


def kahan_prefix(values):
    return _kahan_cumsum(np.ascontiguousarray(values, dtype=np.float64))


def partition_numbers(limit=MAX_PARTITION_EXPONENT):
    """p(0..limit) by Euler's pentagonal recurrence."""
    p = [1] + [0] * limit
    for n in range(1, limit + 1):
        total, k = 0, 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > n:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[n - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= n:
                total += sign * p[n - g2]
            k += 1
        p[n] = total
    return p


_PARTITIONS = np.array(partition_numbers(), dtype=float)


def prime_sieve(n):
    """Boolean primality table for 0..n."""
    flags = np.ones(n + 1, dtype=bool)
    flags[: min(2, n + 1)] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return flags


def _prime_power_factor(kind, p, e):
    """Value of the multiplicative function at p**e (arrays allowed)."""
    tag = kind.tag
    if tag is Tag.DIVISOR:
        return e + 1.0
    if tag is Tag.SQUAREFREE_DIVISORS:
        return np.full(np.shape(e), 2.0) if np.ndim(e) else 2.0
    if tag is Tag.ABELIAN:
        return _PARTITIONS[e]
    # |tau(p^e, theta)|^2 as a ratio of sines; near a zero of the denominator
    # the ratio loses all digits, so the Fejer-kernel sum
    # (e+1) + 2 sum_m (e+1-m) cos(m phi) is used instead
    half = 0.5 * kind.theta * np.log(p)
    den = np.sin(half)
    num = np.sin((e + 1.0) * half)
    small = np.abs(den) < 1e-3
    ratio = (num / np.where(small, 1.0, den)) ** 2
    if not np.any(small):
        return ratio
    e_arr = np.broadcast_to(np.asarray(e, dtype=float), np.shape(ratio))
    phi = np.broadcast_to(2.0 * half, np.shape(ratio))
    fejer = e_arr + 1.0
    for m in range(1, int(np.max(e_arr)) + 1):
        fejer = fejer + np.where(m <= e_arr, 2.0 * (e_arr + 1 - m) * np.cos(m * phi), 0.0)
    return np.where(small, fejer, ratio)


def _sieve_block(kind, lo, hi, small_primes):
    """Multiplicative values for n in [lo, hi)."""
    n = np.arange(lo, hi, dtype=np.int64)
    rest = n.copy()
    vals = np.ones(hi - lo, dtype=float)
    for p in small_primes:
        first = ((lo + p - 1) // p) * p
        if first >= hi:
            continue
        sl = slice(first - lo, hi - lo, p)
        sub = rest[sl]
        e = np.zeros(sub.shape, dtype=np.int64)
        while True:
            div = sub % p == 0
            if not div.any():
                break
            e += div
            sub = np.where(div, sub // p, sub)
        rest[sl] = sub
        vals[sl] *= _prime_power_factor(kind, float(p), e)
    big = rest > 1
    if big.any():
        q = rest[big].astype(float)
        vals[big] *= _prime_power_factor(kind, q, np.ones(q.shape, dtype=np.int64))
    return vals


def _von_mangoldt(n_max):
    vals = np.zeros(n_max + 1)
    flags = prime_sieve(n_max)
    primes = np.nonzero(flags)[0]
    vals[primes] = np.log(primes.astype(float))
    for p in primes[: np.searchsorted(primes, math.isqrt(n_max), side="right")]:
        lp = math.log(p)
        q = p * p
        while q <= n_max:
            vals[q] = lp
            q *= p
    return vals


def sieve(kind, n_max, workers=1):
    """Sieve ``a_1..a_{n_max}`` for one sequence kind.

    Blocks of fixed size are processed independently, so the output does not
    depend on ``workers``.
    """
    if not isinstance(kind, SequenceKind):
        raise ArgumentError(f"expected SequenceKind, got {kind!r}")
    n_max = int(n_max)
    if n_max < 1:
        raise ArgumentError("n_max must be >= 1")
    if kind.tag is Tag.VON_MANGOLDT:
        return ArithmeticSequence(kind, n_max, _von_mangoldt(n_max))

    flags = prime_sieve(math.isqrt(n_max))
    small = [int(p) for p in np.nonzero(flags)[0]]
    bounds = [(lo, min(lo + BLOCK, n_max + 1)) for lo in range(1, n_max + 1, BLOCK)]
    if workers and workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _sieve_block(kind, b[0], b[1], small), bounds))
    else:
        parts = [_sieve_block(kind, lo, hi, small) for lo, hi in bounds]
    values = np.concatenate([[0.0]] + parts)
    return ArithmeticSequence(kind, n_max, values)


def prefix_table(kind, n_max, workers=1):
    return PrefixTable.from_sequence(sieve(kind, n_max, workers))


def prefix_star(table, x):
    """Sum of a_n over n <= x, with a_x counted half when x is an integer."""
    x = float(x)
    if not 1.0 <= x <= table.n_max:
        raise RangeError(f"x={x} outside [1, {table.n_max}]")
    n = int(math.floor(x))
    if n == x:
        return float(table.prefix[n - 1] + 0.5 * table.values[n])
    return float(table.prefix[n])


# -- binary cache -----------------------------------------------------------


def cache_store(seq, path):
    header = _HEADER.pack(
        CACHE_MAGIC, CACHE_VERSION, int(seq.kind.tag), float(seq.kind.theta), seq.n_max
    )
    body = np.ascontiguousarray(seq.values[1:], dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


def cache_load(path, kind=None):
    """Read a cache file; when ``kind`` is given the header must match it."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4 or raw[:4] != CACHE_MAGIC:
        raise CacheMagicError(f"{path}: bad magic")
    if len(raw) < _HEADER.size:
        raise CacheTruncatedError(f"{path}: truncated header")
    magic, version, tag, theta, n_max = _HEADER.unpack_from(raw)
    if version != CACHE_VERSION:
        raise CacheVersionError(f"{path}: version {version}, expected {CACHE_VERSION}")
    if len(raw) != _HEADER.size + 8 * n_max:
        raise CacheTruncatedError(
            f"{path}: expected {n_max} values, payload has {(len(raw) - _HEADER.size) / 8}"
        )
    try:
        stored = SequenceKind(Tag(tag), theta)
    except ValueError as exc:
        raise CacheMismatchError(f"{path}: invalid kind tag {tag}") from exc
    if kind is not None and (
        stored.tag != kind.tag
        or struct.pack("<d", stored.theta) != struct.pack("<d", kind.theta)
    ):
        raise CacheMismatchError(f"{path}: holds {stored}, requested {kind}")
    values = np.empty(n_max + 1)
    values[0] = 0.0
    values[1:] = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size, count=n_max)
    return ArithmeticSequence(stored, n_max, values)
