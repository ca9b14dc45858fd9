"""Dirichlet series of the five sequences and their application parameters."""

from dataclasses import dataclass, field, replace
import math
from typing import Callable

import numpy as np

from . import sieve as sv
from .errors import ArgumentError, ConfigurationError, PoleError
from .zeta import EULER_PRODUCT_ABSCISSA, log_zeta_high, zeta, zeta_and_prime, zeta_constants

POLE_GUARD = 1e-9
DEFAULT_TRUNCATION = 64
TAIL_CUTOFF = 1e-14


@dataclass(frozen=True)
class ApplicationSpec:
    """A sequence kind with its pole set and strip constants.

    ``poles`` lists ``(location, order)`` for the poles feeding the main term.
    ``singularities`` lists further known poles of D(s) (not in the main
    term) that configuration checks must keep clear of.  ``series`` replaces
    the built-in evaluator; it is how synthetic test series are injected.
    """

    kind: sv.SequenceKind | None
    poles: tuple
    sigma1: float
    sigma2: float
    sigma3: float
    product_truncation: int = DEFAULT_TRUNCATION
    default_T0: float = 2.0
    singularities: tuple = ()
    series: Callable | None = field(default=None, compare=False)
    name: str = ""

    def __post_init__(self):
        if not 0 < self.sigma1 < self.sigma2 < self.sigma3:
            raise ConfigurationError(
                f"need 0 < sigma1 < sigma2 < sigma3, got {self.sigma1}, {self.sigma2}, {self.sigma3}"
            )
        for rho, order in self.poles:
            if int(order) < 1:
                raise ConfigurationError(f"pole order must be positive, got {order}")
            if not self.sigma1 < complex(rho).real <= self.sigma2:
                raise ConfigurationError(
                    f"pole {rho} outside sigma1 < Re <= sigma2 = ({self.sigma1}, {self.sigma2}]"
                )

    def bandwidth(self, sigma):
        """Highest frequency (in Im eta) carried by D on Re eta = sigma, or
        None when D varies on the scale of zeta itself.

        The ABELIAN product holds zeta(k eta) for many k; the 2^(-k eta)
        term oscillates at k log 2 with weight 2^(-k sigma), which stays
        above 1e-14 up to frequency log(1e14) / sigma.
        """
        if self.kind is not None and self.kind.tag is sv.Tag.ABELIAN:
            return math.log(1e14) / sigma
        return None

    def all_singularities(self):
        return [complex(r) for r, _ in self.poles] + [complex(z) for z in self.singularities]


def _first_zero_images(scale):
    """Poles of 1/zeta(scale * s) coming from the first zero and its conjugate."""
    rho = zeta_constants().two_s0
    return (rho / scale, rho.conjugate() / scale)


def application(kind, theta=1.0, **overrides):
    """ApplicationSpec with the default strip constants for ``kind``.

    ``kind`` is a SequenceKind or one of the names divisor, squarefree,
    twisted, von_mangoldt, abelian.
    """
    if isinstance(kind, str):
        kind = kind_from_name(kind, theta)
    tag = kind.tag
    if tag is sv.Tag.DIVISOR:
        spec = dict(poles=((1.0, 2),), sigma1=0.5, default_T0=2.0)
    elif tag is sv.Tag.SQUAREFREE_DIVISORS:
        spec = dict(
            poles=((1.0, 2),), sigma1=0.2, default_T0=3.0, singularities=_first_zero_images(2)
        )
    elif tag is sv.Tag.TWISTED:
        th = abs(kind.theta)
        spec = dict(
            poles=((1.0, 2), (complex(1, th), 1), (complex(1, -th), 1)),
            sigma1=0.2,
            default_T0=th + 1.0,
            singularities=_first_zero_images(2),
        )
    elif tag is sv.Tag.VON_MANGOLDT:
        spec = dict(
            poles=((1.0, 1),), sigma1=0.35, default_T0=13.0, singularities=_first_zero_images(1)
        )
    else:
        spec = dict(
            poles=tuple((1.0 / k, 1) for k in range(1, 7)),
            sigma1=1.0 / 7 + 0.01,
            default_T0=2.0,
            singularities=(1.0 / 7,),
        )
    spec.update(sigma2=1.0, sigma3=2.0, name=kind.name)
    spec.update(overrides)
    return ApplicationSpec(kind=kind, **spec)


def kind_from_name(name, theta=1.0):
    key = name.strip().lower().replace("-", "_")
    table = {
        "divisor": sv.DIVISOR,
        "squarefree": sv.SQUAREFREE,
        "squarefree_divisors": sv.SQUAREFREE,
        "von_mangoldt": sv.VON_MANGOLDT,
        "pnt": sv.VON_MANGOLDT,
        "abelian": sv.ABELIAN,
    }
    if key == "twisted":
        return sv.twisted(theta)
    if key not in table:
        raise ArgumentError(f"unknown application {name!r}")
    return table[key]


def synthetic_application(series, poles=(), sigma1=0.5, sigma2=1.0, sigma3=2.0, **kw):
    """ApplicationSpec around an arbitrary evaluator (tests, experiments)."""
    return ApplicationSpec(
        kind=None, poles=tuple(poles), sigma1=sigma1, sigma2=sigma2, sigma3=sigma3,
        series=series, name=kw.pop("name", "synthetic"), **kw,
    )


def with_sigma(app, **kw):
    return replace(app, **kw)


def _abelian(s, K):
    """prod_k zeta(k s), the factors with Re(ks) >= 8 taken from Euler products."""
    s = np.asarray(s, dtype=complex)
    sig = float(s.real.min())
    if sig <= 0:
        raise ArgumentError("ABELIAN series evaluated only for Re s > 0")
    log_high = np.zeros(s.shape, dtype=complex)
    prod = np.ones(s.shape, dtype=complex)
    k_high = max(1, math.ceil(EULER_PRODUCT_ABSCISSA / sig))
    for k in range(1, min(K, k_high - 1) + 1):
        w = k * s
        lowpart = w.real < EULER_PRODUCT_ABSCISSA
        if lowpart.all():
            prod = prod * zeta(w)
        else:
            vals = np.empty(s.shape, dtype=complex)
            vals[lowpart] = zeta(w[lowpart])
            vals[~lowpart] = np.exp(log_zeta_high(w[~lowpart]))
            prod = prod * vals
    for k in range(max(1, k_high), K + 1):
        log_high += log_zeta_high(k * s)
    # tail k > K: |log zeta(ks)| <= 2^(1-k sigma); stop once the remaining
    # geometric bound drops below the cutoff
    k = K + 1
    while 2.0 ** (1 - k * sig) / (1 - 2.0 ** (-sig)) >= TAIL_CUTOFF:
        w = k * s
        if w.real.min() >= EULER_PRODUCT_ABSCISSA:
            log_high += log_zeta_high(w)
        else:
            log_high += np.log(zeta(w))
        k += 1
    return prod * np.exp(log_high)


def _builtin(app, s):
    tag = app.kind.tag
    if tag is sv.Tag.DIVISOR:
        return zeta(s) ** 2
    if tag is sv.Tag.SQUAREFREE_DIVISORS:
        return zeta(s) ** 2 / zeta(2 * s)
    if tag is sv.Tag.TWISTED:
        th = app.kind.theta
        return zeta(s) ** 2 * zeta(s + 1j * th) * zeta(s - 1j * th) / zeta(2 * s)
    if tag is sv.Tag.VON_MANGOLDT:
        z, dz = zeta_and_prime(s)
        return -dz / z
    return _abelian(s, app.product_truncation)


def dirichlet_D(app, s):
    """Value of the (continued) Dirichlet series of ``app`` at ``s``."""
    arr = np.asarray(s, dtype=complex)
    flat = arr.ravel()
    for rho, _ in app.poles:
        if np.any(np.abs(flat - rho) < POLE_GUARD):
            raise PoleError(f"evaluation within {POLE_GUARD} of the pole {rho}")
    if app.kind is not None and app.kind.tag is sv.Tag.ABELIAN:
        for k in range(1, app.product_truncation + 1):
            if np.any(np.abs(k * flat - 1.0) < POLE_GUARD):
                raise PoleError(f"zeta({k}s) has a pole at s = 1/{k}")
    if app.series is not None:
        out = np.asarray(app.series(flat), dtype=complex)
        out = np.broadcast_to(out, flat.shape)
    else:
        out = _builtin(app, flat)
    out = np.asarray(out, dtype=complex).reshape(arr.shape)
    return complex(out) if arr.ndim == 0 else out


def coefficient_bound(app, sigma):
    """sum |a_n| n^-sigma, an upper bound for |D| on Re s = sigma > sigma2."""
    if app.series is not None:
        raise ConfigurationError("no coefficient bound for an injected series")
    return abs(dirichlet_D(app, complex(sigma, 0.0)))
