"""Mellin transform of Delta, truncated Perron integrals and pole strengths.

The contour representation integrates D(eta) / (eta (s - eta)) / (2 pi i)
upward along a five-segment path: the vertical line Re eta = sigma3 above
+T0 and below -T0, the vertical piece Re eta = sigma1 between them, and the
two horizontal connectors.  The infinite vertical tails are cut at height H
and replaced by a certified bound.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .delta import DeltaFunction, GL_ORDER, CHUNK_INTERVALS, _pieces
from .dirichlet import coefficient_bound, dirichlet_D
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    ExtrapolationError,
)
from .main_term import circle_coefficients
from .quadrature import adaptive_kronrod, gauss_legendre, graded_edges, panel_nodes

CORE_ORDER = 32
CORE_PANEL = 1.0
TAIL_ORDER = 16
TAIL_PANEL = 2.0
NEAR = 1.0
PATH_GUARD = 1e-6
DIRECT_EPS = 0.01


@dataclass(frozen=True)
class Contour:
    """Five-segment path with vertical tails truncated at height ``H``.

    ``extra_poles`` lists (location, residue of D) for poles of D lying right
    of the path that are not part of the main term; each adds
    residue / (rho (s - rho)) to the transform.
    """

    sigma1: float
    sigma3: float
    T0: float
    H: float = 1000.0
    extra_poles: tuple = ()

    def __post_init__(self):
        if not 0 < self.sigma1 < self.sigma3:
            raise ConfigurationError("need 0 < sigma1 < sigma3")
        if not 0 < self.T0 < self.H:
            raise ConfigurationError("need 0 < T0 < H")

    def right_of(self, s):
        """True where ``s`` lies in the open region right of the path."""
        s = np.asarray(s, dtype=complex)
        return (s.real > self.sigma3) | ((s.real > self.sigma1) & (np.abs(s.imag) < self.T0))

    def distance(self, s):
        """Euclidean distance from ``s`` to the (truncated) path."""
        s = np.asarray(s, dtype=complex)
        return np.minimum.reduce([_seg_distance(s, seg) for seg in self.segments()])

    def segments(self):
        """(kind, fixed coordinate, start, end, direction) for each segment.

        Vertical segments run upward in Im eta; horizontal ones are listed
        with increasing Re eta and ``direction`` -1 where the path runs left.
        """
        s1, s3, t0, H = self.sigma1, self.sigma3, self.T0, self.H
        return (
            ("v", s3, -H, -t0, 1),
            ("h", -t0, s1, s3, -1),
            ("v", s1, -t0, t0, 1),
            ("h", t0, s1, s3, 1),
            ("v", s3, t0, H, 1),
        )


def _seg_distance(s, seg):
    kind, fixed, a, b, _ = seg
    if kind == "v":
        t = np.clip(s.imag, a, b)
        return np.abs(s - (fixed + 1j * t))
    t = np.clip(s.real, a, b)
    return np.abs(s - (t + 1j * fixed))


def default_contour(app, H=1000.0, **kw):
    return Contour(app.sigma1, app.sigma3, app.default_T0, H, **kw)


def check_contour(app, c):
    """Raise ConfigurationError unless ``c`` is admissible for ``app``."""
    if not app.sigma2 < c.sigma3:
        raise ConfigurationError(f"sigma3 = {c.sigma3} must exceed sigma2 = {app.sigma2}")
    for rho, _ in app.poles:
        rho = complex(rho)
        if not bool(c.right_of(rho)) or float(c.distance(rho)) < PATH_GUARD:
            raise ConfigurationError(f"pole {rho} is not strictly right of the path")


# -- contour quadrature ------------------------------------------------------


def _bandwidth(app, seg):
    """Largest frequency of D along a segment (its leftmost abscissa)."""
    kind, fixed, a, _, _ = seg
    return app.bandwidth(fixed if kind == "v" else a)


def _foci(app, seg, extra=()):
    """Graded-refinement targets on a segment: nearby singularities of the
    integrand, given as (parameter value, distance)."""
    kind, fixed, a, b, _ = seg
    pts = app.all_singularities() + [0j] + [complex(e) for e in extra]
    out = []
    for z in pts:
        if kind == "v":
            t, dist = z.imag, abs(z.real - fixed)
        else:
            t, dist = z.real, abs(z.imag - fixed)
        if a - NEAR <= t <= b + NEAR and dist < NEAR:
            out.append((t, dist))
    return tuple(sorted(out))


def _seg_nodes(seg, focus, tail, bandwidth=None):
    kind, fixed, a, b, direction = seg
    order, max_len = (TAIL_ORDER, TAIL_PANEL) if tail else (CORE_ORDER, CORE_PANEL)
    if bandwidth:
        # Gauss rules of n nodes resolve about n phase radians per panel
        max_len = min(max_len, order / bandwidth)
    edges = graded_edges(a, b, max_len, focus)
    t, w = panel_nodes(edges, order)
    t, w = t.ravel(), w.ravel()
    if kind == "v":
        eta = fixed + 1j * t
        # d eta / (2 pi i) = dt / (2 pi)
        wt = w / (2 * np.pi) + 0j
    else:
        eta = t + 1j * fixed
        wt = direction * w / (2j * np.pi)
    return eta, wt


_TAIL_CACHE = {}


def _app_key(app):
    return (app, id(app.series))


def _tail_values(app, seg, focus):
    """D along an upper vertical tail, cached per application and segment."""
    key = (_app_key(app), seg, focus)
    hit = _TAIL_CACHE.get(key)
    if hit is None:
        eta, wt = _seg_nodes(seg, focus, True, _bandwidth(app, seg))
        if len(_TAIL_CACHE) > 32:
            _TAIL_CACHE.clear()
        hit = (eta, wt, dirichlet_D(app, eta))
        _TAIL_CACHE[key] = hit
    return hit


class ContourQuadrature:
    """Nodes, weights and D values along a contour, reusable across many s."""

    def __init__(self, app, contour):
        self.app = app
        self.contour = contour
        self.parts = []
        real_series = app.series is None
        segs = contour.segments()
        for idx, seg in enumerate(segs):
            focus = _foci(app, seg)
            tail = idx in (0, 4)
            if tail and real_series and idx == 0:
                # lower tail: conjugate of the upper one for real coefficients
                up = segs[4]
                eta_u, wt_u, d_u = _tail_values(app, up, _foci(app, up))
                eta, wt, dv = np.conj(eta_u[::-1]), wt_u[::-1], np.conj(d_u[::-1])
            elif tail and real_series:
                eta, wt, dv = _tail_values(app, seg, focus)
            else:
                eta, wt = _seg_nodes(seg, focus, tail, _bandwidth(app, seg))
                dv = dirichlet_D(app, eta)
            self.parts.append((seg, focus, tail, eta, wt * dv / eta))

    def tail_bound(self, s):
        """Bound on the two vertical pieces beyond height H.

        |D(sigma3 + iv)| <= B := sum |a_n| n^-sigma3, |eta| >= v and
        |s - eta| >= v - |Im s| give (B/pi) (1/a) log(H/(H - a)), a = |Im s|.
        """
        c = self.contour
        if self.app.series is None:
            B = coefficient_bound(self.app, c.sigma3)
        else:
            # injected series: sampled maximum along the truncated tails
            B = float(max(np.max(np.abs(dirichlet_D(self.app, p[3]))) for p in self.parts if p[2]))
        a = np.abs(np.asarray(s, dtype=complex).imag)
        if np.any(a >= c.H):
            raise DomainError("|Im s| must be below the truncation height")
        small = a < 1e-9 * c.H
        safe = np.where(small, 1.0, a)
        val = np.where(small, 1.0 / c.H, np.log(c.H / (c.H - safe)) / safe)
        return B / np.pi * val

    def __call__(self, s):
        """(value, error bound) for scalar or array ``s`` right of the path."""
        arr = np.asarray(s, dtype=complex)
        flat = arr.ravel()
        c = self.contour
        if not np.all(c.right_of(flat)):
            raise DomainError("s must lie strictly right of the contour path")
        dist = c.distance(flat)
        if np.any(dist < PATH_GUARD):
            raise DomainError("s is within 1e-6 of the contour path")
        vals = np.zeros(flat.shape, dtype=complex)
        absum = np.zeros(flat.shape)
        far = dist >= NEAR
        if far.any():
            v, a = self._sum(flat[far], [p[3:] for p in self.parts])
            vals[far], absum[far] = v, a
        for i in np.nonzero(~far)[0]:
            v, a = self._sum(flat[i : i + 1], self._refined(flat[i]))
            vals[i], absum[i] = v[0], a[0]
        for rho, res in c.extra_poles:
            rho = complex(rho)
            vals += complex(res) / (rho * (flat - rho))
        err = self.tail_bound(flat) + 1e-13 * absum
        vals = vals.reshape(arr.shape)
        err = err.reshape(arr.shape)
        if arr.ndim == 0:
            return complex(vals), float(err)
        return vals, err

    def _refined(self, s):
        out = []
        for seg, focus, tail, eta, wdv in self.parts:
            if float(_seg_distance(np.asarray(s), seg)) >= NEAR:
                out.append((eta, wdv))
                continue
            f = _foci(self.app, seg, extra=(s,))
            e, w = _seg_nodes(seg, f, tail, _bandwidth(self.app, seg))
            out.append((e, w * dirichlet_D(self.app, e) / e))
        return out

    @staticmethod
    def _sum(s, parts):
        vals = np.zeros(s.shape, dtype=complex)
        absum = np.zeros(s.shape)
        for eta, wdv in parts:
            for i in range(0, s.size, 64):
                blk = s[i : i + 64, None]
                terms = wdv / (blk - eta)
                vals[i : i + 64] += terms.sum(axis=1)
                absum[i : i + 64] += np.abs(terms).sum(axis=1)
        return vals, absum


def mellin_contour(app, c, s):
    """Mellin transform of Delta at ``s`` from the contour representation.

    Returns (value, error bound); arrays of ``s`` are supported.
    """
    check_contour(app, c)
    return ContourQuadrature(app, c)(s)


# -- direct transform --------------------------------------------------------


def _split_pieces(lo, hi, rate):
    """Split [lo, hi] pieces into equal parts with rate * log(hi/lo) <= 1 each."""
    m = np.maximum(1, np.ceil(rate * np.log(hi / lo))).astype(np.int64)
    if np.all(m == 1):
        return lo, hi
    idx = np.repeat(np.arange(lo.size), m)
    j = np.arange(idx.size) - np.repeat(np.cumsum(m) - m, m)
    step = (hi - lo)[idx] / m[idx]
    new_lo = lo[idx] + j * step
    new_hi = np.where(j == m[idx] - 1, hi[idx], new_lo + step)
    return new_lo, new_hi


def mellin_direct(d, s, x_max=None, sigma2=1.0):
    """Integral of Delta(x) x^(-s-1) over [1, x_max]; returns (value, bound).

    The bound adds C x_max^(sigma2 + eps - Re s) / (Re s - sigma2 - eps), with
    C the largest observed |Delta(x)| / x^(sigma2 + eps), to a rounding
    allowance proportional to the integral of |integrand|.  Unit pieces near
    x = 1 are split so that x^(-s-1) changes its exponent by at most 1 per
    panel.
    """
    arr = np.asarray(s, dtype=complex)
    flat = arr.ravel()
    if np.any(flat.real <= sigma2):
        raise ConvergenceError(f"direct transform needs Re s > sigma2 = {sigma2}")
    x_max = float(d.n_max if x_max is None else x_max)
    d._check(1.0, x_max)
    lo, hi = _split_pieces(*_pieces(1.0, x_max), float(np.max(np.abs(flat + 1.0))))
    xg, wg = gauss_legendre(GL_ORDER)
    vals = np.zeros(flat.shape, dtype=complex)
    absum = np.zeros(flat.shape)
    parts = [[] for _ in range(flat.size)]
    c_max = 0.0
    expo = sigma2 + DIRECT_EPS
    for i in range(0, lo.size, CHUNK_INTERVALS):
        a, b = lo[i : i + CHUNK_INTERVALS], hi[i : i + CHUNK_INTERVALS]
        h = (b - a)[:, None]
        x = (a[:, None] + h * xg).ravel()
        w = (h * wg).ravel()
        n = np.repeat(np.floor(a).astype(np.int64), GL_ORDER)
        delta = d.on_piece(n, x)
        lx = np.log(x)
        c_max = max(c_max, float(np.max(np.abs(delta) * np.exp(-expo * lx))))
        wd = w * delta
        for k, sk in enumerate(flat):
            terms = wd * np.exp(-(sk + 1.0) * lx)
            parts[k].append(terms.sum())
            absum[k] += float(np.abs(terms).sum())
    for k in range(flat.size):
        re = math.fsum(p.real for p in parts[k])
        im = math.fsum(p.imag for p in parts[k])
        vals[k] = complex(re, im)
    gap = flat.real - expo
    tail = c_max * x_max ** (-gap) / gap
    err = tail + 1e-13 * absum
    if arr.ndim == 0:
        return complex(vals[0]), float(err[0])
    return vals.reshape(arr.shape), err.reshape(arr.shape)


# -- truncated Perron --------------------------------------------------------


def perron_truncated(app, x, line_sigma, H, rtol=1e-8):
    """Delta(x) from the line integral of D(eta) x^eta / eta at Re eta = line_sigma.

    Uses (1/pi) times the integral over [0, H] of Re[D x^eta / eta], valid for
    series with real coefficients; the main-term poles lie right of the line.
    """
    x, c, H = float(x), float(line_sigma), float(H)
    if x <= 1:
        raise DomainError("Perron reconstruction needs x > 1")
    for z in app.all_singularities() + [0j]:
        if abs(z.real - c) < 1e-9 and abs(z.imag) <= H:
            raise ConfigurationError(f"singularity {z} lies on the line Re = {c}")
    for rho, _ in app.poles:
        if not complex(rho).real > c:
            raise ConfigurationError(f"pole {rho} is not right of the line")
    lx = math.log(x)
    panel = math.pi / (2 * lx)
    edges = np.linspace(0.0, H, max(1, int(math.ceil(H / panel))) + 1)

    def f(t):
        eta = c + 1j * t
        return (dirichlet_D(app, eta) * np.exp(eta * lx) / eta).real

    scale = x**c
    val, _ = adaptive_kronrod(f, edges, rtol=rtol, atol=1e-10 * scale)
    return val / math.pi


# -- pole strength ---------------------------------------------------------


@dataclass(frozen=True)
class PoleStrength:
    """Probe data and both estimates of lim (sigma - sigma0) |A(sigma + i t0)|."""

    point: complex
    offsets: tuple
    values: tuple
    scaled: tuple
    extrapolated: tuple
    value: float
    spread: float
    residue_estimate: float | None = None
    residue: complex | None = None
    errors: tuple = field(default=())

    def diagnostics_csv(self):
        lines = ["sigma_offset,abs_A,scaled"]
        for o, v, sc in zip(self.offsets, self.values, self.scaled):
            lines.append(f"{o:.17g},{v:.17g},{sc:.17g}")
        return "\n".join(lines) + "\n"


def residue_of_D(app, rho, radius=1e-2):
    """Residue of D at a simple pole ``rho`` by circle quadrature."""
    return circle_coefficients(lambda z: dirichlet_D(app, z), complex(rho), 1, radius)[0]


def pole_strength(app, c, sigma0, t0, mellin=None, levels=range(4, 13), max_spread=0.1):
    """Extrapolate (sigma - sigma0) |A(sigma + i t0)| to sigma -> sigma0.

    Probes sit at offsets 2^-j.  Without an injected ``mellin`` each probe
    uses ``c`` with its vertical piece moved to sigma0 + offset/2, so the
    path runs between the probe and the singularity and the transform is a
    pure contour integral; this needs |t0| < c.T0.  First-order Richardson
    steps 2 f(h/2) - f(h) remove the linear term.  If the last three
    extrapolants spread by more than ``max_spread`` relative, an
    ExtrapolationError carrying the full result is raised.
    """
    point = complex(sigma0, t0)
    offsets = tuple(2.0 ** -j for j in levels)
    vals, errs = [], []
    if mellin is None:
        if not abs(t0) < c.T0:
            raise ConfigurationError("pole_strength needs |t0| < T0 so the path can pass between")
        for off in offsets:
            cc = replace(c, sigma1=sigma0 + off / 2)
            check_contour(app, cc)
            v, e = ContourQuadrature(app, cc)(point + off)
            vals.append(abs(v))
            errs.append(e)
    else:
        for off in offsets:
            vals.append(abs(complex(mellin(point + off))))
            errs.append(0.0)
    scaled = [o * v for o, v in zip(offsets, vals)]
    extr = [2 * scaled[i + 1] - scaled[i] for i in range(len(scaled) - 1)]
    tail = extr[-3:]
    value = tail[-1]
    spread = (max(tail) - min(tail)) / abs(np.mean(tail)) if np.mean(tail) else math.inf
    res_est = residue = None
    if mellin is None:
        try:
            residue = residue_of_D(app, point)
            res_est = abs(residue) / abs(point)
        except Exception:  # estimate is optional; the probe data stands alone
            residue = res_est = None
    result = PoleStrength(
        point, offsets, tuple(vals), tuple(scaled), tuple(extr), float(value), float(spread),
        res_est, residue, tuple(errs),
    )
    if not spread <= max_spread:
        raise ExtrapolationError(f"probe sequence did not settle (spread {spread:.3g})", result)
    return result
