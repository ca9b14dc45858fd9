"""The error term Delta(x) = Sigma*_{n<=x} a_n - M(x) and its statistics.

Delta is smooth on every open interval (n, n+1) and jumps at the integers,
so integrals use Gauss-Legendre rules per unit interval and root searches
bracket on a fixed set of samples per interval.
"""

from dataclasses import asdict, dataclass, field
import enum
import json
import math

import numpy as np
from scipy import optimize

from .errors import ArgumentError, DegeneratePredictionError, RangeError
from .main_term import MainTermExpr, eval_main_term
from .quadrature import adaptive_kronrod, gauss_legendre

GL_ORDER = 16
INTERIOR_SAMPLES = 8
BISECTION_TOL = 1e-9
CHUNK_INTERVALS = 1 << 14
SMOOTH_CUTOFF = 1e-16
POWER_CUTOFF = 1e-18


class Side(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"
    ABS = "abs"


class AlphaMode(enum.Enum):
    CONSTANT = "constant"
    PAPER_FORM = "paper_form"


@dataclass(frozen=True)
class AlphaSpec:
    """Threshold exponent: a constant, or 3/8 - c/(log T)^(1/8)."""

    mode: AlphaMode = AlphaMode.CONSTANT
    alpha0: float = 0.25
    c: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "mode", AlphaMode(self.mode))
        if self.mode is AlphaMode.PAPER_FORM and not self.c > 0:
            raise ArgumentError("PAPER_FORM needs c > 0")

    def at(self, T):
        if self.mode is AlphaMode.CONSTANT:
            return float(self.alpha0)
        if not T > 1:
            raise ArgumentError("PAPER_FORM needs log T > 0")
        a = 3.0 / 8.0 - self.c / math.log(T) ** 0.125
        if not 0 < a < 3.0 / 8.0:
            raise ArgumentError(f"alpha(T) = {a} outside (0, 3/8); increase T or decrease c")
        return a

    def describe(self):
        if self.mode is AlphaMode.CONSTANT:
            return f"constant:{self.alpha0!r}"
        return f"paper_form:c={self.c!r}"


@dataclass(frozen=True, eq=False)
class DeltaFunction:
    """Delta(x) for a prefix table and a main term on [1, n_max]."""

    table: object
    main: MainTermExpr

    @property
    def n_max(self):
        return self.table.n_max

    def _check(self, lo, hi):
        if lo < 1.0 or hi > self.n_max or lo > hi:
            raise RangeError(f"[{lo}, {hi}] not inside the domain [1, {self.n_max}]")

    def main_at(self, x):
        return eval_main_term(self.main, x)

    def on_piece(self, n, x):
        """Delta on the open interval (n, n+1); ``n`` and ``x`` broadcast."""
        return self.table.prefix[n] - eval_main_term(self.main, x)

    def __call__(self, x):
        return delta_at(self, x)

    def left_limit(self, n):
        """Delta(n-) at integers n >= 2."""
        n = np.asarray(n, dtype=np.int64)
        return self.table.prefix[n - 1] - eval_main_term(self.main, n.astype(float))

    def right_limit(self, n):
        """Delta(n+) at integers n <= n_max - 1 (also valid at n_max)."""
        n = np.asarray(n, dtype=np.int64)
        return self.table.prefix[n] - eval_main_term(self.main, n.astype(float))


def delta_at(d, x):
    """Delta at scalar or array ``x``; integers use the half-weight convention."""
    arr = np.asarray(x, dtype=float)
    if arr.size and (arr.min() < 1.0 or arr.max() > d.n_max):
        raise RangeError(f"x outside the domain [1, {d.n_max}]")
    n = np.floor(arr).astype(np.int64)
    s = d.table.prefix[n] - np.where(arr == n, 0.5 * d.table.values[n], 0.0)
    out = s - eval_main_term(d.main, arr)
    return float(out) if arr.ndim == 0 else out


def _pieces(T1, T2):
    """Unit pieces [lo, hi] covering [T1, T2], split at the integers."""
    inner = np.arange(math.floor(T1) + 1, math.ceil(T2), dtype=float)
    edges = np.concatenate([[T1], inner[(inner > T1) & (inner < T2)], [T2]])
    return edges[:-1], edges[1:]


def _piece_integral(d, lo, hi, integrand):
    """Sum over pieces of GL16 integrals of integrand(delta, x), in fixed order."""
    xg, wg = gauss_legendre(GL_ORDER)
    partial = []
    for i in range(0, lo.size, CHUNK_INTERVALS):
        a, b = lo[i : i + CHUNK_INTERVALS], hi[i : i + CHUNK_INTERVALS]
        h = (b - a)[:, None]
        x = a[:, None] + h * xg
        n = np.floor(a).astype(np.int64)[:, None]
        delta = d.on_piece(n, x)
        partial.append(float((integrand(delta, x) * (h * wg)).sum()))
    return math.fsum(partial)


def moment_integral(d, T, k=2, weight_alpha=None, smoothing_y=None, T2=None):
    """Moments of Delta over a dyadic window, optionally weighted and smoothed.

    Unweighted: the integral of Delta^k over [T, 2T] (or [T, T2]).
    Weighted: Delta^2 x^(-2 alpha - 1), and with ``smoothing_y`` also
    e^(-2x/y), integrated over [T, X_max] where
    X_max = min(n_max, (y/2) log(1e16) + T).
    """
    if k not in (2, 4):
        raise ArgumentError("moment order must be 2 or 4")
    if weight_alpha is None and smoothing_y is None:
        hi = 2.0 * T if T2 is None else T2
        d._check(T, hi)
        lo, up = _pieces(float(T), float(hi))
        return _piece_integral(d, lo, up, lambda v, x: v**k)
    alpha = 0.0 if weight_alpha is None else float(weight_alpha)
    if smoothing_y is None:
        hi = 2.0 * T if T2 is None else T2
        d._check(T, hi)
        lo, up = _pieces(float(T), float(hi))
        return _piece_integral(d, lo, up, lambda v, x: v**2 * x ** (-2 * alpha - 1))
    y = float(smoothing_y)
    if y <= 0:
        raise ArgumentError("smoothing_y must be positive")
    x_max = min(float(d.n_max), 0.5 * y * math.log(1.0 / SMOOTH_CUTOFF) + T)
    d._check(T, x_max)
    lo, up = _pieces(float(T), x_max)
    return _piece_integral(
        d, lo, up, lambda v, x: v**2 * x ** (-2 * alpha - 1) * np.exp(-2.0 * x / y)
    )


@dataclass(frozen=True)
class SmoothedPowerResult:
    value: complex
    error: float
    prediction: complex | None


def smoothed_power_integral(T, y, z, predict=True):
    """Integral of e^(-u/y) u^(-z) over [T, infinity).

    Computed after the substitution u = e^w, which turns the oscillation of
    u^(-i Im z) into a constant frequency, and truncated where e^(-u/y) drops
    below 1e-18.  The prediction is the leading term -T^(1-z)/(1-z) of the
    small-T/y expansion, reported when |Im z| >= (log T)^2.
    """
    T, y, z = float(T), float(y), complex(z)
    if T < 1 or y <= 0 or not 0 <= z.real <= 1:
        raise ArgumentError("need T >= 1, y > 0 and 0 <= Re z <= 1")
    u_end = T + y * math.log(1.0 / POWER_CUTOFF)
    prediction = None
    want = predict and abs(z.imag) >= math.log(T) ** 2
    if want and z == 1:
        value, err = _power_quad(T, y, z, u_end)
        raise DegeneratePredictionError("prediction undefined at z = 1", complex(value))
    value, err = _power_quad(T, y, z, u_end)
    if want:
        prediction = -(T ** (1 - z)) / (1 - z)
    return SmoothedPowerResult(complex(value), float(err), prediction)


def _power_quad(T, y, z, u_end):
    w0, w1 = math.log(T), math.log(u_end)
    # about 8 panels per oscillation period and at least 64 panels overall
    period = 2 * math.pi / max(abs(z.imag), 1e-300)
    n = int(min(max(64, 8 * (w1 - w0) / period), 1e6))
    edges = np.linspace(w0, w1, n + 1)
    one_minus = 1.0 - z

    def f(w):
        return np.exp(one_minus * w - np.exp(w) / y)

    # cancellation limits the attainable accuracy to the rounding of the
    # phase (Im z) w times the integrand's magnitude
    mid = 0.5 * (edges[:-1] + edges[1:])
    phase = max(1.0, abs(z.imag) * w1)
    atol = 1e-14 * phase * float(np.abs(f(mid)).sum() * (edges[1] - edges[0]))
    re, e1 = adaptive_kronrod(lambda w: f(w).real, edges, rtol=1e-13, atol=atol)
    im, e2 = adaptive_kronrod(lambda w: f(w).imag, edges, rtol=1e-13, atol=atol)
    return complex(re, im), float(e1 + e2)


# -- fluctuation sets ---------------------------------------------------------


def _h(d, side, lam, alpha):
    def h(delta, x):
        thr = lam * x**alpha
        if side is Side.PLUS:
            return delta - thr
        if side is Side.MINUS:
            return -delta - thr
        return np.abs(delta) - thr

    return h


def _sample_grid(lo, hi):
    """Sample abscissae per piece: both endpoints plus interior points."""
    t = np.linspace(0.0, 1.0, INTERIOR_SAMPLES + 2)
    return lo[:, None] + (hi - lo)[:, None] * t


def _bisect(fn, a, b, fa):
    """Vectorized bisection for sign changes of ``fn`` on [a, b]."""
    a, b = a.copy(), b.copy()
    pos_a = fa > 0
    while a.size and np.max(b - a) > BISECTION_TOL:
        m = 0.5 * (a + b)
        fm = fn(m)
        same = (fm > 0) == pos_a
        a = np.where(same, m, a)
        b = np.where(same, b, m)
    return 0.5 * (a + b)


def _noise_floor(d, x):
    """Rounding level of Delta near ``x``: values below it carry no sign."""
    return 64 * np.finfo(float).eps * (1.0 + np.abs(eval_main_term(d.main, x)))


def _piece_scan(d, lo, hi, h):
    """h values on the sample grid, using the piece's smooth branch throughout
    (the one-sided limits at the endpoints)."""
    x = _sample_grid(lo, hi)
    n = np.floor(lo).astype(np.int64)[:, None]
    return x, n, h(d.on_piece(n, x), x)


def measure_above(d, T, lam, alpha, side=Side.ABS, T2=None):
    """Lebesgue measure of {x in [T, 2T] : h(x) > 0}.

    h is Delta - lam x^alpha (PLUS), -Delta - lam x^alpha (MINUS) or
    |Delta| - lam x^alpha (ABS); alpha is frozen at its value for T.
    """
    side = Side(side)
    if lam < 0:
        raise ArgumentError("lambda must be non-negative")
    hi_end = 2.0 * T if T2 is None else T2
    d._check(T, hi_end)
    a_exp = alpha.at(T) if isinstance(alpha, AlphaSpec) else float(alpha)
    h = _h(d, side, float(lam), a_exp)
    lo, hi = _pieces(float(T), float(hi_end))
    total = []
    for i in range(0, lo.size, CHUNK_INTERVALS):
        total.append(_measure_chunk(d, lo[i : i + CHUNK_INTERVALS], hi[i : i + CHUNK_INTERVALS], h))
    return math.fsum(total)


def _measure_chunk(d, lo, hi, h):
    x, n, v = _piece_scan(d, lo, hi, h)
    rows, cols = np.nonzero((v[:, :-1] > 0) != (v[:, 1:] > 0))
    cuts = np.zeros(0)
    if rows.size:
        nn = n[rows, 0]
        fn = lambda t: h(d.on_piece(nn, t), t)
        cuts = _bisect(fn, x[rows, cols], x[rows, cols + 1], v[rows, cols])
    # walk each sample segment; a segment counts where its sign is positive
    seg_len = np.diff(x, axis=1)
    pos_left = v[:, :-1] > 0
    pos_right = v[:, 1:] > 0
    length = np.where(pos_left & pos_right, seg_len, 0.0)
    if rows.size:
        left = x[rows, cols]
        right = x[rows, cols + 1]
        partial = np.where(pos_left[rows, cols], cuts - left, right - cuts)
        length[rows, cols] = partial
    return float(length.sum())


def sign_changes(d, T1, T2):
    """Abscissae in [T1, T2] where Delta changes sign, strictly increasing.

    Interior crossings are located by bisection on the sample grid.  At an
    integer n the value just left of n is compared with the value just right
    of it, with zero counted as non-negative; at the window ends the
    half-weight value Delta(n) stands in for the side outside the window.
    Values within rounding noise of zero count as zero.
    """
    T1, T2 = float(T1), float(T2)
    d._check(T1, T2)
    out = []
    lo, hi = _pieces(T1, T2)
    for i in range(0, lo.size, CHUNK_INTERVALS):
        a, b = lo[i : i + CHUNK_INTERVALS], hi[i : i + CHUNK_INTERVALS]
        x, n, v = _piece_scan(d, a, b, lambda delta, t: delta)
        v = np.where(np.abs(v) <= _noise_floor(d, x), 0.0, v)
        rows, cols = np.nonzero(v[:, :-1] * v[:, 1:] < 0)
        if rows.size:
            nn = n[rows, 0]
            roots = _bisect(
                lambda t: d.on_piece(nn, t), x[rows, cols], x[rows, cols + 1], v[rows, cols]
            )
            out.append(roots)
    ints = np.arange(math.ceil(T1), math.floor(T2) + 1, dtype=np.int64)
    if ints.size:
        at = delta_at(d, ints.astype(float))
        left = np.where(ints > T1, d.left_limit(np.maximum(ints, 2)), at)
        right = np.where(ints < T2, d.right_limit(ints), at)
        floor = _noise_floor(d, ints.astype(float))
        jumps = ints[(left < -floor) != (right < -floor)].astype(float)
        out.append(jumps)
    if not out:
        return []
    xs = np.unique(np.concatenate(out))
    return [float(v) for v in xs]


def max_scaled(d, T, alpha, T2=None):
    """max |Delta(x)| / x^alpha over [T, 2T] with its location.

    Coarse samples on every piece, then a bounded scalar search on the best
    few pieces.
    """
    hi_end = 2.0 * T if T2 is None else T2
    d._check(T, hi_end)
    a_exp = alpha.at(T) if isinstance(alpha, AlphaSpec) else float(alpha)
    lo, hi = _pieces(float(T), float(hi_end))
    best_val, best_x = -1.0, float(T)
    candidates = []
    for i in range(0, lo.size, CHUNK_INTERVALS):
        a, b = lo[i : i + CHUNK_INTERVALS], hi[i : i + CHUNK_INTERVALS]
        x, n, v = _piece_scan(d, a, b, lambda delta, t: np.abs(delta) * t ** (-a_exp))
        r, c = np.unravel_index(np.argmax(v), v.shape)
        if v[r, c] > best_val:
            best_val, best_x = float(v[r, c]), float(x[r, c])
        top = np.argsort(v.max(axis=1))[-4:]
        candidates.extend((float(a[j]), float(b[j]), int(n[j, 0])) for j in top)
    for a, b, n in candidates:
        if b - a < 1e-12:
            continue
        res = optimize.minimize_scalar(
            lambda t: -abs(float(d.on_piece(n, t))) * t ** (-a_exp),
            bounds=(a, b),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if -res.fun > best_val:
            best_val, best_x = float(-res.fun), float(res.x)
    return best_val, best_x


# -- report ---------------------------------------------------------------------

CSV_COLUMNS = (
    "T",
    "lambda",
    "alpha",
    "moment2",
    "moment4",
    "measure_plus",
    "measure_minus",
    "measure_abs",
    "n_sign_changes",
    "max_scaled",
)


@dataclass(frozen=True)
class FluctuationReport:
    T: float
    T2: float
    moment2: float
    moment4: float
    measure_plus: float
    measure_minus: float
    measure_abs: float
    sign_changes: tuple
    max_scaled: float
    max_location: float
    lam: float
    alpha: float
    alpha_spec: AlphaSpec
    extras: dict = field(default_factory=dict)

    def csv_row(self):
        vals = (
            self.T,
            self.lam,
            self.alpha,
            self.moment2,
            self.moment4,
            self.measure_plus,
            self.measure_minus,
            self.measure_abs,
            len(self.sign_changes),
            self.max_scaled,
        )
        return ",".join(format_number(v) for v in vals)

    def to_dict(self):
        out = asdict(self)
        out["alpha_spec"] = self.alpha_spec.describe()
        out["sign_changes"] = list(self.sign_changes)
        out["n_sign_changes"] = len(self.sign_changes)
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def format_number(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def omega_report(d, T, lam, alpha, threshold=None):
    """Every fluctuation statistic of one dyadic window [T, 2T].

    ``threshold`` is an optional callable of T giving the comparison value
    for the measure of the absolute set (e.g. 5 h1(5T/2) T^(1 - alpha2));
    both sides are stored in ``extras`` without interpretation.
    """
    if not isinstance(alpha, AlphaSpec):
        alpha = AlphaSpec(AlphaMode.CONSTANT, float(alpha))
    a_exp = alpha.at(T)
    plus = measure_above(d, T, lam, alpha, Side.PLUS)
    minus = measure_above(d, T, lam, alpha, Side.MINUS)
    absolute = measure_above(d, T, lam, alpha, Side.ABS)
    m_val, m_loc = max_scaled(d, T, a_exp)
    extras = {}
    if threshold is not None:
        extras = {"measure_abs": absolute, "threshold": float(threshold(T))}
    return FluctuationReport(
        T=float(T),
        T2=2.0 * T,
        moment2=moment_integral(d, T, 2),
        moment4=moment_integral(d, T, 4),
        measure_plus=plus,
        measure_minus=minus,
        measure_abs=absolute,
        sign_changes=tuple(sign_changes(d, T, 2 * T)),
        max_scaled=m_val,
        max_location=m_loc,
        lam=float(lam),
        alpha=a_exp,
        alpha_spec=alpha,
        extras=extras,
    )
