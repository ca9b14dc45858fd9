"""Main terms as finite sums of c * x^nu * (log x)^k.

Two independent constructions: closed forms transcribed from the literature,
and residues of D(s) x^s / s obtained from Laurent coefficients computed by
trapezoidal quadrature on a circle.
"""

from dataclasses import dataclass
import json
import math

import numpy as np

from . import sieve as sv
from .dirichlet import dirichlet_D
from .errors import ConfigurationError, ConsistencyError, EvaluationError
from .zeta import log_zeta_high, zeta, zeta_and_prime, zeta_constants

CIRCLE_NODES = 256
IMAG_TOLERANCE = 1e-9


@dataclass(frozen=True)
class MainTermExpr:
    """``terms`` holds (coeff, exponent, log_power) triples."""

    terms: tuple = ()

    def __add__(self, other):
        return MainTermExpr(self.terms + other.terms)

    def __len__(self):
        return len(self.terms)

    def __call__(self, x):
        return eval_main_term(self, x)

    def derivative(self):
        """Expression for dM/dx."""
        out = []
        for c, nu, k in self.terms:
            out.append((c * nu, nu - 1, k))
            if k:
                out.append((c * k, nu - 1, k - 1))
        return MainTermExpr(tuple(out))

    def to_json(self):
        return json.dumps(
            [
                {"re": c.real, "im": c.imag, "exp_re": nu.real, "exp_im": nu.imag, "logpow": k}
                for c, nu, k in self.terms
            ]
        )

    @classmethod
    def from_json(cls, text):
        rows = json.loads(text)
        return cls(
            tuple(
                (complex(r["re"], r["im"]), complex(r["exp_re"], r["exp_im"]), int(r["logpow"]))
                for r in rows
            )
        )

    def normalized(self):
        return MainTermExpr(tuple((complex(c), complex(nu), int(k)) for c, nu, k in self.terms))


def eval_main_term(m, x, check=True):
    """Real part of sum c x^nu (log x)^k; scalar or array ``x > 1``.

    Raises ConsistencyError when the discarded imaginary part is not
    negligible, which signals a term list that is not closed under
    conjugation.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("main terms are evaluated for x > 0")
    if not m.terms:
        out = np.zeros(arr.shape)
        return float(out) if arr.ndim == 0 else out
    lx = np.log(arr)
    total = np.zeros(arr.shape, dtype=complex)
    scale = np.zeros(arr.shape)
    for c, nu, k in m.terms:
        term = complex(c) * np.exp(complex(nu) * lx)
        if k:
            term = term * lx**k
        total = total + term
        scale = scale + np.abs(term)
    if check and np.any(np.abs(total.imag) > IMAG_TOLERANCE * np.maximum(scale, 1.0)):
        raise ConsistencyError("main term is not real: terms are not conjugate-closed")
    out = total.real
    return float(out) if arr.ndim == 0 else out


@dataclass(frozen=True)
class LaurentCoeffs:
    """``a_minus[k-1]`` is the coefficient of (s - pole)^-k, k = 1..order."""

    pole: complex
    order: int
    a_minus: tuple


def circle_coefficients(f, center, order, radius, nodes=CIRCLE_NODES):
    """Negative-index Laurent coefficients of ``f`` about ``center``.

    ``f`` takes an array of points.  Uses the trapezoidal rule on the circle,
    which converges geometrically for functions analytic on an annulus.
    """
    phi = 2.0 * np.pi * np.arange(nodes) / nodes
    e = np.exp(1j * phi)
    vals = np.asarray(f(center + radius * e), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError(f"non-finite value on the circle about {center}")
    return tuple(
        complex(np.mean(vals * e**k) * radius**k) for k in range(1, order + 1)
    )


def laurent_coefficients(app, pole, order, radius, func=None):
    """Laurent principal part of D(s)/s (or ``func``) at ``pole``."""
    pole = complex(pole)
    if not 1e-4 <= radius <= 0.4:
        raise ConfigurationError(f"radius {radius} outside [1e-4, 0.4]")
    others = [z for z in app.all_singularities() + [0j] if abs(z - pole) > 1e-12]
    for z in others:
        if abs(z - pole) <= radius * 1.05:
            raise ConfigurationError(f"circle of radius {radius} about {pole} reaches {z}")
    if func is None:
        def func(s):
            return dirichlet_D(app, s) / s

    coeffs = circle_coefficients(func, pole, order, radius)
    lead = abs(coeffs[-1])
    if lead < 1e-8:
        raise ConfigurationError(f"declared order {order} at {pole} is not attained")
    return LaurentCoeffs(pole, order, coeffs)


def default_radius(app, pole):
    """Largest safe circle radius: 40% of the distance to the nearest other
    singularity, capped at 0.4."""
    pole = complex(pole)
    dists = [abs(z - pole) for z in app.all_singularities() + [0j] if abs(z - pole) > 1e-12]
    return max(1e-4, min(0.4, 0.4 * min(dists)))


def residue_terms(coeffs):
    """Residue of F(s) x^s at the pole: sum_k a_-k x^rho (log x)^(k-1)/(k-1)!."""
    out = []
    for k, a in enumerate(coeffs.a_minus, start=1):
        out.append((a / math.factorial(k - 1), coeffs.pole, k - 1))
    return out


def main_term_from_poles(app, radius=None):
    terms = []
    for rho, order in app.poles:
        r = default_radius(app, rho) if radius is None else radius
        terms.extend(residue_terms(laurent_coefficients(app, rho, order, r)))
    return MainTermExpr(tuple(terms))


def abelian_coefficient(k, tol=1e-12):
    """prod_{j != k} zeta(j/k), the j-product truncated once its tail is < tol."""
    log_total = 0j
    j = 1
    while True:
        if j != k:
            w = j / k
            if w >= 8.0:
                log_total += complex(log_zeta_high(complex(w)))
                # |log zeta(j/k)| <= 2^(1 - j/k); geometric tail bound
                q = 2.0 ** (-1.0 / k)
                if 2.0 ** (1 - (j + 1) / k) / (1 - q) < tol:
                    break
            else:
                log_total += np.log(zeta(complex(w)))
        j += 1
    return float(np.exp(log_total).real)


def twisted_closed_constants(theta):
    """(omega1, omega3, c) with M(x) = omega1 x log x + omega3 x + 2 Re(c x^(1+i theta)).

    Residue calculus on zeta(s)^2 G(s), G(s) = zeta(s+i theta) zeta(s-i theta)/(zeta(2s) s).
    """
    g = zeta_constants().euler_gamma
    zp, dzp = zeta_and_prime(complex(1, theta))
    zm, dzm = zeta_and_prime(complex(1, -theta))
    z2, dz2 = zeta_and_prime(2.0)
    G1 = zp * zm / z2
    dlogG = dzp / zp + dzm / zm - 2 * dz2 / z2 - 1.0
    omega1 = G1
    omega3 = G1 * (2 * g + dlogG)
    s = complex(1, theta)
    c = zeta(s) ** 2 * zeta(complex(1, 2 * theta)) / (zeta(2 * s) * s)
    return omega1.real, omega3.real, complex(c)


def closed_form_main_term(app):
    kind = app.kind
    if kind is None:
        raise ConfigurationError("closed forms exist only for the five built-in sequences")
    g = zeta_constants().euler_gamma
    tag = kind.tag
    if tag is sv.Tag.DIVISOR:
        return MainTermExpr(((1 + 0j, 1 + 0j, 1), (complex(2 * g - 1), 1 + 0j, 0)))
    if tag is sv.Tag.SQUAREFREE_DIVISORS:
        z2, dz2 = zeta_and_prime(2.0)
        z2, dz2 = z2.real, dz2.real
        lin = -2 * dz2 / z2**2 + (2 * g - 1) / z2
        return MainTermExpr(((complex(1 / z2), 1 + 0j, 1), (complex(lin), 1 + 0j, 0)))
    if tag is sv.Tag.VON_MANGOLDT:
        return MainTermExpr(((1 + 0j, 1 + 0j, 0),))
    if tag is sv.Tag.ABELIAN:
        return MainTermExpr(
            tuple((complex(abelian_coefficient(k)), complex(1 / k), 0) for k in range(1, 7))
        )
    om1, om3, c = twisted_closed_constants(kind.theta)
    th = kind.theta
    return MainTermExpr(
        (
            (complex(om1), 1 + 0j, 1),
            (complex(om3), 1 + 0j, 0),
            (c, complex(1, th), 0),
            (c.conjugate(), complex(1, -th), 0),
        )
    )


def twisted_phase(m, theta):
    """Amplitude and phase of the oscillating pair: 2|c| x cos(theta log x + phi)."""
    for c, nu, k in m.terms:
        if abs(nu - complex(1, theta)) < 1e-12 and k == 0:
            return 2 * abs(c), float(np.angle(c))
    raise ValueError("no x^(1+i theta) term in expression")
