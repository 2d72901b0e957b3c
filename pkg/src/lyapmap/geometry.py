"""Chordal geometry of the projective line over valued fields.

Points are kept in homogeneous coordinates (x, y), with infinity = (1, 0).
Two backends share the same formulas:

* archimedean (complex): coordinates normalized to euclidean norm 1 and

      [z, w] = |x1*y2 - x2*y1| / (||(x1,y1)|| * ||(x2,y2)||),

* non-archimedean (rationals with a p-adic absolute value): exact
  Fraction coordinates and

      [z, w] = |x1*y2 - x2*y1|_p / (max(|x1|,|y1|) * max(|x2|,|y2|)).

Both are normalized so that [0, infinity] = 1 and [.,.] <= 1.

The local expansion factor of a rational map in this metric (the chordal
derivative) is evaluated through the homogeneous Wronskian

    W(X, Y) = (P_X Q_Y - P_Y Q_X) / d,

which agrees with the affine p'q - p q' and makes the formula

    f#(x:y) = |W(x,y)| * ||(x,y)||^2 / ||(P(x,y), Q(x,y))||^2

total on the whole line: no chart rotation is needed at poles or at
infinity, and the value agrees with the affine
|f'(z)| (1+|z|^2) / (1+|f(z)|^2) wherever that one is defined.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize


# ---------------------------------------------------------------------------
# valued fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValuedField:
    """A complete valued field: complex numbers, or Q with a p-adic value.

    prime is None for the archimedean backend.  precision_bits is the
    working precision for archimedean computations (53 = plain doubles);
    the non-archimedean backend is exact and ignores it.
    """

    prime: int | None = None
    precision_bits: int = 53

    @property
    def is_archimedean(self) -> bool:
        return self.prime is None

    def abs(self, x):
        """Absolute value of a field element.

        Returns a float in archimedean mode and an exact Fraction p**(-v)
        in non-archimedean mode.
        """
        if self.is_archimedean:
            return abs(complex(x))
        v = padic_valuation(x, self.prime)
        if v is None:
            return Fraction(0)
        return Fraction(self.prime) ** (-v)

    def with_precision(self, bits: int) -> "ValuedField":
        return ValuedField(self.prime, bits)


COMPLEX = ValuedField()


def complex_field(precision_bits: int = 53) -> ValuedField:
    return ValuedField(None, precision_bits)


def padic_field(p: int) -> ValuedField:
    if p < 2:
        raise ValueError("prime must be >= 2")
    return ValuedField(p)


def padic_valuation(x, p: int):
    """v_p(x) for a rational x; None for x = 0 (valuation +infinity)."""
    x = Fraction(x)
    if x == 0:
        return None
    v = 0
    n = x.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = x.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


# ---------------------------------------------------------------------------
# projective points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectivePoint:
    """A point of P^1 in homogeneous coordinates, (x, y) not both zero.

    Coordinates are complex numbers (archimedean) or Fractions
    (non-archimedean).  normalized marks representatives already scaled to
    the canonical magnitude (euclidean norm 1, resp. max-norm 1).
    """

    x: object
    y: object
    normalized: bool = False

    @classmethod
    def from_affine(cls, z) -> "ProjectivePoint":
        return cls(z, type(z)(1) if isinstance(z, Fraction) else 1)

    @classmethod
    def infinity(cls) -> "ProjectivePoint":
        return cls(1, 0, normalized=True)

    @property
    def is_infinity(self) -> bool:
        return self.y == 0

    def affine(self):
        """x / y; raises ZeroDivisionError at infinity."""
        return self.x / self.y

    def as_complex(self) -> complex:
        """Affine value as a complex number, inf at the point at infinity."""
        if self.is_infinity:
            return complex(math.inf, 0.0)
        return complex(self.x) / complex(self.y)


INFINITY = ProjectivePoint.infinity()


def normalize_point(pt: ProjectivePoint, field: ValuedField) -> ProjectivePoint:
    """Scale homogeneous coordinates to the canonical representative."""
    if pt.normalized:
        return pt
    if field.is_archimedean:
        x, y = complex(pt.x), complex(pt.y)
        m = max(abs(x), abs(y))
        if m == 0:
            raise ValueError("(0, 0) is not a projective point")
        x, y = x / m, y / m
        n = math.sqrt(abs(x) ** 2 + abs(y) ** 2)
        return ProjectivePoint(x / n, y / n, normalized=True)
    x, y = Fraction(pt.x), Fraction(pt.y)
    ax, ay = field.abs(x), field.abs(y)
    if ax == 0 and ay == 0:
        raise ValueError("(0, 0) is not a projective point")
    if ay >= ax:
        return ProjectivePoint(x / y, Fraction(1), normalized=True)
    return ProjectivePoint(Fraction(1), y / x, normalized=True)


def _scaled_raw(pt: ProjectivePoint):
    """Archimedean coordinates divided by their max magnitude.

    Pure magnitude scaling: keeps an exactly-zero cross term exact, unlike
    full normalization which divides by an irrational norm.
    """
    x, y = complex(pt.x), complex(pt.y)
    m = max(abs(x), abs(y))
    if m == 0:
        raise ValueError("(0, 0) is not a projective point")
    return x / m, y / m


# ---------------------------------------------------------------------------
# chordal distance
# ---------------------------------------------------------------------------

def chordal_dist(z: ProjectivePoint, w: ProjectivePoint, field: ValuedField = COMPLEX):
    """Normalized chordal distance [z, w] in [0, 1], with [0, inf] = 1.

    Archimedean mode returns a float; non-archimedean mode is exact and
    returns a Fraction.
    """
    if field.is_archimedean:
        x1, y1 = _scaled_raw(z)
        x2, y2 = _scaled_raw(w)
        cross = abs(x1 * y2 - x2 * y1)
        n1 = math.sqrt(abs(x1) ** 2 + abs(y1) ** 2)
        n2 = math.sqrt(abs(x2) ** 2 + abs(y2) ** 2)
        return min(1.0, cross / (n1 * n2))
    x1, y1 = Fraction(z.x), Fraction(z.y)
    x2, y2 = Fraction(w.x), Fraction(w.y)
    cross = field.abs(x1 * y2 - x2 * y1)
    n1 = max(field.abs(x1), field.abs(y1))
    n2 = max(field.abs(x2), field.abs(y2))
    return cross / (n1 * n2)


# ---------------------------------------------------------------------------
# homogeneous evaluation helpers
# ---------------------------------------------------------------------------

def eval_homogeneous(coeffs, x, y, degree: int):
    """Evaluate sum_i c_i X^i Y^(degree-i) at (x, y).

    coeffs is the ascending affine coefficient list (length <= degree+1,
    implicitly zero-padded).  Evaluation runs in the variable of smaller
    magnitude for stability; intended for representatives with
    max(|x|, |y|) ~ 1.
    """
    exact = isinstance(x, Fraction) or isinstance(y, Fraction)
    if exact:
        ax = abs(Fraction(x).numerator) * abs(Fraction(y).denominator)
        ay = abs(Fraction(y).numerator) * abs(Fraction(x).denominator)
        big_y = ay >= ax
    else:
        big_y = abs(y) >= abs(x)
    if big_y:
        t = x / y
        acc = 0
        for c in reversed(coeffs):
            acc = acc * t + c
        return acc * y ** degree
    t = y / x
    acc = 0
    pad = degree + 1 - len(coeffs)
    for _ in range(pad):
        acc = acc * t
    for c in coeffs:
        acc = acc * t + c
    return acc * x ** degree


# ---------------------------------------------------------------------------
# chordal derivative
# ---------------------------------------------------------------------------

def chordal_derivative(f, z: ProjectivePoint) -> object:
    """Expansion factor f#(z) of f in the chordal metric; 0 at critical points.

    Uses the homogeneous Wronskian, so the value is finite and correct at
    poles and at infinity without chart changes.  Returns a float for
    archimedean fields, an exact Fraction for p-adic ones.
    """
    field = f.field
    d = f.degree
    wr = f.wronskian()
    if field.is_archimedean:
        zn = normalize_point(z, field)
        x, y = zn.x, zn.y
        wv = eval_homogeneous(wr, x, y, 2 * d - 2)
        pv, qv = f.eval_pair(x, y)
        denom = abs(pv) ** 2 + abs(qv) ** 2
        if denom == 0:
            raise ValueError("map evaluated to (0, 0); degenerate input")
        return abs(wv) / denom
    zn = normalize_point(z, field)
    x, y = zn.x, zn.y
    wv = eval_homogeneous(wr, x, y, 2 * d - 2)
    pv, qv = f.eval_pair(x, y)
    denom = max(field.abs(pv), field.abs(qv)) ** 2
    if denom == 0:
        raise ValueError("map evaluated to (0, 0); degenerate input")
    return field.abs(wv) / denom


# ---------------------------------------------------------------------------
# sup of the chordal derivative (archimedean)
# ---------------------------------------------------------------------------

def _fibonacci_sphere_points(n: int):
    """Quasi-uniform homogeneous representatives covering the sphere."""
    pts = []
    golden = (1 + math.sqrt(5)) / 2
    for i in range(n):
        zc = 1 - 2 * (i + 0.5) / n
        r = math.sqrt(max(0.0, 1 - zc * zc))
        phi = 2 * math.pi * ((i / golden) % 1.0)
        # stereographic pair: affine (X + iY) / (1 - Z) as homogeneous coords
        pts.append(ProjectivePoint(complex(r * math.cos(phi), r * math.sin(phi)),
                                   complex(1 - zc, 0.0)))
    return pts


def sup_chordal_derivative(f, n_samples: int = 4000):
    """Lower estimate of sup f# over the sphere.

    Stratified quasi-uniform sampling followed by local Nelder-Mead ascent
    from the best candidates.  Returns (value, is_lower_estimate); the flag
    is always True since sampling can only undershoot.
    """
    if not f.field.is_archimedean:
        raise ValueError("sup_chordal_derivative needs the archimedean backend")
    best = []
    for pt in _fibonacci_sphere_points(n_samples):
        v = chordal_derivative(f, pt)
        best.append((v, pt))
    best.sort(key=lambda t: -t[0])
    top = best[0][0]

    def ascend(pt: ProjectivePoint) -> float:
        pn = normalize_point(pt, f.field)
        inverted = abs(pn.x) > abs(pn.y)
        z0 = (pn.y / pn.x) if inverted else (pn.x / pn.y)

        def neg(uv):
            zz = z0 + complex(uv[0], uv[1])
            p = ProjectivePoint(1, zz) if inverted else ProjectivePoint(zz, 1)
            return -chordal_derivative(f, p)

        res = minimize(neg, [0.0, 0.0], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 400})
        return -res.fun

    for _, pt in best[:8]:
        top = max(top, ascend(pt))
    return top, True
