"""Exact p-adic backend: valuations on Q, disks with the extended chordal
kernel, good-reduction detection.

Everything here is exact rational arithmetic: absolute values are
Fractions p**(-v), disk radii live in {0} union p**Z, and kernel values
are Fractions, so equality tests carry no tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .geometry import (ProjectivePoint, chordal_derivative, padic_field,
                       padic_valuation)
from .ratmap import RationalMap, resultant


@dataclass(frozen=True)
class PAdicRational:
    """A rational number together with a prime and its p-adic size."""

    value: Fraction
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    @property
    def valuation(self):
        """v_p(value); None at 0 (valuation +infinity)."""
        return padic_valuation(self.value, self.p)

    @property
    def abs(self) -> Fraction:
        v = self.valuation
        if v is None:
            return Fraction(0)
        return Fraction(self.p) ** (-v)


@dataclass(frozen=True)
class Disk:
    """A closed disk {z : |z - center| <= radius}; radius 0 is a classical
    point, radius in p**Z a higher-type point."""

    center: PAdicRational
    radius: Fraction

    def __post_init__(self):
        r = Fraction(self.radius)
        if r < 0:
            raise ValueError("radius must be >= 0")
        if r != 0:
            v = padic_valuation(r, self.center.p)
            if r != Fraction(self.center.p) ** v:
                raise ValueError("radius must be 0 or a power of p")
        object.__setattr__(self, "radius", r)

    @property
    def p(self) -> int:
        return self.center.p

    @property
    def diam(self) -> Fraction:
        return self.radius

    @property
    def sup_norm(self) -> Fraction:
        """sup |z| over the disk: max(|center|, radius) by ultrametricity."""
        return max(self.center.abs, self.radius)

    @property
    def is_classical(self) -> bool:
        return self.radius == 0


def disk_point(value, p: int) -> Disk:
    return Disk(PAdicRational(Fraction(value), p), Fraction(0))


def gauss_point(p: int) -> Disk:
    return Disk(PAdicRational(Fraction(0), p), Fraction(1))


def join_disks(s: Disk, t: Disk) -> Disk:
    """Smallest disk containing both (commutative, associative, idempotent)."""
    if s.p != t.p:
        raise ValueError("disks live over different primes")
    gap = PAdicRational(s.center.value - t.center.value, s.p).abs
    return Disk(s.center, max(s.radius, t.radius, gap))


def hsia_kernel(s: Disk, t: Disk) -> Fraction:
    """diam(s v t) / (max(1,|s|) max(1,|t|)).

    Extends the chordal distance: on radius-0 disks it equals the
    non-archimedean chordal distance exactly, and it vanishes iff s = t
    is a classical point.
    """
    join = join_disks(s, t)
    one = Fraction(1)
    return join.diam / (max(one, s.sup_norm) * max(one, t.sup_norm))


def good_reduction_test(f: RationalMap, p: int) -> bool:
    """True iff |Res(P, Q)|_p = 1 after p-content normalization.

    The pair is jointly scaled by a power of p so all coefficients are
    p-integral with at least one p-unit; good reduction means the
    resultant stays a unit, and the exponent of such a map is 0.
    """
    coeffs = [Fraction(c) for c in list(f.num) + list(f.den)]
    vals = [padic_valuation(c, p) for c in coeffs if c != 0]
    shift = Fraction(p) ** (-min(vals))
    num = [Fraction(c) * shift for c in f.num]
    den = [Fraction(c) * shift for c in f.den]
    res = resultant(num, den, f.degree)
    return padic_valuation(res, p) == 0


def padic_chordal_derivative(f: RationalMap, z: PAdicRational) -> Fraction:
    """Chordal expansion factor of f at a rational point, exactly.

    Computed from the homogeneous Wronskian in rational arithmetic, so
    poles and the point at infinity need no chart rotation; agrees with
    |f'(z)|_p max(1,|z|)^2 / max(1,|f(z)|)^2 away from poles.
    """
    if f.field.prime is None:
        raise ValueError("map must be built over a p-adic field")
    if f.field.prime != z.p:
        raise ValueError("prime mismatch between map and point")
    pt = ProjectivePoint(z.value, Fraction(1))
    return chordal_derivative(f, pt)


def padic_point(value, p: int) -> PAdicRational:
    return PAdicRational(Fraction(value), p)
