"""Rational maps on P^1: representation, evaluation, iteration, critical
points, orbit classification and exceptional points.

A map is a pair of equal-length ascending coefficient lists (P, Q), read as
homogeneous degree-d forms; scalar multiples define the same map.  Validity
means the homogeneous resultant Res(P, Q) is nonzero (no common root).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath as mp
import numpy as np

from . import _poly
from .errors import BudgetExceeded, DegenerateMap, UnknownPreset
from .geometry import (COMPLEX, ProjectivePoint, ValuedField, chordal_dist,
                       eval_homogeneous, normalize_point)

DEFAULT_DEGREE_BUDGET = 2 ** 16


# ---------------------------------------------------------------------------
# resultants
# ---------------------------------------------------------------------------

def sylvester_matrix(num, den, degree: int):
    """Sylvester matrix of two forms, both taken with declared degree d."""
    d = degree
    n = 2 * d
    rows = []
    pd = list(num) + [0] * (d + 1 - len(num))
    qd = list(den) + [0] * (d + 1 - len(den))
    pdesc = pd[::-1]
    qdesc = qd[::-1]
    for i in range(d):
        rows.append([0] * i + pdesc + [0] * (n - d - 1 - i))
    for i in range(d):
        rows.append([0] * i + qdesc + [0] * (n - d - 1 - i))
    return rows


def _det_fraction(rows) -> Fraction:
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    m = [[Fraction(x) for x in r] for r in rows]
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col] != 0:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            factor = m[r][col] * inv
            if factor == 0:
                continue
            for c in range(col, n):
                m[r][c] -= factor * m[col][c]
    return det


def resultant(num, den, degree: int):
    """Homogeneous resultant; exact when all coefficients are rational."""
    exact = all(isinstance(c, (int, Fraction)) for c in list(num) + list(den))
    rows = sylvester_matrix(num, den, degree)
    if exact:
        return _det_fraction(rows)
    arr = np.array([[complex(x) for x in r] for r in rows], dtype=complex)
    return complex(np.linalg.det(arr))


# ---------------------------------------------------------------------------
# the map type
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalMap:
    """Immutable degree-d rational map with cached resultant.

    num/den are ascending coefficient tuples of equal length d+1 over the
    field (complex, Fraction, or mpmath mpc for extended-precision
    iterates).
    """

    num: tuple
    den: tuple
    degree: int
    field: ValuedField = COMPLEX
    resultant: object = None

    @property
    def is_polynomial(self) -> bool:
        return all(c == 0 for c in self.den[1:])

    def eval_pair(self, x, y):
        d = self.degree
        return (eval_homogeneous(self.num, x, y, d),
                eval_homogeneous(self.den, x, y, d))

    def wronskian(self):
        return _wronskian_cached(self)

    def np_num(self) -> np.ndarray:
        return np.array([complex(c) for c in self.num], dtype=complex)

    def np_den(self) -> np.ndarray:
        return np.array([complex(c) for c in self.den], dtype=complex)

    def __hash__(self):
        return hash((self.num, self.den, self.degree, self.field))


@functools.lru_cache(maxsize=256)
def _wronskian_cached(f: RationalMap):
    if f.field.is_archimedean and not any(isinstance(c, mp.mpc) for c in f.num):
        num = [complex(c) for c in f.num]
        den = [complex(c) for c in f.den]
    else:
        num, den = list(f.num), list(f.den)
    return tuple(_poly.wronskian_coeffs(num, den))


def build_map(num, den, field: ValuedField = COMPLEX,
              resultant_rtol: float = 1e-12) -> RationalMap:
    """Validate a coefficient pair and build the map.

    Shared leading zeros are stripped (the declared homogeneous degree is
    the actual one); a resultant within resultant_rtol * max|coeff|^(2d)
    of zero raises DegenerateMap.
    """
    num = list(num)
    den = list(den)
    n = max(len(num), len(den))
    num += [0] * (n - len(num))
    den += [0] * (n - len(den))
    while len(num) > 1 and num[-1] == 0 and den[-1] == 0:
        num.pop()
        den.pop()
    d = len(num) - 1
    if d < 1:
        raise DegenerateMap("constant map (degree 0)")
    if all(c == 0 for c in num) or all(c == 0 for c in den):
        raise DegenerateMap("zero numerator or denominator")
    if not field.is_archimedean:
        num = [Fraction(c) for c in num]
        den = [Fraction(c) for c in den]
    res = resultant(num, den, d)
    if isinstance(res, Fraction):
        if res == 0:
            raise DegenerateMap("numerator and denominator share a root")
    else:
        scale = max(abs(complex(c)) for c in num + den) ** (2 * d)
        if abs(res) <= resultant_rtol * scale:
            raise DegenerateMap(
                f"resultant {abs(res):.3e} below tolerance: P, Q share a root")
    return RationalMap(tuple(num), tuple(den), d, field, res)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def preset_map(name: str, field: ValuedField = COMPLEX) -> RationalMap:
    """Build one of the shipped families.

    power:d, chebyshev:d (degree-d map with Julia set [-2, 2]),
    quadratic:c (z^2 + c), lattes4 (the degree-4 flexible example
    (z^2+1)^2 / (4 z (z^2-1))).
    """
    kind, _, arg = name.partition(":")
    if kind == "power":
        d = int(arg)
        if d < 1:
            raise UnknownPreset(name)
        return build_map([0] * d + [1], [1] + [0] * d, field)
    if kind == "chebyshev":
        d = int(arg)
        if d < 1:
            raise UnknownPreset(name)
        p_prev, p_cur = [2], [0, 1]
        for _ in range(d - 1):
            p_prev, p_cur = p_cur, _poly.poly_add([0] + p_cur, p_prev, scale_b=-1)
        return build_map(p_cur, [1] + [0] * d, field)
    if kind == "quadratic":
        if not field.is_archimedean:
            c = Fraction(arg)
        else:
            c = complex(arg.replace("i", "j"))
        return build_map([c, 0, 1], [1, 0, 0], field)
    if kind == "lattes4" or name == "lattes4":
        return build_map([1, 0, 2, 0, 1], [0, -4, 0, 4, 0], field)
    raise UnknownPreset(name)


# ---------------------------------------------------------------------------
# evaluation and iteration
# ---------------------------------------------------------------------------

def evaluate(f: RationalMap, z: ProjectivePoint) -> ProjectivePoint:
    """f(z), total on P^1 by homogeneity."""
    zn = normalize_point(z, f.field)
    pv, qv = f.eval_pair(zn.x, zn.y)
    if pv == 0 and qv == 0:
        raise DegenerateMap("map evaluated to (0, 0)")
    return normalize_point(ProjectivePoint(pv, qv), f.field)


def orbit(f: RationalMap, z: ProjectivePoint, length: int):
    """[z, f(z), ..., f^length(z)] as normalized points."""
    pts = [normalize_point(z, f.field)]
    for _ in range(length):
        pts.append(evaluate(f, pts[-1]))
    return pts


def _compose_pair(outer_num, outer_den, pin, pqd, lift):
    """(outer_num(pin, qin), outer_den(pin, qin)) with powers precomputed.

    pqd[i] = pin^i * qin^(d-i) where d = len(outer_num) - 1.
    """
    new_num = None
    new_den = None
    for i, (cn, cd) in enumerate(zip(outer_num, outer_den)):
        term = pqd[i]
        tn = [lift(cn) * t for t in term]
        td = [lift(cd) * t for t in term]
        new_num = tn if new_num is None else _poly.poly_add(new_num, tn)
        new_den = td if new_den is None else _poly.poly_add(new_den, td)
    return new_num, new_den


def compose(f: RationalMap, g: RationalMap, precision_bits: int | None = None,
            renormalize: bool = True) -> RationalMap:
    """Coefficient-level composition f(g(.)).

    Coefficients are renormalized to unit max-norm afterwards so that
    repeated composition neither overflows nor underflows.
    """
    bits = precision_bits or max(f.field.precision_bits, g.field.precision_bits)
    if bits > 53:
        # every mp operation, renormalization included, must run at the
        # working precision: mpmath rounds results to the ambient context
        with mp.workprec(bits):
            lift = lambda c: mp.mpc(c)
            gn = [lift(c) for c in g.num]
            gd = [lift(c) for c in g.den]
            new_num, new_den = _compose_mp(f, gn, gd, lift)
            if renormalize:
                m = max(max(abs(c) for c in new_num),
                        max(abs(c) for c in new_den))
                new_num = [c / m for c in new_num]
                new_den = [c / m for c in new_den]
    else:
        lift = complex
        gn = [complex(c) for c in g.num]
        gd = [complex(c) for c in g.den]
        new_num, new_den = _compose_raw(f, gn, gd, lift)
        if renormalize:
            m = max(max(abs(c) for c in new_num),
                    max(abs(c) for c in new_den))
            new_num = [c / m for c in new_num]
            new_den = [c / m for c in new_den]
    deg = f.degree * g.degree
    fld = f.field.with_precision(bits) if f.field.is_archimedean else f.field
    return RationalMap(tuple(new_num), tuple(new_den), deg, fld)


def _powers_table(pin, qin, d):
    """pin^i qin^(d-i) for i = 0..d."""
    ppow = [[1]]
    qpow = [[1]]
    for _ in range(d):
        ppow.append(_poly.poly_mul(ppow[-1], pin))
        qpow.append(_poly.poly_mul(qpow[-1], qin))
    return [_poly.poly_mul(ppow[i], qpow[d - i]) for i in range(d + 1)]


def _compose_raw(f, gn, gd, lift):
    table = _powers_table(gn, gd, f.degree)
    return _compose_pair(f.num, f.den, gn, table, lift)


def _compose_mp(f, gn, gd, lift):
    table = _powers_table(gn, gd, f.degree)
    return _compose_pair(f.num, f.den, gn, table, lift)


def iterate_map(f: RationalMap, k: int, max_degree: int = DEFAULT_DEGREE_BUDGET,
                precision_bits: int | None = None) -> RationalMap:
    """f^k by repeated coefficient composition.

    Extended precision (precision_bits > 53) recomposes from the original
    coefficients with mpmath scalars, so construction error is 2^-bits.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if f.degree ** k > max_degree:
        raise BudgetExceeded(
            f"degree {f.degree}^{k} exceeds budget {max_degree}")
    bits = precision_bits or f.field.precision_bits
    if bits > 53:
        with mp.workprec(bits):
            base_num = [mp.mpc(c) for c in f.num]
            base_den = [mp.mpc(c) for c in f.den]
            base = RationalMap(tuple(base_num), tuple(base_den), f.degree,
                               f.field.with_precision(bits))
            acc = base
            for _ in range(k - 1):
                acc = compose(base, acc, precision_bits=bits)
            return acc
    acc = f
    for _ in range(k - 1):
        acc = compose(f, acc, precision_bits=53)
    return acc


def derivative_at(f: RationalMap, z: complex) -> complex:
    """Affine derivative f'(z) = W(z) / Q(z)^2 at a finite non-pole z."""
    wr = f.wronskian()
    wv = _poly.poly_eval([complex(c) for c in wr], complex(z))
    qv = _poly.poly_eval([complex(c) for c in f.den], complex(z))
    return wv / qv ** 2


# ---------------------------------------------------------------------------
# critical points and their orbits
# ---------------------------------------------------------------------------

@dataclass
class CriticalPoint:
    point: ProjectivePoint
    multiplicity: int
    label: str = "undetermined"      # wandering | preperiodic | undetermined
    witness: tuple | None = None     # (j_revisit, j_earlier) for preperiodic


@dataclass
class CriticalSet:
    points: list
    horizon: int | None = None
    tol: float | None = None

    def total_multiplicity(self) -> int:
        return sum(c.multiplicity for c in self.points)

    def by_label(self, label: str):
        return [c for c in self.points if c.label == label]


def critical_points(f: RationalMap) -> CriticalSet:
    """Zeros of the Wronskian, with multiplicity summing to 2d - 2."""
    from .roots import SolverOptions, solve
    if not f.field.is_archimedean:
        raise ValueError("critical point search needs the archimedean backend")
    if f.degree < 2:
        return CriticalSet([])
    wr = [complex(c) for c in f.wronskian()]
    rs = solve(wr, SolverOptions(target_degree=2 * f.degree - 2))
    pts = [CriticalPoint(p, m) for p, m in rs.roots]
    return CriticalSet(pts)


def classify_critical_orbits(f: RationalMap, horizon: int = 1000,
                             tol: float = 1e-9) -> CriticalSet:
    """Label each critical point by its forward-orbit behavior.

    preperiodic: the orbit revisits an earlier orbit point within chordal
    distance tol.  wandering: all pairwise orbit distances stay above a
    guard band of 100 * tol.  Orbits falling in between are reported as
    undetermined rather than guessed.
    """
    cs = critical_points(f)
    out = []
    for cp in cs.points:
        label, witness = _classify_orbit(f, cp.point, horizon, tol)
        out.append(CriticalPoint(cp.point, cp.multiplicity, label, witness))
    return CriticalSet(out, horizon=horizon, tol=tol)


def _classify_orbit(f, start, horizon, tol):
    xs = np.empty(horizon + 1, dtype=complex)
    ys = np.empty(horizon + 1, dtype=complex)
    z = normalize_point(start, f.field)
    xs[0], ys[0] = z.x, z.y
    min_gap = math.inf
    for n in range(1, horizon + 1):
        z = evaluate(f, z)
        cross = np.abs(xs[:n] * z.y - ys[:n] * z.x)
        gap = float(cross.min())
        if gap <= tol:
            j = int(cross.argmin())
            return "preperiodic", (n, j)
        min_gap = min(min_gap, gap)
        xs[n], ys[n] = z.x, z.y
    if min_gap > 100 * tol:
        return "wandering", None
    return "undetermined", None


# ---------------------------------------------------------------------------
# exceptional points
# ---------------------------------------------------------------------------

def exceptional_points(f: RationalMap, tol: float = 1e-9):
    """All e with f^{-2}(e) = {e} (as a set, multiplicities d^2).

    Nonempty only for maps conjugate to z^{+-d}; at most two points.
    """
    from .periodic import fixed_point_polynomial
    from .preimage import preimages
    from .roots import SolverOptions, solve
    if not f.field.is_archimedean:
        raise ValueError("exceptional point search needs the archimedean backend")
    f2 = iterate_map(f, 2)
    coeffs = fixed_point_polynomial(f, 2)
    rs = solve([complex(c) for c in coeffs],
               SolverOptions(target_degree=f.degree ** 2 + 1))
    found = []
    for q, _mult in rs.roots:
        pre = preimages(f2, q)
        if all(chordal_dist(w, q, f.field) <= tol for w, _m in pre):
            if not any(chordal_dist(q, e, f.field) <= tol for e in found):
                found.append(normalize_point(q, f.field))
    return found
