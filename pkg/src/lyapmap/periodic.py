"""Periodic points of f and the repelling-average exponent estimators.

The degree-(d^k + 1) fixed point equation of f^k is solved with
multiplicity, each fixed point is classified through the modulus of its
multiplier (f^k)#(p) = |(f^k)'(p)|, computed as the chain-rule product of
the one-step chordal derivative along the cycle, and the two estimators

    (1/(d^k+1)) * sum_{w in R_k}  (1/k) log (f^k)#(w)      (plain)
    (1/(d^k+1)) * sum_{w in R_k*} (1/k) log (f^k)#(w)      (exact period)

are tabulated per k.  Every summand is positive on repelling points, so
each row is nonnegative.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from . import _poly
from .errors import BudgetExceeded, RootFindingFailure
from .geometry import ProjectivePoint, chordal_derivative, chordal_dist
from .ratmap import DEFAULT_DEGREE_BUDGET, RationalMap, evaluate, iterate_map
from .roots import RootSet, SolverOptions, _expand_for_warm_start, solve
from .series import EstimateRow, EstimateSeries

INDIFFERENCE_BAND = 1e-8
SUPERATTRACTING_TOL = 1e-12
EXACT_PERIOD_TOL = 1e-8
EXTENDED_PRECISION_DEGREE = 512   # d^k beyond this starts the ladder at 128


@dataclass
class PeriodicPointRecord:
    point: ProjectivePoint
    period: int
    exact_period: bool
    multiplier_modulus: float
    klass: str            # repelling | indifferent | attracting | superattracting
    multiplicity: int = 1

    @property
    def is_repelling(self) -> bool:
        return self.klass == "repelling"


def fixed_point_polynomial(f: RationalMap, k: int,
                           precision_bits: int | None = None,
                           max_degree: int = DEFAULT_DEGREE_BUDGET):
    """Ascending coefficients of P_k(z) - z Q_k(z) where f^k = P_k / Q_k.

    The homogeneous fixed point divisor has degree d^k + 1; the affine
    polynomial may fall short of that, the deficiency being the
    multiplicity of the fixed point at infinity (appended by the caller).
    """
    fk = iterate_map(f, k, max_degree=max_degree, precision_bits=precision_bits)
    num = list(fk.num)
    den = list(fk.den)
    shifted = [0 * den[0]] + den
    bits = precision_bits or f.field.precision_bits
    # mpmath rounds every operation (even + 0) to the ambient precision,
    # so the combination must run under the construction precision
    with mp.workprec(max(bits, 53)):
        return _poly.poly_add(num, shifted, scale_b=-1)


def _classification(modulus: float) -> str:
    if modulus < SUPERATTRACTING_TOL:
        return "superattracting"
    if abs(modulus - 1.0) <= INDIFFERENCE_BAND:
        return "indifferent"
    if modulus < 1.0:
        return "attracting"
    return "repelling"


def _proper_divisors(k: int):
    return [j for j in range(1, k) if k % j == 0]


def multiplier_modulus(f: RationalMap, p: ProjectivePoint, k: int) -> float:
    """(f^k)#(p) as the chain product of f# along the orbit of p.

    At a fixed point of f^k the chordal correction factors telescope away,
    so this equals |(f^k)'(p)| (and is chart-free at infinity).
    """
    z = p
    prod = 1.0
    for _ in range(k):
        prod *= chordal_derivative(f, z)
        z = evaluate(f, z)
    return prod


def _solve_fixed_points(f: RationalMap, k: int,
                        max_degree: int) -> RootSet:
    """Fixed points of f^k with construction and solve in lock step.

    The solver's forward-error verdict drives re-construction of the
    polynomial at the suggested precision, since coefficient rounding at
    build time is as damaging as iteration rounding.
    """
    dk = f.degree ** k
    prec = 53 if dk <= EXTENDED_PRECISION_DEGREE else 128
    max_bits = SolverOptions().max_precision_bits
    init = None
    while True:
        coeffs = fixed_point_polynomial(f, k, precision_bits=prec,
                                        max_degree=max_degree)
        opts = SolverOptions(precision_bits=prec, target_degree=dk + 1,
                             escalate=False)
        try:
            return solve(coeffs, opts, init=init)
        except RootFindingFailure as exc:
            nxt = exc.suggested_bits or 2 * prec
            if nxt <= prec or nxt > max_bits:
                raise
            if exc.best_effort is not None:
                clusters = [(p.as_complex(), m)
                            for p, m in exc.best_effort.finite_roots()]
                init = _expand_for_warm_start(clusters, prec)
            prec = nxt


@functools.lru_cache(maxsize=128)
def _periodic_points_cached(f: RationalMap, k: int, max_degree: int):
    rs = _solve_fixed_points(f, k, max_degree)
    records = []
    for p, mult in rs.roots:
        mod = multiplier_modulus(f, p, k)
        klass = _classification(mod)
        exact = True
        for j in _proper_divisors(k):
            fj = p
            for _ in range(j):
                fj = evaluate(f, fj)
            if chordal_dist(fj, p, f.field) <= EXACT_PERIOD_TOL:
                exact = False
                break
        records.append(PeriodicPointRecord(p, k, exact, mod, klass, mult))
    return tuple(records)


def periodic_points(f: RationalMap, k: int,
                    max_degree: int = DEFAULT_DEGREE_BUDGET):
    """All d^k + 1 fixed points of f^k (with multiplicity), classified."""
    if not f.field.is_archimedean:
        raise ValueError("periodic point search needs the archimedean backend")
    return list(_periodic_points_cached(f, k, max_degree))


def estimator_rep(f: RationalMap, k_max: int, strict: bool = False,
                  max_degree: int = DEFAULT_DEGREE_BUDGET) -> EstimateSeries:
    """Repelling-average exponent estimates for k = 1..k_max.

    strict=True restricts to points of exact period k.  Solver failures
    mark the row instead of fabricating a value.
    """
    tag = "rep_strict" if strict else "rep"
    series = EstimateSeries(tag, metadata={
        "estimator": tag, "degree": f.degree, "k_max": k_max})
    warnings = []
    for k in range(1, k_max + 1):
        t0 = time.perf_counter()
        try:
            records = periodic_points(f, k, max_degree=max_degree)
        except (RootFindingFailure, BudgetExceeded) as exc:
            series.rows.append(EstimateRow(
                k, 0, 0, float("nan"), failed=True, note=str(exc),
                runtime_ms=1e3 * (time.perf_counter() - t0)))
            continue
        n_points = sum(r.multiplicity for r in records)
        total = 0.0
        n_rep = 0
        for r in records:
            if not r.is_repelling:
                if r.klass == "indifferent":
                    warnings.append(f"k={k}: indifferent point excluded "
                                    f"(|multiplier|={r.multiplier_modulus:.12g})")
                continue
            if strict and not r.exact_period:
                continue
            total += r.multiplicity * math.log(r.multiplier_modulus) / k
            n_rep += r.multiplicity
        estimate = total / (f.degree ** k + 1)
        series.rows.append(EstimateRow(
            k, n_points, n_rep, estimate,
            runtime_ms=1e3 * (time.perf_counter() - t0)))
    if warnings:
        series.metadata["warnings"] = warnings
    return series


def nonrepelling_census(f: RationalMap, k_max: int,
                        dedup_tol: float = 1e-8,
                        max_degree: int = DEFAULT_DEGREE_BUDGET):
    """Cumulative distinct non-repelling periodic points up to each k.

    Empirical check of the finiteness hypothesis behind the repelling
    estimators; returns [(k, count, points)] with points deduplicated by
    chordal distance.
    """
    found = []
    out = []
    for k in range(1, k_max + 1):
        for r in periodic_points(f, k, max_degree=max_degree):
            if r.is_repelling:
                continue
            if not any(chordal_dist(r.point, q, f.field) <= dedup_tol
                       for q in found):
                found.append(r.point)
        out.append((k, len(found), list(found)))
    return out


def composed_multiplier_modulus(f: RationalMap, p: ProjectivePoint,
                                k: int) -> float:
    """|(f^k)'(p)| from the derivative of the composed map.

    Independent route for the chain-rule value, used as a consistency
    check on simple repelling points.
    """
    fk = iterate_map(f, k)
    return float(chordal_derivative(fk, p))
