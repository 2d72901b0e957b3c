"""Empirical side-condition checks: chordal potentials, the critical-orbit
separation bound, the divisor-period overlap bound, and target screening
for the preimage estimator.

The separation and overlap bounds are theorems for true inputs, so a
reported violation is a defect signal (bad numerics or misclassification),
never an expected outcome.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .geometry import (COMPLEX, ProjectivePoint, ValuedField,
                       chordal_derivative, chordal_dist, normalize_point,
                       sup_chordal_derivative)
from .ratmap import (RationalMap, classify_critical_orbits, evaluate,
                     exceptional_points, orbit)
from .periodic import periodic_points


# ---------------------------------------------------------------------------
# atomic measures and potentials
# ---------------------------------------------------------------------------

@dataclass
class AtomicMeasure:
    """Finite weighted point set standing in for the k-th level measures."""

    points: list
    weights: list

    @classmethod
    def uniform(cls, points, total_mass: float = 1.0) -> "AtomicMeasure":
        n = len(points)
        return cls(list(points), [total_mass / n] * n)

    @property
    def mass(self) -> float:
        return float(sum(self.weights))

    def potential(self, z: ProjectivePoint, field: ValuedField = COMPLEX):
        return chordal_potential(self, z, field)

    def integrate_log_deriv(self, f: RationalMap) -> float:
        """integral of log f# against the measure; -inf on critical atoms."""
        total = 0.0
        for p, w in zip(self.points, self.weights):
            fs = chordal_derivative(f, p)
            if fs == 0.0:
                return -math.inf
            total += w * math.log(fs)
        return total


def chordal_potential(nu: AtomicMeasure, z: ProjectivePoint,
                      field: ValuedField = COMPLEX) -> float:
    """sum_i w_i log [z, x_i]; -inf exactly when z coincides with an atom.

    Always <= 0 since the chordal distance is bounded by 1.
    """
    total = 0.0
    for p, w in zip(nu.points, nu.weights):
        dist = chordal_dist(z, p, field)
        if dist == 0:
            return -math.inf
        total += w * math.log(dist)
    return total


def repelling_measure(f: RationalMap, k: int,
                      probability: bool = True) -> AtomicMeasure:
    """Atomic measure on the repelling period-k points.

    probability=True normalizes total mass to 1 (the d^k+1 normalization
    leaves mass slightly below 1 and shifts potentials by O(d^-k), which
    matters at the tolerances checked here).
    """
    records = [r for r in periodic_points(f, k) if r.is_repelling]
    pts = [r.point for r in records]
    mults = [r.multiplicity for r in records]
    total = sum(mults) if probability else f.degree ** k + 1
    return AtomicMeasure(pts, [m / total for m in mults])


# ---------------------------------------------------------------------------
# potential convergence toward the equilibrium potential
# ---------------------------------------------------------------------------

@dataclass
class PotentialRow:
    k: int
    value: float
    reference: float

    @property
    def gap(self) -> float:
        return abs(self.value - self.reference)


def _random_clean_target(f: RationalMap, seed: int, horizon: int):
    rng = np.random.default_rng(seed)
    for _ in range(64):
        re, im = rng.uniform(-1.2, 1.2, size=2)
        a = ProjectivePoint.from_affine(complex(re, im))
        if not bad_target_scan(f, a, horizon=horizon).flagged:
            return a
    raise RuntimeError("could not find a clean reference target")


def potential_convergence_check(f: RationalMap, c: ProjectivePoint,
                                k_max: int, extra_depth: int = 4,
                                seed: int = 7,
                                max_points: int = 2 ** 16):
    """Potential of the repelling measures at c versus a deep-preimage proxy.

    The reference value is the potential at c of the depth-(k_max+extra)
    preimage measure of a scanned-clean target, the same approximation
    vehicle that backs the estimators.  Returns ([PotentialRow], ref).
    """
    from .preimage import build_tree
    depth = k_max + extra_depth
    while f.degree ** depth > max_points:
        depth -= 1
    a = _random_clean_target(f, seed, horizon=32)
    tree = build_tree(f, a, depth)
    level = tree.levels[depth]
    total_mass = f.degree ** depth
    ref_measure = AtomicMeasure([p for p, _ in level],
                                [m / total_mass for _, m in level])
    reference = chordal_potential(ref_measure, c, f.field)
    rows = []
    for k in range(1, k_max + 1):
        nu = repelling_measure(f, k)
        rows.append(PotentialRow(k, chordal_potential(nu, c, f.field),
                                 reference))
    return rows, reference


# ---------------------------------------------------------------------------
# critical-orbit separation bound
# ---------------------------------------------------------------------------

@dataclass
class SeparationRow:
    critical: ProjectivePoint
    k: int
    distance: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.distance >= self.bound


@dataclass
class SeparationReport:
    rows: list
    sup_estimate: float
    candidates: list
    excluded: list              # (point, reason)

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def to_json_dict(self) -> dict:
        return {
            "sup_estimate": self.sup_estimate,
            "all_ok": self.all_ok,
            "n_candidates": len(self.candidates),
            "rows": [{"critical": _point_json(r.critical), "k": r.k,
                      "distance": r.distance, "bound": r.bound, "ok": r.ok}
                     for r in self.rows],
        }


def _point_json(p: ProjectivePoint):
    if p.is_infinity:
        return {"inf": True}
    z = p.as_complex()
    return {"re": z.real, "im": z.imag}


def _attracted_to_cycle(f: RationalMap, c: ProjectivePoint,
                        horizon: int = 400, period_max: int = 20,
                        tol: float = 1e-6):
    """Heuristic: does the forward orbit of c settle on an attracting or
    superattracting cycle within the horizon?

    Returns (attracted, detected_period, cycle_multiplier).  The heuristic
    can miss slowly attracted orbits (parabolic basins); reports carry it
    as the classification basis so failures stay auditable.
    """
    pts = orbit(f, c, horizon)
    tail = pts[-(period_max + 1):]
    end = pts[-1]
    for p in range(1, min(period_max, len(tail) - 1) + 1):
        if chordal_dist(end, tail[-1 - p], f.field) < tol:
            mult = 1.0
            w = end
            for _ in range(p):
                mult *= chordal_derivative(f, w)
                w = evaluate(f, w)
            if mult < 1.0 - 1e-6:
                return True, p, mult
            return False, p, mult
    return False, None, None


def przytycki_bound_check(f: RationalMap, k_max: int,
                          attraction_horizon: int = 400,
                          sup_samples: int = 4000) -> SeparationReport:
    """Check [f^k(c), c] >= (1/10) max(1, sup f#)^(1-k) on Julia-critical c.

    Candidates are the critical points not attracted to a detected
    attracting or superattracting cycle within the horizon.  The sup is a
    sampled lower estimate, which can only make the bound harder to meet,
    so passes are trustworthy.
    """
    sup, _ = sup_chordal_derivative(f, sup_samples)
    from .ratmap import critical_points
    cs = critical_points(f)
    candidates, excluded = [], []
    for cp in cs.points:
        attracted, period, mult = _attracted_to_cycle(
            f, cp.point, attraction_horizon)
        if attracted:
            excluded.append((cp.point,
                             f"attracted to period-{period} cycle "
                             f"(multiplier {mult:.3g})"))
        else:
            candidates.append(cp.point)
    rows = []
    base = max(1.0, sup)
    for c in candidates:
        pts = orbit(f, c, k_max)
        for k in range(1, k_max + 1):
            dist = float(chordal_dist(pts[k], c, f.field))
            bound = 0.1 * base ** (1 - k)
            rows.append(SeparationRow(c, k, dist, bound))
    return SeparationReport(rows, sup, candidates, excluded)


# ---------------------------------------------------------------------------
# divisor-period overlap bound
# ---------------------------------------------------------------------------

@dataclass
class OverlapRow:
    k: int
    overlap: int
    bound: float

    @property
    def ok(self) -> bool:
        return self.overlap <= self.bound


@dataclass
class OverlapReport:
    rows: list

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def to_json_dict(self) -> dict:
        return {"all_ok": self.all_ok,
                "rows": [{"k": r.k, "overlap": r.overlap, "bound": r.bound,
                          "ok": r.ok} for r in self.rows]}


def bezout_overlap_check(f: RationalMap, k_max: int,
                         dedup_tol: float = 1e-8) -> OverlapReport:
    """Count repelling points of proper-divisor periods against 2 k d^{k/2}.

    Only divisor levels j < k are enumerated, so the check stays cheap even
    when d^k itself is out of budget.
    """
    rows = []
    for k in range(1, k_max + 1):
        pts = []
        for j in range(1, k):
            if k % j != 0:
                continue
            for r in periodic_points(f, j):
                if not r.is_repelling:
                    continue
                if not any(chordal_dist(r.point, q, f.field) <= dedup_tol
                           for q in pts):
                    pts.append(r.point)
        bound = 2.0 * k * f.degree ** (k / 2.0)
        rows.append(OverlapRow(k, len(pts), bound))
    return OverlapReport(rows)


# ---------------------------------------------------------------------------
# bad-target scan
# ---------------------------------------------------------------------------

@dataclass
class TargetReport:
    target: ProjectivePoint
    horizon: int
    exceptional: bool = False
    preperiodic_hit: bool = False
    preperiodic_witness: tuple | None = None      # (j, critical point)
    ewan_hit: bool = False
    ewan_witness: tuple | None = None             # (j, c, log_dist, -d^(j/2))

    @property
    def flagged(self) -> bool:
        return self.exceptional or self.preperiodic_hit or self.ewan_hit

    def reason(self) -> str:
        parts = []
        if self.exceptional:
            parts.append("target is an exceptional point")
        if self.preperiodic_hit:
            j, c = self.preperiodic_witness
            parts.append(f"on the orbit of a preperiodic critical point "
                         f"(j={j}, c={_point_json(c)})")
        if self.ewan_hit:
            j, c, logd, rad = self.ewan_witness
            parts.append(f"inside the shrinking-ball cover of a wandering "
                         f"critical orbit (j={j}, log dist {logd:.3g} < "
                         f"{rad:.3g})")
        return "; ".join(parts) if parts else "clean"

    def to_json_dict(self) -> dict:
        return {
            "target": _point_json(self.target),
            "horizon": self.horizon,
            "flagged": self.flagged,
            "exceptional": self.exceptional,
            "preperiodic_hit": self.preperiodic_hit,
            "preperiodic_witness": (
                None if self.preperiodic_witness is None else
                {"j": self.preperiodic_witness[0],
                 "critical": _point_json(self.preperiodic_witness[1])}),
            "ewan_hit": self.ewan_hit,
            "ewan_witness": (
                None if self.ewan_witness is None else
                {"j": self.ewan_witness[0],
                 "critical": _point_json(self.ewan_witness[1]),
                 "log_dist": self.ewan_witness[2],
                 "log_radius": self.ewan_witness[3]}),
            "reason": self.reason(),
        }


def bad_target_scan(f: RationalMap, a: ProjectivePoint, horizon: int = 64,
                    tol_orbit: float = 1e-9,
                    classify_horizon: int = 1000) -> TargetReport:
    """Screen a preimage target against the excluded sets.

    Flags a when (i) it is an exceptional point, (ii) it lies on the
    forward orbit (j = 0..horizon) of a preperiodic critical point within
    tol_orbit, or (iii) it falls inside the radius-exp(-d^(j/2)) ball
    around a wandering critical orbit point.  The ball comparison runs in
    log space, since the radii underflow doubles near j ~ 10; the scan is
    a finite-horizon sufficient condition, not a membership proof.
    Undetermined critical orbits are screened under both (ii) and (iii).
    """
    report = TargetReport(a, horizon)
    an = normalize_point(a, f.field)
    for e in exceptional_points(f):
        if chordal_dist(an, e, f.field) <= tol_orbit:
            report.exceptional = True
            break
    cs = classify_critical_orbits(f, horizon=classify_horizon)
    d = f.degree
    for cp in cs.points:
        as_preperiodic = cp.label in ("preperiodic", "undetermined")
        as_wandering = cp.label in ("wandering", "undetermined")
        pts = orbit(f, cp.point, horizon)
        for j, w in enumerate(pts):
            dist = float(chordal_dist(w, an, f.field))
            if as_preperiodic and dist <= tol_orbit \
                    and not report.preperiodic_hit:
                report.preperiodic_hit = True
                report.preperiodic_witness = (j, cp.point)
            if as_wandering and j >= 1 and not report.ewan_hit:
                log_radius = -float(d) ** (j / 2.0)
                log_dist = math.log(dist) if dist > 0 else -math.inf
                if log_dist < log_radius:
                    report.ewan_hit = True
                    report.ewan_witness = (j, cp.point, log_dist, log_radius)
    return report
