"""Iterated preimage trees and the preimage-average exponent estimator.

Full mode expands f^{-1} level by level (level j carries d^j points with
multiplicity) and evaluates

    estimate_k = (1/d^k) sum_{w at level k} mult(w) * log f#(w),

the leaf-level average, not a path sum.  Sampled mode draws backward
paths, each step choosing a preimage with probability multiplicity / d,
and averages log f# over path endpoints; sampling is reproducible from
the seed.

Targets on (or numerically indistinguishable from) the excluded sets,
the exceptional points and forward critical orbits, are refused unless
forced; a forced run over a critical preimage reports -inf honestly
instead of clamping.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import BudgetExceeded, RootFindingFailure, TargetRejected
from .geometry import (COMPLEX, ProjectivePoint, chordal_derivative,
                       normalize_point)
from .ratmap import DEFAULT_DEGREE_BUDGET, RationalMap
from .roots import SolverOptions, solve
from .series import EstimateRow, EstimateSeries


# ---------------------------------------------------------------------------
# single-target preimages through the solver
# ---------------------------------------------------------------------------

def preimage_coefficients(f: RationalMap, a: ProjectivePoint):
    """Ascending coefficients of y_a P(z) - x_a Q(z)."""
    an = normalize_point(a, f.field)
    return [an.y * pc - an.x * qc for pc, qc in zip(f.num, f.den)]


def preimages(f: RationalMap, a: ProjectivePoint):
    """f^{-1}(a) as [(point, multiplicity)], multiplicities summing to d."""
    coeffs = [complex(c) for c in preimage_coefficients(f, a)]
    rs = solve(coeffs, SolverOptions(target_degree=f.degree))
    return rs.roots


# ---------------------------------------------------------------------------
# full trees
# ---------------------------------------------------------------------------

@dataclass
class PreimageTree:
    target: ProjectivePoint
    depth: int
    levels: list                  # levels[j] = [(point, multiplicity)]
    mode: str = "full"            # full | sampled
    n_paths: int | None = None
    seed: int | None = None

    def level_mass(self, j: int) -> int:
        return sum(m for _, m in self.levels[j])

    def to_json_dict(self) -> dict:
        def enc(p: ProjectivePoint):
            if p.is_infinity:
                return {"inf": True}
            z = p.as_complex()
            return {"re": z.real, "im": z.imag}

        return {
            "target": enc(normalize_point(self.target, COMPLEX)),
            "depth": self.depth,
            "mode": self.mode,
            "n_paths": self.n_paths,
            "seed": self.seed,
            "levels": [[{**enc(p), "mult": m} for p, m in lvl]
                       for lvl in self.levels],
        }


def build_tree(f: RationalMap, a: ProjectivePoint, depth: int,
               max_points: int = DEFAULT_DEGREE_BUDGET) -> PreimageTree:
    """Full preimage tree of a to the given depth (level j has d^j points)."""
    if f.degree ** depth > max_points:
        raise BudgetExceeded(
            f"full tree would hold {f.degree}^{depth} points; "
            f"budget is {max_points} (use sampled mode)")
    levels = [[(normalize_point(a, f.field), 1)]]
    for _ in range(depth):
        nxt = []
        for pt, mult in levels[-1]:
            for w, m in preimages(f, pt):
                nxt.append((w, m * mult))
        levels.append(nxt)
    return PreimageTree(a, depth, levels)


# ---------------------------------------------------------------------------
# vectorized backward stepping (shared with the Monte Carlo oracle)
# ---------------------------------------------------------------------------

def _batched_preimage_step(f: RationalMap, zx: np.ndarray, zy: np.ndarray,
                           rng: np.random.Generator):
    """One backward step for a batch of homogeneous targets.

    Solves P(z) - (x/y) Q(z) = 0 per batch entry (homogeneously
    y P - x Q) and picks one of the d root slots uniformly, which weights
    preimages by multiplicity / d.  Degree 2 uses the stable quadratic
    formula; higher degrees use stacked companion eigenvalues.
    """
    d = f.degree
    num = f.np_num()
    den = f.np_den()
    coeffs = zy[:, None] * num[None, :] - zx[:, None] * den[None, :]
    lead = coeffs[:, -1]
    scale = np.abs(coeffs).max(axis=1)
    tiny = np.abs(lead) <= 1e-14 * scale
    roots_x = np.empty((len(zx), d), dtype=complex)
    roots_y = np.ones((len(zx), d), dtype=complex)
    reg = ~tiny
    if reg.any():
        roots_x[reg] = _roots_regular(coeffs[reg], d)
    if tiny.any():
        # near-vanishing leading coefficient: solve the reversed polynomial
        # in u = 1/z; a root z is then the homogeneous pair (1, u), with
        # u = 0 giving the point at infinity.
        rev = np.ascontiguousarray(coeffs[tiny][:, ::-1])
        lead = rev[:, -1]
        bad = np.abs(lead) <= 1e-16 * scale[tiny]
        if bad.any():
            # both ends ~0 happens only on a measure-zero target; regularize
            rev[bad, -1] = 1e-16 * scale[tiny][bad]
        u = _roots_regular(rev, d)
        roots_x[tiny] = 1.0
        roots_y[tiny] = u
    pick = rng.integers(0, d, size=len(zx))
    sel_x = roots_x[np.arange(len(zx)), pick]
    sel_y = roots_y[np.arange(len(zx)), pick]
    m = np.maximum(np.abs(sel_x), np.abs(sel_y))
    return sel_x / m, sel_y / m


def _roots_regular(coeffs: np.ndarray, d: int) -> np.ndarray:
    """Roots of each row of ascending-coefficient polynomials (lead != 0)."""
    monic = coeffs / coeffs[:, -1:]
    if d == 1:
        return -monic[:, :1]
    if d == 2:
        b = monic[:, 1]
        c0 = monic[:, 0]
        sq = np.sqrt(b * b - 4 * c0 + 0j)
        flip = (np.conj(b) * sq).real < 0
        sq = np.where(flip, -sq, sq)
        q = -(b + sq) / 2
        r1 = q
        safe_q = np.where(q == 0, 1.0, q)
        r2 = np.where(q == 0, 0.0, c0 / safe_q)
        return np.stack([r1, r2], axis=1)
    n = coeffs.shape[0]
    comp = np.zeros((n, d, d), dtype=complex)
    comp[:, 1:, :-1] = np.eye(d - 1)
    comp[:, :, -1] = -monic[:, :-1]
    return np.linalg.eigvals(comp)


def _log_deriv_batch(f: RationalMap, zx: np.ndarray, zy: np.ndarray):
    """log f# at a batch of homogeneous points (max-norm ~ 1)."""
    d = f.degree
    wr = np.array([complex(c) for c in f.wronskian()], dtype=complex)
    wdeg = 2 * d - 2
    wv = _eval_homog_batch(wr, zx, zy, wdeg)
    pv = _eval_homog_batch(f.np_num(), zx, zy, d)
    qv = _eval_homog_batch(f.np_den(), zx, zy, d)
    norm2 = np.abs(zx) ** 2 + np.abs(zy) ** 2
    fsharp = np.abs(wv) * norm2 / (np.abs(pv) ** 2 + np.abs(qv) ** 2)
    with np.errstate(divide="ignore"):
        return np.log(fsharp)


def _eval_homog_batch(coeffs: np.ndarray, x: np.ndarray, y: np.ndarray,
                      degree: int) -> np.ndarray:
    big_y = np.abs(y) >= np.abs(x)
    safe_y = np.where(big_y, y, 1.0)
    safe_x = np.where(big_y, 1.0, x)
    t = np.where(big_y, x / safe_y, y / safe_x)
    pad = degree + 1 - len(coeffs)
    asc = np.concatenate([coeffs, np.zeros(pad, dtype=complex)]) if pad > 0 \
        else coeffs
    accf = np.zeros_like(t)      # ascending Horner in t = x/y
    for c in asc[::-1]:
        accf = accf * t + c
    accr = np.zeros_like(t)      # descending (reversed) for t = y/x
    for c in asc:
        accr = accr * t + c
    base = np.where(big_y, y, x) ** degree
    return np.where(big_y, accf, accr) * base


# ---------------------------------------------------------------------------
# estimator and samplers
# ---------------------------------------------------------------------------

def _screen_target(f, a, force: bool, horizon: int):
    from .diagnostics import bad_target_scan
    report = bad_target_scan(f, a, horizon=horizon)
    if report.flagged and not force:
        raise TargetRejected(
            "target rejected by bad-target scan: " + report.reason(),
            report=report)
    return report


def estimator_preimage(f: RationalMap, a: ProjectivePoint, k_max: int,
                       mode: str = "full", n_paths: int = 10_000,
                       seed: int = 0, force: bool = False,
                       scan_horizon: int = 64,
                       max_points: int = DEFAULT_DEGREE_BUDGET
                       ) -> EstimateSeries:
    """Preimage-average exponent estimates for k = 1..k_max.

    mode "full" expands the whole tree (budget d^k_max <= max_points);
    mode "mc" draws n_paths backward paths.  The target must pass the
    bad-target scan unless force=True; a forced run over a critical
    preimage yields -inf rows, flagged rather than clamped.
    """
    report = _screen_target(f, a, force, scan_horizon)
    tag = "preimage" if mode == "full" else "preimage_mc"
    series = EstimateSeries(tag, metadata={
        "estimator": tag, "degree": f.degree, "k_max": k_max, "seed": seed,
        "target_report": report.to_json_dict()})
    if mode == "full":
        _run_full(f, a, k_max, series, max_points)
    elif mode == "mc":
        _run_sampled(f, a, k_max, n_paths, seed, series)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return series


def _run_full(f, a, k_max, series, max_points):
    d = f.degree
    if d ** k_max > max_points:
        raise BudgetExceeded(
            f"full tree needs {d}^{k_max} points, budget {max_points}; "
            "switch to sampled mode")
    level = [(normalize_point(a, f.field), 1)]
    for k in range(1, k_max + 1):
        t0 = time.perf_counter()
        try:
            nxt = []
            for pt, mult in level:
                for w, m in preimages(f, pt):
                    nxt.append((w, m * mult))
        except RootFindingFailure as exc:
            series.rows.append(EstimateRow(
                k, 0, 0, float("nan"), failed=True, note=str(exc),
                runtime_ms=1e3 * (time.perf_counter() - t0)))
            return
        level = nxt
        total = 0.0
        hit_critical = False
        for w, m in level:
            fs = chordal_derivative(f, w)
            if fs == 0.0:
                hit_critical = True
                total = -math.inf
                break
            total += m * math.log(fs)
        n_pts = sum(m for _, m in level)
        est = total / d ** k if not hit_critical else -math.inf
        series.rows.append(EstimateRow(
            k, n_pts, n_pts, est,
            note="critical preimage: log f# = -inf" if hit_critical else "",
            runtime_ms=1e3 * (time.perf_counter() - t0)))


def _run_sampled(f, a, k_max, n_paths, seed, series):
    rng = np.random.default_rng(seed)
    an = normalize_point(a, f.field)
    zx = np.full(n_paths, complex(an.x))
    zy = np.full(n_paths, complex(an.y))
    for k in range(1, k_max + 1):
        t0 = time.perf_counter()
        zx, zy = _batched_preimage_step(f, zx, zy, rng)
        logs = _log_deriv_batch(f, zx, zy)
        est = float(np.mean(logs))
        se = float(np.std(logs, ddof=1) / math.sqrt(n_paths)) \
            if n_paths > 1 else 0.0
        series.rows.append(EstimateRow(
            k, n_paths, n_paths, est, stderr=se,
            runtime_ms=1e3 * (time.perf_counter() - t0)))


@dataclass
class BackwardPath:
    points: list
    complete: bool = True
    note: str = ""


def backward_orbit_sample(f: RationalMap, a: ProjectivePoint, length: int,
                          seed: int = 0) -> BackwardPath:
    """One backward orbit (a = w0, w1, ..., w_m) with f(w_{j+1}) = w_j.

    Each step picks a preimage with probability multiplicity / d;
    deterministic under a fixed seed.  A solver failure aborts the path
    and marks the result instead of raising.
    """
    rng = np.random.default_rng(seed)
    path = [normalize_point(a, f.field)]
    d = f.degree
    for _ in range(length):
        try:
            pre = preimages(f, path[-1])
        except RootFindingFailure as exc:
            return BackwardPath(path, complete=False, note=str(exc))
        weights = np.array([m for _, m in pre], dtype=float) / d
        idx = int(rng.choice(len(pre), p=weights))
        path.append(pre[idx][0])
    return BackwardPath(path)
