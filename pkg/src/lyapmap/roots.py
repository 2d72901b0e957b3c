"""Simultaneous complex root finding with multiplicity clustering.

The engine behind the periodic-point and preimage equations.  Strategy:

* initial points on scaled circles from the coefficient Newton polygon
  (Bini-style), deterministic;
* Aberth-Ehrlich simultaneous iteration (numpy-vectorized in double
  precision, mpmath scalars above 53 bits), with per-root freezing once
  the residual is at rounding level;
* clusters of approximations within the cluster radius merge into one
  root with summed multiplicity;
* a verification pass at twice the working precision computes, per root,
  the relative residual and a first-order forward-error estimate
  eps * sum|c_i||r|^i / |p'(r)| (m-th-root scaled for multiple roots).

Backward-stable garbage is invisible to residuals alone, so escalation is
driven by the forward-error estimate: if it misses position_tol the solve
is re-run at a precision predicted from the measured conditioning, up to
max_precision_bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import mpmath as mp
import numpy as np

from ._poly import poly_eval_many
from .errors import NoConvergence, RootFindingFailure
from .geometry import INFINITY, ProjectivePoint


@dataclass(frozen=True)
class SolverOptions:
    precision_bits: int = 53
    target_degree: int | None = None
    position_tol: float = 1e-12      # relative forward-error target
    residual_margin: float = 1e8     # accepted multiple of eval rounding
    max_sweeps: int = 600
    restarts: int = 3
    escalate: bool = True
    max_precision_bits: int = 768


@dataclass
class RootSet:
    """Roots with multiplicities; multiplicities sum to the declared degree
    (points at infinity included when the leading coefficients vanish)."""

    roots: list                      # [(ProjectivePoint, multiplicity)]
    residual: float                  # max relative residual over roots
    position_error: float            # max estimated relative forward error
    sweeps: int
    restarts: int
    precision_bits: int

    def finite_roots(self):
        return [(p, m) for p, m in self.roots if not p.is_infinity]

    def total_multiplicity(self) -> int:
        return sum(m for _, m in self.roots)


# ---------------------------------------------------------------------------
# initial points
# ---------------------------------------------------------------------------

def _upper_hull(pts):
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _bini_radii(abs_coeffs):
    """(radius, count) per Newton-polygon segment of the coefficient moduli."""
    pts = [(i, math.log(a)) for i, a in enumerate(abs_coeffs) if a > 0]
    hull = _upper_hull(pts)
    out = []
    for (i1, u1), (i2, u2) in zip(hull, hull[1:]):
        out.append((math.exp((u1 - u2) / (i2 - i1)), i2 - i1))
    return out


def _bini_initial_double(c: np.ndarray, attempt: int) -> np.ndarray:
    segs = _bini_radii(np.abs(c))
    pts = []
    theta0 = 0.61803398875 + 0.37 * attempt
    for s, (r, m) in enumerate(segs):
        for j in range(m):
            ang = 2 * math.pi * ((j + 0.5) / m + theta0 + 0.733 * s)
            pts.append(r * complex(math.cos(ang), math.sin(ang)))
    return np.array(pts, dtype=complex)


# ---------------------------------------------------------------------------
# Aberth iteration, double path
# ---------------------------------------------------------------------------

def _aberth_double(c: np.ndarray, opts: SolverOptions):
    n = len(c) - 1
    c = c / np.abs(c).max()
    dc = c[1:] * np.arange(1, n + 1)
    ac = np.abs(c)
    eps = 2.0 ** -52
    best = None
    for attempt in range(opts.restarts + 1):
        z = _bini_initial_double(c, attempt)
        frozen = np.zeros(n, dtype=bool)
        for sweep in range(opts.max_sweeps):
            pv = poly_eval_many(c, z)
            dv = poly_eval_many(dc, z)
            scale = poly_eval_many(ac, np.abs(z)).real
            frozen |= np.abs(pv) <= 4 * eps * scale
            if frozen.all():
                return z, sweep + 1, attempt
            dv_safe = np.where(dv == 0, 1e-290, dv)
            w = pv / dv_safe
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            s = (1.0 / diff).sum(axis=1)
            denom = 1.0 - w * s
            denom = np.where(np.abs(denom) < 1e-290, 1.0, denom)
            step = np.where(frozen, 0.0, w / denom)
            mags = np.abs(step)
            cap = 0.5 * (1.0 + np.abs(z))
            big = mags > cap
            step[big] *= cap[big] / mags[big]
            z = z - step
            active = ~frozen
            if not active.any() or np.all(
                    mags[active] <= 1e-15 * (1.0 + np.abs(z[active]))):
                return z, sweep + 1, attempt
        best = z
    return best, opts.max_sweeps, opts.restarts


# ---------------------------------------------------------------------------
# Aberth iteration, extended precision path
# ---------------------------------------------------------------------------

def _aberth_mp(cs, prec: int, opts: SolverOptions, init=None):
    """Gauss-Seidel Aberth sweeps with mpmath scalars.

    Points switch to plain Newton steps (skipping the O(n) repulsion sum)
    once their step stays tiny for two sweeps, which removes most of the
    O(n^2) cost after the cloud separates; a growing Newton step flips the
    point back.  A warm start (init) from a lower-precision stage makes
    escalation stages cost a handful of refinement sweeps.
    """
    n = len(cs) - 1
    with mp.workprec(prec):
        m = max(abs(ci) for ci in cs)
        c = [ci / m for ci in cs]
        dc = [c[i] * i for i in range(1, n + 1)]
        ac = [abs(ci) for ci in c]
        crev = c[::-1]
        dcrev = dc[::-1]
        acrev = ac[::-1]
        eps = mp.mpf(2) ** (1 - prec)
        stop = mp.mpf(2) ** (8 - prec)
        newton_gate = mp.mpf(1e-8)

        def ev(rev, zz):
            acc = mp.mpc(0)
            for cc in rev:
                acc = acc * zz + cc
            return acc

        def ev_abs(rev, az):
            acc = mp.mpf(0)
            for cc in rev:
                acc = acc * az + cc
            return acc

        max_sweeps = min(opts.max_sweeps, 150)
        if init is not None:
            attempts = [None, 0, 1]
        else:
            attempts = list(range(min(opts.restarts, 2) + 1))
        z = None
        sweeps = 0
        for which, attempt in enumerate(attempts):
            if attempt is None:
                z = [mp.mpc(v) for v in init]
            else:
                z = [mp.mpc(v) for v in _bini_initial_double(
                    np.array([complex(x) for x in c]), attempt)]
            frozen = [False] * n
            small_runs = [0] * n
            for sweep in range(max_sweeps):
                sweeps = sweep + 1
                max_rel_step = mp.mpf(0)
                for i in range(n):
                    if frozen[i]:
                        continue
                    zi = z[i]
                    pv = ev(crev, zi)
                    scale = ev_abs(acrev, abs(zi))
                    if abs(pv) <= 4 * eps * scale:
                        frozen[i] = True
                        continue
                    dvv = ev(dcrev, zi)
                    if dvv == 0:
                        dvv = mp.mpc(eps)
                    w = pv / dvv
                    if small_runs[i] >= 2:
                        step = w
                    else:
                        s = mp.mpc(0)
                        for j in range(n):
                            if j != i:
                                dz = zi - z[j]
                                if dz != 0:
                                    s += 1 / dz
                        denom = 1 - w * s
                        if abs(denom) < eps:
                            denom = mp.mpc(1)
                        step = w / denom
                    cap = (1 + abs(zi)) / 2
                    if abs(step) > cap:
                        step *= cap / abs(step)
                    z[i] = zi - step
                    rel = abs(step) / (1 + abs(z[i]))
                    if rel <= newton_gate:
                        small_runs[i] += 1
                    else:
                        small_runs[i] = 0
                    if rel > max_rel_step:
                        max_rel_step = rel
                if all(frozen) or max_rel_step <= stop:
                    return z, sweeps, which
        return z, sweeps, len(attempts) - 1


# ---------------------------------------------------------------------------
# closed forms for tiny degrees
# ---------------------------------------------------------------------------

def _closed_form_small(c, prec: int):
    n = len(c) - 1
    if prec <= 53:
        if n == 1:
            return [complex(-c[0] / c[1])]
        a, b, c0 = complex(c[2]), complex(c[1]), complex(c[0])
        sq = np.sqrt(complex(b * b - 4 * a * c0))
        if (b.conjugate() * sq).real < 0:
            sq = -sq
        q = -(b + sq) / 2
        return [q / a, c0 / q]
    with mp.workprec(prec):
        if n == 1:
            return [mp.mpc(-c[0]) / mp.mpc(c[1])]
        a, b, c0 = mp.mpc(c[2]), mp.mpc(c[1]), mp.mpc(c[0])
        sq = mp.sqrt(b * b - 4 * a * c0)
        if mp.re(mp.conj(b) * sq) < 0:
            sq = -sq
        q = -(b + sq) / 2
        return [q / a, c0 / q]


# ---------------------------------------------------------------------------
# clustering and verification
# ---------------------------------------------------------------------------

def _cluster_radius_factor(prec: int) -> float:
    if prec <= 53:
        return 1e-7
    return 10.0 * 2.0 ** (-prec / 3)


def _cluster(points, prec: int):
    """Greedy connected-component merge of nearby approximations."""
    factor = _cluster_radius_factor(prec)
    pts = [complex(p) for p in points]
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    arr = np.array(pts)
    for i in range(n):
        d = np.abs(arr - arr[i])
        radius = factor * (1.0 + np.minimum(np.abs(arr), abs(arr[i])))
        for j in np.nonzero(d <= radius)[0]:
            ri, rj = find(i), find(int(j))
            if ri != rj:
                parent[rj] = ri
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    clusters = []
    for idx in groups.values():
        sel = [points[i] for i in idx]
        if len(sel) == 1:
            center = sel[0]
        else:
            with mp.workprec(max(prec, 53) + 16):
                center = mp.fsum([mp.mpc(s).real for s in sel]) / len(sel) \
                    + 1j * mp.fsum([mp.mpc(s).imag for s in sel]) / len(sel)
        clusters.append((center, len(idx)))
    clusters.sort(key=lambda t: (complex(t[0]).real, complex(t[0]).imag))
    return clusters


def _verify(coeffs, clusters, prec: int, opts: SolverOptions):
    """Residuals and forward-error estimates at 2x precision.

    Returns (max_rel_residual, max_rel_position_error, suggested_bits).
    """
    if not clusters:
        return 0.0, 0.0, prec
    check_prec = 2 * prec + 64
    eps = mp.mpf(2) ** (1 - prec)
    postol = mp.mpf(opts.position_tol)
    max_res = mp.mpf(0)
    max_err = mp.mpf(0)
    need_bits = prec
    with mp.workprec(check_prec):
        c = [mp.mpc(x) for x in coeffs]
        ac = [abs(x) for x in c]
        derivs = {1: [c[i] * i for i in range(1, len(c))]}

        def dcoeffs(order):
            if order not in derivs:
                lower = dcoeffs(order - 1)
                derivs[order] = [lower[i] * i for i in range(1, len(lower))]
            return derivs[order]

        for center, mult in clusters:
            r = mp.mpc(center)
            absr = abs(r)
            pv = mp.polyval(c[::-1], r)
            scale = mp.polyval(ac[::-1], absr)
            if scale == 0:
                continue
            rel = abs(pv) / scale
            max_res = max(max_res, rel)
            dm = dcoeffs(mult)
            dv = mp.polyval(dm[::-1], r) / mp.factorial(mult)
            if dv == 0:
                err = mp.mpf(1)
            else:
                err = (eps * scale / abs(dv)) ** (mp.mpf(1) / mult)
            rel_err = err / (1 + absr)
            max_err = max(max_err, rel_err)
            if rel_err > postol and dv != 0:
                # eps_needed = |dv| (postol (1+|r|))^mult / scale
                target = abs(dv) * (postol * (1 + absr)) ** mult / scale
                if target > 0:
                    need_bits = max(need_bits,
                                    int(mp.ceil(-mp.log(target, 2))) + 8)
    suggested = max(need_bits, prec + 64)
    suggested = ((suggested + 63) // 64) * 64
    return float(max_res), float(max_err), suggested


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------

def _expand_for_warm_start(clusters, prec_prev: int):
    """Initial points for the next ladder stage from previous clusters.

    Multiplicity-m clusters fan out on a small circle (distinct starting
    points); the exact zero cluster is excluded since zero roots are
    factored before iteration.
    """
    pts = []
    for center, mult in clusters:
        z = complex(center)
        if z == 0:
            continue
        if mult == 1:
            pts.append(center)
            continue
        spread = (1.0 + abs(z)) * 2.0 ** (-prec_prev / (2.0 * mult))
        for j in range(mult):
            ang = 2 * math.pi * j / mult + 0.37
            pts.append(z + spread * complex(math.cos(ang), math.sin(ang)))
    return pts


def _solve_at(coeffs, prec: int, opts: SolverOptions, init=None):
    c = list(coeffs)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    m0 = 0
    while m0 < len(c) - 1 and c[m0] == 0:
        m0 += 1
    reduced = c[m0:]
    n = len(reduced) - 1
    sweeps = restarts = 0
    if init is not None and len(init) != n:
        init = None
    if n == 0:
        finite = []
    elif n <= 2:
        finite = _closed_form_small(reduced, prec)
    elif prec <= 53:
        arr = np.array([complex(x) for x in reduced], dtype=complex)
        z, sweeps, restarts = _aberth_double(arr, opts)
        finite = list(z)
    else:
        with mp.workprec(prec):
            cs = [mp.mpc(x) for x in reduced]
        z, sweeps, restarts = _aberth_mp(cs, prec, opts, init=init)
        finite = list(z)
    clusters = _cluster(finite, prec) if finite else []
    res, err, suggested = _verify(reduced, clusters, prec, opts)
    warm = _expand_for_warm_start(clusters, prec)
    if m0:
        clusters.insert(0, (0.0, m0))
    ok = (res <= opts.residual_margin * 2.0 ** (1 - prec)
          and err <= opts.position_tol)
    return clusters, res, err, suggested, sweeps, restarts, ok, warm


def solve(coeffs, opts: SolverOptions = SolverOptions(), init=None) -> RootSet:
    """All roots of the polynomial, clustered by multiplicity.

    coeffs is ascending; exact zeros in the leading entries lower the
    affine degree, and if target_degree exceeds the affine degree the
    difference is returned as a root at infinity with that multiplicity.
    init optionally seeds the iteration (one point per root of the
    zero-stripped polynomial).

    Raises RootFindingFailure (with best effort and a precision
    suggestion) if accuracy targets cannot be met within the escalation
    budget, or immediately when escalate=False.
    """
    c = list(coeffs)
    if all(x == 0 for x in c):
        raise ValueError("zero polynomial has no well-defined root set")
    prec = opts.precision_bits
    total_restarts = 0
    init = None
    while True:
        clusters, res, err, suggested, sweeps, restarts, ok, warm = \
            _solve_at(c, prec, opts, init=init)
        total_restarts += restarts
        roots = [(ProjectivePoint.from_affine(complex(z)), m)
                 for z, m in clusters]
        finite_mult = sum(m for _, m in roots)
        if opts.target_degree is not None:
            deficiency = opts.target_degree - finite_mult
            if deficiency < 0:
                raise RootFindingFailure(
                    f"found {finite_mult} roots, more than target degree "
                    f"{opts.target_degree}")
            if deficiency > 0:
                roots.append((INFINITY, deficiency))
        rs = RootSet(roots, res, err, sweeps, total_restarts, prec)
        if ok:
            return rs
        # conditioning measured at off roots under-reports, so escalate at
        # least geometrically alongside the model-based suggestion
        nxt = min(opts.max_precision_bits, max(suggested, 2 * prec))
        nxt = ((nxt + 63) // 64) * 64
        if not opts.escalate:
            raise RootFindingFailure(
                f"accuracy target missed at {prec} bits "
                f"(residual {res:.2e}, position error {err:.2e})",
                best_effort=rs, suggested_bits=nxt)
        if nxt <= prec:
            raise RootFindingFailure(
                f"cannot reach accuracy target within "
                f"{opts.max_precision_bits} bits (needs ~{suggested})",
                best_effort=rs, suggested_bits=suggested)
        prec = nxt
        init = warm


def polish(root, coeffs, precision_bits: int = 113):
    """Newton-refine an approximate simple root at the given precision.

    Quadratic convergence is monitored through the residual; a diverging
    iteration raises NoConvergence so the caller can keep the original.
    """
    with mp.workprec(precision_bits + 16):
        c = [mp.mpc(x) for x in coeffs]
        dc = [c[i] * i for i in range(1, len(c))]
        crev, dcrev = c[::-1], dc[::-1]
        z = mp.mpc(root)
        last = mp.inf
        stalls = 0
        for _ in range(precision_bits):
            pv = mp.polyval(crev, z)
            dv = mp.polyval(dcrev, z)
            if dv == 0 or not mp.isfinite(pv):
                raise NoConvergence("Newton hit a critical point")
            step = pv / dv
            z = z - step
            snorm = abs(step) / (1 + abs(z))
            if snorm >= last:
                stalls += 1
                if stalls > 2:
                    break
            else:
                stalls = 0
            last = snorm
            if snorm < mp.mpf(2) ** (4 - precision_bits):
                break
        else:
            raise NoConvergence("Newton did not converge")
        if not mp.isfinite(z):
            raise NoConvergence("Newton diverged")
        return z


def relative_residual(coeffs, root, precision_bits: int = 113) -> float:
    """|p(root)| / sum_i |c_i| |root|^i, evaluated in extended precision."""
    with mp.workprec(precision_bits + 32):
        c = [mp.mpc(x) for x in coeffs]
        r = mp.mpc(root)
        pv = mp.polyval(c[::-1], r)
        scale = mp.polyval([abs(x) for x in c][::-1], abs(r))
        if scale == 0:
            return 0.0
        return float(abs(pv) / scale)
