"""Root finding for the equations of state and parameter-path sweeps.

solve_branches runs damped Newton from a grid of interior starts (vectorized
over starts), deduplicates the roots, and classifies each one by the
definiteness of the free-energy Hessian.  sweep_profile tracks branches along
an x-path, and detect_catastrophe locates the coupling at which the profile
first becomes multivalued by tracing the nematic stationarity curve and
bisecting on the sign of the minimal x-slope along it.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateBranchSetError, SolverFailureError
from .model import (
    ThermoPoint,
    eos_jacobian_q3,
    eos_residual_q3,
    free_energy_q3,
    probabilities_q3,
)
from .singularity import cusp_residuals


@dataclass(frozen=True)
class SolverConfig:
    grid_points: int = 41
    newton_tol: float = 1e-12
    max_iter: int = 100
    damping_floor: float = 1e-6
    dedupe_radius: float = 1e-8
    domain_margin: float = 1e-9
    continuation_radius: float = 0.05

    def __post_init__(self):
        if min(
            self.grid_points,
            self.newton_tol,
            self.max_iter,
            self.damping_floor,
            self.dedupe_radius,
            self.domain_margin,
            self.continuation_radius,
        ) <= 0:
            raise ValueError("all solver parameters must be positive")
        if self.dedupe_radius <= self.newton_tol:
            raise ValueError("dedupe radius must exceed the Newton tolerance")


@dataclass(frozen=True)
class EquilibriumBranch:
    m1: float
    m2: float
    F: float
    classification: str  # "maximum", "saddle", "minimum"
    newton_residual: float


@dataclass(frozen=True)
class SweepSample:
    x: float
    branches: tuple  # EquilibriumBranch, ordered by persistent branch id
    branch_ids: tuple


@dataclass(frozen=True)
class SweepResult:
    y: float
    t: float
    samples: tuple
    multivalued_intervals: tuple  # (x_start, x_end) where branch count > 1
    count_changes: tuple  # x values where the branch count changes


@dataclass(frozen=True)
class CatastropheReport:
    found: bool
    y: float
    t_c: float = math.nan
    x_c: float = math.nan
    m1: float = math.nan
    m2: float = math.nan
    cusp_residuals: tuple = (math.nan, math.nan)
    at_cusp: bool = False


def _classify(J, tol=1e-9):
    ev = np.linalg.eigvalsh(J)
    if ev[-1] < -tol:
        return "maximum"
    if ev[0] > tol:
        return "minimum"
    return "saddle"


def _interior_scale(m1, m2, d1, d2, margin):
    """Largest step fraction in [0, 1] keeping all p_k >= margin.

    The probabilities are linear in (m1, m2), so the fraction to the boundary
    is exact; we stop at 90% of it.
    """
    p = probabilities_q3(m1, m2, clamp=False)
    dp = np.array([0.5 * (d1 + d2), 0.5 * (d2 - d1), -d2])
    s = 1.0
    for pk, dpk in zip(p, dp):
        if dpk < 0.0:
            s = min(s, 0.9 * (pk - margin) / (-dpk))
    return max(s, 0.0)


def damped_newton(m0, pt: ThermoPoint, cfg: SolverConfig = SolverConfig()):
    """Newton iteration from a single interior start; None on failure."""
    m1, m2 = float(m0[0]), float(m0[1])
    psi = np.array(eos_residual_q3(m1, m2, pt.x, pt.y, pt.t))
    for _ in range(cfg.max_iter):
        res = np.linalg.norm(psi)
        if res <= cfg.newton_tol:
            J = eos_jacobian_q3(m1, m2, pt.t)
            return EquilibriumBranch(
                m1=m1,
                m2=m2,
                F=free_energy_q3(m1, m2, pt.x, pt.y, pt.t),
                classification=_classify(J),
                newton_residual=res,
            )
        J = eos_jacobian_q3(m1, m2, pt.t)
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if det == 0.0:
            return None
        d1 = (-J[1, 1] * psi[0] + J[0, 1] * psi[1]) / det
        d2 = (J[1, 0] * psi[0] - J[0, 0] * psi[1]) / det
        scale = _interior_scale(m1, m2, d1, d2, cfg.domain_margin)
        if scale <= 0.0:
            return None  # trapped at the boundary
        # halve until the residual does not increase (floor guards stagnation)
        lam = scale
        while lam >= cfg.damping_floor:
            trial = (m1 + lam * d1, m2 + lam * d2)
            try:
                psi_t = np.array(eos_residual_q3(*trial, pt.x, pt.y, pt.t))
            except Exception:
                lam *= 0.5
                continue
            if np.linalg.norm(psi_t) <= res or lam <= 2.0 * cfg.damping_floor:
                m1, m2 = trial
                psi = psi_t
                break
            lam *= 0.5
        else:
            return None
    return None


def _newton_batch(m1, m2, pt, cfg):
    """Vectorized Newton over many starts; returns converged points."""
    active = np.ones(m1.shape, dtype=bool)
    margin = cfg.domain_margin
    for _ in range(cfg.max_iter):
        if not active.any():
            break
        a1, a2 = m1[active], m2[active]
        D = a2**2 - a1**2
        psi1 = pt.x + a1 * pt.t - 0.5 * np.log((a1 + a2) / (a2 - a1))
        psi2 = pt.y + (3.0 * a2 - 2.0) * pt.t - 0.5 * np.log(
            D / (4.0 * (a2 - 1.0) ** 2)
        )
        J11 = pt.t - a2 / D
        J12 = a1 / D
        J22 = 3.0 * pt.t - a2 / D + 1.0 / (a2 - 1.0)
        det = J11 * J22 - J12 * J12
        with np.errstate(divide="ignore", invalid="ignore"):
            d1 = (-J22 * psi1 + J12 * psi2) / det
            d2 = (J12 * psi1 - J11 * psi2) / det
        bad = ~np.isfinite(d1) | ~np.isfinite(d2)
        # exact fraction-to-boundary step limit (probabilities are linear in m)
        p1 = 0.5 * (a1 + a2)
        p2 = 0.5 * (a2 - a1)
        p3 = 1.0 - a2
        dp1 = 0.5 * (d1 + d2)
        dp2 = 0.5 * (d2 - d1)
        dp3 = -d2
        scale = np.ones_like(a1)
        for pk, dpk in ((p1, dp1), (p2, dp2), (p3, dp3)):
            with np.errstate(divide="ignore", invalid="ignore"):
                lim = np.where(dpk < 0.0, 0.9 * (pk - margin) / np.where(dpk < 0.0, -dpk, 1.0), 1.0)
            scale = np.minimum(scale, lim)
        scale = np.clip(scale, 0.0, 1.0)
        a1n = a1 + scale * d1
        a2n = a2 + scale * d2
        converged = np.hypot(psi1, psi2) <= cfg.newton_tol
        step = np.hypot(scale * d1, scale * d2)
        stalled = bad | (scale <= 0.0) | (step < 1e-16)
        m1_act = np.where(converged | stalled, a1, a1n)
        m2_act = np.where(converged | stalled, a2, a2n)
        m1[active] = m1_act
        m2[active] = m2_act
        idx = np.flatnonzero(active)
        active[idx[converged | stalled]] = False
    return m1, m2


def solve_branches(pt: ThermoPoint, cfg: SolverConfig = SolverConfig()):
    """All stationary points at pt, deduplicated, sorted by descending F."""
    n = cfg.grid_points
    start_margin = 1e-3
    m2s = np.linspace(start_margin, 1.0 - start_margin, n)
    g1, g2 = [], []
    for m2 in m2s:
        half = m2 - start_margin * m2
        g1.append(np.linspace(-half, half, n))
        g2.append(np.full(n, m2))
    m1 = np.concatenate(g1)
    m2 = np.concatenate(g2)
    m1, m2 = _newton_batch(m1.copy(), m2.copy(), pt, cfg)

    roots = []
    for a, b in zip(m1, m2):
        p = probabilities_q3(a, b, clamp=False)
        if np.any(p <= cfg.domain_margin / 2.0):
            continue
        psi = eos_residual_q3(a, b, pt.x, pt.y, pt.t)
        res = math.hypot(*psi)
        if res > cfg.newton_tol:
            continue
        for r in roots:
            if math.hypot(a - r[0], b - r[1]) <= cfg.dedupe_radius:
                if res < r[2]:
                    r[0], r[1], r[2] = a, b, res
                break
        else:
            roots.append([a, b, res])
    if not roots:
        raise SolverFailureError(f"no stationary point found at {pt}")
    branches = [
        EquilibriumBranch(
            m1=a,
            m2=b,
            F=free_energy_q3(a, b, pt.x, pt.y, pt.t),
            classification=_classify(eos_jacobian_q3(a, b, pt.t)),
            newton_residual=res,
        )
        for a, b, res in roots
    ]
    branches.sort(key=lambda br: -br.F)
    return branches


def select_equilibrium(branches):
    """The free-energy-maximising local maximum, plus a coexistence flag."""
    maxima = [b for b in branches if b.classification == "maximum"]
    if not maxima:
        raise DegenerateBranchSetError("branch set contains no free-energy maximum")
    maxima.sort(key=lambda b: -b.F)
    coexist = len(maxima) > 1 and maxima[0].F - maxima[1].F < 1e-10
    return maxima[0], coexist


def sweep_profile(y: float, xs, t: float, cfg: SolverConfig = SolverConfig()):
    """Branch sets along an ordered x-path at fixed (y, t), with continuation
    matching by nearest neighbour in moment space."""
    xs = list(xs)
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise ValueError("x samples must be strictly increasing")
    samples = []
    next_id = 0
    prev = []  # (branch_id, branch)
    changes = []
    mv_intervals = []
    mv_open = None
    for x in xs:
        try:
            branches = solve_branches(ThermoPoint(x, y, t), cfg)
        except SolverFailureError:
            samples.append(SweepSample(x=x, branches=(), branch_ids=()))
            prev = []
            continue
        assigned = []
        taken = set()
        for br in branches:
            best = None
            for bid, old in prev:
                if bid in taken:
                    continue
                d = math.hypot(br.m1 - old.m1, br.m2 - old.m2)
                if d <= cfg.continuation_radius and (best is None or d < best[1]):
                    best = (bid, d)
            if best is None:
                bid = next_id
                next_id += 1
            else:
                bid = best[0]
                taken.add(bid)
            assigned.append((bid, br))
        samples.append(
            SweepSample(
                x=x,
                branches=tuple(br for _, br in assigned),
                branch_ids=tuple(bid for bid, _ in assigned),
            )
        )
        if prev and len(assigned) != len(prev):
            changes.append(x)
        if len(assigned) > 1 and mv_open is None:
            mv_open = x
        if len(assigned) <= 1 and mv_open is not None:
            mv_intervals.append((mv_open, x))
            mv_open = None
        prev = assigned
    if mv_open is not None:
        mv_intervals.append((mv_open, xs[-1]))
    return SweepResult(
        y=y,
        t=t,
        samples=tuple(samples),
        multivalued_intervals=tuple(mv_intervals),
        count_changes=tuple(changes),
    )


def zero_field_transition(
    t_lo: float = 1.3,
    t_hi: float = 1.5,
    tol: float = 1e-6,
    cfg: SolverConfig = SolverConfig(),
):
    """Coupling t* at which the zero-field equilibrium jumps off the symmetric
    branch m = (0, 2/3), located by bisection on the free-energy gap between
    the best asymmetric maximum and the symmetric branch."""

    def gap(t):
        branches = solve_branches(ThermoPoint(0.0, 0.0, t), cfg)
        f_sym = free_energy_q3(0.0, 2.0 / 3.0, 0.0, 0.0, t)
        asym = [
            b.F
            for b in branches
            if b.classification == "maximum"
            and math.hypot(b.m1, b.m2 - 2.0 / 3.0) > 1e-4
        ]
        return (max(asym) - f_sym) if asym else -math.inf

    if gap(t_lo) >= 0.0 or gap(t_hi) <= 0.0:
        raise SolverFailureError(
            f"[{t_lo}, {t_hi}] does not bracket the zero-field transition"
        )
    while t_hi - t_lo > tol:
        mid = 0.5 * (t_lo + t_hi)
        if gap(mid) <= 0.0:
            t_lo = mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi)


def _psi2_y(m1, m2, y, t):
    return y + (3.0 * m2 - 2.0) * t - 0.5 * math.log(
        (m2 * m2 - m1 * m1) / (4.0 * (m2 - 1.0) ** 2)
    )


def _x_on_curve(m1, m2, t):
    return 0.5 * math.log((m1 + m2) / (m2 - m1)) - m1 * t


def _profile_indicator(y, t, n_m1=1201, n_scan=160):
    """Multivaluedness indicator for the x-profile at fixed (y, t).

    Traces the nematic stationarity curve psi2 = 0 parametrized by m1 (roots in
    m2 by bracketed bisection) and returns (min_slope, location): the minimal
    finite-difference slope of x along the curve and the moment point where it
    is attained.  Negative min_slope (or a fold-back of the curve, i.e. several
    m2 roots at one m1) means the profile m(x) is multivalued.
    """
    eps = 1e-9
    m1s = np.linspace(-1.0 + 1e-6, 1.0 - 1e-6, n_m1)
    lo = np.abs(m1s) + eps
    hi = 1.0 - eps
    frac = np.linspace(0.0, 1.0, n_scan)
    grid = lo[:, None] + (hi - lo)[:, None] * frac[None, :]  # (n_m1, n_scan)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = y + (3.0 * grid - 2.0) * t - 0.5 * np.log(
            (grid**2 - m1s[:, None] ** 2) / (4.0 * (grid - 1.0) ** 2)
        )
    sgn = np.sign(vals)
    flips = sgn[:, :-1] * sgn[:, 1:] <= 0
    counts = flips.sum(axis=1)
    # the curve need not extend to |m1| -> 1; drop rootless rows at the ends
    present = np.flatnonzero(counts >= 1)
    if present.size < 3:
        raise SolverFailureError(f"lost the stationarity curve at (y={y}, t={t})")
    first, last = present[0], present[-1]
    if np.any(counts[first : last + 1] == 0):
        raise SolverFailureError(f"stationarity curve broke up at (y={y}, t={t})")
    if np.any(counts > 1):
        i = int(np.argmax(counts > 1))
        return -math.inf, (float(m1s[i]), math.nan)
    rows = range(first, last + 1)
    cols = np.argmax(flips, axis=1)
    xs = np.empty(last + 1 - first)
    roots2 = np.empty(last + 1 - first)
    for k, i in enumerate(rows):
        m1 = m1s[i]
        a, b = grid[i, cols[i]], grid[i, cols[i] + 1]
        m2 = brentq(lambda v: _psi2_y(m1, v, y, t), a, b, xtol=1e-15)
        roots2[k] = m2
        xs[k] = _x_on_curve(m1, m2, t)
    d = np.diff(xs)
    i = int(np.argmin(d))
    m1_c = 0.5 * (m1s[first + i] + m1s[first + i + 1])
    m2_c = 0.5 * (roots2[i] + roots2[i + 1])
    return float(d[i]), (float(m1_c), float(m2_c))


def detect_catastrophe(
    y: float,
    t_lo: float,
    t_hi: float,
    cfg: SolverConfig = SolverConfig(),
    t_width: float = 1e-4,
):
    """Bracket the coupling at which the x-profile at fixed y first becomes
    multivalued; reports the onset location and its cusp-condition residuals."""
    g_lo, _ = _profile_indicator(y, t_lo)
    g_hi, _ = _profile_indicator(y, t_hi)
    if g_lo <= 0.0 or g_hi > 0.0:
        return CatastropheReport(found=False, y=y)
    lo, hi = t_lo, t_hi
    while hi - lo > t_width:
        mid = 0.5 * (lo + hi)
        g_mid, _ = _profile_indicator(y, mid)
        if g_mid > 0.0:
            lo = mid
        else:
            hi = mid
    t_c = 0.5 * (lo + hi)
    _, (m1_c, m2_c) = _profile_indicator(y, hi)
    m1_c, m2_c, t_ref = _polish_onset(y, m1_c, m2_c, t_c, hi - lo)
    x_c = _x_on_curve(m1_c, m2_c, t_ref)
    resid = cusp_residuals(m1_c, m2_c, t_ref)
    at_cusp = max(abs(resid[0]), abs(resid[1])) <= 1e-6
    return CatastropheReport(
        found=True,
        y=y,
        t_c=t_ref if at_cusp else t_c,
        x_c=x_c,
        m1=m1_c,
        m2=m2_c,
        cusp_residuals=resid,
        at_cusp=at_cusp,
    )


def _polish_onset(y, m1, m2, t, t_slack):
    """Refine the onset to an exact cusp of the map at the given y, if one is
    nearby: solve (psi2, fold determinant, tangency) = 0 in (m1, m2, t).
    Falls back to the unrefined location when the onset is a fold tangency
    with no cusp (y outside the cusp-image range)."""
    from scipy.optimize import fsolve

    def system(v):
        a, b, tt = v
        try:
            J, tang = cusp_residuals(a, b, tt)
            return [_psi2_y(a, b, y, tt), J, tang]
        except Exception:
            return [1e3, 1e3, 1e3]

    sol, _info, ok, _msg = fsolve(system, [m1, m2, t], full_output=True, xtol=1e-13)
    if (
        ok == 1
        and math.hypot(sol[0] - m1, sol[1] - m2) < 0.05
        and abs(sol[2] - t) < max(10.0 * t_slack, 1e-3)
    ):
        return float(sol[0]), float(sol[1]), float(sol[2])
    return m1, m2, t
