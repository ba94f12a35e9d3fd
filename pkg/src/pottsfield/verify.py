"""Identity battery behind the `verify` command.

Each check evaluates an exact identity of the model numerically and reports
the worst residual against a fixed tolerance.  The battery is deterministic
for a given seed.
"""

from fractions import Fraction

import numpy as np
from scipy.optimize import minimize_scalar

from . import exact, model, singularity
from .model import ModelSpec, ThermoPoint


def _random_interior_q3(rng, n, margin=1e-3):
    """n random strictly interior (m1, m2) points with all p_k > margin."""
    pts = []
    while len(pts) < n:
        m2 = rng.uniform(0.05, 0.95)
        m1 = rng.uniform(-m2, m2)
        p = model.probabilities_q3(m1, m2, clamp=False)
        if np.all(p > margin):
            pts.append((m1, m2))
    return pts


def check_kronecker_identity(rng):
    worst = 0.0
    for q in range(2, 7):
        denoms = rng.integers(1, 6, size=q)
        numers = rng.integers(-8, 9, size=q)
        levels = []
        for a, b in zip(numers, denoms):
            v = Fraction(int(a), int(b))
            while v in levels:
                v += Fraction(1, int(rng.integers(2, 9)))
            levels.append(v)
        spec = ModelSpec(q=q, levels=tuple(float(v) for v in levels))
        for si in spec.levels:
            for sj in spec.levels:
                want = 1.0 if si == sj else 0.0
                worst = max(worst, abs(model.kronecker_poly(spec, si, sj) - want))
    return _check("kronecker_identity", worst, 1e-10)


def check_vandermonde_roundtrip(rng):
    worst = 0.0
    for q in (2, 3, 4, 5, 6):
        levels = tuple(np.sort(rng.uniform(-2, 2, size=q)))
        spec = ModelSpec(q=q, levels=levels)
        for _ in range(5):
            p = rng.dirichlet(np.ones(q))
            m = model.moments_from_probabilities(spec, p)
            p_back = model.probabilities_from_moments(spec, m)
            worst = max(worst, float(np.max(np.abs(p_back - p))))
    return _check("vandermonde_roundtrip", worst, 1e-12)


def check_initial_condition(rng, n_max=200):
    worst = 0.0
    fields = rng.uniform(-3, 3, size=(20, 2))
    for N in range(1, n_max + 1):
        x, y = fields[N % 20]
        closed = exact.initial_partition_closed(N, x, y)
        enum = exact.exact_log_partition(N, ThermoPoint(x, y, 0.0))
        worst = max(worst, abs(enum - closed) / abs(closed))
    return _check("initial_condition", worst, 1e-12)


def check_diffusion_identity(rng, sizes=(1, 5, 50, 500), yy_coeff=1.5):
    worst = 0.0
    for _ in range(10):
        pt = ThermoPoint(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 3))
        for N in sizes:
            worst = max(worst, exact.diffusion_residual(N, pt, yy_coeff=yy_coeff))
    return _check("diffusion_identity", worst, 1e-10)


def check_eos_gradient(rng, n_pts=50, step=1e-6):
    worst = 0.0
    for m1, m2 in _random_interior_q3(rng, n_pts):
        x, y, t = rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 3)
        psi = model.eos_residual_q3(m1, m2, x, y, t)
        fd1 = (
            model.free_energy_q3(m1 + step, m2, x, y, t)
            - model.free_energy_q3(m1 - step, m2, x, y, t)
        ) / (2 * step)
        fd2 = (
            model.free_energy_q3(m1, m2 + step, x, y, t)
            - model.free_energy_q3(m1, m2 - step, x, y, t)
        ) / (2 * step)
        worst = max(worst, abs(psi[0] - fd1), abs(psi[1] - fd2))
    return _check("eos_gradient_consistency", worst, 1e-6)


def check_eos_jacobian(rng, n_pts=50, step=1e-6):
    # second-derivative FD needs more room from the log singularities
    worst = 0.0
    for m1, m2 in _random_interior_q3(rng, n_pts, margin=0.02):
        x, y, t = 0.0, 0.0, rng.uniform(0, 3)
        J = model.eos_jacobian_q3(m1, m2, t)
        for j, (d1, d2) in enumerate(((step, 0.0), (0.0, step))):
            hi = model.eos_residual_q3(m1 + d1, m2 + d2, x, y, t)
            lo = model.eos_residual_q3(m1 - d1, m2 - d2, x, y, t)
            fd = (np.array(hi) - np.array(lo)) / (2 * step)
            worst = max(worst, float(np.max(np.abs(J[:, j] - fd))))
    return _check("eos_jacobian_consistency", worst, 1e-6)


def check_general_q_reduction(rng, n_pts=20):
    worst = 0.0
    spec = ModelSpec()
    for m1, m2 in _random_interior_q3(rng, n_pts):
        x, y, t = rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 3)
        closed = np.array(model.eos_residual_q3(m1, m2, x, y, t))
        general = model.eos_residual_general(spec, (m1, m2), (x, y), t)
        worst = max(worst, float(np.max(np.abs(closed - general))))
    return _check("general_q_reduction", worst, 1e-12)


def check_cusp_residual_lines():
    worst = 0.0
    for m2 in np.linspace(0.5 + 1e-4, 1.0 - 1e-3, 50):
        for branch in ("I", "II"):
            m1, t_c = singularity.cusp_locus_lines(float(m2), branch)
            det, tang = singularity.cusp_residuals_scaled(m1, float(m2), t_c)
            worst = max(worst, abs(det), abs(tang))
    return _check("cusp_residuals_lines", worst, 1e-8)


def check_cusp_residual_loop():
    worst = 0.0
    for m2 in np.linspace(0.5 + 1e-6, 7.0 / 9.0 - 1e-6, 50):
        for sign in (1, -1):
            m1, t_c = singularity.cusp_locus_loop(float(m2), sign)
            det, tang = singularity.cusp_residuals_scaled(m1, float(m2), t_c)
            worst = max(worst, abs(det), abs(tang))
            worst = max(worst, abs(singularity.quartic_residual(m1, float(m2))))
    return _check("cusp_residuals_loop", worst, 1e-8)


def _bounded_min(f, lo, hi):
    """Golden-section minimum over [lo, hi], endpoints included (the extremes
    of the critical-time functions sit on the interval boundary)."""
    r = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    return min(float(r.fun), f(lo), f(hi))


def check_critical_time_extremes():
    worst = 0.0
    worst = max(worst, abs(_bounded_min(singularity.line_critical_time, 0.5, 0.99) - 1.0))
    worst = max(
        worst,
        abs(_bounded_min(singularity.loop_critical_time, 0.5, 7.0 / 9.0) - 9.0 / 7.0),
    )
    worst = max(
        worst,
        abs(
            -_bounded_min(lambda m2: -singularity.loop_critical_time(m2), 0.5, 7.0 / 9.0)
            - 4.0 / 3.0
        ),
    )
    return _check("critical_time_extremes", worst, 1e-9)


def check_field_map_consistency():
    worst = 0.0
    for m2 in np.linspace(0.5 + 1e-3, 1.0 - 1e-2, 20):
        for branch in ("I", "II"):
            m1, t_c = singularity.cusp_locus_lines(float(m2), branch)
            xc, yc = singularity.line_image(float(m2), branch)
            xi, yi = model.fields_from_state(m1, float(m2), t_c)
            worst = max(worst, abs(xc - xi), abs(yc - yi))
    for m2 in np.linspace(0.5 + 1e-3, 7.0 / 9.0 - 1e-3, 20):
        for sign in (1, -1):
            m1, t_c = singularity.cusp_locus_loop(float(m2), sign)
            xc, yc = singularity.loop_image(float(m2), sign)
            xi, yi = model.fields_from_state(m1, float(m2), t_c)
            worst = max(worst, abs(xc - xi), abs(yc - yi))
    return _check("field_map_consistency", worst, 1e-9)


def _check(name, residual, tol):
    return {
        "name": name,
        "max_residual": float(residual),
        "tolerance": tol,
        "passed": bool(residual <= tol),
    }


def run_battery(seed: int = 0, yy_coeff: float = 1.5, n_max: int = 200, sizes=(1, 5, 50, 500)):
    """Run the full identity battery; returns a machine-readable report."""
    rng = np.random.default_rng(seed)
    checks = [
        check_kronecker_identity(rng),
        check_vandermonde_roundtrip(rng),
        check_initial_condition(rng, n_max=n_max),
        check_diffusion_identity(rng, sizes=sizes, yy_coeff=yy_coeff),
        check_eos_gradient(rng),
        check_eos_jacobian(rng),
        check_general_q_reduction(rng),
        check_cusp_residual_lines(),
        check_cusp_residual_loop(),
        check_critical_time_extremes(),
        check_field_map_consistency(),
    ]
    return {
        "seed": seed,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
        "failed_checks": [c["name"] for c in checks if not c["passed"]],
    }
