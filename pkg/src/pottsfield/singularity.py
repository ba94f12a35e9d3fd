"""Fold and cusp structure of the stationarity map in closed form.

The cusp locus in the (m1, m2) plane is the union of two straight lines,
m1 = +-(3 m2 - 2), and a quartic loop.  Each locus carries a critical
coupling t_c(m2) and an image in the external-field plane.  Residual
functions verify any candidate point against the defining conditions:
vanishing Jacobian determinant plus tangency of the map gradient to the
fold set.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InfiniteFieldError, OutOfDomainError
from .model import eos_jacobian_q3, fields_from_state, _require_interior_q3

LOOP_M2_MIN = 0.5
LOOP_M2_MAX = 7.0 / 9.0


@dataclass(frozen=True)
class CuspPoint:
    """A cusp singularity: moment-space location, critical coupling, field image."""

    locus_id: str  # "I", "II", "III_plus", "III_minus"
    m1: float
    m2: float
    t_c: float
    x: float
    y: float


@dataclass(frozen=True)
class CuspEvent:
    kind: str  # "creation", "collision", "split", "annihilation"
    time: float
    locations: tuple  # (m1, m2) pairs
    description: str


def fold_residual(m1: float, m2: float, t: float) -> float:
    """Determinant of the stationarity Jacobian; zero on the fold set."""
    J = eos_jacobian_q3(m1, m2, t)
    return float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])


def fold_gradient(m1: float, m2: float, t: float):
    """Analytic gradient (dJ/dm1, dJ/dm2) of the fold determinant."""
    _require_interior_q3(m1, m2)
    D = m2**2 - m1**2
    A = t - m2 / D
    B = 3.0 * t - m2 / D + 1.0 / (m2 - 1.0)
    C = m1 / D
    # d(m2/D)/dm1 = 2 m1 m2 / D^2 ; d(m2/D)/dm2 = (D - 2 m2^2)/D^2
    dA1 = -2.0 * m1 * m2 / D**2
    dA2 = -(D - 2.0 * m2**2) / D**2
    dB1 = dA1
    dB2 = dA2 - 1.0 / (m2 - 1.0) ** 2
    dC1 = (D + 2.0 * m1**2) / D**2
    dC2 = -2.0 * m1 * m2 / D**2
    dJ1 = A * dB1 + B * dA1 - 2.0 * C * dC1
    dJ2 = A * dB2 + B * dA2 - 2.0 * C * dC2
    return float(dJ1), float(dJ2)


def cusp_residuals(m1: float, m2: float, t: float):
    """(fold determinant, tangency) pair; both vanish exactly at cusp points.

    tangency = dpsi1/dm2 * dJ/dm1 - dpsi1/dm1 * dJ/dm2; the i=2 tangency is
    linearly dependent on this one whenever the determinant vanishes.
    """
    J = eos_jacobian_q3(m1, m2, t)
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    dJ1, dJ2 = fold_gradient(m1, m2, t)
    tangency = float(J[0, 1] * dJ1 - J[0, 0] * dJ2)
    return det, tangency


def cusp_residuals_scaled(m1: float, m2: float, t: float):
    """Cusp residuals normalized by the magnitude of their constituent
    products; Jacobian entries diverge like 1/(1-m2)^2 towards the m2 -> 1
    asymptote, so the raw determinant cancellation is only meaningful
    relative to that scale."""
    J = eos_jacobian_q3(m1, m2, t)
    det = float(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    det_scale = abs(J[0, 0] * J[1, 1]) + abs(J[0, 1] * J[1, 0]) + 1.0
    dJ1, dJ2 = fold_gradient(m1, m2, t)
    tangency = float(J[0, 1] * dJ1 - J[0, 0] * dJ2)
    tang_scale = abs(J[0, 1] * dJ1) + abs(J[0, 0] * dJ2) + 1.0
    return det / det_scale, tangency / tang_scale


def line_critical_time(m2: float) -> float:
    """t_c = 1/(2 (1 - m2)) on both straight-line loci, m2 in [1/2, 1)."""
    if not LOOP_M2_MIN <= m2 < 1.0:
        raise OutOfDomainError(f"line loci require m2 in [1/2, 1), got {m2}")
    return 1.0 / (2.0 * (1.0 - m2))


def cusp_locus_lines(m2: float, branch: str):
    """Point (m1, t_c) on straight-line locus I (m1 = 3 m2 - 2) or II (mirror)."""
    t_c = line_critical_time(m2)
    if branch == "I":
        return 3.0 * m2 - 2.0, t_c
    if branch == "II":
        return 2.0 - 3.0 * m2, t_c
    raise ValueError(f"branch must be 'I' or 'II', got {branch!r}")


def loop_alpha(m2: float) -> float:
    return float(np.sqrt(25.0 - 32.0 * m2))


def loop_beta(m2: float) -> float:
    """Half-width parameter of the loop: m1 = +- beta/2."""
    alpha = loop_alpha(m2)
    b2 = 41.0 * m2 - 12.0 * m2**2 - 25.0 + 5.0 * alpha * (1.0 - m2)
    if b2 < -1e-12:
        raise OutOfDomainError(f"loop locus is empty at m2 = {m2}")
    return float(np.sqrt(max(b2, 0.0)))


def loop_critical_time(m2: float) -> float:
    """t_c = 4/(3 (1 - m2) (5 - alpha)) on the quartic loop, m2 in [1/2, 7/9]."""
    if not LOOP_M2_MIN - 1e-15 <= m2 <= LOOP_M2_MAX + 1e-15:
        raise OutOfDomainError(f"loop locus requires m2 in [1/2, 7/9], got {m2}")
    alpha = loop_alpha(m2)
    return 4.0 / (3.0 * (1.0 - m2) * (5.0 - alpha))


def cusp_locus_loop(m2: float, sign: int):
    """Point (m1, t_c) on the quartic loop; sign = +1/-1 picks the m1 half."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    t_c = loop_critical_time(m2)
    return sign * loop_beta(m2) / 2.0, t_c


def quartic_residual(m1: float, m2: float) -> float:
    """The loop quartic 2 m1^4 + 18 m2^4 + 12 m1^2 m2^2 - 41 m1^2 m2
    - 23 m2^3 + 25 m1^2 + 7 m2^2, evaluated as printed."""
    return float(
        2.0 * m1**4
        + 18.0 * m2**4
        + 12.0 * m1**2 * m2**2
        - 41.0 * m1**2 * m2
        - 23.0 * m2**3
        + 25.0 * m1**2
        + 7.0 * m2**2
    )


def line_image(m2: float, branch: str):
    """Field-plane image of the straight-line loci:
    x = y = (2 - 3 m2)/(2 (1 - m2)) + (1/2) log((2 m2 - 1)/(1 - m2)) on I,
    and the (x, y) -> (-x, -y) mirror on II.
    """
    if not LOOP_M2_MIN < m2 < 1.0:
        raise InfiniteFieldError(
            f"line image diverges at m2 = {m2} (finite only for m2 in (1/2, 1))"
        )
    g = (2.0 - 3.0 * m2) / (2.0 * (1.0 - m2)) + 0.5 * np.log((2.0 * m2 - 1.0) / (1.0 - m2))
    if branch == "I":
        return float(g), float(g)
    if branch == "II":
        # mirror of I under m1 -> -m1, i.e. x -> -x with y unchanged
        return float(-g), float(g)
    raise ValueError(f"branch must be 'I' or 'II', got {branch!r}")


def loop_image(m2: float, sign: int):
    """Field-plane image of the quartic loop for the m1 = sign*beta/2 half."""
    t_c = loop_critical_time(m2)
    alpha = loop_alpha(m2)
    beta = loop_beta(m2)
    if 2.0 * m2 - beta <= 0.0:
        raise InfiniteFieldError(f"loop image diverges at m2 = {m2}")
    core = 2.0 * beta / (3.0 * (1.0 - m2) * (5.0 - alpha)) + 0.5 * np.log(
        (2.0 * m2 - beta) / (2.0 * m2 + beta)
    )
    x = -sign * core
    y = -(4.0 * (3.0 * m2 - 2.0)) / (3.0 * (1.0 - m2) * (5.0 - alpha)) + 0.5 * np.log(
        (2.0 * m2 - beta) * (2.0 * m2 + beta) / (16.0 * (1.0 - m2) ** 2)
    )
    del t_c
    return float(x), float(y)


def cusp_point(locus_id: str, m2: float) -> CuspPoint:
    """Assemble a full CuspPoint on the named locus at parameter m2."""
    if locus_id in ("I", "II"):
        m1, t_c = cusp_locus_lines(m2, locus_id)
        x, y = line_image(m2, locus_id)
    elif locus_id in ("III_plus", "III_minus"):
        sign = 1 if locus_id == "III_plus" else -1
        m1, t_c = cusp_locus_loop(m2, sign)
        x, y = loop_image(m2, sign)
    else:
        raise ValueError(f"unknown locus_id {locus_id!r}")
    return CuspPoint(locus_id=locus_id, m1=m1, m2=m2, t_c=t_c, x=x, y=y)


def map_cusp_to_fields(p: CuspPoint):
    """Closed-form field-plane image of a cusp point; agrees with inverting the
    stationarity conditions at (m1, m2, t_c)."""
    if p.locus_id in ("I", "II"):
        return line_image(p.m2, p.locus_id)
    sign = 1 if p.locus_id == "III_plus" else -1
    return loop_image(p.m2, sign)


def sample_locus(locus_id: str, n: int = 400):
    """Uniform-in-m2 sample of one locus; endpoints with divergent images are
    approached but excluded."""
    eps = 1e-6
    if locus_id in ("I", "II"):
        m2s = np.linspace(LOOP_M2_MIN + eps, 1.0 - 1e-3, n)
    else:
        m2s = np.linspace(LOOP_M2_MIN, LOOP_M2_MAX, n)
    return [cusp_point(locus_id, float(m2)) for m2 in m2s]


def cusp_event_timeline():
    """Canonical creation/collision/annihilation sequence of the cusp points."""
    m2_meet = 11.0 / 18.0
    events = [
        CuspEvent(
            kind="creation",
            time=1.0,
            locations=((-0.5, 0.5), (0.5, 0.5)),
            description="two cusps created at the bottom of the straight lines",
        ),
        CuspEvent(
            kind="collision",
            time=9.0 / 7.0,
            locations=(
                (3.0 * m2_meet - 2.0, m2_meet),
                (2.0 - 3.0 * m2_meet, m2_meet),
            ),
            description="line cusps hit the loop at its bottom intersections",
        ),
        CuspEvent(
            kind="creation",
            time=9.0 / 7.0,
            locations=((0.0, 7.0 / 9.0),),
            description="extra cusp created at the top of the loop",
        ),
        CuspEvent(
            kind="split",
            time=9.0 / 7.0,
            locations=(
                (3.0 * m2_meet - 2.0, m2_meet),
                (2.0 - 3.0 * m2_meet, m2_meet),
                (0.0, 7.0 / 9.0),
            ),
            description=(
                "each intersection cusp splits into one cusp continuing along its "
                "line and two travelling along the loop; the top cusp splits in two"
            ),
        ),
        CuspEvent(
            kind="annihilation",
            time=4.0 / 3.0,
            locations=(
                (loop_beta(0.75) / 2.0, 0.75),
                (-loop_beta(0.75) / 2.0, 0.75),
                (0.0, 0.5),
            ),
            description=(
                "loop cusps travelling against each other collide and annihilate "
                "at m2 = 3/4 (second line intersection) and m2 = 1/2 (loop bottom)"
            ),
        ),
    ]
    return events
