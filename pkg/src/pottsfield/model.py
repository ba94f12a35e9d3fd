"""Closed-form thermodynamics of the complete-graph q-state spin model.

Everything here is an exact formula: the polynomial Kronecker delta, the
linear probability/moment parametrization (Lagrange basis of the level set),
the limiting free energy, and the stationarity residuals with their Jacobian.
The q=3 level ordering is (+1, -1, 0) so that (p1, p2, p3) are the
probabilities of the states +1, -1, 0 in that order.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomainError, SingularDomainError

# Interior margin used for clamping and domain checks.
EPS_DOM = 1e-12

Q3_LEVELS = (1.0, -1.0, 0.0)


@dataclass(frozen=True)
class ModelSpec:
    """Number of spin states and their numeric values a_1..a_q."""

    q: int = 3
    levels: tuple = Q3_LEVELS

    def __post_init__(self):
        if self.q < 2:
            raise ValueError(f"q must be >= 2, got {self.q}")
        if len(self.levels) != self.q:
            raise ValueError(f"expected {self.q} levels, got {len(self.levels)}")
        if len(set(self.levels)) != self.q:
            raise ValueError("levels must be pairwise distinct")


@dataclass(frozen=True)
class ThermoPoint:
    """Rescaled thermodynamic coordinates: linear field x, nematic field y, coupling t."""

    x: float
    y: float
    t: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y) and np.isfinite(self.t)):
            raise ValueError("x, y, t must be finite")
        if self.t < 0:
            raise ValueError(f"t must be >= 0, got {self.t}")


def lagrange_coefficients(levels):
    """Coefficient matrix C with C[k] the monomial coefficients of the k-th
    Lagrange basis polynomial of the level set.

    Row k satisfies sum_j C[k, j] * a_i**j == delta_{ki}; equivalently C is the
    inverse of the Vandermonde matrix W[k, j] = a_j**k, so p = C @ (1, m_1, ..).
    """
    a = np.asarray(levels, dtype=float)
    q = len(a)
    C = np.empty((q, q))
    for k in range(q):
        others = np.delete(a, k)
        denom = np.prod(a[k] - others)
        C[k] = np.polynomial.polynomial.polyfromroots(others) / denom
    return C


def vandermonde(levels):
    """Moment matrix W[k, j] = a_j**k (rows are powers 0..q-1)."""
    a = np.asarray(levels, dtype=float)
    return np.vander(a, increasing=True).T


@dataclass(frozen=True)
class VandermondeMap:
    """Forward moment map and its explicit Lagrange-basis inverse."""

    levels: tuple
    forward: np.ndarray
    inverse: np.ndarray

    @classmethod
    def build(cls, spec: ModelSpec) -> "VandermondeMap":
        return cls(
            levels=tuple(spec.levels),
            forward=vandermonde(spec.levels),
            inverse=lagrange_coefficients(spec.levels),
        )

    @property
    def offsets(self):
        """Constant terms d_k of p_k = d_k + sum_l c_{kl} m_l."""
        return self.inverse[:, 0]

    @property
    def coefficients(self):
        """Linear coefficients c_{kl} of p_k in the moments."""
        return self.inverse[:, 1:]


def kronecker_poly(spec: ModelSpec, si: float, sj: float) -> float:
    """Polynomial representation of the Kronecker delta on the level set:
    sum_l prod_{k != l} (si - a_k)(sj - a_k) / (a_l - a_k)^2.
    """
    a = np.asarray(spec.levels, dtype=float)
    for s in (si, sj):
        if not np.any(np.isclose(a, s, rtol=0.0, atol=1e-12)):
            raise OutOfDomainError(f"spin value {s} is not one of the levels {spec.levels}")
    total = 0.0
    for l in range(spec.q):
        others = np.delete(a, l)
        total += np.prod((si - others) * (sj - others) / (a[l] - others) ** 2)
    return float(total)


def probabilities_q3(m1: float, m2: float, clamp: bool = True) -> np.ndarray:
    """State probabilities (p1, p2, p3) for levels (+1, -1, 0) at moments (m1, m2)."""
    p = np.array([0.5 * (m1 + m2), 0.5 * (m2 - m1), 1.0 - m2])
    return _checked(p, clamp)


def probabilities_from_moments(spec: ModelSpec, m, clamp: bool = True) -> np.ndarray:
    """Probabilities p = W^{-1} (1, m_1, ..., m_{q-1}) for arbitrary levels."""
    m = np.asarray(m, dtype=float)
    if m.shape != (spec.q - 1,):
        raise ValueError(f"expected {spec.q - 1} moments, got shape {m.shape}")
    C = lagrange_coefficients(spec.levels)
    p = C @ np.concatenate(([1.0], m))
    return _checked(p, clamp)


def _checked(p, clamp):
    bad = np.nonzero(p < -EPS_DOM)[0]
    if bad.size:
        k = int(bad[0])
        raise OutOfDomainError(f"probability p_{k + 1} = {p[k]} is negative", index=k)
    if clamp:
        p = np.where(p < 0.0, 0.0, p)
    return p


def moments_from_probabilities(spec: ModelSpec, p) -> np.ndarray:
    """Moments m_k = sum_j p_j a_j^k for k = 1..q-1 (forward Vandermonde action)."""
    p = np.asarray(p, dtype=float)
    if p.shape != (spec.q,):
        raise ValueError(f"expected {spec.q} probabilities, got shape {p.shape}")
    W = vandermonde(spec.levels)
    return W[1:] @ p


def _entropy(p):
    # 0 * log 0 = 0 by continuity.
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return -float(np.sum(terms))


def free_energy_general(spec: ModelSpec, m, fields, t: float) -> float:
    """Limiting free energy F = sum_k x_k m_k + t sum p_k^2 + entropy(p)."""
    m = np.asarray(m, dtype=float)
    fields = np.asarray(fields, dtype=float)
    p = probabilities_from_moments(spec, m)
    return float(fields @ m + t * np.sum(p**2) + _entropy(p))


def free_energy_q3(m1: float, m2: float, x: float, y: float, t: float) -> float:
    """q=3 limiting free energy x m1 + y m2 + t sum p_k^2 - sum p_k log p_k."""
    p = probabilities_q3(m1, m2)
    return float(x * m1 + y * m2 + t * np.sum(p**2) + _entropy(p))


def free_energy(spec: ModelSpec, m, pt: ThermoPoint) -> float:
    """Free energy at a thermodynamic point; q=3 fields are (x, y)."""
    if spec.q == 3 and tuple(spec.levels) == Q3_LEVELS:
        m1, m2 = m
        return free_energy_q3(m1, m2, pt.x, pt.y, pt.t)
    return free_energy_general(spec, m, (pt.x, pt.y), pt.t)


def _require_interior_q3(m1, m2):
    p = probabilities_q3(m1, m2, clamp=False)
    if np.any(p <= EPS_DOM):
        k = int(np.argmin(p))
        raise SingularDomainError(
            f"point (m1={m1}, m2={m2}) is on the domain boundary (p_{k + 1} = {p[k]})",
            index=k,
        )
    return p


def eos_residual_q3(m1: float, m2: float, x: float, y: float, t: float):
    """Stationarity residuals (psi1, psi2) of the q=3 free energy:

    psi1 = x + m1 t - (1/2) log((m1 + m2)/(m2 - m1))
    psi2 = y + (3 m2 - 2) t - (1/2) log((m2^2 - m1^2)/(4 (m2 - 1)^2))
    """
    _require_interior_q3(m1, m2)
    psi1 = x + m1 * t - 0.5 * np.log((m1 + m2) / (m2 - m1))
    psi2 = y + (3.0 * m2 - 2.0) * t - 0.5 * np.log(
        (m2**2 - m1**2) / (4.0 * (m2 - 1.0) ** 2)
    )
    return float(psi1), float(psi2)


def eos_jacobian_q3(m1: float, m2: float, t: float) -> np.ndarray:
    """Jacobian of (psi1, psi2) in (m1, m2); equals the Hessian of F, so symmetric."""
    _require_interior_q3(m1, m2)
    D = m2**2 - m1**2
    return np.array(
        [
            [t - m2 / D, m1 / D],
            [m1 / D, 3.0 * t - m2 / D + 1.0 / (m2 - 1.0)],
        ]
    )


def eos_residual_general(spec: ModelSpec, m, fields, t: float) -> np.ndarray:
    """Gradient of the general-q free energy in the moments:
    dF/dm_j = x_j + sum_k c_{kj} (2 t p_k - log p_k - 1).
    """
    m = np.asarray(m, dtype=float)
    fields = np.asarray(fields, dtype=float)
    p = probabilities_from_moments(spec, m, clamp=False)
    if np.any(p <= EPS_DOM):
        k = int(np.argmin(p))
        raise SingularDomainError(
            f"moments {m.tolist()} lie on the domain boundary (p_{k + 1} = {p[k]})",
            index=k,
        )
    C = lagrange_coefficients(spec.levels)[:, 1:]  # c_{kj} = dp_k/dm_j
    return fields + C.T @ (2.0 * t * p - np.log(p) - 1.0)


def fields_from_state(m1: float, m2: float, t: float):
    """The (x, y) that make (m1, m2) stationary at coupling t (psi inversion)."""
    _require_interior_q3(m1, m2)
    x = -m1 * t + 0.5 * np.log((m1 + m2) / (m2 - m1))
    y = -(3.0 * m2 - 2.0) * t + 0.5 * np.log((m2**2 - m1**2) / (4.0 * (m2 - 1.0) ** 2))
    return float(x), float(y)
