"""Metropolis Monte Carlo on the complete-graph Hamiltonian at finite N.

Single-spin-flip dynamics with O(1) energy deltas: the Boltzmann exponent
depends only on the state counts (n_plus, n_minus), so a proposed flip changes
the energy through a closed-form expression in the counts.  Runs are
deterministic for a given seed; each chain draws from its own stream derived
from (seed, chain index).
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import SizeError
from .model import ThermoPoint
from .exact import N_MAX, exact_moments

_CHUNK = 4_000_000  # proposal steps per pre-generated random block


@dataclass(frozen=True)
class McConfig:
    N: int = 100
    sweeps: int = 10_000
    burn_in: int = 1_000
    thinning: int = 1
    seed: int = 0
    chains: int = 3

    def __post_init__(self):
        if min(self.N, self.sweeps, self.burn_in, self.thinning, self.chains) <= 0:
            raise ValueError("N, sweeps, burn_in, thinning, chains must be positive")
        if self.burn_in >= self.sweeps:
            raise ValueError("burn_in must be smaller than sweeps")
        if self.N > N_MAX:
            raise SizeError(f"N must be <= {N_MAX}, got {self.N}")


@dataclass(frozen=True)
class McEstimate:
    mean_m1: float
    mean_m2: float
    stderr_m1: float
    stderr_m2: float
    acceptance_rate: float
    chain_means_m1: tuple
    chain_means_m2: tuple
    chains_disagree: bool


def config_energy(n_plus, n_minus, N, x, y, t):
    """Boltzmann exponent N [t (mu1^2/2 + 3 mu2^2/2 - 2 mu2) + x mu1 + y mu2]
    as a function of the state counts."""
    a = n_plus - n_minus
    b = n_plus + n_minus
    return t * (a * a / (2.0 * N) + 1.5 * b * b / N - 2.0 * b) + x * a + y * b


@njit(cache=True)
def _kernel(spins, counts, sites, props, us, x, y, t, rec_np, rec_nm, rec_stride, rec_offset):
    """Metropolis steps over one pre-generated random block.

    spins: int8 state array (+1, -1, 0); counts: int64 [n_plus, n_minus].
    Records (n_plus, n_minus) every rec_stride steps starting at rec_offset
    (absolute step index within the chain).  Returns accepted-step count.
    """
    N = spins.shape[0]
    n_plus = counts[0]
    n_minus = counts[1]
    accepted = 0
    rec_i = 0
    for k in range(sites.shape[0]):
        i = sites[k]
        s = spins[i]
        # propose one of the two other states, chosen uniformly
        if s == 1:
            sn = -1 if props[k] == 0 else 0
        elif s == -1:
            sn = 1 if props[k] == 0 else 0
        else:
            sn = 1 if props[k] == 0 else -1
        np_new = n_plus + (1 if sn == 1 else 0) - (1 if s == 1 else 0)
        nm_new = n_minus + (1 if sn == -1 else 0) - (1 if s == -1 else 0)
        a_old = n_plus - n_minus
        b_old = n_plus + n_minus
        a_new = np_new - nm_new
        b_new = np_new + nm_new
        dE = (
            t
            * (
                (a_new * a_new - a_old * a_old) / (2.0 * N)
                + 1.5 * (b_new * b_new - b_old * b_old) / N
                - 2.0 * (b_new - b_old)
            )
            + x * (a_new - a_old)
            + y * (b_new - b_old)
        )
        if dE >= 0.0 or us[k] < np.exp(dE):
            spins[i] = sn
            n_plus = np_new
            n_minus = nm_new
            accepted += 1
        step = rec_offset + k + 1
        if step % rec_stride == 0:
            rec_np[rec_i] = n_plus
            rec_nm[rec_i] = n_minus
            rec_i += 1
    counts[0] = n_plus
    counts[1] = n_minus
    return accepted


def _initial_state(chain, N, rng):
    if chain == 0:
        spins = np.zeros(N, dtype=np.int8)
    elif chain == 1:
        spins = np.ones(N, dtype=np.int8)
    else:
        spins = rng.integers(-1, 2, size=N).astype(np.int8)
    counts = np.array([int((spins == 1).sum()), int((spins == -1).sum())], dtype=np.int64)
    return spins, counts


def run_chain(pt: ThermoPoint, cfg: McConfig, chain: int):
    """One chain; returns (n_plus, n_minus) per recorded sweep and the
    acceptance rate.  Sweep = N proposed flips; recording happens at sweep
    boundaries."""
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, chain)))
    N = cfg.N
    spins, counts = _initial_state(chain, N, rng)
    total_steps = cfg.sweeps * N
    n_rec = cfg.sweeps
    rec_np = np.empty(n_rec, dtype=np.int64)
    rec_nm = np.empty(n_rec, dtype=np.int64)
    accepted = 0
    done = 0
    rec_filled = 0
    while done < total_steps:
        block = min(_CHUNK, total_steps - done)
        sites = rng.integers(0, N, size=block).astype(np.int64)
        props = rng.integers(0, 2, size=block).astype(np.int8)
        us = rng.random(block)
        n_block_rec = (done + block) // N - done // N
        accepted += _kernel(
            spins,
            counts,
            sites,
            props,
            us,
            pt.x,
            pt.y,
            pt.t,
            rec_np[rec_filled : rec_filled + n_block_rec],
            rec_nm[rec_filled : rec_filled + n_block_rec],
            N,
            done,
        )
        rec_filled += n_block_rec
        done += block
    return rec_np, rec_nm, accepted / total_steps


def _batch_stderr(samples, n_batches=32):
    usable = (len(samples) // n_batches) * n_batches
    if usable < n_batches:
        return float("nan")
    means = samples[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(n_batches))


def mc_run(pt: ThermoPoint, cfg: McConfig = McConfig()) -> McEstimate:
    """Metropolis estimate of the moments with batch-means error bars."""
    all_m1 = []
    all_m2 = []
    chain_means_1 = []
    chain_means_2 = []
    acc = 0.0
    for chain in range(cfg.chains):
        rec_np, rec_nm, a = run_chain(pt, cfg, chain)
        keep = slice(cfg.burn_in, None, cfg.thinning)
        m1 = (rec_np[keep] - rec_nm[keep]) / cfg.N
        m2 = (rec_np[keep] + rec_nm[keep]) / cfg.N
        all_m1.append(m1)
        all_m2.append(m2)
        chain_means_1.append(float(m1.mean()))
        chain_means_2.append(float(m2.mean()))
        acc += a
    m1 = np.concatenate(all_m1)
    m2 = np.concatenate(all_m2)
    se1 = _batch_stderr(m1)
    se2 = _batch_stderr(m2)
    spread1 = max(chain_means_1) - min(chain_means_1)
    spread2 = max(chain_means_2) - min(chain_means_2)
    scale = cfg.chains**0.5
    disagree = bool(
        (np.isfinite(se1) and spread1 > 5.0 * scale * max(se1, 1e-12))
        or (np.isfinite(se2) and spread2 > 5.0 * scale * max(se2, 1e-12))
    )
    return McEstimate(
        mean_m1=float(m1.mean()),
        mean_m2=float(m2.mean()),
        stderr_m1=se1,
        stderr_m2=se2,
        acceptance_rate=acc / cfg.chains,
        chain_means_m1=tuple(chain_means_1),
        chain_means_m2=tuple(chain_means_2),
        chains_disagree=disagree,
    )


def mc_vs_exact(pt: ThermoPoint, cfg: McConfig = McConfig()):
    """z-scores of the MC moment estimates against exact enumeration."""
    est = mc_run(pt, cfg)
    m1_exact, m2_exact = exact_moments(cfg.N, pt)
    z1 = (est.mean_m1 - m1_exact) / est.stderr_m1 if est.stderr_m1 > 0 else float("inf")
    z2 = (est.mean_m2 - m2_exact) / est.stderr_m2 if est.stderr_m2 > 0 else float("inf")
    return {
        "point": {"x": pt.x, "y": pt.y, "t": pt.t},
        "N": cfg.N,
        "mc": {
            "mean_m1": est.mean_m1,
            "mean_m2": est.mean_m2,
            "stderr_m1": est.stderr_m1,
            "stderr_m2": est.stderr_m2,
            "acceptance_rate": est.acceptance_rate,
            "chains_disagree": est.chains_disagree,
        },
        "exact": {"m1": m1_exact, "m2": m2_exact},
        "z_scores": {"m1": float(z1), "m2": float(z2)},
        "pass": bool(abs(z1) <= 3.0 and abs(z2) <= 3.0),
    }
