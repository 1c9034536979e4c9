"""Non-equilibrium steady state of the boundary-driven dynamics.

The invariant law is a product of unit-variance Gaussians whose site means
solve the discrete stationary equation

    sum_y p(y-x) (Phi(y) - Phi(x)) + 1_{x=1}(phi_l - Phi(1))
                                   + 1_{x=n-1}(phi_r - Phi(n-1)) = 0,

a symmetric positive-definite linear system.  The same harmonicity gives the
probabilistic representation Phi(x) = phi_l P_x(absorbed at 0) +
phi_r P_x(absorbed at n) for the long-jump walk killed at the two boundary
channels, which serves as an independent Monte Carlo oracle.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve

from .kernel import build_drift_system, kernel_row
from .params import ModelParams, as_grid_function
from .rng import make_rng
from scipy.linalg import toeplitz

__all__ = [
    "StationaryProfile",
    "solve_stationary_profile",
    "absorbed_walk_oracle",
    "sample_ness",
    "static_cumulant",
    "profile_to_csv",
]


@dataclass(frozen=True)
class StationaryProfile:
    """Solved stationary profile with the max-norm residual of its equation."""

    params: ModelParams
    profile: np.ndarray
    residual: float

    def __post_init__(self):
        lo = min(self.params.phi_l, self.params.phi_r) - 1e-12
        hi = max(self.params.phi_l, self.params.phi_r) + 1e-12
        if self.profile.min() < lo or self.profile.max() > hi:
            raise ValueError("stationary profile violates the maximum principle")
        if self.residual > 1e-10:
            raise ValueError(f"stationary residual {self.residual:.2e} exceeds 1e-10")


def solve_stationary_profile(params: ModelParams) -> StationaryProfile:
    """Solve (D + B - P) Phi = phi_l e_1 + phi_r e_{n-1} by SPD factorization.

    Equivalent to M Phi + b = 0 for the DriftSystem.  The residual reported
    is the max norm of the defining (unscaled) equation.
    """
    row = kernel_row(params)
    P = toeplitz(row)
    s = P.sum(axis=1)
    k = params.n_sites
    A = np.diag(s) - P
    A[0, 0] += 1.0
    A[k - 1, k - 1] += 1.0
    rhs = np.zeros(k)
    rhs[0] = params.phi_l
    rhs[k - 1] = params.phi_r
    phi = solve(A, rhs, assume_a="pos")
    residual = float(np.max(np.abs(A @ phi - rhs)))
    return StationaryProfile(params=params, profile=phi, residual=residual)


def absorbed_walk_oracle(params: ModelParams, x: int, samples: int, seed: int):
    """Monte Carlo absorption-site probabilities of the confined long-jump walk.

    The walk moves on the interior sites with rates p(y-x); sites 1 and n-1
    additionally carry unit-rate absorption channels toward 0 and n.  Since
    only the absorption site matters, the embedded jump chain is simulated:
    at a boundary site the walk is absorbed with probability 1/(1+s_x) per
    event, otherwise it jumps inside the lattice with row-normalized kernel
    probabilities (inverse-CDF sampling).

    Returns
    -------
    (p_left, p_right, stderr) : floats
        Estimates of P_x(absorbed at 0), P_x(absorbed at n), and the
        binomial standard error.  p_left + p_right = 1 by construction.
    """
    if not (1 <= x <= params.n_sites):
        raise ValueError(f"site x must lie in [1, {params.n_sites}]")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    row = kernel_row(params)
    P = toeplitz(row)
    s = P.sum(axis=1)
    k = params.n_sites
    cdf = np.cumsum(P / s[:, None], axis=1)
    p_absorb = np.zeros(k)
    p_absorb[0] = 1.0 / (1.0 + s[0])
    p_absorb[k - 1] = 1.0 / (1.0 + s[k - 1])

    rng = make_rng(seed, "absorbed-walk")
    pos = np.full(samples, x - 1, dtype=np.intp)
    left = np.zeros(samples, dtype=bool)
    active = np.arange(samples)
    for _ in range(10 ** 7):
        if not active.size:
            break
        p = pos[active]
        r = rng.random(active.size)
        hit = ((p == 0) | (p == k - 1)) & (r < p_absorb[p])
        if hit.any():
            done = active[hit]
            left[done] = pos[done] == 0
            active = active[~hit]
            if not active.size:
                break
            p = pos[active]
        jump = rng.random(active.size)
        pos[active] = (cdf[p] < jump[:, None]).sum(axis=1)
    else:
        raise RuntimeError("absorption did not complete within the step cap")

    p_left = float(left.mean())
    stderr = float(np.sqrt(max(p_left * (1.0 - p_left), 1e-300) / samples))
    return p_left, 1.0 - p_left, stderr


def sample_ness(params: ModelParams, profile: StationaryProfile,
                count: int, seed: int) -> np.ndarray:
    """Independent NESS draws, phi(x) ~ Normal(Phi_ss(x), 1) across sites.

    Returns an array of shape (count, n-1); row i is one configuration.
    """
    if profile.params != params:
        raise ValueError("profile does not match params")
    rng = make_rng(seed, "ness-sample")
    return profile.profile + rng.standard_normal((count, params.n_sites))


def static_cumulant(params: ModelParams, profile: StationaryProfile, G) -> float:
    """Scaled log moment generating function of the stationary empirical pairing,

        (1/n) log E[exp(sum_x G(x/n) phi(x))] = (1/n) sum_x [G Phi_ss + G^2 / 2],

    exact for the product-Gaussian steady state.
    """
    G = as_grid_function(params, G)
    return float(np.sum(G * profile.profile + 0.5 * G * G) / params.n)


def profile_to_csv(profile: StationaryProfile, path) -> None:
    """Write the stationary profile with header x,u,phi_ss."""
    n = profile.params.n
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "u", "phi_ss"])
        for i, val in enumerate(profile.profile):
            writer.writerow([i + 1, repr((i + 1) / n), repr(float(val))])
