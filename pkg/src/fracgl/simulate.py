"""Stochastic simulation of the (optionally tilted) lattice dynamics.

The state evolves by

    d phi = (M phi + b + u_t) dt + sum_edges sigma_e dW_e (e_y - e_x)
                                 + boundary drivers,

where the tilt drift u_t(x) = -(L_n H_t)(x/n) comes from an external field H
compactly supported in (0, 1).  Per unordered bulk pair the noise amplitude
is sigma_e = sqrt(2 n^gamma p(y - x)); the boundary drivers at sites 1 and
n-1 have amplitude sqrt(2 n^gamma).

Girsanov weights are accumulated from the same edge increments used for
stepping, so the weight is the exact Radon-Nikodym derivative between the
tilted and untilted Euler chains: per step, with per-edge tilt
lambda_e = sigma_e (H(y/n) - H(x/n)) / 2 (whose incidence assembly equals
u_t exactly),

    d log M = sqrt(dt) lambda . xi  -/+  |lambda|^2 dt / 2,

with the minus sign on untilted runs and the plus sign on tilted ones.
Consequently E[M_T] = 1 holds exactly for the discrete chain and weighted
untilted averages reproduce tilted averages without discretization bias.

For H = 0 the transition law is Gaussian and can be sampled exactly in the
eigenbasis of M: phi_t ~ Normal(Phi_ss + e^{Mt}(phi_0 - Phi_ss), I - e^{2Mt}).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .kernel import DriftSystem, discrete_fractional_laplacian
from .ness import StationaryProfile
from .operators import TestFunction, dirichlet_spectrum
from .params import ModelParams, as_grid_function
from .rng import make_rng

__all__ = [
    "FieldState",
    "ExternalField",
    "Trajectory",
    "euler_stability_limit",
    "step_euler",
    "propagate_exact",
    "simulate_trajectory",
    "euler_ensemble",
    "empirical_pairing",
    "boundary_block_average",
    "martingale_qv_rate",
    "dynkin_diagnostics",
    "trajectory_to_csv",
]


@dataclass
class FieldState:
    """One field configuration at a macroscopic time."""

    phi: np.ndarray
    time: float = 0.0


class ExternalField:
    """Space-time tilt field H(t, u), compactly supported in (0, 1).

    Parameters
    ----------
    h : callable (t, u_array) -> array
        Field values; must vanish at u = 0 and u = 1 for all t.
    dh_dt : callable or None
        Time derivative, needed by the weak-form functionals.
    support : (a, b)
        Spatial support, a fixed compact subinterval of (0, 1).

    Lattice evaluations H(t, .) and (L_n H)(t, .) are cached per time, so an
    ensemble stepping through a common time grid computes them once per step.
    """

    def __init__(self, h: Callable, dh_dt: Optional[Callable] = None,
                 support: tuple = (0.0, 1.0)):
        self.h = h
        self.dh_dt = dh_dt
        self.support = support
        self._cache: dict = {}
        for t_probe in (0.0, 0.37, 1.0):
            ends = np.asarray(h(t_probe, np.array([0.0, 1.0])), dtype=float)
            if np.any(np.abs(ends) > 1e-12):
                raise ValueError("field must vanish at u = 0 and u = 1")

    @classmethod
    def separable(cls, time_fn: Callable, time_fn_prime: Optional[Callable],
                  bump: TestFunction) -> "ExternalField":
        """Field a(t) * B(u) from a time amplitude and a spatial TestFunction."""
        def h(t, u):
            return time_fn(t) * bump.f(u)

        dh_dt = None
        if time_fn_prime is not None:
            def dh_dt(t, u):
                return time_fn_prime(t) * bump.f(u)

        return cls(h=h, dh_dt=dh_dt, support=bump.support or (0.0, 1.0))

    def lattice(self, sys: DriftSystem, t: float):
        """(H_t, L_n H_t) on the interior sites, cached by t."""
        key = float(t)
        if key not in self._cache:
            params = sys.params
            hv = np.asarray(self.h(t, params.grid()), dtype=float)
            lap = sys.params.speed * (sys.kernel_matrix @ hv - sys.row_sums * hv)
            self._cache[key] = (hv, lap)
            if len(self._cache) > 200000:
                self._cache.clear()
        return self._cache[key]

    def tilt_drift(self, sys: DriftSystem, t: float) -> np.ndarray:
        """u_t = -(L_n H_t) on the lattice."""
        return -self.lattice(sys, t)[1]

    def dt_lattice(self, sys: DriftSystem, t: float) -> np.ndarray:
        if self.dh_dt is None:
            raise ValueError("field has no time derivative")
        return np.asarray(self.dh_dt(t, sys.params.grid()), dtype=float)


@dataclass
class Trajectory:
    """Recorded path: aligned times and configurations, optional log-weight."""

    times: np.ndarray
    phis: np.ndarray
    scheme: str
    log_girsanov: Optional[float] = None
    params: Optional[ModelParams] = None

    def state(self, i: int) -> FieldState:
        return FieldState(phi=self.phis[i], time=float(self.times[i]))


def euler_stability_limit(sys: DriftSystem) -> float:
    """Largest admissible Euler step: dt n^gamma (1 + max row sum) < 1/2,
    the row sum including the boundary relaxation indicators."""
    s = sys.row_sums.copy()
    s[0] += 1.0
    s[-1] += 1.0
    return 0.5 / (sys.params.speed * (1.0 + float(s.max())))


def _edge_tilt(sys: DriftSystem, field: ExternalField, t: float) -> np.ndarray:
    """Per-edge Girsanov tilt lambda_e = sigma_e (H(y) - H(x)) / 2."""
    hv, _ = field.lattice(sys, t)
    xi, yi, sig = sys.edge_arrays()
    return 0.5 * sig * (hv[yi] - hv[xi])


def step_euler(state: FieldState, sys: DriftSystem,
               field: Optional[ExternalField], dt: float,
               rng: np.random.Generator) -> FieldState:
    """One Euler-Maruyama step with per-edge noise.

    Raises ValueError when dt violates the stability bound.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    limit = euler_stability_limit(sys)
    if dt >= limit:
        raise ValueError(f"dt={dt:.3e} violates the stability bound {limit:.3e}")
    phi = as_grid_function(sys.params, state.phi)
    drift = sys.m @ phi + sys.b
    if field is not None:
        drift = drift + field.tilt_drift(sys, state.time)
    inc = sys.edge_incidence()
    xi = rng.standard_normal(inc.shape[0])
    noise = np.sqrt(dt) * (xi @ inc)
    return FieldState(phi=phi + dt * drift + noise, time=state.time + dt)


def propagate_exact(state: FieldState, sys: DriftSystem,
                    profile: StationaryProfile, t: float,
                    rng: np.random.Generator) -> FieldState:
    """Exact Gaussian transition over a time t of the untilted dynamics.

    Tilted dynamics is not supported by this scheme; request it through the
    Euler stepper instead.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    spec = dirichlet_spectrum(sys.params, sys.params.n_sites)
    phi = as_grid_function(sys.params, state.phi)
    lam = spec.eigenvalues
    decay = np.exp(-lam * t)
    coeff = spec.project(phi - profile.profile) * decay
    mean = profile.profile + spec.synthesize(coeff)
    std_modes = np.sqrt(np.maximum(1.0 - decay ** 2, 0.0) / sys.params.n)
    noise = spec.modes @ (std_modes * rng.standard_normal(lam.size))
    return FieldState(phi=mean + noise, time=state.time + t)


def simulate_trajectory(sys: DriftSystem, init: FieldState, T: float,
                        scheme: str = "euler",
                        field: Optional[ExternalField] = None,
                        record_every: int = 1, seed: int = 0,
                        dt: Optional[float] = None,
                        profile: Optional[StationaryProfile] = None) -> Trajectory:
    """Simulate one replica over [0, T] and record every `record_every` steps.

    With a tilt field present the scheme must be "euler"; the returned
    trajectory then carries the accumulated log Girsanov weight of the
    tilted path relative to the untilted law.  T = 0 returns the initial
    state alone.
    """
    params = sys.params
    phi0 = as_grid_function(params, init.phi)
    if T == 0:
        return Trajectory(times=np.array([init.time]), phis=phi0[None, :].copy(),
                          scheme=scheme, params=params,
                          log_girsanov=0.0 if field is not None else None)
    if field is not None and scheme != "euler":
        raise ValueError("tilted dynamics requires the euler scheme")
    rng = make_rng(seed, "trajectory")

    if scheme == "exact":
        if profile is None:
            raise ValueError("exact scheme needs the stationary profile")
        if dt is None:
            n_rec = 1
        else:
            n_rec = max(1, int(np.ceil(T / (record_every * dt) - 1e-12)))
        rec_dt = T / n_rec
        times = [init.time]
        phis = [phi0.copy()]
        state = FieldState(phi=phi0.copy(), time=init.time)
        for _ in range(n_rec):
            state = propagate_exact(state, sys, profile, rec_dt, rng)
            times.append(state.time)
            phis.append(state.phi)
        return Trajectory(times=np.array(times), phis=np.array(phis),
                          scheme="exact", params=params)

    if scheme != "euler":
        raise ValueError(f"unknown scheme {scheme!r}")
    if dt is None:
        dt = 0.5 * euler_stability_limit(sys)
    n_steps = max(1, int(np.ceil(T / dt - 1e-12)))
    dt = T / n_steps
    inc = sys.edge_incidence()
    n_edges = inc.shape[0] - 2
    sqdt = np.sqrt(dt)

    phi = phi0.copy()
    t = init.time
    logw = 0.0
    logw_comp = 0.0   # Kahan compensation for the log-weight sum
    times = [t]
    phis = [phi.copy()]
    for k in range(n_steps):
        drift = sys.m @ phi + sys.b
        if field is not None:
            drift = drift + field.tilt_drift(sys, t)
        xi = rng.standard_normal(inc.shape[0])
        if field is not None:
            lam = _edge_tilt(sys, field, t)
            inc_w = sqdt * float(lam @ xi[:n_edges]) + 0.5 * dt * float(lam @ lam)
            y = inc_w - logw_comp
            tot = logw + y
            logw_comp = (tot - logw) - y
            logw = tot
        phi = phi + dt * drift + sqdt * (xi @ inc)
        t += dt
        if (k + 1) % record_every == 0 or k == n_steps - 1:
            times.append(t)
            phis.append(phi.copy())
    return Trajectory(times=np.array(times), phis=np.array(phis), scheme="euler",
                      params=params,
                      log_girsanov=logw if field is not None else None)


def euler_ensemble(sys: DriftSystem, phi0: np.ndarray, T: float, dt: float,
                   seed: int, field: Optional[ExternalField] = None,
                   tilted: bool = True, girsanov: bool = False,
                   noise: str = "auto", martingale_g=None,
                   chunk: int = 20000) -> dict:
    """Vectorized Euler evolution of a batch of replicas to time T.

    Parameters
    ----------
    phi0 : ndarray (replicas, n-1)
        Initial configurations (consumed, not modified).
    field : ExternalField, optional
        Tilt field.  With `tilted=False` the untilted dynamics runs but the
        Girsanov weight of the field is still accumulated (importance
        sampling of the tilted law from untilted paths).
    girsanov : bool
        Accumulate log weights (requires a field; forces edge noise).
    noise : "edges" | "factor" | "auto"
        Edge noise draws one normal per bulk pair and reproduces the
        carre-du-champ structure edge by edge; "factor" draws site noise
        through the Cholesky factor of -2M (identical in law, cheaper for
        large plain ensembles).  "auto" picks edges when weights or tilts
        are in play.
    martingale_g : grid function, optional
        Accumulate the Dynkin martingale of <pi, G> along the path (exact
        telescoping of the noise pairings).

    Returns dict with keys 'phi', and optionally 'log_weight', 'martingale'.
    """
    params = sys.params
    replicas = phi0.shape[0]
    n_steps = max(1, int(np.ceil(T / dt - 1e-12)))
    dt = T / n_steps
    if dt >= euler_stability_limit(sys):
        raise ValueError("dt violates the stability bound")
    needs_edges = girsanov or (field is not None and tilted and noise == "auto")
    if noise == "auto":
        noise = "edges" if needs_edges else "factor"
    if girsanov and noise != "edges":
        raise ValueError("girsanov accounting requires edge noise")
    if girsanov and field is None:
        raise ValueError("girsanov accounting requires a field")

    step_mat = (np.eye(params.n_sites) + dt * sys.m).T
    sqdt = np.sqrt(dt)
    if noise == "edges":
        inc = sys.edge_incidence()
        n_edges = inc.shape[0] - 2
    else:
        factor = sys.noise_factor().T  # phi_noise = z @ factor * sqdt

    g_vec = None
    if martingale_g is not None:
        g_vec = as_grid_function(params, martingale_g) / params.n_sites

    out = {}
    phi_out = np.empty_like(phi0)
    logw_out = np.zeros(replicas) if girsanov else None
    mart_out = np.zeros(replicas) if g_vec is not None else None

    for lo in range(0, replicas, chunk):
        hi = min(lo + chunk, replicas)
        rng = make_rng(seed, "euler-ensemble", lo)
        phi = phi0[lo:hi].copy()
        if girsanov:
            # compensated (Kahan) accumulation: the log-weight is a long sum
            # of per-step increments that must stay exact in the exponent
            logw = np.zeros(hi - lo)
            logw_comp = np.zeros(hi - lo)
        mart = np.zeros(hi - lo) if g_vec is not None else None
        t = 0.0
        for _ in range(n_steps):
            new = phi @ step_mat
            new += dt * sys.b
            if field is not None and tilted:
                new += dt * field.tilt_drift(sys, t)
            if noise == "edges":
                xi = rng.standard_normal((hi - lo, inc.shape[0]))
                if girsanov:
                    lam = _edge_tilt(sys, field, t)
                    quad = 0.5 * dt * float(lam @ lam)
                    inc_w = sqdt * (xi[:, :n_edges] @ lam)
                    inc_w += quad if tilted else -quad
                    y = inc_w - logw_comp
                    tot = logw + y
                    logw_comp = (tot - logw) - y
                    logw = tot
                step_noise = sqdt * (xi @ inc)
            else:
                z = rng.standard_normal((hi - lo, params.n_sites))
                step_noise = sqdt * (z @ factor)
            if mart is not None:
                mart += step_noise @ g_vec
            phi = new + step_noise
            t += dt
        phi_out[lo:hi] = phi
        if girsanov:
            logw_out[lo:hi] = logw
        if mart is not None:
            mart_out[lo:hi] = mart

    out["phi"] = phi_out
    if girsanov:
        out["log_weight"] = logw_out
    if mart_out is not None:
        out["martingale"] = mart_out
    return out


def empirical_pairing(state, G) -> float:
    """Empirical-measure pairing <pi, G> = (1/(n-1)) sum_x G(x/n) phi(x)."""
    phi = state.phi if isinstance(state, FieldState) else np.asarray(state, dtype=float)
    G = np.asarray(G, dtype=float)
    if G.shape != phi.shape[-1:]:
        raise ValueError("G must match the number of interior sites")
    return float(phi @ G) / G.size if phi.ndim == 1 else (phi @ G) / G.size


def boundary_block_average(state, side: str, eps: float, n: Optional[int] = None) -> float:
    """Average of the first (or last) floor(eps*n) sites of the configuration."""
    phi = state.phi if isinstance(state, FieldState) else np.asarray(state, dtype=float)
    n = n if n is not None else phi.size + 1
    ell = int(np.floor(eps * n))
    if not (1 <= ell <= n - 2):
        raise ValueError(f"eps={eps} gives block length {ell} outside [1, {n - 2}]")
    if side == "left":
        return float(phi[:ell].mean())
    if side == "right":
        return float(phi[-ell:].mean())
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def martingale_qv_rate(params: ModelParams, sys: DriftSystem, G) -> float:
    """Deterministic quadratic-variation rate of the Dynkin martingale of
    <pi, G> (time-independent G):

        n^gamma [ sum_{x,y} p(y-x)(G_y - G_x)^2 + 2 G(1/n)^2 + 2 G((n-1)/n)^2 ]
        / |Lambda_n|^2 ,

    normalized with the same 1/(n-1) convention as `empirical_pairing` so
    that the variance of the accumulated martingale equals rate * T exactly
    for the Euler chain.
    """
    G = as_grid_function(params, G)
    P = sys.kernel_matrix
    s = sys.row_sums
    ordered = 2.0 * (np.sum(s * G * G) - G @ (P @ G))
    rate = params.speed * (ordered + 2.0 * G[0] ** 2 + 2.0 * G[-1] ** 2)
    return float(rate) / params.n_sites ** 2


def dynkin_diagnostics(traj: Trajectory, sys: DriftSystem, G,
                       field: Optional[ExternalField] = None) -> dict:
    """Dynkin martingale of <pi_t, G> along a recorded trajectory.

        M_t = <pi_t, G> - <pi_0, G> - int_0^t <drift(phi_s, s), G> ds,

    with the generator's drift (including the tilt when a field is given)
    integrated by the left-endpoint rule on the recording grid, matching the
    Euler discretization exactly.  Returns the martingale value at the final
    time and the deterministic predicted quadratic variation.
    """
    params = traj.params or sys.params
    G = as_grid_function(params, G)
    times, phis = traj.times, traj.phis
    if len(times) < 2:
        raise ValueError("trajectory must contain at least two recorded states")
    drift_int = 0.0
    for k in range(len(times) - 1):
        h = times[k + 1] - times[k]
        drift = sys.m @ phis[k] + sys.b
        if field is not None:
            drift = drift + field.tilt_drift(sys, float(times[k]))
        drift_int += h * empirical_pairing(drift, G)
    m_t = (empirical_pairing(phis[-1], G) - empirical_pairing(phis[0], G)
           - drift_int)
    span = float(times[-1] - times[0])
    return {
        "martingale": float(m_t),
        "predicted_qv": martingale_qv_rate(params, sys, G) * span,
        "span": span,
    }


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """Write the trajectory as rows t,x,phi."""
    n = (traj.params.n if traj.params is not None else traj.phis.shape[1] + 1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "phi"])
        for t, row in zip(traj.times, traj.phis):
            for x, val in enumerate(row, start=1):
                writer.writerow([repr(float(t)), x, repr(float(val))])
