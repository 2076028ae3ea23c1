"""Picard iteration for the normal form equation truncated at generation J_max.

The fixed-point map sends a trajectory u(.) on the time grid to

    Gamma(u)(t) = u0 + sum_{j=2}^{J} [ N0^(j)(u(t))(t) - N0^(j)(u(0))(0) ]
                + int_0^t sum_{j=1}^{J} [ N1^(j) + R^(j) (+ R2^(j)) ](u(t'))(t') dt',

with the R2 column present only for the full (non-renormalized) model.  The
integral is a cumulative quadrature on the fixed grid.  Iteration starts from
the constant trajectory u(.) = u0 and stops when the sup-in-time FL^{0,p}
update norm drops below picard_tol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from .dynamics import ModelSpec, Trajectory
from .modes import FLParams, ModeVector, fl_norm
from .normal_form import ModulationConfig, eval_generation

__all__ = [
    "SolverConfig",
    "SolveReport",
    "SolverError",
    "choose_K",
    "gamma_map",
    "solve_normal_form",
    "lipschitz_probe",
]


class SolverError(RuntimeError):
    """Raised when the fixed-point iteration fails to converge."""


@dataclass(frozen=True)
class SolverConfig:
    model: ModelSpec
    mod_cfg: ModulationConfig
    J_max: int = 1
    n_max: int = 8
    T: float = 0.1
    time_grid_size: int = 33
    picard_tol: float = 1e-10
    picard_max_iter: int = 30
    quadrature: str = "trapezoid"

    def __post_init__(self) -> None:
        if self.J_max < 1:
            raise ValueError(f"J_max must be >= 1, got {self.J_max}")
        if self.n_max < 0:
            raise ValueError(f"n_max must be >= 0, got {self.n_max}")
        if self.T <= 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if self.time_grid_size < 3:
            raise ValueError(f"time_grid_size must be >= 3, got {self.time_grid_size}")
        if self.quadrature not in ("trapezoid", "simpson"):
            raise ValueError(
                f"quadrature must be 'trapezoid' or 'simpson', got {self.quadrature!r}"
            )
        if self.picard_tol <= 0 or self.picard_max_iter < 1:
            raise ValueError("picard_tol must be positive and picard_max_iter >= 1")

    def time_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.time_grid_size)


@dataclass
class SolveReport:
    trajectory: Trajectory
    iterations: int
    final_update_norm: float
    contraction_estimate: float
    K_used: float
    converged: bool


def choose_K(R: float, p: float, J_max: int, safety_constant: float = 1.0) -> float:
    """Smallest power-of-two K making both smallness sums drop below 1/10.

    The sums are  sum_{j>=2} K^{4(1-j)} R^{2j-1} / j!  and the same with
    (2R)^{2j-2}; safety_constant stands in for the unspecified absolute
    constant in front of both.
    """
    if R <= 0:
        raise ValueError(f"R must be positive, got {R}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if J_max < 1:
        raise ValueError(f"J_max must be >= 1, got {J_max}")
    if safety_constant <= 0:
        raise ValueError(f"safety_constant must be positive, got {safety_constant}")

    def sums(K: float) -> tuple[float, float]:
        s1 = s2 = 0.0
        for jj in range(2, 400):
            try:
                t1 = K ** (4.0 * (1 - jj)) * R ** (2 * jj - 1) / math.factorial(jj)
                t2 = K ** (4.0 * (1 - jj)) * (2.0 * R) ** (2 * jj - 2) / math.factorial(jj)
            except OverflowError:
                return math.inf, math.inf
            if math.isinf(t1) or math.isinf(t2):
                return math.inf, math.inf
            s1 += t1
            s2 += t2
            if t1 < 1e-300 and t2 < 1e-300:
                break
        return s1, s2

    K = 1.0
    for _ in range(200):
        s1, s2 = sums(K)
        if safety_constant * s1 <= 0.1 and safety_constant * s2 <= 0.1:
            return K
        K *= 2.0
    raise SolverError(f"no admissible K found for R={R}")


def _cumulative(values: np.ndarray, times: np.ndarray, quadrature: str) -> np.ndarray:
    """Cumulative integral of a (G, size) complex array along the grid."""
    if quadrature == "simpson":
        re = cumulative_simpson(values.real, x=times, axis=0, initial=0.0)
        im = cumulative_simpson(values.imag, x=times, axis=0, initial=0.0)
    else:
        re = cumulative_trapezoid(values.real, x=times, axis=0, initial=0.0)
        im = cumulative_trapezoid(values.imag, x=times, axis=0, initial=0.0)
    return re + 1j * im


def gamma_map(u0: ModeVector, traj: Trajectory, cfg: SolverConfig) -> Trajectory:
    """One application of the fixed-point map to a grid trajectory."""
    times = traj.times
    G = len(times)
    size = 2 * cfg.n_max + 1
    sign = cfg.model.nonlinearity_sign
    full = cfg.model.renormalization == "full"
    mod = cfg.mod_cfg

    integrand = np.zeros((G, size), dtype=np.complex128)
    boundary = np.zeros((G, size), dtype=np.complex128)
    for i in range(G):
        state, t = traj.states[i], float(times[i])
        acc = np.zeros(size, dtype=np.complex128)
        for j in range(1, cfg.J_max + 1):
            acc += eval_generation("N1", j, state, t, mod, sign=sign).value.coeffs
            acc += eval_generation("R", j, state, t, mod, sign=sign).value.coeffs
            if full:
                acc += eval_generation("R2", j, state, t, mod, sign=sign).value.coeffs
        integrand[i] = acc
        for j in range(2, cfg.J_max + 1):
            boundary[i] += eval_generation("N0", j, state, t, mod, sign=sign).value.coeffs

    integral = _cumulative(integrand, times, cfg.quadrature)
    states = [
        ModeVector(cfg.n_max, u0.coeffs + boundary[i] - boundary[0] + integral[i])
        for i in range(G)
    ]
    return Trajectory(times.copy(), states)


def solve_normal_form(u0: ModeVector, cfg: SolverConfig) -> SolveReport:
    """Picard-iterate the fixed-point map from the constant trajectory."""
    if u0.n_max != cfg.n_max:
        raise ValueError(f"u0 lattice n_max={u0.n_max} does not match cfg.n_max={cfg.n_max}")
    times = cfg.time_grid()
    params = FLParams(0.0, cfg.mod_cfg.p)
    traj = Trajectory(times, [u0.copy() for _ in range(len(times))])
    prev_update = None
    contraction = math.nan
    for iteration in range(1, cfg.picard_max_iter + 1):
        new = gamma_map(u0, traj, cfg)
        update = max(
            fl_norm(a - b, params) for a, b in zip(new.states, traj.states)
        )
        if prev_update is not None and prev_update > 0:
            contraction = update / prev_update
        traj = new
        if not math.isfinite(update):
            raise SolverError(f"iteration diverged at step {iteration}")
        if update <= cfg.picard_tol:
            return SolveReport(
                trajectory=traj,
                iterations=iteration,
                final_update_norm=update,
                contraction_estimate=contraction,
                K_used=cfg.mod_cfg.K,
                converged=True,
            )
        prev_update = update
    raise SolverError(
        f"no convergence in {cfg.picard_max_iter} iterations"
        f" (last update {prev_update:.3e}, tol {cfg.picard_tol:.1e})"
    )


def lipschitz_probe(u0a: ModeVector, u0b: ModeVector, cfg: SolverConfig) -> float:
    """Ratio of solution distance to data distance for two nearby data.

    Distances are sup-in-time FL^{0,p} over the solver grid.  Identical data
    are rejected (the ratio would be 0/0).
    """
    u0a._check_compat(u0b)
    params = FLParams(0.0, cfg.mod_cfg.p)
    d0 = fl_norm(u0a - u0b, params)
    if d0 == 0.0:
        raise ValueError("initial data coincide; Lipschitz ratio undefined")
    sol_a = solve_normal_form(u0a, cfg)
    sol_b = solve_normal_form(u0b, cfg)
    d1 = max(
        fl_norm(a - b, params)
        for a, b in zip(sol_a.trajectory.states, sol_b.trajectory.states)
    )
    return d1 / d0
