"""Numerical audits: telescoping identity, decay envelopes, cross-validation.

These routines exercise the operator layer against independent ground truth:
the reference RK4 integrator, divisor-counting estimates, and the exact
algebraic identity that one differentiation-by-parts step must satisfy along
any solution of the truncated profile equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_simpson

from ._util import double_factorial
from .dynamics import ModelSpec, Trajectory, integrate_reference
from .modes import FLParams, ModeVector, fl_norm
from .normal_form import ModulationConfig, eval_generation
from .solver import SolverConfig, SolveReport, solve_normal_form

__all__ = [
    "divisor_count",
    "divisor_growth_check",
    "telescoping_residual",
    "DecayRow",
    "DecayTable",
    "remainder_decay_study",
    "CompareResult",
    "compare_solutions",
    "StabilityRow",
    "approximation_stability",
]


def divisor_count(n: int) -> int:
    """Number of positive divisors of n >= 1, by trial division."""
    if n < 1:
        raise ValueError(f"divisor_count needs n >= 1, got {n}")
    count = 0
    i = 1
    while i * i <= n:
        if n % i == 0:
            count += 2 if i * i != n else 1
        i += 1
    return count


def divisor_growth_check(N: int, delta: float) -> tuple[float, int]:
    """Max of d(n) / n^delta over 2 <= n <= N, and its argmax.

    Uses a sieve, so the cost is O(N log N).  For any delta > 0 the maximum
    stays bounded as N grows, reflecting d(n) = o(n^delta).
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    counts = np.zeros(N + 1, dtype=np.int64)
    for i in range(1, N + 1):
        counts[i::i] += 1
    n = np.arange(2, N + 1, dtype=np.float64)
    ratios = counts[2:] / n ** delta
    best = int(np.argmax(ratios))
    return float(ratios[best]), best + 2


def telescoping_residual(
    j: int,
    traj: Trajectory,
    cfg: ModulationConfig,
    model: ModelSpec,
    sign_convention: str = "signed",
) -> float:
    """Sup-in-time sup-in-n residual of one differentiation-by-parts step.

    Along a trajectory of the truncated profile equation,

        int_0^t N2^(j) dt' = N0^(j+1)(t) - N0^(j+1)(0)
                           + int_0^t ( R^(j+1) [+ R2^(j+1)] + N^(j+1) ) dt',

    exactly; the returned residual only contains the O(dt^4) integration and
    quadrature error of the supplied trajectory and of the cumulative Simpson
    rule.  sign_convention="unsigned" evaluates every operator with all
    conjugation signs forced to +1, a deliberately broken convention whose
    residual does not vanish with dt (negative control).
    """
    if sign_convention not in ("signed", "unsigned"):
        raise ValueError(f"unknown sign convention {sign_convention!r}")
    unsigned = sign_convention == "unsigned"
    sign = model.nonlinearity_sign
    full = model.renormalization == "full"
    times = traj.times
    G = len(times)
    size = 2 * traj.n_max + 1

    lhs_rate = np.zeros((G, size), dtype=np.complex128)
    rhs_rate = np.zeros((G, size), dtype=np.complex128)
    boundary = np.zeros((G, size), dtype=np.complex128)
    for i in range(G):
        state, t = traj.states[i], float(times[i])

        def ev(kind: str, gen: int) -> np.ndarray:
            return eval_generation(
                kind, gen, state, t, cfg, sign=sign, _unsigned=unsigned
            ).value.coeffs

        lhs_rate[i] = ev("N2", j)
        boundary[i] = ev("N0", j + 1)
        corr = ev("R", j + 1) + ev("N1", j + 1) + ev("N2", j + 1)
        if full:
            corr = corr + ev("R2", j + 1)
        rhs_rate[i] = corr

    def cum(values: np.ndarray) -> np.ndarray:
        re = cumulative_simpson(values.real, x=times, axis=0, initial=0.0)
        im = cumulative_simpson(values.imag, x=times, axis=0, initial=0.0)
        return re + 1j * im

    residual = cum(lhs_rate) - (boundary - boundary[0] + cum(rhs_rate))
    return float(np.max(np.abs(residual)))


@dataclass
class DecayRow:
    J: int
    sup_norm: float
    envelope: float


@dataclass
class DecayTable:
    rows: list[DecayRow]
    K: float


def remainder_decay_study(
    u: ModeVector,
    J_values: Sequence[int],
    cfg: ModulationConfig,
    t_samples: Sequence[float] = (0.0, 0.125, 0.25, 0.5, 0.75, 1.0),
) -> DecayTable:
    """Sup-norm of the generation-J remainder N2^(J) against its envelope.

    The envelope is c * K^{-4(J-1)} / ((2J-1)!!)^2 with c calibrated so that
    the envelope matches the measured value at the first J in J_values.
    """
    J_values = sorted(set(int(J) for J in J_values))
    if not J_values or J_values[0] < 1:
        raise ValueError("J_values must contain generations >= 1")
    params = FLParams(0.0, math.inf)
    sups = []
    for J in J_values:
        worst = 0.0
        for t in t_samples:
            res = eval_generation("N2", J, u, float(t), cfg)
            worst = max(worst, fl_norm(res.value, params))
        sups.append(worst)

    def shape(J: int) -> float:
        return cfg.K ** (4.0 * (1 - J)) / double_factorial(2 * J - 1) ** 2

    c = sups[0] / shape(J_values[0]) if sups[0] > 0 else 0.0
    rows = [
        DecayRow(J=J, sup_norm=s, envelope=c * shape(J))
        for J, s in zip(J_values, sups)
    ]
    return DecayTable(rows=rows, K=cfg.K)


@dataclass
class CompareResult:
    times: np.ndarray
    distances: np.ndarray
    max_distance: float
    report: SolveReport


def compare_solutions(
    u0: ModeVector, cfg: SolverConfig, dt_ref: float
) -> CompareResult:
    """Solve the truncated normal form equation and compare with RK4.

    The reference step is snapped so that reference samples land exactly on
    the solver grid; distances are FL^{0,2} per grid time.
    """
    if dt_ref <= 0:
        raise ValueError(f"dt_ref must be positive, got {dt_ref}")
    report = solve_normal_form(u0, cfg)
    cells = cfg.time_grid_size - 1
    per_cell = max(1, int(round(cfg.T / cells / dt_ref)))
    ref = integrate_reference(u0, cfg.T, cfg.T / (cells * per_cell), cfg.model)
    params = FLParams(0.0, 2.0)
    dists = np.array(
        [
            fl_norm(report.trajectory.states[i] - ref.states[i * per_cell], params)
            for i in range(cfg.time_grid_size)
        ]
    )
    return CompareResult(
        times=report.trajectory.times.copy(),
        distances=dists,
        max_distance=float(dists.max()),
        report=report,
    )


@dataclass
class StabilityRow:
    m_lo: int
    m_hi: int
    data_distance: float
    solution_distance: float
    ratio: float


def approximation_stability(
    u0: ModeVector, m_values: Sequence[int], cfg: SolverConfig
) -> list[StabilityRow]:
    """Solve for a chain of truncated data and compare consecutive solutions.

    For each pair of consecutive truncation levels the row reports the data
    distance, the sup-in-time solution distance, and their ratio, all in
    FL^{0,p} with the solver's p.
    """
    m_values = sorted(set(int(m) for m in m_values))
    if len(m_values) < 2:
        raise ValueError("need at least two truncation levels")
    params = FLParams(0.0, cfg.mod_cfg.p)
    solutions = {}
    for m in m_values:
        solutions[m] = solve_normal_form(u0.truncated(m), cfg)
    rows = []
    for m_lo, m_hi in zip(m_values, m_values[1:]):
        data_dist = fl_norm(u0.truncated(m_hi) - u0.truncated(m_lo), params)
        sol_dist = max(
            fl_norm(a - b, params)
            for a, b in zip(
                solutions[m_hi].trajectory.states, solutions[m_lo].trajectory.states
            )
        )
        ratio = sol_dist / data_dist if data_dist > 0 else math.inf
        rows.append(
            StabilityRow(
                m_lo=m_lo,
                m_hi=m_hi,
                data_distance=data_dist,
                solution_distance=sol_dist,
                ratio=ratio,
            )
        )
    return rows
