"""Galerkin-truncated mode dynamics in the interaction picture.

The state is the profile vector ``v(n, t) = e^{i n^2 t} u_hat(n, t)`` of a
periodic cubic Schrodinger flow truncated to ``|n| <= n_max``.  Its equation
splits into a nonresonant trilinear part with oscillating phases and pointwise
resonant corrections:

    d/dt v(n) = sign * [ N1(v)(n) + R1(v)(n) ]            (renormalized)
    d/dt v(n) = sign * [ N1(v)(n) + R1(v)(n) + R2(v)(n) ] (full)

with

    N1(v)(n) = i * sum_{n = n1 - n2 + n3, n2 != n1, n2 != n3}
                   e^{i Phi t} v(n1) conj(v(n2)) v(n3),
    Phi      = n^2 - n1^2 + n2^2 - n3^2 = 2 (n - n1)(n - n3),
    R1(v)(n) = -i |v(n)|^2 v(n),
    R2(v)(n) = 2 i (sum_m |v(m)|^2) v(n).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .modes import ModeVector

__all__ = [
    "ModelSpec",
    "Trajectory",
    "BlowupError",
    "phase_phi",
    "eval_N1_first",
    "eval_R1",
    "eval_R2",
    "rhs",
    "integrate_reference",
    "trajectory_to_jsonl",
    "trajectory_from_jsonl",
]

#: lattice size above which eval_N1_first switches to the convolution path
DIRECT_PATH_LIMIT = 32

#: coefficient magnitude that triggers BlowupError in integrate_reference
OVERFLOW_GUARD = 1.0e6


@dataclass(frozen=True)
class ModelSpec:
    """Which cubic model to integrate.

    renormalization: "renormalized" drops the R2 term (it has been gauged
    away), "full" keeps it.  nonlinearity_sign is +1 (focusing) or -1
    (defocusing) and multiplies the whole nonlinearity.
    """

    renormalization: str = "renormalized"
    nonlinearity_sign: int = 1

    def __post_init__(self) -> None:
        if self.renormalization not in ("renormalized", "full"):
            raise ValueError(
                f"renormalization must be 'renormalized' or 'full',"
                f" got {self.renormalization!r}"
            )
        if self.nonlinearity_sign not in (1, -1):
            raise ValueError(
                f"nonlinearity_sign must be +1 or -1, got {self.nonlinearity_sign}"
            )


class BlowupError(RuntimeError):
    """Raised when the reference integrator leaves the trusted amplitude range."""


def phase_phi(n: int, n1: int, n2: int, n3: int) -> int:
    """Resonance phase n^2 - n1^2 + n2^2 - n3^2 of one trilinear interaction."""
    return n * n - n1 * n1 + n2 * n2 - n3 * n3


# ---------------------------------------------------------------------------
# trilinear nonresonant term
# ---------------------------------------------------------------------------

_direct_cache: dict[int, tuple] = {}


def _direct_tables(n_max: int) -> tuple:
    """Index tables for the direct triple enumeration, cached per n_max."""
    tbl = _direct_cache.get(n_max)
    if tbl is not None:
        return tbl
    r = np.arange(-n_max, n_max + 1)
    n1, n2, n3 = (x.ravel() for x in np.meshgrid(r, r, r, indexing="ij"))
    n = n1 - n2 + n3
    keep = (np.abs(n) <= n_max) & (n2 != n1) & (n2 != n3)
    n1, n2, n3, n = n1[keep], n2[keep], n3[keep], n[keep]
    phi = (n * n - n1 * n1 + n2 * n2 - n3 * n3).astype(np.int64)
    phi_u, phi_inv = np.unique(phi, return_inverse=True)
    tbl = (
        (n1 + n_max).astype(np.int32),
        (n2 + n_max).astype(np.int32),
        (n3 + n_max).astype(np.int32),
        (n + n_max).astype(np.int32),
        phi_u.astype(np.float64),
        phi_inv.astype(np.int32),
    )
    if len(_direct_cache) > 8:
        _direct_cache.clear()
    _direct_cache[n_max] = tbl
    return tbl


def _n1_direct(a1: np.ndarray, a2: np.ndarray, a3: np.ndarray, t: float, n_max: int) -> np.ndarray:
    i1, i2, i3, iout, phi_u, phi_inv = _direct_tables(n_max)
    w = a1[i1] * np.conj(a2[i2]) * a3[i3]
    w = w * np.exp(1j * t * phi_u)[phi_inv]
    size = 2 * n_max + 1
    out = np.bincount(iout, weights=w.real, minlength=size) + 1j * np.bincount(
        iout, weights=w.imag, minlength=size
    )
    return 1j * out


def _n1_conv(a1: np.ndarray, a2: np.ndarray, a3: np.ndarray, t: float, n_max: int) -> np.ndarray:
    # The phase e^{i Phi t} factorizes mode by mode, so the constrained triple
    # sum is a full discrete convolution of phase-twisted sequences minus the
    # two excluded diagonals (which carry no phase), plus their overlap.
    n = np.arange(-n_max, n_max + 1).astype(np.float64)
    tw = np.exp(-1j * n * n * t)
    b1, b2, b3 = a1 * tw, a2 * tw, a3 * tw
    full = np.convolve(np.convolve(b1, np.conj(b2)[::-1]), b3)
    center = full[2 * n_max : 4 * n_max + 1]  # frequencies -n_max .. n_max
    out = np.conj(tw) * center
    out = out - np.sum(a1 * np.conj(a2)) * a3 - np.sum(np.conj(a2) * a3) * a1
    out = out + a1 * np.conj(a2) * a3
    return 1j * out


def eval_N1_first(
    u1: ModeVector, u2: ModeVector, u3: ModeVector, t: float, method: str = "auto"
) -> ModeVector:
    """Trilinear nonresonant term N1(u1, u2, u3) at time t.

    method: "auto" picks direct enumeration for n_max <= DIRECT_PATH_LIMIT and
    the convolution path above; "direct" / "conv" force one path.  Both paths
    agree to roundoff and the direct path sums in a fixed deterministic order.
    """
    u1._check_compat(u2)
    u1._check_compat(u3)
    n_max = u1.n_max
    if method == "auto":
        method = "direct" if n_max <= DIRECT_PATH_LIMIT else "conv"
    if method == "direct":
        out = _n1_direct(u1.coeffs, u2.coeffs, u3.coeffs, t, n_max)
    elif method == "conv":
        out = _n1_conv(u1.coeffs, u2.coeffs, u3.coeffs, t, n_max)
    else:
        raise ValueError(f"method must be 'auto', 'direct' or 'conv', got {method!r}")
    return ModeVector(n_max, out)


def eval_R1(u1: ModeVector, u2: ModeVector, u3: ModeVector) -> ModeVector:
    """Pointwise resonant term -i u1(n) conj(u2(n)) u3(n)."""
    u1._check_compat(u2)
    u1._check_compat(u3)
    return ModeVector(u1.n_max, -1j * u1.coeffs * np.conj(u2.coeffs) * u3.coeffs)


def eval_R2(u1: ModeVector, u2: ModeVector, u3: ModeVector) -> ModeVector:
    """Mass term 2 i (sum_m u1(m) conj(u2(m))) u3(n)."""
    u1._check_compat(u2)
    u1._check_compat(u3)
    total = np.sum(u1.coeffs * np.conj(u2.coeffs))
    return ModeVector(u1.n_max, 2j * total * u3.coeffs)


def rhs(u: ModeVector, t: float, model: ModelSpec) -> ModeVector:
    """Right-hand side of the profile equation for the given model."""
    out = eval_N1_first(u, u, u, t).coeffs + eval_R1(u, u, u).coeffs
    if model.renormalization == "full":
        out = out + eval_R2(u, u, u).coeffs
    return ModeVector(u.n_max, model.nonlinearity_sign * out)


# ---------------------------------------------------------------------------
# reference integration
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Profile states sampled on an increasing time grid."""

    times: np.ndarray
    states: list[ModeVector]

    def __post_init__(self) -> None:
        if len(self.times) != len(self.states):
            raise ValueError("times and states must have equal length")
        if len(self.states) == 0:
            raise ValueError("trajectory must contain at least one state")

    @property
    def n_max(self) -> int:
        return self.states[0].n_max

    def __len__(self) -> int:
        return len(self.states)


def integrate_reference(
    u0: ModeVector,
    T: float,
    dt: float,
    model: ModelSpec,
    guard: float = OVERFLOW_GUARD,
) -> Trajectory:
    """Classic fixed-step RK4 integration of the profile equation on [0, T].

    The step count is round(T / dt) and must reproduce T to relative 1e-9.
    Raises BlowupError as soon as any coefficient magnitude exceeds guard.
    """
    if T <= 0 or dt <= 0:
        raise ValueError(f"T and dt must be positive, got T={T}, dt={dt}")
    n_steps = int(round(T / dt))
    if n_steps < 1 or abs(n_steps * dt - T) > 1e-9 * max(1.0, abs(T)):
        raise ValueError(f"dt={dt} does not evenly divide T={T}")
    h = T / n_steps
    state = u0.copy()
    times = np.array([i * h for i in range(n_steps + 1)])
    states = [state.copy()]
    for i in range(n_steps):
        t = times[i]
        k1 = rhs(state, t, model)
        k2 = rhs(state + (h / 2) * k1, t + h / 2, model)
        k3 = rhs(state + (h / 2) * k2, t + h / 2, model)
        k4 = rhs(state + h * k3, t + h, model)
        state = state + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        peak = float(np.max(np.abs(state.coeffs)))
        if not np.isfinite(peak) or peak > guard:
            raise BlowupError(
                f"coefficient magnitude {peak:.3e} exceeded guard {guard:.3e}"
                f" at t={times[i + 1]:.6g}"
            )
        states.append(state.copy())
    return Trajectory(times, states)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def trajectory_to_jsonl(traj: Trajectory) -> str:
    """One JSON object per line: {"t": ..., "state": mode-vector document}."""
    lines = []
    for t, state in zip(traj.times, traj.states):
        lines.append(
            json.dumps(
                {"t": float(t), "state": state.to_json_dict()},
                sort_keys=True,
                separators=(",", ":"),
            )
        )
    return "\n".join(lines) + "\n"


def trajectory_from_jsonl(text: str) -> Trajectory:
    times: list[float] = []
    states: list[ModeVector] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        doc = json.loads(line)
        times.append(float(doc["t"]))
        states.append(ModeVector.from_json_dict(doc["state"]))
    return Trajectory(np.array(times), states)
