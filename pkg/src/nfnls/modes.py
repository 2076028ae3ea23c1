"""Dense Fourier coefficient vectors on a symmetric frequency lattice.

A ``ModeVector`` stores the coefficients ``u_hat(n)`` for ``n`` in
``[-n_max, n_max]`` as one dense complex array.  The weighted norms are the
Fourier-Lebesgue norms ``||<n>^s u_hat(n)||_{l^p}`` with Japanese bracket
``<n> = (1 + n^2)^(1/2)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

__all__ = [
    "FLParams",
    "ModeVector",
    "fl_norm",
    "mass",
    "gauge_transform",
    "interaction_representation",
]


@dataclass(frozen=True)
class FLParams:
    """Norm parameters (s, p): weight exponent s and summation exponent p.

    p may be ``math.inf`` for the sup norm.
    """

    s: float = 0.0
    p: float = 2.0

    def __post_init__(self) -> None:
        if not (self.p >= 1.0):
            raise ValueError(f"norm exponent p must satisfy p >= 1, got {self.p}")
        if math.isnan(self.s):
            raise ValueError("weight exponent s must be a real number")


class ModeVector:
    """Complex coefficients over the lattice [-n_max, n_max], stored densely.

    ``coeffs[i]`` holds the coefficient of frequency ``n = i - n_max``.
    Instances are value-like: operations return new vectors.
    """

    __slots__ = ("n_max", "coeffs")

    def __init__(self, n_max: int, coeffs=None):
        if n_max < 0:
            raise ValueError(f"n_max must be >= 0, got {n_max}")
        size = 2 * n_max + 1
        if coeffs is None:
            arr = np.zeros(size, dtype=np.complex128)
        else:
            arr = np.array(coeffs, dtype=np.complex128)
            if arr.shape != (size,):
                raise ValueError(
                    f"expected {size} coefficients for n_max={n_max}, got shape {arr.shape}"
                )
        object.__setattr__(self, "n_max", int(n_max))
        object.__setattr__(self, "coeffs", arr)

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls, n_max: int) -> "ModeVector":
        return cls(n_max)

    @classmethod
    def from_dict(cls, n_max: int, values: Mapping[int, complex]) -> "ModeVector":
        out = cls(n_max)
        for n, v in values.items():
            if abs(n) > n_max:
                raise ValueError(f"frequency {n} outside lattice [-{n_max}, {n_max}]")
            out.coeffs[n + n_max] = v
        return out

    def copy(self) -> "ModeVector":
        return ModeVector(self.n_max, self.coeffs.copy())

    # -- access -----------------------------------------------------------

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    def get(self, n: int) -> complex:
        """Coefficient of frequency n; zero outside the lattice."""
        if abs(n) > self.n_max:
            return 0.0 + 0.0j
        return complex(self.coeffs[n + self.n_max])

    def items(self) -> Iterator[tuple[int, complex]]:
        for i, v in enumerate(self.coeffs):
            yield i - self.n_max, complex(v)

    def truncated(self, m: int) -> "ModeVector":
        """Zero out all frequencies with |n| > m (lattice size unchanged)."""
        if m < 0:
            raise ValueError(f"truncation bound must be >= 0, got {m}")
        out = self.copy()
        if m < self.n_max:
            out.coeffs[: self.n_max - m] = 0.0
            out.coeffs[self.n_max + m + 1 :] = 0.0
        return out

    # -- arithmetic -------------------------------------------------------

    def _check_compat(self, other: "ModeVector") -> None:
        if self.n_max != other.n_max:
            raise ValueError(
                f"lattice mismatch: n_max {self.n_max} vs {other.n_max}"
            )

    def __add__(self, other: "ModeVector") -> "ModeVector":
        self._check_compat(other)
        return ModeVector(self.n_max, self.coeffs + other.coeffs)

    def __sub__(self, other: "ModeVector") -> "ModeVector":
        self._check_compat(other)
        return ModeVector(self.n_max, self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> "ModeVector":
        return ModeVector(self.n_max, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "ModeVector":
        return ModeVector(self.n_max, -self.coeffs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ModeVector)
            and self.n_max == other.n_max
            and bool(np.array_equal(self.coeffs, other.coeffs))
        )

    def __repr__(self) -> str:
        nz = sum(1 for v in self.coeffs if v != 0)
        return f"ModeVector(n_max={self.n_max}, nonzero={nz})"

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "coeffs": [
                [int(n - self.n_max), float(v.real), float(v.imag)]
                for n, v in enumerate(self.coeffs)
            ],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "ModeVector":
        try:
            n_max = int(data["n_max"])
            rows = data["coeffs"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed mode vector document: {exc}") from exc
        out = cls(n_max)
        seen = set()
        for row in rows:
            n, re, im = int(row[0]), float(row[1]), float(row[2])
            if abs(n) > n_max:
                raise ValueError(f"frequency {n} outside lattice for n_max={n_max}")
            if n in seen:
                raise ValueError(f"duplicate frequency {n} in mode vector document")
            seen.add(n)
            out.coeffs[n + n_max] = re + 1j * im
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ModeVector":
        return cls.from_json_dict(json.loads(text))


def fl_norm(u: ModeVector, params: FLParams = FLParams()) -> float:
    """Weighted norm ||<n>^s u_hat(n)||_{l^p} with <n> = (1 + n^2)^(1/2)."""
    n = u.frequencies.astype(np.float64)
    weighted = np.abs(u.coeffs) * (1.0 + n * n) ** (params.s / 2.0)
    if math.isinf(params.p):
        return float(weighted.max(initial=0.0))
    return float(np.sum(weighted ** params.p) ** (1.0 / params.p))


def mass(u: ModeVector) -> float:
    """Sum of |u_hat(n)|^2, conserved by every model variant here."""
    return float(np.sum(np.abs(u.coeffs) ** 2))


def gauge_transform(
    u: ModeVector, t: float, sign: int, direction: str = "forward"
) -> ModeVector:
    """Multiply by the mass phase exp(-sign * 2 i t * mass(u)).

    The forward transform maps a solution of the plain cubic equation (with
    nonlinearity sign ``sign``) to a solution of its mass-renormalized
    counterpart; ``direction="inverse"`` undoes it.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    angle = -2.0 * sign * t * mass(u)
    if direction == "inverse":
        angle = -angle
    return ModeVector(u.n_max, u.coeffs * np.exp(1j * angle))


def interaction_representation(
    u: ModeVector, t: float, direction: str = "forward"
) -> ModeVector:
    """Strip (forward) or restore (inverse) the free Schrodinger phase.

    Forward maps physical coefficients to the profile ``e^{i n^2 t} u_hat(n)``
    whose time derivative has no linear part.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    n = u.frequencies.astype(np.float64)
    angle = n * n * t
    if direction == "inverse":
        angle = -angle
    return ModeVector(u.n_max, u.coeffs * np.exp(1j * angle))
