"""Generation-indexed multilinear operators of the normal form reduction.

Each generation j splits the nonresonant trilinear term along the modulation
sets A_k = {|mu~_k| <= cutoff(k)}, where mu~_k is the signed partial phase sum
of an interaction tree (see :mod:`nfnls.trees`).  The operators evaluated here,
all on the truncated lattice |n| <= n_max of the input vector, are

* ``N1`` / ``N2`` at generation j: sums over trees of generation j restricted
  to A_1^c .. A_{j-1}^c and then to A_j (``N1``) or A_j^c (``N2``), with
  weight  e^{i mu~_j t} / (mu~_1 ... mu~_{j-1})  on each index assignment;
* ``N`` at generation j: their unsplit sum (no constraint at generation j);
* ``N0`` at generation j >= 2: the boundary term over trees of generation
  j - 1 with weight  e^{i mu~_{j-1} t} / (mu~_1 ... mu~_{j-1});
* ``R`` / ``R2`` at generation j >= 2: the resonant corrections obtained by
  substituting the pointwise cubic term (respectively the mass term) at one
  terminal of a generation j - 1 tree, summed over terminals.  At j = 1 they
  reduce to the pointwise terms of :mod:`nfnls.dynamics`.

The operators satisfy, along any solution of the truncated profile equation,

    N2^(j) = d/dt N0^(j+1) + R^(j+1) [+ R2^(j+1)] + N1^(j+1) + N2^(j+1),

which is what :func:`nfnls.verify.telescoping_residual` checks.

Evaluation replays each tree's chronicle with vectorized expansions: one
conversion multiplies the branch count by at most (2 n_max + 1)^2, so the cost
is O((2J-1)!! n_max^{2J+1}) and a hard work guard rejects hopeless requests.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from ._util import double_factorial, worker_count
from .dynamics import eval_R1, eval_R2
from .modes import ModeVector, FLParams, fl_norm, mass
from .trees import OrderedTree, enumerate_trees

__all__ = [
    "ModulationConfig",
    "OperatorResult",
    "cutoff",
    "eval_generation",
    "operator_bound_ratio",
    "WORK_GUARD",
]

KINDS = ("N", "N0", "N1", "N2", "R", "R2")

#: upper bound on (2g-1)!! * (2 n_max + 1)^(2g+1), the worst-case branch work
WORK_GUARD = 6.0e8


@dataclass(frozen=True)
class ModulationConfig:
    """Modulation parameters of the reduction.

    p is the Lebesgue exponent of the coefficient space (1 <= p < inf); the
    dual exponent is p' = p / (p - 1).  Defaults follow the standard choice

        eps   = (p' - 1) / 2,
        theta = 4 p' / (p' - 1 - eps),

    which requires p' - 1 - eps > 0; the p = 1 endpoint (p' = inf) degenerates
    and gets the limiting value theta = 8.  The cutoff of generation j is
    ((2j+1) K)^theta unless cutoff_override maps j to an explicit value
    (useful at desk scale, where the true cutoffs empty every A_j^c).
    """

    p: float = 2.0
    K: float = 1.0
    eps: Optional[float] = None
    theta: Optional[float] = None
    cutoff_override: Optional[Mapping[int, float]] = None

    def __post_init__(self) -> None:
        if not 1.0 <= self.p < math.inf:
            raise ValueError(f"p must satisfy 1 <= p < inf, got {self.p}")
        if self.K < 1.0:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.p == 1.0:
            eps = math.inf if self.eps is None else float(self.eps)
            theta = 8.0 if self.theta is None else float(self.theta)
        else:
            p_dual = self.p / (self.p - 1.0)
            eps = (p_dual - 1.0) / 2.0 if self.eps is None else float(self.eps)
            if self.theta is None:
                if p_dual - 1.0 - eps <= 0.0:
                    raise ValueError(
                        f"need p' - 1 - eps > 0, got p'={p_dual}, eps={eps}"
                    )
                theta = 4.0 * p_dual / (p_dual - 1.0 - eps)
            else:
                theta = float(self.theta)
        if theta <= 0.0:
            raise ValueError(f"theta must be positive, got {theta}")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "theta", theta)
        if self.cutoff_override is not None:
            items = sorted(
                (int(j), float(c)) for j, c in dict(self.cutoff_override).items()
            )
            for j, c in items:
                if j < 1:
                    raise ValueError(f"cutoff generation must be >= 1, got {j}")
                if c < 0.0:
                    raise ValueError(f"cutoff must be >= 0, got {c} at generation {j}")
            object.__setattr__(self, "cutoff_override", tuple(items))

    def override_map(self) -> dict[int, float]:
        return dict(self.cutoff_override or ())


def cutoff(cfg: ModulationConfig, j: int) -> float:
    """Modulation cutoff of generation j."""
    if j < 1:
        raise ValueError(f"generation must be >= 1, got {j}")
    override = cfg.override_map()
    if j in override:
        return override[j]
    return ((2 * j + 1) * cfg.K) ** cfg.theta


@dataclass
class OperatorResult:
    """Operator value plus enumeration diagnostics.

    summand_count is the number of surviving index assignments (branches)
    across all trees; max_modulation is the largest |mu~_g| among them, where
    g is the tree generation the operator sums over.
    """

    value: ModeVector
    summand_count: int
    max_modulation: int


# ---------------------------------------------------------------------------
# static summand tables
# ---------------------------------------------------------------------------


@dataclass
class _TreeTable:
    root: np.ndarray                    # int32 output bin per branch
    leaves: tuple                       # (freq_idx int32 array, conj flag, sigma_b)
    mu_u: np.ndarray                    # float64 unique final mu~
    mu_inv: np.ndarray                  # int32 index into mu_u
    denom: np.ndarray                   # float64 product of 1/mu~_k
    sigmas: tuple[int, ...]             # per-generation signs of the tree
    count: int
    max_mod: int


def _rule_mask(rule: str, mt: np.ndarray, cut: float) -> np.ndarray:
    if rule == "high":
        return np.abs(mt) > cut
    if rule == "low":
        return np.abs(mt) <= cut
    if rule == "none":
        return np.ones(mt.shape, dtype=bool)
    raise ValueError(f"unknown rule {rule!r}")


def _build_tree_table(
    tree: OrderedTree,
    g: int,
    n_max: int,
    cuts: tuple[float, ...],
    rules: tuple[str, ...],
    denoms: tuple[bool, ...],
    unsigned: bool,
) -> _TreeTable:
    m = n_max
    size = 2 * m + 1
    r = np.arange(-m, m + 1, dtype=np.int64)

    # generation 1: root frequency and the (first, third) child pair are free
    root, c1, c3 = (x.ravel() for x in np.meshgrid(r, r, r, indexing="ij"))
    c2 = c1 + c3 - root
    keep = (
        (np.abs(c2) <= m)
        & (c2 != c1)
        & (c2 != c3)
        & (root != c1)
        & (root != c3)
    )
    mt = 2 * (root - c1) * (root - c3)  # sigma_1 = +1: the root is unconjugated
    keep &= _rule_mask(rules[0], mt, cuts[0])
    root, mt = root[keep], mt[keep]
    kids = tree.children[0]
    freq = {kids[0]: c1[keep], kids[1]: c2[keep], kids[2]: c3[keep]}
    denom = 1.0 / mt if denoms[0] else np.ones(len(mt))

    p1 = np.repeat(r, size)
    p3 = np.tile(r, size)
    pair_count = size * size
    chunk = max(1, int(2.0e7) // pair_count)

    for k in range(2, g + 1):
        node = tree.chronicle[k - 1]
        sigma_k = 1 if unsigned else tree.sigma(k)
        f = freq.pop(node)
        others = sorted(freq)
        parts: list[dict] = []
        for s in range(0, len(f), chunk):
            fB = f[s : s + chunk, None]
            c1n = p1[None, :]
            c3n = p3[None, :]
            c2n = c1n + c3n - fB
            keep2 = (
                (np.abs(c2n) <= m)
                & (c2n != c1n)
                & (c2n != c3n)
                & (fB != c1n)
                & (fB != c3n)
            )
            mtn = mt[s : s + chunk, None] + sigma_k * 2 * (fB - c1n) * (fB - c3n)
            keep2 &= _rule_mask(rules[k - 1], mtn, cuts[k - 1])
            bidx, pidx = np.nonzero(keep2)
            part = {
                "root": root[s : s + chunk][bidx],
                "mt": mtn[bidx, pidx],
                "denom": denom[s : s + chunk][bidx],
                "c1": p1[pidx],
                "c2": c2n[bidx, pidx],
                "c3": p3[pidx],
            }
            for key in others:
                part[key] = freq[key][s : s + chunk][bidx]
            parts.append(part)

        def gather(name: str) -> np.ndarray:
            if not parts:
                return np.zeros(0, dtype=np.int64)
            return np.concatenate([q[name] for q in parts])

        root = gather("root")
        mt = gather("mt")
        denom = gather("denom")
        new_kids = tree.children[node]
        freq = {key: gather(key) for key in others}
        freq[new_kids[0]] = gather("c1")
        freq[new_kids[1]] = gather("c2")
        freq[new_kids[2]] = gather("c3")
        if denoms[k - 1]:
            denom = denom / mt

    leaves = tuple(
        (
            (freq[tid] + m).astype(np.int32),
            tree.conj[tid],
            -1 if tree.conj[tid] else 1,
        )
        for tid in tree.terminals
    )
    mu_u, mu_inv = np.unique(mt, return_inverse=True)
    max_mod = int(np.max(np.abs(mt))) if len(mt) else 0
    sigmas = tuple(1 if unsigned else tree.sigma(k) for k in range(1, g + 1))
    return _TreeTable(
        root=(root + m).astype(np.int32),
        leaves=leaves,
        mu_u=mu_u.astype(np.float64),
        mu_inv=mu_inv.astype(np.int32),
        denom=np.asarray(denom, dtype=np.float64),
        sigmas=sigmas,
        count=len(mt),
        max_mod=max_mod,
    )


_table_cache: dict[tuple, list[_TreeTable]] = {}


def _tables_for(
    g: int,
    n_max: int,
    cuts: tuple[float, ...],
    rules: tuple[str, ...],
    denoms: tuple[bool, ...],
    unsigned: bool,
) -> list[_TreeTable]:
    key = (g, n_max, cuts, rules, denoms, unsigned)
    tables = _table_cache.get(key)
    if tables is None:
        tables = [
            _build_tree_table(tree, g, n_max, cuts, rules, denoms, unsigned)
            for tree in enumerate_trees(g)
        ]
        if len(_table_cache) > 24:
            _table_cache.clear()
        _table_cache[key] = tables
    return tables


def _eval_table(
    tbl: _TreeTable, u_arr: np.ndarray, t: float, kind: str, unsigned: bool, size: int
) -> np.ndarray:
    if tbl.count == 0:
        return np.zeros(size, dtype=np.complex128)
    w = tbl.denom * np.exp(1j * t * tbl.mu_u)[tbl.mu_inv]
    for idx, conj_flag, _sb in tbl.leaves:
        v = u_arr[idx]
        w = w * (np.conj(v) if conj_flag else v)
    if kind == "R":
        q = np.zeros(tbl.count)
        for idx, _conj_flag, sb in tbl.leaves:
            q += (1 if unsigned else sb) * np.abs(u_arr[idx]) ** 2
        w = w * q
    return np.bincount(tbl.root, weights=w.real, minlength=size) + 1j * np.bincount(
        tbl.root, weights=w.imag, minlength=size
    )


def _coefficient(kind: str, j: int, sigmas: Sequence[int], sign: int) -> complex:
    if kind in ("N", "N1", "N2"):
        c: complex = 1j * (sign ** j)
        for k in range(2, j + 1):
            c *= -sigmas[k - 1]
        return c
    prod = 1
    for k in range(2, j):
        prod *= -sigmas[k - 1]
    if kind == "N0":
        return (sign ** (j - 1)) * prod
    if kind == "R":
        return 1j * (sign ** j) * prod
    raise ValueError(f"no closed coefficient for kind {kind!r}")


def eval_generation(
    kind: str,
    j: int,
    u: ModeVector,
    t: float,
    cfg: ModulationConfig,
    sign: int = 1,
    _unsigned: bool = False,
) -> OperatorResult:
    """Evaluate one generation operator on u at time t.

    sign is the nonlinearity sign of the underlying model and multiplies each
    substitution step; with sign=+1 the operators are exactly those of the
    focusing reduction.  The private _unsigned flag replaces every
    conjugation-induced phase sign by +1 (a deliberately wrong convention used
    as a negative control in tests).
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if j < 1:
        raise ValueError(f"generation must be >= 1, got {j}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    n_max = u.n_max
    size = 2 * n_max + 1

    if kind in ("N0", "R", "R2"):
        if j == 1:
            if kind == "R":
                return OperatorResult(sign * eval_R1(u, u, u), size, 0)
            if kind == "R2":
                return OperatorResult(sign * eval_R2(u, u, u), size, 0)
            raise ValueError("N0 only exists from generation 2 on")
        g = j - 1
        rules = ("high",) * g
        denoms = (True,) * g
    else:
        g = j
        last = {"N": "none", "N1": "low", "N2": "high"}[kind]
        rules = ("high",) * (g - 1) + (last,)
        denoms = (True,) * (g - 1) + (False,)

    estimate = double_factorial(2 * g - 1) * float(size) ** (2 * g + 1)
    if estimate > WORK_GUARD:
        raise ValueError(
            f"enumeration for kind={kind}, j={j}, n_max={n_max} needs about"
            f" {estimate:.2e} branch operations (guard {WORK_GUARD:.0e});"
            " reduce j or n_max"
        )

    cuts = tuple(cutoff(cfg, k) for k in range(1, g + 1))
    tables = _tables_for(g, n_max, cuts, rules, denoms, _unsigned)

    acc = np.zeros(size, dtype=np.complex128)
    count = 0
    max_mod = 0
    mass_val = mass(u) if kind == "R2" else 0.0
    for tbl in tables:
        val = _eval_table(tbl, u.coeffs, t, kind, _unsigned, size)
        if kind == "R2":
            prod = 1
            for k in range(2, j):
                prod *= -tbl.sigmas[k - 1]
            sigma_b_total = sum(
                (1 if _unsigned else sb) for _idx, _cf, sb in tbl.leaves
            )
            coeff = 1j * (sign ** j) * prod * (-2.0 * mass_val * sigma_b_total)
        else:
            coeff = _coefficient(kind, j, tbl.sigmas, sign)
        acc += coeff * val
        count += tbl.count
        max_mod = max(max_mod, tbl.max_mod)
    return OperatorResult(ModeVector(n_max, acc), count, max_mod)


# ---------------------------------------------------------------------------
# empirical operator norms
# ---------------------------------------------------------------------------


def operator_bound_ratio(
    kind: str,
    j: int,
    p: float,
    trials: int,
    seed: int,
    cfg: ModulationConfig,
    n_max: int,
) -> float:
    """Largest FL^{0,p} output norm over random unit-norm inputs.

    Inputs are complex Gaussian vectors scaled to unit norm, each paired with
    a uniform random time in [0, 1].  The result is deterministic for a fixed
    seed and independent of the worker count (NFNLS_THREADS only splits the
    trial loop).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    size = 2 * n_max + 1
    params = FLParams(0.0, p)
    cases = []
    for _ in range(trials):
        coeffs = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        u = ModeVector(n_max, coeffs)
        norm = fl_norm(u, params)
        if norm == 0.0:
            continue
        cases.append((ModeVector(n_max, coeffs / norm), float(rng.uniform(0.0, 1.0))))

    def ratio(case: tuple[ModeVector, float]) -> float:
        u, t = case
        res = eval_generation(kind, j, u, t, cfg)
        return fl_norm(res.value, params)

    workers = worker_count()
    if workers > 1 and len(cases) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            ratios = list(pool.map(ratio, cases))
    else:
        ratios = [ratio(c) for c in cases]
    return max(ratios, default=0.0)
