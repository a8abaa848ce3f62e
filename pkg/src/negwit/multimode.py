"""Multimode threshold hierarchies, product certificates, robust fidelity.

Levels are indexed either by total degree ("triangle", indices |k| <= m) or
by componentwise degree ("rectangle", k <= m*1).  The rectangle family is
closed under tensor products of single-mode feasible points, which gives
exact product certificates; the two families interleave, so either brackets
the same limits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import conic
from .numerics import mi_binomial, mi_factorial, mi_leq, mi_norm
from .witness import (
    WitnessSpec,
    _ProbBuilder,
    _scales,
    _sym_val,
    lower_even_coeff,
    moment_coeff,
)

INDEX_CAP = 10_000


@dataclass(frozen=True)
class MultiWitnessSpec:
    """Weighted multimode displaced-Fock witness; weights indexed 1 <= k <= n."""

    n: tuple
    a: dict = None  # multi-index -> weight; default one-hot at n
    alpha: tuple = None

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        if not n or all(v == 0 for v in n):
            raise ValueError("target index must be nonzero")
        if any(v < 0 for v in n):
            raise ValueError("target index must be componentwise nonnegative")
        a = self.a
        if a is None:
            a = {n: 1.0}
        a = {tuple(k): float(v) for k, v in a.items()}
        if abs(max(a.values()) - 1.0) > 1e-12 or any(
            v < 0 or v > 1 for v in a.values()
        ):
            raise ValueError("weights must lie in [0,1] with maximum 1")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "a", a)
        object.__setattr__(
            self, "alpha", tuple(self.alpha) if self.alpha else (0j,) * len(n)
        )

    @property
    def modes(self) -> int:
        return len(self.n)


def iterate_indices(mode: str, level: int, modes: int) -> list:
    """All multi-indices of the level set, lexicographically.

    mode "triangle": |k| <= level (count C(modes+level, level));
    mode "rectangle": k <= level*1 (count (level+1)^modes).
    """
    if level < 0:
        raise ValueError("level must be a natural number")
    if mode == "rectangle":
        count = (level + 1) ** modes
        if count > INDEX_CAP:
            raise ValueError("index enumeration exceeds the cap")
        return list(itertools.product(range(level + 1), repeat=modes))
    if mode == "triangle":
        out = []
        for k in itertools.product(range(level + 1), repeat=modes):
            if sum(k) <= level:
                out.append(k)
            if len(out) > INDEX_CAP:
                raise ValueError("index enumeration exceeds the cap")
        return out
    raise ValueError("mode must be 'triangle' or 'rectangle'")


def _mi_pair_weight(scales, scale_mode, ki, kj) -> Fraction:
    out = Fraction(1)
    for a, b in zip(ki, kj):
        out *= scales[a] * scales[b]
    return out


def _mi_lower_even_coeff(l, k) -> Fraction:
    """Coefficient of F_k in the even constraint at multi-level l (k >= l)."""
    sign = (-1) ** ((mi_norm(k) + mi_norm(l)) % 2)
    return Fraction(sign * mi_binomial(k, l), mi_factorial(l))


def _mi_moment_coeff(l, k) -> int:
    return mi_binomial(l, k) * mi_factorial(l)


def _build_multi(
    spec: MultiWitnessSpec,
    mode: str,
    level: int,
    kind: str,
    scale: str = "none",
) -> conic.SdpProblem:
    modes = spec.modes
    if mode == "rectangle":
        if level < max(spec.n):
            raise ValueError("rectangle level must cover max(n)")
    else:
        if level < mi_norm(spec.n):
            raise ValueError("triangle level must cover |n|")
    idx = iterate_indices(mode, level, modes)
    pos = {k: i for i, k in enumerate(idx)}
    nvar = len(idx)
    scales = _scales(level * modes + 1, scale)
    pb = _ProbBuilder(blocks=(nvar, -nvar))
    for k, w in spec.a.items():
        if k in pos and w:
            pb.set_obj(1, pos[k], Fraction(w))
    pb.add_constraint([(1, i, Fraction(1)) for i in range(nvar)], 1)

    # all achievable antidiagonal index sums r = ki + kj
    pair_sum = {}
    for i, ki in enumerate(idx):
        for j in range(i, nvar):
            kj = idx[j]
            r = tuple(a + b for a, b in zip(ki, kj))
            pair_sum.setdefault(r, []).append((i, j))
    for r, pairs in sorted(pair_sum.items()):
        even = all(v % 2 == 0 for v in r)
        if kind == "lower":
            entries = []
            for i, j in pairs:
                pw = _mi_pair_weight(scales, scale, idx[i], idx[j])
                mult = 1 if i == j else 2
                entries.append((0, (i, j), _sym_val(i, j, mult * pw)))
            if even:
                l = tuple(v // 2 for v in r)
                for k in idx:
                    if mi_leq(l, k):
                        entries.append((1, pos[k], -_mi_lower_even_coeff(l, k)))
            pb.add_constraint(entries, 0)
        else:  # upper: every matrix entry pinned
            for i, j in pairs:
                pw = _mi_pair_weight(scales, scale, idx[i], idx[j])
                entries = [(0, (i, j), _sym_val(i, j, pw))]
                if even:
                    l = tuple(v // 2 for v in r)
                    for k in idx:
                        if mi_leq(k, l):
                            entries.append(
                                (1, pos[k], -Fraction(_mi_moment_coeff(l, k)))
                            )
                pb.add_constraint(entries, 0)
    return pb.build()


def build_lower_multi(
    spec: MultiWitnessSpec, mode: str, level: int, scale: str = "none"
) -> conic.SdpProblem:
    """Multimode restriction: sum-of-squares radial profile, value <= threshold."""
    return _build_multi(spec, mode, level, "lower", scale)


def build_upper_multi(
    spec: MultiWitnessSpec, mode: str, level: int, scale: str = "none"
) -> conic.SdpProblem:
    """Multimode relaxation: psd moment matrix, value >= threshold."""
    return _build_multi(spec, mode, level, "upper", scale)


def build_upper_multi_compact(
    spec: MultiWitnessSpec, mode: str, level: int, scale: str = "balanced"
) -> conic.SdpProblem:
    """Moment-eliminated multimode relaxation in the "min" reading."""
    modes = spec.modes
    idx = iterate_indices(mode, level, modes)
    pos = {k: i for i, k in enumerate(idx)}
    nvar = len(idx)
    scales = _scales(level * modes + 1, scale)
    G = []
    for k in idx:
        Gk = np.zeros((nvar, nvar))
        for i, ki in enumerate(idx):
            for j, kj in enumerate(idx):
                r = tuple(a + b for a, b in zip(ki, kj))
                if all(v % 2 == 0 for v in r):
                    l = tuple(v // 2 for v in r)
                    if mi_leq(k, l):
                        Gk[i, j] = float(
                            Fraction(_mi_moment_coeff(l, k))
                            * _mi_pair_weight(scales, scale, ki, kj)
                        )
        G.append(Gk)
    w = np.zeros(nvar)
    for k, v in spec.a.items():
        if k in pos:
            w[pos[k]] = v

    def unit(i):
        v = np.zeros(nvar)
        v[i] = 1.0
        return v

    objective = (-unit(0), -G[0])
    cons = tuple(
        ((unit(i) - unit(0), G[i] - G[0]), -(w[i] - w[0]))
        for i in range(1, nvar)
    )
    return conic.SdpProblem(
        blocks=(-nvar, nvar), objective=objective, constraints=cons, sense="min"
    )


def solve_lower_multi(spec, mode, level, tol=1e-8, precision="auto"):
    prob = build_lower_multi(spec, mode, level)
    sol = conic.solve(prob, tol=tol, precision="double")
    if (
        sol.status != "optimal"
        and sol.info.get("comp", 1.0) > 100 * tol
        and precision in ("auto", "extended")
    ):
        sol = conic.solve(prob, tol=tol, precision="extended")
    return sol.primal_value, sol


def solve_upper_multi(spec, mode, level, tol=1e-8, precision="auto"):
    prob = build_upper_multi_compact(spec, mode, level)
    sol = conic.solve(prob, tol=tol, precision="double")
    if (
        sol.status != "optimal"
        and sol.info.get("comp", 1.0) > 100 * tol
        and precision in ("auto", "extended")
    ):
        sol = conic.solve(prob, tol=tol, precision="extended", max_iterations=300)
    return -sol.primal_value, sol


# ---------------------------------------------------------------------------
# product certificates and robust fidelity
# ---------------------------------------------------------------------------


def product_feasible(singles: Sequence, levels: Sequence[int]):
    """Tensor product of single-mode feasible pairs for the rectangle program.

    singles: list of (Q, F) with exact rational entries, Q of size m_i+1 and
    F of length m_i+1 feasible for the level-m_i single-mode restriction.
    Returns (Q, F) dictionaries keyed by multi-indices, exactly rational.
    Raises when a factor fails its own feasibility residuals.
    """
    from .witness import lower_feasibility_residuals

    for (Q, F), m in zip(singles, levels):
        res = lower_feasibility_residuals(Q, F, m)
        if any(r != 0 for r in res):
            raise ValueError("input pair is not feasible for its level")
    modes = len(singles)
    idx = list(itertools.product(*(range(m + 1) for m in levels)))
    Fout = {}
    for k in idx:
        val = Fraction(1)
        for mode_i, ki in enumerate(k):
            val *= Fraction(singles[mode_i][1][ki])
        Fout[k] = val
    Qout = {}
    for ki in idx:
        for kj in idx:
            val = Fraction(1)
            for mode_i, (a, b) in enumerate(zip(ki, kj)):
                val *= Fraction(singles[mode_i][0][a][b])
            if val:
                Qout[(ki, kj)] = val
    return Qout, Fout


def product_feasibility_residuals(Qout, Fout, levels):
    """Exact residuals of a product pair in the rectangle constraints."""
    idx = list(itertools.product(*(range(m + 1) for m in levels)))
    res = [sum(Fout.values()) - 1]
    sums = {}
    for (ki, kj), v in Qout.items():
        r = tuple(a + b for a, b in zip(ki, kj))
        sums[r] = sums.get(r, Fraction(0)) + v
    for r in itertools.product(*(range(2 * m + 1) for m in levels)):
        sQ = sums.get(r, Fraction(0))
        if all(v % 2 == 0 for v in r):
            l = tuple(v // 2 for v in r)
            sF = sum(
                _mi_lower_even_coeff(l, k) * Fout[k]
                for k in idx
                if mi_leq(l, k)
            )
            res.append(sQ - sF)
        else:
            res.append(sQ)
    return res


def robust_fidelity_bound(single_fidelities: Sequence[float]) -> float:
    """1 - sum(1 - F_i): a lower bound on the multimode fidelity."""
    fs = [float(f) for f in single_fidelities]
    if any(f < 0 or f > 1 for f in fs):
        raise ValueError("fidelities must lie in [0, 1]")
    return 1.0 - sum(1.0 - f for f in fs)
