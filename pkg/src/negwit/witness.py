"""Single-mode negativity-witness thresholds via converging SDP hierarchies.

Fidelity-based witnesses (weights a_1..a_n over Fock projectors, optional
displacement) have a threshold value over states with nonnegative Wigner
function.  Level m of the lower hierarchy restricts the radial profile to a
degree-m expansion; level m of the upper hierarchy relaxes pointwise
nonnegativity to a moment-matrix condition.  Both are finite SDPs built
here in exact rational arithmetic before conversion to floats; the known
closed-form feasible points and their rank-one certificates are exposed for
exact (Fraction-level) optimality proofs at m = n.

Displacement never enters the programs; thresholds are displacement
invariant, so builders take only the weight vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import conic
from .numerics import binomial

# levels above which binary64 needs help; matches where unscaled solves decay
RESCALE_ABOVE = 10


@dataclass(frozen=True)
class WitnessSpec:
    """Weighted displaced-Fock-projector witness: sum_k a_k |k><k| displaced."""

    a: tuple
    alpha: complex = 0j

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        if not a:
            raise ValueError("weight vector must be nonempty")
        if any(v < 0 or v > 1 for v in a):
            raise ValueError("weights must lie in [0, 1]")
        if abs(max(a) - 1.0) > 1e-12:
            raise ValueError("largest weight must equal 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "alpha", complex(self.alpha))

    @property
    def n(self) -> int:
        return len(self.a)

    @staticmethod
    def fock(n: int) -> "WitnessSpec":
        if n < 1:
            raise ValueError("witness index must be >= 1")
        return WitnessSpec(a=(0.0,) * (n - 1) + (1.0,))


@dataclass(frozen=True)
class FockDiagonal:
    """Nonnegative unit-sum photon-number distribution (finite support)."""

    F: tuple

    def __post_init__(self):
        F = tuple(self.F)
        if any(v < 0 for v in F):
            raise ValueError("entries must be nonnegative")
        total = sum(F)
        err = abs(float(total) - 1.0)
        if err > 1e-9:
            raise ValueError("entries must sum to 1")
        object.__setattr__(self, "F", F)

    def as_floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.F])


@dataclass(frozen=True)
class ThresholdBounds:
    level: int
    lower: float
    upper: float
    detail: dict = field(default_factory=dict, compare=False)


# ---------------------------------------------------------------------------
# exact construction helpers
# ---------------------------------------------------------------------------


def _weights_exact(a: Sequence[float], m: int):
    """Objective weights on F_0..F_m as Fractions (index 0 is vacuum)."""
    w = [Fraction(0)] * (m + 1)
    for k, v in enumerate(a, start=1):
        w[k] = Fraction(v)  # floats convert bit-exactly
    return w

def lower_even_coeff(l: int, k: int) -> Fraction:
    """Coefficient of F_k in the even-antidiagonal constraint at level l."""
    return Fraction((-1) ** (k + l) * binomial(k, l), math.factorial(l))


def moment_coeff(l: int, k: int) -> int:
    """Coefficient of s_k in the moment-matrix entry on antidiagonal 2l."""
    return binomial(l, k) * math.factorial(l)


def _scales(m: int, mode: str):
    """Per-monomial congruence weights used to tame factorial growth.

    Irrational targets are snapped to the exact binary value of their float,
    which keeps the transform an honest congruence (one weight per index).
    """
    if mode == "none":
        return [Fraction(1)] * (m + 1)
    if mode == "factorial":
        return [Fraction(1, math.factorial(u)) for u in range(m + 1)]
    if mode == "balanced":
        # 1/sqrt(u! 2^u): moment entries on antidiagonal 2l are ~2^l l!,
        # so the congruence keeps the matrix O(1)
        return [
            Fraction(1.0 / math.sqrt(math.factorial(u) * 2.0**u))
            for u in range(m + 1)
        ]
    if mode == "grow":
        return [
            Fraction(math.sqrt(math.factorial(u) * 2.0**u)) for u in range(m + 1)
        ]
    raise ValueError(f"unknown scale mode {mode!r}")


def _pair_weight(scales, mode: str, i: int, j: int) -> Fraction:
    return scales[i] * scales[j]


class _ProbBuilder:
    """Accumulates exact rational block-sparse constraints, emits SdpProblem."""

    def __init__(self, blocks, sense="max"):
        self.blocks = tuple(blocks)
        self.sense = sense
        self.obj = [dict() for _ in blocks]
        self.cons = []

    def set_obj(self, blk, key, val):
        self.obj[blk][key] = Fraction(val)

    def add_constraint(self, entries, rhs, normalise=True):
        """entries: list of (block, key, Fraction); key (i,j) or i."""
        mats = [dict() for _ in self.blocks]
        for blk, key, val in entries:
            v = Fraction(val)
            if v:
                mats[blk][key] = mats[blk].get(key, Fraction(0)) + v
        rhs = Fraction(rhs)
        if normalise:
            mx = max(
                (abs(v) for mat in mats for v in mat.values()), default=Fraction(1)
            )
            if mx == 0:
                mx = Fraction(1)
            mats = [{k: v / mx for k, v in mat.items()} for mat in mats]
            rhs = rhs / mx
        self.cons.append((mats, rhs))

    def _dense(self, mats):
        out = []
        for size, mat in zip(self.blocks, mats):
            if size > 0:
                a = np.zeros((size, size))
                for (i, j), v in mat.items():
                    a[i, j] = float(v)
                    a[j, i] = float(v)
            else:
                a = np.zeros(-size)
                for i, v in mat.items():
                    a[i] = float(v)
            out.append(a)
        return tuple(out)

    def build(self) -> conic.SdpProblem:
        return conic.SdpProblem(
            blocks=self.blocks,
            objective=self._dense(self.obj),
            constraints=tuple((self._dense(m), float(r)) for m, r in self.cons),
            sense=self.sense,
        )


def _sym_val(i, j, val):
    """Value to store for a symmetric coefficient so that <E, M> = sum."""
    return val if i == j else Fraction(val) / 2


# ---------------------------------------------------------------------------
# hierarchy builders
# ---------------------------------------------------------------------------


def build_lower(spec: WitnessSpec, m: int, scale: str = "none") -> conic.SdpProblem:
    """Level-m lower-bound program: variables Q in Sym(m+1) and F in R^{m+1}.

    maximise sum a_k F_k  s.t.  sum F = 1, F >= 0, odd antidiagonal sums of Q
    vanish, even ones match the signed binomial transform of F, Q psd.
    """
    n = spec.n
    if m < n:
        raise ValueError("level m must be at least the top witness index n")
    scales = _scales(m, scale)
    pb = _ProbBuilder(blocks=(m + 1, -(m + 1)))
    w = _weights_exact(spec.a, m)
    for k in range(m + 1):
        if w[k]:
            pb.set_obj(1, k, w[k])
    pb.add_constraint([(1, k, Fraction(1)) for k in range(m + 1)], 1)
    for l in range(1, m + 1):
        entries = []
        for i in range(max(0, 2 * l - 1 - m), m + 1):
            j = 2 * l - 1 - i
            if 0 <= j <= m and i <= j:
                pw = _pair_weight(scales, scale, i, j)
                entries.append((0, (i, j), _sym_val(i, j, 2 * pw)))
        pb.add_constraint(entries, 0)
    for l in range(m + 1):
        entries = []
        for i in range(max(0, 2 * l - m), m + 1):
            j = 2 * l - i
            if 0 <= j <= m and i <= j:
                pw = _pair_weight(scales, scale, i, j)
                mult = 1 if i == j else 2
                entries.append((0, (i, j), _sym_val(i, j, mult * pw)))
        for k in range(l, m + 1):
            entries.append((1, k, -lower_even_coeff(l, k)))
        pb.add_constraint(entries, 0)
    return pb.build()


def build_upper(
    spec: WitnessSpec, m: int, scale: str = "none", split_parity: bool = False
) -> conic.SdpProblem:
    """Level-m upper-bound program: the moment matrix of F must be psd.

    Faithful layout has one (m+1) block A pinned entrywise to the moment
    matrix; ``split_parity`` stores only the two parity-diagonal blocks the
    zero pattern leaves (a permutation of the same program).
    """
    n = spec.n
    if m < n:
        raise ValueError("level m must be at least the top witness index n")
    scales = _scales(m, scale)
    w = _weights_exact(spec.a, m)
    if not split_parity:
        pb = _ProbBuilder(blocks=(m + 1, -(m + 1)))

        def block_key(i, j):
            return 0, (i, j)

        pairs = [(i, j) for i in range(m + 1) for j in range(i, m + 1)]
    else:
        even = [u for u in range(m + 1) if u % 2 == 0]
        odd = [u for u in range(m + 1) if u % 2 == 1]
        pos = {u: (0, even.index(u)) for u in even}
        pos.update({u: (1, odd.index(u)) for u in odd})
        pb = _ProbBuilder(blocks=(len(even), len(odd), -(m + 1)))

        def block_key(i, j):
            bi, ii = pos[i]
            bj, jj = pos[j]
            assert bi == bj
            return bi, (min(ii, jj), max(ii, jj))

        pairs = [
            (i, j)
            for i in range(m + 1)
            for j in range(i, m + 1)
            if (i + j) % 2 == 0
        ]
    fblk = len(pb.blocks) - 1
    for k in range(m + 1):
        if w[k]:
            pb.set_obj(fblk, k, w[k])
    pb.add_constraint([(fblk, k, Fraction(1)) for k in range(m + 1)], 1)
    for i, j in pairs:
        if (i + j) % 2 == 1:
            blk, key = block_key(i, j)
            pb.add_constraint([(blk, key, _sym_val(*key, Fraction(1)))], 0)
            continue
        l = (i + j) // 2
        pw = _pair_weight(scales, scale, i, j)
        blk, key = block_key(i, j)
        entries = [(blk, key, _sym_val(*key, pw))]
        for k in range(l + 1):
            entries.append((fblk, k, -Fraction(moment_coeff(l, k))))
        pb.add_constraint(entries, 0)
    return pb.build()


def build_upper_compact(
    spec: WitnessSpec, m: int, scale: str = "balanced", shrink: float = 0.0
) -> conic.SdpProblem:
    """Same level-m relaxation with the moment variable eliminated.

    Variables are F_1..F_m only (F_0 = 1 - sum), constrained by the linear
    matrix inequality diag(F) (+) A(F) >= 0; encoded in the "min" reading,
    so the solved value is -omega and extraction negates.  This is the
    best-conditioned route into deep levels.  ``shrink`` tightens the
    inequality to A(F) >= shrink*I (scaled basis), used to round iterates
    to exactly feasible certificates.
    """
    n = spec.n
    if m < n:
        raise ValueError("level m must be at least the top witness index n")
    scales = _scales(m, scale)
    w = [float(v) for v in _weights_exact(spec.a, m)]
    G = []
    for k in range(m + 1):
        Gk = np.zeros((m + 1, m + 1))
        for i in range(m + 1):
            for j in range(m + 1):
                if (i + j) % 2 == 0:
                    l = (i + j) // 2
                    if k <= l:
                        Gk[i, j] = float(
                            Fraction(moment_coeff(l, k))
                            * _pair_weight(scales, scale, i, j)
                        )
        G.append(Gk)

    def unit(k):
        v = np.zeros(m + 1)
        v[k] = 1.0
        return v

    objective = (-unit(0), -G[0] + shrink * np.eye(m + 1))
    cons = tuple(
        ((unit(k) - unit(0), G[k] - G[0]), -(w[k] - w[0]))
        for k in range(1, m + 1)
    )
    return conic.SdpProblem(
        blocks=(-(m + 1), m + 1), objective=objective, constraints=cons, sense="min"
    )


def build_lower_dual(
    spec: WitnessSpec, m: int, scale: str = "none"
) -> conic.SdpProblem:
    """Dual of the level-m lower program, in its printed variables.

    Minimise y over (y, mu, odd-antidiagonal values of A) subject to
    y >= a_k + mu_k for each k and the psd matrix A whose even antidiagonals
    carry the inverse binomial transform of mu.  Encoded in the "min"
    reading of the standard form, so the solved value is min y.  ``scale``
    applies a congruence to the matrix block and renormalises the free
    antidiagonal variables, which leaves the optimal value unchanged.
    """
    n = spec.n
    if m < n:
        raise ValueError("level m must be at least n")
    w = _weights_exact(spec.a, m)
    scales = _scales(m, scale)
    d = np.array([float(v) for v in scales])
    # variables: y, mu_0..mu_m, nu'_1..nu'_m  -> constraints of the min form
    nvar = 1 + (m + 1) + m
    blocks = [1] * (m + 1) + [m + 1]
    b_vec = np.zeros(nvar)
    b_vec[0] = 1.0
    cons = []
    for var in range(nvar):
        mats = [np.zeros((b, b)) for b in blocks]
        if var == 0:  # y
            for k in range(m + 1):
                mats[k][0, 0] = 1.0
        elif var <= m + 1:  # mu_k
            k = var - 1
            mats[k][0, 0] = -1.0
            A = mats[-1]
            for l in range(k, m + 1):
                c = float(moment_coeff(l, k))
                for i in range(max(0, 2 * l - m), m + 1):
                    j = 2 * l - i
                    if 0 <= j <= m:
                        A[i, j] = c * d[i] * d[j]
        else:  # nu'_l, odd antidiagonal 2l-1; column renormalised
            l = var - (m + 1)
            A = mats[-1]
            pairs = [
                (i, 2 * l - 1 - i)
                for i in range(max(0, 2 * l - 1 - m), m + 1)
                if 0 <= 2 * l - 1 - i <= m
            ]
            ref = max(d[i] * d[j] for i, j in pairs)
            for i, j in pairs:
                A[i, j] = d[i] * d[j] / ref
        cons.append((tuple(mats), float(b_vec[var])))
    # constant side: slack_k = y - mu_k - a_k  => C carries the a_k offsets
    Cmats = [np.zeros((b, b)) for b in blocks]
    for k in range(m + 1):
        Cmats[k][0, 0] = float(w[k])
    return conic.SdpProblem(
        blocks=tuple(blocks),
        objective=tuple(Cmats),
        constraints=tuple(cons),
        sense="min",
    )


def build_upper_dual(spec: WitnessSpec, m: int) -> conic.SdpProblem:
    """Dual of the level-m upper program, in its printed variables.

    Minimise y over (y, mu) with a psd Q whose even antidiagonal sums equal
    the signed binomial transform of mu; entries within an antidiagonal are
    free, so they enter as explicit variables.
    """
    n = spec.n
    if m < n:
        raise ValueError("level m must be at least n")
    w = _weights_exact(spec.a, m)
    free_pairs = [(i, j) for i in range(m + 1) for j in range(i + 1, m + 1)]
    nvar = 1 + (m + 1) + len(free_pairs)
    blocks = [1] * (m + 1) + [m + 1]
    b_vec = np.zeros(nvar)
    b_vec[0] = 1.0
    cons = []
    for var in range(nvar):
        mats = [np.zeros((b, b)) for b in blocks]
        if var == 0:
            for k in range(m + 1):
                mats[k][0, 0] = 1.0
        elif var <= m + 1:
            k = var - 1
            mats[k][0, 0] = -1.0
            Q = mats[-1]
            for l in range(m + 1):
                c = float(lower_even_coeff(l, k)) if k >= l else 0.0
                if c:
                    Q[l, l] += c  # anchor diagonal entry carries the sum
        else:
            i, j = free_pairs[var - (m + 2)]
            Q = mats[-1]
            Q[i, j] = 1.0
            Q[j, i] = 1.0
            if (i + j) % 2 == 0:
                Q[(i + j) // 2, (i + j) // 2] = -2.0  # keep antidiagonal sum
        cons.append((tuple(mats), float(b_vec[var])))
    Cmats = [np.zeros((b, b)) for b in blocks]
    for k in range(m + 1):
        Cmats[k][0, 0] = float(w[k])
    return conic.SdpProblem(
        blocks=tuple(blocks),
        objective=tuple(Cmats),
        constraints=tuple(cons),
        sense="min",
    )


def strictly_feasible_pair(m: int):
    """The interior point certifying strong duality at every level m.

    Q = diag(1/k!)/(2^{m+1}-1), F_k = C(m+1, k+1)/(2^{m+1}-1), both exact.
    """
    denom = 2 ** (m + 1) - 1
    Q = [
        [Fraction(1, math.factorial(k) * denom) if i == k else Fraction(0) for i in range(m + 1)]
        for k in range(m + 1)
    ]
    F = [Fraction(binomial(m + 1, k + 1), denom) for k in range(m + 1)]
    return Q, F


def lower_feasibility_residuals(Q, F, m: int):
    """Exact residuals of (Q, F) in the level-m lower program constraints."""
    res = []
    res.append(sum(F) - 1)
    for l in range(1, m + 1):
        res.append(
            sum(
                Q[i][2 * l - 1 - i]
                for i in range(max(0, 2 * l - 1 - m), min(m, 2 * l - 1) + 1)
            )
        )
    for l in range(m + 1):
        sQ = sum(
            Q[i][2 * l - i] for i in range(max(0, 2 * l - m), min(m, 2 * l) + 1)
        )
        sF = sum(lower_even_coeff(l, k) * F[k] for k in range(l, m + 1))
        res.append(sQ - sF)
    return res


# ---------------------------------------------------------------------------
# analytic solutions and certificates
# ---------------------------------------------------------------------------


def analytic_primal(n: int) -> FockDiagonal:
    """Closed-form optimum of the level-n lower program (exact rationals)."""
    if n < 1:
        raise ValueError("need n >= 1")
    F = [Fraction(0)] * (n + 1)
    if n % 2 == 0:
        for k in range(0, n + 1, 2):
            F[k] = Fraction(
                binomial(k, k // 2) * binomial(n - k, (n - k) // 2), 2**n
            )
    else:
        top = binomial(n, n // 2)
        for k in range(n + 1):
            F[k] = Fraction(top * binomial(n // 2, k // 2) ** 2, 2**n * binomial(n, k))
    return FockDiagonal(F=tuple(F))


def analytic_value(n: int) -> Fraction:
    """binom(n, floor(n/2)) / 2^n, the exact level-n lower optimum."""
    return Fraction(binomial(n, n // 2), 2**n)


def sos_certificate(n: int):
    """Coefficients squaring to the analytic radial profile.

    Returns (ratios, s): the polynomial sum_i ratios[i] sqrt(s) x^i squared
    equals sum_k (-1)^k F^n_k L_k(x^2) identically.  ratios and s are exact;
    verification compares squared forms so no irrational square roots enter.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    s = Fraction(binomial(n, n // 2), 2**n * math.factorial(n))
    ratios = [Fraction(0)] * (n + 1)
    ratios[n] = Fraction(1)
    for k in range(2, n + 1, 2):
        if n % 2 == 0:
            ratios[n - k] = (
                Fraction((-1) ** (k // 2) * 2 ** (k // 2) * math.factorial(k // 2))
                * binomial(n // 2, k // 2) ** 2
            )
        else:
            if k == n + 1:
                continue
            ratios[n - k] = (
                Fraction((-1) ** (k // 2) * 2 ** (k // 2) * math.factorial(k // 2))
                * Fraction(n + 1, n - k + 1)
                * binomial(n // 2, k // 2) ** 2
            )
    return ratios, s


def sos_identity_holds(n: int) -> bool:
    """Exact coefficientwise check of the squared-polynomial identity."""
    ratios, s = sos_certificate(n)
    F = analytic_primal(n).F
    for l in range(n + 1):
        lhs = sum(
            ratios[i] * ratios[2 * l - i] * s
            for i in range(max(0, 2 * l - n), min(n, 2 * l) + 1)
        )
        rhs = sum(lower_even_coeff(l, k) * F[k] for k in range(l, n + 1))
        if lhs != rhs:
            return False
    return True


def primal_certificate(n: int, m: int):
    """Exact feasible (Q, F) for the level-m lower program with value F^n_n.

    Q is the rank-one square of the closed-form polynomial, padded to m+1.
    """
    if m < n:
        raise ValueError("need m >= n")
    ratios, s = sos_certificate(n)
    c = ratios + [Fraction(0)] * (m - n)
    Q = [[c[i] * c[j] * s for j in range(m + 1)] for i in range(m + 1)]
    F = list(analytic_primal(n).F) + [Fraction(0)] * (m - n)
    return Q, F


def cholesky_factor_products(n: int):
    """A = L L^T for the analytic dual, assembled from exact cross products.

    The printed lower-triangular factor mixes square roots, but every product
    l_ik l_jk is rational; columns are returned as exact rank-one matrices.
    """
    size = n + 1
    terms = []
    # even columns 2k
    for k in range(0, size, 2):
        R = [[Fraction(0)] * size for _ in range(size)]
        kk = k // 2
        for i in range(0, size, 2):
            for j in range(0, size, 2):
                ii, jj = i // 2, j // 2
                if (i == n and n % 2 == 0 and ii == kk) or (
                    j == n and n % 2 == 0 and jj == kk
                ):
                    continue  # l_nn = 0 override
                val = (
                    Fraction(2 ** (ii + jj))
                    * math.factorial(ii)
                    * math.factorial(jj)
                    * binomial(ii, kk)
                    * binomial(jj, kk)
                )
                R[i][j] = val
        terms.append(R)
    # odd columns 2k+1
    for k in range(1, size, 2):
        R = [[Fraction(0)] * size for _ in range(size)]
        kk = (k - 1) // 2
        for i in range(1, size, 2):
            for j in range(1, size, 2):
                ii, jj = (i - 1) // 2, (j - 1) // 2
                if (i == n and n % 2 == 1 and ii == kk) or (
                    j == n and n % 2 == 1 and jj == kk
                ):
                    continue
                val = (
                    Fraction(2 ** (ii + jj + 1), kk + 1)
                    * math.factorial(ii + 1)
                    * math.factorial(jj + 1)
                    * binomial(ii, kk)
                    * binomial(jj, kk)
                )
                R[i][j] = val
        terms.append(R)
    A = [[sum(t[i][j] for t in terms) for j in range(size)] for i in range(size)]
    return A, terms


def analytic_dual(n: int):
    """The printed closed-form dual data: (mu, y, A) with A = L L^T.

    mu is returned exactly as stated, (F^n_n, ..., F^n_n, 1 - F^n_n); the
    feasible certificate with the signed last entry lives in
    :func:`dual_certificate`.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    f = analytic_value(n)
    mu = [f] * n + [1 - f]
    A, _ = cholesky_factor_products(n)
    return mu, f, A


def dual_certificate(n: int):
    """Exact dual-feasible point (y, mu, A) with objective value F^n_n.

    A = F^n_n L L^T; mu matches the printed vector up to the sign of the
    last entry, which feasibility of y >= 1 + mu_n forces to F^n_n - 1.
    """
    f = analytic_value(n)
    mu = [f] * n + [f - 1]
    A_raw, terms = cholesky_factor_products(n)
    A = [[f * v for v in row] for row in A_raw]
    scaled_terms = [[[f * v for v in row] for row in t] for t in terms]
    return f, mu, A, scaled_terms


def verify_rank1_psd(R) -> bool:
    """Exact check that a rational symmetric matrix is psd of rank <= 1."""
    size = len(R)
    pivot = next((i for i in range(size) if R[i][i] != 0), None)
    if pivot is None:
        return all(R[i][j] == 0 for i in range(size) for j in range(size))
    if R[pivot][pivot] < 0:
        return False
    p = R[pivot][pivot]
    for i in range(size):
        for j in range(size):
            if R[i][j] * p != R[i][pivot] * R[j][pivot]:
                return False
    return True


def dual_feasibility_residuals(n: int):
    """Exact residuals of the analytic dual certificate; all must vanish."""
    y, mu, A, terms = dual_certificate(n)
    res = []
    a = [Fraction(0)] * (n + 1)
    a[n] = Fraction(1)
    for k in range(n + 1):
        slack = y - a[k] - mu[k]
        res.append(slack if slack < 0 else Fraction(0))
    for i in range(n + 1):
        for j in range(i, n + 1):
            if (i + j) % 2 == 1:
                res.append(A[i][j])
            else:
                l = (i + j) // 2
                want = sum(
                    mu[k] * moment_coeff(l, k) for k in range(min(l, n) + 1)
                )
                res.append(A[i][j] - want)
    psd_ok = all(verify_rank1_psd(t) for t in terms)
    return res, psd_ok


def certify_level_n_value(n: int) -> bool:
    """Exact sandwich: primal and dual certificates agree at F^n_n."""
    Q, F = primal_certificate(n, n)
    if any(r != 0 for r in lower_feasibility_residuals(Q, F, n)):
        return False
    if not verify_rank1_psd(Q):
        return False
    if F[n] != analytic_value(n):
        return False
    res, psd_ok = dual_feasibility_residuals(n)
    return psd_ok and all(r == 0 for r in res)


def exact_psd(M) -> bool:
    """Exact LDL^T positive-semidefiniteness test for a rational matrix.

    Zero pivots force the whole pivot row to vanish (true of any psd
    matrix), so no pivoting is needed beyond that check.
    """
    size = len(M)
    A = [[Fraction(M[i][j]) for j in range(size)] for i in range(size)]
    for k in range(size):
        if A[k][k] < 0:
            return False
        if A[k][k] == 0:
            if any(A[k][j] != 0 for j in range(k, size)):
                return False
            continue
        piv = A[k][k]
        for i in range(k + 1, size):
            f = A[i][k] / piv
            if f == 0:
                continue
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, size):
                row_i[j] -= f * row_k[j]
    return True


def certified_upper_interval(spec: WitnessSpec, m: int, tol: float = 1e-9):
    """Exactly certified enclosure of the level-m upper-hierarchy value.

    The witness side solves a margin-shrunk program and verifies the exact
    moment matrix of the rounded iterate against the margin (value >=
    F-objective); the certificate-side iterate is projected exactly onto
    the equality constraints after a psd repair (value <= shifted
    objective).  Returns (lo, hi) as floats; a side is None when its
    rounding fails, which happens on the thinnest instances.
    """
    scale = "balanced"
    prob = build_upper_compact(spec, m, scale=scale)
    sol = conic.solve(prob, tol=tol, precision="extended", max_iterations=300)
    w = [float(v) for v in _weights_exact(spec.a, m)]

    # --- witness side: exact feasible F gives a lower bound on the value.
    # Solve with the inequality shrunk so the iterate carries real margin,
    # then verify the unscaled moment matrix minus the margin exactly.
    lo = None
    scales_lo = _scales(m, scale)
    dinv2 = [
        Fraction(1) / (_pair_weight(scales_lo, scale, u, u)) for u in range(m + 1)
    ]
    for eps in (1e-7, 1e-5, 1e-3):
        ps = build_upper_compact(spec, m, scale=scale, shrink=eps)
        ss = conic.solve(ps, tol=tol, precision="extended", max_iterations=300)
        yv = np.asarray(ss.y, dtype=float)
        Fs = np.concatenate(([1.0 - yv.sum()], yv))
        if np.any(Fs < 0):
            continue
        Fr = [Fraction(float(f)) for f in Fs]
        tot = sum(Fr)
        Fr = [f / tot for f in Fr]
        margin = Fraction(eps) / 2
        A = moment_matrix_exact(Fr, m)
        for u in range(m + 1):
            A[u][u] -= margin * dinv2[u]
        if exact_psd(A):
            cand = float(sum(Fraction(w[k]) * Fr[k] for k in range(m + 1)))
            lo = cand if lo is None else max(lo, cand)
            break

    # --- certificate side: exact equality projection gives an upper bound
    scales = _scales(m, scale)
    hi = None
    V = np.asarray(sol.X[1], dtype=float)
    V = (V + V.T) / 2.0
    ev = float(np.min(np.linalg.eigvalsh(V)))
    # diagonal shift keeps V psd after rationalisation
    shift = Fraction(max(0.0, -ev)) * 2 + Fraction(1, 10**25)
    Vr = [[Fraction(V[i][j]) for j in range(m + 1)] for i in range(m + 1)]
    for i in range(m + 1):
        Vr[i][i] += shift
    if exact_psd(Vr):
        Gs = []
        for k in range(m + 1):
            Gk = [[Fraction(0)] * (m + 1) for _ in range(m + 1)]
            for i in range(m + 1):
                for j in range(m + 1):
                    if (i + j) % 2 == 0:
                        l = (i + j) // 2
                        if k <= l:
                            Gk[i][j] = (
                                Fraction(moment_coeff(l, k))
                                * _pair_weight(scales, scale, i, j)
                            )
            Gs.append(Gk)

        def inner(G, V):
            return sum(G[i][j] * V[i][j] for i in range(m + 1) for j in range(m + 1))

        g0 = inner(Gs[0], Vr)
        need = Fraction(0)
        for k in range(1, m + 1):
            lhs = inner(Gs[k], Vr) - g0
            need = max(need, lhs - Fraction(-w[k] + w[0]))
        hi = float(need + g0)
    return lo, hi


def moment_matrix(s: Sequence[float], m: int) -> np.ndarray:
    """Moment matrix of a coefficient sequence: entries on even antidiagonals."""
    if len(s) < m + 1:
        raise ValueError("sequence shorter than m+1")
    A = np.zeros((m + 1, m + 1))
    for i in range(m + 1):
        for j in range(m + 1):
            if (i + j) % 2 == 0:
                l = (i + j) // 2
                A[i, j] = sum(float(s[k]) * moment_coeff(l, k) for k in range(l + 1) if k < len(s))
    return A


def moment_matrix_exact(s: Sequence, m: int):
    A = [[Fraction(0)] * (m + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        for j in range(m + 1):
            if (i + j) % 2 == 0:
                l = (i + j) // 2
                A[i][j] = sum(
                    Fraction(s[k]) * moment_coeff(l, k)
                    for k in range(min(l, len(s) - 1) + 1)
                )
    return A


# ---------------------------------------------------------------------------
# solve drivers
# ---------------------------------------------------------------------------


def _solve_with_policy(problem_fn, m: int, tol: float, precision: str):
    """Try double (rescaled when deep), escalate to extended on failure."""
    attempts = []
    if precision in ("double", "auto"):
        scale = "balanced" if m > RESCALE_ABOVE else "none"
        attempts.append(("double", scale))
        if precision == "auto":
            attempts.append(("extended", "balanced"))
    if precision == "extended":
        attempts.append(("extended", "balanced" if m > RESCALE_ABOVE else "none"))
    last = None
    for prec, scale in attempts:
        sol = conic.solve(problem_fn(scale), tol=tol, precision=prec)
        if last is None or sol.status == "optimal" or (
            last[0].status != "optimal"
            and sol.info.get("comp", math.inf) < last[0].info.get("comp", math.inf)
        ):
            last = (sol, prec, scale)
        if sol.status == "optimal":
            return last
    return last


def solve_lower(
    spec: WitnessSpec, m: int, tol: float = 1e-8, precision: str = "auto",
):
    """Level-m lower bound; returns (value, solution, run info).

    Shallow levels use the primal layout; deep ones go through the printed
    dual, whose variables stay well-scaled under the moment-block congruence.
    """
    if m <= RESCALE_ABOVE:
        sol, prec, scale = _solve_with_policy(
            lambda s: build_lower(spec, m, scale=s), m, tol, precision
        )
        return sol.primal_value, sol, {"precision": prec, "scale": scale}
    sol, prec, scale = _solve_with_policy(
        lambda s: build_lower_dual(spec, m, scale=s), m, tol, precision
    )
    return sol.primal_value, sol, {"precision": prec, "scale": scale}


def solve_upper(
    spec: WitnessSpec, m: int, tol: float = 1e-8, precision: str = "auto",
):
    """Level-m upper bound via the compact encoding; (value, solution, info)."""
    sol, prec, scale = _solve_with_policy(
        lambda s: build_upper_compact(spec, m, scale=s), m, tol, precision
    )
    return -sol.primal_value, sol, {"precision": prec, "scale": scale}


def threshold_bounds(
    spec: WitnessSpec,
    m_max: int,
    tol: float = 1e-8,
    precision: str = "auto",
    m_min: int | None = None,
    jobs: int = 1,
) -> list:
    """Both hierarchies from level n (or m_min) to m_max.

    Solver failures at a level are recorded (NaN bound) and the sweep
    continues; surviving levels keep the hierarchy monotone within solver
    tolerance.  Levels are independent, so ``jobs`` > 1 fans the solves out
    across a thread pool; results are assembled in level order either way.
    """
    start = max(spec.n, m_min or spec.n)
    levels = list(range(start, m_max + 1))

    def run_level(m: int) -> ThresholdBounds:
        lo, lo_sol, lo_info = solve_lower(spec, m, tol=tol, precision=precision)
        up, up_sol, up_info = solve_upper(spec, m, tol=tol, precision=precision)
        # a stalled solve still carries its best iterate; keep it only when
        # the residual quality supports the sweep tolerance scale
        if lo_sol.status != "optimal" and lo_sol.info.get("comp", 1.0) > 1e-4:
            lo = math.nan
        if up_sol.status != "optimal" and up_sol.info.get("comp", 1.0) > 1e-4:
            up = math.nan
        return ThresholdBounds(
            level=m,
            lower=lo,
            upper=up,
            detail={
                "lower_status": lo_sol.status,
                "upper_status": up_sol.status,
                "lower_run": lo_info,
                "upper_run": up_info,
                "lower_quality": lo_sol.info.get("comp"),
                "upper_quality": up_sol.info.get("comp"),
            },
        )

    if jobs <= 1:
        return [run_level(m) for m in levels]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_level, levels))


def final_bounds(rows: Sequence[ThresholdBounds]):
    """Best finite bounds over a hierarchy sweep."""
    lows = [r.lower for r in rows if not math.isnan(r.lower)]
    ups = [r.upper for r in rows if not math.isnan(r.upper)]
    return (max(lows) if lows else math.nan, min(ups) if ups else math.nan)


def fock_bounds_table(
    n_values: Sequence[int],
    m_max: int = 30,
    tol: float = 1e-8,
    quality_floor: float = 1e-3,
) -> dict:
    """Threshold bounds for single-Fock witnesses, table conventions.

    Indices 1 and 2 carry the analytic value 1/2 on both sides.  Higher
    indices report the deepest hierarchy level at or below m_max whose
    solve meets the residual quality floor; both hierarchies are monotone
    in the level, so the deepest trustworthy level is the best bound.
    Returns {n: (lower, upper)}; per-run details in the "detail" entry.
    """
    table = {}
    details = {}
    for n in n_values:
        if n in (1, 2):
            table[n] = (0.5, 0.5)
            details[n] = {"analytic": True}
            continue
        spec = WitnessSpec.fock(n)
        row = {}
        for side, solver in (("lower", solve_lower), ("upper", solve_upper)):
            val, m_used, info_used = math.nan, None, None
            for m in range(m_max, spec.n - 1, -2):
                v, sol, info = solver(spec, m, tol=tol, precision="auto")
                q = sol.info.get("comp", math.inf)
                if sol.status == "optimal" or q <= quality_floor:
                    val, m_used, info_used = v, m, {**info, "quality": q}
                    break
            row[side] = (val, m_used, info_used)
        table[n] = (row["lower"][0], row["upper"][0])
        details[n] = row
    table["detail"] = details
    return table
