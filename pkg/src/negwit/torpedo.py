"""The Torpedo information-retrieval game: classical, quantum, contextual.

A (2,1)_d game: the referee hands Alice inputs (x, z) in Z_d^2, Bob a
question q; Bob answers c and wins when c avoids the unique line through
(x, z) of slope q.  Exhaustive search over deterministic encodings (with
the per-encoding optimal decoding in closed form) gives exact classical
values; quantum strategies are evaluated by the Born rule against the MUB
measurements; the bounded-memory noncontextual fraction is a linear
program over deterministic strategy columns, generated lazily for d = 3.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .qudit import displacement_dv, displacement_q2, mub_projectors, phase_point

ENCODING_CAP = 10**7
COLUMN_CAP = 10**5


@dataclass(frozen=True)
class TorpedoGame:
    """Winning relations per question; questions are 'inf' plus 0..d-1."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("input dimension must be at least 2")

    @property
    def questions(self) -> tuple:
        return ("inf",) + tuple(range(self.d))

    def forbidden(self, q, x: int, z: int) -> int:
        """The single losing answer for question q at input (x, z)."""
        if q == "inf":
            return x % self.d
        return (q * x - z) % self.d

    def winning(self, q, x: int, z: int) -> frozenset:
        f = self.forbidden(q, x, z)
        return frozenset(a for a in range(self.d) if a != f)


@dataclass(frozen=True)
class ClassicalStrategy:
    """Deterministic-or-stochastic encoding grid plus decoding matrices.

    encoding[(x, z)] is a distribution over messages; decodings[q] is a
    left-stochastic matrix (outputs x messages), columns sum to 1.
    """

    d_in: int
    d_msg: int
    encoding: dict
    decodings: dict

    def __post_init__(self):
        for (x, z), dist in self.encoding.items():
            if len(dist) != self.d_msg:
                raise ValueError("encoding distribution has wrong length")
            if sum(dist) != 1 and abs(float(sum(dist)) - 1.0) > 1e-9:
                raise ValueError("encoding distribution must sum to 1")
        for q, T in self.decodings.items():
            if len(T) != self.d_in:
                raise ValueError("decoding matrix must have d_in rows")
            for col in range(self.d_msg):
                colsum = sum(T[r][col] for r in range(self.d_in))
                if colsum != 1 and abs(float(colsum) - 1.0) > 1e-9:
                    raise ValueError("decoding columns must sum to 1")

    @staticmethod
    def deterministic(d_in, d_msg, grid, decode_maps) -> "ClassicalStrategy":
        """grid[(x,z)] = message; decode_maps[q][message] = answer."""
        enc = {}
        for x in range(d_in):
            for z in range(d_in):
                dist = [Fraction(0)] * d_msg
                dist[grid[(x, z)]] = Fraction(1)
                enc[(x, z)] = tuple(dist)
        dec = {}
        for q, fq in decode_maps.items():
            T = [[Fraction(0)] * d_msg for _ in range(d_in)]
            for j in range(d_msg):
                T[fq[j]][j] = Fraction(1)
            dec[q] = tuple(tuple(row) for row in T)
        return ClassicalStrategy(d_in, d_msg, enc, dec)

    def to_json(self) -> str:
        return json.dumps(
            {
                "d_in": self.d_in,
                "d_msg": self.d_msg,
                "encoding": {
                    f"{x},{z}": [str(v) for v in dist]
                    for (x, z), dist in sorted(self.encoding.items())
                },
                "decodings": {
                    str(q): [[str(v) for v in row] for row in T]
                    for q, T in self.decodings.items()
                },
            },
            indent=1,
        )

    @staticmethod
    def from_json(text: str) -> "ClassicalStrategy":
        raw = json.loads(text)
        enc = {}
        for key, dist in raw["encoding"].items():
            x, z = (int(v) for v in key.split(","))
            enc[(x, z)] = tuple(Fraction(v) for v in dist)
        dec = {}
        for key, T in raw["decodings"].items():
            q = key if key == "inf" else int(key)
            dec[q] = tuple(tuple(Fraction(v) for v in row) for row in T)
        return ClassicalStrategy(raw["d_in"], raw["d_msg"], enc, dec)


@dataclass(frozen=True)
class QuantumStrategy:
    """Message operators (Hermitian, unit trace; psd not required, to admit
    phase-point messages) and projective measurements per question."""

    d: int
    messages: dict
    measurements: dict = None

    def __post_init__(self):
        for (x, z), rho in self.messages.items():
            rho = np.asarray(rho, dtype=complex)
            if np.max(np.abs(rho - rho.conj().T)) > 1e-9:
                raise ValueError("messages must be Hermitian")
            if abs(np.trace(rho).real - 1.0) > 1e-9:
                raise ValueError("messages must have unit trace")
        if self.measurements is None:
            object.__setattr__(self, "measurements", mub_projectors(self.d))
        for q, projs in self.measurements.items():
            if not np.allclose(sum(projs), np.eye(self.d), atol=1e-9):
                raise ValueError("measurement must resolve the identity")

    def to_json(self) -> str:
        msgs = {
            f"{x},{z}": [[[v.real, v.imag] for v in row] for row in np.asarray(rho)]
            for (x, z), rho in sorted(self.messages.items())
        }
        return json.dumps({"d": self.d, "messages": msgs}, indent=1)

    @staticmethod
    def from_json(text: str) -> "QuantumStrategy":
        raw = json.loads(text)
        msgs = {}
        for key, rows in raw["messages"].items():
            x, z = (int(v) for v in key.split(","))
            msgs[(x, z)] = np.array(
                [[complex(re, im) for re, im in row] for row in rows]
            )
        return QuantumStrategy(raw["d"], msgs)


def canonical_quantum_strategy(d: int) -> QuantumStrategy:
    """The maximally-negative-state strategy (perfect for odd prime d)."""
    if d == 2:
        X = np.array([[0, 1], [1, 0]], dtype=complex)
        Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
        Z = np.array([[1, 0], [0, -1]], dtype=complex)
        rho0 = 0.5 * (np.eye(2) - (X + Y + Z) / math.sqrt(3))
        msgs = {}
        for x in range(2):
            for z in range(2):
                D = displacement_q2(x, z)
                msgs[(x, z)] = D @ rho0 @ D.conj().T
        return QuantumStrategy(2, msgs)
    psi = np.zeros(d, dtype=complex)
    psi[1] = 1 / math.sqrt(2)
    psi[-1 % d] = -1 / math.sqrt(2)
    msgs = {}
    for x in range(d):
        for z in range(d):
            v = displacement_dv(d, x, z) @ psi
            msgs[(x, z)] = np.outer(v, v.conj())
    return QuantumStrategy(d, msgs)


def phase_point_strategy(d: int) -> QuantumStrategy:
    """Messages built from phase-point operators; wins with certainty.

    The grid point (x, z) is sent as the unit-trace Hermitian operator whose
    discrete Wigner mass avoids every line through (x, z): (1 - A_{x,z})/(d-1)
    for odd prime d (a proper state there), and the Bloch-exterior qubit
    analogue (1 - X - Y - Z)/2, which is not positive semidefinite.
    """
    if d == 2:
        X = np.array([[0, 1], [1, 0]], dtype=complex)
        Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
        Z = np.array([[1, 0], [0, -1]], dtype=complex)
        base = 0.5 * (np.eye(2) - X - Y - Z)
        msgs = {}
        for x in range(2):
            for z in range(2):
                D = displacement_q2(x, z)
                msgs[(x, z)] = D @ base @ D.conj().T
        return QuantumStrategy(2, msgs)
    msgs = {
        (x, z): (np.eye(d) - phase_point(d, x, z)) / (d - 1)
        for x in range(d)
        for z in range(d)
    }
    return QuantumStrategy(d, msgs)


def quantum_value(strategy: QuantumStrategy, game: TorpedoGame) -> float:
    """Average winning probability of a quantum (or post-quantum) strategy."""
    d = game.d
    if strategy.d != d:
        raise ValueError("strategy dimension does not match the game")
    total = 0.0
    for (x, z), rho in strategy.messages.items():
        for q in game.questions:
            win = sum(strategy.measurements[q][c] for c in game.winning(q, x, z))
            total += float(np.trace(rho @ win).real)
    return total / (d * d * len(game.questions))


def behaviour_of_quantum(strategy: QuantumStrategy, game: TorpedoGame) -> dict:
    """Outcome distributions p(c | x, z, q) by the Born rule."""
    d = game.d
    out = {}
    for (x, z), rho in strategy.messages.items():
        for q in game.questions:
            probs = [
                float(np.trace(rho @ strategy.measurements[q][c]).real)
                for c in range(d)
            ]
            out[(x, z, q)] = tuple(probs)
    return out


def key_fact_residual(d: int, x: int, z: int) -> float:
    """Total probability of the forbidden outcomes on the displaced state."""
    game = TorpedoGame(d)
    strat = canonical_quantum_strategy(d)
    rho = strat.messages[(x % d, z % d)]
    op = sum(
        strat.measurements[q][game.forbidden(q, x, z)] for q in game.questions
    )
    return float(np.trace(rho @ op).real)


# ---------------------------------------------------------------------------
# classical values
# ---------------------------------------------------------------------------


def _win_masks(game: TorpedoGame):
    """For each (q, c): boolean grid over (x, z) where c wins."""
    d = game.d
    masks = {}
    for q in game.questions:
        for c in range(d):
            g = np.zeros((d, d), dtype=bool)
            for x in range(d):
                for z in range(d):
                    g[x, z] = c != game.forbidden(q, x, z)
            masks[(q, c)] = g
    return masks


def classical_value(d_in: int, d_msg: int) -> Fraction:
    """Exact optimum over deterministic strategies by exhaustive encoding
    search with the closed-form optimal decoding per encoding."""
    if d_msg ** (d_in * d_in) > ENCODING_CAP:
        raise ValueError("encoding space exceeds the exhaustive-search cap")
    game = TorpedoGame(d_in)
    masks = _win_masks(game)
    nq = len(game.questions)
    cells = [(x, z) for x in range(d_in) for z in range(d_in)]
    best = 0
    for grid in itertools.product(range(d_msg), repeat=d_in * d_in):
        assign = {cell: grid[i] for i, cell in enumerate(cells)}
        score = 0
        for j in range(d_msg):
            members = [cell for cell in cells if assign[cell] == j]
            if not members:
                continue
            for q in game.questions:
                score += max(
                    sum(1 for cell in members if masks[(q, c)][cell])
                    for c in range(d_in)
                )
        if score > best:
            best = score
    return Fraction(best, d_in * d_in * nq)


def best_classical_strategy(d_in: int, d_msg: int) -> ClassicalStrategy:
    """One optimal deterministic strategy found by the exhaustive search."""
    game = TorpedoGame(d_in)
    masks = _win_masks(game)
    cells = [(x, z) for x in range(d_in) for z in range(d_in)]
    best, best_grid, best_dec = -1, None, None
    for grid in itertools.product(range(d_msg), repeat=d_in * d_in):
        assign = {cell: grid[i] for i, cell in enumerate(cells)}
        score = 0
        dec = {q: [0] * d_msg for q in game.questions}
        for j in range(d_msg):
            members = [cell for cell in cells if assign[cell] == j]
            for q in game.questions:
                wins, c_best = max(
                    (
                        (sum(1 for cell in members if masks[(q, c)][cell]), c)
                        for c in range(d_in)
                    ),
                    key=lambda t: t[0],
                )
                score += wins
                dec[q][j] = c_best
        if score > best:
            best, best_grid, best_dec = score, dict(assign), dec
    return ClassicalStrategy.deterministic(d_in, d_msg, best_grid, best_dec)


def random_strategy_search(
    d_in: int, d_msg: int, trials: int = 2000, seed: int = 0
):
    """Randomised search over deterministic encodings (large dimensions).

    Samples encoding grids and pairs each with its optimal decoding; returns
    (best value found, best strategy).  A lower bound on the classical
    value, not a guarantee: intended as a verifier for dimensions where the
    exhaustive search is out of range.
    """
    rng = np.random.default_rng(seed)
    game = TorpedoGame(d_in)
    masks = _win_masks(game)
    cells = [(x, z) for x in range(d_in) for z in range(d_in)]
    best, best_strat = Fraction(0), None
    for _ in range(trials):
        grid = {cell: int(rng.integers(d_msg)) for cell in cells}
        score = 0
        dec = {q: [0] * d_msg for q in game.questions}
        for j in range(d_msg):
            members = [cell for cell in cells if grid[cell] == j]
            for q in game.questions:
                wins, c_best = max(
                    (
                        (sum(1 for cell in members if masks[(q, c)][cell]), c)
                        for c in range(d_in)
                    ),
                    key=lambda t: t[0],
                )
                score += wins
                dec[q][j] = c_best
        val = Fraction(score, d_in * d_in * len(game.questions))
        if val > best:
            best = val
            best_strat = ClassicalStrategy.deterministic(d_in, d_msg, dict(grid), dec)
            if best == 1:
                break
    return best, best_strat


def evaluate_classical(strategy: ClassicalStrategy) -> Fraction:
    """Exact average winning probability of a classical strategy."""
    game = TorpedoGame(strategy.d_in)
    d = strategy.d_in
    total = Fraction(0)
    for x in range(d):
        for z in range(d):
            enc = strategy.encoding[(x, z)]
            for q in game.questions:
                T = strategy.decodings[q]
                for c in game.winning(q, x, z):
                    total += sum(
                        Fraction(T[c][j]) * Fraction(enc[j]) for j in range(strategy.d_msg)
                    )
    return total / (d * d * len(game.questions))


def behaviour_of_classical(strategy: ClassicalStrategy) -> dict:
    game = TorpedoGame(strategy.d_in)
    d = strategy.d_in
    out = {}
    for x in range(d):
        for z in range(d):
            enc = strategy.encoding[(x, z)]
            for q in game.questions:
                T = strategy.decodings[q]
                out[(x, z, q)] = tuple(
                    float(
                        sum(Fraction(T[c][j]) * Fraction(enc[j]) for j in range(strategy.d_msg))
                    )
                    for c in range(d)
                )
    return out


def explicit_noncontextual_model() -> ClassicalStrategy:
    """The optimal trit hidden-variable model: 33 of the 36 constraints.

    Preparation vectors are the stated partition of the grid.  The stated
    measurement matrices label each direction's outcomes by their own
    basis-ordering; converted to the omega^c eigenvector labelling used
    here they read (2,1,0), (1,2,0), (1,2,0), (1,0,2).
    """
    grid = {
        (0, 0): 0, (0, 1): 0, (1, 1): 0,
        (1, 0): 1, (0, 2): 1, (2, 2): 1,
        (2, 0): 2, (2, 1): 2, (1, 2): 2,
    }
    maps = {
        "inf": (2, 1, 0),
        0: (1, 2, 0),
        1: (1, 2, 0),
        2: (1, 0, 2),
    }
    return ClassicalStrategy.deterministic(3, 3, grid, maps)


def average_failure(behaviour: dict, game: TorpedoGame) -> float:
    """epsilon: probability of the forbidden outcome, averaged uniformly."""
    d = game.d
    total = 0.0
    for (x, z, q), probs in behaviour.items():
        total += probs[game.forbidden(q, x, z)]
    return total / (d * d * len(game.questions))


# ---------------------------------------------------------------------------
# bounded-memory noncontextual fraction
# ---------------------------------------------------------------------------


def _all_deterministic_columns(d: int, game: TorpedoGame):
    """Every composite deterministic bounded-memory behaviour (small d)."""
    cells = [(x, z) for x in range(d) for z in range(d)]
    nq = len(game.questions)
    cols = []
    for grid in itertools.product(range(d), repeat=d * d):
        for fqs in itertools.product(
            itertools.product(range(d), repeat=d), repeat=nq
        ):
            col = {}
            for i, cell in enumerate(cells):
                j = grid[i]
                for qi, q in enumerate(game.questions):
                    col[(cell[0], cell[1], q)] = fqs[qi][j]
            cols.append(col)
    return cols


def _column_vector(col: dict, keys, d: int) -> np.ndarray:
    v = np.zeros(len(keys) * d)
    for r, (x, z, q) in enumerate(keys):
        v[r * d + col[(x, z, q)]] = 1.0
    return v


def _master_lp(columns: np.ndarray, target: np.ndarray):
    """max 1.b s.t. columns^T b <= target, b >= 0 (returns res)."""
    ncols = columns.shape[0]
    res = linprog(
        c=-np.ones(ncols),
        A_ub=columns.T,
        b_ub=target,
        bounds=[(0, None)] * ncols,
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"master LP failed: {res.message}")
    return res


def bounded_memory_ncf(behaviour: dict, d: int) -> float:
    """Largest weight of a bounded-memory noncontextual part of the behaviour.

    d = 2 solves the full column LP; d = 3 prices columns lazily: for fixed
    encoding grid the best decodings decouple per question given the duals.
    """
    game = TorpedoGame(d)
    keys = [(x, z, q) for x in range(d) for z in range(d) for q in game.questions]
    target = np.array([behaviour[k][c] for k in keys for c in range(d)])
    if d == 2:
        cols = _all_deterministic_columns(d, game)
        mat = np.array([_column_vector(c, keys, d) for c in cols])
        res = _master_lp(mat, target)
        return max(0.0, float(-res.fun)) + 0.0
    if d != 3:
        raise ValueError("bounded-memory NCF implemented for d = 2 and 3")

    cells = [(x, z) for x in range(d) for z in range(d)]
    grids = list(itertools.product(range(d), repeat=d * d))
    nq = len(game.questions)

    def price(duals: np.ndarray):
        """Best column value sum(y * e^S) over all strategies S."""
        # duals indexed like target; reshape to [cell, q, c]
        y = duals.reshape(len(keys), d)
        ymap = {k: y[i] for i, k in enumerate(keys)}
        best_val, best_col = -np.inf, None
        for grid in grids:
            val = 0.0
            choice = {}
            for qi, q in enumerate(game.questions):
                for j in range(d):
                    members = [
                        cells[i] for i, g in enumerate(grid) if g == j
                    ]
                    scores = [
                        sum(ymap[(x, z, q)][c] for (x, z) in members)
                        for c in range(d)
                    ]
                    c_best = int(np.argmax(scores))
                    val += scores[c_best]
                    choice[(q, j)] = c_best
            if val > best_val:
                best_val, best_col = val, (grid, choice)
        return best_val, best_col

    def col_from(gridchoice) -> dict:
        grid, choice = gridchoice
        col = {}
        for i, cell in enumerate(cells):
            j = grid[i]
            for q in game.questions:
                col[(cell[0], cell[1], q)] = choice[(q, j)]
        return col

    # start from the behaviour-greedy column (duals = target)
    _, seed = price(target)
    columns = [col_from(seed)]
    mat = [ _column_vector(columns[0], keys, d) ]
    while len(columns) <= COLUMN_CAP:
        res = _master_lp(np.array(mat), target)
        duals = -np.array(res.ineqlin.marginals)  # >= 0 for <= constraints
        best_val, best_col = price(duals)
        # reduced cost of a new column: 1 - duals . e^S
        if best_val >= 1.0 - 1e-10:
            cand = col_from(best_col)
            vec = _column_vector(cand, keys, d)
            if any(np.array_equal(vec, m) for m in mat):
                return max(0.0, float(-res.fun)) + 0.0
            if best_val <= 1.0 + 1e-10:
                return max(0.0, float(-res.fun)) + 0.0
            mat.append(vec)
            columns.append(cand)
        else:
            return max(0.0, float(-res.fun)) + 0.0
    raise RuntimeError("column generation did not converge within the cap")


def ncf_bound_holds(behaviour: dict, d: int, theta_classical: float, tol=1e-9) -> bool:
    """Check epsilon >= NCF * (1 - theta^C) for a behaviour."""
    game = TorpedoGame(d)
    eps = average_failure(behaviour, game)
    ncf = bounded_memory_ncf(behaviour, d)
    return eps + tol >= ncf * (1.0 - theta_classical)
