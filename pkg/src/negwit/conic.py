"""Standard-form SDP/LP modeling, a dense interior-point solver, SDPA interop.

Problems are stored in the standard conic pair

    (max)  maximise  <C, X>   s.t.  <B_i, X> = b_i,  X >= 0
    (min)  minimise  b^T y    s.t.  sum_i y_i B_i - C >= 0

over block-diagonal symmetric matrices; both readings share the same data
(blocks, C, (B_i, b_i)) and the solver always produces the primal-dual pair,
so a problem tagged "min" simply reports the second reading as its value.
Blocks with positive size are dense PSD blocks; negative sizes are diagonal
blocks (modelling LP variables).

The solver is an infeasible-start primal-dual path-following method with the
HKM search direction and a Mehrotra predictor-corrector, dense Cholesky
factorisations throughout.  Intended for small dense instances (blocks up to
~130, a few thousand constraints).  ``precision="extended"`` runs the whole
iteration in numpy longdouble with hand-rolled blocked factorisations, which
is what rescues the deep hierarchy levels where binary64 stalls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
import scipy.linalg as sla

Status = Literal["optimal", "primal_infeasible", "dual_infeasible", "numerical_limit"]

MAX_ITERATIONS = 200
DEFAULT_TOL = 1e-8
_STEP_FRACTION = 0.98


def _as_block_arrays(blocks, mats, dtype=float):
    out = []
    if len(mats) != len(blocks):
        raise ValueError("matrix has wrong number of blocks")
    for size, m in zip(blocks, mats):
        a = np.asarray(m, dtype=dtype)
        if size > 0:
            if a.shape != (size, size):
                raise ValueError(f"expected {size}x{size} block, got {a.shape}")
            if not np.array_equal(a, a.T):
                if np.max(np.abs(a - a.T)) > 1e-12 * max(1.0, np.max(np.abs(a))):
                    raise ValueError("block matrix is not symmetric")
                a = (a + a.T) / 2.0
        else:
            if a.shape != (-size,):
                raise ValueError(f"expected diagonal block of length {-size}")
        out.append(a)
    return tuple(out)


@dataclass(frozen=True)
class SdpProblem:
    """Standard-form conic problem over block-diagonal symmetric matrices."""

    blocks: tuple
    objective: tuple
    constraints: tuple  # ((mats, rhs), ...)
    sense: str = "max"

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        if any(b == 0 for b in blocks):
            raise ValueError("zero-size block")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(
            self, "objective", _as_block_arrays(blocks, self.objective)
        )
        cons = tuple(
            (_as_block_arrays(blocks, mats), float(rhs))
            for mats, rhs in self.constraints
        )
        object.__setattr__(self, "constraints", cons)
        if self.sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def dimension(self) -> int:
        return sum(abs(b) for b in self.blocks)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SdpProblem):
            return NotImplemented
        if self.blocks != other.blocks or self.sense != other.sense:
            return False
        if len(self.constraints) != len(other.constraints):
            return False
        for a, b in zip(self.objective, other.objective):
            if not np.array_equal(a, b):
                return False
        for (ma, ra), (mb, rb) in zip(self.constraints, other.constraints):
            if ra != rb:
                return False
            for a, b in zip(ma, mb):
                if not np.array_equal(a, b):
                    return False
        return True


@dataclass
class SdpSolution:
    X: tuple
    y: np.ndarray
    primal_value: float
    dual_value: float
    gap: float
    status: Status
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def value(self) -> float:
        return self.primal_value


# ---------------------------------------------------------------------------
# longdouble-capable dense kernels
# ---------------------------------------------------------------------------


def _chol(a: np.ndarray):
    """Lower Cholesky; raises LinAlgError when not positive definite."""
    if a.dtype == np.float64:
        return np.linalg.cholesky(a)
    return _chol_blocked(a)


def _chol_blocked(a: np.ndarray, blk: int = 64):
    n = a.shape[0]
    L = np.array(a, copy=True)
    for j0 in range(0, n, blk):
        j1 = min(j0 + blk, n)
        if j0:
            L[j0:, j0:j1] = L[j0:, j0:j1] - L[j0:, :j0] @ L[j0:j1, :j0].T
        for j in range(j0, j1):
            d = L[j, j] - np.dot(L[j, j0:j], L[j, j0:j])
            if not d > 0:
                raise np.linalg.LinAlgError("matrix is not positive definite")
            d = np.sqrt(d)
            L[j, j] = d
            if j + 1 < n:
                L[j + 1 :, j] = (
                    L[j + 1 :, j] - L[j + 1 :, j0:j] @ L[j, j0:j]
                ) / d
    for j in range(n):
        L[j, j + 1 :] = 0
    return L


def _solve_lower(L: np.ndarray, b: np.ndarray):
    """Solve L x = b, L lower triangular; b may be a matrix."""
    if L.dtype == np.float64 and b.dtype == np.float64:
        return sla.solve_triangular(L, b, lower=True, check_finite=False)
    n = L.shape[0]
    x = np.array(b, copy=True)
    for i in range(n):
        if i:
            x[i] = x[i] - L[i, :i] @ x[:i]
        x[i] = x[i] / L[i, i]
    return x


def _solve_upper(U: np.ndarray, b: np.ndarray):
    if U.dtype == np.float64 and b.dtype == np.float64:
        return sla.solve_triangular(U, b, lower=False, check_finite=False)
    n = U.shape[0]
    x = np.array(b, copy=True)
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            x[i] = x[i] - U[i, i + 1 :] @ x[i + 1 :]
        x[i] = x[i] / U[i, i]
    return x


def _chol_solve(L: np.ndarray, b: np.ndarray):
    return _solve_upper(L.T, _solve_lower(L, b))


def _inv_from_chol(L: np.ndarray):
    n = L.shape[0]
    eye = np.eye(n, dtype=L.dtype)
    return _chol_solve(L, eye)


# ---------------------------------------------------------------------------
# solver internals
# ---------------------------------------------------------------------------


class _BlockData:
    """Per-block stacked constraint data in the working dtype."""

    def __init__(self, problem: SdpProblem, dtype):
        self.blocks = problem.blocks
        self.dtype = dtype
        m = problem.num_constraints
        self.b = np.array([rhs for _, rhs in problem.constraints], dtype=dtype)
        self.C = []
        self.Bstack = []
        for bi, size in enumerate(problem.blocks):
            n = abs(size)
            cb = np.asarray(problem.objective[bi], dtype=dtype)
            if size > 0:
                stack = np.empty((m, n, n), dtype=dtype)
            else:
                stack = np.empty((m, n), dtype=dtype)
            for ci, (mats, _) in enumerate(problem.constraints):
                stack[ci] = np.asarray(mats[bi], dtype=dtype)
            self.C.append(cb)
            self.Bstack.append(stack)
        self.norm_b = max(1.0, float(np.max(np.abs(self.b))) if m else 1.0)
        self.norm_C = max(
            1.0, max(float(np.max(np.abs(c))) if c.size else 0.0 for c in self.C)
        )

    def apply_A(self, Xb) -> np.ndarray:
        """Vector of <B_i, X>."""
        out = np.zeros(len(self.b), dtype=self.dtype)
        for size, stack, x in zip(self.blocks, self.Bstack, Xb):
            if size > 0:
                out += stack.reshape(len(self.b), -1) @ x.reshape(-1)
            else:
                out += stack @ x
        return out

    def apply_At(self, y) -> list:
        """Block matrix sum_i y_i B_i."""
        out = []
        for size, stack in zip(self.blocks, self.Bstack):
            if size > 0:
                out.append(np.tensordot(y, stack, axes=(0, 0)))
            else:
                out.append(y @ stack)
        return out


def _blk_inner(blocks, A, B):
    total = 0.0
    for _, a, b in zip(blocks, A, B):
        total = total + (a * b).sum()
    return total


def _identity_blocks(blocks, dtype, scale=1.0):
    out = []
    for size in blocks:
        if size > 0:
            out.append(np.eye(size, dtype=dtype) * dtype(scale))
        else:
            out.append(np.full(-size, dtype(scale), dtype=dtype))
    return out


def _max_step(blocks, Xb, dXb, chols):
    """Largest alpha <= 1e32 with X + alpha dX psd (per-block boundary)."""
    alpha = np.inf
    for size, x, dx, L in zip(blocks, Xb, dXb, chols):
        if size > 0:
            K = _solve_lower(L, _solve_lower(L, dx).T)
            Kd = np.asarray(K, dtype=np.float64)
            Kd = (Kd + Kd.T) / 2.0
            lam = float(sla.eigh(Kd, eigvals_only=True, check_finite=False)[0])
            if lam < -1e-300:
                alpha = min(alpha, -1.0 / lam)
        else:
            neg = dx < 0
            if np.any(neg):
                alpha = min(alpha, float(np.min(-x[neg] / dx[neg])))
    return alpha


def _psd_ok(blocks, Xb):
    try:
        return [_chol(x) if size > 0 else _diag_chol(x) for size, x in zip(blocks, Xb)]
    except np.linalg.LinAlgError:
        return None


def _diag_chol(x):
    if np.any(x <= 0):
        raise np.linalg.LinAlgError("diagonal block not positive")
    return x


def solve(
    problem: SdpProblem,
    tol: float = DEFAULT_TOL,
    precision: str = "double",
    max_iterations: int = MAX_ITERATIONS,
) -> SdpSolution:
    """Solve the primal-dual pair for ``problem``.

    Returns an ``SdpSolution`` whose primal_value/dual_value follow the
    problem's declared sense (for "min" problems the stated value is b^T y).
    Raises ValueError on malformed input; numerical trouble is reported via
    ``status="numerical_limit"``, never an exception.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if precision not in ("double", "extended"):
        raise ValueError("precision must be 'double' or 'extended'")
    if problem.num_constraints == 0:
        raise ValueError("problem needs at least one constraint")
    dtype = np.float64 if precision == "double" else np.longdouble
    data = _BlockData(problem, dtype)
    blocks = problem.blocks
    m = problem.num_constraints
    ntot = sum(abs(b) for b in blocks)

    Xb = _identity_blocks(blocks, dtype, math.sqrt(ntot))
    Sb = _identity_blocks(blocks, dtype, max(1.0, data.norm_C))
    y = np.zeros(m, dtype=dtype)

    best = None
    stalls = 0
    status: Status = "numerical_limit"
    it = 0
    for it in range(1, max_iterations + 1):
        pobj = _blk_inner(blocks, data.C, Xb)
        dobj = float(data.b @ y)
        rp = data.b - data.apply_A(Xb)
        Aty = data.apply_At(y)
        Rd = [c + s - a for c, s, a in zip(data.C, Sb, Aty)]
        mu = _blk_inner(blocks, Xb, Sb) / ntot
        rp_norm = float(np.max(np.abs(rp))) / data.norm_b if m else 0.0
        rd_norm = max(float(np.max(np.abs(r))) for r in Rd) / data.norm_C
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        # complementarity guards against near-feasible iterate pairs whose
        # small mutual gap hides large multiplier-weighted infeasibility
        comp = abs(_blk_inner(blocks, Xb, Sb)) / (1.0 + abs(pobj) + abs(dobj))
        quality = max(relgap, rp_norm, rd_norm, comp)
        if best is None or quality < best[0]:
            best = (
                quality,
                [np.array(x) for x in Xb],
                np.array(y),
                pobj,
                dobj,
                {"rp": rp_norm, "rd": rd_norm, "relgap": relgap, "comp": comp},
            )
        if relgap <= tol and rp_norm <= tol and rd_norm <= tol and comp <= 10 * tol:
            status = "optimal"
            best = (
                quality,
                [np.array(x) for x in Xb],
                np.array(y),
                pobj,
                dobj,
                {"rp": rp_norm, "rd": rd_norm, "relgap": relgap, "comp": comp},
            )
            break
        # crude divergence certificates
        if dobj < -1.0 / tol * data.norm_b and rd_norm < math.sqrt(tol):
            status = "primal_infeasible"
            break
        if pobj > 1.0 / tol * data.norm_b and rp_norm < math.sqrt(tol):
            status = "dual_infeasible"
            break

        Lx = _psd_ok(blocks, Xb)
        Ls = _psd_ok(blocks, Sb)
        if Lx is None or Ls is None:
            status = "numerical_limit"
            break
        Sinv = [
            _inv_from_chol(L) if size > 0 else 1.0 / s
            for size, s, L in zip(blocks, Sb, Ls)
        ]

        # Schur complement H_ij = sum_blocks Tr(B_i X B_j S^{-1})
        H = np.zeros((m, m), dtype=dtype)
        Tstacks = []
        for size, stack, x, si in zip(blocks, data.Bstack, Xb, Sinv):
            if size > 0:
                T = np.matmul(np.matmul(x, stack), si)
                H += stack.reshape(m, -1) @ T.reshape(m, -1).T
                Tstacks.append(T)
            else:
                w = x * si
                H += (stack * w) @ stack.T
                Tstacks.append(None)
        H = (H + H.T) / 2.0

        Lh = None
        jitter = 0.0
        base = float(np.max(np.abs(np.diagonal(H)))) or 1.0
        for attempt in range(8):
            try:
                Lh = _chol(H + (jitter * base) * np.eye(m, dtype=dtype))
                break
            except np.linalg.LinAlgError:
                jitter = 1e-14 if jitter == 0.0 else jitter * 100.0
        if Lh is None:
            status = "numerical_limit"
            break

        def rhs_for(Rc):
            # A(Rc S^{-1}) + A(X Rd S^{-1}) - rp
            vec = -rp.astype(dtype)
            for size, stack, rc, rd, x, si in zip(
                blocks, data.Bstack, Rc, Rd, Xb, Sinv
            ):
                if size > 0:
                    Mx = (rc + x @ rd) @ si
                    vec += stack.reshape(m, -1) @ Mx.reshape(-1)
                else:
                    vec += stack @ ((rc + x * rd) * si)
            return vec

        def schur_solve(rhs):
            dy = _chol_solve(Lh, rhs)
            for _ in range(2):  # iterative refinement; H is often near-singular
                resid = rhs - H @ dy
                dy = dy + _chol_solve(Lh, resid)
            return dy

        def direction(Rc):
            dy = schur_solve(rhs_for(Rc))
            dS = [a - r for a, r in zip(data.apply_At(dy), Rd)]
            dX = []
            for size, rc, x, ds, si in zip(blocks, Rc, Xb, dS, Sinv):
                if size > 0:
                    v = (rc - x @ ds) @ si
                    dX.append((v + v.T) / 2.0)
                else:
                    dX.append((rc - x * ds) * si)
            return dX, dy, dS

        # predictor
        Rc_aff = [
            -(x @ s) if size > 0 else -(x * s) for size, x, s in zip(blocks, Xb, Sb)
        ]
        dX_a, dy_a, dS_a = direction(Rc_aff)
        ap = min(1.0, _max_step(blocks, Xb, dX_a, Lx))
        ad = min(1.0, _max_step(blocks, Sb, dS_a, Ls))
        mu_aff = (
            _blk_inner(
                blocks,
                [x + ap * d for x, d in zip(Xb, dX_a)],
                [s + ad * d for s, d in zip(Sb, dS_a)],
            )
            / ntot
        )
        sigma = min(1.0, max(1e-10, float((max(mu_aff, 0.0) / mu) ** 3)))

        # corrector
        Rc = []
        for size, x, s, dxa, dsa in zip(blocks, Xb, Sb, dX_a, dS_a):
            if size > 0:
                Rc.append(
                    dtype(sigma * mu) * np.eye(size, dtype=dtype) - x @ s - dxa @ dsa
                )
            else:
                Rc.append(dtype(sigma * mu) - x * s - dxa * dsa)
        dX, dy, dS = direction(Rc)
        ap = _STEP_FRACTION * min(1.0 / _STEP_FRACTION, _max_step(blocks, Xb, dX, Lx))
        ad = _STEP_FRACTION * min(1.0 / _STEP_FRACTION, _max_step(blocks, Sb, dS, Ls))

        # keep iterates safely interior
        for _ in range(60):
            trial = [x + dtype(ap) * d for x, d in zip(Xb, dX)]
            if _psd_ok(blocks, trial) is not None:
                break
            ap *= 0.8
        for _ in range(60):
            trial = [s + dtype(ad) * d for s, d in zip(Sb, dS)]
            if _psd_ok(blocks, trial) is not None:
                break
            ad *= 0.8

        if max(ap, ad) < 1e-10:
            stalls += 1
            if stalls >= 3:
                status = "numerical_limit"
                break
        else:
            stalls = 0

        Xb = [x + dtype(ap) * d for x, d in zip(Xb, dX)]
        y = y + dtype(ad) * dy
        Sb = [s + dtype(ad) * d for s, d in zip(Sb, dS)]
    else:
        status = "numerical_limit"

    diag = {}
    if best is not None and status in ("optimal", "numerical_limit"):
        _, Xb, y, pobj, dobj, diag = best
    else:
        pobj = _blk_inner(blocks, data.C, Xb)
        dobj = float(data.b @ y)

    X_out = tuple(np.asarray(x, dtype=np.float64) for x in Xb)
    y_out = np.asarray(y, dtype=np.float64)
    pv, dv = float(pobj), float(dobj)
    relgap = abs(pv - dv) / (1.0 + abs(pv) + abs(dv))
    if problem.sense == "min":
        pv, dv = dv, pv
    return SdpSolution(
        X=X_out,
        y=y_out,
        primal_value=pv,
        dual_value=dv,
        gap=relgap,
        status=status,
        iterations=it,
        info={"precision": precision, "tol": tol, **diag},
    )


def verify_strong_duality(solution: SdpSolution, tol: float) -> bool:
    """True iff the reported primal and dual values agree within tol."""
    if solution.status != "optimal":
        raise ValueError("strong duality check requires an optimal solution")
    return abs(solution.primal_value - solution.dual_value) <= tol


def kkt_residuals(problem: SdpProblem, solution: SdpSolution) -> dict:
    """Primal feasibility, dual feasibility and complementarity residuals."""
    data = _BlockData(problem, np.float64)
    Xb = solution.X
    y = solution.y
    rp = float(np.max(np.abs(data.b - data.apply_A(Xb)))) if len(data.b) else 0.0
    S = [a - c for a, c in zip(data.apply_At(y), data.C)]
    dual_min = 0.0
    x_min = 0.0
    for size, s, x in zip(problem.blocks, S, Xb):
        if size > 0:
            dual_min = min(dual_min, float(np.min(sla.eigvalsh(s))))
            x_min = min(x_min, float(np.min(sla.eigvalsh(x))))
        else:
            dual_min = min(dual_min, float(np.min(s)))
            x_min = min(x_min, float(np.min(x)))
    comp = abs(_blk_inner(problem.blocks, Xb, S)) / (1.0 + abs(solution.primal_value))
    return {
        "primal": rp,
        "dual_psd_violation": -dual_min,
        "x_psd_violation": -x_min,
        "complementarity": comp,
    }


def rescale_basis(problem: SdpProblem, scales: Sequence[float]) -> SdpProblem:
    """Congruence-transform every matrix by diag(scales), renormalise rows.

    One positive scale per matrix row/column index (blocks concatenated).
    The optimal value is unchanged: variables absorb the congruence and
    each constraint is divided by the magnitude of its largest entry.
    """
    scales = np.asarray(list(scales), dtype=float)
    if scales.shape != (problem.dimension,):
        raise ValueError("need one scale per matrix row/column index")
    if np.any(scales <= 0):
        raise ValueError("scales must be positive")
    split = []
    off = 0
    for size in problem.blocks:
        n = abs(size)
        split.append(scales[off : off + n])
        off += n

    def congr(mats):
        out = []
        for size, d, mat in zip(problem.blocks, split, mats):
            if size > 0:
                out.append(np.outer(d, d) * mat)
            else:
                out.append(d * d * mat)
        return out

    new_cons = []
    for mats, rhs in problem.constraints:
        mm = congr(mats)
        scale = max(float(np.max(np.abs(b))) for b in mm)
        if scale == 0.0:
            scale = 1.0
        new_cons.append((tuple(b / scale for b in mm), rhs / scale))
    return SdpProblem(
        blocks=problem.blocks,
        objective=tuple(congr(problem.objective)),
        constraints=tuple(new_cons),
        sense=problem.sense,
    )


# ---------------------------------------------------------------------------
# SDPA sparse format (.dat-s)
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return f"{v:.16e}"


def export_sdpa(problem: SdpProblem) -> str:
    """Serialise to SDPA sparse format; matno 0 is the objective."""
    if problem.num_constraints == 0:
        raise ValueError("SDPA export needs at least one constraint")
    lines = [f"*SENSE: {problem.sense}"]
    lines.append(f"{problem.num_constraints}")
    lines.append(f"{len(problem.blocks)}")
    lines.append(" ".join(str(b) for b in problem.blocks))
    lines.append(" ".join(_fmt(rhs) for _, rhs in problem.constraints))

    def emit(matno, mats):
        for bi, (size, a) in enumerate(zip(problem.blocks, mats), start=1):
            if size > 0:
                idx = np.argwhere(np.triu(np.ones_like(a, dtype=bool)))
                for i, j in idx:
                    if a[i, j] != 0.0:
                        lines.append(f"{matno} {bi} {i + 1} {j + 1} {_fmt(a[i, j])}")
            else:
                for i, v in enumerate(a):
                    if v != 0.0:
                        lines.append(f"{matno} {bi} {i + 1} {i + 1} {_fmt(v)}")

    emit(0, problem.objective)
    for ci, (mats, _) in enumerate(problem.constraints, start=1):
        emit(ci, mats)
    return "\n".join(lines) + "\n"


def parse_sdpa(text: str) -> SdpProblem:
    """Parse the SDPA sparse format produced by :func:`export_sdpa`."""
    sense = "max"
    rows = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("*") or line.startswith('"'):
            if line.upper().startswith("*SENSE:"):
                sense = line.split(":", 1)[1].strip().lower()
            continue
        for ch in ",(){}":
            line = line.replace(ch, " ")
        rows.append(line.split())
    if len(rows) < 4:
        raise ValueError("truncated SDPA input")
    m = int(rows[0][0])
    nblocks = int(rows[1][0])
    blocks = tuple(int(v) for v in rows[2][:nblocks])
    rhs = [float(v) for v in rows[3][:m]]

    def zero():
        return [
            np.zeros((b, b)) if b > 0 else np.zeros(-b) for b in blocks
        ]

    mats = [zero() for _ in range(m + 1)]
    for entry in rows[4:]:
        matno, blk, i, j = (int(entry[0]), int(entry[1]), int(entry[2]), int(entry[3]))
        val = float(entry[4])
        tgt = mats[matno][blk - 1]
        if blocks[blk - 1] > 0:
            tgt[i - 1, j - 1] = val
            tgt[j - 1, i - 1] = val
        else:
            if i != j:
                raise ValueError("off-diagonal entry in diagonal block")
            tgt[i - 1] = val
    constraints = tuple(
        (tuple(mats[k + 1]), rhs[k]) for k in range(m)
    )
    return SdpProblem(
        blocks=blocks, objective=tuple(mats[0]), constraints=constraints, sense=sense
    )
