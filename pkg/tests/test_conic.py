import math

import numpy as np
import pytest

from negwit import conic
from negwit import witness as W


def one_var_problem():
    return conic.SdpProblem(
        blocks=(1,), objective=([[1.0]],), constraints=((([[1.0]],), 1.0),)
    )


def test_trivial_one_by_one():
    sol = conic.solve(one_var_problem(), tol=1e-8)
    assert sol.status == "optimal"
    assert abs(sol.primal_value - 1.0) < 1e-7


def test_small_eigenvalue_problem():
    C = np.array([[1.0, 0.3], [0.3, -1.0]])
    p = conic.SdpProblem(
        blocks=(2,), objective=(C,), constraints=(((np.eye(2),), 1.0),)
    )
    sol = conic.solve(p)
    top = max(np.linalg.eigvalsh(C))
    assert sol.status == "optimal"
    assert abs(sol.primal_value - top) < 1e-7


def test_lp_blocks():
    p = conic.SdpProblem(
        blocks=(-2,),
        objective=([1.0, 2.0],),
        constraints=((([1.0, 1.0],), 1.0),),
    )
    sol = conic.solve(p)
    assert sol.status == "optimal"
    assert abs(sol.primal_value - 2.0) < 1e-7


def test_strictly_feasible_pair_accepted():
    # the closed-form interior point of the level-3 restriction
    Q, F = W.strictly_feasible_pair(3)
    residuals = W.lower_feasibility_residuals(Q, F, 3)
    assert all(abs(float(r)) <= 1e-10 for r in residuals)
    assert all(f > 0 for f in F)
    assert all(Q[i][i] > 0 for i in range(4))


def test_lower_program_paper_value():
    # weighted witness (0, 1): one-hot at the second index at its base level
    sol = conic.solve(W.build_lower(W.WitnessSpec((0.0, 1.0)), 2), tol=1e-8)
    assert sol.status == "optimal"
    assert abs(sol.primal_value - 0.5) < 1e-6


def test_verify_strong_duality():
    sol = conic.solve(one_var_problem(), tol=1e-8)
    assert conic.verify_strong_duality(sol, 1e-6)
    sol.dual_value = sol.primal_value + 0.1
    assert not conic.verify_strong_duality(sol, 1e-6)
    sol.status = "numerical_limit"
    with pytest.raises(ValueError):
        conic.verify_strong_duality(sol, 1e-6)


def test_dual_pairs_agree_across_hierarchies():
    spec = W.WitnessSpec.fock(5)
    lo = conic.solve(W.build_lower(spec, 5), tol=1e-8)
    lo_d = conic.solve(W.build_lower_dual(spec, 5), tol=1e-8)
    assert abs(lo.primal_value - lo_d.primal_value) < 1e-6


def test_kkt_residuals_within_tolerance():
    for p in (
        one_var_problem(),
        W.build_lower(W.WitnessSpec.fock(2), 4),
        W.build_upper(W.WitnessSpec.fock(1), 4),
    ):
        sol = conic.solve(p, tol=1e-8)
        assert sol.status == "optimal"
        res = conic.kkt_residuals(p, sol)
        for key, val in res.items():
            assert val <= 1e-7, (key, val)


def test_export_round_trip_identity():
    p = conic.SdpProblem(
        blocks=(2, -1),
        objective=([[1.0, 0.25], [0.25, -1.0]], [0.5]),
        constraints=(
            (([[1.0, 0.0], [0.0, 1.0]], [0.0]), 1.0),
            (([[0.0, 0.5], [0.5, 0.0]], [2.0]), 0.25),
        ),
    )
    assert conic.parse_sdpa(conic.export_sdpa(p)) == p


def test_export_resolve_same_optimum():
    p = W.build_upper(W.WitnessSpec.fock(1), 3)
    v0 = conic.solve(p, tol=1e-9).primal_value
    v1 = conic.solve(conic.parse_sdpa(conic.export_sdpa(p)), tol=1e-9).primal_value
    assert abs(v0 - v1) < 1e-8


def test_export_requires_constraints():
    p = one_var_problem()
    empty = conic.SdpProblem(blocks=(1,), objective=([[1.0]],), constraints=())
    with pytest.raises(ValueError, match="at least one constraint"):
        conic.export_sdpa(empty)
    assert conic.export_sdpa(p).startswith("*SENSE: max")


def test_solve_rejects_empty_and_bad_tol():
    empty = conic.SdpProblem(blocks=(1,), objective=([[1.0]],), constraints=())
    with pytest.raises(ValueError):
        conic.solve(empty)
    with pytest.raises(ValueError):
        conic.solve(one_var_problem(), tol=-1.0)


def test_rescale_identity_scales():
    p = W.build_lower(W.WitnessSpec.fock(2), 4)
    assert conic.rescale_basis(p, [1.0] * p.dimension) == p


def test_rescale_preserves_value():
    p = W.build_lower(W.WitnessSpec.fock(2), 6)
    scales = [1.0 / math.factorial(u) for u in range(7)] + [1.0] * 7
    v0 = conic.solve(p, tol=1e-8).primal_value
    v1 = conic.solve(conic.rescale_basis(p, scales), tol=1e-8).primal_value
    assert abs(v0 - v1) < 1e-7


def test_rescale_rejects_bad_scales():
    p = one_var_problem()
    with pytest.raises(ValueError):
        conic.rescale_basis(p, [0.0])
    with pytest.raises(ValueError):
        conic.rescale_basis(p, [1.0, 1.0])


def test_deep_level_needs_reformulation():
    # the printed layout stalls in binary64 at level 12; the scaled compact
    # encoding recovers the optimum (reference from an extended-precision run)
    spec = W.WitnessSpec.fock(3)
    raw = conic.solve(W.build_upper(spec, 12), tol=1e-8, precision="double")
    assert raw.status == "numerical_limit"
    scaled = conic.solve(
        W.build_upper_compact(spec, 12, scale="balanced"),
        tol=1e-8,
        precision="double",
    )
    assert abs(-scaled.primal_value - 0.4691621) < 1e-4
    assert scaled.info.get("comp", 1.0) < 1e-6


def test_extended_precision_improves_deep_levels():
    spec = W.WitnessSpec.fock(3)
    dbl = conic.solve(
        W.build_upper_compact(spec, 20, scale="balanced"), tol=1e-8, precision="double"
    )
    ext = conic.solve(
        W.build_upper_compact(spec, 20, scale="balanced"),
        tol=1e-8,
        precision="extended",
    )
    assert ext.info.get("comp", 1.0) <= max(dbl.info.get("comp", 1.0), 1e-8)
