import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg as sla

from negwit import conic
from negwit import witness as W


def test_witness_spec_validation():
    with pytest.raises(ValueError):
        W.WitnessSpec(a=(0.5, 0.7))  # max weight must be 1
    with pytest.raises(ValueError):
        W.WitnessSpec(a=(1.0, 1.2))
    spec = W.WitnessSpec.fock(3)
    assert spec.n == 3 and spec.a == (0.0, 0.0, 1.0)


def test_fock_diagonal_invariants():
    with pytest.raises(ValueError):
        W.FockDiagonal((0.5, 0.6))
    with pytest.raises(ValueError):
        W.FockDiagonal((-0.1, 1.1))


def test_build_lower_base_levels():
    sol = conic.solve(W.build_lower(W.WitnessSpec.fock(1), 1))
    assert abs(sol.primal_value - 0.5) < 1e-6
    sol = conic.solve(W.build_lower(W.WitnessSpec.fock(3), 3))
    assert abs(sol.primal_value - 0.375) < 1e-6


def test_build_rejects_small_level():
    with pytest.raises(ValueError):
        W.build_lower(W.WitnessSpec.fock(3), 2)
    with pytest.raises(ValueError):
        W.build_upper(W.WitnessSpec.fock(3), 2)


def test_upper_split_matches_plain():
    spec = W.WitnessSpec.fock(1)
    v0 = conic.solve(W.build_upper(spec, 4)).primal_value
    v1 = conic.solve(W.build_upper(spec, 4, split_parity=True)).primal_value
    v2 = -conic.solve(W.build_upper_compact(spec, 4, scale="none")).primal_value
    assert abs(v0 - v1) < 1e-7 and abs(v0 - v2) < 1e-7


def test_dual_builders_match_primal_values():
    for n, m in ((3, 3), (1, 5)):
        spec = W.WitnessSpec.fock(n)
        lo = conic.solve(W.build_lower(spec, m), tol=1e-8).primal_value
        lo_d = conic.solve(W.build_lower_dual(spec, m), tol=1e-8).primal_value
        assert abs(lo - lo_d) < 1e-6, (n, m)
        up = conic.solve(W.build_upper(spec, m), tol=1e-8).primal_value
        up_d = conic.solve(W.build_upper_dual(spec, m), tol=1e-8).primal_value
        assert abs(up - up_d) < 1e-6, (n, m)


def test_lower_dual_active_constraint_at_base_level():
    # analytic dual at n=1, m=1: y = 1/2 with mu_1 = -1/2 active on y >= 1 + mu_1
    spec = W.WitnessSpec.fock(1)
    sol = conic.solve(W.build_lower_dual(spec, 1), tol=1e-9)
    y_var, mu = sol.y[0], sol.y[1:3]
    assert abs(y_var - 0.5) < 1e-6
    assert abs(mu[1] - (-0.5)) < 1e-5
    assert abs(y_var - 1.0 - mu[1]) < 1e-5  # active


def test_analytic_primal_values():
    assert W.analytic_primal(1).F == (Fraction(1, 2), Fraction(1, 2))
    assert W.analytic_primal(2).F == (Fraction(1, 2), Fraction(0), Fraction(1, 2))
    assert W.analytic_primal(4).F == (
        Fraction(3, 8),
        Fraction(0),
        Fraction(1, 4),
        Fraction(0),
        Fraction(3, 8),
    )
    with pytest.raises(ValueError):
        W.analytic_primal(0)


def test_analytic_dual_values():
    mu, y, A = W.analytic_dual(1)
    assert y == Fraction(1, 2) and mu == [Fraction(1, 2), Fraction(1, 2)]
    mu3, y3, _ = W.analytic_dual(3)
    assert y3 == Fraction(3, 8)
    assert mu3 == [Fraction(3, 8)] * 3 + [Fraction(5, 8)]


def test_cholesky_closing_formula():
    # A_nn = 2^n n! (1 - 1/binom(n, floor(n/2)))
    for n in range(1, 9):
        _, _, A = W.analytic_dual(n)
        want = Fraction(2**n * math.factorial(n)) * (
            1 - Fraction(1, W.analytic_value(n).numerator and math.comb(n, n // 2))
        )
        assert A[n][n] == want, n


def test_cholesky_off_antidiagonal_structure():
    # even antidiagonals carry 2^l l!; odd entries vanish
    for n in (2, 5):
        _, _, A = W.analytic_dual(n)
        for i in range(n + 1):
            for j in range(n + 1):
                if (i + j) % 2 == 1:
                    assert A[i][j] == 0
                elif (i, j) != (n, n):
                    l = (i + j) // 2
                    assert A[i][j] == 2**l * math.factorial(l)


def test_sos_certificate_small_cases():
    ratios, s = W.sos_certificate(2)
    # coefficients (-1, 0, 1/2) up to the common square root of 1/4
    assert s == Fraction(1, 4)
    assert ratios == [Fraction(-2), Fraction(0), Fraction(1)]
    ratios1, s1 = W.sos_certificate(1)
    assert s1 == Fraction(1, 2) and ratios1 == [Fraction(0), Fraction(1)]


def test_sos_identity_exact_to_twelve():
    for n in range(1, 13):
        assert W.sos_identity_holds(n), n


def test_exact_certification_to_twelve():
    for n in range(1, 13):
        assert W.certify_level_n_value(n), n


def test_rank1_psd_checker():
    assert W.verify_rank1_psd([[1, 2], [2, 4]])
    assert not W.verify_rank1_psd([[1, 0], [0, 1]])  # rank 2
    assert not W.verify_rank1_psd([[-1, 0], [0, 0]])
    assert W.verify_rank1_psd([[0, 0], [0, 0]])


def test_exact_psd_checker():
    assert W.exact_psd([[2, 1], [1, 2]])
    assert not W.exact_psd([[1, 2], [2, 1]])
    assert W.exact_psd([[0, 0], [0, 1]])
    assert not W.exact_psd([[0, 1], [1, 1]])


def test_moment_matrix_examples():
    A = W.moment_matrix([1.0, 0.0, 0.0], 2)
    assert np.allclose(A, [[1, 0, 1], [0, 1, 0], [1, 0, 2]])
    assert np.min(sla.eigvalsh(A)) >= -1e-12
    A2 = W.moment_matrix([float(v) for v in W.analytic_primal(2).F], 2)
    assert np.min(sla.eigvalsh(A2)) >= -1e-10
    A3 = W.moment_matrix([0.0, 1.0], 1)
    assert np.allclose(A3, [[0, 0], [0, 1]])


def test_solver_reproduces_certified_values():
    for n in (1, 2, 3, 4):
        spec = W.WitnessSpec.fock(n)
        sol = conic.solve(W.build_lower(spec, n), tol=1e-8)
        assert sol.status == "optimal"
        assert abs(sol.primal_value - float(W.analytic_value(n))) < 1e-6


def test_threshold_bounds_sweep_mechanics():
    rows = W.threshold_bounds(W.WitnessSpec.fock(1), m_max=4, tol=1e-8)
    assert [r.level for r in rows] == [1, 2, 3, 4]
    lows = [r.lower for r in rows]
    ups = [r.upper for r in rows]
    for a, b in zip(lows, lows[1:]):
        assert b >= a - 2e-8
    for a, b in zip(ups, ups[1:]):
        assert b <= a + 2e-8
    # lower never crosses any upper
    assert max(lows) <= min(ups) + 2e-8
    lo, up = W.final_bounds(rows)
    assert abs(lo - 0.5) < 1e-6
    assert up <= ups[0]


def test_weighted_witness_below_announced_cap():
    # combined |1><1| + |2><2| witness at level 7 sits below 0.875
    spec = W.WitnessSpec(a=(1.0, 1.0))
    v, sol, _ = W.solve_upper(spec, 7)
    assert sol.status == "optimal"
    assert v < 0.875


def test_alpha_does_not_enter_programs():
    a = W.build_lower(W.WitnessSpec(a=(1.0,), alpha=0j), 3)
    b = W.build_lower(W.WitnessSpec(a=(1.0,), alpha=1.3 + 0.4j), 3)
    assert a == b


def test_fock_table_analytic_rows():
    table = W.fock_bounds_table([1, 2])
    assert table[1] == (0.5, 0.5) and table[2] == (0.5, 0.5)


def test_hierarchy_gap_below_cap_midrange():
    # gap between the two hierarchies stays under 0.1 (spot check)
    spec = W.WitnessSpec.fock(7)
    lo, lsol, _ = W.solve_lower(spec, 24, precision="auto")
    up, usol, _ = W.solve_upper(spec, 24, precision="auto")
    assert lsol.info.get("comp", 1) < 1e-4 and usol.info.get("comp", 1) < 1e-3
    assert up - lo <= 0.1
