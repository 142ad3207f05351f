import random

import mpmath as mp
import pytest

from hsums.continuation import (EvalContext, constant_value, evaluate,
                                evaluate_expression, laurent_coefficients,
                                _branch_at)
from hsums.core import ArgTag, build_basis, finite_sum
from hsums.corpus import parse_expression
from hsums.errors import PoleProximityError, PrecisionExhaustedError


@pytest.fixture(scope="module")
def ctx():
    return EvalContext(digits=30)


def _as_mpf(fr):
    return mp.mpf(fr.numerator) / fr.denominator


def _rand_points(n, seed, re_lo=-1.8, re_hi=1.0):
    rng = random.Random(seed)
    return [mp.mpc(rng.uniform(re_lo, re_hi), rng.uniform(0.3, 2.0))
            for _ in range(n)]


def test_constant_anchors():
    with mp.workdps(20):
        assert mp.nstr(constant_value("ln2", 15), 6) == "0.693147"
        assert mp.nstr(constant_value("Li4h", 15), 6) == "0.517479"
        # zeta(2) against the plain accelerated series and pi^2/6
        series = mp.nsum(lambda k: 1 / k ** 2, [1, mp.inf])
        assert abs(constant_value("z2", 15) - series) < mp.mpf("1e-14")
        assert abs(constant_value("z2", 15) - mp.pi ** 2 / 6) < mp.mpf("1e-14")
        assert abs(constant_value("z3", 15) - mp.zeta(3)) < mp.mpf("1e-14")


def test_even_integer_anchors(ctx):
    with mp.workdps(50):
        sample = [(1,), (-1,), (2,), (-2, -1), (1, -2), (-1, 1, -1, 1), (1, 1, 1, 1)]
        for v in sample:
            for n in (2, 6, 14):
                err = abs(evaluate(v, n, ctx) - _as_mpf(finite_sum(v, n)))
                assert err < mp.mpf("1e-24"), (v, n, err)


def test_depth_one_polygamma_oracles(ctx):
    with mp.workdps(45):
        for z in _rand_points(6, seed=11):
            beta = (mp.psi(0, (z + 2) / 2) - mp.psi(0, (z + 1) / 2)) / 2
            betap = (mp.psi(1, (z + 2) / 2) - mp.psi(1, (z + 1) / 2)) / 4
            oracles = {
                (1,): mp.psi(0, z + 1) + mp.euler,
                (2,): mp.zeta(2) - mp.psi(1, z + 1),
                (3,): mp.zeta(3) + mp.psi(2, z + 1) / 2,
                (-1,): beta - mp.log(2),
                (-2,): -mp.pi ** 2 / 12 - betap,
            }
            for v, want in oracles.items():
                assert abs(evaluate(v, z, ctx) - want) < mp.mpf("1e-24"), (v, z)


def test_mellin_integral_anchor(ctx):
    # alternating depth-1 sum against direct quadrature of x^z/(1+x) on [0,1]
    rng = random.Random(3)
    with mp.workdps(45):
        for _ in range(5):
            z = mp.mpc(rng.uniform(-0.5, 3.0), rng.choice([-1, 1]) * rng.uniform(0.2, 2.0))
            want = mp.quad(lambda x: x ** z / (1 + x), [0, 1]) - mp.log(2)
            assert abs(evaluate((-1,), z, ctx) - want) < mp.mpf("1e-14")


def test_parity_branch_recurrences(ctx):
    # E_v(z) = O_v(z-1) + z^-|a| E_tail(z) and O_v(z) = E_v(z-1) + sign(a) z^-|a| O_tail(z)
    vectors = [(1,), (-2,), (2, 1), (-1, -1), (1, -2, 1), (-1, 1, -1, 1)]
    with mp.workdps(45):
        for i, z in enumerate(_rand_points(8, seed=23, re_lo=0.4, re_hi=3.0)):
            v = vectors[i % len(vectors)]
            tail = v[1:]
            m = abs(v[0])
            sgn = 1 if v[0] > 0 else -1
            sess_z = ctx._session(z)
            sess_zm1 = ctx._session(z - 1)
            even_v = _branch_at(ctx, sess_z, v, 1, 0)
            odd_v = _branch_at(ctx, sess_z, v, -1, 0)
            even_prev = _branch_at(ctx, sess_zm1, v, 1, 0)
            odd_prev = _branch_at(ctx, sess_zm1, v, -1, 0)
            even_tail = _branch_at(ctx, sess_z, tail, 1, 0)
            odd_tail = _branch_at(ctx, sess_z, tail, -1, 0)
            r1 = abs(even_v - odd_prev - z ** (-m) * even_tail)
            r2 = abs(odd_v - even_prev - sgn * z ** (-m) * odd_tail)
            assert r1 < mp.mpf("1e-20") and r2 < mp.mpf("1e-20"), (v, z, r1, r2)


def test_conjugate_symmetry(ctx):
    with mp.workdps(45):
        for z in _rand_points(5, seed=31):
            for v in [(1,), (-2, -1), (1, -2, 1)]:
                a = evaluate(v, z, ctx)
                b = evaluate(v, mp.conj(z), ctx)
                assert abs(mp.conj(a) - b) < mp.mpf("1e-24")


def test_quasi_shuffle_survives_continuation(ctx):
    # decompositions of same-argument products hold off the integers too
    with mp.workdps(45):
        for z in _rand_points(4, seed=41):
            s11 = evaluate((1, 1), z, ctx)
            s1, s2 = evaluate((1,), z, ctx), evaluate((2,), z, ctx)
            assert abs(s11 - (s1 ** 2 + s2) / 2) < mp.mpf("1e-22")
            lhs = evaluate((-1, 1), z, ctx) + evaluate((1, -1), z, ctx)
            rhs = evaluate((-1,), z, ctx) * evaluate((1,), z, ctx) + evaluate((-2,), z, ctx)
            assert abs(lhs - rhs) < mp.mpf("1e-22")


def test_pole_guard(ctx):
    for z in (-1, -3, -0.9995, mp.mpc(-2, 1e-4)):
        with pytest.raises(PoleProximityError):
            evaluate((1,), z, ctx)
    # points at distance >= 1e-3 are fine
    evaluate((1,), mp.mpc(-1.002, 0), ctx)


def test_weight_cap(ctx):
    with pytest.raises(ValueError):
        evaluate((3, 2), 1.5, ctx)


def test_context_validation():
    with pytest.raises(ValueError):
        EvalContext(digits=20)
    with pytest.raises(ValueError):
        EvalContext(digits=30, shift_target=10)


def test_precision_exhausted_reported():
    # deliberately truncate the expansion far too early
    bad = EvalContext(digits=30, shift_target=30, tail_order=6)
    with pytest.raises(PrecisionExhaustedError):
        evaluate((1,), mp.mpc("0.3", "0.8"), bad)


def test_residue_of_depth_one_sum(ctx):
    c = laurent_coefficients(lambda z: evaluate((1,), z, ctx), -1, [-1], ctx)
    with mp.workdps(40):
        assert abs(c[0] + 1) < mp.mpf("1e-13")


def test_double_pole_coefficient_against_subtracted_series(ctx):
    # independent oracle: zeta(2) - sum_k 1/(k+z)^2 = zeta(2) - psi'(z+1)
    with mp.workdps(45):
        oracle = lambda z: mp.zeta(2) - mp.psi(1, z + 1)
        got = laurent_coefficients(lambda z: evaluate((2,), z, ctx), -1, [-2], ctx)
        want = laurent_coefficients(oracle, -1, [-2], ctx)
        assert abs(got[0] - want[0]) < mp.mpf("1e-13")
        assert abs(got[0] + 1) < mp.mpf("1e-13")


def test_laurent_of_entire_combination_vanishes(ctx):
    with mp.workdps(40):
        c = laurent_coefficients(lambda z: mp.zeta(2) + z * z, -1, [-1, -2], ctx)
        assert max(abs(x) for x in c) < mp.mpf("1e-13")


def test_evaluate_expression(ctx):
    with mp.workdps(40):
        assert evaluate_expression(parse_expression("0"), 0.5, ctx) == 0
        val = evaluate_expression(parse_expression("z2"), mp.mpc("0.2", "0.4"), ctx)
        assert abs(val - mp.pi ** 2 / 6) < mp.mpf("1e-24")
        # mixed z and -1-z arguments
        z = mp.mpc("0.3", "0.7")
        e = parse_expression("2*s[1] - z3*sb[2]")
        want = 2 * evaluate((1,), z, ctx) - mp.zeta(3) * evaluate((2,), -1 - z, ctx)
        assert abs(evaluate_expression(e, z, ctx) - want) < mp.mpf("1e-23")


def test_error_bound_reporting(ctx):
    evaluate((1, 1, 1, 1), mp.mpc("0.3", "0.9"), ctx)
    bound = ctx.reported_error_bound((1, 1, 1, 1))
    assert bound < mp.mpf(10) ** (-ctx.digits + 5)


def test_all_basis_sums_have_expansions(ctx):
    z = mp.mpc("0.37", "1.21")
    with mp.workdps(45):
        for w in (1, 2, 3, 4):
            for v in build_basis(w):
                val = evaluate(v, z, ctx)
                assert mp.isfinite(val)
