import itertools
from fractions import Fraction

from hsums.core import ArgTag, Expression, IndexVector, build_basis, finite_sum
from hsums.shuffle import stuffle_product


def _expr_value(e: Expression, n: int) -> Fraction:
    total = Fraction(0)
    for t in e.terms:
        assert t.cmono.is_one
        total += t.coeff * finite_sum(t.sum[0], n)
    return total


def _expected(pairs):
    return Expression.from_terms(
        __import__("hsums.core", fromlist=["Term"]).Term(
            Fraction(c), sum=(IndexVector(idx), ArgTag.Z))
        for idx, c in pairs)


def test_depth_one_examples():
    assert stuffle_product([1], [1]) == _expected([((1, 1), 2), ((2,), -1)])
    assert stuffle_product([1], [2]) == _expected(
        [((1, 2), 1), ((2, 1), 1), ((3,), -1)])
    assert stuffle_product([-1], [1]) == _expected(
        [((-1, 1), 1), ((1, -1), 1), ((-2,), -1)])


def test_depth_one_term_counts():
    assert len(stuffle_product([1], [2])) == 3
    assert len(stuffle_product([-2], [1])) == 3
    assert len(stuffle_product([1], [1])) == 2  # interleavings collide


def test_oracle_equivalence_all_pairs_weight_le_4():
    # product of finite sums equals the decomposition, in exact rationals
    vectors = [v.indices for w in (1, 2, 3) for v in build_basis(w)]
    pairs = [(a, b) for a, b in itertools.product(vectors, repeat=2)
             if sum(abs(x) for x in a) + sum(abs(x) for x in b) <= 4]
    assert len(pairs) > 100
    for a, b in pairs:
        e = stuffle_product(a, b)
        for n in range(1, 26):
            assert _expr_value(e, n) == finite_sum(a, n) * finite_sum(b, n), (a, b, n)


def test_commutativity():
    vectors = [v.indices for w in (1, 2, 3) for v in build_basis(w)]
    for a, b in itertools.combinations(vectors, 2):
        if sum(abs(x) for x in a) + sum(abs(x) for x in b) > 4:
            continue
        assert stuffle_product(a, b) == stuffle_product(b, a)


def test_weight_grading():
    for a, b in [((1,), (3,)), ((-2,), (1, 1)), ((1, -1), (-1, 1))]:
        wa = sum(abs(x) for x in a)
        wb = sum(abs(x) for x in b)
        e = stuffle_product(a, b)
        assert all(t.sum[0].weight == wa + wb for t in e.terms)


def test_memoized_results_are_stable():
    first = stuffle_product([1, -1], [2])
    second = stuffle_product([1, -1], [2])
    assert first == second
