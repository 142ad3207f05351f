"""Quasi-shuffle (stuffle) decomposition of products of harmonic sums.

For two nested sums over the same argument, the product decomposes into
interleavings of the two index lists plus contraction terms: at each step
the heads a, b either keep their order or merge into the single index
sign(a)*sign(b)*(|a|+|b|), and the diagonal double count makes every
contraction enter with a minus sign.  The decomposition is argument
independent, so callers stamp the tag they need.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, Tuple

from .core import ArgTag, Expression, IndexLike, IndexVector, Term, as_indices


def _contract(a: int, b: int) -> int:
    sign = 1 if (a > 0) == (b > 0) else -1
    return sign * (abs(a) + abs(b))


@lru_cache(maxsize=None)
def _stuffle(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
    if not a:
        return ((b, 1),)
    if not b:
        return ((a, 1),)
    acc: Dict[Tuple[int, ...], int] = {}

    def add(prefix, items, factor):
        for idx, c in items:
            key = prefix + idx
            acc[key] = acc.get(key, 0) + factor * c

    add((a[0],), _stuffle(a[1:], b), 1)
    add((b[0],), _stuffle(a, b[1:]), 1)
    add((_contract(a[0], b[0]),), _stuffle(a[1:], b[1:]), -1)
    return tuple(sorted((k, c) for k, c in acc.items() if c))


def stuffle_product(a: IndexLike, b: IndexLike) -> Expression:
    """Decompose S_a * S_b (same argument) into a linear combination of sums.

    Evaluating the result with ``finite_sum`` reproduces
    finite_sum(a, n) * finite_sum(b, n) exactly for every n >= 0.  Terms
    carry the Z tag as a placeholder for the common argument.
    """
    items = _stuffle(as_indices(a), as_indices(b))
    return Expression.from_terms(
        Term(Fraction(c), sum=(IndexVector(idx), ArgTag.Z)) for idx, c in items
    )
