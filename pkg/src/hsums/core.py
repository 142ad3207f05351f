"""Data model for nested harmonic sums and their linear expressions.

Provides index vectors, the four-symbol constant alphabet {ln2, z2, z3,
Li4h}, rational-coefficient terms and expressions, exact finite-sum
evaluation, and the weight-graded basis / constant / expansion-ansatz
builders used by the identity machinery.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Tuple, Union

# Constant alphabet, in canonical order.  Powers of pi are normalized away:
# pi^2 enters as 6*z2 and pi^4 as 36*z2^2, so z2 = pi^2/6 is the only
# even-zeta symbol needed up to weight four.
CONST_SYMBOLS = ("ln2", "z2", "z3", "Li4h")
CONST_WEIGHTS = {"ln2": 1, "z2": 2, "z3": 3, "Li4h": 4}

IndexLike = Union["IndexVector", Sequence[int]]


@dataclass(frozen=True)
class IndexVector:
    """Ordered nonempty tuple of nonzero integer indices labeling a harmonic sum."""

    indices: Tuple[int, ...]

    def __init__(self, indices: Iterable[int]):
        idx = tuple(int(a) for a in indices)
        if not idx:
            raise ValueError("index vector must be nonempty")
        if any(a == 0 for a in idx):
            raise ValueError(f"indices must be nonzero integers, got {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def weight(self) -> int:
        return sum(abs(a) for a in self.indices)

    @property
    def depth(self) -> int:
        return len(self.indices)

    def head(self) -> int:
        return self.indices[0]

    def tail(self) -> Optional["IndexVector"]:
        return IndexVector(self.indices[1:]) if len(self.indices) > 1 else None

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)

    def __str__(self):
        return "S[" + ",".join(str(a) for a in self.indices) + "]"


def as_indices(v: IndexLike) -> Tuple[int, ...]:
    """Coerce an IndexVector or plain sequence to a validated index tuple."""
    if isinstance(v, IndexVector):
        return v.indices
    return IndexVector(v).indices


def weight(v: IndexLike) -> int:
    return sum(abs(a) for a in as_indices(v))


def depth(v: IndexLike) -> int:
    return len(as_indices(v))


@dataclass(frozen=True)
class ConstantMonomial:
    """Product of constant symbols with non-negative integer exponents.

    Exponents are stored positionally in CONST_SYMBOLS order; the empty
    monomial has weight 0 and numeric value 1.
    """

    exps: Tuple[int, int, int, int]

    def __init__(self, exps: Iterable[int] = (0, 0, 0, 0)):
        e = tuple(int(x) for x in exps)
        if len(e) != len(CONST_SYMBOLS) or any(x < 0 for x in e):
            raise ValueError(f"bad exponent tuple {e}")
        object.__setattr__(self, "exps", e)

    @classmethod
    def of(cls, **kw: int) -> "ConstantMonomial":
        unknown = set(kw) - set(CONST_SYMBOLS)
        if unknown:
            raise ValueError(f"unknown constant symbols {sorted(unknown)}")
        return cls(tuple(kw.get(sym, 0) for sym in CONST_SYMBOLS))

    @classmethod
    def parse(cls, text: str) -> "ConstantMonomial":
        """Parse compact notation like ``z2^2`` or ``ln2^3*z3``."""
        exps = [0, 0, 0, 0]
        for factor in text.split("*"):
            factor = factor.strip()
            if not factor:
                raise ValueError(f"empty factor in monomial {text!r}")
            if "^" in factor:
                sym, _, p = factor.partition("^")
                power = int(p)
            else:
                sym, power = factor, 1
            if sym not in CONST_SYMBOLS:
                raise ValueError(f"unknown constant symbol {sym!r}")
            if power < 1:
                raise ValueError(f"non-positive exponent in {text!r}")
            exps[CONST_SYMBOLS.index(sym)] += power
        return cls(exps)

    @property
    def weight(self) -> int:
        return sum(e * CONST_WEIGHTS[sym] for sym, e in zip(CONST_SYMBOLS, self.exps))

    @property
    def is_one(self) -> bool:
        return not any(self.exps)

    def items(self):
        return [(sym, e) for sym, e in zip(CONST_SYMBOLS, self.exps) if e]

    def __mul__(self, other: "ConstantMonomial") -> "ConstantMonomial":
        return ConstantMonomial(tuple(a + b for a, b in zip(self.exps, other.exps)))

    def __str__(self):
        if self.is_one:
            return "1"
        # higher-weight symbols first, matching the reference listings
        return "*".join(sym if e == 1 else f"{sym}^{e}"
                        for sym, e in reversed(self.items()))


ONE = ConstantMonomial()


class ArgTag(Enum):
    """Argument slot of a harmonic sum inside an identity: z or -1-z."""

    Z = "z"
    REFL = "refl"

    @property
    def rank(self) -> int:
        return 0 if self is ArgTag.Z else 1

    def flipped(self) -> "ArgTag":
        return ArgTag.REFL if self is ArgTag.Z else ArgTag.Z


@dataclass(frozen=True)
class Term:
    """rational coefficient x constant monomial x optional tagged harmonic sum."""

    coeff: Fraction
    cmono: ConstantMonomial = ONE
    sum: Optional[Tuple[IndexVector, ArgTag]] = None

    def __post_init__(self):
        if not isinstance(self.coeff, Fraction):
            object.__setattr__(self, "coeff", Fraction(self.coeff))

    @property
    def total_weight(self) -> int:
        w = self.cmono.weight
        if self.sum is not None:
            w += self.sum[0].weight
        return w

    def key(self):
        if self.sum is None:
            return (0, 0, (), self.cmono.exps)
        v, tag = self.sum
        return (1, tag.rank, v.indices, self.cmono.exps)

    def scaled(self, c: Fraction) -> "Term":
        return Term(self.coeff * c, self.cmono, self.sum)

    def retagged(self, tag: ArgTag) -> "Term":
        if self.sum is None:
            return self
        return Term(self.coeff, self.cmono, (self.sum[0], tag))

    def tag_flipped(self) -> "Term":
        if self.sum is None:
            return self
        v, tag = self.sum
        return Term(self.coeff, self.cmono, (v, tag.flipped()))


@dataclass(frozen=True)
class Expression:
    """Canonical rational-linear combination of terms.

    Canonical form: like terms merged, zero coefficients dropped, terms
    sorted by (constant-first, tag, indices, monomial) key.  Instances
    built through ``from_terms`` are always canonical.
    """

    terms: Tuple[Term, ...] = ()

    @classmethod
    def from_terms(cls, terms: Iterable[Term]) -> "Expression":
        acc = {}
        for t in terms:
            k = t.key()
            if k in acc:
                old = acc[k]
                acc[k] = Term(old.coeff + t.coeff, old.cmono, old.sum)
            else:
                acc[k] = t
        kept = sorted((t for t in acc.values() if t.coeff != 0), key=Term.key)
        return cls(tuple(kept))

    def __add__(self, other: "Expression") -> "Expression":
        return Expression.from_terms(self.terms + other.terms)

    def scaled(self, c) -> "Expression":
        c = Fraction(c)
        if c == 0:
            return Expression()
        return Expression(tuple(t.scaled(c) for t in self.terms))

    def retagged(self, tag: ArgTag) -> "Expression":
        return Expression.from_terms(t.retagged(tag) for t in self.terms)

    def tags_flipped(self) -> "Expression":
        return Expression.from_terms(t.tag_flipped() for t in self.terms)

    def homogeneous_weight(self) -> Optional[int]:
        """Common total weight of all terms, or None if mixed or empty."""
        weights = {t.total_weight for t in self.terms}
        return weights.pop() if len(weights) == 1 else None

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)


def canonicalize(e: Expression) -> Expression:
    """Merge like terms, drop zeros, and apply the deterministic term order."""
    return Expression.from_terms(e.terms)


# ---------------------------------------------------------------------------
# Exact finite sums
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _finite_sum(indices: Tuple[int, ...], n: int) -> Fraction:
    # Empty index list is the nested-sum unit: value 1 for every n >= 0.
    if not indices:
        return Fraction(1)
    if n <= 0:
        return Fraction(0)
    head, tail = indices[0], indices[1:]
    step = Fraction(1, n ** abs(head))
    if head < 0 and n % 2:
        step = -step
    return _finite_sum(indices, n - 1) + step * _finite_sum(tail, n)


def finite_sum(v: IndexLike, n: int) -> Fraction:
    """Exact value of the nested sum over n >= i_1 >= ... >= i_k >= 1.

    Negative indices alternate sign via sign(a)^i; n = 0 gives the empty
    sum 0.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    return _finite_sum(as_indices(v), int(n))


# ---------------------------------------------------------------------------
# Weight-graded bases (order fixed by the reference listing)
# ---------------------------------------------------------------------------

_B1 = ((-1,), (1,))

_B2 = ((-2,), (2,), (-1, 1), (1, -1), (1, 1), (-1, -1))

_B3 = (
    (-3,), (3,), (-2, -1), (-2, 1), (2, -1), (2, 1),
    (-1, 1, -1), (-1, 1, 1), (1, -2), (1, 2),
    (1, -1, -1), (1, -1, 1), (1, 1, -1), (1, 1, 1),
    (-1, -2), (-1, 2), (-1, -1, -1), (-1, -1, 1),
)

_B4 = (
    (-4,), (4,), (-3, -1), (-3, 1), (2, -2), (3, -1), (3, 1),
    (-2, -1, -1), (-2, -1, 1), (-2, 1, -1), (-2, 1, 1),
    (2, -1, -1), (2, -1, 1), (2, 1, -1), (2, 1, 1),
    (-1, 1, -1, -1), (-1, 1, -1, 1), (-1, 1, 1, 1),
    (1, -3), (1, 3), (1, -2, -1), (1, -2, 1), (1, -1, -2), (1, -1, 2),
    (1, 1, -2), (1, 1, 2), (1, 2, -1), (1, 2, 1),
    (1, -1, -1, -1), (1, -1, -1, 1), (1, -1, 1, -1), (1, -1, 1, 1),
    (1, 1, -1, -1), (1, 1, -1, 1), (1, 1, 1, -1), (1, 1, 1, 1),
    (-1, -3), (-1, 3), (-1, -2, -1), (-1, -2, 1),
    (-1, -1, -2), (-1, -1, 2), (-1, 1, -2), (-1, 1, 2),
    (-1, 2, -1), (-1, 2, 1),
    (-1, -1, -1, -1), (-1, -1, -1, 1), (-1, -1, 1, -1), (-1, -1, 1, 1),
    (-1, 1, 1, -1), (-2, -2), (-2, 2), (2, 2),
)

_BASES = {1: _B1, 2: _B2, 3: _B3, 4: _B4}


def build_basis(w: int) -> list:
    """Minimal linear basis of harmonic sums at weight w, in reference order."""
    if w not in _BASES:
        raise ValueError(f"weight must be in 1..4, got {w}")
    return [IndexVector(t) for t in _BASES[w]]


def basis_index_set(max_weight: int = 4) -> frozenset:
    """All basis index tuples of weight 1..max_weight."""
    out = set()
    for w in range(1, max_weight + 1):
        out.update(_BASES[w])
    return frozenset(out)


_C1 = ("ln2",)
_C2 = ("z2", "ln2^2")
_C3 = ("z2*ln2", "ln2^3", "z3")
_C4 = ("z2^2", "z2*ln2^2", "ln2^4", "Li4h", "z3*ln2")

_CONSTS = {1: _C1, 2: _C2, 3: _C3, 4: _C4}


def build_constants(w: int) -> list:
    """Irreducible constant monomials at weight w (pi-powers folded into z2)."""
    if w not in _CONSTS:
        raise ValueError(f"weight must be in 1..4, got {w}")
    return [ConstantMonomial.parse(s) for s in _CONSTS[w]]


# Weight-4 expansion ansatz in the reference listing order; each entry is
# (monomial-or-None, index-tuple-or-None), None monomial meaning 1 and None
# indices meaning a pure constant.
_ANZ4 = (
    ("z2^2", None), ("z2*ln2^2", None), ("ln2^4", None), ("Li4h", None),
    (None, (-4,)), ("ln2", (-3,)), ("z2", (-2,)), ("ln2^2", (-2,)),
    ("z2*ln2", (-1,)), ("ln2^3", (-1,)), ("z2*ln2", (1,)), ("ln2^3", (1,)),
    ("z2", (2,)), ("ln2^2", (2,)),
    ("ln2", (3,)), (None, (4,)), (None, (-3, -1)), (None, (-3, 1)),
    (None, (-2, -2)), ("ln2", (-2, -1)), ("ln2", (-2, 1)), (None, (-2, 2)),
    (None, (-1, -3)), ("ln2", (-1, -2)), ("z2", (-1, -1)), ("ln2^2", (-1, -1)),
    ("z2", (-1, 1)), ("ln2^2", (-1, 1)),
    ("ln2", (-1, 2)), (None, (-1, 3)), (None, (1, -3)), ("ln2", (1, -2)),
    ("z2", (1, -1)), ("ln2^2", (1, -1)), ("z2", (1, 1)),
    ("ln2^2", (1, 1)), ("ln2", (1, 2)), (None, (1, 3)), (None, (2, -2)),
    ("ln2", (2, -1)), ("ln2", (2, 1)), (None, (2, 2)), (None, (3, -1)),
    (None, (3, 1)),
    (None, (-2, -1, -1)), (None, (-2, -1, 1)), (None, (-2, 1, -1)), (None, (-2, 1, 1)),
    (None, (-1, -2, -1)), (None, (-1, -2, 1)), (None, (-1, -1, -2)),
    ("ln2", (-1, -1, -1)), ("ln2", (-1, -1, 1)), (None, (-1, -1, 2)),
    (None, (-1, 1, -2)), ("ln2", (-1, 1, -1)),
    ("ln2", (-1, 1, 1)), (None, (-1, 1, 2)), (None, (-1, 2, -1)), (None, (-1, 2, 1)),
    (None, (1, -2, -1)), (None, (1, -2, 1)), (None, (1, -1, -2)),
    ("ln2", (1, -1, -1)), ("ln2", (1, -1, 1)), (None, (1, -1, 2)),
    (None, (1, 1, -2)), ("ln2", (1, 1, -1)), ("ln2", (1, 1, 1)),
    (None, (1, 1, 2)), (None, (1, 2, -1)), (None, (1, 2, 1)),
    (None, (2, -1, -1)), (None, (2, -1, 1)), (None, (2, 1, -1)), (None, (2, 1, 1)),
    (None, (-1, -1, -1, -1)), (None, (-1, -1, -1, 1)),
    (None, (-1, -1, 1, -1)), (None, (-1, -1, 1, 1)), (None, (-1, 1, -1, -1)),
    (None, (-1, 1, -1, 1)), (None, (-1, 1, 1, -1)), (None, (-1, 1, 1, 1)),
    (None, (1, -1, -1, -1)),
    (None, (1, -1, -1, 1)), (None, (1, -1, 1, -1)), (None, (1, -1, 1, 1)),
    (None, (1, 1, -1, -1)), (None, (1, 1, -1, 1)), (None, (1, 1, 1, -1)),
    (None, (1, 1, 1, 1)),
    ("z3*ln2", None),
    ("z3", (-1,)), ("z3", (1,)),
)

AnsatzEntry = Tuple[ConstantMonomial, Optional[IndexVector]]


def build_ansatz(w: int = 4) -> list:
    """Expansion ansatz at weight w: (constant monomial, optional sum) pairs.

    At weight 4 this is the 95-entry reference list (constants folded to the
    z2 alphabet).  Lower weights use the constructed block order
    B_w, B_{w-1} x C_1, ..., B_1 x C_{w-1}, C_w.
    """
    if w == 4:
        out = []
        for mono, idx in _ANZ4:
            cm = ConstantMonomial.parse(mono) if mono else ONE
            out.append((cm, IndexVector(idx) if idx else None))
        return out
    if w not in (1, 2, 3):
        raise ValueError(f"weight must be in 1..4, got {w}")
    out = [(ONE, v) for v in build_basis(w)]
    for j in range(1, w):
        for v in build_basis(w - j):
            for c in build_constants(j):
                out.append((c, v))
    out.extend((c, None) for c in build_constants(w))
    return out


def solver_unknown_count(w: int = 4) -> int:
    """Number of rational coefficients recovered per derivation at weight w.

    Both argument copies of the ansatz, with the pure constants shared
    between the two arguments counted once.
    """
    entries = build_ansatz(w)
    n_const = sum(1 for _, v in entries if v is None)
    return 2 * len(entries) - n_const
