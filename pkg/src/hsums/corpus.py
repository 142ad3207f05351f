"""Machine-readable corpus of the 57 weight-4 reflection identities.

Two formats are supported: a compact human-auditable text grammar

    identity := product "=" expr
    product  := sumref "*" sumref
    sumref   := ("s" | "sb") "[" int ("," int)* "]"
    expr     := ["-"] term (("+" | "-") term)*
    term     := factor ("*" factor)* with at most one rational factor,
                constant factors from {ln2, z2, z3, Li4h} with optional
                "^" powers, and at most one sumref
    rational := int ["/" int]

("s" is a sum of argument z, "sb" of argument -1-z) and a structured JSON
interchange format with explicit numerator/denominator fields.  Constants
are always symbolic; canonical files round-trip byte-identically through
parse and serialize.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import List, Optional, Tuple

from .core import (ArgTag, CONST_SYMBOLS, ConstantMonomial, Expression,
                   IndexVector, ONE, Term, build_basis)
from .engine import IdentityRecord, Provenance
from .errors import (CorpusSyntaxError, CorpusValidationError,
                     UnknownSymbolError)

CORPUS_VERSION = "1"
CORPUS_ENV_VAR = "HSUMS_CORPUS"

_TOKEN_RE = re.compile(
    r"(?P<space>\s+)|(?P<word>[A-Za-z][A-Za-z0-9]*)|(?P<num>\d+)|"
    r"(?P<punct>[\[\](),*^+=/-])")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise CorpusSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "space":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.next()
        if text != value:
            raise CorpusSyntaxError(f"expected {value!r}, found {text or 'end'!r}", pos)

    def fail(self, message: str):
        raise CorpusSyntaxError(message, self.peek()[2])

    # sumref := ("s"|"sb") "[" int ("," int)* "]"
    def sumref(self) -> Tuple[IndexVector, ArgTag]:
        kind, word, pos = self.next()
        if word not in ("s", "sb"):
            raise CorpusSyntaxError(f"expected sum symbol, found {word!r}", pos)
        tag = ArgTag.Z if word == "s" else ArgTag.REFL
        self.expect("[")
        indices = [self.signed_int()]
        while self.peek()[1] == ",":
            self.next()
            indices.append(self.signed_int())
        self.expect("]")
        return IndexVector(indices), tag

    def signed_int(self) -> int:
        sign = 1
        if self.peek()[1] == "-":
            self.next()
            sign = -1
        kind, text, pos = self.next()
        if kind != "num":
            raise CorpusSyntaxError(f"expected integer, found {text or 'end'!r}", pos)
        return sign * int(text)

    def rational(self) -> Fraction:
        kind, text, pos = self.next()
        num = int(text)
        if self.peek()[1] == "/":
            self.next()
            kind, text, pos = self.next()
            if kind != "num":
                raise CorpusSyntaxError("expected denominator", pos)
            return Fraction(num, int(text))
        return Fraction(num)

    # term := factor ("*" factor)*
    def term(self) -> Term:
        coeff = Fraction(1)
        cmono = ONE
        summand = None
        seen_rational = False
        seen_any = False
        while True:
            kind, text, pos = self.peek()
            if kind == "num":
                if seen_rational:
                    raise CorpusSyntaxError("second rational factor in one term", pos)
                coeff *= self.rational()
                seen_rational = True
            elif kind == "word" and text in ("s", "sb"):
                if summand is not None:
                    raise CorpusSyntaxError("second sum factor in one term", pos)
                summand = self.sumref()
            elif kind == "word":
                if text not in CONST_SYMBOLS:
                    raise UnknownSymbolError(f"unknown symbol {text!r}", pos)
                self.next()
                power = 1
                if self.peek()[1] == "^":
                    self.next()
                    k, t, p = self.next()
                    if k != "num":
                        raise CorpusSyntaxError("expected exponent", p)
                    power = int(t)
                cmono = cmono * ConstantMonomial.of(**{text: power})
            else:
                raise CorpusSyntaxError(f"expected term factor, found {text or 'end'!r}", pos)
            seen_any = True
            if self.peek()[1] == "*":
                self.next()
                continue
            break
        if not seen_any:
            self.fail("empty term")
        return Term(coeff, cmono, summand)

    # expr := ["-"] term (("+"|"-") term)*
    def expr(self) -> Expression:
        terms = []
        sign = 1
        if self.peek()[1] == "-":
            self.next()
            sign = -1
        if self.peek()[0] == "end":
            self.fail("empty right-hand side")
        terms.append(self.term().scaled(sign))
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            terms.append(self.term().scaled(1 if op == "+" else -1))
        if self.peek()[0] != "end":
            self.fail(f"unexpected trailing input {self.peek()[1]!r}")
        return Expression.from_terms(terms)

    def identity(self, provenance: Provenance) -> IdentityRecord:
        first = self.sumref()
        self.expect("*")
        second = self.sumref()
        if first[1] is not ArgTag.Z or second[1] is not ArgTag.REFL:
            self.fail("left side must pair one s[...] with one sb[...]")
        self.expect("=")
        right = self.expr()
        weight = first[0].weight + second[0].weight
        return IdentityRecord((first, second), right, weight, provenance)


def parse_identity(text: str, provenance: Provenance = Provenance.CORPUS) -> IdentityRecord:
    """Parse one identity line of the compact grammar."""
    return _Parser(text).identity(provenance)


def parse_expression(text: str) -> Expression:
    """Parse a bare expression in the compact grammar."""
    return _Parser(text).expr()


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _format_sumref(v: IndexVector, tag: ArgTag) -> str:
    name = "s" if tag is ArgTag.Z else "sb"
    return name + "[" + ",".join(str(a) for a in v.indices) + "]"


def _format_term_body(t: Term) -> str:
    parts = []
    mag = abs(t.coeff)
    if mag != 1 or (t.cmono.is_one and t.sum is None):
        parts.append(str(mag))
    if not t.cmono.is_one:
        parts.append(str(t.cmono))
    if t.sum is not None:
        parts.append(_format_sumref(*t.sum))
    return "*".join(parts)


def serialize_expression(e: Expression) -> str:
    if not e.terms:
        return "0"
    chunks = []
    for i, t in enumerate(e.terms):
        body = _format_term_body(t)
        if i == 0:
            chunks.append(("-" if t.coeff < 0 else "") + body)
        else:
            chunks.append(("- " if t.coeff < 0 else "+ ") + body)
    return " ".join(chunks)


def serialize_identity(rec: IdentityRecord) -> str:
    lhs = "*".join(_format_sumref(v, tag) for v, tag in rec.left)
    return f"{lhs} = {serialize_expression(rec.right)}"


# ---------------------------------------------------------------------------
# Corpus files
# ---------------------------------------------------------------------------


def _expected_key_order() -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    b1 = [v.indices for v in build_basis(1)]
    b2 = [v.indices for v in build_basis(2)]
    b3 = [v.indices for v in build_basis(3)]
    keys = [(a, b) for a in b1 for b in b3]
    keys += [(b2[i], b2[j]) for i in range(len(b2)) for j in range(i, len(b2))]
    return keys


@dataclass
class CorpusFile:
    """The complete weight-4 identity corpus in its reference order."""

    version: str
    weight: int
    records: Tuple[IdentityRecord, ...]

    def __post_init__(self):
        self._by_key = {}
        for rec in self.records:
            if not rec.is_bilinear:
                raise CorpusValidationError(f"corpus record is not bilinear: {rec.left}")
            if rec.key in self._by_key:
                raise CorpusValidationError(f"duplicate identity key {rec.key}")
            self._by_key[rec.key] = rec
        self.validate()

    def validate(self):
        if self.weight != 4:
            raise CorpusValidationError(f"corpus weight must be 4, got {self.weight}")
        expected = _expected_key_order()
        got = [rec.key for rec in self.records]
        if len(got) != len(expected):
            raise CorpusValidationError(
                f"weight-4 corpus must hold {len(expected)} identities, got {len(got)}")
        if got != expected:
            for g, e in zip(got, expected):
                if g != e:
                    raise CorpusValidationError(
                        f"record order breaks the reference listing: found {g}, "
                        f"expected {e}")
        for rec in self.records:
            if rec.weight != self.weight:
                raise CorpusValidationError(f"record {rec.key} has weight {rec.weight}")

    def lookup(self, a, b) -> Optional[IdentityRecord]:
        a = a.indices if isinstance(a, IndexVector) else tuple(a)
        b = b.indices if isinstance(b, IndexVector) else tuple(b)
        return self._by_key.get((a, b))

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def serialize_corpus(corpus: CorpusFile) -> str:
    lines = [f"version: {corpus.version}", f"weight: {corpus.weight}"]
    lines.extend(serialize_identity(rec) for rec in corpus.records)
    return "\n".join(lines) + "\n"


def parse_corpus(text: str) -> CorpusFile:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if len(lines) < 2 or not lines[0].startswith("version:") \
            or not lines[1].startswith("weight:"):
        raise CorpusValidationError("corpus file must start with version: and weight: lines")
    version = lines[0].split(":", 1)[1].strip()
    try:
        weight = int(lines[1].split(":", 1)[1].strip())
    except ValueError as exc:
        raise CorpusValidationError(f"bad weight header: {exc}") from exc
    records = tuple(parse_identity(ln) for ln in lines[2:])
    return CorpusFile(version, weight, records)


def load_corpus(path) -> CorpusFile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CorpusValidationError(f"cannot read corpus file {path}: {exc}") from exc
    return parse_corpus(text)


def save_corpus(corpus: CorpusFile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_corpus(corpus))


def default_corpus_path() -> str:
    env = os.environ.get(CORPUS_ENV_VAR)
    if env:
        return env
    return str(resources.files("hsums").joinpath("data/weight4.txt"))


def load_default_corpus() -> CorpusFile:
    return load_corpus(default_corpus_path())


# ---------------------------------------------------------------------------
# Structured interchange format
# ---------------------------------------------------------------------------


def record_to_obj(rec: IdentityRecord) -> dict:
    return {
        "left": [{"indices": list(v.indices), "arg": tag.value} for v, tag in rec.left],
        "weight": rec.weight,
        "provenance": rec.provenance.value,
        "terms": [
            {
                "num": t.coeff.numerator,
                "den": t.coeff.denominator,
                "consts": {sym: e for sym, e in zip(CONST_SYMBOLS, t.cmono.exps)},
                "indices": list(t.sum[0].indices) if t.sum else None,
                "arg": t.sum[1].value if t.sum else None,
            }
            for t in rec.right.terms
        ],
    }


def record_from_obj(obj: dict) -> IdentityRecord:
    left = tuple((IndexVector(f["indices"]), ArgTag(f["arg"])) for f in obj["left"])
    terms = []
    for t in obj["terms"]:
        cmono = ConstantMonomial(tuple(t["consts"].get(sym, 0) for sym in CONST_SYMBOLS))
        summand = None
        if t["indices"] is not None:
            summand = (IndexVector(t["indices"]), ArgTag(t["arg"]))
        terms.append(Term(Fraction(t["num"], t["den"]), cmono, summand))
    return IdentityRecord(left, Expression.from_terms(terms), obj["weight"],
                          Provenance(obj["provenance"]))


def record_to_json(rec: IdentityRecord) -> str:
    return json.dumps(record_to_obj(rec), indent=2, sort_keys=True)


def corpus_to_json(corpus: CorpusFile) -> str:
    obj = {
        "format": "hsums-identities",
        "version": corpus.version,
        "weight": corpus.weight,
        "records": [record_to_obj(rec) for rec in corpus.records],
    }
    return json.dumps(obj, indent=2, sort_keys=True)


def corpus_from_json(text: str) -> CorpusFile:
    obj = json.loads(text)
    if obj.get("format") != "hsums-identities":
        raise CorpusValidationError("not a structured identity corpus")
    records = tuple(record_from_obj(r) for r in obj["records"])
    return CorpusFile(obj["version"], obj["weight"], records)
