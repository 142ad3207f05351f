"""Derivation, verification, reflection, and composition of reflection identities.

A reflection identity decomposes a product of harmonic sums taken at z and
at -1-z into a linear combination of single sums of those two arguments
plus constant monomials.  Derivation samples the product and a weight-graded
ansatz at random complex points, solves the overdetermined linear system at
extended precision, and reconstructs exact rational coefficients; identities
are then re-verified at fresh points.

Constant monomials are constant functions of z, so ansatz entries sharing
an index vector give proportional sample columns and the pure constants
give a rank-one block.  The sampled system therefore carries one column
per (index vector, argument) pair plus a single aggregated constant
column, and each solved aggregate is split over its attached constant
monomials afterwards by integer relation detection; rational linear
independence of the constant alphabet is what separates them, exactly as
comparing coefficients of irreducible constants does symbolically.  The
full unknown count (185 at weight 4) is recovered.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath as mp

from .core import (ArgTag, ConstantMonomial, Expression, IndexLike, IndexVector,
                   Term, as_indices, basis_index_set, build_ansatz,
                   build_constants, weight as vweight)
from .continuation import EvalContext, evaluate, evaluate_expression, laurent_coefficients
from .errors import (IllConditionedError, MissingBilinearError,
                     ReconstructionFailedError, VerificationFailedError)
from .shuffle import _stuffle

DEFAULT_PLAN_SEED = 20240601
DEFAULT_VERIFY_SEED = 715


class Provenance(Enum):
    CORPUS = "corpus"
    DERIVED = "derived"
    REFLECTED = "reflected"
    COMPOSED = "composed"


@dataclass(frozen=True)
class IdentityRecord:
    """A product of tagged harmonic sums equated to a canonical Expression.

    ``left`` holds the product factors (two for the bilinear corpus records;
    composed records may carry three, and degenerate single-factor records
    are allowed for testing).  ``provenance`` records the last operation
    that produced the record.
    """

    left: Tuple[Tuple[IndexVector, ArgTag], ...]
    right: Expression
    weight: int
    provenance: Provenance = Provenance.CORPUS

    def __post_init__(self):
        if not self.left:
            raise ValueError("left side needs at least one factor")
        wsum = sum(v.weight for v, _ in self.left)
        if wsum != self.weight:
            raise ValueError(f"left weight {wsum} != declared weight {self.weight}")
        if self.right.terms:
            hw = self.right.homogeneous_weight()
            if hw != self.weight:
                raise ValueError(f"right side weight {hw} != declared weight {self.weight}")
        allowed = basis_index_set()
        for t in self.right.terms:
            if t.sum is not None and t.sum[0].indices not in allowed:
                raise ValueError(f"right-side sum {t.sum[0]} outside the weight<=4 bases")

    @property
    def is_bilinear(self) -> bool:
        return (len(self.left) == 2 and self.left[0][1] is ArgTag.Z
                and self.left[1][1] is ArgTag.REFL)

    @property
    def key(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        if not self.is_bilinear:
            raise ValueError("key is defined for bilinear records only")
        return (self.left[0][0].indices, self.left[1][0].indices)

    def same_identity(self, other: "IdentityRecord") -> bool:
        """Mathematical equality, ignoring provenance."""
        return (self.left == other.left and self.right == other.right
                and self.weight == other.weight)


@dataclass(frozen=True)
class SamplePlan:
    """Deterministic sample-point generator for derivations.

    The point set mixes three seeded components: small circles around the
    poles of both argument families (orders of the local Laurent data are
    what separates deep index vectors), a scatter strip, and a wide band
    reaching into the asymptotic regime.  A scatter-only strip leaves the
    sampled ansatz numerically rank-deficient at any affordable precision;
    the mixture keeps the smallest normal-equation pivot near 1e-133, which
    80-digit evaluation resolves comfortably.
    """

    count: int = 250
    seed: int = DEFAULT_PLAN_SEED
    re_min: float = -2.0
    re_max: float = 8.0
    im_min: float = 0.3
    im_max: float = 4.0
    exclusion: float = 1e-2
    circle_poles: int = 12
    circle_points: int = 6
    circle_radius: float = 0.25
    wide_fraction: float = 0.2

    def __post_init__(self):
        if self.count < 200:
            raise ValueError("plan needs at least 200 points")
        if self.im_min < self.exclusion:
            raise ValueError("imaginary part must clear the integer exclusion band")
        n_circle = 2 * self.circle_poles * self.circle_points
        if self.count < n_circle + 40:
            raise ValueError("plan too small for the circle component")

    def points(self) -> List[complex]:
        import math

        rng = random.Random(self.seed)
        pts: List[complex] = []
        r = self.circle_radius
        for m in range(1, self.circle_poles + 1):
            for center in (-m, m - 1):
                for _ in range(self.circle_points):
                    ang = rng.uniform(0.15, 2.99)
                    pts.append(complex(center + r * math.cos(ang),
                                       r * math.sin(ang)))
        n_wide = int(self.wide_fraction * (self.count - len(pts)))
        while len(pts) < self.count - n_wide:
            z = complex(rng.uniform(self.re_min, self.re_max),
                        rng.uniform(self.im_min, self.im_max))
            zr = -1 - z
            if min(abs(z - round(z.real)), abs(zr - round(zr.real))) < self.exclusion:
                continue
            pts.append(z)
        while len(pts) < self.count:
            pts.append(complex(rng.uniform(8.0, 40.0), rng.uniform(0.3, 20.0)))
        return pts


def sample_points(n: int, seed: int, re_min=-2.0, re_max=1.0,
                  im_min=0.3, im_max=2.0, exclusion=1e-2) -> List[complex]:
    """Seeded points in the verification strip, clear of integers for z and -1-z."""
    rng = random.Random(seed)
    out: List[complex] = []
    while len(out) < n:
        z = complex(rng.uniform(re_min, re_max), rng.uniform(im_min, im_max))
        zr = -1 - z
        if min(abs(z - round(z.real)), abs(zr - round(zr.real))) < exclusion:
            continue
        out.append(z)
    return out


def left_value(rec: IdentityRecord, z, ctx: EvalContext):
    """Product of the record's left-side factors at the point z."""
    with mp.workdps(ctx.dps_work):
        zc = mp.mpc(z)
        val = mp.mpc(1)
        for v, tag in rec.left:
            val *= evaluate(v, zc if tag is ArgTag.Z else -1 - zc, ctx)
        return val


@dataclass
class VerificationReport:
    passed: bool
    tolerance: float
    max_residual: object
    residuals: List[object]
    points: List[complex]

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        return (f"{status}: max residual {mp.nstr(self.max_residual, 3)} over "
                f"{len(self.points)} points at tol {self.tolerance:g}")


def verify_identity(rec: IdentityRecord, points: int = 20, tol: float = 1e-10,
                    seed: int = DEFAULT_VERIFY_SEED,
                    ctx: Optional[EvalContext] = None) -> VerificationReport:
    """Compare left product and right expression at seeded random points."""
    ctx = ctx or EvalContext()
    pts = sample_points(points, seed)
    residuals = []
    with mp.workdps(ctx.dps_work):
        for z in pts:
            residuals.append(abs(left_value(rec, z, ctx)
                                 - evaluate_expression(rec.right, z, ctx)))
        worst = max(residuals)
    return VerificationReport(bool(worst <= tol), tol, worst, residuals, pts)


def reflect(rec: IdentityRecord) -> IdentityRecord:
    """Swap the z and -1-z argument slots throughout the identity.

    Applying reflect twice restores the original left and right sides;
    provenance always records the reflection step.
    """
    new_left = tuple(sorted(((v, tag.flipped()) for v, tag in rec.left),
                            key=lambda p: p[1].rank))
    return IdentityRecord(new_left, rec.right.tags_flipped(), rec.weight,
                          Provenance.REFLECTED)


def _corpus_get(corpus, a_idx: Tuple[int, ...], b_idx: Tuple[int, ...]):
    if hasattr(corpus, "lookup"):
        return corpus.lookup(a_idx, b_idx)
    return corpus.get((a_idx, b_idx))


def compose_trilinear(a: IndexLike, b: IndexLike, c: IndexLike,
                      corpus) -> IdentityRecord:
    """Express S_a(z) * S_b(-1-z) * S_c(-1-z) through bilinear identities.

    The same-argument product S_b * S_c is decomposed by the quasi-shuffle
    relation and every resulting bilinear product is substituted from the
    corpus (falling back to the argument-swapped record when only the
    mirrored key is stored).
    """
    a_idx, b_idx, c_idx = as_indices(a), as_indices(b), as_indices(c)
    total = vweight(a_idx) + vweight(b_idx) + vweight(c_idx)
    right = Expression()
    for w_idx, coeff in _stuffle(b_idx, c_idx):
        rec = _corpus_get(corpus, a_idx, w_idx)
        if rec is None:
            mirrored = _corpus_get(corpus, w_idx, a_idx)
            rec = reflect(mirrored) if mirrored is not None else None
        if rec is None:
            raise MissingBilinearError(
                f"no bilinear identity for S{list(a_idx)}(z) * S{list(w_idx)}(-1-z) "
                f"(total weight {total})")
        right = right + rec.right.scaled(coeff)
    left = ((IndexVector(a_idx), ArgTag.Z), (IndexVector(b_idx), ArgTag.REFL),
            (IndexVector(c_idx), ArgTag.REFL))
    return IdentityRecord(left, right, total, Provenance.COMPOSED)


@dataclass
class PoleSeparationReport:
    z0: complex
    orders: List[int]
    lhs_coeffs: List[object]
    part_coeffs: List[object]
    max_mismatch: object
    passed: bool


def pole_separation_check(rec: IdentityRecord, m: int,
                          ctx: Optional[EvalContext] = None,
                          side: ArgTag = ArgTag.Z, tol: float = 1e-8,
                          radius: float = 0.25) -> PoleSeparationReport:
    """Check that one argument family alone carries the singular part.

    At z = -m the left product is singular only through its z-tagged
    factors, so its Laurent singular part must match the summed singular
    parts of the z-tagged right-hand terms; the -1-z family is checked
    symmetrically at z = m-1.
    """
    if not 1 <= m <= 4:
        raise ValueError("pole index m must be in 1..4")
    ctx = ctx or EvalContext()
    z0 = -m if side is ArgTag.Z else m - 1
    orders = list(range(-rec.weight, 0))
    part = Expression.from_terms(
        t for t in rec.right.terms if t.sum is not None and t.sum[1] is side)
    lhs = laurent_coefficients(lambda z: left_value(rec, z, ctx), z0, orders,
                               ctx, radius=radius)
    phs = laurent_coefficients(lambda z: evaluate_expression(part, z, ctx), z0,
                               orders, ctx, radius=radius)
    with mp.workdps(ctx.dps_work):
        worst = max(abs(x - y) for x, y in zip(lhs, phs))
    return PoleSeparationReport(z0, orders, lhs, phs, worst, bool(worst <= tol))


# ---------------------------------------------------------------------------
# Derivation: sampling, least squares, rational reconstruction
# ---------------------------------------------------------------------------


def _mpf_to_fraction(x) -> Fraction:
    sign, man, exp, _ = mp.mpf(x)._mpf_
    if man == 0:
        return Fraction(0)
    val = Fraction(man) * Fraction(2) ** exp
    return -val if sign else val


def _reconstruct_rational(x, tol, max_den: int = 1000) -> Fraction:
    if abs(x) <= tol:
        return Fraction(0)
    cand = _mpf_to_fraction(x).limit_denominator(max_den)
    if abs(x - mp.mpf(cand.numerator) / cand.denominator) > tol:
        raise ReconstructionFailedError(
            f"{mp.nstr(mp.mpf(x), 25)} is not within {mp.nstr(mp.mpf(tol), 3)} "
            f"of a rational with denominator <= {max_den}")
    return cand


class DerivationWorkspace:
    """Sampled ansatz matrix and its factorization, shared across derivations.

    Building the matrix dominates the cost of a derivation; with the
    factorization cached, each additional product on the same plan and
    context needs only a pair of triangular solves.
    """

    def __init__(self, plan: SamplePlan, ctx: EvalContext, weight: int = 4):
        if ctx.digits < 60:
            raise ValueError("derivation requires an EvalContext with >= 60 digits")
        if weight not in (2, 3, 4):
            raise ValueError("derivation weight must be 2, 3, or 4")
        self.plan = plan
        self.ctx = ctx
        self.weight = weight
        self.dps_solve = 2 * ctx.digits + 10
        entries = build_ansatz(weight)
        self.const_monos = [cm for cm, v in entries if v is None]
        # Ansatz entries grouped by index vector, preserving first-appearance
        # order; the sampled matrix gets one column per vector and argument.
        self.vector_groups: List[Tuple[IndexVector, List[ConstantMonomial]]] = []
        by_vec: Dict[Tuple[int, ...], List[ConstantMonomial]] = {}
        for cm, v in entries:
            if v is None:
                continue
            if v.indices not in by_vec:
                by_vec[v.indices] = []
                self.vector_groups.append((v, by_vec[v.indices]))
            by_vec[v.indices].append(cm)
        self.unknown_count = (2 * sum(len(ms) for _, ms in self.vector_groups)
                              + len(self.const_monos))
        self.points = plan.points()
        self._build_matrix()
        self._factorize()

    # Column layout: one bare-sum column per vector tagged Z, the same
    # tagged REFL, then one aggregated constant column.
    def _build_matrix(self):
        ctx = self.ctx
        cols_re: List[List[mp.mpf]] = []
        cols_im: List[List[mp.mpf]] = []
        with mp.workdps(ctx.dps_work):
            zs = [mp.mpc(p) for p in self.points]
            args = {ArgTag.Z: zs, ArgTag.REFL: [-1 - z for z in zs]}
            for tag in (ArgTag.Z, ArgTag.REFL):
                for v, _ in self.vector_groups:
                    col = [evaluate(v, z, ctx) for z in args[tag]]
                    cols_re.append([mp.re(x) for x in col])
                    cols_im.append([mp.im(x) for x in col])
            one = mp.mpf(1)
            cols_re.append([one] * len(zs))
            cols_im.append([mp.mpf(0)] * len(zs))
        self._zs = zs
        self._col_meta = ([(v, ms, ArgTag.Z) for v, ms in self.vector_groups]
                          + [(v, ms, ArgTag.REFL) for v, ms in self.vector_groups]
                          + [(None, self.const_monos, None)])
        with mp.workdps(self.dps_solve):
            self.scales = [max(max(abs(x) for x in cr), max(abs(x) for x in ci))
                           for cr, ci in zip(cols_re, cols_im)]
            self.scales = [s if s > 0 else mp.mpf(1) for s in self.scales]
            self.cols_re = [[x / s for x in cr] for cr, s in zip(cols_re, self.scales)]
            self.cols_im = [[x / s for x in ci] for ci, s in zip(cols_im, self.scales)]

    def _factorize(self):
        nc = len(self.cols_re)
        with mp.workdps(self.dps_solve):
            g = [[mp.mpf(0)] * nc for _ in range(nc)]
            for j in range(nc):
                rj, ij = self.cols_re[j], self.cols_im[j]
                for k in range(j, nc):
                    rk, ik = self.cols_re[k], self.cols_im[k]
                    s = mp.fsum(a * b for a, b in zip(rj, rk))
                    s += mp.fsum(a * b for a, b in zip(ij, ik))
                    g[j][k] = s
                    g[k][j] = s
            lower = [[mp.mpf(0)] * nc for _ in range(nc)]
            dmin = dmax = None
            for i in range(nc):
                for j in range(i + 1):
                    s = g[i][j] - mp.fsum(lower[i][k] * lower[j][k] for k in range(j))
                    if i == j:
                        if s <= 0:
                            raise IllConditionedError(
                                f"normal matrix loses positive definiteness at column {i}")
                        dmin = s if dmin is None or s < dmin else dmin
                        dmax = s if dmax is None or s > dmax else dmax
                        lower[i][i] = mp.sqrt(s)
                    else:
                        lower[i][j] = s / lower[j][j]
            # Guard 1: pivots must clear the data-noise floor, else the
            # sampled system is rank-deficient at this precision.
            noise = mp.mpf(10) ** (-(self.ctx.digits + 8))
            floor = len(self.points) * noise ** 2
            if dmin < 100 * floor:
                raise IllConditionedError(
                    f"smallest pivot {mp.nstr(dmin, 3)} sits at the data-noise "
                    f"floor {mp.nstr(floor, 3)}; the sampled system is "
                    f"rank-deficient at {self.ctx.digits} digits")
            self._lower = lower
            # Guard 2: propagated data noise must leave enough accuracy to
            # separate bounded-denominator rationals.  Cholesky pivots only
            # bound the smallest singular value from above, so estimate it
            # properly by inverse iteration with the factorization.
            nc = len(lower)
            v = [mp.mpf(1) / mp.sqrt(nc)] * nc
            lam = None
            for _ in range(12):
                w = self._tri_solve(v)
                norm = mp.sqrt(mp.fsum(x * x for x in w))
                lam = 1 / norm
                v = [x / norm for x in w]
            sigma_min = mp.sqrt(lam)
            err_est = noise * len(self.points) / sigma_min
            if err_est > mp.mpf(10) ** (-11):
                raise IllConditionedError(
                    f"estimated coefficient error {mp.nstr(err_est, 3)} "
                    f"(sigma_min ~ {mp.nstr(sigma_min, 3)}) is too large for "
                    f"rational reconstruction; raise ctx.digits")
            self.condition_estimate = dmax / lam
            self.coefficient_error_estimate = err_est

    def _tri_solve(self, h):
        """Solve (L L^T) x = h with the cached Cholesky factor."""
        lower = self._lower
        nc = len(lower)
        y = [mp.mpf(0)] * nc
        for i in range(nc):
            y[i] = (h[i] - mp.fsum(lower[i][k] * y[k] for k in range(i))) / lower[i][i]
        x = [mp.mpf(0)] * nc
        for i in range(nc - 1, -1, -1):
            x[i] = (y[i] - mp.fsum(lower[k][i] * x[k] for k in range(i + 1, nc))) \
                / lower[i][i]
        return x

    def _solve(self, rhs_re, rhs_im):
        nc = len(self.cols_re)
        with mp.workdps(self.dps_solve):
            h = []
            for j in range(nc):
                s = mp.fsum(a * b for a, b in zip(self.cols_re[j], rhs_re))
                s += mp.fsum(a * b for a, b in zip(self.cols_im[j], rhs_im))
                h.append(s)
            x = self._tri_solve(h)
            return [xi / s for xi, s in zip(x, self.scales)]

    # Reconstruction only needs to separate rationals with denominator
    # <= 1000 (spacing >= 1e-6); the fresh-point verification afterwards
    # certifies the reconstructed identity exactly.
    REC_TOL = 1e-12

    @property
    def _split_tol(self):
        # Integer-relation detection must run at the accuracy of the solved
        # coefficients, not at the reconstruction tolerance: mp.pslq keys
        # its working precision to tol, and a loose tol admits spurious
        # noise-level relations before the true bounded-height one.
        return mp.mpf(10) ** (-max(20, self.ctx.digits // 4))

    def _split_over_monomials(self, x, monos: Sequence[ConstantMonomial],
                              what: str) -> List[Fraction]:
        """Write an aggregated coefficient as a rational combination of monomials."""
        tol = mp.mpf(self.REC_TOL)
        with mp.workdps(self.dps_solve):
            if abs(x) <= tol:
                return [Fraction(0)] * len(monos)
            kvals = [self.ctx.cmono_value(cm) for cm in monos]
            if len(monos) == 1:
                return [_reconstruct_rational(x / kvals[0], tol)]
            rel = mp.pslq([x] + kvals, tol=self._split_tol,
                          maxcoeff=10 ** 6, maxsteps=50000)
            if not rel or rel[0] == 0:
                raise ReconstructionFailedError(
                    f"no bounded integer relation splits the {what} coefficient "
                    f"{mp.nstr(x, 25)} over its constant monomials")
            qs = [Fraction(-rel[i + 1], rel[0]) for i in range(len(monos))]
            if any(q.denominator > 1000 for q in qs):
                raise ReconstructionFailedError(
                    f"{what} split needs denominator > 1000")
            resid = abs(x - mp.fsum(mp.mpf(q.numerator) / q.denominator * k
                                    for q, k in zip(qs, kvals)))
            if resid > self._split_tol * (1 + abs(x)):
                raise ReconstructionFailedError(
                    f"{what} split residual {mp.nstr(resid, 3)} above tolerance")
            return qs

    def derive(self, a: IndexLike, b: IndexLike) -> IdentityRecord:
        a_idx, b_idx = as_indices(a), as_indices(b)
        if vweight(a_idx) + vweight(b_idx) != self.weight:
            raise ValueError(
                f"product weight {vweight(a_idx) + vweight(b_idx)} does not match "
                f"workspace weight {self.weight}")
        ctx = self.ctx
        with mp.workdps(ctx.dps_work):
            lhs = [evaluate(a_idx, z, ctx) * evaluate(b_idx, -1 - z, ctx)
                   for z in self._zs]
        with mp.workdps(self.dps_solve):
            x = self._solve([mp.re(v) for v in lhs], [mp.im(v) for v in lhs])
            terms = []
            for (v, monos, tag), xi in zip(self._col_meta, x):
                if v is None:
                    continue
                what = f"S{list(v.indices)}@{tag.value}"
                for q, cm in zip(self._split_over_monomials(xi, monos, what), monos):
                    if q:
                        terms.append(Term(q, cm, (v, tag)))
            for q, cm in zip(self._split_over_monomials(x[-1], self.const_monos,
                                                        "constant"),
                             self.const_monos):
                if q:
                    terms.append(Term(q, cm, None))
        rec = IdentityRecord(
            ((IndexVector(a_idx), ArgTag.Z), (IndexVector(b_idx), ArgTag.REFL)),
            Expression.from_terms(terms), self.weight, Provenance.DERIVED)
        report = verify_identity(rec, points=20, tol=1e-10,
                                 seed=self.plan.seed + 1, ctx=ctx)
        if not report.passed:
            raise VerificationFailedError(
                f"derived identity for {a_idx} x {b_idx} fails fresh-point check: "
                f"{report}")
        return rec


_WORKSPACES: Dict[tuple, DerivationWorkspace] = {}


def derivation_workspace(plan: SamplePlan, ctx: EvalContext,
                         weight: int = 4) -> DerivationWorkspace:
    key = (plan, id(ctx), weight)
    ws = _WORKSPACES.get(key)
    if ws is None:
        ws = DerivationWorkspace(plan, ctx, weight)
        _WORKSPACES[key] = ws
    return ws


def derive_identity(a: IndexLike, b: IndexLike, plan: Optional[SamplePlan] = None,
                    ctx: Optional[EvalContext] = None,
                    weight: Optional[int] = None) -> IdentityRecord:
    """Derive the reflection identity for S_a(z) * S_b(-1-z).

    Same plan and context give byte-identical records.  Raises
    IllConditionedError, ReconstructionFailedError, or
    VerificationFailedError when the solve cannot be certified.
    """
    a_idx, b_idx = as_indices(a), as_indices(b)
    w = weight if weight is not None else vweight(a_idx) + vweight(b_idx)
    plan = plan or SamplePlan()
    ctx = ctx or EvalContext(digits=100)
    return derivation_workspace(plan, ctx, w).derive(a_idx, b_idx)
