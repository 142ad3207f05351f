"""Extended-precision evaluation of harmonic sums continued off the integers.

The continuation implemented here is the meromorphic function agreeing with
the finite nested sum at even positive integers.  Evaluation keeps both
parity branches internally: the even branch E and odd branch O of a sum
with head index a and tail t satisfy the paired descent relations

    E_v(z) = O_v(z+1) - sign(a) * (z+1)^(-|a|) * O_t(z+1)
    O_v(z) = E_v(z+1) -           (z+1)^(-|a|) * E_t(z+1)

which follow from the one-step recurrence of the finite sum restricted to
even/odd upper limits.  An argument is shifted right until its real part
reaches the context's shift target and the shifted value is read off a
large-argument expansion in ln^j(w)/w^k.  Expansion coefficients are
generated recursively over depth: the non-alternating part of the summand
goes through Euler-Maclaurin summation, the alternating part through Boole
summation, and the two free constants of every expansion are fixed by
matching the exact finite sum at one large even and one large odd integer.
Each generated expansion is then validated against finite sums at two more
integers before use.
"""

from __future__ import annotations

from collections import OrderedDict
from typing import Dict, Iterable, Optional, Tuple

import mpmath as mp

from .core import IndexLike, as_indices, _finite_sum
from .errors import PoleProximityError, PrecisionExhaustedError

# Minimum admissible distance from an evaluation point to a pole.
POLE_GUARD = 1e-3

_MAX_WEIGHT = 4

# (indices, dps, tail_order, match_point) -> _Expansion
_EXPANSIONS: Dict[tuple, "_Expansion"] = {}


def constant_value(sym: str, digits: int):
    """Value of one alphabet constant, correct to the requested digits."""
    with mp.workdps(digits + 10):
        if sym == "ln2":
            return mp.log(2)
        if sym == "z2":
            return mp.pi ** 2 / 6
        if sym == "z3":
            return mp.zeta(3)
        if sym == "Li4h":
            return mp.polylog(4, mp.mpf(1) / 2)
    raise ValueError(f"unknown constant symbol {sym!r}")


class EvalContext:
    """Precision and truncation parameters plus memoization state.

    Treat instances as immutable after construction; the internal caches
    are transparent (results do not depend on cache state) and safe to
    share between concurrent readers.
    """

    def __init__(self, digits: int = 30, shift_target: Optional[int] = None,
                 tail_order: Optional[int] = None):
        if digits < 30:
            raise ValueError("digits must be at least 30")
        self.digits = int(digits)
        # The alternating-summation tail decays like (K/(pi*e*R))^K, which
        # bottoms out near exp(-pi*R); R ~ 0.9*digits with K ~ 2.4*R keeps
        # the truncation error comfortably below 10^-(digits+8).
        self.shift_target = int(shift_target) if shift_target is not None \
            else max(30, -(-9 * self.digits // 10))
        if self.shift_target < 20:
            raise ValueError("shift_target must be at least 20")
        self.tail_order = int(tail_order) if tail_order is not None \
            else -(-12 * self.shift_target // 5)
        # First even integer past the shift target; expansion constants are
        # matched against exact finite sums there.
        self.match_point = self.shift_target + 2 - (self.shift_target % 2)
        self.dps_work = self.digits + 15
        self._values: Dict[tuple, mp.mpc] = {}
        self._sessions: "OrderedDict[mp.mpc, _Session]" = OrderedDict()
        self._consts: Dict[str, mp.mpf] = {}
        self._cmono_vals: Dict[tuple, mp.mpf] = {}

    def __repr__(self):
        return (f"EvalContext(digits={self.digits}, shift_target={self.shift_target}, "
                f"tail_order={self.tail_order})")

    # -- constant values -------------------------------------------------

    def const(self, sym: str):
        v = self._consts.get(sym)
        if v is None:
            v = constant_value(sym, self.dps_work)
            self._consts[sym] = v
        return v

    def cmono_value(self, cmono):
        v = self._cmono_vals.get(cmono.exps)
        if v is None:
            with mp.workdps(self.dps_work):
                v = mp.mpf(1)
                for sym, e in cmono.items():
                    v *= self.const(sym) ** e
            self._cmono_vals[cmono.exps] = v
        return v

    # -- session handling ------------------------------------------------

    def _session(self, z) -> "_Session":
        s = self._sessions.get(z)
        if s is None:
            s = _Session(z, self)
            self._sessions[z] = s
            while len(self._sessions) > 8:
                self._sessions.popitem(last=False)
        else:
            self._sessions.move_to_end(z)
        return s

    def reported_error_bound(self, v: IndexLike):
        """Conservative absolute error bound for evaluate() on this vector."""
        indices = as_indices(v)
        with mp.workdps(self.dps_work):
            worst = mp.mpf(10) ** (-(self.digits + 3))
            for i in range(len(indices)):
                e = _EXPANSIONS.get(self._expansion_key(indices[i:]))
                if e is not None:
                    worst = max(worst, e.resid)
            return worst * 100

    def _expansion_key(self, indices: Tuple[int, ...]):
        return (indices, self.dps_work, self.tail_order, self.match_point)


_DEFAULT_CONTEXT: Optional[EvalContext] = None


def default_context() -> EvalContext:
    global _DEFAULT_CONTEXT
    if _DEFAULT_CONTEXT is None:
        _DEFAULT_CONTEXT = EvalContext()
    return _DEFAULT_CONTEXT


# ---------------------------------------------------------------------------
# Large-argument expansions
# ---------------------------------------------------------------------------
# A polynomial here is a dict {(j, k): coeff} representing
# sum_jk coeff * ln(w)^j / w^k.


class _Expansion:
    __slots__ = ("A", "B", "resid")

    def __init__(self, A, B, resid):
        self.A = A        # non-alternating part
        self.B = B        # coefficient of (-1)^n
        self.resid = resid


def _dpoly(p, K):
    out = {}
    for (j, k), c in p.items():
        if k + 1 > K:
            continue
        if j:
            key = (j - 1, k + 1)
            out[key] = out.get(key, 0) + j * c
        if k:
            key = (j, k + 1)
            out[key] = out.get(key, 0) - k * c
    return out


def _int_poly(p, K):
    out = {}
    for (j, k), c in p.items():
        if k == 0:
            raise AssertionError("cannot integrate a pure ln power here")
        if k == 1:
            key = (j + 1, 0)
            out[key] = out.get(key, 0) + c / (j + 1)
            continue
        f0, jj = c, j
        while True:
            key = (jj, k - 1)
            out[key] = out.get(key, 0) - f0 / (k - 1)
            if jj == 0:
                break
            f0 = f0 * jj / (k - 1)
            jj -= 1
    return out


def _acc(out, p, factor):
    for key, c in p.items():
        out[key] = out.get(key, 0) + factor * c


def _em_tail(f, K):
    """n-dependent part of sum_{i<=n} f(i) by Euler-Maclaurin (no constant)."""
    out = _int_poly(f, K)
    _acc(out, f, mp.mpf(1) / 2)
    der = _dpoly(f, K)
    s = 1
    while der:
        _acc(out, der, mp.bernoulli(2 * s) / mp.factorial(2 * s))
        der = _dpoly(_dpoly(der, K), K)
        s += 1
    return out


def _boole_tail(g, K):
    """Factor of (-1)^n in sum_{i<=n} (-1)^i g(i) (no constant)."""
    out = {}
    _acc(out, g, mp.mpf(1) / 2)
    der = _dpoly(g, K)
    s = 1
    while der:
        _acc(out, der, (2 ** (2 * s) - 1) * mp.bernoulli(2 * s) / mp.factorial(2 * s))
        der = _dpoly(_dpoly(der, K), K)
        s += 1
    return out


def _poly_at(p, lnpows, invpows):
    total = mp.mpf(0)
    for (j, k), c in p.items():
        total += c * lnpows[j] * invpows[k]
    return total


def _pows_for(x, K):
    lnx = mp.log(x)
    lnpows = [mp.mpf(1) if isinstance(x, mp.mpf) else mp.mpc(1)]
    for _ in range(6):
        lnpows.append(lnpows[-1] * lnx)
    inv = 1 / x
    invpows = [lnpows[0]]
    for _ in range(K):
        invpows.append(invpows[-1] * inv)
    return lnpows, invpows


def _fraction_to_mpf(fr):
    return mp.mpf(fr.numerator) / fr.denominator


def _expansion(indices: Tuple[int, ...], ctx: EvalContext) -> _Expansion:
    key = ctx._expansion_key(indices)
    hit = _EXPANSIONS.get(key)
    if hit is not None:
        return hit
    with mp.workdps(ctx.dps_work):
        if not indices:
            exp = _Expansion({(0, 0): mp.mpf(1)}, {}, mp.mpf(0))
            _EXPANSIONS[key] = exp
            return exp
        tail = _expansion(indices[1:], ctx)
        K = ctx.tail_order
        m = abs(indices[0])

        def shifted(part):
            return {(j, k + m): c for (j, k), c in part.items() if k + m <= K}

        if indices[0] > 0:
            f, g = shifted(tail.A), shifted(tail.B)
        else:
            f, g = shifted(tail.B), shifted(tail.A)
        A = _em_tail(f, K)
        B = _boole_tail(g, K)

        n0 = ctx.match_point
        exact = [_fraction_to_mpf(_finite_sum(indices, n0 + i)) for i in range(4)]
        at = []
        for i in range(4):
            lnpows, invpows = _pows_for(mp.mpf(n0 + i), K)
            at.append((_poly_at(A, lnpows, invpows), _poly_at(B, lnpows, invpows)))
        e_even = exact[0] - at[0][0] - at[0][1]
        e_odd = exact[1] - at[1][0] + at[1][1]
        ca = (e_even + e_odd) / 2
        cb = (e_even - e_odd) / 2
        A[(0, 0)] = A.get((0, 0), mp.mpf(0)) + ca
        B[(0, 0)] = B.get((0, 0), mp.mpf(0)) + cb

        resid = max(abs(exact[2] - (at[2][0] + ca) - (at[2][1] + cb)),
                    abs(exact[3] - (at[3][0] + ca) + (at[3][1] + cb)))
        if resid > mp.mpf(10) ** (-(ctx.digits + 3)):
            raise PrecisionExhaustedError(
                f"expansion for {indices} validates to {mp.nstr(resid, 5)} "
                f"at tail_order={K}, shift_target={ctx.shift_target}; "
                f"raise tail_order or shift_target")
        exp = _Expansion(A, B, resid)
        _EXPANSIONS[key] = exp
        return exp


# ---------------------------------------------------------------------------
# Branch evaluation
# ---------------------------------------------------------------------------


class _Session:
    """Per-argument scratch state: descent values and cached powers."""

    __slots__ = ("z", "m", "vals", "pows", "lnpows", "invpows")

    def __init__(self, z, ctx: EvalContext):
        self.z = z
        r = mp.re(z)
        self.m = int(mp.ceil(ctx.shift_target - r)) if r < ctx.shift_target else 0
        self.vals = {}
        self.pows = {}
        lnpows, invpows = _pows_for(z + self.m, ctx.tail_order)
        self.lnpows = lnpows
        self.invpows = invpows

    def power(self, j, mm):
        key = (j, mm)
        v = self.pows.get(key)
        if v is None:
            v = (self.z + j) ** (-mm)
            self.pows[key] = v
        return v


def _branch_at(ctx, session, indices, q, j):
    """Branch value at z + j; q = +1 for the even branch, -1 for the odd."""
    if not indices:
        return mp.mpf(1)
    key = (indices, q, j)
    v = session.vals.get(key)
    if v is not None:
        return v
    if j >= session.m:
        e = _expansion(indices, ctx)
        v = _poly_at(e.A, session.lnpows, session.invpows)
        b = _poly_at(e.B, session.lnpows, session.invpows)
        v = v + b if q > 0 else v - b
    else:
        head = indices[0]
        src = _branch_at(ctx, session, indices, -q, j + 1)
        tail = _branch_at(ctx, session, indices[1:], -q, j + 1)
        step = session.power(j + 1, abs(head)) * tail
        if q > 0 and head < 0:
            v = src + step
        else:
            v = src - step
    session.vals[key] = v
    return v


def _pole_distance(z):
    k = int(mp.floor(-mp.re(z) + mp.mpf(1) / 2))
    best = None
    for kk in (k - 1, k, k + 1):
        if kk < 1:
            continue
        d = abs(z + kk)
        if best is None or d < best:
            best = d
    return best


def evaluate(v: IndexLike, z, ctx: Optional[EvalContext] = None):
    """Continuation of the harmonic sum with index vector v at complex z.

    Agrees with finite_sum(v, n) at even positive integers; absolute error
    is bounded by 10**(5 - ctx.digits).  Raises PoleProximityError within
    1e-3 of a pole (the negative integers) and PrecisionExhaustedError if
    the internal expansion cannot certify the requested accuracy.
    """
    ctx = ctx or default_context()
    indices = as_indices(v)
    if sum(abs(a) for a in indices) > _MAX_WEIGHT:
        raise ValueError(f"weight of {indices} exceeds {_MAX_WEIGHT}")
    with mp.workdps(ctx.dps_work):
        zc = mp.mpc(z)
        dist = _pole_distance(zc)
        if dist is not None and dist < POLE_GUARD:
            raise PoleProximityError(zc, dist, POLE_GUARD)
        key = (indices, zc)
        val = ctx._values.get(key)
        if val is None:
            session = ctx._session(zc)
            val = _branch_at(ctx, session, indices, 1, 0)
            if not mp.isfinite(val):
                raise PrecisionExhaustedError(f"non-finite value for {indices} at {zc}")
            ctx._values[key] = val
        return val


def evaluate_expression(e, z, ctx: Optional[EvalContext] = None):
    """Value of an Expression at z, with REFL-tagged sums taken at -1-z."""
    from .core import ArgTag  # local import to keep module load light

    ctx = ctx or default_context()
    with mp.workdps(ctx.dps_work):
        zc = mp.mpc(z)
        zr = -1 - zc
        total = mp.mpc(0)
        for t in e.terms:
            val = _fraction_to_mpf(t.coeff) * ctx.cmono_value(t.cmono)
            if t.sum is not None:
                vec, tag = t.sum
                val = val * evaluate(vec, zc if tag is ArgTag.Z else zr, ctx)
            total += val
        return total


def laurent_coefficients(f, z0, orders: Iterable[int],
                         ctx: Optional[EvalContext] = None,
                         radius: float = 0.25, points: Optional[int] = None):
    """Laurent coefficients of f around z0 by discrete contour sampling.

    Samples f on a circle of the given radius (trapezoid rule; the rule is
    spectrally accurate for periodic integrands) and projects out the
    requested orders.  Orders may be negative (singular part) or
    non-negative.
    """
    ctx = ctx or default_context()
    if not (0.01 < radius <= 0.25):
        raise ValueError("radius must lie in (0.01, 0.25]")
    n = points if points is not None else max(64, 2 * ctx.digits)
    if n < 64:
        raise ValueError("need at least 64 contour points")
    with mp.workdps(ctx.dps_work):
        z0c = mp.mpc(z0)
        r = mp.mpf(radius)
        vals = [mp.mpc(f(z0c + r * mp.expjpi(mp.mpf(2 * jj) / n))) for jj in range(n)]
        out = []
        for m in orders:
            s = mp.mpc(0)
            for jj, fv in enumerate(vals):
                s += fv * mp.expjpi(mp.mpf(-2 * jj * m) / n)
            out.append(s / (n * r ** int(m)))
        return out
