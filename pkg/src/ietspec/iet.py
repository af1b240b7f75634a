"""Interval exchange transformations over exact scalars.

Conventions: intervals are half-open ``[a, b)``; symbols and positions are
1-based; the interval in position ``i`` is translated to position ``perm(i)``
(counted from the left), i.e. ``E(x) = x + d_i`` on ``I_i``.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .errors import (
    InvalidLengthsError,
    InvalidPermutationError,
    NonReturnError,
    OutOfDomainError,
    ParameterError,
)
from .scalar import QuadraticReal, common_field, compare, field_of

__all__ = [
    "Permutation",
    "ExchangeLengths",
    "Iet",
    "Itinerary",
    "InducedSystem",
    "KeaneReport",
    "make_iet",
    "evaluate",
    "orbit_symbols",
    "invert",
    "induce",
    "keane_check",
    "rotation",
    "golden_rotation",
    "GOLDEN",
]

DEFAULT_STEP_CAP = 10**7


@dataclass(frozen=True)
class Permutation:
    """Bijection of ``{1..n}`` given by its images ``(pi(1), ..., pi(n))``."""

    images: tuple

    def __post_init__(self):
        images = tuple(int(i) for i in self.images)
        object.__setattr__(self, "images", images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise InvalidPermutationError(f"{images} is not a permutation of 1..{len(images)}")
        if len(images) > 255:
            raise InvalidPermutationError("at most 255 intervals are supported")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation(tuple(inv))

    @cached_property
    def is_irreducible(self) -> bool:
        # pi({1..k}) == {1..k} iff max(pi(1..k)) == k
        top = 0
        for k, j in enumerate(self.images[:-1], start=1):
            top = max(top, j)
            if top == k:
                return False
        return True

    def cycles(self) -> list[tuple]:
        seen = set()
        out = []
        for start in range(1, self.n + 1):
            if start in seen:
                continue
            cyc = []
            i = start
            while i not in seen:
                seen.add(i)
                cyc.append(i)
                i = self(i)
            out.append(tuple(cyc))
        return out

    def __str__(self):
        return "(" + ",".join(map(str, self.images)) + ")"


@dataclass(frozen=True)
class ExchangeLengths:
    """Strictly positive lengths ``lambda_1..lambda_n`` with their exact total."""

    values: tuple
    total: object = None

    def __post_init__(self):
        _, vals = common_field(self.values)
        if not vals:
            raise InvalidLengthsError("no lengths given")
        for v in vals:
            if compare(v, 0) <= 0:
                raise InvalidLengthsError(f"length {v} is not positive")
        total = sum(vals[1:], vals[0])
        if self.total is not None and compare(self.total, total) != 0:
            raise InvalidLengthsError(f"lengths sum to {total}, not {self.total}")
        object.__setattr__(self, "values", tuple(vals))
        object.__setattr__(self, "total", total)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def normalized(self) -> "ExchangeLengths":
        return ExchangeLengths(tuple(v / self.total for v in self.values))


class Iet:
    """Interval exchange ``(perm, lengths)`` on ``[origin, origin + total)``.

    Instances are immutable; equality is field-by-field on permutation,
    lengths and origin.
    """

    __slots__ = ("perm", "lengths", "origin", "breakpoints", "displacements", "field", "__dict__")

    def __init__(self, perm: Permutation, lengths, origin=0):
        if not isinstance(perm, Permutation):
            perm = Permutation(tuple(perm))
        if not isinstance(lengths, ExchangeLengths):
            lengths = ExchangeLengths(tuple(lengths))
        if len(lengths) != perm.n:
            raise InvalidLengthsError(f"{len(lengths)} lengths for a permutation of {perm.n} symbols")
        fld = field_of(origin, *lengths.values)
        lam = [fld(v) for v in lengths.values]
        a = fld(origin)
        bps = [a]
        for v in lam:
            bps.append(bps[-1] + v)
        # start of each destination slot, in slot order
        inv = perm.inverse()
        slot_start = {}
        pos = a
        for s in range(1, perm.n + 1):
            i = inv(s)
            slot_start[i] = pos
            pos = pos + lam[i - 1]
        disp = tuple(slot_start[i] - bps[i - 1] for i in range(1, perm.n + 1))
        self.perm = perm
        self.lengths = ExchangeLengths(tuple(lam))
        self.origin = a
        self.breakpoints = tuple(bps)
        self.displacements = disp
        self.field = fld

    # basic data -------------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.perm.n

    @property
    def end(self):
        return self.breakpoints[-1]

    @property
    def total(self):
        return self.lengths.total

    @property
    def is_irreducible(self) -> bool:
        return self.perm.is_irreducible

    @property
    def is_normalized(self) -> bool:
        return self.origin == 0 and self.total == 1

    def interval(self, i: int) -> tuple:
        return self.breakpoints[i - 1], self.breakpoints[i]

    def index(self, x) -> int:
        """1-based index of the continuity interval containing ``x``."""
        i = bisect_right(self.breakpoints, x)
        if i < 1 or i > self.n:
            raise OutOfDomainError(f"{x} is outside [{self.origin}, {self.end})")
        return i

    def contains(self, x) -> bool:
        return self.origin <= x < self.end

    def __call__(self, x):
        return x + self.displacements[self.index(x) - 1]

    def image_intervals(self) -> list[tuple]:
        return [(lo + d, hi + d) for (lo, hi), d in zip(
            (self.interval(i) for i in range(1, self.n + 1)), self.displacements)]

    @cached_property
    def inverse(self) -> "Iet":
        return invert(self)

    def normalized(self) -> "Iet":
        return Iet(self.perm, self.lengths.normalized(), 0)

    def __eq__(self, other):
        if not isinstance(other, Iet):
            return NotImplemented
        return (
            self.perm == other.perm
            and self.lengths.values == other.lengths.values
            and self.origin == other.origin
        )

    def __hash__(self):
        return hash((self.perm, self.lengths.values, self.origin))

    def __repr__(self):
        lam = ", ".join(str(v) for v in self.lengths.values)
        return f"Iet(perm={self.perm}, lengths=({lam}), origin={self.origin})"


def make_iet(perm, lengths, origin=0) -> Iet:
    """Build the exchange of ``lengths`` (positive scalars) by ``perm``.

    Reducible permutations are accepted (``Iet.is_irreducible`` reports them).
    """
    return Iet(perm, lengths, origin)


def evaluate(E: Iet, x):
    return E(x)


def invert(E: Iet) -> Iet:
    """The inverse exchange: permutation ``pi^-1``, lengths read in slot order."""
    inv = E.perm.inverse()
    lam = tuple(E.lengths.values[inv(s) - 1] for s in range(1, E.n + 1))
    return Iet(inv, lam, E.origin)


# itineraries ---------------------------------------------------------------------


@dataclass(frozen=True)
class Itinerary:
    """Symbols ``omega_j`` for ``j`` in ``[offset, offset + len(symbols))``.

    ``symbols`` is a ``bytes`` object; symbol values are 1..n.
    """

    symbols: bytes
    base_point: object
    offset: int = 0

    @property
    def lo(self) -> int:
        return self.offset

    @property
    def hi(self) -> int:
        """Last index covered (inclusive)."""
        return self.offset + len(self.symbols) - 1

    def __len__(self):
        return len(self.symbols)

    def __getitem__(self, j: int) -> int:
        k = j - self.offset
        if k < 0 or k >= len(self.symbols):
            raise IndexError(f"index {j} outside [{self.lo}, {self.hi}]")
        return self.symbols[k]

    def covers(self, lo: int, hi: int) -> bool:
        return self.lo <= lo and hi <= self.hi

    def window(self, start: int, stop: int) -> bytes:
        """Symbols with indices in ``[start, stop)``."""
        if not self.covers(start, stop - 1):
            raise IndexError(f"window [{start}, {stop}) not covered by [{self.lo}, {self.hi}]")
        return self.symbols[start - self.offset: stop - self.offset]

    def word(self, start: int, stop: int) -> tuple:
        return tuple(self.window(start, stop))


class _FastOrbit:
    """Integer kernel for orbit scans.

    Every breakpoint, displacement and the running point are written over a
    common denominator as ``(P + Q*sqrt(d)) / R``; comparisons then only need
    integer arithmetic.
    """

    def __init__(self, E: Iet):
        vals = list(E.breakpoints) + list(E.displacements)
        d = E.field.d
        dens = []
        for v in vals:
            dens.append(v.integer_parts[2] if isinstance(v, QuadraticReal) else Fraction(v).denominator)
        R = 1
        for den in dens:
            R = R * den // math.gcd(R, den)
        self.R = R
        self.d = d or 0
        self.bps = [self._ints(v) for v in E.breakpoints]
        self.disp = [self._ints(v) for v in E.displacements]
        self.n = E.n

    def _ints(self, v):
        if isinstance(v, QuadraticReal):
            p, q, r = v.integer_parts
            k = self.R // r
            return p * k, q * k
        v = Fraction(v)
        return v.numerator * (self.R // v.denominator), 0

    def scale(self, x):
        """Return ``(P, Q, extra)`` for the point ``x``; ``extra`` rescales R."""
        if isinstance(x, QuadraticReal):
            p, q, r = x.integer_parts
        else:
            x = Fraction(x)
            p, q, r = x.numerator, 0, x.denominator
        g = r // math.gcd(r, self.R)
        return p * (self.R // math.gcd(r, self.R)), q * (self.R // math.gcd(r, self.R)), g

    def run(self, x, steps: int) -> bytearray:
        """Symbols of ``x, E(x), ..., E^(steps-1)(x)``."""
        P, Q, g = self.scale(x)
        # x = (P + Q sqrt d) / (R * g); breakpoints scaled by g to match
        d = self.d
        bps = [(bp * g, bq * g) for bp, bq in self.bps[1:-1]]
        lo_p, lo_q = self.bps[0][0] * g, self.bps[0][1] * g
        hi_p, hi_q = self.bps[-1][0] * g, self.bps[-1][1] * g
        disp = [(dp * g, dq * g) for dp, dq in self.disp]
        if _sgn(P - lo_p, Q - lo_q, d) < 0 or _sgn(P - hi_p, Q - hi_q, d) >= 0:
            raise OutOfDomainError("orbit start outside the domain")
        out = bytearray(steps)
        n_cuts = len(bps)
        for j in range(steps):
            i = 0
            while i < n_cuts:
                bp, bq = bps[i]
                p = P - bp
                q = Q - bq
                # is x < breakpoint?
                if q == 0:
                    neg = p < 0
                elif p <= 0 and q <= 0:
                    neg = True
                elif p >= 0 and q >= 0:
                    neg = False
                elif p < 0:
                    neg = q * q * d < p * p
                else:
                    neg = p * p < q * q * d
                if neg:
                    break
                i += 1
            out[j] = i + 1
            dp, dq = disp[i]
            P += dp
            Q += dq
        return out


def _sgn(p, q, d):
    if q == 0:
        return (p > 0) - (p < 0)
    if p >= 0 and q > 0:
        return 1
    if p <= 0 and q < 0:
        return -1
    pp, qq = p * p, q * q * d
    if p > 0:
        return (pp > qq) - (pp < qq)
    return (qq > pp) - (qq < pp)


def _fast_kernel(E: Iet) -> _FastOrbit:
    kern = E.__dict__.get("_fast_orbit")
    if kern is None:
        kern = _FastOrbit(E)
        E.__dict__["_fast_orbit"] = kern
    return kern


def orbit_symbols(E: Iet, x, lo: int, hi: int) -> Itinerary:
    """Itinerary of ``x`` on the index range ``[lo, hi]`` (two-sided).

    Negative indices are produced with the exact inverse exchange but coded by
    the continuity intervals of ``E`` itself.
    """
    if lo > hi:
        raise ParameterError("orbit_symbols needs lo <= hi")
    x = E.field(x)
    if not E.contains(x):
        raise OutOfDomainError(f"{x} is outside [{E.origin}, {E.end})")
    fwd = bytearray()
    if hi >= 0:
        fwd = _fast_kernel(E).run(x, hi + 1)
    back = bytearray()
    if lo < 0:
        # E^-j(x) lies in I_i iff E^-(j-1)(x) lies in slot pi(i), which is the
        # continuity interval pi(i) of the inverse exchange.
        F = E.inverse
        inv = E.perm.inverse()
        slots = _fast_kernel(F).run(x, -lo)
        back = bytearray(inv(s) for s in slots)
        back.reverse()
    full = bytes(back) + bytes(fwd)
    start = min(lo, 0)
    return Itinerary(full[lo - start: hi - start + 1], x, lo)


# induced maps ----------------------------------------------------------------------


@dataclass(frozen=True)
class InducedSystem:
    """First-return map of ``parent`` to ``J = [c, e)``.

    ``pieces[k]`` is the continuity interval ``I_k`` of the induced map,
    ``return_times[k]`` the number of steps spent outside ``J`` (so
    ``E^(r+1)(I_k)`` lies in ``J``) and ``return_words[k]`` the ``r+1``
    symbols visited by ``x, E(x), ..., E^r(x)``.
    """

    parent: Iet
    J: tuple
    induced: Iet
    pieces: tuple
    return_times: tuple
    return_words: tuple
    shifts: tuple

    @property
    def p(self) -> int:
        return len(self.pieces)

    def tiling_measure(self):
        """``sum_k (r_k + 1) |I_k|``; equals the parent's length when every point visits J."""
        total = 0
        for (lo, hi), r in zip(self.pieces, self.return_times):
            total = total + (r + 1) * (hi - lo)
        return total

    def piece_index(self, x) -> int:
        return self.induced.index(x)


class _WordNode:
    __slots__ = ("sym", "parent", "depth")

    def __init__(self, sym, parent):
        self.sym = sym
        self.parent = parent
        self.depth = 0 if parent is None else parent.depth + 1

    def word(self) -> tuple:
        out = []
        node = self
        while node is not None and node.sym is not None:
            out.append(node.sym)
            node = node.parent
        out.reverse()
        return tuple(out)


def induce(E: Iet, J, step_cap: int = DEFAULT_STEP_CAP) -> InducedSystem:
    """First-return map of ``E`` to the proper subinterval ``J = [c, e)``.

    Continuity intervals are found by exact pullback: ``J`` is pushed forward
    and split at every discontinuity of ``E`` and at the ends of ``J`` until
    each piece is back inside ``J``.
    """
    c, e = E.field(J[0]), E.field(J[1])
    if not (E.origin <= c < e <= E.end):
        raise OutOfDomainError(f"J = [{c}, {e}) is not inside [{E.origin}, {E.end})")
    if c == E.origin and e == E.end:
        raise ParameterError("J must be a proper subinterval")
    bps = E.breakpoints
    disp = E.displacements
    n = E.n
    done = []
    # (image lo, image hi, total shift, steps taken, word node)
    stack = [(c, e, E.field(0), 0, _WordNode(None, None))]
    while stack:
        u, v, s, t, node = stack.pop()
        parts = []
        if t >= 1:
            if u < c:
                parts.append((u, min(v, c)))
            if v > e:
                parts.append((max(u, e), v))
            a, b = max(u, c), min(v, e)
            if a < b:
                done.append((a - s, b - s, s, t - 1, node))
        else:
            parts.append((u, v))
        if parts and t + 1 > step_cap:
            raise NonReturnError(f"no return to J within {step_cap} steps")
        for pu, pv in parts:
            i = bisect_right(bps, pu)
            while pu < pv:
                right = bps[i] if bps[i] < pv else pv
                d = disp[i - 1]
                stack.append((pu + d, right + d, s + d, t + 1, _WordNode(i, node)))
                pu = right
                i += 1
                if i > n:
                    break
    done.sort(key=lambda rec: rec[0])
    pieces = tuple((lo, hi) for lo, hi, _, _, _ in done)
    shifts = tuple(s for _, _, s, _, _ in done)
    times = tuple(r for _, _, _, r, _ in done)
    words = tuple(node.word() for _, _, _, _, node in done)
    # permutation of the induced map from the order of the images
    order = sorted(range(len(done)), key=lambda k: pieces[k][0] + shifts[k])
    dest = [0] * len(done)
    for slot, k in enumerate(order, start=1):
        dest[k] = slot
    lengths = tuple(hi - lo for lo, hi in pieces)
    induced = Iet(Permutation(tuple(dest)), lengths, c)
    for k in range(len(done)):
        if induced.displacements[k] != shifts[k]:
            raise NonReturnError("induced images do not tile J; the exchange is not invertible on J")
    return InducedSystem(E, (c, e), induced, pieces, times, words, shifts)


# minimality evidence -------------------------------------------------------------


@dataclass(frozen=True)
class KeaneReport:
    collision: bool
    horizon: int
    # (i, j, m): E^m(a_i) == a_j
    witness: tuple | None = None

    @property
    def minimality_evidence(self) -> bool:
        return not self.collision


def keane_check(E: Iet, horizon: int) -> KeaneReport:
    """Look for ``E^m(a_i) == a_j`` with ``1 <= m <= horizon``.

    No collision is evidence (not proof) of Keane's condition and hence of
    minimality.
    """
    if horizon < 1:
        raise ParameterError("horizon must be >= 1")
    cuts = {E.breakpoints[i]: i for i in range(1, E.n)}
    for i in range(1, E.n):
        y = E.breakpoints[i]
        for m in range(1, horizon + 1):
            y = E(y)
            j = cuts.get(y)
            if j is not None:
                return KeaneReport(True, horizon, (i, j, m))
    return KeaneReport(False, horizon)


# standard instances -----------------------------------------------------------------

GOLDEN = QuadraticReal(Fraction(-1, 2), Fraction(1, 2), 5)


def rotation(alpha) -> Iet:
    """Rotation ``x -> x + alpha mod 1`` as the 2-exchange with lengths ``(1 - alpha, alpha)``."""
    return Iet(Permutation((2, 1)), (1 - alpha, alpha), 0)


def golden_rotation() -> Iet:
    """The 2-exchange with lengths ``(1 - g, g)``, ``g = (sqrt 5 - 1) / 2``."""
    return rotation(GOLDEN)
