"""Rauzy renormalization, Rauzy classes, renormalization towers and candidate points.

Rauzy induction replaces a normalized exchange by its first-return map to
``[0, 1 - nu)``, ``nu = min(lambda_n, lambda_{pi^-1(n)})``, rescaled back to
``[0, 1)``.  The combinatorial update used here is checked against
:func:`ietspec.iet.induce` in the test-suite (:func:`rauzy_step_via_induce`).

The candidate-point construction works on a tower level ``E_m``: inside each
continuity interval ``I_k`` it picks an interval ``L`` on which the induced
map ``E_{I_k}`` is continuous, and keeps
``M_k = E_{I_k}^-2(L) & E_{I_k}^-1(L) & L & E_{I_k}(L)``.  Points of ``M_k``
(and their first ``r`` images) have itineraries of the form ``BBB`` around
the origin, where ``B`` is the return word of ``L``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    InvalidLengthsError,
    InvalidPermutationError,
    NoCandidateError,
    NotFoundError,
    ParameterError,
    TowerAbortedError,
    UndefinedStepError,
)
from .iet import ExchangeLengths, Iet, InducedSystem, Permutation, induce, orbit_symbols
from .symbolic import has_triple_repetition

__all__ = [
    "LAST_SHORTER",
    "LAST_LONGER",
    "RauzyStep",
    "RauzyClass",
    "TowerLevel",
    "RenormalizationTower",
    "CandidateRecord",
    "CandidateReport",
    "PeriodicIetSpec",
    "rauzy_step",
    "rauzy_step_perm",
    "rauzy_step_via_induce",
    "rauzy_orbit",
    "rauzy_class",
    "default_delta",
    "build_tower",
    "candidate_report",
    "capture_lengths",
    "gordon_lengths_via_tower",
    "tower_reports",
    "periodic_iet",
    "union_measure",
]

LAST_SHORTER = "last-shorter"  # lambda_n < lambda_{pi^-1(n)}
LAST_LONGER = "last-longer"  # lambda_n > lambda_{pi^-1(n)}

DEFAULT_STEP_CAP = 10**5


@dataclass(frozen=True)
class RauzyStep:
    before_perm: Permutation
    before_lengths: tuple
    after_perm: Permutation
    after_lengths: tuple
    nu: object
    step_type: str
    scale: object

    @property
    def before(self):
        return self.before_perm, self.before_lengths

    @property
    def after(self):
        return self.after_perm, self.after_lengths


def _check_perm(perm) -> Permutation:
    if not isinstance(perm, Permutation):
        perm = Permutation(tuple(perm))
    if not perm.is_irreducible:
        raise InvalidPermutationError(f"{perm} is reducible")
    return perm


def rauzy_step_perm(perm: Permutation, step_type: str) -> Permutation:
    """Combinatorial part of a Rauzy step."""
    n = perm.n
    top = perm(n)
    beta = perm.inverse()(n)
    if step_type == LAST_LONGER:
        # the image of I_beta moves to just after the image of I_n
        images = []
        for j in range(1, n + 1):
            if j == beta:
                images.append(top + 1)
            elif perm(j) > top:
                images.append(perm(j) + 1)
            else:
                images.append(perm(j))
        return Permutation(tuple(images))
    if step_type == LAST_SHORTER:
        # I_beta splits; its right part (landing on I_n) becomes a new interval after it
        images = [perm(j) for j in range(1, beta + 1)] + [top] + [perm(j) for j in range(beta + 1, n)]
        return Permutation(tuple(images))
    raise ValueError(f"unknown step type {step_type!r}")


def rauzy_step(perm, lengths) -> RauzyStep:
    """One step of Rauzy renormalization on ``(perm, lengths)``.

    ``lengths`` is expected to be normalized; the result always is.
    """
    perm = _check_perm(perm)
    lam = tuple(lengths.values if isinstance(lengths, ExchangeLengths) else ExchangeLengths(tuple(lengths)).values)
    if len(lam) != perm.n:
        raise InvalidLengthsError("length vector does not match the permutation")
    n = perm.n
    beta = perm.inverse()(n)
    last, other = lam[n - 1], lam[beta - 1]
    if last == other:
        raise UndefinedStepError(
            f"Rauzy step undefined: lambda_{n} = lambda_{beta} = {last}"
        )
    total = sum(lam[1:], lam[0])
    if last > other:
        step_type, nu = LAST_LONGER, other
        new = list(lam)
        new[n - 1] = last - other
    else:
        step_type, nu = LAST_SHORTER, last
        new = list(lam[:beta]) + [last] + list(lam[beta:n - 1])
        new[beta - 1] = other - last
    scale = 1 / (total - nu)
    new = tuple(v * scale for v in new)
    return RauzyStep(perm, lam, rauzy_step_perm(perm, step_type), new, nu, step_type, scale)


def rauzy_step_via_induce(perm, lengths):
    """Reference implementation: normalized first-return map to ``[0, 1 - nu)``."""
    perm = _check_perm(perm)
    E = Iet(perm, lengths, 0)
    n = perm.n
    beta = perm.inverse()(n)
    lam = E.lengths.values
    if lam[n - 1] == lam[beta - 1]:
        raise UndefinedStepError("Rauzy step undefined on a tie")
    nu = min(lam[n - 1], lam[beta - 1])
    S = induce(E, (0, E.total - nu))
    induced = S.induced
    scale = 1 / induced.total
    return induced.perm, tuple(v * scale for v in induced.lengths.values)


def rauzy_orbit(perm, lengths, steps: int) -> list[RauzyStep]:
    """Up to ``steps`` consecutive Rauzy steps (stops early on an undefined step)."""
    out = []
    perm = _check_perm(perm)
    lam = ExchangeLengths(tuple(lengths)).normalized().values
    for _ in range(steps):
        try:
            st = rauzy_step(perm, lam)
        except UndefinedStepError:
            break
        out.append(st)
        perm, lam = st.after_perm, st.after_lengths
    return out


@dataclass(frozen=True)
class RauzyClass:
    members: tuple
    edges: dict

    def __contains__(self, perm) -> bool:
        return perm in self.members

    def __len__(self):
        return len(self.members)


def rauzy_class(perm) -> RauzyClass:
    """Closure of ``perm`` under both step types, in breadth-first order."""
    perm = _check_perm(perm)
    seen = {perm}
    order = [perm]
    edges = {}
    queue = deque([perm])
    while queue:
        p = queue.popleft()
        for kind in (LAST_LONGER, LAST_SHORTER):
            q = rauzy_step_perm(p, kind)
            edges[(p, kind)] = q
            if q not in seen:
                seen.add(q)
                order.append(q)
                queue.append(q)
    return RauzyClass(tuple(order), edges)


# towers ---------------------------------------------------------------------------


def default_delta(m: int, n: int) -> Fraction:
    """Proximity ``delta_m = min(1/(4n), 2^-m / n)``."""
    return min(Fraction(1, 4 * n), Fraction(1, n * 2**m))


def _distance_to_center(lam, n):
    c = Fraction(1, n)
    return max(abs(v - c) for v in lam)


@dataclass(frozen=True)
class TowerLevel:
    """``E_m = H_m o E_{J_m} o H_m^-1`` with ``J_m = [0, length)`` and ``H_m(x) = x / length``."""

    m: int
    steps: int
    length: object
    iet: Iet
    delta: object

    @property
    def J(self):
        return (self.iet.field(0), self.length)

    def H(self, x):
        return x / self.length

    def H_inv(self, y):
        return y * self.length


@dataclass
class RenormalizationTower:
    base: Iet
    levels: list = field(default_factory=list)
    complete: bool = True

    def level(self, m: int) -> TowerLevel:
        for lev in self.levels:
            if lev.m == m:
                return lev
        raise ParameterError(f"tower has no level {m}")

    def induced_on_level(self, m: int) -> InducedSystem:
        lev = self.level(m)
        return _cached_induce(self, lev)

    def consistency_errors(self, m: int) -> list:
        """Endpoints where ``E_m`` and ``H_m o E_{J_m} o H_m^-1`` disagree (empty when exact)."""
        lev = self.level(m)
        S = self.induced_on_level(m)
        bad = []
        E_m = lev.iet
        for y in E_m.breakpoints[:-1]:
            direct = E_m(y)
            via = lev.H(S.induced(lev.H_inv(y)))
            if direct != via:
                bad.append((y, direct, via))
        return bad


def _cached_induce(tower, lev):
    cache = tower.__dict__.setdefault("_induced", {})
    if lev.m not in cache:
        if lev.steps == 0:
            cache[lev.m] = None
        else:
            cache[lev.m] = induce(tower.base, lev.J)
    S = cache[lev.m]
    if S is None:
        raise ParameterError("level 0 steps: J_m is the whole domain")
    return S


def build_tower(E: Iet, target_levels: int, deltas: Sequence | None = None,
                step_cap: int = DEFAULT_STEP_CAP) -> RenormalizationTower:
    """Renormalization tower of the normalized exchange ``E``.

    Level ``m`` is the first Rauzy iterate ``R^N(E)`` (with ``N > N_{m-1}``)
    whose lengths are within ``delta_m`` of ``(1/n, ..., 1/n)`` in the max
    norm.  Raises :class:`TowerAbortedError` on an undefined step and
    :class:`NotFoundError` when proximity is not reached within ``step_cap``
    steps or the Rauzy orbit is seen to be periodic; both carry the partial
    tower.
    """
    if not E.is_normalized:
        raise ParameterError("build_tower expects an exchange on [0, 1)")
    perm = _check_perm(E.perm)
    n = perm.n
    if deltas is None:
        deltas = [default_delta(m, n) for m in range(1, target_levels + 1)]
    deltas = [Fraction(d) if not hasattr(d, "sign") else d for d in deltas]
    if len(deltas) < target_levels:
        raise ParameterError("delta schedule shorter than the number of levels")
    tower = RenormalizationTower(E)
    lam = E.lengths.values
    length = E.field(1)
    N = 0
    for m in range(1, target_levels + 1):
        delta = deltas[m - 1]
        seen = set()
        budget = 0
        must_step = m > 1
        while must_step or not _distance_to_center(lam, n) < delta:
            must_step = False
            if budget >= step_cap:
                tower.complete = False
                raise NotFoundError(
                    f"level {m}: proximity {delta} not reached within {step_cap} steps", tower)
            state = (perm, lam)
            if state in seen:
                tower.complete = False
                raise NotFoundError(
                    f"level {m}: Rauzy orbit is periodic and never within {delta} of the center", tower)
            seen.add(state)
            try:
                st = rauzy_step(perm, lam)
            except UndefinedStepError as exc:
                tower.complete = False
                raise TowerAbortedError(f"level {m}: {exc}", tower) from exc
            length = length * (1 - st.nu)
            perm, lam = st.after_perm, st.after_lengths
            N += 1
            budget += 1
        tower.levels.append(TowerLevel(m, N, length, Iet(perm, lam, 0), delta))
    return tower


# candidate points ---------------------------------------------------------------------


@dataclass(frozen=True)
class CandidateRecord:
    """Candidate data for one continuity interval ``I_k`` of ``E_m``.

    All intervals are in base coordinates (the tower's base exchange).
    ``return_time`` is the return time of ``L`` to ``I_k`` and ``length =
    return_time + 1 = |B|`` is the period of the ``BBB`` pattern;
    ``tower_return_time`` is the return time of ``I_k`` to ``J_m``.
    """

    k: int
    I: tuple
    L: tuple
    M: tuple | None
    fraction: object
    return_time: int
    length: int
    tower_return_time: int | None
    word: tuple
    shifts: tuple
    certified: bool | None

    @property
    def empty(self) -> bool:
        return self.M is None


@dataclass(frozen=True)
class CandidateReport:
    level: int
    eps: object
    bound: object
    records: tuple
    covered_measure: object

    @property
    def fractions(self):
        return tuple(r.fraction for r in self.records)

    @property
    def lengths(self):
        return tuple(r.length for r in self.records if not r.empty)

    def meets_bound(self) -> bool:
        return all(r.fraction >= self.bound for r in self.records)


def _cut(interval, points):
    lo, hi = interval
    cuts = sorted({p for p in points if lo < p < hi})
    edges = [lo] + cuts + [hi]
    return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]


def _longest(intervals):
    best = None
    for lo, hi in intervals:
        if best is None or hi - lo > best[1] - best[0]:
            best = (lo, hi)
    return best


def _image(F: Iet, interval):
    """Image of an interval on which ``F`` is continuous."""
    lo, hi = interval
    d = F.displacements[F.index(lo) - 1]
    return lo + d, hi + d


def _intersect(*intervals):
    lo = max(i[0] for i in intervals)
    hi = min(i[1] for i in intervals)
    return (lo, hi) if lo < hi else None


def union_measure(intervals) -> object:
    """Exact Lebesgue measure of a finite union of half-open intervals."""
    ivs = sorted(intervals, key=lambda iv: iv[0])
    total = 0
    cur = None
    for lo, hi in ivs:
        if cur is None:
            cur = [lo, hi]
        elif lo <= cur[1]:
            if hi > cur[1]:
                cur[1] = hi
        else:
            total = total + (cur[1] - cur[0])
            cur = [lo, hi]
    if cur is not None:
        total = total + (cur[1] - cur[0])
    return total


def _record_for(E: Iet, K, k, tower_r, certify: bool) -> CandidateRecord:
    S = induce(E, K)
    G = S.induced
    F = G.inverse
    # longest continuity interval of E_K, leftmost on ties
    idx = max(range(S.p), key=lambda j: (S.pieces[j][1] - S.pieces[j][0], -j))
    L0 = S.pieces[idx]
    # shorten so that E_K^-1 and E_K^-2 are continuous on L
    d1 = list(F.breakpoints[1:-1])
    cuts = d1 + [G(y) for y in d1]
    L = _longest(_cut(L0, cuts))
    EL = _image(G, L)
    FL = _image(F, L)
    F2L = _image(F, FL)
    M = _intersect(L, EL, FL, F2L)
    r = S.return_times[idx]
    word = S.return_words[idx]
    # displacement after j steps along the return word, j = 0..r
    shifts = [E.field(0)]
    for sym in word[:-1]:
        shifts.append(shifts[-1] + E.displacements[sym - 1])
    width = K[1] - K[0]
    fraction = (M[1] - M[0]) / width if M else E.field(0)
    certified = None
    if certify and M is not None:
        x = (M[0] + M[1]) / 2
        length = r + 1
        it = orbit_symbols(E, x, -length, 2 * length - 1)
        certified = has_triple_repetition(it, length)
    return CandidateRecord(k, K, L, M, fraction, r, r + 1, tower_r, word, tuple(shifts), certified)


def candidate_report(tower: RenormalizationTower, level: int, eps=Fraction(1, 2),
                     strict: bool = True, certify: bool = True) -> CandidateReport:
    """Candidate sets ``M_k`` for every continuity interval of ``E_level``.

    ``fraction`` is the exact ratio ``|M_k| / |I_k|``, to be compared with the
    bound ``1 - eps / 2^level``.  With ``strict`` an empty ``M_k`` raises
    :class:`NoCandidateError`; otherwise it is recorded with fraction 0.
    ``covered_measure`` is the exact measure of the union of ``E^j(M_k)``,
    ``0 <= j <= r_k``, over all ``k``.
    """
    lev = tower.level(level)
    E = tower.base
    E_m = lev.iet
    eps = E.field(eps)
    if lev.steps > 0:
        S = tower.induced_on_level(level)
        tower_times = S.return_times if S.p == E_m.n else (None,) * E_m.n
    else:
        tower_times = (0,) * E_m.n
    records = []
    empty = []
    for k in range(1, E_m.n + 1):
        lo, hi = E_m.interval(k)
        K = (lev.H_inv(lo), lev.H_inv(hi))
        rec = _record_for(E, K, k, tower_times[k - 1], certify)
        if rec.empty:
            empty.append(k)
        records.append(rec)
    if strict and empty:
        raise NoCandidateError(f"level {level}: empty candidate set for k in {empty}", empty)
    pieces = []
    for rec in records:
        if rec.M is None:
            continue
        for s in rec.shifts:
            pieces.append((rec.M[0] + s, rec.M[1] + s))
    covered = union_measure(pieces) if pieces else E.field(0)
    bound = 1 - eps / 2**level
    return CandidateReport(level, eps, bound, tuple(records), covered)


def capture_lengths(reports: Sequence[CandidateReport], x) -> list[int]:
    """Lengths ``|B|`` of every candidate tower (over all reports) containing ``x``."""
    found = set()
    for rep in reports:
        for rec in rep.records:
            if rec.M is None:
                continue
            lo, hi = rec.M
            for s in rec.shifts:
                if lo + s <= x < hi + s:
                    found.add(rec.length)
                    break
    return sorted(found)


def tower_reports(E: Iet, levels: int, eps=Fraction(1, 2), deltas=None,
                  step_cap: int = DEFAULT_STEP_CAP, certify: bool = False):
    """Build as many tower levels as possible and their (non-strict) candidate reports."""
    try:
        tower = build_tower(E, levels, deltas, step_cap)
    except (TowerAbortedError, NotFoundError) as exc:
        tower = exc.tower
    reports = [candidate_report(tower, lev.m, eps, strict=False, certify=certify)
               for lev in tower.levels]
    return tower, reports


def gordon_lengths_via_tower(E: Iet, x, levels: int, eps=Fraction(1, 2), deltas=None,
                             step_cap: int = DEFAULT_STEP_CAP) -> list[int]:
    """Increasing list of ``BBB`` lengths for ``x`` produced by the tower's candidate sets.

    A level contributes when ``x`` lies in ``E^j(M_k)`` for some ``k`` and
    ``0 <= j <= r_k``; levels that never capture ``x`` contribute nothing.
    """
    _, reports = tower_reports(E, levels, eps, deltas, step_cap)
    return capture_lengths(reports, E.field(x))


# the periodic exchange P ---------------------------------------------------------------


@dataclass(frozen=True)
class PeriodicIetSpec:
    """``P = (pi, (1/n, ..., 1/n))``; ``P`` maps ``I*_k`` onto ``I*_pi(k)``.

    ``cycle_lengths[k-1]`` is the least ``l_k >= 1`` with
    ``P^(l_k + 1)(I*_k) = I*_k``, so the cycle of ``k`` has ``l_k + 1``
    elements, and ``period`` is the least ``N`` with ``P^N = id``.
    """

    n: int
    perm: Permutation
    lengths: tuple
    iet: Iet
    cycle_lengths: tuple
    period: int

    def interval(self, k: int):
        return Fraction(k - 1, self.n), Fraction(k, self.n)


def periodic_iet(n: int, perm) -> PeriodicIetSpec:
    perm = _check_perm(perm)
    if perm.n != n:
        raise ParameterError(f"permutation acts on {perm.n} symbols, not {n}")
    lam = tuple(Fraction(1, n) for _ in range(n))
    sizes = {}
    for cyc in perm.cycles():
        for k in cyc:
            sizes[k] = len(cyc)
    ls = tuple(sizes[k] - 1 for k in range(1, n + 1))
    period = 1
    for c in set(sizes.values()):
        period = period * c // math.gcd(period, c)
    return PeriodicIetSpec(n, perm, lam, Iet(perm, lam, 0), ls, period)
