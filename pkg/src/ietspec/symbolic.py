"""Symbolic side of an exchange: cylinders, word complexity, condition (B), triple repetitions.

The cylinder of a word ``B`` of length ``m`` is the set of ``x`` whose
itinerary starts with ``B``.  For an exchange it is a half-open interval, and
the level-``m`` cylinders are cut out by the points ``E^-j(a_l)``,
``0 <= j < m``, ``1 <= l < n``.  :class:`CylinderTree` stores those cut points
once, with the depth at which each appears, so every level is available
without recomputation.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
from collections import deque
from dataclasses import dataclass, field

from .errors import InsufficientWindowError, ParameterError
from .iet import Iet, Itinerary, keane_check, orbit_symbols
from .scalar import format_scalar, to_float

__all__ = [
    "CylinderTree",
    "ConditionBReport",
    "GordonCertificate",
    "build_cylinders",
    "condition_b_scores",
    "aperiodicity_check",
    "gordon_scan",
    "has_triple_repetition",
]


@dataclass(frozen=True)
class CylinderTree:
    """All cylinders of ``iet`` up to length ``depth``.

    ``points`` are the interior cut points in increasing order and
    ``births[i]`` is the least word length at which ``points[i]`` separates
    two cylinders.  ``eta[m - 1]`` is the least cylinder length at level ``m``
    and ``counts[m - 1]`` the number of nonempty words of length ``m``.
    """

    iet: Iet
    depth: int
    points: tuple
    births: tuple
    eta: tuple
    counts: tuple

    def level(self, m: int) -> list[tuple]:
        """Cylinder intervals ``(lo, hi)`` of words of length ``m``, left to right."""
        if not 1 <= m <= self.depth:
            raise ParameterError(f"level {m} outside 1..{self.depth}")
        edges = [self.iet.origin]
        edges += [p for p, b in zip(self.points, self.births) if b <= m]
        edges.append(self.iet.end)
        return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]

    def nodes(self, m: int) -> list[tuple]:
        """``(word, lo, hi)`` for each nonempty word of length ``m``."""
        out = []
        for lo, hi in self.level(m):
            word = orbit_symbols(self.iet, lo, 0, m - 1).word(0, m)
            out.append((word, lo, hi))
        return out

    def node(self, word) -> tuple | None:
        """Interval of ``word``, or ``None`` when the cylinder is empty."""
        word = tuple(word)
        for w, lo, hi in self.nodes(len(word)):
            if w == word:
                return lo, hi
        return None

    def complexity(self, m: int) -> int:
        return self.counts[m - 1]


def build_cylinders(E: Iet, depth: int) -> CylinderTree:
    """Exact cylinder structure of ``E`` for word lengths ``1..depth``."""
    if depth < 1:
        raise ParameterError("depth must be >= 1")
    F = E.inverse
    births = {}
    current = list(E.breakpoints[1:-1])
    for j in range(depth):
        for y in current:
            if y not in births and y != E.origin:
                births[y] = j + 1
        if j + 1 < depth:
            current = [F(y) for y in current]

    # least gap per level, updated as the points of each new depth are inserted
    by_depth = {}
    for y, b in births.items():
        by_depth.setdefault(b, []).append(y)
    sorted_pts = [E.origin, E.end]
    gap = E.end - E.origin
    eta, counts = [], []
    for m in range(1, depth + 1):
        for y in by_depth.get(m, ()):
            i = bisect.bisect_left(sorted_pts, y)
            left, right = sorted_pts[i - 1], sorted_pts[i]
            gap = min(gap, y - left, right - y)
            sorted_pts.insert(i, y)
        eta.append(gap)
        counts.append(len(sorted_pts) - 1)
    pts = sorted(births)
    return CylinderTree(E, depth, tuple(pts), tuple(births[p] for p in pts),
                        tuple(eta), tuple(counts))


def aperiodicity_check(tree: CylinderTree) -> bool:
    """True when the number of words grows strictly at every computed length.

    A coding that is eventually periodic has bounded complexity, so a plateau
    ``p(m + 1) = p(m)`` is reported as periodic.
    """
    if tree.depth < 2:
        raise ParameterError("need depth >= 2 to compare word counts")
    return all(b > a for a, b in zip(tree.counts, tree.counts[1:]))


@dataclass(frozen=True)
class ConditionBReport:
    """Scores ``(m, eta(m), m * eta(m))`` and the tail statistic.

    ``tail_max[m - 1]`` is the largest score over ``ceil(m/2) <= j <= m``; it
    is a finite-horizon stand-in for the ``limsup``, nothing more.
    ``keane_collision`` marks instances where Lebesgue measure may fail to be
    the only invariant measure.
    """

    scores: tuple
    tail_max: tuple
    threshold: object
    above_threshold: bool | None
    aperiodic: bool
    keane_collision: bool

    @property
    def min_score(self):
        return min(s for _, _, s in self.scores)

    @property
    def min_tail_max(self):
        return min(self.tail_max)

    def rows(self):
        for m, eta, score in self.scores:
            num, den = _num_den(eta)
            yield {
                "n": m,
                "eta_num": num,
                "eta_den": den,
                "score": format_scalar(score),
                "score_approx": f"{to_float(score):.12g}",
            }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["n", "eta_num", "eta_den", "score", "score_approx"],
                                lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow(row)
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "rows": list(self.rows()),
            "min_score": format_scalar(self.min_score),
            "min_tail_max": format_scalar(self.min_tail_max),
            "threshold": None if self.threshold is None else format_scalar(self.threshold),
            "above_threshold": self.above_threshold,
            "aperiodic": self.aperiodic,
            "keane_collision": self.keane_collision,
        }


def _num_den(x):
    """Numerator and denominator strings; quadratic numerators read ``p+q*sqrt(d)``."""
    if hasattr(x, "integer_parts"):
        p, q, r = x.integer_parts
        d = x.d
        if q == 0:
            return str(p), str(r)
        sign = "+" if q > 0 else "-"
        return f"{p}{sign}{abs(q)}*sqrt({d})", str(r)
    return str(x.numerator), str(x.denominator)


def condition_b_scores(tree: CylinderTree, threshold=None, keane_horizon: int | None = None) -> ConditionBReport:
    """Exact ``m * eta(m)`` for ``m = 1..depth``.

    With a ``threshold``, ``above_threshold`` says whether every tail maximum
    stays at or above it.
    """
    scores = tuple((m, eta, m * eta) for m, eta in enumerate(tree.eta, start=1))
    # sliding maximum over the window [ceil(m/2), m]; both ends only move right
    tail = []
    window = deque()
    for m in range(1, tree.depth + 1):
        while window and scores[window[-1] - 1][2] <= scores[m - 1][2]:
            window.pop()
        window.append(m)
        while window[0] < math.ceil(m / 2):
            window.popleft()
        tail.append(scores[window[0] - 1][2])
    above = None
    if threshold is not None:
        above = all(t >= threshold for t in tail)
    aperiodic = aperiodicity_check(tree) if tree.depth >= 2 else False
    horizon = keane_horizon if keane_horizon is not None else max(tree.depth, 1)
    collision = keane_check(tree.iet, horizon).collision if tree.iet.n > 1 else True
    return ConditionBReport(scores, tuple(tail), threshold, above, aperiodic, collision)


# triple repetitions --------------------------------------------------------------------


def has_triple_repetition(itinerary: Itinerary, k: int) -> bool:
    """``omega_{j-k} = omega_j = omega_{j+k}`` for ``0 <= j < k``.

    The three blocks are the index ranges ``[-k, 0)``, ``[0, k)`` and ``[k, 2k)``.
    """
    if k < 1:
        raise ParameterError("block length must be >= 1")
    if not itinerary.covers(-k, 2 * k - 1):
        raise InsufficientWindowError(
            f"itinerary [{itinerary.lo}, {itinerary.hi}] does not cover [{-k}, {2 * k - 1}]")
    mid = itinerary.window(0, k)
    return itinerary.window(-k, 0) == mid and itinerary.window(k, 2 * k) == mid


@dataclass(frozen=True)
class GordonCertificate:
    """Block lengths ``k`` with a triple repetition at the origin of ``itinerary``.

    ``windows[i]`` is the verified index range ``[-k, 2k)`` for ``lengths[i]``.
    """

    base_point: object
    lengths: tuple
    windows: tuple
    max_k: int
    itinerary: Itinerary = field(repr=False, compare=False, default=None)

    def __len__(self):
        return len(self.lengths)

    def verify(self, itinerary: Itinerary | None = None) -> bool:
        it = itinerary if itinerary is not None else self.itinerary
        return all(has_triple_repetition(it, k) for k in self.lengths)

    def to_json(self) -> dict:
        return {
            "base_point": format_scalar(self.base_point),
            "max_k": self.max_k,
            "lengths": list(self.lengths),
            "windows": [list(w) for w in self.windows],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "start", "stop"])
        for k, (a, b) in zip(self.lengths, self.windows):
            w.writerow([k, a, b])
        return buf.getvalue()

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _blocks_equal(sym: bytes, a: int, b: int, k: int) -> bool:
    """``sym[a:a+k] == sym[b:b+k]``, comparing short prefixes first."""
    step = 64
    done = 0
    while done < k:
        stop = min(k, done + step)
        if sym[a + done:a + stop] != sym[b + done:b + stop]:
            return False
        done = stop
        step *= 4
    return True


def gordon_scan(itinerary: Itinerary, max_k: int) -> GordonCertificate:
    """Every ``k <= max_k`` whose three blocks around the origin coincide."""
    if max_k < 1:
        raise ParameterError("max_k must be >= 1")
    if not itinerary.covers(-max_k, 2 * max_k - 1):
        raise InsufficientWindowError(
            f"itinerary [{itinerary.lo}, {itinerary.hi}] does not cover [{-max_k}, {2 * max_k - 1}]")
    sym = itinerary.symbols
    zero = -itinerary.offset
    found = []
    for k in range(1, max_k + 1):
        if sym[zero - k] != sym[zero] or sym[zero + k] != sym[zero]:
            continue
        if _blocks_equal(sym, zero - k, zero, k) and _blocks_equal(sym, zero + k, zero, k):
            found.append(k)
    windows = tuple((-k, 2 * k) for k in found)
    return GordonCertificate(itinerary.base_point, tuple(found), windows, max_k, itinerary)
