"""Discrete Schroedinger operators ``(H psi)_j = psi_{j+1} + psi_{j-1} + v_j psi_j``.

Solutions of ``H psi = E psi`` propagate by ``Phi(j+1) = T(v_j) Phi(j)`` with
``Phi(j) = (psi_j, psi_{j-1})`` and ``T(v) = [[E - v, -1], [1, 0]]``.

Band spectra of periodic words are computed from the Floquet matrices
``H_0`` (periodic) and ``H_pi`` (antiperiodic): their eigenvalues are exactly
the roots of ``tr M(E) = 2`` and ``tr M(E) = -2``.  In exact mode each
eigenvalue is located in a dyadic cell by exact eigenvalue counts (signs of
leading principal minors, i.e. a Sturm sequence), seeded by floating-point
eigenvalues; float mode uses the seeds directly with outward rounding.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    DegeneracyError,
    InsufficientWindowError,
    ModeError,
    ParameterError,
)
from .iet import Iet, Itinerary, orbit_symbols
from .scalar import format_scalar

__all__ = [
    "Potential",
    "default_potential",
    "TransferMatrix",
    "transfer",
    "word_transfer",
    "trace_polynomial",
    "trace_value",
    "Edge",
    "Band",
    "SpectrumEstimate",
    "band_spectrum",
    "same_spectrum",
    "finite_box_eigenvalues",
    "LyapunovEstimate",
    "lyapunov_estimate",
    "GordonNondecayReport",
    "gordon_nondecay_check",
    "hull_invariance_check",
    "fibonacci_word",
    "fibonacci_traces",
    "trace_map_invariant",
    "prefix_approximant",
]

EXACT = "exact"
FLOAT = "float"
DEFAULT_EDGE_TOL = 1e-12
DEFAULT_EIG_TOL = 1e-10


# potentials and transfer matrices -------------------------------------------------------


@dataclass(frozen=True)
class Potential:
    """Injective site potential ``V(i) = coupling * values[i - 1]``."""

    values: tuple
    coupling: object = 1

    def __post_init__(self):
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ParameterError("a potential needs at least one value")
        scaled = [self.coupling * v for v in vals]
        if len(set(scaled)) != len(scaled):
            raise ParameterError(f"potential values {vals} (coupling {self.coupling}) are not injective")

    @property
    def n(self) -> int:
        return len(self.values)

    def __call__(self, symbol: int):
        return self.coupling * self.values[symbol - 1]

    def along(self, word) -> list:
        return [self(s) for s in word]

    @property
    def is_rational(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.values) and isinstance(self.coupling, (int, Fraction))

    def exact_values(self) -> tuple:
        if not self.is_rational:
            raise ModeError("exact mode needs rational potential values")
        return tuple(Fraction(self.coupling) * Fraction(v) for v in self.values)

    def to_json(self) -> dict:
        return {"values": [format_scalar(v) if not isinstance(v, float) else repr(v) for v in self.values],
                "coupling": format_scalar(self.coupling) if not isinstance(self.coupling, float) else repr(self.coupling)}


def default_potential(n: int, coupling=2) -> Potential:
    """``V(i) = coupling * (i - 1)``; for ``n = 2`` this is the Fibonacci model ``(0, coupling)``."""
    return Potential(tuple(range(n)), coupling)


@dataclass(frozen=True)
class TransferMatrix:
    a: object
    b: object
    c: object
    d: object

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    @property
    def trace(self):
        return self.a + self.d

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        return TransferMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def apply(self, vec):
        x, y = vec
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def rows(self):
        return ((self.a, self.b), (self.c, self.d))


def transfer(E, v) -> TransferMatrix:
    """``[[E - v, -1], [1, 0]]``."""
    return TransferMatrix(E - v, -1, 1, 0)


def word_transfer(E, word, V: Potential) -> TransferMatrix:
    """``T(V(w_q)) ... T(V(w_1))``, so ``word_transfer(uv) = word_transfer(v) @ word_transfer(u)``."""
    word = list(word)
    if not word:
        raise ParameterError("word must be nonempty")
    # rows of the running product, left-multiplied by [[E - v, -1], [1, 0]]
    a, b, c, d = 1, 0, 0, 1
    for s in word:
        t = E - V(s)
        a, b, c, d = t * a - c, t * b - d, a, b
    return TransferMatrix(a, b, c, d)


def trace_polynomial(word, V: Potential):
    """``tr word_transfer`` as a ``sympy.Poly`` in ``E`` over the rationals."""
    import sympy

    vals = V.exact_values()
    word = list(word)
    if not word:
        raise ParameterError("word must be nonempty")
    E = sympy.Symbol("E")
    one = sympy.Poly(1, E, domain="QQ")
    zero = sympy.Poly(0, E, domain="QQ")
    a, b, c, d = one, zero, zero, one
    for s in word:
        t = sympy.Poly(E - sympy.Rational(vals[s - 1].numerator, vals[s - 1].denominator), E, domain="QQ")
        a, b, c, d = t * a - c, t * b - d, a, b
    return a + d


def _trace_derivs(y: Fraction, vals: Sequence[Fraction]):
    """``(p, p', p'')`` at ``y`` for the trace ``p`` of the product over ``vals``."""
    # two solutions with their first and second derivatives in E
    s1 = [(Fraction(1), 0, 0), (Fraction(0), 0, 0)]  # psi_0, psi_-1
    s2 = [(Fraction(0), 0, 0), (Fraction(1), 0, 0)]
    for v in vals:
        t = y - v
        for s in (s1, s2):
            (f, f1, f2), (g, g1, g2) = s
            nf = t * f - g
            nf1 = f + t * f1 - g1
            nf2 = 2 * f1 + t * f2 - g2
            s[0], s[1] = (nf, nf1, nf2), (f, f1, f2)
    # trace = psi^(1)_q + psi^(2)_{q-1}
    return tuple(s1[0][i] + s2[1][i] for i in range(3))


def trace_value(word, V: Potential, E) -> Fraction:
    """Exact trace of ``word_transfer`` at a rational energy."""
    return word_transfer(Fraction(E), word, _ExactPotential(V.exact_values())).trace


class _ExactPotential:
    def __init__(self, vals):
        self.vals = vals

    def __call__(self, s):
        return self.vals[s - 1]


# exact eigenvalue counts for Floquet matrices ----------------------------------------------


class _Floquet:
    """Exact and float eigenvalue data for ``H_theta``, ``theta in {0, pi}``.

    ``sigma = 2 cos(theta)`` is ``+2`` or ``-2``.  ``count(y)`` is the number of
    eigenvalues strictly below ``y``.
    """

    def __init__(self, vals: Sequence[Fraction], sigma: int):
        self.vals = list(vals)
        self.q = len(self.vals)
        self.sigma = sigma
        self.D = math.lcm(*(v.denominator for v in self.vals))
        self.cs = [int(v * self.D) for v in self.vals]
        self._cache = {}

    def seeds(self) -> np.ndarray:
        q = self.q
        v = np.array([float(x) for x in self.vals])
        if q == 1:
            return np.array([v[0] + self.sigma])
        H = np.diag(v)
        off = 1.0 if q > 2 else 1.0 + self.sigma / 2
        for i in range(q - 1):
            H[i, i + 1] = H[i + 1, i] = off
        if q > 2:
            H[0, q - 1] = H[q - 1, 0] = self.sigma / 2
        return np.sort(np.linalg.eigvalsh(H))

    def count(self, y: Fraction) -> int:
        got = self._cache.get(y)
        if got is None:
            got = self._count_int(y)
            if got is None:
                got = self._count_limit(y)
            self._cache[y] = got
        return got

    def _count_int(self, y: Fraction):
        """Sign changes of the scaled minors; ``None`` when a zero shows up."""
        u, w = y.numerator, y.denominator
        D = self.D
        g = D * w
        g2 = g * g
        Du = D * u
        q = self.q
        changes = 0
        prev2, prev = 0, 1  # P_{-2} unused, P_{-1} = 1
        last_sign = 1
        P = [1]
        for i in range(q):
            a = self.cs[i] * w - Du
            cur = a * prev - g2 * prev2 if i > 0 else a
            P.append(cur)
            prev2, prev = prev, cur
            if i < q - 1:
                if cur == 0:
                    return None
                sgn = 1 if cur > 0 else -1
                if sgn != last_sign:
                    changes += 1
                last_sign = sgn
        P_last = prev  # determinant of the tridiagonal part
        # second solution, started at index 1
        f_prev, f = 0, 1
        for k in range(1, q - 1):
            a = self.cs[k] * w - Du
            f_prev, f = f, -a * f - g2 * f_prev
        f_last = f if q > 1 else 0
        sgn_q = -1 if q % 2 else 1
        delta = P_last - sgn_q * g2 * f_last - sgn_q * self.sigma * g**q
        if delta == 0:
            return None
        if (1 if delta > 0 else -1) != last_sign:
            changes += 1
        return changes

    def _count_limit(self, y: Fraction) -> int:
        """Count at ``y`` from the left: signs of the minors at ``y - eps``."""
        q = self.q
        vals = self.vals

        def limit_sign(f, f1, f2):
            if f:
                return 1 if f > 0 else -1
            if f1:
                return -1 if f1 > 0 else 1
            if f2:
                return 1 if f2 > 0 else -1
            raise DegeneracyError(f"triple zero at E = {y}")

        changes = 0
        last = 1
        prev2 = (Fraction(0), 0, 0)
        prev = (Fraction(1), 0, 0)
        for i in range(q):
            t = vals[i] - y
            f, f1, f2 = prev
            g, g1, g2 = prev2 if i > 0 else (Fraction(0), 0, 0)
            cur = (t * f - g, -f + t * f1 - g1, -2 * f1 + t * f2 - g2)
            prev2, prev = prev, cur
            if i < q - 1:
                s = limit_sign(*cur)
                if s != last:
                    changes += 1
                last = s
        P_last = prev
        # second solution (unscaled) psi'_0 = 0, psi'_1 = 1, for indices 1..q-1
        fp, fc = (Fraction(0), 0, 0), (Fraction(1), 0, 0)
        for k in range(1, q - 1):
            t = y - vals[k]
            f, f1, f2 = fc
            g, g1, g2 = fp
            fp, fc = fc, (t * f - g, f + t * f1 - g1, 2 * f1 + t * f2 - g2)
        f_last = fc if q > 1 else (Fraction(0), 0, 0)
        sq = -1 if q % 2 else 1
        delta = tuple(P_last[i] - sq * f_last[i] - (sq * self.sigma if i == 0 else 0) for i in range(3))
        s = limit_sign(*delta)
        if s != last:
            changes += 1
        return changes


# band spectra --------------------------------------------------------------------------------


@dataclass(frozen=True)
class Edge:
    """A band edge enclosed in ``[lo, hi]``; ``value`` is set when the edge is known exactly.

    ``sigma`` is ``2`` for roots of ``tr = 2`` and ``-2`` for roots of ``tr = -2``.
    """

    lo: object
    hi: object
    sigma: int
    value: object = None

    @property
    def exact(self) -> bool:
        return self.value is not None

    @property
    def lower(self):
        return self.value if self.value is not None else self.lo

    @property
    def upper(self):
        return self.value if self.value is not None else self.hi

    @property
    def mid(self):
        return self.value if self.value is not None else (self.lo + self.hi) / 2

    def to_json(self):
        out = {"sigma": self.sigma, "approx": float(self.mid)}
        if self.value is not None:
            out["value"] = _fmt(self.value)
        else:
            out["enclosure"] = [_fmt(self.lo), _fmt(self.hi)]
        return out


def _fmt(x):
    return repr(x) if isinstance(x, float) else format_scalar(x)


@dataclass(frozen=True)
class Band:
    left: Edge
    right: Edge
    touches_next: bool = False

    @property
    def width_bounds(self):
        return max(self.right.lower - self.left.upper, 0), self.right.upper - self.left.lower


@dataclass(frozen=True)
class SpectrumEstimate:
    """Bands ``{E : |tr M(E)| <= 2}`` of the periodic potential read along ``word``."""

    word: tuple
    mode: str
    bands: tuple
    potential: Potential = field(compare=False, default=None)

    @property
    def measure_lower(self):
        return sum((b.width_bounds[0] for b in self.bands), Fraction(0) if self.mode == EXACT else 0.0)

    @property
    def measure_upper(self):
        return sum((b.width_bounds[1] for b in self.bands), Fraction(0) if self.mode == EXACT else 0.0)

    @property
    def measure(self):
        """Exact when all edges are exact; otherwise the midpoint of the enclosure."""
        lo, hi = self.measure_lower, self.measure_upper
        return lo if lo == hi else (lo + hi) / 2

    @property
    def is_exact(self) -> bool:
        return all(b.left.exact and b.right.exact for b in self.bands)

    def maximal_bands(self) -> list[tuple]:
        """Bands with touching neighbours merged, as ``(left edge, right edge)``."""
        out = []
        start = None
        for b in self.bands:
            if start is None:
                start = b.left
            if not b.touches_next:
                out.append((start, b.right))
                start = None
        return out

    def edges(self) -> list:
        out = []
        for b in self.bands:
            out.extend([b.left, b.right])
        return out

    def to_json(self) -> dict:
        return {
            "word": list(self.word),
            "mode": self.mode,
            "bands": [{"left": b.left.to_json(), "right": b.right.to_json(), "touches_next": b.touches_next}
                      for b in self.bands],
            "measure_lower": _fmt(self.measure_lower),
            "measure_upper": _fmt(self.measure_upper),
            "measure_approx": float(self.measure),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["band_lo", "band_hi", "width", "touches_next"])
        for b in self.bands:
            lo, hi = b.left.mid, b.right.mid
            w.writerow([_fmt(lo), _fmt(hi), f"{float(hi - lo):.17g}", int(b.touches_next)])
        return buf.getvalue()


def _dyadic_step(tol) -> Fraction:
    s = 0
    while Fraction(1, 2**s) > Fraction(tol):
        s += 1
    return Fraction(1, 2**s)


class _Locator:
    """Dyadic cells ``[base + j h, base + (j + 1) h)`` holding each eigenvalue of one ``H_theta``."""

    MAX_DEPTH = 96

    def __init__(self, fl: _Floquet, base: Fraction, h: Fraction):
        self.fl = fl
        self.base = base
        self.h = h

    def _holds(self, lo, hi, k):
        """-1: eigenvalue k lies left of [lo, hi); 1: right of it; 0: inside."""
        if self.fl.count(lo) > k - 1:
            return -1
        if self.fl.count(hi) < k:
            return 1
        return 0

    def cell(self, k: int, seed: float):
        h, base = self.h, self.base
        j = math.floor((Fraction(seed) - base) / h)
        side = self._holds(base + j * h, base + (j + 1) * h, k)
        if side == 0:
            return j
        # exponential search then bisection over the cell index
        step = 1
        lo_j, hi_j = j, j
        while True:
            probe = j + side * step
            s = self._holds(base + probe * h, base + (probe + 1) * h, k)
            if s == 0:
                return probe
            if s != side:
                lo_j, hi_j = sorted((j + side * (step // 2), probe))
                break
            step *= 2
        while True:
            mid = (lo_j + hi_j) // 2
            s = self._holds(base + mid * h, base + (mid + 1) * h, k)
            if s == 0:
                return mid
            if s < 0:
                hi_j = mid - 1
            else:
                lo_j = mid + 1

    def split(self, lo, hi, k: int, depth: int = 0):
        """Bisect ``[lo, hi)`` until eigenvalue ``k`` is alone; returns ``(lo, hi)``."""
        while True:
            n_lo, n_hi = self.fl.count(lo), self.fl.count(hi)
            if n_hi - n_lo <= 1 or depth >= self.MAX_DEPTH:
                return lo, hi, n_hi - n_lo
            mid = (lo + hi) / 2
            if self.fl.count(mid) >= k:
                hi = mid
            else:
                lo = mid
            depth += 1


def _snap(fl: _Floquet, lo, hi, double: bool):
    """Small-denominator rational in ``[lo, hi]`` that is exactly an edge (and a double one if asked)."""
    mid = (lo + hi) / 2
    for bound in (10, 10**3, 10**6):
        r = mid.limit_denominator(bound)
        if not lo <= r <= hi:
            continue
        p, p1, _ = _trace_derivs(r, fl.vals)
        if p == fl.sigma and (not double or p1 == 0):
            return r
    return None


def _certify_double(fl: _Floquet, lo, hi) -> bool:
    """Exact check that ``tr - sigma`` has a double root in ``[lo, hi]``."""
    import sympy

    p = trace_polynomial_from_values(fl.vals)
    target = p - fl.sigma
    g = sympy.gcd(target, target.diff())
    if g.degree() < 1:
        return False
    return g.count_roots(sympy.Rational(lo.numerator, lo.denominator),
                         sympy.Rational(hi.numerator, hi.denominator)) >= 1


def trace_polynomial_from_values(vals):
    import sympy

    E = sympy.Symbol("E")
    one = sympy.Poly(1, E, domain="QQ")
    zero = sympy.Poly(0, E, domain="QQ")
    a, b, c, d = one, zero, zero, one
    for v in vals:
        t = sympy.Poly(E - sympy.Rational(v.numerator, v.denominator), E, domain="QQ")
        a, b, c, d = t * a - c, t * b - d, a, b
    return a + d


def _exact_edges(vals, tol) -> list[Edge]:
    h = _dyadic_step(tol)
    base = Fraction(math.floor(min(vals)) - 3)
    edges = []
    locs = {}
    for sigma in (2, -2):
        fl = _Floquet(vals, sigma)
        loc = _Locator(fl, base, h)
        locs[sigma] = loc
        seeds = fl.seeds()
        cells = [loc.cell(k, float(seeds[k - 1])) for k in range(1, fl.q + 1)]
        k = 1
        while k <= fl.q:
            j = cells[k - 1]
            lo, hi = base + j * h, base + (j + 1) * h
            same = fl.count(hi) - fl.count(lo)
            if same == 1:
                r = _snap(fl, lo, hi, False)
                edges.append(Edge(lo, hi, sigma, r))
                k += 1
                continue
            if same > 2:
                raise DegeneracyError(f"{same} edges of tr = {sigma} in one cell near {float(lo)}")
            # two eigenvalues in the cell: a touching pair or a very close pair
            r = _snap(fl, lo, hi, True)
            if r is not None:
                edges.append(Edge(lo, hi, sigma, r))
                edges.append(Edge(lo, hi, sigma, r))
                k += 2
                continue
            a_lo, a_hi, c1 = loc.split(lo, hi, k)
            if c1 == 1:
                b_lo, b_hi, _ = loc.split(lo, hi, k + 1)
                edges.append(Edge(a_lo, a_hi, sigma, _snap(fl, a_lo, a_hi, False)))
                edges.append(Edge(b_lo, b_hi, sigma, _snap(fl, b_lo, b_hi, False)))
            elif _certify_double(fl, a_lo, a_hi):
                # both edges coincide; keep the shared enclosure
                edges.append(Edge(a_lo, a_hi, sigma))
                edges.append(Edge(a_lo, a_hi, sigma))
            else:
                raise DegeneracyError(f"could not separate two edges near {float(lo)}")
            k += 2
    edges.sort(key=lambda e: (e.lo, e.hi))
    # edges of different kinds are distinct points; shrink overlapping enclosures
    for i in range(len(edges) - 1):
        a, b = edges[i], edges[i + 1]
        if a.sigma != b.sigma and a.hi > b.lo and not (a.exact and b.exact):
            edges[i], edges[i + 1] = _separate(a, b, locs)
    edges.sort(key=lambda e: (e.lo, e.hi))
    return edges


def _separate(a: Edge, b: Edge, locs):
    def shrink(e: Edge):
        fl = locs[e.sigma].fl
        k = fl.count(e.hi)  # e is the k-th eigenvalue when alone in its cell
        lo, hi = e.lo, e.hi
        mid = (lo + hi) / 2
        if fl.count(mid) >= k:
            hi = mid
        else:
            lo = mid
        return Edge(lo, hi, e.sigma, e.value)

    for _ in range(200):
        if a.hi <= b.lo or b.hi <= a.lo:
            return (a, b) if a.lo <= b.lo else (b, a)
        if not a.exact:
            a = shrink(a)
        if not b.exact:
            b = shrink(b)
    raise DegeneracyError("edges of tr = 2 and tr = -2 could not be separated")


def _float_edges(vals, tol) -> list[Edge]:
    edges = []
    for sigma in (2, -2):
        fl = _Floquet(vals, sigma)
        for mu in fl.seeds():
            mu = float(mu)
            pad = tol * max(1.0, abs(mu))
            edges.append(Edge(mu - pad, mu + pad, sigma))
    edges.sort(key=lambda e: e.lo)
    return edges


def band_spectrum(word, V: Potential, mode: str = EXACT, tol: float = DEFAULT_EDGE_TOL) -> SpectrumEstimate:
    """Bands of the periodic operator with potential ``V(word)`` repeated.

    Exact mode certifies every edge inside a rational interval of width at
    most ``tol`` (exact value when the edge is a small-denominator
    rational); closed gaps are certified as double roots.  Float mode uses
    ``numpy.linalg.eigvalsh`` with outward-rounded enclosures.
    """
    word = tuple(word)
    if not word:
        raise ParameterError("word must be nonempty")
    if tol <= 0:
        raise ParameterError("tolerance must be positive")
    if mode == EXACT:
        vals = [V.exact_values()[s - 1] for s in word]
        edges = _exact_edges(vals, tol)
    elif mode == FLOAT:
        vals = [Fraction(float(V(s))) for s in word]
        edges = _float_edges(vals, tol)
    else:
        raise ModeError(f"unknown mode {mode!r}")
    q = len(word)
    if len(edges) != 2 * q:
        raise DegeneracyError(f"expected {2 * q} band edges, found {len(edges)}")
    bands = []
    for i in range(q):
        left, right = edges[2 * i], edges[2 * i + 1]
        if left.sigma == right.sigma:
            raise DegeneracyError(f"band {i + 1} has two edges of the same kind")
        touches = False
        if i + 1 < q:
            nxt = edges[2 * i + 2]
            if mode == EXACT:
                touches = nxt.sigma == right.sigma and nxt.lo == right.lo and nxt.hi == right.hi \
                    and nxt.value == right.value
            else:
                touches = nxt.sigma == right.sigma and abs(nxt.mid - right.mid) < 1e3 * tol
        bands.append(Band(left, right, touches))
    return SpectrumEstimate(word, mode, tuple(bands), V)


def same_spectrum(a: SpectrumEstimate, b: SpectrumEstimate) -> bool:
    """Identical certified band data (enclosures, exact values and touching flags)."""
    return a.mode == b.mode and a.bands == b.bands


# finite boxes ----------------------------------------------------------------------------------


def finite_box_eigenvalues(window, V: Potential, q: int, tol: float = DEFAULT_EIG_TOL) -> list[float]:
    """Eigenvalues of the ``q x q`` Dirichlet truncation along the first ``q`` symbols of ``window``.

    Bisection on the Sturm count of the tridiagonal matrix; every eigenvalue
    is returned to within ``tol``.
    """
    if tol <= 0:
        raise ParameterError("tolerance must be positive")
    syms = window.symbols if isinstance(window, Itinerary) else tuple(window)
    if q < 1 or len(syms) < q:
        raise ParameterError(f"window of length {len(syms)} is shorter than q = {q}")
    d = np.array([float(V(s)) for s in syms[:q]])
    lo_b = float(d.min()) - 2.0 - tol
    hi_b = float(d.max()) + 2.0 + tol
    k = np.arange(q)
    lo = np.full(q, lo_b)
    hi = np.full(q, hi_b)
    pivmin = np.finfo(float).tiny * 4

    def count(y):
        # number of eigenvalues < y, for each entry of y
        c = np.zeros_like(y, dtype=int)
        piv = d[0] - y
        for i in range(q):
            if i > 0:
                piv = d[i] - y - 1.0 / piv
            piv = np.where(np.abs(piv) < pivmin, -pivmin, piv)
            c += piv < 0
        return c

    while np.max(hi - lo) > tol:
        mid = (lo + hi) / 2
        below = count(mid) > k  # eigenvalue k (0-based) lies below mid
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    return sorted(((lo + hi) / 2).tolist())


# Lyapunov exponents -------------------------------------------------------------------------------


@dataclass(frozen=True)
class LyapunovEstimate:
    """``(1/L) log ||Phi(L)||`` along an orbit, and the same rate over the last quarter."""

    energy: float
    length: int
    value: float
    tail: float

    def __float__(self):
        return self.value


def _log_norms(E: float, potentials: np.ndarray, marks: Sequence[int]) -> dict:
    """``log ||Phi(j)||`` at the requested ``j`` for ``Phi(0) = (1, 0)`` (renormalized evolution)."""
    x, y = 1.0, 0.0
    acc = 0.0
    want = set(marks)
    out = {}
    if 0 in want:
        out[0] = 0.0
    for j, v in enumerate(potentials, start=1):
        x, y = (E - v) * x - y, x
        if j & 15 == 0 or j in want:
            nrm = math.hypot(x, y)
            if j in want:
                out[j] = acc + math.log(nrm)
            if j & 15 == 0:
                acc += math.log(nrm)
                x /= nrm
                y /= nrm
    return out


def lyapunov_estimate(E: float, iet: Iet, x, V: Potential, length: int) -> LyapunovEstimate:
    """Growth rate of the transfer-matrix cocycle along the itinerary of ``x``."""
    if length < 1000:
        raise ParameterError("length must be at least 1000")
    it = orbit_symbols(iet, x, 0, length - 1)
    pots = np.array([float(V(s)) for s in it.symbols])
    q3 = (3 * length) // 4
    logs = _log_norms(float(E), pots, [q3, length])
    value = logs[length] / length
    tail = (logs[length] - logs[q3]) / (length - q3)
    return LyapunovEstimate(float(E), length, value, tail)


# Gordon non-decay -------------------------------------------------------------------------------


@dataclass(frozen=True)
class GordonNondecayReport:
    """Result of checking ``max(|Phi(k)|, |Phi(2k)|, |Phi(-k)|) >= |Phi(0)| / 2``.

    ``violations`` lists ``(energy, k, initial vector index, log ratio)``.
    """

    energies: int
    lengths: tuple
    checks: int
    violations: tuple
    min_log_margin: float | None
    message: str = ""

    @property
    def ok(self) -> bool:
        return not self.violations


_INITIAL = ((1.0, 0.0), (0.0, 1.0), (math.sqrt(0.5), math.sqrt(0.5)), (0.6, -0.8))


def gordon_nondecay_check(energies, certificate, V: Potential, itinerary: Itinerary | None = None,
                          slack: float = 1e-9) -> GordonNondecayReport:
    """Evolve solutions from ``Phi(0) = (psi_0, psi_-1)`` and test the half-norm inequality.

    Every certified block length ``k`` and every energy is checked for several
    unit initial vectors; the comparison is done on logarithms with ``slack``.
    """
    lengths = tuple(certificate.lengths)
    energies = np.asarray([float(e) for e in energies], dtype=float)
    if not lengths:
        return GordonNondecayReport(len(energies), (), 0, (), None, "no lengths to check")
    it = itinerary if itinerary is not None else certificate.itinerary
    K = max(lengths)
    if it is None or not it.covers(-K, 2 * K - 1):
        raise InsufficientWindowError(f"need symbols on [{-K}, {2 * K - 1}]")
    forward = np.array([float(V(s)) for s in it.window(0, 2 * K)])
    backward = np.array([float(V(s)) for s in it.window(-K, 0)])[::-1]  # v_-1, v_-2, ...
    m = len(energies)
    init = np.array(_INITIAL)
    E = np.repeat(energies, len(init))
    x0 = np.tile(init[:, 0], m)
    y0 = np.tile(init[:, 1], m)
    want_f = set(lengths) | {2 * k for k in lengths}
    logs_f = _evolve(E, x0, y0, forward, want_f, backward=False)
    logs_b = _evolve(E, x0, y0, backward, set(lengths), backward=True)
    violations = []
    margin = math.inf
    threshold = math.log(0.5) - slack
    for k in lengths:
        best = np.maximum(np.maximum(logs_f[k], logs_f[2 * k]), logs_b[k])
        diff = best - threshold
        margin = min(margin, float(diff.min()))
        for idx in np.nonzero(diff < 0)[0]:
            violations.append((float(E[idx]), k, int(idx % len(init)), float(best[idx])))
    return GordonNondecayReport(len(energies), lengths, len(lengths) * len(E), tuple(violations), margin)


def _evolve(E, x0, y0, pots, marks, backward: bool) -> dict:
    """Log-norms of ``Phi`` at the marked steps, vectorized over energies and initial vectors.

    Forward: ``(psi_j, psi_{j-1}) -> (psi_{j+1}, psi_j)`` with ``pots[j] = v_j``.
    Backward: ``(psi_j, psi_{j-1}) -> (psi_{j-1}, psi_{j-2})`` with ``pots[i] = v_{-1-i}``;
    the state after ``k`` steps is ``Phi(-k)``.
    """
    a, b = x0.copy(), y0.copy()
    acc = np.zeros_like(a)
    out = {}
    for j, v in enumerate(pots, start=1):
        if backward:
            # psi_{j-2} = (E - v_{j-1}) psi_{j-1} - psi_j
            a, b = b, (E - v) * b - a
        else:
            a, b = (E - v) * a - b, a
        if j in marks or j & 15 == 0:
            nrm = np.hypot(a, b)
            if j in marks:
                out[j] = acc + np.log(nrm)
            if j & 15 == 0:
                acc = acc + np.log(nrm)
                a = a / nrm
                b = b / nrm
    return out


# hull invariance and approximants ------------------------------------------------------------------


def hull_invariance_check(word, V: Potential, mode: str = EXACT, include_reversal: bool = True) -> bool:
    """Band spectra agree for every cyclic rotation (and the reversal) of ``word``."""
    word = tuple(word)
    if len(word) < 2:
        raise ParameterError("word must have length >= 2")
    ref = band_spectrum(word, V, mode)
    variants = [word[i:] + word[:i] for i in range(1, len(word))]
    if include_reversal:
        variants.append(word[::-1])
    for w in variants:
        if mode == EXACT:
            if trace_polynomial(w, V) != trace_polynomial(word, V):
                return False
            if not same_spectrum(ref, band_spectrum(w, V, mode)):
                return False
        else:
            other = band_spectrum(w, V, mode)
            if any(abs(a.mid - b.mid) > 1e-9 for a, b in zip(ref.edges(), other.edges())):
                return False
    return True


def fibonacci_word(k: int) -> tuple:
    """``F_0 = 1``, ``F_1 = 2``, ``F_(k+1) = F_k F_(k-1)``."""
    if k < 0:
        raise ParameterError("order must be >= 0")
    a, b = (1,), (2,)
    if k == 0:
        return a
    for _ in range(k - 1):
        a, b = b, b + a
    return b


def fibonacci_traces(E, orders: Sequence[int], V: Potential) -> dict:
    """Full traces ``tr word_transfer(E, F_k)`` for each requested order."""
    return {k: word_transfer(E, fibonacci_word(k), V).trace for k in orders}


def trace_map_invariant(t_next, t, t_prev):
    """``x1^2 + x^2 + x0^2 - 2 x1 x x0 - 1`` for half traces ``x = t / 2``.

    Along the Fibonacci trace map it is constant, equal to ``c^2 / 4``.
    """
    x1, x, x0 = t_next / 2, t / 2, t_prev / 2
    return x1 * x1 + x * x + x0 * x0 - 2 * x1 * x * x0 - 1


def prefix_approximant(itinerary: Itinerary, q: int) -> tuple:
    """Word ``omega_0 ... omega_{q-1}``, to be repeated periodically."""
    return itinerary.word(0, q)
