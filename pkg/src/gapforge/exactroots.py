"""Exact machinery for the boundary set of gamma values.

A boundary is the unique ``gamma > 1`` solving ``S_k(gamma) == h`` where
``S_k(x) = 1 + x + ... + x**(k-1)``.  Crossing a boundary changes the k-th
increment of the gamma-sequence from ``h`` to ``h + 1``.  Boundaries are held
as dyadic enclosures ``(a / 2**s, (a + 1) / 2**s]`` and every decision is an
exact integer sign test; floats only seed the first bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Optional, Sequence, Union

from .errors import DomainError, UnrealizablePrefixError
from .gapseq import (
    CIURA_INCREMENTS,
    GapSequence,
    _sum_numerator,
    as_gamma,
    gamma_sequence,
)

DISPLAY_WIDTH = Fraction(1, 10**18)
_INITIAL_SHIFT = 48
# enclosures finer than this trigger the exact equality test
_EQUALITY_SHIFT = 160
_MAX_DISPLAY_SHIFT = 320


def _float_root(k: int, h: int) -> float:
    if k == 2:
        return float(h - 1)
    # S_k(x) >= x**(k-1), so this start lies right of the root; Newton on the
    # convex x**k - 1 - h*(x - 1) then decreases monotonically onto it.
    x = float(h) ** (1.0 / (k - 1))
    for _ in range(200):
        f = x**k - 1.0 - h * (x - 1.0)
        df = k * x ** (k - 1) - h
        if df <= 0 or not math.isfinite(f):
            break
        nx = x - f / df
        if not (nx < x):
            break
        x = nx
    return x if math.isfinite(x) and x > 1.0 else 1.0


class BoundaryGamma:
    """The root ``gamma > 1`` of ``S_k(gamma) == h`` with a shrinkable enclosure.

    The enclosure is ``(lo, hi]`` with ``S_k(lo) < h <= S_k(hi)``.  Refinement
    mutates the object; share it between threads only one at a time.
    """

    __slots__ = ("k", "h", "_a", "_s")

    def __init__(self, k: int, h: int, width: Optional[Fraction] = None):
        k, h = int(k), int(h)
        if k < 2:
            raise DomainError(f"boundary degree index must be >= 2, got k={k}")
        if h <= k:
            # S_k(1) == k, so h <= k has no root above 1
            raise DomainError(f"no root above 1 for k={k}, h={h}")
        self.k = k
        self.h = h
        self._a, self._s = self._initial_bracket()
        while self._a <= (1 << self._s):
            self._bisect()
        if width is not None:
            self.refine(width)

    def _below(self, a: int, s: int) -> bool:
        # a / 2**s < root  <=>  S_k(a / 2**s) < h
        q = 1 << s
        if a <= q:
            return True
        return _sum_numerator(self.k, a, q) < self.h * q ** (self.k - 1)

    def _initial_bracket(self):
        s = _INITIAL_SHIFT
        x = _float_root(self.k, self.h)
        a = int(math.floor(x * (1 << s)))
        lo, step = a, 1
        while not self._below(lo, s):
            lo -= step
            step *= 2
        hi, step = a + 1, 1
        while self._below(hi, s):
            hi += step
            step *= 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self._below(mid, s):
                lo = mid
            else:
                hi = mid
        return lo, s

    def _bisect(self):
        a2 = 2 * self._a + 1
        s2 = self._s + 1
        self._a = a2 if self._below(a2, s2) else 2 * self._a
        self._s = s2

    def sign_at(self, x: Fraction) -> int:
        """Sign of ``S_k(x) - h``: -1 if x is below the root, 0 at it, 1 above."""
        x = Fraction(x)
        if x <= 1:
            return -1
        p, q = x.numerator, x.denominator
        d = _sum_numerator(self.k, p, q) - self.h * q ** (self.k - 1)
        return (d > 0) - (d < 0)

    def _sign_dyadic(self, a: int, s: int) -> int:
        q = 1 << s
        if a <= q:
            return -1
        d = _sum_numerator(self.k, a, q) - self.h * q ** (self.k - 1)
        return (d > 0) - (d < 0)

    @property
    def lo(self) -> Fraction:
        return Fraction(self._a, 1 << self._s)

    @property
    def hi(self) -> Fraction:
        return Fraction(self._a + 1, 1 << self._s)

    @property
    def enclosure(self) -> tuple[Fraction, Fraction]:
        return self.lo, self.hi

    @property
    def width(self) -> Fraction:
        return Fraction(1, 1 << self._s)

    @property
    def is_rational(self) -> bool:
        """True when the root equals the enclosure's upper end exactly."""
        return self._sign_dyadic(self._a + 1, self._s) == 0

    def refine(self, width) -> "BoundaryGamma":
        width = Fraction(width)
        if width <= 0:
            raise DomainError("enclosure width must be positive")
        while Fraction(1, 1 << self._s) > width:
            self._bisect()
        return self

    def polynomial(self) -> list[int]:
        """Integer coefficients (constant term first) of ``S_k(x) - h``."""
        return [1 - self.h] + [1] * (self.k - 1)

    def __float__(self):
        return float(self.hi)

    def __repr__(self):
        return f"BoundaryGamma(k={self.k}, h={self.h}, ~{float(self):.15f})"

    def __lt__(self, other):
        return compare_gammas(self, other) < 0

    def __le__(self, other):
        return compare_gammas(self, other) <= 0

    def __gt__(self, other):
        return compare_gammas(self, other) > 0

    def __ge__(self, other):
        return compare_gammas(self, other) >= 0


GammaValue = Union[Fraction, BoundaryGamma]


def boundary_gamma(k: int, h: int, width=DISPLAY_WIDTH) -> BoundaryGamma:
    """Isolate the root of ``S_k(gamma) == h`` to the requested width."""
    return BoundaryGamma(k, h, width)


# --- exact polynomial helpers for the equality test -------------------------


def _poly_trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_rem(a: list, b: list) -> list:
    a = [Fraction(c) for c in a]
    b = [Fraction(c) for c in b]
    while len(a) >= len(b) and a:
        factor = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[i + shift] -= factor * c
        _poly_trim(a)
    return a


def _poly_gcd(a: list, b: list) -> list:
    a = _poly_trim([Fraction(c) for c in a])
    b = _poly_trim([Fraction(c) for c in b])
    while b:
        a, b = b, _poly_rem(a, b)
    return a


def _poly_eval(p: list, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _same_root(a: BoundaryGamma, b: BoundaryGamma) -> bool:
    # Each defining polynomial is increasing on (1, inf), so its root there is
    # simple and unique.  A common factor changing sign across a's enclosure
    # vanishes at a, hence a is also the root of b's polynomial.
    g = _poly_gcd(a.polynomial(), b.polynomial())
    if len(g) < 2:
        return False
    at_lo = _poly_eval(g, a.lo)
    at_hi = _poly_eval(g, a.hi)
    return at_hi == 0 or (at_lo != 0 and (at_lo > 0) != (at_hi > 0))


def compare_boundaries(a: BoundaryGamma, b: BoundaryGamma) -> int:
    """Exact ordering of two boundaries: -1, 0 or 1."""
    if a is b or (a.k == b.k and a.h == b.h):
        return 0
    if a.k == b.k:
        return -1 if a.h < b.h else 1
    tested = False
    while True:
        if b._sign_dyadic(a._a + 1, a._s) < 0:
            return -1
        if b._sign_dyadic(a._a, a._s) >= 0:
            return 1
        # b sits inside a's enclosure
        if not tested and a._s >= _EQUALITY_SHIFT:
            tested = True
            if _same_root(a, b):
                return 0
        a._bisect()


def compare_gammas(x, y) -> int:
    """Exact ordering of rationals, boundaries and ``None`` (+infinity)."""
    if x is None or y is None:
        if x is None and y is None:
            return 0
        return 1 if x is None else -1
    if isinstance(x, BoundaryGamma):
        if isinstance(y, BoundaryGamma):
            return compare_boundaries(x, y)
        return x.sign_at(Fraction(y)) * -1
    if isinstance(y, BoundaryGamma):
        return y.sign_at(Fraction(x))
    x, y = Fraction(x), Fraction(y)
    return (x > y) - (x < y)


def _lower_rational(x: GammaValue) -> Fraction:
    return x.lo if isinstance(x, BoundaryGamma) else Fraction(x)


def _upper_rational(x: GammaValue) -> Fraction:
    return x.hi if isinstance(x, BoundaryGamma) else Fraction(x)


def _floor_sum(k: int, x: Fraction) -> int:
    p, q = x.numerator, x.denominator
    return _sum_numerator(k, p, q) // q ** (k - 1)


# --- decimal display ---------------------------------------------------------


def _truncated_digits(x: Fraction, digits: int) -> str:
    int_part = math.floor(x)
    int_len = len(str(int_part)) if int_part > 0 else 1
    places = max(digits - int_len, 0)
    t = math.floor(x * 10**places)
    return _place_point(t, places)


def _place_point(t: int, places: int) -> str:
    if places == 0:
        return str(t)
    s = str(t).rjust(places + 1, "0")
    return s[:-places] + "." + s[-places:]


def to_decimal(x: GammaValue, digits: int = 18) -> tuple[str, bool]:
    """Truncate ``x`` to ``digits`` significant digits.

    Returns ``(text, pinned)``; ``pinned`` is False when the enclosure could not
    be refined far enough to fix every printed digit.
    """
    if not isinstance(x, BoundaryGamma):
        return _truncated_digits(Fraction(x), digits), True
    if x.is_rational:
        return _truncated_digits(x.hi, digits), True
    x.refine(DISPLAY_WIDTH)
    while True:
        lo, hi = x.lo, x.hi
        int_part = math.floor(lo)
        int_len = len(str(int_part)) if int_part > 0 else 1
        places = max(digits - int_len, 0)
        scale = 10**places
        t_lo = math.floor(lo * scale)
        # the root is irrational here, so it stays strictly below hi
        t_hi = math.ceil(hi * scale) - 1
        if t_lo == t_hi and math.floor(hi) == int_part:
            return _place_point(t_lo, places), True
        if x._s >= _MAX_DISPLAY_SHIFT:
            return _place_point(t_lo, places), False
        x._bisect()


def format_gamma(x: Optional[GammaValue], digits: int = 18) -> str:
    """Decimal text for display; unpinned values get a trailing ``?``."""
    if x is None:
        return "inf"
    text, pinned = to_decimal(x, digits)
    return text if pinned else text + "?"


# --- intervals and cells -----------------------------------------------------


@dataclass(frozen=True)
class GammaInterval:
    """Half-open interval ``(lo, hi]``; ``hi=None`` means unbounded above."""

    lo: GammaValue
    hi: Optional[GammaValue]

    def __post_init__(self):
        if not isinstance(self.lo, BoundaryGamma):
            object.__setattr__(self, "lo", Fraction(self.lo))
        if self.hi is not None and not isinstance(self.hi, BoundaryGamma):
            object.__setattr__(self, "hi", Fraction(self.hi))
        if compare_gammas(self.lo, self.hi) >= 0:
            raise DomainError("interval lower end must lie below its upper end")

    @classmethod
    def from_decimals(cls, lo, hi) -> "GammaInterval":
        return cls(Fraction(str(lo)), Fraction(str(hi)))

    def contains(self, x) -> bool:
        return compare_gammas(self.lo, x) < 0 and compare_gammas(x, self.hi) <= 0

    def includes(self, other: "GammaInterval") -> bool:
        """True when ``other`` is a subset of this interval."""
        return (
            compare_gammas(self.lo, other.lo) <= 0
            and compare_gammas(other.hi, self.hi) <= 0
        )

    def intersect(self, other: "GammaInterval") -> Optional["GammaInterval"]:
        return intersect_intervals([self, other])

    def __str__(self):
        return f"({format_gamma(self.lo)}, {format_gamma(self.hi)}]"


def intersect_intervals(intervals: Iterable[GammaInterval]) -> Optional[GammaInterval]:
    """Exact intersection, or ``None`` when it is empty."""
    lo: GammaValue = Fraction(1)
    hi: Optional[GammaValue] = None
    for iv in intervals:
        if compare_gammas(iv.lo, lo) > 0:
            lo = iv.lo
        if compare_gammas(iv.hi, hi) < 0:
            hi = iv.hi
    if compare_gammas(lo, hi) >= 0:
        return None
    return GammaInterval(lo, hi)


@dataclass(frozen=True)
class SequenceCell:
    """A constancy interval of the truncated gamma-sequence.

    ``label`` is the right end of the interval (``None`` if it never ends).
    """

    label: Optional[BoundaryGamma]
    sequence: GapSequence


def _ceil_sum_at(b: BoundaryGamma, j: int) -> int:
    # ceil(S_j(root of b)), refining b's enclosure as needed
    den_pow = j - 1
    while True:
        q = 1 << b._s
        den = q**den_pow
        lo_num = _sum_numerator(j, b._a, q)
        hi_num = _sum_numerator(j, b._a + 1, q)
        m = -(-hi_num // den)
        if lo_num >= (m - 1) * den:
            return m
        if b._s >= _EQUALITY_SHIFT and hi_num - lo_num < den:
            # one integer t left in (S_j(lo), S_j(hi)]; it may equal S_j(root)
            t = lo_num // den + 1
            return t if compare_boundaries(b, BoundaryGamma(j, t)) <= 0 else t + 1
        b._bisect()


def sequence_at_boundary(b: BoundaryGamma, limit: int) -> GapSequence:
    """The gamma-sequence evaluated exactly at the root of ``b``, up to ``limit``."""
    if limit < 1:
        raise DomainError(f"limit must be >= 1, got {limit}")
    incs = [1]
    j = 2
    while True:
        m = b.h if j == b.k else _ceil_sum_at(b, j)
        if m > limit:
            break
        incs.append(m)
        j += 1
    return GapSequence(tuple(incs), source="gamma", origin_gamma=b)


def sequence_at(x: GammaValue, limit: int) -> GapSequence:
    if isinstance(x, BoundaryGamma):
        return sequence_at_boundary(x, limit)
    return gamma_sequence(as_gamma(x), limit)


def _boundaries_in(interval: GammaInterval, k: int, limit: int) -> list[BoundaryGamma]:
    # all h with lo < root(k, h) <= hi, i.e. S_k(lo) < h <= S_k(hi), and h <= limit
    lo, hi = interval.lo, interval.hi
    start = max(_floor_sum(k, _lower_rational(lo)) + 1, k + 1)
    sure_start = max(_floor_sum(k, _upper_rational(lo)) + 1, start)
    stop = min(_floor_sum(k, _upper_rational(hi)), limit)
    sure_stop = min(_floor_sum(k, _lower_rational(hi)), stop)
    out = []
    for h in range(start, stop + 1):
        b = BoundaryGamma(k, h)
        if h < sure_start and compare_gammas(lo, b) >= 0:
            continue
        if h > sure_stop and compare_gammas(b, hi) > 0:
            continue
        out.append(b)
    return out


def _next_boundary_above(x: GammaValue, k: int, limit: int) -> Optional[BoundaryGamma]:
    h = max(_floor_sum(k, _lower_rational(x)) + 1, k + 1)
    while h <= limit:
        b = BoundaryGamma(k, h)
        if compare_gammas(b, x) > 0:
            return b
        h += 1
    return None


def _max_degree(lo: GammaValue, limit: int):
    # k runs from 2 while the k-th increment at lo can still be <= limit
    x = _lower_rational(lo)
    k = 2
    while True:
        if x <= 1:
            if k >= limit:
                return k - 1
        elif _floor_sum(k, x) >= limit:
            return k - 1
        k += 1


def sorted_boundaries(boundaries: Iterable[BoundaryGamma]) -> list[BoundaryGamma]:
    """Sort exactly and drop coincident boundaries from different (k, h)."""
    ordered = sorted(boundaries, key=cmp_to_key(compare_boundaries))
    out: list[BoundaryGamma] = []
    for b in ordered:
        if out and compare_boundaries(out[-1], b) == 0:
            continue
        out.append(b)
    return out


def enumerate_cells(interval: GammaInterval, limit: int) -> list[SequenceCell]:
    """Every distinct truncated gamma-sequence on ``interval``, in gamma order.

    Each cell is labeled by the right end of its constancy interval, which for
    the last cell may lie beyond ``interval.hi``.
    """
    if limit < 1:
        raise DomainError(f"limit must be >= 1, got {limit}")
    if interval.hi is None:
        raise DomainError("cannot enumerate an unbounded interval")
    kmax = _max_degree(interval.lo, limit)
    found: list[BoundaryGamma] = []
    for k in range(2, kmax + 1):
        found.extend(_boundaries_in(interval, k, limit))
    labels: list[Optional[BoundaryGamma]] = sorted_boundaries(found)
    if not labels or compare_gammas(labels[-1], interval.hi) != 0:
        above = [
            b
            for k in range(2, kmax + 1)
            if (b := _next_boundary_above(interval.hi, k, limit)) is not None
        ]
        labels.append(sorted_boundaries(above)[0] if above else None)
    cells = []
    for label in labels:
        seq = sequence_at(label if label is not None else interval.hi, limit)
        cells.append(SequenceCell(label, seq))
    return cells


# --- prefix ranges -------------------------------------------------------------


def increment_range(position: int, increment: int) -> GammaInterval:
    """Gammas whose ``position``-th increment (1-based) equals ``increment``."""
    if position < 1:
        raise DomainError(f"position must be >= 1, got {position}")
    if position == 1:
        if increment != 1:
            raise UnrealizablePrefixError(f"first increment is always 1, got {increment}")
        return GammaInterval(Fraction(1), None)
    if increment <= position:
        raise UnrealizablePrefixError(
            f"increment {increment} at position {position} needs gamma <= 1"
        )
    if increment - 1 <= position:
        lower: GammaValue = Fraction(1)
    else:
        lower = BoundaryGamma(position, increment - 1)
    return GammaInterval(lower, BoundaryGamma(position, increment))


def gamma_range_for_prefix(prefix: Union[GapSequence, Sequence[int]]) -> GammaInterval:
    """Exact ``(lo, hi]`` of gammas whose sequences begin with ``prefix``."""
    incs = tuple(prefix)
    if not incs:
        raise UnrealizablePrefixError("empty prefix")
    ranges = [increment_range(j, m) for j, m in enumerate(incs, start=1)]
    result = intersect_intervals(ranges)
    if result is None:
        raise UnrealizablePrefixError(f"no gamma realizes prefix {list(incs)}")
    return result


def ciura_increment_ranges() -> list[tuple[int, GammaInterval]]:
    """Per-increment gamma ranges of Ciura's sequence.

    Their intersection is empty (``intersect_intervals`` returns ``None``), so
    Ciura's sequence is not a gamma-sequence.
    """
    return [(h, increment_range(j, h)) for j, h in enumerate(CIURA_INCREMENTS, start=1)]
