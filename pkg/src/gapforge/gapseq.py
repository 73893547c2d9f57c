"""Gap sequence generators: gamma-sequences, Tokuda, Ciura.

A gamma-sequence has k-th increment ``ceil((gamma**k - 1) / (gamma - 1))``,
i.e. the ceiling of the partial geometric sum ``1 + gamma + ... + gamma**(k-1)``.
All evaluation is done on exact rationals, so the ceiling never flips because
of rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Optional, Union

from .errors import DomainError

GammaLike = Union[int, Fraction, Decimal, str, float]

TOKUDA_GAMMA = Fraction(9, 4)
CIURA_INCREMENTS = (1, 4, 10, 23, 57, 132, 301, 701)


@dataclass(frozen=True)
class GapSequence:
    """Strictly increasing increments starting at 1.

    ``source`` is one of ``"gamma"``, ``"tokuda"``, ``"ciura"``,
    ``"ciura-extended"`` or ``"custom"``; only ``increments`` takes part in
    equality.
    """

    increments: tuple[int, ...]
    source: str = field(default="custom", compare=False)
    origin_gamma: Optional[object] = field(default=None, compare=False)

    def __post_init__(self):
        incs = tuple(int(h) for h in self.increments)
        object.__setattr__(self, "increments", incs)
        if not incs:
            raise ValueError("gap sequence must be nonempty")
        if incs[0] != 1:
            raise ValueError(f"first increment must be 1, got {incs[0]}")
        for a, b in zip(incs, incs[1:]):
            if b <= a:
                raise ValueError(f"increments not strictly increasing: {a}, {b}")

    def __len__(self):
        return len(self.increments)

    def __iter__(self):
        return iter(self.increments)

    def __getitem__(self, i):
        return self.increments[i]

    def startswith(self, prefix: Iterable[int]) -> bool:
        prefix = tuple(prefix)
        return self.increments[: len(prefix)] == prefix

    @property
    def label(self) -> str:
        """Short descriptor used as ``sequence_id`` in benchmark output."""
        if self.source == "gamma" and self.origin_gamma is not None:
            return f"gamma:{_format_gamma(self.origin_gamma)}"
        if self.source in ("tokuda", "ciura", "ciura-extended"):
            return self.source
        return ",".join(map(str, self.increments))

    def __str__(self):
        return ", ".join(map(str, self.increments))


def _format_gamma(g) -> str:
    if isinstance(g, Fraction):
        if g.denominator == 1:
            return str(g.numerator)
        d = g.denominator
        twos = fives = 0
        while d % 2 == 0:
            d //= 2
            twos += 1
        while d % 5 == 0:
            d //= 5
            fives += 1
        if d == 1:
            # terminating decimal: print it exactly
            places = max(twos, fives)
            scaled = g * 10**places
            s = str(scaled.numerator).rjust(places + 1, "0")
            return (s[:-places] + "." + s[-places:]).rstrip("0").rstrip(".")
        return f"{g.numerator}/{g.denominator}"
    return str(g)


def as_gamma(value: GammaLike) -> Fraction:
    """Convert ``value`` to an exact rational gamma > 1.

    Strings may be decimals of any length or ``p/q``; floats are read through
    their shortest repr, so ``2.24`` means 224/100 and not the nearest double.
    """
    if isinstance(value, Fraction):
        g = value
    elif isinstance(value, bool):
        raise DomainError(f"not a gamma value: {value!r}")
    elif isinstance(value, (int, Rational)):
        g = Fraction(value)
    elif isinstance(value, float):
        g = Fraction(repr(value))
    elif isinstance(value, (str, Decimal)):
        try:
            g = Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"malformed gamma {value!r}") from exc
    else:
        raise DomainError(f"unsupported gamma type {type(value).__name__}")
    if g <= 1:
        raise DomainError(f"gamma must exceed 1, got {value!r}")
    return g


def _sum_numerator(k: int, p: int, q: int) -> int:
    # numerator N with 1 + x + ... + x**(k-1) == N / q**(k-1) for x = p/q
    if p == q:
        return k * q ** (k - 1)
    return (p**k - q**k) // (p - q)


def gamma_increment(gamma: GammaLike, k: int) -> int:
    """Return ``ceil((gamma**k - 1) / (gamma - 1))`` exactly."""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    g = as_gamma(gamma)
    p, q = g.numerator, g.denominator
    num = _sum_numerator(k, p, q)
    return -(-num // q ** (k - 1))


def gamma_sequence(gamma: GammaLike, limit: int) -> GapSequence:
    """All increments of the gamma-sequence that do not exceed ``limit``."""
    if limit < 1:
        raise DomainError(f"limit must be >= 1, got {limit}")
    g = as_gamma(gamma)
    incs = []
    k = 1
    while True:
        h = gamma_increment(g, k)
        if h > limit:
            break
        incs.append(h)
        k += 1
    return GapSequence(tuple(incs), source="gamma", origin_gamma=g)


def tokuda_sequence(limit: int) -> GapSequence:
    """Tokuda's sequence (the gamma-sequence at 9/4) up to ``limit``.

    Each term is cross-checked against the form
    ``ceil((9 * (9/4)**(k-1) - 4) / 5)``; a disagreement raises.
    """
    seq = gamma_sequence(TOKUDA_GAMMA, limit)
    for k, h in enumerate(seq.increments, start=1):
        alt = -(-(9 * 9 ** (k - 1) - 4 * 4 ** (k - 1)) // (5 * 4 ** (k - 1)))
        if alt != h:
            raise AssertionError(f"Tokuda forms disagree at k={k}: {h} != {alt}")
    return GapSequence(seq.increments, source="tokuda", origin_gamma=TOKUDA_GAMMA)


def ciura_sequence(limit: int, extended: bool = False) -> GapSequence:
    """Ciura's increments up to ``limit``, optionally extended by floor(2.25 h)."""
    if limit < 1:
        raise DomainError(f"limit must be >= 1, got {limit}")
    incs = [h for h in CIURA_INCREMENTS if h <= limit]
    if extended and len(incs) == len(CIURA_INCREMENTS):
        h = incs[-1]
        while True:
            h = 9 * h // 4
            if h > limit:
                break
            incs.append(h)
    return GapSequence(
        tuple(incs), source="ciura-extended" if extended else "ciura"
    )


def truncate_for_size(seq: GapSequence, n_elements: int) -> GapSequence:
    """Drop increments larger than ``n_elements / 2``; increment 1 always stays."""
    if n_elements < 1:
        raise DomainError(f"n_elements must be >= 1, got {n_elements}")
    kept = tuple(h for h in seq.increments if h == 1 or 2 * h <= n_elements)
    return GapSequence(kept, source=seq.source, origin_gamma=seq.origin_gamma)
