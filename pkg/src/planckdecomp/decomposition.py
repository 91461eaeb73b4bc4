"""Integer/fraction split, dyadic expansion and binary-event probabilities,
plus numeric residuals for the three characteristic-function factorizations.

The Planck variable xi = floor(eta) decomposes into independent binary
components u_s in {0, 2**s}; the event "xi = n" is the product of the
occupied/empty events of the bits of n, all higher bits empty.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import distributions as dist
from .constants import SERIES_RTOL
from .params import DARK, GAUSS, PLANCK, DomainError, ModeParams, binary, multiplet


def split_integer_fraction(y):
    """Split y >= 0 into ``(floor(y), y - floor(y))``.

    Both steps are exact in binary floating point, so ``n + z == y`` holds
    bit for bit. Arrays are split element-wise (integer part as int64).
    """
    arr = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("split_integer_fraction needs finite y >= 0")
    n = np.floor(arr)
    z = arr - n
    if arr.ndim == 0:
        return int(n), float(z)
    return n.astype(np.int64), z


@dataclass(frozen=True)
class DyadicExpansion:
    n: int
    bits: tuple[int, ...]

    def reconstruct(self) -> int:
        return sum(1 << s for s in self.bits)


def dyadic_expansion(n: int) -> DyadicExpansion:
    """Positions of the set bits of ``n``, ascending (9 -> (0, 3))."""
    if isinstance(n, (bool, float)) or int(n) != n or n < 0:
        raise DomainError(f"dyadic expansion needs a non-negative integer, got {n!r}")
    n = int(n)
    bits = tuple(s for s in range(n.bit_length()) if (n >> s) & 1)
    return DyadicExpansion(n, bits)


# ---------------------------------------------------------------------------
# Binary event algebra


@dataclass(frozen=True)
class BinaryEvent:
    """A product of occupied/empty literals A_s / not-A_s, or a finite union.

    ``literals`` is a sequence of ``(s, occupied)`` pairs. ``empty_beyond``
    sets the tail: ``None`` leaves unconstrained components free, an integer
    k forces every unconstrained component with s > k to be empty. A union
    carries its members in ``atoms`` and has no literals of its own.
    """

    literals: tuple[tuple[int, bool], ...] = ()
    empty_beyond: Optional[int] = None
    atoms: tuple["BinaryEvent", ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "literals", tuple((int(s), bool(o)) for s, o in self.literals))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        for s, _ in self.literals:
            if s < 0:
                raise DomainError(f"component index must be >= 0, got {s}")
        if self.empty_beyond is not None and self.empty_beyond < -1:
            raise DomainError("empty_beyond must be >= -1")

    @property
    def is_union(self) -> bool:
        return bool(self.atoms)

    def __or__(self, other: "BinaryEvent") -> "BinaryEvent":
        return union(self, other)

    def __and__(self, other: "BinaryEvent") -> "BinaryEvent":
        return intersect(self, other)


def occupied(s: int) -> tuple[int, bool]:
    return (s, True)


def empty(s: int) -> tuple[int, bool]:
    return (s, False)


def atom(*literals: tuple[int, bool], empty_beyond: Optional[int] = None) -> BinaryEvent:
    return BinaryEvent(literals=literals, empty_beyond=empty_beyond)


def union(*events: BinaryEvent) -> BinaryEvent:
    members: list[BinaryEvent] = []
    for e in events:
        members.extend(e.atoms if e.is_union else (e,))
    return BinaryEvent(atoms=tuple(members))


def bose_event(n: int) -> BinaryEvent:
    """B_n: exactly n quanta, i.e. the bits of n occupied and all others empty."""
    return atom(*(occupied(s) for s in dyadic_expansion(n).bits), empty_beyond=-1)


def _canonical(e: BinaryEvent) -> Optional[dict[int, bool]]:
    """Explicit constraints of an atom, or None if they contradict."""
    out: dict[int, bool] = {}
    for s, occ in e.literals:
        if out.get(s, occ) != occ:
            return None
        out[s] = occ
    return out


def intersect(a: BinaryEvent, b: BinaryEvent) -> BinaryEvent:
    """Product of two atoms. Contradictions yield an atom with clashing literals."""
    if a.is_union or b.is_union:
        raise DomainError("intersect is defined for atoms; distribute unions explicitly")
    lits = list(a.literals) + list(b.literals)
    # an explicit occupied literal above the other atom's empty tail clashes
    for x, y in ((a, b), (b, a)):
        if y.empty_beyond is None:
            continue
        ys = {s for s, _ in y.literals}
        for s, occ in x.literals:
            if occ and s > y.empty_beyond and s not in ys:
                lits.append((s, False))
    bounds = [k for k in (a.empty_beyond, b.empty_beyond) if k is not None]
    return atom(*lits, empty_beyond=min(bounds) if bounds else None)


def _tail_log_empty(p: ModeParams, start: int, skip: Iterable[int]) -> float:
    """sum_{s >= start, s not in skip} log P(not A_s), truncated by SERIES_RTOL."""
    skip = set(skip)
    total = 0.0
    s = start
    while True:
        if s not in skip:
            term = -math.log1p(math.exp(-math.ldexp(p.beta, s)))
            if term == 0.0 or abs(term) < SERIES_RTOL * abs(total):
                return total
            total += term
        s += 1


def event_log_probability(e: BinaryEvent, p: ModeParams) -> float:
    """Log-probability of an atom (``-inf`` for a contradictory atom)."""
    if e.is_union:
        raise DomainError("log-probability is defined for atoms; use event_probability for unions")
    cons = _canonical(e)
    if cons is None:
        return -math.inf
    total = 0.0
    for s, occ in cons.items():
        log_empty, log_occ = dist.binary_log_occupation(s, p)
        total += log_occ if occ else log_empty
    if e.empty_beyond is not None:
        total += _tail_log_empty(p, e.empty_beyond + 1, cons)
    return total


def event_probability(e: BinaryEvent, p: ModeParams) -> float:
    """Probability of an atom or of a finite union (inclusion-exclusion)."""
    if not e.is_union:
        return math.exp(event_log_probability(e, p))
    if e.literals or e.empty_beyond is not None:
        raise DomainError("a union carries its constraints in its atoms only")
    for a in e.atoms:
        if a.is_union:
            raise DomainError("nested unions are not supported; flatten with union()")
    total = 0.0
    atoms = e.atoms
    for r in range(1, len(atoms) + 1):
        sign = 1.0 if r % 2 else -1.0
        for combo in itertools.combinations(atoms, r):
            inter = combo[0]
            for other in combo[1:]:
                inter = intersect(inter, other)
            total += sign * event_probability(inter, p)
    return total


def planck_pmf_via_binaries(n: int, p: ModeParams, s_max: int = 40) -> float:
    """P(xi = n) assembled from independent binary components 0..s_max and the
    empty tail beyond."""
    if n < 0 or n >= (1 << (s_max + 1)):
        raise DomainError(f"n={n} not representable with components 0..{s_max}")
    return math.exp(planck_logpmf_via_binaries(n, p, s_max))


def planck_logpmf_via_binaries(n: int, p: ModeParams, s_max: int = 40) -> float:
    if n < 0 or n >= (1 << (s_max + 1)):
        raise DomainError(f"n={n} not representable with components 0..{s_max}")
    bits = set(dyadic_expansion(n).bits)
    e = atom(*((s, s in bits) for s in range(s_max + 1)), empty_beyond=s_max)
    return event_log_probability(e, p)


# ---------------------------------------------------------------------------
# Characteristic-function factorizations


class FactorizationKind(enum.Enum):
    GAUSS_EQUALS_DARK_TIMES_PLANCK = "gauss=dark*planck"
    PLANCK_EQUALS_BINARY_PRODUCT = "planck=prod binary"
    PLANCK_EQUALS_MULTIPLET_PRODUCT = "planck=prod multiplet"


def factor_product(kind: FactorizationKind, t, p: ModeParams, truncation: int):
    """Right-hand side of a factorization, truncated after ``truncation`` factors."""
    t = np.asarray(t, dtype=float)
    if kind is FactorizationKind.GAUSS_EQUALS_DARK_TIMES_PLANCK:
        return dist.characteristic_function(DARK, t, p) * dist.characteristic_function(PLANCK, t, p)
    prod = np.ones_like(t, dtype=complex)
    if kind is FactorizationKind.PLANCK_EQUALS_BINARY_PRODUCT:
        for s in range(truncation + 1):
            prod = prod * dist.characteristic_function(binary(s), t, p)
    else:
        for m in range(1, truncation + 1):
            prod = prod * dist.characteristic_function(multiplet(m), t, p)
    return prod


def cf_factorization_residual(
    kind: FactorizationKind, t_grid: Sequence[float], p: ModeParams, truncation: int = 40
) -> float:
    """max_t |phi_lhs(t) - product of factor CFs| over the grid.

    ``truncation`` is the largest binary index s, or the number of multiplet
    orders M; it is ignored for the two-factor Gauss split.
    """
    if truncation < 0:
        raise DomainError("truncation must be >= 0")
    t = np.asarray(t_grid, dtype=float)
    lhs_family = GAUSS if kind is FactorizationKind.GAUSS_EQUALS_DARK_TIMES_PLANCK else PLANCK
    lhs = dist.characteristic_function(lhs_family, t, p)
    rhs = factor_product(kind, t, p, truncation)
    if t.size == 0:
        return 0.0
    return float(np.max(np.abs(lhs - rhs)))


def poisson_logcf_partial(t, p: ModeParams, M: int):
    """sum_{m=1..M} (b**m / m)(e^{imt} - 1), the truncated log of the Planck CF.

    Since |1 - b e^{it}| >= 1 - b > 0, the Planck CF (1-b)/(1 - b e^{it})
    never winds round the origin and its principal logarithm is the limit.
    """
    if M < 1:
        raise DomainError("M must be >= 1")
    t = np.asarray(t, dtype=float)
    m = np.arange(1, M + 1, dtype=float)
    lam = np.exp(-m * p.beta) / m
    terms = lam * np.expm1(1j * np.multiply.outer(t, m))
    out = terms.sum(axis=-1)
    return out.item() if out.ndim == 0 else out


def poisson_logcf_tail_bound(p: ModeParams, M: int) -> float:
    """Bound 2 b^{M+1} / ((M+1)(1-b)) on the series remainder after M terms."""
    return 2.0 * math.exp(-(M + 1) * p.beta) / ((M + 1) * -math.expm1(-p.beta))
