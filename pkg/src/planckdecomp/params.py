"""Mode parameters and the tags for the five random-variable families."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .constants import MODERN, PhysicalConstants


class DomainError(ValueError):
    """An argument lies outside the support or domain of an operation."""


@dataclass(frozen=True)
class ModeParams:
    """One spectral mode, described by the dimensionless ratio beta = h nu / k T.

    Build it either from ``beta`` alone (``ModeParams(beta)``) or from
    physical inputs with :meth:`from_physical`; the latter also records the
    energy quantum ``eps0 = h nu`` so results can be converted to erg.
    """

    beta: float
    nu: Optional[float] = None
    T: Optional[float] = None
    consts: Optional[PhysicalConstants] = None

    def __post_init__(self):
        beta = float(self.beta)
        if not (math.isfinite(beta) and beta > 0):
            raise DomainError(f"beta must be positive and finite, got {self.beta!r}")
        object.__setattr__(self, "beta", beta)
        if (self.nu is None) != (self.T is None):
            raise DomainError("nu and T must be given together")
        if self.nu is not None:
            if not (self.nu > 0 and self.T > 0):
                raise DomainError("nu and T must be positive")
            consts = self.consts or MODERN
            object.__setattr__(self, "consts", consts)
            expected = consts.h * self.nu / (consts.k * self.T)
            if abs(beta - expected) > 1e-12 * expected:
                raise DomainError(f"beta={beta!r} inconsistent with h nu / k T = {expected!r}")

    @classmethod
    def from_physical(cls, nu: float, T: float, consts: PhysicalConstants = MODERN) -> "ModeParams":
        if not (nu > 0 and T > 0):
            raise DomainError("nu and T must be positive")
        return cls(consts.h * nu / (consts.k * T), nu=nu, T=T, consts=consts)

    @property
    def b(self) -> float:
        """Boltzmann factor exp(-beta) (underflows to 0 beyond beta ~ 745)."""
        return math.exp(-self.beta)

    @property
    def nbar(self) -> float:
        """Mean photon occupation 1 / (e^beta - 1), written to survive beta > 709."""
        return math.exp(-self.beta) / -math.expm1(-self.beta)

    @property
    def eps0(self) -> Optional[float]:
        """Energy quantum h nu in erg, or None for a dimensionless mode."""
        if self.nu is None:
            return None
        return self.consts.h * self.nu

    @property
    def is_physical(self) -> bool:
        return self.nu is not None


class Kind(enum.Enum):
    GAUSS = "gauss"
    DARK = "dark"
    PLANCK = "planck"
    BINARY = "binary"
    MULTIPLET = "multiplet"


@dataclass(frozen=True)
class VariableFamily:
    """Tag for one of the five families, with its index where it has one.

    ``Binary(s)`` is the s-th dyadic component (energy 2**s quanta) and
    ``Multiplet(m)`` the Poisson component counting m-quantum clusters.
    """

    kind: Kind
    index: Optional[int] = None

    def __post_init__(self):
        if self.kind is Kind.BINARY:
            if self.index is None or int(self.index) != self.index or self.index < 0:
                raise DomainError(f"binary index must be a non-negative integer, got {self.index!r}")
        elif self.kind is Kind.MULTIPLET:
            if self.index is None or int(self.index) != self.index or self.index < 1:
                raise DomainError(f"multiplet index must be a positive integer, got {self.index!r}")
        elif self.index is not None:
            raise DomainError(f"{self.kind.value} takes no index")

    @property
    def is_discrete(self) -> bool:
        return self.kind not in (Kind.GAUSS, Kind.DARK)

    def __str__(self) -> str:
        if self.index is None:
            return self.kind.value
        return f"{self.kind.value}({self.index})"


GAUSS = VariableFamily(Kind.GAUSS)
DARK = VariableFamily(Kind.DARK)
PLANCK = VariableFamily(Kind.PLANCK)


def binary(s: int) -> VariableFamily:
    return VariableFamily(Kind.BINARY, s)


def multiplet(m: int) -> VariableFamily:
    return VariableFamily(Kind.MULTIPLET, m)


@dataclass(frozen=True)
class MomentSummary:
    """Mean and variance in units of eps0 (and eps0**2), entropy in units of k."""

    mean: float
    variance: float
    entropy_over_k: float

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError(f"negative variance {self.variance!r}")
