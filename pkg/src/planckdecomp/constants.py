"""Physical constants (CGS) and shared numerical settings."""

from __future__ import annotations

from dataclasses import dataclass

# Series/product truncation: stop once the next term is below this fraction
# of the running sum.
SERIES_RTOL = 1e-18


@dataclass(frozen=True)
class PhysicalConstants:
    """Universal constants in CGS units.

    Attributes
    ----------
    h : Planck constant, erg s
    k : Boltzmann constant, erg/K
    c : speed of light, cm/s
    G : gravitational constant, cm^3 g^-1 s^-2
    provenance : ``"paper"`` or ``"modern"``
    """

    h: float
    k: float
    c: float
    G: float
    provenance: str

    def __post_init__(self):
        for name in ("h", "k", "c", "G"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"constant {name} must be positive, got {value!r}")
        if self.provenance not in ("paper", "modern"):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @property
    def hbar(self) -> float:
        return self.h / (2.0 * 3.141592653589793)


# CODATA 2018 (h, k, c exact in SI; G measured).
MODERN = PhysicalConstants(
    h=6.62607015e-27,
    k=1.380649e-16,
    c=2.99792458e10,
    G=6.67430e-8,
    provenance="modern",
)

# Four-figure h and k; c and G take their modern values.
PAPER = PhysicalConstants(
    h=6.626e-27,
    k=1.381e-16,
    c=MODERN.c,
    G=MODERN.G,
    provenance="paper",
)


def constants_by_name(name: str) -> PhysicalConstants:
    try:
        return {"paper": PAPER, "modern": MODERN}[name]
    except KeyError:
        raise ValueError(f"unknown constants set {name!r} (expected 'paper' or 'modern')") from None
