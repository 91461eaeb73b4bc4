"""Spectral energy densities in CGS units, the displacement-law peak, and
Planck's natural units."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .constants import MODERN, PhysicalConstants
from .params import DomainError, ModeParams
from .thermodynamics import BandSpec, check_band_modes, einstein_split

# Above this h nu / k T the Planck and Wien laws are evaluated in log space.
_LOG_SPACE_BETA = 700.0


class SpectralLaw(enum.Enum):
    PLANCK = "planck"
    RAYLEIGH_JEANS = "rj"
    WIEN = "wien"
    SCHWEIKERT = "schweikert"


def mode_density(nu, consts: PhysicalConstants = MODERN):
    """8 pi nu**2 / c**3, modes per cm**3 per Hz."""
    nu = np.asarray(nu, dtype=float)
    if np.any(nu <= 0):
        raise DomainError("frequency must be positive")
    out = 8.0 * math.pi * nu**2 / consts.c**3
    return out.item() if out.ndim == 0 else out


def spectral_density(law: SpectralLaw, nu, T: float, consts: PhysicalConstants = MODERN):
    """Energy density per unit frequency, erg cm**-3 Hz**-1."""
    if not T > 0:
        raise DomainError("temperature must be positive")
    nu = np.asarray(nu, dtype=float)
    z = np.asarray(mode_density(nu, consts))
    quantum = consts.h * nu
    kT = consts.k * T
    beta = quantum / kT
    if law is SpectralLaw.RAYLEIGH_JEANS:
        out = z * kT
    else:
        with np.errstate(under="ignore", divide="ignore"):
            boltz = np.exp(-beta)
            if law is SpectralLaw.SCHWEIKERT:
                out = z * (kT + quantum) * boltz
            else:
                out = z * quantum * boltz
                if law is SpectralLaw.PLANCK:
                    out = out / -np.expm1(-beta)
                far = beta > _LOG_SPACE_BETA
                if np.any(far):
                    logs = np.log(z * quantum) - beta
                    if law is SpectralLaw.PLANCK:
                        logs = logs - np.log(-np.expm1(-beta))
                    out = np.where(far, np.exp(logs), out)
    out = np.asarray(out, dtype=float)
    return out.item() if out.ndim == 0 else out


def wien_constant(tol: float = 1e-15) -> float:
    """Root x* of x = 3 (1 - e**-x) by Newton iteration (x* ~ 2.8214)."""
    x = 3.0
    for _ in range(100):
        g = x - 3.0 * -math.expm1(-x)
        dg = 1.0 - 3.0 * math.exp(-x)
        step = g / dg
        x -= step
        if abs(step) <= tol * x:
            return x
    raise ArithmeticError("Newton iteration for the displacement constant did not converge")


def wien_peak(T: float, consts: PhysicalConstants = MODERN) -> float:
    """Frequency (Hz) at which the Planck density per unit frequency peaks."""
    if not T > 0:
        raise DomainError("temperature must be positive")
    return wien_constant() * consts.k * T / consts.h


@dataclass(frozen=True)
class NaturalUnits:
    l_p: float
    t_p: float
    T_p: float
    m_p: float


def natural_units(consts: PhysicalConstants = MODERN) -> NaturalUnits:
    hbar = consts.hbar
    l_p = math.sqrt(hbar * consts.G / consts.c**3)
    m_p = math.sqrt(hbar * consts.c / consts.G)
    return NaturalUnits(l_p=l_p, t_p=l_p / consts.c, T_p=m_p * consts.c**2 / consts.k, m_p=m_p)


def band_statistics(band: BandSpec, T: float):
    """Mode count, mean band energy (erg) and its variance (erg**2).

    Warns when the band holds fewer than one mode.
    """
    modes = check_band_modes(band)
    p = ModeParams.from_physical(band.nu, T, band.consts)
    split = einstein_split(band, p)
    return modes, split.mean_energy, split.total


SPECTRUM_COLUMNS = {
    SpectralLaw.PLANCK: "u_planck",
    SpectralLaw.RAYLEIGH_JEANS: "u_rj",
    SpectralLaw.WIEN: "u_wien",
    SpectralLaw.SCHWEIKERT: "u_schweikert",
}


def spectrum_table(T: float, nu, laws=tuple(SpectralLaw), consts: PhysicalConstants = MODERN) -> dict:
    """Columns ``nu_Hz`` plus one ``u_<law>`` column per requested law."""
    nu = np.asarray(nu, dtype=float)
    table = {"nu_Hz": nu}
    for law in SpectralLaw:
        if law in laws:
            table[SPECTRUM_COLUMNS[law]] = np.atleast_1d(spectral_density(law, nu, T, consts))
    return table
