"""Entropies, mean energies and fluctuations of the mode components, with the
consistency checks that tie them together (additivity, dS/dE = 1/T,
detailed balance, volume dependence of the multiplet-gas entropy)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import expit, gammaln, xlog1py, xlogy

from . import distributions as dist
from ._kernels import get_backend
from .constants import MODERN, PhysicalConstants
from .params import DARK, GAUSS, PLANCK, DomainError, ModeParams, VariableFamily, binary, multiplet
from .sampling import RandomStream


@dataclass(frozen=True)
class BandSpec:
    """Spectral band (nu, nu + dnu) inside volume V."""

    V: float
    nu: float
    dnu: float
    consts: PhysicalConstants = MODERN

    def __post_init__(self):
        if not (self.V > 0 and self.nu > 0 and self.dnu > 0):
            raise DomainError("V, nu and dnu must be positive")

    @property
    def mode_density(self) -> float:
        return 8.0 * math.pi * self.nu**2 / self.consts.c**3

    @property
    def modes(self) -> float:
        return self.V * self.mode_density * self.dnu


def entropy_of(f: VariableFamily, p: ModeParams) -> float:
    """Entropy over k: Gauss 1 - ln beta, Planck (1+n)ln(1+n) - n ln n,
    binary components the binary entropy of their occupation, multiplets
    (x - x ln x)/m with x = b**m, dark part from its own density."""
    return dist.entropy_over_k(f, p)


def mean_energy_of(f: VariableFamily, p: ModeParams) -> float:
    """Mean energy in units of eps0."""
    return dist.mean_and_variance(f, p)[0]


def entropy_additivity_residuals(p: ModeParams, s_max: int = 60, m_max: int = 2000):
    """Return ``(|S_eta - S_xi - S_zeta|, |S_xi - sum_s S_s|, |S_xi - sum_m S_m|)``, over k."""
    if s_max < 0 or m_max < 1:
        raise DomainError("need s_max >= 0 and m_max >= 1")
    s_eta = entropy_of(GAUSS, p)
    s_xi = entropy_of(PLANCK, p)
    s_zeta = entropy_of(DARK, p)
    binary_sum = math.fsum(entropy_of(binary(s), p) for s in range(s_max + 1))
    multiplet_sum = math.fsum(entropy_of(multiplet(m), p) for m in range(1, m_max + 1))
    return abs(s_eta - s_xi - s_zeta), abs(s_xi - binary_sum), abs(s_xi - multiplet_sum)


def fluctuation_series(kind: str, p: ModeParams, truncation: int):
    """Partial sums of the component variances that add up to nbar + nbar**2.

    ``kind="binary"`` sums 4**s n_s (1 - n_s) over s = 0..truncation (the
    fermionic variance 2**s u_s - u_s**2); ``kind="multiplet"`` sums
    m**2 lambda_m = m b**m over m = 1..truncation. Returns
    ``(partial_sums, total)``.
    """
    if truncation < 1:
        raise DomainError("truncation must be >= 1")
    if kind == "binary":
        s = np.arange(truncation + 1)
        x = np.ldexp(p.beta, s)
        terms = np.ldexp(1.0, 2 * s) * expit(-x) * expit(x)
    elif kind == "multiplet":
        m = np.arange(1, truncation + 1, dtype=float)
        terms = m * np.exp(-m * p.beta)
    else:
        raise DomainError(f"unknown fluctuation series {kind!r}")
    partial = np.cumsum(terms)
    return partial, float(partial[-1])


def dark_fluctuation_printed(p: ModeParams) -> float:
    """Per-mode value of (2 nbar - 1) h nu E_zeta + E_zeta**2 / m_nu, in eps0**2.

    For a band of m_nu modes with E_zeta = m_nu h nu zeta_bar the mode count
    factors out, leaving (2 nbar - 1) zeta_bar + zeta_bar**2. This form does
    not equal the dark variance; it is evaluated only to report how far off
    it is (see :func:`distributions.dark_variance` for the exact value).
    """
    n = p.nbar
    zbar = dist.dark_mean(p.beta)
    return (2.0 * n - 1.0) * zbar + zbar**2


@dataclass(frozen=True)
class EinsteinSplit:
    particle: float
    wave: float
    total: float
    mean_energy: float


def einstein_split(band, p: ModeParams, quantum: Optional[float] = None) -> EinsteinSplit:
    """Split the band energy variance into hnu*E (particle) and E**2/m (wave).

    ``band`` is a :class:`BandSpec` or a bare mode count. ``quantum`` is the
    energy h nu; it defaults to the band's (or the mode's) physical quantum.
    """
    if isinstance(band, BandSpec):
        modes = band.modes
        if quantum is None:
            quantum = band.consts.h * band.nu
    else:
        modes = float(band)
    if quantum is None:
        quantum = p.eps0
    if quantum is None:
        raise DomainError("no energy quantum: pass quantum= or a physical mode/band")
    if not modes > 0:
        raise DomainError("mode count must be positive")
    mean_energy = modes * quantum * p.nbar
    particle = quantum * mean_energy
    wave = mean_energy**2 / modes
    return EinsteinSplit(particle, wave, particle + wave, mean_energy)


def thermo_consistency(
    f: VariableFamily,
    nu: float,
    T: float,
    delta: float = 1e-5,
    consts: PhysicalConstants = MODERN,
) -> float:
    """|T dS/dE - 1| with dS/dE from central differences in T at fixed nu.

    E(T) is monotone, so dS/dE = (dS/dT)/(dE/dT) and differencing in T is
    equivalent to differencing in E.
    """
    if not 1e-7 <= delta <= 1e-2:
        raise DomainError("relative step must lie in [1e-7, 1e-2]")

    def state(temp):
        p = ModeParams.from_physical(nu, temp, consts)
        return consts.k * entropy_of(f, p), p.eps0 * mean_energy_of(f, p)

    s_hi, e_hi = state(T * (1.0 + delta))
    s_lo, e_lo = state(T * (1.0 - delta))
    d_e = e_hi - e_lo
    if abs(d_e) < 1e-30:
        raise ArithmeticError(f"energy step {d_e:.3g} erg too small for a finite difference")
    return abs(T * (s_hi - s_lo) / d_e - 1.0)


def binary_entropy(x: float) -> float:
    return -float(xlogy(x, x) + xlog1py(1.0 - x, -x))


def combinatorial_entropy(M: int, P: int) -> float:
    """(1/M) ln C(M, P): entropy per mode of P fermion excitations on M modes."""
    if M < 1 or P < 0:
        raise DomainError("need M >= 1 and P >= 0")
    if P > M:
        raise DomainError("P cannot exceed M")
    return float(gammaln(M + 1.0) - gammaln(P + 1.0) - gammaln(M - P + 1.0)) / M


# ---------------------------------------------------------------------------
# Sub-volume counting


def subvolume_count_pmf(N0: int, V: float, V0: float, N):
    """Binomial probability of finding N of N0 independent particles in V of V0."""
    if not 0 < V <= V0:
        raise DomainError("need 0 < V <= V0")
    if N0 < 1:
        raise DomainError("N0 must be positive")
    N = np.asarray(N)
    if np.any(N < 0) or np.any(N > N0):
        raise DomainError("N must lie in 0..N0")
    r = V / V0
    logc = gammaln(N0 + 1.0) - gammaln(N + 1.0) - gammaln(N0 - N + 1.0)
    out = np.exp(logc + xlogy(N, r) + xlog1py(N0 - N, -r))
    return out.item() if out.ndim == 0 else out


def poisson_log_pmf(N, lam: float):
    N = np.asarray(N, dtype=float)
    return xlogy(N, lam) - lam - gammaln(N + 1.0)


def poisson_limit_distance(N0: int, lam: float) -> float:
    """Total variation between Binomial(N0, lam/N0) and Poisson(lam)."""
    if not 0 < lam <= N0:
        raise DomainError("need 0 < lam <= N0")
    r = lam / N0
    # sum until both masses are negligible, then account for the tails
    K = int(min(N0, lam + 40.0 * math.sqrt(lam) + 50))
    N = np.arange(K + 1)
    # log C(N0, N) accumulated term by term; gammaln differences at N0 ~ 1e6
    # would cancel away nine digits
    j = np.arange(K, dtype=float)
    logc = np.concatenate(([0.0], np.cumsum(np.log((N0 - j) / (j + 1.0)))))
    binom = np.exp(logc + xlogy(N, r) + xlog1py(N0 - N, -r))
    pois = np.exp(poisson_log_pmf(N, lam))
    body = math.fsum(np.abs(binom - pois))
    tails = max(0.0, 1.0 - math.fsum(binom)) + max(0.0, 1.0 - math.fsum(pois))
    return 0.5 * (body + tails)


# ---------------------------------------------------------------------------
# Detailed-balance kinetics


@dataclass(frozen=True)
class KineticSystem:
    """Fermionic levels exchanging pairs of excitations.

    ``quadruples`` holds index tuples (i1, i2, j1, j2) for the process
    i1 + i2 -> j1 + j2; each must conserve energy. ``occupations`` are the
    current mean occupations, strictly inside (0, 1).
    """

    levels: tuple[float, ...]
    beta: float
    quadruples: tuple[tuple[int, int, int, int], ...]
    occupations: tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(e) for e in self.levels))
        object.__setattr__(self, "quadruples", tuple(tuple(int(i) for i in q) for q in self.quadruples))
        if not self.occupations:
            object.__setattr__(self, "occupations", tuple(fermi_occupations(self.levels, self.beta)))
        object.__setattr__(self, "occupations", tuple(float(x) for x in self.occupations))
        if not self.beta > 0:
            raise DomainError("beta must be positive")
        if any(e <= 0 for e in self.levels):
            raise DomainError("level energies must be positive")
        if len(self.occupations) != len(self.levels):
            raise DomainError("one occupation per level")
        if any(not 0.0 < x < 1.0 for x in self.occupations):
            raise DomainError("occupations must lie strictly inside (0, 1)")
        n = len(self.levels)
        for q in self.quadruples:
            if len(q) != 4 or any(not 0 <= i < n for i in q):
                raise DomainError(f"bad quadruple {q}")
            lhs = self.levels[q[0]] + self.levels[q[1]]
            rhs = self.levels[q[2]] + self.levels[q[3]]
            if abs(lhs - rhs) > 1e-9 * max(abs(lhs), abs(rhs)):
                raise DomainError(f"quadruple {q} does not conserve energy ({lhs} != {rhs})")


def fermi_occupations(levels: Sequence[float], beta: float) -> np.ndarray:
    """1 / (exp(beta eps) + 1), zero chemical potential."""
    return expit(-beta * np.asarray(levels, dtype=float))


def kinetic_balance_residual(ks: KineticSystem) -> float:
    """max over quadruples of |q_i1 q_i2 - q_j1 q_j2| with q = n / (1 - n)."""
    n = np.asarray(ks.occupations)
    q = n / (1.0 - n)
    if not ks.quadruples:
        return 0.0
    return max(abs(q[a] * q[b] - q[c] * q[d]) for a, b, c, d in ks.quadruples)


@dataclass(frozen=True)
class RelaxationResult:
    occupations: np.ndarray
    final_occupations: np.ndarray
    moves: int
    burn_in: int
    slots_per_level: int


def initial_slots(occupations: Sequence[float], slots_per_level: int, rs: RandomStream) -> np.ndarray:
    """Slot matrix with round(n * slots) occupied slots per level, randomly placed."""
    g = rs.generator(0)
    out = np.zeros((len(occupations), slots_per_level), dtype=np.uint8)
    for lv, x in enumerate(occupations):
        k = int(round(x * slots_per_level))
        out[lv, g.permutation(slots_per_level)[:k]] = 1
    return out


def kinetic_relaxation(
    ks: KineticSystem,
    steps: int,
    rs: RandomStream,
    slots_per_level: int = 10_000,
    burn_in: Optional[int] = None,
    backend: Optional[str] = None,
) -> RelaxationResult:
    """Stochastic pair-exchange dynamics over an ensemble of binary slots.

    Each move picks a quadruple uniformly, a direction with probability 1/2
    (equal forward and backward rates) and one random slot in each of the
    four levels; it fires when both source slots are occupied and both
    targets empty. Moves conserve particle number and energy, so the
    initial occupations (``ks.occupations``) fix which fixed point of
    q_i1 q_i2 = q_j1 q_j2 is reached. Occupations are time-averaged over
    the moves after ``burn_in`` (default: half the run).
    """
    if not ks.quadruples:
        raise DomainError("relaxation needs at least one quadruple")
    if steps < 1 or slots_per_level < 1:
        raise DomainError("steps and slots_per_level must be positive")
    if burn_in is None:
        burn_in = steps // 2
    if not 0 <= burn_in < steps:
        raise DomainError("burn_in must lie in [0, steps)")
    slots = initial_slots(ks.occupations, slots_per_level, rs)
    g = rs.generator(1)
    qidx = g.integers(0, len(ks.quadruples), size=steps)
    reverse = g.integers(0, 2, size=steps).astype(bool)
    picks = g.integers(0, slots_per_level, size=(steps, 4))
    quads = np.array(ks.quadruples, dtype=np.int64)
    acc, final = get_backend(backend).kinetic_walk(slots, quads, qidx, reverse, picks, burn_in)
    avg = acc / float((steps - burn_in) * slots_per_level)
    return RelaxationResult(avg, final.mean(axis=1), steps, burn_in, slots_per_level)


# ---------------------------------------------------------------------------
# Volume dependence


@dataclass(frozen=True)
class VolumeComparison:
    """Two volumes V <= V0 holding the m-th multiplet gas at band energy E_of_m (erg)."""

    V: float
    V0: float
    m: int
    E_of_m: float

    def __post_init__(self):
        if not 0 < self.V <= self.V0:
            raise DomainError("need 0 < V <= V0")
        if self.m < 1:
            raise DomainError("multiplet order must be >= 1")


def volume_entropy_difference(vc: VolumeComparison, nu: float, consts: PhysicalConstants = MODERN) -> float:
    """S(V) - S(V0) = k (E / (m h nu)) ln(V / V0), in erg/K."""
    clusters = vc.E_of_m / (vc.m * consts.h * nu)
    return consts.k * clusters * math.log(vc.V / vc.V0)


def check_band_modes(band: BandSpec) -> float:
    modes = band.modes
    if modes < 1:
        warnings.warn(f"band holds {modes:.3g} < 1 modes; the mode-count picture is unreliable", stacklevel=2)
    return modes

