"""Seeded Monte Carlo draws of the mode-energy families and goodness of fit.

Random numbers come from Philox4x64-10 (Salmon et al., "Parallel random
numbers: as easy as 1, 2, 3", SC'11) as exposed by ``numpy.random.Philox``:
the 128-bit key is ``(seed, substream_index)``, so each pair names its own
stream, and uniforms in [0, 1) are ``(word >> 11) * 2**-53``. Independent
parts of one draw (the two quadratures, the binary components, ...) use
counter blocks obtained with ``Philox.jumped(j)``.

All samplers are inverse-CDF based. Exponential variates use
``-log1p(-U) / beta`` (finite at U = 0), Poisson variates use sequential
search over the cumulative mass table.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import stats

from . import distributions as dist
from ._kernels import get_backend
from .params import GAUSS, PLANCK, DomainError, Kind, ModeParams, VariableFamily

TAIL_TOLERANCE = 1e-12
# One-sided 1% level for both the chi-square and KS tests.
ALPHA = 0.01
MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class RandomStream:
    """A reproducible stream: Philox4x64-10 keyed by ``(seed, substream_index)``."""

    seed: int
    substream_index: int = 0

    def __post_init__(self):
        for name in ("seed", "substream_index"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or not 0 <= v < 2**64:
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def bit_generator(self, block: int = 0) -> np.random.Philox:
        # an explicit uint64 array: a Python list would pass through float64
        key = np.array([int(self.seed), int(self.substream_index)], dtype=np.uint64)
        bg = np.random.Philox(key=key)
        return bg.jumped(block) if block else bg

    def generator(self, block: int = 0) -> np.random.Generator:
        return np.random.Generator(self.bit_generator(block))

    def substream(self, index: int) -> "RandomStream":
        return RandomStream(self.seed, index)


def default_s_max(p: ModeParams) -> int:
    """Smallest s with 2**s * beta > 50 (higher bits have occupation < e**-50)."""
    s = 0
    while math.ldexp(p.beta, s) <= 50.0:
        s += 1
    return s


def default_m_max(p: ModeParams) -> int:
    """Smallest M with b**M / (M (1 - b)) < 1e-12."""
    one_minus_b = -math.expm1(-p.beta)
    m = 1
    while math.exp(-m * p.beta) / (m * one_minus_b) >= TAIL_TOLERANCE:
        m += 1
    return m


def binary_tail_mass(p: ModeParams, s_max: int) -> float:
    """Upper bound on P(some component above s_max is occupied)."""
    total, s = 0.0, s_max + 1
    while True:
        term = float(dist.binary_occupation(s, p)[1])
        if term == 0.0 or term < 1e-18 * total:
            return total + term
        total += term
        s += 1


def multiplet_tail_mass(p: ModeParams, m_max: int) -> float:
    m = m_max + 1
    return math.exp(-m * p.beta) / (m * -math.expm1(-p.beta))


@dataclass(frozen=True)
class SampleBatch:
    """An immutable batch of draws plus, for coupled draws, the decomposition."""

    family: VariableFamily
    params: ModeParams
    values: np.ndarray
    seed: int
    substream_index: int
    label: str = ""
    integer_part: Optional[np.ndarray] = None
    fraction: Optional[np.ndarray] = None
    bits: Optional[np.ndarray] = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        for arr in (self.values, self.integer_part, self.fraction, self.bits):
            if arr is not None:
                arr.setflags(write=False)
        if not self.label:
            object.__setattr__(self, "label", str(self.family))

    def __len__(self) -> int:
        return len(self.values)


def _uniforms(rs: RandomStream, count: int, block: int = 0) -> np.ndarray:
    return rs.generator(block).random(count)


def exponential_from_uniform(u, beta: float):
    return -np.log1p(-u) / beta


def poisson_cdf_table(lam: float) -> np.ndarray:
    """Cumulative Poisson masses built by the recurrence p_k = p_{k-1} lam / k,
    extended until the sum stops changing."""
    if not 0 < lam < 10:
        raise DomainError("sequential-search Poisson sampler is for 0 < lambda < 10")
    p = math.exp(-lam)
    cdf = [p]
    k = 0
    while True:
        k += 1
        p *= lam / k
        nxt = cdf[-1] + p
        if nxt == cdf[-1]:
            break
        cdf.append(nxt)
    return np.array(cdf)


def _poisson_from_uniform(u, lam, backend):
    return backend.inversion_search(u, poisson_cdf_table(lam))


def _draw_family(f: VariableFamily, p: ModeParams, count: int, rs: RandomStream, block: int, backend):
    u = _uniforms(rs, count, block)
    beta = p.beta
    if f.kind is Kind.GAUSS:
        return exponential_from_uniform(u, beta)
    if f.kind is Kind.DARK:
        z = -np.log1p(u * math.expm1(-beta)) / beta
        return np.minimum(z, np.nextafter(1.0, 0.0))
    if f.kind is Kind.PLANCK:
        return np.floor(exponential_from_uniform(u, beta)).astype(np.int64)
    if f.kind is Kind.BINARY:
        p_occ = float(dist.binary_occupation(f.index, p)[1])
        return (u < p_occ).astype(np.int64) << f.index
    lam = float(dist.multiplet_rate(f.index, p))
    return _poisson_from_uniform(u, lam, backend) * f.index


def sample_family(
    f: VariableFamily,
    p: ModeParams,
    count: int,
    rs: RandomStream,
    backend: Optional[str] = None,
) -> SampleBatch:
    """Draw ``count`` values of one family by inversion.

    Binary(s) values are 0 or 2**s; Multiplet(m) values are multiples of m.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    values = _draw_family(f, p, count, rs, 0, get_backend(backend))
    return SampleBatch(f, p, values, rs.seed, rs.substream_index)


def sample_binary_sum(
    p: ModeParams, count: int, rs: RandomStream, s_max: Optional[int] = None
) -> SampleBatch:
    """Planck variable rebuilt as sum_s 2**s u_s over independent Bernoulli
    components s = 0..s_max (component s uses counter block s)."""
    if count < 1:
        raise DomainError("count must be >= 1")
    if s_max is None:
        s_max = default_s_max(p)
    if not 0 <= s_max <= 62:
        raise DomainError("s_max must lie in 0..62 for int64 sums")
    total = np.zeros(count, dtype=np.int64)
    for s in range(s_max + 1):
        p_occ = float(dist.binary_occupation(s, p)[1])
        total += (_uniforms(rs, count, s) < p_occ).astype(np.int64) << s
    notes = ()
    tail = binary_tail_mass(p, s_max)
    if tail > TAIL_TOLERANCE:
        notes = (f"binary truncation s_max={s_max} drops tail mass {tail:.3g} > {TAIL_TOLERANCE:g}",)
    return SampleBatch(PLANCK, p, total, rs.seed, rs.substream_index, label="binary-sum", warnings=notes)


def sample_multiplet_sum(
    p: ModeParams,
    count: int,
    rs: RandomStream,
    m_max: Optional[int] = None,
    backend: Optional[str] = None,
) -> SampleBatch:
    """Planck variable rebuilt as sum_m m x_m over independent Poisson
    components m = 1..m_max (component m uses counter block m)."""
    if count < 1:
        raise DomainError("count must be >= 1")
    if m_max is None:
        m_max = default_m_max(p)
    if m_max < 1:
        raise DomainError("m_max must be >= 1")
    be = get_backend(backend)
    total = np.zeros(count, dtype=np.int64)
    for m in range(1, m_max + 1):
        lam = float(dist.multiplet_rate(m, p))
        if lam == 0.0:
            break
        total += _poisson_from_uniform(_uniforms(rs, count, m), lam, be) * m
    notes = ()
    tail = multiplet_tail_mass(p, m_max)
    if tail > TAIL_TOLERANCE:
        notes = (f"multiplet truncation m_max={m_max} drops tail mass {tail:.3g} > {TAIL_TOLERANCE:g}",)
    return SampleBatch(PLANCK, p, total, rs.seed, rs.substream_index, label="multiplet-sum", warnings=notes)


def sample_coupled(
    p: ModeParams,
    count: int,
    rs: RandomStream,
    s_max: Optional[int] = None,
    backend: Optional[str] = None,
) -> SampleBatch:
    """Draw eta and keep its split eta = xi + zeta together with the bits of xi.

    The bit matrix has at least ``s_max + 1`` columns and always enough to
    hold every sampled xi exactly.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    if s_max is None:
        s_max = default_s_max(p)
    eta = exponential_from_uniform(_uniforms(rs, count), p.beta)
    xi = np.floor(eta)
    zeta = eta - xi
    xi = xi.astype(np.int64)
    nbits = max(s_max + 1, int(xi.max()).bit_length())
    bits = get_backend(backend).dyadic_bits(xi, nbits)
    return SampleBatch(
        GAUSS, p, eta, rs.seed, rs.substream_index, label="coupled",
        integer_part=xi, fraction=zeta, bits=bits,
    )


# ---------------------------------------------------------------------------
# Amplitude synthesis


@dataclass(frozen=True)
class ChaoticAmplitude:
    """Quadrature amplitudes of a chaotic mode (arrays of equal length)."""

    a_c: np.ndarray
    a_s: np.ndarray
    theta: np.ndarray
    a: float = 1.0


def _rademacher_sums(bg: np.random.Philox, count: int, n_terms: int, chunk: int) -> np.ndarray:
    # every raw bit is an independent fair +-1
    words = -(-n_terms // 64)
    spare = words * 64 - n_terms
    mask = np.uint64((1 << (64 - spare)) - 1) if spare else np.uint64(2**64 - 1)
    out = np.empty(count)
    for start in range(0, count, chunk):
        stop = min(count, start + chunk)
        raw = bg.random_raw((stop - start) * words).reshape(stop - start, words)
        raw[:, -1] &= mask
        ones = np.bitwise_count(raw).sum(axis=1, dtype=np.int64)
        out[start:stop] = 2 * ones - n_terms
    return out


def _uniform_sums(g: np.random.Generator, count: int, n_terms: int, chunk: int) -> np.ndarray:
    half_width = math.sqrt(3.0)
    out = np.empty(count)
    for start in range(0, count, chunk):
        stop = min(count, start + chunk)
        u = g.random((stop - start, n_terms))
        out[start:stop] = (2.0 * u - 1.0).sum(axis=1) * half_width
    return out


def sample_chaotic_amplitude(
    n_terms: int, base: str, rs: RandomStream, count: int = 1, a: float = 1.0
) -> ChaoticAmplitude:
    """Sum ``n_terms`` iid zero-mean, unit-variance contributions per quadrature
    and normalise by sqrt(n_terms); ``base`` is ``"uniform"`` (on
    [-sqrt 3, sqrt 3]) or ``"rademacher"`` (+-1). Cosine and sine quadratures
    draw from counter blocks 0 and 1.
    """
    if n_terms < 1 or count < 1:
        raise DomainError("n_terms and count must be >= 1")
    chunk = max(1, 2**22 // n_terms)
    if base == "rademacher":
        sums = [_rademacher_sums(rs.bit_generator(j), count, n_terms, chunk) for j in (0, 1)]
    elif base == "uniform":
        sums = [_uniform_sums(rs.generator(j), count, n_terms, chunk) for j in (0, 1)]
    else:
        raise DomainError(f"unknown base distribution {base!r}")
    scale = a / math.sqrt(n_terms)
    a_c, a_s = sums[0] * scale, sums[1] * scale
    theta = np.mod(np.arctan2(a_s, a_c), 2.0 * np.pi)
    theta = np.where(theta >= 2.0 * np.pi, 0.0, theta)
    return ChaoticAmplitude(a_c, a_s, theta, a)


def gauss_from_amplitude(amp: ChaoticAmplitude, p: ModeParams) -> np.ndarray:
    """Scaled mode energy (a_c**2 + a_s**2) / (2 a**2 beta), exponential with rate beta
    when the quadratures are exactly Gaussian."""
    return (amp.a_c**2 + amp.a_s**2) / (2.0 * amp.a**2 * p.beta)


# ---------------------------------------------------------------------------
# Goodness of fit


@dataclass(frozen=True)
class ContinuousLaw:
    cdf: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DiscreteLaw:
    """Law of ``scale * K`` with K = 0, 1, 2, ... given by ``pmf`` and ``sf``
    (sf(k) = P(K > k))."""

    scale: int
    pmf: Callable[[np.ndarray], np.ndarray]
    sf: Callable[[int], float]


def reference_law(f: VariableFamily, p: ModeParams):
    """Exact law handle for a family, as used by :func:`goodness_of_fit`."""
    if f.kind is Kind.GAUSS:
        return ContinuousLaw(lambda y: dist.gauss_cdf(y, p))
    if f.kind is Kind.DARK:
        return ContinuousLaw(lambda z: dist.dark_cdf(z, p))
    if f.kind is Kind.PLANCK:
        return DiscreteLaw(
            1,
            lambda k: dist.planck_pmf(k, p),
            lambda k: math.exp(-p.beta * (k + 1)),
        )
    if f.kind is Kind.BINARY:
        p_empty, p_occ = dist.binary_occupation(f.index, p)
        table = np.array([p_empty, p_occ])
        return DiscreteLaw(
            1 << f.index,
            lambda k: np.where(np.asarray(k) < 2, table[np.minimum(k, 1)], 0.0),
            lambda k: float(p_occ) if k < 1 else 0.0,
        )
    lam = float(dist.multiplet_rate(f.index, p))
    return DiscreteLaw(f.index, lambda k: stats.poisson.pmf(k, lam), lambda k: float(stats.poisson.sf(k, lam)))


@dataclass(frozen=True)
class GofResult:
    statistic: float
    threshold: float
    passed: bool
    test: str
    dof: int = 0
    classes: tuple = field(default=())


def merge_classes(expected: np.ndarray, min_expected: float = MIN_EXPECTED) -> list[int]:
    """Group consecutive cells so each group expects at least ``min_expected``.

    Returns the group start indices. Trailing cells that never reach the
    minimum (and the caller's tail cell) belong to the last group.
    """
    starts = []
    acc = 0.0
    open_start = 0
    for k, e in enumerate(expected):
        acc += e
        if acc >= min_expected:
            starts.append(open_start)
            open_start = k + 1
            acc = 0.0
    if not starts:
        return [0]
    return starts


def goodness_of_fit(batch: SampleBatch, reference=None, alpha: float = ALPHA) -> GofResult:
    """Pearson chi-square (discrete) or Kolmogorov-Smirnov (continuous) test of
    a batch against an exact law, at the asymptotic ``alpha`` critical value.

    Discrete cells are merged left to right until each expects at least five
    counts; a single surviving cell gives a trivially passing test.
    """
    values = np.asarray(batch.values)
    n = len(values)
    if n == 0:
        raise DomainError("goodness_of_fit needs a non-empty batch")
    if reference is None:
        reference = reference_law(batch.family, batch.params)
    if isinstance(reference, ContinuousLaw):
        d = float(stats.kstest(values, reference.cdf).statistic)
        threshold = float(stats.kstwobign.ppf(1.0 - alpha)) / math.sqrt(n)
        return GofResult(d, threshold, d < threshold, "ks")

    k = values // reference.scale
    outside = np.count_nonzero((k * reference.scale != values) | (k < 0))
    if outside:
        return GofResult(math.inf, 0.0, False, "chi2")
    # cells 0..K where the remaining tail expects < MIN_EXPECTED
    K = 0
    while n * reference.sf(K) >= MIN_EXPECTED:
        K += 1
    cells = np.arange(K + 1)
    expected = n * np.asarray(reference.pmf(cells), dtype=float)
    tail_expected = n * reference.sf(K)
    observed = np.bincount(np.minimum(k, K + 1), minlength=K + 2).astype(float)
    starts = merge_classes(expected)
    bounds = starts + [K + 2]
    exp_full = np.append(expected, tail_expected)
    obs_g = np.array([observed[bounds[i]:bounds[i + 1]].sum() for i in range(len(starts))])
    exp_g = np.array([exp_full[bounds[i]:bounds[i + 1]].sum() for i in range(len(starts))])
    dof = len(starts) - 1
    if dof == 0:
        return GofResult(0.0, 0.0, True, "chi2", 0, tuple(starts))
    stat = float(np.sum((obs_g - exp_g) ** 2 / exp_g))
    threshold = float(stats.chi2.ppf(1.0 - alpha, dof))
    return GofResult(stat, threshold, stat < threshold, "chi2", dof, tuple(starts))


def bit_statistics(batch: SampleBatch, min_occupation: float = 1e-4):
    """Empirical bit frequencies of a coupled batch and the largest absolute
    pairwise correlation among bits whose exact occupation exceeds
    ``min_occupation``. Returns ``(freq, exact, max_abs_corr)``."""
    if batch.bits is None:
        raise DomainError("batch has no bit matrix; draw it with sample_coupled")
    bits = batch.bits.astype(float)
    freq = bits.mean(axis=0)
    s = np.arange(bits.shape[1])
    exact = np.asarray(dist.binary_occupation(s, batch.params)[1], dtype=float)
    keep = np.flatnonzero(exact > min_occupation)
    max_corr = 0.0
    if len(keep) > 1:
        sub = bits[:, keep]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            corr = np.corrcoef(sub, rowvar=False)
        off = corr[~np.eye(len(keep), dtype=bool)]
        max_corr = float(np.nanmax(np.abs(off)))
    return freq, exact, max_corr


# ---------------------------------------------------------------------------
# CSV serialisation


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def bit_positions(n: int) -> str:
    """Set of occupied dyadic positions of ``n``, e.g. 9 -> ``{0,3}``."""
    return "{" + ",".join(str(s) for s in range(int(n).bit_length()) if (n >> s) & 1) + "}"


def batch_metadata(batch: SampleBatch) -> dict:
    meta = {
        "family": batch.label,
        "beta": _fmt(batch.params.beta),
        "seed": str(batch.seed),
        "substream": str(batch.substream_index),
        "count": str(len(batch)),
    }
    if batch.params.is_physical:
        meta["nu_hz"] = _fmt(batch.params.nu)
        meta["T_kelvin"] = _fmt(batch.params.T)
    return meta


def write_batch_csv(batch: SampleBatch, fh: io.TextIOBase) -> None:
    """One value per row; ``#`` comment lines carry family, parameters and seed.
    Coupled batches add integer part, fraction and bit-pattern columns."""
    for key, val in batch_metadata(batch).items():
        fh.write(f"# {key}: {val}\n")
    for note in batch.warnings:
        fh.write(f"# warning: {note}\n")
    writer = csv.writer(fh, lineterminator="\n")
    if batch.integer_part is None:
        writer.writerow(["value"])
        for v in batch.values.tolist():
            writer.writerow([_fmt(v)])
        return
    writer.writerow(["eta", "xi", "zeta", "bits"])
    for eta, xi, zeta in zip(batch.values.tolist(), batch.integer_part.tolist(), batch.fraction.tolist()):
        writer.writerow([_fmt(eta), str(xi), _fmt(zeta), bit_positions(xi)])
