"""Independent pure-Python reference implementations used by the tests."""

import math

MASK = 2**64 - 1
M0, M1 = 0xD2E7470EE14C6C93, 0xCA5A826395121157
W0, W1 = 0x9E3779B97F4A7C15, 0xBB67AE8584CAA73B


def _mulhilo(a, b):
    prod = a * b
    return prod >> 64, prod & MASK


def philox4x64(counter, key, rounds=10):
    c0, c1, c2, c3 = counter
    k0, k1 = key
    for r in range(rounds):
        if r:
            k0 = (k0 + W0) & MASK
            k1 = (k1 + W1) & MASK
        hi0, lo0 = _mulhilo(M0, c0)
        hi1, lo1 = _mulhilo(M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def philox_words(seed, substream, block, n):
    """First ``n`` raw words of counter block ``block`` under key (seed, substream).

    The stream increments the low counter word before each 4-word output, and
    block j starts at high word j.
    """
    out = []
    i = 1
    while len(out) < n:
        out.extend(philox4x64((i, 0, block, 0), (seed, substream)))
        i += 1
    return out[:n]


def uniform_from_word(w):
    return (w >> 11) * 2.0**-53


def planck_pmf(n, beta):
    b = math.exp(-beta)
    return (1.0 - b) * b**n
