"""Hot inner loops, in two interchangeable backends.

The numba backend compiles explicit loops with ``@njit``; the numpy backend
expresses the same computation with vectorised numpy (or, for the
inherently sequential kinetic walk, a plain Python loop). Both return
identical results for identical inputs; the tests check this.

Set ``PLANCKDECOMP_DISABLE_NUMBA=1`` to force the numpy backend.
"""

from __future__ import annotations

import os

import numpy as np

ENV_FLAG = "PLANCKDECOMP_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _env_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() not in ("", "0", "false", "no")


# ---------------------------------------------------------------------------
# numpy backend


class NumpyBackend:
    name = "numpy"

    @staticmethod
    def inversion_search(u, cdf):
        """Smallest k with u <= cdf[k], clipped to the last table entry."""
        idx = np.searchsorted(cdf, u, side="left")
        return np.minimum(idx, len(cdf) - 1).astype(np.int64)

    @staticmethod
    def dyadic_bits(n, nbits):
        """Bit matrix of non-negative int64 values, column s = bit s."""
        shifts = np.arange(nbits, dtype=np.int64)
        return ((n[:, None] >> shifts[None, :]) & 1).astype(np.uint8)

    @staticmethod
    def kinetic_walk(slots, quads, qidx, reverse, picks, burn_in):
        slots = slots.copy()
        n_levels, _ = slots.shape
        counts = [int(c) for c in slots.sum(axis=1)]
        acc = [0] * n_levels
        last = burn_in
        n_steps = len(qidx)
        quads_l = quads.tolist()
        qidx_l = qidx.tolist()
        rev_l = reverse.tolist()
        picks_l = picks.tolist()
        for step in range(n_steps):
            a1, a2, c1, c2 = quads_l[qidx_l[step]]
            if rev_l[step]:
                a1, a2, c1, c2 = c1, c2, a1, a2
            i1, i2, j1, j2 = picks_l[step]
            if (a1 == a2 and i1 == i2) or (c1 == c2 and j1 == j2):
                continue
            if slots[a1, i1] and slots[a2, i2] and not slots[c1, j1] and not slots[c2, j2]:
                if step >= burn_in:
                    for lv in range(n_levels):
                        acc[lv] += counts[lv] * (step - last)
                    last = step
                slots[a1, i1] = 0
                slots[a2, i2] = 0
                slots[c1, j1] = 1
                slots[c2, j2] = 1
                counts[a1] -= 1
                counts[a2] -= 1
                counts[c1] += 1
                counts[c2] += 1
        for lv in range(n_levels):
            acc[lv] += counts[lv] * (n_steps - last)
        return np.array(acc, dtype=np.int64), slots


# ---------------------------------------------------------------------------
# numba backend


if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _inversion_search_nb(u, cdf):
        out = np.empty(u.shape[0], dtype=np.int64)
        last = cdf.shape[0] - 1
        for i in range(u.shape[0]):
            k = 0
            ui = u[i]
            while k < last and ui > cdf[k]:
                k += 1
            out[i] = k
        return out

    @numba.njit(cache=True)
    def _dyadic_bits_nb(n, nbits):
        out = np.zeros((n.shape[0], nbits), dtype=np.uint8)
        for i in range(n.shape[0]):
            v = n[i]
            s = 0
            while v > 0 and s < nbits:
                out[i, s] = v & 1
                v >>= 1
                s += 1
        return out

    @numba.njit(cache=True)
    def _kinetic_walk_nb(slots, quads, qidx, reverse, picks, burn_in):
        slots = slots.copy()
        n_levels = slots.shape[0]
        counts = np.zeros(n_levels, dtype=np.int64)
        for lv in range(n_levels):
            for j in range(slots.shape[1]):
                counts[lv] += slots[lv, j]
        acc = np.zeros(n_levels, dtype=np.int64)
        last = burn_in
        n_steps = qidx.shape[0]
        for step in range(n_steps):
            q = qidx[step]
            a1 = quads[q, 0]
            a2 = quads[q, 1]
            c1 = quads[q, 2]
            c2 = quads[q, 3]
            if reverse[step]:
                a1, a2, c1, c2 = c1, c2, a1, a2
            i1 = picks[step, 0]
            i2 = picks[step, 1]
            j1 = picks[step, 2]
            j2 = picks[step, 3]
            if (a1 == a2 and i1 == i2) or (c1 == c2 and j1 == j2):
                continue
            if slots[a1, i1] == 1 and slots[a2, i2] == 1 and slots[c1, j1] == 0 and slots[c2, j2] == 0:
                if step >= burn_in:
                    for lv in range(n_levels):
                        acc[lv] += counts[lv] * (step - last)
                    last = step
                slots[a1, i1] = 0
                slots[a2, i2] = 0
                slots[c1, j1] = 1
                slots[c2, j2] = 1
                counts[a1] -= 1
                counts[a2] -= 1
                counts[c1] += 1
                counts[c2] += 1
        for lv in range(n_levels):
            acc[lv] += counts[lv] * (n_steps - last)
        return acc, slots

    class NumbaBackend:
        name = "numba"

        @staticmethod
        def inversion_search(u, cdf):
            return _inversion_search_nb(np.ascontiguousarray(u, dtype=np.float64),
                                        np.ascontiguousarray(cdf, dtype=np.float64))

        @staticmethod
        def dyadic_bits(n, nbits):
            return _dyadic_bits_nb(np.ascontiguousarray(n, dtype=np.int64), int(nbits))

        @staticmethod
        def kinetic_walk(slots, quads, qidx, reverse, picks, burn_in):
            return _kinetic_walk_nb(
                np.ascontiguousarray(slots, dtype=np.uint8),
                np.ascontiguousarray(quads, dtype=np.int64),
                np.ascontiguousarray(qidx, dtype=np.int64),
                np.ascontiguousarray(reverse, dtype=np.bool_),
                np.ascontiguousarray(picks, dtype=np.int64),
                int(burn_in),
            )

else:  # pragma: no cover
    NumbaBackend = None


def get_backend(name: str | None = None):
    """Return the backend called ``name``, or the default one.

    The default is numba unless it is missing or disabled via the
    environment flag.
    """
    if name is None:
        name = "numpy" if (_env_disabled() or not HAVE_NUMBA) else "numba"
    if name == "numpy":
        return NumpyBackend
    if name == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return NumbaBackend
    raise ValueError(f"unknown backend {name!r}")
