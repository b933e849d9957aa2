"""Deterministic pseudo-random streams for reproducible simulation.

Every draw is fully specified so that an independent implementation, in any
language, can reproduce the byte-exact sequence:

* 64-bit words come from splitmix64.  The state advances by the odd constant
  ``0x9E3779B97F4A7C15`` per word and each output is the finaliser
  ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31`` with all arithmetic mod 2**64.
* Uniforms on [0, 1) keep the top 53 bits of a word: ``(word >> 11) * 2**-53``.
* Gaussians use Box-Muller.  Each pair consumes two consecutive uniforms
  ``u1, u2`` and yields ``sqrt(-2 ln u1) * cos(2 pi u2)`` followed by
  ``sqrt(-2 ln u1) * sin(2 pi u2)``; the cosine deviate is returned first and
  the sine deviate is cached for the next request.  A zero ``u1``
  (probability 2**-53 per draw) is clamped to 2**-53 so the log stays finite.
* Child streams: child ``k`` of a stream seeded with ``seed`` is seeded with
  ``F(F(seed ^ 0x243F6A8885A308D3) + (k + 1) * 0x9E3779B97F4A7C15)`` where
  ``F`` is the splitmix64 finaliser above.  Splitting never consumes words
  from the parent stream.

Draws are batch-size invariant: ``words(2)`` then ``words(3)`` yields the
same five words as a single ``words(5)``.
"""

from __future__ import annotations

import numpy as np

_PHI = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SPLIT_SALT = np.uint64(0x243F6A8885A308D3)
_U64_MASK = 0xFFFFFFFFFFFFFFFF
_UNIT = float(2.0**-53)
_SHIFT_30 = np.uint64(30)
_SHIFT_27 = np.uint64(27)
_SHIFT_31 = np.uint64(31)
_SHIFT_11 = np.uint64(11)


def _finalize(z: np.ndarray | np.uint64) -> np.ndarray | np.uint64:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _SHIFT_30)) * _MIX1
        z = (z ^ (z >> _SHIFT_27)) * _MIX2
        return z ^ (z >> _SHIFT_31)


class RngStream:
    """Seeded splitmix64 word stream with uniform and Gaussian views.

    Parameters
    ----------
    seed : int
        Any integer; it is reduced mod 2**64.
    """

    def __init__(self, seed: int):
        seed = int(seed) & _U64_MASK
        self._seed = seed
        self._state = np.uint64(seed)
        self._cached_gauss: float | None = None

    @property
    def seed(self) -> int:
        return self._seed

    def words(self, n: int) -> np.ndarray:
        """Next ``n`` raw 64-bit words as a uint64 array."""
        if n < 0:
            raise ValueError("word count must be non-negative")
        if n == 0:
            return np.empty(0, dtype=np.uint64)
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            states = self._state + _PHI * steps
        self._state = states[-1]
        return _finalize(states)

    def uniforms(self, n: int) -> np.ndarray:
        """Next ``n`` uniforms on [0, 1)."""
        return (self.words(n) >> _SHIFT_11).astype(np.float64) * _UNIT

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def gaussians(self, n: int) -> np.ndarray:
        """Next ``n`` standard normal deviates."""
        if n < 0:
            raise ValueError("draw count must be non-negative")
        out = np.empty(n, dtype=np.float64)
        start = 0
        if n > 0 and self._cached_gauss is not None:
            out[0] = self._cached_gauss
            self._cached_gauss = None
            start = 1
        need = n - start
        if need <= 0:
            return out
        n_pairs = (need + 1) // 2
        u = self.uniforms(2 * n_pairs)
        u1 = np.maximum(u[0::2], _UNIT)
        u2 = u[1::2]
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = (2.0 * np.pi) * u2
        pairs = np.empty(2 * n_pairs, dtype=np.float64)
        pairs[0::2] = radius * np.cos(angle)
        pairs[1::2] = radius * np.sin(angle)
        out[start:] = pairs[:need]
        if need % 2 == 1:
            self._cached_gauss = float(pairs[need])
        return out

    def normal(self) -> float:
        return float(self.gaussians(1)[0])

    def split(self, n: int) -> list["RngStream"]:
        """Derive ``n`` independent child streams without consuming words."""
        if n < 0:
            raise ValueError("child count must be non-negative")
        base = _finalize(np.uint64(self._seed) ^ _SPLIT_SALT)
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            seeds = _finalize(base + _PHI * steps)
        return [RngStream(int(s)) for s in seeds]

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"RngStream(seed={self._seed})"
