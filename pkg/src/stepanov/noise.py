"""Counter-based Brownian increments.

Every ensemble member owns a Philox stream keyed by ``(seed, member)``; the
increment of component ``j`` at absolute step ``k`` is the normal deviate
built from raw word ``(k + STEP_OFFSET) * m + j`` of that stream.  Absolute
steps count from the start of the observation window, so burn-in steps are
negative and two solves on the same window see the same increments whatever
their burn-in length.  Any single increment can therefore be
regenerated without replaying the others, and results never depend on the
order in which members are processed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1
_TWO_M53 = 2.0**-53
# absolute step 0 sits this far into each stream, leaving room for burn-in
STEP_OFFSET = 1 << 40


def _uniform_open(raw: np.ndarray) -> np.ndarray:
    """Map raw 64-bit words to uniforms strictly inside (0, 1)."""
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


@dataclass(frozen=True)
class BrownianDriver:
    """Increments ``dW_k ~ N(0, diag(q) dt)`` for steps ``k = 0 .. n_steps-1``.

    Parameters
    ----------
    seed : int
        64-bit master seed.
    n_steps : int
        Number of increments per member.
    dt : float
        Step size.
    q_diag : tuple of float
        Diagonal of the noise covariance (one entry per noise component).
    first_step : int
        Absolute step index of increment 0 (negative during burn-in).
    """

    seed: int
    n_steps: int
    dt: float
    q_diag: tuple[float, ...] = (1.0,)
    first_step: int = 0

    def __post_init__(self):
        object.__setattr__(self, "q_diag", tuple(float(q) for q in self.q_diag))
        if any(q < 0 for q in self.q_diag):
            raise ValueError("noise covariance must be nonnegative")
        if not self.dt > 0 or self.n_steps < 0:
            raise ValueError("need dt > 0 and n_steps >= 0")
        if self.first_step + STEP_OFFSET < 0:
            raise ValueError("burn-in longer than the stream offset")

    @property
    def noise_dim(self) -> int:
        return len(self.q_diag)

    def _stream(self, member: int) -> Philox:
        return Philox(key=np.array([self.seed & _MASK64, member & _MASK64], dtype=np.uint64))

    def _scale(self) -> np.ndarray:
        return np.sqrt(np.asarray(self.q_diag) * self.dt)

    def member_increments(self, member: int) -> np.ndarray:
        """All increments of one member, shape ``(n_steps, m)``."""
        m = self.noise_dim
        start = (self.first_step + STEP_OFFSET) * m
        bg = self._stream(member)
        # Philox emits blocks of four 64-bit words
        bg.advance(start // 4)
        raw = bg.random_raw(self.n_steps * m + start % 4)[start % 4 :]
        z = ndtri(_uniform_open(np.asarray(raw, dtype=np.uint64)))
        return z.reshape(self.n_steps, m) * self._scale()

    def increments(self, members) -> np.ndarray:
        """Increments of several members, shape ``(len(members), n_steps, m)``."""
        members = list(members)
        out = np.empty((len(members), self.n_steps, self.noise_dim))
        for i, mem in enumerate(members):
            out[i] = self.member_increments(mem)
        return out

    def increment(self, member: int, step: int) -> np.ndarray:
        """Single increment ``dW_step`` of ``member``, shape ``(m,)``."""
        if not 0 <= step < self.n_steps:
            raise IndexError(f"step {step} outside 0..{self.n_steps - 1}")
        m = self.noise_dim
        out = np.empty(m, dtype=np.uint64)
        for j in range(m):
            idx = (self.first_step + step + STEP_OFFSET) * m + j
            bg = self._stream(member)
            bg.advance(idx // 4)
            out[j] = bg.random_raw(4)[idx % 4]
        z = ndtri(_uniform_open(out))
        return z * self._scale()
