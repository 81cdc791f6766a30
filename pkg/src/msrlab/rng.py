"""Seeded 64-bit generator with a fully documented state transition.

The generator is SplitMix64.  Its state is a single unsigned 64-bit integer
``s``; every draw advances it by the odd constant ``GAMMA`` and returns a
mixed copy of the new state::

    s   = (s + 0x9E3779B97F4A7C15) mod 2**64
    z   = s
    z   = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z   = ((z ^ (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    out = z ^ (z >> 31)

Derived quantities:

* ``uniform()`` is ``(out >> 11) * 2**-53``, a double in ``[0, 1)``;
  ``uniform(lo, hi)`` is ``lo + (hi - lo) * uniform()``.
* ``integers(k)`` is ``floor(uniform() * k)``.
* Arrays are filled in row-major (C) order, one draw per entry.
* Per-trial streams are seeded with ``mix64((seed + mix64(trial + 1)) mod 2**64)``
  where ``mix64`` is the output function above applied to its argument
  without the increment.  Trials are therefore independent of evaluation
  order, which is what makes parallel suite runs reproducible.

Any language with unsigned 64-bit wrap-around arithmetic can reproduce the
same corpora bit for bit.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def mix64(z):
    """SplitMix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix_array(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def trial_seed(seed, trial):
    return mix64((seed + mix64(trial + 1)) & MASK64)


class SplitMix64:
    """SplitMix64 stream.  Draws are vectorized but sequence-identical to the
    scalar recurrence in the module docstring."""

    def __init__(self, seed):
        if seed < 0 or seed > MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.state = int(seed)

    @classmethod
    def for_trial(cls, seed, trial):
        return cls(trial_seed(seed, trial))

    def next_u64(self, size=None):
        count = 1 if size is None else int(np.prod(size))
        steps = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            states = np.uint64(self.state) + steps * np.uint64(GAMMA)
        self.state = (self.state + count * GAMMA) & MASK64
        out = _mix_array(states)
        if size is None:
            return int(out[0])
        return out.reshape(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        raw = self.next_u64(size)
        if size is None:
            return low + (high - low) * ((raw >> 11) * 2.0**-53)
        u = (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return low + (high - low) * u

    def integers(self, k, size=None):
        u = self.uniform(size=size)
        if size is None:
            return int(u * k)
        return np.floor(u * k).astype(np.int64)
