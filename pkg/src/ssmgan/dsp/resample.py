"""Sample-and-hold rational upsampling.

Output sample ``i`` copies input sample ``floor(i * q / p)``, which is the same
as repeating every input ``p`` times and keeping every ``q``-th value starting at
offset 0.
"""

from math import gcd

import numpy as np


def _reduce(p, q):
    p, q = int(p), int(q)
    if p < 1 or q < 1:
        raise ValueError(f"upsampling ratio must be positive, got {p}/{q}")
    g = gcd(p, q)
    return p // g, q // g


def upsample_rational(x, p, q):
    """Upsample ``[T][C]`` by ``p/q``; returns ``floor(T*p/q)`` rows."""
    p, q = _reduce(p, q)
    x = np.asarray(x)
    n_out = x.shape[0] * p // q
    return x[(np.arange(n_out) * q) // p]


class RationalUpsampler:
    """Streaming counterpart of :func:`upsample_rational`.

    The only state is the number of inputs consumed so far, kept modulo ``q``.
    Any frame length works; frames whose length is a multiple of ``q`` keep the
    phase at zero, which is what the generator's frame sizing guarantees.
    """

    def __init__(self, p, q):
        self.p, self.q = _reduce(p, q)
        self.phase = 0
        self._index = {}
        self._out = {}

    def reset(self):
        self.phase = 0

    def step(self, frame):
        t = frame.shape[0]
        key = (self.phase, t)
        idx = self._index.get(key)
        if idx is None:
            # outputs whose source index lies in [phase, phase + t)
            first = -(-self.phase * self.p // self.q)
            last = -(-(self.phase + t) * self.p // self.q)
            idx = self._index[key] = (np.arange(first, last) * self.q) // self.p - self.phase
        out_key = (idx.size,) + frame.shape[1:]
        out = self._out.get(out_key)
        if out is None:
            out = self._out[out_key] = np.empty(out_key, frame.dtype)
        # mode='clip' lets numpy write straight into out; idx is always in range
        np.take(frame, idx, axis=0, out=out, mode="clip")
        self.phase = (self.phase + t) % self.q
        return out
