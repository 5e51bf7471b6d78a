"""Per-time-step channel operations.

Both operations only look at one time step at a time, so they stream with no
state. The ``*_into`` variants write into caller-owned buffers and allocate no
array memory; the plain variants are the reference implementations.
"""

import numpy as np

DEFAULT_EPS = 1e-5


def channel_norm(x, eps=DEFAULT_EPS):
    """Normalize each time step across channels (population variance)."""
    x = np.asarray(x, dtype=np.float32)
    mean = x.mean(axis=1, keepdims=True)
    centered = x - mean
    var = (centered * centered).mean(axis=1, keepdims=True)
    return centered / np.sqrt(var + np.float32(eps))


def norm_constants(channels, eps=DEFAULT_EPS):
    """0-d ``(channel count, eps)`` arrays for :func:`channel_norm_into`.

    Plain Python scalars would be boxed into fresh arrays on every call.
    """
    return np.array(channels, np.float32), np.array(eps, np.float32)


def channel_norm_into(x, out, stat, sq, consts):
    """In-place form of :func:`channel_norm`.

    Args:
        x: ``[t][C]`` input; may alias ``out``.
        out: ``[t][C]`` destination.
        stat: ``[t]`` scratch for the per-step statistics.
        sq: ``[t][C]`` scratch for squared deviations.
        consts: output of :func:`norm_constants`.
    """
    count, eps = consts
    np.sum(x, axis=1, out=stat)
    np.divide(stat, count, out=stat)
    np.subtract(x, stat[:, None], out=out)
    np.multiply(out, out, out=sq)
    np.sum(sq, axis=1, out=stat)
    np.divide(stat, count, out=stat)
    np.add(stat, eps, out=stat)
    np.sqrt(stat, out=stat)
    np.divide(out, stat[:, None], out=out)
    return out


def gated_activation(a, b):
    """``tanh(a) * softmax(b)`` with the softmax taken over channels."""
    a = np.asarray(a, dtype=np.float32)
    b = np.asarray(b, dtype=np.float32)
    if a.shape != b.shape:
        raise ValueError(f"gate shapes differ: {a.shape} vs {b.shape}")
    e = np.exp(b - b.max(axis=1, keepdims=True))
    return np.tanh(a) * (e / e.sum(axis=1, keepdims=True))


def gated_activation_into(a, b, out, stat):
    """In-place form of :func:`gated_activation`; clobbers ``b``."""
    np.max(b, axis=1, out=stat)
    np.subtract(b, stat[:, None], out=b)
    np.exp(b, out=b)
    np.sum(b, axis=1, out=stat)
    np.divide(b, stat[:, None], out=b)
    np.tanh(a, out=out)
    np.multiply(out, b, out=out)
    return out
