"""Causal 1-D convolution, offline and streamed.

Signals are laid out time-major, ``[T][channels]`` float32. Kernel tap ``k``
multiplies the input ``k * dilation`` samples in the past, so ``weights[..., 0]``
acts on the newest sample.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import StateMismatchError


@dataclass(frozen=True, eq=False)
class ConvSpec:
    """Immutable causal convolution parameters.

    Attributes:
        weights: ``[out][in][K]`` float32.
        bias: ``[out]`` float32.
        dilation: spacing between taps, in samples.
    """

    weights: np.ndarray
    bias: np.ndarray
    dilation: int = 1

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float32)
        b = np.asarray(self.bias, dtype=np.float32)
        if w.ndim != 3:
            raise ValueError(f"conv weights must be [out][in][K], got shape {w.shape}")
        if w.shape[2] < 1:
            raise ValueError("kernel size must be >= 1")
        if int(self.dilation) < 1:
            raise ValueError("dilation must be >= 1")
        if b.shape != (w.shape[0],):
            raise ValueError(f"bias shape {b.shape} does not match {w.shape[0]} output channels")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)
        object.__setattr__(self, "dilation", int(self.dilation))
        # per-tap [in][out] matrices, contiguous for matmul
        object.__setattr__(
            self, "taps", np.ascontiguousarray(np.transpose(w, (2, 1, 0)))
        )

    @property
    def out_channels(self):
        return self.weights.shape[0]

    @property
    def in_channels(self):
        return self.weights.shape[1]

    @property
    def kernel_size(self):
        return self.weights.shape[2]

    @property
    def history(self):
        return (self.kernel_size - 1) * self.dilation

    @property
    def signature(self):
        return (self.in_channels, self.out_channels, self.kernel_size, self.dilation)

    @property
    def n_params(self):
        return self.weights.size + self.bias.size

    @classmethod
    def zeros(cls, in_channels, out_channels, kernel_size, dilation=1):
        return cls(
            np.zeros((out_channels, in_channels, kernel_size), np.float32),
            np.zeros(out_channels, np.float32),
            dilation,
        )


def _check_input(x, spec):
    x = np.asarray(x, dtype=np.float32)
    if x.ndim != 2 or x.shape[1] != spec.in_channels:
        raise ValueError(
            f"expected input [T][{spec.in_channels}], got shape {x.shape}"
        )
    return x


def causal_conv_offline(x, spec):
    """Convolve a whole signal; samples before t=0 are zeros."""
    x = _check_input(x, spec)
    n = x.shape[0]
    padded = np.concatenate([np.zeros((spec.history, spec.in_channels), np.float32), x])
    y = np.empty((n, spec.out_channels), np.float32)
    y[:] = spec.bias
    for k in range(spec.kernel_size):
        start = spec.history - k * spec.dilation
        y += padded[start:start + n] @ spec.taps[k]
    return y


class ConvState:
    """History of the last ``(K-1)*dilation`` inputs of one causal convolution.

    Inputs are appended to a linear buffer large enough that the receptive
    field of a frame is always one contiguous slice; when the write position
    runs off the end, the history is moved back to the front. After the first
    frame of a given size no further arrays are allocated.
    """

    def __init__(self, spec, max_frame=1):
        self.spec = spec
        self._size = 0
        self._alloc(max(int(max_frame), 1))

    def _alloc(self, max_frame):
        hist = self.spec.history
        old = self.history.copy() if self._size else None
        self._max_frame = max_frame
        self._buf = np.zeros((2 * hist + 4 * max_frame, self.spec.in_channels), np.float32)
        self._out = np.empty((max_frame, self.spec.out_channels), np.float32)
        self._tmp = np.empty((max_frame, self.spec.out_channels), np.float32)
        self._pos = hist
        self._size = self._buf.shape[0]
        if old is not None:
            self._buf[:hist] = old

    @property
    def history(self):
        return self._buf[self._pos - self.spec.history:self._pos]

    def reset(self):
        self._buf[:] = 0.0
        self._pos = self.spec.history

    def check(self, spec):
        if spec is not self.spec and spec.signature != self.spec.signature:
            raise StateMismatchError(
                f"state built for conv {self.spec.signature}, driven with {spec.signature}"
            )

    def step(self, frame):
        """Push ``frame`` ``[t][in]`` and return the ``[t][out]`` output.

        The returned array is a view into an internal buffer that the next call
        overwrites.
        """
        spec = self.spec
        t = frame.shape[0]
        if t > self._max_frame:
            self._alloc(t)
        hist = spec.history
        if self._pos + t > self._size:
            self._buf[:hist] = self._buf[self._pos - hist:self._pos]
            self._pos = hist
        pos = self._pos
        self._buf[pos:pos + t] = frame
        y = self._out[:t]
        tmp = self._tmp[:t]
        y[...] = spec.bias
        for k in range(spec.kernel_size):
            start = pos - k * spec.dilation
            np.matmul(self._buf[start:start + t], spec.taps[k], out=tmp)
            np.add(y, tmp, out=y)
        self._pos = pos + t
        return y


def causal_conv_step(state, frame, spec):
    """Functional form of :meth:`ConvState.step`; returns ``(state, output copy)``."""
    state.check(spec)
    frame = _check_input(frame, spec)
    return state, state.step(frame).copy()
