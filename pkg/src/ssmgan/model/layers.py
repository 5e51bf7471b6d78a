"""TADE modulation, the modified residual block and the pitch prior.

Residual block, for content ``x`` and conditioning ``c`` at the block rate::

    gamma, beta = TADE(c)                      # computed once
    h = gamma * norm(x) + beta
    h = gate(conv1(h))                         # L -> 2L, dilation 1, split
    h = gamma * norm(h) + beta                 # same gamma, beta again
    h = gate(conv2(h))                         # L -> 2L, dilation 2, split
    y = x + h

where ``TADE(c)`` is ``leaky_relu(conv_c(c))`` followed by two kernel-K convs
producing gamma and beta, and ``gate(a|b) = tanh(a) * softmax(b)``.
"""

from dataclasses import dataclass

import numpy as np

from ..dsp.activations import (
    channel_norm,
    channel_norm_into,
    gated_activation,
    gated_activation_into,
    norm_constants,
)
from ..dsp.conv import ConvState, causal_conv_offline

LEAKY_SLOPE = 0.2


@dataclass(frozen=True)
class TadeParams:
    cond: object
    gamma: object
    beta: object

    def __post_init__(self):
        content = self.gamma.out_channels
        if self.beta.out_channels != content:
            raise ValueError("gamma and beta must have the same channel count")
        hidden = self.cond.out_channels
        if self.gamma.in_channels != hidden or self.beta.in_channels != hidden:
            raise ValueError("gamma/beta convs must read the cond conv output")


@dataclass(frozen=True)
class ResBlockParams:
    tade: TadeParams
    conv1: object
    conv2: object

    @property
    def channels(self):
        return self.tade.gamma.out_channels

    @property
    def cond_channels(self):
        return self.tade.cond.in_channels


def leaky_relu(x):
    return np.where(x >= 0, x, np.float32(LEAKY_SLOPE) * x)


def tade_gamma_beta(cond, params):
    hidden = leaky_relu(causal_conv_offline(cond, params.cond))
    return causal_conv_offline(hidden, params.gamma), causal_conv_offline(hidden, params.beta)


def modulate(content, gamma, beta, eps):
    return gamma * channel_norm(content, eps) + beta


def tade_modulate(cond, content, params, eps):
    """Style ``content`` with ``gamma * norm(content) + beta`` learned from ``cond``.

    Returns:
        (styled, gamma, beta), each ``[t][L]``.
    """
    content = np.asarray(content, dtype=np.float32)
    if content.shape[1] != params.gamma.out_channels or cond.shape[0] != content.shape[0]:
        raise ValueError(
            f"cond {np.shape(cond)} and content {content.shape} do not fit TADE with "
            f"{params.gamma.out_channels} channels"
        )
    gamma, beta = tade_gamma_beta(cond, params)
    return modulate(content, gamma, beta, eps), gamma, beta


def _gate(h):
    half = h.shape[1] // 2
    return gated_activation(h[:, :half], h[:, half:])


def resblock_offline(cond, x, params, eps):
    gamma, beta = tade_gamma_beta(cond, params.tade)
    h = modulate(x, gamma, beta, eps)
    h = _gate(causal_conv_offline(h, params.conv1))
    h = modulate(h, gamma, beta, eps)
    h = _gate(causal_conv_offline(h, params.conv2))
    return x + h


def pitch_prior(pitch_lag_idx, pitch_corr, embedding):
    """Rows of the lag embedding scaled by the pitch correlation."""
    idx = np.asarray(pitch_lag_idx)
    if idx.size and (idx.min() < 0 or idx.max() >= embedding.shape[0]):
        raise IndexError(f"pitch lag index outside [0, {embedding.shape[0] - 1}]")
    corr = np.asarray(pitch_corr, dtype=np.float32)
    return embedding[idx] * corr[:, None]


class ResBlockStream:
    """Streaming residual block with preallocated working buffers.

    Buffers are sized for ``frame`` samples and grow on the first larger
    frame; steady-state steps allocate nothing.
    """

    def __init__(self, params, frame, eps):
        self.params = params
        self._norm = norm_constants(params.channels, eps)
        self._slope = np.array(LEAKY_SLOPE, np.float32)
        self.tade_cond = ConvState(params.tade.cond, frame)
        self.tade_gamma = ConvState(params.tade.gamma, frame)
        self.tade_beta = ConvState(params.tade.beta, frame)
        self.conv1 = ConvState(params.conv1, frame)
        self.conv2 = ConvState(params.conv2, frame)
        self._cap = 0
        self._alloc(frame)
        self.trace = None

    def _alloc(self, t):
        L = self.params.channels
        hidden = self.params.tade.cond.out_channels
        self._cap = t
        self._buf = {
            "hidden": np.empty((t, hidden), np.float32),
            "leak": np.empty((t, hidden), np.float32),
            "gamma": np.empty((t, L), np.float32),
            "beta": np.empty((t, L), np.float32),
            "h": np.empty((t, L), np.float32),
            "sq": np.empty((t, L), np.float32),
            "out": np.empty((t, L), np.float32),
            "stat": np.empty(t, np.float32),
        }

    def states(self):
        return [self.tade_cond, self.tade_gamma, self.tade_beta, self.conv1, self.conv2]

    def reset(self):
        for s in self.states():
            s.reset()

    def _modulate(self, src, b):
        h = b["h"]
        channel_norm_into(src, h, b["stat"], b["sq"], self._norm)
        np.multiply(h, b["gamma"], out=h)
        np.add(h, b["beta"], out=h)
        if self.trace is not None:
            self.trace.append((id(b["gamma"]), id(b["beta"]), b["gamma"].copy(), b["beta"].copy()))
        return h

    def _gate(self, y, b):
        half = y.shape[1] // 2
        return gated_activation_into(y[:, :half], y[:, half:], b["h"], b["stat"])

    def step(self, cond, x):
        """Advance ``t = len(x)`` samples; returns a view valid until the next call."""
        t = x.shape[0]
        if t > self._cap:
            self._alloc(t)
        if t == self._cap:
            b = self._buf
        else:
            b = {k: v[:t] for k, v in self._buf.items()}
        hid = b["hidden"]
        hid[...] = self.tade_cond.step(cond)
        np.multiply(hid, self._slope, out=b["leak"])
        np.maximum(hid, b["leak"], out=hid)
        b["gamma"][...] = self.tade_gamma.step(hid)
        b["beta"][...] = self.tade_beta.step(hid)
        h = self._gate(self.conv1.step(self._modulate(x, b)), b)
        h = self._gate(self.conv2.step(self._modulate(h, b)), b)
        np.add(x, h, out=b["out"])
        return b["out"]
