"""Per-stream decoding sessions.

A :class:`Session` owns every piece of mutable state for one stream: conv
histories, upsampler phases, the filter-bank history and the last cepstrum of
the previous packet. The generator it reads from is immutable, so any number
of sessions may share one generator from different threads; a single session
must not be driven concurrently.

All working buffers are allocated in the constructor. ``decode_frame`` with an
``out`` buffer allocates no array memory after the first call.
"""

import hashlib
import time
from dataclasses import dataclass

import numpy as np

from .bitstream import FRAMES_PER_PACKET, FeatureFrame, dequantize_packet
from .dsp.conv import ConvState
from .dsp.pqmf import PqmfSynthesisState, measure_delay
from .dsp.resample import RationalUpsampler
from .model.layers import ResBlockStream

ENCODER_DELAY_MS = 45.0


class _BlockStream:
    def __init__(self, blk, cfg, index):
        frame = cfg.block_frame_samples(index)
        self.up = RationalUpsampler(*blk.upsample) if blk.upsample else None
        self.up_conv = ConvState(blk.up_conv, frame) if blk.up_conv is not None else None
        self.cond_up = RationalUpsampler(blk.rate, cfg.frame_rate)
        self.res = ResBlockStream(blk.resblock, frame, cfg.eps)

    def conv_states(self):
        head = [self.up_conv] if self.up_conv is not None else []
        return head + self.res.states()

    def upsamplers(self):
        return [u for u in (self.up, self.cond_up) if u is not None]

    def step(self, cond, x):
        if self.up is not None:
            x = self.up_conv.step(self.up.step(x))
        return self.res.step(self.cond_up.step(cond), x)


class Session:
    """Streaming decoder state for exactly one stream."""

    def __init__(self, generator):
        self.generator = generator
        cfg = generator.config
        self.config = cfg
        self._cep = np.zeros((1, cfg.n_cepstrum), np.float32)
        self._prior = np.zeros((1, cfg.prior_channels), np.float32)
        self.cond = ConvState(generator.cond_spec, 1)
        self.blocks = [_BlockStream(b, cfg, i) for i, b in enumerate(generator.blocks)]
        self.out = ConvState(generator.out_spec, cfg.band_frame_samples)
        self.pqmf = PqmfSynthesisState(generator.bank, cfg.band_frame_samples)
        self._pcm = np.zeros(cfg.frame_samples, np.float32)
        self._corr = np.zeros((), np.float32)
        self._lo = np.array(-1.0, np.float32)
        self._hi = np.array(1.0, np.float32)
        self.prev_cepstrum = None
        self.frames_decoded = 0

    def conv_states(self):
        states = [self.cond]
        for b in self.blocks:
            states += b.conv_states()
        return states + [self.out, self.pqmf.conv]

    def reset(self):
        """Return to the cold-start state."""
        for s in self.conv_states():
            s.reset()
        for b in self.blocks:
            for u in b.upsamplers():
                u.reset()
        self.prev_cepstrum = None
        self.frames_decoded = 0
        return self

    def state_fingerprint(self):
        """Hash of every buffer and counter that influences future output."""
        h = hashlib.sha256()
        for s in self.conv_states():
            h.update(np.ascontiguousarray(s.history).tobytes())
        for b in self.blocks:
            for u in b.upsamplers():
                h.update(str(u.phase).encode())
        prev = b"" if self.prev_cepstrum is None else self.prev_cepstrum.tobytes()
        h.update(prev)
        h.update(str(self.frames_decoded).encode())
        return h.hexdigest()[:16]

    def decode_frame(self, frame, out=None):
        """Decode one 10 ms :class:`FeatureFrame` into ``frame_samples`` PCM values.

        With ``out`` the samples are written there and ``out`` is returned;
        otherwise a fresh array is returned.
        """
        if not isinstance(frame, FeatureFrame):
            raise TypeError(f"expected FeatureFrame, got {type(frame).__name__}")
        self._cep[0] = frame.cepstrum
        self._corr[()] = frame.pitch_corr
        np.multiply(self.generator.embedding[frame.pitch_lag_idx], self._corr,
                    out=self._prior[0])
        pcm = self._run(self._cep, self._prior, self._pcm)
        if out is None:
            return pcm.copy()
        out[...] = pcm
        return out

    def decode_chunk(self, frames):
        """Push several frames through every layer in one pass.

        Produces the same audio as calling :meth:`decode_frame` on each frame
        in turn; used to check that the result does not depend on chunking.
        """
        frames = list(frames)
        cfg = self.config
        cep = np.stack([f.cepstrum for f in frames]).astype(np.float32)
        lag = np.array([f.pitch_lag_idx for f in frames])
        corr = np.array([f.pitch_corr for f in frames], np.float32)
        prior = self.generator.embedding[lag] * corr[:, None]
        out = np.empty(len(frames) * cfg.frame_samples, np.float32)
        return self._run(cep, prior, out).copy()

    def _run(self, cep, prior, out):
        cond = self.cond.step(cep)
        x = prior
        for blk in self.blocks:
            x = blk.step(cond, x)
        bands = self.out.step(x)
        np.tanh(bands, out=bands)
        pcm = self.pqmf.step(bands)
        np.clip(pcm, self._lo, self._hi, out=out)
        self.frames_decoded += cep.shape[0]
        return out

    def decode_frames(self, frames):
        n = self.config.frame_samples
        pcm = np.empty(len(frames) * n, np.float32)
        for i, f in enumerate(frames):
            self.decode_frame(f, out=pcm[i * n:(i + 1) * n])
        return pcm

    def decode_packet(self, pkt, books):
        """Dequantize one 40 ms packet and decode its four frames."""
        frames = dequantize_packet(pkt, self.prev_cepstrum, books)
        pcm = self.decode_frames(frames)
        self.prev_cepstrum = frames[-1].cepstrum
        return pcm


def decode_frame(session, frame):
    return session.decode_frame(frame)


def decode_packet(session, pkt, books):
    return session.decode_packet(pkt, books)


def decode_offline(generator, frames):
    """Whole-utterance decode through the offline operators."""
    return generator.decode_offline(frames)


def reset(session):
    return session.reset()


@dataclass(frozen=True)
class LatencyReport:
    encoder_ms: float
    pqmf_ms: float
    network_ms: float
    pqmf_samples: int

    @property
    def total_ms(self):
        return self.encoder_ms + self.pqmf_ms + self.network_ms

    def lines(self):
        return [
            f"feature extraction (encoder side): {self.encoder_ms:.3f} ms",
            f"PQMF filter bank:                  {self.pqmf_ms:.3f} ms ({self.pqmf_samples} samples)",
            f"network (causal convs):            {self.network_ms:.3f} ms",
            f"total:                             {self.total_ms:.3f} ms",
        ]


def latency_report(generator):
    """Algorithmic delay budget; the encoder share is reported, not incurred."""
    bank = generator.bank
    measured = measure_delay(bank)
    if measured != bank.declared_delay:
        raise AssertionError(
            f"filter bank declares {bank.declared_delay} samples but measures {measured}"
        )
    fs = generator.config.sample_rate
    return LatencyReport(
        encoder_ms=ENCODER_DELAY_MS,
        pqmf_ms=1000.0 * measured / fs,
        network_ms=0.0,
        pqmf_samples=measured,
    )


def measure_throughput(generator, frames, session=None):
    """Stream ``frames`` and return ``(pcm, realtime_factor)``.

    The factor is audio duration divided by wall-clock time; above 1 means
    faster than real time.
    """
    session = session or Session(generator)
    start = time.perf_counter()
    pcm = session.decode_frames(frames)
    elapsed = time.perf_counter() - start
    audio_s = pcm.size / generator.config.sample_rate
    return pcm, audio_s / max(elapsed, 1e-12)


__all__ = [
    "ENCODER_DELAY_MS",
    "FRAMES_PER_PACKET",
    "LatencyReport",
    "Session",
    "decode_frame",
    "decode_offline",
    "decode_packet",
    "latency_report",
    "measure_throughput",
    "reset",
]
