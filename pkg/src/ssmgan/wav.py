"""Mono RIFF WAV output: 16-bit PCM by default, 32-bit float on request."""

import os
import tempfile
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .errors import FormatError

PCM_SCALE = 32767.0


def quantize_pcm16(x):
    """Scale ``[-1, 1]`` floats to int16, rounding half away from zero, hard clip."""
    x = np.asarray(x, dtype=np.float64) * PCM_SCALE
    q = np.sign(x) * np.floor(np.abs(x) + 0.5)
    return np.clip(q, -32768, 32767).astype(np.int16)


def write_wav(path, samples, sample_rate=16000, float32=False):
    """Write atomically: the target path only appears once the file is complete."""
    path = Path(path)
    data = np.asarray(samples, dtype=np.float32) if float32 else quantize_pcm16(samples)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".part", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            wavfile.write(fh, int(sample_rate), data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise
    return path


def read_wav(path):
    """Return ``(sample_rate, samples)`` with the stored dtype."""
    try:
        rate, data = wavfile.read(path)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if data.ndim != 1:
        raise FormatError(f"{path}: expected mono audio, got {data.shape[1]} channels")
    return rate, data
