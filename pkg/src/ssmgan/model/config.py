"""Architecture hyperparameters."""

import hashlib
import json
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

from ..dsp.activations import DEFAULT_EPS
from ..dsp.pqmf import DEFAULT_BETA, DEFAULT_CUTOFF, DEFAULT_TAPS
from ..errors import BuildError

DEFAULT_RATES = (100, 200, 500, 1000, 2000, 4000, 4000, 4000, 4000)
_MAX_RATIO_TERM = 8


@dataclass(frozen=True)
class GeneratorConfig:
    """Generator shape.

    ``rate_schedule`` lists the output sample rate of every residual block in
    Hz. The last rate times ``n_bands`` must equal ``sample_rate``.
    """

    hidden_channels: int = 64
    kernel_size: int = 9
    cond_channels: int = 80
    rate_schedule: tuple = DEFAULT_RATES
    n_bands: int = 4
    sample_rate: int = 16000
    frame_ms: int = 10
    pitch_vocab: int = 64
    prior_channels: int = 64
    n_cepstrum: int = 18
    cond_kernel: int = 3
    pqmf_taps: int = DEFAULT_TAPS
    pqmf_beta: float = DEFAULT_BETA
    pqmf_cutoff: float = DEFAULT_CUTOFF
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        object.__setattr__(self, "rate_schedule", tuple(int(r) for r in self.rate_schedule))
        self.validate()

    def validate(self):
        rates = self.rate_schedule
        if not rates:
            raise BuildError("rate_schedule is empty")
        for name in ("hidden_channels", "kernel_size", "cond_channels", "n_bands",
                     "sample_rate", "frame_ms", "pitch_vocab", "n_cepstrum", "cond_kernel"):
            if getattr(self, name) < 1:
                raise BuildError(f"{name} must be positive")
        if self.prior_channels != self.hidden_channels:
            raise BuildError("prior_channels must equal hidden_channels (no input projection)")
        if any(b < a for a, b in zip(rates, rates[1:])):
            raise BuildError(f"rate_schedule must be non-decreasing: {rates}")
        if rates[-1] * self.n_bands != self.sample_rate:
            raise BuildError(
                f"last block rate {rates[-1]} x {self.n_bands} bands != {self.sample_rate} Hz"
            )
        if self.frame_samples % self.n_bands:
            raise BuildError(f"{self.frame_samples} samples per frame not divisible by N")
        if rates[0] != self.frame_rate:
            raise BuildError(f"first block must run at the frame rate {self.frame_rate} Hz")
        for r in rates:
            if (r * self.frame_ms) % 1000:
                raise BuildError(f"rate {r} Hz gives a fractional sample count per frame")
        for a, b in zip(rates, rates[1:]):
            ratio = Fraction(b, a)
            if max(ratio.numerator, ratio.denominator) > _MAX_RATIO_TERM:
                raise BuildError(f"rate ratio {b}/{a} = {ratio} is not a small rational")

    @property
    def frame_rate(self):
        return 1000 // self.frame_ms

    @property
    def frame_samples(self):
        return self.sample_rate * self.frame_ms // 1000

    @property
    def band_frame_samples(self):
        return self.frame_samples // self.n_bands

    def block_frame_samples(self, i):
        return self.rate_schedule[i] * self.frame_ms // 1000

    @property
    def n_blocks(self):
        return len(self.rate_schedule)

    def upsample_ratios(self):
        """``(p, q)`` per block, or None where the rate does not change."""
        out = [None]
        for a, b in zip(self.rate_schedule, self.rate_schedule[1:]):
            r = Fraction(b, a)
            out.append(None if r == 1 else (r.numerator, r.denominator))
        return out

    def to_dict(self):
        d = asdict(self)
        d["rate_schedule"] = list(self.rate_schedule)
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise BuildError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def fingerprint(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
