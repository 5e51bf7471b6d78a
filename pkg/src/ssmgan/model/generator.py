"""Full generator graph.

Per 10 ms frame::

    prior  = embedding[lag] * corr                      100 Hz, L channels
    cond   = conv(cepstrum, 18 -> F, kernel 3)          100 Hz, F channels
    for each block i:
        x = up_i(x)       sample-and-hold + conv L -> L, only where the rate grows
        x = resblock_i(hold(cond -> rate_i), x)
    bands = tanh(conv(x, L -> N, kernel K))             fs/N Hz, N bands
    pcm   = PQMF synthesis(bands)                       fs
"""

from dataclasses import dataclass

import numpy as np

from ..dsp.conv import ConvSpec, causal_conv_offline
from ..dsp.pqmf import design_pqmf, pqmf_synthesis
from ..dsp.resample import upsample_rational
from ..errors import BuildError
from ..validation import check_features
from .config import GeneratorConfig
from .layers import ResBlockParams, TadeParams, pitch_prior, resblock_offline


@dataclass(frozen=True)
class BlockParams:
    rate: int
    upsample: object  # (p, q) or None
    up_conv: object  # ConvSpec or None
    resblock: ResBlockParams


def _conv_spec(weights, name, dilation=1):
    return ConvSpec(weights[f"{name}.weight"], weights[f"{name}.bias"], dilation)


class Generator:
    """Immutable config + weights; shareable across sessions and threads."""

    def __init__(self, config, weights):
        if weights.config != config:
            raise BuildError("weight store was created for a different config")
        weights.validate()
        self.config = config
        self.weights = weights
        self.embedding = np.ascontiguousarray(weights["prior.embedding"])
        self.cond_spec = _conv_spec(weights, "cond")
        blocks = []
        for i, ratio in enumerate(config.upsample_ratios()):
            b = f"block{i}"
            tade = TadeParams(
                _conv_spec(weights, f"{b}.tade.cond"),
                _conv_spec(weights, f"{b}.tade.gamma"),
                _conv_spec(weights, f"{b}.tade.beta"),
            )
            res = ResBlockParams(
                tade, _conv_spec(weights, f"{b}.conv1", 1), _conv_spec(weights, f"{b}.conv2", 2)
            )
            up = _conv_spec(weights, f"{b}.up") if ratio is not None else None
            blocks.append(BlockParams(config.rate_schedule[i], ratio, up, res))
        self.blocks = tuple(blocks)
        self.out_spec = _conv_spec(weights, "out")
        self.bank = design_pqmf(config.n_bands, config.pqmf_taps, config.pqmf_beta,
                                config.pqmf_cutoff)

    @property
    def n_upsamplers(self):
        return sum(b.upsample is not None for b in self.blocks)

    def fingerprint(self):
        return self.weights.fingerprint()

    def bands_offline(self, features):
        """Whole-utterance evaluation up to the band signals ``[n*fs/(N*100)][N]``."""
        cfg = self.config
        feats = check_features(features, cfg.n_cepstrum, cfg.pitch_vocab)
        cep = feats[:, :cfg.n_cepstrum]
        lag = feats[:, cfg.n_cepstrum].astype(np.int64)
        corr = feats[:, cfg.n_cepstrum + 1]
        x = pitch_prior(lag, corr, self.embedding)
        cond = causal_conv_offline(cep, self.cond_spec)
        for blk in self.blocks:
            if blk.upsample is not None:
                x = causal_conv_offline(upsample_rational(x, *blk.upsample), blk.up_conv)
            c = upsample_rational(cond, blk.rate, cfg.frame_rate)
            x = resblock_offline(c, x, blk.resblock, cfg.eps)
        return np.tanh(causal_conv_offline(x, self.out_spec))

    def decode_offline(self, features):
        """Whole-utterance PCM, ``[160*n]`` float32."""
        bands = self.bands_offline(features)
        pcm = pqmf_synthesis(bands, self.bank).astype(np.float32)
        return np.clip(pcm, -1.0, 1.0)


def build_generator(config, weights):
    return Generator(config, weights)


__all__ = ["Generator", "GeneratorConfig", "build_generator"]
