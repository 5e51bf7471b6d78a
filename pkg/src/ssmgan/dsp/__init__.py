"""DSP primitives: causal convolution, channel ops, resampling, PQMF."""

from .activations import DEFAULT_EPS, channel_norm, gated_activation
from .conv import ConvSpec, ConvState, causal_conv_offline, causal_conv_step
from .pqmf import (
    PQMF,
    PqmfBank,
    PqmfSynthesisState,
    design_pqmf,
    pqmf_analysis,
    pqmf_synthesis,
    pqmf_synthesis_step,
)
from .resample import RationalUpsampler, upsample_rational

__all__ = [
    "DEFAULT_EPS",
    "PQMF",
    "ConvSpec",
    "ConvState",
    "PqmfBank",
    "PqmfSynthesisState",
    "RationalUpsampler",
    "causal_conv_offline",
    "causal_conv_step",
    "channel_norm",
    "design_pqmf",
    "gated_activation",
    "pqmf_analysis",
    "pqmf_synthesis",
    "pqmf_synthesis_step",
    "upsample_rational",
]
