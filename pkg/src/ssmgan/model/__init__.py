"""Generator graph, weights and complexity accounting."""

from .complexity import (
    MacReport,
    ParamReport,
    block_macs_per_sample,
    closed_form_block_macs,
    closed_form_upsampler_macs,
    mac_count,
    measured_mac_count,
    param_count,
)
from .config import DEFAULT_RATES, GeneratorConfig
from .generator import Generator, build_generator
from .layers import (
    ResBlockParams,
    ResBlockStream,
    TadeParams,
    pitch_prior,
    resblock_offline,
    tade_modulate,
)
from .weights import WeightStore, random_weights, required_shapes, zero_weights

__all__ = [
    "DEFAULT_RATES",
    "Generator",
    "GeneratorConfig",
    "MacReport",
    "ParamReport",
    "ResBlockParams",
    "ResBlockStream",
    "TadeParams",
    "WeightStore",
    "block_macs_per_sample",
    "build_generator",
    "closed_form_block_macs",
    "closed_form_upsampler_macs",
    "mac_count",
    "measured_mac_count",
    "param_count",
    "pitch_prior",
    "random_weights",
    "required_shapes",
    "resblock_offline",
    "tade_modulate",
    "zero_weights",
]
