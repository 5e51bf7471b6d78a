"""Named weight tensors, seeded initialization and the weight container file."""

import hashlib

import numpy as np

from .. import tensorfile
from ..errors import BuildError, FormatError
from .config import GeneratorConfig

WEIGHTS_MAGIC = b"SMGW"
WEIGHTS_VERSION = 1


def _conv(shapes, name, c_out, c_in, k):
    shapes[f"{name}.weight"] = (c_out, c_in, k)
    shapes[f"{name}.bias"] = (c_out,)


def required_shapes(config):
    """Every tensor the generator graph reads, in a fixed order."""
    L, K, F = config.hidden_channels, config.kernel_size, config.cond_channels
    shapes = {"prior.embedding": (config.pitch_vocab, config.prior_channels)}
    _conv(shapes, "cond", F, config.n_cepstrum, config.cond_kernel)
    for i, ratio in enumerate(config.upsample_ratios()):
        b = f"block{i}"
        if ratio is not None:
            _conv(shapes, f"{b}.up", L, L, K)
        _conv(shapes, f"{b}.tade.cond", L, F, K)
        _conv(shapes, f"{b}.tade.gamma", L, L, K)
        _conv(shapes, f"{b}.tade.beta", L, L, K)
        _conv(shapes, f"{b}.conv1", 2 * L, L, K)
        _conv(shapes, f"{b}.conv2", 2 * L, L, K)
    _conv(shapes, "out", config.n_bands, L, K)
    return shapes


class WeightStore:
    """Mapping of tensor name to float32 array, tied to one config."""

    def __init__(self, config, tensors=None):
        self.config = config
        self.tensors = {
            name: np.asarray(arr, dtype=np.float32) for name, arr in (tensors or {}).items()
        }

    def __getitem__(self, name):
        return self.tensors[name]

    def __contains__(self, name):
        return name in self.tensors

    def __len__(self):
        return len(self.tensors)

    def items(self):
        return self.tensors.items()

    @property
    def n_params(self):
        return sum(int(a.size) for a in self.tensors.values())

    def validate(self):
        """Raise :class:`BuildError` naming the first missing, mis-shaped or stray tensor."""
        shapes = required_shapes(self.config)
        for name, shape in shapes.items():
            if name not in self.tensors:
                raise BuildError(f"missing tensor {name!r} (expected shape {shape})")
            if self.tensors[name].shape != shape:
                raise BuildError(
                    f"tensor {name!r} has shape {self.tensors[name].shape}, expected {shape}"
                )
        extra = sorted(set(self.tensors) - set(shapes))
        if extra:
            raise BuildError(f"unexpected tensor {extra[0]!r}")
        return self

    def fingerprint(self):
        h = hashlib.sha256(self.config.fingerprint().encode())
        for name in sorted(self.tensors):
            arr = np.ascontiguousarray(self.tensors[name], dtype="<f4")
            h.update(name.encode())
            h.update(repr(arr.shape).encode())
            h.update(arr.tobytes())
        return h.hexdigest()[:16]

    def save(self, path):
        meta = {"config": self.config.to_dict(), "fingerprint": self.fingerprint()}
        tensorfile.dump(path, WEIGHTS_MAGIC, WEIGHTS_VERSION, self.tensors, meta=meta)

    @classmethod
    def load(cls, path, mmap=False):
        meta, tensors = tensorfile.load(path, WEIGHTS_MAGIC, WEIGHTS_VERSION, mmap=mmap)
        if "config" not in meta:
            raise FormatError("weight file has no embedded config")
        store = cls(GeneratorConfig.from_dict(meta["config"]))
        # keep memory-mapped views as they are
        store.tensors = dict(tensors)
        if meta.get("fingerprint") and meta["fingerprint"] != store.fingerprint():
            raise FormatError("weight file fingerprint does not match its contents")
        return store


def random_weights(config, seed=0):
    """Seeded scaled-uniform initialization: ``U(-1/sqrt(fan_in), 1/sqrt(fan_in))``."""
    rng = np.random.default_rng(seed)
    shapes = required_shapes(config)
    tensors = {}
    for name, shape in shapes.items():
        if name == "prior.embedding":
            tensors[name] = rng.uniform(-1.0, 1.0, shape).astype(np.float32)
            continue
        wshape = shapes[name.rsplit(".", 1)[0] + ".weight"]
        bound = 1.0 / np.sqrt(wshape[1] * wshape[2])
        tensors[name] = rng.uniform(-bound, bound, shape).astype(np.float32)
    return WeightStore(config, tensors)


def zero_weights(config):
    return WeightStore(
        config, {n: np.zeros(s, np.float32) for n, s in required_shapes(config).items()}
    )
