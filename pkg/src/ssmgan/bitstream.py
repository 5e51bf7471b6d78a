"""Coded packet layout, stream container, codebooks and dequantization.

A packet carries 40 ms of speech in 64 bits. Fields are written
most-significant-bit first in this order::

    pitch_lag_idx        6
    pitch_mod_idx        3
    pitch_corr_idx       2
    energy_idx           7
    cepstrum_abs_idx    30
    cepstrum_delta_idx  13
    cepstrum_interp_idx  3

The codebooks shipped here are deterministic stand-ins generated from a seed;
they preserve the packet format, not the numeric values of any trained coder.
"""

import struct
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import tensorfile
from .errors import FieldRangeError, FormatError

FIELD_WIDTHS = (
    ("pitch_lag_idx", 6),
    ("pitch_mod_idx", 3),
    ("pitch_corr_idx", 2),
    ("energy_idx", 7),
    ("cepstrum_abs_idx", 30),
    ("cepstrum_delta_idx", 13),
    ("cepstrum_interp_idx", 3),
)
PACKET_BITS = sum(w for _, w in FIELD_WIDTHS)
PACKET_BYTES = PACKET_BITS // 8
PACKET_MS = 40
FRAME_MS = 10
FRAMES_PER_PACKET = PACKET_MS // FRAME_MS
N_CEPSTRUM = 18
PITCH_VOCAB = 64

STREAM_MAGIC = b"SMG1"
STREAM_VERSION = 1
_STREAM_HEADER = struct.Struct("<4sHII")

CODEBOOK_MAGIC = b"SMCB"
CODEBOOK_VERSION = 1

# Product-codebook splits over c1..c17 (c0 comes from the energy field).
# Each entry: (sub-index width in bits, first coefficient, end coefficient).
ABS_SPLIT = ((5, 1, 4), (5, 4, 7), (5, 7, 10), (5, 10, 13), (5, 13, 16), (5, 16, 18))
DELTA_SPLIT = ((4, 1, 5), (3, 5, 9), (3, 9, 13), (3, 13, 18))

# Interpolation weight toward the right neighbour, indexed by the 3-bit rule:
# midpoint, copy-left, copy-right, then five fixed convex weights.
INTERP_WEIGHTS = (0.5, 0.0, 1.0, 0.125, 0.25, 0.375, 0.625, 0.75)
# Per-frame lag slope (index steps per frame) selected by the 3-bit pitch modulation.
PITCH_MOD_SLOPES = (0, 1, -1, 2, -2, 3, -3, 4)

assert PACKET_BITS == 64
assert sum(w for w, _, _ in ABS_SPLIT) == 30
assert sum(w for w, _, _ in DELTA_SPLIT) == 13


class CodedPacket(NamedTuple):
    """Raw field indices of one 64-bit packet."""

    pitch_lag_idx: int = 0
    pitch_mod_idx: int = 0
    pitch_corr_idx: int = 0
    energy_idx: int = 0
    cepstrum_abs_idx: int = 0
    cepstrum_delta_idx: int = 0
    cepstrum_interp_idx: int = 0

    def validate(self):
        for (name, width), value in zip(FIELD_WIDTHS, self):
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise FieldRangeError(name, value, width)
            if not 0 <= value < (1 << width):
                raise FieldRangeError(name, value, width)
        return self


def pack_packet(pkt):
    """Pack a :class:`CodedPacket` into 8 bytes, MSB first in field order."""
    pkt = CodedPacket(*pkt).validate()
    acc = 0
    for (_, width), value in zip(FIELD_WIDTHS, pkt):
        acc = (acc << width) | int(value)
    return acc.to_bytes(PACKET_BYTES, "big")


def parse_packet(data):
    """Inverse of :func:`pack_packet`."""
    data = bytes(data)
    if len(data) != PACKET_BYTES:
        raise FormatError(f"packet must be {PACKET_BYTES} bytes, got {len(data)}")
    acc = int.from_bytes(data, "big")
    values = []
    shift = PACKET_BITS
    for _, width in FIELD_WIDTHS:
        shift -= width
        values.append((acc >> shift) & ((1 << width) - 1))
    assert shift == 0
    return CodedPacket(*values)


@dataclass(frozen=True)
class StreamInfo:
    version: int
    sample_rate: int
    packet_count: int
    packet_ms: int = PACKET_MS
    bits_per_packet: int = PACKET_BITS

    @property
    def bitrate(self):
        """Bits per second; exact integer for the 40 ms / 64 bit layout."""
        return self.bits_per_packet * 1000 // self.packet_ms

    @property
    def duration_s(self):
        return self.packet_count * self.packet_ms / 1000.0

    @property
    def n_samples(self):
        return self.packet_count * self.sample_rate * self.packet_ms // 1000


def write_stream(packets, sample_rate=16000):
    """Serialize packets into the ``SMG1`` container."""
    payload = b"".join(pack_packet(p) for p in packets)
    count = len(payload) // PACKET_BYTES
    return _STREAM_HEADER.pack(STREAM_MAGIC, STREAM_VERSION, sample_rate, count) + payload


def read_stream(data):
    """Parse an ``SMG1`` container into ``(StreamInfo, [CodedPacket, ...])``."""
    data = bytes(data)
    if len(data) < _STREAM_HEADER.size:
        raise FormatError("stream shorter than its header")
    magic, version, sample_rate, count = _STREAM_HEADER.unpack_from(data, 0)
    if magic != STREAM_MAGIC:
        raise FormatError(f"bad stream magic {magic!r}")
    if version != STREAM_VERSION:
        raise FormatError(f"unsupported stream version {version}")
    payload = data[_STREAM_HEADER.size:]
    if len(payload) != count * PACKET_BYTES:
        raise FormatError(
            f"payload is {len(payload)} bytes, header promises {count} packets "
            f"({count * PACKET_BYTES} bytes)"
        )
    packets = [
        parse_packet(payload[i:i + PACKET_BYTES])
        for i in range(0, len(payload), PACKET_BYTES)
    ]
    return StreamInfo(version, sample_rate, count), packets


@dataclass(frozen=True, eq=False)
class FeatureFrame:
    """Dequantized conditioning for one 10 ms frame."""

    cepstrum: np.ndarray
    pitch_lag_idx: int
    pitch_corr: float

    def __post_init__(self):
        cep = np.asarray(self.cepstrum, dtype=np.float32)
        if cep.shape != (N_CEPSTRUM,):
            raise ValueError(f"cepstrum must have shape ({N_CEPSTRUM},), got {cep.shape}")
        if not np.all(np.isfinite(cep)):
            raise ValueError("cepstrum contains non-finite values")
        if not 0 <= int(self.pitch_lag_idx) < PITCH_VOCAB:
            raise ValueError(f"pitch_lag_idx {self.pitch_lag_idx} outside [0, {PITCH_VOCAB - 1}]")
        if not 0.0 <= float(self.pitch_corr) <= 1.0:
            raise ValueError(f"pitch_corr {self.pitch_corr} outside [0, 1]")
        object.__setattr__(self, "cepstrum", cep)
        object.__setattr__(self, "pitch_lag_idx", int(self.pitch_lag_idx))
        # float32-exact so matrix rows and frames describe the same input
        object.__setattr__(self, "pitch_corr", float(np.float32(self.pitch_corr)))

    def __eq__(self, other):
        if not isinstance(other, FeatureFrame):
            return NotImplemented
        return (
            np.array_equal(self.cepstrum, other.cepstrum)
            and self.pitch_lag_idx == other.pitch_lag_idx
            and self.pitch_corr == other.pitch_corr
        )

    def to_array(self):
        """Row layout used by feature matrices: 18 cepstra, lag index, correlation."""
        return np.concatenate(
            [self.cepstrum, np.float32([self.pitch_lag_idx, self.pitch_corr])]
        )

    @classmethod
    def from_array(cls, row):
        row = np.asarray(row, dtype=np.float32)
        return cls(row[:N_CEPSTRUM], int(round(float(row[N_CEPSTRUM]))), float(row[N_CEPSTRUM + 1]))


def frames_to_matrix(frames):
    return np.stack([f.to_array() for f in frames]).astype(np.float32)


@dataclass(frozen=True, eq=False)
class CodebookSet:
    """Lookup tables turning packet indices into feature values."""

    lag_table: np.ndarray
    mod_table: np.ndarray
    corr_table: np.ndarray
    energy_table: np.ndarray
    interp_table: np.ndarray
    abs_tables: tuple = field(default_factory=tuple)
    delta_tables: tuple = field(default_factory=tuple)
    version: int = CODEBOOK_VERSION
    seed: int = 0

    def __post_init__(self):
        checks = [
            ("lag_table", self.lag_table, (1 << 6,)),
            ("mod_table", self.mod_table, (1 << 3, FRAMES_PER_PACKET)),
            ("corr_table", self.corr_table, (1 << 2,)),
            ("energy_table", self.energy_table, (1 << 7,)),
            ("interp_table", self.interp_table, (1 << 3,)),
        ]
        checks += [
            (f"abs_{i}", t, (1 << w, hi - lo))
            for i, (t, (w, lo, hi)) in enumerate(zip(self.abs_tables, ABS_SPLIT))
        ]
        checks += [
            (f"delta_{i}", t, (1 << w, hi - lo))
            for i, (t, (w, lo, hi)) in enumerate(zip(self.delta_tables, DELTA_SPLIT))
        ]
        if len(self.abs_tables) != len(ABS_SPLIT) or len(self.delta_tables) != len(DELTA_SPLIT):
            raise FormatError("codebook set is missing cepstrum sub-tables")
        for name, table, shape in checks:
            if np.shape(table) != shape:
                raise FormatError(f"codebook table {name} has shape {np.shape(table)}, expected {shape}")
        w = np.asarray(self.interp_table)
        if np.any(w < 0) or np.any(w > 1):
            raise FormatError("interpolation weights must lie in [0, 1]")

    def tables(self):
        out = {
            "lag_table": self.lag_table,
            "mod_table": self.mod_table,
            "corr_table": self.corr_table,
            "energy_table": self.energy_table,
            "interp_table": self.interp_table,
        }
        out.update({f"abs_{i}": t for i, t in enumerate(self.abs_tables)})
        out.update({f"delta_{i}": t for i, t in enumerate(self.delta_tables)})
        return out

    def save(self, path):
        tensorfile.dump(
            path, CODEBOOK_MAGIC, CODEBOOK_VERSION, self.tables(),
            meta={"version": int(self.version), "seed": int(self.seed)},
        )

    @classmethod
    def load(cls, path):
        meta, t = tensorfile.load(path, CODEBOOK_MAGIC, CODEBOOK_VERSION)
        try:
            return cls(
                lag_table=t["lag_table"],
                mod_table=t["mod_table"].astype(np.int64),
                corr_table=t["corr_table"],
                energy_table=t["energy_table"],
                interp_table=t["interp_table"],
                abs_tables=tuple(t[f"abs_{i}"] for i in range(len(ABS_SPLIT))),
                delta_tables=tuple(t[f"delta_{i}"] for i in range(len(DELTA_SPLIT))),
                version=int(meta.get("version", CODEBOOK_VERSION)),
                seed=int(meta.get("seed", 0)),
            )
        except KeyError as exc:
            raise FormatError(f"codebook file lacks table {exc}") from exc


def make_codebooks(seed=0, version=CODEBOOK_VERSION):
    """Build the default deterministic codebooks for ``(seed, version)``."""
    if version != CODEBOOK_VERSION:
        raise ValueError(f"no codebook recipe for version {version}")
    rng = np.random.default_rng([version, seed])
    frames = np.arange(FRAMES_PER_PACKET) - (FRAMES_PER_PACKET - 1) / 2
    mod_table = np.rint(np.outer(PITCH_MOD_SLOPES, frames)).astype(np.int64)
    abs_tables = tuple(
        rng.uniform(-1.0, 1.0, (1 << w, hi - lo)).astype(np.float32) for w, lo, hi in ABS_SPLIT
    )
    delta_tables = []
    for w, lo, hi in DELTA_SPLIT:
        t = rng.uniform(-0.25, 0.25, (1 << w, hi - lo)).astype(np.float32)
        t[0] = 0.0
        delta_tables.append(t)
    return CodebookSet(
        # pitch period in samples at 16 kHz, informational only
        lag_table=np.linspace(32.0, 256.0, 1 << 6, dtype=np.float32),
        mod_table=mod_table,
        corr_table=np.linspace(0.0, 1.0, 1 << 2, dtype=np.float32),
        energy_table=np.linspace(-10.0, 10.0, 1 << 7, dtype=np.float32),
        interp_table=np.asarray(INTERP_WEIGHTS, dtype=np.float32),
        abs_tables=abs_tables,
        delta_tables=tuple(delta_tables),
        version=version,
        seed=seed,
    )


def _split_index(index, split):
    """Yield sub-indices of a product-codebook field, most significant first."""
    total = sum(w for w, _, _ in split)
    for w, lo, hi in split:
        total -= w
        yield (index >> total) & ((1 << w) - 1), lo, hi


def _product_decode(index, split, tables):
    vec = np.zeros(N_CEPSTRUM, dtype=np.float32)
    for (sub, lo, hi), table in zip(_split_index(index, split), tables):
        vec[lo:hi] = table[sub]
    return vec


def dequantize_packet(pkt, prev, books):
    """Expand one packet into four :class:`FeatureFrame` objects.

    Frame 3 takes the absolute codebook vector, frame 1 the midpoint of the
    previous packet's last frame and frame 3 plus a delta correction, and
    frames 0 and 2 interpolate their neighbours with the weight picked by the
    interpolation index. Without ``prev`` (first packet) all four frames use
    the absolute vector.

    Args:
        pkt: CodedPacket.
        prev: cepstrum (18,) of the previous packet's last frame, or None.
        books: CodebookSet.

    Returns:
        list of 4 FeatureFrame.
    """
    pkt = CodedPacket(*pkt).validate()
    absolute = _product_decode(pkt.cepstrum_abs_idx, ABS_SPLIT, books.abs_tables)
    if prev is None:
        ceps = [absolute] * FRAMES_PER_PACKET
    else:
        left = np.asarray(prev, dtype=np.float32).copy()
        if left.shape != (N_CEPSTRUM,):
            raise ValueError(f"prev cepstrum must have shape ({N_CEPSTRUM},)")
        left[0] = 0.0
        delta = _product_decode(pkt.cepstrum_delta_idx, DELTA_SPLIT, books.delta_tables)
        mid = np.float32(0.5) * (left + absolute) + delta
        w = np.float32(books.interp_table[pkt.cepstrum_interp_idx])
        ceps = [
            (1 - w) * left + w * mid,
            mid,
            (1 - w) * mid + w * absolute,
            absolute,
        ]
    energy = books.energy_table[pkt.energy_idx]
    corr = float(books.corr_table[pkt.pitch_corr_idx])
    offsets = books.mod_table[pkt.pitch_mod_idx]
    frames = []
    for j, cep in enumerate(ceps):
        cep = np.array(cep, dtype=np.float32)
        cep[0] = energy
        lag = int(np.clip(pkt.pitch_lag_idx + int(offsets[j]), 0, PITCH_VOCAB - 1))
        frames.append(FeatureFrame(cep, lag, corr))
    return frames


def dequantize_stream(packets, books):
    """Dequantize a packet sequence, threading each packet's last cepstrum forward."""
    frames = []
    prev = None
    for pkt in packets:
        four = dequantize_packet(pkt, prev, books)
        frames.extend(four)
        prev = four[-1].cepstrum
    return frames
