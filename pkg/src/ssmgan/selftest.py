"""Invariant suite run by ``ssmgan selftest``.

Every check is seeded, so two runs with the same seed print the same report.
"""

import numpy as np

from .bitstream import (
    FIELD_WIDTHS,
    CodedPacket,
    FeatureFrame,
    dequantize_stream,
    make_codebooks,
    pack_packet,
    parse_packet,
)
from .dsp.pqmf import cascade_snr
from .engine import Session
from .model import GeneratorConfig, build_generator, random_weights
from .wav import quantize_pcm16

STREAM_TOL = 1e-5
PQMF_MIN_SNR_DB = 45.0


def random_packets(rng, n):
    return [
        CodedPacket(*(int(rng.integers(0, 1 << w)) for _, w in FIELD_WIDTHS)) for _ in range(n)
    ]


def random_frames(rng, n):
    return [
        FeatureFrame(rng.uniform(-4.0, 4.0, 18), int(rng.integers(0, 64)), float(rng.uniform()))
        for _ in range(n)
    ]


def _packet_roundtrip(rng, generator, books):
    pkts = random_packets(rng, 1000)
    bad = sum(parse_packet(pack_packet(p)) != p for p in pkts)
    return bad == 0, f"{bad} failures in 1000 random packets"


def _stream_equivalence(rng, generator, books):
    frames = random_frames(rng, 50)
    streamed = Session(generator).decode_frames(frames)
    offline = generator.decode_offline(frames)
    err = float(np.max(np.abs(streamed - offline)))
    return err <= STREAM_TOL, f"max |stream - offline| = {err:.2e} (tol {STREAM_TOL:g})"


def _chunk_invariance(rng, generator, books):
    frames = dequantize_stream(random_packets(rng, 6), books)
    per_frame = Session(generator).decode_frames(frames)
    s = Session(generator)
    per_packet = np.concatenate([s.decode_chunk(frames[i:i + 4]) for i in range(0, len(frames), 4)])
    offline = generator.decode_offline(frames)
    ref = quantize_pcm16(per_frame).astype(int)
    lsb = max(int(np.max(np.abs(quantize_pcm16(y).astype(int) - ref))) for y in (per_packet, offline))
    return lsb <= 1, f"one, four and all frames at a time agree within {lsb} LSB"


def _pqmf_snr(rng, generator, books):
    snr = cascade_snr(generator.bank, rng.standard_normal(generator.config.sample_rate))
    return snr >= PQMF_MIN_SNR_DB, f"cascade SNR {snr:.2f} dB (min {PQMF_MIN_SNR_DB:g})"


def _reset_determinism(rng, generator, books):
    frames = random_frames(rng, 20)
    s = Session(generator)
    fresh = s.state_fingerprint()
    first = s.decode_frames(frames)
    s.reset()
    same_state = s.state_fingerprint() == fresh
    second = s.decode_frames(frames)
    ok = same_state and np.array_equal(first, second)
    return ok, "decode-reset-decode bit-identical" if ok else "outputs or state differ after reset"


def _causality(rng, generator, books):
    frames = random_frames(rng, 12)
    base = generator.decode_offline(frames)
    j = 6
    pert = list(frames)
    pert[j] = random_frames(rng, 1)[0]
    other = generator.decode_offline(pert)
    n = generator.config.frame_samples * j
    ok = np.array_equal(base[:n], other[:n]) and not np.array_equal(base, other)
    return ok, f"perturbing frame {j} leaves the first {n} samples unchanged"


CHECKS = (
    ("packet round-trip", _packet_roundtrip),
    ("streaming == offline", _stream_equivalence),
    ("chunk invariance", _chunk_invariance),
    ("PQMF reconstruction", _pqmf_snr),
    ("reset determinism", _reset_determinism),
    ("causality", _causality),
)


def run_selftest(seed=0, config=None):
    """Run every check; returns a list of ``(name, passed, detail)``."""
    config = config or GeneratorConfig()
    generator = build_generator(config, random_weights(config, seed))
    books = make_codebooks(seed)
    results = []
    for i, (name, check) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, i])
        passed, detail = check(rng, generator, books)
        results.append((name, bool(passed), detail))
    return results
