"""One test per acceptance criterion; each prints a PASS/FAIL line.

The same lines are repeated in the terminal summary of every pytest run that
includes this file.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from ssmgan.bitstream import (
    FIELD_WIDTHS,
    CodedPacket,
    dequantize_stream,
    make_codebooks,
    pack_packet,
    parse_packet,
    read_stream,
    write_stream,
)
from ssmgan.cli import main
from ssmgan.dsp import design_pqmf
from ssmgan.dsp.pqmf import cascade_snr, measure_delay
from ssmgan.engine import Session
from ssmgan.model import GeneratorConfig, build_generator, mac_count, param_count, random_weights
from ssmgan.selftest import random_frames, random_packets
from ssmgan.wav import quantize_pcm16, write_wav

MAC_EXPECTED = 4_845_772_800
MAC_RUNTIME_S = 1e-3
PARAM_REFERENCE = 2.73e6
PARAM_TOLERANCE = 0.10
PARAM_RUNTIME_S = 1.0
STREAM_SEEDS = 20
STREAM_FRAMES = 100  # 1 s
STREAM_TOL = 1e-5
STREAM_BUDGET_S = 300.0
MAX_LSB = 1
PQMF_MIN_SNR_DB = 45.0
CLAIMED_PQMF_DELAY_MS = 10.0
RANDOM_PACKETS = 10_000
BITRATE = 1600
CAUSALITY_TRIALS = 100
FRAME_SAMPLES = 160
FS = 16000

README = Path(__file__).resolve().parents[1] / "README.md"


@pytest.fixture(scope="module")
def config():
    return GeneratorConfig()


def test_criterion_01_complexity(config, acceptance):
    best = float("inf")
    for _ in range(20):
        start = time.perf_counter()
        total = mac_count(config).total
        best = min(best, time.perf_counter() - start)
    ok = total == MAC_EXPECTED and best < MAC_RUNTIME_S
    acceptance.report(1, ok, f"{total:,} MAC/s (expected {MAC_EXPECTED:,}), "
                             f"{best * 1e6:.0f} us")
    assert ok


def test_criterion_02_parameters(config, acceptance):
    start = time.perf_counter()
    report = param_count(config, random_weights(config, 0))
    elapsed = time.perf_counter() - start
    print(report.table(int(PARAM_REFERENCE)))
    delta = (report.total - PARAM_REFERENCE) / PARAM_REFERENCE
    ok = abs(delta) <= PARAM_TOLERANCE and elapsed < PARAM_RUNTIME_S
    acceptance.report(2, ok, f"{report.total:,} params, {delta:+.1%} vs 2.73M "
                             f"(limit +-{PARAM_TOLERANCE:.0%}), {elapsed:.2f} s")
    assert ok


def test_criterion_03_streaming_equivalence(config, acceptance):
    start = time.perf_counter()
    worst = 0.0
    for seed in range(STREAM_SEEDS):
        gen = build_generator(config, random_weights(config, seed))
        frames = random_frames(np.random.default_rng([seed, 3]), STREAM_FRAMES)
        streamed = Session(gen).decode_frames(frames)
        worst = max(worst, float(np.abs(streamed - gen.decode_offline(frames)).max()))
    elapsed = time.perf_counter() - start
    ok = worst <= STREAM_TOL and elapsed <= STREAM_BUDGET_S
    acceptance.report(3, ok, f"max |stream - offline| {worst:.2e} (tol {STREAM_TOL:g}) over "
                             f"{STREAM_SEEDS} weight sets x 1 s, {elapsed:.1f} s")
    assert ok


def test_criterion_04_chunk_invariance(config, acceptance):
    books = make_codebooks(0)
    worst = 0
    for seed in range(3):
        gen = build_generator(config, random_weights(config, 100 + seed))
        pkts = random_packets(np.random.default_rng([seed, 4]), 10)
        frames = dequantize_stream(pkts, books)
        per_frame = Session(gen).decode_frames(frames)
        s = Session(gen)
        per_packet = np.concatenate([s.decode_chunk(frames[i:i + 4])
                                     for i in range(0, len(frames), 4)])
        s = Session(gen)
        via_packets = np.concatenate([s.decode_packet(p, books) for p in pkts])
        ref = quantize_pcm16(per_frame).astype(int)
        for other in (per_packet, via_packets):
            worst = max(worst, int(np.abs(quantize_pcm16(other).astype(int) - ref).max()))
    ok = worst <= MAX_LSB
    acceptance.report(4, ok, f"per-frame vs per-packet max difference {worst} LSB "
                             f"(limit {MAX_LSB})")
    assert ok


def test_criterion_05_pqmf(acceptance):
    bank = design_pqmf()
    snr = cascade_snr(bank, np.random.default_rng(5).standard_normal(FS))
    delay = measure_delay(bank)
    delay_ms = 1000 * delay / FS
    documented = README.exists() and f"{delay_ms:.3f} ms" in README.read_text()
    ok = snr >= PQMF_MIN_SNR_DB and delay == bank.declared_delay and documented
    acceptance.report(5, ok, f"SNR {snr:.2f} dB (min {PQMF_MIN_SNR_DB:g}); measured delay "
                             f"{delay} samples = {delay_ms:.3f} ms vs {CLAIMED_PQMF_DELAY_MS:g} ms "
                             f"claimed; discussed in README: {documented}")
    assert ok


def test_criterion_06_bitstream(acceptance):
    failures = 0
    boundary = 0
    for i, (name, width) in enumerate(FIELD_WIDTHS):
        for value in (0, 1, (1 << width) - 2, (1 << width) - 1):
            for fill in ("zeros", "ones"):
                base = [0] * 7 if fill == "zeros" else [(1 << w) - 1 for _, w in FIELD_WIDTHS]
                base[i] = value
                pkt = CodedPacket(*base)
                failures += parse_packet(pack_packet(pkt)) != pkt
                boundary += 1
    rng = np.random.default_rng(6)
    pkts = random_packets(rng, RANDOM_PACKETS)
    failures += sum(parse_packet(pack_packet(p)) != p for p in pkts)
    info, back = read_stream(write_stream(pkts))
    failures += back != pkts
    ok = failures == 0 and info.bitrate == BITRATE
    acceptance.report(6, ok, f"{boundary} boundary + {RANDOM_PACKETS} random round-trips, "
                             f"{failures} failures; bitrate {info.bitrate} b/s")
    assert ok


def test_criterion_07_causality(config, acceptance):
    gens = [build_generator(config, random_weights(config, 200 + k)) for k in range(5)]
    rng = np.random.default_rng(7)
    violations = 0
    unchanged_after = 0
    for trial in range(CAUSALITY_TRIALS):
        gen = gens[trial % len(gens)]
        n = int(rng.integers(2, 10))
        j = int(rng.integers(0, n))
        frames = random_frames(rng, n)
        pert = list(frames)
        pert[j] = random_frames(rng, 1)[0]
        a, b = gen.decode_offline(frames), gen.decode_offline(pert)
        cut = FRAME_SAMPLES * j  # the network adds no delay, so no slack for the filter bank
        violations += not np.array_equal(a[:cut], b[:cut])
        unchanged_after += np.array_equal(a[cut:], b[cut:])
    ok = violations == 0 and unchanged_after == 0
    acceptance.report(7, ok, f"{CAUSALITY_TRIALS} trials, {violations} outputs changed before "
                             f"the perturbed frame, {unchanged_after} perturbations had no effect")
    assert ok


def test_criterion_08_output_contract(config, acceptance):
    gen = build_generator(config, random_weights(config, 8))
    books = make_codebooks(0)
    rng = np.random.default_rng(8)
    s = Session(gen)
    sizes = {s.decode_frame(f).size for f in random_frames(rng, 50)}
    s.reset()
    pcm = np.concatenate([s.decode_packet(p, books) for p in random_packets(rng, 25)])
    ok = sizes == {FRAME_SAMPLES} and pcm.size == FS and np.abs(pcm).max() <= 1.0
    acceptance.report(8, ok, f"frame sizes {sorted(sizes)}, 25 packets -> {pcm.size} samples "
                             f"({pcm.size / FS:.3f} s), peak {np.abs(pcm).max():.3f}")
    assert ok


def test_criterion_09_determinism(config, acceptance, tmp_path):
    books = make_codebooks(9)
    pkts = random_packets(np.random.default_rng(9), 10)

    def render(path):
        gen = build_generator(config, random_weights(config, 9))
        s = Session(gen)
        pcm = np.concatenate([s.decode_packet(p, books) for p in pkts])
        write_wav(path, pcm)
        return s, pcm

    s, first = render(tmp_path / "a.wav")
    _, _ = render(tmp_path / "b.wav")
    same_wav = (tmp_path / "a.wav").read_bytes() == (tmp_path / "b.wav").read_bytes()
    s.reset()
    again = np.concatenate([s.decode_packet(p, books) for p in pkts])
    same_reset = np.array_equal(first, again)
    ok = same_wav and same_reset
    acceptance.report(9, ok, f"same seed -> identical WAV: {same_wav}; "
                             f"decode-reset-decode identical: {same_reset}")
    assert ok


def test_criterion_10_throughput(tmp_path, capsys, acceptance):
    rc_info = main(["info", "--default-config"])
    info_out = capsys.readouterr().out
    weights, cb, stream = tmp_path / "w.smgw", tmp_path / "cb.smcb", tmp_path / "s.bin"
    main(["init-weights", "--out", str(weights)])
    main(["init-codebooks", "--out", str(cb)])
    main(["random-stream", "--out", str(stream)])
    capsys.readouterr()
    rc_dec = main(["decode", "--bitstream", str(stream), "--weights", str(weights),
                   "--codebooks", str(cb), "--out", str(tmp_path / "o.wav")])
    dec_out = capsys.readouterr().out

    def factor(text):
        line = next((ln for ln in text.splitlines() if "x real time" in ln), "")
        try:
            return float(line.split(":")[1].split("x")[0])
        except (IndexError, ValueError):
            return None

    fi, fd = factor(info_out), factor(dec_out)
    ok = rc_info == 0 and rc_dec == 0 and fi is not None and fd is not None and fi > 0 and fd > 0
    acceptance.report(10, ok, f"info {fi}x, decode {fd}x real time (informational)")
    assert ok
