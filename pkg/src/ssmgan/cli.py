"""``ssmgan`` command-line tool.

Exit codes:

    0  success
    1  selftest reported at least one failing property
    2  usage error (bad flags)
    3  I/O error (missing or unreadable file, unwritable output)
    4  format error (bad magic, truncated or inconsistent container)
    5  validation error (weights or codebooks do not fit the model)
"""

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .bitstream import CodebookSet, dequantize_stream, make_codebooks, read_stream, write_stream
from .engine import Session, latency_report, measure_throughput
from .errors import BuildError, FieldRangeError, FormatError
from .model import (
    GeneratorConfig,
    WeightStore,
    build_generator,
    mac_count,
    measured_mac_count,
    param_count,
    random_weights,
)
from .selftest import random_frames, random_packets, run_selftest
from .wav import write_wav

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_FORMAT = 4
EXIT_VALIDATION = 5

PARAM_REFERENCE = 2_730_000
THROUGHPUT_FRAMES = 100


def _load_generator(weights_path):
    store = WeightStore.load(weights_path)
    return build_generator(store.config, store)


def _decode_one(generator, books, bitstream, out, mode, float_wav):
    info, packets = read_stream(Path(bitstream).read_bytes())
    if info.sample_rate != generator.config.sample_rate:
        raise BuildError(
            f"{bitstream}: stream is {info.sample_rate} Hz, model is "
            f"{generator.config.sample_rate} Hz"
        )
    frames = dequantize_stream(packets, books)
    if mode == "streaming":
        pcm, rtf = measure_throughput(generator, frames, Session(generator))
    else:
        start = time.perf_counter()
        pcm = generator.decode_offline(frames) if frames else np.zeros(0, np.float32)
        rtf = (pcm.size / info.sample_rate) / max(time.perf_counter() - start, 1e-12)
    write_wav(out, pcm, info.sample_rate, float32=float_wav)
    return info, rtf


def cmd_decode(args):
    generator = _load_generator(args.weights)
    books = CodebookSet.load(args.codebooks)
    inputs = args.bitstream
    if len(inputs) == 1:
        outs = [Path(args.out)]
    else:
        out_dir = Path(args.out)
        if not out_dir.is_dir():
            raise FileNotFoundError(f"{out_dir}: with several inputs --out must be a directory")
        outs = [out_dir / (Path(b).stem + ".wav") for b in inputs]

    def job(pair):
        return _decode_one(generator, books, pair[0], pair[1], args.mode, args.float)

    # the generator is read-only, so each file gets its own session on its own thread
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(job, zip(inputs, outs)))

    for src, out, (info, rtf) in zip(inputs, outs, results):
        print(f"{src} -> {out}")
        print(f"  packets:    {info.packet_count}")
        print(f"  duration:   {info.duration_s:.3f} s ({info.n_samples} samples)")
        print(f"  bitrate:    {info.bitrate} b/s")
        print(f"  mode:       {args.mode}")
        print(f"  throughput: {rtf:.2f}x real time")
    print("latency:")
    for line in latency_report(generator).lines():
        print(f"  {line}")
    return EXIT_OK


def cmd_info(args):
    if args.weights:
        store = WeightStore.load(args.weights)
        config = store.config
        print(f"weights: {args.weights} (fingerprint {store.fingerprint()})")
    else:
        config = GeneratorConfig()
        print(f"default config, random weights seed {args.seed}")
        store = random_weights(config, args.seed)
    generator = build_generator(config, store)

    macs = mac_count(config)
    print("\ncomplexity, closed form (resblocks and upsamplers):")
    print(macs.table())
    print(f"total: {macs.gmacs:.2f} GMAC/s")

    graph = measured_mac_count(config)
    print("\ncomplexity, every convolution in the built graph:")
    print(graph.table())
    print(f"total: {graph.gmacs:.2f} GMAC/s")

    params = param_count(config, store)
    print("\nparameters:")
    print(params.table(PARAM_REFERENCE))

    print("\nalgorithmic delay:")
    for line in latency_report(generator).lines():
        print(f"  {line}")

    frames = random_frames(np.random.default_rng(args.seed), THROUGHPUT_FRAMES)
    _, rtf = measure_throughput(generator, frames)
    print(f"\nthroughput: {rtf:.2f}x real time "
          f"(streaming, {THROUGHPUT_FRAMES} random frames, seed {args.seed})")
    return EXIT_OK


def cmd_selftest(args):
    print(f"selftest seed {args.seed}")
    results = run_selftest(args.seed)
    for name, passed, detail in results:
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    failed = sum(not p for _, p, _ in results)
    print(f"{len(results) - failed}/{len(results)} properties passed")
    return EXIT_OK if failed == 0 else EXIT_SELFTEST


def cmd_init_weights(args):
    config = GeneratorConfig()
    store = random_weights(config, args.seed)
    store.save(args.out)
    print(f"wrote random weights seed {args.seed} to {args.out} "
          f"({store.n_params:,} params, fingerprint {store.fingerprint()})")
    return EXIT_OK


def cmd_init_codebooks(args):
    make_codebooks(args.seed).save(args.out)
    print(f"wrote codebooks seed {args.seed} to {args.out}")
    return EXIT_OK


def cmd_random_stream(args):
    rng = np.random.default_rng(args.seed)
    Path(args.out).write_bytes(write_stream(random_packets(rng, args.packets)))
    print(f"wrote {args.packets} random packets seed {args.seed} to {args.out}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="ssmgan", description="Streaming neural speech decoder.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", help="decode a bitstream to WAV")
    p.add_argument("--bitstream", required=True, nargs="+", help="one or more stream files")
    p.add_argument("--weights", required=True)
    p.add_argument("--codebooks", required=True)
    p.add_argument("--out", required=True, help="WAV path, or a directory for several inputs")
    p.add_argument("--mode", choices=("streaming", "offline"), default="streaming")
    p.add_argument("--float", action="store_true", help="write 32-bit float samples")
    p.add_argument("--jobs", type=int, default=1, help="files decoded in parallel")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("info", help="complexity, parameters and delay budget")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--weights")
    g.add_argument("--default-config", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("selftest", help="run the invariant suite on random weights")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)

    for name, func, helptext in (
        ("init-weights", cmd_init_weights, "write seeded random weights"),
        ("init-codebooks", cmd_init_codebooks, "write the seeded default codebooks"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--out", required=True)
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(func=func)

    p = sub.add_parser("random-stream", help="write a stream of random packets")
    p.add_argument("--out", required=True)
    p.add_argument("--packets", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_random_stream)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"ssmgan: format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (BuildError, FieldRangeError) as exc:
        print(f"ssmgan: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"ssmgan: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
