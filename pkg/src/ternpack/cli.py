"""Command-line interface: pack raw weights, verify losslessness, bench, inspect.

Exit codes: 0 success / lossless, 1 verification failure, 2 usage error,
3 I/O error or corrupt file.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import container
from .bench import BenchSpec, emit_table, results_to_jsonl, run_bench
from .container import TpkError, read_model, write_model
from .core import quantize_activations, ternarize_weights
from .kernels import KernelKind, gemv_parallel, gemv_ref_int32
from .packing import decode_i2s, decode_tl1, decode_tl2, encode_i2s, encode_tl1, encode_tl2
from .runtime import KERNEL_PAD, format_lossless_table, load_configs, lossless_report
from .verify import PACKED_KERNELS, cross_kernel_suite

FORMAT_ENCODERS = {"i2s": encode_i2s, "tl1": encode_tl1, "tl2": encode_tl2}
FORMAT_DECODERS = {"i2s": decode_i2s, "tl1": decode_tl1, "tl2": decode_tl2}
FORMAT_KERNELS = {"i2s": KernelKind.I2_S, "tl1": KernelKind.TL1, "tl2": KernelKind.TL2}


def _pct(frac: float) -> str:
    return f"{frac * 100:.0f}%" if frac in (0.0, 1.0) else f"{frac * 100:.2f}%"


def _payload_bytes(fmt: str, p) -> int:
    if fmt == "tl2":
        return p.index_data.size + p.sign_data.size
    return p.data.size


def cmd_pack(args) -> int:
    try:
        blob = open(args.input, "rb").read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    expect = args.rows * args.cols * 4
    if len(blob) != expect:
        print(f"error: input is {len(blob)} bytes, expected {expect} "
              f"({args.rows}x{args.cols} float32)", file=sys.stderr)
        return 3
    weights = np.frombuffer(blob, dtype="<f4").astype(np.float64)
    try:
        m = ternarize_weights(weights, args.rows, args.cols)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    p = FORMAT_ENCODERS[args.format](m)
    write_model(args.output, [(args.name, p)])
    nbytes = _payload_bytes(args.format, p)
    print(f"packed {args.rows}x{args.cols} as {args.format.upper()}")
    print(f"scale: {m.scale:.6g}")
    print(f"payload bytes: {nbytes}")
    print(f"bits/weight: {nbytes * 8 / (args.rows * args.cols):.2f}")
    return 0


def cmd_info(args) -> int:
    try:
        fmt, mats = read_model(args.model)
    except (OSError, TpkError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    total_payload = sum(_payload_bytes(fmt, p) for _, p in mats)
    total_weights = sum(p.rows * p.cols for _, p in mats)
    print(f"format: {fmt.upper()}")
    print(f"matrices: {len(mats)}")
    for name, p in mats:
        print(f"  {name}: {p.rows}x{p.cols}  scale={p.scale:.6g}")
    print(f"total payload bytes: {total_payload}")
    print(f"bits/weight: {container.BITS_PER_WEIGHT[fmt]:.2f}")
    return 0


def _verify_model_file(args) -> int:
    try:
        fmt, mats = read_model(args.model)
    except (OSError, TpkError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    kernel = FORMAT_KERNELS[fmt]
    rng = np.random.default_rng(args.seed)
    failures = 0
    for i, (name, p) in enumerate(mats):
        try:
            p.validate()
        except ValueError as e:
            print(str(e).replace(" at row ", f" at matrix {i} row "), file=sys.stderr)
            return 1
        m = FORMAT_DECODERS[fmt](p)
        for _ in range(args.vectors):
            x = rng.standard_normal(p.cols)
            qa = quantize_activations(x, pad_to=KERNEL_PAD[kernel])
            ref = gemv_ref_int32(m, quantize_activations(x, pad_to=1))
            res = gemv_parallel(kernel, p, qa)
            if not np.array_equal(ref.accumulators, res.accumulators):
                failures += 1
    total = len(mats) * args.vectors
    frac = (total - failures) / total
    print(f"model {args.model}: {fmt.upper()} {_pct(frac)} exact "
          f"({total - failures}/{total} GEMVs)")
    return 0 if failures == 0 else 1


def cmd_verify(args) -> int:
    if args.model is None and args.random is None:
        print("error: give a model path or --random N", file=sys.stderr)
        return 2
    status = 0
    if args.model is not None:
        status = _verify_model_file(args)
        if status == 3:
            return status
    if args.random is not None:
        mism = cross_kernel_suite(args.random, seed=args.seed)
        parts = []
        for k in PACKED_KERNELS:
            frac = (args.random - mism[k]) / args.random
            parts.append(f"{k.value.upper()} {_pct(frac)}")
            if mism[k]:
                status = 1
        print(f"cross-kernel exactness ({args.random} instances): " + " ".join(parts))
    acc = lossless_report(args.decoder_trials, args.steps, seed=args.seed,
                          fault_inject=args.fault_inject)
    print(f"toy-decoder losslessness ({args.decoder_trials} trials x "
          f"{args.steps} steps):")
    print(format_lossless_table(acc))
    if any(v != 1.0 for v in acc.values()):
        status = 1
    return status


def cmd_bench(args) -> int:
    known = {c.name.lower(): c.name for c in load_configs()}
    if args.config.lower() not in known:
        print(f"error: unknown config {args.config!r}; choices: "
              + ", ".join(known.values()), file=sys.stderr)
        return 2
    formats = ["i2s", "tl1", "tl2"] if args.format == "all" else [args.format]
    kernels = [FORMAT_KERNELS[f] for f in formats]
    baseline = None
    if args.baseline != "none":
        baseline = KernelKind(args.baseline)
        kernels = [baseline] + kernels
    threads = ([args.threads] if args.threads > 0
               else list(range(1, (os.cpu_count() or 1) + 1)))
    results = []
    for t in threads:
        for k in kernels:
            spec = BenchSpec(config=known[args.config.lower()], kernel=k,
                             thread_count=t, tokens=args.tokens,
                             warmup=args.warmup, repetitions=args.reps,
                             seed=args.seed)
            r = run_bench(spec)
            if not r.available:
                print(f"{r.config} {k.value} threads={t}: N/A ({r.note})")
            else:
                print(f"{r.config} {k.value} threads={t}: "
                      f"{r.tokens_per_sec:.2f} tok/s "
                      f"[{r.tps_min:.2f}, {r.tps_max:.2f}]")
            results.append(r)
        print(emit_table([r for r in results if r.thread_count == t],
                         baseline or kernels[0]))
    if args.out:
        with open(args.out, "w") as f:
            f.write(results_to_jsonl(results))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ternpack",
                                 description="Ternary-weight packing, LUT GEMV "
                                             "kernels, and benchmarks")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("pack", help="ternarize raw float32 weights into a TPK1 file")
    p.add_argument("input", help="raw little-endian float32 weight file")
    p.add_argument("output", help="TPK1 output path")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--format", choices=["i2s", "tl1", "tl2"], required=True)
    p.add_argument("--name", default="weights")
    p.set_defaults(fn=cmd_pack)

    p = sub.add_parser("verify", help="run the losslessness verification suites")
    p.add_argument("model", nargs="?", help="TPK1 model to verify")
    p.add_argument("--random", type=int, default=None, metavar="N",
                   help="run N random cross-kernel GEMV instances")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vectors", type=int, default=8,
                   help="activation vectors per model matrix")
    p.add_argument("--decoder-trials", type=int, default=100)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--fault-inject", action="store_true",
                   help="corrupt one LUT entry to prove the harness detects loss")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("bench", help="tokens/second GEMV-proxy benchmark")
    p.add_argument("--config", required=True, help="model config name, e.g. 700M")
    p.add_argument("--format", choices=["i2s", "tl1", "tl2", "all"], default="all")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads; 0 sweeps 1..hardware concurrency")
    p.add_argument("--tokens", type=int, default=8)
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--baseline", choices=["ref_f32", "ref_int32", "none"],
                   default="ref_f32")
    p.add_argument("--out", help="write machine-readable JSONL records here")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("info", help="show TPK1 metadata")
    p.add_argument("model")
    p.set_defaults(fn=cmd_info)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
