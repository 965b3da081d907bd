"""Command-line image restoration tool.

Subcommands: `deconv` (non-blind deconvolution with a known kernel),
`wiener` (Tikhonov inverse-filter baseline), `verify` (seeded property
suite), `bench` (operator timing).  Reports are JSON on stdout; exit
codes are 0 success, 1 verification failure, 2 usage error, 3 I/O error.

The CONVERSE_THREADS environment variable caps internal parallelism
(0 or unset means auto); results are independent of its value.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .errors import Converse2dError, MalformedKernel, UnsupportedImageFormat
from .fft_tensor import PadMode
from .imageio import psnr, read_image, write_image
from .operator import (
    ConverseConfig,
    KernelBank,
    LambdaParam,
    X0Strategy,
    circular_forward,
    converse_s1_fast,
    converse_solve,
    load_kernel_file,
)
from .verify import run_all

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_IO = 3


def thread_cap() -> int:
    """Parallelism cap from CONVERSE_THREADS; 0 means auto."""
    raw = os.environ.get("CONVERSE_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        return 0
    return max(n, 0)


def _broadcast_kernel(weights: np.ndarray, channels: int) -> np.ndarray:
    if weights.shape[0] == channels:
        return weights
    if weights.shape[0] == 1:
        return np.repeat(weights, channels, axis=0)
    raise MalformedKernel(
        f"kernel has {weights.shape[0]} channels, image has {channels}"
    )


def _restore(args, x0_strategy: X0Strategy, scale: int, pad_size: int,
             pad_mode: PadMode) -> int:
    t0 = time.perf_counter()
    img = read_image(args.input)
    weights = _broadcast_kernel(load_kernel_file(args.kernel), img.shape[0])
    if args.lam <= 0:
        print("error: --lam must be positive", file=sys.stderr)
        return EXIT_USAGE

    kb = KernelBank.from_normalized(weights)
    lam = LambdaParam(np.zeros(img.shape[0]))
    cfg = ConverseConfig(scale=scale, pad_mode=pad_mode,
                         pad_size=pad_size, x0=x0_strategy)
    y = img[None]  # (1, C, H, W)
    if scale == 1:
        out = converse_s1_fast(y, kb, lam, cfg, lam_override=args.lam)
    else:
        out = converse_solve(y, kb, lam, cfg, lam_override=args.lam)

    # data-fidelity residual of the restored image under the forward model
    resid = float(np.linalg.norm(circular_forward(out, weights, scale) - y))
    write_image(args.output, out[0])
    runtime_ms = (time.perf_counter() - t0) * 1e3

    report = {
        "command": args.command,
        "config": {
            "input": str(args.input),
            "kernel": str(args.kernel),
            "output": str(args.output),
            "lambda": args.lam,
            "scale": scale,
            "pad": pad_size,
            "pad_mode": pad_mode.value,
            "x0": x0_strategy.value,
            "threads": thread_cap(),
        },
        "output_shape": list(out[0].shape),
        "residual_norm": resid,
        "psnr_vs_input": psnr(out[0], img) if out[0].shape == img.shape else None,
        "runtime_ms": runtime_ms,
    }
    print(json.dumps(report))
    return EXIT_OK


def cmd_deconv(args) -> int:
    return _restore(args, X0Strategy.INTERP_NEAREST, args.scale, args.pad,
                    PadMode(args.mode))


def cmd_wiener(args) -> int:
    return _restore(args, X0Strategy.ZERO, 1, args.pad, PadMode(args.mode))


def cmd_verify(args) -> int:
    report = run_all(seed=args.seed, max_size=args.max_size)
    report["threads"] = thread_cap()
    print(json.dumps(report, indent=2))
    if not report["all_passed"]:
        for chk in report["checks"]:
            if not chk["passed"]:
                print(
                    f"FAILED {chk['name']}: seed={args.seed} "
                    f"max_size={args.max_size} {chk.get('detail', '')}",
                    file=sys.stderr,
                )
        return EXIT_VERIFY_FAIL
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.reps < 3:
        print("error: --reps must be >= 3", file=sys.stderr)
        return EXIT_USAGE
    try:
        h, w = (int(tok) for tok in args.size.lower().split("x"))
    except ValueError:
        print(f"error: bad --size {args.size!r}, expected HxW", file=sys.stderr)
        return EXIT_USAGE
    rng = np.random.default_rng(0)
    y = rng.standard_normal((1, args.channels, h, w))
    kb = KernelBank(rng.standard_normal((args.channels, 5, 5)))
    lam = LambdaParam(np.zeros(args.channels))
    cfg = ConverseConfig(scale=args.scale, pad_size=0, x0=X0Strategy.INTERP_NEAREST)

    converse_solve(y, kb, lam, cfg)  # warm-up excluded from timing
    times = []
    for _ in range(args.reps):
        t0 = time.perf_counter()
        converse_solve(y, kb, lam, cfg)
        times.append((time.perf_counter() - t0) * 1e3)
    report = {
        "command": "bench",
        "config": {"size": f"{h}x{w}", "channels": args.channels,
                   "scale": args.scale, "reps": args.reps,
                   "threads": thread_cap()},
        "runtime_ms": float(np.median(times)),
        "runtimes_ms": times,
    }
    print(json.dumps(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="converse2d",
        description="FFT-domain reverse-convolution image restoration",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_restore_args(p, with_scale):
        p.add_argument("input", help="input image (PGM/PPM)")
        p.add_argument("kernel", help="kernel file (plain text)")
        p.add_argument("output", help="output image path")
        p.add_argument("--lam", type=float, default=1e-3,
                       help="regularization strength (default 1e-3)")
        if with_scale:
            p.add_argument("--scale", type=int, default=1,
                           help="upscaling factor s (default 1)")
        p.add_argument("--pad", type=int, default=0,
                       help="border padding in pixels (default 0)")
        p.add_argument("--mode", choices=[m.value for m in PadMode],
                       default="circular", help="padding mode")

    p_deconv = sub.add_parser("deconv", help="deconvolve with a known kernel")
    add_restore_args(p_deconv, with_scale=True)
    p_deconv.set_defaults(func=cmd_deconv)

    p_wiener = sub.add_parser("wiener", help="Tikhonov inverse-filter baseline")
    add_restore_args(p_wiener, with_scale=False)
    p_wiener.set_defaults(func=cmd_wiener)

    p_verify = sub.add_parser("verify", help="run the seeded property suite")
    p_verify.add_argument("--seed", type=int, default=42)
    p_verify.add_argument("--max-size", type=int, default=6)
    p_verify.set_defaults(func=cmd_verify)

    p_bench = sub.add_parser("bench", help="time the solver")
    p_bench.add_argument("--size", default="64x64", help="plane size HxW")
    p_bench.add_argument("--channels", type=int, default=8)
    p_bench.add_argument("--scale", type=int, default=1)
    p_bench.add_argument("--reps", type=int, default=5)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_IO
    except (MalformedKernel, UnsupportedImageFormat, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Converse2dError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAIL


if __name__ == "__main__":
    sys.exit(main())
