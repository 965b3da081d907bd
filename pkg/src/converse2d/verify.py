"""Seeded self-verification suite: oracle equivalence plus module invariants.

Every check draws its instances from a generator seeded by the caller, so
repeated runs with the same seed test the identical instance list.  Each
check reports the number of instances it examined, the worst error seen,
and on failure the parameters of the first failing instance.
"""

from __future__ import annotations

import numpy as np

from . import fft_tensor, operator, oracle
from .fft_tensor import PadMode, block_mean, crop, fft2, ifft2, pad, tile, upsample_zero
from .operator import (
    ConverseConfig,
    KernelBank,
    LambdaParam,
    X0Strategy,
    converse_s1_fast,
    lambda_of,
)

__all__ = ["run_all", "CHECKS"]


def _naive_dft2(plane: np.ndarray) -> np.ndarray:
    """O(N^2) direct 2-D DFT of a single (H, W) plane."""
    h, w = plane.shape
    out = np.zeros((h, w), dtype=np.complex128)
    for u in range(h):
        for v in range(w):
            acc = 0.0 + 0.0j
            for i in range(h):
                for j in range(w):
                    acc += plane[i, j] * np.exp(-2j * np.pi * (u * i / h + v * j / w))
            out[u, v] = acc
    return out


def check_fft_roundtrip(rng: np.random.Generator) -> dict:
    worst = 0.0
    n = 0
    for shape in [(1, 1, 3, 5), (2, 3, 7, 4), (4, 8, 16, 16), (1, 2, 6, 9)]:
        for _ in range(5):
            t = rng.standard_normal(shape)
            err = np.abs(ifft2(fft2(t)) - t).max() / (np.abs(t).max() + 1.0)
            worst = max(worst, err)
            n += 1
    return {"instances": n, "max_err": worst, "passed": worst < 1e-12}


def check_parseval(rng: np.random.Generator) -> dict:
    worst = 0.0
    n = 0
    for shape in [(1, 1, 4, 4), (2, 2, 8, 6), (1, 3, 16, 16)]:
        for _ in range(5):
            t = rng.standard_normal(shape)
            h, w = shape[-2:]
            spatial = np.sum(t * t)
            spectral = np.sum(np.abs(fft2(t)) ** 2) / (h * w)
            worst = max(worst, abs(spatial - spectral) / spatial)
            n += 1
    return {"instances": n, "max_err": worst, "passed": worst < 1e-10}


def check_naive_dft(rng: np.random.Generator) -> dict:
    worst = 0.0
    n = 0
    for h, w in [(2, 2), (3, 5), (8, 8)]:
        t = rng.standard_normal((1, 1, h, w))
        ref = _naive_dft2(t[0, 0])
        err = np.abs(fft2(t)[0, 0] - ref).max() / (np.abs(ref).max() + 1.0)
        worst = max(worst, err)
        n += 1
    return {"instances": n, "max_err": worst, "passed": worst < 1e-12}


def check_pad_crop(rng: np.random.Generator) -> dict:
    n = 0
    for mode in PadMode:
        for p in (0, 1, 2, 4):
            t = rng.standard_normal((1, 2, 5, 6))
            if mode is PadMode.REFLECT and p >= 5:
                continue
            if not np.array_equal(crop(pad(t, mode, p), p), t):
                return {"instances": n, "passed": False,
                        "detail": f"pad/crop mismatch mode={mode.value} p={p}"}
            n += 1
    return {"instances": n, "max_err": 0.0, "passed": True}


def check_block_mean_tile(rng: np.random.Generator) -> dict:
    worst = 0.0
    n = 0
    for stride in (1, 2, 3):
        s = rng.standard_normal((1, 2, 4, 4)) + 1j * rng.standard_normal((1, 2, 4, 4))
        worst = max(worst, np.abs(block_mean(tile(s, stride), stride) - s).max())
        # tile(block_mean(.)) is a projection
        proj = tile(block_mean(tile(s, stride), stride), stride)
        proj2 = tile(block_mean(proj, stride), stride)
        worst = max(worst, np.abs(proj2 - proj).max())
        n += 2
    return {"instances": n, "max_err": worst, "passed": worst < 1e-12}


def check_upsample_decimate(rng: np.random.Generator) -> dict:
    n = 0
    for s in (1, 2, 3):
        t = rng.standard_normal((2, 1, 3, 4))
        if not np.array_equal(upsample_zero(t, s)[..., ::s, ::s], t):
            return {"instances": n, "passed": False, "detail": f"s={s}"}
        n += 1
    return {"instances": n, "max_err": 0.0, "passed": True}


def _oracle_grid(max_size: int):
    sizes = [d for d in (3, 4, 6) if d <= max_size]
    for s in (1, 2, 3):
        for h in sizes:
            for w in sizes:
                for c in (1, 2):
                    for b in (-2.0, 0.0, 3.0):
                        for x0 in (X0Strategy.ZERO, X0Strategy.INTERP_NEAREST):
                            yield s, h, w, c, b, x0


def check_oracle_equivalence(rng: np.random.Generator, max_size: int = 6) -> dict:
    """Central property: the FFT solve equals the dense LS solve."""
    worst = 0.0
    n = 0
    for s, h, w, c, b, x0 in _oracle_grid(max_size):
        y = rng.standard_normal((1, c, h, w))
        kb = KernelBank(rng.standard_normal((c, 3, 3)))
        lam = LambdaParam(np.full(c, b))
        cfg = ConverseConfig(scale=s, pad_size=0, x0=x0)
        got = operator.converse_solve(y, kb, lam, cfg)
        weights = kb.weights()
        lam_vals = lambda_of(lam)
        for ch in range(c):
            a = oracle.build_forward(weights[ch], h * s, w * s, s)
            if x0 is X0Strategy.ZERO:
                x0_vec = np.zeros(h * s * w * s)
            else:
                x0_vec = fft_tensor.interp_nearest(y[:, ch:ch + 1], s).ravel()
            ref = oracle.solve_dense(a, y[0, ch].ravel(), lam_vals[ch], x0_vec)
            err = np.abs(got[0, ch].ravel() - ref).max() / (np.abs(ref).max() + 1e-30)
            worst = max(worst, err)
            if err >= 1e-8:
                return {"instances": n, "max_err": worst, "passed": False,
                        "detail": f"s={s} h={h} w={w} c={c} b={b} x0={x0.value} ch={ch}"}
        n += 1
    return {"instances": n, "max_err": worst, "passed": True}


def check_s1_fast(rng: np.random.Generator) -> dict:
    worst = 0.0
    n = 0
    for _ in range(50):
        b_dim = int(rng.integers(1, 3))
        c = int(rng.integers(1, 5))
        h = int(rng.integers(3, 17))
        w = int(rng.integers(3, 17))
        y = rng.standard_normal((b_dim, c, h, w))
        kb = KernelBank(rng.standard_normal((c, 3, 3)))
        lam = LambdaParam(rng.uniform(-2, 5, c))
        x0 = X0Strategy.ZERO if rng.random() < 0.5 else X0Strategy.INTERP_NEAREST
        cfg = ConverseConfig(scale=1, pad_size=0, x0=x0)
        slow = operator.converse_solve(y, kb, lam, cfg)
        fast = converse_s1_fast(y, kb, lam, cfg)
        err = np.abs(slow - fast).max() / (np.abs(slow).max() + 1e-30)
        worst = max(worst, err)
        n += 1
    return {"instances": n, "max_err": worst, "passed": worst < 1e-10}


def check_minimality(rng: np.random.Generator) -> dict:
    n = 0
    for s, h, w, c, b in [(1, 4, 4, 1, 0.0), (2, 3, 4, 2, -2.0), (3, 4, 6, 1, 3.0)]:
        y = rng.standard_normal((1, c, h, w))
        kb = KernelBank(rng.standard_normal((c, 3, 3)))
        lam = LambdaParam(np.full(c, b))
        cfg = ConverseConfig(scale=s, pad_size=0, x0=X0Strategy.ZERO)
        got = operator.converse_solve(y, kb, lam, cfg)
        weights = kb.weights()
        lam_vals = lambda_of(lam)
        for ch in range(c):
            a = oracle.build_forward(weights[ch], h * s, w * s, s)
            x_star = got[0, ch].ravel()
            x0_vec = np.zeros_like(x_star)
            y_vec = y[0, ch].ravel()
            f_star = oracle.objective(a, x_star, y_vec, lam_vals[ch], x0_vec)
            for _ in range(100):
                delta = rng.standard_normal(x_star.size)
                delta *= 1e-3 / np.linalg.norm(delta)
                if oracle.objective(a, x_star + delta, y_vec, lam_vals[ch], x0_vec) <= f_star:
                    return {"instances": n, "passed": False,
                            "detail": f"perturbation beat minimizer s={s} ch={ch}"}
                n += 1
    return {"instances": n, "max_err": 0.0, "passed": True}


def check_analytic_limits(rng: np.random.Generator) -> dict:
    y = rng.standard_normal((1, 2, 5, 7))
    delta = np.zeros((2, 3, 3))
    delta[:, 1, 1] = 1.0
    kb = KernelBank.from_normalized(delta)
    lam = LambdaParam(np.zeros(2))
    worst = 0.0
    # delta kernel + X0 = y: output = y for any lambda
    scale = np.abs(y).max()
    cfg = ConverseConfig(scale=1, pad_size=0, x0=X0Strategy.INTERP_NEAREST)
    out = operator.converse_solve(y, kb, lam, cfg)
    worst = max(worst, np.abs(out - y).max() / scale)
    # delta kernel, lambda = 1, X0 = 0: output = y / 2
    cfg0 = ConverseConfig(scale=1, pad_size=0, x0=X0Strategy.ZERO)
    out = operator.converse_solve(y, kb, lam, cfg0, lam_override=1.0)
    worst = max(worst, np.abs(out - y / 2).max() / scale)
    if worst >= 1e-12:
        return {"instances": 2, "max_err": worst, "passed": False}
    # lambda -> infinity pulls to the interpolated prior
    kb2 = KernelBank(rng.standard_normal((2, 3, 3)))
    cfg2 = ConverseConfig(scale=2, pad_size=0, x0=X0Strategy.INTERP_NEAREST)
    out = operator.converse_solve(y, kb2, lam, cfg2, lam_override=1e8)
    x0_up = fft_tensor.interp_nearest(y, 2)
    pull = np.abs(out - x0_up).max() / np.abs(x0_up).max()
    if pull >= 1e-6:
        return {"instances": 3, "max_err": pull, "passed": False,
                "detail": "lambda->inf limit"}
    return {"instances": 3, "max_err": worst, "passed": True}


CHECKS = [
    ("fft_roundtrip", check_fft_roundtrip),
    ("parseval", check_parseval),
    ("naive_dft_agreement", check_naive_dft),
    ("pad_crop_inverse", check_pad_crop),
    ("block_mean_tile", check_block_mean_tile),
    ("upsample_decimate", check_upsample_decimate),
    ("oracle_equivalence", check_oracle_equivalence),
    ("s1_fast_consistency", check_s1_fast),
    ("minimality", check_minimality),
    ("analytic_limits", check_analytic_limits),
]


def run_all(seed: int = 42, max_size: int = 6) -> dict:
    """Run every check with a per-check child seed; returns the full table."""
    root = np.random.SeedSequence(seed)
    results = []
    total = 0
    for (name, fn), child in zip(CHECKS, root.spawn(len(CHECKS))):
        rng = np.random.default_rng(child)
        if fn is check_oracle_equivalence:
            res = fn(rng, max_size=max_size)
        else:
            res = fn(rng)
        res["name"] = name
        res["passed"] = bool(res["passed"])
        res.setdefault("max_err", None)
        if res["max_err"] is not None:
            res["max_err"] = float(res["max_err"])
        total += res.get("instances", 0)
        results.append(res)
    return {
        "seed": seed,
        "max_size": max_size,
        "total_instances": total,
        "all_passed": all(r["passed"] for r in results),
        "checks": results,
    }
