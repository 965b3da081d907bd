"""Converse block and a forward-only toy network built from it.

The block is Transformer-shaped: layer norm, 1x1 channel mixing, GELU,
the reverse-convolution operator for spatial modeling, and residual
connections around each of the two sub-sequences.  The operator runs at
scale 1 inside blocks.  No training machinery lives here; the blocks
exist to exercise the operator in its composite setting.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import erf

from .fft_tensor import PadMode
from .operator import ConverseConfig, KernelBank, LambdaParam, X0Strategy, converse_solve

__all__ = [
    "ChannelMix",
    "ConverseBlock",
    "ToyConverseNet",
    "layer_norm",
    "gelu",
    "block_forward",
    "net_forward",
    "random_block",
    "random_net",
    "save_net",
    "load_net",
]

LAYERNORM_EPS = 1e-6
_MAGIC = b"CVNT1"


def layer_norm(t: np.ndarray, gamma: np.ndarray, beta: np.ndarray,
               eps: float = LAYERNORM_EPS) -> np.ndarray:
    """Normalize across the channel axis at each (b, h, w) position."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    mu = t.mean(axis=1, keepdims=True)
    var = t.var(axis=1, keepdims=True)
    norm = (t - mu) / np.sqrt(var + eps)
    return gamma[None, :, None, None] * norm + beta[None, :, None, None]


def gelu(t: np.ndarray) -> np.ndarray:
    """Exact GELU: x * Phi(x) with the erf-based normal CDF."""
    return t * 0.5 * (1.0 + erf(t / np.sqrt(2.0)))


@dataclass(frozen=True)
class ChannelMix:
    """1x1 convolution: per-position affine map across channels."""

    weight: np.ndarray  # [C_out, C_in]
    bias: np.ndarray  # [C_out]

    def __call__(self, t: np.ndarray) -> np.ndarray:
        out = np.einsum("oc,bchw->bohw", self.weight, t)
        return out + self.bias[None, :, None, None]

    @classmethod
    def identity(cls, c: int) -> "ChannelMix":
        return cls(np.eye(c), np.zeros(c))


@dataclass(frozen=True)
class ConverseBlock:
    norm1_gamma: np.ndarray
    norm1_beta: np.ndarray
    mix1_in: ChannelMix
    mix1_out: ChannelMix
    norm2_gamma: np.ndarray
    norm2_beta: np.ndarray
    mix2_in: ChannelMix
    mix2_out: ChannelMix
    kernel: KernelBank
    lam: LambdaParam
    config: ConverseConfig

    def __post_init__(self):
        if self.config.scale != 1:
            raise ValueError("blocks run the operator at scale 1 only")


@dataclass(frozen=True)
class ToyConverseNet:
    head: ChannelMix
    blocks: tuple
    tail: ChannelMix

    def __post_init__(self):
        if len(self.blocks) < 1:
            raise ValueError("network needs at least one block")


def block_forward(x: np.ndarray, b: ConverseBlock) -> np.ndarray:
    """Two residual sub-sequences; shape preserved."""
    h = layer_norm(x, b.norm1_gamma, b.norm1_beta)
    h = gelu(b.mix1_in(h))
    h = converse_solve(h, b.kernel, b.lam, b.config)
    u = x + b.mix1_out(gelu(h))
    v = layer_norm(u, b.norm2_gamma, b.norm2_beta)
    return u + b.mix2_out(gelu(b.mix2_in(v)))


def net_forward(x: np.ndarray, n: ToyConverseNet) -> np.ndarray:
    h = n.head(x)
    for b in n.blocks:
        h = block_forward(h, b)
    return n.tail(h)


def _uniform_mix(rng: np.random.Generator, c_out: int, c_in: int) -> ChannelMix:
    scale = 1.0 / np.sqrt(c_in)
    return ChannelMix(rng.uniform(-scale, scale, (c_out, c_in)), np.zeros(c_out))


def random_block(rng: np.random.Generator, channels: int,
                 kernel_size: int = 5, pad_size: int = 4) -> ConverseBlock:
    """Default initialization: Gaussian raw kernels (softmaxed), b = 0."""
    cfg = ConverseConfig(scale=1, pad_mode=PadMode.CIRCULAR,
                         pad_size=pad_size, x0=X0Strategy.INTERP_NEAREST)
    return ConverseBlock(
        norm1_gamma=np.ones(channels),
        norm1_beta=np.zeros(channels),
        mix1_in=_uniform_mix(rng, channels, channels),
        mix1_out=_uniform_mix(rng, channels, channels),
        norm2_gamma=np.ones(channels),
        norm2_beta=np.zeros(channels),
        mix2_in=_uniform_mix(rng, channels, channels),
        mix2_out=_uniform_mix(rng, channels, channels),
        kernel=KernelBank(rng.standard_normal((channels, kernel_size, kernel_size))),
        lam=LambdaParam(np.zeros(channels)),
        config=cfg,
    )


def random_net(seed: int, in_channels: int, channels: int,
               n_blocks: int, kernel_size: int = 5,
               pad_size: int = 4) -> ToyConverseNet:
    rng = np.random.default_rng(seed)
    head = _uniform_mix(rng, channels, in_channels)
    blocks = tuple(
        random_block(rng, channels, kernel_size, pad_size) for _ in range(n_blocks)
    )
    tail = _uniform_mix(rng, in_channels, channels)
    return ToyConverseNet(head=head, blocks=blocks, tail=tail)


def _param_list(n: ToyConverseNet):
    """Named parameter arrays in declaration order."""
    params = [("head.weight", n.head.weight), ("head.bias", n.head.bias)]
    for i, b in enumerate(n.blocks):
        p = f"block{i}."
        params += [
            (p + "norm1_gamma", b.norm1_gamma),
            (p + "norm1_beta", b.norm1_beta),
            (p + "mix1_in.weight", b.mix1_in.weight),
            (p + "mix1_in.bias", b.mix1_in.bias),
            (p + "mix1_out.weight", b.mix1_out.weight),
            (p + "mix1_out.bias", b.mix1_out.bias),
            (p + "norm2_gamma", b.norm2_gamma),
            (p + "norm2_beta", b.norm2_beta),
            (p + "mix2_in.weight", b.mix2_in.weight),
            (p + "mix2_in.bias", b.mix2_in.bias),
            (p + "mix2_out.weight", b.mix2_out.weight),
            (p + "mix2_out.bias", b.mix2_out.bias),
            (p + "kernel.raw", b.kernel.raw),
            (p + "lambda.b", b.lam.b),
        ]
    params += [("tail.weight", n.tail.weight), ("tail.bias", n.tail.bias)]
    return params


def save_net(n: ToyConverseNet, path: str | Path) -> None:
    """Write the flat binary container plus a JSON shape sidecar.

    Binary layout: magic "CVNT1", u32 array count, then per array a u32
    element count, then all f64 payloads concatenated in declaration
    order.  Integers and floats are little endian.  The sidecar at
    path + ".json" records names, shapes and the block configs.
    """
    path = Path(path)
    params = _param_list(n)
    blob = bytearray(_MAGIC)
    blob += struct.pack("<I", len(params))
    for _, arr in params:
        blob += struct.pack("<I", arr.size)
    for _, arr in params:
        blob += np.ascontiguousarray(arr, dtype="<f8").tobytes()
    path.write_bytes(bytes(blob))

    b0 = n.blocks[0]
    sidecar = {
        "format": "CVNT1",
        "n_blocks": len(n.blocks),
        "config": {
            "pad_mode": b0.config.pad_mode.value,
            "pad_size": b0.config.pad_size,
            "x0": b0.config.x0.value,
        },
        "params": [{"name": name, "shape": list(arr.shape)} for name, arr in params],
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def load_net(path: str | Path) -> ToyConverseNet:
    """Rebuild a network from the binary container and its JSON sidecar."""
    path = Path(path)
    blob = path.read_bytes()
    if blob[:5] != _MAGIC:
        raise ValueError(f"{path}: bad magic {blob[:5]!r}")
    sidecar = json.loads(Path(str(path) + ".json").read_text())
    (n_arrays,) = struct.unpack_from("<I", blob, 5)
    if n_arrays != len(sidecar["params"]):
        raise ValueError(f"{path}: array count disagrees with sidecar")
    counts = struct.unpack_from(f"<{n_arrays}I", blob, 9)
    offset = 9 + 4 * n_arrays
    arrays = {}
    for meta, count in zip(sidecar["params"], counts):
        shape = tuple(meta["shape"])
        if int(np.prod(shape)) != count:
            raise ValueError(f"{path}: shape/count mismatch for {meta['name']}")
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
        offset += 8 * count
        arrays[meta["name"]] = arr.reshape(shape).copy()

    cfg = ConverseConfig(
        scale=1,
        pad_mode=PadMode(sidecar["config"]["pad_mode"]),
        pad_size=sidecar["config"]["pad_size"],
        x0=X0Strategy(sidecar["config"]["x0"]),
    )
    blocks = []
    for i in range(sidecar["n_blocks"]):
        p = f"block{i}."
        blocks.append(ConverseBlock(
            norm1_gamma=arrays[p + "norm1_gamma"],
            norm1_beta=arrays[p + "norm1_beta"],
            mix1_in=ChannelMix(arrays[p + "mix1_in.weight"], arrays[p + "mix1_in.bias"]),
            mix1_out=ChannelMix(arrays[p + "mix1_out.weight"], arrays[p + "mix1_out.bias"]),
            norm2_gamma=arrays[p + "norm2_gamma"],
            norm2_beta=arrays[p + "norm2_beta"],
            mix2_in=ChannelMix(arrays[p + "mix2_in.weight"], arrays[p + "mix2_in.bias"]),
            mix2_out=ChannelMix(arrays[p + "mix2_out.weight"], arrays[p + "mix2_out.bias"]),
            kernel=KernelBank(arrays[p + "kernel.raw"]),
            lam=LambdaParam(arrays[p + "lambda.b"]),
            config=cfg,
        ))
    return ToyConverseNet(
        head=ChannelMix(arrays["head.weight"], arrays["head.bias"]),
        blocks=tuple(blocks),
        tail=ChannelMix(arrays["tail.weight"], arrays["tail.bias"]),
    )
