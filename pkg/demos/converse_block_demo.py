"""Assemble a small network of Converse blocks and run a forward pass.

Demonstrates the Transformer-shaped block built around the reverse
convolution, the identity behaviour of a block with zeroed output mixes,
and bitwise save/load of network parameters.
"""

import tempfile
from pathlib import Path

import numpy as np

from converse2d.blocks import (
    ChannelMix,
    ConverseBlock,
    ToyConverseNet,
    block_forward,
    load_net,
    net_forward,
    random_block,
    random_net,
    save_net,
)

rng = np.random.default_rng(1)

# a 3-block network: 1x1 conv head, Converse blocks, 1x1 conv tail
net = random_net(seed=1, in_channels=3, channels=8, n_blocks=3)
x = rng.uniform(-1, 1, (1, 3, 32, 32))
out = net_forward(x, net)
print(f"input {x.shape} -> output {out.shape}, "
      f"max |out| = {np.abs(out).max():.3f}")

# residual-only path: zero output mixes make the block an exact identity
c = 4
base = random_block(rng, c, kernel_size=3, pad_size=1)
dead = ChannelMix(np.zeros((c, c)), np.zeros(c))
identity_block = ConverseBlock(
    norm1_gamma=base.norm1_gamma, norm1_beta=base.norm1_beta,
    mix1_in=base.mix1_in, mix1_out=dead,
    norm2_gamma=base.norm2_gamma, norm2_beta=base.norm2_beta,
    mix2_in=base.mix2_in, mix2_out=dead,
    kernel=base.kernel, lam=base.lam, config=base.config,
)
z = rng.standard_normal((1, c, 8, 8))
print("zeroed-output-mix block is identity:",
      np.array_equal(block_forward(z, identity_block), z))

# parameter serialization round-trips bitwise
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "net.cvnt"
    save_net(net, path)
    print(f"container: {path.stat().st_size} bytes "
          f"+ sidecar {Path(str(path) + '.json').stat().st_size} bytes")
    restored = load_net(path)
    print("save/load forward passes identical:",
          np.array_equal(net_forward(x, net), net_forward(x, restored)))
