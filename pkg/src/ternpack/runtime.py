"""Model configurations, per-token GEMV workloads, and the toy greedy decoder.

The decoder is a deliberately attention-free stand-in: a stack of ternary
linear layers with ReLU and an argmax head. Quantization, nonlinearity and
tie-breaking are identical across kernel choices, so any token divergence
isolates to the GEMV kernel under test.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import TernaryMatrix, quantize_activations, ternarize_weights
from .kernels import KernelKind, gemv_parallel, gemv_tl1, gemv_tl2
from .lut import build_lut_tl1, build_lut_tl2
from .packing import encode_i2s, encode_tl1, encode_tl2

__all__ = [
    "ModelConfig",
    "TokenWorkload",
    "ToyDecoder",
    "load_configs",
    "derive_workload",
    "decode_tokens",
    "lossless_report",
    "format_lossless_table",
]

# Activation padding multiple needed by each kernel's grouping.
KERNEL_PAD = {
    KernelKind.REF_INT32: 1,
    KernelKind.I2_S: 4,
    KernelKind.TL1: 2,
    KernelKind.TL2: 3,
}


@dataclass(frozen=True)
class ModelConfig:
    name: str
    hidden_size: int
    intermediate_size: int
    num_hidden_layers: int
    num_attention_heads: int

    @property
    def head_dim_is_integral(self) -> bool:
        # informational only; heads never enter the GEMV workload
        return self.hidden_size % self.num_attention_heads == 0


_CONFIGS = [
    ModelConfig("125M", 768, 3072, 11, 12),
    ModelConfig("350M", 1024, 3072, 24, 16),
    ModelConfig("700M", 1536, 4096, 24, 16),
    ModelConfig("1B", 2048, 3584, 24, 32),
    ModelConfig("1.5B", 1536, 9216, 28, 32),
    ModelConfig("2.5B", 2560, 6912, 30, 20),
    ModelConfig("3.8B", 3840, 8192, 24, 32),
    ModelConfig("7B", 4096, 12032, 32, 32),
    ModelConfig("13B", 5120, 13824, 40, 40),
    ModelConfig("30B", 6656, 16384, 60, 52),
    ModelConfig("70B", 8192, 24576, 80, 64),
    ModelConfig("100B", 8192, 45568, 72, 64),
]


def load_configs() -> list[ModelConfig]:
    """All 12 benchmark model configurations, smallest to largest."""
    return list(_CONFIGS)


def get_config(name: str) -> ModelConfig:
    for c in _CONFIGS:
        if c.name.lower() == name.lower():
            return c
    raise KeyError(f"unknown model config: {name!r}")


@dataclass(frozen=True)
class TokenWorkload:
    """The projection GEMVs one decoded token costs, LLaMA-style (no attention math)."""

    config: ModelConfig
    layer_shapes: tuple[tuple[str, int, int], ...]  # (name, rows, cols) per layer
    macs_per_token: int


def derive_workload(c: ModelConfig) -> TokenWorkload:
    h, i = c.hidden_size, c.intermediate_size
    shapes = (
        ("wq", h, h),
        ("wk", h, h),
        ("wv", h, h),
        ("wo", h, h),
        ("wgate", i, h),
        ("wup", i, h),
        ("wdown", h, i),
    )
    macs = c.num_hidden_layers * (4 * h * h + 3 * h * i)
    return TokenWorkload(config=c, layer_shapes=shapes, macs_per_token=macs)


@dataclass(frozen=True)
class ToyDecoder:
    """Desk-scale greedy decoder, fully determined by (vocab, depth, hidden, seed)."""

    vocab_size: int
    depth: int
    hidden: int
    seed: int
    embedding: np.ndarray = field(repr=False)
    layers: tuple[TernaryMatrix, ...] = field(repr=False)
    head: TernaryMatrix = field(repr=False)
    packed: dict = field(repr=False)

    @classmethod
    def build(cls, vocab_size: int = 256, depth: int = 4, hidden: int = 64,
              seed: int = 0) -> "ToyDecoder":
        rng = np.random.default_rng(seed)
        embedding = rng.standard_normal((vocab_size, hidden))
        layers = tuple(
            ternarize_weights(rng.standard_normal(hidden * hidden), hidden, hidden)
            for _ in range(depth)
        )
        head = ternarize_weights(rng.standard_normal(vocab_size * hidden),
                                 vocab_size, hidden)
        return cls.from_matrices(vocab_size, depth, hidden, seed, embedding,
                                 layers, head)

    @classmethod
    def from_matrices(cls, vocab_size, depth, hidden, seed, embedding, layers,
                      head) -> "ToyDecoder":
        mats = list(layers) + [head]
        packed = {
            KernelKind.I2_S: [encode_i2s(m) for m in mats],
            KernelKind.TL1: [encode_tl1(m) for m in mats],
            KernelKind.TL2: [encode_tl2(m) for m in mats],
        }
        return cls(vocab_size=vocab_size, depth=depth, hidden=hidden, seed=seed,
                   embedding=embedding, layers=tuple(layers), head=head,
                   packed=packed)

    def _gemv(self, kernel: KernelKind, index: int, qa, thread_count, lut_hook):
        # index: 0..depth-1 are layers, depth is the output head
        mats = list(self.layers) + [self.head]
        if kernel is KernelKind.REF_INT32:
            return gemv_parallel(kernel, mats[index], qa, thread_count)
        p = self.packed[kernel][index]
        if lut_hook is None:
            return gemv_parallel(kernel, p, qa, thread_count)
        if kernel is KernelKind.TL1:
            lut = lut_hook(build_lut_tl1(qa, groups=p.groups))
            return gemv_tl1(p, lut, qa.scale)
        if kernel is KernelKind.TL2:
            lut = lut_hook(build_lut_tl2(qa, groups=p.groups))
            return gemv_tl2(p, lut, qa.scale)
        return gemv_parallel(kernel, p, qa, thread_count)


def decode_tokens(d: ToyDecoder, kernel: KernelKind, prompt: int, steps: int,
                  thread_count: int = 1, _lut_hook=None) -> list[int]:
    """Greedy decode: embed, ternary MLP stack with ReLU, argmax head.

    Ties break to the lowest token index. Deterministic for a fixed decoder.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if not 0 <= prompt < d.vocab_size:
        raise ValueError("prompt token out of range")
    if kernel not in KERNEL_PAD:
        raise ValueError(f"decode_tokens does not support kernel {kernel}")
    pad = KERNEL_PAD[kernel]
    token = prompt
    out: list[int] = []
    for _ in range(steps):
        x = d.embedding[token].astype(np.float64)
        for li in range(d.depth):
            qa = quantize_activations(x, pad_to=pad)
            res = d._gemv(kernel, li, qa, thread_count, _lut_hook)
            x = np.maximum(res.output, 0.0)
        qa = quantize_activations(x, pad_to=pad)
        logits = d._gemv(kernel, d.depth, qa, thread_count, _lut_hook).output
        token = int(np.argmax(logits))
        out.append(token)
    return out


def _corrupting_hook(lut):
    """Test-fixture fault: negate (or perturb) one LUT entry in group 0."""
    e = np.array(lut.entries, dtype=np.int16)
    last = e.shape[1] - 1
    e[0, last] = -e[0, last] if e[0, last] != 0 else 17
    return type(lut)(groups=lut.groups, entries=e)


def lossless_report(trials: int, max_steps: int, seed: int = 0,
                    kernels: tuple[KernelKind, ...] = (KernelKind.I2_S,
                                                       KernelKind.TL1,
                                                       KernelKind.TL2),
                    vocab_size: int = 256, depth: int = 4, hidden: int = 64,
                    thread_count: int = 1,
                    fault_inject: bool = False) -> dict[KernelKind, float]:
    """Fraction of decode trials whose token sequence exactly matches the oracle."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hook = _corrupting_hook if fault_inject else None
    matches = {k: 0 for k in kernels}
    root = np.random.SeedSequence(seed)
    for child in root.spawn(trials):
        rng = np.random.default_rng(child)
        dseed = int(rng.integers(0, 2**63))
        prompt = int(rng.integers(0, vocab_size))
        d = ToyDecoder.build(vocab_size=vocab_size, depth=depth, hidden=hidden,
                             seed=dseed)
        ref = decode_tokens(d, KernelKind.REF_INT32, prompt, max_steps,
                            thread_count=thread_count)
        for k in kernels:
            seq = decode_tokens(d, k, prompt, max_steps,
                                thread_count=thread_count, _lut_hook=hook)
            if seq == ref:
                matches[k] += 1
    return {k: matches[k] / trials for k in kernels}


def format_lossless_table(acc: dict[KernelKind, float]) -> str:
    names = {KernelKind.I2_S: "I2_S", KernelKind.TL1: "TL1", KernelKind.TL2: "TL2",
             KernelKind.REF_INT32: "REF_INT32"}
    cols = [names.get(k, k.value) for k in acc]
    vals = [f"{v * 100:.1f}%" for v in acc.values()]
    w = [max(len(c), len(v)) for c, v in zip(cols, vals)]
    line1 = "Kernel    " + "  ".join(c.rjust(n) for c, n in zip(cols, w))
    line2 = "Accuracy  " + "  ".join(v.rjust(n) for v, n in zip(vals, w))
    return line1 + "\n" + line2
