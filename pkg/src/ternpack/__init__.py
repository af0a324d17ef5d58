"""ternpack: ternary-weight packing codecs, LUT GEMV kernels, and benchmarks."""

from .core import (
    GemvResult,
    QuantizedActivations,
    TernaryMatrix,
    quantize_activations,
    ternarize_weights,
)
from .kernels import (
    KernelKind,
    gemv_f32_ref,
    gemv_i2s,
    gemv_parallel,
    gemv_ref_int32,
    gemv_tl1,
    gemv_tl2,
)
from .lut import LutTL1, LutTL2, build_lut_tl1, build_lut_tl2
from .packing import (
    PackedI2S,
    PackedTL1,
    PackedTL2,
    decode_i2s,
    decode_tl1,
    decode_tl2,
    encode_i2s,
    encode_tl1,
    encode_tl2,
    tl1_index,
    tl2_code,
)
from .runtime import (
    ModelConfig,
    TokenWorkload,
    ToyDecoder,
    decode_tokens,
    derive_workload,
    load_configs,
    lossless_report,
)

__version__ = "0.1.0"
