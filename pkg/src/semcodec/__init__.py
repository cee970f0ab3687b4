"""Progressive DCT image codec with a deterministic channel simulator."""

from .dct import (
    EncodedImage,
    augment_drop,
    encode_image,
    forward_dct8,
    full_mask,
    inverse_dct8,
    mask_from_received,
    mask_keep_top_n,
    mask_remove_plane,
    masked_coefficient_error,
    mse,
    psnr,
    quantization_matrix,
    reconstruct,
    zigzag_position,
)
from .bitstream import (
    HeaderLostError,
    Packet,
    StreamFormatError,
    depacketize,
    deserialize,
    packetize,
    serialize,
)
from .channel import (
    ChannelConfig,
    TransmissionReport,
    bytes_budget,
    conventional_baseline,
    drop_packets,
    inject_bit_errors,
    protected_bit_set,
    transmit,
    truncate_to_budget,
)

__all__ = [
    "EncodedImage",
    "augment_drop",
    "encode_image",
    "forward_dct8",
    "full_mask",
    "inverse_dct8",
    "mask_from_received",
    "mask_keep_top_n",
    "mask_remove_plane",
    "masked_coefficient_error",
    "mse",
    "psnr",
    "quantization_matrix",
    "reconstruct",
    "zigzag_position",
    "HeaderLostError",
    "Packet",
    "StreamFormatError",
    "depacketize",
    "deserialize",
    "packetize",
    "serialize",
    "ChannelConfig",
    "TransmissionReport",
    "bytes_budget",
    "conventional_baseline",
    "drop_packets",
    "inject_bit_errors",
    "protected_bit_set",
    "transmit",
    "truncate_to_budget",
]

__version__ = "0.1.0"
