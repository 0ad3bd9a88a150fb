"""Order-statistics list decoding of linear binary block codes.

Modules: ``gf2`` (bit-packed GF(2) algebra), ``codes`` (BCH and extended BCH
construction), ``channel`` (BPSK over AWGN and Rayleigh fading),
``decoders`` (OSD, segmentation OSD, POSD, ISD, hard and ML baselines),
``analysis`` (ordered-bit error probabilities and list coverage),
``complexity`` (BOPS/FLOPS cost model) and ``sim`` (Monte Carlo harness).
"""

from __future__ import annotations

from .channel import ChannelConfig, ReceivedWord, modulate, transmit, transmit_batch
from .codes import Code, CodeSpec, load_code
from .decoders import DecoderSpec, build_list, decode, decode_ml, decoder_for, make_decoder, parse_decoder
from .gf2 import BinaryMatrix, BitWord, Permutation
from .sim import ExperimentConfig, load_config, run

__version__ = "0.1.0"

__all__ = [
    "BinaryMatrix",
    "BitWord",
    "ChannelConfig",
    "Code",
    "CodeSpec",
    "DecoderSpec",
    "ExperimentConfig",
    "Permutation",
    "ReceivedWord",
    "build_list",
    "decode",
    "decode_ml",
    "decoder_for",
    "load_code",
    "load_config",
    "make_decoder",
    "modulate",
    "parse_decoder",
    "run",
    "transmit",
    "transmit_batch",
]
