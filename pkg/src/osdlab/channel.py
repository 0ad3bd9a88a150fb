"""BPSK over AWGN and coherent Rayleigh fading, with per-bit reliabilities.

Noise is normalised per encoded symbol: each complex noise sample has
``E|w|^2 = 1 / (R * gamma)`` where ``gamma`` is the linear SNR and ``R = K/N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gf2 import BitWord

CHANNEL_MODELS = ("awgn", "rayleigh-fast", "rayleigh-block")


@dataclass(frozen=True)
class ChannelConfig:
    model: str
    snr_db: float
    rate: float = 1.0

    def __post_init__(self):
        if self.model not in CHANNEL_MODELS:
            raise ValueError(f"unknown channel model {self.model!r}")
        if not 0 < self.rate <= 1:
            raise ValueError("rate must be in (0, 1]")

    @property
    def snr_linear(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def noise_variance(self) -> float:
        """Variance of one complex noise sample; zero for an infinite SNR."""
        if math.isinf(self.snr_db) and self.snr_db > 0:
            return 0.0
        return 1.0 / (self.rate * self.snr_linear)

    @property
    def sigma2(self) -> float:
        """Per-real-dimension noise variance, which is also the variance of the reliability noise."""
        return self.noise_variance / 2.0


@dataclass(frozen=True)
class ReceivedWord:
    y: np.ndarray
    h: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        if not (self.y.shape == self.h.shape == self.r.shape):
            raise ValueError("y, h, r must have equal shapes")

    @property
    def n(self) -> int:
        return self.r.shape[-1]

    @classmethod
    def from_reliabilities(cls, r) -> "ReceivedWord":
        """Wrap bare reliabilities as if received over a unit-gain channel."""
        r = np.asarray(r, dtype=np.float64)
        return cls(r.astype(np.complex128), np.ones_like(r, dtype=np.complex128), r)


def modulate(c) -> np.ndarray:
    """BPSK map ``x = (-1)^c``."""
    bits = c.to_array() if isinstance(c, BitWord) else np.asarray(c)
    return 1.0 - 2.0 * bits.astype(np.float64)


def demodulate(x) -> np.ndarray:
    return ((1 - np.asarray(x)) / 2).astype(np.uint8)


def reliabilities(y, h) -> np.ndarray:
    """``r = Re{h} Re{y} + Im{h} Im{y}``."""
    return h.real * y.real + h.imag * y.imag


def draw_fading(shape, model: str, rng: np.random.Generator) -> np.ndarray:
    if model == "awgn":
        return np.ones(shape, dtype=np.complex128)
    if model == "rayleigh-fast":
        g = rng.standard_normal(shape + (2,))
    else:
        g = rng.standard_normal(shape[:-1] + (1, 2))
        g = np.broadcast_to(g, shape + (2,))
    return (g[..., 0] + 1j * g[..., 1]) * math.sqrt(0.5)


def transmit_batch(X, cfg: ChannelConfig, rng: np.random.Generator):
    """Send a ``(B, N)`` array of symbols; returns ``(y, h, r)`` arrays.

    Draw order is fixed (fading first, then noise) so a given generator state
    always yields the same realisation.
    """
    X = np.asarray(X, dtype=np.float64)
    h = draw_fading(X.shape, cfg.model, rng)
    w = rng.standard_normal(X.shape + (2,))
    w = (w[..., 0] + 1j * w[..., 1]) * math.sqrt(cfg.sigma2)
    y = h * X + w
    return y, h, reliabilities(y, h)


def transmit(x, cfg: ChannelConfig, rng: np.random.Generator) -> ReceivedWord:
    """Pass one BPSK word through the channel."""
    y, h, r = transmit_batch(np.asarray(x)[None, :], cfg, rng)
    return ReceivedWord(y[0], h[0], r[0])


def hard_decision(r) -> np.ndarray:
    """Bit 1 where the reliability is negative; ``r == 0`` decides 0."""
    return (np.asarray(r) < 0).astype(np.uint8)


def bpsk_awgn_ber(snr_db, rate: float = 1.0):
    """Closed-form raw BER ``Q(sqrt(2 R gamma))``."""
    from scipy.special import ndtr

    g = rate * 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
    return ndtr(-np.sqrt(2.0 * g))


def bpsk_rayleigh_ber(snr_db, rate: float = 1.0):
    """Closed-form raw BER of coherent BPSK in fast Rayleigh fading."""
    g = rate * 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
    return 0.5 * (1.0 - np.sqrt(g / (1.0 + g)))
