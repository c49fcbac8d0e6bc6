"""AWGN channel: the two SNR conventions and seeded noise sampling.

Two conventions coexist and are kept apart by name everywhere:
  - Eb/N0 (energy per information bit), used for coded-baseline sweeps;
    noise variance per dimension is sigma2 = 1 / (2 R Eb/N0).
  - SNR = 1/sigma2, used for training and operating points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def sigma2_from_ebn0(rate: float, ebn0_db: float) -> float:
    """Noise variance per dimension at a given rate and Eb/N0 in dB."""
    if rate <= 0:
        raise DomainError(f"rate must be positive, got {rate}")
    return 1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0))


def snr_db_to_sigma2(snr_db: float) -> float:
    """Noise variance per dimension from SNR = 1/sigma2 in dB."""
    return 10.0 ** (-snr_db / 10.0)


def sigma2_to_snr_db(sigma2: float) -> float:
    if sigma2 <= 0:
        raise DomainError(f"sigma2 must be positive, got {sigma2}")
    return -10.0 * np.log10(sigma2)


def awgn(x, sigma2, rng: np.random.Generator):
    """y = x + n with n i.i.d. Normal(0, sigma2) per element.

    sigma2 may be a scalar or an array broadcastable against x (e.g. one
    variance per batch row, shaped (B, 1)). sigma2 = 0 returns x exactly.
    """
    sigma2 = np.asarray(sigma2, dtype=np.float64)
    if np.any(sigma2 < 0):
        raise DomainError("noise variance must be non-negative")
    x = np.asarray(x, dtype=np.float64)
    if np.all(sigma2 == 0):
        return x.copy()
    return x + np.sqrt(sigma2) * rng.standard_normal(x.shape)


@dataclass(frozen=True)
class ChannelSpec:
    """One operating point: block length, rate, and noise variance."""

    n: int
    rate: float
    sigma2: float
    snr_kind: str = "snr_db"  # which convention snr_db quotes
    snr_db: float = 0.0

    @classmethod
    def from_ebn0(cls, n: int, rate: float, ebn0_db: float) -> "ChannelSpec":
        return cls(n=n, rate=rate, sigma2=sigma2_from_ebn0(rate, ebn0_db),
                   snr_kind="ebn0_db", snr_db=ebn0_db)

    @classmethod
    def from_snr_db(cls, n: int, rate: float, snr_db: float) -> "ChannelSpec":
        return cls(n=n, rate=rate, sigma2=snr_db_to_sigma2(snr_db),
                   snr_kind="snr_db", snr_db=snr_db)

    @property
    def snr_linear(self) -> float:
        return 1.0 / self.sigma2


def spawn_rng(master_seed, *key) -> np.random.Generator:
    """Independent generator stream for (master seed, key...), order-free.

    Evaluating sweep points in any order gives identical per-point noise
    because each point derives its own stream from the master seed.
    """
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(key)))
