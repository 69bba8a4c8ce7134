"""Lossy Pauli channel for single transmitted qubits.

Each pass loses the photon with probability ``1 - eta``. A surviving photon
gets sigma_x with probability ``p_flip`` and, independently, sigma_z with
probability ``p_flip``, so the error rate seen in either check basis is
exactly ``p_flip``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantum import SIGMA_X, SIGMA_Z, QuantumStateError


@dataclass(frozen=True)
class ChannelParams:
    eta: float = 1.0
    p_flip: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta!r}")
        if not 0.0 <= self.p_flip <= 0.5:
            raise ValueError(f"p_flip must lie in [0, 1/2], got {self.p_flip!r}")


def photon_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for one photon, reproducible under any processing order."""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def transmit_qubit(s: np.ndarray, ch: ChannelParams, rng: np.random.Generator) -> np.ndarray | None:
    """Send a single qubit through ``ch``; ``None`` means the photon was lost."""
    s = np.asarray(s, dtype=complex)
    if s.shape != (2,):
        raise QuantumStateError(f"channel acts on a single qubit, got shape {s.shape}")
    if rng.random() >= ch.eta:
        return None
    x_flip = rng.random() < ch.p_flip
    z_flip = rng.random() < ch.p_flip
    out = s
    if x_flip:
        out = SIGMA_X @ out
    if z_flip:
        out = SIGMA_Z @ out
    return out


@dataclass(frozen=True)
class BlockSample:
    """Vectorized channel draws for a block of photons."""

    arrived: np.ndarray
    x_flip: np.ndarray
    z_flip: np.ndarray


def sample_block(n: int, ch: ChannelParams, rng: np.random.Generator) -> BlockSample:
    """Draw losses and Pauli errors for ``n`` photons at once.

    Matches :func:`transmit_qubit` in distribution; the protocol engine uses
    it to avoid per-photon state manipulation.
    """
    arrived = rng.random(n) < ch.eta
    x_flip = rng.random(n) < ch.p_flip
    z_flip = rng.random(n) < ch.p_flip
    return BlockSample(arrived, x_flip & arrived, z_flip & arrived)
