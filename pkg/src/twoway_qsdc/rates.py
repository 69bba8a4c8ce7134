"""Closed-form rate, capacity and secure-efficiency formulas.

All logarithms are base 2. Erased (lost) positions carry outcome
probability 1/2, so each contributes one full bit of uncertainty; this is the
``+ eta`` term shared by the lossy-channel entropy and the typical-set
exponents.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

THRESHOLD = 0.25


def _check_unit(name: str, x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")


def binary_entropy(x: float) -> float:
    """h(x) = -x log2 x - (1-x) log2(1-x), with h(0) = h(1) = 0."""
    _check_unit("x", x)
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x))


def binary_entropy_array(x) -> np.ndarray:
    """Vectorized :func:`binary_entropy` for grid evaluation."""
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("entries must lie in [0, 1]")
    out = np.zeros_like(x)
    inner = (x > 0) & (x < 1)
    xi = x[inner]
    out[inner] = -xi * np.log2(xi) - (1 - xi) * np.log2(1 - xi)
    return out


def threshold_check(e: float) -> bool:
    """True iff the control-mode error rate passes the strict ``e < 1/4`` test."""
    _check_unit("e", e)
    return e < THRESHOLD


@dataclass(frozen=True)
class RateInputs:
    P0: float
    xi: float
    e: float
    eta_b: float

    def __post_init__(self):
        for name in ("P0", "xi", "e", "eta_b"):
            _check_unit(name, getattr(self, name))


@dataclass(frozen=True)
class FecInputs:
    """Loss and error parameters of the forward-error-correction argument.

    ``eta_E``/``eta_B`` are Eve's and Bob's erasure rates; Bob's flip rate is
    ``p1 = p_c + p_A`` while Eve, observing a noiseless channel, only sees
    Alice's encoding error ``p_A``.
    """

    eta_E: float
    eta_B: float
    p_A: float
    p_c: float

    def __post_init__(self):
        for name in ("eta_E", "eta_B", "p_A", "p_c"):
            _check_unit(name, getattr(self, name))
        if self.p1 > 0.5:
            raise ValueError(f"p1 = p_c + p_A must not exceed 1/2, got {self.p1!r}")

    @property
    def p1(self) -> float:
        return self.p_c + self.p_A


@dataclass(frozen=True)
class RateReport:
    r_s: float
    I_AB: float
    I_AE: float
    r: float
    capacity: float
    condition_15a: bool
    condition_15b: bool


def secure_qubit_rate(inp: RateInputs) -> tuple[float, float, float]:
    """Secure qubit rate with channel noise and loss.

    Returns ``(r_s, I_AB, I_AE)`` with ``I_AB = h(P0) - h(e) - eta_b`` and
    ``I_AE = h(xi)``. The backward loss ``eta_b`` is subtracted directly from
    the entropy terms, as in the published formula.
    """
    I_AB = binary_entropy(inp.P0) - binary_entropy(inp.e) - inp.eta_b
    I_AE = binary_entropy(inp.xi)
    return I_AB - I_AE, I_AB, I_AE


def lossy_channel_entropy(eta: float, p1: float) -> float:
    """H = (1 - eta) h(p1) + eta for a flip-and-erase binary channel."""
    _check_unit("eta", eta)
    return (1.0 - eta) * binary_entropy(p1) + eta


def channel_capacity(eta: float, p1: float) -> float:
    return 1.0 - lossy_channel_entropy(eta, p1)


def typical_exponent(eta: float, p: float) -> float:
    """Per-symbol log2 size of a receiver's typical (Hamming) sphere.

    Same form as :func:`lossy_channel_entropy`; Eve's sphere uses
    ``(eta_E, p_A)`` and Bob's uses ``(eta_B, p1)``.
    """
    return lossy_channel_entropy(eta, p)


def security_conditions(n: int, R: float, f: FecInputs, gap: float = 2.0) -> tuple[bool, bool]:
    """Evaluate the reliability and secrecy conditions for block length ``n``.

    ``cond_a``: Bob's sphere times the codebook fits in ``2**n``.
    ``cond_b``: the log2 ratio of Eve's sphere to Bob's exceeds ``gap``.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n!r}")
    _check_unit("R", R)
    bob = typical_exponent(f.eta_B, f.p1)
    eve = typical_exponent(f.eta_E, f.p_A)
    cond_a = bob + R <= 1.0
    cond_b = n * (eve - bob) > gap
    return bool(cond_a), bool(cond_b)


def secure_efficiency(f: FecInputs) -> float:
    """Secure bits per transmitted qubit: Eve's sphere exponent minus Bob's."""
    return typical_exponent(f.eta_E, f.p_A) - typical_exponent(f.eta_B, f.p1)


def rate_report(inp: RateInputs, f: FecInputs, n: int, R: float, gap: float = 2.0) -> RateReport:
    r_s, I_AB, I_AE = secure_qubit_rate(inp)
    cond_a, cond_b = security_conditions(n, R, f, gap)
    return RateReport(
        r_s=r_s,
        I_AB=I_AB,
        I_AE=I_AE,
        r=secure_efficiency(f),
        capacity=channel_capacity(f.eta_B, f.p1),
        condition_15a=cond_a,
        condition_15b=cond_b,
    )


@dataclass(frozen=True)
class BoundaryScan:
    """Secure efficiency on a uniform grid plus the analytic ``r = 0`` curve.

    ``r[i, j]`` is evaluated at ``eta_B = axis[i]``, ``eta_E = axis[j]``.
    """

    axis: np.ndarray
    r: np.ndarray
    eta_E_star: np.ndarray
    p_A: float
    p_c: float

    def rows(self):
        """Yield ``(eta_E, eta_B, r)`` row-major over eta_B then eta_E."""
        for i, eb in enumerate(self.axis):
            for j, ee in enumerate(self.axis):
                yield float(ee), float(eb), float(self.r[i, j])


def boundary_curve(eta_B, p_A: float, p_c: float) -> np.ndarray:
    """Eve erasure rate at which the secure efficiency vanishes, per Bob erasure rate."""
    hA = binary_entropy(p_A)
    h1 = binary_entropy(p_A + p_c)
    eta_B = np.asarray(eta_B, dtype=float)
    return ((1.0 - eta_B) * h1 + eta_B - hA) / (1.0 - hA)


def boundary_scan(grid_steps: int, p_A: float, p_c: float) -> BoundaryScan:
    if grid_steps < 2:
        raise ValueError(f"grid_steps must be at least 2, got {grid_steps!r}")
    FecInputs(0.0, 0.0, p_A, p_c)  # range validation
    axis = np.linspace(0.0, 1.0, grid_steps + 1)
    eve = (1.0 - axis) * binary_entropy(p_A) + axis
    bob = (1.0 - axis) * binary_entropy(p_A + p_c) + axis
    r = eve[np.newaxis, :] - bob[:, np.newaxis]
    return BoundaryScan(axis=axis, r=r, eta_E_star=boundary_curve(axis, p_A, p_c), p_A=p_A, p_c=p_c)
