"""Block simulation of the two-way protocol.

Bob prepares ``N_e`` photons in random BB84 states, Alice runs control mode on
a random fraction of the survivors, aborts if the error estimate exceeds the
threshold, otherwise encodes check bits and message bits with I / U and sends
the block back for Bob to decode in his preparation bases.

The engine is vectorized over the block. Every operation after the forward
pass (encoding with I or U, Pauli noise) maps a basis eigenstate to a basis
eigenstate, so the outcome of any later measurement in a basis is the outcome
just after the forward pass XOR a deterministic flip. Only the Born
probabilities of the forward-attacked qubit are needed, and those come from
:func:`twoway_qsdc.attacks.outcome_table`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Sequence

import numpy as np

from .attacks import AttackBench, AttackUnitary, bench_attack, outcome_table
from .channel import ChannelParams, sample_block
from .quantum import Basis, EncodeOp

Z, X = 0, 1


class BlockCapacityError(ValueError):
    """The message does not fit on the block's message carriers."""


class Fate(enum.IntEnum):
    LOST_FORWARD = 0
    CONTROL_CHECKED = 1
    ALICE_CHECK_BIT = 2
    MESSAGE_CARRIER = 3
    LOST_BACKWARD = 4
    # Survivors left unused because the run aborted after control mode.
    DISCARDED = 5


@dataclass(frozen=True)
class ProtocolConfig:
    N_e: int
    C: float = 0.25
    P0: float = 0.5
    e_threshold: float = 0.25
    forward: ChannelParams = field(default_factory=ChannelParams)
    backward: Optional[ChannelParams] = None
    p_A: float = 0.0
    attack: Optional[AttackUnitary] = None
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.N_e, (int, np.integer)) or self.N_e < 1:
            raise ValueError(f"N_e must be a positive integer, got {self.N_e!r}")
        if not 0.0 < self.C <= 0.5:
            raise ValueError(f"C must lie in (0, 1/2], got {self.C!r}")
        for name in ("P0", "e_threshold", "p_A"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        # The backward channel mirrors the forward one unless configured.
        if self.backward is None:
            object.__setattr__(self, "backward", self.forward)


@dataclass(frozen=True)
class PhotonRecord:
    prep_basis: Basis
    prep_bit: int
    fate: Fate
    encode_op: Optional[EncodeOp] = None
    bob_measured: Optional[int] = None


@dataclass(frozen=True)
class RunStats:
    """Counts from one or more runs; rates are derived so that ``+`` merges exactly."""

    N_e: int = 0
    N_r: int = 0
    n_control: int = 0
    n_control_matched: int = 0
    n_control_errors: int = 0
    n_check_sent: int = 0
    n_check_delivered: int = 0
    n_check_errors: int = 0
    n_message: int = 0
    N: int = 0
    n_message_errors: int = 0
    aborted: bool = False

    def __add__(self, other: "RunStats") -> "RunStats":
        vals = {f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self) if f.name != "aborted"}
        return RunStats(**vals, aborted=self.aborted or other.aborted)

    @staticmethod
    def _ratio(num: int, den: int) -> float:
        return num / den if den else 0.0

    @staticmethod
    def _se(p: float, n: int) -> float:
        return math.sqrt(p * (1 - p) / n) if n else 0.0

    @property
    def e_hat_fwd(self) -> float:
        return self._ratio(self.n_control_errors, self.n_control_matched)

    @property
    def e_hat_bwd(self) -> float:
        return self._ratio(self.n_check_errors, self.n_check_delivered)

    @property
    def ber(self) -> float:
        return self._ratio(self.n_message_errors, self.N)

    @property
    def se_fwd(self) -> float:
        """Binomial standard error of ``e_hat_fwd``."""
        return self._se(self.e_hat_fwd, self.n_control_matched)

    @property
    def se_bwd(self) -> float:
        return self._se(self.e_hat_bwd, self.n_check_delivered)

    def summary(self) -> dict[str, object]:
        return {
            "N_e": self.N_e,
            "N_r": self.N_r,
            "N": self.N,
            "e_hat_fwd": self.e_hat_fwd,
            "e_hat_bwd": self.e_hat_bwd,
            "ber": self.ber,
            "aborted": self.aborted,
        }


@dataclass
class ProtocolResult:
    stats: RunStats
    decoded: list[Optional[int]]
    prep_basis: np.ndarray
    prep_bit: np.ndarray
    fate: np.ndarray
    # -1 where no encoding was applied, else the applied op (0 = I, 1 = U).
    encode_op: np.ndarray
    # -1 where Bob measured nothing.
    bob_measured: np.ndarray
    attack_bench: Optional[AttackBench] = None

    def fate_counts(self) -> dict[Fate, int]:
        counts = np.bincount(self.fate, minlength=len(Fate))
        return {f: int(counts[f]) for f in Fate}

    def records(self) -> list[PhotonRecord]:
        bases = (Basis.Z, Basis.X)
        ops = (EncodeOp.I, EncodeOp.U)
        out = []
        for b, bit, fate, op, m in zip(self.prep_basis, self.prep_bit, self.fate, self.encode_op, self.bob_measured):
            out.append(
                PhotonRecord(
                    prep_basis=bases[b],
                    prep_bit=int(bit),
                    fate=Fate(fate),
                    encode_op=ops[op] if op >= 0 else None,
                    bob_measured=int(m) if m >= 0 else None,
                )
            )
        return out


def run_rng(seed: int, trial: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


class _ForwardPass:
    """Outcome sampler for qubits after the forward channel or attack."""

    def __init__(self, cfg: ProtocolConfig, basis: np.ndarray, bit: np.ndarray, rng: np.random.Generator):
        self.basis = basis
        self.bit = bit
        self.rng = rng
        self.table = outcome_table(cfg.attack) if cfg.attack is not None else None
        if self.table is None:
            noise = sample_block(basis.size, ChannelParams(1.0, cfg.forward.p_flip), rng)
            # sigma_x flips Z outcomes, sigma_z flips X outcomes.
            self.flip = np.where(basis == Z, noise.x_flip, noise.z_flip)

    def prob_one(self, idx: np.ndarray, meas_basis: np.ndarray) -> np.ndarray:
        b, bit = self.basis[idx], self.bit[idx]
        if self.table is not None:
            return self.table[b, bit, meas_basis]
        matched = (bit ^ self.flip[idx]).astype(float)
        return np.where(meas_basis == b, matched, 0.5)

    def measure(self, idx: np.ndarray, meas_basis: np.ndarray) -> np.ndarray:
        return (self.rng.random(idx.size) < self.prob_one(idx, meas_basis)).astype(np.int8)


def expected_counts(cfg: ProtocolConfig) -> tuple[float, float]:
    """Expected survivors of the forward pass and decoded message bits."""
    E_N_r = cfg.N_e * cfg.forward.eta
    return E_N_r, (1 - cfg.C) ** 2 * E_N_r * cfg.backward.eta


def run_protocol(
    cfg: ProtocolConfig, message: Optional[Sequence[int]] = None, trial: int = 0
) -> ProtocolResult:
    """Execute one block of the protocol.

    ``message`` is placed on the first message carriers in block order; any
    remaining carriers get random padding bits drawn with ``P(0) = P0``. With
    ``message=None`` the whole carrier set holds a random message. Lost
    message positions decode to ``None``.
    """
    rng = run_rng(cfg.seed, trial)
    n = cfg.N_e

    # (1) preparation and forward transmission
    basis = rng.integers(0, 2, n, dtype=np.int8)
    bit = rng.integers(0, 2, n, dtype=np.int8)
    arrived = rng.random(n) < cfg.forward.eta
    fwd = _ForwardPass(cfg, basis, bit, rng)

    fate = np.full(n, Fate.LOST_FORWARD, dtype=np.int8)
    encode_op = np.full(n, -1, dtype=np.int8)
    bob_measured = np.full(n, -1, dtype=np.int8)
    survivors = np.flatnonzero(arrived)
    N_r = survivors.size

    # (2) control mode
    n_ctrl = math.floor(cfg.C * N_r)
    in_ctrl = np.zeros(n, dtype=bool)
    ctrl = np.sort(rng.choice(survivors, n_ctrl, replace=False))
    in_ctrl[ctrl] = True
    fate[ctrl] = Fate.CONTROL_CHECKED
    alice_basis = rng.integers(0, 2, n_ctrl, dtype=np.int8)
    alice_bit = fwd.measure(ctrl, alice_basis)
    matched = alice_basis == basis[ctrl]
    n_matched = int(matched.sum())
    n_ctrl_err = int((alice_bit[matched] != bit[ctrl][matched]).sum())

    bench = bench_attack(cfg.attack, cfg.P0) if cfg.attack is not None else None
    stats = RunStats(N_e=n, N_r=N_r, n_control=n_ctrl, n_control_matched=n_matched, n_control_errors=n_ctrl_err)
    remaining = survivors[~in_ctrl[survivors]]
    if stats.e_hat_fwd > cfg.e_threshold:
        fate[remaining] = Fate.DISCARDED
        stats = replace(stats, aborted=True)
        return ProtocolResult(stats, [], basis, bit, fate, encode_op, bob_measured, bench)

    # (3) encode mode
    n_check = math.floor(cfg.C * (1 - cfg.C) * N_r)
    is_check = np.zeros(n, dtype=bool)
    if remaining.size < n_check:
        n_check = remaining.size
    is_check[rng.choice(remaining, n_check, replace=False)] = True
    check = remaining[is_check[remaining]]
    carriers = remaining[~is_check[remaining]]

    if message is None:
        msg = (rng.random(carriers.size) >= cfg.P0).astype(np.int8)
    else:
        msg = np.asarray(list(message), dtype=np.int8)
        if msg.size > carriers.size:
            raise BlockCapacityError(f"message of {msg.size} bits exceeds {carriers.size} carriers")
        if np.any((msg != 0) & (msg != 1)):
            raise ValueError("message bits must be 0 or 1")
    padding = (rng.random(carriers.size - msg.size) >= cfg.P0).astype(np.int8)
    carrier_bits = np.concatenate([msg, padding])

    check_bits = rng.integers(0, 2, check.size, dtype=np.int8)
    fate[check] = Fate.ALICE_CHECK_BIT
    fate[carriers] = Fate.MESSAGE_CARRIER
    encoded = np.concatenate([check, carriers])
    intended = np.concatenate([check_bits, carrier_bits])
    applied = intended ^ (rng.random(encoded.size) < cfg.p_A).astype(np.int8)
    encode_op[encoded] = applied

    # (4) backward transmission and decoding in the preparation basis
    back = sample_block(encoded.size, cfg.backward, rng)
    f_fwd = fwd.measure(encoded, basis[encoded]) ^ bit[encoded]
    f_bwd = np.where(basis[encoded] == Z, back.x_flip, back.z_flip).astype(np.int8)
    decoded_all = f_fwd ^ applied ^ f_bwd
    delivered = back.arrived
    lost_back = encoded[~delivered]
    fate[lost_back] = Fate.LOST_BACKWARD
    encode_op[lost_back] = -1
    bob_measured[encoded[delivered]] = (bit[encoded] ^ decoded_all)[delivered]

    n_c = check.size
    check_ok = delivered[:n_c]
    n_check_err = int((decoded_all[:n_c][check_ok] != check_bits[check_ok]).sum())

    msg_delivered = delivered[n_c : n_c + msg.size]
    msg_decoded = decoded_all[n_c : n_c + msg.size]
    n_msg_err = int((msg_decoded[msg_delivered] != msg[msg_delivered]).sum())
    decoded = [int(b) if ok else None for b, ok in zip(msg_decoded, msg_delivered)]

    stats = RunStats(
        N_e=n,
        N_r=N_r,
        n_control=n_ctrl,
        n_control_matched=n_matched,
        n_control_errors=n_ctrl_err,
        n_check_sent=int(n_c),
        n_check_delivered=int(check_ok.sum()),
        n_check_errors=n_check_err,
        n_message=int(msg.size),
        N=int(msg_delivered.sum()),
        n_message_errors=n_msg_err,
    )
    return ProtocolResult(stats, decoded, basis, bit, fate, encode_op, bob_measured, bench)


def run_trials(cfg: ProtocolConfig, trials: int, message: Optional[Sequence[int]] = None) -> list[ProtocolResult]:
    """Independent runs; trial ``t`` draws from a generator seeded by ``(cfg.seed, t)``."""
    return [run_protocol(cfg, message, trial=t) for t in range(trials)]
