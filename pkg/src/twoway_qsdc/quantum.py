"""Small-scale state-vector and density-matrix toolkit.

States are plain complex numpy arrays: a state vector is 1-D with unit norm,
a density matrix is 2-D, Hermitian, unit trace and positive semidefinite.
Composite systems use the Kronecker ordering ``A ⊗ B ⊗ E`` so the leading
factor is always the first qubit.
"""
from __future__ import annotations

import enum

import numpy as np

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
EIG_ZERO = 1e-12
MAX_ENTROPY_DIM = 32

SQRT_HALF = 1.0 / np.sqrt(2.0)

# Pauli matrices and the encoding flip U = i*sigma_y = |0><1| - |1><0|.
I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
U_FLIP = np.array([[0, 1], [-1, 0]], dtype=complex)
HADAMARD = SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex)


class QuantumStateError(ValueError):
    """Raised when an array violates a state-vector or density-matrix invariant."""


class Basis(enum.Enum):
    Z = "Z"
    X = "X"


class EncodeOp(enum.Enum):
    I = "I"
    U = "U"

    @property
    def matrix(self) -> np.ndarray:
        return I2 if self is EncodeOp.I else U_FLIP

    @classmethod
    def for_bit(cls, bit: int) -> "EncodeOp":
        """Operation that encodes ``bit``: I for 0, U for 1."""
        return cls.U if bit else cls.I

    def inverted(self) -> "EncodeOp":
        return EncodeOp.I if self is EncodeOp.U else EncodeOp.U


def as_state(amps, *, tol: float = NORM_TOL) -> np.ndarray:
    """Validate and return ``amps`` as a complex state vector."""
    s = np.asarray(amps, dtype=complex)
    if s.ndim != 1 or s.size == 0:
        raise QuantumStateError(f"state vector must be 1-D and non-empty, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise QuantumStateError("state vector has non-finite amplitudes")
    norm2 = float(np.vdot(s, s).real)
    if abs(norm2 - 1.0) > tol:
        raise QuantumStateError(f"squared norm {norm2!r} differs from 1")
    return s


def as_density(rho, *, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate and return ``rho`` as a density matrix."""
    m = np.asarray(rho, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise QuantumStateError(f"density matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise QuantumStateError("density matrix has non-finite entries")
    if np.max(np.abs(m - m.conj().T)) > tol:
        raise QuantumStateError("density matrix is not Hermitian")
    tr = np.trace(m)
    if abs(tr - 1.0) > TRACE_TOL:
        raise QuantumStateError(f"density matrix trace {tr!r} differs from 1")
    if np.linalg.eigvalsh(m).min() < -PSD_TOL:
        raise QuantumStateError("density matrix has a negative eigenvalue")
    return m


def ket(*bits: int) -> np.ndarray:
    """Computational basis product state, e.g. ``ket(0, 1)`` is |01>."""
    s = np.zeros(2 ** len(bits), dtype=complex)
    s[int("".join(str(b) for b in bits), 2) if bits else 0] = 1.0
    return s


def density(s: np.ndarray) -> np.ndarray:
    """Projector |s><s|."""
    s = np.asarray(s, dtype=complex)
    return np.outer(s, s.conj())


def prepare_state(basis: Basis, bit: int) -> np.ndarray:
    """One of the four protocol states |0>, |1>, |+>, |->."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    if basis is Basis.Z:
        return ket(bit)
    sign = -1.0 if bit else 1.0
    return np.array([SQRT_HALF, sign * SQRT_HALF], dtype=complex)


def apply_encode(op: EncodeOp, s: np.ndarray) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    if s.shape != (2,):
        raise QuantumStateError(f"encoding acts on a single qubit, got shape {s.shape}")
    return op.matrix @ s


def apply_on_leading_qubit(gate: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Apply a 2x2 ``gate`` to the first qubit of a composite state vector."""
    s = np.asarray(s, dtype=complex)
    if s.size % 2:
        raise QuantumStateError(f"dimension {s.size} has no leading qubit factor")
    return (gate @ s.reshape(2, -1)).reshape(-1)


def outcome_probabilities(s: np.ndarray, basis: Basis) -> np.ndarray:
    """Born-rule probabilities of bits 0 and 1 for the leading qubit."""
    s = np.asarray(s, dtype=complex)
    if s.size % 2:
        raise QuantumStateError(f"dimension {s.size} has no leading qubit factor")
    rows = s.reshape(2, -1)
    if basis is Basis.X:
        rows = HADAMARD @ rows
    p = np.sum(np.abs(rows) ** 2, axis=1).real
    return p / p.sum()


def measure_in_basis(s: np.ndarray, basis: Basis, rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """Projectively measure the leading qubit of ``s``.

    Returns the outcome bit and the renormalized post-measurement state,
    expressed in the computational frame.
    """
    s = np.asarray(s, dtype=complex)
    if s.size % 2:
        raise QuantumStateError(f"dimension {s.size} has no leading qubit factor")
    rows = s.reshape(2, -1)
    if basis is Basis.X:
        rows = HADAMARD @ rows
    weights = np.sum(np.abs(rows) ** 2, axis=1).real
    bit = int(rng.random() * weights.sum() >= weights[0])
    kept = np.zeros_like(rows)
    kept[bit] = rows[bit] / np.sqrt(weights[bit])
    if basis is Basis.X:
        kept = HADAMARD @ kept
    return bit, kept.reshape(-1)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>|^2, the phase-insensitive overlap used for state equality."""
    return float(abs(np.vdot(a, b)) ** 2)


def same_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> bool:
    return fidelity(a, b) >= 1.0 - tol


def partial_trace(rho: np.ndarray, dims: tuple[int, ...], keep: tuple[int, ...]) -> np.ndarray:
    """Trace out every subsystem of ``rho`` not listed in ``keep``."""
    n = len(dims)
    t = np.asarray(rho).reshape(dims + dims)
    # Trace pairs from the highest index down so axis numbers stay valid.
    traced = 0
    for ax in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + n - traced)
        traced += 1
    d = int(np.prod([dims[k] for k in sorted(keep)])) if keep else 1
    return t.reshape(d, d)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy ``-tr(rho log2 rho)`` in bits.

    Eigenvalues below ``EIG_ZERO`` contribute nothing (0 log 0 = 0).
    """
    m = as_density(rho)
    if m.shape[0] > MAX_ENTROPY_DIM:
        raise QuantumStateError(f"dimension {m.shape[0]} exceeds {MAX_ENTROPY_DIM}")
    lam = np.linalg.eigvalsh(m)
    lam = lam[lam > EIG_ZERO]
    return float(max(0.0, -np.sum(lam * np.log2(lam))))
