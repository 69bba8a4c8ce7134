"""Collective attacks on the forward qubit and the resulting joint states.

An attack is a unitary ``U_BE`` on qubit ⊗ ancilla (ancilla dimension
``d_E``) together with Eve's initial ancilla state. Index ordering inside
``U_BE`` is ``qubit * d_E + ancilla``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quantum import (
    HADAMARD,
    U_FLIP,
    Basis,
    QuantumStateError,
    as_density,
    as_state,
    density,
    ket,
    outcome_probabilities,
    partial_trace,
    prepare_state,
    von_neumann_entropy,
)
from .rates import binary_entropy

UNITARY_TOL = 1e-10
MAX_ANCILLA_DIM = 8
# Magnitudes below this are treated as absent components in the decomposition.
ZERO_COEFF = 1e-12

# Input labels of the four decomposition rows and the output labels of each row.
ROWS = {
    "0": (Basis.Z, 0, ("00", "01")),
    "1": (Basis.Z, 1, ("10", "11")),
    "p": (Basis.X, 0, ("pp", "pm")),
    "m": (Basis.X, 1, ("mp", "mm")),
}


class AttackError(ValueError):
    pass


@dataclass(frozen=True)
class AttackUnitary:
    matrix: np.ndarray
    initial_ancilla: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        e = as_state(self.initial_ancilla)
        d_E = e.size
        if not 2 <= d_E <= MAX_ANCILLA_DIM:
            raise AttackError(f"ancilla dimension must be in [2, {MAX_ANCILLA_DIM}], got {d_E}")
        if m.shape != (2 * d_E, 2 * d_E):
            raise AttackError(f"attack matrix shape {m.shape} does not match d_E = {d_E}")
        if np.max(np.abs(m.conj().T @ m - np.eye(2 * d_E))) > UNITARY_TOL:
            raise AttackError("attack matrix is not unitary")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "initial_ancilla", e)

    @property
    def d_E(self) -> int:
        return self.initial_ancilla.size

    def act(self, qubit: np.ndarray) -> np.ndarray:
        """U_BE (|qubit> ⊗ |E>)."""
        return self.matrix @ np.kron(qubit, self.initial_ancilla)


@dataclass(frozen=True)
class AttackCoefficients:
    """Magnitudes ``c_ij`` and residual ancilla vectors ``|E_ij>``.

    Keys ``00, 01, 10, 11`` refer to Z-basis inputs/outputs and
    ``pp, pm, mp, mm`` to X-basis ones (``p`` = |+>, ``m`` = |->); the first
    character is the prepared state, the second the output qubit component.
    Vectors for vanishing magnitudes are placeholders listed in ``undefined``.
    """

    c00: float
    c01: float
    c10: float
    c11: float
    cpp: float
    cpm: float
    cmp: float
    cmm: float
    ancilla_states: dict[str, np.ndarray] = field(repr=False)
    undefined: frozenset[str] = frozenset()

    def c(self, key: str) -> float:
        return getattr(self, "c" + key)

    def row_norms(self) -> tuple[float, float, float, float]:
        return (
            self.c00**2 + self.c01**2,
            self.c10**2 + self.c11**2,
            self.cpp**2 + self.cpm**2,
            self.cmp**2 + self.cmm**2,
        )


@dataclass(frozen=True)
class DisturbanceReport:
    e_Z: float
    e_X: float
    e: float
    xi: float


def standard_attack(kind: str, theta: float | None = None) -> AttackUnitary:
    """Fixture attacks: ``identity``, ``cnot`` and ``phase_covariant``.

    ``phase_covariant`` entangles the qubit with ancilla states
    ``|e0>, |e1>`` of overlap ``cos(theta)``; ``theta = pi/2`` is the
    orthogonal-ancilla (cnot-equivalent) case.
    """
    zero = ket(0)
    if kind == "identity":
        return AttackUnitary(np.eye(4, dtype=complex), zero, name="identity")
    if kind == "cnot":
        cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
        return AttackUnitary(cnot, zero, name="cnot")
    if kind == "phase_covariant":
        if theta is None or not 0.0 <= theta <= np.pi / 2:
            raise AttackError(f"phase_covariant needs theta in [0, pi/2], got {theta!r}")
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        # Controlled ancilla rotation: |0>|0> -> |0>|e0>, |1>|0> -> |1>|e1>.
        r0 = np.array([[c, -s], [s, c]], dtype=complex)
        r1 = np.array([[c, s], [-s, c]], dtype=complex)
        m = np.zeros((4, 4), dtype=complex)
        m[:2, :2] = r0
        m[2:, 2:] = r1
        return AttackUnitary(m, zero, name=f"phase_covariant({theta:.6g})")
    raise AttackError(f"unknown attack kind {kind!r}")


def random_attack(d_E: int, rng: np.random.Generator) -> AttackUnitary:
    """Haar-random U_BE with a random initial ancilla, for property tests."""
    dim = 2 * d_E
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    e = rng.standard_normal(d_E) + 1j * rng.standard_normal(d_E)
    return AttackUnitary(q, e / np.linalg.norm(e), name=f"random(d_E={d_E})")


def _split_row(out: np.ndarray, d_E: int, basis: Basis) -> tuple[np.ndarray, np.ndarray]:
    rows = out.reshape(2, d_E)
    if basis is Basis.X:
        rows = HADAMARD @ rows
    return rows[0], rows[1]


def _decompose(components: dict[str, np.ndarray], d_E: int) -> AttackCoefficients:
    mags = {}
    vecs = {}
    undefined = set()
    placeholder = np.zeros(d_E, dtype=complex)
    placeholder[0] = 1.0
    for key, vec in components.items():
        c = float(np.linalg.norm(vec))
        if c < ZERO_COEFF:
            mags[key] = 0.0
            vecs[key] = placeholder.copy()
            undefined.add(key)
        else:
            mags[key] = c
            vecs[key] = vec / c
    return AttackCoefficients(
        **{"c" + k: v for k, v in mags.items()},
        ancilla_states=vecs,
        undefined=frozenset(undefined),
    )


def extract_coefficients(attack: AttackUnitary) -> AttackCoefficients:
    """Decompose U_BE acting on each of the four prepared states.

    Z-basis inputs are split over {|0>, |1>}, X-basis inputs over {|+>, |->}.
    """
    components = {}
    for basis, bit, keys in ROWS.values():
        a, b = _split_row(attack.act(prepare_state(basis, bit)), attack.d_E, basis)
        components[keys[0]], components[keys[1]] = a, b
    return _decompose(components, attack.d_E)


def reconstruct_x_coefficients(coeffs: AttackCoefficients) -> AttackCoefficients:
    """Rebuild the X-basis rows from the Z-basis rows by linearity.

    With ``a_ij = c_ij |E_ij>`` the action on |±> follows from
    ``|±> = (|0> ± |1>)/sqrt(2)`` without touching the unitary again.
    """
    a = {k: coeffs.c(k) * coeffs.ancilla_states[k] for k in ("00", "01", "10", "11")}
    comps = {
        "00": a["00"],
        "01": a["01"],
        "10": a["10"],
        "11": a["11"],
        "pp": (a["00"] + a["01"] + a["10"] + a["11"]) / 2,
        "pm": (a["00"] - a["01"] + a["10"] - a["11"]) / 2,
        "mp": (a["00"] + a["01"] - a["10"] - a["11"]) / 2,
        "mm": (a["00"] - a["01"] - a["10"] + a["11"]) / 2,
    }
    return _decompose(comps, a["00"].size)


def disturbance(coeffs: AttackCoefficients) -> DisturbanceReport:
    def sq(c: float) -> float:
        # Norms of normalized rows can overshoot 1 by rounding.
        return min(1.0, c * c)

    e_Z = (sq(coeffs.c01) + sq(coeffs.c10)) / 2
    e_X = (sq(coeffs.cpm) + sq(coeffs.cmp)) / 2
    return DisturbanceReport(e_Z=e_Z, e_X=e_X, e=(e_Z + e_X) / 2, xi=sq(coeffs.cpm))


def outcome_table(attack: AttackUnitary) -> np.ndarray:
    """P(outcome 1) when Alice measures an attacked qubit.

    Indexed ``[prep_basis, prep_bit, measure_basis]`` with Z = 0, X = 1.
    """
    table = np.empty((2, 2, 2))
    for pb, basis in enumerate((Basis.Z, Basis.X)):
        for bit in (0, 1):
            out = attack.act(prepare_state(basis, bit))
            for mb, mbasis in enumerate((Basis.Z, Basis.X)):
                table[pb, bit, mb] = outcome_probabilities(out, mbasis)[1]
    return table


def forward_joint_state(attack: AttackUnitary) -> np.ndarray:
    """U_BE (I/2 ⊗ |E><E|) U_BE^dagger."""
    rho = np.kron(np.eye(2) / 2, density(attack.initial_ancilla))
    U = attack.matrix
    return U @ rho @ U.conj().T


def encoded_cq_state(P0: float, rho_BE: np.ndarray) -> np.ndarray:
    """Classical-quantum state of Alice's register and the attacked qubit.

    Register ordering is ``A ⊗ B ⊗ E``; branch 1 has U = i*sigma_y applied on
    the qubit factor.
    """
    if not 0.0 <= P0 <= 1.0:
        raise ValueError(f"P0 must lie in [0, 1], got {P0!r}")
    rho_BE = as_density(rho_BE)
    d = rho_BE.shape[0]
    if d % 2:
        raise QuantumStateError("rho_BE has no qubit factor")
    flip = np.kron(U_FLIP, np.eye(d // 2))
    rho1 = flip @ rho_BE @ flip.conj().T
    return np.kron(np.diag([P0, 0.0]), rho_BE) + np.kron(np.diag([0.0, 1.0 - P0]), rho1)


def secure_rate_numeric(rho_ABE: np.ndarray) -> float:
    """Conditional entropy S(A|BE) = S(rho_ABE) - S(rho_BE)."""
    rho = as_density(rho_ABE)
    d = rho.shape[0]
    if d % 2:
        raise QuantumStateError("rho_ABE has no register factor")
    h = d // 2
    if np.max(np.abs(rho[:h, h:])) > 1e-12:
        raise QuantumStateError("rho_ABE is not block diagonal in the register")
    rho_BE = partial_trace(rho, (2, h), keep=(1,))
    return von_neumann_entropy(rho) - von_neumann_entropy(rho_BE)


def secure_rate_closed_form(P0: float, xi: float) -> float:
    """h(P0) - h(xi)."""
    return binary_entropy(P0) - binary_entropy(xi)


@dataclass(frozen=True)
class AttackBench:
    name: str
    e: float
    xi: float
    r_numeric: float
    r_closed: float

    @property
    def gap(self) -> float:
        return self.r_numeric - self.r_closed


def bench_attack(attack: AttackUnitary, P0: float = 0.5) -> AttackBench:
    """Compare the entropy-based rate with the closed form for one attack."""
    dist = disturbance(extract_coefficients(attack))
    r_num = secure_rate_numeric(encoded_cq_state(P0, forward_joint_state(attack)))
    return AttackBench(attack.name, dist.e, dist.xi, r_num, secure_rate_closed_form(P0, dist.xi))
