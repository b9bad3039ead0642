"""Dense state-vector simulation of qudit registers.

Basis labels use the most-significant-first convention: for qudits
``(q_1, ..., q_n)`` the composite label is ``sum(q_i * d**(n - i))``. The same
convention applies to the target list of a gate, so the first target is the
most significant digit of the gate's row/column labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, ImpossibleOutcomeError
from .rng import make_rng

NORM_TOL = 1e-10
UNITARY_TOL = 1e-10
ZERO_PROB = 1e-12


def _as_matrix(entries) -> np.ndarray:
    return np.array(entries, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of ``n`` qudits of dimension ``d``."""

    d: int
    n: int
    amps: np.ndarray

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"qudit dimension must be >= 2, got {self.d}")
        if self.n < 0:
            raise DomainError(f"qudit count must be >= 0, got {self.n}")
        amps = np.array(self.amps, dtype=np.complex128).reshape(-1)
        if amps.size != self.d**self.n:
            raise DomainError(
                f"expected {self.d**self.n} amplitudes for d={self.d}, n={self.n}, got {amps.size}"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state is not normalized (|psi|^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def tensor(self, other: StateVector) -> StateVector:
        """Append ``other``'s qudits after this state's qudits."""
        if other.d != self.d:
            raise DomainError("cannot tensor states of different qudit dimension")
        return StateVector(self.d, self.n + other.n, np.kron(self.amps, other.amps))

    def __repr__(self):
        return f"StateVector(d={self.d}, n={self.n})"


@dataclass(frozen=True, eq=False)
class GateMatrix:
    """A unitary matrix, checked on construction."""

    matrix: np.ndarray
    name: str = field(default="U")

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"gate matrix must be square, got shape {m.shape}")
        err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])), initial=0.0)
        if err > UNITARY_TOL:
            raise DomainError(f"gate {self.name!r} is not unitary (max |U^dag U - I| = {err:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def power(self, k: int) -> GateMatrix:
        return GateMatrix(np.linalg.matrix_power(self.matrix, k), f"{self.name}^{k}")

    def __repr__(self):
        return f"GateMatrix({self.name!r}, dim={self.dim})"


@dataclass(frozen=True)
class MeasurementOutcome:
    qudit_indices: tuple[int, ...]
    value: int
    probability: float

    def digits(self, d: int) -> tuple[int, ...]:
        return to_digits(self.value, d, len(self.qudit_indices))


# measurement policies


@dataclass(frozen=True)
class Sample:
    seed: int


@dataclass(frozen=True)
class Forced:
    k: int


@dataclass(frozen=True)
class EnumerateAll:
    pass


Policy = Union[Sample, Forced, EnumerateAll]


def to_digits(value: int, d: int, width: int) -> tuple[int, ...]:
    digits = []
    for _ in range(width):
        value, r = divmod(value, d)
        digits.append(r)
    return tuple(reversed(digits))


def from_digits(digits: Sequence[int], d: int) -> int:
    value = 0
    for x in digits:
        value = value * d + int(x)
    return value


def basis_state(d: int, n: int, label: int) -> StateVector:
    if not 0 <= label < d**n:
        raise DomainError(f"label {label} out of range for {n} qudits of dimension {d}")
    amps = np.zeros(d**n, dtype=np.complex128)
    amps[label] = 1.0
    return StateVector(d, n, amps)


def random_state(d: int, n: int, seed: int) -> StateVector:
    """Uniformly (Haar) distributed pure state."""
    rng = make_rng(seed)
    v = rng.standard_normal(d**n) + 1j * rng.standard_normal(d**n)
    return StateVector(d, n, v / np.linalg.norm(v))


def _check_targets(n: int, targets: Sequence[int]) -> list[int]:
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise DomainError(f"duplicate target qudits in {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise DomainError(f"target {t} outside register of {n} qudits")
    return targets


def _front(state: StateVector, targets: list[int]) -> np.ndarray:
    # (d^k, rest) view with the targets moved to the most significant axes
    psi = state.amps.reshape([state.d] * state.n)
    psi = np.moveaxis(psi, targets, list(range(len(targets))))
    return psi.reshape(state.d ** len(targets), -1)


def _back(mat: np.ndarray, state: StateVector, targets: list[int]) -> np.ndarray:
    k = len(targets)
    psi = mat.reshape([state.d] * state.n)
    psi = np.moveaxis(psi, list(range(k)), targets)
    return psi.reshape(-1)


def apply_gate(state: StateVector, gate: GateMatrix, targets: Sequence[int]) -> StateVector:
    targets = _check_targets(state.n, targets)
    if gate.dim != state.d ** len(targets):
        raise DomainError(
            f"gate {gate.name!r} has dim {gate.dim}, expected {state.d}**{len(targets)}"
        )
    out = gate.matrix @ _front(state, targets)
    return StateVector(state.d, state.n, _back(out, state, targets))


def measure(state: StateVector, targets: Sequence[int], policy: Policy):
    """Measure ``targets`` in the computational basis.

    Returns a list of ``(MeasurementOutcome, StateVector)`` pairs. Measured
    qudits stay in the register, projected onto the observed basis state.
    ``Sample`` and ``Forced`` yield one branch; ``EnumerateAll`` yields every
    branch with probability above 1e-12.
    """
    targets = _check_targets(state.n, targets)
    mat = _front(state, targets)
    probs = np.sum(np.abs(mat) ** 2, axis=1)

    if isinstance(policy, EnumerateAll):
        ks = [int(k) for k in np.flatnonzero(probs > ZERO_PROB)]
    elif isinstance(policy, Forced):
        k = int(policy.k)
        if not 0 <= k < probs.size:
            raise DomainError(f"forced outcome {k} out of range [0, {probs.size})")
        if probs[k] < ZERO_PROB:
            raise ImpossibleOutcomeError(f"outcome {k} has probability {probs[k]:.3e}")
        ks = [k]
    elif isinstance(policy, Sample):
        rng = make_rng(policy.seed)
        ks = [int(rng.choice(probs.size, p=probs / probs.sum()))]
    else:
        raise DomainError(f"unknown measurement policy {policy!r}")

    branches = []
    for k in ks:
        p = float(probs[k])
        proj = np.zeros_like(mat)
        proj[k] = mat[k] / np.sqrt(p)
        post = StateVector(state.d, state.n, _back(proj, state, targets))
        branches.append((MeasurementOutcome(tuple(targets), k, p), post))
    return branches


def discard(state: StateVector, targets: Sequence[int], tol: float = 1e-9) -> StateVector:
    """Remove ``targets`` from the register.

    The targets must be in a product state with the rest. The phase of the
    discarded factor is fixed so that its largest amplitude is real and
    positive; for a basis state that leaves the remaining amplitudes untouched.
    """
    targets = _check_targets(state.n, targets)
    mat = _front(state, targets)
    rows = np.sum(np.abs(mat) ** 2, axis=1)
    k = int(np.argmax(rows))
    if rows.sum() - rows[k] <= tol**2:
        # basis-state factor: keep the row as is, it already carries the full norm
        return StateVector(state.d, state.n - len(targets), mat[k])
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    if s.size > 1 and s[1] > tol:
        raise DomainError(f"qudits {targets} are entangled with the rest (s1 = {s[1]:.3e})")
    u0 = u[:, 0]
    i = int(np.argmax(np.abs(u0)))
    u0 = u0 * (abs(u0[i]) / u0[i])
    rest = u0.conj() @ mat
    return StateVector(state.d, state.n - len(targets), rest / np.linalg.norm(rest))


def permute_qudits(state: StateVector, order: Sequence[int]) -> StateVector:
    """Reorder qudits: qudit ``order[i]`` of the input becomes qudit ``i``."""
    order = _check_targets(state.n, order)
    if len(order) != state.n:
        raise DomainError("order must list every qudit exactly once")
    psi = state.amps.reshape([state.d] * state.n).transpose(order)
    return StateVector(state.d, state.n, psi.reshape(-1))


def equal_states(a: StateVector, b: StateVector, mode: str = "exact", tol: float = NORM_TOL) -> bool:
    """Compare two states entrywise, either exactly or up to a global phase.

    ``mode`` is ``"exact"`` or ``"global_phase"``.
    """
    if a.d != b.d or a.n != b.n:
        raise DomainError("states have different shapes")
    bv = b.amps
    if mode == "global_phase":
        i = int(np.argmax(np.abs(bv)))
        if abs(a.amps[i]) > 0:
            bv = bv * np.exp(1j * (np.angle(a.amps[i]) - np.angle(bv[i])))
    elif mode != "exact":
        raise DomainError(f"unknown comparison mode {mode!r}")
    return bool(np.max(np.abs(a.amps - bv)) <= tol)


def max_deviation(a: StateVector, b: StateVector) -> float:
    return float(np.max(np.abs(a.amps - b.amps)))


# gate constructors


def identity_gate(dim: int) -> GateMatrix:
    return GateMatrix(np.eye(dim), "I")


def pauli_x() -> GateMatrix:
    return GateMatrix([[0, 1], [1, 0]], "X")


def pauli_z() -> GateMatrix:
    return GateMatrix([[1, 0], [0, -1]], "Z")


def hadamard() -> GateMatrix:
    return GateMatrix(np.array([[1, 1], [1, -1]]) / np.sqrt(2), "H")


def cnot() -> GateMatrix:
    return generalized_cnot(2)


def generalized_cnot(d: int) -> GateMatrix:
    """Two-qudit gate |x>|y> -> |x>|x - y mod d>, control first."""
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    m = np.zeros((d * d, d * d))
    for x in range(d):
        for y in range(d):
            m[x * d + (x - y) % d, x * d + y] = 1.0
    return GateMatrix(m, "GCNOT" if d > 2 else "CNOT")


def qft(d: int) -> GateMatrix:
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if d == 2:
        # exact +-1/sqrt(2) entries, identical to hadamard()
        return GateMatrix(np.array([[1, 1], [1, -1]]) / np.sqrt(2), "H")
    y, x = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return GateMatrix(np.exp(2j * np.pi * ((x * y) % d) / d) / np.sqrt(d), "QFT")


def s_gate(d: int) -> GateMatrix:
    """Phase correction diag(exp(-2 pi i x / d))."""
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if d == 2:
        return GateMatrix(np.diag([1.0, -1.0]), "Z")
    return GateMatrix(np.diag(np.exp(-2j * np.pi * np.arange(d) / d)), "S")


def s_power(d: int, k: int) -> GateMatrix:
    """``s_gate(d) ** k`` built directly from reduced exponents."""
    k %= d
    if d == 2:
        return s_gate(2) if k else identity_gate(2)
    x = np.arange(d)
    return GateMatrix(np.diag(np.exp(-2j * np.pi * ((k * x) % d) / d)), "S" if k == 1 else f"S^{k}")


def permutation_gate(mapping: Sequence[int], name: str = "V") -> GateMatrix:
    """Sum_x |mapping[x]><x|."""
    size = len(mapping)
    m = np.zeros((size, size))
    m[list(mapping), np.arange(size)] = 1.0
    return GateMatrix(m, name)
