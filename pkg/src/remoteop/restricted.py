"""Block-permutation unitaries U(f, G) and their special cases.

An operation on ``N + M`` qudits is described by a permutation ``f`` of the
``d**N`` labels of the first ``N`` qudits and one ``d**M x d**M`` unitary block
``G(x)`` per label::

    U(f, G) = sum_x |f(x)><x| (x) G(x)

With ``M = 0`` the blocks are unit-modulus scalars and this is the diagonal
phase family U(f, phi).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import UNITARY_TOL, GateMatrix, permutation_gate
from .errors import DomainError
from .rng import make_rng

BLOCK_TOL = 1e-9
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Permutation:
    map: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(v) for v in self.map)
        if sorted(m) != list(range(len(m))):
            raise DomainError(f"not a permutation of 0..{len(m) - 1}: {m}")
        object.__setattr__(self, "map", m)

    @classmethod
    def identity(cls, size: int) -> Permutation:
        return cls(tuple(range(size)))

    @property
    def size(self) -> int:
        return len(self.map)

    def __call__(self, x: int) -> int:
        return self.map[x]

    def inverse(self) -> Permutation:
        inv = [0] * self.size
        for x, y in enumerate(self.map):
            inv[y] = x
        return Permutation(tuple(inv))

    def gate(self) -> GateMatrix:
        """Bob's relabelling correction V(f) = sum_x |f(x)><x|."""
        return permutation_gate(self.map, "V(f)")


@dataclass(frozen=True, eq=False)
class RestrictedOperation:
    d: int
    n_perm: int
    m_block: int
    f: Permutation
    blocks: tuple[GateMatrix, ...]

    def __post_init__(self):
        if self.d < 2 or self.n_perm < 1 or self.m_block < 0:
            raise DomainError(f"bad shape d={self.d}, N={self.n_perm}, M={self.m_block}")
        if self.f.size != self.d**self.n_perm:
            raise DomainError(f"permutation size {self.f.size} != d**N = {self.d**self.n_perm}")
        blocks = tuple(b if isinstance(b, GateMatrix) else GateMatrix(b, "G") for b in self.blocks)
        if len(blocks) != self.f.size:
            raise DomainError(f"need {self.f.size} blocks, got {len(blocks)}")
        bdim = self.d**self.m_block
        for b in blocks:
            if b.dim != bdim:
                raise DomainError(f"block of dim {b.dim}, expected {bdim}")
        object.__setattr__(self, "blocks", blocks)

    @property
    def block_dim(self) -> int:
        return self.d**self.m_block

    @property
    def num_qudits(self) -> int:
        return self.n_perm + self.m_block

    def phases(self) -> np.ndarray:
        """phi(x) for an ``M = 0`` operation."""
        if self.m_block != 0:
            raise DomainError("phases are only defined for M = 0")
        return np.array([np.angle(b.matrix[0, 0]) for b in self.blocks])

    def to_dict(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "d": self.d,
            "N": self.n_perm,
            "M": self.m_block,
            "f": list(self.f.map),
            "blocks": [
                [[float(z.real), float(z.imag)] for z in b.matrix.reshape(-1)] for b in self.blocks
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> RestrictedOperation:
        version = doc.get("version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise DomainError(f"unsupported operation document version {version}")
        d, n, m = int(doc["d"]), int(doc["N"]), int(doc["M"])
        bdim = d**m
        blocks = []
        for flat in doc["blocks"]:
            arr = np.array([complex(re, im) for re, im in flat]).reshape(bdim, bdim)
            blocks.append(GateMatrix(arr, "G"))
        return cls(d, n, m, Permutation(tuple(doc["f"])), tuple(blocks))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> RestrictedOperation:
        return cls.from_dict(json.loads(text))


def build_matrix(op: RestrictedOperation) -> GateMatrix:
    bdim = op.block_dim
    size = op.f.size * bdim
    m = np.zeros((size, size), dtype=np.complex128)
    for x, g in enumerate(op.blocks):
        r = op.f(x) * bdim
        c = x * bdim
        m[r:r + bdim, c:c + bdim] = g.matrix
    return GateMatrix(m, f"U(f,G)[N={op.n_perm},M={op.m_block}]")


def from_phases(f: Sequence[int] | Permutation, phases: Sequence[float], d: int = 2) -> RestrictedOperation:
    """U(f, phi) as an ``M = 0`` restricted operation."""
    if not isinstance(f, Permutation):
        f = Permutation(tuple(f))
    n = round(np.log(f.size) / np.log(d))
    if d**n != f.size:
        raise DomainError(f"permutation size {f.size} is not a power of {d}")
    blocks = tuple(GateMatrix([[np.exp(1j * p)]], "phase") for p in phases)
    return RestrictedOperation(d, n, 0, f, blocks)


def u_diag(phi: float) -> RestrictedOperation:
    return from_phases([0, 1], [phi, -phi])


def u_anti(phi: float) -> RestrictedOperation:
    # column 0 carries -exp(-i phi), i.e. phase pi - phi, in row 1
    blocks = (GateMatrix([[-np.exp(-1j * phi)]], "phase"), GateMatrix([[np.exp(1j * phi)]], "phase"))
    return RestrictedOperation(2, 1, 0, Permutation((1, 0)), blocks)


def identity_op(d: int, n: int, m: int) -> RestrictedOperation:
    eye = GateMatrix(np.eye(d**m), "I")
    return RestrictedOperation(d, n, m, Permutation.identity(d**n), (eye,) * d**n)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix with R's diagonal made positive."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_permutation(size: int, rng: np.random.Generator) -> Permutation:
    # Fisher-Yates
    m = list(range(size))
    for i in range(size - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        m[i], m[j] = m[j], m[i]
    return Permutation(tuple(m))


def random_restricted(seed: int, d: int, N: int, M: int) -> RestrictedOperation:
    if N < 1 or M < 0:
        raise DomainError(f"need N >= 1 and M >= 0, got N={N}, M={M}")
    rng = make_rng(seed)
    f = random_permutation(d**N, rng)
    blocks = tuple(GateMatrix(haar_unitary(d**M, rng), "G") for _ in range(d**N))
    return RestrictedOperation(d, N, M, f, blocks)


def classify(matrix: GateMatrix | np.ndarray, d: int, N: int, M: int) -> RestrictedOperation | None:
    """Recover ``(f, G)`` from a dense matrix, or ``None`` if it is not block-permutation.

    A block counts as nonzero when its largest entry exceeds 1e-9 in
    magnitude. Raises :class:`DomainError` for a non-unitary input.
    """
    mat = np.asarray(matrix.matrix if isinstance(matrix, GateMatrix) else matrix, dtype=np.complex128)
    bdim = d**M
    nb = d**N
    if mat.shape != (nb * bdim, nb * bdim):
        raise DomainError(f"matrix shape {mat.shape} does not match d={d}, N={N}, M={M}")
    err = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
    if err > UNITARY_TOL:
        raise DomainError(f"matrix is not unitary (max |U^dag U - I| = {err:.3e})")

    peaks = np.abs(mat).reshape(nb, bdim, nb, bdim).max(axis=(1, 3))
    support = peaks > BLOCK_TOL
    if not (np.all(support.sum(axis=0) == 1) and np.all(support.sum(axis=1) == 1)):
        return None
    f = [int(np.flatnonzero(support[:, x])[0]) for x in range(nb)]
    blocks = []
    for x in range(nb):
        r = f[x] * bdim
        g = mat[r:r + bdim, x * bdim:(x + 1) * bdim]
        try:
            blocks.append(GateMatrix(g.copy(), "G"))
        except DomainError:
            return None
    return RestrictedOperation(d, N, M, Permutation(tuple(f)), tuple(blocks))


def controlled_u(num_controls: int, u: GateMatrix) -> RestrictedOperation:
    """Qubit gate applying ``u`` to the last qubit iff every control is 1."""
    if num_controls < 1:
        raise DomainError(f"need at least one control, got {num_controls}")
    if u.dim != 2:
        raise DomainError(f"target gate must act on one qubit, got dim {u.dim}")
    size = 2**num_controls
    eye = GateMatrix(np.eye(2), "I")
    blocks = (eye,) * (size - 1) + (u,)
    return RestrictedOperation(2, num_controls, 1, Permutation.identity(size), blocks)


def multi_controlled_z(num_qubits: int) -> RestrictedOperation:
    """Phase -1 on the all-ones string of ``num_qubits`` qubits."""
    size = 2**num_qubits
    one = GateMatrix([[1.0]], "phase")
    blocks = (one,) * (size - 1) + (GateMatrix([[-1.0]], "phase"),)
    return RestrictedOperation(2, num_qubits, 0, Permutation.identity(size), blocks)
