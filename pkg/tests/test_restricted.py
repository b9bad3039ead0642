import itertools
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from remoteop import core, restricted as r
from remoteop.core import GateMatrix
from remoteop.errors import DomainError

import oracles

SHAPES = [(d, n, m) for d in (2, 3) for n in (1, 2) for m in (0, 1)]


def test_permutation_validates():
    with pytest.raises(DomainError):
        r.Permutation((0, 0, 1))
    p = r.Permutation((2, 0, 1))
    assert p(0) == 2 and p.size == 3
    assert p.inverse().map == (1, 2, 0)


def test_u_diag_matrix():
    m = r.build_matrix(r.u_diag(np.pi / 2)).matrix
    assert_allclose(m, np.diag([1j, -1j]), atol=1e-15)
    phi = 0.3
    assert_allclose(r.build_matrix(r.u_diag(phi)).matrix,
                    [[np.exp(1j * phi), 0], [0, np.exp(-1j * phi)]], atol=1e-15)


def test_u_anti_matrix():
    assert np.array_equal(r.build_matrix(r.u_anti(0.0)).matrix, np.array([[0, 1], [-1, 0]]))
    phi = 1.1
    assert_allclose(r.build_matrix(r.u_anti(phi)).matrix,
                    [[0, np.exp(1j * phi)], [-np.exp(-1j * phi), 0]], atol=1e-15)
    assert_allclose(r.u_anti(phi).phases(), [np.pi - phi, phi], atol=1e-15)


def test_identity_op_is_exact_identity():
    for d, n, m in SHAPES:
        mat = r.build_matrix(r.identity_op(d, n, m)).matrix
        assert np.array_equal(mat, np.eye(d ** (n + m)))


@pytest.mark.parametrize("d,n,m", SHAPES)
def test_build_matrix_matches_outer_product_sum(d, n, m):
    op = r.random_restricted(7, d, n, m)
    want = oracles.restricted_dense(op.f.map, [b.matrix for b in op.blocks])
    got = r.build_matrix(op).matrix
    assert np.max(np.abs(got - want)) == 0
    # column x is supported only on rows of block f(x)
    bdim = d**m
    for col in range(got.shape[1]):
        x = col // bdim
        rows = np.flatnonzero(np.abs(got[:, col]) > 0)
        assert rows.min() >= op.f(x) * bdim and rows.max() < (op.f(x) + 1) * bdim


def test_build_matrix_is_unitary():
    for d, n, m in SHAPES:
        for seed in range(5):
            u = r.build_matrix(r.random_restricted(seed, d, n, m)).matrix
            assert np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < 1e-10


def test_classify_diag():
    op = r.classify(np.diag([1j, -1j]), 2, 1, 0)
    assert op.f.map == (0, 1)
    assert_allclose(op.phases(), [np.pi / 2, -np.pi / 2], atol=1e-15)


def test_classify_rejects_hadamard():
    assert r.classify(core.hadamard(), 2, 1, 0) is None


def test_classify_rejects_non_unitary():
    with pytest.raises(DomainError):
        r.classify(np.array([[1, 0], [0, 2]]), 2, 1, 0)
    with pytest.raises(DomainError):
        r.classify(np.eye(4), 2, 1, 0)


@pytest.mark.parametrize("d,n,m", SHAPES)
def test_classify_round_trip(d, n, m):
    for seed in range(100):
        op = r.random_restricted(seed, d, n, m)
        back = r.classify(r.build_matrix(op), d, n, m)
        assert back is not None
        assert back.f.map == op.f.map
        for g0, g1 in zip(op.blocks, back.blocks):
            assert np.max(np.abs(g0.matrix - g1.matrix)) <= 1e-12


def test_classify_depends_on_split():
    # a CNOT is block-permutation with N=1, M=1 but also with N=2, M=0
    cx = core.cnot()
    op = r.classify(cx, 2, 1, 1)
    assert op.f.map == (0, 1)
    assert_allclose(op.blocks[1].matrix, core.pauli_x().matrix)
    assert r.classify(cx, 2, 2, 0).f.map == (0, 1, 3, 2)


def test_classify_rejects_haar_unitaries():
    rng = r.make_rng(17)
    for d, n, m in SHAPES:
        u = r.haar_unitary(d ** (n + m), rng)
        assert r.classify(u, d, n, m) is None


def test_random_restricted_is_deterministic():
    a = r.random_restricted(123, 3, 2, 1)
    b = r.random_restricted(123, 3, 2, 1)
    assert a.f == b.f
    assert all(np.array_equal(x.matrix, y.matrix) for x, y in zip(a.blocks, b.blocks))
    c = r.random_restricted(124, 3, 2, 1)
    assert not np.array_equal(r.build_matrix(a).matrix, r.build_matrix(c).matrix)


def test_random_restricted_rejects_bad_shape():
    with pytest.raises(DomainError):
        r.random_restricted(0, 2, 0, 1)
    with pytest.raises(DomainError):
        r.random_restricted(0, 2, 1, -1)


def test_haar_blocks_are_unitary():
    rng = r.make_rng(5)
    for dim in (1, 2, 3, 4, 9):
        for _ in range(100):
            u = r.haar_unitary(dim, rng)
            assert np.max(np.abs(u.conj().T @ u - np.eye(dim))) < 1e-10


def test_haar_trace_moment():
    rng = r.make_rng(2024)
    vals = [abs(np.trace(r.haar_unitary(2, rng))) ** 2 for _ in range(2000)]
    assert abs(np.mean(vals) - 1.0) < 0.1


def test_haar_phases_are_uniform():
    # a plain QR without the diagonal fix returns a real positive 1x1 "unitary"
    rng = r.make_rng(8)
    angles = [np.angle(r.haar_unitary(1, rng)[0, 0]) for _ in range(2000)]
    assert abs(np.mean(np.cos(angles))) < 0.1
    assert abs(np.mean(np.sin(angles))) < 0.1


def test_fisher_yates_covers_all_permutations():
    rng = r.make_rng(99)
    counts = {}
    for _ in range(6000):
        p = r.random_permutation(3, rng).map
        counts[p] = counts.get(p, 0) + 1
    assert set(counts) == set(itertools.permutations(range(3)))
    assert all(800 < c < 1200 for c in counts.values())


def test_controlled_u_cnot_and_toffoli():
    cx = r.build_matrix(r.controlled_u(1, core.pauli_x())).matrix
    assert np.array_equal(cx, core.cnot().matrix)
    tof = r.build_matrix(r.controlled_u(2, core.pauli_x())).matrix
    want = np.eye(8)
    want[6:, 6:] = [[0, 1], [1, 0]]
    assert np.array_equal(tof, want)


def test_controlled_u_acts_only_on_all_ones():
    rng = r.make_rng(4)
    u = GateMatrix(r.haar_unitary(2, rng))
    mat = r.build_matrix(r.controlled_u(2, u)).matrix
    psi = r.haar_unitary(2, rng)[:, 0]
    for j in range(4):
        ej = np.eye(4)[j]
        out = mat @ np.kron(ej, psi)
        want = np.kron(ej, u.matrix @ psi if j == 3 else psi)
        assert np.max(np.abs(out - want)) < 1e-12


def test_controlled_u_errors():
    with pytest.raises(DomainError):
        r.controlled_u(0, core.pauli_x())
    with pytest.raises(DomainError):
        r.controlled_u(1, core.cnot())


def test_multi_controlled_z():
    assert np.array_equal(r.build_matrix(r.multi_controlled_z(2)).matrix, np.diag([1, 1, 1, -1]))


def test_json_round_trip():
    op = r.random_restricted(3, 3, 1, 1)
    doc = json.loads(op.to_json())
    assert set(doc) == {"version", "d", "N", "M", "f", "blocks"}
    assert doc["version"] == 1 and (doc["d"], doc["N"], doc["M"]) == (3, 1, 1)
    assert len(doc["blocks"]) == 3 and len(doc["blocks"][0]) == 9
    assert all(len(z) == 2 for z in doc["blocks"][0])
    back = r.RestrictedOperation.from_json(op.to_json())
    assert back.f == op.f
    assert np.array_equal(r.build_matrix(back).matrix, r.build_matrix(op).matrix)


def test_json_rejects_other_versions():
    doc = r.identity_op(2, 1, 0).to_dict()
    doc["version"] = 2
    with pytest.raises(DomainError):
        r.RestrictedOperation.from_dict(doc)


def test_restricted_operation_validates_blocks():
    eye = GateMatrix(np.eye(2))
    with pytest.raises(DomainError):
        r.RestrictedOperation(2, 1, 1, r.Permutation((0, 1)), (eye,))
    with pytest.raises(DomainError):
        r.RestrictedOperation(2, 1, 0, r.Permutation((0, 1)), (eye, eye))
    with pytest.raises(DomainError):
        r.RestrictedOperation(2, 2, 0, r.Permutation((0, 1)), (eye, eye))
