import csv
import io
import json
from dataclasses import fields

import pytest
from hypothesis import given, strategies as st

from remoteop import accounting as acc, core, protocol as p, restricted as r
from remoteop.accounting import M, N, ONE, ZERO, Affine, AffineCost, Scenario, ScenarioCost
from remoteop.errors import DomainError

coef = st.integers(-6, 6)
affines = st.builds(Affine, coef, coef, coef)
nonneg = st.builds(Affine, st.integers(0, 5), st.integers(0, 5), st.integers(0, 5))


@st.composite
def qubit_costs(draw):
    return acc.qubit_cost(
        qudits_b_to_a=draw(nonneg), qudits_a_to_b=draw(nonneg),
        cbits_b_to_a=draw(nonneg), cbits_a_to_b=draw(nonneg),
    )


@st.composite
def shared_costs(draw):
    return acc.shared_cost(cbits_b_to_a=draw(nonneg), cbits_a_to_b=draw(nonneg), ebits=draw(nonneg))


@pytest.mark.parametrize("text,want", [
    ("N+4M", Affine(0, 1, 4)),
    ("-N", Affine(0, -1, 0)),
    ("2N+4M", Affine(0, 2, 4)),
    ("1", Affine(1, 0, 0)),
    ("-1", Affine(-1, 0, 0)),
    ("0", Affine()),
    ("N+2M", Affine(0, 1, 2)),
    ("3N-M+2", Affine(2, 3, -1)),
])
def test_render_and_parse(text, want):
    assert want.render() == text
    assert Affine.parse(text) == want


@given(affines)
def test_render_parse_round_trip(a):
    assert Affine.parse(a.render()) == a
    assert " " not in a.render()


@given(affines, st.integers(0, 20), st.integers(0, 20))
def test_evaluate(a, n, m):
    assert a.evaluate(n, m) == a.c0 + a.cN * n + a.cM * m


def test_scenario_invariants():
    with pytest.raises(DomainError):
        ScenarioCost(Scenario.QUBIT_TRANSMISSION, AffineCost(ebits=ONE))
    with pytest.raises(DomainError):
        ScenarioCost(Scenario.SHARED_ENTANGLEMENT, AffineCost(qudits_a_to_b=N))


def test_to_shared_examples():
    y08 = acc.to_shared_entanglement(acc.qubit_cost(qudits_b_to_a=ONE, cbits_a_to_b=ONE))
    assert (y08.cost.ebits, y08.cost.cbits) == (ONE, Affine(3))
    ours = acc.to_shared_entanglement(acc.qubit_cost(qudits_b_to_a=N, cbits_a_to_b=N))
    assert (ours.cost.ebits, ours.cost.cbits) == (N, 3 * N)
    empty = acc.to_shared_entanglement(acc.qubit_cost())
    assert empty.cost == AffineCost()
    with pytest.raises(DomainError):
        acc.to_shared_entanglement(y08)


def test_to_shared_is_directional():
    out = acc.to_shared_entanglement(acc.qubit_cost(qudits_b_to_a=N, qudits_a_to_b=M, cbits_a_to_b=N))
    assert out.cost.cbits_b_to_a == 2 * N
    assert out.cost.cbits_a_to_b == N + 2 * M


def test_to_qubit_examples():
    w06 = acc.to_qubit_transmission(acc.shared_cost(cbits_b_to_a=N, cbits_a_to_b=N, ebits=N))
    assert (w06.cost.qudits, w06.cost.cbits) == (N, 2 * N)
    e = acc.to_qubit_transmission(acc.shared_cost(cbits_b_to_a=ONE, cbits_a_to_b=ONE, ebits=ONE))
    assert (e.cost.qudits, e.cost.cbits) == (ONE, Affine(2))
    assert acc.to_qubit_transmission(acc.shared_cost()).cost == AffineCost()
    assert acc.to_qubit_transmission(acc.shared_cost(ebits=N), "alice").cost.qudits_a_to_b == N
    with pytest.raises(DomainError):
        acc.to_qubit_transmission(e)
    with pytest.raises(DomainError):
        acc.to_qubit_transmission(acc.shared_cost(), "carol")


@given(qubit_costs())
def test_conversion_composition_law(c):
    back = acc.to_qubit_transmission(acc.to_shared_entanglement(c))
    assert back.cost.qudits == c.cost.qudits
    assert back.cost.cbits == c.cost.cbits + 2 * c.cost.qudits


@given(shared_costs())
def test_to_qubit_preserves_counts(c):
    out = acc.to_qubit_transmission(c)
    assert out.cost.qudits == c.cost.ebits
    assert out.cost.cbits_b_to_a == c.cost.cbits_b_to_a
    assert out.cost.cbits_a_to_b == c.cost.cbits_a_to_b


@given(qubit_costs(), qubit_costs())
def test_gap_antisymmetry(a, b):
    assert acc.gap(a, b) == -acc.gap(b, a)
    assert acc.gap(a, a) == AffineCost()


def test_gap_examples():
    zw07 = acc.PROTOCOLS["ZW07"]
    ours = acc.PROTOCOLS["ours/bob_holds_all"]
    q = acc.gap(acc.to_qubit_transmission(zw07), ours)
    assert q.cbits.render() == "N+4M"
    zw08 = acc.PROTOCOLS["ZW08"]
    s = acc.gap(zw08, acc.to_shared_entanglement(acc.PROTOCOLS["ours/split"]))
    assert s.cbits.render() == "-N"
    with pytest.raises(DomainError):
        acc.gap(zw07, ours)


PUBLISHED_TABLES = {
    1: ([["1", "2", "1", "2"], ["1", "1", "1", "3"]], ["", "1", "", "-1"]),
    2: ([["N", "2N", "N", "2N"], ["N", "N", "N", "3N"]], ["", "N", "", "-N"]),
    3: ([["N+2M", "2N+4M", "N+2M", "2N+4M"], ["N+2M", "N", "N+2M", "3N+4M"]], ["", "N+4M", "", "-N"]),
    4: ([["N", "2N", "N", "2N"], ["N", "N", "N", "3N"]], ["", "N", "", "-N"]),
}


@pytest.mark.parametrize("table_id", [1, 2, 3, 4])
def test_tables_match_published(table_id):
    (t,) = [t for t in acc.generate_tables() if t.table_id == table_id]
    rows, gaps = PUBLISHED_TABLES[table_id]
    cells = t.render_cells()
    assert cells[:2] == rows
    assert cells[2] == gaps
    # blank gap cells really are zero
    g = t.gap_cells()
    assert g[0].is_zero() and g[2].is_zero()


def test_table4_evaluated_at_3_matches_live_run():
    t4 = acc.generate_tables()[3]
    ours = t4.evaluate(3, 0)[1]
    assert ours[:2] == [3, 3]
    op = r.random_restricted(0, 2, 3, 0)
    res = p.run_remote_restricted(op, "mzero", core.random_state(2, 3, 0), core.Sample(0))
    assert [res.ledger.qudits, res.ledger.cbits] == ours[:2]


@pytest.mark.parametrize("n", range(1, 5))
@pytest.mark.parametrize("m", range(0, 3))
def test_symbolic_costs_match_measured_ledgers(n, m):
    state = core.random_state(2, n + m, n * 10 + m)
    op = r.random_restricted(n * 10 + m, 2, n, m)
    measured = {
        "ours/split": p.run_remote_restricted(op, "split", state, core.Sample(1)).ledger,
        "ours/bob_holds_all": p.run_remote_restricted(op, "bob_holds_all", state, core.Sample(1)).ledger,
        "simple": p.run_simple_swap(op, state).ledger,
        "BQST": p.run_bqst(op, state, seed=3).ledger,
    }
    if m == 0:
        measured["ours/mzero"] = p.run_remote_restricted(op, "mzero", state, core.Sample(1)).ledger
    for key, ledger in measured.items():
        assert acc.PROTOCOLS[key].cost.evaluate(n, m) == ledger, key
    # Y08 implements CU(N-1, 1); its cost does not depend on N or M
    if n >= 2:
        res = p.run_yang_cu(n - 1, core.pauli_x(), core.random_state(2, n, 5), core.Sample(2))
        assert acc.PROTOCOLS["Y08"].cost.evaluate(n, m) == res.ledger


def test_remote_restricted_cost_qudits():
    assert acc.remote_restricted_cost("mzero", 3, 2, 0) == p.ResourceVector(qudits_b_to_a=2, cbits_a_to_b=4)
    assert acc.remote_restricted_cost("bob_holds_all", 3, 1, 2).as_dict() == {
        "qudits_b_to_a": 3, "qudits_a_to_b": 2, "cbits_b_to_a": 0, "cbits_a_to_b": 2, "ebits": 0}
    with pytest.raises(DomainError):
        acc.remote_restricted_cost("mzero", 2, 1, 1)


def test_json_render():
    doc = json.loads(acc.render_json(acc.generate_tables()))
    assert doc["version"] == 1
    assert [t["table_id"] for t in doc["tables"]] == [1, 2, 3, 4]
    t3 = doc["tables"][2]
    assert t3["gaps"] == {"qubits": "", "qubit_cbits": "N+4M", "ebits": "", "shared_cbits": "-N"}
    assert t3["rows"][1] == {"protocol": "entanglement-free", "qubits": "N+2M", "qubit_cbits": "N",
                             "ebits": "N+2M", "shared_cbits": "3N+4M"}


def test_csv_render():
    rows = list(csv.reader(io.StringIO(acc.render_csv(acc.generate_tables()))))
    assert rows[0] == ["table_id", "protocol", "qubits", "qubit_cbits", "ebits", "shared_cbits"]
    assert len(rows) == 1 + 4 * 3
    assert rows[3] == ["1", "gap", "", "1", "", "-1"]


def test_affine_cost_fields_mirror_resource_vector():
    assert [f.name for f in fields(AffineCost)] == [f.name for f in fields(p.ResourceVector)]


def test_zero_constants():
    assert ZERO.is_zero() and not ONE.is_zero()
    assert (N + M).evaluate(2, 3) == 5
    assert (2 * N).cN == 2
