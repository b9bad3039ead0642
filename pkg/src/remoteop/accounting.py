"""Symbolic communication costs and the comparison tables.

Costs are affine in the problem size: ``c0 + cN*N + cM*M`` per counter. Each
counter is directional where a direction exists (qubits and cbits), matching
:class:`~remoteop.protocol.ResourceVector`; table cells sum both directions.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, fields
from typing import Callable

from .errors import DomainError
from .protocol import ResourceVector, cbits_for


@dataclass(frozen=True)
class Affine:
    c0: int = 0
    cN: int = 0
    cM: int = 0

    def __add__(self, other: Affine) -> Affine:
        return Affine(self.c0 + other.c0, self.cN + other.cN, self.cM + other.cM)

    def __sub__(self, other: Affine) -> Affine:
        return Affine(self.c0 - other.c0, self.cN - other.cN, self.cM - other.cM)

    def __neg__(self) -> Affine:
        return Affine(-self.c0, -self.cN, -self.cM)

    def __mul__(self, k: int) -> Affine:
        return Affine(k * self.c0, k * self.cN, k * self.cM)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self == Affine()

    def evaluate(self, N: int, M: int = 0) -> int:
        return self.c0 + self.cN * N + self.cM * M

    def render(self) -> str:
        """Canonical form: N term, then M, then constant; no spaces, no unit coefficients."""
        out = ""
        for coef, sym in ((self.cN, "N"), (self.cM, "M"), (self.c0, "")):
            if coef == 0:
                continue
            mag = str(abs(coef)) if (abs(coef) != 1 or not sym) else ""
            sign = "-" if coef < 0 else ("+" if out else "")
            out += f"{sign}{mag}{sym}"
        return out or "0"

    def __str__(self):
        return self.render()

    @classmethod
    def parse(cls, text: str) -> Affine:
        text = text.replace(" ", "")
        if not text:
            raise DomainError("empty expression")
        c = {"": 0, "N": 0, "M": 0}
        i = 0
        while i < len(text):
            sign = 1
            if text[i] in "+-":
                sign = -1 if text[i] == "-" else 1
                i += 1
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            digits = text[i:j]
            sym = ""
            if j < len(text) and text[j] in "NM":
                sym = text[j]
                j += 1
            if not digits and not sym:
                raise DomainError(f"cannot parse {text!r}")
            c[sym] += sign * (int(digits) if digits else 1)
            i = j
        return cls(c[""], c["N"], c["M"])


ZERO = Affine()
ONE = Affine(1)
N = Affine(cN=1)
M = Affine(cM=1)


@dataclass(frozen=True)
class AffineCost:
    qudits_b_to_a: Affine = ZERO
    qudits_a_to_b: Affine = ZERO
    cbits_b_to_a: Affine = ZERO
    cbits_a_to_b: Affine = ZERO
    ebits: Affine = ZERO

    def _combine(self, other: AffineCost, fn: Callable[[Affine, Affine], Affine]) -> AffineCost:
        return AffineCost(**{f.name: fn(getattr(self, f.name), getattr(other, f.name)) for f in fields(self)})

    def __add__(self, other: AffineCost) -> AffineCost:
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other: AffineCost) -> AffineCost:
        return self._combine(other, lambda a, b: a - b)

    def __neg__(self) -> AffineCost:
        return AffineCost(**{f.name: -getattr(self, f.name) for f in fields(self)})

    @property
    def qudits(self) -> Affine:
        return self.qudits_b_to_a + self.qudits_a_to_b

    @property
    def cbits(self) -> Affine:
        return self.cbits_b_to_a + self.cbits_a_to_b

    def evaluate(self, N: int, M: int = 0) -> ResourceVector:
        vals = {f.name: getattr(self, f.name).evaluate(N, M) for f in fields(self)}
        return ResourceVector(**vals)

    def render(self) -> dict[str, str]:
        return {f.name: getattr(self, f.name).render() for f in fields(self)}


class Scenario(str, enum.Enum):
    QUBIT_TRANSMISSION = "qubit_transmission"
    SHARED_ENTANGLEMENT = "shared_entanglement"


@dataclass(frozen=True)
class ScenarioCost:
    scenario: Scenario
    cost: AffineCost

    def __post_init__(self):
        if self.scenario is Scenario.QUBIT_TRANSMISSION and not self.cost.ebits.is_zero():
            raise DomainError("a qubit-transmission cost cannot consume ebits")
        if self.scenario is Scenario.SHARED_ENTANGLEMENT and not self.cost.qudits.is_zero():
            raise DomainError("a shared-entanglement cost cannot transmit qubits")

    def cells(self) -> tuple[Affine, Affine]:
        """(qubits or ebits, cbits) as shown in a table."""
        first = self.cost.qudits if self.scenario is Scenario.QUBIT_TRANSMISSION else self.cost.ebits
        return first, self.cost.cbits


def qubit_cost(**kw) -> ScenarioCost:
    return ScenarioCost(Scenario.QUBIT_TRANSMISSION, AffineCost(**kw))


def shared_cost(**kw) -> ScenarioCost:
    return ScenarioCost(Scenario.SHARED_ENTANGLEMENT, AffineCost(**kw))


def to_shared_entanglement(cost: ScenarioCost) -> ScenarioCost:
    """Replace every transmitted qubit by a teleportation: one ebit plus two cbits in the same direction."""
    if cost.scenario is not Scenario.QUBIT_TRANSMISSION:
        raise DomainError("cost is already in the shared-entanglement scenario")
    c = cost.cost
    return shared_cost(
        cbits_b_to_a=c.cbits_b_to_a + 2 * c.qudits_b_to_a,
        cbits_a_to_b=c.cbits_a_to_b + 2 * c.qudits_a_to_b,
        ebits=c.qudits,
    )


def to_qubit_transmission(cost: ScenarioCost, distributor: str = "bob") -> ScenarioCost:
    """Replace every ebit by one qubit sent from ``distributor`` (half of a locally prepared pair)."""
    if cost.scenario is not Scenario.SHARED_ENTANGLEMENT:
        raise DomainError("cost is already in the qubit-transmission scenario")
    c = cost.cost
    if distributor == "bob":
        q = {"qudits_b_to_a": c.ebits}
    elif distributor == "alice":
        q = {"qudits_a_to_b": c.ebits}
    else:
        raise DomainError(f"unknown party {distributor!r}")
    return qubit_cost(cbits_b_to_a=c.cbits_b_to_a, cbits_a_to_b=c.cbits_a_to_b, **q)


def gap(upper: ScenarioCost, lower: ScenarioCost) -> AffineCost:
    if upper.scenario is not lower.scenario:
        raise DomainError(f"cannot compare {upper.scenario.value} with {lower.scenario.value}")
    return upper.cost - lower.cost


# Native costs of every protocol in the comparison (qubits, d = 2). Prior-work
# entries are constants taken from the literature; the rest are what the
# protocol engine measures.

PROTOCOLS: dict[str, ScenarioCost] = {
    "EJPP00": shared_cost(cbits_b_to_a=ONE, cbits_a_to_b=ONE, ebits=ONE),
    "Y08": qubit_cost(qudits_b_to_a=ONE, cbits_a_to_b=ONE),
    "W06": shared_cost(cbits_b_to_a=N, cbits_a_to_b=N, ebits=N),
    "ZW07": shared_cost(cbits_b_to_a=N + 2 * M, cbits_a_to_b=N + 2 * M, ebits=N + 2 * M),
    "ZW08": shared_cost(cbits_b_to_a=N, cbits_a_to_b=N, ebits=N),
    "ours/split": qubit_cost(qudits_b_to_a=N, cbits_a_to_b=N),
    "ours/bob_holds_all": qubit_cost(qudits_b_to_a=N + M, qudits_a_to_b=M, cbits_a_to_b=N),
    "ours/mzero": qubit_cost(qudits_b_to_a=N, cbits_a_to_b=N),
    "simple": qubit_cost(qudits_b_to_a=N + M, qudits_a_to_b=N + M),
    "BQST": shared_cost(cbits_b_to_a=2 * (N + M), cbits_a_to_b=2 * (N + M), ebits=2 * (N + M)),
}


def in_scenario(cost: ScenarioCost, scenario: Scenario) -> ScenarioCost:
    if cost.scenario is scenario:
        return cost
    if scenario is Scenario.SHARED_ENTANGLEMENT:
        return to_shared_entanglement(cost)
    return to_qubit_transmission(cost)


def remote_restricted_cost(case: str, d: int, N: int, M: int) -> ResourceVector:
    """Concrete cost of the entanglement-free protocol for qudits of dimension ``d``."""
    nbits = cbits_for(d, N)
    if case in ("split", "mzero"):
        if case == "mzero" and M != 0:
            raise DomainError("mzero needs M = 0")
        return ResourceVector(qudits_b_to_a=N, cbits_a_to_b=nbits)
    if case == "bob_holds_all":
        return ResourceVector(qudits_b_to_a=N + M, qudits_a_to_b=M, cbits_a_to_b=nbits)
    raise DomainError(f"unknown case {case!r}")


@dataclass(frozen=True)
class Row:
    protocol: str
    label: str
    qubit: ScenarioCost
    shared: ScenarioCost

    def cells(self) -> tuple[Affine, Affine, Affine, Affine]:
        return (*self.qubit.cells(), *self.shared.cells())


@dataclass(frozen=True)
class Table:
    table_id: int
    caption: str
    upper: Row
    lower: Row

    @property
    def rows(self) -> tuple[Row, Row]:
        return (self.upper, self.lower)

    def gaps(self) -> tuple[AffineCost, AffineCost]:
        return gap(self.upper.qubit, self.lower.qubit), gap(self.upper.shared, self.lower.shared)

    def gap_cells(self) -> tuple[Affine, Affine, Affine, Affine]:
        gq, gs = self.gaps()
        return gq.qudits, gq.cbits, gs.ebits, gs.cbits

    def render_cells(self) -> list[list[str]]:
        """Protocol rows then the gap row; zero resource gaps are left blank."""
        out = [[c.render() for c in r.cells()] for r in self.rows]
        g = self.gap_cells()
        out.append([
            "" if g[0].is_zero() else g[0].render(),
            g[1].render(),
            "" if g[2].is_zero() else g[2].render(),
            g[3].render(),
        ])
        return out

    def evaluate(self, N: int, M: int = 0) -> list[list[int]]:
        rows = [[c.evaluate(N, M) for c in r.cells()] for r in self.rows]
        rows.append([c.evaluate(N, M) for c in self.gap_cells()])
        return rows


def _row(key: str, label: str) -> Row:
    native = PROTOCOLS[key]
    return Row(key, label,
               in_scenario(native, Scenario.QUBIT_TRANSMISSION),
               in_scenario(native, Scenario.SHARED_ENTANGLEMENT))


def generate_tables() -> list[Table]:
    return [
        Table(1, "CU(N-1,1): N-1 controls at Bob, target at Alice",
              _row("EJPP00", "EJPP00"), _row("Y08", "Y08")),
        Table(2, "(N+M)-qubit operation; B register (N) at Bob, A register (M) at Alice",
              _row("ZW08", "ZW08"), _row("ours/split", "entanglement-free")),
        Table(3, "(N+M)-qubit operation; all N+M qubits at Bob",
              _row("ZW07", "ZW07"), _row("ours/bob_holds_all", "entanglement-free")),
        Table(4, "N-qubit operation on N qubits at Bob",
              _row("W06", "W06"), _row("ours/mzero", "entanglement-free")),
    ]


COLUMNS = ("qubits", "cbits", "ebits", "cbits")
JSON_KEYS = ("qubits", "qubit_cbits", "ebits", "shared_cbits")


def _cell_rows(table: Table, at: tuple[int, int] | None):
    names = [r.label for r in table.rows] + ["gap"]
    cells = table.render_cells() if at is None else [[str(v) for v in row] for row in table.evaluate(*at)]
    return list(zip(names, cells))


def tables_to_dict(tables: list[Table], at: tuple[int, int] | None = None) -> dict:
    doc = {"version": 1, "tables": []}
    for t in tables:
        rows = _cell_rows(t, at)
        if at is not None:
            # integers, not strings, once evaluated
            rows = [(name, vals) for (name, _), vals in zip(rows, t.evaluate(*at))]
        entry = {
            "table_id": t.table_id,
            "caption": t.caption,
            "rows": [{"protocol": name, **dict(zip(JSON_KEYS, cells))} for name, cells in rows[:-1]],
            "gaps": dict(zip(JSON_KEYS, rows[-1][1])),
        }
        if at is not None:
            entry["evaluated_at"] = {"N": at[0], "M": at[1]}
        doc["tables"].append(entry)
    return doc


def render_text(tables: list[Table], at: tuple[int, int] | None = None) -> str:
    blocks = []
    for t in tables:
        rows = _cell_rows(t, at)
        head = ["", *COLUMNS]
        body = [[name, *cells] for name, cells in rows]
        widths = [max(len(r[i]) for r in [head, *body]) for i in range(5)]

        def line(r):
            return "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()

        title = f"Table {t.table_id}: {t.caption}"
        if at is not None:
            title += f"  [N={at[0]}, M={at[1]}]"
        group = " " * widths[0] + "  " + "qubit-transmission".ljust(widths[1] + widths[2] + 2) + "  shared-entanglement"
        sep = "-" * len(line(head))
        blocks.append("\n".join([title, group.rstrip(), line(head), sep, *map(line, body[:-1]), sep, line(body[-1])]))
    return "\n\n".join(blocks) + "\n"


def render_csv(tables: list[Table], at: tuple[int, int] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table_id", "protocol", *JSON_KEYS])
    for t in tables:
        for name, cells in _cell_rows(t, at):
            w.writerow([t.table_id, name, *cells])
    return buf.getvalue()


def render_json(tables: list[Table], at: tuple[int, int] | None = None) -> str:
    return json.dumps(tables_to_dict(tables, at), indent=2, sort_keys=True) + "\n"
