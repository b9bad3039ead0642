"""Two-party protocols over one global state vector.

Alice and Bob share a single :class:`~remoteop.core.StateVector`; every qudit
carries a label and an owner. A party may only act on qudits it currently
holds, and every transfer of quantum or classical data between the parties is
metered in a :class:`ResourceVector`. Everything a run does is appended to a
:class:`Transcript`, which can be replayed to re-check locality.
"""

from __future__ import annotations

import copy
import enum
import json
from dataclasses import asdict, dataclass, field
from typing import Any, Iterator, Sequence

import numpy as np

from . import core
from .core import (
    EnumerateAll,
    Forced,
    GateMatrix,
    MeasurementOutcome,
    Policy,
    Sample,
    StateVector,
)
from .errors import DomainError, LocalityError, UnsupportedError
from .restricted import RestrictedOperation, build_matrix, controlled_u, multi_controlled_z
from .rng import derive_seed

ALICE = "alice"
BOB = "bob"
PARTIES = (ALICE, BOB)


class Case(str, enum.Enum):
    """Initial placement of the A register."""

    SPLIT = "split"  # B at Bob, A at Alice
    BOB_HOLDS_ALL = "bob_holds_all"  # B and A at Bob
    MZERO = "mzero"  # no A register

    @classmethod
    def parse(cls, value: str | Case) -> Case:
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "").replace("_", "")
        for c in cls:
            if c.value.replace("_", "") == key:
                return c
        raise DomainError(f"unknown case {value!r}")


def _other(party: str) -> str:
    return BOB if party == ALICE else ALICE


def cbits_for(d: int, n: int) -> int:
    """ceil(n * log2(d)): bits needed to name one of d**n outcomes."""
    return (d**n - 1).bit_length()


@dataclass
class ResourceVector:
    qudits_b_to_a: int = 0
    qudits_a_to_b: int = 0
    cbits_b_to_a: int = 0
    cbits_a_to_b: int = 0
    ebits: int = 0

    def __post_init__(self):
        for k, v in asdict(self).items():
            if v < 0:
                raise DomainError(f"{k} must be non-negative, got {v}")

    @property
    def qudits(self) -> int:
        return self.qudits_b_to_a + self.qudits_a_to_b

    @property
    def cbits(self) -> int:
        return self.cbits_b_to_a + self.cbits_a_to_b

    def as_dict(self) -> dict[str, int]:
        return asdict(self)

    def __add__(self, other: ResourceVector) -> ResourceVector:
        return ResourceVector(**{k: v + getattr(other, k) for k, v in asdict(self).items()})

    def __sub__(self, other: ResourceVector) -> ResourceVector:
        return ResourceVector(**{k: v - getattr(other, k) for k, v in asdict(self).items()})


@dataclass(frozen=True)
class PartyView:
    party: str
    owned: frozenset


@dataclass(frozen=True)
class Message:
    direction: str  # "alice->bob" or "bob->alice"
    kind: str  # "qudits", "cbits" or "ebit"
    payload: Any


@dataclass(frozen=True)
class Event:
    step: int
    party: str
    kind: str
    targets: tuple = ()
    name: str | None = None
    payload: Any = None
    outcome: int | None = None
    ledger: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {"step": self.step, "party": self.party, "kind": self.kind}
        if self.name is not None:
            doc["name"] = self.name
        if self.targets:
            doc["targets"] = list(self.targets)
        if self.payload is not None:
            doc["payload"] = self.payload
        if self.outcome is not None:
            doc["outcome"] = self.outcome
        doc["ledger"] = dict(self.ledger)
        return doc

    def to_text(self) -> str:
        head = f"[{self.step}] {self.party:<5} {self.kind:<8}"
        parts = []
        if self.name:
            parts.append(self.name)
        if self.targets:
            parts.append("on " + ",".join(self.targets))
        if self.payload is not None:
            parts.append(json.dumps(self.payload, sort_keys=True))
        if self.outcome is not None:
            parts.append(f"-> {self.outcome}")
        return f"{head} {' '.join(parts)}".rstrip()


class Transcript:
    def __init__(self, events: Sequence[Event] = ()):
        self.events: list[Event] = list(events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def of_kind(self, kind: str) -> list[Event]:
        return [e for e in self.events if e.kind == kind]

    def messages(self) -> list[Message]:
        out = []
        for e in self.events:
            if e.kind == "send":
                kind = e.payload["type"]
                body = e.payload.get("labels", e.payload.get("bits"))
                out.append(Message(f"{e.party}->{_other(e.party)}", kind, body))
        return out

    def to_dicts(self) -> list[dict]:
        return [e.to_dict() for e in self.events]

    def to_json(self) -> str:
        return json.dumps({"version": 1, "events": self.to_dicts()}, sort_keys=True)

    def to_text(self) -> str:
        return "\n".join(e.to_text() for e in self.events)


def verify_locality(transcript: Transcript) -> None:
    """Replay ownership changes and check every local action against them.

    Raises :class:`LocalityError` on the first violation.
    """
    owner: dict[str, str] = {}
    for e in transcript:
        if e.kind == "init":
            owner = dict(e.payload["owners"])
        elif e.kind in ("allocate", "ebit"):
            owner.update(e.payload["owners"])
        elif e.kind in ("gate", "measure", "discard"):
            bad = [t for t in e.targets if owner.get(t) != e.party]
            if bad:
                raise LocalityError(f"step {e.step}: {e.party} acted on {bad} without holding them")
            if e.kind == "discard":
                for t in e.targets:
                    del owner[t]
        elif e.kind == "send" and e.payload["type"] == "qudits":
            for t in e.payload["labels"]:
                if owner.get(t) != e.party:
                    raise LocalityError(f"step {e.step}: {e.party} sent {t} without holding it")
                owner[t] = _other(e.party)
        elif e.kind == "relabel":
            old, new = e.payload["from"], e.payload["to"]
            if owner.get(old) != e.party:
                raise LocalityError(f"step {e.step}: {e.party} relabelled {old} without holding it")
            owner[new] = owner.pop(old)


class Session:
    """Global register plus ownership, ledger and transcript for one run."""

    def __init__(self, state: StateVector, labels: Sequence[str], owners: Sequence[str],
                 seed: int = 0, record: bool = False):
        if len(labels) != state.n or len(owners) != state.n:
            raise DomainError("need one label and one owner per qudit")
        if len(set(labels)) != len(labels):
            raise DomainError(f"duplicate labels {labels}")
        for p in owners:
            if p not in PARTIES:
                raise DomainError(f"unknown party {p!r}")
        self.state = state
        self.labels = list(labels)
        self.owner = dict(zip(labels, owners))
        self.ledger = ResourceVector()
        self.transcript = Transcript()
        self.step = 0
        self.seed = seed
        self._draws = 0
        self.record = record
        self.snapshots: list[tuple[int, list[str], StateVector]] = []
        self._log("-", "init", payload={"owners": dict(self.owner)})

    @property
    def d(self) -> int:
        return self.state.d

    def view(self, party: str) -> PartyView:
        return PartyView(party, frozenset(l for l, p in self.owner.items() if p == party))

    def fork(self) -> Session:
        return copy.deepcopy(self)

    def _log(self, party, kind, **kw):
        self.transcript.events.append(
            Event(self.step, party, kind, ledger=self.ledger.as_dict(), **kw)
        )
        if self.record:
            self.snapshots.append((self.step, list(self.labels), self.state))

    def _index(self, labels: Sequence[str]) -> list[int]:
        try:
            return [self.labels.index(l) for l in labels]
        except ValueError as exc:
            raise DomainError(f"unknown qudit label in {list(labels)}") from exc

    def _check_owned(self, party: str, labels: Sequence[str]):
        bad = [l for l in labels if self.owner.get(l) != party]
        if bad:
            raise LocalityError(f"{party} does not hold {bad}")

    def _next_seed(self) -> int:
        self._draws += 1
        return derive_seed(self.seed, self._draws)

    def allocate(self, party: str, label: str, value: int = 0):
        if label in self.owner:
            raise DomainError(f"label {label!r} already in use")
        self.state = self.state.tensor(core.basis_state(self.d, 1, value))
        self.labels.append(label)
        self.owner[label] = party
        self._log(party, "allocate", targets=(label,), payload={"owners": {label: party}, "value": value})

    def share_ebit(self, labels: dict[str, str]):
        """Mint one Bell pair, one qubit per party, and charge one ebit."""
        if self.d != 2:
            raise UnsupportedError("Bell pairs are only modelled for qubits")
        if sorted(labels) != sorted(PARTIES):
            raise DomainError("need one label for each party")
        for l in labels.values():
            if l in self.owner:
                raise DomainError(f"label {l!r} already in use")
        bell = StateVector(2, 2, np.array([1, 0, 0, 1]) / np.sqrt(2))
        self.state = self.state.tensor(bell)
        self.labels += [labels[ALICE], labels[BOB]]
        self.owner[labels[ALICE]] = ALICE
        self.owner[labels[BOB]] = BOB
        self.ledger.ebits += 1
        self._log("-", "ebit", payload={"owners": {v: k for k, v in labels.items()}})

    def apply(self, party: str, gate: GateMatrix, targets: Sequence[str], name: str | None = None):
        self._check_owned(party, targets)
        self.state = core.apply_gate(self.state, gate, self._index(targets))
        self._log(party, "gate", targets=tuple(targets), name=name or gate.name)

    def measure(self, party: str, targets: Sequence[str], policy: Policy) -> list[tuple[MeasurementOutcome, Session]]:
        """Measure and fork: one new session per returned branch."""
        self._check_owned(party, targets)
        branches = []
        for outcome, post in core.measure(self.state, self._index(targets), policy):
            s = self.fork()
            s.state = post
            s._log(party, "measure", targets=tuple(targets), outcome=outcome.value,
                   payload={"probability": round(outcome.probability, 12)})
            branches.append((outcome, s))
        return branches

    def measure_one(self, party: str, targets: Sequence[str], outcome: int | None = None) -> int:
        """Measure in place, forcing ``outcome`` or sampling from the session seed."""
        policy = Forced(outcome) if outcome is not None else Sample(self._next_seed())
        ((result, branch),) = self.measure(party, targets, policy)
        self.state = branch.state
        self.transcript = branch.transcript
        self.snapshots = branch.snapshots
        return result.value

    def discard(self, party: str, targets: Sequence[str]):
        self._check_owned(party, targets)
        self.state = core.discard(self.state, self._index(targets))
        for l in targets:
            self.labels.remove(l)
            del self.owner[l]
        self._log(party, "discard", targets=tuple(targets))

    def relabel(self, party: str, old: str, new: str):
        self._check_owned(party, [old])
        if new in self.owner:
            raise DomainError(f"label {new!r} already in use")
        self.labels[self.labels.index(old)] = new
        self.owner[new] = self.owner.pop(old)
        self._log(party, "relabel", payload={"from": old, "to": new})

    def send_qudits(self, sender: str, labels: Sequence[str]):
        self._check_owned(sender, labels)
        receiver = _other(sender)
        for l in labels:
            self.owner[l] = receiver
        if sender == BOB:
            self.ledger.qudits_b_to_a += len(labels)
        else:
            self.ledger.qudits_a_to_b += len(labels)
        self._log(sender, "send", payload={"type": "qudits", "labels": list(labels)})

    def send_bits(self, sender: str, bits: str) -> str:
        if set(bits) - {"0", "1"}:
            raise DomainError(f"not a bit string: {bits!r}")
        if sender == BOB:
            self.ledger.cbits_b_to_a += len(bits)
        else:
            self.ledger.cbits_a_to_b += len(bits)
        self._log(sender, "send", payload={"type": "cbits", "bits": bits})
        return bits

    def state_of(self, labels: Sequence[str]) -> StateVector:
        """The global state with qudits ordered as ``labels`` (which must cover all of them)."""
        if sorted(labels) != sorted(self.labels):
            raise DomainError(f"{list(labels)} does not cover the live qudits {self.labels}")
        return core.permute_qudits(self.state, self._index(labels))


@dataclass
class Branch:
    outcome: MeasurementOutcome | None
    state: StateVector
    transcript: Transcript
    ledger: ResourceVector
    snapshots: list = field(default_factory=list)


@dataclass
class RunResult:
    branches: list[Branch]

    def __iter__(self):
        return iter(self.branches)

    @property
    def state(self) -> StateVector:
        return self.branches[0].state

    @property
    def transcript(self) -> Transcript:
        return self.branches[0].transcript

    @property
    def ledger(self) -> ResourceVector:
        first = self.branches[0].ledger
        for b in self.branches[1:]:
            if b.ledger != first:
                raise RuntimeError("branches charged different resources")
        return first


def _register_labels(n: int, m: int) -> tuple[list[str], list[str]]:
    return [f"B{i + 1}" for i in range(n)], [f"A{i + 1}" for i in range(m)]


def oracle(op: RestrictedOperation, state: StateVector) -> StateVector:
    """Direct application of the dense operation to the whole register."""
    return core.apply_gate(state, build_matrix(op), range(state.n))


def run_remote_restricted(op: RestrictedOperation, case: Case | str, state: StateVector,
                          policy: Policy = EnumerateAll(), seed: int = 0,
                          record_states: bool = False) -> RunResult:
    """Alice applies ``op`` to B_1..B_N A_1..A_M without any shared entanglement.

    Bob copies his register into fresh ancillas with generalized CNOTs and
    sends the ancillas. Alice applies ``op`` to ancillas plus A, Fourier
    transforms and measures the ancillas, and reports the outcome in
    ceil(N log2 d) bits. Bob relabels with V(f) and undoes the outcome's
    phase with S^k on each qudit.
    """
    case = Case.parse(case)
    d, n, m = op.d, op.n_perm, op.m_block
    if case is Case.MZERO and m != 0:
        raise DomainError(f"case mzero needs M = 0, got M = {m}")
    if state.d != d or state.n != n + m:
        raise DomainError(f"input has d={state.d}, n={state.n}; operation needs d={d}, n={n + m}")

    b, a = _register_labels(n, m)
    c = [f"C{i + 1}" for i in range(n)]
    a_owner = BOB if case is Case.BOB_HOLDS_ALL else ALICE
    s = Session(state, b + a, [BOB] * n + [a_owner] * m, seed=seed, record=record_states)

    s.step = 1
    gcnot = core.generalized_cnot(d)
    for bi, ci in zip(b, c):
        s.allocate(BOB, ci)
        s.apply(BOB, gcnot, [bi, ci])

    s.step = 2
    s.send_qudits(BOB, c + (a if case is Case.BOB_HOLDS_ALL else []))

    s.step = 3
    s.apply(ALICE, build_matrix(op), c + a, name="U(f,G)")

    s.step = 4
    fourier = core.qft(d)
    for ci in c:
        s.apply(ALICE, fourier, [ci])

    nbits = cbits_for(d, n)
    correction = op.f.gate()
    branches = []
    for outcome, br in s.measure(ALICE, c, policy):
        br.discard(ALICE, c)

        br.step = 5
        if case is Case.BOB_HOLDS_ALL and a:
            br.send_qudits(ALICE, a)
        bits = br.send_bits(ALICE, format(outcome.value, f"0{nbits}b"))

        br.step = 6
        k = core.to_digits(int(bits, 2), d, n)
        br.apply(BOB, correction, b)
        for bi, ki in zip(b, k):
            if ki:
                br.apply(BOB, core.s_power(d, ki), [bi])
        branches.append(Branch(outcome, br.state_of(b + a), br.transcript, br.ledger, br.snapshots))
    return RunResult(branches)


def run_simple_swap(op: RestrictedOperation, state: StateVector, seed: int = 0) -> RunResult:
    """Bob ships every qudit to Alice, who applies ``op`` and ships them back."""
    b, a = _register_labels(op.n_perm, op.m_block)
    if state.d != op.d or state.n != op.num_qudits:
        raise DomainError("input register does not match the operation")
    s = Session(state, b + a, [BOB] * state.n, seed=seed)
    s.step = 1
    s.send_qudits(BOB, b + a)
    s.step = 2
    s.apply(ALICE, build_matrix(op), b + a, name="U(f,G)")
    s.step = 3
    s.send_qudits(ALICE, b + a)
    return RunResult([Branch(None, s.state_of(b + a), s.transcript, s.ledger)])


def teleport(session: Session, label: str, outcome: int | None = None) -> tuple[Transcript, ResourceVector]:
    """Move qubit ``label`` to the other party through a freshly minted Bell pair.

    ``outcome`` forces the 2-bit Bell measurement result; by default it is
    sampled from the session seed. The qubit keeps its label. Returns the
    events and the resource delta of this transfer.
    """
    if session.d != 2:
        raise UnsupportedError("teleportation is implemented for qubits only")
    source = session.owner.get(label)
    if source is None:
        raise DomainError(f"unknown qubit {label!r}")
    receiver = _other(source)
    before = copy.deepcopy(session.ledger)
    start = len(session.transcript)

    tag = session.ledger.ebits + 1
    near, far = f"E{tag}{source[0]}", f"E{tag}{receiver[0]}"
    session.share_ebit({source: near, receiver: far})
    session.apply(source, core.cnot(), [label, near])
    session.apply(source, core.hadamard(), [label])
    k = session.measure_one(source, [label, near], outcome)
    session.discard(source, [label, near])
    m1, m2 = core.to_digits(k, 2, 2)
    session.send_bits(source, f"{m1}{m2}")
    if m2:
        session.apply(receiver, core.pauli_x(), [far])
    if m1:
        session.apply(receiver, core.pauli_z(), [far])
    session.relabel(receiver, far, label)
    return Transcript(session.transcript.events[start:]), session.ledger - before


def run_bqst(op: RestrictedOperation, state: StateVector, seed: int = 0) -> RunResult:
    """Teleport every qubit to Alice, apply ``op``, teleport everything back."""
    if op.d != 2 or state.d != 2:
        raise UnsupportedError("BQST is implemented for qubits only")
    if state.n != op.num_qudits:
        raise DomainError("input register does not match the operation")
    b, a = _register_labels(op.n_perm, op.m_block)
    s = Session(state, b + a, [BOB] * state.n, seed=seed)
    s.step = 1
    for q in b + a:
        teleport(s, q)
    s.step = 2
    s.apply(ALICE, build_matrix(op), b + a, name="U(f,G)")
    s.step = 3
    for q in b + a:
        teleport(s, q)
    return RunResult([Branch(None, s.state_of(b + a), s.transcript, s.ledger)])


def run_yang_cu(num_controls: int, u: GateMatrix, state: StateVector,
                policy: Policy = EnumerateAll(), seed: int = 0) -> RunResult:
    """Controlled-u with Bob's controls and Alice's target, one qubit and one bit of traffic.

    Bob writes the AND of his controls into an ancilla and sends it. Alice
    uses it as the control of ``u``, then measures it in the X basis and
    reports the bit. On 1, Bob removes the kicked-back phase with a
    multi-controlled Z.
    """
    if num_controls < 1:
        raise DomainError(f"need at least one control, got {num_controls}")
    if state.d != 2 or state.n != num_controls + 1:
        raise DomainError(f"input must be {num_controls + 1} qubits")
    b, a = _register_labels(num_controls, 1)
    s = Session(state, b + a, [BOB] * num_controls + [ALICE], seed=seed)

    s.step = 1
    s.allocate(BOB, "C1")
    s.apply(BOB, build_matrix(controlled_u(num_controls, core.pauli_x())), b + ["C1"], name="MCX")
    s.step = 2
    s.send_qudits(BOB, ["C1"])
    s.step = 3
    s.apply(ALICE, build_matrix(controlled_u(1, u)), ["C1"] + a, name="CU")
    s.apply(ALICE, core.hadamard(), ["C1"])

    mcz = build_matrix(multi_controlled_z(num_controls))
    branches = []
    for outcome, br in s.measure(ALICE, ["C1"], policy):
        br.discard(ALICE, ["C1"])
        br.step = 4
        bit = br.send_bits(ALICE, str(outcome.value))
        br.step = 5
        if bit == "1":
            br.apply(BOB, mcz, b, name="MCZ")
        branches.append(Branch(outcome, br.state_of(b + a), br.transcript, br.ledger))
    return RunResult(branches)


def cu_oracle(num_controls: int, u: GateMatrix, state: StateVector) -> StateVector:
    return core.apply_gate(state, build_matrix(controlled_u(num_controls, u)), range(state.n))
