"""Command-line front end.

Usage:
    remoteop verify --d 2 --n 2 --m 1 --case split --trials 20 --policy enumerate
    remoteop tables [--format text|json|csv] [--eval N=1,M=0]
    remoteop demo --d 2 --n 1 --m 0 --case mzero --op udiag --phi 0.785398 --input plus

Exit status is 0 when every check passes, 1 when a verification fails and 2
for an invalid configuration. ``REMOTEOP_CAP`` overrides the amplitude cap.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import accounting, core, protocol
from .core import EnumerateAll, Forced, Sample
from .errors import ConfigError, RemoteOpError
from .restricted import RestrictedOperation, identity_op, random_restricted, u_anti, u_diag
from .rng import derive_seed

DEFAULT_CAP = 4096
DEFAULT_TOL = 1e-10
DEFAULT_TRIALS = 20

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def amplitude_cap() -> int:
    raw = os.environ.get("REMOTEOP_CAP")
    if raw is None:
        return DEFAULT_CAP
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"REMOTEOP_CAP must be an integer, got {raw!r}") from None


@dataclass
class RunConfig:
    d: int = 2
    N: int = 1
    M: int = 0
    case: str = "split"
    seed: int = 0
    trials: int = DEFAULT_TRIALS
    policy: str = "enumerate"
    tolerance: float = DEFAULT_TOL
    format: str = "text"
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.d < 2:
            raise ConfigError(f"d must be >= 2, got {self.d}")
        if self.N < 1:
            raise ConfigError(f"N must be >= 1, got {self.N}")
        if self.M < 0:
            raise ConfigError(f"M must be >= 0, got {self.M}")
        try:
            self.case = protocol.Case.parse(self.case).value
        except RemoteOpError as exc:
            raise ConfigError(str(exc)) from None
        if self.case == "mzero" and self.M != 0:
            raise ConfigError(f"case mzero requires M = 0, got M = {self.M}")
        size = self.d ** (2 * self.N + self.M)
        if size > self.cap:
            raise ConfigError(
                f"d^(2N+M) = {self.d}^{2 * self.N + self.M} = {size} exceeds the amplitude cap {self.cap}"
            )
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")

    def measurement_policy(self, seed: int):
        return EnumerateAll() if self.policy == "enumerate" else Sample(seed)


def _load_op(path: Path | None) -> RestrictedOperation | None:
    if path is None:
        return None
    return RestrictedOperation.from_json(path.read_text())


def verify(cfg: RunConfig, op: RestrictedOperation | None = None) -> dict:
    """Run ``cfg.trials`` random operations and inputs through the protocol and check each."""
    expected = accounting.remote_restricted_cost(cfg.case, cfg.d, cfg.N, cfg.M)
    trials = []
    for t in range(cfg.trials):
        op_seed = derive_seed(cfg.seed, t, 0)
        trial_op = op if op is not None else random_restricted(op_seed, cfg.d, cfg.N, cfg.M)
        state = core.random_state(cfg.d, cfg.N + cfg.M, derive_seed(cfg.seed, t, 1))
        res = protocol.run_remote_restricted(
            trial_op, cfg.case, state, cfg.measurement_policy(derive_seed(cfg.seed, t, 2))
        )
        target = protocol.oracle(trial_op, state)
        dev = max(core.max_deviation(b.state, target) for b in res)
        ledger = res.ledger
        ok = dev < cfg.tolerance and ledger == expected
        trials.append({
            "trial": t,
            "max_deviation": dev,
            "branches": len(res.branches),
            "ledger": ledger.as_dict(),
            "ledger_ok": ledger == expected,
            "passed": ok,
        })
    return {
        "version": 1,
        "command": "verify",
        "config": {k: v for k, v in asdict(cfg).items() if k != "format"},
        "expected_ledger": expected.as_dict(),
        "trials": trials,
        "passed": all(t["passed"] for t in trials),
    }


def _ledger_str(ledger: dict) -> str:
    return (f"qudits B->A {ledger['qudits_b_to_a']}, A->B {ledger['qudits_a_to_b']}; "
            f"cbits B->A {ledger['cbits_b_to_a']}, A->B {ledger['cbits_a_to_b']}; "
            f"ebits {ledger['ebits']}")


def format_verify(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    cfg = report["config"]
    lines = []
    if fmt == "csv":
        lines.append("trial,max_deviation,branches,qudits_b_to_a,qudits_a_to_b,cbits_b_to_a,cbits_a_to_b,ebits,passed")
        for t in report["trials"]:
            led = t["ledger"]
            lines.append(",".join(str(v) for v in (
                t["trial"], f"{t['max_deviation']:.3e}", t["branches"], led["qudits_b_to_a"],
                led["qudits_a_to_b"], led["cbits_b_to_a"], led["cbits_a_to_b"], led["ebits"], t["passed"])))
        return "\n".join(lines) + "\n"
    lines.append(f"verify d={cfg['d']} N={cfg['N']} M={cfg['M']} case={cfg['case']} "
                 f"policy={cfg['policy']} seed={cfg['seed']} tolerance={cfg['tolerance']:g}")
    lines.append(f"expected ledger: {_ledger_str(report['expected_ledger'])}")
    for t in report["trials"]:
        mark = "PASS" if t["passed"] else "FAIL"
        lines.append(f"  trial {t['trial']:3d}  {mark}  max dev {t['max_deviation']:.2e}  "
                     f"branches {t['branches']:3d}  {_ledger_str(t['ledger'])}")
    n_ok = sum(t["passed"] for t in report["trials"])
    lines.append(f"{n_ok}/{len(report['trials'])} trials passed")
    return "\n".join(lines) + "\n"


def parse_eval(text: str) -> tuple[int, int]:
    vals = {"N": None, "M": 0}
    for part in text.split(","):
        key, _, value = part.partition("=")
        key = key.strip().upper()
        if key not in vals or not value.strip():
            raise ConfigError(f"bad --eval item {part!r}; expected N=<int>,M=<int>")
        vals[key] = int(value)
    if vals["N"] is None:
        raise ConfigError("--eval needs N")
    if vals["N"] < 1 or vals["M"] < 0:
        raise ConfigError("--eval needs N >= 1 and M >= 0")
    return vals["N"], vals["M"]


def cross_check(N: int, M: int, seed: int, cap: int) -> list[dict]:
    """Compare evaluated native costs with ledgers measured by live qubit runs."""
    checks = []
    runs = {"ours/split": (N, M, "split"), "ours/bob_holds_all": (N, M, "bob_holds_all"),
            "ours/mzero": (N, 0, "mzero")}
    for key, (n, m, case) in runs.items():
        if 2 ** (2 * n + m) > cap:
            continue
        op = random_restricted(derive_seed(seed, n, m), 2, n, m)
        state = core.random_state(2, n + m, derive_seed(seed, n, m, 1))
        res = protocol.run_remote_restricted(op, case, state, Sample(derive_seed(seed, n, m, 2)))
        want = accounting.PROTOCOLS[key].cost.evaluate(n, m)
        checks.append({"protocol": key, "N": n, "M": m, "measured": res.ledger.as_dict(),
                       "predicted": want.as_dict(), "match": res.ledger == want})
    if N >= 2 and 2 ** (N + 1) <= cap:
        u = core.GateMatrix(np.array([[0, 1], [1, 0]]), "X")
        state = core.random_state(2, N, derive_seed(seed, N, 3))
        res = protocol.run_yang_cu(N - 1, u, state, Sample(derive_seed(seed, N, 4)))
        want = accounting.PROTOCOLS["Y08"].cost.evaluate(N, M)
        checks.append({"protocol": "Y08", "N": N, "M": M, "measured": res.ledger.as_dict(),
                       "predicted": want.as_dict(), "match": res.ledger == want})
    return checks


def tables(fmt: str, at: tuple[int, int] | None, seed: int = 0, cap: int = DEFAULT_CAP) -> tuple[str, bool]:
    ts = accounting.generate_tables()
    checks = cross_check(*at, seed, cap) if at is not None else []
    ok = all(c["match"] for c in checks)
    if fmt == "json":
        doc = accounting.tables_to_dict(ts)
        if at is not None:
            doc["evaluated"] = accounting.tables_to_dict(ts, at)["tables"]
            doc["cross_check"] = checks
        return json.dumps(doc, indent=2, sort_keys=True) + "\n", ok
    if fmt == "csv":
        out = accounting.render_csv(ts)
        if at is not None:
            out += "\n" + accounting.render_csv(ts, at)
        return out, ok
    out = accounting.render_text(ts)
    if at is not None:
        out += "\n" + accounting.render_text(ts, at)
        if checks:
            out += "\nlive cross-check (d=2):\n"
            for c in checks:
                mark = "ok" if c["match"] else "MISMATCH"
                out += f"  {c['protocol']:<20} N={c['N']} M={c['M']}  {mark}  {_ledger_str(c['measured'])}\n"
    return out, ok


def _amp_listing(d: int, labels: list[str], state: core.StateVector, limit: int = 8) -> str:
    width = len(labels)
    nz = [i for i in np.argsort(-np.abs(state.amps), kind="stable") if abs(state.amps[i]) > 1e-12]
    nz = sorted(nz[:limit])
    terms = []
    for i in nz:
        a = state.amps[i]
        digits = "".join(str(x) for x in core.to_digits(int(i), d, width))
        terms.append(f"({a.real:+.4f}{a.imag:+.4f}j)|{digits}>")
    more = sum(abs(state.amps) > 1e-12) - len(nz)
    tail = f" + ... ({more} more)" if more > 0 else ""
    return f"[{' '.join(labels)}] " + " + ".join(terms) + tail


STEP_TITLES = {
    1: "Bob prepares ancillas and copies his register with generalized CNOTs",
    2: "Bob sends qudits to Alice",
    3: "Alice applies the operation to the ancillas and her register",
    4: "Alice Fourier transforms and measures the ancillas",
    5: "Alice reports the outcome",
    6: "Bob applies V(f) and the phase corrections",
}


def _demo_op(args, cfg: RunConfig) -> RestrictedOperation:
    if args.op_file:
        return _load_op(args.op_file)
    if args.op == "identity":
        return identity_op(cfg.d, cfg.N, cfg.M)
    if args.op in ("udiag", "uanti"):
        if (cfg.d, cfg.N, cfg.M) != (2, 1, 0):
            raise ConfigError(f"--op {args.op} is a one-qubit gate; use --d 2 --n 1 --m 0")
        return u_diag(args.phi) if args.op == "udiag" else u_anti(args.phi)
    return random_restricted(derive_seed(cfg.seed, 0, 0), cfg.d, cfg.N, cfg.M)


def demo(cfg: RunConfig, op: RestrictedOperation, input_kind: str, outcome: int | None) -> tuple[str, bool]:
    n = cfg.N + cfg.M
    if input_kind == "plus":
        state = core.StateVector(cfg.d, n, np.ones(cfg.d**n) / math.sqrt(cfg.d**n))
    else:
        state = core.random_state(cfg.d, n, derive_seed(cfg.seed, 0, 1))
    policy = Forced(outcome) if outcome is not None else Sample(derive_seed(cfg.seed, 0, 2))
    res = protocol.run_remote_restricted(op, cfg.case, state, policy, seed=cfg.seed, record_states=True)
    br = res.branches[0]
    target = protocol.oracle(op, state)
    dev = core.max_deviation(br.state, target)
    ok = dev < cfg.tolerance

    if cfg.format == "json":
        doc = {
            "version": 1,
            "command": "demo",
            "config": {k: v for k, v in asdict(cfg).items() if k not in ("format", "trials", "policy")},
            "forced_outcome": outcome,
            "operation": op.to_dict(),
            "events": br.transcript.to_dicts(),
            "outcome": br.outcome.value,
            "ledger": br.ledger.as_dict(),
            "max_deviation": dev,
            "verdict": "PASS" if ok else "FAIL",
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n", ok

    lines = [f"demo d={cfg.d} N={cfg.N} M={cfg.M} case={cfg.case}",
             "input  " + _amp_listing(cfg.d, [f"B{i + 1}" for i in range(cfg.N)] + [f"A{i + 1}" for i in range(cfg.M)], state)]
    events = br.transcript.events
    for step in range(1, 7):
        idx = [i for i, e in enumerate(events) if e.step == step]
        lines.append(f"step {step}: {STEP_TITLES[step]}")
        for i in idx:
            lines.append("   " + events[i].to_text())
        if idx and br.snapshots:
            _, labels, snap = br.snapshots[idx[-1]]
            lines.append("   state " + _amp_listing(cfg.d, labels, snap))
    lines.append("final  " + _amp_listing(cfg.d, [f"B{i + 1}" for i in range(cfg.N)] + [f"A{i + 1}" for i in range(cfg.M)], br.state))
    lines.append(f"ledger {_ledger_str(br.ledger.as_dict())}")
    lines.append(f"max deviation from direct application: {dev:.2e}")
    lines.append(f"verdict: {'PASS' if ok else 'FAIL'}")
    return "\n".join(lines) + "\n", ok


def _add_run_args(p: argparse.ArgumentParser):
    p.add_argument("--d", type=int, default=2, help="qudit dimension")
    p.add_argument("--n", type=int, default=1, help="N: qudits permuted by f (Bob's register)")
    p.add_argument("--m", type=int, default=0, help="M: qudits acted on by the blocks")
    p.add_argument("--case", default="split", help="split | bob_holds_all | mzero")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOL)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--op-file", type=Path, help="operation JSON document to use instead of a random one")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="remoteop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check the protocol against direct application")
    _add_run_args(p)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--policy", choices=("sample", "enumerate"), default="enumerate")

    p = sub.add_parser("tables", help="print the resource comparison tables")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--eval", dest="eval_at", metavar="N=..,M=..", help="also evaluate at concrete N, M")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("demo", help="print one annotated protocol run")
    _add_run_args(p)
    p.add_argument("--op", choices=("random", "identity", "udiag", "uanti"), default="random")
    p.add_argument("--phi", type=float, default=math.pi / 4)
    p.add_argument("--input", choices=("random", "plus"), default="random")
    p.add_argument("--outcome", type=int, help="force the ancilla measurement outcome")
    p.add_argument("--save-op", type=Path, help="write the operation used to this JSON file")
    return parser


def _config(args) -> RunConfig:
    return RunConfig(d=args.d, N=args.n, M=args.m, case=args.case, seed=args.seed,
                     trials=getattr(args, "trials", DEFAULT_TRIALS),
                     policy=getattr(args, "policy", "sample"), tolerance=args.tolerance,
                     format=args.format, cap=amplitude_cap())


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            cfg = _config(args)
            op = _load_op(args.op_file)
            if op is not None and (op.d, op.n_perm, op.m_block) != (cfg.d, cfg.N, cfg.M):
                raise ConfigError("operation file shape does not match --d/--n/--m")
            report = verify(cfg, op)
            sys.stdout.write(format_verify(report, cfg.format))
            return EXIT_OK if report["passed"] else EXIT_FAIL
        if args.command == "tables":
            at = parse_eval(args.eval_at) if args.eval_at else None
            out, ok = tables(args.format, at, seed=args.seed, cap=amplitude_cap())
            sys.stdout.write(out)
            return EXIT_OK if ok else EXIT_FAIL
        cfg = _config(args)
        op = _demo_op(args, cfg)
        if (op.d, op.n_perm, op.m_block) != (cfg.d, cfg.N, cfg.M):
            raise ConfigError("operation shape does not match --d/--n/--m")
        if args.save_op:
            args.save_op.write_text(op.to_json() + "\n")
        out, ok = demo(cfg, op, args.input, args.outcome)
        sys.stdout.write(out)
        return EXIT_OK if ok else EXIT_FAIL
    except ConfigError as exc:
        print(f"remoteop: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RemoteOpError as exc:
        print(f"remoteop: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
