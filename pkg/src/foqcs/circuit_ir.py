"""Gate-level circuit representation, lowering and CNOT metrics."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

X, H, RY, P = "X", "H", "RY", "P"
CNOT, CZ, CRY, SWAP = "CNOT", "CZ", "CRY", "SWAP"
BARRIER, POSTSELECT = "BARRIER", "POSTSELECT"

ONE_QUBIT = {X, H, RY, P, POSTSELECT}
TWO_QUBIT = {CNOT, CZ, CRY, SWAP}
PARAMETRIC = {RY, P, CRY}
LOWERED_BASIS = {X, H, RY, P, CNOT, BARRIER, POSTSELECT}

UNUSED = "unused"


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    param: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind in ONE_QUBIT:
            arity_ok = len(self.qubits) == 1
        elif self.kind in TWO_QUBIT:
            arity_ok = len(self.qubits) == 2
        elif self.kind == BARRIER:
            arity_ok = len(self.qubits) >= 1
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if not arity_ok:
            raise ValueError(f"{self.kind} has wrong arity {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind} repeats a qubit: {self.qubits}")
        if self.kind in PARAMETRIC:
            if self.param is None or not math.isfinite(self.param):
                raise ValueError(f"{self.kind} needs a finite angle")
            object.__setattr__(self, "param", float(self.param))
        elif self.param is not None:
            raise ValueError(f"{self.kind} takes no angle")

    def remap(self, mapping) -> "Gate":
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.param)

    def adjoint(self) -> "Gate":
        if self.kind == POSTSELECT:
            raise ValueError("post-selection has no adjoint")
        if self.kind in PARAMETRIC:
            return Gate(self.kind, self.qubits, -self.param)
        return self

    def __str__(self) -> str:
        qs = " ".join(str(q) for q in self.qubits)
        if self.param is None:
            return f"{self.kind} {qs}"
        return f"{self.kind}({self.param:.12g}) {qs}"


# constructor shorthands used by the builders
def x(q): return Gate(X, (q,))
def h(q): return Gate(H, (q,))
def ry(q, theta): return Gate(RY, (q,), theta)
def p(q, phi): return Gate(P, (q,), phi)
def cnot(c, t): return Gate(CNOT, (c, t))
def cz(a, b): return Gate(CZ, (a, b))
def cry(c, t, theta): return Gate(CRY, (c, t), theta)
def swap(a, b): return Gate(SWAP, (a, b))
def barrier(qs): return Gate(BARRIER, tuple(qs))
def postselect(q): return Gate(POSTSELECT, (q,))


@dataclass(frozen=True)
class Register:
    name: str
    qubits: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.qubits)

    def __getitem__(self, k):
        return self.qubits[k]


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    registers: tuple[Register, ...] = ()
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "registers", tuple(self.registers))
        object.__setattr__(self, "gates", tuple(self.gates))
        seen: set[int] = set()
        names = set()
        for r in self.registers:
            if r.name in names:
                raise ValueError(f"duplicate register {r.name!r}")
            names.add(r.name)
            if seen & set(r.qubits):
                raise ValueError(f"register {r.name!r} overlaps another register")
            seen |= set(r.qubits)
        if self.registers and seen != set(range(self.num_qubits)):
            raise ValueError("registers must cover every qubit exactly once")
        post = False
        for g in self.gates:
            if any(q < 0 or q >= self.num_qubits for q in g.qubits):
                raise ValueError(f"gate {g} out of range for {self.num_qubits} qubits")
            if g.kind == POSTSELECT:
                post = True
            elif post and g.kind != BARRIER:
                raise ValueError("post-selection markers must close the circuit")

    @classmethod
    def from_sizes(cls, sizes: Sequence[tuple[str, int]], gates: Iterable[Gate] = ()) -> "Circuit":
        regs, start = [], 0
        for name, size in sizes:
            regs.append(Register(name, tuple(range(start, start + size))))
            start += size
        return cls(start, tuple(regs), tuple(gates))

    def reg(self, name: str) -> Register:
        for r in self.registers:
            if r.name == name:
                return r
        raise KeyError(name)

    def has_reg(self, name: str) -> bool:
        return any(r.name == name for r in self.registers)

    def with_gates(self, gates: Iterable[Gate]) -> "Circuit":
        return Circuit(self.num_qubits, self.registers, tuple(gates))

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        return self.with_gates(self.gates + tuple(gates))

    @property
    def postselected(self) -> tuple[int, ...]:
        return tuple(g.qubits[0] for g in self.gates if g.kind == POSTSELECT)

    def body(self) -> "Circuit":
        """The circuit without its post-selection markers."""
        return self.with_gates(g for g in self.gates if g.kind != POSTSELECT)

    def inverse(self) -> "Circuit":
        """Reverse-adjoint of the unitary part."""
        return self.with_gates(g.adjoint() for g in reversed(self.body().gates))

    def __len__(self) -> int:
        return len(self.gates)

    def __str__(self) -> str:
        return "\n".join(str(g) for g in self.gates)


@dataclass(frozen=True)
class ResourceReport:
    cnot_count: int
    cnot_depth: int
    qubit_count: int
    connectivity: str = "all"

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.cnot_count, self.cnot_depth, self.qubit_count)


# -- lowering -----------------------------------------------------------------

def _next_touching(gates: Sequence[Gate], start: int, qs: set[int]) -> int | None:
    for k in range(start, len(gates)):
        g = gates[k]
        if g.kind == BARRIER:
            if qs & set(g.qubits):
                return None
            continue
        if qs & set(g.qubits):
            return k
    return None


def _merge(first: Gate, second: Gate) -> list[Gate] | None:
    """Exact two-CNOT forms of a SWAP adjacent to a CNOT or CZ on the same pair."""
    if set(first.qubits) != set(second.qubits):
        return None
    if first.kind == SWAP and second.kind == CNOT:
        c, t = second.qubits
        return [cnot(c, t), cnot(t, c)]
    if first.kind == CNOT and second.kind == SWAP:
        c, t = first.qubits
        return [cnot(t, c), cnot(c, t)]
    if first.kind == CZ and second.kind == SWAP:
        a, b = first.qubits
        return [h(a), cnot(a, b), cnot(b, a), h(b)]
    if first.kind == SWAP and second.kind == CZ:
        a, b = second.qubits
        return [h(b), cnot(b, a), cnot(a, b), h(a)]
    return None


def _expand(g: Gate) -> list[Gate]:
    if g.kind == CZ:
        a, b = g.qubits
        return [h(b), cnot(a, b), h(b)]
    if g.kind == CRY:
        c, t = g.qubits
        return [ry(t, g.param / 2), cnot(c, t), ry(t, -g.param / 2), cnot(c, t)]
    if g.kind == SWAP:
        a, b = g.qubits
        return [cnot(a, b), cnot(b, a), cnot(a, b)]
    return [g]


def lower(circuit: Circuit) -> Circuit:
    """Rewrite into {X, H, RY, P, CNOT} plus barriers and post-selection markers.

    A SWAP whose next gate on its qubit pair is a CNOT or CZ on the same pair
    (or the reverse order) is merged into two CNOTs; the rest expand directly.
    """
    gates = list(circuit.gates)
    out: list[Gate] = []
    used: set[int] = set()
    deferred: dict[int, list[Gate]] = {}
    for k, g in enumerate(gates):
        if k in used:
            out.extend(deferred.pop(k, []))
            continue
        if g.kind in (SWAP, CNOT, CZ):
            nxt = _next_touching(gates, k + 1, set(g.qubits))
            if nxt is not None and nxt not in used and (g.kind == SWAP or gates[nxt].kind == SWAP):
                merged = _merge(g, gates[nxt])
                if merged is not None:
                    # emitted at the partner's slot; gates in between act elsewhere
                    used.add(nxt)
                    deferred[nxt] = merged
                    continue
        out.extend(_expand(g))
    return circuit.with_gates(out)


def cnot_metrics(circuit: Circuit, connectivity: str = "all") -> ResourceReport:
    """CNOT count and ASAP CNOT depth; single-qubit gates are free, barriers synchronize."""
    if any(g.kind not in LOWERED_BASIS for g in circuit.gates):
        circuit = lower(circuit)
    level = [0] * circuit.num_qubits
    count = 0
    for g in circuit.gates:
        if g.kind == CNOT:
            a, b = g.qubits
            t = max(level[a], level[b]) + 1
            level[a] = level[b] = t
            count += 1
        elif g.kind == BARRIER:
            m = max(level[q] for q in g.qubits)
            for q in g.qubits:
                level[q] = m
    unused = len(circuit.reg(UNUSED).qubits) if circuit.has_reg(UNUSED) else 0
    return ResourceReport(count, max(level, default=0), circuit.num_qubits - unused, connectivity)


def compose(a: Circuit, b: Circuit, qubit_map: Mapping[int, int] | Sequence[int] | None = None) -> Circuit:
    """Gates of ``a`` followed by those of ``b`` with b's qubit ``k`` placed on ``qubit_map[k]``."""
    if qubit_map is None:
        qubit_map = list(range(b.num_qubits))
    mapping = {k: qubit_map[k] for k in range(b.num_qubits)}
    if any(not 0 <= v < a.num_qubits for v in mapping.values()):
        raise ValueError("qubit map points outside the target circuit")
    if len(set(mapping.values())) != len(mapping):
        raise ValueError("qubit map is not injective")
    regs = list(a.registers)
    for r in b.registers:
        mapped = tuple(mapping[q] for q in r.qubits)
        mine = next((s for s in regs if s.name == r.name), None)
        if mine is not None:
            if not set(mapped) <= set(mine.qubits):
                raise ValueError(f"register {r.name!r} maps onto different qubits")
            continue
        for s in regs:
            if set(mapped) & set(s.qubits) and not set(mapped) <= set(s.qubits):
                raise ValueError(f"register {r.name!r} collides with {s.name!r}")
    body = [g for g in a.gates if g.kind != POSTSELECT]
    posts = [g for g in a.gates if g.kind == POSTSELECT]
    return Circuit(a.num_qubits, tuple(regs), tuple(body + [g.remap(mapping) for g in b.gates] + posts))


def sequence(*parts: Circuit) -> Circuit:
    """Compose same-width circuits in order."""
    out = parts[0]
    for c in parts[1:]:
        out = compose(out, c)
    return out


# -- generic control ------------------------------------------------------------

def _toffoli(a: int, b: int, t: int) -> list[Gate]:
    q = math.pi / 4
    return [h(t), cnot(b, t), p(t, -q), cnot(a, t), p(t, q), cnot(b, t), p(t, -q),
            cnot(a, t), p(b, q), p(t, q), h(t), cnot(a, b), p(a, q), p(b, -q), cnot(a, b)]


def controlled_gates(gates: Iterable[Gate], ctrl: int) -> list[Gate]:
    """Exactly controlled version of a gate list (phases included)."""
    out: list[Gate] = []
    for g in lower(Circuit(1 + max([ctrl] + [q for gg in gates for q in gg.qubits]), (), tuple(gates))).gates:
        if ctrl in g.qubits and g.kind != BARRIER:
            raise ValueError("control qubit is acted on by the target circuit")
        k, qs = g.kind, g.qubits
        if k == X:
            out.append(cnot(ctrl, qs[0]))
        elif k == H:
            out += [ry(qs[0], -math.pi / 4), cz(ctrl, qs[0]), ry(qs[0], math.pi / 4)]
        elif k == RY:
            out.append(cry(ctrl, qs[0], g.param))
        elif k == P:
            t, ph = qs[0], g.param
            out += [p(ctrl, ph / 2), cnot(ctrl, t), p(t, -ph / 2), cnot(ctrl, t), p(t, ph / 2)]
        elif k == CNOT:
            out += _toffoli(ctrl, qs[0], qs[1])
        elif k == BARRIER:
            out.append(barrier(sorted(set(qs) | {ctrl})))
        else:
            out.append(g)
    return out


# -- text serialization -----------------------------------------------------------

_QASM_NAMES = {X: "x", H: "h", RY: "ry", P: "p", CNOT: "cx"}
_QASM_KINDS = {v: k for k, v in _QASM_NAMES.items()}
_LINE = re.compile(r"^(\w+)(?:\(([^)]*)\))?\s+(.*);$")


def to_qasm(circuit: Circuit) -> str:
    """OpenQASM-3-style text of the lowered circuit."""
    low = lower(circuit)
    lines = ["OPENQASM 3.0;", 'include "stdgates.inc";']
    for r in circuit.registers:
        lines.append(f"// register {r.name}: {','.join(str(q) for q in r.qubits)}")
    lines.append(f"qubit[{circuit.num_qubits}] q;")
    for g in low.gates:
        args = ", ".join(f"q[{q}]" for q in g.qubits)
        if g.kind == POSTSELECT:
            lines.append(f"// postselect {args};")
        elif g.kind == BARRIER:
            lines.append(f"barrier {args};")
        elif g.param is not None:
            lines.append(f"{_QASM_NAMES[g.kind]}({g.param!r}) {args};")
        else:
            lines.append(f"{_QASM_NAMES[g.kind]} {args};")
    return "\n".join(lines) + "\n"


def parse_qasm(text: str) -> Circuit:
    num = None
    regs: list[Register] = []
    gates: list[Gate] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("OPENQASM") or line.startswith("include"):
            continue
        if line.startswith("// register "):
            name, qs = line[len("// register "):].split(":")
            regs.append(Register(name.strip(), tuple(int(v) for v in qs.split(",") if v.strip())))
            continue
        if line.startswith("// postselect "):
            line = line[3:]
        elif line.startswith("//"):
            continue
        m = re.match(r"^qubit\[(\d+)\]\s+q;$", line)
        if m:
            num = int(m.group(1))
            continue
        m = _LINE.match(line)
        if not m:
            raise ValueError(f"cannot parse line: {raw!r}")
        name, param, args = m.groups()
        qs = tuple(int(v) for v in re.findall(r"q\[(\d+)\]", args))
        if name == "postselect":
            gates.append(postselect(qs[0]))
        elif name == "barrier":
            gates.append(barrier(qs))
        elif name in _QASM_KINDS:
            gates.append(Gate(_QASM_KINDS[name], qs, float(param) if param is not None else None))
        else:
            raise ValueError(f"unsupported gate {name!r}")
    if num is None:
        raise ValueError("missing qubit declaration")
    return Circuit(num, tuple(regs), tuple(gates))
