"""SELECT, state-preparation oracles and the FOQCS-LCU block encoding.

Register layout of an encoding: optional ``control`` (1 qubit), then ``i``
(X exponents), ``j`` (Z exponents) and ``system``, each of ``n`` qubits.

The Gamma gate of the model oracles is emitted in its two-CNOT form
``Ry_b(beta) CX(a,b) Ry_b(-beta) CX(b,a)`` with ``beta = (pi - theta)/2``.  On a
target in ``|0>`` it equals ``CRy(a->b, theta)`` followed by ``CX(b->a)``, and
every Gamma in these oracles acts on a fresh target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit_ir import (X, Circuit, Gate, Register, barrier, cnot, controlled_gates,
                         cry, cz, p, postselect, ry, x)
from .pauli_algebra import CoefficientTable, ModelSpec, build_table

RIGHT, LEFT = "right", "left"
EXACT_LIMIT = 6


def _side(side: str) -> str:
    s = str(side).lower()
    if s not in (RIGHT, LEFT):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")
    return s


@dataclass(frozen=True)
class OracleSplit:
    activation: Circuit
    body: Circuit


@dataclass(frozen=True)
class FoqcsCircuit:
    circuit: Circuit
    lam: float
    table: CoefficientTable


def build_select(n: int) -> Circuit:
    """CNOT layer ``i_l -> system_l`` then CZ layer ``(j_l, system_l)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    gates = [cnot(l, 2 * n + l) for l in range(n)]
    gates += [cz(n + l, 2 * n + l) for l in range(n)]
    return Circuit.from_sizes([("i", n), ("j", n), ("system", n)], gates)


def gamma(a: int, b: int, theta: float) -> list[Gate]:
    beta = (math.pi - theta) / 2
    return [ry(b, beta), cnot(a, b), ry(b, -beta), cnot(b, a)]


def _arccos_sqrt(num: float, den: float) -> float | None:
    """``2 arccos(sqrt(num/den))``; ``None`` for the 0/0 case."""
    if den == 0:
        if num != 0:
            raise ValueError("nonzero weight over zero total")
        return None
    return 2 * math.acos(min(1.0, max(-1.0, math.sqrt(num / den))))


def _sgn(v: float) -> int:
    return 1 if v >= 0 else -1


def _branch_angle(theta: float, s_a: int, s_b: int) -> float:
    """Sign/2pi table for the first rotation: ``s_a`` stays on i, ``s_b`` moves to j."""
    if s_b >= 0:
        return theta if s_a >= 0 else 2 * math.pi - theta
    return theta + 2 * math.pi if s_a < 0 else -theta


def model_angles(spec: ModelSpec, side: str = RIGHT) -> dict:
    """Rotation angles of the model oracle; ``None`` marks an omitted section."""
    side = _side(side)
    n = spec.n
    lam = build_table(spec).lam
    if lam == 0:
        raise ValueError("model has no nonzero terms")
    if spec.kind == "xyz":
        jx, jy, jz, g = spec.jx, spec.jy, spec.jz, spec.g
    elif spec.kind == "xxz":
        jx, jy, jz, g = spec.j, spec.j, spec.jz, 0.0
    elif spec.kind == "ising":
        jx, jy, jz, g = spec.j, 0.0, 0.0, spec.g
    else:
        raise ValueError(f"no model oracle for kind {spec.kind!r}")
    s_a = _sgn(jx) if jx != 0 else _sgn(-jy)
    s_b = _sgn(g) if g != 0 else _sgn(jz)
    signed = side == RIGHT

    first = _arccos_sqrt((abs(jx) + abs(jy)) * (n - 1), lam)
    if signed:
        first = _branch_angle(first, s_a, s_b)
    dicke = [_arccos_sqrt(1, n - l) for l in range(1, n - 1)]
    out = {"first": first, "dicke": dicke}
    if spec.kind == "xyz":
        out["z0"] = _arccos_sqrt(abs(g), abs(g) * n + abs(jz) * (n - 1))
        t3 = _arccos_sqrt(abs(g), abs(g) + abs(jz))
        if t3 is not None and signed and s_b * _sgn(jz) < 0:
            t3 = -t3
        out["zz"] = t3
    elif spec.kind == "ising":
        out["z0"] = _arccos_sqrt(1, n)
    if spec.kind == "xyz":
        t4 = _arccos_sqrt(abs(jx), abs(jx) + abs(jy))
        if t4 is not None and signed and s_a * _sgn(-jy) < 0:
            t4 = -t4
        out["yy"] = t4
    elif spec.kind == "xxz":
        out["yy"] = -math.pi / 2 if signed else math.pi / 2
    return out


def build_pr_model(spec: ModelSpec, side: str = RIGHT) -> Circuit:
    """Model-specific oracle on registers ``i`` and ``j`` (2n qubits)."""
    if spec.kind not in ("xyz", "xxz", "ising"):
        raise ValueError(f"no model oracle for kind {spec.kind!r}")
    n = spec.n
    if n < 2:
        raise ValueError("model oracles need n >= 2")
    ang = model_angles(spec, side)
    i = list(range(n))
    j = list(range(n, 2 * n))
    gates: list[Gate] = [x(i[1])]

    def gam(a, b, theta):
        if theta is not None:
            gates.extend(gamma(a, b, theta))

    gam(i[1], j[1] if spec.kind == "xxz" else j[0], ang["first"])
    for l in range(1, n - 1):
        gam(i[l], i[l + 1], ang["dicke"][l - 1])
    if spec.kind == "xxz":
        for l in range(1, n - 1):
            gam(j[l], j[l + 1], ang["dicke"][l - 1])
    else:
        gam(j[0], j[1], ang["z0"])
        for l in range(1, n - 1):
            gam(j[l], j[l + 1], ang["dicke"][l - 1])
    if spec.kind == "xyz" and ang["zz"] is not None:
        gates += [cry(j[l + 1], j[l], ang["zz"]) for l in range(n - 1)]
        gates += [cnot(j[l + 1], j[l]) for l in reversed(range(n - 1))]
    if spec.kind in ("xyz", "xxz") and ang["yy"] is not None:
        gates += [cry(i[l], j[l], ang["yy"]) for l in range(1, n)]
    for l in range(n - 1):
        gates.append(cnot(i[l + 1], i[l]))
        if spec.kind in ("xyz", "xxz"):
            gates.append(cnot(j[l + 1], j[l]))
    return Circuit.from_sizes([("i", n), ("j", n)], gates)


def split_activation(pr: Circuit) -> OracleSplit:
    """Separate the leading X on ``i[1]`` from the rest of a model oracle."""
    i1 = pr.reg("i")[1]
    if not pr.gates or pr.gates[0] != Gate(X, (i1,)):
        raise ValueError("oracle does not start with the activation X on i[1]")
    return OracleSplit(pr.with_gates(pr.gates[:1]), pr.with_gates(pr.gates[1:]))


def build_controlled_pr(spec: ModelSpec, side: str = RIGHT) -> Circuit:
    """Model oracle whose activation X is driven by a leading ``control`` qubit."""
    pr = build_pr_model(spec, side)
    split = split_activation(pr)
    n = spec.n
    gates = [cnot(0, 1 + pr.reg("i")[1])] + _shift(split.body.gates, 1)
    return Circuit.from_sizes([("control", 1), ("i", n), ("j", n)], gates)


# -- generic state preparation -----------------------------------------------------

def _gray(k: int) -> int:
    return k ^ (k >> 1)


def uniformly_controlled_ry(controls: Sequence[int], target: int, angles: Sequence[float]) -> list[Gate]:
    """Multiplexed Ry: pattern ``c`` of the controls (first control = MSB) applies ``angles[c]``."""
    k = len(controls)
    angles = np.asarray(angles, dtype=float)
    if k == 0:
        return [ry(target, angles[0])] if angles[0] != 0 else []
    size = 2**k
    out: list[Gate] = []
    for r in range(size):
        g = _gray(r)
        coeff = sum(angles[c] * (-1) ** bin(c & g).count("1") for c in range(size)) / size
        out.append(ry(target, coeff))
        flip = _gray(r) ^ _gray((r + 1) % size)
        pos = flip.bit_length() - 1
        out.append(cnot(controls[k - 1 - pos], target))
    return out


def _walsh_phase_gates(phases: np.ndarray, qubits: Sequence[int]) -> list[Gate]:
    """Diagonal ``diag(exp(i phases))`` exactly, global phase included."""
    m = len(qubits)
    size = 2**m
    coeff = np.array(phases, dtype=float)
    h_ = 1
    while h_ < size:  # fast Walsh-Hadamard transform
        for s in range(0, size, 2 * h_):
            a = coeff[s:s + h_].copy()
            b = coeff[s + h_:s + 2 * h_].copy()
            coeff[s:s + h_] = a + b
            coeff[s + h_:s + 2 * h_] = a - b
        h_ *= 2
    coeff /= size
    out: list[Gate] = []
    glob = coeff[0]
    for mask in range(1, size):
        c = coeff[mask]
        if abs(c) < 1e-15:
            continue
        sel = [qubits[k] for k in range(m) if (mask >> (m - 1 - k)) & 1]
        chain = [cnot(sel[k], sel[k + 1]) for k in range(len(sel) - 1)]
        # exp(i c Z) = exp(i c) P(-2c)
        out += chain + [p(sel[-1], -2 * c)] + chain[::-1]
        glob += c
    if abs(glob) > 1e-15:
        q = qubits[0]
        out += [p(q, glob), x(q), p(q, glob), x(q)]
    return out


def state_prep_gates(amplitudes: np.ndarray, qubits: Sequence[int]) -> list[Gate]:
    """Binary-tree synthesis of an arbitrary normalized state from ``|0...0>``."""
    m = len(qubits)
    amps = np.asarray(amplitudes, dtype=complex)
    if amps.size != 2**m:
        raise ValueError("amplitude vector has the wrong size")
    mags = np.abs(amps)
    gates: list[Gate] = []
    for level in range(m):
        blocks = mags.reshape(2**level, 2, -1)
        r0 = np.linalg.norm(blocks[:, 0, :], axis=1)
        r1 = np.linalg.norm(blocks[:, 1, :], axis=1)
        angles = 2 * np.arctan2(r1, r0)
        if np.any(angles != 0):
            gates += uniformly_controlled_ry(list(qubits[:level]), qubits[level], angles)
    phases = np.where(mags > 0, np.angle(amps), 0.0)
    if np.any(phases != 0):
        gates += _walsh_phase_gates(phases, qubits)
    return gates


def oracle_state(table: CoefficientTable, side: str = RIGHT) -> np.ndarray:
    """Target amplitudes over ``|i>|j>`` (i register first)."""
    side = _side(side)
    n = table.n
    lam = table.lam
    out = np.zeros(4**n, dtype=complex)
    for (i, j), a in table.entries.items():
        mag = math.sqrt(abs(a) / lam)
        out[(i << n) | j] = mag * (a / abs(a) if side == RIGHT else 1.0)
    return out


def build_pr_exact(table: CoefficientTable, side: str = RIGHT) -> Circuit:
    if table.n > EXACT_LIMIT:
        raise ValueError(f"generic oracle limited to n <= {EXACT_LIMIT}")
    if len(table) == 0:
        raise ValueError("empty coefficient table")
    n = table.n
    gates = state_prep_gates(oracle_state(table, side), list(range(2 * n)))
    return Circuit.from_sizes([("i", n), ("j", n)], gates)


# -- encodings ---------------------------------------------------------------------

def _oracles(spec: ModelSpec) -> tuple[Circuit, Circuit]:
    if spec.named:
        return build_pr_model(spec, RIGHT), build_pr_model(spec, LEFT)
    table = build_table(spec)
    return build_pr_exact(table, RIGHT), build_pr_exact(table, LEFT)


def _shift(gates, offset):
    return [g.remap({q: q + offset for q in g.qubits}) for g in gates]


def controlled_from_decomposition(parts: Sequence[tuple[Circuit, Circuit]],
                                  fixed: Sequence[int] | None = None,
                                  check: bool = True) -> Circuit:
    """Control only each ``A`` factor of ``B_s A_s ... B_1 A_1``.

    Valid on inputs ``control (x) |xi>`` when every ``B`` fixes ``|xi>``; ``fixed``
    lists the qubits that are ``|0>`` in ``|xi>`` (default: all), the rest are free.
    The control is prepended as register ``control``.
    """
    if not parts:
        raise ValueError("no parts")
    width = parts[0][0].num_qubits
    for a, b in parts:
        if a.num_qubits != width or b.num_qubits != width:
            raise ValueError("all parts must act on the same qubits")
    fixed = list(range(width)) if fixed is None else list(fixed)
    if check and width <= 14:
        _check_fixed_point([b for _, b in parts], fixed, width)
    gates: list[Gate] = []
    for a, b in parts:
        gates += controlled_gates(_shift(a.body().gates, 1), 0)
        gates += _shift(b.body().gates, 1)
    ref = parts[0][0]
    regs = [Register("control", (0,))] + [Register(r.name, tuple(q + 1 for q in r.qubits))
                                         for r in ref.registers]
    if not ref.registers:
        regs.append(Register("target", tuple(range(1, width + 1))))
    return Circuit(width + 1, tuple(regs), tuple(gates))


def _check_fixed_point(bs: Sequence[Circuit], fixed: Sequence[int], width: int):
    from .simulator import apply_batch

    free = [q for q in range(width) if q not in set(fixed)]
    rng = np.random.default_rng(7)
    samples = 3 if free else 1
    vecs = []
    for _ in range(samples):
        local = rng.normal(size=2 ** len(free)) + 1j * rng.normal(size=2 ** len(free))
        local /= np.linalg.norm(local)
        full = np.zeros(2**width, dtype=complex)
        for k, a in enumerate(local):
            idx = 0
            for pos, q in enumerate(free):
                if (k >> (len(free) - 1 - pos)) & 1:
                    idx |= 1 << (width - 1 - q)
            full[idx] = a
        vecs.append(full)
    ref = np.stack(vecs, axis=1)
    for b in bs:
        out = apply_batch(b.body(), ref)
        if not np.allclose(out, ref, atol=1e-10):
            raise ValueError("a B factor does not fix the reference state")


def build_foqcs(spec: ModelSpec, controlled: bool = False) -> FoqcsCircuit:
    """``PL^dag SELECT PR`` with barriers between the three stages.

    Controlled named models drive only the activation X of each oracle from the
    control qubit; custom models control the whole oracles.
    """
    n = spec.n
    table = build_table(spec)
    pr, pl = _oracles(spec)
    pl_dag = pl.inverse()
    sel = build_select(n)
    off = 1 if controlled else 0
    sizes = ([("control", 1)] if controlled else []) + [("i", n), ("j", n), ("system", n)]
    width = 3 * n + off
    everything = list(range(width))
    if controlled and spec.named:
        pr_s = split_activation(pr)
        i1 = off + pr.reg("i")[1]
        gates = [cnot(0, i1)] + _shift(pr_s.body.gates, off)
        gates.append(barrier(everything))
        gates += _shift(sel.gates, off)
        gates.append(barrier(everything))
        gates += _shift(pl_dag.gates[:-1], off)
        if pl_dag.gates[-1] != Gate(X, (pl.reg("i")[1],)):
            raise ValueError("left oracle does not end with its activation")
        gates.append(cnot(0, i1))
    elif controlled:
        full = Circuit.from_sizes([("i", n), ("j", n), ("system", n)])
        a1 = full.with_gates(pr.gates)
        b1 = full.with_gates(sel.gates)
        a2 = full.with_gates(pl_dag.gates)
        c = controlled_from_decomposition([(a1, b1), (a2, full)], fixed=range(2 * n))
        gates = list(c.gates)
    else:
        gates = list(pr.gates) + [barrier(everything)] + list(sel.gates)
        gates += [barrier(everything)] + list(pl_dag.gates)
    gates += [postselect(q) for q in range(off, off + 2 * n)]
    return FoqcsCircuit(Circuit.from_sizes(sizes, gates), table.lam, table)
