"""Statevector simulation, block extraction and the measurement protocols.

Two engines share the gate semantics.  ``apply`` keeps a dense tensor and is
the reference.  The sparse engine stores only nonzero basis amplitudes as
int64 keys; block-encoding circuits keep a tiny support (ancilla registers hold
few terms, the system starts in basis states), so it reaches the 24+ qubit
polynomial circuits that a dense vector cannot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit_ir import (BARRIER, CNOT, CRY, CZ, H, P, POSTSELECT, RY, SWAP, X,
                         Circuit, Gate, h, p)

DENSE_LIMIT = 26
PRUNE = 1e-14

_HMAT = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_XMAT = np.array([[0, 1], [1, 0]], dtype=complex)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def p_matrix(phi: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * phi)]], dtype=complex)


def single_qubit_matrix(g: Gate) -> np.ndarray:
    if g.kind == X:
        return _XMAT
    if g.kind == H:
        return _HMAT
    if g.kind in (RY, CRY):
        return ry_matrix(g.param)
    if g.kind == P:
        return p_matrix(g.param)
    raise ValueError(f"{g.kind} is not a single-qubit rotation")


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    num_qubits: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**self.num_qubits:
            raise ValueError("amplitude count does not match qubit count")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        amps = np.zeros(2**n, dtype=complex)
        amps[0] = 1
        return cls(amps, n)

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"invalid basis string {bits!r}")
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1
        return cls(amps, len(bits))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.amplitudes / self.norm, self.num_qubits)


@dataclass(frozen=True)
class BlockSpec:
    """Ancillas projected onto zero and the system qubits in MSB-first order.

    The ``*_out`` fields name where the registers sit at the end of the
    circuit; they differ from the inputs only for layouts that move data.
    """

    ancilla: tuple[int, ...]
    system: tuple[int, ...]
    ancilla_out: tuple[int, ...] | None = None
    system_out: tuple[int, ...] | None = None

    def __post_init__(self):
        for name in ("ancilla", "system", "ancilla_out", "system_out"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(int(q) for q in v))
        if self.ancilla_out is None:
            object.__setattr__(self, "ancilla_out", self.ancilla)
        if self.system_out is None:
            object.__setattr__(self, "system_out", self.system)
        if set(self.ancilla) & set(self.system) or set(self.ancilla_out) & set(self.system_out):
            raise ValueError("ancilla and system registers overlap")
        if len(self.system) != len(self.system_out):
            raise ValueError("system register changes size")

    @classmethod
    def of(cls, circuit: Circuit) -> "BlockSpec":
        anc = circuit.postselected
        system = tuple(q for q in range(circuit.num_qubits) if q not in set(anc))
        return cls(anc, system)


# -- dense engine -------------------------------------------------------------------

def _slice(ndim: int, fixed: dict[int, int]):
    return tuple(fixed.get(k, slice(None)) for k in range(ndim))


def _apply_1q(psi: np.ndarray, q: int, m: np.ndarray, fixed: dict[int, int] | None = None):
    fixed = dict(fixed or {})
    s0 = _slice(psi.ndim, {**fixed, q: 0})
    s1 = _slice(psi.ndim, {**fixed, q: 1})
    a0 = psi[s0].copy()
    a1 = psi[s1].copy()
    psi[s0] = m[0, 0] * a0 + m[0, 1] * a1
    psi[s1] = m[1, 0] * a0 + m[1, 1] * a1


def _apply_dense(psi: np.ndarray, g: Gate) -> np.ndarray:
    k, qs = g.kind, g.qubits
    if k in (BARRIER, POSTSELECT):
        return psi
    if k in (X, H, RY, P):
        _apply_1q(psi, qs[0], single_qubit_matrix(g))
    elif k in (CNOT, CRY):
        m = _XMAT if k == CNOT else ry_matrix(g.param)
        _apply_1q(psi, qs[1], m, {qs[0]: 1})
    elif k == CZ:
        psi[_slice(psi.ndim, {qs[0]: 1, qs[1]: 1})] *= -1
    elif k == SWAP:
        psi = np.ascontiguousarray(np.swapaxes(psi, qs[0], qs[1]))
    else:
        raise ValueError(f"cannot simulate {k}")
    return psi


def apply_batch(circuit: Circuit, states: np.ndarray) -> np.ndarray:
    """Apply to the columns of a ``(2**N, B)`` array."""
    n = circuit.num_qubits
    if n > DENSE_LIMIT:
        raise ValueError(f"dense simulation limited to {DENSE_LIMIT} qubits")
    states = np.asarray(states, dtype=complex)
    if states.shape[0] != 2**n:
        raise ValueError("state dimension does not match circuit")
    batch = states.shape[1]
    psi = states.reshape((2,) * n + (batch,)).copy()
    for g in circuit.gates:
        psi = _apply_dense(psi, g)
    return psi.reshape(2**n, batch)


def apply(circuit: Circuit, state: StateVector) -> StateVector:
    """Exact gate-by-gate application; post-selection markers are ignored."""
    if state.num_qubits != circuit.num_qubits:
        raise ValueError(f"state has {state.num_qubits} qubits, circuit {circuit.num_qubits}")
    out = apply_batch(circuit, state.amplitudes[:, None])[:, 0]
    return StateVector(out, state.num_qubits)


def unitary(circuit: Circuit) -> np.ndarray:
    if circuit.num_qubits > 12:
        raise ValueError("dense unitary limited to 12 qubits")
    return apply_batch(circuit, np.eye(2**circuit.num_qubits, dtype=complex))


# -- sparse engine ----------------------------------------------------------------

@dataclass
class SparseState:
    """Nonzero amplitudes keyed by basis index; bits above ``num_qubits`` are labels."""

    keys: np.ndarray
    amps: np.ndarray
    num_qubits: int

    def mask(self, q: int) -> np.int64:
        return np.int64(1) << np.int64(self.num_qubits - 1 - q)


def _mix(state: SparseState, sel: np.ndarray | None, q: int, m: np.ndarray):
    mask = state.mask(q)
    if sel is None:
        keys, amps = state.keys, state.amps
        rest_k = rest_a = None
    else:
        keys, amps = state.keys[sel], state.amps[sel]
        rest_k, rest_a = state.keys[~sel], state.amps[~sel]
    bit = (keys & mask) != 0
    base = keys & ~mask
    uniq, inv = np.unique(base, return_inverse=True)
    a0 = np.zeros(uniq.size, dtype=complex)
    a1 = np.zeros(uniq.size, dtype=complex)
    a0[inv[~bit]] = amps[~bit]
    a1[inv[bit]] = amps[bit]
    new_k = np.concatenate([uniq, uniq | mask])
    new_a = np.concatenate([m[0, 0] * a0 + m[0, 1] * a1, m[1, 0] * a0 + m[1, 1] * a1])
    keep = np.abs(new_a) > PRUNE
    new_k, new_a = new_k[keep], new_a[keep]
    if rest_k is not None:
        new_k = np.concatenate([rest_k, new_k])
        new_a = np.concatenate([rest_a, new_a])
    state.keys, state.amps = new_k, new_a


def _apply_sparse(state: SparseState, g: Gate):
    k, qs = g.kind, g.qubits
    if k in (BARRIER, POSTSELECT):
        return
    if k == X:
        state.keys = state.keys ^ state.mask(qs[0])
    elif k == CNOT:
        on = (state.keys & state.mask(qs[0])) != 0
        state.keys = np.where(on, state.keys ^ state.mask(qs[1]), state.keys)
    elif k == SWAP:
        ma, mb = state.mask(qs[0]), state.mask(qs[1])
        differ = ((state.keys & ma) != 0) != ((state.keys & mb) != 0)
        state.keys = np.where(differ, state.keys ^ (ma | mb), state.keys)
    elif k == P:
        on = (state.keys & state.mask(qs[0])) != 0
        state.amps = np.where(on, state.amps * np.exp(1j * g.param), state.amps)
    elif k == CZ:
        on = ((state.keys & state.mask(qs[0])) != 0) & ((state.keys & state.mask(qs[1])) != 0)
        state.amps = np.where(on, -state.amps, state.amps)
    elif k in (H, RY):
        _mix(state, None, qs[0], single_qubit_matrix(g))
    elif k == CRY:
        sel = (state.keys & state.mask(qs[0])) != 0
        _mix(state, sel, qs[1], ry_matrix(g.param))
    else:
        raise ValueError(f"cannot simulate {k}")


def run_sparse(circuit: Circuit, state: SparseState) -> SparseState:
    out = SparseState(state.keys.copy(), state.amps.copy(), state.num_qubits)
    for g in circuit.gates:
        _apply_sparse(out, g)
    return out


def _scatter(values: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Place the MSB-first bits of ``values`` onto the listed qubit positions."""
    values = np.asarray(values, dtype=np.int64)
    keys = np.zeros_like(values)
    m = len(qubits)
    for k, q in enumerate(qubits):
        bit = (values >> np.int64(m - 1 - k)) & 1
        keys |= bit << np.int64(n - 1 - q)
    return keys


def _gather(keys: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    out = np.zeros_like(keys)
    m = len(qubits)
    for k, q in enumerate(qubits):
        bit = (keys >> np.int64(n - 1 - q)) & 1
        out |= bit << np.int64(m - 1 - k)
    return out


def _zero_mask(qubits: Sequence[int], n: int) -> np.int64:
    m = np.int64(0)
    for q in qubits:
        m |= np.int64(1) << np.int64(n - 1 - q)
    return m


def extract_block(circuit: Circuit, spec: BlockSpec | None = None) -> np.ndarray:
    """``<0|_anc U |0>_anc`` as a ``2**m x 2**m`` matrix over the system qubits."""
    spec = spec or BlockSpec.of(circuit)
    n = circuit.num_qubits
    m = len(spec.system)
    if n + m > 62:
        raise ValueError("circuit too wide for 64-bit basis keys")
    if m > 14:
        raise ValueError("block extraction limited to 14 system qubits")
    cols = np.arange(2**m, dtype=np.int64)
    keys = _scatter(cols, spec.system, n) | (cols << np.int64(n))
    state = run_sparse(circuit.body(), SparseState(keys, np.ones(cols.size, dtype=complex), n))
    low = (np.int64(1) << np.int64(n)) - 1
    basis = state.keys & low
    good = (basis & _zero_mask(spec.ancilla_out, n)) == 0
    rows = _gather(basis[good], spec.system_out, n)
    col = state.keys[good] >> np.int64(n)
    block = np.zeros((2**m, 2**m), dtype=complex)
    np.add.at(block, (rows, col), state.amps[good])
    return block


def _embedded(phi: StateVector, system: Sequence[int], n: int) -> SparseState:
    if phi.num_qubits != len(system):
        raise ValueError(f"state has {phi.num_qubits} qubits, system register {len(system)}")
    idx = np.flatnonzero(phi.amplitudes)
    return SparseState(_scatter(idx, system, n), phi.amplitudes[idx].copy(), n)


def success_probability(circuit: Circuit, phi: StateVector) -> float:
    """Probability that every post-selected ancilla reads zero, ancillas starting in zero."""
    spec = BlockSpec.of(circuit)
    n = circuit.num_qubits
    out = run_sparse(circuit.body(), _embedded(phi.normalized(), spec.system, n))
    good = (out.keys & _zero_mask(spec.ancilla, n)) == 0
    return float(np.sum(np.abs(out.amps[good]) ** 2))


def hadamard_from_controlled(controlled: Circuit, phi: StateVector, basis: str = "X",
                             shots: int | None = None, seed: int = 0) -> float:
    """``P(c=0, anc=0) - P(c=1, anc=0)`` for a circuit whose register ``control`` gates U."""
    basis = basis.upper()
    if basis not in ("X", "Y"):
        raise ValueError(f"invalid basis {basis!r}")
    c = controlled.reg("control")[0]
    gates = [h(c)] + list(controlled.body().gates)
    if basis == "Y":
        gates.append(p(c, -np.pi / 2))
    gates.append(h(c))
    test = controlled.with_gates(gates)
    anc = controlled.postselected
    system = tuple(q for q in range(controlled.num_qubits) if q not in set(anc) and q != c)
    n = controlled.num_qubits
    out = run_sparse(test, _embedded(phi.normalized(), system, n))
    good = (out.keys & _zero_mask(anc, n)) == 0
    ctrl_on = (out.keys & _zero_mask([c], n)) != 0
    prob = np.abs(out.amps) ** 2
    p0 = float(np.sum(prob[good & ~ctrl_on]))
    p1 = float(np.sum(prob[good & ctrl_on]))
    if shots is None:
        return p0 - p1
    if shots <= 0:
        raise ValueError("shots must be positive")
    rng = np.random.default_rng(seed)
    rest = max(0.0, 1.0 - p0 - p1)
    counts = rng.multinomial(shots, np.array([p0, p1, rest]) / (p0 + p1 + rest))
    return float(counts[0] - counts[1]) / shots


def hadamard_test(spec, phi: StateVector, basis: str = "X", shots: int | None = None,
                  seed: int = 0) -> float:
    """Re (X basis) or Im (Y basis) of ``<phi|H|phi> / lambda`` via the controlled encoding."""
    from .foqcs_builders import build_foqcs

    enc = build_foqcs(spec, controlled=True)
    return hadamard_from_controlled(enc.circuit, phi, basis, shots, seed)


def loschmidt_echo(spec, t: float, d: int, phi: StateVector) -> complex:
    """``<phi| p_d(H) |phi>`` for the truncated Taylor series of ``exp(-iHt)``."""
    from .poly_builders import build_poly_be, poly_params, taylor_coeffs
    from .pauli_algebra import build_table

    if spec.n > 8 or d > 6:
        raise ValueError("echo limited to n <= 8 and d <= 6")
    poly = taylor_coeffs(t, d)
    params = poly_params(poly, build_table(spec).lam)
    circ = build_poly_be(spec, poly, controlled=True, simplified=spec.named)
    re = hadamard_from_controlled(circ, phi, "X")
    im = hadamard_from_controlled(circ, phi, "Y")
    phase = np.exp(1j * np.angle(poly.coeffs[0])) if poly.coeffs[0] != 0 else 1.0
    return complex(params.W * (re + 1j * im) * phase)
