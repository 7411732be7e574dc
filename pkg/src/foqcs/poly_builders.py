"""Products, powers and polynomials of block-encoded operators.

Register layout: optional ``control``, ``poly`` (d unary qubits), then
``i0, j0, ..., i{d-1}, j{d-1}`` and ``system``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit_ir import (Circuit, Gate, barrier, cnot, controlled_gates, cry, p,
                         postselect, ry)
from .foqcs_builders import _oracles, build_select, split_activation
from .pauli_algebra import ModelSpec, build_table

ZERO_TOL = 1e-12


@dataclass(frozen=True)
class PolySpec:
    """Coefficients ``a_0..a_d`` in ascending degree."""

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        cs = tuple(complex(c) for c in self.coeffs)
        if len(cs) < 2:
            raise ValueError("polynomial degree must be >= 1")
        if not all(np.isfinite(c.real) and np.isfinite(c.imag) for c in cs):
            raise ValueError("coefficients must be finite")
        if all(c == 0 for c in cs):
            raise ValueError("all coefficients are zero")
        object.__setattr__(self, "coeffs", cs)

    @property
    def d(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, mat: np.ndarray) -> np.ndarray:
        out = np.zeros_like(mat, dtype=complex)
        power = np.eye(mat.shape[0], dtype=complex)
        for c in self.coeffs:
            out += c * power
            power = power @ mat
        return out

    @classmethod
    def from_dict(cls, data) -> "PolySpec":
        if set(data) - {"coeffs", "taylor"} or len(data) != 1:
            raise ValueError("polynomial spec needs exactly one of 'coeffs' or 'taylor'")
        if "taylor" in data:
            tay = data["taylor"]
            if set(tay) != {"t", "d"}:
                raise ValueError("taylor spec needs fields 't' and 'd'")
            return taylor_coeffs(float(tay["t"]), int(tay["d"]))
        cs = []
        for c in data["coeffs"]:
            if isinstance(c, (list, tuple)):
                cs.append(complex(c[0], c[1] if len(c) > 1 else 0.0))
            else:
                cs.append(complex(c))
        return cls(tuple(cs))


@dataclass(frozen=True)
class PolyParams:
    weights: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    W: float
    lam: float

    @property
    def d(self) -> int:
        return len(self.theta)


def _arg(c: complex) -> float:
    return 0.0 if c == 0 else cmath.phase(c)


def poly_params(poly: PolySpec, lam: float) -> PolyParams:
    """Unary-encoding weights, ladder angles and phase steps."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    a = poly.coeffs
    raw = np.array([abs(c) * lam**k for k, c in enumerate(a)])
    W = float(raw.sum())
    w = np.sqrt(raw / W)
    theta = np.zeros(poly.d)
    placed = 0.0
    for k in range(poly.d):
        rem = math.sqrt(max(0.0, 1.0 - placed))
        if rem < ZERO_TOL:
            theta[k] = 0.0
        else:
            theta[k] = 2 * math.acos(min(1.0, w[k] / rem))
        placed += w[k] ** 2
    phi = np.array([_arg(a[k + 1]) - _arg(a[k]) for k in range(poly.d)])
    return PolyParams(w, theta, phi, W, float(lam))


def taylor_coeffs(t: float, d: int) -> PolySpec:
    """Truncated series of ``exp(-iHt)``."""
    if d < 1:
        raise ValueError("degree must be >= 1")
    return PolySpec(tuple((-1j * t) ** k / math.factorial(k) for k in range(d + 1)))


def _ladder(params: PolyParams, qubits: Sequence[int], phases: bool) -> list[Gate]:
    gates = [ry(qubits[0], params.theta[0])]
    gates += [cry(qubits[k - 1], qubits[k], params.theta[k]) for k in range(1, params.d)]
    if phases:
        gates += [p(qubits[k], params.phi[k]) for k in range(params.d)]
    return gates


def build_poly_r(params: PolyParams) -> Circuit:
    return Circuit.from_sizes([("poly", params.d)], _ladder(params, range(params.d), True))


def build_poly_l(params: PolyParams) -> Circuit:
    return Circuit.from_sizes([("poly", params.d)], _ladder(params, range(params.d), False))


def _shift(gates, mapping):
    return [g.remap(mapping) for g in gates]


def _pair_map(n: int, base: int) -> dict[int, int]:
    return {q: base + q for q in range(2 * n)}


def _select_map(n: int, base: int, sys0: int) -> dict[int, int]:
    m = {q: base + q for q in range(2 * n)}
    m.update({2 * n + l: sys0 + l for l in range(n)})
    return m


def _pairs_layout(n: int, k: int, extra: Sequence[tuple[str, int]] = ()):
    sizes = list(extra)
    for s in range(k):
        sizes += [(f"i{s}", n), (f"j{s}", n)]
    sizes.append(("system", n))
    return sizes


def _sandwich(prs: Sequence[Circuit], pls: Sequence[Circuit], n: int, base: int) -> list[Gate]:
    """Oracles on every pair, SELECTs in order, adjoint oracles; barrier-separated."""
    k = len(prs)
    sys0 = base + 2 * n * k
    width = sys0 + n
    everything = list(range(width))
    sel = build_select(n)
    gates: list[Gate] = []
    for s, pr in enumerate(prs):
        gates += _shift(pr.gates, _pair_map(n, base + 2 * n * s))
    gates.append(barrier(everything))
    for s in range(k):
        gates += _shift(sel.gates, _select_map(n, base + 2 * n * s, sys0))
    gates.append(barrier(everything))
    for s, pl in enumerate(pls):
        gates += _shift(pl.inverse().gates, _pair_map(n, base + 2 * n * s))
    return gates


def build_power_be(spec: ModelSpec, k: int) -> Circuit:
    """Block encoding of ``(H/lambda)^k`` with ``k`` ancilla pairs."""
    if k < 1:
        raise ValueError("power must be >= 1")
    pr, pl = _oracles(spec)
    n = spec.n
    gates = _sandwich([pr] * k, [pl] * k, n, 0)
    gates += [postselect(q) for q in range(2 * n * k)]
    return Circuit.from_sizes(_pairs_layout(n, k), gates)


def build_product_be(specs: Sequence[ModelSpec]) -> Circuit:
    """Block encoding of ``(M_k/lam_k) ... (M_1/lam_1)``; ``M_1`` acts first."""
    if not specs:
        raise ValueError("need at least one factor")
    n = specs[0].n
    if any(s.n != n for s in specs):
        raise ValueError("all factors must share n")
    oracles = [_oracles(s) for s in specs]
    gates = _sandwich([o[0] for o in oracles], [o[1] for o in oracles], n, 0)
    gates += [postselect(q) for q in range(2 * n * len(specs))]
    return Circuit.from_sizes(_pairs_layout(n, len(specs)), gates)


def build_poly_be(spec: ModelSpec, poly: PolySpec, controlled: bool = False,
                  simplified: bool = True) -> Circuit:
    """Block encoding of ``exp(-i arg a_0) p(H) / W``.

    ``simplified`` drives only the activation of each oracle from its unary
    qubit; otherwise each oracle is fully controlled.  ``controlled`` adds a
    control on the first rotation of the outer ladder and on its mirror.
    """
    n, d = spec.n, poly.d
    if simplified and not spec.named:
        raise ValueError("the simplified construction needs a model with an activation split")
    params = poly_params(poly, build_table(spec).lam)
    pr, pl = _oracles(spec)
    off = 1 if controlled else 0
    qpoly = list(range(off, off + d))
    base = off + d
    sys0 = base + 2 * n * d
    width = sys0 + n
    everything = list(range(width))

    def pair(s):
        return _pair_map(n, base + 2 * n * s)

    outer = _ladder(params, qpoly, True)
    if controlled:
        outer[0] = cry(0, qpoly[0], params.theta[0])
    gates: list[Gate] = list(outer) + [barrier(everything)]

    pl_dag = pl.inverse()
    if simplified:
        body_r = split_activation(pr).body
        body_l_dag = pl_dag.with_gates(pl_dag.gates[:-1])
        i1 = pr.reg("i")[1]
        gates += [cnot(qpoly[s], pair(s)[i1]) for s in range(d)]
        for s in range(d):
            gates += _shift(body_r.gates, pair(s))
    else:
        for s in range(d):
            gates += controlled_gates(_shift(pr.gates, pair(s)), qpoly[s])
    gates.append(barrier(everything))
    sel = build_select(n)
    for s in range(d):
        gates += _shift(sel.gates, _select_map(n, base + 2 * n * s, sys0))
    gates.append(barrier(everything))
    if simplified:
        for s in range(d):
            gates += _shift(body_l_dag.gates, pair(s))
        gates += [cnot(qpoly[s], pair(s)[i1]) for s in range(d)]
    else:
        for s in range(d):
            gates += controlled_gates(_shift(pl_dag.gates, pair(s)), qpoly[s])
    gates.append(barrier(everything))
    mirror = [g.adjoint() for g in reversed(_ladder(params, qpoly, False))]
    if controlled:
        mirror[-1] = cry(0, qpoly[0], -params.theta[0])
    gates += mirror
    gates += [postselect(q) for q in range(off, sys0)]
    extra = ([("control", 1)] if controlled else []) + [("poly", d)]
    return Circuit.from_sizes(_pairs_layout(n, d, extra), gates)
