"""Square-grid layouts with nearest-neighbour two-qubit gates.

Grid circuits use one wire per cell (index ``row * cols + col``).  Data moves
between cells through SWAPs or two-CNOT moves into a cell known to hold
``|0>``; the builders track where every logical qubit sits, so ``placement``
and ``relabel_out`` give the start and end cells of the all-to-all circuit's
qubits.

Layouts:

* FOQCS: rows ``(system, i, j)`` become ``(i, j, system)`` through the SELECT
  swaps.  The controlled variant adds an outer column on the left holding the
  control, which moves up one row alongside SELECT.
* Polynomial: ``2d+1`` rows; the outer column holds the unary ladder and its
  copy qubits; the system register drifts from the top row to the bottom one.

A CNOT between cells two steps apart uses three CNOTs through a middle cell
that holds ``|0>`` whenever the middle is observed afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit_ir import (BARRIER, CNOT, UNUSED, X, Circuit, Gate, Register, barrier, cnot, cry, cz,
                         lower, p, postselect, ry, swap)
from .foqcs_builders import LEFT, RIGHT, build_pr_model
from .pauli_algebra import ModelSpec, build_table
from .poly_builders import PolySpec, poly_params
from .simulator import BlockSpec


@dataclass(frozen=True)
class GridLayout:
    rows: int
    cols: int
    sites: dict[int, tuple[int, int]]
    placement: dict[int, tuple[int, int]] = field(default_factory=dict)
    relabel_out: dict[int, tuple[int, int]] = field(default_factory=dict)
    schedule: tuple[tuple[Gate, ...], ...] = ()
    block: BlockSpec | None = None

    @classmethod
    def physical(cls, rows: int, cols: int, **kw) -> "GridLayout":
        sites = {r * cols + c: (r, c) for r in range(rows) for c in range(cols)}
        return cls(rows, cols, sites, **kw)

    def report(self) -> dict:
        def cells(m):
            return {str(k): list(v) for k, v in sorted(m.items())}
        return {
            "rows": self.rows,
            "cols": self.cols,
            "placement": cells(self.placement),
            "relabel_out": cells(self.relabel_out),
            "schedule": [[str(g) for g in step] for step in self.schedule],
        }


def validate_connectivity(circuit: Circuit, layout: GridLayout) -> list[str]:
    """Two-qubit gates whose cells are not nearest neighbours."""
    out = []
    for k, g in enumerate(circuit.gates):
        if len(g.qubits) != 2:
            continue
        try:
            (r0, c0), (r1, c1) = (layout.sites[q] for q in g.qubits)
        except KeyError as exc:
            out.append(f"gate {k} ({g}): qubit {exc.args[0]} has no grid site")
            continue
        if abs(r0 - r1) + abs(c0 - c1) != 1:
            out.append(f"gate {k} ({g}): cells {(r0, c0)} and {(r1, c1)} are not adjacent")
    return out


def schedule_of(circuit: Circuit) -> tuple[tuple[Gate, ...], ...]:
    """CNOT timesteps of the lowered circuit under the ASAP rule used for depth."""
    low = lower(circuit)
    level = [0] * circuit.num_qubits
    steps: dict[int, list[Gate]] = {}
    for g in low.gates:
        if g.kind == CNOT:
            a, b = g.qubits
            t = max(level[a], level[b]) + 1
            level[a] = level[b] = t
            steps.setdefault(t, []).append(g)
        elif g.kind == BARRIER:
            m = max(level[q] for q in g.qubits)
            for q in g.qubits:
                level[q] = m
    return tuple(tuple(steps[t]) for t in sorted(steps))


class _Grid:
    """Gate emitter over cells."""

    def __init__(self, rows: int, cols: int):
        self.rows, self.cols = rows, cols
        self.gates: list[Gate] = []

    def c(self, r: int, col: int) -> int:
        if not (0 <= r < self.rows and 0 <= col < self.cols):
            raise ValueError(f"cell {(r, col)} outside the grid")
        return r * self.cols + col

    def rc(self, q: int) -> tuple[int, int]:
        return divmod(q, self.cols)

    def adjacent(self, a: int, b: int) -> bool:
        (r0, c0), (r1, c1) = self.rc(a), self.rc(b)
        return abs(r0 - r1) + abs(c0 - c1) == 1

    def emit(self, gates):
        self.gates.extend(gates)

    def sync(self):
        self.gates.append(barrier(range(self.rows * self.cols)))

    def move(self, src: int, dst: int):
        """Move ``src`` into ``dst``, which must hold ``|0>``; ``src`` ends in ``|0>``."""
        self.emit([cnot(src, dst), cnot(dst, src)])

    def d2_cnot(self, c: int, t: int, mid: int) -> list[Gate]:
        if not (self.adjacent(c, mid) and self.adjacent(mid, t)):
            raise ValueError("middle cell does not connect control and target")
        return [cnot(c, mid), cnot(mid, t), cnot(c, mid)]


def _map_oracle(grid: _Grid, oracle: Circuit, cells: list[int], source: int | None) -> list[Gate]:
    """Place a model oracle (logical ``i`` then ``j``) onto ``cells``.

    With ``source`` the leading X becomes a CNOT from that cell, routed through
    ``i[0]``; when the first two-qubit gate is the diagonal ``i[1] -> j[0]`` CNOT,
    the copy held by ``i[0]`` feeds it directly.
    """
    n = oracle.reg("i").size
    i0, i1, j0 = cells[0], cells[1], cells[n]
    gates = list(oracle.gates)
    out: list[Gate] = []
    start = 0
    if source is not None:
        if gates[0] != Gate(X, (oracle.reg("i")[1],)):
            raise ValueError("oracle does not start with its activation")
        first2 = next(k for k, g in enumerate(gates) if len(g.qubits) == 2)
        g2 = gates[first2]
        fused = (g2.kind == CNOT and g2.qubits == (oracle.reg("i")[1], oracle.reg("j")[0])
                 and not grid.adjacent(i1, j0))
        if fused:
            out += [cnot(source, i0), cnot(i0, i1)]
            out += [g.remap(cells) for g in gates[1:first2]]
            out += [cnot(i0, j0), cnot(i1, i0)]
            start = first2 + 1
        else:
            out += [cnot(source, i0), cnot(i0, i1), cnot(i1, i0)]
            start = 1
    for g in gates[start:]:
        mapped = g.remap(cells)
        if len(g.qubits) == 2 and not grid.adjacent(*mapped.qubits):
            if g.kind != CNOT:
                raise ValueError(f"{g} is not nearest-neighbour on the grid")
            out += grid.d2_cnot(*mapped.qubits, i0)
        else:
            out.append(mapped)
    return out


def _inverse(gates: list[Gate]) -> list[Gate]:
    return [g.adjoint() for g in reversed(gates)]


def _select_layers(grid: _Grid, top: int, cols: range) -> list[Gate]:
    """SELECT on rows (system, i, j) starting at ``top``; leaves (i, j, system)."""
    a, b, c = top, top + 1, top + 2
    out = [swap(grid.c(a, l), grid.c(b, l)) for l in cols]
    out += [cnot(grid.c(a, l), grid.c(b, l)) for l in cols]
    out += [cz(grid.c(c, l), grid.c(b, l)) for l in cols]
    out += [swap(grid.c(b, l), grid.c(c, l)) for l in cols]
    return out


def grid_select(n: int) -> tuple[Circuit, GridLayout]:
    """SELECT alone on a 3 x n grid."""
    grid = _Grid(3, n)
    grid.emit(_select_layers(grid, 0, range(n)))
    regs = [Register("system", tuple(grid.c(0, l) for l in range(n))),
            Register("i", tuple(grid.c(1, l) for l in range(n))),
            Register("j", tuple(grid.c(2, l) for l in range(n)))]
    circ = Circuit(3 * n, tuple(regs), tuple(grid.gates))
    place = {l: (1, l) for l in range(n)} | {n + l: (2, l) for l in range(n)}
    place |= {2 * n + l: (0, l) for l in range(n)}
    out = {l: (0, l) for l in range(n)} | {n + l: (1, l) for l in range(n)}
    out |= {2 * n + l: (2, l) for l in range(n)}
    layout = GridLayout.physical(3, n, placement=place, relabel_out=out, schedule=schedule_of(circ))
    return circ, layout


def _registers(grid: _Grid, named: dict[str, list[int]]) -> tuple[Register, ...]:
    used = {q for qs in named.values() for q in qs}
    regs = [Register(k, tuple(v)) for k, v in named.items() if v]
    rest = tuple(q for q in range(grid.rows * grid.cols) if q not in used)
    if rest:
        regs.append(Register(UNUSED, rest))
    return tuple(regs)


def _finish(grid: _Grid, named, system_out: list[int], keep_out: list[int]) -> Circuit:
    posts = [q for q in range(grid.rows * grid.cols) if q not in set(system_out) | set(keep_out)]
    return Circuit(grid.rows * grid.cols, _registers(grid, named),
                   tuple(grid.gates + [postselect(q) for q in posts]))


def map_foqcs_grid(spec: ModelSpec, controlled: bool = False) -> tuple[Circuit, GridLayout]:
    """FOQCS encoding on a ``3 x n`` grid (``3 x (n+1)`` when controlled)."""
    if not spec.named:
        raise ValueError("no grid pattern for custom models")
    n = spec.n
    off = 1 if controlled else 0
    grid = _Grid(3, n + off)
    pr = build_pr_model(spec, RIGHT)
    pl = build_pr_model(spec, LEFT)
    data = range(off, n + off)
    before = [grid.c(1, l) for l in data] + [grid.c(2, l) for l in data]
    after = [grid.c(0, l) for l in data] + [grid.c(1, l) for l in data]
    src_in = grid.c(1, 0) if controlled else None
    src_out = grid.c(0, 0) if controlled else None

    grid.emit(_map_oracle(grid, pr, before, src_in))
    grid.sync()
    grid.emit(_select_layers(grid, 0, data))
    if controlled:
        grid.move(src_in, src_out)
    grid.sync()
    grid.emit(_inverse(_map_oracle(grid, pl, after, src_out)))

    sys_in = [grid.c(0, l) for l in data]
    sys_out = [grid.c(2, l) for l in data]
    named = {"system": sys_in, "i": before[:n], "j": before[n:]}
    ctrl = []
    if controlled:
        named = {"control": [src_in], "spare": [src_out]} | named
        ctrl = [src_out]
    circ = _finish(grid, named, sys_out, ctrl)
    place = {2 * n + l + off: grid.rc(q) for l, q in enumerate(sys_in)}
    place |= {k + off: grid.rc(q) for k, q in enumerate(before)}
    out = {2 * n + l + off: grid.rc(q) for l, q in enumerate(sys_out)}
    out |= {k + off: grid.rc(q) for k, q in enumerate(after)}
    if controlled:
        place[0] = grid.rc(src_in)
        out[0] = grid.rc(src_out)
    sys_block_in = ([src_in] if controlled else []) + sys_in
    sys_block_out = ([src_out] if controlled else []) + sys_out
    block = BlockSpec(tuple(q for q in range(circ.num_qubits) if q not in sys_block_in),
                      tuple(sys_block_in),
                      tuple(q for q in range(circ.num_qubits) if q not in sys_block_out),
                      tuple(sys_block_out))
    layout = GridLayout.physical(grid.rows, grid.cols, placement=place, relabel_out=out,
                                 schedule=schedule_of(circ), block=block)
    return circ, layout


def map_poly_grid(spec: ModelSpec, poly: PolySpec, controlled: bool = False) -> tuple[Circuit, GridLayout]:
    """Polynomial encoding on a ``(2d+1) x (n+1)`` grid (one more column when controlled)."""
    if not spec.named:
        raise ValueError("no grid pattern for custom models")
    n, d = spec.n, poly.d
    params = poly_params(poly, build_table(spec).lam)
    pr = build_pr_model(spec, RIGHT)
    pl = build_pr_model(spec, LEFT)
    off = 1 if controlled else 0
    grid = _Grid(2 * d + 1, n + 1 + off)
    oc = off                       # outer column
    data = range(off + 1, off + 1 + n)

    q_in = [grid.c(2 * s + 1, oc) for s in range(d)]
    a_in = [grid.c(2 * s, oc) for s in range(d)]          # a_in[0] is the idle cell
    q_out = [grid.c(2 * s, oc) for s in range(d)]
    a_out = [grid.c(2 * d - 1, oc)] + [grid.c(2 * k - 1, oc) for k in range(1, d)]
    ctrl_in = grid.c(1, 0) if controlled else None
    ctrl_out = grid.c(0, 0) if controlled else None

    def outer_ladder(qs, copies, ctrl):
        first = cry(ctrl, qs[0], params.theta[0]) if controlled else ry(qs[0], params.theta[0])
        gates = [first]
        for k in range(1, d):
            gates += [cnot(qs[k - 1], copies[k]), cry(copies[k], qs[k], params.theta[k])]
        return gates

    ladder_r = outer_ladder(q_in, a_in, ctrl_in)
    ladder_r += [p(q_in[k], params.phi[k]) for k in range(d)]
    grid.emit(ladder_r)
    grid.sync()

    def pair_cells(s, top):
        return [grid.c(top, l) for l in data] + [grid.c(top + 1, l) for l in data]

    for s in range(d):
        grid.emit(_map_oracle(grid, pr, pair_cells(s, 2 * s + 1), q_in[s]))
    grid.sync()
    for s in range(d):
        grid.emit(_select_layers(grid, 2 * s, data))
        grid.move(grid.c(2 * s + 1, oc), grid.c(2 * s, oc))
        if s < d - 1:
            grid.move(grid.c(2 * s + 2, oc), grid.c(2 * s + 1, oc))
        if controlled and s == 0:
            grid.move(ctrl_in, ctrl_out)
    grid.sync()
    for s in range(d):
        grid.emit(_inverse(_map_oracle(grid, pl, pair_cells(s, 2 * s), q_out[s])))
    grid.sync()
    grid.emit(_inverse(outer_ladder(q_out, a_out, ctrl_out)))

    sys_in = [grid.c(0, l) for l in data]
    sys_out = [grid.c(2 * d, l) for l in data]
    named = {"system": sys_in, "poly": q_in, "copies": a_in}
    for s in range(d):
        cells = pair_cells(s, 2 * s + 1)
        named[f"i{s}"] = cells[:n]
        named[f"j{s}"] = cells[n:]
    keep = []
    if controlled:
        named = {"control": [ctrl_in], "spare": [ctrl_out]} | named
        keep = [ctrl_out]
    circ = _finish(grid, named, sys_out, keep)

    base = off + d
    place, out = {}, {}
    for s in range(d):
        place[off + s] = grid.rc(q_in[s])
        out[off + s] = grid.rc(q_out[s])
        for k, q in enumerate(pair_cells(s, 2 * s + 1)):
            place[base + 2 * n * s + k] = grid.rc(q)
        for k, q in enumerate(pair_cells(s, 2 * s)):
            out[base + 2 * n * s + k] = grid.rc(q)
    for l in range(n):
        place[base + 2 * n * d + l] = grid.rc(sys_in[l])
        out[base + 2 * n * d + l] = grid.rc(sys_out[l])
    if controlled:
        place[0], out[0] = grid.rc(ctrl_in), grid.rc(ctrl_out)
    sys_block_in = ([ctrl_in] if controlled else []) + sys_in
    sys_block_out = ([ctrl_out] if controlled else []) + sys_out
    block = BlockSpec(tuple(q for q in range(circ.num_qubits) if q not in sys_block_in),
                      tuple(sys_block_in),
                      tuple(q for q in range(circ.num_qubits) if q not in sys_block_out),
                      tuple(sys_block_out))
    layout = GridLayout.physical(grid.rows, grid.cols, placement=place, relabel_out=out,
                                 schedule=schedule_of(circ), block=block)
    return circ, layout


def map_pr_grid(spec: ModelSpec, controlled: bool = False, side: str = RIGHT) -> tuple[Circuit, GridLayout]:
    """Model oracle alone on a ``2 x n`` grid; the control sits left of ``i[0]``."""
    if not spec.named:
        raise ValueError("no grid pattern for custom models")
    n = spec.n
    off = 1 if controlled else 0
    grid = _Grid(2, n + off)
    oracle = build_pr_model(spec, side)
    cells = [grid.c(0, l) for l in range(off, n + off)] + [grid.c(1, l) for l in range(off, n + off)]
    src = grid.c(0, 0) if controlled else None
    grid.emit(_map_oracle(grid, oracle, cells, src))
    named = ({"control": [src]} if controlled else {}) | {"i": cells[:n], "j": cells[n:]}
    circ = Circuit(grid.rows * grid.cols, _registers(grid, named), tuple(grid.gates))
    place = {k + off: grid.rc(q) for k, q in enumerate(cells)}
    if controlled:
        place[0] = grid.rc(src)
    layout = GridLayout.physical(grid.rows, grid.cols, placement=place, relabel_out=dict(place),
                                 schedule=schedule_of(circ))
    return circ, layout
