import json

import numpy as np
import pytest

from conftest import MODELS, random_spec
from foqcs.circuit_ir import CNOT, Circuit, cnot, cnot_metrics, lower
from foqcs.foqcs_builders import build_foqcs, build_pr_model, build_select
from foqcs.layout2d import (GridLayout, _Grid, grid_select, map_foqcs_grid, map_poly_grid,
                            map_pr_grid, validate_connectivity)
from foqcs.poly_builders import PolySpec, build_poly_be
from foqcs.pauli_algebra import ModelSpec
from foqcs.resources import generic_spec
from foqcs.simulator import StateVector, apply, apply_batch, extract_block
from oracle import circuit_unitary


def test_grid_select_n6():
    circ, layout = grid_select(6)
    assert cnot_metrics(circ).as_tuple()[:2] == (24, 4)
    assert validate_connectivity(circ, layout) == []
    assert len(layout.schedule) == 4


@pytest.mark.parametrize("n", [2, 3, 4, 9])
def test_grid_select_counts(n):
    circ, layout = grid_select(n)
    assert cnot_metrics(circ).as_tuple()[:2] == (4 * n, 4)
    for step in layout.schedule:
        qs = [q for g in step for q in g.qubits]
        assert len(qs) == len(set(qs))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_grid_select_semantics(n):
    """Rows (system, i, j) in, (i, j, system) out; check on every basis input."""
    circ, layout = grid_select(n)
    flat = build_select(n)
    u_flat = apply_batch(flat, np.eye(8**n, dtype=complex))
    u_grid = apply_batch(circ, np.eye(8**n, dtype=complex))

    def perm(mapping):
        """Permutation matrix placing logical qubit k on grid cell mapping[k]."""
        m = np.zeros((8**n, 8**n))
        for b in range(8**n):
            out = 0
            for k in range(3 * n):
                if (b >> (3 * n - 1 - k)) & 1:
                    r, c = mapping[k]
                    out |= 1 << (3 * n - 1 - (r * n + c))
            m[out, b] = 1
        return m

    p_in, p_out = perm(layout.placement), perm(layout.relabel_out)
    assert np.allclose(u_grid @ p_in, p_out @ u_flat, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_naive_select_has_violations(n):
    layout = GridLayout.physical(3, n)
    # rows i, j, system: logical index equals cell index
    violations = validate_connectivity(build_select(n), layout)
    assert violations
    assert len(violations) == n


def test_hand_built_violation():
    layout = GridLayout.physical(1, 3)
    circ = Circuit(3, (), (cnot(0, 2), cnot(0, 1)))
    assert len(validate_connectivity(circ, layout)) == 1


def test_missing_site_is_reported():
    layout = GridLayout(1, 2, {0: (0, 0), 1: (0, 1)})
    assert validate_connectivity(Circuit(3, (), (cnot(0, 2),)), layout)


def test_distance_two_cnot():
    grid = _Grid(1, 3)
    gates = grid.d2_cnot(0, 2, 1)
    assert [g.kind for g in gates] == [CNOT] * 3
    assert cnot_metrics(Circuit(3, (), tuple(gates))).cnot_count == 3
    u = circuit_unitary(Circuit(3, (), tuple(gates)))
    direct = circuit_unitary(Circuit(3, (), (cnot(0, 2),)))
    # equal when the middle cell starts in |0>
    zero_mid = [b for b in range(8) if not b & 0b010]
    assert np.allclose(u[:, zero_mid], direct[:, zero_mid])
    with pytest.raises(ValueError):
        grid.d2_cnot(0, 2, 0)


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("n", [2, 3, 5, 8])
@pytest.mark.parametrize("controlled", [False, True])
def test_foqcs_grid_connectivity(model, n, controlled, rng):
    circ, layout = map_foqcs_grid(random_spec(model, n, rng), controlled)
    assert validate_connectivity(circ, layout) == []
    assert validate_connectivity(lower(circ), layout) == []
    assert len(set(layout.placement.values())) == len(layout.placement)
    assert sorted(layout.placement) == sorted(layout.relabel_out)


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("n,d", [(2, 1), (3, 2), (4, 4), (8, 3)])
@pytest.mark.parametrize("controlled", [False, True])
def test_poly_grid_connectivity(model, n, d, controlled, rng):
    poly = PolySpec(tuple(rng.normal(size=d + 1) + 0.2j))
    circ, layout = map_poly_grid(random_spec(model, n, rng), poly, controlled)
    assert validate_connectivity(circ, layout) == []


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("n", [2, 4, 7])
@pytest.mark.parametrize("controlled", [False, True])
def test_pr_grid_connectivity(model, n, controlled, rng):
    circ, layout = map_pr_grid(random_spec(model, n, rng), controlled)
    assert validate_connectivity(circ, layout) == []


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("controlled", [False, True])
def test_foqcs_grid_block_equals_all_to_all(model, n, controlled, rng):
    spec = random_spec(model, n, rng)
    circ, layout = map_foqcs_grid(spec, controlled)
    flat = extract_block(build_foqcs(spec, controlled).circuit)
    assert np.allclose(extract_block(circ, layout.block), flat, atol=1e-9)


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("d", [1, 2])
@pytest.mark.parametrize("controlled", [False, True])
def test_poly_grid_block_equals_all_to_all(model, d, controlled, rng):
    spec = random_spec(model, 2, rng)
    poly = PolySpec(tuple(rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)))
    circ, layout = map_poly_grid(spec, poly, controlled)
    flat = extract_block(build_poly_be(spec, poly, controlled))
    assert np.allclose(extract_block(circ, layout.block), flat, atol=1e-9)


@pytest.mark.parametrize("model", MODELS)
def test_pr_grid_prepares_same_state(model, rng):
    n = 3
    spec = random_spec(model, n, rng)
    circ, layout = map_pr_grid(spec)
    flat = apply(build_pr_model(spec), StateVector.zero(2 * n)).amplitudes
    grid = apply(circ, StateVector.zero(circ.num_qubits)).amplitudes
    remapped = np.zeros_like(grid)
    for b, a in enumerate(flat):
        idx = 0
        for k in range(2 * n):
            if (b >> (2 * n - 1 - k)) & 1:
                r, c = layout.placement[k]
                idx |= 1 << (circ.num_qubits - 1 - (r * layout.cols + c))
        remapped[idx] = a
    assert np.allclose(grid, remapped, atol=1e-12)


def test_poly_qubit_counts_n6_d4(rng):
    spec = random_spec("xyz", 6, rng)
    poly = PolySpec((1, 0.5, 0.25, 0.125, 0.0625))
    # 1D layout numbers qubits 0..57; the grid adds one copy qubit per degree
    assert build_poly_be(spec, poly).num_qubits == 58
    circ, _ = map_poly_grid(spec, poly)
    assert cnot_metrics(circ, "grid").qubit_count == 2 * 4 * 6 + 2 * 4 + 6


# table deltas: XYZ 8n+20 vs 8n+10, XXZ 4n+16 vs 4n+14, Ising 4n+10 vs 4n+2;
# the Ising grid circuit spends two more layers than the table (ledgered)
@pytest.mark.parametrize("model,delta", [("xyz", 10), ("xxz", 2), ("ising", 10)])
def test_foqcs_grid_depth_overhead_constant(model, delta):
    for n in range(2, 9):
        spec = generic_spec(model, n)
        grid = cnot_metrics(map_foqcs_grid(spec)[0]).cnot_depth
        flat = cnot_metrics(build_foqcs(spec).circuit).cnot_depth
        assert grid - flat == delta


def test_custom_models_rejected():
    spec = ModelSpec("custom", 2, terms=(("XX", 1.0),))
    with pytest.raises(ValueError):
        map_foqcs_grid(spec)


def test_layout_report_is_json(rng):
    _, layout = map_foqcs_grid(random_spec("ising", 3, rng))
    rep = json.loads(json.dumps(layout.report()))
    assert rep["rows"] == 3 and rep["cols"] == 3
    assert len(rep["schedule"]) == len(layout.schedule)
    assert all(isinstance(g, str) for step in rep["schedule"] for g in step)


# two-qubit gates of the printed XXZ n = 6 oracle panels, as (row, col) cell pairs
FIG_XXZ_PANELS = [
    [((0, 1), (1, 1))],
    [((1, 1), (0, 1))],
    [((0, 1), (0, 2)), ((1, 1), (1, 2))],
    [((0, 2), (0, 1)), ((1, 2), (1, 1))],
    [((0, 1), (1, 1)), ((1, 2), (1, 3)), ((0, 2), (0, 3))],
    [((0, 1), (0, 0)), ((1, 1), (1, 0)), ((0, 3), (0, 2)), ((1, 3), (1, 2))],
    [((0, 2), (1, 2)), ((0, 3), (0, 4)), ((1, 3), (1, 4))],
    [((0, 2), (0, 1)), ((1, 2), (1, 1)), ((0, 4), (0, 3)), ((1, 4), (1, 3))],
    [((0, 3), (1, 3)), ((0, 4), (0, 5)), ((1, 4), (1, 5))],
    [((0, 3), (0, 2)), ((1, 3), (1, 2)), ((0, 5), (0, 4)), ((1, 5), (1, 4))],
    [((0, 4), (1, 4)), ((0, 5), (1, 5))],
    [((0, 4), (0, 3)), ((1, 4), (1, 3))],
    [((0, 5), (0, 4)), ((1, 5), (1, 4))],
]


def test_xxz_pr_grid_matches_printed_panels():
    circ, layout = map_pr_grid(generic_spec("xxz", 6))
    assert validate_connectivity(circ, layout) == []
    printed = {frozenset(p) for panel in FIG_XXZ_PANELS for p in panel}
    mapped = {frozenset(divmod(q, layout.cols) for q in g.qubits)
              for g in circ.gates if len(g.qubits) == 2}
    assert mapped == printed
    assert len(layout.schedule) == 14
    assert cnot_metrics(circ).as_tuple()[:2] == (38, 14)
