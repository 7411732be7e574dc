"""One verdict per acceptance criterion, at the stated tolerances.

Each test records a single PASS/FAIL line (shown in the terminal summary) and
fails when its criterion is not met.  Known deviations are listed in the
decisions ledger; they are reported here, never absorbed into tolerances.
"""

import math
import time
from collections import defaultdict

import numpy as np
from scipy.linalg import expm

from conftest import ACCEPTANCE, MODELS, random_spec, random_state
from foqcs.circuit_ir import cnot_metrics
from foqcs.foqcs_builders import build_foqcs
from foqcs.layout2d import grid_select, map_foqcs_grid, map_poly_grid, validate_connectivity
from foqcs.pauli_algebra import ModelSpec, build_table, dense_matrix
from foqcs.poly_builders import PolySpec, build_poly_be, poly_params, taylor_coeffs
from foqcs.resources import KINDS, generic_poly, generic_spec, measure_vs_formula
from foqcs.simulator import StateVector, extract_block, hadamard_test, loschmidt_echo, success_probability
from goldens import CASES, compare

NS = range(2, 21)
DS = range(1, 11)
FIELDS = ("count", "depth", "qubits")


def report(k: int, ok: bool, detail: str, extra: str = ""):
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE[k] = line
    print(line)
    assert ok, line + ("\n" + extra if extra else "")


def sweep(model, kind, conn):
    ds = DS if kind.endswith("poly") else [1]
    return [measure_vs_formula(model, kind, conn, n, d) for n in NS for d in ds]


def summarize(comparisons) -> tuple[int, list[str]]:
    """Mismatch count and one line per (model, kind, field) listing the offsets seen."""
    offsets = defaultdict(set)
    bad = 0
    for c in comparisons:
        if c.match:
            continue
        bad += 1
        for f, m, t in zip(FIELDS, c.measured.as_tuple(), c.formula.as_tuple()):
            if m != t:
                offsets[(c.model, c.kind, c.connectivity, f)].add(m - t)
    lines = [f"  {m} {k} {conn} {f}: measured - table in {sorted(v)}"
             for (m, k, conn, f), v in sorted(offsets.items())]
    return bad, lines


def test_criterion_1_all_to_all_tables():
    start = time.perf_counter()
    comps = [c for m in MODELS for k in KINDS for c in sweep(m, k, "all")]
    elapsed = time.perf_counter() - start
    bad, lines = summarize(comps)
    ok = bad == 0 and elapsed < 60
    report(1, ok, f"{len(comps) - bad}/{len(comps)} all-to-all cells exact, {elapsed:.1f}s",
           "\n".join(lines))


def test_criterion_2_grid():
    sel_ok = all(cnot_metrics(grid_select(n)[0]).as_tuple()[:2] == (4 * n, 4) for n in NS)
    xxz = [c for k in ("pr", "foqcs") for c in sweep("xxz", k, "grid")]
    xxz_bad, xxz_lines = summarize(xxz)
    reported = [c for m in ("xyz", "ising") for k in KINDS for c in sweep(m, k, "grid")]
    rep_bad, rep_lines = summarize(reported)
    nn_ok = all(
        not validate_connectivity(*map_foqcs_grid(generic_spec(m, n), ctl))
        for m in MODELS for n in (2, 5, 8) for ctl in (False, True)
    ) and all(
        not validate_connectivity(*map_poly_grid(generic_spec(m, n), generic_poly(d), ctl))
        for m in MODELS for n in (2, 5) for d in (1, 4) for ctl in (False, True)
    )
    heat = [(n, d, measure_vs_formula("xyz", "poly", "grid", n, d).measured.cnot_depth)
            for n in range(2, 21, 2) for d in DS]
    heat_bad = [(n, d, v, 8 * n + 10 * d + 12) for n, d, v in heat if v != 8 * n + 10 * d + 12]
    ok = sel_ok and xxz_bad == 0 and nn_ok and not heat_bad
    detail = (f"SELECT 4n/4 {'exact' if sel_ok else 'off'}; XXZ grid PR+FOQCS "
              f"{len(xxz) - xxz_bad}/{len(xxz)} exact; XYZ/Ising grid {len(reported) - rep_bad}/"
              f"{len(reported)} exact, deviations reported; heatmap {len(heat) - len(heat_bad)}/"
              f"{len(heat)} cells; nearest-neighbour {'ok' if nn_ok else 'violated'}")
    extra = "\n".join(["XXZ:"] + xxz_lines + ["XYZ/Ising (reported):"] + rep_lines
                      + [f"  heatmap n={n} d={d}: {v} vs {f}" for n, d, v, f in heat_bad])
    report(2, ok, detail, extra)


def test_criterion_3_block_identity():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst = 0.0
    for model in MODELS:
        for n in range(2, 6):
            for _ in range(20):
                spec = random_spec(model, n, rng)
                enc = build_foqcs(spec)
                err = np.max(np.abs(extract_block(enc.circuit) - dense_matrix(enc.table) / enc.lam))
                worst = max(worst, float(err))
    elapsed = time.perf_counter() - start
    report(3, worst <= 1e-9 and elapsed < 120,
           f"max block error {worst:.2e} (tol 1e-9) over 240 draws, {elapsed:.1f}s")


def poly_error(spec, poly, simplified=True):
    table = build_table(spec)
    w = poly_params(poly, table.lam).W
    block = extract_block(build_poly_be(spec, poly, simplified=simplified))
    phase = np.exp(1j * np.angle(poly.coeffs[0])) if poly.coeffs[0] != 0 else 1
    return float(np.max(np.abs(block * phase - poly(dense_matrix(table)) / w)))


def test_criterion_4_polynomial_identity():
    rng = np.random.default_rng(4)
    worst = 0.0
    for model in MODELS:
        for n in (2, 3):
            for d in (1, 2, 3):
                for _ in range(10):
                    poly = PolySpec(tuple(rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)))
                    worst = max(worst, poly_error(random_spec(model, n, rng), poly))
    gap = 0.0
    for model in MODELS:
        for d in (1, 2):
            spec = random_spec(model, 2, rng)
            poly = PolySpec(tuple(rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)))
            a = extract_block(build_poly_be(spec, poly, simplified=False))
            b = extract_block(build_poly_be(spec, poly, simplified=True))
            gap = max(gap, float(np.max(np.abs(a - b))))
    report(4, worst <= 1e-8 and gap <= 1e-10,
           f"max polynomial error {worst:.2e} (tol 1e-8); general vs simplified {gap:.2e} (tol 1e-10)")


def test_criterion_5_controlled_overhead():
    foqcs_ok = all(
        measure_vs_formula(m, "controlled-foqcs", "all", n).measured.cnot_count
        - measure_vs_formula(m, "foqcs", "all", n).measured.cnot_count == 2
        for m in MODELS for n in NS)
    poly_ok = all(
        measure_vs_formula(m, "controlled-poly", "all", n, d).measured.cnot_count
        - measure_vs_formula(m, "poly", "all", n, d).measured.cnot_count == 4
        for m in MODELS for n in NS for d in DS)
    rng = np.random.default_rng(5)
    worst = 0.0
    for model in MODELS:
        cases = [(n, None) for n in (2, 3)] + [(2, d) for d in (1, 2)]
        for n, d in cases:
            spec = random_spec(model, n, rng)
            table = build_table(spec)
            if d is None:
                block = extract_block(build_foqcs(spec, controlled=True).circuit)
                target = dense_matrix(table) / table.lam
            else:
                poly = PolySpec(tuple(rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)))
                block = extract_block(build_poly_be(spec, poly, controlled=True))
                phase = np.exp(1j * np.angle(poly.coeffs[0]))
                target = poly(dense_matrix(table)) / poly_params(poly, table.lam).W / phase
            dim = 2**n
            for _ in range(3):
                phi = random_state(n, rng)
                al, be = random_state(1, rng)
                out = block @ np.concatenate([al * phi, be * phi])
                expect = np.concatenate([al * phi, be * (target @ phi)])
                worst = max(worst, float(np.max(np.abs(out - expect))))
            assert block.shape == (2 * dim, 2 * dim)
    ok = foqcs_ok and poly_ok and worst <= 1e-8
    report(5, ok, f"FOQCS +2 {'everywhere' if foqcs_ok else 'broken'}, polynomial +4 "
                  f"{'everywhere' if poly_ok else 'broken'}; subspace error {worst:.2e} (tol 1e-8)")


def test_criterion_6_hadamard_test():
    spec = ModelSpec("ising", 3, g=1, j=1)
    phi = StateVector.basis("000")
    exact = hadamard_test(spec, phi, "X")
    sampled = hadamard_test(spec, phi, "X", shots=10**6, seed=7)
    succ = success_probability(build_foqcs(spec).circuit, phi)
    ok = abs(exact - 0.6) <= 1e-10 and abs(sampled - 0.6) <= 5e-3 and abs(succ - 11 / 25) <= 1e-10
    report(6, ok, f"exact {exact:.12f} (3/5), sampled {sampled:.6f} (seed 7, 1e6 shots), "
                  f"success {succ:.12f} (11/25)")


def test_criterion_7_loschmidt_echo():
    spec = ModelSpec("ising", 2, g=1, j=1)
    h = dense_matrix(build_table(spec))
    norm = np.linalg.norm(h, 2)
    states = [StateVector.basis(b) for b in ("00", "01", "11")]
    states.append(StateVector(random_state(2, np.random.default_rng(7)), 2))
    ok = True
    worst_ratio = 0.0
    for t in (0.1, 0.5):
        for d in (2, 4):
            bound = (norm * t) ** (d + 1) / math.factorial(d + 1)
            for phi in states:
                v = phi.amplitudes
                exact = v.conj() @ expm(-1j * h * t) @ v
                err = abs(loschmidt_echo(spec, t, d, phi) - exact)
                ok &= err <= bound
                worst_ratio = max(worst_ratio, err / bound)
    zero = loschmidt_echo(spec, 0.0, 2, states[1])
    ok &= abs(zero - 1) <= 1e-12
    report(7, ok, f"worst error/bound {worst_ratio:.3f} over t in (0.1, 0.5), d in (2, 4); "
                  f"t=0 echo {zero.real:.12f}{zero.imag:+.1e}i")


def test_criterion_8_golden_circuits():
    results = [compare(name) for name in sorted(CASES)]
    report(8, all(ok for ok, _ in results), "; ".join(d for _, d in results))
