"""Command-line front end.

Exit status: 0 on success, 1 when a verification or table comparison fails,
2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .circuit_ir import cnot_metrics, lower, parse_qasm, to_qasm
from .foqcs_builders import build_foqcs
from .layout2d import map_foqcs_grid, map_poly_grid, map_pr_grid, validate_connectivity
from .pauli_algebra import ModelSpec, build_table, dense_matrix
from .poly_builders import PolySpec, build_poly_be, poly_params, taylor_coeffs
from .resources import MODELS, build_kind, emit_heatmap, generic_poly, measure_vs_formula
from .simulator import StateVector, extract_block, hadamard_test, loschmidt_echo

COMMANDS = ("build", "resources", "verify", "layout", "export", "hadamard", "loschmidt", "heatmap")
BLOCK_TOL = 1e-9
POLY_TOL = 1e-8


class UsageError(Exception):
    pass


class Mismatch(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.12g}"


def parse_range(text: str, field: str) -> list[int]:
    """``5``, ``2,3,7``, ``2..6`` or ``2..20:2`` (inclusive)."""
    try:
        out = []
        for part in text.split(","):
            if ".." in part:
                lo, rest = part.split("..")
                hi, _, step = rest.partition(":")
                out += list(range(int(lo), int(hi) + 1, int(step) if step else 1))
            else:
                out.append(int(part))
    except ValueError:
        raise UsageError(f"--{field}: cannot parse range {text!r}") from None
    if not out:
        raise UsageError(f"--{field}: empty range {text!r}")
    return out


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: ModelSpec | None
    kind: str
    connectivity: str
    control: bool
    poly: PolySpec | None
    taylor: tuple[float, int] | None
    ns: list[int]
    ds: list[int]
    state: str | None
    basis: str
    shots: int | None
    seed: int | None
    fmt: str
    out: str | None

    @property
    def full_kind(self) -> str:
        return ("controlled-" if self.control else "") + self.kind

    def spec_for(self, n: int) -> ModelSpec:
        if self.model is None:
            raise UsageError("--model-file is required for this command")
        if n == self.model.n:
            return self.model
        try:
            return self.model.with_n(n)
        except ValueError as exc:
            raise UsageError(f"--n: {exc}") from None

    def single_n(self) -> int:
        if len(self.ns) != 1:
            raise UsageError("--n: this command takes a single size")
        return self.ns[0]

    def poly_for(self, d: int) -> PolySpec:
        return self.poly if self.poly is not None else generic_poly(d)

    def phi(self, n: int) -> StateVector:
        bits = self.state if self.state is not None else "0" * n
        if len(bits) != n or set(bits) - {"0", "1"}:
            raise UsageError(f"--state: expected {n} bits of 0/1, got {bits!r}")
        return StateVector.basis(bits)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model-file", "--model", dest="model_file")
    common.add_argument("--kind", choices=("pr", "foqcs", "poly"), default=None)
    common.add_argument("--connectivity", choices=("all", "grid"), default=None)
    common.add_argument("--control", action="store_true")
    src = common.add_mutually_exclusive_group()
    src.add_argument("--coeffs-file")
    src.add_argument("--taylor", help="t,d")
    common.add_argument("--state")
    common.add_argument("--basis", choices=("X", "Y"), default="X")
    common.add_argument("--shots", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--n")
    common.add_argument("--d")
    common.add_argument("--format", choices=("tsv", "json"), default="tsv")
    common.add_argument("--out")
    parser = argparse.ArgumentParser(prog="foqcs", description="FOQCS-LCU block-encoding circuits")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _config(args) -> RunConfig:
    model = None
    if args.model_file:
        try:
            model = ModelSpec.load(args.model_file)
        except (OSError, ValueError, TypeError, KeyError) as exc:
            raise UsageError(f"--model-file: {exc}") from None
    poly, taylor = None, None
    if args.coeffs_file:
        try:
            with open(args.coeffs_file) as fh:
                poly = PolySpec.from_dict(json.load(fh))
        except (OSError, ValueError, TypeError, KeyError) as exc:
            raise UsageError(f"--coeffs-file: {exc}") from None
    elif args.taylor:
        try:
            t_text, d_text = args.taylor.split(",")
            taylor = (float(t_text), int(d_text))
            poly = taylor_coeffs(*taylor)
        except ValueError as exc:
            raise UsageError(f"--taylor: expected 't,d' ({exc})") from None
    if args.shots is not None:
        if args.seed is None:
            raise UsageError("--seed: required when --shots is set")
        if args.shots <= 0:
            raise UsageError("--shots: must be positive")
    if args.n:
        ns = parse_range(args.n, "n")
    elif model is not None:
        ns = [model.n]
    elif args.command == "heatmap":
        ns = list(range(2, 21, 2))
    else:
        raise UsageError("--model-file is required for this command")
    if any(n < 1 for n in ns):
        raise UsageError("--n: sizes must be positive")
    if args.d:
        ds = parse_range(args.d, "d")
        if poly is not None and ds != [poly.d]:
            raise UsageError("--d: conflicts with the degree of the given polynomial")
    elif poly is not None:
        ds = [poly.d]
    else:
        ds = {"heatmap": list(range(1, 11)), "verify": [1, 2]}.get(args.command, [1])
    if any(d < 1 for d in ds):
        raise UsageError("--d: degrees must be >= 1")
    default_conn = "grid" if args.command in ("layout", "heatmap") else "all"
    kind = args.kind or ("poly" if poly is not None else "foqcs")
    return RunConfig(args.command, model, kind, args.connectivity or default_conn, args.control,
                     poly, taylor, ns, ds, args.state, args.basis, args.shots, args.seed, args.format, args.out)


def _table(header: list[str], rows: list[list], cfg: RunConfig, records: list[dict]) -> str:
    if cfg.fmt == "json":
        return json.dumps(records, indent=2) + "\n"
    lines = ["\t".join(header)]
    lines += ["\t".join(v if isinstance(v, str) else fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _circuit(cfg: RunConfig):
    n = cfg.single_n()
    spec = cfg.spec_for(n)
    poly = cfg.poly_for(cfg.ds[0]) if cfg.kind == "poly" else None
    try:
        return build_kind(spec, cfg.full_kind, cfg.connectivity, poly)
    except ValueError as exc:
        raise UsageError(f"--kind: {exc}") from None


def cmd_build(cfg: RunConfig) -> str:
    circ = _circuit(cfg)
    m = cnot_metrics(circ, cfg.connectivity)
    if cfg.fmt == "json":
        return json.dumps({
            "num_qubits": circ.num_qubits,
            "registers": {r.name: list(r.qubits) for r in circ.registers},
            "gates": [{"kind": g.kind, "qubits": list(g.qubits), "param": g.param} for g in circ.gates],
            "cnot_count": m.cnot_count, "cnot_depth": m.cnot_depth, "qubit_count": m.qubit_count,
        }, indent=2) + "\n"
    lines = [f"# qubits {circ.num_qubits}; cnot count {m.cnot_count}; cnot depth {m.cnot_depth}"]
    lines += [f"# register {r.name}: {' '.join(map(str, r.qubits))}" for r in circ.registers]
    lines += [_gate_text(g) for g in circ.gates]
    return "\n".join(lines) + "\n"


def _gate_text(g) -> str:
    qs = " ".join(str(q) for q in g.qubits)
    return f"{g.kind} {qs}" if g.param is None else f"{g.kind}({fmt(g.param)}) {qs}"


def cmd_export(cfg: RunConfig) -> str:
    circ = _circuit(cfg)
    text = to_qasm(circ)
    if parse_qasm(text).gates != lower(circ).gates:
        raise Mismatch("exported text does not parse back to the lowered circuit")
    return text


def cmd_resources(cfg: RunConfig) -> tuple[str, bool]:
    if cfg.model is None or cfg.model.kind not in MODELS:
        raise UsageError("--model-file: resource tables exist only for xyz, xxz and ising")
    rows, records, ok = [], [], True
    for n in cfg.ns:
        spec = cfg.spec_for(n)
        for d in (cfg.ds if cfg.kind == "poly" else [1]):
            poly = cfg.poly_for(d) if cfg.kind == "poly" else None
            c = measure_vs_formula(spec.kind, cfg.full_kind, cfg.connectivity, n, d, spec=spec, poly=poly)
            ok &= c.match
            records.append(c.to_dict())
            rows.append([c.model, c.kind, c.connectivity, n, c.d, *c.measured.as_tuple(),
                         *c.formula.as_tuple(), "yes" if c.match else "no"])
    header = ["model", "kind", "connectivity", "n", "d", "count", "depth", "qubits",
              "table_count", "table_depth", "table_qubits", "match"]
    return _table(header, rows, cfg, records), ok


def _max_err(a, b) -> float:
    return float(np.max(np.abs(a - b)))


def cmd_verify(cfg: RunConfig) -> tuple[str, bool]:
    rows, records = [], []

    def check(name, n, d, err, tol):
        ok = err <= tol
        rows.append([name, n, d, err, tol, "pass" if ok else "FAIL"])
        records.append({"check": name, "n": n, "d": d, "error": err, "tol": tol, "pass": ok})

    for n in cfg.ns:
        spec = cfg.spec_for(n)
        table = build_table(spec)
        h = dense_matrix(table)
        enc = build_foqcs(spec)
        block = extract_block(enc.circuit)
        check("foqcs_block", n, 0, _max_err(block, h / table.lam), BLOCK_TOL)
        ctl = extract_block(build_foqcs(spec, controlled=True).circuit)
        dim = 2**n
        want = np.zeros((2 * dim, 2 * dim), dtype=complex)
        want[:dim, :dim] = np.eye(dim)
        want[dim:, dim:] = h / table.lam
        check("controlled_foqcs_block", n, 0, _max_err(ctl, want), BLOCK_TOL)
        if spec.named:
            grid, layout = map_foqcs_grid(spec)
            check("grid_foqcs_block", n, 0, _max_err(extract_block(grid, layout.block), block), BLOCK_TOL)
            check("grid_foqcs_connectivity", n, 0, float(len(validate_connectivity(grid, layout))), 0.0)
        for d in cfg.ds:
            poly = cfg.poly_for(d)
            params = poly_params(poly, table.lam)
            circ = build_poly_be(spec, poly, simplified=spec.named)
            a0 = poly.coeffs[0]
            phase = np.exp(1j * np.angle(a0)) if a0 != 0 else 1.0
            got = extract_block(circ) * phase
            check("poly_block", n, d, _max_err(got, poly(h) / params.W), POLY_TOL)
    header = ["check", "n", "d", "error", "tol", "result"]
    return _table(header, rows, cfg, records), all(r["pass"] for r in records)


def cmd_layout(cfg: RunConfig) -> tuple[str, bool]:
    n = cfg.single_n()
    spec = cfg.spec_for(n)
    if not spec.named:
        raise UsageError("--model-file: grid layouts exist only for xyz, xxz and ising")
    if cfg.kind == "poly":
        circ, layout = map_poly_grid(spec, cfg.poly_for(cfg.ds[0]), cfg.control)
    elif cfg.kind == "pr":
        circ, layout = map_pr_grid(spec, cfg.control)
    else:
        circ, layout = map_foqcs_grid(spec, cfg.control)
    bad = validate_connectivity(circ, layout)
    if cfg.fmt == "json":
        rep = layout.report() | {"violations": bad}
        return json.dumps(rep, indent=2) + "\n", not bad
    lines = [f"# grid {layout.rows} x {layout.cols}; violations {len(bad)}"]
    lines += [f"# place {k}: {r},{c} -> {layout.relabel_out[k][0]},{layout.relabel_out[k][1]}"
              for k, (r, c) in sorted(layout.placement.items())]
    for t, step in enumerate(layout.schedule, 1):
        cells = ", ".join(f"{layout.sites[a]}->{layout.sites[b]}" for a, b in (g.qubits for g in step))
        lines.append(f"step {t}: {cells}")
    lines += [f"violation: {v}" for v in bad]
    return "\n".join(lines) + "\n", not bad


def cmd_hadamard(cfg: RunConfig) -> str:
    n = cfg.single_n()
    spec = cfg.spec_for(n)
    value = hadamard_test(spec, cfg.phi(n), cfg.basis, cfg.shots, cfg.seed or 0)
    lam = build_table(spec).lam
    rec = {"basis": cfg.basis, "shots": cfg.shots or 0, "value": value, "lambda": lam,
           "scaled": value * lam}
    return _table(["basis", "shots", "value", "lambda", "scaled"],
                  [[cfg.basis, cfg.shots or 0, value, lam, value * lam]], cfg, [rec])


def cmd_loschmidt(cfg: RunConfig) -> tuple[str, bool]:
    if cfg.taylor is None:
        raise UsageError("--taylor: required for the echo")
    n = cfg.single_n()
    spec = cfg.spec_for(n)
    t, d = cfg.taylor
    phi = cfg.phi(n)
    echo = loschmidt_echo(spec, t, d, phi)
    evals, vecs = np.linalg.eigh(dense_matrix(build_table(spec)))
    amp = vecs.conj().T @ phi.amplitudes
    exact = complex(np.sum(np.abs(amp) ** 2 * np.exp(-1j * evals * t)))
    norm = float(np.max(np.abs(evals)))
    bound = (norm * abs(t)) ** (d + 1) / math.factorial(d + 1)
    err = abs(echo - exact)
    ok = err <= bound + 1e-12
    rec = {"t": t, "d": d, "echo_re": echo.real, "echo_im": echo.imag, "exact_re": exact.real,
           "exact_im": exact.imag, "error": err, "bound": bound, "within_bound": ok}
    header = list(rec)
    row = [v if not isinstance(v, bool) else ("yes" if v else "no") for v in rec.values()]
    return _table(header, [row], cfg, [rec]), ok


def cmd_heatmap(cfg: RunConfig) -> str:
    model = cfg.model.kind if cfg.model is not None else "xyz"
    if model not in MODELS:
        raise UsageError("--model-file: heatmaps exist only for xyz, xxz and ising")
    tsv = emit_heatmap(model, cfg.ns, cfg.ds, cfg.connectivity)
    if cfg.fmt == "json":
        rows = [line.split("\t") for line in tsv.strip().splitlines()[1:]]
        return json.dumps([{"n": int(a), "d": int(b), "depth": int(c)} for a, b, c in rows], indent=2) + "\n"
    return tsv


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _parser()
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        handler = {
            "build": cmd_build, "resources": cmd_resources, "verify": cmd_verify,
            "layout": cmd_layout, "export": cmd_export, "hadamard": cmd_hadamard,
            "loschmidt": cmd_loschmidt, "heatmap": cmd_heatmap,
        }[cfg.command]
        result = handler(cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except Mismatch as exc:
        print(f"mismatch: {exc}", file=stderr)
        return 1
    text, ok = result if isinstance(result, tuple) else (result, True)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())
