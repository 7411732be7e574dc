"""Closed-form resource tables and measured counterparts.

Table formulas are stored as data, independent of the builders, and are never
adjusted to fit measurements.  Every formula is affine in ``n``, ``d`` and
``d*n``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache

from .circuit_ir import ResourceReport, cnot_metrics
from .foqcs_builders import RIGHT, build_controlled_pr, build_foqcs, build_pr_model
from .layout2d import map_foqcs_grid, map_poly_grid, map_pr_grid
from .pauli_algebra import ModelSpec
from .poly_builders import PolySpec, build_poly_be

MODELS = ("xyz", "xxz", "ising")
KINDS = ("pr", "controlled-pr", "foqcs", "controlled-foqcs", "poly", "controlled-poly")
CONNECTIVITIES = ("all", "grid")


@dataclass(frozen=True)
class Affine:
    """``dn * d * n + n * n + d * d + const``."""

    dn: int = 0
    n: int = 0
    d: int = 0
    const: int = 0

    def __call__(self, n: int, d: int) -> int:
        return self.dn * d * n + self.n * n + self.d * d + self.const

    def __str__(self) -> str:
        out = ""
        for coef, sym in ((self.dn, "dn"), (self.n, "n"), (self.d, "d"), (self.const, "")):
            if coef == 0:
                continue
            body = sym if abs(coef) == 1 and sym else f"{abs(coef)}{sym}"
            if not out:
                out = body if coef > 0 else "-" + body
            else:
                out += (" - " if coef < 0 else " + ") + body
        return out or "0"


def _f(dn=0, n=0, d=0, c=0) -> Affine:
    return Affine(dn, n, d, c)


@dataclass(frozen=True)
class FormulaSet:
    count: Affine
    depth: Affine
    qubits: Affine

    def eval(self, n: int, d: int, connectivity: str) -> ResourceReport:
        return ResourceReport(self.count(n, d), self.depth(n, d), self.qubits(n, d), connectivity)


_QUBITS = {
    ("pr", "all"): _f(n=2), ("pr", "grid"): _f(n=2),
    ("controlled-pr", "all"): _f(n=2, c=1), ("controlled-pr", "grid"): _f(n=2, c=1),
    ("foqcs", "all"): _f(n=3), ("foqcs", "grid"): _f(n=3),
    ("controlled-foqcs", "all"): _f(n=3, c=1), ("controlled-foqcs", "grid"): _f(n=3, c=1),
    ("poly", "all"): _f(dn=2, d=1, n=1), ("poly", "grid"): _f(dn=2, d=2, n=1),
    ("controlled-poly", "all"): _f(dn=2, d=1, n=1, c=1),
    ("controlled-poly", "grid"): _f(dn=2, d=2, n=1, c=1),
}

# (count, depth) per (model, kind, connectivity)
_TABLE = {
    "xyz": {
        ("pr", "all"): (_f(n=11, c=-11), _f(n=4, c=4)),
        ("pr", "grid"): (_f(n=11, c=-7), _f(n=4, c=8)),
        ("controlled-pr", "all"): (_f(n=11, c=-10), _f(n=4, c=5)),
        ("controlled-pr", "grid"): (_f(n=11, c=-6), _f(n=4, c=9)),
        ("foqcs", "all"): (_f(n=24, c=-22), _f(n=8, c=10)),
        ("foqcs", "grid"): (_f(n=26, c=-14), _f(n=8, c=20)),
        ("controlled-foqcs", "all"): (_f(n=24, c=-20), _f(n=8, c=12)),
        ("controlled-foqcs", "grid"): (_f(n=26, c=-12), _f(n=8, c=22)),
        ("poly", "all"): (_f(dn=24, d=-18, c=-4), _f(n=8, d=6, c=6)),
        ("poly", "grid"): (_f(dn=26, d=-2, c=-6), _f(n=8, d=10, c=12)),
        ("controlled-poly", "all"): (_f(dn=24, d=-18), _f(n=8, d=6, c=10)),
        ("controlled-poly", "grid"): (_f(dn=26, d=-2, c=-2), _f(n=8, d=10, c=16)),
    },
    "xxz": {
        ("pr", "all"): (_f(n=8, c=-8), _f(n=2, c=6)),
        ("pr", "grid"): (_f(n=8, c=-8), _f(n=2, c=6)),
        ("controlled-pr", "all"): (_f(n=8, c=-7), _f(n=2, c=7)),
        ("controlled-pr", "grid"): (_f(n=8, c=-7), _f(n=2, c=7)),
        ("foqcs", "all"): (_f(n=18, c=-16), _f(n=4, c=14)),
        ("foqcs", "grid"): (_f(n=20, c=-16), _f(n=4, c=16)),
        ("controlled-foqcs", "all"): (_f(n=18, c=-14), _f(n=4, c=16)),
        ("controlled-foqcs", "grid"): (_f(n=20, c=-14), _f(n=4, c=18)),
        ("poly", "all"): (_f(dn=18, d=-12, c=-4), _f(n=4, d=6, c=10)),
        ("poly", "grid"): (_f(dn=20, d=-4, c=-6), _f(n=4, d=10, c=12)),
        ("controlled-poly", "all"): (_f(dn=18, d=-12), _f(n=4, d=6, c=14)),
        ("controlled-poly", "grid"): (_f(dn=20, d=-4, c=-2), _f(n=4, d=10, c=16)),
    },
    "ising": {
        ("pr", "all"): (_f(n=5, c=-5), _f(n=2)),
        ("pr", "grid"): (_f(n=5, c=-1), _f(n=2, c=4)),
        ("controlled-pr", "all"): (_f(n=5, c=-4), _f(n=2, c=1)),
        ("controlled-pr", "grid"): (_f(n=5), _f(n=2, c=5)),
        ("foqcs", "all"): (_f(n=12, c=-10), _f(n=4, c=2)),
        ("foqcs", "grid"): (_f(n=14, c=-2), _f(n=4, c=10)),
        ("controlled-foqcs", "all"): (_f(n=12, c=-8), _f(n=4, c=4)),
        ("controlled-foqcs", "grid"): (_f(n=14), _f(n=4, c=12)),
        ("poly", "all"): (_f(dn=12, d=-6, c=-4), _f(n=4, d=6, c=-2)),
        ("poly", "grid"): (_f(dn=14, d=11, c=-6), _f(n=4, d=10, c=8)),
        ("controlled-poly", "all"): (_f(dn=12, d=-6), _f(n=4, d=6, c=2)),
        ("controlled-poly", "grid"): (_f(dn=14, d=11, c=-2), _f(n=4, d=10, c=12)),
    },
}


def formula_set(model: str, kind: str, connectivity: str) -> FormulaSet:
    try:
        count, depth = _TABLE[model][(kind, connectivity)]
    except KeyError:
        raise KeyError(f"no table entry for ({model!r}, {kind!r}, {connectivity!r})") from None
    return FormulaSet(count, depth, _QUBITS[(kind, connectivity)])


def formula_eval(model: str, kind: str, connectivity: str, n: int, d: int = 1) -> ResourceReport:
    return formula_set(model, kind, connectivity).eval(n, d, connectivity)


def generic_spec(model: str, n: int) -> ModelSpec:
    """A model instance with every coupling nonzero, so no rotation degenerates."""
    if model == "xyz":
        return ModelSpec(kind="xyz", n=n, g=0.7, jx=1.1, jy=-0.6, jz=0.9)
    if model == "xxz":
        return ModelSpec(kind="xxz", n=n, j=0.8, jz=-1.3)
    if model == "ising":
        return ModelSpec(kind="ising", n=n, g=-0.5, j=1.2)
    raise KeyError(f"unknown model {model!r}")


def generic_poly(d: int) -> PolySpec:
    return PolySpec(tuple(cmath.exp(0.7j * k) / (k + 1) for k in range(d + 1)))


def build_kind(spec: ModelSpec, kind: str, connectivity: str = "all", poly: PolySpec | None = None):
    """The circuit a table row describes; ``poly`` is required for polynomial kinds."""
    if connectivity not in CONNECTIVITIES:
        raise KeyError(f"unknown connectivity {connectivity!r}")
    if kind not in KINDS:
        raise KeyError(f"unknown kind {kind!r}")
    controlled = kind.startswith("controlled-")
    base = kind.removeprefix("controlled-")
    grid = connectivity == "grid"
    if base == "pr":
        if grid:
            return map_pr_grid(spec, controlled)[0]
        return build_controlled_pr(spec) if controlled else build_pr_model(spec, RIGHT)
    if base == "foqcs":
        return map_foqcs_grid(spec, controlled)[0] if grid else build_foqcs(spec, controlled).circuit
    if poly is None:
        raise ValueError("polynomial kinds need a polynomial")
    if grid:
        return map_poly_grid(spec, poly, controlled)[0]
    return build_poly_be(spec, poly, controlled, simplified=spec.named)


def measure(spec: ModelSpec, kind: str, connectivity: str = "all",
            poly: PolySpec | None = None) -> ResourceReport:
    return cnot_metrics(build_kind(spec, kind, connectivity, poly), connectivity)


@lru_cache(maxsize=None)
def _measure(model: str, kind: str, connectivity: str, n: int, d: int) -> ResourceReport:
    poly = generic_poly(d) if kind.endswith("poly") else None
    return measure(generic_spec(model, n), kind, connectivity, poly)


@dataclass(frozen=True)
class Comparison:
    model: str
    kind: str
    connectivity: str
    n: int
    d: int
    measured: ResourceReport
    formula: ResourceReport

    @property
    def match(self) -> bool:
        return self.measured.as_tuple() == self.formula.as_tuple()

    def mismatches(self) -> list[str]:
        names = ("cnot_count", "cnot_depth", "qubit_count")
        return [f"{k}: measured {m}, table {f}"
                for k, m, f in zip(names, self.measured.as_tuple(), self.formula.as_tuple()) if m != f]

    def to_dict(self) -> dict:
        keys = ("cnot_count", "cnot_depth", "qubit_count")
        return {
            "model": self.model, "kind": self.kind, "connectivity": self.connectivity,
            "n": self.n, "d": self.d,
            "measured": dict(zip(keys, self.measured.as_tuple())),
            "formula": dict(zip(keys, self.formula.as_tuple())),
            "match": self.match,
        }


def measure_vs_formula(model: str, kind: str, connectivity: str, n: int, d: int = 1,
                       spec: ModelSpec | None = None, poly: PolySpec | None = None) -> Comparison:
    """Measured metrics of the built circuit against the table row.

    Without ``spec``/``poly`` a generic instance with all couplings nonzero is used.
    """
    if not kind.endswith("poly"):
        d = 1
    elif poly is not None:
        d = poly.d
    formula = formula_eval(model, kind, connectivity, n, d)
    if spec is None and poly is None:
        measured = _measure(model, kind, connectivity, n, d)
    else:
        spec = spec or generic_spec(model, n)
        if kind.endswith("poly") and poly is None:
            poly = generic_poly(d)
        measured = measure(spec, kind, connectivity, poly)
    return Comparison(model, kind, connectivity, n, d, measured, formula)


def emit_heatmap(model: str, n_range, d_range, connectivity: str = "grid",
                 source: str = "measured") -> str:
    """Polynomial CNOT depth as TSV rows ``n, d, depth``."""
    if source not in ("measured", "formula"):
        raise ValueError("source must be 'measured' or 'formula'")
    lines = ["n\td\tdepth"]
    for n in n_range:
        for d in d_range:
            if source == "measured":
                depth = _measure(model, "poly", connectivity, n, d).cnot_depth
            else:
                depth = formula_eval(model, "poly", connectivity, n, d).cnot_depth
            lines.append(f"{n}\t{d}\t{depth}")
    return "\n".join(lines) + "\n"
