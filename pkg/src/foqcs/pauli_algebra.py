"""Pauli sums in check-matrix form.

Every Pauli string is written as ``alpha * Z^j X^i`` where ``i`` and ``j`` are
bit patterns over the sites.  Site 0 is the most significant bit of both
integer indices, the same convention the simulator uses for qubit order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

NAMED_MODELS = ("xyz", "xxz", "ising")
MODEL_KINDS = NAMED_MODELS + ("custom",)
DENSE_LIMIT = 12

_MODEL_FIELDS = {"model", "n", "g", "jx", "jy", "jz", "j", "terms"}


@dataclass(frozen=True)
class PauliString:
    """Bit-vector pair ``(x_bits, z_bits)`` for ``Z^z X^x`` on ``n`` sites."""

    x_bits: tuple[int, ...]
    z_bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.x_bits) != len(self.z_bits):
            raise ValueError("x_bits and z_bits must have equal length")
        if len(self.x_bits) < 1:
            raise ValueError("a Pauli string needs at least one site")
        if any(b not in (0, 1) for b in self.x_bits + self.z_bits):
            raise ValueError("bits must be 0 or 1")

    @property
    def n(self) -> int:
        return len(self.x_bits)

    @property
    def i(self) -> int:
        return bits_to_index(self.x_bits)

    @property
    def j(self) -> int:
        return bits_to_index(self.z_bits)

    @classmethod
    def from_indices(cls, i: int, j: int, n: int) -> "PauliString":
        return cls(index_to_bits(i, n), index_to_bits(j, n))


def bits_to_index(bits: Iterable[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def index_to_bits(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> (n - 1 - k)) & 1 for k in range(n))


def pauli_to_check_form(label: str, coeff: complex = 1.0) -> tuple[PauliString, complex]:
    """Convert ``coeff * label`` into ``(bits, alpha)`` with ``alpha * Z^j X^i`` equal to it.

    Uses ``Y = -i Z X``, so every Y contributes a factor ``-i``.

    >>> pauli_to_check_form("XY", 2)[1]
    -2j
    """
    if not label:
        raise ValueError("empty Pauli label")
    xs, zs = [], []
    n_y = 0
    for ch in label:
        if ch == "I":
            xs.append(0); zs.append(0)
        elif ch == "X":
            xs.append(1); zs.append(0)
        elif ch == "Z":
            xs.append(0); zs.append(1)
        elif ch == "Y":
            xs.append(1); zs.append(1)
            n_y += 1
        else:
            raise ValueError(f"invalid Pauli character {ch!r} in {label!r}")
    alpha = complex(coeff) * (-1j) ** n_y
    return PauliString(tuple(xs), tuple(zs)), alpha


@dataclass(frozen=True)
class ModelSpec:
    """Hamiltonian description: one of the named 1D chains or a custom Pauli sum."""

    kind: str
    n: int
    g: float = 0.0
    jx: float = 0.0
    jy: float = 0.0
    jz: float = 0.0
    j: float = 0.0
    terms: tuple[tuple[str, complex], ...] = ()

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError("n must be a positive integer")
        if kind in NAMED_MODELS and self.n < 2:
            raise ValueError(f"model {kind!r} needs n >= 2")
        for name in ("g", "jx", "jy", "jz", "j"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"parameter {name} must be finite")
        if kind == "xxz":
            if self.g != 0:
                raise ValueError("xxz model has g = 0")
            for name in ("jx", "jy"):
                v = getattr(self, name)
                if v != 0 and v != self.j:
                    raise ValueError(f"xxz model ties {name} to j")
        if kind == "custom":
            if not self.terms:
                raise ValueError("custom model needs at least one term")
            terms = tuple((str(lab), complex(c)) for lab, c in self.terms)
            for lab, _ in terms:
                if len(lab) != self.n:
                    raise ValueError(f"term {lab!r} does not have length n={self.n}")
            object.__setattr__(self, "terms", terms)
        elif self.terms:
            raise ValueError("terms are only accepted for custom models")

    @property
    def named(self) -> bool:
        return self.kind in NAMED_MODELS

    def with_n(self, n: int) -> "ModelSpec":
        if self.kind == "custom":
            raise ValueError("cannot resize a custom model")
        return ModelSpec(self.kind, n, self.g, self.jx, self.jy, self.jz, self.j)

    @classmethod
    def from_dict(cls, data: Mapping) -> "ModelSpec":
        unknown = set(data) - _MODEL_FIELDS
        if unknown:
            raise ValueError(f"unknown model field(s): {', '.join(sorted(unknown))}")
        if "model" not in data or "n" not in data:
            raise ValueError("model spec needs 'model' and 'n'")
        terms = []
        for t in data.get("terms", []):
            if set(t) - {"pauli", "coeff"}:
                raise ValueError(f"unknown term field(s) in {t}")
            c = t.get("coeff", 1.0)
            if isinstance(c, (list, tuple)):
                c = complex(c[0], c[1] if len(c) > 1 else 0.0)
            terms.append((t["pauli"], complex(c)))
        n = data["n"]
        if isinstance(n, bool) or not isinstance(n, int):
            raise ValueError("field 'n' must be an integer")
        params = {k: float(data[k]) for k in ("g", "jx", "jy", "jz", "j") if k in data}
        return cls(str(data["model"]), n, terms=tuple(terms), **params)

    def to_dict(self) -> dict:
        out: dict = {"model": self.kind, "n": self.n}
        if self.kind == "custom":
            out["terms"] = [{"pauli": lab, "coeff": [c.real, c.imag]} for lab, c in self.terms]
        else:
            names = {"xyz": ("g", "jx", "jy", "jz"), "xxz": ("j", "jz"), "ising": ("g", "j")}
            out.update({k: getattr(self, k) for k in names[self.kind]})
        return out

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "ModelSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class CoefficientTable:
    """Sparse map ``(i, j) -> alpha`` with normalization ``lam = sum |alpha|``."""

    n: int
    entries: Mapping[tuple[int, int], complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j), a in self.entries.items():
            if not (0 <= i < 2**self.n and 0 <= j < 2**self.n):
                raise ValueError(f"index pair {(i, j)} out of range for n={self.n}")
            if a != 0:
                clean[(int(i), int(j))] = complex(a)
        object.__setattr__(self, "entries", clean)

    @property
    def lam(self) -> float:
        return float(sum(abs(a) for a in self.entries.values()))

    def __len__(self) -> int:
        return len(self.entries)


def model_terms(spec: ModelSpec) -> list[tuple[str, complex]]:
    """Pauli-label expansion of a model, zero coefficients included."""
    n = spec.n
    if spec.kind == "custom":
        return list(spec.terms)

    def single(site, p):
        return "".join(p if k == site else "I" for k in range(n))

    def pair(site, p):
        return "".join(p if k in (site, site + 1) else "I" for k in range(n))

    out = []
    if spec.kind == "xyz":
        couplings = (("X", spec.jx), ("Y", spec.jy), ("Z", spec.jz))
        field_g = spec.g
    elif spec.kind == "xxz":
        couplings = (("X", spec.j), ("Y", spec.j), ("Z", spec.jz))
        field_g = 0.0
    else:
        couplings = (("X", spec.j),)
        field_g = spec.g
    for site in range(n - 1):
        for p, c in couplings:
            out.append((pair(site, p), complex(c)))
    if spec.kind != "xxz":
        for site in range(n):
            out.append((single(site, "Z"), complex(field_g)))
    return out


def build_table(spec: ModelSpec) -> CoefficientTable:
    """Check-matrix coefficient table of a model; duplicates merge, zeros drop."""
    acc: dict[tuple[int, int], complex] = {}
    for label, c in model_terms(spec):
        ps, alpha = pauli_to_check_form(label, c)
        key = (ps.i, ps.j)
        acc[key] = acc.get(key, 0) + alpha
    return CoefficientTable(spec.n, {k: v for k, v in acc.items() if abs(v) > 0})


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_I = np.eye(2, dtype=complex)


def check_string_matrix(i: int, j: int, n: int) -> np.ndarray:
    """Dense ``Z^j X^i`` on ``n`` sites."""
    out = np.ones((1, 1), dtype=complex)
    for xb, zb in zip(index_to_bits(i, n), index_to_bits(j, n)):
        site = (_Z if zb else _I) @ (_X if xb else _I)
        out = np.kron(out, site)
    return out


def dense_matrix(table: CoefficientTable) -> np.ndarray:
    if table.n > DENSE_LIMIT:
        raise ValueError(f"dense matrix limited to n <= {DENSE_LIMIT}")
    dim = 2**table.n
    out = np.zeros((dim, dim), dtype=complex)
    for (i, j), a in table.entries.items():
        out += a * check_string_matrix(i, j, table.n)
    return out
