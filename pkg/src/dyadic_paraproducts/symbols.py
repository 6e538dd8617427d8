"""Symbol sequences ``b = {b_I}`` on a finite dyadic tree and their derived masses."""

from __future__ import annotations

from dataclasses import dataclass
import hashlib
import json
from pathlib import Path

import numpy as np

from .dyadic_core import DyadicIndex, Tree, child_values, subtree_sums


class SymbolFileError(ValueError):
    """Base class for symbol file problems."""


class MalformedSymbolFile(SymbolFileError):
    pass


class DuplicateNodeError(SymbolFileError):
    pass


class NodeDepthError(SymbolFileError):
    pass


@dataclass(frozen=True, eq=False)
class Symbol:
    """One complex value per node of ``Tree(depth)``, in canonical order."""

    depth: int
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex)
        if values.shape != (Tree(self.depth).size,):
            raise ValueError(
                f"expected {Tree(self.depth).size} values for depth {self.depth}, "
                f"got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def tree(self) -> Tree:
        return Tree(self.depth)

    def __getitem__(self, I: DyadicIndex) -> complex:
        if I.level > self.depth:
            return 0j
        return complex(self.values[I.index])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Symbol):
            return NotImplemented
        return self.depth == other.depth and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.depth, self.values.tobytes()))

    def conj(self) -> "Symbol":
        return Symbol(self.depth, np.conj(self.values))

    def digest(self) -> str:
        """Short content hash used to tag reports and file names."""
        h = hashlib.sha256()
        h.update(str(self.depth).encode())
        h.update(np.ascontiguousarray(self.values, dtype=np.complex128).tobytes())
        return h.hexdigest()[:12]


@dataclass(frozen=True)
class NuTable:
    """``nu(I) = sum_{J ⊆ I} |b_J|^2`` and the harmonic-mean term ``nu_tilde(I)``.

    ``nu_plus``/``nu_minus`` hold ``nu`` of the right/left child (0 at leaves).
    """

    nu: np.ndarray
    nu_tilde: np.ndarray
    nu_plus: np.ndarray
    nu_minus: np.ndarray


def nu_table(b: Symbol) -> NuTable:
    nu = subtree_sums(np.abs(b.values) ** 2, b.depth)
    nu_minus, nu_plus = child_values(nu, b.depth)
    total = nu_plus + nu_minus
    nu_tilde = np.zeros(nu.size)
    ok = total > 0
    nu_tilde[ok] = np.sqrt(nu_plus[ok] * nu_minus[ok] / total[ok])
    return NuTable(nu=nu, nu_tilde=nu_tilde, nu_plus=nu_plus, nu_minus=nu_minus)


def bmo_norm(b: Symbol) -> float:
    """Dyadic BMO norm ``max_I sqrt(nu(I) / |I|)`` over the tree."""
    return float(np.sqrt(np.max(nu_table(b).nu / b.tree.lengths)))


def bmo_witness(b: Symbol) -> DyadicIndex:
    return DyadicIndex.from_index(int(np.argmax(nu_table(b).nu / b.tree.lengths)))


def zero(depth: int) -> Symbol:
    return Symbol(depth, np.zeros(Tree(depth).size))


def constant(c: complex, depth: int) -> Symbol:
    return Symbol(depth, np.full(Tree(depth).size, c, dtype=complex))


def log_type(depth: int) -> Symbol:
    """``b_I = sqrt(|I|)``; its BMO norm grows like ``sqrt(depth + 1)``."""
    return Symbol(depth, np.sqrt(Tree(depth).lengths))


DISTRIBUTIONS = ("complex_normal", "normal", "uniform")


def random_symbol(
    depth: int,
    seed: int,
    gamma: float = 0.75,
    distribution: str = "complex_normal",
) -> Symbol:
    """``b_I = |I|**gamma * g_I`` with ``g_I`` drawn in canonical node order.

    ``complex_normal`` draws standard complex Gaussians ``(x + iy)/sqrt(2)``;
    ``normal`` real standard Gaussians; ``uniform`` real values on [-1, 1).
    """
    tree = Tree(depth)
    rng = np.random.default_rng(seed)
    n = tree.size
    if distribution == "complex_normal":
        g = rng.standard_normal((n, 2)) @ np.array([1.0, 1j]) / np.sqrt(2.0)
    elif distribution == "normal":
        g = rng.standard_normal(n)
    elif distribution == "uniform":
        g = rng.uniform(-1.0, 1.0, n)
    else:
        raise ValueError(f"unknown distribution {distribution!r}; expected one of {DISTRIBUTIONS}")
    return Symbol(depth, tree.lengths**gamma * g)


def generate(kind: str, depth: int, **params) -> Symbol:
    """Dispatch to the generators: ``zero``, ``constant``, ``log_type``, ``random``."""
    if kind == "zero":
        return zero(depth)
    if kind == "constant":
        return constant(params.get("c", 1.0), depth)
    if kind in ("log", "log_type"):
        return log_type(depth)
    if kind == "random":
        return random_symbol(depth, **params)
    raise ValueError(f"unknown symbol kind {kind!r}")


def scale(b: Symbol, lam: complex) -> Symbol:
    return Symbol(b.depth, b.values * lam)


def to_json(b: Symbol) -> dict:
    entries = [
        {"node": label, "re": float(v.real), "im": float(v.imag)}
        for label, v in zip(b.tree.labels, b.values)
        if v != 0
    ]
    return {"depth": b.depth, "entries": entries}


def from_json(obj) -> Symbol:
    if not isinstance(obj, dict) or "depth" not in obj or "entries" not in obj:
        raise MalformedSymbolFile("expected an object with 'depth' and 'entries'")
    depth = obj["depth"]
    if not isinstance(depth, int) or isinstance(depth, bool) or depth < 0:
        raise MalformedSymbolFile(f"invalid depth {depth!r}")
    if not isinstance(obj["entries"], list):
        raise MalformedSymbolFile("'entries' must be a list")
    values = np.zeros(Tree(depth).size, dtype=complex)
    seen = set()
    for entry in obj["entries"]:
        try:
            level, position = (int(x) for x in entry["node"].split(":"))
            value = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise MalformedSymbolFile(f"bad entry {entry!r}") from exc
        # depth is checked first so "3:9" under depth 2 reports the depth
        if level > depth:
            raise NodeDepthError(f"node {entry['node']} lies below declared depth {depth}")
        try:
            node = DyadicIndex(level, position)
        except ValueError as exc:
            raise MalformedSymbolFile(f"bad entry {entry!r}") from exc
        if node in seen:
            raise DuplicateNodeError(f"node {node} listed twice")
        seen.add(node)
        values[node.index] = value
    return Symbol(depth, values)


def save(b: Symbol, path) -> None:
    Path(path).write_text(json.dumps(to_json(b), indent=1) + "\n")


def load(path) -> Symbol:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedSymbolFile(f"{path}: not valid JSON ({exc})") from exc
    return from_json(obj)
