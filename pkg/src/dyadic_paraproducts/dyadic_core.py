"""Finite dyadic tree on [0, 1), the Haar system, and grid discretization.

Conventions used everywhere in the package:

* A node ``(level, position)`` is the interval
  ``[position * 2**-level, (position + 1) * 2**-level)``.
* ``I-`` is the left child and ``I+`` the right child, so ``h_I`` is
  negative on the left half and positive on the right half.
* Nodes of a depth-``D`` tree are enumerated level-major, position-ascending;
  node ``(l, p)`` has canonical index ``2**l - 1 + p``.
* Grid functions are sampled on ``2**(D + 1)`` equal cells, which makes every
  Haar function of level ``<= D`` exactly representable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
import math

import numpy as np


@dataclass(frozen=True, order=True)
class DyadicIndex:
    level: int
    position: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"negative level {self.level}")
        if not 0 <= self.position < 2**self.level:
            raise ValueError(f"position {self.position} outside [0, 2**{self.level})")

    @property
    def length(self) -> float:
        return 2.0**-self.level

    @property
    def left(self) -> float:
        return self.position * 2.0**-self.level

    @property
    def index(self) -> int:
        """Canonical (level-major) matrix index."""
        return 2**self.level - 1 + self.position

    @property
    def label(self) -> str:
        return f"{self.level}:{self.position}"

    @classmethod
    def parse(cls, text: str) -> "DyadicIndex":
        try:
            level, position = text.split(":")
            return cls(int(level), int(position))
        except (ValueError, AttributeError) as exc:
            raise ValueError(f"malformed node label {text!r}") from exc

    @classmethod
    def from_index(cls, i: int) -> "DyadicIndex":
        level = (i + 1).bit_length() - 1
        return cls(level, i + 1 - 2**level)

    def children(self) -> tuple["DyadicIndex", "DyadicIndex"]:
        return children(self)

    def parent(self) -> "DyadicIndex":
        if self.level == 0:
            raise ValueError("the root has no parent")
        return DyadicIndex(self.level - 1, self.position // 2)

    def contains(self, other: "DyadicIndex") -> bool:
        """Inclusive containment ``other ⊆ self``."""
        if other.level < self.level:
            return False
        return other.position >> (other.level - self.level) == self.position

    def strictly_contains(self, other: "DyadicIndex") -> bool:
        return other.level > self.level and self.contains(other)

    def __str__(self) -> str:
        return self.label


def children(I: DyadicIndex) -> tuple[DyadicIndex, DyadicIndex]:
    """Return ``(I-, I+)``, the left and right halves of ``I``."""
    return (
        DyadicIndex(I.level + 1, 2 * I.position),
        DyadicIndex(I.level + 1, 2 * I.position + 1),
    )


def delta(I: DyadicIndex, J: DyadicIndex) -> int:
    """+1 if ``J ⊆ I+``, -1 if ``J ⊆ I-``, 0 if ``I`` and ``J`` are disjoint.

    Only defined for ``J`` strictly inside ``I`` or disjoint from it.
    """
    if J == I:
        raise ValueError(f"delta undefined for J == I ({I})")
    if J.contains(I):
        raise ValueError(f"delta undefined for {I} strictly inside {J}")
    if not I.contains(J):
        return 0
    # bit of J's position just below I's level selects the half
    half = (J.position >> (J.level - I.level - 1)) & 1
    return 1 if half else -1


def haar_value(I: DyadicIndex, J: DyadicIndex) -> float:
    """Constant value of ``h_I`` on ``J`` (requires ``J ⊊ I`` or disjoint)."""
    if J.contains(I):
        raise ValueError(f"h_{I} is not constant on {J}")
    return delta(I, J) / math.sqrt(I.length)


@dataclass(frozen=True)
class Tree:
    """All dyadic subintervals of [0, 1) with level at most ``depth``."""

    depth: int

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError(f"negative depth {self.depth}")

    @property
    def size(self) -> int:
        return 2 ** (self.depth + 1) - 1

    @property
    def grid_size(self) -> int:
        return 2 ** (self.depth + 1)

    @cached_property
    def nodes(self) -> tuple[DyadicIndex, ...]:
        return tuple(
            DyadicIndex(level, position)
            for level in range(self.depth + 1)
            for position in range(2**level)
        )

    @cached_property
    def levels(self) -> np.ndarray:
        return np.repeat(np.arange(self.depth + 1), 2 ** np.arange(self.depth + 1))

    @cached_property
    def positions(self) -> np.ndarray:
        return np.concatenate([np.arange(2**level) for level in range(self.depth + 1)])

    @cached_property
    def lengths(self) -> np.ndarray:
        return 2.0 ** -self.levels.astype(float)

    @cached_property
    def labels(self) -> list[str]:
        return [I.label for I in self.nodes]

    def __contains__(self, I: DyadicIndex) -> bool:
        return I.level <= self.depth

    def index_of(self, I: DyadicIndex) -> int:
        if I not in self:
            raise ValueError(f"{I} outside tree of depth {self.depth}")
        return I.index

    def level_slice(self, level: int) -> slice:
        return slice(2**level - 1, 2 ** (level + 1) - 1)

    def child_indices(self, i: int) -> tuple[int, int] | None:
        """Canonical indices of the children of node ``i``, or None at a leaf."""
        left = 2 * i + 1
        if left >= self.size:
            return None
        return left, left + 1


def grid_inner(f: np.ndarray, g: np.ndarray) -> complex:
    """``<f, g> = 2**-(D+1) * sum f_i conj(g_i)`` (sums over the first axis)."""
    f = np.asarray(f)
    g = np.asarray(g)
    return np.sum(f * np.conj(g), axis=0) / f.shape[0]


def haar_grid(I: DyadicIndex, depth: int, kind: int = 0) -> np.ndarray:
    """Samples of ``h_I^0`` (``kind=0``) or ``h_I^1 = 1_I / |I|`` (``kind=1``)."""
    if I.level > depth:
        raise ValueError(f"{I} is finer than depth {depth}")
    n_cells = 2 ** (depth + 1)
    width = n_cells >> I.level
    start = I.position * width
    out = np.zeros(n_cells)
    if kind == 0:
        scale = 1.0 / math.sqrt(I.length)
        out[start : start + width // 2] = -scale
        out[start + width // 2 : start + width] = scale
    elif kind == 1:
        out[start : start + width] = 1.0 / I.length
    else:
        raise ValueError(f"kind must be 0 or 1, got {kind}")
    return out


@lru_cache(maxsize=32)
def haar_matrix(depth: int, kind: int = 0) -> np.ndarray:
    """Rows are ``haar_grid(I, depth, kind)`` in canonical node order."""
    tree = Tree(depth)
    mat = np.stack([haar_grid(I, depth, kind) for I in tree.nodes])
    mat.setflags(write=False)
    return mat


def haar_coefficients(f: np.ndarray, depth: int) -> tuple[complex, np.ndarray]:
    """Expand a grid function as ``mean + sum_I c_I h_I``.

    Returns ``(mean, c)`` with ``c`` in canonical node order.
    """
    f = np.asarray(f)
    H = haar_matrix(depth)
    return f.mean(axis=0), H @ f / f.shape[0]


def haar_synthesis(mean: complex, coeffs: np.ndarray, depth: int) -> np.ndarray:
    return mean + haar_matrix(depth).T @ coeffs


def cell_ancestor_indices(depth: int) -> np.ndarray:
    """``out[l, i]``: canonical index of the level-``l`` node containing cell ``i``."""
    n_cells = 2 ** (depth + 1)
    cells = np.arange(n_cells)
    return np.stack(
        [2**level - 1 + (cells >> (depth + 1 - level)) for level in range(depth + 1)]
    )


def subtree_sums(values: np.ndarray, depth: int) -> np.ndarray:
    """``out[I] = sum_{K ⊆ I} values[K]`` (inclusive), one bottom-up pass."""
    out = np.array(values, dtype=np.result_type(values, float), copy=True)
    tree = Tree(depth)
    for level in range(depth - 1, -1, -1):
        kids = out[tree.level_slice(level + 1)]
        out[tree.level_slice(level)] += kids[0::2] + kids[1::2]
    return out


def child_values(values: np.ndarray, depth: int) -> tuple[np.ndarray, np.ndarray]:
    """``(values[I-], values[I+])`` per node, zero at the leaves."""
    n = 2 ** (depth + 1) - 1
    n_internal = 2**depth - 1
    minus = np.zeros(n, dtype=np.asarray(values).dtype)
    plus = np.zeros(n, dtype=np.asarray(values).dtype)
    minus[:n_internal] = values[1 : 2 * n_internal + 1 : 2]
    plus[:n_internal] = values[2 : 2 * n_internal + 2 : 2]
    return minus, plus
