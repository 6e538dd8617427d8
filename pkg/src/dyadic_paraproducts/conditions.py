"""Testing constants A, B, C for ``Pi_b Pi_d`` and the BMO-control checks.

All per-node quantities are computed in ``O(n)`` from subtree sums.  With
``x_K = d_K |K|^{-1/2} (nu(K-) - nu(K+))`` and ``S(I) = sum_{K ⊆ I} x_K``:

* ``q(J) = S(J+) - S(J-)``
* ``p(J) = S(J+)/nu(J+) - S(J-)/nu(J-)``
* the inner sum of A at ``I`` is ``nu~(I) (S(I+)/nu(I+) + S(I-)/nu(I-))``

Quotients ``0/0`` are taken as 0; this only happens when the corresponding
half of ``b`` vanishes, in which case the numerator vanishes too.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .dyadic_core import (
    DyadicIndex,
    cell_ancestor_indices,
    child_values,
    haar_synthesis,
    subtree_sums,
)
from .paraproducts import DENSE_LIMIT, composition_gram_closed, operator_norm
from .symbols import Symbol, bmo_norm, nu_table

ZERO_SUM = 1e-12
ZERO_NORM = 1e-10


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """``num / den`` with ``x/0 = 0``; ``den`` is real (a nu value)."""
    ok = den != 0
    safe_den = np.where(ok, den, 1.0)
    # split complex / real division: numpy's complex path overflows for subnormal den
    out = np.real(num) / safe_den
    if np.iscomplexobj(num):
        out = out + 1j * (np.imag(num) / safe_den)
    return np.where(ok, out, 0)


def _check_pair(b: Symbol, d: Symbol) -> None:
    if b.depth != d.depth:
        raise ValueError(f"symbol depths differ: {b.depth} vs {d.depth}")


def _half_sums(b: Symbol, d: Symbol):
    table = nu_table(b)
    x = d.values / np.sqrt(b.tree.lengths) * (table.nu_minus - table.nu_plus)
    s_minus, s_plus = child_values(subtree_sums(x, b.depth), b.depth)
    return table, s_minus, s_plus


def p_terms(b: Symbol, d: Symbol) -> np.ndarray:
    _check_pair(b, d)
    table, s_minus, s_plus = _half_sums(b, d)
    return _safe_div(s_plus, table.nu_plus) - _safe_div(s_minus, table.nu_minus)


def q_terms(b: Symbol, d: Symbol) -> np.ndarray:
    _check_pair(b, d)
    _, s_minus, s_plus = _half_sums(b, d)
    return s_plus - s_minus


def p_term(b: Symbol, d: Symbol, J: DyadicIndex) -> complex:
    return complex(p_terms(b, d)[J.index])


def q_term(b: Symbol, d: Symbol, I: DyadicIndex) -> complex:
    return complex(q_terms(b, d)[I.index])


@dataclass(frozen=True)
class ConditionProfile:
    """Per-node values whose suprema are A, B and C (NaN where C skips a node)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray


def condition_profile(b: Symbol, d: Symbol) -> ConditionProfile:
    _check_pair(b, d)
    depth = b.depth
    lengths = b.tree.lengths
    table, s_minus, s_plus = _half_sums(b, d)

    half_ratio = _safe_div(s_plus, table.nu_plus) + _safe_div(s_minus, table.nu_minus)
    a_vals = np.abs(table.nu_tilde * half_ratio) / np.sqrt(lengths)

    p = _safe_div(s_plus, table.nu_plus) - _safe_div(s_minus, table.nu_minus)
    y = table.nu_tilde**2 * np.abs(p + d.values / np.sqrt(lengths)) ** 2
    strict_below = subtree_sums(y, depth) - y
    b_vals = np.sqrt(strict_below / lengths)

    q = s_plus - s_minus
    c_sums = subtree_sums(np.abs(q) ** 2 / lengths, depth)
    c_vals = np.full(lengths.size, np.nan)
    ok = table.nu > 0
    c_vals[ok] = np.sqrt(c_sums[ok] / table.nu[ok])
    return ConditionProfile(A=a_vals, B=b_vals, C=c_vals)


def _sup(values: np.ndarray) -> tuple[float, DyadicIndex | None]:
    if np.all(np.isnan(values)):
        return 0.0, None
    i = int(np.nanargmax(values))
    return float(values[i]), DyadicIndex.from_index(i)


def condition_A(b: Symbol, d: Symbol) -> float:
    return _sup(condition_profile(b, d).A)[0]


def condition_B(b: Symbol, d: Symbol) -> float:
    return _sup(condition_profile(b, d).B)[0]


def condition_C(b: Symbol, d: Symbol) -> float:
    return _sup(condition_profile(b, d).C)[0]


def carleson_difference_profile(b: Symbol) -> tuple[np.ndarray, np.ndarray]:
    """Per-node ``(lhs, rhs)`` of :func:`carleson_difference_bound`."""
    table = nu_table(b)
    lengths = b.tree.lengths
    terms = subtree_sums((table.nu_plus - table.nu_minus) ** 2 / lengths, b.depth)
    return np.sqrt(terms), bmo_norm(b) * np.sqrt(table.nu)


def carleson_difference_bound(b: Symbol, I: DyadicIndex) -> tuple[float, float]:
    """``lhs = (sum_{J ⊆ I} (nu(J+) - nu(J-))^2 / |J|)^{1/2}``, ``rhs = ||b||_BMO nu(I)^{1/2}``.

    Half-sums include the children themselves.  The two sides agree up to an
    absolute constant, which callers calibrate.
    """
    lhs, rhs = carleson_difference_profile(b)
    return float(lhs[I.index]), float(rhs[I.index])


def dyadic_maximal(f: np.ndarray) -> np.ndarray:
    """``Mf(x) = max |<f>_I|`` over tree intervals ``I ∋ x``, levels ``0..D``."""
    f = np.asarray(f)
    n_cells = f.size
    depth = n_cells.bit_length() - 2
    out = np.zeros(n_cells)
    for level in range(depth + 1):
        means = np.abs(f.reshape(2**level, -1).mean(axis=1))
        out = np.maximum(out, np.repeat(means, n_cells >> level))
    return out


def dyadic_square_function(coeffs: np.ndarray) -> np.ndarray:
    """``(sum_I |Phi_I|^2 1_I / |I|)^{1/2}`` sampled on the ``2**(D+1)`` grid."""
    coeffs = np.asarray(coeffs)
    depth = (coeffs.size + 1).bit_length() - 2
    anc = cell_ancestor_indices(depth)
    lengths = 2.0 ** -np.arange(depth + 1)
    sq = np.abs(coeffs[anc]) ** 2 / lengths[:, None]
    return np.sqrt(sq.sum(axis=0))


def interval_averages(f: np.ndarray) -> np.ndarray:
    """``<f>_I`` for every tree node, canonical order."""
    f = np.asarray(f)
    depth = f.size.bit_length() - 2
    return np.concatenate([f.reshape(2**level, -1).mean(axis=1) for level in range(depth + 1)])


def square_function_domination(
    b: Symbol, c: np.ndarray, I: DyadicIndex | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise ``((S Phi)^2, (M c^I)^2 (S b^{I±})^2)`` for ``Phi_K = b_K <c^I>_K``.

    ``c`` holds Haar coefficients; only those inside ``I`` form ``c^I``.
    ``Phi`` and ``b^{I±}`` keep the nodes strictly inside ``I``.
    """
    depth = b.depth
    tree = b.tree
    I = I or DyadicIndex(0, 0)
    shift = tree.levels - I.level
    inside = (shift >= 0) & ((tree.positions >> np.maximum(shift, 0)) == I.position)
    strict = inside & (tree.levels > I.level)

    c_I = np.where(inside, np.asarray(c, dtype=complex), 0)
    c_grid = haar_synthesis(0.0, c_I, depth)
    phi = np.where(strict, b.values * interval_averages(c_grid), 0)
    b_strict = np.where(strict, b.values, 0)

    lhs = dyadic_square_function(phi) ** 2
    rhs = dyadic_maximal(c_grid) ** 2 * dyadic_square_function(b_strict) ** 2
    return lhs, rhs


@dataclass
class ConditionsReport:
    depth: int
    A: float
    B: float
    C: float
    bmo_b: float
    bmo_d: float
    op_norm: float
    witness_A: DyadicIndex | None
    witness_B: DyadicIndex | None
    witness_C: DyadicIndex | None
    b_hash: str
    d_hash: str
    seed: int | None = None

    @property
    def total(self) -> float:
        return self.A + self.B + self.C

    @property
    def ratio(self) -> float | None:
        """``op_norm / (A + B + C)``; ``inf`` flags a violated equivalence, None if both vanish."""
        if self.total > ZERO_SUM:
            return self.op_norm / self.total
        if self.op_norm > ZERO_NORM:
            return math.inf
        return None

    def to_json(self) -> dict:
        ratio = self.ratio
        return {
            "depth": self.depth,
            "A": self.A,
            "B": self.B,
            "C": self.C,
            "bmo_b": self.bmo_b,
            "bmo_d": self.bmo_d,
            "op_norm": self.op_norm,
            "ratio": "inf" if ratio == math.inf else ratio,
            "witness_A": _label(self.witness_A),
            "witness_B": _label(self.witness_B),
            "witness_C": _label(self.witness_C),
            "seed": self.seed,
            "b_hash": self.b_hash,
            "d_hash": self.d_hash,
        }


def _label(I: DyadicIndex | None) -> str | None:
    return None if I is None else I.label


def full_report(
    b: Symbol, d: Symbol, seed: int | None = None, method: str = "auto"
) -> ConditionsReport:
    _check_pair(b, d)
    prof = condition_profile(b, d)
    (A, wA), (B, wB), (C, wC) = _sup(prof.A), _sup(prof.B), _sup(prof.C)
    sparse = b.tree.size > DENSE_LIMIT
    op = operator_norm(composition_gram_closed(b, d, sparse=sparse), method=method)
    return ConditionsReport(
        depth=b.depth,
        A=A,
        B=B,
        C=C,
        bmo_b=bmo_norm(b),
        bmo_d=bmo_norm(d),
        op_norm=op,
        witness_A=wA,
        witness_B=wB,
        witness_C=wC,
        b_hash=b.digest(),
        d_hash=d.digest(),
        seed=seed,
    )
