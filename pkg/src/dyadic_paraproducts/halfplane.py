"""Tile-constant functions on the upper half-plane and the transplanted operator.

A function constant on Carleson tiles ``T(I) = I x [|I|/2, |I|]`` is stored as
its vector of tile values in canonical node order.  Inner products carry the
tile area ``|I|**2 / 2``::

    <f, g>_sigma = 1/2 * sum_I f_I conj(g_I) sigma_I |I|**2

Normalizing the signed cube ``1_{Q±(J)}`` needs a convention.  ``"half"``
divides by ``|J|/2`` and gives the factor 2 between the transplanted Gram
matrix and the paraproduct Gram matrix.  ``"area"`` divides by ``|J|/sqrt(2)``,
which is the infinite-grid area norm and makes ``U 1_{T(J)} = 1_{Q±(J)}``.
"""

from __future__ import annotations

from functools import lru_cache
import math

import numpy as np

from .dyadic_core import DyadicIndex, Tree, child_values, delta, subtree_sums
from .paraproducts import OperatorMatrix
from .symbols import Symbol, nu_table

QPM_NORMS = {"half": 0.5, "area": 1.0 / math.sqrt(2.0)}
DEFAULT_CONVENTION = "half"


class DegenerateWeightError(ValueError):
    """A child cube carries zero nu-mass, so ``H_J^nu`` does not exist."""


def _qpm_factor(convention: str) -> float:
    try:
        return QPM_NORMS[convention]
    except KeyError:
        raise ValueError(f"unknown signed-cube convention {convention!r}") from None


def _area(depth: int) -> np.ndarray:
    return 0.5 * Tree(depth).lengths ** 2


def inner(f: np.ndarray, g: np.ndarray, depth: int, weight: np.ndarray | None = None):
    """Weighted tile inner product; sums over the first axis."""
    w = _area(depth) if weight is None else _area(depth) * weight
    if np.ndim(f) == 2:
        w = w[:, None]
    return np.sum(np.asarray(f) * np.conj(g) * w, axis=0)


def norm(f: np.ndarray, depth: int, weight: np.ndarray | None = None) -> float:
    return float(np.sqrt(np.real(inner(f, f, depth, weight))))


# ---------------------------------------------------------------------------
# weights


def mu_weight(depth: int) -> np.ndarray:
    return Tree(depth).lengths.copy()


def w_weight(depth: int) -> np.ndarray:
    return 1.0 / Tree(depth).lengths


def nu_weight(b: Symbol) -> np.ndarray:
    return np.abs(b.values) ** 2 / b.tree.lengths**2


# ---------------------------------------------------------------------------
# indicators


def tile(I: DyadicIndex, depth: int) -> np.ndarray:
    out = np.zeros(Tree(depth).size)
    out[Tree(depth).index_of(I)] = 1.0
    return out


def _descendant_mask(I: DyadicIndex, depth: int) -> np.ndarray:
    tree = Tree(depth)
    shift = tree.levels - I.level
    return (shift >= 0) & ((tree.positions >> np.maximum(shift, 0)) == I.position)


def cube(I: DyadicIndex, depth: int) -> np.ndarray:
    """``1_{Q(I)}``: one on every tile ``T(J)``, ``J ⊆ I``."""
    Tree(depth).index_of(I)
    return _descendant_mask(I, depth).astype(float)


def signed_cube(I: DyadicIndex, depth: int) -> np.ndarray:
    """+1 on tiles below ``I+``, -1 below ``I-``, 0 on ``T(I)`` and elsewhere."""
    Tree(depth).index_of(I)
    if I.level == depth:
        return np.zeros(Tree(depth).size)
    minus, plus = I.children()
    return cube(plus, depth) - cube(minus, depth)


def indicator(kind: str, I: DyadicIndex, depth: int) -> np.ndarray:
    builders = {"tile": tile, "cube": cube, "signed_cube": signed_cube}
    if kind not in builders:
        raise ValueError(f"unknown indicator kind {kind!r}")
    return builders[kind](I, depth)


def normalized_tile(I: DyadicIndex, depth: int) -> np.ndarray:
    return tile(I, depth) * (math.sqrt(2.0) / I.length)


def normalized_signed_cube(
    I: DyadicIndex, depth: int, convention: str = DEFAULT_CONVENTION
) -> np.ndarray:
    return signed_cube(I, depth) / (_qpm_factor(convention) * I.length)


# ---------------------------------------------------------------------------
# operators


def apply_M(a, alpha: float, f: np.ndarray) -> np.ndarray:
    """Tilewise multiplication ``(M_a^alpha f)_I = a_I |I|**alpha f_I``."""
    values = a.values if isinstance(a, Symbol) else np.asarray(a)
    depth = (values.size + 1).bit_length() - 2
    factor = values * Tree(depth).lengths ** alpha
    return factor[:, None] * f if np.ndim(f) == 2 else factor * f


@lru_cache(maxsize=32)
def _u_factors(depth: int, convention: str) -> tuple[np.ndarray, np.ndarray]:
    tree = Tree(depth)
    tiles = np.stack([normalized_tile(J, depth) for J in tree.nodes], axis=1)
    qpms = np.stack([normalized_signed_cube(J, depth, convention) for J in tree.nodes], axis=1)
    tiles.setflags(write=False)
    qpms.setflags(write=False)
    return tiles, qpms


@lru_cache(maxsize=32)
def u_matrix(depth: int, convention: str = DEFAULT_CONVENTION) -> np.ndarray:
    """Matrix of ``U = sum_J 1~_{Q±(J)} ⊗ 1~_{T(J)}`` acting on tile vectors."""
    tiles, qpms = _u_factors(depth, convention)
    # (u ⊗ v) f = <f, v> u
    mat = qpms @ (tiles.conj().T * _area(depth))
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=32)
def u_adjoint_matrix(depth: int, convention: str = DEFAULT_CONVENTION) -> np.ndarray:
    """Matrix of ``U* = sum_J 1~_{T(J)} ⊗ 1~_{Q±(J)}``."""
    tiles, qpms = _u_factors(depth, convention)
    mat = tiles @ (qpms.conj().T * _area(depth))
    mat.setflags(write=False)
    return mat


def _depth_of(f: np.ndarray) -> int:
    return (np.shape(f)[0] + 1).bit_length() - 2


def apply_U(f: np.ndarray, convention: str = DEFAULT_CONVENTION) -> np.ndarray:
    return u_matrix(_depth_of(f), convention) @ f


def apply_U_adjoint(g: np.ndarray, convention: str = DEFAULT_CONVENTION) -> np.ndarray:
    return u_adjoint_matrix(_depth_of(g), convention) @ g


def transplanted_operator(
    b: Symbol, d: Symbol, f: np.ndarray, convention: str = DEFAULT_CONVENTION
) -> np.ndarray:
    """``T f = M_{conj b}^{-1} U M_{conj d}^{-1/2} U M_1^{1/2} f``."""
    ones = np.ones(b.tree.size)
    g = apply_M(ones, 0.5, f)
    g = apply_U(g, convention)
    g = apply_M(np.conj(d.values), -0.5, g)
    g = apply_U(g, convention)
    return apply_M(np.conj(b.values), -1.0, g)


def t_gram_direct(b: Symbol, d: Symbol, convention: str = DEFAULT_CONVENTION) -> OperatorMatrix:
    """Gram matrix of the transplanted operator against normalized tiles."""
    if b.depth != d.depth:
        raise ValueError(f"symbol depths differ: {b.depth} vs {d.depth}")
    depth = b.depth
    tiles, _ = _u_factors(depth, convention)
    image = transplanted_operator(b, d, tiles, convention)
    gram = tiles.conj().T @ (image * _area(depth)[:, None])
    return OperatorMatrix(gram, depth)


def t_gram_closed(b: Symbol, d: Symbol) -> OperatorMatrix:
    """``G[I, J] = 2 sum_{I ⊊ K ⊊ J} conj(d_K b_I) delta(J,K) delta(K,I) / sqrt(|J||K|)``.

    Built by enumerating the middle node ``K`` and its strict ancestors and
    descendants; valid for the ``"half"`` signed-cube convention.
    """
    if b.depth != d.depth:
        raise ValueError(f"symbol depths differ: {b.depth} vs {d.depth}")
    depth = b.depth
    n = b.tree.size
    G = np.zeros((n, n), dtype=complex)
    bc, dc = np.conj(b.values), np.conj(d.values)
    for lK in range(1, depth):
        pK = np.arange(2**lK)
        kidx = 2**lK - 1 + pK
        for lJ in range(lK):
            pJ = pK >> (lK - lJ)
            jidx = 2**lJ - 1 + pJ
            d_JK = 2 * ((pK >> (lK - lJ - 1)) & 1) - 1
            coef_J = 2.0 * dc[kidx] * d_JK * 2.0 ** (lJ / 2) * 2.0 ** (lK / 2)
            for lI in range(lK + 1, depth + 1):
                # each K has 2**(lI - lK) descendants at level lI
                span = 2 ** (lI - lK)
                pI = (pK[:, None] * span + np.arange(span)[None, :])
                iidx = 2**lI - 1 + pI
                d_KI = 2 * ((pI >> (lI - lK - 1)) & 1) - 1
                vals = coef_J[:, None] * d_KI * bc[iidx]
                np.add.at(G, (iidx.ravel(), np.repeat(jidx, span)), vals.ravel())
    return OperatorMatrix(G, depth)


# ---------------------------------------------------------------------------
# weighted bases


def h_mu(I: DyadicIndex, depth: int) -> np.ndarray:
    """``1~_{T(I)} / sqrt(mu_I)`` with ``mu_I = |I|`` (the tile value of mu)."""
    return normalized_tile(I, depth) / math.sqrt(I.length)


def cube_masses(b: Symbol) -> np.ndarray:
    """nu-measure of every Carleson cube, ``nu(Q(J)) = 1/2 sum_{K ⊆ J} |b_K|^2``."""
    return subtree_sums(_area(b.depth) * nu_weight(b), b.depth)


def H_nu(b: Symbol, J: DyadicIndex) -> np.ndarray:
    """Haar-type function adapted to nu on ``Q(J)``.

    ``m~(J) (-1_{Q(J+)} / m(J+) + 1_{Q(J-)} / m(J-))`` where ``m`` is the
    nu-measure of cubes, so the family is orthonormal in ``L^2(nu)``.
    """
    depth = b.depth
    if J.level >= depth:
        raise DegenerateWeightError(f"{J} has no children in a depth-{depth} tree")
    m = cube_masses(b)
    minus, plus = J.children()
    m_minus, m_plus = m[minus.index], m[plus.index]
    if m_minus <= 0 or m_plus <= 0:
        raise DegenerateWeightError(f"a child cube of {J} has zero nu-mass")
    m_tilde = math.sqrt(m_plus * m_minus / (m_plus + m_minus))
    return m_tilde * (-cube(plus, depth) / m_plus + cube(minus, depth) / m_minus)


def weighted_basis(b: Symbol, kind: str, node: DyadicIndex) -> np.ndarray:
    if kind == "h_mu":
        return h_mu(node, b.depth)
    if kind == "H_nu":
        return H_nu(b, node)
    raise ValueError(f"unknown basis kind {kind!r}")


def inner_qpm_hnu(
    b: Symbol, K: DyadicIndex, J: DyadicIndex, convention: str = DEFAULT_CONVENTION
) -> complex:
    """``<1~_{Q±(K)}, H_J^nu>_nu`` computed from tile vectors."""
    depth = b.depth
    return complex(
        inner(normalized_signed_cube(K, depth, convention), H_nu(b, J), depth, nu_weight(b))
    )


def qpm_hnu_case_formula(b: Symbol, K: DyadicIndex, J: DyadicIndex) -> float:
    """Case table for ``<1~_{Q±(K)}, H_J^nu>`` written with ``nu`` from :func:`nu_table`.

    Zero for ``J ⊊ K`` or disjoint; ``nu~(K)/|K|`` for ``K = J``; otherwise
    ``delta(J,K) nu~(J)/nu(J±) (nu(K-) - nu(K+)) / |K|``.
    """
    table = nu_table(b)
    if K == J:
        return table.nu_tilde[J.index] / K.length
    if not J.strictly_contains(K):
        return 0.0
    sign = delta(J, K)
    nu_half = table.nu_plus[J.index] if sign > 0 else table.nu_minus[J.index]
    if nu_half == 0:
        return 0.0
    diff = table.nu_minus[K.index] - table.nu_plus[K.index]
    return sign * table.nu_tilde[J.index] / nu_half * diff / K.length


# ---------------------------------------------------------------------------
# testing computations


def forward_testing(
    b: Symbol, d: Symbol, I: DyadicIndex, convention: str = DEFAULT_CONVENTION
) -> tuple[np.ndarray, float]:
    """``U M_{conj d}^{-1/2} U (mu 1_{T(I)})`` and its ``L^2(nu)`` norm."""
    depth = d.depth
    f = mu_weight(depth) * tile(I, depth)
    v = apply_U(f, convention)
    v = apply_M(np.conj(d.values), -0.5, v)
    v = apply_U(v, convention)
    return v, norm(v, depth, nu_weight(b))


def forward_testing_expansion(
    d: Symbol, I: DyadicIndex, convention: str = DEFAULT_CONVENTION
) -> np.ndarray:
    """``sqrt(2)/2 mu_I sum_{K ⊊ I} delta(I,K) |K|^{1/2} conj(d_K) 1~_{Q±(K)}``."""
    depth = d.depth
    out = np.zeros(d.tree.size, dtype=complex)
    for K in d.tree.nodes:
        if not I.strictly_contains(K):
            continue
        coef = delta(I, K) * math.sqrt(K.length) * np.conj(d.values[K.index])
        out += coef * normalized_signed_cube(K, depth, convention)
    return (math.sqrt(2.0) / 2.0) * I.length * out


def backward_testing(b: Symbol, d: Symbol, I: DyadicIndex) -> float:
    """``sum_{J ⊆ I} |J|^{-1} |sum_{K ⊊ J} delta(J,K) |K|^{-1/2} conj(d_K) (nu(K+) - nu(K-))|^2``."""
    table = nu_table(b)
    if table.nu[I.index] == 0:
        raise DegenerateWeightError(f"nu({I}) = 0")
    depth = b.depth
    lengths = b.tree.lengths
    x = np.conj(d.values) / np.sqrt(lengths) * (table.nu_plus - table.nu_minus)
    below = subtree_sums(x, depth)
    below_minus, below_plus = child_values(below, depth)
    inner_sum = below_plus - below_minus
    mask = _descendant_mask(I, depth)
    return float(np.sum(np.abs(inner_sum[mask]) ** 2 / lengths[mask]))


def backward_testing_vector(
    b: Symbol, d: Symbol, I: DyadicIndex, convention: str = DEFAULT_CONVENTION
) -> np.ndarray:
    """``1_{Q(I)} U* M_d^{-1/2} U*(nu 1_{Q(I)})`` by operator application."""
    depth = b.depth
    g = nu_weight(b) * cube(I, depth)
    v = apply_U_adjoint(g, convention)
    v = apply_M(d.values, -0.5, v)
    v = apply_U_adjoint(v, convention)
    return cube(I, depth) * v


def tiles_to_json(f: np.ndarray) -> dict:
    depth = _depth_of(f)
    labels = Tree(depth).labels
    return {
        "depth": depth,
        "entries": [
            {"node": label, "re": float(np.real(v)), "im": float(np.imag(v))}
            for label, v in zip(labels, f)
            if v != 0
        ],
    }


def tiles_from_json(obj: dict) -> np.ndarray:
    from .symbols import from_json

    return from_json(obj).values.copy()
