"""Dyadic paraproducts on the real line and the Gram matrix of ``Pi_b Pi_d``.

Two independent routes to the Gram matrix ``G[I, J] = <Pi_b Pi_d h_J, h_I>``:

* :func:`composition_gram_direct` applies the paraproducts to sampled Haar
  functions on the grid and integrates (ground truth);
* :func:`composition_gram_closed` walks chains ``I ⊊ K ⊊ J`` of the tree.
"""

from __future__ import annotations

from dataclasses import dataclass
import csv
import logging
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse

from .dyadic_core import Tree, haar_matrix
from .symbols import Symbol

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2000


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class OperatorMatrix:
    """Matrix of an operator in canonical node order: ``matrix[i, j] = <T e_j, e_i>``."""

    matrix: np.ndarray | scipy.sparse.spmatrix
    depth: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def is_sparse(self) -> bool:
        return scipy.sparse.issparse(self.matrix)

    def toarray(self) -> np.ndarray:
        if self.is_sparse:
            return self.matrix.toarray()
        return np.asarray(self.matrix)

    @property
    def labels(self) -> list[str]:
        return Tree(self.depth).labels


def _check_pair(b: Symbol, d: Symbol) -> int:
    if b.depth != d.depth:
        raise ValueError(f"symbol depths differ: {b.depth} vs {d.depth}")
    return b.depth


def apply_paraproduct(b: Symbol, index: tuple[int, int], f: np.ndarray) -> np.ndarray:
    """``P_b^(alpha, beta) f = sum_I b_I <f, h_I^beta> h_I^alpha`` on the grid.

    ``f`` may be a single grid function of length ``2**(D+1)`` or a stack of
    them as the columns of an ``(2**(D+1), k)`` array.
    """
    alpha, beta = index
    if alpha not in (0, 1) or beta not in (0, 1):
        raise ValueError(f"paraproduct index must be in {{0,1}}^2, got {index}")
    f = np.asarray(f)
    n_cells = 2 ** (b.depth + 1)
    if f.shape[0] != n_cells:
        raise ValueError(f"grid function has {f.shape[0]} cells, tree needs {n_cells}")
    # Haar rows are real, so <f, h> = H @ f / N
    coeffs = haar_matrix(b.depth, beta) @ f / n_cells
    weights = b.values if f.ndim == 1 else b.values[:, None]
    return haar_matrix(b.depth, alpha).T @ (weights * coeffs)


def composition_gram_direct(b: Symbol, d: Symbol) -> OperatorMatrix:
    depth = _check_pair(b, d)
    H = haar_matrix(depth)
    n_cells = H.shape[1]
    image = apply_paraproduct(b, (0, 1), apply_paraproduct(d, (0, 1), H.T))
    return OperatorMatrix(H @ image / n_cells, depth)


def _chain_entries(b: Symbol, d: Symbol):
    """Yield ``(rows, cols, values)`` blocks of the closed-form Gram matrix.

    For each pair of levels ``lJ < lI - 1`` the block sums, over intermediate
    levels ``lK``, the terms ``b_I d_K h_J(K) h_K(I)``.  Each block has one
    entry per node ``I`` at level ``lI``.
    """
    depth = b.depth
    bv, dv = b.values, d.values
    for lI in range(2, depth + 1):
        pI = np.arange(2**lI)
        rows = 2**lI - 1 + pI
        for lJ in range(0, lI - 1):
            total = np.zeros(pI.size, dtype=complex)
            for lK in range(lJ + 1, lI):
                pK = pI >> (lI - lK)
                # h_K on I: sign from the bit of I just below K's level
                h_K_I = np.where((pI >> (lI - lK - 1)) & 1, 1.0, -1.0) * 2.0 ** (lK / 2)
                h_J_K = np.where((pK >> (lK - lJ - 1)) & 1, 1.0, -1.0) * 2.0 ** (lJ / 2)
                total += dv[2**lK - 1 + pK] * h_J_K * h_K_I
            cols = 2**lJ - 1 + (pI >> (lI - lJ))
            yield rows, cols, bv[rows] * total


def composition_gram_closed(b: Symbol, d: Symbol, sparse: bool = False) -> OperatorMatrix:
    """``G[I, J] = sum_{I ⊊ K ⊊ J} b_I d_K h_J(K) h_K(I)``, cost ``O(n D^2)``."""
    depth = _check_pair(b, d)
    n = Tree(depth).size
    blocks = list(_chain_entries(b, d))
    if sparse:
        if blocks:
            rows, cols, vals = (np.concatenate(parts) for parts in zip(*blocks))
        else:
            rows = cols = np.zeros(0, dtype=int)
            vals = np.zeros(0, dtype=complex)
        mat = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
        return OperatorMatrix(mat, depth)
    G = np.zeros((n, n), dtype=complex)
    for rows, cols, vals in blocks:
        G[rows, cols] += vals
    return OperatorMatrix(G, depth)


def _power_iteration(A, tol: float, max_iter: int, seed: int) -> float:
    n = A.shape[1]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    x /= np.linalg.norm(x)
    sigma_old = None
    for it in range(max_iter):
        y = A @ x
        sigma = float(np.linalg.norm(y))
        if sigma == 0.0:
            # random start orthogonal to the row space only for the zero matrix
            return 0.0
        if sigma_old is not None and abs(sigma - sigma_old) < tol * sigma:
            logger.debug("power iteration converged after %d steps", it + 1)
            return sigma
        sigma_old = sigma
        z = A.conj().T @ y
        x = z / np.linalg.norm(z)
    raise ConvergenceError(
        f"power iteration did not reach relative tolerance {tol:g} in {max_iter} steps"
    )


def operator_norm(
    M: OperatorMatrix | np.ndarray,
    method: str = "auto",
    tol: float = 1e-12,
    max_iter: int = 200_000,
    seed: int = 0,
) -> float:
    """Largest singular value by dense SVD or power iteration on ``M* M``.

    ``method="auto"`` uses the SVD up to dimension 2000 and power iteration
    above it.
    """
    A = M.matrix if isinstance(M, OperatorMatrix) else M
    n = A.shape[0]
    if n == 0:
        return 0.0
    if method == "auto":
        method = "dense_svd" if n <= DENSE_LIMIT else "power_iteration"
    if method == "dense_svd":
        if scipy.sparse.issparse(A):
            A = A.toarray()
        if not np.any(A):
            return 0.0
        return float(scipy.linalg.svdvals(A)[0])
    if method == "power_iteration":
        if tol <= 0:
            raise ValueError("power iteration needs tol > 0")
        return _power_iteration(A, tol, max_iter, seed)
    raise ValueError(f"unknown method {method!r}")


def format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def parse_complex(text: str) -> complex:
    return complex(text.replace("i", "j"))


def matrix_filename(kind: str, b: Symbol, d: Symbol) -> str:
    return f"{kind}_D{b.depth}_b{b.digest()}_d{d.digest()}.csv"


def write_matrix_csv(M: OperatorMatrix, path) -> Path:
    path = Path(path)
    labels = M.labels
    dense = M.toarray()
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + labels)
        for label, row in zip(labels, dense):
            writer.writerow([label] + [format_complex(z) for z in row])
    return path


def read_matrix_csv(path) -> OperatorMatrix:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0][1:]
    n = len(header)
    depth = (n + 1).bit_length() - 2
    if Tree(depth).labels != header:
        raise ValueError(f"{path}: header is not a canonical node list")
    mat = np.array([[parse_complex(x) for x in row[1:]] for row in rows[1:]], dtype=complex)
    if mat.shape != (n, n):
        raise ValueError(f"{path}: expected a {n}x{n} matrix, got {mat.shape}")
    return OperatorMatrix(mat, depth)
