"""Biorthogonal eigendecomposition and Chalker-Mehlig overlap matrices.

The left eigenvectors are obtained by inverting the right-eigenvector
matrix, so biorthogonality ``<L_i|R_j> = delta_ij`` and completeness
``sum_k R_k L_k = 1`` hold by construction up to inversion error.  As a
consequence the row-sum identity ``sum_l O_kl = 1`` is exact per matrix
and serves as the main numerical self-check.
"""

import csv
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EigenSystem",
    "NearDefectiveError",
    "eig_biorthogonal",
    "overlap_matrix",
    "diagonal_overlaps",
    "write_eigen_csv",
    "write_pairs_csv",
]


class NearDefectiveError(np.linalg.LinAlgError):
    """Eigenvector matrix too ill-conditioned for trustworthy overlaps."""


@dataclass
class EigenSystem:
    """Eigenvalues with biorthogonal right/left eigenvector sets.

    ``right[:, k]`` is the k-th right eigenvector (column), ``left[k, :]``
    the k-th left eigenvector (row).  ``cond`` estimates the condition
    number of the right-eigenvector matrix and ``residual`` the largest
    eigenequation residual relative to ``||X||``.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    cond: float
    residual: float

    @property
    def n(self):
        return len(self.eigenvalues)

    def biorthogonality_residual(self):
        return float(np.max(np.abs(self.left @ self.right - np.eye(self.n))))


def eig_biorthogonal(x, cond_limit=1e12, raise_near_defective=True):
    """Eigendecompose a complex matrix into a biorthogonal system.

    Eigenvalues are sorted lexicographically by (Re, Im) for
    reproducibility.  A condition estimate of the right-eigenvector
    matrix above ``cond_limit`` flags the sample as near-defective;
    callers typically drop such samples and count them.
    """
    x = np.asarray(x, dtype=complex)
    lam, r = np.linalg.eig(x)
    order = np.lexsort((lam.imag, lam.real))
    lam = lam[order]
    r = r[:, order]
    cond = float(np.linalg.cond(r))
    if raise_near_defective and (not np.isfinite(cond) or cond > cond_limit):
        raise NearDefectiveError(
            f"eigenvector condition estimate {cond:.3g} above limit")
    left = np.linalg.inv(r)
    norm = np.linalg.norm(x, 2)
    res_r = np.max(np.abs(x @ r - r * lam[np.newaxis, :]))
    res_l = np.max(np.abs(left @ x - lam[:, np.newaxis] * left))
    residual = float(max(res_r, res_l) / max(norm, 1.0))
    return EigenSystem(lam, r, left, cond, residual)


def overlap_matrix(es):
    """Full overlap matrix O_kl = <L_k|L_l><R_l|R_k>.

    Row sums obey ``sum_l O_kl = 1`` exactly (up to inversion error), a
    direct consequence of completeness.
    """
    a = es.left @ es.left.conj().T      # a[k, l] = <L_k|L_l>
    b = es.right.conj().T @ es.right    # b[l, k] = <R_l|R_k>
    return a * b.T


def diagonal_overlaps(es):
    """Diagonal overlaps O_kk = |L_k|^2 |R_k|^2 (squared condition numbers)."""
    ln = np.sum(np.abs(es.left) ** 2, axis=1)
    rn = np.sum(np.abs(es.right) ** 2, axis=0)
    return ln * rn


def write_eigen_csv(path, rows, header_comment=None):
    """Write eigen.csv rows: sample_id, k, re_lambda, im_lambda, O_kk_real."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "k", "re_lambda", "im_lambda", "o_kk"])
        for row in rows:
            writer.writerow(row)


def write_pairs_csv(path, rows, header_comment=None):
    """Write pairs.csv rows:

    sample_id, k, l, re_lambda_k, im_lambda_k, re_lambda_l, im_lambda_l,
    re_o_kl, im_o_kl
    """
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "k", "l",
                         "re_lambda_k", "im_lambda_k",
                         "re_lambda_l", "im_lambda_l",
                         "re_o_kl", "im_o_kl"])
        for row in rows:
            writer.writerow(row)


def eigen_rows(sample_id, es, overlaps_diag=None):
    """Rows for :func:`write_eigen_csv` from one eigensystem."""
    if overlaps_diag is None:
        overlaps_diag = diagonal_overlaps(es)
    lam = es.eigenvalues
    return [(sample_id, k, lam[k].real, lam[k].imag, float(overlaps_diag[k].real))
            for k in range(es.n)]


def pair_rows(sample_id, es, o=None, min_separation=0.0, subsample=None,
              rng=None):
    """Rows for :func:`write_pairs_csv`, optionally thinned.

    ``min_separation`` drops pairs closer than the given eigenvalue
    distance; ``subsample`` keeps each remaining pair with the given
    probability (requires ``rng``).
    """
    if o is None:
        o = overlap_matrix(es)
    lam = es.eigenvalues
    n = es.n
    rows = []
    for k in range(n):
        for l in range(n):
            if k == l:
                continue
            if min_separation > 0 and abs(lam[k] - lam[l]) < min_separation:
                continue
            if subsample is not None and rng.random() > subsample:
                continue
            rows.append((sample_id, k, l,
                         lam[k].real, lam[k].imag, lam[l].real, lam[l].imag,
                         o[k, l].real, o[k, l].imag))
    return rows
