"""Embedding refinement: ZCA whitening, centering, and row normalization."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .cooc import EmbeddingMatrix

# Eigenvalues at or below this are treated as zero-variance directions; they
# cannot be rescaled to unit variance and get the epsilon-regularized scale.
RANK_CUTOFF = 1e-8

DEFAULT_EPSILON = 1e-5


@dataclass
class PostprocReport:
    """Record of the transforms applied, in order, with diagnostics."""

    steps: list[str] = field(default_factory=list)
    epsilon: float | None = None
    degenerate_directions: int = 0
    pre_covariance_condition: float | None = None
    post_covariance_condition: float | None = None
    rows_normalized: int = 0
    zero_rows: int = 0

    def to_dict(self) -> dict:
        return {
            "steps": list(self.steps),
            "epsilon": self.epsilon,
            "degenerate_directions": self.degenerate_directions,
            "pre_covariance_condition": self.pre_covariance_condition,
            "post_covariance_condition": self.post_covariance_condition,
            "rows_normalized": self.rows_normalized,
            "zero_rows": self.zero_rows,
        }


def _covariance(x: np.ndarray) -> np.ndarray:
    centered = x - x.mean(axis=0)
    return centered.T @ centered / (x.shape[0] - 1)


def _condition(eigenvalues: np.ndarray) -> float:
    top = float(eigenvalues.max())
    bottom = float(eigenvalues.min())
    return np.inf if bottom <= 0 else top / bottom


def whiten(matrix: EmbeddingMatrix, epsilon: float = DEFAULT_EPSILON,
           report: PostprocReport | None = None) -> EmbeddingMatrix:
    """Decorrelate columns so the feature covariance is the identity.

    Uses the symmetric inverse square root of the covariance, which rotates
    back into the original basis. Directions whose eigenvalue falls at or
    below RANK_CUTOFF are rescaled with an epsilon-regularized denominator
    instead of being blown up, and counted in the report.
    """
    rows = np.asarray(matrix.rows, dtype=np.float64)
    n, dim = rows.shape
    if n < dim + 1:
        raise ValueError(f"whitening needs at least {dim + 1} rows, got {n}")
    if not np.isfinite(rows).all():
        raise ValueError("whitening requires finite entries")
    report = report if report is not None else PostprocReport()
    report.epsilon = epsilon

    centered = rows - rows.mean(axis=0)
    cov = centered.T @ centered / (n - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    report.pre_covariance_condition = _condition(eigenvalues)

    degenerate = eigenvalues <= RANK_CUTOFF
    report.degenerate_directions = int(degenerate.sum())
    safe = np.where(degenerate, 1.0, eigenvalues)
    scale = np.where(degenerate, 1.0 / np.sqrt(eigenvalues + epsilon),
                     1.0 / np.sqrt(safe))
    transform = (eigenvectors * scale) @ eigenvectors.T
    out = centered @ transform

    post_eig = np.clip(np.linalg.eigvalsh(_covariance(out)), 0.0, None)
    report.post_covariance_condition = _condition(post_eig)
    report.steps.append("whiten")
    meta = replace(matrix.meta, postproc=matrix.meta.postproc + ("whiten",))
    return EmbeddingMatrix(out, meta)


def center_and_normalize(matrix: EmbeddingMatrix,
                         report: PostprocReport | None = None,
                         row_mean: bool = False) -> EmbeddingMatrix:
    """Subtract the column mean, then scale each row to unit L2 norm.

    ``row_mean`` switches to subtracting each row's own mean instead (kept
    for comparison; the column variant is the default). Rows that are zero
    after centering are left zero and counted in the report.
    """
    rows = np.asarray(matrix.rows, dtype=np.float64)
    if not np.isfinite(rows).all():
        raise ValueError("normalization requires finite entries")
    report = report if report is not None else PostprocReport()
    if row_mean:
        centered = rows - rows.mean(axis=1, keepdims=True)
    else:
        centered = rows - rows.mean(axis=0)
    norms = np.linalg.norm(centered, axis=1)
    zero = norms == 0.0
    out = centered.copy()
    out[~zero] /= norms[~zero, None]
    report.zero_rows = int(zero.sum())
    report.rows_normalized = int((~zero).sum())
    report.steps.append("center_row_mean" if row_mean else "center")
    report.steps.append("l2_normalize")
    tag = "center_row_mean+l2" if row_mean else "center+l2"
    meta = replace(matrix.meta, postproc=matrix.meta.postproc + (tag,))
    return EmbeddingMatrix(out, meta)


def pipeline(matrix: EmbeddingMatrix, epsilon: float = DEFAULT_EPSILON,
             row_mean: bool = False) -> tuple[EmbeddingMatrix, PostprocReport]:
    """Whiten, then center and L2-normalize; shape is always preserved."""
    report = PostprocReport()
    whitened = whiten(matrix, epsilon=epsilon, report=report)
    refined = center_and_normalize(whitened, report=report, row_mean=row_mean)
    return refined, report
