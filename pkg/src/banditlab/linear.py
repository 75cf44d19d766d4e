"""Per-arm online ridge regression: linear estimate, covariance geometry, width."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import as_context

# Rebuild the maintained inverse when max|sigma @ sigma_inv - I| drifts past this.
INVERSE_DRIFT_TOL = 1e-6


class RidgeState:
    """Online ridge regression with a maintained inverse.

    sigma starts at lambda*I and accumulates x x^T plus an optional isotropic
    inflation gamma_cov * e * I per update.  The inverse is kept by a rank-one
    update on the non-inflated path and recomputed from sigma otherwise.
    """

    def __init__(self, dim: int, lam: float, gamma_cov: float = 0.0):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if not (np.isfinite(lam) and lam > 0):
            raise ValueError("lambda must be positive")
        if not (np.isfinite(gamma_cov) and gamma_cov >= 0):
            raise ValueError("gamma_cov must be >= 0")
        self.dim = int(dim)
        self.lam = float(lam)
        self.gamma_cov = float(gamma_cov)
        self.sigma = self.lam * np.eye(self.dim)
        self.sigma_inv = (1.0 / self.lam) * np.eye(self.dim)
        self.b = np.zeros(self.dim)
        self.mu_hat = np.zeros(self.dim)
        self.update_count = 0

    def predict(self, x) -> float:
        """Linear reward estimate mu_hat . x."""
        x = as_context(x, self.dim)
        return float(self.mu_hat @ x)

    def width_sq(self, x) -> float:
        """x^T sigma_inv x, floored at 0 against round-off."""
        x = as_context(x, self.dim)
        return max(float(x @ (self.sigma_inv @ x)), 0.0)

    def width(self, x) -> float:
        """Normalized width sqrt(x^T sigma_inv x)."""
        return float(np.sqrt(self.width_sq(x)))

    def update(self, x, residual: float, e_knn: float = 0.0) -> None:
        """Fold one observation: sigma += x x^T + gamma_cov*e_knn*I, b += residual*x."""
        x = as_context(x, self.dim)
        if not np.isfinite(residual):
            raise ValueError("residual must be finite")
        if not (np.isfinite(e_knn) and e_knn >= 0):
            raise ValueError("e_knn must be finite and >= 0")
        inflate = self.gamma_cov * float(e_knn)
        self.sigma += np.outer(x, x)
        if inflate > 0.0:
            self.sigma[np.diag_indices(self.dim)] += inflate
            self.sigma_inv = np.linalg.inv(self.sigma)
        else:
            # Sherman-Morrison rank-one inverse update.
            v = self.sigma_inv @ x
            self.sigma_inv -= np.outer(v, v) / (1.0 + float(x @ v))
        self.b += float(residual) * x
        drift = np.abs(self.sigma @ self.sigma_inv - np.eye(self.dim)).max()
        if drift > INVERSE_DRIFT_TOL:
            self.sigma_inv = np.linalg.inv(self.sigma)
        self.mu_hat = self.sigma_inv @ self.b
        self.update_count += 1

    def det_sigma(self) -> float:
        return float(np.linalg.det(self.sigma))

    def copy(self) -> "RidgeState":
        out = RidgeState(self.dim, self.lam, self.gamma_cov)
        out.sigma = self.sigma.copy()
        out.sigma_inv = self.sigma_inv.copy()
        out.b = self.b.copy()
        out.mu_hat = self.mu_hat.copy()
        out.update_count = self.update_count
        return out


@dataclass
class ConfidenceBall:
    """Ellipsoid {mu : (mu - center)^T shape (mu - center) <= radius_sq}."""

    center: np.ndarray
    shape: np.ndarray
    radius_sq: float

    def __post_init__(self):
        if not (np.isfinite(self.radius_sq) and self.radius_sq >= 0):
            raise ValueError("radius_sq must be >= 0")

    def boundary_point(self, direction) -> np.ndarray:
        """The boundary point center + sqrt(radius_sq) * shape^{-1/2} u, u = unit direction."""
        u = np.asarray(direction, dtype=np.float64)
        norm = np.linalg.norm(u)
        if norm == 0:
            raise ValueError("direction must be nonzero")
        u = u / norm
        vals, vecs = np.linalg.eigh(self.shape)
        inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.T
        return self.center + np.sqrt(self.radius_sq) * (inv_sqrt @ u)


def solve_batch(contexts: Sequence, residuals: Sequence[float], lam: float,
                dim: Optional[int] = None) -> np.ndarray:
    """Direct batch ridge solve of (X^T X + lam I) mu = X^T y.

    Test oracle for the incremental state; empty data returns the zero vector
    (``dim`` required in that case).
    """
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError("lambda must be positive")
    rows = [as_context(c) for c in contexts]
    if not rows:
        if dim is None:
            raise ValueError("dim required for empty data")
        return np.zeros(int(dim))
    X = np.vstack(rows)
    y = np.asarray(residuals, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise ValueError("residuals length must match contexts")
    d = X.shape[1]
    if dim is not None and d != dim:
        raise ValueError("context dimension mismatch")
    return np.linalg.solve(X.T @ X + lam * np.eye(d), X.T @ y)
