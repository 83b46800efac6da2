"""Linear discriminant analysis with optional Ledoit-Wolf shrinkage.

The discriminant is the standard one for Gaussian classes with a shared
covariance: score_c(x) = x' S^-1 mu_c - mu_c' S^-1 mu_c / 2 + log prior_c.
With shrinkage="auto" the pooled covariance S is replaced by
(1 - lam) S + lam (tr(S)/d) I with the shrinkage intensity estimated from
the per-class-centered data; without shrinkage a singular S is an error,
never silently regularized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SingularCovariance


def ledoit_wolf_shrinkage(X_centered: np.ndarray) -> float:
    """Shrinkage intensity toward the scaled identity, from centered data.

    Implements the analytic intensity estimate for the identity-target
    estimator: lam = min(1, b^2 / d^2) where b^2 measures the sampling
    error of the empirical covariance and d^2 its distance from the target.
    """
    X = np.asarray(X_centered, dtype=np.float64)
    n, d = X.shape
    if n < 2:
        return 1.0
    emp = X.T @ X / n
    mu = np.trace(emp) / d
    # delta^2: squared Frobenius distance between emp and mu*I, normalized
    delta2 = np.sum(emp * emp) / d - 2.0 * mu * np.trace(emp) / d + mu * mu
    if delta2 <= 0:
        return 0.0
    X2 = X * X
    beta_raw = np.sum(X2.T @ X2) / n - np.sum(emp * emp)
    beta2 = beta_raw / (n * d)
    beta2 = min(beta2, delta2)
    return float(max(0.0, beta2 / delta2))


@dataclass
class LdaState:
    means: np.ndarray  # (K, d)
    coef: np.ndarray  # (K, d) rows S^-1 mu_c
    intercept: np.ndarray  # (K,)
    shrinkage: float | None  # estimated intensity, None without shrinkage

    def decision(self, X: np.ndarray) -> np.ndarray:
        return X @ self.coef.T + self.intercept

    def to_json_dict(self) -> dict:
        return {
            "means": self.means.tolist(),
            "coef": self.coef.tolist(),
            "intercept": self.intercept.tolist(),
            "shrinkage": self.shrinkage,
        }


def fit_lda(X: np.ndarray, y: np.ndarray, shrinkage: str | None = None) -> LdaState:
    """Fit the discriminant on (already standardized) data.

    ``shrinkage`` is None for the plain estimator or "auto" for the
    Ledoit-Wolf intensity. Raises SingularCovariance when the pooled
    covariance cannot be factorized and shrinkage is off.
    """
    classes = np.unique(y)
    n, d = X.shape
    means = np.vstack([X[y == c].mean(axis=0) for c in classes])
    priors = np.array([np.mean(y == c) for c in classes])
    centered = X - means[np.searchsorted(classes, y)]
    pooled = centered.T @ centered / n

    lam: float | None = None
    if shrinkage == "auto":
        lam = ledoit_wolf_shrinkage(centered)
        target = np.trace(pooled) / d
        pooled = (1.0 - lam) * pooled + lam * target * np.eye(d)
    elif shrinkage is not None:
        raise ValueError(f"shrinkage must be None or 'auto', got {shrinkage!r}")

    try:
        chol = np.linalg.cholesky(pooled)
    except np.linalg.LinAlgError:
        raise SingularCovariance() from None
    # coef_c = S^-1 mu_c via two triangular solves
    tmp = np.linalg.solve(chol, means.T)
    coef = np.linalg.solve(chol.T, tmp).T
    intercept = -0.5 * np.sum(means * coef, axis=1) + np.log(priors)
    return LdaState(means=means, coef=coef, intercept=intercept, shrinkage=lam)


def predict_lda(state: LdaState, classes: np.ndarray, X: np.ndarray) -> np.ndarray:
    scores = state.decision(X)
    return classes[np.argmax(scores, axis=1)]
