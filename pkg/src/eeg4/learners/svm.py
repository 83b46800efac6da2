"""Support vector machines trained by sequential minimal optimization.

One SMO solver serves both kernels (the linear machine is just the linear
kernel). The solver does coordinate-pair ascent on the dual with
maximal-violating-pair working-set selection; it stops when the duality
gap between the most violated bounds drops under ``tol``, which bounds
every sample's KKT violation by ``tol``. Multiclass is one-vs-one with
majority voting, ties to the lowest class index.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _smo_core(K, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    f = np.zeros(n)  # decision values without bias: sum_j alpha_j y_j K_ij
    it = 0
    gap = 0.0
    while it < max_iter:
        # maximal violating pair over the feasible ascent directions
        i_up = -1
        g_up = -1.0e300
        i_low = -1
        g_low = 1.0e300
        for t in range(n):
            yt = y[t]
            a = alpha[t]
            v = yt - f[t]  # -y * (y*f - 1) = y - f
            if (yt > 0 and a < C) or (yt < 0 and a > 0):
                if v > g_up:
                    g_up = v
                    i_up = t
            if (yt > 0 and a > 0) or (yt < 0 and a < C):
                if v < g_low:
                    g_low = v
                    i_low = t
        gap = g_up - g_low
        if gap < tol or i_up < 0 or i_low < 0:
            break
        it += 1
        i = i_up
        j = i_low
        yi = y[i]
        yj = y[j]
        ai_old = alpha[i]
        aj_old = alpha[j]
        if yi != yj:
            L = max(0.0, aj_old - ai_old)
            H = min(C, C + aj_old - ai_old)
        else:
            L = max(0.0, ai_old + aj_old - C)
            H = min(C, ai_old + aj_old)
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta < 1e-12:
            eta = 1e-12
        Ei = f[i] - yi
        Ej = f[j] - yj
        aj = aj_old + yj * (Ei - Ej) / eta
        if aj < L:
            aj = L
        elif aj > H:
            aj = H
        ai = ai_old + yi * yj * (aj_old - aj)
        d_i = (ai - ai_old) * yi
        d_j = (aj - aj_old) * yj
        if d_i == 0.0 and d_j == 0.0:
            break  # numerically stuck at the box boundary
        alpha[i] = ai
        alpha[j] = aj
        for t in range(n):
            f[t] += d_i * K[i, t] + d_j * K[j, t]
    return alpha, f, it, gap


@dataclass
class SmoResult:
    alphas: np.ndarray
    bias: float
    iterations: int
    converged: bool


def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    tol: float = 1e-3,
    max_passes: int | None = None,
) -> SmoResult:
    """Solve the dual SVM on a precomputed kernel matrix.

    ``y`` holds +/-1 labels. The bias is the average of y - f over unbound
    support vectors, falling back to the midpoint of the feasible interval
    when every alpha sits on the box. On hitting ``max_passes`` the best
    iterate is returned with ``converged=False``.
    """
    K = np.ascontiguousarray(K, np.float64)
    y = np.ascontiguousarray(y, np.float64)
    n = y.shape[0]
    if K.shape != (n, n):
        raise ValueError(f"kernel shape {K.shape} does not match {n} labels")
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("labels must be +/-1")
    if C <= 0:
        raise ValueError("C must be positive")
    cap = max_passes if max_passes is not None else max(10_000, 100 * n)
    alpha, f, iterations, gap = _smo_core(K, y, C, tol, cap)

    unbound = (alpha > 1e-8) & (alpha < C - 1e-8)
    if unbound.any():
        bias = float(np.mean(y[unbound] - f[unbound]))
    else:
        # all alphas at the box: any b in [lo, hi] satisfies KKT; take the midpoint
        lo, hi = -np.inf, np.inf
        for t in range(n):
            v = y[t] - f[t]
            at_zero = alpha[t] <= 1e-8
            if (at_zero and y[t] > 0) or (not at_zero and y[t] < 0):
                lo = max(lo, v)
            else:
                hi = min(hi, v)
        if np.isfinite(lo) and np.isfinite(hi):
            bias = float((lo + hi) / 2.0)
        elif np.isfinite(lo):
            bias = float(lo)
        elif np.isfinite(hi):
            bias = float(hi)
        else:
            bias = 0.0
    return SmoResult(alphas=alpha, bias=bias, iterations=iterations, converged=gap < tol)


def linear_kernel(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B.T


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    aa = np.einsum("ij,ij->i", A, A)
    bb = np.einsum("ij,ij->i", B, B)
    d2 = aa[:, None] + bb[None, :] - 2.0 * (A @ B.T)
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-gamma * d2)


@dataclass
class BinaryMachine:
    class_a: int  # vote winner on positive decision (lower class id)
    class_b: int
    sv_X: np.ndarray
    sv_coef: np.ndarray  # alpha_i * y_i for support vectors
    bias: float
    converged: bool

    def to_json_dict(self) -> dict:
        return {
            "class_a": self.class_a,
            "class_b": self.class_b,
            "sv_X": self.sv_X.tolist(),
            "sv_coef": self.sv_coef.tolist(),
            "bias": self.bias,
            "converged": self.converged,
        }


@dataclass
class SvmState:
    machines: list[BinaryMachine]
    kernel: str
    gamma: float | None
    n_classes: int

    def to_json_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "gamma": self.gamma,
            "n_classes": self.n_classes,
            "machines": [m.to_json_dict() for m in self.machines],
        }


def resolve_gamma(gamma, X: np.ndarray) -> float:
    if gamma == "scale":
        v = float(X.var())
        return 1.0 / (X.shape[1] * v) if v > 0 else 1.0 / X.shape[1]
    return float(gamma)


def fit_multiclass_svm(
    X: np.ndarray,
    y_idx: np.ndarray,
    n_classes: int,
    kernel: str = "linear",
    C: float = 1.0,
    gamma="scale",
    tol: float = 1e-3,
    max_passes: int | None = None,
) -> SvmState:
    """Train the C(K,2) one-vs-one machines on (already standardized) data."""
    if kernel not in ("linear", "rbf"):
        raise ValueError(f"kernel must be linear|rbf, got {kernel!r}")
    gamma_value = resolve_gamma(gamma, X) if kernel == "rbf" else None
    machines = []
    for a, b in combinations(range(n_classes), 2):
        mask = (y_idx == a) | (y_idx == b)
        Xp = X[mask]
        yp = np.where(y_idx[mask] == a, 1.0, -1.0)
        if kernel == "linear":
            Kp = linear_kernel(Xp, Xp)
        else:
            Kp = rbf_kernel(Xp, Xp, gamma_value)
        res = smo_solve(Kp, yp, C, tol=tol, max_passes=max_passes)
        sv = res.alphas > 1e-8
        machines.append(
            BinaryMachine(
                class_a=a,
                class_b=b,
                sv_X=Xp[sv],
                sv_coef=(res.alphas * yp)[sv],
                bias=res.bias,
                converged=res.converged,
            )
        )
    return SvmState(machines=machines, kernel=kernel, gamma=gamma_value, n_classes=n_classes)


def svm_decision(state: SvmState, machine: BinaryMachine, X: np.ndarray) -> np.ndarray:
    if machine.sv_X.shape[0] == 0:
        return np.full(X.shape[0], machine.bias)
    if state.kernel == "linear":
        Kx = linear_kernel(X, machine.sv_X)
    else:
        Kx = rbf_kernel(X, machine.sv_X, state.gamma)
    return Kx @ machine.sv_coef + machine.bias


def predict_svm(state: SvmState, X: np.ndarray) -> np.ndarray:
    votes = np.zeros((X.shape[0], state.n_classes), dtype=np.int64)
    for machine in state.machines:
        d = svm_decision(state, machine, X)
        winner = np.where(d >= 0.0, machine.class_a, machine.class_b)
        np.add.at(votes, (np.arange(X.shape[0]), winner), 1)
    return np.argmax(votes, axis=1)
