"""Logistic regression and support vector machines, written from scratch.

Both expect standardised inputs. Binary problems use labels {0, 1};
multiclass problems use {0, ..., K-1}.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_expit, logsumexp, softmax

from artforensics.errors import DegenerateLabels, InvalidInput, ShapeError

TASKS = ("binary", "multiclass")


class ConvergenceWarning(UserWarning):
    pass


def _check_task(task):
    if task not in TASKS:
        raise InvalidInput(f"task must be one of {TASKS}, got {task!r}")


def _check_labels(y, task, n_classes=None):
    y = np.asarray(y).astype(np.int64).ravel()
    present = np.unique(y)
    if len(present) < 2:
        raise DegenerateLabels(f"training labels contain a single class: {present.tolist()}")
    if task == "binary" and not set(present.tolist()) <= {0, 1}:
        raise InvalidInput("binary labels must be 0 or 1")
    k = 2 if task == "binary" else (n_classes or int(present.max()) + 1)
    if present.min() < 0 or present.max() >= k:
        raise InvalidInput(f"labels must lie in 0..{k - 1}")
    return y, k


def _check_width(X, width):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != width:
        raise ShapeError(f"expected inputs of width {width}, got shape {X.shape}")
    return X


# -- logistic regression ------------------------------------------------------

@dataclass(frozen=True)
class LRConfig:
    """Logistic regression settings.

    ``solver`` is accepted for bookkeeping only: every solver name runs the
    same gradient-descent optimizer. Only the ``l2`` penalty is supported.
    """

    c: float = 1.0
    max_iter: int = 100
    tolerance: float = 1e-4
    solver: str = "lbfgs"
    penalty: str = "l2"

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidInput(f"LR c must be positive, got {self.c}")
        if self.max_iter < 1 or not self.tolerance > 0:
            raise InvalidInput("LR max_iter and tolerance must be positive")
        if self.penalty != "l2":
            raise InvalidInput(f"unsupported LR penalty {self.penalty!r}")


@dataclass(frozen=True, eq=False)
class LRModel:
    weights: np.ndarray  # (1, d) for binary, (K, d) for multiclass
    biases: np.ndarray
    task: str
    n_iter: int = 0
    objective_history: tuple[float, ...] = field(default=(), repr=False)

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]


def lr_objective(weights, biases, X, y, c, task):
    """``0.5 * ||W||^2 + c * sum(loss)`` and its gradients (W, b).

    ``loss`` is the logistic loss for binary tasks and the multinomial
    cross-entropy otherwise. Biases are not penalised.
    """
    W = np.atleast_2d(weights)
    if task == "binary":
        z = X @ W[0] + biases[0]
        # log(1 + e^z) - y z
        loss = -np.sum(log_expit(-z)) - np.dot(y, z)
        r = expit(z) - y
        gW = W + c * (r @ X)[None, :]
        gb = np.array([c * r.sum()])
    else:
        Z = X @ W.T + biases
        loss = np.sum(logsumexp(Z, axis=1)) - np.sum(Z[np.arange(len(y)), y])
        R = softmax(Z, axis=1)
        R[np.arange(len(y)), y] -= 1.0
        gW = W + c * (R.T @ X)
        gb = c * R.sum(axis=0)
    f = 0.5 * np.sum(W * W) + c * loss
    return float(f), gW, gb


def train_lr(X, y, cfg: LRConfig = LRConfig(), task: str = "binary", n_classes=None) -> LRModel:
    """Fit by full-batch gradient descent with Armijo backtracking.

    Internally the objective is divided by ``c * n`` so ``cfg.tolerance``
    bounds a per-sample gradient norm. Step sizes start from the
    Barzilai-Borwein estimate of the previous step. Intercepts start at the
    log class priors.
    """
    _check_task(task)
    X = np.asarray(X, dtype=np.float64)
    y, k = _check_labels(y, task, n_classes)
    n, d = X.shape
    rows = 1 if task == "binary" else k
    scale = 1.0 / (cfg.c * n)

    counts = np.bincount(y, minlength=k).astype(np.float64)
    priors = np.maximum(counts, 1e-6) / n
    if task == "binary":
        b0 = np.array([math.log(priors[1] / priors[0])])
    else:
        b0 = np.log(priors)
    theta = np.concatenate([np.zeros(rows * d), b0])

    def evaluate(t):
        W = t[: rows * d].reshape(rows, d)
        f, gW, gb = lr_objective(W, t[rows * d :], X, y, cfg.c, task)
        return f, np.concatenate([gW.ravel(), gb])

    f, g = evaluate(theta)
    history = [f]
    step = 1.0
    it = 0
    for it in range(1, cfg.max_iter + 1):
        gs = g * scale
        gnorm2 = float(gs @ gs)
        if math.sqrt(gnorm2) < cfg.tolerance:
            it -= 1
            break
        while True:
            cand = theta - step * gs
            f_new, g_new = evaluate(cand)
            if f_new * scale <= f * scale - 0.5 * step * gnorm2:
                break
            step *= 0.5
            if step < 1e-20:
                f_new, g_new, cand = f, g, theta
                break
        if cand is theta:
            break
        s = cand - theta
        dy = (g_new - g) * scale
        sy = float(s @ dy)
        step = float(s @ s) / sy if sy > 0 else step * 2.0
        theta, f, g = cand, f_new, g_new
        history.append(f)

    return LRModel(
        weights=theta[: rows * d].reshape(rows, d).copy(),
        biases=theta[rows * d :].copy(),
        task=task,
        n_iter=it,
        objective_history=tuple(history),
    )


def predict_lr(m: LRModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Labels and class probabilities (shape ``(n, K)``, K = 2 for binary)."""
    X = _check_width(X, m.n_features)
    if m.task == "binary":
        p1 = expit(X @ m.weights[0] + m.biases[0])
        proba = np.column_stack([1.0 - p1, p1])
    else:
        proba = softmax(X @ m.weights.T + m.biases, axis=1)
    return np.argmax(proba, axis=1), proba


# -- support vector machine ---------------------------------------------------

@dataclass(frozen=True)
class SVMConfig:
    c: float = 1.0
    kernel: str = "rbf"
    gamma: float | str = "scale"
    tolerance: float = 1e-3
    max_passes: int = 10

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidInput(f"SVM c must be positive, got {self.c}")
        if self.kernel not in ("linear", "rbf"):
            raise InvalidInput(f"unsupported kernel {self.kernel!r}")
        if isinstance(self.gamma, str):
            if self.gamma not in ("scale", "auto"):
                raise InvalidInput(f"gamma must be numeric, 'scale' or 'auto', got {self.gamma!r}")
        elif not self.gamma > 0:
            raise InvalidInput(f"numeric gamma must be positive, got {self.gamma}")
        if not self.tolerance > 0 or self.max_passes < 1:
            raise InvalidInput("SVM tolerance and max_passes must be positive")


def resolve_gamma(gamma, X) -> float:
    """'scale' is 1 / (n_features * Var(X)); 'auto' is 1 / n_features."""
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    if gamma == "scale":
        var = X.var()
        return 1.0 / (d * var) if var > 0 else 1.0
    if gamma == "auto":
        return 1.0 / d
    return float(gamma)


def kernel_matrix(A, B, kernel: str, gamma: float = 1.0) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    dots = A @ B.T
    if kernel == "linear":
        return dots
    sq = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * dots
    return np.exp(-gamma * np.maximum(sq, 0.0))


@dataclass
class SMOResult:
    alpha: np.ndarray
    bias: float
    gradient: np.ndarray
    n_iter: int
    converged: bool


def dual_objective(alpha, y, K) -> float:
    """Dual value ``sum(alpha) - 0.5 * sum_ij a_i a_j y_i y_j K_ij`` (to maximise)."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def kkt_gap(alpha, y, K, C) -> float:
    """Maximal KKT violation ``m(alpha) - M(alpha)``; zero at the optimum."""
    G = y * (K @ (alpha * y)) - 1.0
    yG = -y * G
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    if not up.any() or not low.any():
        return 0.0
    return float(max(yG[up].max() - yG[low].min(), 0.0))


def smo(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3, max_passes: int = 10,
        max_iter: int | None = None) -> SMOResult:
    """Solve the soft-margin SVM dual by sequential minimal optimization.

    Pairs are chosen by maximal violation with second-order selection of the
    partner (Fan, Chen and Lin, 2005) and solved analytically. Stops once the
    KKT gap is below ``tol``. Stops early with a warning after ``max_passes``
    consecutive sweeps of n updates that barely move the objective, or after
    ``max_iter`` updates.
    """
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    tau = 1e-12
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    if max_iter is None:
        max_iter = max(1_000_000, 100 * n)
    sweep = max(n, 1)
    stalls = 0
    obj_mark = 0.0
    converged = False
    it = 0
    while it < max_iter:
        yG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.flatnonzero(up)[np.argmax(yG[up])])
        m = yG[i]
        if m - yG[low].min() < tol:
            converged = True
            break
        cand = low & (yG < m)
        b = m - yG[cand]
        a = diag[i] + diag[cand] - 2.0 * K[i, cand]
        a = np.where(a > 0, a, tau)
        j = int(np.flatnonzero(cand)[np.argmin(-(b * b) / a)])

        ai_old, aj_old = alpha[i], alpha[j]
        Kij = K[i, j]
        if y[i] != y[j]:
            quad = diag[i] + diag[j] - 2.0 * Kij
            quad = quad if quad > 0 else tau
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + delta, aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * Kij
            quad = quad if quad > 0 else tau
            delta = (G[i] - G[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - delta, aj_old + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        dai, daj = ai - ai_old, aj - aj_old
        G += y * (y[i] * dai * K[i] + y[j] * daj * K[j])
        it += 1

        if it % sweep == 0:
            obj = 0.5 * float(alpha @ (G - 1.0))
            if obj_mark - obj <= 1e-12 * max(1.0, abs(obj)):
                stalls += 1
                if stalls >= max_passes:
                    break
            else:
                stalls = 0
            obj_mark = obj

    if not converged:
        warnings.warn(f"SMO stopped after {it} updates without reaching KKT tolerance {tol}",
                      ConvergenceWarning, stacklevel=2)
    return SMOResult(alpha=alpha, bias=_bias(alpha, y, G, C), gradient=G, n_iter=it,
                     converged=converged)


def _bias(alpha, y, G, C) -> float:
    yG = y * G
    at_upper = alpha >= C
    at_lower = alpha <= 0
    free = ~at_upper & ~at_lower
    if free.any():
        rho = yG[free].mean()
    else:
        ub_mask = (at_upper & (y < 0)) | (at_lower & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (at_lower & (y < 0))
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        rho = 0.5 * (ub + lb) if np.isfinite(ub) and np.isfinite(lb) else 0.0
    return float(-rho)


@dataclass(frozen=True, eq=False)
class BinarySVM:
    """One two-class machine; positive decisions vote for ``positive``."""

    positive: int
    negative: int
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i for each support vector
    bias: float
    converged: bool = True

    def decision(self, X, kernel, gamma) -> np.ndarray:
        if len(self.dual_coef) == 0:
            return np.full(len(X), self.bias)
        return kernel_matrix(X, self.support_vectors, kernel, gamma) @ self.dual_coef + self.bias


@dataclass(frozen=True, eq=False)
class SVMModel:
    machines: tuple[BinarySVM, ...]
    kernel: str
    gamma: float
    c: float
    task: str
    n_classes: int
    n_features: int

    def decision_function(self, X) -> np.ndarray:
        """Binary: signed distance-like score (> 0 means class 1).
        Multiclass: one column per class pair, in training order."""
        X = _check_width(X, self.n_features)
        cols = [m.decision(X, self.kernel, self.gamma) for m in self.machines]
        return cols[0] if self.task == "binary" else np.column_stack(cols)


def train_binary_svm(X, signs, cfg: SVMConfig, gamma: float, positive=1, negative=0):
    K = kernel_matrix(X, X, cfg.kernel, gamma)
    res = smo(K, signs, cfg.c, cfg.tolerance, cfg.max_passes)
    sv = res.alpha > 0
    machine = BinarySVM(positive=positive, negative=negative,
                        support_vectors=np.asarray(X)[sv].copy(),
                        dual_coef=(res.alpha * signs)[sv], bias=res.bias,
                        converged=res.converged)
    return machine, res


def train_svm(X, y, cfg: SVMConfig = SVMConfig(), task: str = "binary", n_classes=None) -> SVMModel:
    """Binary machine, or one machine per class pair for multiclass tasks."""
    _check_task(task)
    X = np.asarray(X, dtype=np.float64)
    y, k = _check_labels(y, task, n_classes)
    gamma = resolve_gamma(cfg.gamma, X)
    machines = []
    if task == "binary":
        machine, _ = train_binary_svm(X, np.where(y == 1, 1.0, -1.0), cfg, gamma, 1, 0)
        machines.append(machine)
    else:
        present = np.unique(y)
        for ai, a in enumerate(present):
            for b in present[ai + 1 :]:
                rows = (y == a) | (y == b)
                signs = np.where(y[rows] == a, 1.0, -1.0)
                machine, _ = train_binary_svm(X[rows], signs, cfg, gamma, int(a), int(b))
                machines.append(machine)
    return SVMModel(tuple(machines), cfg.kernel, gamma, cfg.c, task, k, X.shape[1])


def predict_svm(m: SVMModel, X) -> np.ndarray:
    X = _check_width(X, m.n_features)
    votes = np.zeros((len(X), m.n_classes), dtype=np.int64)
    rows = np.arange(len(X))
    for machine in m.machines:
        f = machine.decision(X, m.kernel, m.gamma)
        winner = np.where(f > 0, machine.positive, machine.negative)
        np.add.at(votes, (rows, winner), 1)
    return np.argmax(votes, axis=1)
