"""Independent reference implementations used only by the test suite.

These deliberately avoid the package's own algorithms and, where it
matters, its numeric shortcuts:

- The SVM oracle solves the box-constrained dual by plain projected
  gradient descent with a 1/L step, run to tight convergence. No
  coordinate descent, no shared code with the trainer.
- The chi-square tail probability comes from numerical integration of the
  normal density, not from erfc.
- The exact McNemar p-value and kappa use exact rational arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def svm_dual_oracle(X: np.ndarray, y: np.ndarray, C: float,
                    pg_tol: float = 1e-10, max_iter: int = 2_000_000):
    """Solve min 0.5*a'Qa - e'a over the box [0, C]^n by projected gradient.

    X must already include the constant bias column so the objective
    matches the trainer's exactly. Returns (alpha, w).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    Z = X * y[:, None]
    Q = Z @ Z.T
    n = len(y)
    L = float(np.linalg.eigvalsh(Q)[-1])
    if L <= 0:
        L = 1.0
    step = 1.0 / L
    a = np.zeros(n)
    for it in range(max_iter):
        g = Q @ a - 1.0
        a_next = np.clip(a - step * g, 0.0, C)
        if it % 50 == 0:
            pg = g.copy()
            pg[(a <= 0.0) & (g > 0.0)] = 0.0
            pg[(a >= C) & (g < 0.0)] = 0.0
            if float(np.abs(pg).max()) < pg_tol:
                break
            if float(np.abs(a_next - a).max()) < 1e-16 and it > 0:
                break
        a = a_next
    w = Z.T @ a
    return a, w


def svm_primal_objective(X: np.ndarray, y: np.ndarray, C: float,
                         w: np.ndarray) -> float:
    X = np.asarray(X, dtype=np.float64)
    margins = 1.0 - y * (X @ w)
    return 0.5 * float(w @ w) + C * float(np.clip(margins, 0.0, None).sum())


def ovr_oracle_predict(train_X: np.ndarray, train_labels: list,
                       classes: list, test_X: np.ndarray, C: float) -> list:
    """Brute-force one-vs-rest: one dual-oracle model per class, argmax."""
    W = []
    for c in classes:
        y = np.array([1.0 if lb == c else -1.0 for lb in train_labels])
        _, w = svm_dual_oracle(train_X, y, C)
        W.append(w)
    scores = test_X @ np.array(W).T
    return [classes[int(np.argmax(row))] for row in scores]


def normal_upper_tail(z: float) -> float:
    """P(Z > z) for standard normal, by Simpson integration of the density."""
    if z < 0:
        return 1.0 - normal_upper_tail(-z)
    upper = z + 40.0
    steps = 400_000  # even
    h = (upper - z) / steps
    xs = z + h * np.arange(steps + 1)
    ys = np.exp(-0.5 * xs * xs) / math.sqrt(2.0 * math.pi)
    weights = np.ones(steps + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return float(h / 3.0 * (weights * ys).sum())


def chi2_1df_upper_tail(stat: float) -> float:
    """P(chi2_1 > stat) = P(|Z| > sqrt(stat))."""
    if stat <= 0:
        return 1.0
    return min(1.0, 2.0 * normal_upper_tail(math.sqrt(stat)))


def mcnemar_exact_p(b: int, c: int) -> float:
    """Two-sided exact binomial p for the discordant-pair count."""
    n = b + c
    if n == 0:
        return 1.0
    k = min(b, c)
    cdf = Fraction(0)
    for i in range(k + 1):
        cdf += Fraction(math.comb(n, i), 2 ** n)
    return float(min(Fraction(1), 2 * cdf))


def kappa_exact(a: list, b: list) -> float:
    """Cohen's kappa in exact rational arithmetic."""
    n = len(a)
    assert n == len(b) and n > 0
    agree = sum(1 for x, y_ in zip(a, b) if x == y_)
    po = Fraction(agree, n)
    labels = set(a) | set(b)
    pe = Fraction(0)
    for lb in labels:
        pe += Fraction(a.count(lb), n) * Fraction(b.count(lb), n)
    if pe == 1:
        return 1.0 if po == 1 else float("nan")
    return float((po - pe) / (1 - pe))
