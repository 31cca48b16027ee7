"""Brute-force ground truth for the tracking objective and the min-max label.

Builds the full block-tridiagonal quadratic form over the stacked comparator
variable (u_1, ..., u_t) in R^{td} and solves it directly with a dense
solver.  Deliberately shares no code with the learner's recurrences: this
module is the independent check, not a fast path.  Desk-scale instances
only (t*d up to a couple thousand).
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QProblem:
    """Instance of the tracking objective.

    xs: (t, d) inputs; ys: (t,) labels/targets; b, c as in the learner.
    """

    xs: np.ndarray
    ys: np.ndarray
    b: float
    c: float

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or len(self.xs) < 1:
            raise ValueError("need one x per y, at least one example")
        if not (self.b > 0 and self.c > 0):
            raise ValueError("b and c must be positive")


def q_value(p: QProblem, us):
    """Evaluate the objective at an explicit comparator sequence us (t, d)."""
    us = np.asarray(us, dtype=float)
    t = len(p.xs)
    val = p.b * float(us[0] @ us[0])
    for s in range(t - 1):
        diff = us[s + 1] - us[s]
        val += p.c * float(diff @ diff)
    for s in range(t):
        val += (p.ys[s] - float(us[s] @ p.xs[s])) ** 2
    return val


def _stacked_system(p: QProblem):
    """Normal equations H U = beta of the objective over stacked u's.

    Q(U) = U^T H U - 2 beta^T U + sum(y^2) with H block tridiagonal.
    """
    t, d = p.xs.shape
    H = np.zeros((t * d, t * d))
    beta = np.zeros(t * d)
    eye = np.eye(d)
    for s in range(t):
        sl = slice(s * d, (s + 1) * d)
        block = np.outer(p.xs[s], p.xs[s])
        if s == 0:
            block = block + p.b * eye
        if s > 0:
            block = block + p.c * eye
        if s < t - 1:
            block = block + p.c * eye
        H[sl, sl] = block
        beta[sl] = p.ys[s] * p.xs[s]
        if s < t - 1:
            nxt = slice((s + 1) * d, (s + 2) * d)
            H[sl, nxt] = -p.c * eye
            H[nxt, sl] = -p.c * eye
    return H, beta


def brute_force_min_q(p: QProblem):
    """Global minimum of the tracking objective and its minimizer.

    Returns (value, us) where us has shape (t, d).
    """
    t, d = p.xs.shape
    H, beta = _stacked_system(p)
    ustar = np.linalg.solve(H, beta)
    value = float(np.sum(np.asarray(p.ys, dtype=float) ** 2) - beta @ ustar)
    return value, ustar.reshape(t, d)


def brute_force_minmax_label(prefix_xs, prefix_ys, x_last, b, c):
    """Min-max optimal label for the last round by direct enumeration.

    Enumerates (predicted, adversarial) label pairs over {-1,+1}^2,
    scoring each with the squared-loss regret bracket evaluated via
    brute_force_min_q.  Ties break to +1.
    """
    x_last = np.asarray(x_last, dtype=float)
    prefix_xs = np.asarray(prefix_xs, dtype=float).reshape(-1, x_last.shape[0])

    def bracket(y_hat, y):
        xs = np.vstack([prefix_xs, x_last[None, :]])
        ys = np.append(np.asarray(prefix_ys, dtype=float), y)
        min_q, _ = brute_force_min_q(QProblem(xs=xs, ys=ys, b=b, c=c))
        return (y - y_hat) ** 2 - min_q

    best_label, best_worst = None, None
    for y_hat in (+1, -1):
        worst = max(bracket(y_hat, +1), bracket(y_hat, -1))
        if best_worst is None or worst < best_worst - 1e-15:
            best_label, best_worst = y_hat, worst
    return best_label
