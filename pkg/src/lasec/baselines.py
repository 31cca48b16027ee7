"""Comparison algorithms for the drifting-stream benchmarks.

First-order perceptron family (plain, shifting, modified, randomized
budget), the second-order perceptron, the margin-randomized selective
wrapper that turns any margin-producing learner into its -SS variant, and
the variance-thresholded BBQ / BBQ-I queriers.

Every learner exposes ``step(x, request_label, rng)`` returning a
RoundOutcome, plus ``margin(x)`` and ``update(x, y)`` so the selective
wrapper can drive it.  The second-order perceptron computes its margin with
a direct dense solve each round; it deliberately shares no code with the
cached-inverse path in :mod:`lasec.learner` so the two act as independent
cross-checks of each other.
"""

import math

import numpy as np

from .learner import RoundOutcome, query_decision, sign


def _supervised_step(learner, x, request_label):
    """Shared always-query protocol: predict, query, update on mistake."""
    p = learner.margin(x)
    pred = sign(p)
    y = request_label()
    mistake = pred != y
    if mistake:
        learner.update(x, y)
    return RoundOutcome(
        margin=p,
        prediction=pred,
        queried=True,
        query_probability=1.0,
        quad_form=getattr(learner, "last_quad", 0.0),
        mistake=mistake,
        updated=mistake,
    )


class Perceptron:
    """Classic mistake-driven linear classifier: w += y x on mistakes."""

    def __init__(self, dim):
        self.w = np.zeros(dim)
        self.k = 0

    def margin(self, x):
        return float(self.w @ x)

    def update(self, x, y):
        self.w = self.w + y * np.asarray(x, dtype=float)
        self.k += 1

    def step(self, x, request_label, rng=None):
        return _supervised_step(self, x, request_label)


class ShiftingPerceptron:
    """Perceptron with per-mistake weight shrinking.

    On the k-th mistake the weight vector is scaled by 1 - lam/(lam + k)
    before the additive update, weakening dependence on stale mistakes.
    lam -> 0 recovers the plain perceptron.
    """

    def __init__(self, dim, lam):
        if not lam > 0:
            raise ValueError("lam must be positive")
        self.w = np.zeros(dim)
        self.lam = lam
        self.k = 0

    def margin(self, x):
        return float(self.w @ x)

    def update(self, x, y):
        self.k += 1
        lam_k = self.lam / (self.lam + self.k)
        self.w = (1.0 - lam_k) * self.w + y * np.asarray(x, dtype=float)

    def step(self, x, request_label, rng=None):
        return _supervised_step(self, x, request_label)


class ModifiedPerceptron:
    """Reflection-update perceptron operating on unit-normalized inputs.

    Mistaken rounds reflect w across the hyperplane orthogonal to x,
    w -= 2 (w.x) x, which preserves ||w||.  Inputs are normalized to unit
    length on ingestion (copies; the caller's data is untouched).  A
    mistake at w = 0 bootstraps with w = y x since the reflection there is
    a no-op.
    """

    def __init__(self, dim):
        self.w = np.zeros(dim)
        self.k = 0

    @staticmethod
    def _unit(x):
        x = np.asarray(x, dtype=float)
        n = np.linalg.norm(x)
        return x / n if n > 0 else x

    def margin(self, x):
        return float(self.w @ self._unit(x))

    def update(self, x, y):
        xn = self._unit(x)
        if np.all(self.w == 0.0):
            self.w = y * xn
        else:
            self.w = self.w - 2.0 * float(self.w @ xn) * xn
        self.k += 1

    def step(self, x, request_label, rng=None):
        return _supervised_step(self, x, request_label)


class RandomizedBudgetPerceptron:
    """Perceptron over at most B stored examples with uniform eviction.

    On a mistake with a full store, one stored example is discarded
    uniformly at random before (x, y) is added; w is the signed sum of the
    stored examples throughout.
    """

    def __init__(self, dim, budget, rng):
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.w = np.zeros(dim)
        self.budget = int(budget)
        self.store = []
        self.rng = rng
        self.evictions = []

    def margin(self, x):
        return float(self.w @ x)

    def update(self, x, y):
        x = np.asarray(x, dtype=float)
        if len(self.store) == self.budget:
            idx = int(self.rng.integers(len(self.store)))
            xe, ye = self.store.pop(idx)
            self.w = self.w - ye * xe
            self.evictions.append(idx)
        self.store.append((x, y))
        self.w = self.w + y * x

    def step(self, x, request_label, rng=None):
        return _supervised_step(self, x, request_label)


class SecondOrderPerceptron:
    """Ridge-style second-order classifier, the c = inf reference point.

    Maintains A = ridge*I + sum of mistaken x x^T and v = sum of mistaken
    y x; the margin is x^T (A + x x^T)^{-1} v, evaluated with a direct
    solve on every round.
    """

    def __init__(self, dim, ridge=1.0):
        if not ridge > 0:
            raise ValueError("ridge must be positive")
        self.A = ridge * np.eye(dim)
        self.v = np.zeros(dim)
        self.k = 0
        self.last_quad = 0.0

    def margin(self, x):
        x = np.asarray(x, dtype=float)
        S = self.A + np.outer(x, x)
        sol = np.linalg.solve(S, np.column_stack([self.v, x]))
        self.last_quad = float(x @ sol[:, 1])
        return float(x @ sol[:, 0])

    def update(self, x, y):
        x = np.asarray(x, dtype=float)
        self.A = self.A + np.outer(x, x)
        self.v = self.v + y * x
        self.k += 1

    def step(self, x, request_label, rng=None):
        return _supervised_step(self, x, request_label)


class SelectiveSampler:
    """Margin-randomized selective-sampling wrapper.

    Queries with probability a/(a + |margin|); the wrapped learner's
    update runs only on queried mistaken rounds.  a = inf reproduces the
    base learner exactly.
    """

    def __init__(self, base, a):
        if not a > 0:
            raise ValueError("a must be positive")
        self.base = base
        self.a = a

    def margin(self, x):
        return self.base.margin(x)

    def step(self, x, request_label, rng=None):
        p = self.base.margin(x)
        pred = sign(p)
        queried, prob = query_decision(p, self.a, rng)
        mistake = None
        updated = False
        if queried:
            y = request_label()
            mistake = pred != y
            if mistake:
                self.base.update(x, y)
                updated = True
        return RoundOutcome(
            margin=p,
            prediction=pred,
            queried=queried,
            query_probability=prob,
            quad_form=getattr(self.base, "last_quad", 0.0),
            mistake=mistake,
            updated=updated,
        )


class Bbq:
    """Variance-thresholded selective sampler (BBQ) and its BBQ-I variant.

    Queries when r = x^T A^{-1} x reaches threshold * t^{-kappa}; predicts
    with the regularized least-squares estimate sign(x^T A^{-1} v).  BBQ
    absorbs every queried example into (A, v); BBQ-I only queried mistaken
    ones, which slows convergence and preserves adaptivity after shifts.
    """

    def __init__(self, dim, kappa, mistakes_only=False, threshold=1.0):
        if not kappa > 0:
            raise ValueError("kappa must be positive")
        self.A = np.eye(dim)
        self.v = np.zeros(dim)
        self.kappa = kappa
        self.mistakes_only = mistakes_only
        self.threshold = threshold
        self.t = 0
        self.last_quad = 0.0

    def margin(self, x):
        x = np.asarray(x, dtype=float)
        sol = np.linalg.solve(self.A, np.column_stack([self.v, x]))
        self.last_quad = float(x @ sol[:, 1])
        return float(x @ sol[:, 0])

    def update(self, x, y):
        x = np.asarray(x, dtype=float)
        self.A = self.A + np.outer(x, x)
        self.v = self.v + y * x

    def step(self, x, request_label, rng=None):
        self.t += 1
        x = np.asarray(x, dtype=float)
        p = self.margin(x)
        r = self.last_quad
        pred = sign(p)
        cutoff = self.threshold * self.t ** (-self.kappa)
        queried = r >= cutoff
        mistake = None
        updated = False
        if queried:
            y = request_label()
            mistake = pred != y
            if mistake or not self.mistakes_only:
                self.update(x, y)
                updated = True
        return RoundOutcome(
            margin=p,
            prediction=pred,
            queried=queried,
            query_probability=1.0 if queried else 0.0,
            quad_form=r,
            mistake=mistake,
            updated=updated,
        )
