"""Last-step min-max online classifier for drifting targets (LASEC).

The learner keeps sufficient statistics (D, e, f) of a regularized tracking
objective over comparator sequences and predicts with the sign of the
one-step min-max optimal margin.  A Bernoulli rule driven by the margin
turns it into the selective-sampling variant (LASEC-SS); ``a=inf`` recovers
the fully supervised learner, ``c=inf`` removes the drift penalty and
recovers the second-order perceptron.

State changes only on queried mistaken rounds.  Updates refresh Cholesky
caches in O(d^3); every prediction is O(d^2) through a rank-one
(Sherman-Morrison) identity.
"""

import math
from dataclasses import dataclass

import numpy as np

from .linalg import solve_spd, spd_inverse, symmetrize, log_det


def sign(v):
    """Prediction sign convention: sign(0) = +1."""
    return 1 if v >= 0.0 else -1


@dataclass(frozen=True)
class LasecParams:
    """Learner parameters.

    b > 0 penalizes the first comparator's norm, c > b penalizes drift
    between consecutive comparators (c = inf disables forgetting), a > 0
    controls query aggressiveness (a = inf queries every round).
    """

    b: float
    c: float = math.inf
    a: float = math.inf

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"b must be positive, got {self.b}")
        if not math.isinf(self.c) and not self.c > self.b:
            raise ValueError(f"need 0 < b < c, got b={self.b}, c={self.c}")
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")

    @property
    def supervised(self):
        return math.isinf(self.a)

    @property
    def no_drift_penalty(self):
        return math.isinf(self.c)


@dataclass
class RoundOutcome:
    """What one protocol round produced.

    ``mistake`` is None on unqueried rounds: the learner never saw the
    label.  ``quad_form`` is x^T S^{-1} x for the round's matrix S.
    """

    margin: float
    prediction: int
    queried: bool
    query_probability: float
    quad_form: float
    mistake: bool | None
    updated: bool


def query_decision(p_hat, a, rng):
    """Draw the label-query indicator.

    Returns (queried, probability) with probability a/(a + |p_hat|).
    a = inf means always query; that path consumes no randomness so
    supervised runs are reproducible without an rng.
    """
    if math.isinf(a):
        return True, 1.0
    prob = a / (a + abs(p_hat))
    if prob >= 1.0:
        return True, 1.0
    return bool(rng.random() < prob), prob


class Lasec:
    """LASEC / LASEC-SS learner over R^d inputs with labels in {-1,+1}."""

    def __init__(self, params: LasecParams, dim: int):
        self.params = params
        self.dim = dim
        b, c = params.b, params.c
        if params.no_drift_penalty:
            d0 = b
        else:
            d0 = b * c / (c - b)
        self.D = d0 * np.eye(dim)
        self.e = np.zeros(dim)
        self.f = 0.0
        self.k = 1
        self._refresh_caches()

    def _refresh_caches(self):
        """Recompute A = (D^{-1} + c^{-1}I)^{-1}, its inverse, and
        g = (I + c^{-1}D)^{-1} e from the current (D, e)."""
        c = self.params.c
        if self.params.no_drift_penalty:
            self.A = self.D.copy()
            self.Ainv = spd_inverse(self.D)
            self.g = self.e.copy()
        else:
            shifted = c * np.eye(self.dim) + self.D
            self.A = symmetrize(c * solve_spd(shifted, self.D))
            self.g = c * solve_spd(shifted, self.e)
            self.Ainv = spd_inverse(self.D) + np.eye(self.dim) / c

    def predict_margin(self, x):
        """Margin and quadratic form for input x; state unchanged.

        With S = A + x x^T, returns (x^T S^{-1} g, x^T S^{-1} x), both
        evaluated through the rank-one inverse identity on Ainv.
        """
        w = self.Ainv @ x
        r = float(x @ w)
        denom = 1.0 + r
        p_hat = float(w @ self.g) / denom
        quad = r / denom
        return p_hat, quad

    def predict(self, x):
        return sign(self.predict_margin(x)[0])

    def update(self, x, y):
        """Apply the mistaken-round recurrence with (x, y).

        Callers are responsible for invoking this only on queried mistaken
        rounds; the method itself applies the recurrence unconditionally.
        """
        c = self.params.c
        if not self.params.no_drift_penalty:
            # e^T (cI + D)^{-1} e  ==  e . g / c
            self.f -= float(self.e @ self.g) / c
        self.f += float(y) ** 2
        self.e = self.g + y * np.asarray(x, dtype=float)
        self.D = symmetrize(self.A + np.outer(x, x))
        self.k += 1
        self._refresh_caches()

    def step(self, x, request_label, rng=None):
        """Run one protocol round: predict, maybe query, maybe update.

        ``request_label`` is called exactly on queried rounds and must
        return the true label; the caller can use it to count queries.
        """
        p_hat, quad = self.predict_margin(x)
        pred = sign(p_hat)
        queried, prob = query_decision(p_hat, self.params.a, rng)
        mistake = None
        updated = False
        if queried:
            y = request_label()
            mistake = pred != y
            if mistake:
                self.update(x, y)
                updated = True
        return RoundOutcome(
            margin=p_hat,
            prediction=pred,
            queried=queried,
            query_probability=prob,
            quad_form=quad,
            mistake=mistake,
            updated=updated,
        )

    def min_tracking_objective(self):
        """Minimum of the tracking objective over comparator sequences,
        evaluated from the recurrences: f - e^T D^{-1} e."""
        return self.f - float(self.e @ solve_spd(self.D, self.e))

    def logdet_D(self):
        return log_det(self.D)

    def trace_D0(self):
        """Trace of the initial matrix D_0 (depends only on b, c, d)."""
        b, c = self.params.b, self.params.c
        d0 = b if self.params.no_drift_penalty else b * c / (c - b)
        return d0 * self.dim
