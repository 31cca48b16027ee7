"""Computable right-hand sides of the mistake guarantees.

Evaluators consume a completed run trace plus a reference (comparator)
sequence, so the learners stay lean and every inequality can be audited
from recorded data.  Sums over "update rounds" follow the trace's updated
mask; the reference is indexed per round and restricted to those rounds
where the guarantees require it.
"""

import math
from dataclasses import dataclass

import numpy as np


class BoundViolationError(AssertionError):
    """An inequality that holds by theorem failed on observed data."""


def hinge_loss(u, x, y, gamma):
    """max(0, gamma - y * u.x), the margin surrogate at threshold gamma."""
    return max(0.0, gamma - y * float(np.dot(u, x)))


@dataclass(frozen=True)
class BoundInputs:
    """Everything the bound evaluators need, precomputed from a run.

    Sums tagged "update" range over rounds with a queried mistake; the
    full hinge loss ranges over all rounds.  X2 is the max observed
    squared input norm.
    """

    gamma: float
    b: float
    c: float
    a: float
    X2: float
    d: int
    T: int
    m: int
    loss_full: float
    loss_queried: float
    u1_norm_sq: float
    V_m: float
    comparator_sq: float
    quad_sum: float
    logdet_term: float
    trace_D0: float

    @property
    def eps(self):
        return 0.0 if math.isinf(self.c) else self.b / self.c

    @property
    def mu(self):
        return max(1.125 * self.X2, (self.b + self.X2) ** 2 / (8.0 * self.X2))

    @property
    def drift_term(self):
        """c * V_m with the 0 * inf corner pinned to 0."""
        return 0.0 if self.V_m == 0.0 else self.c * self.V_m

    @property
    def comparator_cost(self):
        """b ||u_1||^2 + c V_m + sum over updates of (u_k . x_k)^2."""
        return self.b * self.u1_norm_sq + self.drift_term + self.comparator_sq


def collect_bound_inputs(trace, stream, reference, params, gamma):
    """Assemble BoundInputs from a finished run.

    ``trace`` must expose updated/queried/mistakes masks, per-round
    quad_forms and query_probs, and the final log-det of D (see
    harness.RunTrace); ``stream`` and ``reference`` are the data the run
    consumed.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    X, y, U = stream.X, stream.y, reference.U
    T = len(y)
    upd = np.flatnonzero(trace.updated)
    m = len(upd)
    loss_full = sum(hinge_loss(U[t], X[t], y[t], gamma) for t in range(T))
    loss_queried = sum(hinge_loss(U[t], X[t], y[t], gamma) for t in upd)
    if m:
        u1_norm_sq = float(U[upd[0]] @ U[upd[0]])
        comparator_sq = float(
            np.sum(np.einsum("td,td->t", U[upd], X[upd]) ** 2)
        )
        V_m = reference.drift_over(upd)
    else:
        u1_norm_sq = comparator_sq = V_m = 0.0
    quad_sum = float(np.sum(trace.quad_forms[upd]))
    X2 = float(np.max(np.einsum("td,td->t", X, X)))
    if trace.final_logdet_D is None:
        raise ValueError("trace lacks final log-det; run a second-order learner")
    logdet_term = trace.final_logdet_D - trace.dim * math.log(params.b)
    b, c = params.b, params.c
    trace_D0 = trace.dim * (b if math.isinf(c) else b * c / (c - b))
    return BoundInputs(
        gamma=gamma,
        b=b,
        c=c,
        a=params.a,
        X2=X2,
        d=trace.dim,
        T=T,
        m=m,
        loss_full=loss_full,
        loss_queried=loss_queried,
        u1_norm_sq=u1_norm_sq,
        V_m=V_m,
        comparator_sq=comparator_sq,
        quad_sum=quad_sum,
        logdet_term=logdet_term,
        trace_D0=trace_D0,
    )


def theorem1_rhs(inputs):
    """Mistake bound for the supervised learner.

    (1/gamma) L + (1/gamma) sqrt(comparator_cost * quad_sum).
    """
    g = inputs.gamma
    if g <= 0:
        raise ValueError("gamma must be positive")
    return inputs.loss_full / g + math.sqrt(inputs.comparator_cost * inputs.quad_sum) / g


def theorem2_rhs(inputs):
    """Expected-mistake bound for the selective-sampling learner.

    (1/gamma) queried-loss + (a/2 gamma^2) comparator_cost
    + (1/2a) quad_sum.  Linear in every trace sum, so averaging per-run
    values equals evaluating at averaged inputs.
    """
    g, a = inputs.gamma, inputs.a
    if not a > 0 or math.isinf(a):
        raise ValueError("need finite a > 0 for the selective-sampling bound")
    if g <= 0:
        raise ValueError("gamma must be positive")
    return (
        inputs.loss_queried / g
        + a / (2.0 * g * g) * inputs.comparator_cost
        + inputs.quad_sum / (2.0 * a)
    )


def optimal_query_aggressiveness(inputs):
    """The a minimizing the last two terms of the selective bound:
    gamma * sqrt(quad_sum / comparator_cost)."""
    if inputs.comparator_cost <= 0:
        raise ValueError("comparator cost must be positive to tune a")
    return inputs.gamma * math.sqrt(inputs.quad_sum / inputs.comparator_cost)


def expected_queries(trace):
    """Sum of per-round query probabilities, the query-count identity's
    right-hand side."""
    return float(np.sum(trace.query_probs))


def worst_case_trace_growth(b, c, X2):
    """Per-update cap on Tr(D): max{(3X^2 + sqrt(X^4 + 4X^2 c))/2, b + X^2}.

    Upper-bounded by 2X sqrt(2c) whenever c >= mu (the tuning corollary's
    feasibility region).
    """
    return max((3.0 * X2 + math.sqrt(X2 * X2 + 4.0 * X2 * c)) / 2.0, b + X2)


def trace_bound_a4(inputs, check=True):
    """Bound on the summed update-round quadratic forms.

    logdet_term + Tr(D_0)/c + (m/c) d max{...}; the two c-terms vanish in
    the no-forgetting (c = inf) mode.  With check=True, raises
    BoundViolationError if the trace's observed sum exceeds the bound.
    """
    if math.isinf(inputs.c):
        bound = inputs.logdet_term
    else:
        bound = (
            inputs.logdet_term
            + inputs.trace_D0 / inputs.c
            + inputs.m / inputs.c * inputs.d * worst_case_trace_growth(inputs.b, inputs.c, inputs.X2)
        )
    if check and inputs.quad_sum > bound * (1.0 + 1e-9) + 1e-9:
        raise BoundViolationError(
            f"observed quad-form sum {inputs.quad_sum} exceeds trace bound {bound}"
        )
    return bound


def lemma3_solve(A, B, C, D, gamma):
    """Closed-form cap on m satisfying m <= D/g + sqrt(A(B + mC))/g.

    C = 0 collapses to D/g + sqrt(AB)/g.
    """
    if min(A, B, D, gamma) <= 0 or C < 0:
        raise ValueError("A, B, D, gamma must be positive and C nonnegative")
    g = gamma
    return (
        D / g
        + A * C / (2.0 * g * g)
        + math.sqrt(D * A * C / g + (A * C) ** 2 / (4.0 * g * g) + A * B) / g
    )


def lemma3_constants(inputs):
    """The (A, B, C, D) mapping that feeds lemma3_solve for a finished run."""
    A = inputs.comparator_cost
    if math.isinf(inputs.c):
        B = inputs.logdet_term
        C = 0.0
    else:
        B = inputs.logdet_term + inputs.trace_D0 / inputs.c
        C = inputs.d / inputs.c * worst_case_trace_growth(inputs.b, inputs.c, inputs.X2)
    D = inputs.loss_full
    return A, B, C, D


def corollary_tune_c(T, d, X, V_m, eps):
    """Drift-aware tuning of (c, b) from the horizon and the drift budget.

    c = (sqrt(2) T d X / V_m)^(2/3), b = eps * c.  The feasible flag
    reports whether V_m <= T sqrt(2) d X / mu^(3/2); outside that region
    the tuned c is still returned but the closed-form corollary does not
    apply.  V_m = 0 has no finite tuning: use the c = inf mode instead.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    if V_m < 0:
        raise ValueError("V_m must be nonnegative")
    if V_m == 0:
        raise ValueError("V_m is zero: no drift to tune against, use c = inf mode")
    c = (math.sqrt(2.0) * T * d * X / V_m) ** (2.0 / 3.0)
    b = eps * c
    X2 = X * X
    mu = max(1.125 * X2, (b + X2) ** 2 / (8.0 * X2))
    feasible = V_m <= T * math.sqrt(2.0) * d * X / mu ** 1.5
    return c, b, feasible
