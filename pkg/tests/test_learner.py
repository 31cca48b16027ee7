import copy
import math

import numpy as np
import pytest

from lasec.baselines import SecondOrderPerceptron
from lasec.data import DriftScenario, generate_synthetic_drift
from lasec.learner import Lasec, LasecParams, query_decision, sign
from lasec.oracle import QProblem, brute_force_min_q


def test_sign_convention():
    assert sign(0.0) == 1
    assert sign(-1e-300) == -1
    assert sign(2.5) == 1


class TestParams:
    def test_rejects_b_not_below_c(self):
        with pytest.raises(ValueError):
            LasecParams(b=2.0, c=2.0)
        with pytest.raises(ValueError):
            LasecParams(b=3.0, c=2.0)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            LasecParams(b=0.0)
        with pytest.raises(ValueError):
            LasecParams(b=1.0, c=2.0, a=0.0)

    def test_infinite_modes(self):
        p = LasecParams(b=1.0)
        assert p.no_drift_penalty and p.supervised
        p = LasecParams(b=1.0, c=2.0, a=0.5)
        assert not p.no_drift_penalty and not p.supervised


class TestInitialState:
    def test_finite_c(self):
        lrn = Lasec(LasecParams(b=1.0, c=2.0), 3)
        np.testing.assert_allclose(lrn.D, 2.0 * np.eye(3))
        np.testing.assert_allclose(lrn.e, np.zeros(3))
        assert lrn.k == 1 and lrn.f == 0.0

    def test_infinite_c_limit(self):
        lrn = Lasec(LasecParams(b=1.0), 3)
        np.testing.assert_allclose(lrn.D, np.eye(3))

    def test_first_update_matrix_independent_of_c(self):
        """The first post-update matrix is b I + x x^T whatever c is."""
        x = np.array([1.0, 0.0, 0.0])
        for c in (2.0, 7.0, math.inf):
            lrn = Lasec(LasecParams(b=1.0, c=c), 3)
            lrn.update(x, 1)
            np.testing.assert_allclose(lrn.D, np.eye(3) + np.outer(x, x), atol=1e-12)


class TestHandWorkedScalarCase:
    """d=1, b=1, c=2 worked by hand through two updates."""

    def test_sequence(self):
        lrn = Lasec(LasecParams(b=1.0, c=2.0), 1)
        p, _ = lrn.predict_margin(np.array([1.0]))
        assert p == 0.0 and lrn.predict(np.array([1.0])) == 1

        lrn.update(np.array([1.0]), 1)
        np.testing.assert_allclose(lrn.D, [[2.0]])
        np.testing.assert_allclose(lrn.e, [1.0])
        assert lrn.f == pytest.approx(1.0)

        p, quad = lrn.predict_margin(np.array([1.0]))
        assert p == pytest.approx(0.25)

        lrn.update(np.array([1.0]), -1)
        np.testing.assert_allclose(lrn.D, [[2.0]], atol=1e-12)
        np.testing.assert_allclose(lrn.e, [-0.5], atol=1e-12)


class TestPrediction:
    def test_fresh_state_margin_zero(self):
        rng = np.random.default_rng(0)
        lrn = Lasec(LasecParams(b=0.5, c=4.0), 6)
        for _ in range(5):
            p, quad = lrn.predict_margin(rng.standard_normal(6))
            assert p == 0.0
            assert quad > 0.0

    def test_margin_matches_direct_solve(self):
        """The cached rank-one path equals forming S and solving directly."""
        rng = np.random.default_rng(1)
        lrn = Lasec(LasecParams(b=1.0, c=5.0), 4)
        for t in range(30):
            x = rng.standard_normal(4)
            p, quad = lrn.predict_margin(x)
            S = lrn.A + np.outer(x, x)
            np.testing.assert_allclose(p, x @ np.linalg.solve(S, lrn.g), atol=1e-12)
            np.testing.assert_allclose(quad, x @ np.linalg.solve(S, x), atol=1e-12)
            lrn.update(x, int(rng.choice([-1, 1])))

    def test_quad_form_positive_and_capped(self):
        rng = np.random.default_rng(2)
        lrn = Lasec(LasecParams(b=1.0, c=3.0), 5)
        for t in range(50):
            x = rng.standard_normal(5)
            _, quad = lrn.predict_margin(x)
            lam_min = np.linalg.eigvalsh(lrn.A).min()
            assert 0.0 < quad <= x @ x / lam_min + 1e-12
            if t % 3 == 0:
                lrn.update(x, int(rng.choice([-1, 1])))

    def test_no_drift_penalty_matches_second_order_perceptron(self):
        """c = inf margins coincide with the direct-solve learner."""
        stream, _ = generate_synthetic_drift(
            DriftScenario(T=300, d=8, segment_length=100, seed=5)
        )
        lrn = Lasec(LasecParams(b=1.5), 8)
        ref = SecondOrderPerceptron(8, ridge=1.5)
        for t in range(len(stream)):
            p1, _ = lrn.predict_margin(stream.X[t])
            p2 = ref.margin(stream.X[t])
            assert abs(p1 - p2) <= 1e-10
            y = int(stream.y[t])
            if sign(p1) != y:
                lrn.update(stream.X[t], y)
            if sign(p2) != y:
                ref.update(stream.X[t], y)


class TestRecurrenceMinimum:
    def test_matches_brute_force_on_small_runs(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            t = int(rng.integers(1, 11))
            d = int(rng.integers(1, 5))
            b, c = np.sort(rng.uniform(0.2, 8.0, size=2))
            xs = rng.standard_normal((t, d))
            ys = rng.choice([-1.0, 1.0], size=t)
            lrn = Lasec(LasecParams(b=float(b), c=float(c)), d)
            for i in range(t):
                lrn.update(xs[i], ys[i])
            direct, _ = brute_force_min_q(
                QProblem(xs=xs, ys=ys, b=float(b), c=float(c))
            )
            rec = lrn.min_tracking_objective()
            assert abs(rec - direct) <= 1e-8 * max(1.0, abs(direct))


class TestQueryDecision:
    def test_zero_margin_always_queries(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            z, prob = query_decision(0.0, 0.7, rng)
            assert z and prob == 1.0

    def test_probability_arithmetic(self):
        rng = np.random.default_rng(0)
        _, prob = query_decision(1.0, 1.0, rng)
        assert prob == pytest.approx(0.5)

    def test_always_query_mode(self):
        z, prob = query_decision(123.0, math.inf, rng=None)
        assert z and prob == 1.0

    def test_empirical_frequency(self):
        """a=0.5, |margin|=2 queries a 0.2 fraction, within 3 sigma."""
        rng = np.random.default_rng(7)
        n = 10**5
        hits = sum(query_decision(2.0, 0.5, rng)[0] for _ in range(n))
        sigma = math.sqrt(n * 0.2 * 0.8)
        assert abs(hits - n * 0.2) <= 3 * sigma

    def test_monotonicity(self):
        margins = np.linspace(0.0, 5.0, 20)
        probs = [query_decision(m, 1.0, np.random.default_rng(0))[1] for m in margins]
        assert all(p1 >= p2 for p1, p2 in zip(probs, probs[1:]))
        alphas = np.linspace(0.1, 10.0, 20)
        probs = [query_decision(2.0, a, np.random.default_rng(0))[1] for a in alphas]
        assert all(p2 >= p1 for p1, p2 in zip(probs, probs[1:]))


class TestStepProtocol:
    @staticmethod
    def _drive(params, stream, seed):
        rng = np.random.default_rng(seed)
        lrn = Lasec(params, stream.dim)
        outcomes = []
        for t in range(len(stream)):
            y = int(stream.y[t])
            out = lrn.step(stream.X[t], lambda: y, rng)
            outcomes.append(out)
        return lrn, outcomes

    def test_supervised_mode_queries_everything(self):
        stream, _ = generate_synthetic_drift(
            DriftScenario(T=200, d=5, segment_length=50, seed=2)
        )
        _, outcomes = self._drive(LasecParams(b=1.0, c=4.0), stream, seed=0)
        assert all(o.queried for o in outcomes)
        assert all(o.updated == o.mistake for o in outcomes)

    def test_state_frozen_without_query(self):
        stream, _ = generate_synthetic_drift(
            DriftScenario(T=300, d=5, segment_length=100, seed=3)
        )
        rng = np.random.default_rng(1)
        lrn = Lasec(LasecParams(b=1.0, c=4.0, a=0.05), 5)
        skipped = 0
        for t in range(len(stream)):
            before = (lrn.D.copy(), lrn.e.copy(), lrn.f, lrn.k)
            y = int(stream.y[t])
            out = lrn.step(stream.X[t], lambda: y, rng)
            if not out.queried or not out.mistake:
                skipped += 1
                assert np.array_equal(before[0], lrn.D)
                assert np.array_equal(before[1], lrn.e)
                assert before[2] == lrn.f and before[3] == lrn.k
            else:
                assert lrn.k == before[3] + 1
        assert skipped > 0

    def test_replay_determinism(self):
        stream, _ = generate_synthetic_drift(
            DriftScenario(T=250, d=6, segment_length=50, seed=4)
        )
        params = LasecParams(b=1.0, c=8.0, a=0.5)
        _, first = self._drive(params, stream, seed=11)
        _, second = self._drive(params, stream, seed=11)
        assert first == second

    def test_mistake_none_when_unqueried(self):
        stream, _ = generate_synthetic_drift(
            DriftScenario(T=400, d=4, segment_length=100, seed=6)
        )
        _, outcomes = self._drive(LasecParams(b=1.0, c=4.0, a=0.02), stream, seed=2)
        unqueried = [o for o in outcomes if not o.queried]
        assert unqueried and all(o.mistake is None for o in unqueried)
