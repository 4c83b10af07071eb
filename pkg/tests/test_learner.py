"""Update-engine behavior: masking statistics, reduction invariants,
feasibility under stress, and stream isolation."""

import numpy as np
import pytest

from mxlsim.hermitian import hermitian_defect, random_hermitian
from mxlsim.learner import (FeedbackStrategy, make_state, mask_gradient,
                            mirror_image, mxl_i_step, mxl_s_step, mxl_step,
                            run_round)
from mxlsim.schedule import StepSchedule

SCHED = StepSchedule(0.2, 0.7)


class TestStrategy:
    def test_constructors(self):
        assert FeedbackStrategy.full().kind == "full"
        assert FeedbackStrategy.incomplete(0.3).p == 0.3
        assert FeedbackStrategy.sporadic(1.0).p == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            FeedbackStrategy("incomplete", 0.0)
        with pytest.raises(ValueError):
            FeedbackStrategy("nonsense", 0.5)


class TestMaskGradient:
    def test_forced_all_ones(self):
        v = random_hermitian(np.random.default_rng(0), 4)
        out = mask_gradient(v, 1.0, np.random.default_rng(1))
        np.testing.assert_array_equal(out.matrix, v)
        assert np.all(out.mask == 1.0)

    def test_forced_all_zeros(self):
        v = random_hermitian(np.random.default_rng(2), 4)
        out = mask_gradient(v, 0.0, np.random.default_rng(3))
        assert np.all(out.matrix == 0.0)

    def test_delivery_frequency_and_symmetry(self):
        """Per-entry delivery frequency over 1e5 draws at p = 0.2,
        within three standard errors; masks exactly symmetric."""
        rng = np.random.default_rng(4)
        v = np.broadcast_to(random_hermitian(np.random.default_rng(5), 4),
                            (100_000, 4, 4))
        out = mask_gradient(v, 0.2, rng)
        np.testing.assert_array_equal(out.mask,
                                      np.swapaxes(out.mask, -1, -2))
        freq = out.mask.mean(axis=0)
        se = np.sqrt(0.2 * 0.8 / 100_000)
        assert np.all(np.abs(freq - 0.2) < 3 * se + 1e-12)

    def test_blocks_only_mask_in_block(self):
        v = random_hermitian(np.random.default_rng(6), 3, shape=(2,))
        out = mask_gradient(v, 0.5, np.random.default_rng(7))
        assert out.mask.shape == (2, 3, 3)


class TestFullStep:
    def test_uniform_initial_action(self):
        state = make_state(0, 2)
        np.testing.assert_allclose(state.x, np.eye(2) / 3.0, atol=1e-14)

    def test_scalar_step(self):
        state = make_state(0, 1)
        new = mxl_step(state, np.array([[1.0 + 0j]]), 0.2)
        assert new.y[0, 0].real == pytest.approx(0.2)
        assert new.x[0, 0].real == pytest.approx(np.exp(0.2) / (1 + np.exp(0.2)),
                                                 abs=1e-10)

    def test_zero_gradient_is_identity(self):
        state = make_state(0, 3, n_blocks=2)
        new = mxl_step(state, np.zeros((2, 3, 3), dtype=complex), 0.5)
        np.testing.assert_array_equal(new.y, state.y)
        np.testing.assert_array_equal(new.x, state.x)

    def test_rejects_non_hermitian(self):
        state = make_state(0, 2)
        with pytest.raises(ValueError):
            mxl_step(state, np.array([[0.0, 1.0], [0.0, 0.0]]), 0.1)

    def test_respects_bound(self):
        state = make_state(0, 2, bound=3.0)
        new = mxl_step(state, random_hermitian(np.random.default_rng(8), 2), 0.5)
        assert np.trace(new.x).real < 3.0
        np.testing.assert_allclose(new.x, 3.0 * mirror_image(new.y), atol=1e-14)


class TestReductions:
    def test_masked_at_full_p_matches_baseline_bitwise(self):
        """With the same noisy gradients, full masking reproduces the
        baseline trajectory operation for operation."""
        rng = np.random.default_rng(9)
        base = make_state(0, 4, n_blocks=3)
        masked = make_state(0, 4, n_blocks=3)
        mask_rng = np.random.default_rng(10)
        for n in range(1, 201):
            v = random_hermitian(rng, 4, shape=(3,))
            g = float(SCHED.gamma(n))
            base = mxl_step(base, v, g)
            masked = mxl_i_step(masked, mask_gradient(v, 1.0, mask_rng), g)
            assert np.array_equal(base.y, masked.y)
            assert np.array_equal(base.x, masked.x)

    def test_sporadic_at_full_p_matches_baseline_bitwise(self):
        rng = np.random.default_rng(11)
        base = make_state(0, 4, n_blocks=3)
        spor = make_state(0, 4, n_blocks=3)
        for n in range(1, 201):
            v = random_hermitian(rng, 4, shape=(3,))
            base = mxl_step(base, v, float(SCHED.gamma(n)))
            spor = mxl_s_step(spor, v, True, SCHED)
            assert np.array_equal(base.y, spor.y)
        assert spor.feedback_count == 200


class TestMaskedStep:
    def test_zero_mask_leaves_state(self):
        state = make_state(0, 3)
        v = random_hermitian(np.random.default_rng(40), 3)
        masked = mask_gradient(v, 0.0, np.random.default_rng(41))
        new = mxl_i_step(state, masked, 0.3)
        assert np.array_equal(new.y, state.y)
        assert np.array_equal(new.x, state.x)

    def test_rejects_asymmetric_mask(self):
        from mxlsim.learner import MaskedGradient
        state = make_state(0, 2)
        bad = MaskedGradient(matrix=np.zeros((2, 2)),
                             mask=np.array([[1.0, 1.0], [0.0, 1.0]]))
        with pytest.raises(ValueError, match="symmetric"):
            mxl_i_step(state, bad, 0.1)


class TestSporadicStep:
    def test_undelivered_leaves_state(self):
        state = make_state(0, 3)
        v = random_hermitian(np.random.default_rng(12), 3)
        new = mxl_s_step(state, v, False, SCHED)
        assert new is state

    def test_counter_has_binomial_law(self):
        """Delivery counts over many emulated runs match Binomial(n, p)
        mean and variance within three standard errors."""
        p, n, trials = 0.3, 1000, 10_000
        rng = np.random.default_rng(13)
        counts = (rng.random((trials, n)) < p).sum(axis=1)
        se_mean = np.sqrt(n * p * (1 - p) / trials)
        assert abs(counts.mean() - n * p) < 3 * se_mean
        var = counts.var(ddof=1)
        se_var = var * np.sqrt(2.0 / (trials - 1))
        assert abs(var - n * p * (1 - p)) < 3 * se_var

    def test_step_indices_are_consecutive(self):
        """The step-size index sequence used by a link is exactly
        1, 2, ..., feedback_count."""
        rng = np.random.default_rng(14)
        state = make_state(0, 2)
        used = []
        for n in range(1, 500):
            delivered = bool(rng.random() < 0.4)
            new = mxl_s_step(state, random_hermitian(rng, 2), delivered, SCHED)
            if delivered:
                used.append(new.feedback_count)
            state = new
        assert used == list(range(1, state.feedback_count + 1))


class TestRunRound:
    def test_single_link_full_equals_step(self):
        v = random_hermitian(np.random.default_rng(15), 3)
        state = make_state(0, 3)
        states, costs = run_round([state], [v], FeedbackStrategy.full(),
                                  SCHED, 1, [np.random.default_rng(0)])
        direct = mxl_step(state, v, float(SCHED.gamma(1)))
        assert np.array_equal(states[0].y, direct.y)
        assert costs == [9]

    def test_costs_per_strategy(self):
        """Blocks (3, 4, 4): full message 48 entries; full lower-triangle
        masking 30; sporadic delivery 48 or 0."""
        rng = np.random.default_rng(16)
        v = random_hermitian(rng, 4, shape=(3,))
        state = make_state(0, 4, n_blocks=3)
        _, costs = run_round([state], [v], FeedbackStrategy.full(), SCHED, 1,
                             [np.random.default_rng(1)])
        assert costs == [48]
        _, costs = run_round([state], [v], FeedbackStrategy.incomplete(1.0),
                             SCHED, 1, [np.random.default_rng(2)])
        assert costs == [30]
        total = 0
        for trial in range(2000):
            _, costs = run_round([state], [v], FeedbackStrategy.sporadic(0.5),
                                 SCHED, 1, [np.random.default_rng(100 + trial)])
            assert costs[0] in (0, 48)
            total += costs[0]
        se = 48 * np.sqrt(0.25 / 2000)
        assert abs(total / 2000 - 24.0) < 3 * se

    def test_masked_expected_cost(self):
        """E[cost] = p * S * Nt(Nt+1)/2 under entrywise masking."""
        rng = np.random.default_rng(17)
        v = random_hermitian(rng, 4, shape=(3,))
        state = make_state(0, 4, n_blocks=3)
        link_rng = np.random.default_rng(18)
        totals = []
        for _ in range(4000):
            _, costs = run_round([state], [v], FeedbackStrategy.incomplete(0.5),
                                 SCHED, 1, [link_rng])
            totals.append(costs[0])
        mean = np.mean(totals)
        se = np.std(totals, ddof=1) / np.sqrt(len(totals))
        assert abs(mean - 15.0) < 3 * se

    def test_forced_silence_sporadic(self):
        v = random_hermitian(np.random.default_rng(19), 3)
        state = make_state(0, 3)

        class _Silent:
            def random(self):
                return 1.0  # never below p < 1

        states, costs = run_round([state], [v], FeedbackStrategy.sporadic(0.5),
                                  SCHED, 1, [_Silent()])
        assert costs == [0]
        assert states[0] is state

    def test_stream_isolation(self):
        """Permuting the link order leaves each link's trajectory
        unchanged, because no link reads another link's stream."""
        def trajectories(order):
            states = {k: make_state(k, 3) for k in order}
            rngs = {k: np.random.default_rng(1000 + k) for k in order}
            grad_rngs = {k: np.random.default_rng(2000 + k) for k in order}
            for n in range(1, 50):
                grads = {k: random_hermitian(grad_rngs[k], 3) for k in order}
                new, _ = run_round([states[k] for k in order],
                                   [grads[k] for k in order],
                                   FeedbackStrategy.incomplete(0.5), SCHED, n,
                                   [rngs[k] for k in order])
                states = dict(zip(order, new))
            return states

        a = trajectories([0, 1, 2])
        b = trajectories([2, 0, 1])
        for k in range(3):
            assert np.array_equal(a[k].y, b[k].y)


class TestFeasibilityStress:
    def test_bounded_adversarial_gradients(self):
        """2000 steps of spectral-norm-1e3 random gradients never break
        positivity, the strict trace bound, or Hermitian structure."""
        rng = np.random.default_rng(20)
        sched = StepSchedule(3e-3, 0.7)
        state = make_state(0, 4, n_blocks=3)
        for n in range(1, 2001):
            v = random_hermitian(rng, 4, shape=(3,))
            v *= 1e3 / np.abs(np.linalg.eigvalsh(v)).max()
            state = mxl_step(state, v, float(sched.gamma(n)))
            assert hermitian_defect(state.x) <= 1e-10
            assert np.linalg.eigvalsh(state.x).min() > 0
            assert np.einsum("sii->", state.x).real < 1.0
