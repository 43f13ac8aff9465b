import math

import numpy as np
import pytest

from smoothbandit.environments import make_constant_multi_arm, make_smooth_instance
from smoothbandit.geometry import build_lattice, support_cube_mask, unit_cube_support
from smoothbandit.policy import (
    DecisionState,
    PolicyConfig,
    ScreenResult,
    act,
    act_multi,
    epoch_count_bound,
    estimate_cate_at_centers,
    initial_multi_state,
    initial_state,
    make_schedule,
    planned_epoch_length,
    run_multi_arm,
    run_two_arm,
    screen_inestimable,
    strict_floor,
    update_regions,
)


def two_arm_planned_length(k, config, delta):
    """Independent oracle for the two-arm epoch-length formula."""
    eps = 2.0**-k
    log_term = math.log(config.horizon * delta**-config.d)
    expo = (2 * config.beta + config.d) / (2 * config.beta)
    return math.ceil(
        (4.0 / config.p) * (log_term / (config.c_epoch * eps * eps)) ** expo
        + (2.0 / (config.p * config.p)) * math.log(config.horizon)
    )


class TestStrictFloor:
    def test_values(self):
        assert strict_floor(1.0) == 0
        assert strict_floor(1.5) == 1
        assert strict_floor(2.0) == 1
        assert strict_floor(3.0) == 2


class TestSchedule:
    def test_tolerances_halve(self):
        cfg = PolicyConfig(beta=1.0, d=1, horizon=100_000)
        sched = make_schedule(cfg)
        assert sched.tolerances[:3] == (0.5, 0.25, 0.125)

    def test_realized_lengths_sum_to_horizon(self):
        for T in (1000, 4096, 31337):
            cfg = PolicyConfig(beta=2.0, d=1, horizon=T)
            sched = make_schedule(cfg)
            assert sum(sched.realized) == T
            assert len(sched.realized) == sched.K

    def test_planned_lengths_strictly_increase(self):
        cfg = PolicyConfig(beta=1.5, d=2, horizon=10**6, c_epoch=1.0, p=0.5)
        lengths = [planned_epoch_length(k, cfg, make_schedule(cfg).delta) for k in range(1, 8)]
        assert all(b > a for a, b in zip(lengths, lengths[1:]))

    def test_two_arm_formula_matches_general_form(self):
        # at two arms 2|A|/p = 4/p and |A|^2/(2 p^2) = 2/p^2 bit for bit
        cfg = PolicyConfig(beta=2.0, d=1, horizon=20_000, c_epoch=0.7, p=0.3)
        delta = make_schedule(cfg).delta
        for k in range(1, 6):
            assert planned_epoch_length(k, cfg, delta) == two_arm_planned_length(k, cfg, delta)

    def test_multi_arm_lengths_scale_with_arm_count(self):
        # independent oracle for the general coefficients 2A/p, A^2/(2p^2)
        cfg = PolicyConfig(beta=2.0, d=1, horizon=20_000, c_epoch=0.7, p=0.3, arm_count=3)
        delta = make_schedule(cfg).delta
        for k in range(1, 5):
            eps = 2.0**-k
            log_term = math.log(cfg.horizon * delta**-cfg.d)
            expo = (2 * cfg.beta + cfg.d) / (2 * cfg.beta)
            expected = math.ceil(
                (6.0 / cfg.p) * (log_term / (cfg.c_epoch * eps * eps)) ** expo
                + (9.0 / (2.0 * cfg.p * cfg.p)) * math.log(cfg.horizon)
            )
            assert planned_epoch_length(k, cfg, delta) == expected

    def test_epoch_count_bound_example(self):
        # ceil((1 / (3 log 2)) log 1e4) = ceil(4.429...) = 5
        assert epoch_count_bound(1.0, 1, 10_000) == 5
        cfg = PolicyConfig(beta=1.0, d=1, horizon=10_000, p=1.0, c_epoch=1.0)
        assert make_schedule(cfg).K <= 5

    def test_epoch_count_bound_grid(self):
        for beta in (1.0, 1.5, 2.0, 3.0):
            for d in (1, 2):
                for p in (0.25, 1.0):
                    for c_epoch in (0.25, 0.5, 1.0, 2.0):
                        for T in (1000, 10_000, 100_000):
                            if T < math.exp(max(c_epoch, 1.0)):
                                continue
                            cfg = PolicyConfig(beta=beta, d=d, horizon=T, p=p, c_epoch=c_epoch)
                            assert make_schedule(cfg).K <= epoch_count_bound(beta, d, T)

    def test_degenerate_short_horizon_flag(self):
        cfg = PolicyConfig(beta=2.0, d=1, horizon=100)
        sched = make_schedule(cfg)
        assert sched.degenerate
        assert sched.K == 1
        assert sched.realized == (100,)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PolicyConfig(beta=0.5, d=1, horizon=100)
        with pytest.raises(ValueError):
            PolicyConfig(beta=1.0, d=1, horizon=100, p=0.0)
        with pytest.raises(ValueError):
            PolicyConfig(beta=1.0, d=1, horizon=100, c0=1.5)
        with pytest.raises(ValueError):
            PolicyConfig(beta=1.0, d=1, horizon=2)


def make_state_with_samples(lattice, support, explore, exploit_pos, exploit_neg, n_per_arm, rng):
    state = DecisionState(
        lattice=lattice,
        support_cubes=support,
        epoch=2,
        explore=explore,
        exploit={1: exploit_pos, -1: exploit_neg},
    )
    for arm in (1, -1):
        X = rng.random((n_per_arm, lattice.d))
        y = rng.random(n_per_arm)
        state.samples[arm] = (X, y)
        state.sample_counts[arm] = n_per_arm
        state.bandwidths[arm] = n_per_arm ** (-1.0 / (2 * 2.0 + lattice.d))
    return state


class TestScreening:
    def test_full_support_screens_nothing(self):
        # with the whole cube reachable, every center keeps >= 2^-d of its
        # ball, which dominates c0 / 2^d for any c0 <= 1
        cfg = PolicyConfig(beta=2.0, d=1, horizon=5000)
        lattice = build_lattice(cfg.horizon, cfg.beta, cfg.d)
        support = support_cube_mask(lattice, None)
        rng = np.random.default_rng(0)
        n = lattice.n_cubes
        state = make_state_with_samples(
            lattice, support, support.copy(), np.zeros(n, bool), np.zeros(n, bool), 500, rng
        )
        for arm in (1, -1):
            res = screen_inestimable(state, arm, unit_cube_support, cfg)
            assert not res.fail_safe
            assert res.mask.sum() == 0

    def test_isolated_cube_is_screened(self):
        # a lone explore cube inside a sea of opposite-arm cubes: the
        # reachable region for this arm is one cube of side delta << H,
        # fraction ~ delta / (2 H) < c0 / 2
        cfg = PolicyConfig(beta=2.0, d=1, horizon=5000)
        lattice = build_lattice(cfg.horizon, cfg.beta, cfg.d)
        support = support_cube_mask(lattice, None)
        n = lattice.n_cubes
        rng = np.random.default_rng(1)
        explore = np.zeros(n, bool)
        explore[n // 2] = True
        exploit_neg = support & ~explore  # everything else exploits -1
        state = make_state_with_samples(
            lattice, support, explore, np.zeros(n, bool), exploit_neg, 500, rng
        )
        res = screen_inestimable(state, 1, unit_cube_support, cfg)
        frac = lattice.delta / (2 * state.bandwidths[1])
        assert frac < cfg.c0 / 2
        assert res.mask[n // 2]
        # arm -1 reaches nearly everything: not screened
        res_neg = screen_inestimable(state, -1, unit_cube_support, cfg)
        assert res_neg.mask.sum() == 0

    def test_empty_explore_screens_nothing(self):
        cfg = PolicyConfig(beta=2.0, d=1, horizon=5000)
        lattice = build_lattice(cfg.horizon, cfg.beta, cfg.d)
        support = support_cube_mask(lattice, None)
        n = lattice.n_cubes
        rng = np.random.default_rng(2)
        state = make_state_with_samples(
            lattice, support, np.zeros(n, bool), support.copy(), np.zeros(n, bool), 100, rng
        )
        assert screen_inestimable(state, 1, unit_cube_support, cfg).mask.sum() == 0

    def test_no_samples_triggers_fail_safe(self):
        cfg = PolicyConfig(beta=2.0, d=1, horizon=5000)
        lattice = build_lattice(cfg.horizon, cfg.beta, cfg.d)
        support = support_cube_mask(lattice, None)
        rng = np.random.default_rng(3)
        state = make_state_with_samples(
            lattice, support, support.copy(), np.zeros(lattice.n_cubes, bool),
            np.zeros(lattice.n_cubes, bool), 100, rng
        )
        state.sample_counts[1] = 0
        res = screen_inestimable(state, 1, unit_cube_support, cfg)
        assert res.fail_safe
        assert np.array_equal(res.mask, state.explore)


class TestUpdateRegions:
    def setup_state(self):
        lattice = build_lattice(3000, 1.0, 1)
        support = support_cube_mask(lattice, None)
        n = lattice.n_cubes
        return DecisionState(
            lattice=lattice,
            support_cubes=support,
            epoch=2,
            explore=support.copy(),
            exploit={1: np.zeros(n, bool), -1: np.zeros(n, bool)},
        ), n

    def no_screen(self, n):
        return {1: ScreenResult(np.zeros(n, bool), False), -1: ScreenResult(np.zeros(n, bool), False)}

    def test_all_zero_estimates_keep_randomizing(self):
        state, n = self.setup_state()
        screened = self.no_screen(n)
        screened[1].mask[:2] = True  # two cubes inestimable for +1
        tau = np.zeros(n)
        tau[screened[1].mask] = np.nan
        new, info = update_regions(state, tau, screened, 0.5)
        assert new.explore.sum() == state.explore.sum() - 2
        assert new.exploit[-1].sum() == 2  # screened-for-+1 cubes exploit -1
        assert new.exploit[1].sum() == 0
        assert new.partition_ok()

    def test_large_positive_estimates_exploit_everywhere(self):
        state, n = self.setup_state()
        tau = np.full(n, 1.0)
        new, _ = update_regions(state, tau, self.no_screen(n), 0.5)
        assert new.explore.sum() == 0
        assert np.array_equal(new.exploit[1], state.support_cubes)

    def test_mixed_signs_split_three_ways(self):
        state, n = self.setup_state()
        tau = np.full(n, np.nan)
        ids = np.nonzero(state.explore)[0][:3]
        tau[ids] = [-1.0, 0.0, 1.0]
        # restrict explore to the three cubes
        state.explore[:] = False
        state.explore[ids] = True
        state.exploit[1] = state.support_cubes & ~state.explore
        new, _ = update_regions(state, tau, self.no_screen(n), 0.5)
        assert new.exploit[-1][ids[0]]
        assert new.explore[ids[1]]
        assert new.exploit[1][ids[2]]

    def test_double_screened_cube_is_anomaly(self):
        state, n = self.setup_state()
        screened = self.no_screen(n)
        cube = np.nonzero(state.explore)[0][0]
        screened[1].mask[cube] = True
        screened[-1].mask[cube] = True
        new, info = update_regions(state, np.full(n, np.nan), screened, 0.5)
        assert info["anomalies"] == 1
        assert new.explore[cube]
        assert new.partition_ok()

    def test_fail_safe_flags_keep_randomizing(self):
        state, n = self.setup_state()
        screened = {
            1: ScreenResult(state.explore.copy(), True),  # no data for +1
            -1: ScreenResult(np.zeros(n, bool), False),
        }
        new, _ = update_regions(state, np.full(n, np.nan), screened, 0.5)
        assert np.array_equal(new.explore, state.explore)
        assert new.exploit[1].sum() == 0 and new.exploit[-1].sum() == 0

    def test_exploit_regions_only_grow(self):
        state, n = self.setup_state()
        tau = np.full(n, np.nan)
        ids = np.nonzero(state.explore)[0]
        tau[ids[:5]] = 1.0
        tau[ids[5:]] = 0.0
        new, _ = update_regions(state, tau, self.no_screen(n), 0.5)
        tau2 = np.full(n, np.nan)
        tau2[np.nonzero(new.explore)[0]] = -1.0
        newer, _ = update_regions(new, tau2, self.no_screen(n), 0.25)
        assert np.all(newer.exploit[1] >= new.exploit[1])
        assert np.all(newer.exploit[-1] >= new.exploit[-1])
        assert newer.partition_ok()


class TestAct:
    def test_exploit_cube_always_pulls_its_arm(self):
        lattice = build_lattice(3000, 1.0, 1)
        support = support_cube_mask(lattice, None)
        n = lattice.n_cubes
        state = initial_state(lattice, support)
        state.explore[:] = False
        state.exploit[1][:] = support
        rng = np.random.default_rng(0)
        assert all(act(np.array([0.3]), state, rng) == 1 for _ in range(200))

    def test_explore_cube_randomizes_evenly(self):
        lattice = build_lattice(3000, 1.0, 1)
        state = initial_state(lattice, support_cube_mask(lattice, None))
        rng = np.random.default_rng(1)
        draws = np.array([act(np.array([0.3]), state, rng) for _ in range(10_000)])
        freq = np.mean(draws == 1)
        assert 0.48 <= freq <= 0.52  # 4 sigma band around 1/2

    def test_multi_arm_uniform_over_active_set(self):
        lattice = build_lattice(3000, 1.0, 1)
        state = initial_multi_state(lattice, support_cube_mask(lattice, None), 3)
        rng = np.random.default_rng(2)
        arms = (0, 1, 2)
        draws = np.array([act_multi(np.array([0.3]), state, rng, arms) for _ in range(10_000)])
        for a in arms:
            assert 0.30 <= np.mean(draws == a) <= 0.37


class TestRunTwoArm:
    def test_zero_effect_means_zero_regret(self):
        env = make_smooth_instance("constant_gap", d=1, gap=0.0)
        cfg = PolicyConfig(beta=1.0, d=1, horizon=2000)
        res = run_two_arm(env, cfg, seed=0)
        assert res.final_regret == 0.0

    def test_determinism(self):
        env = make_smooth_instance("sinusoidal", d=1, amplitude=0.4, beta=2.0)
        cfg = PolicyConfig(beta=2.0, d=1, horizon=4000)
        a = run_two_arm(env, cfg, seed=42, record_actions=True)
        b = run_two_arm(env, cfg, seed=42, record_actions=True)
        assert a.equals(b)
        c = run_two_arm(env, cfg, seed=43, record_actions=True)
        assert not a.equals(c)

    def test_constant_gap_beats_uniform_randomization(self):
        # uniform play pays gap/2 per step in expectation
        env = make_smooth_instance("constant_gap", d=1, gap=0.5)
        cfg = PolicyConfig(beta=1.0, d=1, horizon=5000)
        finals = [run_two_arm(env, cfg, seed=s).final_regret for s in range(10)]
        assert np.mean(finals) <= 0.25 * 5000

    def test_wrong_arm_is_never_exploited_on_separated_instance(self):
        # arm -1 is optimal nowhere; its exploit region should stay empty
        env = make_smooth_instance("constant_gap", d=1, gap=0.5)
        cfg = PolicyConfig(beta=1.0, d=1, horizon=5000)
        clean = 0
        for seed in range(100):
            res = run_two_arm(env, cfg, seed=seed)
            if all(e.exploit_cubes[-1] == 0 for e in res.epochs):
                clean += 1
        assert clean >= 95

    def test_epoch_accounting_and_partition(self):
        env = make_smooth_instance("sinusoidal", d=1, amplitude=0.4, beta=2.0)
        cfg = PolicyConfig(beta=2.0, d=1, horizon=8192, c_epoch=8.0, p=0.5)
        res = run_two_arm(env, cfg, seed=7)
        assert sum(e.length for e in res.epochs) == cfg.horizon
        support_total = res.epochs[0].explore_cubes
        for e in res.epochs:
            assert e.explore_cubes + sum(e.exploit_cubes.values()) == support_total
        for a in (1, -1):
            counts = [e.exploit_cubes[a] for e in res.epochs]
            assert all(b >= a_ for a_, b in zip(counts, counts[1:]))
        labels = res.final_labels
        assert (labels == 3).sum() == res.meta["n_cubes"] - support_total

    def test_regret_bounded_by_inferior_count(self):
        env = make_smooth_instance("sinusoidal", d=1, amplitude=0.4, beta=2.0)
        cfg = PolicyConfig(beta=2.0, d=1, horizon=4000)
        res = run_two_arm(env, cfg, seed=3)
        assert 0 <= res.inferior_count <= cfg.horizon
        assert res.final_regret <= 0.4 * res.inferior_count + 1e-9
        assert np.all(np.diff(res.cum_regret) >= 0)

    def test_bandwidth_stays_above_cube_diagonal(self):
        env = make_smooth_instance("sinusoidal", d=1, amplitude=0.4, beta=2.0)
        cfg = PolicyConfig(beta=2.0, d=1, horizon=20_000, c_epoch=8.0, p=0.5)
        res = run_two_arm(env, cfg, seed=11)
        assert res.meta["bandwidth_below_cube"] == 0

    def test_rejects_mismatched_instance(self):
        env = make_constant_multi_arm((0.2, 0.5, 0.8), d=1)
        cfg = PolicyConfig(beta=1.0, d=1, horizon=1000)
        with pytest.raises(ValueError):
            run_two_arm(env, cfg, seed=0)

    def test_restricted_support_run(self):
        # support is only the left half of the axis: the cube cover must
        # shrink accordingly and screening must respect the boundary
        import math as _math

        from smoothbandit.environments import Instance, InstanceMeta

        def mean(points, arm):
            points = np.atleast_2d(points)
            return 0.5 + 0.25 * arm * np.sin(2 * _math.pi * points[:, 0] / 0.5)

        def sample(rng, n):
            out = rng.random((n, 1))
            out[:, 0] *= 0.5
            return out

        def support(points):
            points = np.atleast_2d(points)
            return (points[:, 0] >= 0) & (points[:, 0] <= 0.5) & np.all(
                (points >= 0) & (points <= 1), axis=1
            )

        env = Instance(
            name="left_half",
            d=1,
            arms=(1, -1),
            mean=mean,
            sample_contexts=sample,
            support=support,
            meta=InstanceMeta(beta=2.0, L=20.0, L1=4.0, alpha=1.0, gamma=2.0,
                              c0=0.25, r0=0.1, mu_min=2.0, mu_max=2.0),
        )
        cfg = PolicyConfig(beta=2.0, d=1, horizon=4000, c_epoch=8.0, p=0.5)
        res = run_two_arm(env, cfg, seed=1)
        support_total = res.epochs[0].explore_cubes
        # roughly half the cubes carry context mass
        assert support_total < 0.6 * res.meta["n_cubes"]
        for e in res.epochs:
            assert e.explore_cubes + sum(e.exploit_cubes.values()) == support_total
        assert res.equals(run_two_arm(env, cfg, seed=1))

    def test_fail_safe_reached_in_live_run(self):
        # a huge gap empties the exploration region after one update; the
        # inferior arm then collects no samples and later updates must fall
        # back gracefully instead of inferring anything from the silence
        env = make_smooth_instance("constant_gap", d=1, gap=0.8)
        cfg = PolicyConfig(beta=1.0, d=1, horizon=10_000, c_epoch=8.0, p=0.5)
        res = run_two_arm(env, cfg, seed=0)
        assert res.meta["epochs"] >= 3
        assert any(e.sample_counts[-1] == 0 for e in res.epochs)
        assert any(-1 in e.fail_safe_arms for e in res.epochs)
        assert all(e.exploit_cubes[-1] == 0 for e in res.epochs)

    def test_two_dimensional_run(self):
        # exercises the tree-based neighbor queries and the planar
        # screening quadrature inside a full run
        env = make_smooth_instance("sinusoidal", d=2, amplitude=0.4, beta=2.0)
        cfg = PolicyConfig(beta=2.0, d=2, horizon=500, c_epoch=8.0, p=0.5)
        res = run_two_arm(env, cfg, seed=2)
        assert res.meta["epochs"] >= 2
        assert sum(e.length for e in res.epochs) == 500
        assert res.final_regret <= 0.4 * res.inferior_count + 1e-9
        repeat = run_two_arm(env, cfg, seed=2)
        assert res.equals(repeat)

    def test_estimate_constant_half_rewards_gives_zero_gap(self):
        cfg = PolicyConfig(beta=2.0, d=1, horizon=5000)
        lattice = build_lattice(cfg.horizon, cfg.beta, cfg.d)
        support = support_cube_mask(lattice, None)
        n = lattice.n_cubes
        rng = np.random.default_rng(8)
        state = DecisionState(
            lattice=lattice, support_cubes=support, epoch=2,
            explore=support.copy(), exploit={1: np.zeros(n, bool), -1: np.zeros(n, bool)},
        )
        for arm in (1, -1):
            X = rng.random((600, 1))
            state.samples[arm] = (X, np.full(600, 0.5))
            state.sample_counts[arm] = 600
            state.bandwidths[arm] = 600 ** (-1.0 / 5)
        screened = {1: ScreenResult(np.zeros(n, bool), False), -1: ScreenResult(np.zeros(n, bool), False)}
        tau, _ = estimate_cate_at_centers(state, cfg, screened)
        np.testing.assert_allclose(tau[~np.isnan(tau)], 0.0, atol=1e-12)

    def test_estimate_separated_constant_arms(self):
        # noiseless means 3/4 and 1/4: the gap comes out at 1/2 exactly
        cfg = PolicyConfig(beta=2.0, d=1, horizon=5000)
        lattice = build_lattice(cfg.horizon, cfg.beta, cfg.d)
        support = support_cube_mask(lattice, None)
        n = lattice.n_cubes
        rng = np.random.default_rng(9)
        state = DecisionState(
            lattice=lattice, support_cubes=support, epoch=2,
            explore=support.copy(), exploit={1: np.zeros(n, bool), -1: np.zeros(n, bool)},
        )
        for arm, level in ((1, 0.75), (-1, 0.25)):
            X = rng.random((800, 1))
            state.samples[arm] = (X, np.full(800, level))
            state.sample_counts[arm] = 800
            state.bandwidths[arm] = 800 ** (-1.0 / 5)
        screened = {1: ScreenResult(np.zeros(n, bool), False), -1: ScreenResult(np.zeros(n, bool), False)}
        tau, diag = estimate_cate_at_centers(state, cfg, screened)
        assert diag["degenerate_fits"] == 0
        np.testing.assert_allclose(tau[~np.isnan(tau)], 0.5, atol=1e-6)

    def test_estimate_op_flags_degenerate_fits(self):
        cfg = PolicyConfig(beta=2.0, d=1, horizon=5000)
        lattice = build_lattice(cfg.horizon, cfg.beta, cfg.d)
        support = support_cube_mask(lattice, None)
        n = lattice.n_cubes
        state = DecisionState(
            lattice=lattice, support_cubes=support, epoch=2,
            explore=support.copy(), exploit={1: np.zeros(n, bool), -1: np.zeros(n, bool)},
        )
        rng = np.random.default_rng(4)
        # plentiful data for +1, one lone far-away sample for -1
        state.samples[1] = (rng.random((800, 1)), np.full(800, 0.75))
        state.sample_counts[1] = 800
        state.bandwidths[1] = 800 ** (-1.0 / 5)
        state.samples[-1] = (np.array([[0.0]]), np.array([0.25]))
        state.sample_counts[-1] = 1
        state.bandwidths[-1] = 0.015
        screened = {1: ScreenResult(np.zeros(n, bool), False), -1: ScreenResult(np.zeros(n, bool), False)}
        tau, diag = estimate_cate_at_centers(state, cfg, screened)
        assert diag["degenerate_fits"] > 0
        ids = ~np.isnan(tau)
        # cubes where arm -1 had no usable fit fall back to eta=0: tau = 0.75
        assert np.nanmax(tau[ids]) == pytest.approx(0.75, abs=0.05)


class TestRunMultiArm:
    def test_matches_two_arm_under_shared_seed(self):
        env = make_smooth_instance("sinusoidal", d=1, amplitude=0.4, beta=2.0)
        cfg = PolicyConfig(beta=2.0, d=1, horizon=2000, arm_count=2)
        for seed in range(2):
            a = run_two_arm(env, cfg, seed=seed, record_actions=True)
            b = run_multi_arm(env, cfg, seed=seed, record_actions=True)
            np.testing.assert_array_equal(a.actions, b.actions)
            np.testing.assert_array_equal(a.cum_regret, b.cum_regret)

    def test_identical_arms_zero_regret(self):
        env = make_constant_multi_arm((0.5, 0.5, 0.5), d=1)
        cfg = PolicyConfig(beta=1.0, d=1, horizon=2000, arm_count=3)
        res = run_multi_arm(env, cfg, seed=0)
        assert res.final_regret == 0.0

    def test_best_arm_survives_elimination(self):
        # pilot-calibrated config: by the final epoch the tolerance 2^-(K-1)
        # sits below the 0.3 gap, so both inferior arms are eliminated
        env = make_constant_multi_arm((0.2, 0.5, 0.8), d=1, beta=2.0)
        cfg = PolicyConfig(beta=2.0, d=1, horizon=10_000, c_epoch=2.0, p=0.5, arm_count=3)
        fractions = []
        for seed in range(20):
            res = run_multi_arm(env, cfg, seed=seed)
            assert 2.0 ** -(res.meta["epochs"] - 1) < 0.3
            last = res.epochs[-1]
            total = last.explore_cubes + sum(last.exploit_cubes.values())
            fractions.append(last.exploit_cubes[2] / total)
        assert np.median(fractions) >= 0.9

    def test_active_sets_never_empty_and_monotone(self):
        env = make_constant_multi_arm((0.3, 0.6, 0.9), d=1)
        cfg = PolicyConfig(beta=1.0, d=1, horizon=5000, arm_count=3)
        res = run_multi_arm(env, cfg, seed=1)
        assert res.meta["anomalies"] == 0
        bits = res.final_labels
        assert np.all(bits[bits >= 0] > 0)  # no support cube lost all arms

    def test_rejects_wrong_arm_count(self):
        env = make_constant_multi_arm((0.2, 0.8), d=1)
        cfg = PolicyConfig(beta=1.0, d=1, horizon=1000, arm_count=3)
        with pytest.raises(ValueError):
            run_multi_arm(env, cfg, seed=0)

    def test_region_dependent_optimal_arms(self):
        # three phase-shifted sinusoids: each arm is optimal on its own third
        # of the axis, so eliminations must differ cube by cube
        import math as _math

        from smoothbandit.environments import Instance, InstanceMeta

        def mean(points, arm):
            points = np.atleast_2d(points)
            return 0.5 + 0.3 * np.sin(2 * _math.pi * (points[:, 0] - arm / 3.0))

        def support(points):
            points = np.atleast_2d(points)
            return np.all((points >= 0) & (points <= 1), axis=1)

        env = Instance(
            name="phased_three_arm",
            d=1,
            arms=(0, 1, 2),
            mean=mean,
            sample_contexts=lambda rng, n: rng.random((n, 1)),
            support=support,
            meta=InstanceMeta(beta=2.0, L=0.3 * (2 * _math.pi) ** 2 / 2, L1=0.3 * 2 * _math.pi,
                              alpha=1.0, gamma=2.0, c0=0.25, r0=0.1, mu_min=1.0, mu_max=1.0),
        )
        cfg = PolicyConfig(beta=2.0, d=1, horizon=30_000, c_epoch=8.0, p=0.5, arm_count=3)
        res = run_multi_arm(env, cfg, seed=4)
        assert res.meta["epochs"] >= 3

        # active-cube counts shrink monotonically for every arm
        for arm in env.arms:
            counts = [e.active_cubes[arm] for e in res.epochs]
            assert all(later <= earlier for earlier, later in zip(counts, counts[1:]))

        # decided cubes must agree with the oracle on clearly separated cells
        lattice = build_lattice(cfg.horizon, cfg.beta, cfg.d)
        bits = res.final_labels
        support_ids = np.nonzero(bits >= 0)[0]
        centers = lattice.centers(support_ids)
        means_at_centers = env.means_matrix(centers)
        lead = np.sort(means_at_centers, axis=0)[-1] - np.sort(means_at_centers, axis=0)[-2]
        oracle = means_at_centers.argmax(axis=0)
        decided = np.array([bin(b).count("1") == 1 for b in bits[support_ids]])
        correct = np.array(
            [b == (1 << o) for b, o in zip(bits[support_ids], oracle)]
        )
        clear = lead > 0.2
        assert decided[clear].mean() > 0.9  # well-separated cells get decided
        assert correct[clear & decided].mean() > 0.95  # and almost always correctly
        # every arm still owns some region: none is eliminated globally
        for arm in env.arms:
            assert any(b == (1 << arm) for b in bits[support_ids])
