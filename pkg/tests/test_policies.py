import math

import numpy as np
import pytest

from lacnav.cell import ActionCell, AgentSnapshot, LacParams, build_cell, bvc_bound
from lacnav.geom import TWO_PI, Vec2
from lacnav.policies import (
    bvc_goal_point,
    LearnerState,
    LearnParams,
    PenaltyParams,
    action_weights,
    bvc_select,
    learn_step,
    reward_of_cell,
    select_act,
    select_vel,
    wucb_scores,
)
from test_cell import random_config, snap

PEN = PenaltyParams()  # zeta=0.95, symmetric
LAC = LacParams()
LEARN = LearnParams()  # gamma=0.75, eta=0.9, beta=0.1, window_t=8


def make_cell(lengths, goal_dir=0.0, max_speed=50.0):
    n = len(lengths)
    actions = tuple(
        Vec2(L * math.cos(goal_dir + k * TWO_PI / n),
             L * math.sin(goal_dir + k * TWO_PI / n))
        for k, L in enumerate(lengths)
    )
    return ActionCell(actions, goal_dir, max_speed)


def fresh_learner(seed=0, n_actions=8, window_t=8):
    return LearnerState.fresh(n_actions, window_t, np.random.default_rng(seed))


class TestActionWeights:
    def test_penalty_constants(self):
        cell = make_cell([1.0] * 8)
        w = action_weights(cell, PEN)
        assert w[0] == 1.0
        assert abs(w[2] - 0.9025) < 1e-12          # orthogonal
        assert abs(w[6] - 0.9025) < 1e-12
        assert abs(w[4] - 0.81450625) < 1e-12      # opposite

    def test_weights_scale_with_length(self):
        cell = make_cell([0.0, 0.0, 50.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        w = action_weights(cell, PEN)
        assert w[2] == pytest.approx(0.9025 * 50.0, rel=1e-12)

    def test_mirror_symmetry(self):
        lengths = [10.0, 20.0, 30.0, 40.0, 50.0, 40.0, 30.0, 20.0]
        w = action_weights(make_cell(lengths), PEN)
        for k in range(1, 8):
            assert w[k] == pytest.approx(w[8 - k], rel=1e-12)

    def test_literal_mode_is_one_sided(self):
        pen = PenaltyParams(angle_mode="literal")
        w = action_weights(make_cell([1.0] * 8), pen)
        assert w[1] == pytest.approx(0.95, rel=1e-12)
        assert w[7] == pytest.approx(0.95**7, rel=1e-12)

    def test_nondefault_cell_size(self):
        w = action_weights(make_cell([1.0] * 4), PEN)
        assert w[1] == pytest.approx(0.9025, rel=1e-12)
        assert w[2] == pytest.approx(0.81450625, rel=1e-12)


class TestSelectVel:
    def test_unconstrained_goes_to_goal(self):
        cell = make_cell([50.0] * 8)
        assert select_vel(cell, PEN) == cell.actions[0]

    def test_blocked_goal_picks_detour(self):
        # goal ray clipped to 14, the rest free: 0.95*50 beats 14
        lengths = [14.0] + [50.0] * 7
        cell = make_cell(lengths)
        assert select_vel(cell, PEN) == cell.actions[1]

    def test_symmetric_tie_prefers_smaller_index(self):
        lengths = [0.0, 50.0, 0.0, 0.0, 0.0, 0.0, 0.0, 50.0]
        cell = make_cell(lengths)
        assert select_vel(cell, PEN) == cell.actions[1]

    def test_invariant_under_uniform_scaling(self):
        rng = np.random.default_rng(41)
        for _ in range(100):
            lengths = list(rng.uniform(0, 50, size=8))
            s = float(rng.uniform(0.1, 10))
            c1 = make_cell(lengths)
            c2 = make_cell([L * s for L in lengths])
            w1 = action_weights(c1, PEN)
            w2 = action_weights(c2, PEN)
            assert max(range(8), key=lambda k: (w1[k], -k)) == max(
                range(8), key=lambda k: (w2[k], -k)
            )


class TestReward:
    def test_closed_form_full_cell(self):
        w = action_weights(make_cell([50.0] * 8), PEN)
        expect = 50.0 * (1 + 2 * 0.95 + 2 * 0.9025 + 2 * 0.857375 + 0.81450625)
        assert reward_of_cell(w) == pytest.approx(expect, rel=1e-12)
        assert expect == pytest.approx(361.7128125, rel=1e-9)

    def test_blocked_cell_zero(self):
        assert reward_of_cell(action_weights(make_cell([0.0] * 8), PEN)) == 0.0

    def test_single_action(self):
        w = action_weights(make_cell([0, 0, 10.0, 0, 0, 0, 0, 0]), PEN)
        assert reward_of_cell(w) == pytest.approx(0.9025 * 10.0, rel=1e-12)


class TestWucb:
    def test_single_entry(self):
        st = fresh_learner()
        st.window.append((0, 1.0))
        scores = wucb_scores(st)
        assert scores[0] == pytest.approx(1.0, abs=1e-15)  # ln(1) = 0
        assert all(math.isinf(s) for s in scores[1:])

    def test_empty_window_all_infinite(self):
        assert all(math.isinf(s) for s in wucb_scores(fresh_learner()))

    def test_two_entries_same_action(self):
        st = fresh_learner()
        st.window.append((0, 2.0))
        st.window.append((0, 4.0))
        scores = wucb_scores(st)
        expect = 3.0 + math.sqrt(2.0 * math.log(2.0) / 2.0)
        assert scores[0] == pytest.approx(expect, rel=1e-12)
        assert expect == pytest.approx(3.8325546, abs=1e-6)

    def test_depends_only_on_window(self):
        st = fresh_learner(window_t=8)
        rng = np.random.default_rng(43)
        for _ in range(50):
            st.window.append((int(rng.integers(0, 8)), float(rng.uniform(0, 100))))
        tail = list(st.window)  # deque already dropped old entries
        st2 = fresh_learner(window_t=8)
        st2.window.extend(tail)
        assert wucb_scores(st) == wucb_scores(st2)


class TestSelectAct:
    def test_win_stay_resets_epsilon(self):
        st = fresh_learner()
        st.last_action = 0
        st.epsilon = 0.7
        cell = make_cell([50.0] * 8)
        w = action_weights(cell, PEN)
        a = select_act(st, w, cell, LEARN)
        assert a == 0
        assert st.epsilon == 0.0

    def test_loss_bumps_epsilon_to_cap(self):
        cell = make_cell([10.0] + [0.0] * 7)  # goal action constrained
        w = action_weights(cell, PEN)
        st = fresh_learner(seed=5)
        for _ in range(12):
            st.last_action = 0
            select_act(st, w, cell, LEARN)
        assert st.epsilon == 1.0  # min{1, .} clamp after >= 10 losses

    def test_epsilon_one_always_explores_wucb(self):
        st = fresh_learner(seed=7)
        st.epsilon = 1.0
        st.last_action = 3
        st.window.append((5, 1000.0))
        cell = make_cell([50.0] * 8)
        w = action_weights(cell, PEN)
        # all unseen actions are +inf in wUCB; smallest index wins
        assert select_act(st, w, cell, LEARN) == 0

    def test_gamma_one_fresh_equals_select_vel(self):
        params = LearnParams(gamma=1.0)
        rng = np.random.default_rng(47)
        for _ in range(50):
            lengths = list(rng.uniform(0, 50, size=8))
            cell = make_cell(lengths)
            w = action_weights(cell, PEN)
            st = fresh_learner(seed=11)
            st.last_action = 3  # not the goal action; epsilon stays 0
            got = select_act(st, w, cell, params)
            assert cell.actions[got] == select_vel(cell, PEN)

    def test_fixed_rng_replays(self):
        cell = make_cell([10.0] + [0.0] * 7)
        w = action_weights(cell, PEN)

        def run_once():
            st = fresh_learner(seed=99)
            st.epsilon = 0.5
            out = []
            for _ in range(20):
                st.last_action = 0
                out.append(select_act(st, w, cell, LEARN))
            return out

        assert run_once() == run_once()


class TestLearnStep:
    def test_first_step_skips_reward(self):
        st = fresh_learner()
        cell = make_cell([50.0] * 8)
        vel, st = learn_step(st, cell, LEARN, PEN)
        assert st.reward_table == [0.0] * 8
        assert len(st.window) == 0
        assert st.last_action is not None

    def test_second_step_credits_last_action(self):
        st = fresh_learner()
        cell = make_cell([50.0] * 8)
        _, st = learn_step(st, cell, LEARN, PEN)
        first = st.last_action
        _, st = learn_step(st, cell, LEARN, PEN)
        expect = reward_of_cell(action_weights(cell, PEN))
        assert st.reward_table[first] == pytest.approx(expect, rel=1e-12)
        assert list(st.window) == [(first, st.reward_table[first])]

    def test_window_never_exceeds_t(self):
        st = fresh_learner(window_t=8)
        cell = make_cell([50.0] * 8)
        for _ in range(20):
            _, st = learn_step(st, cell, LEARN, PEN)
        assert len(st.window) == 8

    def test_unconstrained_win_stay_goes_to_goal(self):
        st = fresh_learner(seed=3)
        cell = make_cell([50.0] * 8)
        _, st = learn_step(st, cell, LEARN, PEN)
        for _ in range(10):
            vel, st = learn_step(st, cell, LEARN, PEN)
            assert st.last_action == 0
            assert vel == cell.actions[0]


class TestBvcSelect:
    def test_no_neighbors_far_target(self):
        me = snap(0, 0, 0)
        v = bvc_select(me, Vec2(1000.0, 0.0), [], LAC)
        assert v.norm() == pytest.approx(50.0, rel=1e-12)
        assert v.y == 0.0

    def test_no_neighbors_near_target_exact_arrival(self):
        me = snap(0, 0, 0)
        v = bvc_select(me, Vec2(0.3, 0.2), [], LAC)
        assert v.x == pytest.approx(30.0, rel=1e-12)
        assert v.y == pytest.approx(20.0, rel=1e-12)

    def test_single_blocker_projects_onto_constraint(self):
        me = snap(0, 0, 0)
        nb = snap(1, 30.0, 0.0)
        target = Vec2(100.0, 0.0)
        v = bvc_select(me, target, [nb], LAC)
        # the commanded displacement stays on our side of the offset bisector
        step = Vec2(v.x * LAC.delta, v.y * LAC.delta)
        assert step.x <= 5.0 + 1e-7
        # two-agent closed form: g* = (5, 0), speed capped at v_max
        assert v.x == pytest.approx(50.0, rel=1e-12)
        assert v.y == pytest.approx(0.0, abs=1e-12)

    def test_goal_point_matches_grid_search(self):
        rng = np.random.default_rng(53)
        params = LacParams()
        for _ in range(20):
            me, target, nbrs = random_config(rng, int(rng.integers(1, 5)))
            g = bvc_goal_point(me, target, nbrs, params)
            planes = []
            for nb in nbrs:
                u, _ = bvc_bound(me.position, nb.position, params)
                m = 0.5 * ((me.position.x + nb.position.x) * u.x
                           + (me.position.y + nb.position.y) * u.y) - params.r
                planes.append((u, m))
            # dense grid centered between agent and target, wide enough to
            # bracket the true optimum
            cx = 0.5 * (me.position.x + target.x)
            cy = 0.5 * (me.position.y + target.y)
            span = 0.5 * (target - me.position).norm() + 80.0
            xs = np.linspace(cx - span, cx + span, 401)
            ys = np.linspace(cy - span, cy + span, 401)
            best = math.inf
            for x in xs:
                for y in ys:
                    if all(x * u.x + y * u.y <= m for u, m in planes):
                        d = math.hypot(x - target.x, y - target.y)
                        best = min(best, d)
            assert best < math.inf
            d_g = math.hypot(g.x - target.x, g.y - target.y)
            grid_cell = (xs[1] - xs[0]) * math.sqrt(2)
            # g must be feasible and at least as close as any grid point
            assert all(g.x * u.x + g.y * u.y <= m + 1e-6 for u, m in planes)
            assert d_g <= best + grid_cell

    def test_containment_in_velocity_domain(self):
        rng = np.random.default_rng(59)
        for _ in range(100):
            me, target, nbrs = random_config(rng, int(rng.integers(0, 6)))
            v = bvc_select(me, target, nbrs, LAC)
            assert v.norm() <= LAC.v_max + 1e-9
            for nb in nbrs:
                u, c = bvc_bound(me.position, nb.position, LAC)
                assert v.dot(u) <= c + 1e-6
