import math

import pytest

from lacnav.engine import AgentSummary, SimTrace
from lacnav.geom import Vec2
from lacnav.metrics import (
    avg_detour_distance_ratio,
    avg_detour_time_ratio,
    completion_time,
    completion_time_p90,
    run_result,
)


def make_trace(agents, delta=0.01, v_max=50.0, termination="completed", n_steps=None):
    if n_steps is None:
        n_steps = max(
            (a.arrival_step for a in agents if a.arrival_step is not None),
            default=0,
        )
    return SimTrace(
        delta=delta,
        r=10.0,
        v_max=v_max,
        arrival_tol=1e-6,
        seed=0,
        policy="lac_nav",
        scenario_kind="custom",
        agents=agents,
        records=[],
        termination=termination,
        n_steps=n_steps,
    )


def agent(i, straight, arrival_step, path=None, start=Vec2(0, 0)):
    target = Vec2(start.x + straight, start.y)
    return AgentSummary(
        i, start, target, arrival_step, path if path is not None else straight
    )


class TestCompletionTime:
    def test_single_agent(self):
        t = make_trace([agent(0, 500.0, 1000)])
        assert completion_time(t) == pytest.approx(10.0, rel=1e-12)

    def test_unfinished_gives_none(self):
        t = make_trace([agent(0, 500.0, 1000), agent(1, 500.0, None)])
        assert completion_time(t) is None

    def test_all_arrive_at_zero(self):
        t = make_trace([agent(0, 0.0, 0), agent(1, 0.0, 0)])
        assert completion_time(t) == 0.0


class TestP90:
    def test_ten_agents_ninth_order_statistic(self):
        agents = [agent(i, 100.0, (i + 1) * 100) for i in range(10)]
        t = make_trace(agents)
        assert completion_time_p90(t) == pytest.approx(9.0, rel=1e-12)

    def test_single_agent_is_its_own_p90(self):
        t = make_trace([agent(0, 100.0, 250)])
        assert completion_time_p90(t) == pytest.approx(2.5, rel=1e-12)

    def test_too_few_arrivals(self):
        agents = [agent(i, 100.0, 100) for i in range(8)]
        agents += [agent(8, 100.0, None), agent(9, 100.0, None)]
        t = make_trace(agents, termination="step_cap")
        assert completion_time_p90(t) is None


class TestDetourRatios:
    def test_straight_run_is_one(self):
        t = make_trace([agent(0, 500.0, 1000, path=500.0)])
        assert avg_detour_distance_ratio(t) == pytest.approx(1.0, abs=1e-9)
        assert avg_detour_time_ratio(t) == pytest.approx(1.0, abs=1e-9)

    def test_right_isoceles_detour(self):
        # two equal legs instead of the hypotenuse
        t = make_trace([agent(0, 100.0, 400, path=100.0 * math.sqrt(2))])
        assert avg_detour_distance_ratio(t) == pytest.approx(
            math.sqrt(2), rel=1e-12
        )

    def test_mean_over_agents(self):
        t = make_trace(
            [
                agent(0, 100.0, 200, path=100.0),
                agent(1, 100.0, 300, path=150.0),
            ]
        )
        assert avg_detour_distance_ratio(t) == pytest.approx(1.25, rel=1e-12)

    def test_idle_then_straight_doubles_time(self):
        # straight 100 at v_max 50 is 2 s optimal; arriving at 4 s gives 2.0
        t = make_trace([agent(0, 100.0, 400, path=100.0)])
        assert avg_detour_time_ratio(t) == pytest.approx(2.0, rel=1e-12)

    def test_zero_distance_agents_excluded(self):
        t = make_trace(
            [
                agent(0, 0.0, 0, path=0.0),
                agent(1, 100.0, 250, path=120.0),
            ]
        )
        assert avg_detour_distance_ratio(t) == pytest.approx(1.2, rel=1e-12)

    def test_unfinished_excluded_from_means(self):
        t = make_trace(
            [
                agent(0, 100.0, 200, path=100.0),
                agent(1, 100.0, None, path=260.0),
            ],
            termination="step_cap",
        )
        assert avg_detour_distance_ratio(t) == pytest.approx(1.0, abs=1e-12)

    def test_nobody_arrived_gives_none(self):
        t = make_trace([agent(0, 100.0, None)], termination="step_cap")
        assert avg_detour_distance_ratio(t) is None
        assert avg_detour_time_ratio(t) is None


class TestRunResult:
    def test_aggregates_and_serialization(self):
        t = make_trace(
            [
                agent(0, 100.0, 200, path=110.0),
                agent(1, 200.0, 500, path=240.0),
                agent(2, 50.0, None, path=80.0),
            ],
            termination="step_cap",
        )
        r = run_result(t)
        assert r.completion_time_s is None
        assert r.unfinished == 1
        assert r.addr == pytest.approx((1.1 + 1.2) / 2, rel=1e-12)
        d = r.to_dict()
        assert d["unfinished"] == 1
        assert len(d["per_agent"]) == 3
        assert d["per_agent"][2]["arrival_time_s"] is None

    def test_detour_ratios_never_below_one_on_completed_runs(self):
        t = make_trace(
            [agent(i, 100.0 + i, 300 + 10 * i, path=120.0 + i) for i in range(5)]
        )
        r = run_result(t)
        assert r.addr >= 1.0 - 1e-9
        assert r.adtr >= r.addr - 1e-9
