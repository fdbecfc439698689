import math

import numpy as np
import pytest

from trajpred.scene import FUTURE_STEPS, HISTORY_STEPS, AgentState, AgentTrack, ObjectInfo, Sample, VectorMap
from trajpred.synth import ScenarioSpec, generate_scenario


def make_track(agent_id="a", x=0.0, y=0.0, heading=0.0, v=0.0, object_class="car", length=4.5, width=2.0):
    """A track that holds speed ``v`` along ``heading`` and ends at (x, y)."""
    states = []
    for i in range(HISTORY_STEPS + 1):
        back = (HISTORY_STEPS - i) * 0.5 * v
        states.append(AgentState(x - back * math.cos(heading), y - back * math.sin(heading),
                                 heading, v, 0.0, 0.0, i))
    return AgentTrack(agent_id, ObjectInfo(object_class, length, width), tuple(states))


def make_sample(target=None, neighbors=(), vmap=None, future=None, sample_id="s"):
    target = target or make_track()
    if future is None:
        future = np.zeros((FUTURE_STEPS, 2))
    return Sample(sample_id, target, list(neighbors), vmap or VectorMap(), np.asarray(future, dtype=float))


@pytest.fixture
def straight_sample():
    return generate_scenario(ScenarioSpec("straight", 5.0, n_neighbors=3, seed=7))


@pytest.fixture(params=["straight", "left_turn", "right_turn", "u_turn", "fork"])
def scenario(request):
    return generate_scenario(ScenarioSpec(request.param, 6.0, n_neighbors=4, seed=11))


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
