import json
import math

import numpy as np
import pytest

from aoicontract.flsim import (
    CONSENSUS_STAGES,
    STAGES,
    WorkflowConfig,
    average_round_time,
    emit_trace,
    simulate,
    simulate_round,
    write_trace,
)

# stages that run once per round, in order; worker stages are checked per worker
SERIAL_BEFORE = ["publish", "relay_verify", "dispatch"]
SERIAL_AFTER = ["relay_check", "main_transfer", "aggregate", "distribute"]


def test_default_round_is_two_seconds():
    r = simulate_round(WorkflowConfig())
    assert r.t_u == 1.2 and r.t_c == 0.8
    assert r.t == 2.0


def test_slow_worker_sets_learning_time():
    r = simulate_round(WorkflowConfig(train_overrides={"P3": 5.0}))
    assert r.t_u == pytest.approx(5.2, abs=1e-12)
    assert r.t_c == pytest.approx(0.8, abs=1e-12)


def test_learning_time_independent_of_worker_count():
    small = simulate_round(WorkflowConfig(workers_virtual=1, workers_physical=1))
    large = simulate_round(WorkflowConfig(workers_virtual=40, workers_physical=17))
    assert small.t_u == large.t_u


def test_seeded_rounds_are_reproducible():
    cfg = WorkflowConfig(train=(0.5, 1.5), upload=(0.1, 0.3), seed=9, epochs=5)
    assert [r.to_dict() for r in simulate(cfg)] == [r.to_dict() for r in simulate(cfg)]
    other = WorkflowConfig(train=(0.5, 1.5), upload=(0.1, 0.3), seed=10, epochs=5)
    assert simulate(cfg)[0].t != simulate(other)[0].t


def test_uniform_consensus_mean():
    # seven consensus stages, each U(0.5, 1.5): mean 7, variance 7/12
    delays = {name: (0.5, 1.5) for name in CONSENSUS_STAGES}
    cfg = WorkflowConfig(epochs=10000, seed=1, **delays)
    t_c = np.array([r.t_c for r in simulate(cfg)])
    se = math.sqrt(7 / 12 / t_c.size)
    assert abs(t_c.mean() - 7.0) <= 3 * se
    assert average_round_time(cfg) == pytest.approx(t_c.mean() + 1.2, abs=1e-9)


def _check_causal(trace, cfg):
    first, last = {}, {}
    for ev in trace:
        first.setdefault(ev.stage, ev.timestamp)
        last[ev.stage] = ev.timestamp
    assert [ev.timestamp for ev in trace] == sorted(ev.timestamp for ev in trace)
    assert set(first) == set(STAGES)
    for chain in (SERIAL_BEFORE, SERIAL_AFTER):
        for before, after in zip(chain, chain[1:]):
            assert last[before] <= first[after]
    workers = {}
    for ev in trace:
        workers.setdefault(ev.entity, {})[ev.stage] = ev.timestamp
    for wid in cfg.worker_ids():
        sub = workers[f"subchain_{wid[0]}"]
        assert sub["dispatch"] <= workers[wid]["train"] <= workers[wid]["upload"] <= sub["relay_check"]


def test_trace_is_causal_and_complete():
    cfg = WorkflowConfig()
    trace = emit_trace(cfg)
    _check_causal(trace, cfg)
    entities = {ev.entity for ev in trace}
    assert {"subchain_V", "subchain_P"} <= entities
    assert trace[-1].stage == "distribute" and trace[-1].timestamp == pytest.approx(2.0)


def test_random_rounds_causal():
    delays = {name: (0.0, 0.5) for name in STAGES}
    cfg = WorkflowConfig(seed=4, workers_virtual=3, workers_physical=2, **delays)
    for epoch in range(200):
        _check_causal(emit_trace(cfg, epoch), cfg)


def test_write_trace(tmp_path):
    path = tmp_path / "trace.jsonl"
    write_trace(path, emit_trace(WorkflowConfig()))
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    assert set(rows[0]) == {"timestamp", "entity", "stage"}
    assert rows[0]["stage"] == "publish"


@pytest.mark.parametrize("kwargs", [
    {"train": -1.0},
    {"upload": (0.5, 0.1)},
    {"workers_virtual": 0},
    {"epochs": 0},
    {"train_overrides": {"X9": 1.0}},
])
def test_workflow_validation(kwargs):
    with pytest.raises(ValueError):
        WorkflowConfig(**kwargs)
