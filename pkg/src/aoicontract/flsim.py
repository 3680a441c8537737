"""Discrete-event model of one cross-chain federated learning round.

The round runs: task publish to the main chain, relay-chain verification,
dispatch to the virtual (V) and physical (P) subchains, local training and
upload on every worker, relay check per subchain, transfer to the main chain,
aggregation and distribution of the new global model.

Training plus upload is the learning time ``t_u`` (the slowest worker sets the
pace, since learning is synchronous); every other stage is consensus overhead
``t_c``.  The period consumed by the contract model is ``t = t_u + t_c``.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

import numpy as np

Delay = Union[float, tuple[float, float]]

CONSENSUS_STAGES = ("publish", "relay_verify", "dispatch", "relay_check", "main_transfer",
                    "aggregate", "distribute")
WORKER_STAGES = ("train", "upload")
STAGES = CONSENSUS_STAGES[:3] + WORKER_STAGES + CONSENSUS_STAGES[3:]
SUBCHAINS = ("V", "P")


def _check_delay(name: str, d: Delay) -> Delay:
    if isinstance(d, (tuple, list)):
        lo, hi = map(float, d)
        if lo < 0 or hi < lo:
            raise ValueError(f"{name}: uniform range must satisfy 0 <= lo <= hi, got {d}")
        return (lo, hi)
    d = float(d)
    if d < 0:
        raise ValueError(f"{name}: delay must be nonnegative, got {d}")
    return d


@dataclass(frozen=True)
class WorkflowConfig:
    """Stage delays in seconds: a constant or a ``(lo, hi)`` uniform range.

    The defaults give ``t_u = 1.2`` and ``t_c = 0.8``, so ``t = 2`` s.
    """

    publish: Delay = 0.1
    relay_verify: Delay = 0.1
    dispatch: Delay = 0.1
    train: Delay = 1.0
    upload: Delay = 0.2
    relay_check: Delay = 0.1
    main_transfer: Delay = 0.1
    aggregate: Delay = 0.2
    distribute: Delay = 0.1
    workers_virtual: int = 5
    workers_physical: int = 5
    epochs: int = 1
    seed: int = 0
    # per-worker training delay overrides keyed by worker id ("V1", "P3", ...)
    train_overrides: Mapping[str, Delay] = field(default_factory=dict)

    def __post_init__(self):
        for name in STAGES:
            object.__setattr__(self, name, _check_delay(name, getattr(self, name)))
        object.__setattr__(self, "train_overrides",
                           {k: _check_delay(f"train_overrides.{k}", v) for k, v in self.train_overrides.items()})
        if self.workers_virtual < 1 or self.workers_physical < 1:
            raise ValueError("each subchain needs at least one worker")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        unknown = set(self.train_overrides) - set(self.worker_ids())
        if unknown:
            raise ValueError(f"train_overrides name unknown workers: {sorted(unknown)}")

    def worker_ids(self) -> list[str]:
        return ([f"V{i + 1}" for i in range(self.workers_virtual)]
                + [f"P{i + 1}" for i in range(self.workers_physical)])


@dataclass(frozen=True)
class RoundTiming:
    t_u: float
    t_c: float
    t: float
    stages: dict

    def to_dict(self) -> dict:
        return {"t_u": self.t_u, "t_c": self.t_c, "t": self.t, "stages": self.stages}


@dataclass(frozen=True)
class TraceEvent:
    timestamp: float
    entity: str
    stage: str

    def to_json(self) -> str:
        return json.dumps({"timestamp": self.timestamp, "entity": self.entity, "stage": self.stage})


def _draw(rng: np.random.Generator, d: Delay) -> float:
    if isinstance(d, tuple):
        return float(rng.uniform(d[0], d[1]))
    return d


def _sample(config: WorkflowConfig, epoch_index: int):
    """Stage delays for one round, drawn in a fixed order from a per-epoch stream."""
    rng = np.random.default_rng([config.seed, epoch_index])
    consensus = {name: _draw(rng, getattr(config, name)) for name in CONSENSUS_STAGES}
    workers = {}
    for wid in config.worker_ids():
        train = config.train_overrides.get(wid, config.train)
        workers[wid] = (_draw(rng, train), _draw(rng, config.upload))
    return consensus, workers


def _run(config: WorkflowConfig, epoch_index: int):
    consensus, workers = _sample(config, epoch_index)
    by_chain = {s: [w for w in workers if w.startswith(s)] for s in SUBCHAINS}
    queue: list = []
    seq = 0
    trace: list[TraceEvent] = []
    pending_uploads = {s: len(by_chain[s]) for s in SUBCHAINS}
    pending_checks = len(SUBCHAINS)

    def schedule(at, entity, stage):
        nonlocal seq
        heapq.heappush(queue, (at, seq, entity, stage))
        seq += 1

    schedule(consensus["publish"], "publisher", "publish")
    while queue:
        now, _, entity, stage = heapq.heappop(queue)
        trace.append(TraceEvent(now, entity, stage))
        if stage == "publish":
            schedule(now + consensus["relay_verify"], "relay", "relay_verify")
        elif stage == "relay_verify":
            for s in SUBCHAINS:
                schedule(now + consensus["dispatch"], f"subchain_{s}", "dispatch")
        elif stage == "dispatch":
            for wid in by_chain[entity[-1]]:
                schedule(now + workers[wid][0], wid, "train")
        elif stage == "train":
            schedule(now + workers[entity][1], entity, "upload")
        elif stage == "upload":
            s = entity[0]
            pending_uploads[s] -= 1
            if pending_uploads[s] == 0:
                schedule(now + consensus["relay_check"], f"subchain_{s}", "relay_check")
        elif stage == "relay_check":
            pending_checks -= 1
            if pending_checks == 0:
                schedule(now + consensus["main_transfer"], "relay", "main_transfer")
        elif stage == "main_transfer":
            schedule(now + consensus["aggregate"], "main", "aggregate")
        elif stage == "aggregate":
            schedule(now + consensus["distribute"], "main", "distribute")
    return consensus, workers, trace


def simulate_round(config: WorkflowConfig, epoch_index: int = 0) -> RoundTiming:
    consensus, workers, _ = _run(config, epoch_index)
    t_u = max(train + upload for train, upload in workers.values())
    t_c = math.fsum(consensus.values())
    stages = dict(consensus)
    stages["train_max"] = max(w[0] for w in workers.values())
    stages["upload_max"] = max(w[1] for w in workers.values())
    return RoundTiming(t_u=t_u, t_c=t_c, t=t_u + t_c, stages=stages)


def simulate(config: WorkflowConfig) -> list[RoundTiming]:
    return [simulate_round(config, e) for e in range(config.epochs)]


def average_round_time(config: WorkflowConfig) -> float:
    """Mean period ``t`` over the configured epochs."""
    return math.fsum(r.t for r in simulate(config)) / config.epochs


def emit_trace(config: WorkflowConfig, epoch_index: int = 0) -> list[TraceEvent]:
    return _run(config, epoch_index)[2]


def write_trace(path, events: Iterable[TraceEvent]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(ev.to_json() + "\n")
