"""Deterministic tick loop driving one agent per seed through the commons."""

import concurrent.futures
import itertools
import logging
from typing import List

import numpy as np

from .config import ExperimentConfig
from .environment import Commons
from .metrics import MetricsRecord, MetricsSeries, compute_metrics
from .store import EpistemicStore
from .strategy import after_observe, select, strategy_name

logger = logging.getLogger(__name__)


class Replication:
    """One agent, one store and one random stream for a single seed.

    Per tick: the commons offers a candidate batch, the strategy engages one
    candidate, the commons answers with one observation, the store records
    it, the strategy may reset the belief, and entries below ``n_min`` are
    swept out.
    """

    def __init__(self, cfg: ExperimentConfig, seed: int):
        self.cfg = cfg
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.store = EpistemicStore(cfg.store_config(), k=cfg.k)
        self.env = Commons(cfg.schedule, cfg.access, cfg.batch_m)
        self.resets = 0
        self.t = 0

    def step(self) -> MetricsRecord:
        t = self.t = self.t + 1
        cfg, store, rng = self.cfg, self.store, self.rng
        candidates = self.env.draw(rng)
        id = select(cfg.strategy, candidates, store, t, rng)
        evidence = self.env.feedback(id, t, rng)
        before = store.peek(id, t)
        if before is None:
            before = store.prior
        store.record(id, evidence, t)
        if after_observe(cfg.strategy, id, evidence, store, t, before) is not None:
            self.resets += 1
        store.sweep_evict(t)
        return compute_metrics(store, self.env, cfg, t, resets_cum=self.resets)

    def run(self) -> List[MetricsRecord]:
        records = [self.step() for _ in range(self.cfg.horizon_T - self.t)]
        logger.info(
            "seed %d done: %d ticks, %d active, %d evicted, %d resets",
            self.seed,
            self.t,
            len(self.store),
            self.store.evicted_total,
            self.resets,
        )
        return records


def run_replication(cfg: ExperimentConfig, seed: int) -> List[MetricsRecord]:
    return Replication(cfg, seed).run()


def run(cfg: ExperimentConfig, workers: int = 1) -> MetricsSeries:
    """Run every seed of `cfg` and average the metrics across seeds.

    Parameters
    ----------
    cfg : ExperimentConfig
    workers : int
        Number of processes to spread seeds over. Output does not depend on
        it.

    Returns
    -------
    MetricsSeries
    """
    logger.info(
        "running %s over %d seeds: k=%d T=%d gamma=%g, %d candidates offered per "
        "tick and one engaged",
        strategy_name(cfg.strategy),
        len(cfg.seeds),
        cfg.k,
        cfg.horizon_T,
        cfg.gamma,
        cfg.batch_m,
    )
    if workers > 1 and len(cfg.seeds) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_replication, itertools.repeat(cfg), cfg.seeds))
    else:
        results = [run_replication(cfg, seed) for seed in cfg.seeds]
    return MetricsSeries.from_runs(dict(zip(cfg.seeds, results)))
