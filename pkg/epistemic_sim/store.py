"""Bounded, decaying store of beliefs keyed by proposition id.

Entries are decayed lazily: each keeps the tick it was last touched and is
scaled by ``gamma ** dt`` when next read. Since every entry shares one
``gamma``, ``ln(n_eff) - last_touched * ln(gamma)`` orders entries exactly as
their decayed ``n_eff`` does at any common tick, and never changes while an
entry sits untouched. A heap on that score finds eviction candidates without
rescanning the store.

Time moves in ticks and each elapsed tick scales an entry by ``gamma`` exactly
once. An observation lands in its tick's step, after that tick's scaling, so
consecutive observations follow ``alpha' = gamma * alpha + y``. A prior
inserted by a read has not been stepped yet: observing it on the same tick
applies the step, and otherwise it starts decaying from the next tick.

The store has a single-writer contract: one owner mutates it at a time.
Readers on other threads must work on a :meth:`EpistemicStore.copy`.
"""

import copy
import heapq
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd

from .belief import BetaBelief, n_eq, new_prior
from .exceptions import ClockError, ConfigError, PropositionOutOfRangeError

logger = logging.getLogger(__name__)

SNAPSHOT_COLUMNS = ["id", "alpha", "beta", "last_touched"]


@dataclass(frozen=True)
class StoreConfig:
    """Parameters shared by every entry of an :class:`EpistemicStore`.

    Parameters
    ----------
    gamma : float
        Forgetting factor in ``(0, 1]``.
    n_min : float
        Entries whose decayed ``n_eff`` drops below this are evicted.
        ``0`` disables threshold eviction.
    capacity : int, optional
        Maximum number of entries; ``None`` is unbounded.
    prior_alpha, prior_beta : float
        Counts of the belief a missing proposition starts from.
    """

    gamma: float = 1.0
    n_min: float = 0.0
    capacity: Optional[int] = None
    prior_alpha: float = 1.0
    prior_beta: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.gamma) or not 0.0 < self.gamma <= 1.0:
            raise ConfigError(f"must lie in (0, 1], got {self.gamma!r}", field="gamma")
        for name in ("prior_alpha", "prior_beta"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ConfigError(
                    f"must be finite and strictly positive, got {value!r}", field=name
                )
        if not math.isfinite(self.n_min) or self.n_min < 0:
            raise ConfigError(f"must be >= 0, got {self.n_min!r}", field="n_min")
        if self.gamma < 1.0 and self.n_min >= n_eq(self.gamma):
            raise ConfigError(
                f"must be below n_eq(gamma) = {n_eq(self.gamma):g}, otherwise every "
                "belief is eventually evicted even under constant observation",
                field="n_min",
            )
        if self.capacity is not None and (
            isinstance(self.capacity, bool)
            or not isinstance(self.capacity, (int, np.integer))
            or self.capacity < 1
        ):
            raise ConfigError(
                f"must be a positive integer or None, got {self.capacity!r}",
                field="capacity",
            )

    def prior(self) -> BetaBelief:
        return new_prior(self.prior_alpha, self.prior_beta, self.gamma)


@dataclass
class StoreEntry:
    belief: BetaBelief
    last_touched: int
    score: float = 0.0
    version: int = 0
    # prior inserted at last_touched whose tick step has not run
    unstepped: bool = False


class EpistemicStore:
    """Working set of beliefs with lazy decay and eviction.

    Parameters
    ----------
    config : StoreConfig
    k : int, optional
        Size of the proposition universe. Ids must lie in ``[0, k)``.
        ``None`` accepts any nonnegative id.
    """

    def __init__(self, config: StoreConfig, k: Optional[int] = None):
        self.config = config
        self.k = k
        self.clock = 0
        self.evicted_total = 0
        self._prior = config.prior()
        self._log_gamma = math.log(config.gamma)
        self._entries: Dict[int, StoreEntry] = {}
        self._heap: List[Tuple[float, int, int, int]] = []

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, id) -> bool:
        return id in self._entries

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._entries))

    @property
    def prior(self) -> BetaBelief:
        return self._prior

    def check_id(self, id: int) -> int:
        if id < 0 or (self.k is not None and id >= self.k):
            raise PropositionOutOfRangeError(
                f"Proposition id {id} is outside the universe [0, {self.k})"
            )
        return int(id)

    def _advance(self, now: int) -> None:
        if now < self.clock:
            raise ClockError(f"Tick {now} is earlier than the store clock {self.clock}")
        self.clock = now

    def _elapsed(self, id: int, entry: StoreEntry, now: int) -> int:
        if now < entry.last_touched:
            raise ClockError(
                f"Tick {now} is earlier than entry {id}'s last touch "
                f"{entry.last_touched}"
            )
        return now - entry.last_touched

    def _decayed_n_eff(self, entry: StoreEntry, now: int) -> float:
        return entry.belief.n_eff * self.config.gamma ** (now - entry.last_touched)

    def _push(self, id: int, entry: StoreEntry, rescore: bool = True) -> None:
        if rescore:
            entry.score = (
                math.log(entry.belief.n_eff) - entry.last_touched * self._log_gamma
            )
        entry.version += 1
        heapq.heappush(self._heap, (entry.score, entry.last_touched, id, entry.version))
        if len(self._heap) > 2 * len(self._entries) + 64:
            self._heap = [
                (e.score, e.last_touched, i, e.version)
                for i, e in self._entries.items()
            ]
            heapq.heapify(self._heap)

    def _is_live(self, item: Tuple[float, int, int, int]) -> bool:
        entry = self._entries.get(item[2])
        return entry is not None and entry.version == item[3]

    def _touch(self, id: int, now: int) -> BetaBelief:
        entry = self._entries.get(id)
        if entry is None:
            entry = self._entries[id] = StoreEntry(self._prior, now, unstepped=True)
            self._push(id, entry)
        elif now > entry.last_touched:
            entry.belief = entry.belief.decay(now - entry.last_touched)
            entry.last_touched = now
            entry.unstepped = False
            # the score is decay-invariant, only the tie key moves
            self._push(id, entry, rescore=False)
        return entry.belief

    def get_or_init(self, id: int, now: int) -> BetaBelief:
        """Return the belief for `id` decayed to `now`, inserting the prior on a miss.

        Parameters
        ----------
        id : int
        now : int
            Current tick, not earlier than the store clock.

        Returns
        -------
        BetaBelief
        """
        id = self.check_id(id)
        self._advance(now)
        belief = self._touch(id, now)
        self._enforce_capacity(protect=id)
        return belief

    def peek(self, id: int, now: int) -> Optional[BetaBelief]:
        """Return the belief for `id` decayed to `now` without touching the store."""
        entry = self._entries.get(self.check_id(id))
        if entry is None:
            return None
        return entry.belief.decay(self._elapsed(id, entry, now))

    def record(self, id: int, evidence, now: int) -> BetaBelief:
        """Fold one observation of `id` at tick `now` into the store.

        Scales the entry by ``gamma`` once per tick since it was last stepped
        and adds the observation in tick `now`'s step. A miss starts from the
        prior, so with prior ``(1, 1)`` and ``gamma = 0.99`` a first ``y = 1``
        gives ``(1.99, 0.99)``. Several observations on one tick all land in
        that tick's step.

        Returns
        -------
        BetaBelief
            The updated belief.
        """
        id = self.check_id(id)
        self._advance(now)
        entry = self._entries.get(id)
        if entry is None:
            entry = self._entries[id] = StoreEntry(self._prior.update(evidence), now)
        elif entry.unstepped and entry.last_touched == now:
            entry.belief = entry.belief.update(evidence)
        else:
            dt = now - entry.last_touched
            entry.belief = entry.belief.decay(dt).absorb(evidence)
            entry.last_touched = now
        entry.unstepped = False
        self._push(id, entry)
        self._enforce_capacity(protect=id)
        return entry.belief

    def replace(self, id: int, belief: BetaBelief, now: int) -> None:
        """Overwrite the belief stored for `id` as of tick `now`."""
        id = self.check_id(id)
        self._advance(now)
        entry = self._entries.get(id)
        if entry is None:
            entry = self._entries[id] = StoreEntry(belief, now)
        else:
            entry.belief, entry.last_touched = belief, now
            entry.unstepped = False
        self._push(id, entry)
        self._enforce_capacity(protect=id)

    def sweep_evict(self, now: int) -> List[int]:
        """Evict every entry whose decayed ``n_eff`` is below ``n_min``.

        Survivors are left as they are; nothing is decayed eagerly.

        Returns
        -------
        List[int]
            Evicted ids, lowest decayed ``n_eff`` first.
        """
        evicted = []
        n_min = self.config.n_min
        heap = self._heap
        while heap:
            if not self._is_live(heap[0]):
                heapq.heappop(heap)
                continue
            id = heap[0][2]
            if self._decayed_n_eff(self._entries[id], now) >= n_min:
                break
            heapq.heappop(heap)
            del self._entries[id]
            evicted.append(id)
        if evicted:
            self.evicted_total += len(evicted)
            logger.debug("t=%d evicted %d below n_min: %s", now, len(evicted), evicted)
        return evicted

    def enforce_capacity(self) -> List[int]:
        """Evict the lowest-density entries until the store fits its capacity.

        Ties on decayed ``n_eff`` go to the entry touched longest ago, then to
        the smaller id.

        Returns
        -------
        List[int]
        """
        return self._enforce_capacity()

    def _enforce_capacity(self, protect: Optional[int] = None) -> List[int]:
        capacity = self.config.capacity
        if capacity is None or len(self._entries) <= capacity:
            return []
        evicted = []
        held = []
        heap = self._heap
        while len(self._entries) > capacity and heap:
            item = heapq.heappop(heap)
            if not self._is_live(item):
                continue
            if item[2] == protect:
                held.append(item)
                continue
            del self._entries[item[2]]
            evicted.append(item[2])
        for item in held:
            heapq.heappush(heap, item)
        if evicted:
            self.evicted_total += len(evicted)
            logger.debug(
                "evicted %d over capacity %d: %s", len(evicted), capacity, evicted
            )
        return evicted

    def active_set(self, now: int) -> List[Tuple[int, BetaBelief]]:
        """Entries at or above ``n_min``, decayed to `now`, in ascending id order."""
        active = []
        for id in sorted(self._entries):
            entry = self._entries[id]
            belief = entry.belief.decay(self._elapsed(id, entry, now))
            if belief.n_eff >= self.config.n_min:
                active.append((id, belief))
        return active

    def active_moments(self, now: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorised means and variances of the active set at `now`.

        Returns
        -------
        ids : numpy.ndarray[int64]
        means : numpy.ndarray[float64]
        variances : numpy.ndarray[float64]
        """
        if not self._entries:
            empty = np.empty(0)
            return empty.astype(np.int64), empty, empty
        ids = np.fromiter(
            self._entries.keys(), dtype=np.int64, count=len(self._entries)
        )
        state = np.array(
            [
                (e.belief.alpha, e.belief.beta, e.last_touched)
                for e in self._entries.values()
            ]
        )
        alpha, beta, touched = state.T
        total = alpha + beta
        n_eff = total * self.config.gamma ** (now - touched)
        active = n_eff >= self.config.n_min
        means = alpha[active] / total[active]
        variances = means * (1.0 - means) / (n_eff[active] + 1.0)
        return ids[active], means, variances

    def copy(self) -> "EpistemicStore":
        """Independent snapshot safe to read while the original is mutated."""
        clone = copy.copy(self)
        clone._entries = {id: copy.copy(e) for id, e in self._entries.items()}
        clone._heap = list(self._heap)
        return clone

    def to_frame(self) -> pd.DataFrame:
        rows = [
            (id, e.belief.alpha, e.belief.beta, e.last_touched)
            for id, e in sorted(self._entries.items())
        ]
        frame = pd.DataFrame.from_records(rows, columns=SNAPSHOT_COLUMNS)
        return frame.astype({"id": "int64", "last_touched": "int64"})

    def to_csv(self, path) -> None:
        """Write the snapshot table ``id,alpha,beta,last_touched``."""
        self.to_frame().to_csv(
            path, index=False, float_format="%.17g", lineterminator="\n"
        )

    @classmethod
    def from_frame(
        cls, frame: pd.DataFrame, config: StoreConfig, k: Optional[int] = None
    ) -> "EpistemicStore":
        missing = set(SNAPSHOT_COLUMNS) - set(frame.columns)
        if missing:
            raise ValueError(f"Snapshot is missing columns: {sorted(missing)}")
        store = cls(config, k=k)
        for row in frame.itertuples(index=False):
            id = store.check_id(int(row.id))
            if not row.alpha + row.beta > 0:
                raise ValueError(
                    f"Snapshot row for proposition {id} has no evidence mass: "
                    f"alpha = {row.alpha!r}, beta = {row.beta!r}"
                )
            entry = StoreEntry(
                BetaBelief(float(row.alpha), float(row.beta), config.gamma),
                int(row.last_touched),
            )
            store._entries[id] = entry
            store._push(id, entry)
            store.clock = max(store.clock, entry.last_touched)
        return store

    @classmethod
    def from_csv(
        cls, path, config: StoreConfig, k: Optional[int] = None
    ) -> "EpistemicStore":
        """Rebuild a store from a snapshot written by :meth:`to_csv`."""
        frame = pd.read_csv(path, float_precision="round_trip")
        return cls.from_frame(frame, config, k=k)
