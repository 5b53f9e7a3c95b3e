"""Per-tick metrics, multi-seed series and their CSV form."""

from dataclasses import dataclass
from typing import Dict, Mapping, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

COLUMNS = [
    "t",
    "mse_unweighted",
    "mse_weighted",
    "mean_variance",
    "active_count",
    "evictions_cum",
    "resets_cum",
]
INTEGER_COLUMNS = ["t", "active_count", "evictions_cum", "resets_cum"]

# Ticks the error must stay below threshold for a recovery to count.
RECOVERY_HOLD = 25


class MetricsRecord(NamedTuple):
    t: int
    mse_unweighted: float
    mse_weighted: float
    mean_variance: float
    active_count: int
    evictions_cum: int
    resets_cum: int


def compute_metrics(store, env, cfg, t: int, resets_cum: int = 0) -> MetricsRecord:
    """Score the agent's beliefs against the ground truth at tick `t`.

    Propositions outside the active set are scored at the prior mean and
    prior variance.

    Parameters
    ----------
    store : EpistemicStore
    env : Commons
    cfg : ExperimentConfig
    t : int
    resets_cum : int
        Surprisal resets so far, reported as is.

    Returns
    -------
    MetricsRecord
    """
    prior = store.prior
    means = np.full(cfg.k, prior.mean)
    variances = np.full(cfg.k, prior.variance)
    ids, active_means, active_variances = store.active_moments(t)
    means[ids] = active_means
    variances[ids] = active_variances
    errors = (means - env.theta(t)) ** 2
    return MetricsRecord(
        t=t,
        mse_unweighted=float(errors.mean()),
        mse_weighted=float(env.access.pmf @ errors),
        mean_variance=float(variances.mean()),
        active_count=len(ids),
        evictions_cum=store.evicted_total,
        resets_cum=resets_cum,
    )


def records_frame(records: Sequence[MetricsRecord]) -> pd.DataFrame:
    frame = pd.DataFrame.from_records(records, columns=COLUMNS)
    return frame.astype({name: "int64" for name in INTEGER_COLUMNS})


@dataclass
class MetricsSeries:
    """Metrics of every seed of one experiment and their pointwise mean.

    Attributes
    ----------
    per_seed : Dict[int, pandas.DataFrame]
        One frame per seed, in config seed order, with columns
        :data:`COLUMNS`.
    mean : pandas.DataFrame
        Cross-seed mean of every metric column, indexed the same way.
    """

    per_seed: Dict[int, pd.DataFrame]
    mean: pd.DataFrame

    @classmethod
    def from_runs(cls, runs: Mapping[int, Sequence[MetricsRecord]]) -> "MetricsSeries":
        per_seed = {seed: records_frame(records) for seed, records in runs.items()}
        if not per_seed:
            raise ValueError("A metrics series needs at least one seed")
        ticks = [frame["t"].to_numpy() for frame in per_seed.values()]
        for other in ticks[1:]:
            if not np.array_equal(ticks[0], other):
                raise ValueError("All seeds must cover identical tick ranges")
        values = np.stack(
            [
                frame[COLUMNS[1:]].to_numpy(dtype=np.float64)
                for frame in per_seed.values()
            ]
        )
        mean = pd.DataFrame(values.mean(axis=0), columns=COLUMNS[1:])
        mean.insert(0, "t", ticks[0])
        return cls(per_seed=per_seed, mean=mean)

    @property
    def horizon(self) -> int:
        return int(self.mean["t"].iloc[-1])

    def column(self, name: str = "mse_unweighted") -> pd.Series:
        return self.mean.set_index("t")[name]


def window_mean(
    series: MetricsSeries, start: int, stop: int, column: str = "mse_unweighted"
) -> float:
    """Mean of the cross-seed `column` over ticks ``start..stop`` inclusive."""
    return float(series.column(column).loc[start:stop].mean())


def window_peak(
    series: MetricsSeries, start: int, stop: int, column: str = "mse_unweighted"
) -> float:
    """Maximum of the cross-seed `column` over ticks ``start..stop`` inclusive."""
    return float(series.column(column).loc[start:stop].max())


def recovery_time(
    series: MetricsSeries,
    shift_tick: int,
    threshold: float,
    hold: int = RECOVERY_HOLD,
) -> Optional[int]:
    """Ticks after `shift_tick` until the error settles below `threshold`.

    Returns the smallest ``d >= 0`` such that the cross-seed mean
    ``mse_unweighted`` is below `threshold` at every tick of
    ``shift_tick + d .. shift_tick + d + hold - 1``. A window running past the
    end of the series does not count.

    Returns
    -------
    Optional[int]
        ``None`` if the error never settles.
    """
    if shift_tick >= series.horizon:
        raise ValueError(
            f"Shift tick {shift_tick} is not before the horizon {series.horizon}"
        )
    values = series.column().loc[shift_tick:].to_numpy()
    if len(values) < hold:
        return None
    settled = sliding_window_view(values < threshold, hold).all(axis=1)
    hits = np.flatnonzero(settled)
    return int(hits[0]) if len(hits) else None


def write_csv(frame: pd.DataFrame, path) -> None:
    """Write a metrics frame as UTF-8 CSV with LF endings and 17 significant digits."""
    frame.to_csv(
        path,
        index=False,
        columns=COLUMNS,
        float_format="%.17g",
        lineterminator="\n",
        encoding="utf-8",
    )


def read_csv(path) -> pd.DataFrame:
    """Parse a metrics CSV written by :func:`write_csv` without loss."""
    frame = pd.read_csv(path, float_precision="round_trip")
    missing = [name for name in COLUMNS if name not in frame.columns]
    if missing:
        raise ValueError(f"{path}: not a metrics file, missing columns {missing}")
    return frame[COLUMNS]


def series_from_frame(frame: pd.DataFrame) -> MetricsSeries:
    """Wrap an already averaged frame, such as a parsed ``mean.csv``."""
    return MetricsSeries(per_seed={}, mean=frame.reset_index(drop=True))
