"""Parametric bootstrap for DPareto goodness-of-fit tests.

Each replicate draws a sample of the observed size from DPareto(nu_hat),
refits the exponent and recomputes the statistic at the refitted value.
Replicate ``i`` always uses the random stream derived from
``(master_seed, i)``, so results do not depend on how replicates are spread
over worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distribution import ShapeFit, as_table, compress, mle, sample
from .exceptions import DomainError, ReplicateError
from .statistics import StatisticId, StatValue, evaluate

__all__ = [
    "BootstrapConfig",
    "GofReport",
    "critical_value",
    "p_value",
    "replicate_rng",
    "null_distribution",
    "bootstrap_test",
    "bootstrap_many",
]


@dataclass(frozen=True)
class BootstrapConfig:
    """Bootstrap size ``b``, nominal level ``alpha``, seed and worker budget."""

    b: int = 500
    alpha: float = 0.05
    master_seed: int = 0
    worker_count: int = 1

    def __post_init__(self):
        if int(self.b) < 1:
            raise DomainError(f"b must be at least 1, got {self.b}")
        if not 0.0 < float(self.alpha) < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.master_seed) < 0:
            raise DomainError("master_seed must be a non-negative integer")
        if int(self.worker_count) < 1:
            raise DomainError("worker_count must be at least 1")


@dataclass(frozen=True)
class GofReport:
    """Outcome of one bootstrap goodness-of-fit test."""

    statistic: StatValue
    fit: ShapeFit
    critical_value: float
    p_value: float
    replicates: int
    degenerate_replicate_count: int
    alpha: float
    master_seed: int
    replicate_stats: tuple = field(default=(), repr=False)

    @property
    def reject(self):
        return self.statistic.value > self.critical_value

    @property
    def decision(self):
        return "reject" if self.reject else "retain"

    def as_dict(self):
        return {
            "statistic": self.statistic.id.label,
            "value": self.statistic.value,
            "nu_used": self.statistic.nu_used,
            "fit": self.fit.as_dict(),
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "decision": self.decision,
            "replicates": self.replicates,
            "degenerate_replicate_count": self.degenerate_replicate_count,
            "master_seed": self.master_seed,
        }


def critical_value(replicate_stats, alpha):
    """Empirical ``(1 - alpha)`` quantile of the bootstrap statistics.

    The ``b(1-alpha)``-th order statistic when ``b(1-alpha)`` is an integer,
    otherwise the ``(floor(b(1-alpha)) + 1)``-th.
    """
    stats = np.sort(np.asarray(replicate_stats, dtype=float).reshape(-1))
    b = stats.size
    if b == 0:
        raise DomainError("need at least one replicate statistic")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    q = b * (1.0 - alpha)
    nearest = round(q)
    if abs(q - nearest) <= 1e-9 * max(1.0, q):
        rank = int(nearest)
    else:
        rank = math.floor(q) + 1
    rank = min(max(rank, 1), b)
    return float(stats[rank - 1])


def p_value(replicate_stats, observed):
    """Fraction of bootstrap statistics at least as large as ``observed``."""
    stats = np.asarray(replicate_stats, dtype=float)
    return float(np.mean(stats >= observed))


def replicate_rng(master_seed, *key):
    """Random stream for the replicate identified by ``key`` under ``master_seed``."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def _run_block(nu_hat, n, ids, master_seed, start, stop):
    out = np.empty((stop - start, len(ids)))
    degenerate = np.zeros(stop - start, dtype=bool)
    for row, index in enumerate(range(start, stop)):
        try:
            table = compress(sample(nu_hat, n, replicate_rng(master_seed, index)))
            fit = mle(table)
            degenerate[row] = fit.degenerate
            for col, stat_id in enumerate(ids):
                out[row, col] = evaluate(stat_id, table, fit.nu_hat).value
        except ReplicateError:
            raise
        except Exception as exc:  # noqa: BLE001 - re-raised with the index attached
            raise ReplicateError(index, exc) from exc
    return out, degenerate


def null_distribution(nu_hat, n, ids, b, master_seed, worker_count=1):
    """Bootstrap statistics under DPareto(nu_hat), one column per statistic.

    Returns ``(stats, degenerate)`` with ``stats.shape == (b, len(ids))`` and a
    boolean vector flagging replicates whose refit was clamped.
    """
    ids = [StatisticId.parse(i) if isinstance(i, str) else i for i in ids]
    if worker_count <= 1 or b < 2:
        return _run_block(nu_hat, n, ids, master_seed, 0, b)
    n_blocks = min(b, 4 * worker_count)
    edges = np.linspace(0, b, n_blocks + 1).astype(int)
    stats = np.empty((b, len(ids)))
    degenerate = np.empty(b, dtype=bool)
    with ProcessPoolExecutor(max_workers=worker_count) as pool:
        futures = [
            (lo, hi, pool.submit(_run_block, nu_hat, n, ids, master_seed, lo, hi))
            for lo, hi in zip(edges[:-1], edges[1:])
            if hi > lo
        ]
        for lo, hi, fut in futures:
            stats[lo:hi], degenerate[lo:hi] = fut.result()
    return stats, degenerate


def bootstrap_many(data, ids, cfg=BootstrapConfig()):
    """Run several tests on the same data with one shared set of bootstrap samples.

    Returns one :class:`GofReport` per entry of ``ids``; each report is
    identical to what :func:`bootstrap_test` gives for that statistic alone.
    """
    table = as_table(data)
    ids = [StatisticId.parse(i) if isinstance(i, str) else i for i in ids]
    fit = mle(table)
    observed = [evaluate(i, table, fit.nu_hat) for i in ids]
    stats, degenerate = null_distribution(
        fit.nu_hat, table.n, ids, int(cfg.b), cfg.master_seed, cfg.worker_count
    )
    n_degenerate = int(degenerate.sum())
    reports = []
    for col, obs in enumerate(observed):
        column = stats[:, col]
        reports.append(
            GofReport(
                statistic=obs,
                fit=fit,
                critical_value=critical_value(column, cfg.alpha),
                p_value=p_value(column, obs.value),
                replicates=int(cfg.b),
                degenerate_replicate_count=n_degenerate,
                alpha=float(cfg.alpha),
                master_seed=int(cfg.master_seed),
                replicate_stats=tuple(column.tolist()),
            )
        )
    return reports


def bootstrap_test(data, stat_id="K", cfg=BootstrapConfig()):
    """Parametric bootstrap test of the DPareto hypothesis.

    Parameters
    ----------
    data : FrequencyTable, mapping or array-like of positive integers
    stat_id : StatisticId or str
        Statistic to use, e.g. ``"K"``, ``"Z:1"``, ``"T:0"``.
    cfg : BootstrapConfig

    Returns
    -------
    GofReport
    """
    return bootstrap_many(data, [stat_id], cfg)[0]
