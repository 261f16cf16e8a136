"""Monte Carlo size and power studies.

Alternatives perturb a DPareto variable ``X1`` with an independent discrete
uniform ``X2`` on ``{0, ..., k}``, either through ``X1 + X2`` or
``max(X1, X2)``. Every study cell (one alternative) shares its outer samples
across all tests, so test comparisons within a row are paired.

All randomness is keyed by ``(master_seed, cell, replicate)``: the outer
sample uses stream ``(cell, replicate, 0)`` and the bootstrap nested inside
it is seeded from stream ``(cell, replicate, 1)``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bootstrap import BootstrapConfig, critical_value, null_distribution, replicate_rng
from .distribution import DParetoParams, compress, mle, sample
from .exceptions import DomainError, ParseError
from .statistics import StatisticId, evaluate

__all__ = [
    "AlternativeSpec",
    "PowerStudyConfig",
    "PowerTable",
    "draw_alternative",
    "run_power_study",
    "load_study_config",
    "CONFIG_SCHEMA_VERSION",
]

log = logging.getLogger(__name__)

CONFIG_SCHEMA_VERSION = 1

_ALT_KINDS = ("NULL", "SUM_DU", "MAX_DU")


@dataclass(frozen=True)
class AlternativeSpec:
    """``NULL`` (plain DPareto), ``SUM_DU`` (X1 + X2) or ``MAX_DU`` (max(X1, X2))."""

    kind: str
    nu: float
    k: int = 0

    def __post_init__(self):
        kind = self.kind.upper()
        if kind == "NULL_DPARETO":
            kind = "NULL"
        if kind not in _ALT_KINDS:
            raise DomainError(f"unknown alternative kind {self.kind!r}")
        DParetoParams(self.nu)
        k = int(self.k)
        if k < 0:
            raise DomainError("the discrete uniform bound k must be >= 0")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "nu", float(self.nu))
        object.__setattr__(self, "k", 0 if kind == "NULL" else k)

    @property
    def label(self):
        if self.kind == "NULL":
            return f"X1({self.nu:g})"
        if self.kind == "SUM_DU":
            return f"X1({self.nu:g})+DU({self.k})"
        return f"max(X1({self.nu:g}),DU({self.k}))"

    def as_dict(self):
        d = {"kind": self.kind, "nu": self.nu}
        if self.kind != "NULL":
            d["k"] = self.k
        return d


def draw_alternative(spec, n, rng):
    """Draw ``n`` values from the alternative; ``X1`` is drawn before ``X2``."""
    n = int(n)
    x1 = sample(spec.nu, n, rng)
    if spec.kind == "NULL":
        return x1
    x2 = rng.integers(0, spec.k + 1, size=n)
    if spec.kind == "SUM_DU":
        return x1 + x2
    return np.maximum(x1, x2)


@dataclass(frozen=True)
class PowerStudyConfig:
    """Grid of alternatives times tests at one sample size.

    ``boot.master_seed`` seeds the whole study and ``boot.worker_count`` is
    the process budget shared by all cells.
    """

    n: int
    mc: int = 1000
    boot: BootstrapConfig = BootstrapConfig()
    tests: tuple = (StatisticId("K"),)
    alternatives: tuple = ()

    def __post_init__(self):
        if int(self.mc) < 1:
            raise DomainError("mc must be at least 1")
        if int(self.n) < 2:
            raise DomainError("n must be at least 2")
        tests = tuple(StatisticId.parse(t) if isinstance(t, str) else t for t in self.tests)
        alts = tuple(
            a if isinstance(a, AlternativeSpec) else AlternativeSpec(**a)
            for a in self.alternatives
        )
        if not tests or not alts:
            raise DomainError("a power study needs at least one test and one alternative")
        object.__setattr__(self, "tests", tests)
        object.__setattr__(self, "alternatives", alts)


@dataclass
class PowerTable:
    """Rejection rates indexed by (alternative label, test label).

    ``indicators[a, t, r]`` is 1 if replicate ``r`` of alternative ``a``
    rejected with test ``t``, 0 if it retained and -1 if it failed.
    """

    alternatives: tuple
    tests: tuple
    indicators: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def rows(self):
        out = {}
        for ai, alt in enumerate(self.alternatives):
            for ti, test in enumerate(self.tests):
                out[(alt.label, test.label)] = self._rate(ai, ti)
        return out

    def _rate(self, ai, ti):
        ind = self.indicators[ai, ti]
        ok = ind >= 0
        return float(ind[ok].mean()) if ok.any() else float("nan")

    def rate(self, alternative, test):
        """Rejection rate for an alternative (spec or label) and test (id or label)."""
        alabel = alternative.label if isinstance(alternative, AlternativeSpec) else alternative
        tlabel = test.label if isinstance(test, StatisticId) else StatisticId.parse(test).label
        return self.rows[(alabel, tlabel)]

    def to_csv(self, stream=None):
        """Rates in percent with one decimal, one row per alternative."""
        buf = stream if stream is not None else io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["distribution"] + [t.label for t in self.tests])
        for ai, alt in enumerate(self.alternatives):
            writer.writerow(
                [alt.label] + [f"{100 * self._rate(ai, ti):.1f}" for ti in range(len(self.tests))]
            )
        return buf.getvalue() if stream is None else None

    def as_dict(self):
        return {
            "schema_version": CONFIG_SCHEMA_VERSION,
            "metadata": self.metadata,
            "tests": [t.label for t in self.tests],
            "rows": [
                {
                    "alternative": alt.as_dict(),
                    "label": alt.label,
                    "rates": {t.label: self._rate(ai, ti) for ti, t in enumerate(self.tests)},
                    "failures": int((self.indicators[ai, 0] < 0).sum()),
                }
                for ai, alt in enumerate(self.alternatives)
            ],
        }

    def to_json(self, **kwargs):
        return json.dumps(self.as_dict(), **kwargs)


def _bootstrap_seed(master_seed, cell, rep):
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(cell, rep, 1))
    return int(seq.generate_state(1, np.uint64)[0])


def _one_replicate(spec, cell, rep, n, tests, b, alpha, master_seed):
    """Rejection indicators of every test for one outer replicate."""
    x = draw_alternative(spec, n, replicate_rng(master_seed, cell, rep, 0))
    table = compress(x)
    fit = mle(table)
    observed = np.array([evaluate(t, table, fit.nu_hat).value for t in tests])
    stats, degenerate = null_distribution(
        fit.nu_hat, n, tests, b, _bootstrap_seed(master_seed, cell, rep)
    )
    crit = np.array([critical_value(stats[:, j], alpha) for j in range(len(tests))])
    return (observed > crit).astype(np.int8), fit.degenerate, int(degenerate.sum())


def _run_tasks(cfg, tasks):
    results = []
    for cell, rep in tasks:
        try:
            out = _one_replicate(
                cfg.alternatives[cell], cell, rep, cfg.n, cfg.tests,
                int(cfg.boot.b), float(cfg.boot.alpha), cfg.boot.master_seed,
            )
            results.append((cell, rep, out, None))
        except Exception as exc:  # noqa: BLE001 - recorded per cell, never aborts the study
            results.append((cell, rep, None, f"{type(exc).__name__}: {exc}"))
    return results


def run_power_study(cfg, progress=None):
    """Estimate rejection rates for every (alternative, test) pair.

    ``progress``, if given, is called as ``progress(done, total)`` after each
    finished block of replicates. Failed replicates are recorded in the
    metadata and left out of the rates; they never abort other cells.
    """
    n_alt, n_test, mc = len(cfg.alternatives), len(cfg.tests), int(cfg.mc)
    indicators = np.full((n_alt, n_test, mc), -1, dtype=np.int8)
    degenerate_fits = np.zeros(n_alt, dtype=int)
    degenerate_boot = np.zeros(n_alt, dtype=int)
    failures = {}
    tasks = [(c, r) for c in range(n_alt) for r in range(mc)]
    workers = int(cfg.boot.worker_count)
    block = max(1, min(25, len(tasks) // (4 * workers) or 1))
    blocks = [tasks[i:i + block] for i in range(0, len(tasks), block)]
    started = time.perf_counter()
    done = 0

    def absorb(results):
        nonlocal done
        for cell, rep, out, err in results:
            if err is not None:
                failures.setdefault(cfg.alternatives[cell].label, []).append(
                    {"replicate": rep, "error": err}
                )
                continue
            ind, deg_fit, deg_boot = out
            indicators[cell, :, rep] = ind
            degenerate_fits[cell] += int(deg_fit)
            degenerate_boot[cell] += deg_boot
        done += len(results)
        if progress is not None:
            progress(done, len(tasks))

    if workers <= 1:
        for blk in blocks:
            absorb(_run_tasks(cfg, blk))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for fut in [pool.submit(_run_tasks, cfg, blk) for blk in blocks]:
                absorb(fut.result())

    for label, errs in failures.items():
        log.warning("%d replicate(s) failed for %s; first: %s", len(errs), label, errs[0]["error"])
    metadata = {
        "tool_version": __version__,
        "mc": mc,
        "n": int(cfg.n),
        "b": int(cfg.boot.b),
        "alpha": float(cfg.boot.alpha),
        "master_seed": int(cfg.boot.master_seed),
        "worker_count": workers,
        "elapsed_seconds": round(time.perf_counter() - started, 3),
        "degenerate_fits": {
            alt.label: int(degenerate_fits[i]) for i, alt in enumerate(cfg.alternatives)
        },
        "degenerate_bootstrap_replicates": {
            alt.label: int(degenerate_boot[i]) for i, alt in enumerate(cfg.alternatives)
        },
        "failures": failures,
    }
    return PowerTable(cfg.alternatives, cfg.tests, indicators, metadata)


def load_study_config(source, *, workers=None, seed=None):
    """Read a power-study description (JSON text, dict or path).

    Schema, version 1::

        {
          "schema_version": 1,
          "n": 20,
          "mc": 1000,
          "bootstrap": {"b": 500, "alpha": 0.05},
          "master_seed": 12345,
          "workers": 1,
          "tests": ["K", "Z:0.5", "T:0", "CN", "SBEN"],
          "alternatives": [
            {"kind": "NULL", "nu": 2},
            {"kind": "SUM_DU", "nu": 2, "k": 2},
            {"kind": "MAX_DU", "nu": 3, "k": 5}
          ]
        }

    ``workers`` and ``seed`` override the file when given.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            with open(text, encoding="utf-8") as fh:
                text = fh.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid study config: {exc.msg}", exc.lineno) from exc
    version = doc.get("schema_version", CONFIG_SCHEMA_VERSION)
    if version != CONFIG_SCHEMA_VERSION:
        raise ParseError(f"unsupported study config schema_version {version!r}")
    missing = [key for key in ("n", "tests", "alternatives") if key not in doc]
    if missing:
        raise ParseError(f"study config is missing {', '.join(missing)}")
    boot = doc.get("bootstrap", {})
    try:
        return PowerStudyConfig(
            n=int(doc["n"]),
            mc=int(doc.get("mc", 1000)),
            boot=BootstrapConfig(
                b=int(boot.get("b", 500)),
                alpha=float(boot.get("alpha", 0.05)),
                master_seed=int(seed if seed is not None else doc.get("master_seed", 0)),
                worker_count=int(workers if workers is not None else doc.get("workers", 1)),
            ),
            tests=tuple(doc["tests"]),
            alternatives=tuple(doc["alternatives"]),
        )
    except TypeError as exc:
        raise ParseError(f"malformed study config: {exc}") from exc
