"""The discrete Pareto (zeta / Zipf) law on the positive integers.

``P(X = k) = k**-nu / zeta(nu)`` for ``k = 1, 2, ...`` and ``nu > 1``.
Everything here works on a :class:`FrequencyTable`, the distinct-value /
multiplicity form of a sample, so that sums over observations cost
``O(d)`` for ``d`` distinct values instead of ``O(n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .exceptions import ConvergenceError, DomainError
from .special import polylog, zeta, zeta_and_prime, zeta_tail

__all__ = [
    "NU_MIN",
    "NU_MAX",
    "MAX_DRAW",
    "DParetoParams",
    "FrequencyTable",
    "ShapeFit",
    "pmf",
    "cdf",
    "pgf",
    "stein_residual",
    "sample",
    "mle",
    "score",
    "expand",
    "compress",
    "as_table",
]

#: Working range for the exponent. At nu = 50, P(X = 1) > 1 - 1e-15.
NU_MIN = 1.0 + 1e-6
NU_MAX = 50.0

#: Largest value the sampler emits; larger proposals are rejected.
MAX_DRAW = 2**62


@dataclass(frozen=True)
class DParetoParams:
    """Shape exponent of a DPareto law, restricted to ``1 < nu <= 50``."""

    nu: float

    def __post_init__(self):
        nu = float(self.nu)
        if not (1.0 < nu <= NU_MAX):
            raise DomainError(f"nu must lie in (1, {NU_MAX:g}], got {self.nu!r}")
        object.__setattr__(self, "nu", nu)


def _nu(params):
    if isinstance(params, DParetoParams):
        return params.nu
    return DParetoParams(params).nu


@dataclass(frozen=True, eq=False)
class FrequencyTable:
    """Distinct positive integer values with their multiplicities.

    ``values`` is strictly increasing; ``counts`` holds the matching
    multiplicities. Both are stored as read-only ``int64`` arrays.
    """

    values: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.int64).reshape(-1)
        counts = np.array(self.counts, dtype=np.int64).reshape(-1)
        if values.shape != counts.shape:
            raise DomainError("values and counts must have the same length")
        if values.size == 0:
            raise DomainError("a frequency table needs at least one entry")
        if np.any(values < 1):
            raise DomainError("all values must be positive integers")
        if np.any(counts < 1):
            raise DomainError("all multiplicities must be at least 1")
        if np.any(np.diff(values) <= 0):
            order = np.argsort(values, kind="stable")
            values, counts = values[order], counts[order]
            if np.any(np.diff(values) == 0):
                raise DomainError("values in a frequency table must be distinct")
        values.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_mapping(cls, mapping):
        """Build from a ``{value: count}`` mapping."""
        items = sorted((int(k), int(v)) for k, v in mapping.items())
        return cls([k for k, _ in items], [v for _, v in items])

    @classmethod
    def from_sample(cls, sample):
        return compress(sample)

    @property
    def n(self):
        """Total number of observations."""
        return int(self.counts.sum())

    @property
    def max(self):
        return int(self.values[-1])

    def mean_log(self):
        return float(np.dot(self.counts, np.log(self.values))) / self.n

    def as_dict(self):
        return {int(k): int(c) for k, c in zip(self.values, self.counts)}

    def __eq__(self, other):
        if not isinstance(other, FrequencyTable):
            return NotImplemented
        return (np.array_equal(self.values, other.values)
                and np.array_equal(self.counts, other.counts))

    def __hash__(self):
        return hash((self.values.tobytes(), self.counts.tobytes()))

    def __repr__(self):
        return f"FrequencyTable({self.as_dict()!r})"


def compress(sample):
    """Collapse a sample of positive integers into a :class:`FrequencyTable`."""
    x = np.asarray(sample)
    if x.size == 0:
        raise DomainError("cannot compress an empty sample")
    if x.dtype.kind == "f":
        if not np.all(np.isfinite(x)) or np.any(x != np.floor(x)):
            raise DomainError("sample values must be integers")
    elif x.dtype.kind not in "iu":
        raise DomainError(f"sample values must be integers, got dtype {x.dtype}")
    values, counts = np.unique(x.astype(np.int64).reshape(-1), return_counts=True)
    return FrequencyTable(values, counts)


def expand(table):
    """Inverse of :func:`compress`; values come out sorted."""
    return np.repeat(table.values, table.counts)


def as_table(data):
    """Accept a table, a ``{value: count}`` mapping or a raw sample."""
    if isinstance(data, FrequencyTable):
        return data
    if isinstance(data, dict):
        return FrequencyTable.from_mapping(data)
    return compress(data)


def pmf(params, k):
    """Probability mass ``k**-nu / zeta(nu)``; ``k`` may be an array."""
    nu = _nu(params)
    k = np.asarray(k)
    if np.any(k < 1):
        raise DomainError("pmf is supported on k >= 1")
    # libm pow is within an ulp; exp(-nu * log k) loses |nu log k| ulps
    out = np.power(k.astype(float), -nu) / zeta(nu)
    return float(out) if out.ndim == 0 else out


def _cdf_scalar(nu, k, z):
    if k <= 64:
        return sum(j ** -nu for j in range(k, 0, -1)) / z
    return 1.0 - zeta_tail(nu, k + 1) / z


def cdf(params, k):
    """``P(X <= k)``; ``k`` may be an array of positive integers."""
    nu = _nu(params)
    k = np.asarray(k)
    if np.any(k < 1):
        raise DomainError("cdf is supported on k >= 1")
    z = zeta(nu)
    if k.ndim == 0:
        return _cdf_scalar(nu, int(k), z)
    out = np.empty(k.shape, dtype=float)
    flat = k.reshape(-1)
    cache = {}
    for i, kk in enumerate(flat):
        kk = int(kk)
        if kk not in cache:
            cache[kk] = _cdf_scalar(nu, kk, z)
        out.reshape(-1)[i] = cache[kk]
    return out


def pgf(params, s):
    """Probability generating function ``E[s**X] = Li_nu(s) / zeta(nu)``."""
    nu = _nu(params)
    return polylog(nu, s) / zeta(nu)


def stein_residual(params, x, s):
    """Stein residual ``s**(x-1) - 1 + (x/(x+1))**nu * (1 - s**x)``.

    Its expectation vanishes for every ``s`` in (0, 1) exactly when ``X``
    is DPareto(nu). Broadcasts over array ``x`` and ``s``.
    """
    nu = _nu(params)
    x = np.asarray(x)
    s = np.asarray(s, dtype=float)
    if np.any(x < 1):
        raise DomainError("x must be a positive integer")
    if np.any(s <= 0) or np.any(s >= 1):
        raise DomainError("s must lie in the open interval (0, 1)")
    xf = x.astype(float)
    ratio = np.exp(nu * np.log(xf / (xf + 1.0)))
    out = s ** (xf - 1.0) - 1.0 + ratio * (1.0 - s**xf)
    return float(out) if out.ndim == 0 else out


def sample(params, n, rng):
    """Draw ``n`` exact DPareto(nu) variates.

    Rejection from the continuous Pareto envelope (Devroye, 1986, X.6).
    Proposals above :data:`MAX_DRAW` are rejected, which conditions on
    ``X <= 2**62``. The discarded mass is roughly ``2**(-62 (nu - 1))``:
    negligible for ``nu >= 1.5`` (below 1e-9) but most of the law when
    ``nu`` is within about 1e-3 of 1, where the sampler raises
    :class:`ConvergenceError` instead of looping.

    ``rng`` is a :class:`numpy.random.Generator` (or anything accepted by
    :func:`numpy.random.default_rng`).
    """
    nu = _nu(params)
    n = int(n)
    if n < 1:
        raise DomainError(f"sample size must be positive, got {n}")
    rng = np.random.default_rng(rng)
    am1 = nu - 1.0
    b = 2.0**am1
    out = np.empty(n, dtype=np.int64)
    filled = 0
    rounds = 0
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        while filled < n:
            rounds += 1
            if rounds > 10_000:
                raise ConvergenceError(
                    f"rejection sampler stalled at nu={nu}: too much DPareto mass "
                    f"lies above {MAX_DRAW} to draw int64 values"
                )
            m = (n - filled) + (n - filled) // 2 + 8
            u = 1.0 - rng.random(m)
            v = rng.random(m)
            x = np.floor(u ** (-1.0 / am1))
            t = (1.0 + 1.0 / x) ** am1
            keep = (x <= MAX_DRAW) & (v * x * (t - 1.0) / (b - 1.0) <= t / b)
            got = x[keep][: n - filled].astype(np.int64)
            out[filled:filled + got.size] = got
            filled += got.size
    return out


@dataclass(frozen=True)
class ShapeFit:
    """Result of :func:`mle`.

    ``degenerate`` is set when the score equation has no root inside the
    working range (an all-ones sample); ``nu_hat`` is then clamped to 50.
    """

    nu_hat: float
    score_residual: float
    bracket: tuple
    degenerate: bool

    def as_dict(self):
        return {
            "nu_hat": self.nu_hat,
            "score_residual": self.score_residual,
            "bracket": list(self.bracket),
            "degenerate": self.degenerate,
        }


def score(nu, mean_log):
    """Score of the log-likelihood per observation: ``zeta'/zeta + mean log x``."""
    z, zp = zeta_and_prime(nu)
    return zp / z + mean_log


def _expand_bracket(f, guess):
    """Grow a bracket around ``guess`` geometrically in ``nu - 1``."""
    guess = min(max(guess, NU_MIN), NU_MAX)
    fg = f(guess)
    if fg == 0.0:
        return guess, guess, fg, fg
    lo = hi = guess
    flo = fhi = fg
    # score is increasing in nu: positive means the root lies below
    while fg > 0 and flo > 0:
        hi, fhi = lo, flo
        if lo == NU_MIN:
            break
        lo = max(1.0 + (lo - 1.0) / 4.0, NU_MIN)
        flo = f(lo)
    while fg < 0 and fhi < 0:
        lo, flo = hi, fhi
        if hi == NU_MAX:
            break
        hi = min(1.0 + (hi - 1.0) * 4.0, NU_MAX)
        fhi = f(hi)
    return lo, hi, flo, fhi


def mle(data):
    """Maximum-likelihood estimate of the exponent.

    Solves ``zeta'(nu)/zeta(nu) + mean(log x) = 0`` on ``(1 + 1e-6, 50]``.
    ``zeta'/zeta`` is increasing in ``nu``, so the root is unique when it
    exists; an all-ones sample has none and is clamped to ``nu = 50``.
    """
    table = as_table(data)
    mlog = table.mean_log()

    def f(nu):
        return score(nu, mlog)

    f_max = f(NU_MAX)
    if f_max <= 0.0:
        return ShapeFit(NU_MAX, f_max, (NU_MIN, NU_MAX), f_max < 0.0)
    # ln-likelihood of the continuous analogue gives a close starting value
    guess = 1.0 + 1.0 / mlog if mlog > 0 else NU_MAX
    lo, hi, flo, fhi = _expand_bracket(f, guess)
    if flo > 0.0:
        raise ConvergenceError(
            f"score is positive at nu={NU_MIN}; mean log {mlog:.6g} is out of range"
        )
    if flo == 0.0:
        return ShapeFit(lo, 0.0, (min(lo, NU_MIN), hi), False)
    if fhi == 0.0 or lo == hi:
        return ShapeFit(hi, fhi, (lo, hi) if lo < hi else (NU_MIN, hi), False)
    root = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    return ShapeFit(float(root), f(root), (lo, hi), False)
