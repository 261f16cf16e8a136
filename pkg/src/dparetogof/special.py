"""Special functions with controlled absolute error.

The Riemann zeta function and its derivative are evaluated by direct
summation followed by an Euler-Maclaurin tail, the polylogarithm by its
power series with a geometric tail bound, and semi-infinite integrals by
truncation plus adaptive Gauss-Kronrod panels.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special as _sp

from .exceptions import ConvergenceError, DomainError

__all__ = [
    "EvalControl",
    "DEFAULT_CONTROL",
    "zeta",
    "zeta_prime",
    "zeta_and_prime",
    "zeta_tail",
    "polylog",
    "beta_fn",
    "log_beta",
    "quad_semi_infinite",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EvalControl:
    """Accuracy budget for a numerical evaluation.

    Parameters
    ----------
    abs_tol : float
        Target absolute error. Values whose magnitude makes ``abs_tol``
        unreachable in double precision are evaluated to a few ulps
        instead.
    max_terms : int
        Largest number of series terms (or quadrature panels) allowed
        before :class:`ConvergenceError` is raised.
    """

    abs_tol: float = 1e-12
    max_terms: int = 10**7

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol!r}")
        if self.max_terms < 100:
            raise DomainError(f"max_terms must be at least 100, got {self.max_terms!r}")


DEFAULT_CONTROL = EvalControl()

# B_{2j} / (2j)!  for j = 1..12
_BERNOULLI = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
    Fraction(43867, 798), Fraction(-174611, 330), Fraction(854513, 138),
    Fraction(-236364091, 2730),
]
_EM_COEFFS = [float(b / math.factorial(2 * (j + 1))) for j, b in enumerate(_BERNOULLI)]


def _check_nu(nu):
    nu = float(nu)
    if not (nu > 1.0) or not math.isfinite(nu):
        raise DomainError(f"zeta-type series need a finite exponent > 1, got {nu!r}")
    return nu


def _em_tail(nu, cut, log_power, tol=0.0):
    """Euler-Maclaurin estimate of sum_{k >= cut} k**-nu * log(k)**log_power.

    Returns ``(value, error_estimate)``.
    """
    lc = math.log(cut)
    base = cut ** (-nu)
    nm1 = nu - 1.0
    if log_power == 0:
        value = cut * base / nm1 + 0.5 * base
        a, b = 0.0, 1.0
    else:
        value = cut * base * (lc / nm1 + 1.0 / (nm1 * nm1)) + 0.5 * base * lc
        a, b = 1.0, 0.0
    # f^(m)(x) = x^(-nu-m) * (a_m log x + b_m)
    m = 0
    prev = math.inf
    err = math.inf
    xpow = base
    for coeff in _EM_COEFFS:
        # advance to the next odd derivative
        while True:
            a, b = -(nu + m) * a, -(nu + m) * b + a
            m += 1
            xpow /= cut
            if m % 2 == 1:
                break
        term = -coeff * xpow * (a * lc + b)
        if abs(term) > abs(prev):
            # asymptotic series started to diverge; the previous term bounds the error
            err = abs(prev)
            break
        value += term
        prev = term
        err = abs(term)
        if err <= tol or err < _EPS * abs(value):
            break
    return value, err


def _head_sum(nu, start, stop, log_power):
    """Direct sum over start <= k < stop."""
    if stop <= start:
        return 0.0
    if stop - start <= 64:
        total = 0.0
        for k in range(stop - 1, start - 1, -1):
            lk = math.log(k)
            total += math.exp(-nu * lk) * (lk if log_power else 1.0)
        return total
    k = np.arange(start, stop, dtype=float)
    lk = np.log(k)
    terms = np.exp(-nu * lk)
    if log_power:
        terms *= lk
    # small terms first keeps the rounding error at a few ulps
    return float(np.sum(terms[::-1]))


def _series(nu, start, log_power, ctl):
    cut = max(int(start), 8)
    while True:
        head = _head_sum(nu, start, cut, log_power)
        tail, err = _em_tail(nu, cut, log_power, 1e-3 * ctl.abs_tol)
        total = head + tail
        allowed = max(ctl.abs_tol, 8 * _EPS * abs(total))
        if err <= allowed:
            return total
        cut *= 2
        if cut - start > ctl.max_terms:
            raise ConvergenceError(
                f"Euler-Maclaurin tail for nu={nu} did not reach {ctl.abs_tol:g} "
                f"within {ctl.max_terms} terms (last error estimate {err:.3g})"
            )


def zeta(nu, ctl=DEFAULT_CONTROL):
    """Riemann zeta function for real ``nu > 1``.

    >>> round(zeta(2.0), 10)
    1.6449340668
    """
    nu = _check_nu(nu)
    return _series(nu, 1, 0, ctl)


def zeta_prime(nu, ctl=DEFAULT_CONTROL):
    """Derivative of the zeta function, ``-sum log(k) k**-nu``; always negative."""
    nu = _check_nu(nu)
    # the k = 1 term vanishes
    return -_series(nu, 2, 1, ctl)


def zeta_and_prime(nu, ctl=DEFAULT_CONTROL):
    """Return ``(zeta(nu), zeta_prime(nu))`` in one call."""
    nu = _check_nu(nu)
    return _series(nu, 1, 0, ctl), -_series(nu, 2, 1, ctl)


def zeta_tail(nu, start, ctl=DEFAULT_CONTROL):
    """Hurwitz-type tail ``sum_{k >= start} k**-nu`` for integer ``start >= 1``."""
    nu = _check_nu(nu)
    start = int(start)
    if start < 1:
        raise DomainError(f"start must be a positive integer, got {start}")
    return _series(nu, start, 0, ctl)


def polylog(nu, s, ctl=DEFAULT_CONTROL):
    """Polylogarithm ``Li_nu(s) = sum_k s**k / k**nu`` for ``0 <= s < 1``.

    Plain power series; the remainder after ``N`` terms is bounded by
    ``(N + 1)**-nu * s**(N + 1) / (1 - s)``.
    """
    nu = _check_nu(nu)
    s = float(s)
    if not 0.0 <= s < 1.0:
        raise DomainError(f"polylog needs 0 <= s < 1, got {s!r}")
    if s == 0.0:
        return 0.0
    log_s = math.log(s)
    total = 0.0
    done = 0
    chunk = 4096
    while True:
        k = np.arange(done + 1, done + chunk + 1, dtype=float)
        terms = np.exp(k * log_s - nu * np.log(k))
        total += float(np.sum(terms[::-1]))
        done += chunk
        bound = math.exp((done + 1) * log_s - nu * math.log(done + 1)) / (1.0 - s)
        if bound <= max(ctl.abs_tol, 4 * _EPS * total):
            return total
        if done >= ctl.max_terms:
            raise ConvergenceError(
                f"polylog({nu}, {s}) tail bound {bound:.3g} still above "
                f"{ctl.abs_tol:g} after {done} terms"
            )
        chunk = min(2 * chunk, 1 << 20)


def log_beta(a, b):
    """Logarithm of the Beta function; vectorised over numpy arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise DomainError("Beta function arguments must be positive")
    out = _sp.betaln(a, b)
    return float(out) if out.ndim == 0 else out


def beta_fn(a, b):
    """Beta function ``Gamma(a) Gamma(b) / Gamma(a + b)`` computed in log space."""
    return math.exp(log_beta(a, b))


# Gauss-Kronrod 7/15 rule on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[7] = _WG[3]
_GW[[9, 11, 13]] = _WG[2::-1]


def _gk15(f, lo, hi, vectorized):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid + half * _NODES
    y = np.asarray(f(x), dtype=float) if vectorized else np.array([f(t) for t in x])
    kron = half * float(_KW @ y)
    gauss = half * float(_GW @ y)
    return kron, abs(kron - gauss)


def _adaptive(f, lo, hi, tol, max_panels, vectorized):
    val, err = _gk15(f, lo, hi, vectorized)
    heap = [(-err, lo, hi, val)]
    total, total_err = val, err
    panels = 1
    while total_err > max(tol, 64 * _EPS * abs(total)):
        if panels >= max_panels:
            raise ConvergenceError(
                f"adaptive quadrature on [{lo}, {hi}] stopped at {panels} panels "
                f"with error estimate {total_err:.3g} > {tol:.3g}"
            )
        neg_err, a, b, v = heapq.heappop(heap)
        m = 0.5 * (a + b)
        v1, e1 = _gk15(f, a, m, vectorized)
        v2, e2 = _gk15(f, m, b, vectorized)
        total += v1 + v2 - v
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, a, m, v1))
        heapq.heappush(heap, (-e2, m, b, v2))
        panels += 1
        if panels % 64 == 0:
            # re-add from scratch to stop drift in the running sums
            total = math.fsum(p[3] for p in heap)
            total_err = math.fsum(-p[0] for p in heap)
    return math.fsum(p[3] for p in heap)


def quad_semi_infinite(f, a_decay, ctl=DEFAULT_CONTROL, *, scale=None,
                       vectorized=False, max_panels=4000):
    """Integrate ``f`` over ``[0, inf)`` for an exponentially decaying integrand.

    The integrand must satisfy ``|f(t)| <= scale * exp(-a_decay * t)``; when
    ``scale`` is omitted ``|f(0)|`` is used, which is valid whenever
    ``|f(t)| * exp(a_decay * t)`` is non-increasing. The range is cut at the
    point where the envelope tail drops below half the tolerance and the
    remainder is integrated with adaptive Gauss-Kronrod panels.
    """
    a_decay = float(a_decay)
    if not a_decay > 0:
        raise DomainError(f"a_decay must be positive, got {a_decay!r}")
    if scale is None:
        f0 = f(np.array([0.0]))[0] if vectorized else f(0.0)
        scale = abs(float(f0))
    tol = ctl.abs_tol
    if scale == 0.0:
        upper = 1.0
    else:
        upper = max(math.log(2.0 * scale / (a_decay * tol)) / a_decay, 1.0)
    return _adaptive(f, 0.0, upper, 0.5 * tol, max_panels, vectorized)
