"""Goodness-of-fit statistics for the DPareto family.

All statistics take a :class:`~dparetogof.distribution.FrequencyTable`
(or anything :func:`~dparetogof.distribution.as_table` accepts) together
with a fitted exponent, and are evaluated as weighted sums over the
distinct observed values.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .distribution import NU_MAX, as_table, cdf
from .exceptions import DomainError
from .special import EvalControl, log_beta, quad_semi_infinite, zeta

__all__ = [
    "StatisticId",
    "StatValue",
    "kernel_h",
    "stat_k",
    "stat_k_pairwise",
    "stat_z",
    "stat_t",
    "stat_cn",
    "stat_sben",
    "evaluate",
    "mellin_i0",
    "mellin_integrals",
]

_KINDS = ("K", "Z", "T", "CN", "SBEN")

# Z needs I1 and I2 far below the displayed precision: the three terms are
# O(n) and cancel to about 1e-8 relative on real data, so an absolute error
# e in I2 becomes n * e in Z.
_Z_CONTROL = EvalControl(abs_tol=1e-15)


@dataclass(frozen=True)
class StatisticId:
    """Which statistic to compute and its tuning parameter.

    ========  ==========================================================
    kind      parameter
    ========  ==========================================================
    ``K``     power ``m`` of the weight ``s**m`` in the L2 norm (0 = the
              unweighted statistic, 2 = the pgf-identity form)
    ``Z``     ``a > 0``, decay of the weight ``exp(-a t)``
    ``T``     ``beta >= 0``
    ``CN``    none
    ``SBEN``  none
    ========  ==========================================================

    The string form used by :meth:`parse` and :attr:`label` is ``"K"``,
    ``"K:2"``, ``"Z:0.5"``, ``"T:0"``, ``"CN"`` or ``"SBEN"``.
    """

    kind: str
    param: float | None = None

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in _KINDS:
            raise DomainError(f"unknown statistic {self.kind!r}; expected one of {_KINDS}")
        param = self.param
        if kind == "K":
            param = 0.0 if param is None else float(param)
            if param < 0:
                raise DomainError("the weight power of K must be >= 0")
        elif kind == "Z":
            if param is None or not float(param) > 0:
                raise DomainError("Z needs a decay parameter a > 0")
            param = float(param)
        elif kind == "T":
            if param is None or not float(param) >= 0:
                raise DomainError("T needs beta >= 0")
            param = float(param)
        elif param is not None:
            raise DomainError(f"{kind} takes no parameter")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "param", param)

    @classmethod
    def parse(cls, text):
        m = re.fullmatch(r"\s*([A-Za-z]+)\s*(?:[:_=]\s*([-+0-9.eE]+))?\s*", text)
        if not m:
            raise DomainError(f"cannot parse statistic {text!r}")
        return cls(m.group(1), None if m.group(2) is None else float(m.group(2)))

    @property
    def label(self):
        if self.kind == "K":
            return "K" if self.param == 0 else f"K:{self.param:g}"
        if self.param is None:
            return self.kind
        return f"{self.kind}:{self.param:g}"

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class StatValue:
    id: StatisticId
    value: float
    nu_used: float

    def as_dict(self):
        return {"statistic": self.id.label, "value": self.value, "nu_used": self.nu_used}


def _check_nu_hat(nu):
    nu = float(nu)
    if not (1.0 < nu <= NU_MAX):
        raise DomainError(f"fitted exponent must lie in (1, {NU_MAX:g}], got {nu!r}")
    return nu


def _ratio_pow(x, nu):
    """(x / (x + 1))**nu for float arrays."""
    return np.exp(nu * np.log(x / (x + 1.0)))


def kernel_h(nu, x, y, weight=0):
    """Kernel ``h(x, y) = int_0^1 g(x, s) g(y, s) s**weight ds``.

    ``g`` is :func:`~dparetogof.distribution.stein_residual`. With
    ``weight=0`` the six-term closed form is used; other weights go through
    the monomial expansion ``g(x, s) = s**(x-1) + (r - 1) - r s**x``.
    Broadcasts over ``x`` and ``y``.
    """
    nu = _check_nu_hat(nu)
    x = np.asarray(x)
    y = np.asarray(y)
    if np.any(x < 1) or np.any(y < 1):
        raise DomainError("kernel arguments must be positive integers")
    x = x.astype(float)
    y = y.astype(float)
    if weight == 0:
        rx = _ratio_pow(x, nu + 1.0)
        ry = _ratio_pow(y, nu + 1.0)
        out = (
            1.0 / (x + y - 1.0)
            - (1.0 / x + 1.0 / y)
            + rx * ((x + 1.0) / (y * (y + x)) - 1.0)
            + ry * ((y + 1.0) / (x * (y + x)) - 1.0)
            + rx * ry * (x + y + 2.0) / (x + y + 1.0)
            + 1.0
        )
    else:
        m = float(weight)
        if m < 0:
            raise DomainError("weight power must be non-negative")
        rx = _ratio_pow(x, nu)
        ry = _ratio_pow(y, nu)
        cx = (1.0, rx - 1.0, -rx)
        px = (x - 1.0, 0.0, x)
        cy = (1.0, ry - 1.0, -ry)
        py = (y - 1.0, 0.0, y)
        out = 0.0
        for ci, pi in zip(cx, px):
            for cj, pj in zip(cy, py):
                out = out + ci * cj / (pi + pj + m + 1.0)
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def stat_k(data, nu_hat, weight=0):
    """Stein/pgf statistic ``K = n int_0^1 (mean_j g(X_j, s))**2 s**weight ds``.

    Computed as ``(1/n) sum_{u,v} c_u c_v h(u, v)`` over distinct values.
    """
    table = as_table(data)
    nu = _check_nu_hat(nu_hat)
    v = table.values
    c = table.counts.astype(float)
    h = kernel_h(nu, v[:, None], v[None, :], weight=weight)
    value = float(c @ np.atleast_2d(h) @ c) / table.n
    return StatValue(StatisticId("K", weight), value, nu)


def stat_k_pairwise(sample, nu_hat):
    """Integration-free form of K written over all observation pairs.

    ``n + (1/n) sum_{i,j} [...]`` with the asymmetric middle term, i.e. a
    term-by-term transcription rather than the kernel route of
    :func:`stat_k`. Costs ``O(n**2)``; meant for cross-checks.
    """
    x = np.asarray(sample, dtype=float).reshape(-1)
    nu = _check_nu_hat(nu_hat)
    n = x.size
    xi = x[:, None]
    xj = x[None, :]
    ri = _ratio_pow(xi, nu + 1.0)
    rj = _ratio_pow(xj, nu + 1.0)
    terms = (
        1.0 / (xi + xj - 1.0)
        - (1.0 / xi + 1.0 / xj)
        + 2.0 * ri * ((xi + 1.0) / (xj * (xj + xi)) - 1.0)
        + ri * rj * (xi + xj + 2.0) / (xi + xj + 1.0)
    )
    return n + float(terms.sum()) / n


def _exp_e1(z):
    """exp(z) * E1(z) for z > 0 without overflow."""
    if z < 50.0:
        return math.exp(z) * float(_sp.exp1(z))
    # asymptotic series; 10 terms leave a relative error below 2e-13 at z = 50
    acc, term = 0.0, 1.0 / z
    for k in range(10):
        acc += term
        term *= -(k + 1) / z
    return acc


def _mellin_i1(nu, x, a, tol):
    """sum_{s>=1} s**-nu / (a + log(s x)) with an Euler-Maclaurin tail."""
    c = a + math.log(x)
    cut = 64
    while True:
        s = np.arange(1, cut, dtype=float)
        head = float(np.sum((np.exp(-nu * np.log(s)) / (c + np.log(s)))[::-1]))
        ls = math.log(cut)
        big_l = c + ls
        f = cut ** -nu / big_l
        fp = -(cut ** (-nu - 1.0)) * (nu / big_l + 1.0 / big_l**2)
        integral = cut ** (1.0 - nu) * _exp_e1((nu - 1.0) * big_l)
        tail = integral + 0.5 * f - fp / 12.0
        # remainder <= 2 zeta(4) / (2 pi)^4 * |f'''(cut)|, with f''' bounded generously
        bound = 1.4e-3 * 2.0 * (nu + 3.0) ** 3 * cut ** (-nu - 3.0) / big_l
        if bound <= tol:
            return head + tail
        cut *= 2


def mellin_i0(x, a):
    """``I0(x) = int_0^inf x**-t exp(-a t) dt = 1 / (a + log x)``."""
    return 1.0 / (a + np.log(x))


def mellin_integrals(nu, values, a, ctl=_Z_CONTROL):
    """Return ``(I1(values), I2(1))`` for the Mellin-transform statistic.

    ``I1(x) = sum_s s**-nu / (a + log(s x))`` and
    ``I2(1) = int_0^inf zeta(nu + t)**2 exp(-a t) dt``.
    """
    i1 = np.array([_mellin_i1(nu, float(x), a, ctl.abs_tol) for x in values])
    # zeta(nu + t) is decreasing, so |f(t)| exp(a t) is non-increasing
    i2 = quad_semi_infinite(lambda t: zeta(nu + t) ** 2 * math.exp(-a * t), a, ctl)
    return i1, i2


def stat_z(data, nu_hat, a, ctl=_Z_CONTROL):
    """Weighted L2 distance between empirical and model inverse Mellin transforms.

    ``Z = zeta(nu)**2 / n sum_{j,k} I0(x_j x_k) + n I2(1) - 2 zeta(nu) sum_j I1(x_j)``
    with ``I0(x) = 1 / (a + log x)`` and weight ``exp(-a t)``.
    """
    table = as_table(data)
    nu = _check_nu_hat(nu_hat)
    a = float(a)
    if not a > 0:
        raise DomainError("Z needs a > 0")
    v = table.values.astype(float)
    c = table.counts.astype(float)
    n = table.n
    z = zeta(nu, ctl)
    i0 = mellin_i0(np.outer(v, v), a)
    i1, i2 = mellin_integrals(nu, v, a, ctl)
    value = z * z * float(c @ i0 @ c) / n + n * i2 - 2.0 * z * float(c @ i1)
    return StatValue(StatisticId("Z", a), value, nu)


def stat_t(data, nu_hat, beta):
    """Stein-generator statistic with weight ``(1 - t)**(2 + beta)``.

    ``T = n int_0^1 (mean_j phi(X_j, t))**2 (1 - t)**(2 + beta) dt`` where
    ``phi(1, t) = -t`` and ``phi(x, t) = (x/(x-1))**nu t**(x-1) - t**x`` for
    ``x >= 2``. Evaluated in closed form through Beta functions
    ``B(., 3 + beta)``; the ratios ``(x/(x-1))**nu`` only enter for x >= 2.
    """
    table = as_table(data)
    nu = _check_nu_hat(nu_hat)
    beta = float(beta)
    if not beta >= 0:
        raise DomainError("T needs beta >= 0")
    b3 = 3.0 + beta
    n = table.n
    v = table.values
    c = table.counts.astype(float)
    ones = float(c[v == 1].sum())
    big = v >= 2
    xv = v[big].astype(float)
    cv = c[big]
    total = ones * ones * math.exp(log_beta(3.0, b3))
    if xv.size:
        r = np.exp(nu * np.log(xv / (xv - 1.0)))
        cross = (r - (xv + 1.0) / (xv + 4.0 + beta)) * np.exp(log_beta(xv + 1.0, b3))
        total -= 2.0 * ones * float(cv @ cross)
        s = xv[:, None] + xv[None, :]
        rr = r[:, None] * r[None, :]
        rs = r[:, None] + r[None, :]
        # B(s-1) [r_x r_y - (r_x + r_y) B(s)/B(s-1) + B(s+1)/B(s-1)]
        q1 = (s - 1.0) / (s + 2.0 + beta)
        q2 = q1 * s / (s + 3.0 + beta)
        block = np.exp(log_beta(s - 1.0, b3)) * (rr - rs * q1 + q2)
        total += float(cv @ block @ cv)
    return StatValue(StatisticId("T", beta), total / n, nu)


def stat_cn(data, nu_hat):
    """Cramer-von Mises type distance ``n sum_k (F_n(k) - F(k))**2 p_n(k)``.

    The empirical pmf ``p_n`` vanishes off the observed values, so only
    those enter the sum.
    """
    table = as_table(data)
    nu = _check_nu_hat(nu_hat)
    n = table.n
    p_emp = table.counts / n
    f_emp = np.cumsum(table.counts) / n
    f_mod = cdf(nu, table.values)
    value = n * float(np.sum((f_emp - f_mod) ** 2 * p_emp))
    return StatValue(StatisticId("CN"), value, nu)


def stat_sben(data, nu_hat):
    """Squared distance between the Stein-type pmf identity and the empirical pmf.

    ``sum_{k=1}^{max X} (e_n(k) - rho_n(k))**2``. ``e_n`` is constant between
    consecutive observed values, so each gap contributes
    ``(gap length) * e_n**2`` and the sum costs ``O(d)``.
    """
    table = as_table(data)
    nu = _check_nu_hat(nu_hat)
    n = table.n
    v = table.values
    c = table.counts.astype(float)
    weights = c * (1.0 - _ratio_pow(v.astype(float), nu)) / n
    e = np.cumsum(weights[::-1])[::-1]  # e_n(k) for k in (v_{i-1}, v_i]
    rho = c / n
    gaps = np.diff(np.concatenate(([0], v))) - 1
    value = float(np.sum(gaps * e**2) + np.sum((e - rho) ** 2))
    return StatValue(StatisticId("SBEN"), value, nu)


def evaluate(stat_id, data, nu_hat):
    """Evaluate the statistic named by ``stat_id`` (a :class:`StatisticId` or string)."""
    if isinstance(stat_id, str):
        stat_id = StatisticId.parse(stat_id)
    kind = stat_id.kind
    if kind == "K":
        return stat_k(data, nu_hat, weight=stat_id.param)
    if kind == "Z":
        return stat_z(data, nu_hat, stat_id.param)
    if kind == "T":
        return stat_t(data, nu_hat, stat_id.param)
    if kind == "CN":
        return stat_cn(data, nu_hat)
    return stat_sben(data, nu_hat)
