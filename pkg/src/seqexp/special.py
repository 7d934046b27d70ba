"""Standard normal and Erlang distribution functions.

The normal functions are thin wrappers over :mod:`scipy.special` that accept
scalars or arrays. The Erlang CDF is evaluated as a Poisson tail sum,

    U(x; k, rate) = P(Poisson(rate * x) >= k),

summing whichever tail is small so that both ``erlang_cdf`` and ``erlang_sf``
keep full relative precision far out in the tails.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

__all__ = [
    "normal_pdf",
    "normal_cdf",
    "normal_quantile",
    "erlang_cdf",
    "erlang_sf",
    "erlang_cdf_array",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
# stop summing once a term falls below this fraction of the partial sum
_REL_EPS = 1e-18


def normal_pdf(a):
    a = np.asarray(a, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * a * a)
    return out[()] if out.ndim == 0 else out


def normal_cdf(a):
    """Standard normal CDF, saturating cleanly at 0 and 1."""
    a = np.asarray(a, dtype=float)
    out = 0.5 * _sp.erfc(-a / _SQRT2)
    return out[()] if out.ndim == 0 else out


def normal_quantile(p):
    """Inverse of :func:`normal_cdf` on the open interval (0, 1).

    Raises
    ------
    ValueError
        If any ``p`` lies outside (0, 1) or is NaN.
    """
    p = np.asarray(p, dtype=float)
    if not np.all((p > 0.0) & (p < 1.0)):
        raise ValueError(f"normal_quantile needs 0 < p < 1, got {p}")
    out = _sp.ndtri(p)
    return out[()] if out.ndim == 0 else out


def _check_erlang(x: float, k: int, rate: float) -> None:
    if not (x >= 0.0):
        raise ValueError(f"erlang: x must be >= 0, got {x}")
    if int(k) != k or k < 1:
        raise ValueError(f"erlang: shape k must be a positive integer, got {k}")
    if not (rate > 0.0 and math.isfinite(rate)):
        raise ValueError(f"erlang: rate must be positive and finite, got {rate}")


def _poisson_tails(lam: float, k: int) -> tuple[float, float]:
    """Return (P(N < k), P(N >= k)) for N ~ Poisson(lam)."""
    if lam == 0.0:
        return 1.0, 0.0
    log_lam = math.log(lam)
    if lam < k:
        # upper tail: terms fall off geometrically from j = k upward
        t = math.exp(k * log_lam - lam - math.lgamma(k + 1))
        terms = []
        j = k
        total = 0.0
        while t > _REL_EPS * total or not terms:
            terms.append(t)
            total += t
            j += 1
            t *= lam / j
            if t == 0.0:
                break
        upper = math.fsum(terms)
        return 1.0 - upper, upper
    # lower tail: walk down from j = k - 1
    j = k - 1
    t = math.exp(j * log_lam - lam - math.lgamma(j + 1))
    terms = []
    total = 0.0
    while True:
        terms.append(t)
        total += t
        if j == 0:
            break
        t *= j / lam
        j -= 1
        if t <= _REL_EPS * total:
            break
    lower = math.fsum(terms)
    return lower, 1.0 - lower


def erlang_cdf(x: float, k: int, rate: float) -> float:
    """CDF of the sum of ``k`` i.i.d. Exp(rate) variables, evaluated at ``x``.

    Equals ``1 - exp(-rate*x) * sum_{j<k} (rate*x)**j / j!``.
    """
    _check_erlang(x, k, rate)
    return _poisson_tails(rate * x, int(k))[1]


def erlang_sf(x: float, k: int, rate: float) -> float:
    """Survival function ``1 - erlang_cdf(x, k, rate)`` without cancellation."""
    _check_erlang(x, k, rate)
    return _poisson_tails(rate * x, int(k))[0]


def erlang_cdf_array(x, k, rate: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised Erlang CDF and survival function.

    ``x`` and ``k`` broadcast against each other; ``rate`` is a scalar.
    Returns ``(cdf, sf)``. Used by the renewal series, which needs thousands
    of shapes at once.
    """
    x, k = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(k, dtype=np.int64))
    if np.any(x < 0) or np.any(k < 1) or not rate > 0:
        raise ValueError("erlang_cdf_array: need x >= 0, k >= 1, rate > 0")
    lam = (rate * x).ravel()
    kk = k.ravel()
    lower = np.zeros(lam.shape)
    upper = np.zeros(lam.shape)

    pos = lam > 0
    lower[~pos] = 1.0
    up_mask = pos & (lam < kk)
    dn_mask = pos & ~up_mask

    if up_mask.any():
        lm = lam[up_mask]
        j = kk[up_mask].astype(float)
        upper[up_mask] = _walk_sum(j * np.log(lm) - lm - _sp.gammaln(j + 1), lm, j, up=True)
        lower[up_mask] = 1.0 - upper[up_mask]
    if dn_mask.any():
        lm = lam[dn_mask]
        j = kk[dn_mask].astype(float) - 1.0
        lower[dn_mask] = _walk_sum(j * np.log(lm) - lm - _sp.gammaln(j + 1), lm, j, up=False)
        upper[dn_mask] = 1.0 - lower[dn_mask]
    return upper.reshape(x.shape), lower.reshape(x.shape)


def _walk_sum(log_t0: np.ndarray, lam: np.ndarray, j: np.ndarray, up: bool) -> np.ndarray:
    # Neumaier-compensated sum of Poisson pmf terms walking away from the mode
    t = np.exp(log_t0)
    s = t.copy()
    c = np.zeros_like(s)
    j = j.copy()
    active = t > 0
    while active.any():
        if up:
            j = j + 1.0
            t = np.where(active, t * lam / j, 0.0)
        else:
            t = np.where(active & (j > 0), t * j / lam, 0.0)
            j = j - 1.0
        big = np.abs(s) >= np.abs(t)
        new = s + t
        c += np.where(big, (s - new) + t, (t - new) + s)
        s = new
        active = t > _REL_EPS * s
    return s + c
