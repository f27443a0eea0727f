"""Log-domain Bessel functions, complex erfc, log-gamma, and the large-order
asymptotic approximants used for ratio tests.

K_nu is needed at orders up to a few thousand where scipy's kve overflows, so
evaluation is split into three regimes (see bessel_k_regime): an ascending
series for tiny arguments, scipy's exponentially scaled kve where it is
finite, and a Debye-type uniform large-order expansion otherwise.  All K
values move through the code as natural logs; I_nu values as ScaledComplex.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.special as sp

from .scaled import RunningSum, ScaledComplex, scaled_value

__all__ = [
    "log_gamma",
    "BesselRegime",
    "bessel_k_regime",
    "log_bessel_k",
    "scaled_bessel_i",
    "erfc_complex",
    "bessel_asymptotic",
    "ERFC_ACCURACY_RADIUS",
]

# regime thresholds (pure functions of (order, |argument|); overlap unit-tested)
UNIFORM_MIN_ORDER = 15.0
SERIES_MAX_X = 1e-8
ERFC_ACCURACY_RADIUS = 30.0


def log_gamma(x) -> float:
    """ln Gamma(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("log_gamma requires x > 0")
    out = sp.gammaln(x)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# modified Bessel K in log domain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BesselRegime:
    """Which evaluation strategy covers (order, |argument|)."""

    kind: str  # 'series' | 'continued_fraction' | 'uniform_large_order'
    order: float
    series_max_x: float = SERIES_MAX_X
    uniform_min_order: float = UNIFORM_MIN_ORDER


def bessel_k_regime(order: float, x: float) -> BesselRegime:
    """Regime selection for log_bessel_k; pure in (order, |x|)."""
    order = float(order)
    x = abs(float(x))
    if order >= UNIFORM_MIN_ORDER:
        kind = "uniform_large_order"
    elif x <= SERIES_MAX_X:
        kind = "series"
    else:
        kind = "continued_fraction"
    return BesselRegime(kind=kind, order=order)


def _debye_polynomials(kmax):
    """Debye polynomials u_k(t), exact rational coefficients.

    u_0 = 1,  u_{k+1}(t) = t^2 (1-t^2) u_k'(t) / 2 + (1/8) int_0^t (1-5 s^2) u_k(s) ds.
    """
    polys = [[Fraction(1)]]
    for _ in range(kmax):
        u = polys[-1]
        du = [Fraction(i) * u[i] for i in range(1, len(u))]
        acc = [Fraction(0)] * (len(u) + 4)
        for i, coef in enumerate(du):
            acc[i + 2] += coef / 2
            acc[i + 4] -= coef / 2
        integrand = [Fraction(0)] * (len(u) + 2)
        for i, coef in enumerate(u):
            integrand[i] += coef
            integrand[i + 2] -= 5 * coef
        for i, coef in enumerate(integrand):
            acc[i + 1] += coef / Fraction(8 * (i + 1))
        while acc and acc[-1] == 0:
            acc.pop()
        polys.append(acc)
    return polys


_DEBYE_TERMS = 10
_DEBYE = [np.array([float(c) for c in p]) for p in _debye_polynomials(_DEBYE_TERMS)]


def _log_k_uniform(order, x):
    """DLMF 10.41.4 uniform expansion of ln K_order(x), order >= ~10."""
    z = x / order
    s = np.hypot(1.0, z)
    t = 1.0 / s
    eta = s + np.log(z / (1.0 + s))
    corr = 0.0
    for k in range(_DEBYE_TERMS):
        corr += (-1.0) ** k * np.polynomial.polynomial.polyval(t, _DEBYE[k]) / order**k
    return 0.5 * np.log(np.pi / (2.0 * order)) - order * eta - 0.25 * np.log1p(z * z) + np.log(corr)


def _log_k_series(order, x):
    """Ascending-series leading behaviour, valid for x <= SERIES_MAX_X.

    For order > 0:  K_nu(x) = Gamma(nu)/2 (2/x)^nu (1 + O(x^2));
    for order = 0:  K_0(x) = -ln(x/2) - gamma + O(x^2 ln x).
    The neglected terms are below 1e-15 relative on the series domain.
    """
    if order == 0.0:
        return math.log(-math.log(x / 2.0) - np.euler_gamma)
    lead = sp.gammaln(order) - math.log(2.0) + order * math.log(2.0 / x)
    if order != 1.0:
        corr = (x * x / 4.0) / (1.0 - order)  # first term of I_{-nu} tail
    else:
        corr = 0.0
    return lead + math.log1p(corr)


def log_bessel_k(order: float, x: float) -> float:
    """ln K_order(x) for order >= 0, x > 0."""
    order = float(order)
    x = float(x)
    if x <= 0:
        raise ValueError("log_bessel_k requires x > 0")
    if order < 0:
        raise ValueError("log_bessel_k requires order >= 0")
    regime = bessel_k_regime(order, x)
    if regime.kind == "uniform_large_order":
        return float(_log_k_uniform(order, x))
    if regime.kind == "series":
        return float(_log_k_series(order, x))
    val = sp.kve(order, x)
    if not np.isfinite(val) or val <= 0.0:
        # kve over/underflowed inside its nominal regime: the uniform
        # expansion still converges (order >= ~10 whenever this happens)
        return float(_log_k_uniform(order, x))
    return float(np.log(val) - x)


# ---------------------------------------------------------------------------
# modified Bessel I as ScaledComplex
# ---------------------------------------------------------------------------

def scaled_bessel_i(order: float, z) -> ScaledComplex:
    """I_order(z) from its power series, accumulated in log domain.

    Works for complex z (principal branch of (z/2)^order); truncation error is
    bounded by the first omitted term.
    """
    order = float(order)
    if order < 0:
        raise ValueError("scaled_bessel_i requires order >= 0")
    z = complex(z)
    if z == 0:
        return ScaledComplex.one() if order == 0 else ScaledComplex.zero()
    half = z / 2.0
    log_half = math.log(abs(half))
    arg_half = math.atan2(half.imag, half.real)

    acc = RunningSum()
    k = 0
    peak = -np.inf
    while True:
        lm = (2 * k + order) * log_half - sp.gammaln(k + 1) - sp.gammaln(k + order + 1)
        ph = (2 * k + order) * arg_half
        acc.add_parts(lm, ph)
        peak = max(peak, lm)
        # converged once terms are past the peak and negligibly small
        if k > abs(half) and lm < peak - 40.0:
            break
        k += 1
        if k > 100000:
            raise RuntimeError("scaled_bessel_i series failed to converge")
    return acc.value()


# ---------------------------------------------------------------------------
# complementary error function on C
# ---------------------------------------------------------------------------

def erfc_complex(z) -> complex:
    """erfc(z) for complex z (Faddeeva-backed).

    Documented accuracy domain |z| <= ERFC_ACCURACY_RADIUS; outside it the
    value is still returned, with a warning flag.
    """
    z = complex(z)
    if abs(z) > ERFC_ACCURACY_RADIUS:
        warnings.warn(
            f"erfc_complex called outside its accuracy domain |z| <= {ERFC_ACCURACY_RADIUS}",
            RuntimeWarning,
            stacklevel=2,
        )
    return complex(sp.erfc(z))


# ---------------------------------------------------------------------------
# large-order asymptotic approximants (ratio tests only, never inside kernels)
# ---------------------------------------------------------------------------

def bessel_asymptotic(kind: str, order: float, arg) -> ScaledComplex:
    """Right-hand sides of the displayed large-order/large-argument
    asymptotics, as ScaledComplex.

    kind:
      'K_large_arg'  sqrt(pi/(2x)) e^{-x}                        (x -> inf, fixed order)
      'K_uniform'    uniform large-order form, arg = order*|z|   (order -> inf)
      'I_lemma43'    I_order(sqrt(order) z) approximant, z complex in a compact set
      'K_lemma43'    K_order(sqrt(order) x) approximant, x >= 0
    """
    order = float(order)
    if kind == "K_large_arg":
        x = float(arg)
        if x <= 0:
            raise ValueError("K_large_arg requires positive argument")
        return scaled_value(0.5 * math.log(math.pi / (2.0 * x)) - x, 0.0)

    if kind == "K_uniform":
        x = float(arg)
        if x <= 0 or order <= 0:
            raise ValueError("K_uniform requires positive order and argument")
        z = x / order
        s = math.hypot(1.0, z)
        lm = (
            0.5 * math.log(math.pi / (2.0 * order))
            - 0.25 * math.log1p(z * z)
            + order * math.log((1.0 + s) / z)
            - order * s
        )
        return scaled_value(lm, 0.0)

    if kind == "I_lemma43":
        if order <= 0:
            raise ValueError("I_lemma43 requires positive order")
        z = complex(arg)
        if z == 0:
            return ScaledComplex.zero()
        lm = (
            -0.5 * math.log(2.0 * math.pi)
            - 0.5 * (order + 1.0) * math.log(order)
            + order * math.log(abs(z) / 2.0)
            + order
            + (z * z).real / 4.0
        )
        ph = order * math.atan2(z.imag, z.real) + (z * z).imag / 4.0
        return scaled_value(lm, ph)

    if kind == "K_lemma43":
        x = float(np.real_if_close(arg))
        if np.iscomplexobj(arg) and abs(complex(arg).imag) > 0:
            raise ValueError("K_lemma43 requires a nonnegative real argument")
        if x < 0:
            raise ValueError("K_lemma43 requires a nonnegative real argument")
        if order <= 0:
            raise ValueError("K_lemma43 requires positive order")
        if x == 0:
            raise ValueError("K_lemma43 argument must be positive")
        lm = (
            0.5 * math.log(math.pi / 2.0)
            + 0.5 * (order - 1.0) * math.log(order)
            - order * math.log(x / 2.0)
            - order
            - x * x / 4.0
        )
        return scaled_value(lm, 0.0)

    raise ValueError(f"unknown asymptotic kind {kind!r}")
