"""Limiting-law constants and samplers for the correction term at H = 1/6.

The constants are built from S = sum over integer lags of rho(k)^3:

    kappa1 = kappa2 = sqrt(S / 96),   kappa3 = kappa4 = sqrt(S / 32).

The limiting correction for a path run to time t is the Ito integral

    sum_i kappa_i * int_0^t g_i(X_s) dB^i_s,

with (g_1, ..., g_4) = (f_xxx, f_yyy, f_xxy, f_xyy) evaluated along the
2-component fBm X and four independent standard Brownian motions B^i,
independent of X.  ``sample_correction_fbm`` draws one left-point Euler
realization of that integral.  ``sample_correction_fbmbt`` first draws the
Brownian time Y_t ~ N(0, t) and integrates out to Y_t, with orientation
carried by the sign of Y_t.

Euler grids use K = max(1, round(|horizon| / mesh)) uniform steps of exact
size |horizon| / K, so the grid always lands exactly on the endpoint; the fBm
marginals on the grid are exact (stationary-increment sampling), only the
integrand's intra-step variation is approximated.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .calculus import TestFunction2D
from .fgn import RhoSeriesResult, sample_increments, sum_rho_cubed
from .rng import (
    STREAM_B1,
    STREAM_B2,
    STREAM_B3,
    STREAM_B4,
    STREAM_X1,
    STREAM_X2,
    STREAM_Y,
    generator,
)

_H_SPECIAL = 1.0 / 6.0
_H_TOL = 1e-12

DEFAULT_SERIES_TRUNCATION = 10**6


@dataclass(frozen=True)
class KappaConstants:
    """The four weights of the limiting correction integral."""

    kappa1: float
    kappa2: float
    kappa3: float
    kappa4: float
    series: RhoSeriesResult

    @property
    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.kappa1, self.kappa2, self.kappa3, self.kappa4)


def kappa_constants(series: RhoSeriesResult) -> KappaConstants:
    if abs(series.H - _H_SPECIAL) > _H_TOL:
        raise ValueError(
            f"kappa constants are defined at H = 1/6 only, series has H = {series.H}"
        )
    s = series.value
    k12 = math.sqrt(s / 96.0)
    k34 = math.sqrt(s / 32.0)
    return KappaConstants(kappa1=k12, kappa2=k12, kappa3=k34, kappa4=k34, series=series)


@functools.lru_cache(maxsize=1)
def default_kappas() -> KappaConstants:
    return kappa_constants(sum_rho_cubed(_H_SPECIAL, DEFAULT_SERIES_TRUNCATION))


@dataclass(frozen=True)
class CorrectionSample:
    """One Monte Carlo draw from a correction-term sampler."""

    kind: str
    value: float
    t_effective: float
    mesh: float
    seed: int


# Derivative multi-indices paired with (kappa_i, B^i stream), in order.
_INTEGRAND_TERMS = ((3, 0), (0, 3), (2, 1), (1, 2))
_B_STREAMS = (STREAM_B1, STREAM_B2, STREAM_B3, STREAM_B4)


def _euler_sum(
    f: TestFunction2D,
    kappas: KappaConstants,
    length: float,
    mesh: float,
    seed: int,
) -> tuple[float, float, float]:
    """Left-point Euler value of the correction integral over [0, length],
    along with the exact endpoint values of the two fBm components.

    Returns (integral, x1_end, x2_end)."""
    if length == 0.0:
        return 0.0, 0.0, 0.0
    steps = max(1, round(length / mesh))
    h = length / steps

    def component(stream: int) -> np.ndarray:
        incs = sample_increments(_H_SPECIAL, h, steps, generator(seed, stream))
        return np.concatenate([[0.0], np.cumsum(incs)])

    x1 = component(STREAM_X1)
    x2 = component(STREAM_X2)
    sqrt_h = math.sqrt(h)
    total = 0.0
    for kappa, (a1, a2), stream in zip(
        kappas.as_tuple, _INTEGRAND_TERMS, _B_STREAMS
    ):
        db = generator(seed, stream).standard_normal(steps) * sqrt_h
        weight = np.asarray(
            f.partial(a1, a2)(x1[:-1], x2[:-1]), dtype=np.float64
        )
        total += kappa * math.fsum(np.broadcast_to(weight * db, db.shape))
    return total, float(x1[-1]), float(x2[-1])


def _check_args(t: float, mesh: float) -> None:
    if t < 0:
        raise ValueError(f"time horizon must be nonnegative, got {t}")
    if mesh <= 0:
        raise ValueError(f"mesh must be positive, got {mesh}")


def sample_correction_fbm(
    f: TestFunction2D,
    t: float,
    mesh: float,
    seed: int,
    kappas: KappaConstants | None = None,
) -> CorrectionSample:
    """One draw of the limiting correction for the fBm clock run to time t."""
    _check_args(t, mesh)
    kappas = kappas or default_kappas()
    value, _, _ = _euler_sum(f, kappas, t, mesh, seed)
    return CorrectionSample(
        kind="correction_fbm", value=value, t_effective=float(t),
        mesh=float(mesh), seed=int(seed),
    )


def _fbmbt_parts(
    f: TestFunction2D, t: float, mesh: float, seed: int, kappas: KappaConstants
) -> tuple[float, float, float, float]:
    """(signed correction, Y_t, X1 at Y_t, X2 at Y_t) for the Brownian-time
    version.  X is sampled outward from 0 toward Y_t, so by the reflection
    symmetry of fBm the draw has the law of the two-sided path restricted to
    the traversed side; the integral orientation is the sign of Y_t."""
    y = math.sqrt(t) * float(generator(seed, STREAM_Y).standard_normal()) if t else 0.0
    value, x1_end, x2_end = _euler_sum(f, kappas, abs(y), mesh, seed)
    if y < 0:
        value = -value
    return value, y, x1_end, x2_end


def sample_correction_fbmbt(
    f: TestFunction2D,
    t: float,
    mesh: float,
    seed: int,
    kappas: KappaConstants | None = None,
) -> CorrectionSample:
    """One draw of the limiting correction for the Brownian-time clock."""
    _check_args(t, mesh)
    kappas = kappas or default_kappas()
    value, y, _, _ = _fbmbt_parts(f, t, mesh, seed, kappas)
    return CorrectionSample(
        kind="correction_fbmbt", value=value, t_effective=y,
        mesh=float(mesh), seed=int(seed),
    )


def sample_change_of_variable_rhs(
    f: TestFunction2D,
    t: float,
    mesh: float,
    seed: int,
    kappas: KappaConstants | None = None,
) -> CorrectionSample:
    """One draw of f(X_{Y_t}) - f(X_0) - correction, sharing the X, Y and B
    draws with ``sample_correction_fbmbt`` at the same seed."""
    _check_args(t, mesh)
    kappas = kappas or default_kappas()
    corr, y, x1_end, x2_end = _fbmbt_parts(f, t, mesh, seed, kappas)
    value = float(f(x1_end, x2_end)) - float(f(0.0, 0.0)) - corr
    return CorrectionSample(
        kind="change_of_variable_rhs", value=value, t_effective=y,
        mesh=float(mesh), seed=int(seed),
    )
