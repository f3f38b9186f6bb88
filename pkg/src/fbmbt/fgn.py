"""Two-sided fractional Brownian motion on dyadic grids.

The process lives on the grid ``j * 2**(-n/2)``, ``j_min <= j <= j_max``, and
is the single two-sided fBm whose covariance is

    cov_fbm(t, s) = (|s|^{2H} + |t|^{2H} - |t-s|^{2H}) / 2

for all real t, s.  Note that this makes the negative and positive halves
correlated; the increment sequence over the whole two-sided grid is the
stationary fractional Gaussian noise with autocovariance
``2**(-n*H) * rho(k)``, which is what the sampler draws.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz

from .rng import STREAM_X1, STREAM_X2, generator

# Hard cap on the number of increments sampled exactly; beyond this we refuse
# rather than silently approximate.
MAX_INCREMENTS = 1 << 22

# Cholesky is the fallback when the circulant embedding is not nonnegative
# definite; it is only practical up to this size.
MAX_CHOLESKY = 4096

# Switch from the direct second-difference formula to the expm1 form of rho
# at this lag (the direct form loses ~|k|^{2H} * eps absolute accuracy).
_RHO_DIRECT_CUTOFF = 8


class CapacityError(RuntimeError):
    """Requested grid too large for exact sampling."""


def check_hurst(H: float) -> float:
    if not 0.0 < H < 1.0:
        raise ValueError(f"Hurst exponent must lie in (0,1), got {H}")
    return float(H)


def check_level(n: int) -> int:
    if n < 0 or int(n) != n:
        raise ValueError(f"dyadic level must be a nonnegative integer, got {n}")
    return int(n)


def grid_spacing(n: int) -> float:
    """Grid step 2**(-n/2) on the fBm clock."""
    return 2.0 ** (-check_level(n) / 2.0)


def cov_fbm(t: float, s: float, H: float) -> float:
    """fBm covariance (|s|^{2H} + |t|^{2H} - |t-s|^{2H}) / 2, any real t, s."""
    H = check_hurst(H)
    h2 = 2.0 * H
    return 0.5 * (abs(s) ** h2 + abs(t) ** h2 - abs(t - s) ** h2)


def rho(k, H: float):
    """Autocovariance of unit-step fGn: (|k+1|^{2H} + |k-1|^{2H} - 2|k|^{2H}) / 2.

    Vectorized over ``k``.  For large lags the naive second difference
    cancels catastrophically, so the tail is evaluated as
    ``a^{2H} * (expm1(2H*log1p(1/a)) + expm1(2H*log1p(-1/a))) / 2``.
    """
    H = check_hurst(H)
    h2 = 2.0 * H
    k_arr = np.asarray(k, dtype=np.float64)
    a = np.abs(k_arr)
    out = np.empty_like(a)

    near = a <= _RHO_DIRECT_CUTOFF
    if h2 == 1.0:
        # Brownian increments: exact zeros off the diagonal.
        return np.where(a == 0, 1.0, 0.0) if k_arr.ndim else (1.0 if a == 0 else 0.0)
    an = a[near]
    out[near] = 0.5 * ((an + 1.0) ** h2 + np.abs(an - 1.0) ** h2 - 2.0 * an**h2)
    af = a[~near]
    if af.size:
        u = np.expm1(h2 * np.log1p(1.0 / af))
        v = np.expm1(h2 * np.log1p(-1.0 / af))
        out[~near] = 0.5 * af**h2 * (u + v)
    return out if k_arr.ndim else float(out)


def increment_cov_matrix(H: float, n: int, count: int) -> np.ndarray:
    """Covariance matrix of ``count`` consecutive level-n grid increments."""
    H = check_hurst(H)
    n = check_level(n)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    scale = 2.0 ** (-n * H)
    col = scale * rho(np.arange(count), H)
    return toeplitz(col)


@dataclass(frozen=True)
class RhoSeriesResult:
    """Partial sum of sum_{r in Z} rho(r)^3 with a certified tail bound."""

    H: float
    m: int
    partial_sum: float
    tail_bound: float

    @property
    def value(self) -> float:
        return self.partial_sum


def sum_rho_cubed(H: float, m: int) -> RhoSeriesResult:
    """Certified evaluation of sum_{|r| <= m} rho(r)^3.

    The tail bound uses |rho(r)| <= H|2H-1| (r-1)^{2H-2} for r >= 2 (Taylor
    remainder of the second difference), valid and summable-cubed for H < 5/6.
    """
    H = check_hurst(H)
    if H >= 5.0 / 6.0:
        raise ValueError(f"series sum of rho^3 requires H < 5/6, got {H}")
    if m < 2:
        raise ValueError(f"truncation must satisfy m >= 2, got {m}")
    r = np.arange(1, m + 1)
    partial = 1.0 + 2.0 * math.fsum(rho(r, H) ** 3)
    c = H * abs(2.0 * H - 1.0)
    # sum_{r>m} (r-1)^{3(2H-2)} <= m^{6H-6} + integral_m^inf x^{6H-6} dx
    tail = 2.0 * c**3 * (float(m) ** (6 * H - 6) + float(m) ** (6 * H - 5) / (5 - 6 * H))
    return RhoSeriesResult(H=H, m=int(m), partial_sum=partial, tail_bound=tail)


@dataclass(frozen=True)
class FbmGridPath2D:
    """Two independent two-sided fBm components on a level-n dyadic grid.

    ``values1[j - j_min]`` holds X^1 at time ``j * 2**(-n/2)``; both
    components vanish at j = 0.
    """

    H: float
    level: int
    j_min: int
    j_max: int
    values1: np.ndarray = field(repr=False)
    values2: np.ndarray = field(repr=False)
    seed: int

    @property
    def spacing(self) -> float:
        return grid_spacing(self.level)

    def component(self, i: int) -> np.ndarray:
        if i == 1:
            return self.values1
        if i == 2:
            return self.values2
        raise ValueError(f"component must be 1 or 2, got {i}")

    def value(self, i: int, j: int) -> float:
        if not self.j_min <= j <= self.j_max:
            raise ValueError(f"grid index {j} outside [{self.j_min}, {self.j_max}]")
        return float(self.component(i)[j - self.j_min])

    def segment(self, i: int, j_lo: int, j_hi: int) -> np.ndarray:
        """Values at grid indices j_lo..j_hi inclusive."""
        if j_lo < self.j_min or j_hi > self.j_max:
            raise ValueError(
                f"requested segment [{j_lo}, {j_hi}] outside grid "
                f"[{self.j_min}, {self.j_max}]"
            )
        return self.component(i)[j_lo - self.j_min : j_hi - self.j_min + 1]


@functools.lru_cache(maxsize=16)
def _embedding_sqrt_eig(H: float, spacing: float, size: int):
    """sqrt of circulant-embedding eigenvalues for ``size`` increments.

    Returns None when the embedding has a significantly negative eigenvalue.
    """
    c = spacing ** (2.0 * H) * rho(np.arange(size + 1), H)
    emb = np.concatenate([c, c[-2:0:-1]])
    eig = np.fft.fft(emb).real
    if eig.min() < -1e-9 * max(eig.max(), 1.0):
        return None
    return np.sqrt(np.clip(eig, 0.0, None))


@functools.lru_cache(maxsize=8)
def _cholesky_factor(H: float, spacing: float, size: int) -> np.ndarray:
    cov = spacing ** (2.0 * H) * toeplitz(rho(np.arange(size), H))
    jitter = 0.0
    for _ in range(3):
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(size))
        except np.linalg.LinAlgError:
            jitter = 1e-12 if jitter == 0.0 else jitter * 100.0
    raise CapacityError(
        f"increment covariance not factorizable at H={H}, spacing={spacing}, size={size}"
    )


def sample_increments(
    H: float, spacing: float, size: int, rng: np.random.Generator
) -> np.ndarray:
    """Exact draw of ``size`` stationary fBm increments at the given spacing.

    Circulant embedding when its eigenvalues are nonnegative (they are for
    every H < 1/2 grid we touch), symmetric factorization as fallback.
    """
    if size > MAX_INCREMENTS:
        raise CapacityError(
            f"grid of {size} increments exceeds exact-sampling cap {MAX_INCREMENTS}"
        )
    if size == 0:
        return np.zeros(0)
    sq = _embedding_sqrt_eig(H, spacing, size)
    if sq is not None:
        m = 2 * size
        v = rng.standard_normal((2, m))
        w = np.empty(m, dtype=complex)
        w[0] = sq[0] * v[0, 0] * math.sqrt(2.0)
        w[size] = sq[size] * v[0, size] * math.sqrt(2.0)
        w[1:size] = sq[1:size] * (v[0, 1:size] + 1j * v[1, 1:size])
        w[size + 1 :] = np.conj(w[size - 1 : 0 : -1])
        return np.fft.fft(w).real[:size] / math.sqrt(2.0 * m)
    if size > MAX_CHOLESKY:
        raise CapacityError(
            f"circulant embedding failed and {size} increments exceed the "
            f"Cholesky fallback cap {MAX_CHOLESKY}"
        )
    chol = _cholesky_factor(H, spacing, size)
    return chol @ rng.standard_normal(size)


def sample_fbm_2d(
    H: float, n: int, j_min: int, j_max: int, seed: int
) -> FbmGridPath2D:
    """Exact 2-component fBm sample on grid indices ``j_min..j_max``.

    Each component is drawn from its own RNG stream (so they are independent),
    as the cumulative sum of one stationary increment sequence over the whole
    two-sided range, anchored so that X_0 = 0.
    """
    H = check_hurst(H)
    n = check_level(n)
    if not j_min <= 0 <= j_max:
        raise ValueError(f"grid must contain index 0, got [{j_min}, {j_max}]")
    count = j_max - j_min
    if count > MAX_INCREMENTS:
        raise CapacityError(
            f"grid of {count} increments exceeds exact-sampling cap {MAX_INCREMENTS}"
        )
    # Pad to the next power of two so the factorization caches are shared
    # across replications with slightly different realized ranges.
    padded = 1 << max(0, (count - 1).bit_length()) if count else 0

    def one_component(stream: int) -> np.ndarray:
        if count == 0:
            return np.zeros(1)
        incs = sample_increments(H, grid_spacing(n), padded, generator(seed, stream))[:count]
        vals = np.concatenate([[0.0], np.cumsum(incs)])
        return vals - vals[-j_min]

    return FbmGridPath2D(
        H=H,
        level=n,
        j_min=int(j_min),
        j_max=int(j_max),
        values1=one_component(STREAM_X1),
        values2=one_component(STREAM_X2),
        seed=int(seed),
    )
