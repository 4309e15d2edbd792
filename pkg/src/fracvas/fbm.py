"""Fractional Brownian motion on a uniform grid.

The production generator uses circulant embedding of the stationary increment
process (Davies-Harte): the 2n-point circulant built from the fractional
Gaussian noise autocovariance is diagonalized by the FFT, nonnegative
eigenvalues are required (tiny negative values from rounding are clipped),
and one complex Gaussian draw per frequency synthesizes an exact sample in
O(n log n).  A dense covariance square-root sampler is kept as an
independent oracle for tests at small n.

Paths are pinned to value 0 at t = 0 and are exact in distribution at the
grid times; unit-spacing noise is rescaled by dt^H (self-similarity).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SampleGrid",
    "FbmPath",
    "FbmEmbeddingError",
    "fbm_cov",
    "generate_fbm",
    "exact_gaussian_oracle",
    "save_path_csv",
]

_EIGENVALUE_CLIP_RTOL = 1e-10
_ORACLE_MAX_CELLS = 2048


class FbmEmbeddingError(RuntimeError):
    """Circulant embedding produced materially negative eigenvalues."""


@dataclass(frozen=True)
class SampleGrid:
    """Uniform time grid: n cells on [0, horizon], n+1 nodes."""

    horizon: float
    n: int

    def __post_init__(self) -> None:
        if not self.horizon > 0.0:
            raise ValueError(f"horizon must be positive, got {self.horizon!r}")
        if self.n < 2:
            raise ValueError(f"need at least 2 cells, got n={self.n!r}")

    @property
    def dt(self) -> float:
        return self.horizon / self.n

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n + 1)


@dataclass(frozen=True)
class FbmPath:
    grid: SampleGrid
    hurst: float
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.n + 1,):
            raise ValueError("values must have one entry per grid node")
        if self.values[0] != 0.0:
            raise ValueError("fBm paths start at 0")


def _check_hurst(hurst: float) -> None:
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"Hurst index must lie in (0, 1), got {hurst!r}")


def fbm_cov(s: float, t: float, hurst: float) -> float:
    """Cov(B^H_s, B^H_t) = (s^2H + t^2H - |t-s|^2H) / 2."""
    _check_hurst(hurst)
    if s < 0.0 or t < 0.0:
        raise ValueError("times must be nonnegative")
    h2 = 2.0 * hurst
    return 0.5 * (s**h2 + t**h2 - abs(t - s) ** h2)


def _fgn_unit_autocov(n: int, hurst: float) -> np.ndarray:
    # Autocovariance of unit-spacing fractional Gaussian noise at lags 0..n.
    k = np.arange(n + 1, dtype=float)
    h2 = 2.0 * hurst
    return 0.5 * ((k + 1.0) ** h2 + np.abs(k - 1.0) ** h2) - k**h2


_EIG_CACHE: dict[tuple[int, float], np.ndarray] = {}


def _embedding_eigenvalues(n: int, hurst: float) -> np.ndarray:
    key = (n, hurst)
    eig = _EIG_CACHE.get(key)
    if eig is None:
        c = _fgn_unit_autocov(n, hurst)
        row = np.concatenate([c, c[-2:0:-1]])  # circulant first row, length 2n
        eig = np.fft.fft(row).real
        floor = -_EIGENVALUE_CLIP_RTOL * eig.max()
        if eig.min() < floor:
            raise FbmEmbeddingError(
                f"negative circulant eigenvalue {eig.min():.3e} at n={n}, H={hurst}"
            )
        eig = np.clip(eig, 0.0, None)
        if len(_EIG_CACHE) > 16:
            _EIG_CACHE.clear()
        _EIG_CACHE[key] = eig
    return eig


def generate_fbm(hurst: float, grid: SampleGrid, seed: int) -> FbmPath:
    """Sample one fBm path by circulant embedding; exact at the grid times."""
    _check_hurst(hurst)
    n = grid.n
    eig = _embedding_eigenvalues(n, hurst)
    m = 2 * n
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(m)
    u, v = z[: n + 1], z[n + 1 :]

    spectrum = np.zeros(m, dtype=complex)
    spectrum[0] = np.sqrt(eig[0] / m) * u[0]
    spectrum[n] = np.sqrt(eig[n] / m) * u[n]
    half = np.sqrt(eig[1:n] / (2.0 * m)) * (u[1:n] + 1j * v)
    spectrum[1:n] = half
    spectrum[n + 1 :] = np.conj(half[::-1])

    noise_unit = np.fft.fft(spectrum).real[:n]
    values = np.empty(n + 1)
    values[0] = 0.0
    np.cumsum(noise_unit, out=values[1:])
    values[1:] *= grid.dt**hurst
    return FbmPath(grid=grid, hurst=hurst, values=values)


def exact_gaussian_oracle(hurst: float, grid: SampleGrid, seed: int) -> FbmPath:
    """Dense covariance square-root sampler; test oracle, n <= 2048 only."""
    _check_hurst(hurst)
    if grid.n > _ORACLE_MAX_CELLS:
        raise ValueError(f"oracle limited to n <= {_ORACLE_MAX_CELLS}")
    t = grid.times()[1:]
    h2 = 2.0 * hurst
    s_col = t[:, None]
    t_row = t[None, :]
    cov = 0.5 * (s_col**h2 + t_row**h2 - np.abs(t_row - s_col) ** h2)
    root = np.linalg.cholesky(cov)
    rng = np.random.default_rng(seed)
    values = np.empty(grid.n + 1)
    values[0] = 0.0
    values[1:] = root @ rng.standard_normal(grid.n)
    return FbmPath(grid=grid, hurst=hurst, values=values)


def save_path_csv(times: np.ndarray, values: np.ndarray, dest) -> None:
    """Write a two-column t,value CSV with 17 significant digits."""
    if len(times) != len(values):
        raise ValueError("times and values must have equal length")
    own = isinstance(dest, (str, bytes))
    fh = open(dest, "w") if own else dest
    try:
        fh.write("t,value\n")
        for t, x in zip(times, values):
            fh.write(f"{t:.17g},{x:.17g}\n")
    finally:
        if own:
            fh.close()
