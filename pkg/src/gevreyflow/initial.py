"""Initial data library and random corpora.

Random phases and amplitudes come from ``numpy.random.default_rng`` (PCG64)
so corpora are reproducible from an integer seed.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .spectral import GridSpec, ShapeError, SpectralField, synthesize


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def gevrey_random(
    grid: GridSpec,
    delta0: float,
    sigma: float = 1.0,
    amplitude: float = 1.0,
    seed=0,
) -> SpectralField:
    """Field with ``|c_k| = amplitude * exp(-delta0 |xi_k|^(1/sigma))`` and random phases.

    Phases for ``k = 1 .. n/2 - 1`` are drawn uniformly on ``[0, 2 pi)`` in
    increasing k; the mean and Nyquist coefficients are real and positive.
    The homogeneous-Gevrey decay rate of the result is exactly ``delta0``.
    """
    rng = _rng(seed)
    half = grid.n // 2
    xi = np.abs(grid.wavenumbers)
    mag = amplitude * np.exp(-delta0 * xi ** (1.0 / sigma))
    c = np.zeros(grid.n, dtype=complex)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=half - 1)
    c[0] = mag[0]
    c[half] = mag[half]
    c[1:half] = mag[1:half] * np.exp(1j * phases)
    c[half + 1:] = np.conj(c[1:half][::-1])
    return SpectralField(grid, c)


def from_modes(grid: GridSpec, modes) -> SpectralField:
    """Sum of cosines: each ``(k, amplitude, phase)`` adds ``amplitude cos(xi_k x + phase)``."""
    c = np.zeros(grid.n, dtype=complex)
    for k, amp, phase in modes:
        k = int(k)
        if not 0 <= k <= grid.n // 2:
            raise ShapeError(f"mode {k} not representable on n={grid.n}")
        if k == 0 or k == grid.n // 2:
            c[k] += amp * np.cos(phase)
        else:
            z = 0.5 * amp * np.exp(1j * phase)
            c[k] += z
            c[-k] += np.conj(z)
    return SpectralField(grid, c)


def from_samples_file(grid: GridSpec, path) -> SpectralField:
    values = np.loadtxt(Path(path), dtype=float).ravel()
    return synthesize(grid, values)


def random_field(
    grid: GridSpec,
    seed=None,
    decay=(0.3, 1.5),
    max_mode: int | None = None,
    sigma: float = 1.0,
) -> SpectralField:
    """Random real field with exponentially decaying spectrum, band-limited to ``max_mode``.

    The decay rate is drawn uniformly from ``decay``; coefficients are complex
    Gaussians scaled by ``exp(-rate |xi|^(1/sigma))``.
    """
    rng = _rng(seed)
    kmax = grid.band if max_mode is None else int(max_mode)
    rate = rng.uniform(*decay)
    xi = np.abs(grid.wavenumbers[: kmax + 1])
    z = rng.standard_normal(kmax + 1) + 1j * rng.standard_normal(kmax + 1)
    z *= np.exp(-rate * xi ** (1.0 / sigma))
    c = np.zeros(grid.n, dtype=complex)
    c[0] = z[0].real
    c[1 : kmax + 1] = z[1:]
    if kmax >= 1:
        c[-kmax:] = np.conj(z[1:][::-1])
    if kmax == grid.n // 2:
        c[kmax] = c[kmax].real
    return SpectralField(grid, c)
