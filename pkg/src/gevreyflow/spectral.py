"""Periodic Fourier grid, transforms, multipliers and dealiased products.

Normalization
-------------
A field is stored as Fourier *series* coefficients ``c_k`` so that the
physical samples are ``f(x_j) = sum_k c_k exp(i xi_k x_j)`` with
``x_j = j L / n`` and ``xi_k = 2 pi k / L``.  A constant field equal to one
therefore has ``c_0 = 1``.

Norms treat ``F(xi_k) = L c_k / sqrt(2 pi)`` as the sample of the unitary
Fourier transform on the line.  With mode spacing ``2 pi / L`` the quadrature
``sum_k |F(xi_k)|^2 (2 pi / L)`` reduces to ``L sum_k |c_k|^2``, which is the
exact discrete L2 norm ``sum_j |f(x_j)|^2 L / n`` (Parseval).

Coefficients are kept in numpy FFT order, i.e. ``k = 0, 1, ..., n/2 - 1,
n/2, -n/2 + 1, ..., -1``.  The Nyquist entry is labelled ``+n/2``; it has no
partner and is forced real.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

DEFAULT_LOG_CAP = 700.0
ROUNDOFF_RESIDUE = 1e-12


class SpectralError(Exception):
    """Base class for spectral-core failures."""


class ShapeError(SpectralError, ValueError):
    pass


class HermitianSymmetryError(SpectralError):
    pass


class RadiusTooLargeError(SpectralError, OverflowError):
    """A Gevrey multiplier would overflow on the grid."""

    def __init__(self, xi: float, log_amplitude: float, cap: float):
        self.xi = xi
        self.log_amplitude = log_amplitude
        self.cap = cap
        super().__init__(
            f"multiplier log-amplitude {log_amplitude:.6g} exceeds cap {cap:g} "
            f"at xi={xi:.6g}; reduce the radius or the resolution"
        )


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid with ``n`` points on a torus of length ``period``."""

    n: int
    period: float = 40.0 * np.pi

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ShapeError(f"grid size must be an even integer >= 8, got {self.n!r}")
        if not self.period > 0:
            raise ShapeError(f"period must be positive, got {self.period!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "period", float(self.period))

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode numbers in storage order (Nyquist labelled +n/2)."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n).round().astype(int)
        k[self.n // 2] = self.n // 2
        k.setflags(write=False)
        return k

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        xi = 2.0 * np.pi / self.period * self.modes
        xi.setflags(write=False)
        return xi

    @cached_property
    def mirror(self) -> np.ndarray:
        """Index of the conjugate partner ``-k`` for every storage slot."""
        idx = (-np.arange(self.n)) % self.n
        idx.setflags(write=False)
        return idx

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n) * (self.period / self.n)

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.period

    @property
    def band(self) -> int:
        """Largest |k| kept by the 2/3 rule (3 * band < n)."""
        return (self.n - 1) // 3

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        mask = np.abs(self.modes) <= self.band
        mask.setflags(write=False)
        return mask

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.n * factor, self.period)


def _hermitian(grid: GridSpec, c: np.ndarray) -> np.ndarray:
    return 0.5 * (c + np.conj(c[grid.mirror]))


def hermitian_residue(grid: GridSpec, c: np.ndarray) -> float:
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(c - np.conj(c[grid.mirror]))) / scale)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """A real periodic function held by its Fourier coefficients.

    Instances are immutable; every operation returns a new field.
    """

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n,):
            raise ShapeError(
                f"expected {self.grid.n} coefficients, got shape {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField":
        return cls(grid, np.zeros(grid.n, dtype=complex))

    @classmethod
    def _projected(cls, grid: GridSpec, c: np.ndarray) -> "SpectralField":
        return cls(grid, _hermitian(grid, c))

    @classmethod
    def from_modes(cls, grid: GridSpec, modes) -> "SpectralField":
        """Build a field from ``{k: c_k}`` for k >= 0; negative partners are implied."""
        c = np.zeros(grid.n, dtype=complex)
        for k, amp in dict(modes).items():
            k = int(k)
            if not 0 <= k <= grid.n // 2:
                raise ShapeError(f"mode {k} not representable on n={grid.n}")
            c[k] = amp
            if 0 < k < grid.n // 2:
                c[-k] = np.conj(amp)
        return cls._projected(grid, c)

    def samples(self) -> np.ndarray:
        return collocate(self)

    def norm_l2(self) -> float:
        return float(np.sqrt(self.grid.period * np.sum(np.abs(self.coeffs) ** 2)))

    def dealiased(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * self.grid.dealias_mask)

    def _check_grid(self, other: "SpectralField"):
        if self.grid != other.grid:
            raise ShapeError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other):
        if isinstance(other, SpectralField):
            self._check_grid(other)
            return SpectralField(self.grid, self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SpectralField):
            self._check_grid(other)
            return SpectralField(self.grid, self.coeffs - other.coeffs)
        return NotImplemented

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        if np.isscalar(scalar) and np.isreal(scalar):
            return SpectralField(self.grid, self.coeffs * float(scalar))
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self):
        return (
            f"SpectralField(n={self.grid.n}, period={self.grid.period:.6g}, "
            f"l2={self.norm_l2():.6g})"
        )


def synthesize(grid: GridSpec, samples) -> SpectralField:
    """Return the field whose collocation values at ``grid.points`` are ``samples``."""
    v = np.asarray(samples, dtype=float)
    if v.shape != (grid.n,):
        raise ShapeError(f"expected {grid.n} samples, got shape {v.shape}")
    return SpectralField._projected(grid, np.fft.fft(v) / grid.n)


def collocate(field: SpectralField) -> np.ndarray:
    """Physical-space samples of ``field``.

    Raises
    ------
    HermitianSymmetryError
        If the coefficients are not conjugate-symmetric to within 1e-12 of
        their magnitude, i.e. the field is not real.
    """
    res = hermitian_residue(field.grid, field.coeffs)
    if res > ROUNDOFF_RESIDUE:
        raise HermitianSymmetryError(
            f"coefficients break Hermitian symmetry (relative residue {res:.3g})"
        )
    return np.real(np.fft.ifft(field.coeffs)) * field.grid.n


@dataclass(frozen=True)
class Multiplier:
    """Even/odd Fourier symbol built from elementary kinds.

    The symbol is ``(i xi)^derivative * (1 + xi^2)^(bessel / 2)
    * prod exp(delta (1 + xi^2)^(1 / (2 sigma)))
    * prod exp(delta |xi|^(1 / sigma))`` where the two products run over
    ``gevrey`` and ``bar_gevrey`` respectively.  Multipliers compose with
    ``*``.
    """

    derivative: int = 0
    bessel: float = 0.0
    gevrey: tuple = ()
    bar_gevrey: tuple = ()

    def __post_init__(self):
        if self.derivative < 0 or int(self.derivative) != self.derivative:
            raise ValueError("derivative order must be a nonnegative integer")
        for delta, sigma in (*self.gevrey, *self.bar_gevrey):
            if delta < 0 or sigma <= 0:
                raise ValueError(f"need delta >= 0 and sigma > 0, got ({delta}, {sigma})")

    def __mul__(self, other: "Multiplier") -> "Multiplier":
        if not isinstance(other, Multiplier):
            return NotImplemented
        return Multiplier(
            self.derivative + other.derivative,
            self.bessel + other.bessel,
            self.gevrey + other.gevrey,
            self.bar_gevrey + other.bar_gevrey,
        )

    def log_amplitude(self, xi) -> np.ndarray:
        """Logarithm of the real positive part of the symbol."""
        xi = np.asarray(xi, dtype=float)
        out = np.zeros_like(xi)
        if self.bessel:
            out += 0.5 * self.bessel * np.log1p(xi * xi)
        for delta, sigma in self.gevrey:
            if delta:
                out += delta * (1.0 + xi * xi) ** (0.5 / sigma)
        for delta, sigma in self.bar_gevrey:
            if delta:
                out += delta * np.abs(xi) ** (1.0 / sigma)
        return out

    def __call__(self, xi, cap: float = DEFAULT_LOG_CAP) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        logamp = self.log_amplitude(xi)
        if logamp.size:
            worst = int(np.argmax(logamp))
            if logamp[worst] > cap:
                raise RadiusTooLargeError(float(xi.flat[worst]), float(logamp.flat[worst]), cap)
        amp = np.exp(logamp)
        if self.derivative:
            return amp * (1j * xi) ** self.derivative
        return amp.astype(complex)


def derivative(order: int = 1) -> Multiplier:
    return Multiplier(derivative=order)


def bessel(power: float) -> Multiplier:
    """Symbol ``(1 + xi^2)^(power / 2)``, i.e. ``A^power`` with ``A = (1 - d_xx)^(1/2)``."""
    return Multiplier(bessel=power)


def gevrey(delta: float, sigma: float = 1.0) -> Multiplier:
    return Multiplier(gevrey=((float(delta), float(sigma)),))


def bar_gevrey(delta: float, sigma: float = 1.0) -> Multiplier:
    return Multiplier(bar_gevrey=((float(delta), float(sigma)),))


def apply_multiplier(
    field: SpectralField, m: Multiplier, cap: float = DEFAULT_LOG_CAP
) -> SpectralField:
    """Scale every coefficient by ``m(xi_k)``.

    Odd derivative orders zero the unpaired Nyquist mode so the result stays
    real.
    """
    grid = field.grid
    symbol = m(grid.wavenumbers, cap=cap)
    if m.derivative % 2:
        symbol = symbol.copy()
        symbol[grid.n // 2] = 0.0
    return SpectralField._projected(grid, field.coeffs * symbol)


def _product_coeffs(grid: GridSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n, h = grid.n, grid.n // 2
    mask = grid.dealias_mask
    fa = np.fft.irfft((a * mask)[: h + 1], n) * n
    fb = np.fft.irfft((b * mask)[: h + 1], n) * n
    half = np.fft.rfft(fa * fb) / n
    out = np.empty(n, dtype=complex)
    out[: h + 1] = half
    out[h + 1 :] = np.conj(half[1:h][::-1])
    return out * mask


def pointwise_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Dealiased product ``f * g`` using the 2/3 rule.

    Both factors are truncated to ``|k| <= grid.band`` before the physical
    space product and the result is truncated again, so the retained modes
    equal the exact convolution of the truncated inputs.
    """
    f._check_grid(g)
    return SpectralField(f.grid, _product_coeffs(f.grid, f.coeffs, g.coeffs))


def inner_product(f: SpectralField, g: SpectralField) -> float:
    """L2 inner product ``int f g dx`` over one period."""
    f._check_grid(g)
    return float(f.grid.period * np.real(np.vdot(g.coeffs, f.coeffs)))


def max_abs(field: SpectralField) -> float:
    return float(np.max(np.abs(collocate(field))))
