"""Laguerre-Gaussian fields, fork holograms and fiber-coupled mode detectors.

A fork hologram of charge ``q`` used in diffraction order ``m`` shifts the
winding number of a transmitted beam by ``m * q``.  Followed by a
single-mode fiber it therefore detects the mode ``l = -m * q``: only that
mode is flattened into the fiber's Gaussian.

Displacing the hologram by ``d`` (in beam waists, along x) moves the fork
singularity off axis.  The detected mode is obtained by sending the fiber
mode backwards through the hologram::

    V(x, y) = G(x, y) * exp(-1j * m * q * atan2(y, x - d))

and expanding ``V`` in the p = 0 LG basis of the spectrum.  The overlaps
are computed in polar coordinates centred on the singularity, where the
integrand is smooth: Gauss-Legendre in radius, trapezoid in angle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .errors import DimensionMismatchError, DomainError
from .states import ModeSpectrum

# Typical fork holograms diffract about 30 % into the first order.
CGH_EFFICIENCY = 0.30

_RADIAL_NODES = 64
_ANGULAR_NODES = 64
_NODES_PER_WAIST = 16
_WINDOW_WAISTS = 10.0


@dataclass(frozen=True)
class LGMode:
    """p = 0 Laguerre-Gaussian mode with winding number ``l`` and waist ``w``."""

    l: int
    w: float = 1.0


@dataclass(frozen=True)
class HologramSpec:
    fork_charge: int
    diffraction_order: int = 1
    displacement: float = 0.0
    efficiency: float = CGH_EFFICIENCY

    def __post_init__(self) -> None:
        if self.diffraction_order not in (-1, 0, 1):
            raise DomainError(f"only diffraction orders 0, +-1 are modelled, got {self.diffraction_order}")
        if not 0.0 < self.efficiency <= 1.0:
            raise DomainError(f"efficiency must lie in (0, 1], got {self.efficiency}")
        if not np.isfinite(self.displacement):
            raise DomainError("displacement must be finite")

    @property
    def winding_shift(self) -> int:
        return self.diffraction_order * self.fork_charge

    @property
    def detected_mode(self) -> int:
        """Mode coupled into the fiber when the hologram is centred."""
        return -self.winding_shift


@dataclass(frozen=True)
class DetectionProjector:
    """Single-photon detection mode ``sum_l a[l] |l>`` (a ket; probabilities use its bra)."""

    spectrum: ModeSpectrum
    amplitudes: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex, copy=True)
        if amps.shape != (self.spectrum.dim,):
            raise DimensionMismatchError(
                f"projector has {amps.shape} amplitudes, spectrum needs {self.spectrum.dim}"
            )
        if abs(np.linalg.norm(amps) - 1.0) > 1e-9:
            raise DomainError("projector amplitudes must have unit norm")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def amplitude(self, l: int) -> complex:
        return complex(self.amplitudes[self.spectrum.index(l)])


def lg_field(mode: LGMode, x, y):
    """Normalized LG_0^l field at ``(x, y)``; broadcasts over arrays."""
    if not mode.w > 0:
        raise DomainError(f"beam waist must be positive, got {mode.w}")
    l = abs(mode.l)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r2 = (x * x + y * y) / mode.w**2
    amp = np.sqrt(2.0 / (np.pi * factorial(l))) / mode.w * (2.0 * r2) ** (l / 2) * np.exp(-r2)
    if mode.l == 0:
        return amp.astype(complex)
    return amp * np.exp(1j * mode.l * np.arctan2(y, x))


def _spectrum_for(n: int) -> ModeSpectrum:
    if n < 3 or n % 2 == 0:
        raise DimensionMismatchError(f"mode vector length must be odd and >= 3, got {n}")
    return ModeSpectrum((n - 1) // 2)


def hologram_shift(state_amplitudes, holo: HologramSpec) -> tuple[np.ndarray, float]:
    """Pass a single-photon mode vector through a centred hologram.

    Returns the shifted vector (scaled by ``sqrt(efficiency)``) and the
    leaked weight: the part whose new winding number falls outside the
    spectrum.  ``norm(out)**2 + leakage == efficiency * norm(in)**2``.
    """
    amps = np.asarray(state_amplitudes, dtype=complex)
    spectrum = _spectrum_for(amps.shape[0])
    shift = holo.winding_shift
    gain = np.sqrt(holo.efficiency)
    out = np.zeros_like(amps)
    leakage = 0.0
    for i, l in enumerate(spectrum.modes):
        target = l + shift
        if target in spectrum:
            out[spectrum.index(target)] += gain * amps[i]
        else:
            leakage += holo.efficiency * abs(amps[i]) ** 2
    return out, leakage


@lru_cache(maxsize=None)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _polar_grid(center_x: float, radius: float):
    # the Gaussian envelope sits a distance |center_x| from the pole, so both
    # node counts grow with the displacement
    extra = _NODES_PER_WAIST * int(np.ceil(abs(center_x)))
    t, wt = _gauss_legendre(_RADIAL_NODES + extra // 2)
    rho = 0.5 * radius * (t + 1.0)
    w_rho = 0.5 * radius * wt * rho
    n_theta = _ANGULAR_NODES + extra
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    R, T = np.meshgrid(rho, theta, indexing="ij")
    weights = w_rho[:, None] * (2.0 * np.pi / n_theta)
    return center_x + R * np.cos(T), R * np.sin(T), T, weights


def displaced_mode_overlaps(
    holo: HologramSpec,
    fiber_waist_ratio: float = 1.0,
    spectrum: ModeSpectrum | None = None,
    w: float = 1.0,
) -> np.ndarray:
    """Unnormalized overlaps ``<LG_l | V>`` of the back-propagated fiber mode."""
    spectrum = spectrum or ModeSpectrum()
    if not fiber_waist_ratio > 0:
        raise DomainError(f"fiber_waist_ratio must be positive, got {fiber_waist_ratio}")
    d = holo.displacement * w
    radius = abs(d) + _WINDOW_WAISTS * w * max(1.0, fiber_waist_ratio)
    X, Y, theta, weights = _polar_grid(d, radius)
    # theta is the azimuth around the fork singularity at (d, 0)
    v = lg_field(LGMode(0, fiber_waist_ratio * w), X, Y) * np.exp(-1j * holo.winding_shift * theta)
    return _lg_basis(spectrum, X, Y, w).conj() @ (v * weights).ravel()


def _lg_basis(spectrum: ModeSpectrum, x: np.ndarray, y: np.ndarray, w: float) -> np.ndarray:
    """All p = 0 modes of the spectrum on a grid, shape ``(dim, x.size)``."""
    x = x.ravel() / w
    y = y.ravel() / w
    gauss = np.sqrt(2.0 / np.pi) / w * np.exp(-(x * x + y * y))
    s = np.sqrt(2.0) * (x + 1j * y)
    out = np.empty((spectrum.dim, x.size), dtype=complex)
    power = gauss.astype(complex)
    out[spectrum.index(0)] = power
    for l in range(1, spectrum.l_max + 1):
        power = power * s / np.sqrt(l)
        out[spectrum.index(l)] = power
        out[spectrum.index(-l)] = power.conj()
    return out


def displaced_projector(
    holo: HologramSpec,
    fiber_waist_ratio: float = 1.0,
    spectrum: ModeSpectrum | None = None,
) -> DetectionProjector:
    """Detection mode of a (possibly displaced) fork hologram plus single-mode fiber.

    Parameters
    ----------
    holo : HologramSpec
        ``fork_charge`` must be +-1; ``displacement`` is in beam waists.
    fiber_waist_ratio : float
        Fiber mode waist relative to the LG beam waist at the hologram.
    spectrum : ModeSpectrum, optional
        Basis the detection mode is truncated to before normalizing.

    Returns
    -------
    DetectionProjector
        At zero displacement this is the pure mode ``-m * q``; far from the
        singularity it tends to the Gaussian ``|0>``.  The amplitudes are
        real for this geometry.
    """
    if abs(holo.fork_charge) != 1:
        raise DomainError(f"displaced detection is modelled for +-1 forks only, got {holo.fork_charge}")
    spectrum = spectrum or ModeSpectrum()
    overlaps = displaced_mode_overlaps(holo, fiber_waist_ratio, spectrum)
    norm = np.linalg.norm(overlaps)
    if norm < 1e-12:
        raise DomainError("detection mode has no weight inside the spectrum")
    label = f"fork={holo.fork_charge:+d} order={holo.diffraction_order:+d} d={holo.displacement:g}w"
    return DetectionProjector(spectrum, overlaps / norm, label)


def projector_from_coefficients(a: float, b: float, l: int, spectrum: ModeSpectrum | None = None) -> DetectionProjector:
    """``(a|0> + b|l>) / sqrt(a**2 + b**2)`` for ``l`` in {-1, +1}."""
    if l not in (-1, 1):
        raise DomainError(f"l must be -1 or +1, got {l}")
    norm = np.hypot(a, b)
    if norm == 0:
        raise DomainError("coefficients (a, b) must not both vanish")
    spectrum = spectrum or ModeSpectrum()
    amps = np.zeros(spectrum.dim, dtype=complex)
    amps[spectrum.index(0)] = a / norm
    amps[spectrum.index(l)] = b / norm
    return DetectionProjector(spectrum, amps, f"({a:g}|0> + {b:g}|{l:+d}>)")


def pure_projector(l: int, spectrum: ModeSpectrum | None = None) -> DetectionProjector:
    spectrum = spectrum or ModeSpectrum()
    amps = np.zeros(spectrum.dim, dtype=complex)
    amps[spectrum.index(l)] = 1.0
    return DetectionProjector(spectrum, amps, f"|{l:+d}>")
