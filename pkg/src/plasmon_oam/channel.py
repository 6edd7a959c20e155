"""Mode-dependent loss of the photon -> plasmon -> photon conversion.

The perforated film is modelled as a diagonal filter on one photon: mode
``l`` survives with intensity transmission ``eta[l]`` and there is no
cross-mode coupling.  Outputs are post-selected on transmission and
renormalized; the success probability is returned alongside.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DimensionMismatchError, DomainError
from .states import (
    BipartitePureState,
    DensityOperator,
    ModeSpectrum,
    normalize,
)

# Measured transmissions at 702 nm, per winding number, with 1-sigma errors.
PAPER_ETA = {-1: 0.0151, 0: 0.0325, 1: 0.0182}
PAPER_ETA_ERR = {-1: 0.0013, 0: 0.0010, 1: 0.0014}

# Film geometry and the quoted total transmissions.
PAPER_HOLE_DIAMETER_NM = 200.0
PAPER_PERIOD_NM = 600.0
PAPER_WAVELENGTH_NM = 702.0
PAPER_OBSERVED_TRANSMISSION = 0.032
PAPER_CLASSICAL_TRANSMISSION = 0.0055

_SIDES = ("signal", "idler")


@dataclass(frozen=True)
class LossChannel:
    spectrum: ModeSpectrum
    eta: np.ndarray
    acts_on: str = "idler"

    def __post_init__(self) -> None:
        eta = np.array(self.eta, dtype=float, copy=True)
        if eta.shape != (self.spectrum.dim,):
            raise DimensionMismatchError(f"eta has shape {eta.shape}, expected ({self.spectrum.dim},)")
        if not np.all((eta > 0) & (eta <= 1)):
            raise DomainError(f"every eta must lie in (0, 1], got {eta.tolist()}")
        if self.acts_on not in _SIDES:
            raise DomainError(f"acts_on must be 'signal' or 'idler', got {self.acts_on!r}")
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)

    @classmethod
    def from_mapping(
        cls, eta: Mapping[int, float], spectrum: ModeSpectrum | None = None, acts_on: str = "idler"
    ) -> "LossChannel":
        spectrum = spectrum or ModeSpectrum()
        missing = [l for l in spectrum.modes if l not in eta]
        if missing:
            raise DomainError(f"eta missing for modes {missing}")
        extra = [l for l in eta if l not in spectrum]
        if extra:
            raise DomainError(f"eta given for modes outside the spectrum: {extra}")
        return cls(spectrum, np.array([eta[l] for l in spectrum.modes]), acts_on)

    def eta_of(self, l: int) -> float:
        return float(self.eta[self.spectrum.index(l)])

    def kraus(self) -> np.ndarray:
        """The single Kraus operator ``K`` on the two-photon space."""
        local = np.diag(np.sqrt(self.eta))
        ident = np.eye(self.spectrum.dim)
        if self.acts_on == "idler":
            return np.kron(ident, local)
        return np.kron(local, ident)

    def then(self, other: "LossChannel") -> "LossChannel":
        """Sequential composition: transmissions multiply mode by mode."""
        if other.spectrum != self.spectrum or other.acts_on != self.acts_on:
            raise DimensionMismatchError("can only compose channels on the same photon and spectrum")
        return LossChannel(self.spectrum, self.eta * other.eta, self.acts_on)


def paper_channel(spectrum: ModeSpectrum | None = None) -> LossChannel:
    """Idler-side channel with the measured per-mode transmissions."""
    spectrum = spectrum or ModeSpectrum()
    if spectrum.l_max > 1:
        raise DomainError("measured transmissions exist only for |l| <= 1; build the channel explicitly")
    return LossChannel.from_mapping(PAPER_ETA, spectrum)


def _check_spectrum(a: ModeSpectrum, b: ModeSpectrum) -> None:
    if a != b:
        raise DimensionMismatchError(f"spectrum mismatch: l_max {a.l_max} vs {b.l_max}")


def apply_channel(state: BipartitePureState, ch: LossChannel) -> tuple[BipartitePureState, float]:
    """Scale each amplitude by ``sqrt(eta)`` of the filtered photon's mode and renormalize."""
    _check_spectrum(state.spectrum, ch.spectrum)
    root = np.sqrt(ch.eta)
    if ch.acts_on == "idler":
        scaled = state.amplitudes * root[None, :]
    else:
        scaled = state.amplitudes * root[:, None]
    raw = BipartitePureState(state.spectrum, scaled)
    success = raw.norm() ** 2
    return normalize(raw), float(success)


def apply_channel_mixed(rho: DensityOperator, ch: LossChannel) -> tuple[DensityOperator, float]:
    _check_spectrum(rho.spectrum, ch.spectrum)
    k = ch.kraus()
    out = k @ rho.matrix @ k.conj().T
    out = 0.5 * (out + out.conj().T)
    success = float(np.real(np.trace(out)))
    if not success > 0:
        raise DomainError("channel annihilates the input state")
    return DensityOperator(rho.spectrum, out / success), success


@dataclass(frozen=True)
class FilterDesign:
    eta: np.ndarray
    yield_prob: float
    eta_cap: float
    spectrum: ModeSpectrum
    acts_on: str = "idler"

    def channel(self) -> LossChannel:
        return LossChannel(self.spectrum, self.eta, self.acts_on)


def design_concentration_filter(
    state: BipartitePureState, eta_cap: float, acts_on: str = "idler"
) -> FilterDesign:
    """Procrustean filter that equalizes the pair amplitudes ``c[l, -l]``.

    The filtered photon's mode ``n`` gets ``eta[n]`` proportional to
    ``1 / |c|**2`` of the term it belongs to, scaled so that the largest
    transmission equals ``eta_cap``.  The state must be OAM-conserving
    (weight only on ``|l, -l>``) since a diagonal filter cannot rotate the
    Schmidt basis.
    """
    if not 0.0 < eta_cap <= 1.0:
        raise DomainError(f"eta_cap must lie in (0, 1], got {eta_cap}")
    spectrum = state.spectrum
    d = spectrum.dim
    anti = np.fliplr(np.eye(d, dtype=bool))
    if np.max(np.abs(state.amplitudes[~anti]), initial=0.0) > 1e-12:
        raise DomainError("state has weight off the l_signal + l_idler = 0 terms; a mode filter cannot concentrate it")
    pair_amp = np.abs(state.anti_diagonal())
    if np.min(pair_amp) < 1e-12:
        raise DomainError("state lacks amplitude on some |l, -l> term; it cannot be concentrated")
    # pair_amp is indexed by the signal mode l; the idler partner is -l
    inv = 1.0 / pair_amp**2
    if acts_on == "idler":
        inv = inv[::-1]
    elif acts_on != "signal":
        raise DomainError(f"acts_on must be 'signal' or 'idler', got {acts_on!r}")
    eta = eta_cap * inv / inv.max()
    ch = LossChannel(spectrum, eta, acts_on)
    _, success = apply_channel(state, ch)
    return FilterDesign(eta=ch.eta, yield_prob=success, eta_cap=float(eta_cap), spectrum=spectrum, acts_on=acts_on)


def bethe_baseline(hole_diameter: float, period: float, wavelength: float) -> float:
    """Classical areal transmission of a subwavelength hole array.

    Uses the Bethe small-aperture result normalized to the hole area,
    ``T_hole = 64 / (27 pi**2) * (k a)**4`` with radius ``a`` and
    ``k = 2 pi / wavelength``, times the open-area fraction
    ``pi a**2 / period**2``.  Lengths share any one unit.

    For the experimental film (200 nm holes, 600 nm period, 702 nm light)
    this gives about 1.35 %.  The 0.55 % figure quoted with the measurement
    rests on a convention that is not stated, and is not reproduced here.
    """
    for name, value in (("hole_diameter", hole_diameter), ("period", period), ("wavelength", wavelength)):
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value}")
    if hole_diameter >= wavelength:
        raise DomainError("Bethe theory needs holes smaller than the wavelength")
    a = 0.5 * hole_diameter
    ka = 2.0 * np.pi / wavelength * a
    per_hole = 64.0 / (27.0 * np.pi**2) * ka**4
    return float(per_hole * np.pi * a**2 / period**2)


def bethe_report() -> dict[str, float]:
    """Classical estimate for the experimental film next to the quoted numbers."""
    classical = bethe_baseline(PAPER_HOLE_DIAMETER_NM, PAPER_PERIOD_NM, PAPER_WAVELENGTH_NM)
    return {
        "bethe_transmission": classical,
        "observed_transmission": PAPER_OBSERVED_TRANSMISSION,
        "observed_over_bethe": PAPER_OBSERVED_TRANSMISSION / classical,
        "quoted_classical_transmission": PAPER_CLASSICAL_TRANSMISSION,
        "observed_over_quoted_classical": PAPER_OBSERVED_TRANSMISSION / PAPER_CLASSICAL_TRANSMISSION,
    }
