"""Coincidence experiments: mode matrices, hologram scans and visibilities.

A scan keeps the signal detector fixed and slides the idler hologram
across the beam.  For an entangled input the coincidence rate has a dip;
for a pure state with a dip partner it reaches zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import optimize

from .errors import (
    BoundaryMinimumError,
    DegenerateCurveError,
    DimensionMismatchError,
    DomainError,
    UnreachableError,
)
from .optics import DetectionProjector, HologramSpec, displaced_projector
from .states import (
    BipartitePureState,
    DensityOperator,
    ModeSpectrum,
    mix_with_white_noise,
)

StateLike = Union[BipartitePureState, DensityOperator]

# Visibilities of the measured dip scans without and with the plate.
PAPER_VISIBILITY_BEFORE = 0.977
PAPER_VISIBILITY_AFTER = 0.976


@dataclass(frozen=True)
class RunConfig:
    pair_rate: float = 2000.0
    integration_time: float = 1.0
    rng_seed: int = 20070101
    epsilon_noise: float = 0.0

    def __post_init__(self) -> None:
        if not self.pair_rate > 0:
            raise DomainError(f"pair_rate must be positive, got {self.pair_rate}")
        if not self.integration_time > 0:
            raise DomainError(f"integration_time must be positive, got {self.integration_time}")
        if not 0 <= self.rng_seed < 2**64:
            raise DomainError(f"rng_seed must be a 64-bit unsigned integer, got {self.rng_seed}")
        if not 0.0 <= self.epsilon_noise <= 1.0:
            raise DomainError(f"epsilon_noise must lie in [0, 1], got {self.epsilon_noise}")


@dataclass(frozen=True)
class CoincidenceMatrix:
    """Joint detection probabilities, rows = signal mode, columns = idler mode."""

    spectrum: ModeSpectrum
    values: np.ndarray

    def value(self, l_signal: int, l_idler: int) -> float:
        return float(self.values[self.spectrum.index(l_signal), self.spectrum.index(l_idler)])

    def off_conserving(self) -> np.ndarray:
        """Entries with ``l_signal + l_idler != 0``."""
        anti = np.fliplr(np.eye(self.spectrum.dim, dtype=bool))
        return self.values[~anti]

    def scaled(self, rate: float) -> np.ndarray:
        return self.values * rate


@dataclass(frozen=True)
class ScanCurve:
    displacements: np.ndarray
    expected: np.ndarray
    sampled: np.ndarray | None = None
    meta: str = ""
    # index of a sample inserted at the located minimum, if any
    refined_index: int | None = field(default=None)

    def __post_init__(self) -> None:
        d = np.array(self.displacements, dtype=float, copy=True)
        e = np.array(self.expected, dtype=float, copy=True)
        if d.shape != e.shape or d.ndim != 1:
            raise DimensionMismatchError("displacements and expected must be equal-length vectors")
        if np.any(e < 0):
            raise DomainError("expected coincidences must be nonnegative")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "displacements", d)
        object.__setattr__(self, "expected", e)
        if self.sampled is not None:
            s = np.array(self.sampled, dtype=np.int64, copy=True)
            if s.shape != d.shape:
                raise DimensionMismatchError("sampled counts must match displacements")
            s.setflags(write=False)
            object.__setattr__(self, "sampled", s)

    def values(self) -> np.ndarray:
        return self.expected if self.sampled is None else self.sampled.astype(float)


def _bra(proj_signal: DetectionProjector, proj_idler: DetectionProjector, spectrum: ModeSpectrum) -> np.ndarray:
    if proj_signal.spectrum != spectrum or proj_idler.spectrum != spectrum:
        raise DimensionMismatchError("projector and state spectra differ")
    return np.kron(proj_signal.amplitudes, proj_idler.amplitudes)


def coincidence_prob(state: StateLike, proj_signal: DetectionProjector, proj_idler: DetectionProjector) -> float:
    """Joint detection probability ``|(<a| x <b|) psi>|**2`` or ``<ab| rho |ab>``."""
    v = _bra(proj_signal, proj_idler, state.spectrum)
    if isinstance(state, BipartitePureState):
        p = abs(np.vdot(v, state.vector())) ** 2
    else:
        p = np.real(np.vdot(v, state.matrix @ v))
    return float(min(max(p, 0.0), 1.0))


def mode_matrix(state: StateLike) -> CoincidenceMatrix:
    """Coincidences for every pair of pure-mode detectors ``|l1>, |l2>``."""
    d = state.spectrum.dim
    if isinstance(state, BipartitePureState):
        values = np.abs(state.amplitudes) ** 2
    else:
        values = np.clip(np.real(np.diag(state.matrix)), 0.0, None).reshape(d, d)
    return CoincidenceMatrix(state.spectrum, values)


@lru_cache(maxsize=65536)
def _idler_projector(fork: int, d: float, fiber_waist_ratio: float, l_max: int) -> DetectionProjector:
    return displaced_projector(HologramSpec(fork, displacement=d), fiber_waist_ratio, ModeSpectrum(l_max))


def idler_projector(fork: int, d: float, fiber_waist_ratio: float = 1.0, spectrum: ModeSpectrum | None = None) -> DetectionProjector:
    """Cached ``displaced_projector`` for a first-order idler hologram."""
    spectrum = spectrum or ModeSpectrum()
    return _idler_projector(int(fork), float(d), float(fiber_waist_ratio), spectrum.l_max)


def scan_dip(
    state: StateLike,
    fixed_signal_proj: DetectionProjector,
    idler_holo_fork: int,
    d_range: tuple[float, float],
    n_points: int,
    refine: bool = True,
    fiber_waist_ratio: float = 1.0,
) -> ScanCurve:
    """Coincidence probability while the idler hologram is scanned across the beam.

    With ``refine`` the minimum is located by a bounded Brent search between
    the grid neighbours of the lowest sample, and that point is inserted
    into the curve (``refined_index``) so the dip depth is not limited by
    the grid spacing.  Without it the curve is exactly the uniform grid.
    """
    if idler_holo_fork not in (-1, 1):
        raise DomainError(f"idler hologram fork must be +-1, got {idler_holo_fork}")
    if n_points < 3:
        raise DomainError(f"a scan needs at least 3 points, got {n_points}")
    d_min, d_max = map(float, d_range)
    if not d_max > d_min:
        raise DomainError(f"d_range must be increasing, got {d_range}")
    spectrum = state.spectrum

    def prob(d: float) -> float:
        return coincidence_prob(state, fixed_signal_proj, idler_projector(idler_holo_fork, d, fiber_waist_ratio, spectrum))

    ds = np.linspace(d_min, d_max, n_points)
    expected = np.array([prob(d) for d in ds])
    meta = f"signal={fixed_signal_proj.label}; idler fork={idler_holo_fork:+d}"
    i = int(np.argmin(expected))
    if not refine or i == 0 or i == n_points - 1 or np.ptp(expected) == 0:
        return ScanCurve(ds, expected, meta=meta)

    res = optimize.minimize_scalar(prob, bounds=(ds[i - 1], ds[i + 1]), method="bounded", options={"xatol": 1e-12})
    d_star = float(res.x)
    if not (ds[i - 1] < d_star < ds[i + 1]) or d_star in ds or res.fun >= expected[i]:
        return ScanCurve(ds, expected, meta=meta)
    k = int(np.searchsorted(ds, d_star))
    return ScanCurve(np.insert(ds, k, d_star), np.insert(expected, k, res.fun), meta=meta, refined_index=k)


def sample_counts(curve: ScanCurve, cfg: RunConfig, stream: int = 0) -> ScanCurve:
    """Poisson counts per scan point; point ``i`` draws from its own seeded stream.

    Streams are keyed by ``(rng_seed, stream, i)``, so results do not depend
    on evaluation order and separate curves can use separate ``stream`` ids.
    """
    lam = curve.expected * cfg.pair_rate * cfg.integration_time
    counts = np.empty(lam.shape, dtype=np.int64)
    for i, mean in enumerate(lam):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.rng_seed, spawn_key=(stream, i)))
        counts[i] = rng.poisson(mean)
    return replace(curve, sampled=counts)


def visibility(curve: ScanCurve) -> float:
    """``(C_max - C_min) / (C_max + C_min)``, from sampled counts when present."""
    values = curve.values()
    if values.size == 0:
        raise DegenerateCurveError("empty curve")
    c_max, c_min = float(values.max()), float(values.min())
    if c_max <= 0:
        raise DegenerateCurveError("all coincidence values are zero")
    return (c_max - c_min) / (c_max + c_min)


@dataclass(frozen=True)
class ScanSetup:
    """Everything ``scan_dip`` needs apart from the noise level."""

    state: BipartitePureState
    signal_projector: DetectionProjector
    idler_fork: int
    d_range: tuple[float, float] = (-2.0, 2.0)
    n_points: int = 201
    fiber_waist_ratio: float = 1.0

    def scan(self, epsilon: float = 0.0, refine: bool = True) -> ScanCurve:
        state: StateLike = self.state if epsilon == 0 else mix_with_white_noise(self.state, epsilon)
        return scan_dip(
            state, self.signal_projector, self.idler_fork, self.d_range, self.n_points, refine, self.fiber_waist_ratio
        )


def calibrate_noise(target_v: float, setup: ScanSetup, xtol: float = 1e-10) -> float:
    """White-noise fraction that brings the scan visibility down to ``target_v``.

    Bisection on ``epsilon`` in [0, 1]; visibility falls monotonically from
    its noiseless value to zero.
    """
    if not 0.0 < target_v <= 1.0:
        raise DomainError(f"target visibility must lie in (0, 1], got {target_v}")
    v0 = visibility(setup.scan(0.0))
    if target_v > v0 + 1e-12:
        raise UnreachableError(f"target visibility {target_v} exceeds the noiseless value {v0}")
    if target_v >= v0:
        return 0.0
    eps = optimize.bisect(lambda e: visibility(setup.scan(e)) - target_v, 0.0, 1.0, xtol=xtol)
    return float(eps)


def find_dip(curve: ScanCurve, use_sampled: bool = False) -> float:
    """Dip position from a parabola through the lowest sample and its neighbours.

    Equal minima resolve to the smaller ``|d|``.
    """
    y = curve.values() if use_sampled else curve.expected
    x = curve.displacements
    if y.size < 3:
        raise DegenerateCurveError("need at least 3 samples to locate a dip")
    candidates = np.flatnonzero(y == y.min())
    i = int(candidates[np.argmin(np.abs(x[candidates]))])
    if i == 0 or i == y.size - 1:
        raise BoundaryMinimumError(f"minimum sits at the scan edge d={x[i]:g}")
    x0, x1, x2 = x[i - 1 : i + 2]
    y0, y1, y2 = y[i - 1 : i + 2]
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / denom
    if a <= 0:
        return float(x1)
    return float(-b / (2 * a))
