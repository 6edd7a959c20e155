"""Bipartite OAM states of a photon pair.

Amplitudes are stored as a square table ``c[i, j]`` where ``i`` indexes the
signal photon's winding number and ``j`` the idler's, both in the order
``-l_max, ..., +l_max``.  ``|m, n>`` always means signal in mode ``m`` and
idler in mode ``n``.  Flattened vectors use row-major order, which is the
same ordering as ``np.kron(signal, idler)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DimensionMismatchError, DomainError, ZeroNormError

HERMITIAN_TOL = 1e-10
POSITIVITY_TOL = 1e-10

# Anti-diagonal coefficients of the measured pair states, keyed (l_signal, l_idler),
# before and after the perforated gold film.
PAPER_COEFFICIENTS: dict[str, dict[tuple[int, int], float]] = {
    "before_plate": {(0, 0): 1.0, (-1, 1): 0.523, (1, -1): 0.486},
    "after_plate": {(0, 0): 1.0, (-1, 1): 0.392, (1, -1): 0.332},
}
# Normalizers as printed alongside the coefficients.
PAPER_NORMALIZERS = {"before_plate": 1.229, "after_plate": 1.124}


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ModeSpectrum:
    """Ordered winding-number basis ``-l_max ... +l_max`` (radial index p = 0)."""

    l_max: int = 1

    def __post_init__(self) -> None:
        if isinstance(self.l_max, bool) or int(self.l_max) != self.l_max:
            raise DomainError(f"l_max must be an integer, got {self.l_max!r}")
        if self.l_max < 1:
            raise DomainError(f"l_max must be >= 1, got {self.l_max}")
        object.__setattr__(self, "l_max", int(self.l_max))

    @property
    def dim(self) -> int:
        return 2 * self.l_max + 1

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(range(-self.l_max, self.l_max + 1))

    def __contains__(self, l: object) -> bool:
        return isinstance(l, (int, np.integer)) and -self.l_max <= l <= self.l_max

    def index(self, l: int) -> int:
        if l not in self:
            raise DomainError(f"mode l={l} outside spectrum |l| <= {self.l_max}")
        return int(l) + self.l_max


@dataclass(frozen=True)
class BipartitePureState:
    spectrum: ModeSpectrum
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = _frozen(self.amplitudes)
        d = self.spectrum.dim
        if amps.shape != (d, d):
            raise DimensionMismatchError(
                f"amplitude table has shape {amps.shape}, expected {(d, d)}"
            )
        if not np.all(np.isfinite(amps)):
            raise DomainError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_terms(
        cls,
        terms: Mapping[tuple[int, int], complex],
        spectrum: ModeSpectrum | None = None,
        normalized: bool = True,
    ) -> "BipartitePureState":
        """Build a state from ``{(l_signal, l_idler): amplitude}``."""
        spectrum = spectrum or ModeSpectrum()
        table = np.zeros((spectrum.dim, spectrum.dim), dtype=complex)
        for (ls, li), amp in terms.items():
            table[spectrum.index(ls), spectrum.index(li)] += amp
        state = cls(spectrum, table)
        return normalize(state) if normalized else state

    def amplitude(self, l_signal: int, l_idler: int) -> complex:
        s = self.spectrum
        return complex(self.amplitudes[s.index(l_signal), s.index(l_idler)])

    def anti_diagonal(self) -> np.ndarray:
        """Amplitudes ``c[l, -l]`` in spectrum order of the signal mode ``l``."""
        return np.array([self.amplitude(l, -l) for l in self.spectrum.modes])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def density(self) -> "DensityOperator":
        v = self.vector()
        return DensityOperator(self.spectrum, np.outer(v, v.conj()))


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian operator on the two-photon space, ``d**2 x d**2``."""

    spectrum: ModeSpectrum
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = _frozen(self.matrix)
        n = self.spectrum.dim**2
        if mat.shape != (n, n):
            raise DimensionMismatchError(f"density matrix has shape {mat.shape}, expected {(n, n)}")
        if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
            raise DomainError("density matrix is not Hermitian")
        object.__setattr__(self, "matrix", mat)

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def is_physical(self, tol: float = POSITIVITY_TOL) -> bool:
        return abs(self.trace() - 1.0) < tol and bool(self.eigenvalues().min() >= -tol)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def reduced(self, keep: str = "signal") -> np.ndarray:
        """Partial trace, keeping ``"signal"`` or ``"idler"``."""
        d = self.spectrum.dim
        t = self.matrix.reshape(d, d, d, d)
        if keep == "signal":
            return np.einsum("ijkj->ik", t)
        if keep == "idler":
            return np.einsum("ijil->jl", t)
        raise DomainError(f"keep must be 'signal' or 'idler', got {keep!r}")


@dataclass(frozen=True)
class EntanglementReport:
    schmidt_coeffs: np.ndarray
    entropy_nats: float
    fidelity_max_ent: float
    # SVD factors: amplitudes == signal_basis @ diag(schmidt_coeffs) @ idler_basis
    signal_basis: np.ndarray = field(repr=False)
    idler_basis: np.ndarray = field(repr=False)

    def reconstruct(self) -> np.ndarray:
        return self.signal_basis @ np.diag(self.schmidt_coeffs) @ self.idler_basis


def normalize(state: BipartitePureState) -> BipartitePureState:
    norm = state.norm()
    if not norm > 1e-300:
        raise ZeroNormError(f"cannot normalize a state of norm {norm!r}")
    return BipartitePureState(state.spectrum, state.amplitudes / norm)


def make_paper_state(variant: str = "before_plate", spectrum: ModeSpectrum | None = None) -> BipartitePureState:
    """Measured qutrit pair state before or after the plate, with real amplitudes.

    Parameters
    ----------
    variant : {"before_plate", "after_plate"}
    spectrum : ModeSpectrum, optional
        Larger cutoffs embed the same three terms; default ``l_max = 1``.
    """
    try:
        terms = PAPER_COEFFICIENTS[variant]
    except KeyError:
        raise DomainError(f"unknown state variant {variant!r}") from None
    return BipartitePureState.from_terms(terms, spectrum)


def maximally_entangled(spectrum: ModeSpectrum | None = None) -> BipartitePureState:
    """``sum_l |l, -l> / sqrt(d)``, the OAM-conserving maximally entangled state."""
    spectrum = spectrum or ModeSpectrum()
    return BipartitePureState.from_terms({(l, -l): 1.0 for l in spectrum.modes}, spectrum)


def schmidt_decompose(state: BipartitePureState) -> EntanglementReport:
    u, s, vh = np.linalg.svd(state.amplitudes)
    p = s**2
    p = p[p > 0]
    entropy = float(-np.sum(p * np.log(p)))
    target = maximally_entangled(state.spectrum).vector()
    fidelity = float(abs(np.vdot(target, state.vector())) ** 2)
    return EntanglementReport(
        schmidt_coeffs=s,
        entropy_nats=max(entropy, 0.0),
        fidelity_max_ent=min(fidelity, 1.0),
        signal_basis=u,
        idler_basis=vh,
    )


def mix_with_white_noise(state: BipartitePureState, epsilon: float) -> DensityOperator:
    """``(1 - eps) |psi><psi| + eps * I / d**2``."""
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    n = state.spectrum.dim**2
    rho = (1.0 - epsilon) * state.density().matrix + epsilon * np.eye(n) / n
    return DensityOperator(state.spectrum, rho)
