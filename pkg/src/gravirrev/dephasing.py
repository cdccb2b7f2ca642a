"""Random time-flow dephasing.

Each trajectory runs the energy-basis phases with a clock stretched by a
quenched random factor ``1 + delta``::

    c_n -> c_n exp(-i E_n (1 + delta) t / hbar)

Averaging the projectors over ``delta`` damps the coherence between levels
``m`` and ``n`` by the characteristic function of ``delta`` evaluated at
``omega_mn t``; populations never change.
"""
from dataclasses import dataclass

import numpy as np

from ._rng import substream
from .constants import HBAR
from .errors import DomainError, InvariantError
from .qstate import NORM_TOL, DensityMatrix, StateVector, vector_from_json

_CHUNK_ENTRIES = 1 << 22


@dataclass(frozen=True, eq=False)
class EnergySpectrum:
    energies: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        e = np.array(self.energies, dtype=float)
        c = np.array(self.amplitudes, dtype=complex)
        if e.ndim != 1 or e.shape != c.shape or e.size == 0:
            raise InvariantError("energies and amplitudes must be 1-d arrays of equal length")
        if not np.all(np.isfinite(e)):
            raise InvariantError("energies must be finite")
        norm2 = float(np.sum(np.abs(c) ** 2))
        if abs(norm2 - 1) > NORM_TOL:
            raise InvariantError(f"amplitudes not normalized: sum |c|^2 = {norm2!r}")
        e.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "amplitudes", c)

    @property
    def n(self):
        return self.energies.size

    def angular_gaps(self, hbar=HBAR):
        """Matrix of Bohr frequencies ``(E_m - E_n) / hbar``."""
        return (self.energies[:, None] - self.energies[None, :]) / hbar

    @classmethod
    def from_json(cls, obj):
        return cls(np.array(obj["energies_J"], dtype=float), vector_from_json(obj["amplitudes"]))

    def to_json(self):
        return {
            "energies_J": self.energies.tolist(),
            "amplitudes": {"re": self.amplitudes.real.tolist(), "im": self.amplitudes.imag.tolist()},
        }


@dataclass(frozen=True)
class DeltaDistribution:
    """Zero-mean clock noise with variance ``sigma**2``.

    ``uniform`` has support ``[-sigma*sqrt(3), sigma*sqrt(3)]``.
    """
    kind: str = "gaussian"
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform"):
            raise DomainError(f"unknown delta distribution {self.kind!r}")
        if not self.sigma >= 0:
            raise DomainError(f"sigma must be non-negative, got {self.sigma!r}")

    def draw(self, rng):
        if self.kind == "gaussian":
            return self.sigma * rng.standard_normal()
        half = self.sigma * np.sqrt(3.0)
        return rng.uniform(-half, half)

    def characteristic(self, x):
        """``E[exp(-i x delta)]``; real because the distribution is symmetric."""
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-0.5 * (self.sigma * x) ** 2)
        # np.sinc(y) = sin(pi y) / (pi y)
        return np.sinc(self.sigma * np.sqrt(3.0) * x / np.pi)


def phase_evolve(spec: EnergySpectrum, delta, t, hbar=HBAR) -> StateVector:
    phases = np.exp(-1j * spec.energies * (1.0 + delta) * t / hbar)
    return StateVector(spec.amplitudes * phases)


def draw_deltas(dist: DeltaDistribution, samples, seed):
    """One ``delta`` per trajectory, trajectory ``k`` drawn from substream ``(seed, k)``."""
    if samples < 1:
        raise DomainError(f"samples must be >= 1, got {samples!r}")
    return np.array([dist.draw(substream(seed, k)) for k in range(samples)])


@dataclass(frozen=True, eq=False)
class EnsembleEstimate:
    times: np.ndarray
    rho: list            # DensityMatrix per time
    std_error: np.ndarray  # (len(times), N, N) standard error of each complex entry
    samples: int


def ensemble_series(spec: EnergySpectrum, dist: DeltaDistribution, times, samples, seed,
                    hbar=HBAR) -> EnsembleEstimate:
    """Monte-Carlo averaged density matrices at several times from one delta ensemble."""
    deltas = draw_deltas(dist, samples, seed)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    omega = spec.angular_gaps(hbar)
    coh = np.outer(spec.amplitudes, spec.amplitudes.conj())
    n = spec.n
    chunk = max(1, _CHUNK_ENTRIES // (n * n))
    out, errs = [], []
    for t in times:
        acc = np.zeros((n, n), dtype=complex)
        for start in range(0, samples, chunk):
            d = deltas[start:start + chunk]
            # diagonal phases are exp(0) == 1 exactly, so populations are untouched
            acc += np.exp(-1j * omega[None, :, :] * ((1.0 + d)[:, None, None] * t)).sum(axis=0)
        mean_phase = acc / samples
        rho = coh * mean_phase
        np.fill_diagonal(rho, np.abs(spec.amplitudes) ** 2)
        # every trajectory value has modulus |c_m c_n|, so the variance is closed form
        if samples > 1:
            var = np.abs(coh) ** 2 * np.clip(1.0 - np.abs(mean_phase) ** 2, 0.0, None) * samples / (samples - 1)
            errs.append(np.sqrt(var / samples))
        else:
            errs.append(np.full((n, n), np.inf))
        out.append(DensityMatrix(rho))
    return EnsembleEstimate(times, out, np.array(errs), samples)


def ensemble_density(spec: EnergySpectrum, dist: DeltaDistribution, t, samples, seed,
                     hbar=HBAR) -> DensityMatrix:
    return ensemble_series(spec, dist, [t], samples, seed, hbar).rho[0]


def analytic_averaged_density(spec: EnergySpectrum, dist: DeltaDistribution, t,
                              hbar=HBAR) -> DensityMatrix:
    x = spec.angular_gaps(hbar) * t
    rho = np.outer(spec.amplitudes, spec.amplitudes.conj()) * np.exp(-1j * x) * dist.characteristic(x)
    np.fill_diagonal(rho, np.abs(spec.amplitudes) ** 2)
    return DensityMatrix(rho)
