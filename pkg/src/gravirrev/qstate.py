"""Finite-dimensional quantum state containers.

All containers are immutable and validate on construction. Tolerances are
module-level constants and can be overridden per instance, e.g. to accept the
accumulated drift of a long integration while still recording it.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantError

NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
MIN_EIG_TOL = 1e-8


def _frozen_array(values, dtype=complex):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    tol: float = NORM_TOL

    def __post_init__(self):
        amp = _frozen_array(self.amplitudes)
        if amp.ndim != 1 or amp.size == 0:
            raise InvariantError("state vector must be a non-empty 1-d array")
        if not np.all(np.isfinite(amp)):
            raise InvariantError("state vector has non-finite entries")
        norm2 = float(np.vdot(amp, amp).real)
        if abs(norm2 - 1.0) > self.tol:
            raise InvariantError(f"state vector not normalized: sum |c|^2 = {norm2!r}")
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def normalized(cls, values):
        v = np.asarray(values, dtype=complex)
        return cls(v / np.linalg.norm(v))

    @property
    def n(self):
        return self.amplitudes.size


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray
    hermitian_tol: float = HERMITIAN_TOL
    trace_tol: float = TRACE_TOL
    min_eig_tol: float = MIN_EIG_TOL
    min_eigenvalue: float = field(init=False)

    def __post_init__(self):
        rho = _frozen_array(self.entries)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] == 0:
            raise InvariantError(f"density matrix must be square, got shape {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise InvariantError("density matrix has non-finite entries")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > self.hermitian_tol:
            raise InvariantError(f"density matrix not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(rho)
        if abs(tr - 1.0) > self.trace_tol:
            raise InvariantError(f"density matrix trace {tr!r} differs from 1")
        lam = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
        if lam < -self.min_eig_tol:
            raise InvariantError(f"density matrix has negative eigenvalue {lam:.3e}")
        object.__setattr__(self, "entries", rho)
        object.__setattr__(self, "min_eigenvalue", lam)

    @property
    def n(self):
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    entries: np.ndarray
    units: str = "dimensionless"
    tol: float = HERMITIAN_TOL

    def __post_init__(self):
        op = _frozen_array(self.entries)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise InvariantError(f"operator must be square, got shape {op.shape}")
        scale = float(np.max(np.abs(op), initial=0.0))
        dev = float(np.max(np.abs(op - op.conj().T), initial=0.0))
        # Relative to the largest entry: SI Hamiltonians sit near 1e-34 J.
        if dev > self.tol * scale:
            raise InvariantError(f"operator not Hermitian (max deviation {dev:.3e})")
        object.__setattr__(self, "entries", op)

    @property
    def n(self):
        return self.entries.shape[0]


def projector(state: StateVector) -> DensityMatrix:
    """Rank-1 density matrix ``|psi><psi|``."""
    if not isinstance(state, StateVector):
        state = StateVector(state)
    psi = state.amplitudes
    return DensityMatrix(np.outer(psi, psi.conj()))


def purity(rho: DensityMatrix) -> float:
    """``tr(rho^2)``, between ``1/N`` and 1."""
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    # tr(rho rho) for Hermitian rho is the squared Frobenius norm.
    return float(np.sum(np.abs(m) ** 2))


def matrix_to_json(m):
    m = np.asarray(m, dtype=complex)
    return {"n": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(obj):
    m = np.array(obj["re"], dtype=float) + 1j * np.array(obj["im"], dtype=float)
    if "n" in obj and m.shape[0] != obj["n"]:
        raise InvariantError(f"declared n={obj['n']} but matrix has {m.shape[0]} rows")
    return m


def vector_to_json(v):
    v = np.asarray(v, dtype=complex)
    return {"re": v.real.tolist(), "im": v.imag.tolist()}


def vector_from_json(obj):
    return np.array(obj["re"], dtype=float) + 1j * np.array(obj.get("im", [0.0] * len(obj["re"])), dtype=float)
