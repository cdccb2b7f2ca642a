"""Double-commutator master equations and their noise unraveling.

The generator is::

    drho/dt = -(i/hbar) [H, rho] - c * sum_ij K_ij [Q_i, [Q_j, rho]]

with ``c = 1/(2 hbar^2)`` for a generic kernel (``eq3``) and ``c = 1/(2 hbar)``
when ``G`` sits inside the kernel and the ``Q_i`` are cell-mass operators
(``eq7``). Diagonalizing the PSD kernel, ``K = sum_a w_a v_a v_a^T``, puts the
dissipator in Lindblad form with Hermitian jump operators ``sum_i v_ai Q_i``,
which is what the integrator uses. :func:`dissipator` evaluates the double
commutator literally and serves as the cross-check.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import trapezoid

from .constants import HBAR
from .errors import ContractError, DomainError, InvariantError, NumericalError, ValidationError
from .kernel import Kernel, MassConfiguration, build_newton_kernel, newton_kernel_matrix, sample_noise
from .qstate import (DensityMatrix, HermitianOperator, StateVector, matrix_from_json, matrix_to_json,
                     projector, purity, vector_from_json)

CONVENTIONS = ("eq3", "eq7")
MAX_MAP_DIM = 4096
TRACE_BUDGET = 1e-9


@dataclass(frozen=True, eq=False)
class OpenSystem:
    hamiltonian: HermitianOperator
    couplings: tuple
    kernel: Kernel
    prefactor_convention: str = "eq7"
    hbar: float = HBAR
    _jumps: np.ndarray = field(init=False, repr=False)
    _jump_square: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.prefactor_convention not in CONVENTIONS:
            raise ContractError(f"prefactor_convention must be one of {CONVENTIONS}")
        if self.hamiltonian.units != "J":
            raise ContractError(f"Hamiltonian must carry unit tag 'J', got {self.hamiltonian.units!r}")
        couplings = tuple(self.couplings)
        object.__setattr__(self, "couplings", couplings)
        n = self.hamiltonian.n
        if len(couplings) != self.kernel.n:
            raise ContractError(f"{len(couplings)} couplings but kernel is {self.kernel.n}x{self.kernel.n}")
        units = {q.units for q in couplings}
        if len(units) > 1:
            raise ContractError(f"couplings carry mixed unit tags {sorted(units)}")
        if self.prefactor_convention == "eq7" and units and units != {"kg"}:
            raise ContractError("eq7 convention needs cell-mass couplings tagged 'kg'")
        if any(q.n != n for q in couplings):
            raise ContractError("couplings and Hamiltonian differ in dimension")

        w = np.clip(self.kernel.eigenvalues, 0.0, None)
        keep = w > 0
        q = np.array([c.entries for c in couplings]).reshape(len(couplings), n, n)
        v = self.kernel.eigenvectors[:, keep]
        jumps = np.einsum("ia,ikl->akl", v * np.sqrt(w[keep]), q) if keep.any() else np.zeros((0, n, n))
        object.__setattr__(self, "_jumps", jumps)
        object.__setattr__(self, "_jump_square", np.einsum("akl,alm->km", jumps, jumps))

    @property
    def n(self):
        return self.hamiltonian.n

    @property
    def prefactor(self):
        return 1.0 / (2.0 * self.hbar**2) if self.prefactor_convention == "eq3" else 1.0 / (2.0 * self.hbar)

    def rhs(self, rho):
        """Generator applied to a matrix or a stack of matrices ``(..., n, n)``."""
        h = self.hamiltonian.entries
        out = (-1j / self.hbar) * (h @ rho - rho @ h)
        if self._jumps.shape[0]:
            m = self._jump_square
            sandwich = np.sum(self._jumps @ np.expand_dims(rho, -3) @ self._jumps, axis=-3)
            out = out - self.prefactor * (m @ rho + rho @ m - 2.0 * sandwich)
        return out

    def liouvillian(self):
        """Generator as an ``n^2 x n^2`` matrix on row-major ``vec(rho)``."""
        n = self.n
        basis = np.eye(n * n, dtype=complex).reshape(n * n, n, n)
        return self.rhs(basis).reshape(n * n, n * n).T


def dissipator(rho, sys: OpenSystem):
    """``-c * sum_ij K_ij [Q_i, [Q_j, rho]]`` evaluated term by term."""
    r = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if r.shape != (sys.n, sys.n):
        raise ContractError(f"state of shape {r.shape} does not fit a {sys.n}-level system")
    q = [c.entries for c in sys.couplings]
    inner = np.array([qj @ r - r @ qj for qj in q]).reshape(len(q), sys.n, sys.n)
    out = np.zeros_like(r)
    for i, qi in enumerate(q):
        b = np.tensordot(sys.kernel.matrix[i], inner, axes=1)
        out += qi @ b - b @ qi
    return -sys.prefactor * out


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    times: np.ndarray
    states: list
    trace_drift: np.ndarray
    hermiticity_drift: np.ndarray
    min_eigenvalue: np.ndarray
    purity: np.ndarray
    energy: np.ndarray
    system: OpenSystem = field(repr=False)

    def entry(self, m, n):
        return np.array([s.entries[m, n] for s in self.states])

    def as_array(self):
        return np.array([s.entries for s in self.states])


def _as_density(rho0):
    if isinstance(rho0, DensityMatrix):
        return rho0
    if isinstance(rho0, StateVector):
        return projector(rho0)
    arr = np.asarray(rho0)
    return projector(StateVector(arr)) if arr.ndim == 1 else DensityMatrix(arr)


def _rk4_step(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _step_count(t_final, dt):
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    if t_final < 0:
        raise DomainError(f"t_final must be non-negative, got {t_final!r}")
    steps = int(round(t_final / dt))
    if steps * dt != t_final and abs(steps * dt - t_final) > 1e-9 * t_final:
        steps = int(math.ceil(t_final / dt))
    return steps, (t_final / steps if steps else dt)


def evolve(rho0, sys: OpenSystem, t_final, dt, trace_budget=TRACE_BUDGET) -> EvolutionResult:
    """Fixed-step RK4 integration with per-step diagnostics.

    If ``t_final`` is not a multiple of ``dt`` the step is shortened so that
    the last sample lands on ``t_final``. Each step is followed by Hermitian
    symmetrization; the discarded anti-Hermitian part is logged.
    """
    rho = _as_density(rho0)
    if rho.n != sys.n:
        raise ContractError(f"initial state has dimension {rho.n}, system has {sys.n}")
    steps, h = _step_count(t_final, dt)
    ham = sys.hamiltonian.entries

    times = np.arange(steps + 1) * h
    states = [rho]
    trace_drift = [abs(np.trace(rho.entries) - 1.0)]
    herm = [0.0]
    min_eig = [rho.min_eigenvalue]
    pur = [purity(rho)]
    energy = [float(np.real(np.trace(ham @ rho.entries)))]

    r = rho.entries.copy()
    for k in range(1, steps + 1):
        r = _rk4_step(sys.rhs, r, h)
        anti = 0.5 * (r - r.conj().T)
        r = r - anti
        try:
            state = DensityMatrix(r, trace_tol=trace_budget)
        except InvariantError as exc:
            raise NumericalError(
                f"integration became unstable at step {k} (t={k * h:.6g} s): {exc}; "
                f"retry with a smaller dt than {h:.6g} s") from exc
        states.append(state)
        trace_drift.append(abs(np.trace(r) - 1.0))
        herm.append(float(np.max(np.abs(anti))))
        min_eig.append(state.min_eigenvalue)
        pur.append(purity(state))
        energy.append(float(np.real(np.trace(ham @ r))))

    return EvolutionResult(times, states, np.array(trace_drift), np.array(herm), np.array(min_eig),
                           np.array(pur), np.array(energy), sys)


def fit_decay_rate(times, values, window=(0.05, 0.8)):
    """Exponential decay rate of ``|values|`` by log-linear least squares.

    Only samples with ``|v| / |v(0)|`` inside ``window`` are used.
    """
    mag = np.abs(np.asarray(values))
    rel = mag / mag[0]
    sel = (rel >= window[0]) & (rel <= window[1])
    if sel.sum() < 3:
        raise NumericalError("fewer than 3 samples inside the fit window; lengthen the run")
    slope, _ = np.polyfit(np.asarray(times)[sel], np.log(mag[sel]), 1)
    return -slope


def pointer_decay_rates(sys: OpenSystem):
    """Closed-form off-diagonal decay rates for mutually diagonal couplings.

    ``Lambda_kl = c * sum_ij K_ij (q_i^k - q_i^l)(q_j^k - q_j^l)``.
    """
    q = np.array([np.real(np.diag(c.entries)) for c in sys.couplings])   # (cells, n)
    dq = q[:, :, None] - q[:, None, :]
    return sys.prefactor * np.einsum("ij,ikl,jkl->kl", sys.kernel.matrix, dq, dq)


@dataclass(frozen=True, eq=False)
class SuperscatteringMap:
    """Linear map on density matrices, ``vec(rho_out) = matrix @ vec(rho_in)``.

    ``vec`` is row-major: entry ``(m, n)`` sits at index ``m * N + n``.
    """
    matrix: np.ndarray
    n: int
    t: float

    def apply(self, rho):
        r = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
        return (self.matrix @ r.reshape(-1)).reshape(self.n, self.n)

    def compose(self, other):
        return SuperscatteringMap(self.matrix @ other.matrix, self.n, self.t + other.t)

    def choi(self):
        n = self.n
        # matrix[(i, j), (m, n)] -> choi[(m, i), (n, j)]
        return self.matrix.reshape(n, n, n, n).transpose(2, 0, 3, 1).reshape(n * n, n * n)

    def choi_min_eigenvalue(self):
        c = self.choi()
        return float(np.linalg.eigvalsh(0.5 * (c + c.conj().T))[0])

    def trace_preservation_error(self):
        """Max deviation of ``tr(map(|m><n|))`` from ``delta_mn``."""
        n = self.n
        traces = np.trace(self.matrix.reshape(n, n, n, n), axis1=0, axis2=1)
        return float(np.max(np.abs(traces - np.eye(n))))

    def to_json(self):
        return {"n": self.n, "t_s": self.t, "ordering": "row-major (m,n) -> m*N+n",
                **{k: v for k, v in matrix_to_json(self.matrix).items() if k != "n"}}


def superscattering_map(sys: OpenSystem, t, dt=None) -> SuperscatteringMap:
    """Propagate every basis matrix ``|m><n|`` with the RK4 scheme of :func:`evolve`.

    The RK4 step is linear, so evolving all ``N^2`` basis elements at once is
    a power of the one-step transfer matrix. Without ``dt`` the step is chosen
    so that ``dt * ||L|| <= 0.01``.
    """
    n = sys.n
    if n * n > MAX_MAP_DIM:
        raise DomainError(f"map dimension {n * n} exceeds cap {MAX_MAP_DIM}")
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        return SuperscatteringMap(np.eye(n * n, dtype=complex), n, 0.0)
    L = sys.liouvillian()
    if dt is None:
        norm = np.linalg.norm(L, 2)
        steps = max(1, int(math.ceil(t * norm / 0.01)))
        h = t / steps
    else:
        steps, h = _step_count(t, dt)
    a = h * L
    a2 = a @ a
    one_step = np.eye(n * n) + a + a2 / 2 + (a2 @ a) / 6 + (a2 @ a2) / 24
    return SuperscatteringMap(np.linalg.matrix_power(one_step, steps), n, float(t))


@dataclass(frozen=True, eq=False)
class UnravelingResult:
    rho: DensityMatrix
    std_error: np.ndarray       # standard error of each complex entry
    final_states: np.ndarray    # (trajectories, n)
    trajectory_purity: np.ndarray


def _run_trajectory(psi0, sys, dt, steps, seed, index):
    noise = sample_noise(sys.kernel, True, dt, steps, seed, index=index, hbar=sys.hbar)
    q = np.array([c.entries for c in sys.couplings])
    gens = sys.hamiltonian.entries * dt + np.einsum("si,ikl->skl", noise.increments, q)
    lam, vec = np.linalg.eigh(gens)
    phases = np.exp(-1j * lam / sys.hbar)
    psi = psi0.copy()
    for s in range(steps):
        v = vec[s]
        psi = v @ (phases[s] * (v.conj().T @ psi))
    return psi


def unravel(psi0, sys: OpenSystem, dt, steps, trajectories, seed, workers=1) -> UnravelingResult:
    """Average of pure trajectories driven by correlated Newton-potential noise.

    Each step applies ``exp(-(i/hbar)(H dt + sum_i Q_i W_i))`` with impulses
    ``W`` from :func:`~gravirrev.kernel.sample_noise`; trajectory ``k`` uses
    substream ``(seed, k)``. Results do not depend on ``workers``.
    """
    if sys.prefactor_convention != "eq7":
        raise ContractError("unraveling is defined for the eq7 convention")
    if trajectories < 1 or steps < 0:
        raise DomainError("need trajectories >= 1 and steps >= 0")
    psi0 = psi0 if isinstance(psi0, StateVector) else StateVector(psi0)
    if psi0.n != sys.n:
        raise ContractError("initial state dimension does not match system")
    amp = psi0.amplitudes

    def run(k):
        return _run_trajectory(amp, sys, dt, steps, seed, k)

    if workers > 1 and trajectories > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            finals = list(pool.map(run, range(trajectories)))
    else:
        finals = [run(k) for k in range(trajectories)]
    psi = np.array(finals)

    norms = np.sum(np.abs(psi) ** 2, axis=1)
    mean = np.einsum("ki,kj->ij", psi, psi.conj()) / trajectories
    second = np.einsum("ki,kj->ij", np.abs(psi) ** 2, np.abs(psi) ** 2) / trajectories
    if trajectories > 1:
        var = np.clip(second - np.abs(mean) ** 2, 0.0, None) * trajectories / (trajectories - 1)
        se = np.sqrt(var / trajectories)
    else:
        se = np.full(mean.shape, np.inf)
    return UnravelingResult(DensityMatrix(0.5 * (mean + mean.conj().T)), se, psi, norms**2)


def unraveled_evolve(psi0, sys: OpenSystem, dt, steps, trajectories, seed, workers=1) -> DensityMatrix:
    return unravel(psi0, sys, dt, steps, trajectories, seed, workers).rho


def union_lattice(a: MassConfiguration, b: MassConfiguration):
    """Positions of all cells in ``a`` or ``b`` plus both mass vectors on them."""
    index = {}
    positions = []
    for p in list(a.positions) + list(b.positions):
        key = tuple(float(x) for x in p)
        if key not in index:
            index[key] = len(positions)
            positions.append(key)
    ma = np.zeros(len(positions))
    mb = np.zeros(len(positions))
    for cfg, m in ((a, ma), (b, mb)):
        for p, mass in zip(cfg.positions, cfg.masses):
            m[index[tuple(float(x) for x in p)]] += mass
    return np.array(positions), ma, mb


def cat_decay_rate(a: MassConfiguration, b: MassConfiguration, sigma_reg, hbar=HBAR) -> float:
    """Decoherence rate of ``(|a> + |b>)/sqrt(2)``: ``dm^T K dm / (2 hbar)``."""
    if not sigma_reg > 0:
        raise DomainError(f"sigma_reg must be positive, got {sigma_reg!r}")
    pos, ma, mb = union_lattice(a, b)
    dm = ma - mb
    if not np.any(dm):
        return 0.0
    k = newton_kernel_matrix(pos, sigma_reg)
    return max(0.0, float(dm @ k @ dm) / (2.0 * hbar))


def cat_system(a: MassConfiguration, b: MassConfiguration, sigma_reg, hbar=HBAR) -> OpenSystem:
    """Two-state system ``{|a>, |b>}`` with one mass coupling per union cell and ``H = 0``."""
    pos, ma, mb = union_lattice(a, b)
    kernel = Kernel(newton_kernel_matrix(pos, sigma_reg), "newton", float(sigma_reg))
    couplings = [HermitianOperator(np.diag([x, y]).astype(complex), "kg") for x, y in zip(ma, mb)]
    return OpenSystem(HermitianOperator(np.zeros((2, 2)), "J"), couplings, kernel, "eq7", hbar)


def lattice_particle_system(positions, mass, sigma_reg, hopping=0.0, onsite=None, hbar=HBAR) -> OpenSystem:
    """Single particle of ``mass`` hopping along a chain of cells.

    ``H = -hopping * sum_i (|i><i+1| + h.c.) + diag(onsite)`` and the coupling
    for cell ``i`` is ``mass |i><i|``.
    """
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    n = positions.shape[0]
    h = np.zeros((n, n), dtype=complex)
    idx = np.arange(n - 1)
    h[idx, idx + 1] = -hopping
    h[idx + 1, idx] = -hopping
    if onsite is not None:
        h += np.diag(np.asarray(onsite, dtype=float))
    couplings = []
    for i in range(n):
        q = np.zeros((n, n), dtype=complex)
        q[i, i] = mass
        couplings.append(HermitianOperator(q, "kg"))
    kernel = build_newton_kernel(MassConfiguration(positions, np.full(n, mass)), sigma_reg)
    return OpenSystem(HermitianOperator(h, "J"), couplings, kernel, "eq7", hbar)


@dataclass(frozen=True, eq=False)
class HeatingRate:
    slope: float                  # J/s, least squares on <H>(t)
    instantaneous: np.ndarray     # J/s at every sample
    time_average: float           # J/s, trapezoidal mean of ``instantaneous``


def heating_rate(result: EvolutionResult) -> HeatingRate:
    """Energy drift caused by the dissipator.

    The unitary part conserves ``<H>``, so ``d<H>/dt = tr(H D[rho])``.
    """
    if len(result.times) < 10:
        raise DomainError("heating_rate needs at least 10 samples of <H>")
    sys = result.system
    h = sys.hamiltonian.entries
    inst = np.array([np.real(np.trace(h @ dissipator(s, sys))) for s in result.states])
    slope = np.polyfit(result.times, result.energy, 1)[0]
    span = result.times[-1] - result.times[0]
    avg = trapezoid(inst, result.times) / span
    return HeatingRate(float(slope), inst, float(avg))


def system_from_json(obj) -> tuple:
    """Parse a system file into ``(OpenSystem, initial state or None)``.

    The kernel is either given explicitly under ``"kernel"`` or built from a
    mass configuration under ``"newton": {"config": ..., "sigma_reg_m": ...}``.
    """
    try:
        hbar = float(obj.get("hbar_Js", HBAR))
        ham = HermitianOperator(matrix_from_json(obj["hamiltonian"]), "J")
        unit = obj.get("coupling_units", "kg")
        couplings = [HermitianOperator(matrix_from_json(c), unit) for c in obj["couplings"]]
        if "kernel" in obj:
            kernel = Kernel.from_json(obj["kernel"])
        elif "newton" in obj:
            cfg = MassConfiguration.from_json(obj["newton"]["config"])
            kernel = build_newton_kernel(cfg, float(obj["newton"]["sigma_reg_m"]))
        else:
            raise ValidationError("system needs a 'kernel' or 'newton' entry")
        sys = OpenSystem(ham, couplings, kernel, obj.get("convention", "eq7"), hbar)
        init = None
        if "initial_state" in obj:
            init = StateVector(vector_from_json(obj["initial_state"]))
        elif "initial_density" in obj:
            init = DensityMatrix(matrix_from_json(obj["initial_density"]))
    except KeyError as exc:
        raise ValidationError(f"system file is missing field {exc}") from exc
    return sys, init


def system_to_json(sys: OpenSystem, initial=None):
    obj = {
        "convention": sys.prefactor_convention,
        "hbar_Js": sys.hbar,
        "hamiltonian": matrix_to_json(sys.hamiltonian.entries),
        "coupling_units": sys.couplings[0].units if sys.couplings else "kg",
        "couplings": [matrix_to_json(q.entries) for q in sys.couplings],
        "kernel": sys.kernel.to_json(),
    }
    if isinstance(initial, StateVector):
        obj["initial_state"] = {"re": initial.amplitudes.real.tolist(), "im": initial.amplitudes.imag.tolist()}
    elif isinstance(initial, DensityMatrix):
        obj["initial_density"] = matrix_to_json(initial.entries)
    return obj
