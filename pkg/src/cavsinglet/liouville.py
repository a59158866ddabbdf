"""Dense Liouvillian machinery: vectorization, steady states, spectra,
fixed-step time evolution and fidelities.

Vectorization is column-stacking throughout: ``vec(rho) =
rho.reshape(-1, order="F")`` and the superoperator of ``A rho B`` is
``kron(B.T, A)``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateSteadyStateError,
    DimensionMismatchError,
    NumericalInstabilityError,
    StepSizeError,
)
from .hilbert import StateVector, named_state
from .model import MasterEquation


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape((dim, dim), order="F")


@dataclass(frozen=True)
class LiouvillianMatrix:
    """dim^2 x dim^2 generator acting on column-stacked density matrices."""

    space: object
    mat: np.ndarray

    @property
    def dim(self) -> int:
        return self.space.dim


def apply_generator(me: MasterEquation, rho: np.ndarray) -> np.ndarray:
    """Direct evaluation of -i[H, rho] plus the dissipators.

    Kept as an independent oracle for the vectorized generator.
    """
    h = me.H.mat
    out = -1j * (h @ rho - rho @ h)
    for op in me.lindblads.values():
        l = op.mat
        ldl = l.conj().T @ l
        out += l @ rho @ l.conj().T - 0.5 * (ldl @ rho + rho @ ldl)
    return out


def vectorize(me: MasterEquation) -> LiouvillianMatrix:
    """Column-stacking superoperator of the master equation."""
    h = me.H.mat
    d = h.shape[0]
    eye = np.eye(d)
    mat = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for op in me.lindblads.values():
        l = op.mat
        ldl = l.conj().T @ l
        mat += np.kron(l.conj(), l)
        mat -= 0.5 * (np.kron(eye, ldl) + np.kron(ldl.T, eye))
    return LiouvillianMatrix(space=me.space, mat=mat)


@dataclass(frozen=True)
class SpectrumReport:
    """Liouvillian eigenvalues sorted by |Re| ascending, with the gap."""

    eigenvalues: np.ndarray
    gap: float
    steady_dim: int
    degeneracy_tol: float

    def to_json(self) -> str:
        return json.dumps({
            "gap": self.gap,
            "steady_dim": self.steady_dim,
            "degeneracy_tol": self.degeneracy_tol,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
        })


def spectral_gap(lv: LiouvillianMatrix, degeneracy_tol: float | None = None) -> SpectrumReport:
    """Smallest nonzero |Re| eigenvalue of the generator.

    Raises ``DegenerateSteadyStateError`` when every eigenvalue sits below
    the degeneracy tolerance (gap undefined).
    """
    try:
        eigs = scipy.linalg.eigvals(lv.mat)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - defensive
        cond = np.linalg.cond(lv.mat)
        raise NumericalInstabilityError(
            f"eigendecomposition failed (cond ~ {cond:.2e}): {exc}"
        ) from exc
    re = np.abs(eigs.real)
    if degeneracy_tol is None:
        degeneracy_tol = 1e-9 * (re.max() if re.max() > 0 else 1.0)
    order = np.argsort(re, kind="stable")
    eigs = eigs[order]
    re = re[order]
    steady_dim = int((re <= degeneracy_tol).sum())
    decaying = re[re > degeneracy_tol]
    if decaying.size == 0:
        raise DegenerateSteadyStateError(
            steady_dim, f"gap undefined: all {steady_dim} eigenvalues within tolerance"
        )
    return SpectrumReport(
        eigenvalues=eigs,
        gap=float(decaying.min()),
        steady_dim=steady_dim,
        degeneracy_tol=float(degeneracy_tol),
    )


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, (numerically) positive state."""

    space: object
    mat: np.ndarray

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-10,
                 pos_tol: float = 1e-8) -> "DensityMatrix":
        scale = max(float(np.abs(self.mat).max()), 1e-300)
        if float(np.abs(self.mat - self.mat.conj().T).max()) > herm_tol * max(scale, 1.0):
            raise NumericalInstabilityError("density matrix is not Hermitian")
        if abs(np.trace(self.mat) - 1.0) > trace_tol:
            raise NumericalInstabilityError("density matrix trace differs from 1")
        w = np.linalg.eigvalsh(0.5 * (self.mat + self.mat.conj().T))
        if w.min() < -pos_tol:
            raise NumericalInstabilityError(
                f"density matrix has negative eigenvalue {w.min():.3e}"
            )
        return self

    @classmethod
    def pure(cls, state: StateVector) -> "DensityMatrix":
        return cls(state.space, np.outer(state.vec, state.vec.conj()))

    @classmethod
    def mixture(cls, states: list[StateVector], weights=None) -> "DensityMatrix":
        if weights is None:
            weights = [1.0 / len(states)] * len(states)
        mat = sum(w * np.outer(s.vec, s.vec.conj()) for w, s in zip(weights, states))
        return cls(states[0].space, mat)


def _is_ground_basis(space) -> bool:
    return all(isinstance(lb, str) for lb in space.labels)


def ground_state_vectors(space) -> dict[str, np.ndarray]:
    """Unit vectors of the four zero-photon ground combinations."""
    names = ("00", "T", "11", "S")
    if _is_ground_basis(space):
        out = {}
        for name in names:
            v = np.zeros(space.dim, dtype=complex)
            v[space.labels.index(name)] = 1.0
            out[name] = v
        return out
    return {name: named_state(space, name, photon=0).vec for name in names}


def mixed_ground_state(space) -> DensityMatrix:
    """Equal classical mixture of 00, T, 11 and S (the standard start)."""
    vectors = ground_state_vectors(space)
    mat = sum(np.outer(v, v.conj()) for v in vectors.values()) / 4.0
    return DensityMatrix(space, mat)


def steady_state(
    lv: LiouvillianMatrix, degeneracy_tol: float | None = None
) -> DensityMatrix:
    """Unique stationary state from the null space of the generator.

    The stationary manifold dimension is taken from the spectrum; the state
    itself comes from an SVD null vector, Hermitized and trace-normalized.
    """
    report = spectral_gap(lv, degeneracy_tol)
    if report.steady_dim != 1:
        raise DegenerateSteadyStateError(report.steady_dim)
    _, svals, vh = scipy.linalg.svd(lv.mat)
    if svals[-1] > 1e-10 * svals[0]:
        raise NumericalInstabilityError(
            f"no numeric null vector: smallest singular value {svals[-1]:.3e}"
        )
    rho = unvec(vh[-1].conj(), lv.dim)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr) < 1e-14:
        raise NumericalInstabilityError("null vector is traceless")
    rho = rho / tr
    w = np.linalg.eigvalsh(rho)
    if w.min() < -1e-6:
        raise NumericalInstabilityError(
            f"steady state has negative eigenvalue {w.min():.3e}"
        )
    return DensityMatrix(lv.space, rho)


@dataclass(frozen=True)
class Trajectory:
    """Sampled density-matrix evolution."""

    space: object
    times: np.ndarray
    states: np.ndarray  # (n_samples, dim, dim)
    dt: float

    def final(self) -> DensityMatrix:
        return DensityMatrix(self.space, self.states[-1])

    def populations(self) -> dict[str, np.ndarray]:
        """Ground populations, total excited population and singlet fidelity."""
        vectors = ground_state_vectors(self.space)
        out: dict[str, np.ndarray] = {"t": self.times}
        total = np.zeros(len(self.times))
        for name, v in vectors.items():
            p = np.einsum("i,nij,j->n", v.conj(), self.states, v).real
            out[f"P_{name}"] = p
            total += p
        out["P_excited_total"] = np.einsum("nii->n", self.states).real - total
        out["fidelity"] = out["P_S"]
        return out


def propagate(
    me: MasterEquation,
    rho0: DensityMatrix,
    t_final: float,
    dt: float,
    store_every: int | None = None,
    max_halvings: int = 8,
) -> Trajectory:
    """Fixed-step 4th-order Runge-Kutta on the vectorized master equation.

    The step is halved (and the run restarted) until the trace drift stays
    within 1e-8; if the drift still exceeds 1e-6 after ``max_halvings``
    restarts a ``StepSizeError`` is raised.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if rho0.space != me.space:
        raise DimensionMismatchError("initial state lives on a different space")
    lv = vectorize(me)
    d = me.dim
    if t_final == 0:
        return Trajectory(me.space, np.array([0.0]),
                          rho0.mat[np.newaxis].copy(), dt)

    mat = lv.mat
    drift = math.inf
    for attempt in range(max_halvings + 1):
        n_steps = max(1, math.ceil(t_final / dt - 1e-12))
        h = t_final / n_steps
        if store_every is None:
            stride = max(1, n_steps // 1000)
        else:
            stride = max(1, int(store_every))
        v = vec(rho0.mat)
        times = [0.0]
        samples = [v.copy()]
        drift = 0.0
        diverged = False
        for step in range(1, n_steps + 1):
            k1 = mat @ v
            k2 = mat @ (v + 0.5 * h * k1)
            k3 = mat @ (v + 0.5 * h * k2)
            k4 = mat @ (v + h * k3)
            v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if step % stride == 0 or step == n_steps:
                tr = v[:: d + 1].sum()
                drift = max(drift, abs(tr - 1.0))
                amp = np.abs(v).max()
                # the Runge-Kutta update preserves the trace even when it
                # diverges, so instability shows up in the amplitudes
                if not np.isfinite(amp) or amp > 10.0 or drift > 0.5:
                    diverged = True
                    break
                times.append(step * h)
                samples.append(v.copy())
        if not diverged and drift <= 1e-8:
            states = np.array([unvec(s, d) for s in samples])
            return Trajectory(me.space, np.array(times), states, h)
        dt = dt / 2.0
    if diverged or drift > 1e-6:
        raise StepSizeError(
            f"integration {'diverged' if diverged else 'drifted'} "
            f"(trace drift {drift:.3e}) after {max_halvings} halvings "
            f"(dt = {dt:.3e})"
        )
    warnings.warn(
        f"trace drift {drift:.3e} above 1e-8 target after {max_halvings} halvings",
        stacklevel=2,
    )
    states = np.array([unvec(s, d) for s in samples])
    return Trajectory(me.space, np.array(times), states, h)


def fidelity(rho: DensityMatrix, psi: StateVector) -> float:
    """<psi| rho |psi>, clamped to [0, 1]."""
    if rho.space != psi.space:
        raise DimensionMismatchError("state and density matrix spaces differ")
    value = complex(psi.vec.conj() @ (rho.mat @ psi.vec))
    if abs(value.imag) > 1e-10:
        warnings.warn(
            f"fidelity has imaginary part {value.imag:.3e}", stacklevel=2
        )
    return float(min(1.0, max(0.0, value.real)))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    w = np.linalg.eigvalsh(a.mat - b.mat)
    return 0.5 * float(np.abs(w).sum())


def evolve_spectral(lv: LiouvillianMatrix, rho0: DensityMatrix, times) -> np.ndarray:
    """States at arbitrary times via the eigendecomposition of the generator.

    Diagnostic path (convergence-time measurements); trajectory commands use
    the Runge-Kutta integrator.
    """
    evals, evecs = scipy.linalg.eig(lv.mat)
    coeff = np.linalg.solve(evecs, vec(rho0.mat))
    times = np.asarray(times, dtype=float)
    out = np.empty((len(times), lv.dim, lv.dim), dtype=complex)
    for i, t in enumerate(times):
        v = evecs @ (coeff * np.exp(evals * t))
        out[i] = unvec(v, lv.dim)
    return out


def time_to_convergence(
    lv: LiouvillianMatrix,
    rho0: DensityMatrix,
    rho_ss: DensityMatrix,
    threshold: float = 0.01,
    gap_hint: float | None = None,
) -> float:
    """First time with trace distance to the steady state <= threshold."""
    if gap_hint is None:
        gap_hint = spectral_gap(lv).gap
    t_hi = 30.0 / gap_hint
    grid = np.geomspace(t_hi * 1e-4, t_hi, 160)
    states = evolve_spectral(lv, rho0, grid)
    dists = [
        trace_distance(DensityMatrix(lv.space, s), rho_ss) for s in states
    ]
    for i, dist in enumerate(dists):
        if dist <= threshold:
            lo = 0.0 if i == 0 else grid[i - 1]
            hi = grid[i]
            for _ in range(40):
                mid = 0.5 * (lo + hi)
                s = evolve_spectral(lv, rho0, [mid])[0]
                if trace_distance(DensityMatrix(lv.space, s), rho_ss) <= threshold:
                    hi = mid
                else:
                    lo = mid
                if hi - lo <= 1e-3 * hi:
                    break
            return float(hi)
    raise NumericalInstabilityError(
        f"no convergence to trace distance {threshold} within t = {t_hi:.3e}"
    )


def trajectory_csv_rows(traj: Trajectory) -> tuple[list[str], list[list[float]]]:
    """Header and rows for the standard trajectory CSV layout."""
    pops = traj.populations()
    header = ["t", "P_00", "P_T", "P_11", "P_S", "P_excited_total", "fidelity"]
    rows = [
        [float(pops[c][i]) for c in header] for i in range(len(traj.times))
    ]
    return header, rows
