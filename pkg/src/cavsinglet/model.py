"""Rotating-frame Hamiltonians and decay channels for two driven
three-level atoms in a lossy single-mode cavity.

All rates are angular frequencies in units of the mean atom-cavity coupling
``g`` (the presets set g = 1).  Each Hamiltonian term is assembled in the
full product space and projected onto the truncated basis afterwards, so
couplings between retained states are exact.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np

from .hilbert import HilbertSpace, OperatorMatrix, build_space

_PARAM_KEYS = (
    "g", "gamma", "kappa", "Omega", "Omega_MW", "Delta", "delta",
    "beta", "phi", "alpha", "b", "n_max",
)

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SystemParams:
    """Physical rates, detunings, phases and asymmetries of one model.

    Fields
    ------
    g : mean atom-cavity coupling rate (per-atom couplings g (1 +/- alpha))
    gamma : excited-state population decay rate
    kappa : cavity photon loss rate
    Omega : optical Rabi frequency of the 0 -> e drive
    Omega_MW : microwave/Raman Rabi frequency between the ground states
    Delta : optical drive detuning on the e levels
    delta : cavity detuning
    beta : microwave detuning (energy of level 1)
    phi : relative drive phase between the atoms, stored in [0, 2 pi)
    alpha : relative coupling asymmetry, |alpha| < 1
    b : antisymmetric shift of level 1 (+b on atom 1, -b on atom 2)
    n_max : highest cavity Fock state of the associated space
    """

    g: float = 1.0
    gamma: float = 0.375
    kappa: float = 0.15625
    Omega: float = 0.0
    Omega_MW: float = 0.0
    Delta: float = 0.0
    delta: float = 0.0
    beta: float = 0.0
    phi: float = 0.0
    alpha: float = 0.0
    b: float = 0.0
    n_max: int = 1

    def __post_init__(self):
        if self.g <= 0 or self.gamma <= 0 or self.kappa <= 0:
            raise ValueError("g, gamma and kappa must be positive")
        if self.Omega < 0 or self.Omega_MW < 0:
            raise ValueError("Omega and Omega_MW must be non-negative")
        if abs(self.alpha) >= 1:
            raise ValueError(f"|alpha| must be < 1, got {self.alpha}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        object.__setattr__(self, "phi", float(self.phi) % _TWO_PI)

    def cooperativity(self) -> float:
        return self.g ** 2 / (self.gamma * self.kappa)

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in _PARAM_KEYS}

    @classmethod
    def from_dict(cls, data: dict) -> "SystemParams":
        unknown = set(data) - set(_PARAM_KEYS)
        if unknown:
            raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
        kwargs = {k: (int(v) if k == "n_max" else float(v)) for k, v in data.items()}
        return cls(**kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SystemParams":
        return cls.from_dict(json.loads(text))

    def to_config(self) -> str:
        """Flat ``key = value`` listing, one parameter per line."""
        return "\n".join(f"{k} = {getattr(self, k)!r}" for k in _PARAM_KEYS) + "\n"

    @classmethod
    def from_config(cls, text: str) -> "SystemParams":
        data: dict = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            data[key.strip()] = value.strip()
        return cls.from_dict(data)


def make_space(params: SystemParams, max_excitations: int | None = 1) -> HilbertSpace:
    """Default simulation space: ground plus singly-excited states."""
    return build_space(params.n_max, max_excitations)


def build_Hg(params: SystemParams, space: HilbertSpace) -> OperatorMatrix:
    """Ground-manifold Hamiltonian: microwave coupling plus level-1 shifts.

    H_g = Omega_MW/2 sum_j (|1><0|_j + h.c.) + sum_j (beta + s_j b)|1><1|_j
    with s_1 = +1, s_2 = -1, so that <S|H_g|T> = -b.
    """
    sigma_10 = HilbertSpace.atom_transition("1", "0")
    proj_1 = HilbertSpace.atom_transition("1", "1")
    full = np.zeros((space.full_dim, space.full_dim), dtype=complex)
    for site, sign in ((1, +1.0), (2, -1.0)):
        flip = space.atom_op_full(sigma_10, site)
        full += 0.5 * params.Omega_MW * (flip + flip.conj().T)
        full += (params.beta + sign * params.b) * space.atom_op_full(proj_1, site)
    return OperatorMatrix(space, space.restrict(full))


def build_He(params: SystemParams, space: HilbertSpace) -> OperatorMatrix:
    """Excited-manifold Hamiltonian: detunings plus the atom-cavity exchange.

    Per-atom couplings are g (1 + alpha) and g (1 - alpha).
    """
    proj_e = HilbertSpace.atom_transition("e", "e")
    sigma_1e = HilbertSpace.atom_transition("1", "e")
    a_full = space.annihilator_full()
    adag_full = a_full.conj().T
    full = params.delta * (adag_full @ a_full)
    for site, gj in ((1, params.g * (1 + params.alpha)),
                     (2, params.g * (1 - params.alpha))):
        full += params.Delta * space.atom_op_full(proj_e, site)
        lower = adag_full @ space.atom_op_full(sigma_1e, site)
        full += gj * (lower + lower.conj().T)
    return OperatorMatrix(space, space.restrict(full))


def build_V(params: SystemParams, space: HilbertSpace) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Optical drive split into the excitation part V+ and V- = V+ adjoint.

    V+ = Omega/2 (|e><0|_1 + e^{i phi} |e><0|_2); phi = pi crosses the
    triplet and singlet sectors, phi = 0 stays within them.
    """
    sigma_e0 = HilbertSpace.atom_transition("e", "0")
    full = 0.5 * params.Omega * (
        space.atom_op_full(sigma_e0, 1)
        + np.exp(1j * params.phi) * space.atom_op_full(sigma_e0, 2)
    )
    v_plus = OperatorMatrix(space, space.restrict(full))
    return v_plus, v_plus.adjoint()


def build_lindblads(params: SystemParams, space: HilbertSpace) -> dict[str, OperatorMatrix]:
    """Cavity loss and spontaneous emission with equal gamma/2 branching."""
    ops: dict[str, OperatorMatrix] = {
        "kappa": OperatorMatrix(
            space, math.sqrt(params.kappa) * space.restrict(space.annihilator_full())
        )
    }
    rate = math.sqrt(params.gamma / 2.0)
    for target in ("0", "1"):
        sigma = HilbertSpace.atom_transition(target, "e")
        for site in (1, 2):
            ops[f"gamma{target}_{site}"] = OperatorMatrix(
                space, rate * space.restrict(space.atom_op_full(sigma, site))
            )
    return ops


@dataclass(frozen=True)
class MasterEquation:
    """A Hamiltonian plus labeled Lindblad operators, full or effective."""

    H: OperatorMatrix
    lindblads: dict[str, OperatorMatrix]

    def __post_init__(self):
        for name, op in self.lindblads.items():
            if op.space != self.H.space:
                raise ValueError(f"lindblad {name!r} lives on a different space")
        if not self.H.is_hermitian():
            raise ValueError("Hamiltonian is not Hermitian")

    @property
    def space(self):
        return self.H.space

    @property
    def dim(self) -> int:
        return self.H.space.dim


def build_hamiltonian(params: SystemParams, space: HilbertSpace) -> OperatorMatrix:
    v_plus, v_minus = build_V(params, space)
    return build_Hg(params, space) + build_He(params, space) + v_plus + v_minus


def build_master_equation(
    params: SystemParams, space: HilbertSpace | None = None
) -> MasterEquation:
    """Full Lindblad model on the truncated space."""
    if space is None:
        space = make_space(params)
    return MasterEquation(
        H=build_hamiltonian(params, space),
        lindblads=build_lindblads(params, space),
    )
