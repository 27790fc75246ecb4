"""
Jones-calculus model of the linear-optical walk.

The coin lives in two optical paths and the walker in the photon
polarization. Position k is the linear polarization state

    |k>_p = cos(k dtheta)|H> + sin(k dtheta)|V>,

so stepping k -> k +/- 1 is a polarization rotation by +/- dtheta, built
from a 0 deg half-wave plate followed by one at +/- dtheta/2. The coin toss
is a beam splitter acting as the real rotation S_c(psi) on the two paths.

State vectors are ordered (path0 H, path0 V, path1 H, path1 V).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateEncodingError, PolwalkError
from .walk import CoinOperator, WalkState

__all__ = [
    "hwp_matrix",
    "rotation_matrix",
    "conditional_shift",
    "coin_bs",
    "step_operator",
    "PhysicalOpticalState",
    "encode_walk",
    "physical_evolve",
    "path_count_ratio",
    "sample_count_ratio",
    "TomographyRecord",
    "tomography",
    "PhotonBudget",
    "photon_budget",
    "implied_survival",
    "implied_extra_loss",
]

RATIO_TOL = 1e-20


def hwp_matrix(orientation: float) -> np.ndarray:
    """Jones matrix of a half-wave plate with fast axis at ``orientation`` degrees."""
    t = np.deg2rad(2.0 * orientation)
    return np.array([[np.cos(t), np.sin(t)], [np.sin(t), -np.cos(t)]], dtype=np.complex128)


def rotation_matrix(angle: float) -> np.ndarray:
    t = np.deg2rad(angle)
    return np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]], dtype=np.complex128)


def conditional_shift(delta_theta: float) -> np.ndarray:
    """Block-diagonal 4x4: rotate by -dtheta on path 0, +dtheta on path 1.

    Each block is HWP(+/-dtheta/2) @ HWP(0), i.e. the pair of plates the
    photon crosses in that arm.
    """
    back = hwp_matrix(-delta_theta / 2.0) @ hwp_matrix(0.0)
    forward = hwp_matrix(delta_theta / 2.0) @ hwp_matrix(0.0)
    out = np.zeros((4, 4), dtype=np.complex128)
    out[:2, :2] = back
    out[2:, 2:] = forward
    return out


def coin_bs(psi: float) -> np.ndarray:
    """Beam-splitter coin: S_c(psi) on the path index, identity on polarization.

    Reflection phases of a real beam splitter are not modelled; the element
    is taken to act as the real rotation.
    """
    return np.kron(CoinOperator(psi).matrix, np.eye(2)).astype(np.complex128)


def step_operator(psi: float, delta_theta: float) -> np.ndarray:
    return conditional_shift(delta_theta) @ coin_bs(psi)


@dataclass(frozen=True)
class PhysicalOpticalState:
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128).reshape(4)
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_paths(cls, p0, p1) -> "PhysicalOpticalState":
        return cls(np.concatenate([np.asarray(p0, dtype=np.complex128), np.asarray(p1, dtype=np.complex128)]))

    @property
    def p0(self) -> np.ndarray:
        return self.amps[:2]

    @property
    def p1(self) -> np.ndarray:
        return self.amps[2:]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def encode_walk(state: WalkState, delta_theta: float, normalize: bool = True):
    """Map a walk state onto path (x) polarization at angle step ``delta_theta``.

    Returns ``(optical_state, n_p)`` where ``n_p`` is the norm of the
    unnormalized image. Because the |k>_p are not orthogonal, ``n_p`` is
    generally different from 1.
    """
    t = np.deg2rad(state.positions * float(delta_theta))
    kets = np.stack([np.cos(t), np.sin(t)], axis=1)
    p0 = state.a @ kets
    p1 = state.b @ kets
    amps = np.concatenate([p0, p1])
    n_p = float(np.linalg.norm(amps))
    if n_p < 1e-12:
        raise DegenerateEncodingError(f"walk state maps to the zero vector at dtheta={delta_theta}")
    return PhysicalOpticalState(amps / n_p if normalize else amps), n_p


def physical_evolve(initial: PhysicalOpticalState, psi: float, delta_theta: float, n: int,
                    loss_per_two_steps: float = 0.0) -> PhysicalOpticalState:
    """Apply ``n`` optical steps. Optional loss damps the amplitudes after every second step."""
    if n < 0:
        raise PolwalkError("step count must be non-negative")
    if not 0.0 <= loss_per_two_steps <= 1.0:
        raise PolwalkError("loss must lie in [0, 1]")
    u = step_operator(psi, delta_theta)
    damp = np.sqrt(1.0 - loss_per_two_steps)
    amps = initial.amps
    for i in range(1, n + 1):
        amps = u @ amps
        if loss_per_two_steps and i % 2 == 0:
            amps = amps * damp
    return PhysicalOpticalState(amps)


def path_count_ratio(state: PhysicalOpticalState, mode: str = "projective") -> float:
    """Ratio of photon counts in path 0 to path 1.

    ``projective`` (default) compares H-filtered counts in path 0 with
    V-filtered counts in path 1, |p0H|^2 / |p1V|^2. ``total`` compares the
    unfiltered path intensities.
    """
    if mode == "projective":
        num, den = abs(state.amps[0]) ** 2, abs(state.amps[3]) ** 2
    elif mode == "total":
        num, den = float(np.sum(np.abs(state.p0) ** 2)), float(np.sum(np.abs(state.p1) ** 2))
    else:
        raise PolwalkError(f"unknown ratio mode {mode!r}")
    if den < RATIO_TOL:
        raise PolwalkError("ratio undefined at this theta: no counts expected in the denominator")
    return float(num / den)


def sample_count_ratio(state: PhysicalOpticalState, photons: int, rng) -> float:
    """Finite-count estimate of the projective ratio from ``photons`` input photons."""
    amps = state.amps / state.norm()
    p0h, p1v = abs(amps[0]) ** 2, abs(amps[3]) ** 2
    n0, n1, _ = rng.multinomial(photons, [p0h, p1v, max(0.0, 1.0 - p0h - p1v)])
    if n1 == 0:
        raise PolwalkError("ratio undefined: no photons counted in the denominator")
    return n0 / n1


_BASES = {
    # each basis: the two analyser kets (plus, minus)
    "HV": (np.array([1, 0]), np.array([0, 1])),
    "DA": (np.array([1, 1]) / np.sqrt(2), np.array([1, -1]) / np.sqrt(2)),
    "RL": (np.array([1, 1j]) / np.sqrt(2), np.array([1, -1j]) / np.sqrt(2)),
}


@dataclass(frozen=True)
class TomographyRecord:
    path: Optional[int]
    rho: np.ndarray = field(repr=False)
    total_counts: int
    counts: dict


def _project_psd(rho):
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    return (v * w) @ v.conj().T


def tomography(branch, shots_per_basis: int = 0, rng=None, path: Optional[int] = None) -> TomographyRecord:
    """Polarization-state tomography of one path's (unnormalized) Jones vector.

    ``shots_per_basis=0`` returns the exact pure-state density matrix.
    Otherwise binomial counts are drawn in the H/V, D/A and R/L bases, the
    Stokes parameters are inverted linearly, and the result is projected
    onto the nearest trace-one positive semidefinite matrix.
    """
    psi = np.asarray(branch, dtype=np.complex128)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise PolwalkError("cannot do tomography on an empty branch")
    if shots_per_basis < 0:
        raise PolwalkError("shot count must be non-negative")
    psi = psi / nrm
    if shots_per_basis == 0:
        return TomographyRecord(path, np.outer(psi, psi.conj()), 0, {})
    rng = np.random.default_rng() if rng is None else rng
    counts = {}
    stokes = []
    for name, (plus, _minus) in _BASES.items():
        p = min(1.0, abs(np.vdot(plus, psi)) ** 2)
        k = int(rng.binomial(shots_per_basis, p))
        counts[name] = (k, shots_per_basis - k)
        stokes.append(2.0 * k / shots_per_basis - 1.0)
    sz, sx, sy = stokes
    rho = 0.5 * np.array([[1 + sz, sx - 1j * sy], [sx + 1j * sy, 1 - sz]])
    return TomographyRecord(path, _project_psd(rho), 3 * shots_per_basis, counts)


@dataclass(frozen=True)
class PhotonBudget:
    """Loss bookkeeping for the two-loop setup.

    Photons cross the loop coupler once per loop, i.e. twice per two
    steps; ``coupler_reflectivity`` is the fraction kept in the loop at each
    crossing. ``extra_loss`` lumps every other loss per two steps. If
    ``total_loss`` is given it replaces the product as the fraction lost per
    two steps (useful when only a measured total is known).
    """

    coupler_reflectivity: float = 0.5
    extra_loss: float = 0.0
    source_rate: float = 1.0
    detection_efficiency: float = 1.0
    steps: float = 2
    total_loss: Optional[float] = None

    def __post_init__(self):
        for name in ("coupler_reflectivity", "extra_loss", "detection_efficiency"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise PolwalkError(f"{name} must lie in [0, 1], got {v}")
        if self.total_loss is not None and not 0.0 <= self.total_loss <= 1.0:
            raise PolwalkError("total_loss must lie in [0, 1]")
        if self.source_rate < 0 or self.steps < 0:
            raise PolwalkError("source rate and steps must be non-negative")

    @property
    def survival_per_two_steps(self) -> float:
        if self.total_loss is not None:
            return 1.0 - self.total_loss
        return self.coupler_reflectivity ** 2 * (1.0 - self.extra_loss)


def photon_budget(b: PhotonBudget) -> float:
    """Expected detected events per second after ``b.steps`` steps."""
    return b.source_rate * b.survival_per_two_steps ** (b.steps / 2.0) * b.detection_efficiency


def implied_survival(target_rate: float, source_rate: float, steps: float,
                     detection_efficiency: float = 1.0) -> float:
    """Survival per two steps needed to detect ``target_rate`` after ``steps`` steps."""
    if target_rate <= 0 or source_rate <= 0 or steps <= 0:
        raise PolwalkError("rates and steps must be positive")
    return (target_rate / (source_rate * detection_efficiency)) ** (2.0 / steps)


def implied_extra_loss(target_rate: float, b: PhotonBudget) -> float:
    """Extra loss per two steps that, with the budget's coupler, gives ``target_rate``."""
    s = implied_survival(target_rate, b.source_rate, b.steps, b.detection_efficiency)
    retained = b.coupler_reflectivity ** 2
    if retained == 0 or s > retained:
        raise PolwalkError("target rate exceeds what the coupler alone allows")
    return 1.0 - s / retained
