"""
Encoding an n-dimensional state into one qubit and reading it back.

A basis row assigns every label k a (generally non-orthogonal) qubit state

    |k>_q = cos(theta_k)|0> + e^{i phi_k} sin(theta_k)|1>.

Encoding ``sum_k a_k |k>`` replaces each |k> by |k>_q, giving the qubit
amplitudes C0 = sum a_k cos(theta_k) and C1 = sum a_k e^{i phi_k} sin(theta_k).
The ratio R = C0 / C1, read off the qubit density matrix, yields one
homogeneous linear equation in the a_k. Collecting n-1 such equations from
different rows and taking the null direction recovers the coefficient ray.
"""

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    AmbiguousNullSpaceError,
    DegenerateEncodingError,
    PolwalkError,
    RatioUndefinedError,
    UnderdeterminedSystemError,
)

__all__ = [
    "EncodingScheme",
    "EncodedQubit",
    "NullSpaceReport",
    "encode",
    "encode_all",
    "density_matrix",
    "validate_density_matrix",
    "extract_ratio",
    "assemble_system",
    "solve_null",
    "null_basis",
    "decode",
    "measure_ratios",
    "fidelity",
    "perturb_ratio",
    "haar_state",
    "fix_phase",
]

DEGENERATE_NQ = 1e-12
RATIO_DENOM_TOL = 1e-10
AMBIGUITY_TOL = 1e-8
PHASE_FIX_TOL = 1e-8
RHO_TOL = 1e-9

NOISE_MODELS = ("relative", "componentwise")
FIDELITY_CONVENTIONS = ("squared", "root")


class DegenerateSchemeError(PolwalkError):
    """Two labels share the same Bloch point in every row of the scheme."""


def _rays_coincide(theta, phi, tol=1e-9):
    """Boolean (n, n) matrix: basis points i and j are the same qubit ray."""
    t = np.deg2rad(theta)
    kets = np.stack([np.cos(t), np.exp(1j * np.deg2rad(phi)) * np.sin(t)], axis=-1)
    overlap = np.abs(kets.conj() @ kets.T)
    same = overlap > 1.0 - tol
    np.fill_diagonal(same, False)
    return same


@dataclass(frozen=True)
class EncodingScheme:
    """Angles (degrees) of the basis points, one row per encoding run.

    ``theta[i, k]`` and ``phi[i, k]`` belong to row ``i`` (0-based) and
    label ``k`` (0-based). Schemes from :meth:`from_generator` use
    theta = j*k*dtheta and phi = k*dphi with 1-based j = i+1 and k.
    """

    theta: np.ndarray
    phi: np.ndarray
    delta_theta: Optional[float] = None
    delta_phi: Optional[float] = None

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        phi = np.array(self.phi, dtype=float)
        if theta.ndim != 2 or theta.shape != phi.shape or theta.shape[1] == 0:
            raise PolwalkError("theta and phi must be equal-shape 2-D arrays (rows x n)")
        theta.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)
        if theta.shape[0] and theta.shape[1] > 1:
            everywhere = np.ones((theta.shape[1],) * 2, dtype=bool)
            for i in range(theta.shape[0]):
                everywhere &= _rays_coincide(theta[i], phi[i])
            if everywhere.any():
                i, j = np.argwhere(everywhere)[0]
                raise DegenerateSchemeError(f"labels {i} and {j} coincide in every row")

    @classmethod
    def from_generator(cls, n: int, delta_theta: float, delta_phi: float,
                       rows: Optional[int] = None) -> "EncodingScheme":
        if n < 1:
            raise PolwalkError("dimension must be >= 1")
        rows = n - 1 if rows is None else rows
        k = np.arange(1, n + 1)
        j = np.arange(1, rows + 1)
        theta = np.outer(j, k) * float(delta_theta)
        phi = np.tile(k * float(delta_phi), (rows, 1))
        return cls(theta, phi, float(delta_theta), float(delta_phi))

    @property
    def n(self) -> int:
        return self.theta.shape[1]

    @property
    def num_rows(self) -> int:
        return self.theta.shape[0]

    def tables(self) -> Tuple[np.ndarray, np.ndarray]:
        """(cos theta, e^{i phi} sin theta), each rows x n."""
        t = np.deg2rad(self.theta)
        return np.cos(t), np.exp(1j * np.deg2rad(self.phi)) * np.sin(t)

    def coincident_rows(self):
        """Indices of rows in which at least two labels share a Bloch point."""
        return [i for i in range(self.num_rows) if _rays_coincide(self.theta[i], self.phi[i]).any()]

    def to_dict(self):
        if self.delta_theta is not None and self.num_rows == self.n - 1:
            return {"n": self.n, "delta_theta_deg": self.delta_theta, "delta_phi_deg": self.delta_phi}
        return {"n": self.n, "theta_deg": self.theta.tolist(), "phi_deg": self.phi.tolist()}

    @classmethod
    def from_dict(cls, d) -> "EncodingScheme":
        if "delta_theta_deg" in d:
            return cls.from_generator(int(d["n"]), d["delta_theta_deg"], d.get("delta_phi_deg", 0.0),
                                      d.get("rows"))
        theta = np.asarray(d["theta_deg"], dtype=float)
        phi = np.asarray(d.get("phi_deg", np.zeros_like(theta)), dtype=float)
        if "n" in d and theta.shape[1] != int(d["n"]):
            raise PolwalkError("row length does not match n")
        return cls(theta, phi)


@dataclass(frozen=True)
class EncodedQubit:
    c0: complex
    c1: complex
    raw_c0: complex
    raw_c1: complex
    nq: float

    @property
    def ket(self) -> np.ndarray:
        return np.array([self.c0, self.c1])


def _as_coeffs(coeffs) -> np.ndarray:
    a = np.asarray(coeffs, dtype=np.complex128)
    if a.ndim != 1:
        raise PolwalkError("coefficient vector must be 1-D")
    return a


def encode_all(coeffs, scheme: EncodingScheme) -> Tuple[np.ndarray, np.ndarray]:
    """Raw (C0, C1) for every row of the scheme."""
    a = _as_coeffs(coeffs)
    if a.size != scheme.n:
        raise PolwalkError(f"expected {scheme.n} coefficients, got {a.size}")
    cos, sinp = scheme.tables()
    return cos @ a, sinp @ a


def encode(coeffs, scheme: EncodingScheme, row: int) -> EncodedQubit:
    """Encode the coefficient vector with basis row ``row`` (0-based)."""
    a = _as_coeffs(coeffs)
    if a.size != scheme.n:
        raise PolwalkError(f"expected {scheme.n} coefficients, got {a.size}")
    if not 0 <= row < scheme.num_rows:
        raise PolwalkError(f"row {row} out of range")
    t = np.deg2rad(scheme.theta[row])
    c0 = complex(np.sum(a * np.cos(t)))
    c1 = complex(np.sum(a * np.exp(1j * np.deg2rad(scheme.phi[row])) * np.sin(t)))
    nq = float(np.hypot(abs(c0), abs(c1)))
    if nq < DEGENERATE_NQ:
        raise DegenerateEncodingError(f"degenerate encoding: row {row} maps the state to zero")
    return EncodedQubit(c0 / nq, c1 / nq, c0, c1, nq)


def density_matrix(q) -> np.ndarray:
    """Pure-state density matrix |q><q| of an encoded qubit or a 2-vector."""
    ket = q.ket if isinstance(q, EncodedQubit) else np.asarray(q, dtype=np.complex128)
    ket = ket / np.linalg.norm(ket)
    return np.outer(ket, ket.conj())


def validate_density_matrix(rho, tol: float = RHO_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (2, 2):
        raise PolwalkError("density matrix must be 2x2")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise PolwalkError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise PolwalkError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise PolwalkError("density matrix has a negative eigenvalue")
    return rho


def extract_ratio(rho, with_discrepancy: bool = False):
    """R = C0/C1 from a qubit density matrix.

    Two estimates exist, rho11/rho21 and rho12/rho22. They coincide for pure
    states; for noisy estimates they are averaged with weights |rho21| and
    |rho22|, since the smaller denominator amplifies noise more. With
    ``with_discrepancy`` the absolute difference of the two estimates is
    returned as well (0 when only one is usable).

    Raises RatioUndefinedError when both denominators vanish (C1 ~ 0).
    """
    rho = validate_density_matrix(rho)
    w1, w2 = abs(rho[1, 0]), abs(rho[1, 1])
    estimates = []
    if w1 >= RATIO_DENOM_TOL:
        estimates.append((w1, rho[0, 0] / rho[1, 0]))
    if w2 >= RATIO_DENOM_TOL:
        estimates.append((w2, rho[0, 1] / rho[1, 1]))
    if not estimates:
        raise RatioUndefinedError("C1 ~ 0: ratio undefined")
    total = sum(w for w, _ in estimates)
    r = complex(sum(w * e for w, e in estimates) / total)
    if not with_discrepancy:
        return r
    gap = abs(estimates[0][1] - estimates[1][1]) if len(estimates) == 2 else 0.0
    return r, float(gap)


def assemble_system(ratios: Iterable[Tuple[int, Optional[complex]]], scheme: EncodingScheme,
                    zero_constraints: Sequence[int] = ()) -> np.ndarray:
    """Stack the homogeneous equations into an (m x n) complex matrix.

    ``ratios`` holds ``(row, R)`` pairs. ``R=None`` marks a row whose C1
    vanished; it contributes the constraint C1 = 0 instead of a ratio
    equation. Each index in ``zero_constraints`` appends the unit row e_k.
    """
    ratios = list(ratios)
    zero_constraints = list(zero_constraints)
    n = scheme.n
    if len(ratios) + len(zero_constraints) < n - 1:
        raise UnderdeterminedSystemError(
            f"underdetermined system: {len(ratios) + len(zero_constraints)} rows for {n} unknowns")
    cos, sinp = scheme.tables()
    rows = []
    for j, r in ratios:
        if r is None:
            rows.append(sinp[j])
        else:
            rows.append(cos[j] - complex(r) * sinp[j])
    for k in zero_constraints:
        if not 0 <= k < n:
            raise PolwalkError(f"zero constraint index {k} out of range")
        e = np.zeros(n, dtype=np.complex128)
        e[k] = 1.0
        rows.append(e)
    return np.array(rows, dtype=np.complex128).reshape(len(rows), n)


@dataclass(frozen=True)
class NullSpaceReport:
    sigma_min: float
    sigma_next: float
    norm: float

    @property
    def gap(self) -> float:
        """sigma_next / ||M||; small values mean the null direction is ill-defined."""
        return self.sigma_next / self.norm if self.norm > 0 else 0.0


def fix_phase(vec, tol: float = PHASE_FIX_TOL) -> np.ndarray:
    """Rotate the global phase so the first entry with |v_k| > tol is real positive."""
    v = np.asarray(vec, dtype=np.complex128)
    big = np.nonzero(np.abs(v) > tol)[0]
    if big.size == 0:
        return v.copy()
    lead = v[big[0]]
    return v * (abs(lead) / lead)


def solve_null(system) -> Tuple[np.ndarray, NullSpaceReport]:
    """Unit vector spanning the (numerical) null space of ``system``.

    Rows are rescaled to unit norm first, so the answer does not depend on
    how individual equations were scaled. The direction is the right
    singular vector of the smallest singular value; missing rows (m < n)
    count as zero singular values.
    """
    m = np.asarray(system, dtype=np.complex128)
    if m.ndim != 2:
        raise PolwalkError("system must be a 2-D matrix")
    n = m.shape[1]
    norms = np.linalg.norm(m, axis=1)
    m = m[norms > 0] / norms[norms > 0, None]
    if m.shape[0] < n - 1:
        raise UnderdeterminedSystemError(f"underdetermined system: {m.shape[0]} rows for {n} unknowns")
    if n == 1:
        return np.ones(1, dtype=np.complex128), NullSpaceReport(0.0, np.inf, 1.0)
    _, s, vh = np.linalg.svd(m)
    sig = np.zeros(n)
    sig[:s.size] = s[:n]
    report = NullSpaceReport(float(sig[-1]), float(sig[-2]), float(sig[0]))
    if report.gap < AMBIGUITY_TOL:
        raise AmbiguousNullSpaceError(
            f"ambiguous null space: sigma_next/||M|| = {report.gap:.2e}")
    v = vh[-1].conj()
    return fix_phase(v / np.linalg.norm(v)), report


def null_basis(system, tol: float = AMBIGUITY_TOL) -> Tuple[np.ndarray, NullSpaceReport]:
    """Orthonormal basis (n x d) of the numerical null space of ``system``.

    ``d`` counts singular values below ``tol * ||M||`` after row
    equilibration, with absent rows (m < n) contributing zeros; at least one
    direction is always returned. For d == 1 the column is phase-fixed the
    same way :func:`solve_null` does it.
    """
    m = np.asarray(system, dtype=np.complex128)
    n = m.shape[1]
    norms = np.linalg.norm(m, axis=1)
    m = m[norms > 0] / norms[norms > 0, None]
    if n == 1:
        return np.ones((1, 1), dtype=np.complex128), NullSpaceReport(0.0, np.inf, 1.0)
    if m.shape[0] == 0:
        return np.eye(n, dtype=np.complex128), NullSpaceReport(0.0, 0.0, 0.0)
    _, s, vh = np.linalg.svd(m)
    sig = np.zeros(n)
    sig[:s.size] = s[:n]
    d = max(1, int(np.sum(sig < tol * sig[0])))
    basis = vh[n - d:].conj().T
    if d == 1:
        basis = fix_phase(basis[:, 0])[:, None]
    return basis, NullSpaceReport(float(sig[-1]), float(sig[-2]), float(sig[0]))


def decode(ratios, scheme: EncodingScheme, zero_constraints: Sequence[int] = ()) -> np.ndarray:
    """Recover the unit, phase-fixed coefficient vector from measured ratios."""
    vec, _ = solve_null(assemble_system(ratios, scheme, zero_constraints))
    return vec


def measure_ratios(coeffs, scheme: EncodingScheme):
    """Exact (row, R) list for every row, with None where C1 vanishes."""
    out = []
    for j in range(scheme.num_rows):
        try:
            rho = density_matrix(encode(coeffs, scheme, j))
        except DegenerateEncodingError:
            continue
        try:
            out.append((j, extract_ratio(rho)))
        except RatioUndefinedError:
            out.append((j, None))
    return out


def fidelity(truth, recovered, convention: str = "squared") -> float:
    """Overlap of two pure states (inputs are renormalized).

    ``convention="squared"`` gives |<truth|recovered>|^2; ``"root"`` gives
    |<truth|recovered>|, the other convention found in the literature.
    """
    if convention not in FIDELITY_CONVENTIONS:
        raise PolwalkError(f"unknown fidelity convention {convention!r}")
    t = _as_coeffs(truth)
    r = _as_coeffs(recovered)
    f = abs(np.vdot(t, r)) ** 2 / (np.vdot(t, t).real * np.vdot(r, r).real)
    f = min(f, 1.0)
    return float(np.sqrt(f) if convention == "root" else f)


def perturb_ratio(r: complex, bound: float = 0.10, rng=None, model: str = "relative") -> complex:
    """Apply a bounded random error to a measured ratio.

    ``relative``: R * (1 + eps), eps ~ U[-bound, bound].
    ``componentwise``: Re R and Im R each get an independent relative error.
    """
    if not 0.0 <= bound < 1.0:
        raise PolwalkError("noise bound must lie in [0, 1)")
    if model not in NOISE_MODELS:
        raise PolwalkError(f"unknown noise model {model!r}")
    rng = np.random.default_rng() if rng is None else rng
    r = complex(r)
    if model == "relative":
        return r * (1.0 + rng.uniform(-bound, bound))
    e_re, e_im = rng.uniform(-bound, bound, size=2)
    return complex(r.real * (1.0 + e_re), r.imag * (1.0 + e_im))


def haar_state(n: int, rng) -> np.ndarray:
    """Uniformly random unit vector in C^n."""
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z)
