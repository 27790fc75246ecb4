"""
Coined discrete-time quantum walk on the integer line.

The walker/coin state is stored densely over a contiguous window of
positions: ``a[i]`` is the coin-|0> amplitude and ``b[i]`` the coin-|1>
amplitude at position ``start + i``. One step applies the real rotation coin

    S_c(psi) = [[cos psi, -sin psi],
                [sin psi,  cos psi]]

at every site, then moves coin-|1> amplitude one site right and coin-|0>
amplitude one site left.

Everything here is a pure function of immutable values.
"""

from dataclasses import dataclass, field
from typing import Iterable, Tuple, Union

import numpy as np

from .errors import NormLossError, PolwalkError

__all__ = [
    "CoinOperator",
    "HADAMARD",
    "WalkState",
    "PositionDistribution",
    "step",
    "evolve",
    "position_distribution",
    "spread_speed",
    "coin_reduced_density",
    "entanglement_entropy",
    "classical_walk",
]

NORM_TOL = 1e-12
PRUNE_TOL = 1e-15
PSD_TOL = 1e-9


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CoinOperator:
    """Real rotation coin with angle ``psi`` in degrees, 0 < psi < 90."""

    psi: float

    def __post_init__(self):
        psi = float(self.psi)
        if not (0.0 < psi < 90.0):
            raise PolwalkError(f"coin angle must lie in the open interval (0, 90) degrees, got {psi}")
        object.__setattr__(self, "psi", psi)

    @property
    def matrix(self) -> np.ndarray:
        c = np.cos(np.deg2rad(self.psi))
        s = np.sin(np.deg2rad(self.psi))
        return np.array([[c, -s], [s, c]])


# The psi = 45 deg rotation; called the Hadamard walk in the literature this
# protocol comes from, although the matrix is a rotation.
HADAMARD = CoinOperator(45.0)


def as_coin(coin: Union[CoinOperator, float]) -> CoinOperator:
    return coin if isinstance(coin, CoinOperator) else CoinOperator(coin)


@dataclass(frozen=True)
class WalkState:
    """Walker (x) coin amplitudes over positions ``start .. start+len(a)-1``.

    Construct through :meth:`from_terms` or :meth:`localized` unless you
    already hold the dense arrays. The state must be normalized.
    """

    start: int
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _frozen(self.a, np.complex128)
        b = _frozen(self.b, np.complex128)
        if a.ndim != 1 or a.shape != b.shape or a.size == 0:
            raise PolwalkError("branch arrays must be non-empty 1-D arrays of equal length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise PolwalkError("amplitudes must be finite")
        norm = float(np.sum(np.abs(a) ** 2) + np.sum(np.abs(b) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise PolwalkError(f"state is not normalized (norm^2 = {norm!r})")
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_terms(cls, terms: Iterable[Tuple[complex, int, int]], normalize: bool = True) -> "WalkState":
        """Build a state from ``(amplitude, position, coin)`` triples.

        Repeated (position, coin) pairs are summed. With ``normalize`` the
        result is rescaled to unit norm.
        """
        terms = [(complex(amp), int(x), int(c)) for amp, x, c in terms]
        if not terms:
            raise PolwalkError("no terms given")
        if any(c not in (0, 1) for _, _, c in terms):
            raise PolwalkError("coin index must be 0 or 1")
        lo = min(x for _, x, _ in terms)
        hi = max(x for _, x, _ in terms)
        a = np.zeros(hi - lo + 1, dtype=np.complex128)
        b = np.zeros_like(a)
        for amp, x, c in terms:
            (a if c == 0 else b)[x - lo] += amp
        if normalize:
            nrm = np.sqrt(np.sum(np.abs(a) ** 2) + np.sum(np.abs(b) ** 2))
            if nrm == 0.0:
                raise PolwalkError("all amplitudes are zero")
            a, b = a / nrm, b / nrm
        return cls(lo, a, b)

    @classmethod
    def localized(cls, x: int = 0, coin=(1.0, 0.0)) -> "WalkState":
        c = np.asarray(coin, dtype=np.complex128)
        c = c / np.linalg.norm(c)
        return cls(x, [c[0]], [c[1]])

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.start, self.start + self.a.size)

    @property
    def stop(self) -> int:
        """One past the last stored position."""
        return self.start + self.a.size

    def amplitude(self, x: int) -> Tuple[complex, complex]:
        i = x - self.start
        if 0 <= i < self.a.size:
            return complex(self.a[i]), complex(self.b[i])
        return 0j, 0j

    def occupied(self, tol: float = PRUNE_TOL):
        p = np.abs(self.a) ** 2 + np.abs(self.b) ** 2
        return [int(x) for x, q in zip(self.positions, p) if q > tol**2]

    def as_dict(self):
        """Map position -> (a_x, b_x) for occupied positions."""
        return {x: self.amplitude(x) for x in self.occupied()}

    def with_branch_phases(self, gamma: float = 0.0, delta: float = 0.0) -> "WalkState":
        """Multiply the whole coin-0 branch by e^{i gamma} and coin-1 by e^{i delta}."""
        return WalkState(self.start, self.a * np.exp(1j * gamma), self.b * np.exp(1j * delta))

    def window(self, lo: int, hi: int) -> Tuple[np.ndarray, np.ndarray]:
        """Dense (a, b) arrays over positions lo..hi inclusive, zero-padded."""
        n = hi - lo + 1
        a = np.zeros(n, dtype=np.complex128)
        b = np.zeros(n, dtype=np.complex128)
        s0, s1 = max(lo, self.start), min(hi + 1, self.stop)
        if s0 < s1:
            a[s0 - lo:s1 - lo] = self.a[s0 - self.start:s1 - self.start]
            b[s0 - lo:s1 - lo] = self.b[s0 - self.start:s1 - self.start]
        return a, b


def _pruned(start, a, b):
    weight = np.maximum(np.abs(a), np.abs(b))
    keep = np.nonzero(weight >= PRUNE_TOL)[0]
    if keep.size == 0:
        raise NormLossError("every amplitude fell below the pruning threshold")
    lo, hi = keep[0], keep[-1] + 1
    lost = float(np.sum(np.abs(a[:lo]) ** 2 + np.abs(b[:lo]) ** 2)
                 + np.sum(np.abs(a[hi:]) ** 2 + np.abs(b[hi:]) ** 2))
    if lost > 1e-12:
        raise NormLossError(f"pruning would discard probability {lost:.3e}")
    return start + int(lo), a[lo:hi], b[lo:hi]


def step(state: WalkState, coin: Union[CoinOperator, float] = HADAMARD) -> WalkState:
    """Apply one coin toss followed by the conditional shift."""
    (c00, c01), (c10, c11) = as_coin(coin).matrix
    a = c00 * state.a + c01 * state.b
    b = c10 * state.a + c11 * state.b
    n = state.a.size
    new_a = np.zeros(n + 2, dtype=np.complex128)
    new_b = np.zeros(n + 2, dtype=np.complex128)
    new_a[0:n] = a
    new_b[2:n + 2] = b
    return WalkState(*_pruned(state.start - 1, new_a, new_b))


def evolve(state: WalkState, coin: Union[CoinOperator, float] = HADAMARD, n: int = 1) -> WalkState:
    if n < 0:
        raise PolwalkError("step count must be non-negative")
    coin = as_coin(coin)
    for _ in range(n):
        state = step(state, coin)
    return state


@dataclass(frozen=True)
class PositionDistribution:
    """Probabilities over positions ``start .. start+len(probs)-1``."""

    start: int
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = _frozen(self.probs, np.float64)
        if p.ndim != 1 or p.size == 0:
            raise PolwalkError("probabilities must be a non-empty 1-D array")
        if np.any(p < 0):
            raise PolwalkError("probabilities must be non-negative")
        if abs(float(p.sum()) - 1.0) > NORM_TOL:
            raise PolwalkError(f"probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_dict(cls, probs) -> "PositionDistribution":
        lo, hi = min(probs), max(probs)
        p = np.zeros(hi - lo + 1)
        for x, q in probs.items():
            p[x - lo] += q
        return cls(lo, p)

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.start, self.start + self.probs.size)

    def as_dict(self, tol: float = 0.0):
        return {int(x): float(q) for x, q in zip(self.positions, self.probs) if q > tol}

    def get(self, x: int) -> float:
        i = x - self.start
        return float(self.probs[i]) if 0 <= i < self.probs.size else 0.0

    def mean(self) -> float:
        return float(np.dot(self.positions, self.probs))

    def variance(self) -> float:
        d = self.positions - self.mean()
        return float(np.dot(d * d, self.probs))

    def std(self) -> float:
        return float(np.sqrt(self.variance()))

    def total_variation(self, other: "PositionDistribution") -> float:
        lo = min(self.start, other.start)
        hi = max(self.start + self.probs.size, other.start + other.probs.size)
        return 0.5 * sum(abs(self.get(x) - other.get(x)) for x in range(lo, hi))


def position_distribution(state: WalkState) -> PositionDistribution:
    p = np.abs(state.a) ** 2 + np.abs(state.b) ** 2
    # absorb the ~1e-16 rounding so the strict sum check holds
    return PositionDistribution(state.start, p / p.sum())


def spread_speed(dist_n: PositionDistribution, dist_0: PositionDistribution, n: int) -> float:
    """(sigma(n) - sigma(0)) / n, with sigma the standard deviation of position."""
    if n < 1:
        raise PolwalkError("spread speed needs n >= 1")
    return (dist_n.std() - dist_0.std()) / n


def coin_reduced_density(state: WalkState) -> np.ndarray:
    """Coin density matrix with the walker position traced out."""
    a, b = state.a, state.b
    p0 = float(np.sum(np.abs(a) ** 2))
    p1 = float(np.sum(np.abs(b) ** 2))
    c = complex(np.sum(a * np.conj(b)))
    return np.array([[p0, c], [np.conj(c), p1]])


def entanglement_entropy(rho_c) -> float:
    """Von Neumann entropy -Tr(rho ln rho) of a qubit density matrix (nats)."""
    rho = np.asarray(rho_c, dtype=np.complex128)
    if rho.shape != (2, 2):
        raise PolwalkError("expected a 2x2 matrix")
    if np.max(np.abs(rho - rho.conj().T)) > PSD_TOL:
        raise PolwalkError("matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > PSD_TOL:
        raise PolwalkError("matrix does not have unit trace")
    lam = np.linalg.eigvalsh(rho)
    if np.any(lam < -PSD_TOL):
        raise PolwalkError(f"matrix is not positive semidefinite (eigenvalues {lam})")
    lam = np.clip(lam, 0.0, 1.0)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def classical_walk(initial: PositionDistribution, n: int) -> PositionDistribution:
    """Unbiased classical random walk: n-fold convolution with {-1: 1/2, +1: 1/2}."""
    if n < 0:
        raise PolwalkError("step count must be non-negative")
    p = np.asarray(initial.probs)
    kernel = np.array([0.5, 0.0, 0.5])
    for _ in range(n):
        p = np.convolve(p, kernel)
    return PositionDistribution(initial.start - n, p)
