"""
Reading the full walker/coin state back out of the optical walk.

Each run repeats the whole n-step walk with one polarization step angle
dtheta_j. Tomography of path 0 (path 1) then gives one ratio equation for the
coin-0 (coin-1) branch. With one known boundary zero per branch, as many
runs as unknowns-minus-one fix both branch directions for a generic state;
a single count ratio at an analysis angle theta* then fixes the relative
branch weights.

Some states defeat the ratio equations alone. For a real initial state with
coin |0>, the coin-1 branch polynomial shares a palindromic factor with its
reversal, and its null space has dimension ceil(n/2) whatever angles are
used. The projective count ratios recorded in the same runs carry the
missing information; when a null space is not one-dimensional the branch
coordinates are fitted jointly to them.

The relative phase between the two branches is not observable this way.
Every reported quantity (distribution, spread speed, coin entropy) is
insensitive to it, so branches are simply stored in canonical phase.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import optics
from .encoding import (
    AMBIGUITY_TOL,
    EncodingScheme,
    NullSpaceReport,
    assemble_system,
    extract_ratio,
    fidelity,
    fix_phase,
    null_basis,
    perturb_ratio,
    solve_null,
)
from .errors import (
    PlanningError,
    PolwalkError,
    RatioUndefinedError,
    ReconstructionError,
    WeightRecoveryError,
)
from .walk import (
    HADAMARD,
    PositionDistribution,
    WalkState,
    coin_reduced_density,
    entanglement_entropy,
    evolve,
    position_distribution,
    spread_speed,
)

__all__ = [
    "RunPlan",
    "RunMeasurement",
    "MeasurementData",
    "ReconstructionReport",
    "plan_runs",
    "recover_branch",
    "choose_theta_star",
    "recover_weights",
    "simulate_measurements",
    "reconstruct_state",
    "reconstruct_walk",
    "noise_null_tol",
]

PLAN_GATE = 1e-6
WEIGHT_TOL = 1e-10
NOISE_TOL_FACTOR = 3.0
EXACT_COST = 1e-24  # joint fit: stop the multistart once the data are matched
POLISH_COST = 1e-12
THETA_STAR_GRID = np.arange(1.0, 91.0)  # 90 candidate angles, degrees
_PLACEHOLDER_SEED = 20190101


@dataclass(frozen=True)
class RunPlan:
    n_steps: int
    psi: float
    initial_support: Tuple[int, ...]
    parity: int
    k_min: int
    k_max: int
    run_angles: Tuple[float, ...]
    theta_star: float
    initial_distribution: Optional[PositionDistribution] = field(default=None, repr=False)

    @property
    def positions(self) -> np.ndarray:
        """Window positions of the right parity; the columns of every branch system."""
        return np.arange(self.k_min, self.k_max + 1, 2)

    @property
    def zeros(self):
        """Boundary zeros: coin-0 cannot sit at k_max, coin-1 cannot sit at k_min."""
        return {"a": (self.k_max,), "b": (self.k_min,)}

    @property
    def unknowns(self) -> int:
        return self.positions.size - 1


def _coincidence_free(positions, angle, tol=1e-9):
    """True if no two positions share a polarization ray at this step angle."""
    diffs = np.unique(np.abs(positions[:, None] - positions[None, :]))
    diffs = diffs[diffs > 0]
    turns = diffs * angle / 180.0
    return bool(np.all(np.abs(turns - np.round(turns)) > tol))


def _branch_scheme(positions, angles):
    theta = np.outer(np.asarray(angles, dtype=float), positions).reshape(len(angles), positions.size)
    return EncodingScheme(theta, np.zeros_like(theta))


def _exact_ratios(vec, positions, angles):
    out = []
    for d in angles:
        t = np.deg2rad(positions * d)
        c0, c1 = np.dot(np.cos(t), vec), np.dot(np.sin(t), vec)
        out.append((d, None if abs(c1) < 1e-12 * max(1.0, abs(c0)) else c0 / c1))
    return out


def _branch_system(ratios, positions, zero_positions):
    angles = [d for d, _ in ratios]
    scheme = _branch_scheme(positions, angles)
    zero_idx = [int(np.searchsorted(positions, z)) for z in zero_positions]
    return assemble_system([(j, r) for j, (_, r) in enumerate(ratios)], scheme, zero_idx)


def _gate(angles, positions, zeros, placeholders):
    worst = np.inf
    for branch, vec in placeholders.items():
        m = _branch_system(_exact_ratios(vec, positions, angles), positions, zeros[branch])
        m = m / np.linalg.norm(m, axis=1, keepdims=True)
        s = np.linalg.svd(m, compute_uv=False)
        sig = np.zeros(positions.size)
        sig[:s.size] = s[:positions.size]
        worst = min(worst, sig[-2] / sig[0] if positions.size > 1 else np.inf)
    return worst


def _placeholders(positions, zeros):
    rng = np.random.default_rng(_PLACEHOLDER_SEED)
    out = {}
    for branch in ("a", "b"):
        v = rng.standard_normal(positions.size) + 1j * rng.standard_normal(positions.size)
        v[np.isin(positions, zeros[branch])] = 0
        out[branch] = v / np.linalg.norm(v)
    return out


def choose_theta_star(a_unit, b_unit, positions, grid=THETA_STAR_GRID) -> float:
    """Grid angle maximizing min(|sum a' cos(k t)|, |sum b' sin(k t)|)."""
    t = np.deg2rad(np.outer(grid, positions))
    score = np.minimum(np.abs(np.cos(t) @ a_unit), np.abs(np.sin(t) @ b_unit))
    return float(grid[int(np.argmax(score))])


def plan_runs(n_steps: int, initial, psi: float = 45.0) -> RunPlan:
    """Choose the run angles needed to reconstruct an ``n_steps`` walk.

    ``initial`` is the initial :class:`WalkState` or just its support.
    Angles start as midpoints of m equal slices of (0, 90) degrees; any angle
    that makes two window positions coincide is nudged, and the set is
    repaired greedily until both branch systems (built from fixed random
    placeholder coefficients) pass the conditioning gate.
    """
    if n_steps < 1:
        raise PlanningError("planning failed: need at least one step")
    if isinstance(initial, WalkState):
        support = tuple(initial.occupied())
        dist0 = position_distribution(initial)
    else:
        support = tuple(sorted(int(x) for x in initial))
        dist0 = None
    if not support:
        raise PlanningError("planning failed: empty initial support")
    parities = {x % 2 for x in support}
    if len(parities) != 1:
        raise PlanningError("planning failed: initial support mixes parities")
    parity = (parities.pop() + n_steps) % 2
    k_min, k_max = min(support) - n_steps, max(support) + n_steps
    positions = np.arange(k_min, k_max + 1, 2)
    zeros = {"a": (k_max,), "b": (k_min,)}
    m = positions.size - 2
    placeholders = _placeholders(positions, zeros)

    angles = []
    width = 90.0 / max(m, 1)
    for j in range(m):
        base = width * (j + 0.5)
        for nudge in (0.0, 0.1, -0.1, 0.2, -0.2, 0.3, -0.3, 0.4, -0.4):
            cand = base + nudge * width
            if cand not in angles and _coincidence_free(positions, cand):
                angles.append(cand)
                break
        else:
            raise PlanningError(f"planning failed: no coincidence-free angle near {base:.3f} deg")

    if m:
        gate = _gate(angles, positions, zeros, placeholders)
        rounds = 0
        while gate < PLAN_GATE and rounds < 3:
            rounds += 1
            for j in range(m):
                best = angles[j]
                for frac in np.linspace(0.05, 0.95, 19):
                    cand = width * (j + frac)
                    if cand in angles or not _coincidence_free(positions, cand):
                        continue
                    trial = angles[:j] + [cand] + angles[j + 1:]
                    g = _gate(trial, positions, zeros, placeholders)
                    if g > gate:
                        gate, best = g, cand
                angles[j] = best
        if gate < PLAN_GATE:
            raise PlanningError(f"planning failed: best conditioning {gate:.2e} below {PLAN_GATE:.0e}")

    theta_star = choose_theta_star(placeholders["a"], placeholders["b"], positions)
    return RunPlan(n_steps, float(psi), support, parity, int(k_min), int(k_max),
                   tuple(float(a) for a in angles), theta_star, dist0)


def recover_branch(ratios: Sequence[Tuple[float, Optional[complex]]], plan: RunPlan,
                   branch: str) -> Tuple[np.ndarray, NullSpaceReport]:
    """Unit, phase-fixed coefficients of one branch over ``plan.positions``.

    ``ratios`` holds ``(dtheta_deg, R)`` pairs measured on that branch's
    path; ``R=None`` stands for a run where C1 vanished.
    """
    if branch not in ("a", "b"):
        raise PolwalkError("branch must be 'a' or 'b'")
    system = _branch_system(list(ratios), plan.positions, plan.zeros[branch])
    return solve_null(system)


def recover_weights(a_unit, b_unit, r: float, theta_star: float, positions) -> Tuple[float, float]:
    """Branch norms (C_a, C_b) from the projective count ratio at ``theta_star``.

    With q = r |sum b' sin|^2 / |sum a' cos|^2 = C_a^2 / C_b^2 and
    C_a^2 + C_b^2 = 1.
    """
    a_unit = np.asarray(a_unit, dtype=np.complex128)
    b_unit = np.asarray(b_unit, dtype=np.complex128)
    if not np.any(b_unit):
        return 1.0, 0.0
    if not np.any(a_unit):
        return 0.0, 1.0
    t = np.deg2rad(np.asarray(positions) * theta_star)
    pa = abs(np.dot(np.cos(t), a_unit))
    pb = abs(np.dot(np.sin(t), b_unit))
    if pa < WEIGHT_TOL or pb < WEIGHT_TOL:
        raise WeightRecoveryError(f"weight recovery degenerate at theta*={theta_star}; re-plan theta*")
    if np.isinf(r):
        return 1.0, 0.0
    q = r * pb**2 / pa**2
    return float(np.sqrt(q / (1.0 + q))), float(np.sqrt(1.0 / (1.0 + q)))


def _herm_basis(d):
    out = []
    for i in range(d):
        e = np.zeros((d, d), dtype=np.complex128)
        e[i, i] = 1.0
        out.append(e)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=np.complex128)
            e[i, j] = e[j, i] = 1 / np.sqrt(2)
            out.append(e)
            e = np.zeros((d, d), dtype=np.complex128)
            e[i, j], e[j, i] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            out.append(e)
    return out


def _projections(basis_a, basis_b, counts, positions):
    t = np.deg2rad(np.outer([th for th, _ in counts], positions))
    return np.cos(t) @ basis_a, np.sin(t) @ basis_b, np.array([r for _, r in counts], dtype=float)


def _lifted_start(p, q, r):
    """Linear (lifted) solution: Hermitian blocks A, B with p^H A p = r q^H B q.

    Each count ratio is linear in the rank-one blocks A = aa^H, B = bb^H;
    the min-norm least-squares solution's top eigenvectors seed the
    nonlinear fit.
    """
    da, db = p.shape[1], q.shape[1]
    ea, eb = _herm_basis(da), _herm_basis(db)
    rows = []
    for pj, qj, rj in zip(p, q, r):
        ga, gb = np.outer(pj.conj(), pj), np.outer(qj.conj(), qj)
        rows.append([np.trace(e @ ga).real for e in ea] + [-rj * np.trace(e @ gb).real for e in eb])
    rows.append([np.trace(e).real for e in ea] + [np.trace(e).real for e in eb])
    rhs = np.zeros(len(rows))
    rhs[-1] = 1.0
    x, *_ = np.linalg.lstsq(np.array(rows), rhs, rcond=None)
    blk_a = sum(c * e for c, e in zip(x[:len(ea)], ea))
    blk_b = sum(c * e for c, e in zip(x[len(ea):], eb))
    wa, va = np.linalg.eigh(blk_a)
    wb, vb = np.linalg.eigh(blk_b)
    return np.concatenate([np.sqrt(max(wa[-1], 0.0)) * va[:, -1], np.sqrt(max(wb[-1], 0.0)) * vb[:, -1]])


def _joint_fit(basis_a, basis_b, counts, positions, rng, n_starts=12, patience=3):
    """Fit branch coordinates in the two null bases to the count ratios.

    Used when a branch's ratio system leaves more than one direction open.
    Residuals are the normalized mismatches (P_a - r P_b) / (2 (P_a + r P_b))
    plus the unit-norm condition; the best of a lifted start and
    up to ``n_starts`` random starts is kept; the search stops early once
    the data are matched or ``patience`` starts in a row bring no
    improvement. Returns (a, b, cost).
    """
    from scipy.optimize import least_squares

    da, db = basis_a.shape[1], basis_b.shape[1]
    p, q, r = _projections(basis_a, basis_b, counts, positions)
    finite = np.isfinite(r)

    def unpack(x):
        z = x[:da + db] + 1j * x[da + db:]
        return z[:da], z[da:]

    def residuals(x):
        al, be = unpack(x)
        pa = np.abs(p @ al) ** 2
        qb = np.abs(q @ be) ** 2
        with np.errstate(invalid="ignore", divide="ignore"):
            mis = np.where(finite, (pa - r * qb) / (2.0 * (pa + r * qb) + 1e-300), qb)
        norm = np.vdot(al, al).real + np.vdot(be, be).real - 1.0
        return np.concatenate([mis, [norm]])

    starts = []
    if np.all(finite):
        starts.append(_lifted_start(p, q, r))
    for _ in range(n_starts):
        z = rng.standard_normal(da + db) + 1j * rng.standard_normal(da + db)
        starts.append(z / np.linalg.norm(z))
    best, stale = None, 0
    for z in starts:
        if not np.any(z):
            continue
        sol = least_squares(residuals, np.concatenate([z.real, z.imag]), xtol=1e-10, ftol=1e-10, gtol=1e-10)
        if best is None or sol.cost < best.cost * (1 - 1e-6):
            best, stale = sol, 0
        else:
            stale += 1
        if best.cost < EXACT_COST or stale >= patience:
            break
    if best.cost < POLISH_COST:
        # near-exact data: drive the match to machine precision
        best = least_squares(residuals, best.x, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    al, be = unpack(best.x)
    return basis_a @ al, basis_b @ be, float(best.cost)


@dataclass(frozen=True)
class RunMeasurement:
    """One branch ratio: run angle (deg), path (0 = coin-0 branch, 1 = coin-1), R or None."""

    delta_theta: float
    path: int
    ratio: Optional[complex]


@dataclass(frozen=True)
class MeasurementData:
    """Everything the pipeline consumes.

    ``count_ratios`` holds projective count ratios ``(dtheta_deg, r)`` taken
    in the same runs; ``theta_star``/``r`` is the dedicated weight run.
    """

    runs: Tuple[RunMeasurement, ...]
    theta_star: Optional[float] = None
    r: Optional[float] = None
    count_ratios: Tuple[Tuple[float, float], ...] = ()

    def branch_ratios(self, path: int) -> List[Tuple[float, Optional[complex]]]:
        return [(m.delta_theta, m.ratio) for m in self.runs if m.path == path]

    def all_counts(self) -> List[Tuple[float, float]]:
        out = list(self.count_ratios)
        if self.theta_star is not None and self.r is not None:
            out.append((self.theta_star, self.r))
        return out

    def to_dict(self):
        def enc(z):
            return None if z is None else [float(np.real(z)), float(np.imag(z))]

        out = {"runs": [{"delta_theta_deg": m.delta_theta, "path": m.path, "R": enc(m.ratio)} for m in self.runs]}
        if self.theta_star is not None:
            out["weight"] = {"theta_star_deg": self.theta_star, "r": self.r}
        if self.count_ratios:
            out["count_ratios"] = [{"delta_theta_deg": t, "r": r} for t, r in self.count_ratios]
        return out

    @classmethod
    def from_dict(cls, d) -> "MeasurementData":
        runs = []
        for item in d["runs"]:
            raw = item.get("R")
            ratio = None if raw is None else complex(raw[0], raw[1])
            runs.append(RunMeasurement(float(item["delta_theta_deg"]), int(item["path"]), ratio))
        w = d.get("weight") or {}
        counts = tuple((float(c["delta_theta_deg"]), float(c["r"])) for c in d.get("count_ratios", ()))
        ts = w.get("theta_star_deg")
        r = w.get("r")
        return cls(tuple(runs), None if ts is None else float(ts), None if r is None else float(r), counts)


class _Simulator:
    """Runs the optical walk at a given dtheta and returns what the detectors would see."""

    def __init__(self, initial: WalkState, n_steps: int, psi: float, shots: int = 0, photons: int = 0,
                 noise_bound: float = 0.0, noise_model: str = "relative", rng=None):
        self.initial = initial
        self.n_steps = n_steps
        self.psi = psi
        self.shots = shots
        self.photons = photons
        self.noise_bound = noise_bound
        self.noise_model = noise_model
        self.rng = np.random.default_rng() if rng is None else rng

    def final(self, delta_theta):
        start, _ = optics.encode_walk(self.initial, delta_theta)
        return optics.physical_evolve(start, self.psi, delta_theta, self.n_steps)

    def ratio(self, state, path):
        branch = state.p0 if path == 0 else state.p1
        rec = optics.tomography(branch, self.shots, self.rng, path)
        try:
            r = extract_ratio(rec.rho)
        except RatioUndefinedError:
            return None
        if self.noise_bound:
            r = perturb_ratio(r, self.noise_bound, self.rng, self.noise_model)
        return r

    def count_ratio(self, state) -> float:
        if self.photons:
            return optics.sample_count_ratio(state, self.photons, self.rng)
        return optics.path_count_ratio(state)

    def measure_r(self, theta):
        return self.count_ratio(self.final(theta))


def simulate_measurements(initial: WalkState, plan: RunPlan, shots: int = 0, photons: int = 0,
                          noise_bound: float = 0.0, noise_model: str = "relative",
                          rng=None) -> Tuple[MeasurementData, Callable[[float], float]]:
    """Simulate every run of ``plan`` plus the weight run at ``plan.theta_star``.

    ``shots=0`` gives exact tomography, ``photons=0`` exact count ratios.
    Returns the data and a callable measuring the count ratio at any
    further angle (the pipeline uses it to re-run at a better theta*).
    """
    sim = _Simulator(initial, plan.n_steps, plan.psi, shots, photons, noise_bound, noise_model, rng)
    runs, counts = [], []
    for d in plan.run_angles:
        state = sim.final(d)
        for path in (0, 1):
            runs.append(RunMeasurement(d, path, sim.ratio(state, path)))
        try:
            counts.append((d, sim.count_ratio(state)))
        except PolwalkError:
            pass  # no denominator counts at this angle; the run still gave its R values
    try:
        r = sim.measure_r(plan.theta_star)
    except PolwalkError:
        r = None
    return MeasurementData(tuple(runs), plan.theta_star, r, tuple(counts)), sim.measure_r


@dataclass
class ReconstructionReport:
    a_unit: np.ndarray
    b_unit: np.ndarray
    c_a: float
    c_b: float
    state: WalkState
    distribution: PositionDistribution
    spread_speed: Optional[float]
    entropy: float
    diagnostics: dict
    fidelity_a: Optional[float] = None
    fidelity_b: Optional[float] = None
    total_variation: Optional[float] = None
    delta_entropy: Optional[float] = None
    delta_speed: Optional[float] = None

    def to_dict(self):
        def cplx(v):
            return [[float(z.real), float(z.imag)] for z in v]

        out = {
            "a_unit": cplx(self.a_unit),
            "b_unit": cplx(self.b_unit),
            "c_a": self.c_a,
            "c_b": self.c_b,
            "positions": [int(x) for x in self.state.positions],
            "a": cplx(self.state.a),
            "b": cplx(self.state.b),
            "distribution": {str(k): v for k, v in self.distribution.as_dict().items()},
            "spread_speed": self.spread_speed,
            "entropy": self.entropy,
            "diagnostics": self.diagnostics,
        }
        for key in ("fidelity_a", "fidelity_b", "total_variation", "delta_entropy", "delta_speed"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ReconstructionError:
        raise
    except PolwalkError as exc:
        raise ReconstructionError(name, exc) from exc


def _branch_fidelity(true_vec, unit):
    nrm = np.linalg.norm(true_vec)
    if nrm == 0:
        return 1.0 if not np.any(unit) else 0.0
    return fidelity(true_vec / nrm, unit)


def _extra_angles(k, positions):
    # spread over (0, 90), off the run grid
    out = []
    for j in range(k):
        d = 90.0 * (j + 0.37) / k
        while not _coincidence_free(positions, d):
            d += 0.013
        out.append(float(d))
    return out


def reconstruct_state(data: MeasurementData, plan: RunPlan, truth: Optional[WalkState] = None,
                      measure_r: Optional[Callable[[float], float]] = None,
                      null_tol: float = AMBIGUITY_TOL, rng=None) -> ReconstructionReport:
    """Assemble the walker/coin state from run data.

    Each branch's ratio rows go into one least-squares null-space solve. If
    both null spaces are one-dimensional, the weights follow in closed form
    from the count ratio at theta* (re-chosen from the recovered vectors and
    measured through ``measure_r`` when available). Otherwise the remaining
    freedom is fixed jointly from all count ratios in ``data``; ``measure_r``
    is then used to add angles if there are too few.

    Errors from each stage are re-raised as :class:`ReconstructionError`
    naming the stage.
    """
    pos = plan.positions
    rng = np.random.default_rng(0) if rng is None else rng
    sys_a = _stage("assemble", _branch_system, data.branch_ratios(0), pos, plan.zeros["a"])
    sys_b = _stage("assemble", _branch_system, data.branch_ratios(1), pos, plan.zeros["b"])
    basis_a, rep_a = _stage("recover_branch", null_basis, sys_a, null_tol)
    basis_b, rep_b = _stage("recover_branch", null_basis, sys_b, null_tol)
    dims = (basis_a.shape[1], basis_b.shape[1])
    diag = {
        "null_dims": {"a": dims[0], "b": dims[1]},
        "sigma_next_a": rep_a.gap,
        "sigma_next_b": rep_b.gap,
        "sigma_min_a": rep_a.sigma_min / rep_a.norm if rep_a.norm else 0.0,
        "sigma_min_b": rep_b.sigma_min / rep_b.norm if rep_b.norm else 0.0,
        "runs": len(plan.run_angles),
    }

    if dims == (1, 1):
        a_unit, b_unit = basis_a[:, 0], basis_b[:, 0]
        theta_star, r = data.theta_star, data.r
        if measure_r is not None:
            best = choose_theta_star(a_unit, b_unit, pos)
            if best != theta_star or r is None:
                theta_star, r = best, _stage("weights", measure_r, best)
        if theta_star is None or r is None:
            raise ReconstructionError("weights", WeightRecoveryError("no count ratio available for weight recovery"))
        c_a, c_b = _stage("weights", recover_weights, a_unit, b_unit, r, theta_star, pos)
        diag.update(method="closed_form", theta_star=theta_star, r=r)
    else:
        counts = data.all_counts()
        need = 2 * (dims[0] + dims[1])
        if len(counts) < need and measure_r is not None:
            for d in _extra_angles(need - len(counts), pos):
                try:
                    counts.append((d, measure_r(d)))
                except PolwalkError:
                    continue
        if not counts:
            raise ReconstructionError("joint", WeightRecoveryError("no count ratios to resolve the open null directions"))
        a, b, cost = _joint_fit(basis_a, basis_b, counts, pos, rng)
        c_a, c_b = float(np.linalg.norm(a)), float(np.linalg.norm(b))
        s = np.hypot(c_a, c_b)
        c_a, c_b = c_a / s, c_b / s
        a_unit = a / np.linalg.norm(a) if c_a > 0 else np.zeros_like(a)
        b_unit = b / np.linalg.norm(b) if c_b > 0 else np.zeros_like(b)
        diag.update(method="joint", count_ratios=len(counts), joint_cost=cost)

    a_unit = fix_phase(a_unit) if np.any(a_unit) else a_unit
    b_unit = fix_phase(b_unit) if np.any(b_unit) else b_unit
    width = plan.k_max - plan.k_min + 1
    a_full = np.zeros(width, dtype=np.complex128)
    b_full = np.zeros(width, dtype=np.complex128)
    a_full[pos - plan.k_min] = c_a * a_unit
    b_full[pos - plan.k_min] = c_b * b_unit
    nrm = np.sqrt(np.sum(np.abs(a_full) ** 2) + np.sum(np.abs(b_full) ** 2))
    state = WalkState(plan.k_min, a_full / nrm, b_full / nrm)
    dist = position_distribution(state)
    dist0 = plan.initial_distribution
    speed = spread_speed(dist, dist0, plan.n_steps) if dist0 is not None else None
    entropy = entanglement_entropy(coin_reduced_density(state))
    report = ReconstructionReport(a_unit, b_unit, c_a, c_b, state, dist, speed, entropy, diag)

    if truth is not None:
        ta, tb = truth.window(plan.k_min, plan.k_max)
        report.fidelity_a = _branch_fidelity(ta[pos - plan.k_min], a_unit)
        report.fidelity_b = _branch_fidelity(tb[pos - plan.k_min], b_unit)
        tdist = position_distribution(truth)
        report.total_variation = dist.total_variation(tdist)
        report.delta_entropy = abs(entropy - entanglement_entropy(coin_reduced_density(truth)))
        if speed is not None:
            report.delta_speed = abs(speed - spread_speed(tdist, dist0, plan.n_steps))
    return report


def reconstruct_walk(initial: WalkState, n_steps: int, psi: float = 45.0, shots: int = 0, photons: int = 0,
                     noise_bound: float = 0.0, noise_model: str = "relative", rng=None,
                     plan: Optional[RunPlan] = None, null_tol: Optional[float] = None) -> ReconstructionReport:
    """Plan, simulate and reconstruct an ``n_steps`` walk from ``initial``, with truth attached.

    ``null_tol`` defaults to :data:`AMBIGUITY_TOL` for noiseless data and to
    a noise-aware threshold otherwise.
    """
    rng = np.random.default_rng() if rng is None else rng
    plan = plan_runs(n_steps, initial, psi) if plan is None else plan
    data, measure_r = simulate_measurements(initial, plan, shots, photons, noise_bound, noise_model, rng)
    if null_tol is None:
        null_tol = noise_null_tol(shots, noise_bound)
    truth = evolve(initial, psi, n_steps)
    return reconstruct_state(data, plan, truth, measure_r, null_tol, rng)


def noise_null_tol(shots: int = 0, noise_bound: float = 0.0) -> float:
    """Relative singular-value threshold below which a direction counts as unresolved."""
    level = 0.0
    if shots:
        level = max(level, 1.0 / np.sqrt(shots))
    if noise_bound:
        level = max(level, noise_bound)
    return max(AMBIGUITY_TOL, NOISE_TOL_FACTOR * level)
