"""
Scenario runners for the published figures.

Every runner takes a :class:`ScenarioConfig` and returns a
:class:`ScenarioOutput`: named tables (one CSV each) plus a summary dict
(one JSON). Nothing is plotted here; the tables are plot-ready.

Randomness is always derived from the master seed through
``numpy.random.SeedSequence`` with a per-work-unit key, so results do not
depend on the number of worker processes.
"""

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .encoding import (
    EncodingScheme,
    DegenerateSchemeError,
    decode,
    fidelity,
    fix_phase,
    haar_state,
    measure_ratios,
    perturb_ratio,
)
from .errors import PolwalkError
from .formats import parse_state, write_csv, write_json
from .reconstruct import plan_runs, reconstruct_walk
from .walk import (
    PositionDistribution,
    WalkState,
    classical_walk,
    coin_reduced_density,
    entanglement_entropy,
    evolve,
    position_distribution,
    spread_speed,
)

__all__ = [
    "DEFAULT_SEED",
    "SCENARIOS",
    "ScenarioConfig",
    "SweepResult",
    "ScenarioOutput",
    "fig3_initial",
    "fig4_initial",
    "fig5_initial",
    "run_fig3",
    "run_fig4",
    "sweep_alpha",
    "fidelity_map",
    "fidelity_cell",
    "area_fraction",
    "run_fig6b",
    "run_scenario",
    "write_outputs",
]

DEFAULT_SEED = 20190415
SCENARIOS = ("fig3", "fig4", "fig5", "fig6a", "fig6b", "custom")
_SCENARIO_KEY = {name: i for i, name in enumerate(SCENARIOS)}
PAPER_SCALE_TRIALS = 1000
AREA_THRESHOLD = 0.90


def fig3_initial() -> WalkState:
    return WalkState.from_terms([(0.8, -1, 0), (0.6, 1, 0)])


def fig4_initial() -> WalkState:
    return WalkState.from_terms([(0.6, -2, 0), (1.0, 0, 0), (0.8, 2, 0)])


def fig5_initial(alpha: float) -> WalkState:
    """(alpha|-1> + sqrt(1-alpha^2)|1>) (|0> + i|1>)/sqrt(2)."""
    beta = np.sqrt(1.0 - alpha * alpha)
    h = 1 / np.sqrt(2)
    return WalkState.from_terms([(alpha * h, -1, 0), (1j * alpha * h, -1, 1),
                                 (beta * h, 1, 0), (1j * beta * h, 1, 1)])


_DEFAULTS = {
    "fig3": dict(steps=(2, 4, 6), shots=100_000, photons=100_000, trials=100),
    "fig4": dict(steps=(6,), shots=100_000, photons=100_000, trials=100),
    "fig5": dict(steps=(4, 16, 50), trials=1),
    "fig6a": dict(trials=200, noise_bound=0.10, dim=50, grid=36),
    "fig6b": dict(trials=100, noise_bound=0.10, dim=16, delta_theta=22.0, delta_phi=12.0),
    "custom": dict(steps=(4,), trials=1),
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Parameters of one scenario run.

    ``initial`` uses the ``amplitude:position:coin`` mini-language; ``None``
    selects the scenario's own state. ``shots`` is tomography shots per
    basis and ``photons`` the photons behind each count ratio (0 = exact).
    """

    scenario: str = "custom"
    psi: float = 45.0
    initial: Optional[str] = None
    steps: Tuple[int, ...] = (4,)
    alpha_points: int = 41
    alpha_max: float = 0.98
    alphas: Optional[Tuple[float, ...]] = None
    noise_model: str = "relative"
    noise_bound: float = 0.0
    shots: int = 0
    photons: int = 0
    trials: int = 1
    seed: int = DEFAULT_SEED
    output: Optional[str] = None
    grid: int = 36
    dim: int = 50
    delta_theta: float = 22.0
    delta_phi: float = 12.0
    models: Tuple[str, ...] = ("relative", "componentwise")
    sensitivity: bool = False
    threads: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise PolwalkError(f"unknown scenario {self.scenario!r}")
        if self.trials < 1:
            raise PolwalkError("trials must be >= 1")
        if any(int(n) < 1 for n in self.steps):
            raise PolwalkError("step counts must be >= 1")
        alphas = self.alpha_grid()
        if np.any(np.abs(alphas) >= 1.0):
            raise PolwalkError("alpha must lie in (-1, 1)")
        if self.threads < 1:
            raise PolwalkError("threads must be >= 1")
        if self.grid < 1 or self.dim < 1:
            raise PolwalkError("grid and dim must be >= 1")
        object.__setattr__(self, "steps", tuple(int(n) for n in self.steps))
        object.__setattr__(self, "models", tuple(self.models))
        if self.alphas is not None:
            object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    @classmethod
    def for_scenario(cls, scenario: str, paper_scale: bool = False, **overrides) -> "ScenarioConfig":
        """Scenario defaults, then ``overrides`` (``None`` values are ignored)."""
        if scenario not in _DEFAULTS:
            raise PolwalkError(f"unknown scenario {scenario!r}")
        kw = dict(_DEFAULTS[scenario])
        if paper_scale and scenario == "fig6a":
            kw["trials"] = PAPER_SCALE_TRIALS
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(scenario=scenario, **kw)

    def alpha_grid(self) -> np.ndarray:
        if self.alphas is not None:
            return np.asarray(self.alphas, dtype=float)
        return np.linspace(-self.alpha_max, self.alpha_max, self.alpha_points)

    def initial_state(self) -> WalkState:
        if self.initial is not None:
            return parse_state(self.initial)
        if self.scenario == "fig4":
            return fig4_initial()
        return fig3_initial()

    def seed_for(self, *key) -> np.random.SeedSequence:
        return np.random.SeedSequence([self.seed, _SCENARIO_KEY[self.scenario], *key])

    def to_dict(self):
        d = dataclasses.asdict(self)
        for k in ("steps", "models", "alphas"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d) -> "ScenarioConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - known
        if extra:
            raise PolwalkError(f"unknown config fields: {sorted(extra)}")
        return cls(**d)


@dataclass
class SweepResult:
    """One table of per-point records.

    Each record maps column name to value. Measured quantities come as
    ``<name>_mean`` / ``<name>_std`` pairs and every record carries
    ``trials``; theoretical columns are plain values.
    """

    name: str
    columns: Tuple[str, ...]
    records: List[dict]
    expected_size: Optional[int] = None
    description: str = ""

    def __post_init__(self):
        self.columns = tuple(self.columns)
        for rec in self.records:
            for c, v in rec.items():
                if c.endswith("_std") and v is not None and np.isfinite(v) and v < 0:
                    raise PolwalkError(f"negative standard deviation in column {c}")
        if self.expected_size is not None and len(self.records) != self.expected_size:
            raise PolwalkError(f"{self.name}: {len(self.records)} records, grid has {self.expected_size}")

    def column(self, name) -> np.ndarray:
        return np.array([rec.get(name) for rec in self.records])

    def to_csv(self, path):
        write_csv(path, self.columns, self.records, self.description or None)


@dataclass
class ScenarioOutput:
    config: ScenarioConfig
    tables: Dict[str, SweepResult]
    summary: dict = field(default_factory=dict)


def _mean_std(values) -> Tuple[float, float]:
    v = np.asarray(values, dtype=float)
    return float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0


def _pool_map(fn, jobs, threads):
    if threads <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * threads))))


# -- Figs. 3 and 4: reconstructed coefficient tables ----------------------------


def _canonical_branches(state: WalkState, lo: int, hi: int, positions):
    a, b = state.window(lo, hi)
    a, b = a[positions - lo], b[positions - lo]
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    a = na * fix_phase(a / na) if na > 0 else a
    b = nb * fix_phase(b / nb) if nb > 0 else b
    return a, b


def _walk_trial(job):
    initial, n, psi, shots, photons, bound, model, seq, plan = job
    rep = reconstruct_walk(initial, n, psi, shots=shots, photons=photons, noise_bound=bound,
                           noise_model=model, rng=np.random.default_rng(seq), plan=plan)
    a = rep.c_a * rep.a_unit
    b = rep.c_b * rep.b_unit
    return a, b, rep.total_variation


def _coefficient_tables(config: ScenarioConfig, initial: WalkState) -> ScenarioOutput:
    tables, summary = {}, {"initial_state": initial.as_dict(), "steps": {}}
    noisy = bool(config.shots or config.photons or config.noise_bound)
    trials = config.trials if noisy else 1
    for n in config.steps:
        plan = plan_runs(n, initial, config.psi)
        pos = plan.positions
        truth = evolve(initial, config.psi, n)
        ta, tb = _canonical_branches(truth, plan.k_min, plan.k_max, pos)
        jobs = [(initial, n, config.psi, config.shots, config.photons, config.noise_bound,
                 config.noise_model, config.seed_for(n, t), plan) for t in range(trials)]
        results = _pool_map(_walk_trial, jobs, config.threads)
        ra = np.array([r[0] for r in results])
        rb = np.array([r[1] for r in results])
        rp = np.abs(ra) ** 2 + np.abs(rb) ** 2
        tv = np.array([r[2] for r in results])
        records = []
        for i, x in enumerate(pos):
            rec = {
                "n": n, "position": int(x),
                "a_theory_re": ta[i].real, "a_theory_im": ta[i].imag,
                "b_theory_re": tb[i].real, "b_theory_im": tb[i].imag,
                "p_theory": abs(ta[i]) ** 2 + abs(tb[i]) ** 2,
                "trials": trials,
            }
            for name, arr in (("a_re", ra[:, i].real), ("a_im", ra[:, i].imag),
                              ("b_re", rb[:, i].real), ("b_im", rb[:, i].imag), ("p", rp[:, i])):
                rec[f"{name}_mean"], rec[f"{name}_std"] = _mean_std(arr)
            records.append(rec)
        cols = tuple(records[0])
        tables[f"{config.scenario}_n{n}"] = SweepResult(
            f"{config.scenario}_n{n}", cols, records, expected_size=pos.size,
            description=(f"{n}-step walk, psi={config.psi} deg; theory vs reconstruction; "
                         "branches in canonical phase; std across trials"))
        summary["steps"][n] = {
            "positions": pos.tolist(), "run_angles_deg": list(plan.run_angles),
            "tv_mean": float(tv.mean()), "tv_max": float(tv.max()),
            "p_theory_sum": float(sum(r["p_theory"] for r in records)),
        }
    summary["trials"] = trials
    return ScenarioOutput(config, tables, summary)


def run_fig3(config: ScenarioConfig) -> ScenarioOutput:
    """Theory and reconstruction tables for the 2-, 4- and 6-step walks from (0.8|-1> + 0.6|1>)|0>."""
    return _coefficient_tables(config, config.initial_state())


def run_fig4(config: ScenarioConfig) -> ScenarioOutput:
    """6-step table for (0.6|-2> + |0> + 0.8|2>)|0>/sqrt(2)."""
    return _coefficient_tables(config, config.initial_state())


# -- Fig. 5: spread speed and coin entropy versus alpha -------------------------

ENTROPY_REF_STEP = 40


def _alpha_point(job):
    alpha, steps, psi, overlay = job
    init = fig5_initial(alpha)
    dist0 = position_distribution(init)
    rec = {"alpha": alpha}
    ns = sorted(set(steps) | {ENTROPY_REF_STEP})
    state, done = init, 0
    for n in ns:
        state = evolve(state, psi, n - done)
        done = n
        if n in steps:
            rec[f"s_q_{n}"] = spread_speed(position_distribution(state), dist0, n)
        rec[f"E_{n}"] = entanglement_entropy(coin_reduced_density(state))
    cl0 = PositionDistribution.from_dict({-1: alpha * alpha, 1: 1.0 - alpha * alpha})
    for n in steps:
        rec[f"s_cl_{n}"] = spread_speed(classical_walk(cl0, n), cl0, n)
    if overlay is not None:
        n, shots, photons, bound, model, seqs = overlay
        s, e = [], []
        plan = plan_runs(n, init, psi)
        for seq in seqs:
            rep = reconstruct_walk(init, n, psi, shots=shots, photons=photons, noise_bound=bound,
                                   noise_model=model, rng=np.random.default_rng(seq), plan=plan)
            s.append(rep.spread_speed)
            e.append(rep.entropy)
        rec[f"s_rec_{n}_mean"], rec[f"s_rec_{n}_std"] = _mean_std(s)
        rec[f"E_rec_{n}_mean"], rec[f"E_rec_{n}_std"] = _mean_std(e)
        rec["trials"] = len(seqs)
    else:
        rec["trials"] = 1
    return rec


def sweep_alpha(config: ScenarioConfig) -> ScenarioOutput:
    """Quantum and classical spread speed s(alpha) and coin entropy E(alpha).

    The quantum walk starts from (alpha|-1> + sqrt(1-alpha^2)|1>)(|0>+i|1>)/sqrt(2);
    the classical baseline from {-1: alpha^2, +1: 1-alpha^2}. With noise
    settings, a reconstructed overlay is added for the smallest step count.
    """
    from scipy.stats import spearmanr

    alphas = config.alpha_grid()
    steps = tuple(config.steps)
    noisy = bool(config.shots or config.photons or config.noise_bound)
    n_over = min(steps)
    jobs = []
    for i, a in enumerate(alphas):
        overlay = None
        if noisy:
            seqs = [config.seed_for(i, t) for t in range(config.trials)]
            overlay = (n_over, config.shots, config.photons, config.noise_bound, config.noise_model, seqs)
        jobs.append((float(a), steps, config.psi, overlay))
    records = _pool_map(_alpha_point, jobs, config.threads)
    cols = ["alpha"]
    cols += [f"s_q_{n}" for n in steps] + [f"s_cl_{n}" for n in steps]
    cols += [f"E_{n}" for n in sorted(set(steps) | {ENTROPY_REF_STEP})]
    if noisy:
        cols += [f"s_rec_{n_over}_mean", f"s_rec_{n_over}_std", f"E_rec_{n_over}_mean", f"E_rec_{n_over}_std"]
    cols.append("trials")
    table = SweepResult("fig5", cols, records, expected_size=alphas.size,
                        description=f"spread speed and coin entropy (nats) vs alpha, psi={config.psi} deg")

    summary = {"alphas": alphas.size, "steps": list(steps)}
    mirror = np.array([np.argmin(np.abs(alphas + a)) for a in alphas])
    symmetric = bool(np.allclose(alphas[mirror], -alphas, atol=1e-12))
    for n in steps:
        sq, sc = table.column(f"s_q_{n}"), table.column(f"s_cl_{n}")
        e = table.column(f"E_{n}")
        entry = {
            "entropy_min": float(e.min()), "entropy_max": float(e.max()),
            "spearman_s_E": float(spearmanr(sq, e).statistic),
        }
        if symmetric:
            entry["quantum_asymmetry_max"] = float(np.max(np.abs(sq - sq[mirror])))
            entry["classical_asymmetry_max"] = float(np.max(np.abs(sc - sc[mirror])))
        summary[f"n{n}"] = entry
    if 50 in steps:
        summary["entropy_convergence_max"] = float(
            np.max(np.abs(table.column("E_50") - table.column(f"E_{ENTROPY_REF_STEP}"))))
    return ScenarioOutput(config, {"fig5": table}, summary)


# -- Fig. 6(a): encoding fidelity over (dtheta, dphi) ---------------------------


def _cell_points(grid: int, seed: int):
    """One sample point per cell of a grid x grid partition of (0, 180) x (0, 360) degrees.

    Points are drawn uniformly inside each cell (stratified sampling).
    Cell centres would sit on rational angles, where whole lines of
    exactly degenerate schemes (two labels on the same ray in every row)
    lie; those lines have zero area.
    """
    u = np.random.default_rng(np.random.SeedSequence([seed, 2, grid])).uniform(size=(grid, grid, 2))
    i, j = np.meshgrid(np.arange(grid), np.arange(grid), indexing="ij")
    return (i + u[..., 0]) * 180.0 / grid, (j + u[..., 1]) * 360.0 / grid


def _batch_null(m):
    """Null direction of each (rows x n) matrix in a stack, rows = n - 1.

    The last column of a complete QR of M^H spans the orthogonal
    complement of M's row space; cheaper than an SVD per trial.
    """
    q, _ = np.linalg.qr(np.conj(np.swapaxes(m, 1, 2)), mode="complete")
    return q[:, :, -1]


def fidelity_cell(states, delta_theta, delta_phi, bound, model, rng):
    """Squared and root fidelities of every state in ``states`` (trials x n) at one grid cell.

    Ratios come from the exact encoding, then get ``perturb_ratio`` noise
    (vectorized); rows with C1 ~ 0 use the C1 = 0 constraint instead.
    Raises DegenerateSchemeError for degenerate cells.
    """
    trials, n = states.shape
    scheme = EncodingScheme.from_generator(n, delta_theta, delta_phi)
    cos, sinp = scheme.tables()
    c0 = states @ cos.T
    c1 = states @ sinp.T
    dead = np.abs(c1) < 1e-10 * np.maximum(np.abs(c0), 1e-300)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(dead, 0.0, c0 / c1)
    if bound:
        if model == "relative":
            r = r * (1.0 + rng.uniform(-bound, bound, size=r.shape))
        elif model == "componentwise":
            e = rng.uniform(-bound, bound, size=(2,) + r.shape)
            r = r.real * (1.0 + e[0]) + 1j * r.imag * (1.0 + e[1])
        else:
            raise PolwalkError(f"unknown noise model {model!r}")
    m = cos[None] - r[..., None] * sinp[None]
    m = np.where(dead[..., None], sinp[None], m)
    v = _batch_null(m)
    ov = np.abs(np.einsum("ti,ti->t", states.conj(), v))
    ov = np.minimum(ov, 1.0)
    return ov ** 2, ov


def _fidelity_row(job):
    i, grid, dim, trials, bound, model, seed = job
    thetas, phis = _cell_points(grid, seed)
    states = _haar_states(dim, trials, seed)
    out = []
    for j in range(grid):
        cell = i * grid + j
        dt, dp = thetas[i, j], phis[i, j]
        rec = {"cell_theta": i, "cell_phi": j, "delta_theta": dt, "delta_phi": dp}
        rng = np.random.default_rng(np.random.SeedSequence([seed, 1, grid, cell]))
        try:
            f2, f1 = fidelity_cell(states, dt, dp, bound, model, rng)
        except DegenerateSchemeError as exc:
            rec.update({"status": f"degenerate: {exc}", "F_squared_mean": 0.0, "F_squared_std": 0.0,
                        "F_root_mean": 0.0, "F_root_std": 0.0, "trials": 0})
            out.append(rec)
            continue
        rec.update({"status": "ok", "trials": trials})
        rec["F_squared_mean"], rec["F_squared_std"] = _mean_std(f2)
        rec["F_root_mean"], rec["F_root_std"] = _mean_std(f1)
        out.append(rec)
    return out


def _haar_states(dim, trials, seed):
    # one state set shared by every cell: cells differ only by scheme and noise
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    return np.array([haar_state(dim, rng) for _ in range(trials)])


def area_fraction(table: SweepResult, column: str = "F_squared_mean", threshold: float = AREA_THRESHOLD) -> float:
    """Fraction of grid cells whose mean fidelity exceeds ``threshold`` (degenerate cells count as below)."""
    v = table.column(column).astype(float)
    return float(np.mean(v > threshold))


def _fidelity_grid(config: ScenarioConfig, grid: int, model: str) -> SweepResult:
    jobs = [(i, grid, config.dim, config.trials, config.noise_bound, model, config.seed) for i in range(grid)]
    rows = _pool_map(_fidelity_row, jobs, config.threads)
    records = [rec for row in rows for rec in row]
    cols = ("cell_theta", "cell_phi", "delta_theta", "delta_phi", "F_squared_mean", "F_squared_std",
            "F_root_mean", "F_root_std", "trials", "status")
    return SweepResult(
        f"fig6a_{model}_{grid}", cols, records, expected_size=grid * grid,
        description=(f"n={config.dim} encoding, {config.trials} Haar states per cell, "
                     f"+/-{config.noise_bound} {model} ratio noise; "
                     "F_squared = |<t|r>|^2, F_root = |<t|r>|; one sample point (degrees) per cell"))


def fidelity_map(config: ScenarioConfig) -> ScenarioOutput:
    """Mean encoding fidelity over the (dtheta, dphi) grid for each noise model.

    Both fidelity conventions are computed from the same trials; the
    summary lists area fractions (mean fidelity > 0.90) for each model and
    convention, and for the sensitivity grids when requested.
    """
    tables, summary = {}, {"grid": config.grid, "trials": config.trials, "dim": config.dim,
                           "noise_bound": config.noise_bound, "area": {}}
    grids = [config.grid] + ([24, 48] if config.sensitivity else [])
    for model in config.models:
        for grid in grids:
            table = _fidelity_grid(config, grid, model)
            key = model if grid == config.grid else f"{model}_{grid}"
            if grid == config.grid:
                tables[f"fig6a_{model}"] = table
            summary["area"][key] = {
                "squared": area_fraction(table, "F_squared_mean"),
                "root": area_fraction(table, "F_root_mean"),
                "degenerate_cells": int(sum(r["status"] != "ok" for r in table.records)),
            }
    return ScenarioOutput(config, tables, summary)


# -- Fig. 6(b): the 16-dimensional uniform state -------------------------------


def run_fig6b(config: ScenarioConfig) -> ScenarioOutput:
    """Encode and reconstruct the uniform state (1/4) sum_k |k> (k = 1..16 by default).

    Noiseless reconstruction plus ``trials`` noisy repetitions with
    ``noise_bound`` ratio noise.
    """
    n = config.dim
    truth = np.full(n, 1.0 / np.sqrt(n), dtype=np.complex128)
    scheme = EncodingScheme.from_generator(n, config.delta_theta, config.delta_phi)
    ratios = measure_ratios(truth, scheme)
    exact = decode(ratios, scheme)
    f_exact = fidelity(truth, exact)
    rec_noisy, f_noisy = [], []
    for t in range(config.trials if config.noise_bound else 0):
        rng = np.random.default_rng(config.seed_for(t))
        noisy = [(j, None if r is None else perturb_ratio(r, config.noise_bound, rng, config.noise_model))
                 for j, r in ratios]
        vec = decode(noisy, scheme)
        rec_noisy.append(vec)
        f_noisy.append(fidelity(truth, vec))
    rec_noisy = np.array(rec_noisy).reshape(-1, n)
    records = []
    for k in range(n):
        rec = {"k": k + 1, "truth": truth[k].real, "noiseless_re": exact[k].real, "noiseless_im": exact[k].imag}
        if len(f_noisy):
            rec["noisy_abs_mean"], rec["noisy_abs_std"] = _mean_std(np.abs(rec_noisy[:, k]))
        rec["trials"] = len(f_noisy)
        records.append(rec)
    cols = ["k", "truth", "noiseless_re", "noiseless_im"]
    if f_noisy:
        cols += ["noisy_abs_mean", "noisy_abs_std"]
    cols.append("trials")
    table = SweepResult("fig6b", cols, records, expected_size=n,
                        description=f"uniform {n}-dim state, dtheta={config.delta_theta}, dphi={config.delta_phi}")
    summary = {"fidelity_noiseless": f_exact, "rows": scheme.num_rows,
               "max_coefficient_error": float(np.max(np.abs(exact - truth)))}
    if f_noisy:
        summary["fidelity_noisy_mean"], summary["fidelity_noisy_std"] = _mean_std(f_noisy)
        summary["fidelity_noisy_min"] = float(np.min(f_noisy))
    return ScenarioOutput(config, {"fig6b": table}, summary)


_RUNNERS = {"fig3": run_fig3, "fig4": run_fig4, "fig5": sweep_alpha, "fig6a": fidelity_map, "fig6b": run_fig6b}


def run_scenario(config: ScenarioConfig) -> ScenarioOutput:
    if config.scenario not in _RUNNERS:
        raise PolwalkError(f"no runner for scenario {config.scenario!r}")
    return _RUNNERS[config.scenario](config)


def write_outputs(out: ScenarioOutput, outdir) -> List[Path]:
    """Write every table as CSV and the summary (with config echo) as JSON."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, table in out.tables.items():
        path = outdir / f"{name}.csv"
        table.to_csv(path)
        written.append(path)
    path = outdir / f"{out.config.scenario}_summary.json"
    write_json(path, {"config": out.config.to_dict(), "seed": out.config.seed, "summary": out.summary})
    written.append(path)
    return written
