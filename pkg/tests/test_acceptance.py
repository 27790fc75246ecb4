"""
Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and repeated in the pytest terminal summary
(see conftest.py), so they show up without ``-s``.
"""

import time

import numpy as np
import pytest

from oracles import dense_branches, dense_evolve
from polwalk.encoding import (
    AmbiguousNullSpaceError,
    EncodingScheme,
    assemble_system,
    decode,
    fidelity,
    haar_state,
    measure_ratios,
    solve_null,
)
from polwalk.experiments import ScenarioConfig, fidelity_map, run_fig6b, sweep_alpha
from polwalk.optics import (
    PhotonBudget,
    encode_walk,
    implied_extra_loss,
    implied_survival,
    photon_budget,
    physical_evolve,
    step_operator,
    tomography,
)
from polwalk.reconstruct import plan_runs, reconstruct_walk, simulate_measurements
from polwalk.walk import (
    CoinOperator,
    WalkState,
    coin_reduced_density,
    entanglement_entropy,
    evolve,
    position_distribution,
)

RESULTS = []

FIG3 = WalkState.from_terms([(0.8, -1, 0), (0.6, 1, 0)])
FIG4 = WalkState.from_terms([(0.6, -2, 0), (1.0, 0, 0), (0.8, 2, 0)])
GATE = 1e-6
AREA_TARGET = 0.41


def record(num, ok, detail, elapsed):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s) {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def random_walk_state(rng, max_sites=4, spread=4):
    parity = int(rng.integers(2))
    sites = rng.integers(-spread, spread + 1, size=int(rng.integers(1, max_sites + 1)))
    sites = sorted({int(x) if x % 2 == parity else int(x) + 1 for x in sites})
    z = rng.normal(size=(len(sites), 2)) + 1j * rng.normal(size=(len(sites), 2))
    return WalkState.from_terms([(z[i, c], x, c) for i, x in enumerate(sites) for c in (0, 1)])


def gated_scheme(a, rng):
    """Random generator scheme whose noiseless system for ``a`` passes the conditioning gate."""
    rejected = 0
    while True:
        s = EncodingScheme.from_generator(a.size, rng.uniform(0.5, 179.5), rng.uniform(0.5, 359.5))
        try:
            _, rep = solve_null(assemble_system(measure_ratios(a, s), s))
        except AmbiguousNullSpaceError:
            rejected += 1
            continue
        if rep.gap > GATE or a.size == 1:
            return s, rejected
        rejected += 1


def test_criterion_1_round_trip():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst, rejected, total = 1.0, 0, 0
    for n in (2, 4, 8, 16, 50):
        for _ in range(1000):
            a = haar_state(n, rng)
            s, rej = gated_scheme(a, rng)
            rejected += rej
            worst = min(worst, fidelity(a, decode(measure_ratios(a, s), s)))
            total += 1
    dt = time.perf_counter() - t0
    ok = worst >= 1 - 1e-9 and dt <= 120
    assert record(1, ok, f"{total} round trips, min fidelity 1-{1 - worst:.1e}, "
                         f"{rejected} schemes failed the gate and were redrawn", dt)


def test_criterion_2_physical_equals_abstract():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    angles = np.linspace(3.0, 57.0, 10) + 0.123
    worst, cases = 0.0, 0
    for _ in range(20):
        s0 = random_walk_state(rng)
        for d in angles:
            opt, _ = encode_walk(s0, d, normalize=False)
            state = s0
            for n in range(11):
                phys = physical_evolve(opt, 45.0, d, n)
                ref, _ = encode_walk(state, d, normalize=False)
                worst = max(worst, float(np.max(np.abs(phys.amps - ref.amps))))
                state = evolve(state, 45.0, 1)
                cases += 1
    dt = time.perf_counter() - t0
    assert record(2, worst <= 1e-12, f"{cases} (state, dtheta, n) cases, max discrepancy {worst:.1e}", dt)


def test_criterion_3_fig3_table():
    t0 = time.perf_counter()
    s = evolve(FIG3, 45.0, 2)
    amps = s.as_dict()
    expect = {-3: (0.4, 0.0), -1: (-0.1, 0.4), 1: (-0.3, 0.7), 3: (0.0, 0.3)}
    amp_err = max(max(abs(amps[x][0] - a), abs(amps[x][1] - b)) for x, (a, b) in expect.items())
    d = position_distribution(s).as_dict()
    p_err = max(abs(d[x] - p) for x, p in {-3: 0.16, -1: 0.17, 1: 0.58, 3: 0.09}.items())
    tvs = {n: reconstruct_walk(FIG3, n, rng=np.random.default_rng(n)).total_variation for n in (2, 4, 6)}
    dt = time.perf_counter() - t0
    ok = amp_err <= 1e-12 and p_err <= 1e-12 and all(tv < 1e-8 for tv in tvs.values())
    tv_txt = ", ".join(f"n={n} TV {tv:.1e}" for n, tv in tvs.items())
    assert record(3, ok, f"amplitude err {amp_err:.1e}, distribution err {p_err:.1e}; {tv_txt}", dt)


def test_criterion_4_fig4():
    t0 = time.perf_counter()
    tv = reconstruct_walk(FIG4, 6, rng=np.random.default_rng(4)).total_variation
    dt = time.perf_counter() - t0
    assert record(4, tv < 1e-8, f"6-step TV {tv:.1e}", dt)


def test_criterion_5_fig5():
    t0 = time.perf_counter()
    out = sweep_alpha(ScenarioConfig.for_scenario("fig5"))
    t = out.tables["fig5"]
    s4 = out.summary["n4"]
    e = np.concatenate([t.column(c) for c in t.columns if c.startswith("E_")])
    checks = {
        "a": s4["classical_asymmetry_max"] < 1e-12,
        "b": s4["quantum_asymmetry_max"] > 0.01,
        "c": bool(np.all(e >= -1e-12) and np.all(e <= np.log(2) + 1e-12)),
        "d": out.summary["entropy_convergence_max"] < 0.02,
        "e": s4["spearman_s_E"] > 0,
    }
    dt = time.perf_counter() - t0
    detail = (f"(a) classical asym {s4['classical_asymmetry_max']:.1e}; "
              f"(b) quantum asym {s4['quantum_asymmetry_max']:.3f}; "
              f"(c) E in [{e.min():.3f}, {e.max():.3f}]; "
              f"(d) max|E50-E40| {out.summary['entropy_convergence_max']:.4f}; "
              f"(e) spearman {s4['spearman_s_E']:.3f}; failed: {[k for k, v in checks.items() if not v]}")
    assert record(5, all(checks.values()) and dt <= 60, detail, dt)


def _area_check(trials, tol, limit, label):
    t0 = time.perf_counter()
    out = fidelity_map(ScenarioConfig.for_scenario("fig6a", trials=trials))
    dt = time.perf_counter() - t0
    area = out.summary["area"]
    hits = [m for m in ("relative", "componentwise") if abs(area[m]["root"] - AREA_TARGET) <= tol]
    detail = (f"{label}: {trials} trials, 36x36; area(F>0.9) with F=|<t|r>|: "
              f"relative {area['relative']['root']:.4f}, componentwise {area['componentwise']['root']:.4f}; "
              f"with F=|<t|r>|^2: relative {area['relative']['squared']:.4f}, "
              f"componentwise {area['componentwise']['squared']:.4f}; "
              f"target {AREA_TARGET}+/-{tol}; within: {hits or 'none'}")
    return record(6, bool(hits) and dt <= limit, detail, dt)


def test_criterion_6_fig6a_desk_scale():
    assert _area_check(200, 0.15, 180, "desk scale")


def test_criterion_6_fig6a_paper_scale():
    assert _area_check(1000, 0.10, 1800, "paper scale")


def test_criterion_7_fig6b():
    t0 = time.perf_counter()
    out = run_fig6b(ScenarioConfig.for_scenario("fig6b", noise_bound=0.0))
    f = out.summary["fidelity_noiseless"]
    dt = time.perf_counter() - t0
    assert record(7, f >= 0.999, f"noiseless fidelity {f:.12f} from {out.summary['rows']} rows", dt)


def test_criterion_8_invariants():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    counts = dict.fromkeys(("norm", "parity", "unitarity", "phase", "psd", "oracle", "replay"), 0)
    failures = []

    for _ in range(2000):
        s0 = random_walk_state(rng)
        psi, n = rng.uniform(1, 89), int(rng.integers(1, 13))
        s = evolve(s0, psi, n)
        counts["norm"] += 1
        if abs(np.sum(np.abs(s.a) ** 2 + np.abs(s.b) ** 2) - 1) > 1e-12:
            failures.append("norm")
        counts["parity"] += 1
        par0 = {x % 2 for x in s0.occupied()}
        if any((x - n) % 2 not in par0 for x in s.occupied()):
            failures.append("parity")

    for _ in range(1000):
        psi, d = rng.uniform(1, 89), rng.uniform(-180, 180)
        for u in (step_operator(psi, d), CoinOperator(psi).matrix):
            counts["unitarity"] += 1
            if np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) > 1e-12:
                failures.append("unitarity")

    for _ in range(1500):
        s = evolve(random_walk_state(rng), 45.0, int(rng.integers(0, 8)))
        t = s.with_branch_phases(*rng.uniform(0, 2 * np.pi, size=2))
        d0, d1 = position_distribution(s), position_distribution(t)
        e0 = entanglement_entropy(coin_reduced_density(s))
        e1 = entanglement_entropy(coin_reduced_density(t))
        counts["phase"] += 1
        if d0.total_variation(d1) > 1e-12 or abs(e0 - e1) > 1e-12:
            failures.append("phase")

    for _ in range(1000):
        psi_pol = rng.normal(size=2) + 1j * rng.normal(size=2)
        rho = tomography(psi_pol, int(rng.integers(1, 2000)), rng).rho
        rho_c = coin_reduced_density(evolve(random_walk_state(rng), 45.0, 3))
        for m in (rho, rho_c):
            counts["psd"] += 1
            if (np.max(np.abs(m - m.conj().T)) > 1e-12 or abs(np.trace(m) - 1) > 1e-12
                    or np.linalg.eigvalsh(m).min() < -1e-12):
                failures.append("psd")

    for _ in range(1000):
        s0 = random_walk_state(rng, max_sites=3, spread=2)
        psi, n = rng.uniform(1, 89), int(rng.integers(1, 7))
        terms = [(z, int(x), c) for x in s0.occupied() for c, z in enumerate(s0.amplitude(x))]
        width = 3 + n + 1
        xs, da, db = dense_branches(dense_evolve(terms, psi, n, width), width)
        a, b = evolve(s0, psi, n).window(-width, width)
        counts["oracle"] += 1
        if max(np.max(np.abs(a - da)), np.max(np.abs(b - db))) > 1e-12:
            failures.append("oracle")

    plan = plan_runs(2, FIG3)
    for seed in range(500):
        runs = [simulate_measurements(FIG3, plan, shots=500, photons=500, noise_bound=0.05,
                                      rng=np.random.default_rng(seed))[0] for _ in range(2)]
        counts["replay"] += 1
        if runs[0] != runs[1]:
            failures.append("replay")

    total = sum(counts.values())
    dt = time.perf_counter() - t0
    ok = not failures and total >= 10_000 and dt <= 120
    detail = f"{total} randomized cases ({', '.join(f'{k} {v}' for k, v in counts.items())}); " \
             f"{len(failures)} failures"
    assert record(8, ok, detail, dt)


def test_criterion_9_budget():
    t0 = time.perf_counter()
    frac = photon_budget(PhotonBudget(coupler_reflectivity=0.5, total_loss=0.7, source_rate=1.0, steps=2))
    b = PhotonBudget(coupler_reflectivity=0.99, source_rate=5e6, steps=150)
    surv = implied_survival(1e4, 5e6, 150)
    extra = implied_extra_loss(1e4, b)
    back = photon_budget(PhotonBudget(coupler_reflectivity=0.99, extra_loss=extra, source_rate=5e6, steps=150))
    dt = time.perf_counter() - t0
    ok = abs(frac - 0.30) < 1e-15 and abs(back - 1e4) < 1e-6
    assert record(9, ok, f"2-step fraction {frac:.12g}; 150 steps at 5 MHz -> 1e4/s needs survival "
                         f"{surv:.12g} per two steps, i.e. extra loss {extra:.12g} beyond a 99:1 coupler", dt)
