"""
Command-line interface.

    polwalk walk --psi 45 --init "0.8:-1:c0, 0.6:1:c0" --steps 6
    polwalk fig6a --paper-scale --seed 7

Every subcommand writes its files into ``--out`` (default: ``$POLWALK_OUT``
or the working directory) and prints their paths. Exit status is 0 on
success, 2 on usage or config errors, 1 on runtime errors; runtime errors
name the failing stage on stderr.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .encoding import (
    FIDELITY_CONVENTIONS,
    NOISE_MODELS,
    EncodingScheme,
    decode,
    fidelity,
    haar_state,
    measure_ratios,
)
from .errors import PolwalkError, ReconstructionError
from .experiments import DEFAULT_SEED, ScenarioConfig, run_scenario, write_outputs
from .formats import format_state, parse_state, write_csv, write_json
from .optics import PhotonBudget, implied_extra_loss, implied_survival, photon_budget
from .reconstruct import MeasurementData, plan_runs, reconstruct_state, reconstruct_walk
from .walk import (
    CoinOperator,
    coin_reduced_density,
    entanglement_entropy,
    evolve,
    position_distribution,
    spread_speed,
)

log = logging.getLogger("polwalk")

OUT_ENV = "POLWALK_OUT"

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "scenario": {"enum": ["fig3", "fig4", "fig5", "fig6a", "fig6b", "custom"]},
        "psi": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 90},
        "initial": {"type": ["string", "null"]},
        "steps": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "alpha_points": {"type": "integer", "minimum": 1},
        "alpha_max": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "alphas": {"type": ["array", "null"],
                   "items": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1}},
        "noise_model": {"enum": list(NOISE_MODELS)},
        "noise_bound": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "shots": {"type": "integer", "minimum": 0},
        "photons": {"type": "integer", "minimum": 0},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "output": {"type": ["string", "null"]},
        "grid": {"type": "integer", "minimum": 1},
        "dim": {"type": "integer", "minimum": 1},
        "delta_theta": {"type": "number"},
        "delta_phi": {"type": "number"},
        "models": {"type": "array", "items": {"enum": list(NOISE_MODELS)}, "minItems": 1},
        "sensitivity": {"type": "boolean"},
        "threads": {"type": "integer", "minimum": 1},
    },
}


class UsageError(Exception):
    """Bad invocation or config; exit status 2."""


def load_config(path) -> dict:
    """Read and validate a JSON config.

    Any output file that echoes its config (figure summaries, walk and
    reconstruction reports) is accepted too: its ``config`` member is used.
    """
    import jsonschema

    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if isinstance(data, dict) and isinstance(data.get("config"), dict):
        data = data["config"]
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"config field {where}: {exc.message}") from None
    return data


def _outdir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _merged(args, names, scenario):
    """Config file values, overridden by flags that were given."""
    base = load_config(args.config) if getattr(args, "config", None) else {}
    if base.get("scenario", scenario) != scenario:
        log.warning("config was written for %s; running %s", base["scenario"], scenario)
    base.pop("scenario", None)
    for name in names:
        v = getattr(args, name, None)
        if v is not None:
            base[name] = v
    if "steps" in base and isinstance(base["steps"], int):
        base["steps"] = [base["steps"]]
    return base


def _common(p, seed=True):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    if seed:
        p.add_argument("--seed", type=int, help=f"master seed (default {DEFAULT_SEED})")


def _noise(p):
    p.add_argument("--shots", type=int, help="tomography shots per basis (0 = exact)")
    p.add_argument("--photons", type=int, help="photons per count ratio (0 = exact)")
    p.add_argument("--noise-bound", dest="noise_bound", type=float, help="relative ratio error bound")
    p.add_argument("--noise-model", dest="noise_model", choices=NOISE_MODELS)
    p.add_argument("--trials", type=int)
    p.add_argument("--threads", type=int, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polwalk", description=__doc__.split("\n\n")[1].strip())
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("walk", help="evolve a walk and write its distribution")
    _common(p, seed=False)
    p.add_argument("--psi", type=float)
    p.add_argument("--init", dest="initial", help='initial state, e.g. "0.8:-1:c0, 0.6:1:c0"')
    p.add_argument("--steps", type=int)

    p = sub.add_parser("encode", help="encode coefficients into per-row ratios")
    _common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--coeffs", help="comma-separated complex coefficients")
    src.add_argument("--haar", type=int, metavar="N", help="draw a Haar-random N-dim state")
    p.add_argument("--delta-theta", dest="delta_theta", type=float, required=True)
    p.add_argument("--delta-phi", dest="delta_phi", type=float, required=True)
    p.add_argument("--rows", type=int, help="number of basis rows (default n-1)")

    p = sub.add_parser("decode", help="recover coefficients from a ratio file")
    _common(p, seed=False)
    p.add_argument("--input", required=True, help="JSON written by 'encode'")
    p.add_argument("--convention", choices=FIDELITY_CONVENTIONS, default="squared")

    p = sub.add_parser("reconstruct", help="simulate the runs of a walk and reconstruct it")
    _common(p)
    p.add_argument("--psi", type=float)
    p.add_argument("--init", dest="initial")
    p.add_argument("--steps", type=int)
    p.add_argument("--data", help="measurement JSON to use instead of simulating")
    _noise(p)

    for name, text in (("fig3", "coefficient tables for the 2/4/6-step walk"),
                       ("fig4", "coefficient table for the 6-step, three-site start"),
                       ("fig5", "spread speed and entropy versus alpha"),
                       ("fig6a", "encoding fidelity map"),
                       ("fig6b", "16-dimensional uniform state")):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--psi", type=float)
        _noise(p)
        if name in ("fig3", "fig4"):
            p.add_argument("--init", dest="initial")
            p.add_argument("--steps", type=int, nargs="+")
        if name == "fig5":
            p.add_argument("--steps", type=int, nargs="+")
            p.add_argument("--alpha-points", dest="alpha_points", type=int)
            p.add_argument("--alphas", type=float, nargs="+")
        if name == "fig6a":
            p.add_argument("--paper-scale", action="store_true", help="1000 trials per cell")
            p.add_argument("--grid", type=int)
            p.add_argument("--dim", type=int)
            p.add_argument("--models", nargs="+", choices=NOISE_MODELS)
            p.add_argument("--sensitivity", action="store_true", default=None,
                           help="also compute 24x24 and 48x48 grids")
        if name == "fig6b":
            p.add_argument("--dim", type=int)
            p.add_argument("--delta-theta", dest="delta_theta", type=float)
            p.add_argument("--delta-phi", dest="delta_phi", type=float)

    p = sub.add_parser("budget", help="photon budget of the loop setup")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--reflectivity", type=float, default=0.5, help="loop coupler reflectivity")
    p.add_argument("--extra-loss", dest="extra_loss", type=float, default=0.0)
    p.add_argument("--total-loss", dest="total_loss", type=float, help="measured loss per two steps")
    p.add_argument("--source-rate", dest="source_rate", type=float, default=1.0)
    p.add_argument("--efficiency", type=float, default=1.0, help="detection efficiency")
    p.add_argument("--steps", type=float, default=2)
    p.add_argument("--target-rate", dest="target_rate", type=float,
                   help="solve for the survival reaching this detected rate")
    return parser


# -- subcommands ----------------------------------------------------------------


def cmd_walk(args):
    cfg = _merged(args, ("psi", "initial", "steps"), "custom")
    psi = float(cfg.get("psi", 45.0))
    steps = cfg.get("steps", [1])
    n = int(steps[0] if isinstance(steps, list) else steps)
    if "initial" not in cfg or cfg["initial"] is None:
        raise UsageError("walk needs --init")
    init = parse_state(cfg["initial"])
    CoinOperator(psi)
    final = evolve(init, psi, n)
    dist = position_distribution(final)
    parities = {x % 2 for x in final.occupied()}
    rows = []
    for x in final.positions:
        if x % 2 not in parities:
            continue  # never reachable
        a, b = final.amplitude(int(x))
        rows.append({"position": int(x), "probability": dist.get(int(x)), "a": a, "b": b})
    out = _outdir(args)
    csv_path = out / "walk_distribution.csv"
    write_csv(csv_path, ("position", "probability", "a", "b"), rows,
              f"{n}-step walk, psi={psi} deg, initial {format_state(init)}")
    summary = {
        "config": {"psi": psi, "initial": cfg["initial"], "steps": [n]},
        "std": dist.std(), "mean": dist.mean(),
        "spread_speed": spread_speed(dist, position_distribution(init), n) if n else None,
        "entropy": entanglement_entropy(coin_reduced_density(final)),
    }
    json_path = out / "walk_summary.json"
    write_json(json_path, summary)
    return [csv_path, json_path]


def _parse_coeffs(text):
    vals = []
    for t in text.split(","):
        t = t.strip().replace(" ", "").replace("i", "j")
        if t:
            try:
                vals.append(complex(t))
            except ValueError:
                raise UsageError(f"bad coefficient {t!r}") from None
    if not vals:
        raise UsageError("no coefficients given")
    v = np.array(vals)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise UsageError("coefficients are all zero")
    if abs(nrm - 1) > 1e-6:
        log.warning("coefficient norm is %.9g, renormalizing", nrm)
    return v / nrm


def cmd_encode(args):
    seed = DEFAULT_SEED if args.seed is None else args.seed
    coeffs = haar_state(args.haar, np.random.default_rng(seed)) if args.haar else _parse_coeffs(args.coeffs)
    scheme = EncodingScheme.from_generator(coeffs.size, args.delta_theta, args.delta_phi, args.rows)
    ratios = measure_ratios(coeffs, scheme)
    doc = {
        "scheme": scheme.to_dict() if args.rows is None else
        {"n": scheme.n, "delta_theta_deg": args.delta_theta, "delta_phi_deg": args.delta_phi, "rows": args.rows},
        "ratios": [{"row": j, "R": None if r is None else [r.real, r.imag]} for j, r in ratios],
        "coefficients": [[z.real, z.imag] for z in coeffs],
        "seed": seed if args.haar else None,
    }
    path = _outdir(args) / "encoded.json"
    write_json(path, doc)
    return [path]


def cmd_decode(args):
    try:
        with open(args.input) as fh:
            doc = json.load(fh)
        scheme = EncodingScheme.from_dict(doc["scheme"])
        ratios = [(int(r["row"]), None if r["R"] is None else complex(*r["R"])) for r in doc["ratios"]]
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot read ratio file {args.input}: {exc}") from None
    vec = decode(ratios, scheme)
    out = _outdir(args)
    rows = [{"k": k + 1, "re": z.real, "im": z.imag, "abs": abs(z)} for k, z in enumerate(vec)]
    csv_path = out / "decoded.csv"
    write_csv(csv_path, ("k", "re", "im", "abs"), rows, "unit coefficients, phase fixed on the first nonzero entry")
    summary = {"n": scheme.n, "rows": len(ratios)}
    if doc.get("coefficients"):
        truth = np.array([complex(*c) for c in doc["coefficients"]])
        summary["fidelity"] = fidelity(truth, vec, args.convention)
        summary["fidelity_convention"] = args.convention
    json_path = out / "decoded_summary.json"
    write_json(json_path, summary)
    return [csv_path, json_path]


def cmd_reconstruct(args):
    cfg = _merged(args, ("psi", "initial", "steps", "shots", "photons", "noise_bound", "noise_model", "seed"),
                  "custom")
    if cfg.get("initial") is None:
        raise UsageError("reconstruct needs --init (the initial state fixes the window and the truth)")
    init = parse_state(cfg["initial"])
    psi = float(cfg.get("psi", 45.0))
    steps = cfg.get("steps", [1])
    n = int(steps[0] if isinstance(steps, list) else steps)
    seed = int(cfg.get("seed", DEFAULT_SEED))
    rng = np.random.default_rng(seed)
    if args.data:
        try:
            with open(args.data) as fh:
                data = MeasurementData.from_dict(json.load(fh))
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"cannot read measurement file {args.data}: {exc}") from None
        plan = _stage("plan", plan_runs, n, init, psi)
        report = reconstruct_state(data, plan, evolve(init, psi, n), rng=rng)
    else:
        report = reconstruct_walk(init, n, psi, shots=int(cfg.get("shots", 0)), photons=int(cfg.get("photons", 0)),
                                  noise_bound=float(cfg.get("noise_bound", 0.0)),
                                  noise_model=cfg.get("noise_model", "relative"), rng=rng)
    out = _outdir(args)
    st = report.state
    rows = []
    for x in st.positions:
        a, b = st.amplitude(int(x))
        if a != 0 or b != 0:
            rows.append({"position": int(x), "a": a, "b": b, "probability": report.distribution.get(int(x))})
    csv_path = out / "reconstruction.csv"
    write_csv(csv_path, ("position", "a", "b", "probability"), rows,
              "reconstructed state; each branch carries its own canonical phase")
    json_path = out / "reconstruction_report.json"
    doc = report.to_dict()
    doc["config"] = {"psi": psi, "initial": cfg["initial"], "steps": [n], "seed": seed,
                     **{k: cfg[k] for k in ("shots", "photons", "noise_bound", "noise_model") if k in cfg}}
    write_json(json_path, doc)
    return [csv_path, json_path]


def _stage(name, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except ReconstructionError:
        raise
    except PolwalkError as exc:
        raise ReconstructionError(name, exc) from exc


_FIG_FIELDS = ("psi", "initial", "steps", "shots", "photons", "noise_bound", "noise_model", "trials",
               "threads", "seed", "alpha_points", "alphas", "grid", "dim", "models", "sensitivity",
               "delta_theta", "delta_phi")


def cmd_figure(args):
    cfg = _merged(args, _FIG_FIELDS, args.command)
    paper = bool(getattr(args, "paper_scale", False))
    if paper and args.trials is None:
        cfg.pop("trials", None)
    outdir = _outdir(args)
    try:
        config = ScenarioConfig.for_scenario(args.command, paper_scale=paper, **cfg)
    except (PolwalkError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    out = run_scenario(config)
    return write_outputs(out, outdir)


def cmd_budget(args):
    try:
        b = PhotonBudget(args.reflectivity, args.extra_loss, args.source_rate, args.efficiency,
                         args.steps, args.total_loss)
    except PolwalkError as exc:
        raise UsageError(str(exc)) from None
    doc = {
        "config": {k: v for k, v in vars(args).items() if k not in ("out", "verbose")},
        "survival_per_two_steps": b.survival_per_two_steps,
        "detected_rate": photon_budget(b),
        "detected_fraction": photon_budget(b) / b.source_rate if b.source_rate else None,
    }
    if args.target_rate is not None:
        doc["implied_survival_per_two_steps"] = implied_survival(args.target_rate, b.source_rate, b.steps,
                                                                 b.detection_efficiency)
        try:
            doc["implied_extra_loss"] = implied_extra_loss(args.target_rate, b)
        except PolwalkError as exc:
            doc["implied_extra_loss"] = None
            doc["note"] = str(exc)
    path = _outdir(args) / "budget.json"
    write_json(path, doc)
    return [path]


_COMMANDS = {"walk": cmd_walk, "encode": cmd_encode, "decode": cmd_decode, "reconstruct": cmd_reconstruct,
             "fig3": cmd_figure, "fig4": cmd_figure, "fig5": cmd_figure, "fig6a": cmd_figure,
             "fig6b": cmd_figure, "budget": cmd_budget}


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        paths = _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"polwalk {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ReconstructionError as exc:
        print(f"polwalk {args.command}: failed in stage '{exc.stage}': {exc.cause}", file=sys.stderr)
        return 1
    except PolwalkError as exc:
        print(f"polwalk {args.command}: failed in stage '{args.command}': {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
