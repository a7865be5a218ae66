"""Command-line surface: fit models, run constructs, sweep OSF, export data.

Commands::

    treatplan fit INPUT.csv --model-class global -o model.txt
    treatplan simulate CONFIG.ini -o OUTDIR [--trajectories DATA.csv]
    treatplan sweep CONFIG.ini -o OUTDIR --osf 0,1,2,3 [--mode both]
    treatplan export-trajectories CONFIG.ini -o OUT.csv

Exit status is 0 on success and 2 on any categorized error (the message
names the error class); unexpected failures surface as tracebacks.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .cohort import ConstructSpec, run_construct, sweep_osf
from .config import RunConfig, RunManifest, parse_config
from .dataio import load_model, read_trajectories, save_model, write_trajectories
from .errors import ConfigError, TreatplanError
from .planner import BackupMode
from .policies import PolicyKind, PolicySpec
from .simulate import (
    default_world_model,
    episode_to_trajectory,
    generate_population,
    run_episode,
)
from .rng import substream
from .transitions import MODEL_CLASS_BY_NAME, ModelClass, TransitionModel, fit


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _resolve_models(
    cfg: RunConfig,
    trajectories: Optional[str],
    world_model_file: Optional[str],
) -> tuple[TransitionModel, dict[ModelClass, TransitionModel], str]:
    """World dynamics plus one planner model per class the constructs need.

    Without a trajectory file the planner models reuse the built-in synthetic
    dynamics (a closed loop: the planner knows the true world); with one they
    are fitted from the data.
    """
    scale = cfg.simulation.scale
    if world_model_file:
        world = load_model(world_model_file, scale)
        source = f"file:{world_model_file}"
    else:
        world = default_world_model(cfg.world_model_class, scale)
        source = "builtin"

    needed = {c.policy.model_class for c in cfg.constructs}
    planner_models: dict[ModelClass, TransitionModel] = {}
    if trajectories:
        data = read_trajectories(trajectories)
        for mc in needed:
            planner_models[mc] = fit(data, mc, scale)
        source += f"+fitted:{trajectories}"
    else:
        for mc in needed:
            if mc is cfg.world_model_class:
                planner_models[mc] = world
            else:
                planner_models[mc] = default_world_model(mc, scale)
    return world, planner_models, source


def _write_results_csv(path: Path, results: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "construct",
                "decision_model",
                "transition_model",
                "missing_obs",
                "osf",
                "replications",
                "cpuc",
                "avg_final_delta",
                "std_dev_final_delta",
                "avg_services",
                "pct_max_dosage",
            ]
        )
        for res in results:
            spec = res.spec
            model_name = (
                "n/a" if spec.policy.kind is PolicyKind.HARD_STOP else spec.policy.model_class.value
            )
            writer.writerow(
                [
                    spec.name,
                    spec.policy.kind.value,
                    model_name,
                    "yes" if spec.include_missing else "no",
                    _fmt(spec.osf),
                    spec.replications,
                    _fmt(res.mean_cpuc),
                    _fmt(res.mean_final_delta),
                    _fmt(res.std_final_delta),
                    _fmt(res.mean_services),
                    _fmt(res.pct_max_dosage),
                ]
            )


def _episode_records(res) -> list[dict]:
    out = []
    for rep_idx, rep in enumerate(res.replications):
        for ep in rep.episodes:
            out.append(
                {
                    "replication": rep_idx,
                    "patient_id": ep.patient_id,
                    "baseline": ep.baseline_score,
                    "sessions_used": ep.outcome.sessions_used,
                    "total_cost": ep.outcome.total_cost,
                    "final_delta": ep.outcome.final_delta,
                    "max_dosage": ep.outcome.max_dosage,
                    "sessions": [
                        {
                            "session": r.session,
                            "score": r.true_score_after,
                            "observed": None if r.observation.is_missing else r.observation.score,
                            "cost": r.cost,
                        }
                        for r in ep.sessions
                    ],
                }
            )
    return out


def cmd_fit(args) -> int:
    data = read_trajectories(args.input)
    model_class = MODEL_CLASS_BY_NAME[args.model_class]
    model = fit(data, model_class)
    save_model(model, args.output)
    diag_path = args.diagnostics or f"{args.output}.diagnostics.json"
    diag = model.diagnostics.to_dict()
    Path(diag_path).write_text(json.dumps(diag, indent=2, sort_keys=True) + "\n")
    print(f"fitted {model_class.value} model from {diag['events_total']} transitions")
    print(f"wrote {args.output} and {diag_path}")
    if diag["smoothed_rows"]:
        print(f"note: uniform fallback for unobserved rows: {diag['smoothed_rows']}")
    if diag["effect_fallback_bins"]:
        print(f"note: default effect params for sparse bins: {diag['effect_fallback_bins']}")
    return 0


def cmd_simulate(args) -> int:
    cfg = parse_config(args.config, seed_override=args.seed)
    if not cfg.constructs:
        raise ConfigError("config lists no constructs")
    world, planner_models, source = _resolve_models(cfg, args.trajectories, args.world_model_file)
    population = generate_population(cfg.simulation, world)

    results = []
    for spec in cfg.constructs:
        results.append(
            run_construct(
                spec,
                population,
                cfg.simulation,
                planner_models[spec.policy.model_class],
                osf_scale=cfg.osf_scale,
                keep_episodes=args.verbose_json,
            )
        )

    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    results_path = outdir / "results.csv"
    _write_results_csv(results_path, results)
    outputs = ["results.csv"]
    if args.verbose_json:
        verbose = {
            res.spec.name: {
                "metrics": {
                    "cpuc": res.mean_cpuc,
                    "avg_final_delta": res.mean_final_delta,
                    "std_dev_final_delta": res.std_final_delta,
                    "avg_services": res.mean_services,
                    "pct_max_dosage": res.pct_max_dosage,
                },
                "episodes": _episode_records(res),
            }
            for res in results
        }
        (outdir / "results.json").write_text(json.dumps(verbose, indent=2, sort_keys=True) + "\n")
        outputs.append("results.json")

    _manifest("simulate", args.config, cfg, outdir, outputs, source).write(outdir / "manifest.json")
    print(f"wrote {results_path}")
    return 0


def cmd_sweep(args) -> int:
    cfg = parse_config(args.config, seed_override=args.seed)
    base = next((c for c in cfg.constructs if c.policy.kind is PolicyKind.MDP), None)
    if base is None:
        raise ConfigError("osf sweeps need an mdp construct in the config")
    try:
        osf_values = [float(v) for v in args.osf.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --osf list: {args.osf!r}") from None
    if not osf_values:
        raise ConfigError("--osf lists no values")
    modes = {
        "normal": [BackupMode.NORMAL],
        "maxprob": [BackupMode.MAXPROB],
        "both": [BackupMode.NORMAL, BackupMode.MAXPROB],
    }[args.mode]

    world, planner_models, source = _resolve_models(cfg, args.trajectories, args.world_model_file)
    population = generate_population(cfg.simulation, world)

    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    sweep_path = outdir / "sweep.csv"
    with open(sweep_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["mode", "osf", "cpuc", "avg_final_delta", "std_dev_final_delta",
             "avg_services", "pct_max_dosage"]
        )
        for mode in modes:
            from dataclasses import replace

            spec = replace(base, policy=replace(base.policy, mode=mode))
            rows = sweep_osf(
                spec,
                osf_values,
                population,
                cfg.simulation,
                planner_models[base.policy.model_class],
                osf_scale=cfg.osf_scale,
            )
            for osf, res in rows:
                writer.writerow(
                    [
                        mode.value,
                        _fmt(osf),
                        _fmt(res.mean_cpuc),
                        _fmt(res.mean_final_delta),
                        _fmt(res.std_final_delta),
                        _fmt(res.mean_services),
                        _fmt(res.pct_max_dosage),
                    ]
                )

    _manifest(
        "sweep", args.config, cfg, outdir, ["sweep.csv"], source,
        extras={"osf_values": osf_values, "modes": [m.value for m in modes]},
    ).write(outdir / "manifest.json")
    print(f"wrote {sweep_path}")
    return 0


def cmd_export_trajectories(args) -> int:
    cfg = parse_config(args.config, seed_override=args.seed)
    scale = cfg.simulation.scale
    if args.world_model_file:
        world = load_model(args.world_model_file, scale)
        source = f"file:{args.world_model_file}"
    else:
        world = default_world_model(cfg.world_model_class, scale)
        source = "builtin"
    population = generate_population(cfg.simulation, world)
    policy = PolicySpec(kind=PolicyKind.RAW_EFFECT, model_class=world.model_class)
    trajectories = []
    for agent in population:
        ep = run_episode(
            agent,
            policy,
            None,
            cfg.simulation,
            obs_rng=substream(cfg.simulation.seed, "obs", agent.index, 0),
        )
        trajectories.append(episode_to_trajectory(ep))
    write_trajectories(trajectories, args.output)

    manifest_path = Path(args.output).with_suffix(".manifest.json")
    _manifest(
        "export-trajectories", args.config, cfg, Path(args.output).parent,
        [Path(args.output).name], source,
    ).write(manifest_path)
    print(f"wrote {args.output} ({len(trajectories)} trajectories)")
    return 0


def _manifest(
    command: str,
    config_path: str,
    cfg: RunConfig,
    outdir: Path,
    outputs: list[str],
    world_source: str,
    extras: Optional[dict] = None,
) -> RunManifest:
    return RunManifest(
        command=command,
        tool_version=__version__,
        config_path=str(config_path),
        config_text=Path(config_path).read_text(),
        seed=cfg.simulation.seed,
        output_dir=str(outdir),
        outputs=tuple(outputs),
        simulation=cfg.simulation_dict(),
        constructs=tuple(cfg.construct_dicts()),
        world_model_source=world_source,
        extras=extras or {},
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treatplan",
        description="Treatment-planning simulation: fit transition models, "
        "run policy constructs, sweep the outcome scaling factor.",
    )
    parser.add_argument("--version", action="version", version=f"treatplan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a transition model from a trajectory CSV")
    p.add_argument("input", help="trajectory CSV (patient_id,session,score,cost)")
    p.add_argument(
        "--model-class", choices=sorted(MODEL_CLASS_BY_NAME), default="global",
        help="conditioning convention (default: global)",
    )
    p.add_argument("-o", "--output", required=True, help="model file to write")
    p.add_argument("--diagnostics", help="fit diagnostics JSON (default: OUTPUT.diagnostics.json)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="run every construct in a config over one population")
    p.add_argument("config", help="run config (INI)")
    p.add_argument("-o", "--output-dir", default="treatplan-out", help="output directory")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--trajectories", help="fit planner models from this trajectory CSV")
    p.add_argument("--world-model-file", help="load world dynamics from a model file")
    p.add_argument(
        "--verbose-json", action="store_true",
        help="also write per-episode records to results.json",
    )
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="rerun the config's mdp construct across OSF values")
    p.add_argument("config", help="run config (INI)")
    p.add_argument("-o", "--output-dir", default="treatplan-out", help="output directory")
    p.add_argument("--osf", required=True, help="comma-separated OSF values, e.g. 0,1,2,3")
    p.add_argument("--mode", choices=["normal", "maxprob", "both"], default="normal")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--trajectories", help="fit planner models from this trajectory CSV")
    p.add_argument("--world-model-file", help="load world dynamics from a model file")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser(
        "export-trajectories",
        help="simulate always-treat episodes and write them in the fit CSV format",
    )
    p.add_argument("config", help="run config (INI)")
    p.add_argument("-o", "--output", required=True, help="CSV file to write")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--world-model-file", help="load world dynamics from a model file")
    p.set_defaults(func=cmd_export_trajectories)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TreatplanError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
