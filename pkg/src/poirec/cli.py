"""Command line entry point: ``poirec <command> [options]``.

Option values resolve as command line flag, then ``--config`` JSON file,
then built-in default.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from .aggregation import Measure
from .dataio import load_dataset
from .domain import DatasetError, ValidationError, validate
from .evaluation import cross_validate, format_csv, format_table, make_fold_plan
from .predictor import AlgorithmConfig, Family, Objective, algorithm_matrix, fit_model, top_n
from .synthetic import SyntheticSpec, generate_synthetic, write_synthetic

log = logging.getLogger("poirec")

DEFAULTS = {
    "dataset_dir": None,
    "schema": None,
    "folds": 5,
    "top_n": 5,
    "relevance_threshold": 4.0,
    "alpha_objective": "map",
    "alpha_step": 0.01,
    "seed": 0,
    "output": None,
    "format": "table",
    "algorithm": "Ind_Cos",
    "algorithms": None,
    "include_rated": False,
    "users": 100,
    "items": 50,
    "categories": 14,
    "alpha": "uniform",
    "noise": 0.3,
    "density": 0.7,
    "measure": "Ave",
    "exact_ratings": False,
}


class CliError(Exception):
    pass


def sample_dir() -> Path:
    return Path(str(resources.files("poirec") / "data" / "sample"))


def _add_common(p: argparse.ArgumentParser, data=True):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON file with option defaults")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--output", default=S, help="output file (or directory for synth)")
    p.add_argument("-v", "--verbose", action="store_true", default=S)
    if data:
        p.add_argument("--dataset-dir", default=S, help="dataset directory (default: bundled sample)")
        p.add_argument("--schema", default=S, help="schema file overriding the one in the dataset directory")


def _add_model(p: argparse.ArgumentParser, single=True):
    S = argparse.SUPPRESS
    if single:
        p.add_argument("--algorithm", default=S, help="e.g. Ind_Cos, MC_Ave, C-only_Min, Pref-only")
    p.add_argument("--top-n", type=int, default=S)
    p.add_argument("--relevance-threshold", type=float, default=S)
    p.add_argument("--alpha-objective", choices=["map", "rmse"], default=S)
    p.add_argument("--alpha-step", type=float, default=S)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="poirec", description="Sensory-aware Top-N PoI recommender")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a dataset and report violations")
    _add_common(p)

    p = sub.add_parser("recommend", help="Top-N list for one user")
    _add_common(p)
    _add_model(p)
    p.add_argument("--user", required=True)
    p.add_argument("--include-rated", action="store_true", default=S,
                   help="rank items the user already rated as well")

    p = sub.add_parser("fit-alpha", help="per-user alpha table")
    _add_common(p)
    _add_model(p)

    p = sub.add_parser("evaluate", help="k-fold evaluation of all algorithms")
    _add_common(p)
    _add_model(p, single=False)
    p.add_argument("--folds", type=int, default=S)
    p.add_argument("--format", choices=["csv", "table"], default=S)
    p.add_argument("--algorithms", default=S, help="comma-separated subset (default: all 13)")

    p = sub.add_parser("synth", help="generate a synthetic dataset with latent truth")
    _add_common(p, data=False)
    p.add_argument("--users", type=int, default=S)
    p.add_argument("--items", type=int, default=S)
    p.add_argument("--categories", type=int, default=S)
    p.add_argument("--alpha", default=S, help="'uniform', a value, or comma-separated values")
    p.add_argument("--noise", type=float, default=S)
    p.add_argument("--density", type=float, default=S)
    p.add_argument("--measure", default=S, help="measure generating compatibility (Min, Ave, Cos, RMSD)")
    p.add_argument("--exact-ratings", action="store_true", default=S, help="keep ratings unrounded")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    given = vars(args)
    if "config" in given:
        try:
            loaded = json.loads(Path(given["config"]).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config file {given['config']}: {exc}") from None
        if not isinstance(loaded, dict):
            raise CliError(f"config file {given['config']} must hold a JSON object")
        unknown = sorted(k for k in (key.replace("-", "_") for key in loaded) if k not in DEFAULTS)
        if unknown:
            raise CliError(f"unknown config keys: {', '.join(unknown)}")
        opts.update({k.replace("-", "_"): v for k, v in loaded.items()})
    opts.update({k: v for k, v in given.items() if k not in ("config", "command", "verbose")})
    opts["verbose"] = given.get("verbose", False)
    return opts


def _load(opts):
    directory = opts["dataset_dir"] or sample_dir()
    return load_dataset(directory, opts["schema"])


def _config(name, opts) -> AlgorithmConfig:
    try:
        return AlgorithmConfig.parse(name, alpha_objective=Objective(opts["alpha_objective"]),
                                     alpha_step=float(opts["alpha_step"]))
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _emit(text: str, output) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(opts) -> int:
    directory = opts["dataset_dir"] or sample_dir()
    try:
        dataset = load_dataset(directory, opts["schema"])
    except ValidationError as exc:
        for v in exc.violations:
            print(v)
        print(f"{len(exc.violations)} violation(s)", file=sys.stderr)
        return 1
    assert not validate(dataset)
    print(f"OK: {len(dataset.users)} users, {len(dataset.items)} items, "
          f"{sum(len(u.ratings) for u in dataset.users)} ratings")
    return 0


def cmd_recommend(opts) -> int:
    dataset = _load(opts)
    config = _config(opts["algorithm"], opts)
    uid = opts["user"]
    if not dataset.has_user(uid):
        raise CliError(f"unknown user {uid!r}")
    user = dataset.user(uid)
    if config.family is Family.IND and not user.ratings:
        raise CliError(f"user {uid!r} has no ratings to fit alpha on; use C-only, MC or Pref-only")
    items = {it.item_id: it for it in dataset.items}
    model = fit_model(config, [user], items, dataset.schema,
                      top_n=opts["top_n"], threshold=opts["relevance_threshold"])
    candidates = [it for it in dataset.sorted_items() if opts["include_rated"] or it.item_id not in user.ratings]
    if not candidates:
        print(f"user {uid!r} has rated every item; pass --include-rated to rank them anyway", file=sys.stderr)
    ranked = top_n(user, candidates, dataset.schema, model, opts["top_n"])
    _emit("".join(f"{iid}\t{score:.4f}\n" for iid, score in ranked), opts["output"])
    return 0


def cmd_fit_alpha(opts) -> int:
    dataset = _load(opts)
    config = _config(opts["algorithm"], opts)
    if config.family is not Family.IND:
        raise CliError(f"{config.name} has no per-user alpha; choose an Ind algorithm")
    rated = [u for u in dataset.sorted_users() if u.ratings]
    model = fit_model(config, rated, {it.item_id: it for it in dataset.items}, dataset.schema,
                      top_n=opts["top_n"], threshold=opts["relevance_threshold"])
    lines = ["user_id,alpha"] + [f"{uid},{model.alphas[uid]:.2f}" for uid in sorted(model.alphas)]
    _emit("\n".join(lines) + "\n", opts["output"])
    return 0


def cmd_evaluate(opts) -> int:
    dataset = _load(opts)
    if opts["algorithms"]:
        names = [n for n in str(opts["algorithms"]).split(",") if n.strip()]
        configs = [_config(n.strip(), opts) for n in names]
    else:
        configs = algorithm_matrix(Objective(opts["alpha_objective"]), float(opts["alpha_step"]))
    if opts["folds"] < 2:
        raise CliError("--folds must be at least 2")
    if opts["top_n"] < 1:
        raise CliError("--top-n must be at least 1")
    plan = make_fold_plan(dataset, opts["folds"], opts["seed"])
    if not plan.folds:
        raise CliError(f"no evaluable users: every user has fewer than {opts['folds']} ratings")
    settings = {k: opts[k] for k in ("folds", "top_n", "relevance_threshold", "alpha_objective",
                                     "alpha_step", "seed", "format")}
    settings["dataset_dir"] = str(opts["dataset_dir"] or "<bundled sample>")
    settings["algorithms"] = ",".join(c.name for c in configs)
    settings["users_evaluated"] = len(plan.folds)
    report = cross_validate(dataset, configs, plan, opts["top_n"], opts["relevance_threshold"], settings)
    text = format_csv(report) if opts["format"] == "csv" else format_table(report)
    output = opts["output"] or ("evaluation_report.csv" if opts["format"] == "csv" else "evaluation_report.txt")
    Path(output).write_text(text, encoding="utf-8")
    print(f"report written to {output}")
    return 0


def _parse_alpha(text):
    if isinstance(text, (int, float)):
        return float(text)
    text = str(text).strip()
    if text == "uniform":
        return text
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise CliError(f"--alpha must be 'uniform' or numbers, got {text!r}") from None
    return values[0] if len(values) == 1 else values


def cmd_synth(opts) -> int:
    if not opts["output"]:
        raise CliError("synth needs --output DIRECTORY")
    try:
        spec = SyntheticSpec(n_users=opts["users"], n_items=opts["items"], n_categories=opts["categories"],
                             alpha=_parse_alpha(opts["alpha"]), noise=opts["noise"], density=opts["density"],
                             seed=opts["seed"], measure=Measure.parse(opts["measure"]),
                             exact_ratings=bool(opts["exact_ratings"]))
    except ValueError as exc:
        raise CliError(str(exc)) from None
    dataset, truth = generate_synthetic(spec)
    write_synthetic(dataset, truth, opts["output"])
    print(f"wrote {len(dataset.users)} users, {len(dataset.items)} items to {opts['output']}")
    return 0


COMMANDS = {"validate": cmd_validate, "recommend": cmd_recommend, "fit-alpha": cmd_fit_alpha,
            "evaluate": cmd_evaluate, "synth": cmd_synth}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve(args)
        logging.basicConfig(level=logging.INFO if opts["verbose"] else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](opts)
    except (CliError, DatasetError, ValueError, OSError) as exc:
        print(f"poirec: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
