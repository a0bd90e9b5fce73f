"""Command-line front end.

    heatchain <experiment> [--config file.json] [--<field> value ...]

Experiments: scaling, equilibrium, linearity, spectral, strength.  Every
ExperimentConfig field is a flag (underscores become dashes); a JSON
config file supplies defaults that flags override.  Exit codes: 0 success,
2 configuration error, 3 numerical failure.
"""

import argparse
import dataclasses
import json
import sys

from .errors import (
    ConfigError,
    DegeneracyError,
    DegenerateCouplingError,
    NumericalError,
    ParameterError,
    PathologicalCouplingError,
    StructuralError,
)
from .experiments import (
    EXPERIMENT_KINDS,
    OUT_DIR_ENV,
    ExperimentConfig,
    emit_outputs,
    run_experiment,
)

_CONFIG_ERRORS = (ConfigError, ParameterError, DegenerateCouplingError)
_NUMERICAL_ERRORS = (NumericalError, DegeneracyError, StructuralError, PathologicalCouplingError)


def _parse_tuple(kind):
    def parse(text: str):
        return tuple(kind(part) for part in text.split(",") if part)

    return parse


def _parse_optional_float(text: str):
    return None if text.lower() in ("none", "auto") else float(text)


def _flag_name(field: str) -> str:
    if field == "n_realizations":
        return "--realizations"
    return "--" + field.replace("_", "-")


def _type_name(annotation) -> str:
    if isinstance(annotation, str):
        return annotation
    if annotation in (int, float, str):
        return annotation.__name__
    return str(annotation)


def _add_config_flags(parser: argparse.ArgumentParser):
    for f in dataclasses.fields(ExperimentConfig):
        if f.name == "experiment":
            continue
        flag = _flag_name(f.name)
        tname = _type_name(f.type)
        if tname == "int":
            parser.add_argument(flag, dest=f.name, type=int)
        elif tname == "float":
            parser.add_argument(flag, dest=f.name, type=float)
        elif tname == "float | None":
            parser.add_argument(flag, dest=f.name, type=_parse_optional_float)
        elif tname == "str | None":
            parser.add_argument(flag, dest=f.name, type=str)
        elif tname == "tuple[int, ...]":
            parser.add_argument(flag, dest=f.name, type=_parse_tuple(int),
                                metavar="N,N,...")
        elif tname == "tuple[float, ...]":
            parser.add_argument(flag, dest=f.name, type=_parse_tuple(float),
                                metavar="X,X,...")
        elif tname == "tuple[str, ...]":
            parser.add_argument(flag, dest=f.name, type=_parse_tuple(str),
                                metavar="FMT,FMT,...")
        else:
            parser.add_argument(flag, dest=f.name, type=str)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatchain",
        description="Ensemble experiments on two-bath chaotic chain heat transport.",
        epilog=f"Default output directory: --out-dir, else ${OUT_DIR_ENV}, else the "
               "current directory.",
    )
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="EXPERIMENT")
    for kind in EXPERIMENT_KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", help="JSON file with ExperimentConfig fields")
        _add_config_flags(p)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = {"experiment": args.experiment}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {args.config}: {err}") from err
        field_names = {f.name for f in dataclasses.fields(ExperimentConfig)}
        unknown = set(loaded) - field_names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key, val in loaded.items():
            values[key] = tuple(val) if isinstance(val, list) else val
    for f in dataclasses.fields(ExperimentConfig):
        cli_val = getattr(args, f.name, None)
        if cli_val is not None:
            values[f.name] = cli_val
    try:
        config = ExperimentConfig(**values)
        config.validate()
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from err
    return config


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
        record = run_experiment(config)
        paths = emit_outputs(record, formats=config.formats, out_dir=config.resolved_out_dir())
    except _CONFIG_ERRORS as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    for path in paths:
        print(path)
    if record.fits:
        print(json.dumps(record.fits, indent=1, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
