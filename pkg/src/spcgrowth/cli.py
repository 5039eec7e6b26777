"""Command-line front end.

Subcommands run the analysis stages in isolation (``fit``, ``bootstrap``,
``continuity``), all at once (``report``), score held-out series against
a finished fit (``check``), or generate a synthetic panel (``synth``).

Every option can also be supplied through an ``SPCGROWTH_``-prefixed
environment variable (``SPCGROWTH_SEED=7`` and so on); explicit flags win
over the environment, the environment wins over defaults.

Exit codes: 0 success, 2 data or usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .align import ContinuityMode
from .dataset import SyntheticSpec, generate_synthetic, serialize_dataset
from .density import AUTO_BANDWIDTH
from .errors import DataError, ParameterError, SpcGrowthError
from .pipeline import (
    PipelineConfig,
    add_bootstrap,
    add_continuity,
    add_validation,
    benchmark_check,
    run_fit_stage,
    run_pipeline,
)
from .report import render_check_text, render_report_json, render_report_text

logger = logging.getLogger(__name__)

ENV_PREFIX = "SPCGROWTH_"

_DEFAULTS = {
    "seed": "0",
    "bootstrap": "1000",
    "validation": "100",
    "bandwidth": AUTO_BANDWIDTH,
    "k_sigma": "1,3",
    "modes": "cultural,institutional",
    "regions": "8",
    "noise": "0.05",
}

_ENV_KEYS = {
    "input": "INPUT",
    "seed": "SEED",
    "bootstrap": "BOOTSTRAP",
    "validation": "VALIDATION",
    "bandwidth": "BANDWIDTH",
    "k_sigma": "K_SIGMA",
    "modes": "MODES",
    "out": "OUT",
    "regions": "REGIONS",
    "noise": "NOISE",
}


def _setting(args: argparse.Namespace, name: str) -> str | None:
    value = getattr(args, name, None)
    if value is None:
        value = os.environ.get(ENV_PREFIX + _ENV_KEYS[name])
    if value is None:
        value = _DEFAULTS.get(name)
    return value


def _parse_int(text: str, flag: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParameterError(f"{flag} expects an integer, got {text!r}") from None


def _parse_bandwidth(text: str):
    if text == AUTO_BANDWIDTH:
        return AUTO_BANDWIDTH
    try:
        return float(text)
    except ValueError:
        raise ParameterError(
            f"--bandwidth expects a number or {AUTO_BANDWIDTH!r}, got {text!r}"
        ) from None


def _parse_k_sigma(text: str) -> tuple[int, ...]:
    return tuple(
        _parse_int(token.strip(), "--k-sigma")
        for token in text.split(",")
        if token.strip()
    )


def _parse_modes(text: str) -> tuple[ContinuityMode, ...]:
    modes = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            modes.append(ContinuityMode(token))
        except ValueError:
            valid = ", ".join(m.value for m in ContinuityMode)
            raise ParameterError(
                f"--modes expects values from {{{valid}}}, got {token!r}"
            ) from None
    return tuple(modes)


def _build_config(args: argparse.Namespace, need_out: bool = False) -> PipelineConfig:
    input_path = _setting(args, "input")
    if input_path is None:
        raise ParameterError("--input is required (or set SPCGROWTH_INPUT)")
    out = _setting(args, "out")
    if need_out and out is None:
        raise ParameterError("--out is required (or set SPCGROWTH_OUT)")
    return PipelineConfig(
        input_path=input_path,
        seed=_parse_int(_setting(args, "seed"), "--seed"),
        n_bootstrap=_parse_int(_setting(args, "bootstrap"), "--bootstrap"),
        n_validation=_parse_int(_setting(args, "validation"), "--validation"),
        k_sigma_list=_parse_k_sigma(_setting(args, "k_sigma")),
        bandwidth=_parse_bandwidth(_setting(args, "bandwidth")),
        continuity_modes=_parse_modes(_setting(args, "modes")),
        output_dir=out,
    )


def _print_bundle(bundle, out_dir: str | None) -> None:
    text = render_report_text(bundle)
    print(text, end="")
    if out_dir is not None:
        from .report import _write_files

        _write_files(
            {"report.txt": text, "report.json": render_report_json(bundle)}, out_dir
        )
        logger.info("wrote report files to %s", out_dir)


def _cmd_fit(args: argparse.Namespace) -> int:
    config = _build_config(args)
    bundle = add_validation(run_fit_stage(config))
    _print_bundle(bundle, config.output_dir)
    return 0


def _cmd_bootstrap(args: argparse.Namespace) -> int:
    config = _build_config(args)
    bundle = add_bootstrap(run_fit_stage(config))
    _print_bundle(bundle, config.output_dir)
    return 0


def _cmd_continuity(args: argparse.Namespace) -> int:
    config = _build_config(args)
    bundle = add_continuity(run_fit_stage(config))
    _print_bundle(bundle, config.output_dir)
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    config = _build_config(args, need_out=True)
    run_pipeline(config)
    print(f"report written to {config.output_dir}")
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    config = _build_config(args)
    bundle = run_fit_stage(config)
    check = benchmark_check(bundle, args.new_series)
    print(render_check_text(check), end="")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = SyntheticSpec(
        n_regions=_parse_int(_setting(args, "regions"), "--regions"),
        noise_sigma=float(_setting(args, "noise")),
    )
    dataset = generate_synthetic(spec, seed=_parse_int(_setting(args, "seed"), "--seed"))
    text = serialize_dataset(dataset)
    out = _setting(args, "out")
    if out is None:
        print(text, end="")
    else:
        from pathlib import Path

        target = Path(out) / "synthetic.csv"
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(text.encode("utf-8"))
        print(f"synthetic panel written to {target}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", help="panel CSV file")
    parser.add_argument("--seed", help="base random seed (default 0)")
    parser.add_argument("--bootstrap", metavar="N", help="bootstrap iterations (default 1000)")
    parser.add_argument("--validation", metavar="N", help="validation repeats (default 100)")
    parser.add_argument("--bandwidth", metavar="X|auto", help="KDE bandwidth (default auto)")
    parser.add_argument("--k-sigma", dest="k_sigma", metavar="LIST", help="threshold widths, e.g. 1,3")
    parser.add_argument("--modes", metavar="LIST", help="continuity modes, e.g. cultural,institutional")
    parser.add_argument("--out", metavar="DIR", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spcgrowth",
        description="Growth-curve analysis of scaled social complexity panels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    commands = {
        "fit": ("derive the threshold, align, fit, and validate", _cmd_fit),
        "bootstrap": ("bootstrap the fit and estimate growth timescales", _cmd_bootstrap),
        "continuity": ("refit on continuity-restricted central segments", _cmd_continuity),
        "report": ("run every stage and write all artifacts", _cmd_report),
        "check": ("score held-out series against a fitted run", _cmd_check),
        "synth": ("generate a synthetic panel", _cmd_synth),
    }
    for name, (help_text, handler) in commands.items():
        cmd = sub.add_parser(name, help=help_text)
        if name == "synth":
            cmd.add_argument("--regions", help="number of regions (default 8)")
            cmd.add_argument("--noise", help="noise sigma (default 0.05)")
            cmd.add_argument("--seed", help="base random seed (default 0)")
            cmd.add_argument("--out", metavar="DIR", help="output directory")
        else:
            _add_common(cmd)
        if name == "check":
            cmd.add_argument("new_series", help="panel CSV of held-out series")
        cmd.set_defaults(func=handler)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (DataError, ParameterError) as exc:
        logger.error("%s", exc)
        return 2
    except SpcGrowthError as exc:
        logger.error("%s", exc)
        return 3
    except OSError as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
