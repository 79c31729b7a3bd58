"""Command-line front end.

Subcommands::

    gaussgamma fit       --input FILE --config a/b/c [--prices] --out DIR
    gaussgamma sweep     --input FILE --ranges 1..3/1..3/1..3 --starts 5 --out DIR
    gaussgamma sample    --model FILE --n 1000 --out DIR
    gaussgamma eval      --model FILE [--input FILE] [--lo X --hi X --points N] --out DIR
    gaussgamma paper-sim --seed 42 --out DIR

Exit codes: 0 success, 1 usage or data error, 2 fit stopped without
converging (outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import data_io
from .em import FitOptions, fit
from .errors import GaussGammaError
from .mixture import Configuration, MixtureModel, load_model, paper_ground_truth, save_model, serialize
from .selection import SweepSpec, report_document, select, sweep

DEFAULT_SEED = 42
EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2

logger = logging.getLogger("gaussgamma")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _config_arg(text: str) -> Configuration:
    try:
        return Configuration.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three counts like 2/1/2, got {text!r}") from None


_RANGE_RE = re.compile(r"^\s*(\d+)\s*\.\.\s*(\d+)\s*$")


def _ranges_arg(text: str) -> tuple[tuple[int, int], ...]:
    parts = text.split("/")
    out = []
    for p in parts:
        m = _RANGE_RE.match(p)
        if m is None:
            break
        out.append((int(m.group(1)), int(m.group(2))))
    if len(parts) != 3 or len(out) != 3 or any(lo > hi for lo, hi in out):
        raise argparse.ArgumentTypeError(f"expected ranges like 1..3/1..3/1..3, got {text!r}")
    return tuple(out)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _tol_arg(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {v}")
    return v


def _add_data_flags(p, required=True):
    p.add_argument("--input", required=required, type=Path, help="delimited text file")
    p.add_argument("--column", default="0", help="column name or zero-based index (default 0)")
    p.add_argument("--has-header", action="store_true", help="first row holds column names")
    p.add_argument("--prices", action="store_true",
                   help="column holds prices; fit their day-over-day differences")
    p.add_argument("--log-returns", action="store_true",
                   help="column holds prices; fit log-price differences")


def _add_fit_flags(p, seed=True):
    if seed:
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--max-iters", type=_positive_int, default=FitOptions.max_iterations)
    p.add_argument("--tol", type=_tol_arg, default=FitOptions.rel_tol)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gaussgamma", description="Constrained Gauss-Gamma mixture models.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit one configuration by EM")
    _add_data_flags(p)
    p.add_argument("--config", type=_config_arg, required=True, help="negative/nearzero/positive counts")
    _add_fit_flags(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("sweep", help="fit a grid of configurations and rank by BIC")
    _add_data_flags(p)
    p.add_argument("--ranges", type=_ranges_arg, default=((1, 3), (1, 3), (1, 3)))
    p.add_argument("--starts", type=_positive_int, default=5)
    _add_fit_flags(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("sample", help="draw from a model file")
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("eval", help="density grid and data log-likelihood under a model")
    p.add_argument("--model", type=Path, required=True)
    _add_data_flags(p, required=False)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("paper-sim", help="reproduce the 2/1/2 simulation study")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--n", type=_positive_int, default=1000)
    p.add_argument("--starts", type=_positive_int, default=5)
    _add_fit_flags(p, seed=False)
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--out", type=Path, required=True)
    return parser


def _column(text: str):
    return int(text) if re.fullmatch(r"\d+", text.strip()) else text


def _read_data(args) -> np.ndarray:
    column = _column(args.column)
    values = data_io.load_series(args.input, column, args.has_header)
    if args.prices or args.log_returns:
        series = data_io.prices_to_returns(values, log_returns=args.log_returns, source=str(args.input))
        logger.info("%d prices -> %d returns", values.size, len(series))
        return series.values
    if values.size == 0:
        raise ValueError(f"{args.input}: no data rows")
    return values


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n", encoding="utf-8")


def _fit_options(args, seed=None) -> FitOptions:
    return FitOptions(max_iterations=args.max_iters, rel_tol=args.tol,
                      seed=args.seed if seed is None else seed)


def _default_grid(model: MixtureModel) -> tuple[float, float]:
    reach = 0.0
    for c in model.components:
        p = c.params
        if c.role.is_gaussian:
            reach = max(reach, abs(p.mean) + 6.0 * math.sqrt(p.variance))
        else:
            reach = max(reach, (p.shape + 6.0 * math.sqrt(p.shape)) / p.rate)
    return -reach, reach


def cmd_fit(args) -> int:
    x = _read_data(args)
    report = fit(x, args.config, _fit_options(args))
    args.out.mkdir(parents=True, exist_ok=True)
    save_model(report.model, args.out / "model.json")
    _write_json(args.out / "fit_report.json", report.to_dict())
    print(f"{args.config}: loglik={report.log_likelihood!r} iterations={report.iterations} "
          f"converged={report.converged}")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_sweep(args) -> int:
    x = _read_data(args)
    neg, zero, pos = args.ranges
    spec = SweepSpec(neg, zero, pos, n_starts=args.starts, fit_options=_fit_options(args))
    scores = sweep(x, spec)
    best = select(scores)
    args.out.mkdir(parents=True, exist_ok=True)
    _write_json(args.out / "sweep.json", report_document(scores))
    save_model(best.report.model, args.out / "selected_model.json")
    _write_json(args.out / "selected_fit_report.json", best.report.to_dict())
    print(f"selected {best.config}: bic={best.bic!r}")
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.n < 1:
        raise ValueError(f"--n must be >= 1, got {args.n}")
    model = load_model(args.model)
    draws = model.sample(np.random.default_rng(args.seed), args.n)
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "sample.csv", "w", encoding="utf-8") as fh:
        fh.writelines(f"{float(v)!r}\n" for v in draws)
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_model(args.model)
    args.out.mkdir(parents=True, exist_ok=True)
    grid_requested = args.points is not None or args.lo is not None or args.hi is not None
    if args.input is not None:
        x = _read_data(args)
        ll = model.log_pdf(x)
        total = float(np.sum(ll))
        data_io.write_columns(args.out / "loglik.csv", ("x", "loglik"), x, ll)
        _write_json(args.out / "eval.json", {"n_obs": int(x.size), "log_likelihood": total})
        print(f"loglik={total!r} n={x.size}")
    if grid_requested or args.input is None:
        lo, hi = _default_grid(model)
        lo = args.lo if args.lo is not None else lo
        hi = args.hi if args.hi is not None else hi
        xs, pdf = data_io.density_curve(model, lo, hi, args.points if args.points is not None else 1000)
        data_io.write_columns(args.out / "density.csv", ("x", "pdf"), xs, pdf)
    return EXIT_OK


def cmd_paper_sim(args) -> int:
    truth = paper_ground_truth()
    x = truth.sample(np.random.default_rng(args.seed), args.n)
    spec = SweepSpec(n_starts=args.starts, fit_options=_fit_options(args, seed=args.seed))
    scores = sweep(x, spec)
    best = select(scores)

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    save_model(truth, out / "ground_truth.json")
    with open(out / "sample.csv", "w", encoding="utf-8") as fh:
        fh.writelines(f"{float(v)!r}\n" for v in x)
    centres, rel = data_io.histogram(x)
    data_io.write_columns(out / "histogram.csv", ("x", "relative_count"), centres, rel)
    _write_json(out / "sweep.json", report_document(scores))
    save_model(best.report.model, out / "selected_model.json")
    _write_json(out / "selected_fit_report.json", best.report.to_dict())
    lo, hi = float(x.min()), float(x.max())
    xs, pdf = data_io.density_curve(best.report.model, lo, hi, args.points)
    data_io.write_columns(out / "density.csv", ("x", "pdf"), xs, pdf)
    _write_json(out / "metadata.json", {
        "seed": args.seed,
        "n_samples": args.n,
        "n_starts": args.starts,
        "ground_truth": serialize(truth),
        "ground_truth_configuration": str(truth.configuration),
        "weights_note": "mixture weights are not reported by the source study; uniform 1/5 assumed",
        "selected_configuration": str(best.config),
        "n_configurations": len(scores),
    })
    print(f"selected {best.config} (ground truth {truth.configuration})")
    return EXIT_OK


_COMMANDS = {
    "fit": cmd_fit,
    "sweep": cmd_sweep,
    "sample": cmd_sample,
    "eval": cmd_eval,
    "paper-sim": cmd_paper_sim,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (GaussGammaError, ValueError, OSError) as exc:
        print(f"gaussgamma {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
