"""Command-line workflows: fitting, prediction, evaluation, and plot export.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 validation error,
4 fit finished without converging (outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .data import generate_synthetic, load_csv, save_csv
from .evaluation import (
    accuracy,
    compare,
    extendability_table,
    format_accuracy_comparison,
    format_accuracy_report,
    format_extendability_table,
)
from .fitting import FitConfig, FitReport, fit_baseline, fit_factorized
from .model import (
    Duration,
    best_adverbial,
    composite_probability,
    load_any_model,
    load_baseline,
    load_model,
)

__all__ = ["run", "main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_NO_CONVERGENCE = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; 2 is reserved for I/O here.
    def error(self, message):
        raise _UsageError(message)


def _add_fit_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-iterations", type=int, default=500)
    parser.add_argument("--cost-tolerance", type=float, default=1e-10)
    parser.add_argument("--param-tolerance", type=float, default=1e-8)
    parser.add_argument("--multistarts", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--per-cell-means",
        action="store_true",
        help="fit cell-mean ratings instead of individual votes",
    )


def _fit_config(args: argparse.Namespace) -> FitConfig:
    return FitConfig(
        max_iterations=args.max_iterations,
        cost_tolerance=args.cost_tolerance,
        param_tolerance=args.param_tolerance,
        multistart_count=args.multistarts,
        seed=args.seed,
        per_cell_means=args.per_cell_means,
    )


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _report_payload(report: FitReport) -> dict:
    payload = report.model.to_dict()
    payload.update(
        final_cost=report.final_cost,
        iterations=report.iterations,
        converged=report.converged,
        residual_count=report.residual_count,
        parameter_count=report.parameter_count,
    )
    if report.warnings:
        payload["warnings"] = list(report.warnings)
    return payload


def _finish_fit(report: FitReport, out: str) -> int:
    _write_json(out, _report_payload(report))
    print(
        f"cost={report.final_cost:.6g} iterations={report.iterations} "
        f"converged={report.converged} residuals={report.residual_count} "
        f"parameters={report.parameter_count}"
    )
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if not report.converged:
        print("warning: fit did not converge; wrote best parameters found", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _cmd_fit(args: argparse.Namespace) -> int:
    data = load_csv(args.data)
    report = fit_factorized(data, _fit_config(args))
    return _finish_fit(report, args.out)


def _cmd_fit_baseline(args: argparse.Namespace) -> int:
    data = load_csv(args.data)
    report = fit_baseline(data, _fit_config(args))
    return _finish_fit(report, args.out)


def _cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    event = model.event(args.event)
    elapsed = Duration.parse(args.elapsed)
    for adverbial_id in sorted(model.adverbials):
        p = composite_probability(elapsed, event, model.adverbials[adverbial_id])
        print(f"{adverbial_id}\t{p:.9f}")
    best_id, best_p = best_adverbial(elapsed, event, model)
    print(f"best\t{best_id}\t{best_p:.9f}")
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace) -> int:
    model = load_any_model(args.model)
    data = load_csv(args.data)
    report = accuracy(model, data)
    print(format_accuracy_report(report))
    if args.out:
        _write_json(args.out, report.to_dict())
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    factorized_model = load_model(args.factorized)
    baseline_model = load_baseline(args.baseline)
    data = load_csv(args.data)
    factorized_report = FitReport(
        model=factorized_model,
        final_cost=float("nan"),
        iterations=0,
        converged=True,
        residual_count=len(data.records),
        parameter_count=factorized_model.parameter_count,
    )
    baseline_report = FitReport(
        model=baseline_model,
        final_cost=float("nan"),
        iterations=0,
        converged=True,
        residual_count=len(data.records),
        parameter_count=baseline_model.parameter_count,
    )
    doc = compare(factorized_report, baseline_report, data)
    print(format_accuracy_comparison(doc))
    if args.out:
        _write_json(args.out, doc)
    return EXIT_OK


def _parse_counts(text: str) -> list[int]:
    try:
        counts = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}") from None
    if not counts:
        raise ValueError(f"expected at least one count, got {text!r}")
    return counts


def _cmd_extendability(args: argparse.Namespace) -> int:
    rows = extendability_table(_parse_counts(args.events), _parse_counts(args.adverbials))
    print(format_extendability_table(rows))
    if args.out:
        _write_json(args.out, {"rows": [row.to_dict() for row in rows]})
    return EXIT_OK


def _cmd_synthesize(args: argparse.Namespace) -> int:
    truth = load_model(args.truth)
    dataset = generate_synthetic(truth, args.times, args.votes, args.noise, args.seed)
    save_csv(dataset, args.out)
    print(f"wrote {len(dataset.records)} records to {args.out}")
    return EXIT_OK


def _cmd_plot_data(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    count = 0
    for event_id in sorted(model.events):
        event = model.events[event_id]
        grid = np.geomspace(event.sigma_e / 100.0, 100.0 * event.sigma_e, args.points)
        for adverbial_id in sorted(model.adverbials):
            adverbial = model.adverbials[adverbial_id]
            lines = ["t_minutes\tprobability"]
            for t in grid:
                t = float(t)
                p = composite_probability(Duration(t, "minute"), event, adverbial)
                # repr round-trips doubles exactly, so parsed curves match the model.
                lines.append(f"{t!r}\t{p!r}")
            path = out_dir / f"{event_id}__{adverbial_id}.tsv"
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
            count += 1
    print(f"wrote {count} curve files to {out_dir}")
    return EXIT_OK


def _build_parser() -> _Parser:
    parser = _Parser(prog="justnow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit the factorized model to a CSV")
    p.add_argument("--data", required=True, help="judgment CSV path")
    p.add_argument("--out", required=True, help="output model+report JSON path")
    _add_fit_flags(p)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser(
        "fit-baseline", help="fit the per-pair baseline to a CSV"
    )
    p.add_argument("--data", required=True, help="judgment CSV path")
    p.add_argument("--out", required=True, help="output model+report JSON path")
    _add_fit_flags(p)
    p.set_defaults(func=_cmd_fit_baseline)

    p = sub.add_parser(
        "predict", help="per-adverbial probabilities for one event"
    )
    p.add_argument("--model", required=True, help="factorized model JSON path")
    p.add_argument("--event", required=True, help="event id")
    p.add_argument("--elapsed", required=True, help="elapsed time, e.g. '1 day'")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser(
        "evaluate", help="mean absolute error of a model on a CSV"
    )
    p.add_argument("--model", required=True, help="model JSON path (either family)")
    p.add_argument("--data", required=True, help="judgment CSV path")
    p.add_argument("--out", help="optional JSON report path")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser(
        "compare", help="side-by-side accuracy of both families"
    )
    p.add_argument("--factorized", required=True, help="factorized model JSON path")
    p.add_argument("--baseline", required=True, help="baseline model JSON path")
    p.add_argument("--data", required=True, help="judgment CSV path")
    p.add_argument("--out", help="optional JSON comparison path")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser(
        "extendability", help="function counts per vocabulary size"
    )
    p.add_argument("--events", required=True, help="comma-separated event counts, e.g. 2,4,8")
    p.add_argument("--adverbials", required=True, help="comma-separated adverbial counts")
    p.add_argument("--out", help="optional JSON table path")
    p.set_defaults(func=_cmd_extendability)

    p = sub.add_parser(
        "synthesize", help="generate a synthetic judgment CSV"
    )
    p.add_argument("--truth", required=True, help="truth model JSON path")
    p.add_argument("--times", type=int, default=7, help="log-spaced times per event")
    p.add_argument("--votes", type=int, default=100, help="votes per cell")
    p.add_argument("--noise", type=float, default=0.1, help="rating noise SD before clamping")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser(
        "plot-data", help="export per-pair curves as TSV files"
    )
    p.add_argument("--model", required=True, help="factorized model JSON path")
    p.add_argument("--out-dir", required=True, help="directory for <event>__<adverbial>.tsv")
    p.add_argument("--points", type=int, default=200, help="grid points per curve")
    p.set_defaults(func=_cmd_plot_data)

    return parser


def run(argv: list[str] | None = None) -> int:
    """Parse argv, dispatch, and map failures onto the documented exit codes."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        # KeyError repr-quotes its message; unwrap for readable output.
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
