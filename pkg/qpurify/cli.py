from __future__ import annotations

import argparse
import os
import sys
from contextlib import contextmanager
from pathlib import Path

from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table

from qpurify.channel import ChannelSpec, purification_distribution, purified_weights, single_qubit_fidelity
from qpurify.config_loader import apply_flags, config_to_dict, load_config, to_scenario
from qpurify.errors import CapacityError, ConfigError, DomainError, QPurifyError
from qpurify.harness import COMPARISONS, STRATEGIES, WEIGHTINGS, c1_grid, fidelity_trace, relative_gains, run_scenario, sweep_c1
from qpurify.serializer import (
    SWEEP_COLUMNS,
    TRACE_COLUMNS,
    envelope,
    fmt,
    record_to_dict,
    run_record,
    stats_to_dict,
    sweep_to_csv,
    to_json,
    trace_to_csv,
)

VERSION = "0.1.0"

console = Console()
err_console = Console(stderr=True)


class _Parser(argparse.ArgumentParser):
    """argparse with single-line diagnostics."""

    def error(self, message):
        err_console.print(f"qpurify: error: {message}", soft_wrap=True, markup=False, highlight=False)
        raise SystemExit(2)


def _resolve(args):
    cfg = load_config(getattr(args, "config", None))
    flags = {
        "n": getattr(args, "n", None),
        "c1": getattr(args, "c1", None),
        "trials": getattr(args, "trials", None),
        "strategy": getattr(args, "strategy", None),
        "purify": getattr(args, "purify", None),
        "weighting": getattr(args, "weighting", None),
        "grid_size": getattr(args, "grid_size", None),
        "seed": getattr(args, "seed", None),
        "workers": getattr(args, "workers", None),
        "compare": getattr(args, "compare", None),
        "c1_min": getattr(args, "c1_min", None),
        "c1_max": getattr(args, "c1_max", None),
        "c1_steps": getattr(args, "c1_steps", None),
    }
    return apply_flags(cfg, flags)


def _workers(cfg) -> int:
    if cfg.workers is not None:
        if cfg.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {cfg.workers}")
        return cfg.workers
    return os.cpu_count() or 1


def _echo(cfg) -> dict:
    # worker count never changes results, so it stays out of the reproducibility echo
    d = config_to_dict(cfg)
    d.pop("workers", None)
    return d


@contextmanager
def _progress(total: int, quiet: bool, label: str):
    if quiet or not err_console.is_terminal:
        yield None
        return

    progress = Progress(
        TextColumn("[bold]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=err_console,
        transient=True,
    )
    with progress:
        task = progress.add_task(label, total=total)
        yield lambda n: progress.advance(task, n)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_meta(cfg, columns: list[str], out: str | None) -> None:
    """Config envelope for CSV output: a sidecar file with --out, stderr otherwise."""
    text = to_json(record_to_dict(envelope(_echo(cfg), columns))) + "\n"
    if out:
        Path(out + ".meta.json").write_text(text, encoding="utf-8")
    else:
        sys.stderr.write(text)


def cmd_stats(args):
    cfg = _resolve(args)
    channel = ChannelSpec(cfg.c1)
    dist = purification_distribution(cfg.n, channel, max_qubits=cfg.max_qubits)
    fids = {m: single_qubit_fidelity(m, channel) for m in dist.probs}
    payload = stats_to_dict(cfg.n, cfg.c1, dist.probs, fids)
    payload["rows"] = [r for r in payload["rows"] if dist.probs[r["M"]] > 0.0]

    if args.json:
        print(to_json(payload))
        return

    console.print(f"\n[bold]Purification statistics[/bold]  N = {cfg.n}, c1 = {fmt(cfg.c1)}\n")

    table = Table(title="Purification outcomes", show_lines=True)
    table.add_column("M", justify="right", style="bold")
    table.add_column("p_M", justify="right")
    table.add_column("f_M", justify="right")
    table.add_column("w_0", justify="right")
    table.add_column("discarded", justify="right")

    for row in payload["rows"]:
        m = row["M"]
        table.add_row(
            str(m),
            fmt(row["p_M"]),
            fmt(row["f_M"]),
            fmt(purified_weights(m, channel)[0]),
            str(cfg.n - m),
        )
    console.print(table)

    console.print(f"\nsum p_M       : {fmt(payload['sum_p'])}")
    console.print(f"sum p_M f_M   : {fmt(payload['mean_fidelity'])}")
    console.print(f"c1            : {fmt(cfg.c1)}")
    if payload["purifies"]:
        console.print("\n[bold green]sum p_M f_M >= c1: purification holds[/bold green]")
    else:
        console.print("\n[bold red]sum p_M f_M < c1[/bold red]")


def cmd_run(args):
    cfg = _resolve(args)
    scenario = to_scenario(cfg)
    workers = _workers(cfg)

    with _progress(scenario.trials, args.quiet, "trials") as on_progress:
        result = run_scenario(scenario, workers=workers, on_progress=on_progress)

    record = run_record(_echo(cfg), result)
    _emit(to_json(record_to_dict(record)) + "\n", args.out)

    if not args.quiet:
        err_console.print(
            f"mean fidelity {fmt(result.row.mean_fidelity)} +/- {fmt(result.row.std_error)} "
            f"({scenario.trials} trials)",
            soft_wrap=True,
        )


def cmd_sweep(args):
    cfg = _resolve(args)
    scenario = to_scenario(cfg)
    workers = _workers(cfg)
    values = c1_grid(cfg.c1_min, cfg.c1_max, cfg.c1_steps)
    if cfg.compare not in COMPARISONS:
        raise ConfigError(f"compare must be one of {', '.join(COMPARISONS)}, got {cfg.compare!r}")

    cells = len(values) * (1 if cfg.compare == "none" else 2)
    with _progress(cells * scenario.trials, args.quiet, "sweep") as on_progress:
        summary = sweep_c1(scenario, values, compare=cfg.compare, workers=workers, on_progress=on_progress)

    _emit(sweep_to_csv(summary), args.out)
    _emit_meta(cfg, SWEEP_COLUMNS, args.out)

    if cfg.compare == "purify" and not args.quiet:
        report = relative_gains(summary)
        table = Table(title="Relative gain of purification", show_lines=False)
        table.add_column("c1", justify="right")
        table.add_column("gain", justify="right")
        for c1, gain in report.per_c1:
            table.add_row(fmt(c1), f"{gain * 100:.2f}%")
        err_console.print(table)
        err_console.print(f"mean gain {report.mean_gain * 100:.2f}%, max gain {report.max_gain * 100:.2f}%")


def cmd_trace(args):
    cfg = _resolve(args)
    scenario = to_scenario(cfg)
    workers = _workers(cfg)

    with _progress(2 * scenario.trials, args.quiet, "trace") as on_progress:
        trace = fidelity_trace(scenario, workers=workers, on_progress=on_progress)

    _emit(trace_to_csv(trace), args.out)
    _emit_meta(cfg, TRACE_COLUMNS, args.out)


def cmd_config_init(args):
    target = Path(args.path).resolve() / ".qpurify.toml"

    if target.exists() and not args.force:
        console.print(".qpurify.toml already exists. Use --force to overwrite.")
        return

    from qpurify.config_template import DEFAULT_QPURIFY_TOML
    target.write_text(DEFAULT_QPURIFY_TOML, encoding="utf-8")
    console.print(f"Created config at: {target}")


def _add_common(p, *, simulation: bool = True):
    p.add_argument("--config", default=None, help="JSON or TOML file mirroring the flags")
    p.add_argument("--n", type=int, default=None, help="Number of qubits N (even)")
    p.add_argument("--c1", type=float, default=None, help="Depolarizing parameter c1 in [0.5, 1]")
    if not simulation:
        return
    p.add_argument("--trials", type=int, default=None, help="Monte Carlo trials per configuration")
    p.add_argument("--strategy", choices=STRATEGIES, default=None, help="Measurement direction rule")
    p.add_argument("--purify", action=argparse.BooleanOptionalAction, default=None, help="Purify before estimating")
    p.add_argument("--weighting", choices=WEIGHTINGS, default=None, help="Average over M exactly or sample it")
    p.add_argument("--grid-size", type=int, default=None, help="Bloch-sphere grid points (even)")
    p.add_argument("--seed", type=int, default=None, help="Master seed")
    p.add_argument("--workers", type=int, default=None, help="Worker processes (default: CPU count)")
    p.add_argument("--out", default=None, help="Output file (default: stdout)")
    p.add_argument("--quiet", action="store_true", help="No progress bar or summary on stderr")


def main(argv=None):
    parser = _Parser(prog="qpurify", description="Purification-assisted adaptive qubit estimation")
    parser.add_argument("--version", action="version", version=f"qpurify {VERSION}")

    sub = parser.add_subparsers(dest="cmd", required=True)

    stats = sub.add_parser("stats", help="Purification probabilities p_M and fidelities f_M")
    _add_common(stats, simulation=False)
    stats.add_argument("--json", action="store_true", help="Output JSON")
    stats.set_defaults(func=cmd_stats)

    run = sub.add_parser("run", help="Run one scenario and write a JSON record")
    _add_common(run)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="Sweep c1 and write CSV rows")
    _add_common(sweep)
    sweep.add_argument("--compare", choices=COMPARISONS, default=None, help="What each c1 compares")
    sweep.add_argument("--c1-min", type=float, default=None)
    sweep.add_argument("--c1-max", type=float, default=None)
    sweep.add_argument("--c1-steps", type=int, default=None)
    sweep.set_defaults(func=cmd_sweep)

    trace = sub.add_parser("trace", help="Mean fidelity after each measurement step (CSV)")
    _add_common(trace)
    trace.set_defaults(func=cmd_trace)

    cfg = sub.add_parser("config", help="Configuration utilities")
    cfg_sub = cfg.add_subparsers(dest="cfg_cmd", required=True)

    cfg_init = cfg_sub.add_parser("init", help="Create a default .qpurify.toml")
    cfg_init.add_argument("--path", default=".", help="Directory to write into")
    cfg_init.add_argument("--force", action="store_true", help="Overwrite existing config")
    cfg_init.set_defaults(func=cmd_config_init)

    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, DomainError, CapacityError) as exc:
        err_console.print(f"qpurify: error: {exc}", soft_wrap=True, markup=False, highlight=False)
        raise SystemExit(2) from None
    except (OSError, QPurifyError) as exc:
        err_console.print(f"qpurify: error: {exc}", soft_wrap=True, markup=False, highlight=False)
        raise SystemExit(1) from None


if __name__ == "__main__":
    main()
