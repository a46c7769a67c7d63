import argparse
import logging
import sys
from pathlib import Path

# Ensure src is in python path
sys.path.append(str(Path(__file__).resolve().parent / "src"))

from painleve_atlas import atlas
from painleve_atlas.config import apply_overrides, load_config
from painleve_atlas.coordinator import COMMANDS, RunCoordinator, RunResult
from painleve_atlas.errors import ConfigError
from exporters import csv_tables, reports
from exporters.mermaid import ChartTreeExporter

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_NUMERIC = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"❌ Error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", type=str, default=None, help="YAML or JSON run config")
    common.add_argument("--out", "-o", type=str, default=None, help="Output directory")
    common.add_argument("--seed", type=int, default=None, help="RNG seed")
    common.add_argument("--tol", type=float, default=None, help="Relative tolerance (abs = tol/100)")
    common.add_argument("--threads", type=int, default=None, help="Worker threads for independent paths")
    common.add_argument("--verbose", "-v", action="count", default=0, help="-v info, -vv debug")

    parser = _Parser(description="Painleve I atlas: pole-crossing integration, asymptotics and periods")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for command in COMMANDS:
        p = sub.add_parser(command, parents=[common])
        if command == "charts-verify":
            p.add_argument("--samples", type=int, default=None, help="Sample points per chart")
    return parser


def _export(result: RunResult, out: Path, config: dict):
    cmd = result.command
    if cmd == "charts-verify":
        reports.write_json(out / "chart_manifest.json", atlas.chart_manifest())
        with open(out / "chart_tree.md", "w") as f:
            f.write("```mermaid\n")
            f.write(ChartTreeExporter().generate())
            f.write("\n```\n")
    elif cmd == "integrate":
        if result.trajectory is not None:
            csv_tables.write_trajectory_csv(out / "trajectory.csv", result.trajectory, config)
        reports.write_pole_events_json(out / "pole_events.json", result.events)
    elif cmd == "pole-field":
        csv_tables.write_pole_csv(out / "poles.csv", result.events, config)
    elif cmd == "tritronquee":
        csv_tables.write_prediction_csv(out / "tritronquee.csv", result.predictions, config)
    elif cmd == "periods":
        csv_tables.write_period_csv(out / "periods.csv", result.period_rows, config)
        if result.grid:
            csv_tables.write_grid_csv(out / "wp_grid.csv", result.grid, config)
    elif cmd == "laurent":
        csv_tables.write_laurent_csv(out / "laurent.csv", result.laurent_rows, config)
    reports.write_report(out / f"{cmd.replace('-', '_')}.json", cmd, result.report, config,
                         errors=result.errors, partial=result.partial)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        format="%(levelname)s %(name)s: %(message)s")

    # 1. Load
    try:
        print(f"🔄 Loading {args.config or 'built-in defaults'}...")
        config = load_config(args.config)
        config = apply_overrides(config, seed=args.seed, tol=args.tol, threads=args.threads, out=args.out)
        if getattr(args, "samples", None) is not None:
            if args.samples < 1:
                raise ConfigError("--samples must be at least 1")
            config = config.model_copy(update={
                "verify": config.verify.model_copy(update={"samples": args.samples})})
    except ConfigError as exc:
        print(f"❌ Config Error: {exc}")
        return EXIT_USAGE

    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / "PARTIAL"
    if marker.exists():
        marker.unlink()
    config_echo = config.model_dump(mode="json")

    # 2. Compute
    print(f"🧠 Running {args.command}...")
    coordinator = RunCoordinator(config)
    result = coordinator.run(args.command)
    if result.command == "pole-field":
        print(f"📉 Merged pole events into {len(result.events)} poles")

    # 3. Export
    print(f"💾 Saving results to {out}/...")
    _export(result, out, config_echo)

    if result.partial:
        marker.write_text(result.partial + "\n")
        print(f"❌ Numeric failure, partial results kept: {result.partial}")
        return EXIT_NUMERIC

    # 4. Check
    try:
        coordinator.check(result)
    except ValueError as exc:
        print(f"❌ {exc}")
        return EXIT_INVARIANT

    print(f"📊 Report: {out / (args.command.replace('-', '_') + '.json')}")
    print(f"✅ {args.command} complete")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
