import argparse
import logging
import sys
from pathlib import Path
from typing import List, Sequence

from noisylab.config.experiment_config import ExperimentConfig, ExperimentConfigParser, UsageParser
from noisylab.config.method_kind import MethodKind
from noisylab.errors.config_error import ConfigError
from noisylab.metrics.history import SUMMARY_FILE
from noisylab.report.svg_chart import SvgChart
from noisylab.report.sweep import Sweep
from noisylab.trainer.probe import PROBE_FILE, FlipProbe
from noisylab.trainer.train import CONFIG_FILE, HISTORY_FILE, Trainer

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2


class Cli:
    """``noisylab run|sweep|probe|plot``.

    Experiment subcommands take every setting flag (see ``noisylab run
    --help``) plus their own; exit code 1 is a usage error, 2 a failed run.
    """

    @staticmethod
    def main(argv=None) -> int:
        argv = list(sys.argv[1:] if argv is None else argv)
        parser = Cli.__build_parser()
        try:
            args, rest = parser.parse_known_args(argv)
            logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                                format="%(asctime)s - %(levelname)s - %(message)s")
            if not getattr(args, "handler", None):
                parser.print_help()
                return EXIT_USAGE
            return args.handler(args, rest)
        except ConfigError as exc:
            print(f"noisylab: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except Exception as exc:
            logger.debug("failure", exc_info=True)
            print(f"noisylab: {exc}", file=sys.stderr)
            return EXIT_FAILURE

    @staticmethod
    def __build_parser() -> argparse.ArgumentParser:
        parser = UsageParser(prog="noisylab", description="noisy-label training lab", allow_abbrev=False)
        parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
        sub = parser.add_subparsers(dest="command")

        run = sub.add_parser("run", help="train one configuration into --out", allow_abbrev=False,
                             parents=[ExperimentConfigParser.build_parser()])
        run.set_defaults(handler=Cli.__run)

        sweep = sub.add_parser("sweep", help="train every method x seed pair and aggregate the summaries",
                               allow_abbrev=False, parents=[ExperimentConfigParser.build_parser()])
        sweep.add_argument("--methods", default=None, help="comma separated methods (default: --method)")
        sweep.add_argument("--seeds", default=None, help="comma separated master seeds (default: --seed)")
        sweep.add_argument("--jobs", type=int, default=1, help="runs trained at the same time")
        sweep.set_defaults(handler=Cli.__sweep)

        probe = sub.add_parser("probe", help="compare small-loss clean rates on original vs flipped images",
                               allow_abbrev=False, parents=[ExperimentConfigParser.build_parser()])
        probe.add_argument("--probe-epochs", dest="probe_epochs", type=int, default=20,
                           help="baseline epochs before ranking")
        probe.add_argument("--keep", type=float, default=0.8, help="fraction of samples kept as small-loss")
        probe.set_defaults(handler=Cli.__probe)

        plot = sub.add_parser("plot", help="SVG line chart of history.csv columns", allow_abbrev=False)
        plot.add_argument("histories", nargs="+", type=Path, help="history.csv files")
        plot.add_argument("--out", type=Path, required=True, help="SVG file to write")
        plot.add_argument("--columns", default="acc_m1", help="comma separated columns (default acc_m1)")
        plot.set_defaults(handler=Cli.__plot)
        return parser

    # ------------------------------------------------------------ handlers

    @staticmethod
    def __run(args, rest: List[str]) -> int:
        config = Cli.__config(args, rest)
        history = Trainer.run(config)
        out = Path(config.out)
        print(f"{config.method.value}: {len(history)} epochs, fingerprint {config.fingerprint()[:16]}")
        for name in (CONFIG_FILE, HISTORY_FILE, SUMMARY_FILE):
            print(f"  + {out / name}")
        return EXIT_OK

    @staticmethod
    def __sweep(args, rest: List[str]) -> int:
        base = Cli.__config(args, rest)
        methods = [base.method] if args.methods is None else Cli.__methods(args.methods)
        seeds = [base.seed] if args.seeds is None else Cli.__seeds(args.seeds)
        if args.jobs < 1:
            raise ConfigError("jobs", f"expected >= 1, got {args.jobs}")

        report = Sweep.run(base, methods, seeds, jobs=args.jobs)
        for outcome in report.outcomes:
            mark = "+" if outcome.ok else "!"
            detail = "" if outcome.ok else f"  ({outcome.error})"
            print(f"  {mark} {outcome.out / HISTORY_FILE}{detail}")
        print(f"  + {report.aggregate_path}")
        for row in report.rows:
            if row.metric == "ens.last10_mean":
                print(f"{row.method:>16}  {100 * row.mean:6.2f} +- {100 * row.std:.2f}  ({row.runs} runs)")
        return EXIT_FAILURE if report.failed else EXIT_OK

    @staticmethod
    def __probe(args, rest: List[str]) -> int:
        config = Cli.__config(args, rest)
        result = FlipProbe.run(config, epochs=args.probe_epochs, keep=args.keep)
        path = result.write(Path(config.out) / PROBE_FILE)
        print(f"clean rate of the {result.kept} smallest losses: original {result.clean_rate_original:.4f}, "
              f"flip {result.clean_rate_flip:.4f}")
        print(f"  + {path}")
        return EXIT_OK

    @staticmethod
    def __plot(args, rest: List[str]) -> int:
        if rest:
            raise ConfigError(rest[0].lstrip("-"), "unknown flag for plot")
        columns = [c.strip() for c in args.columns.split(",") if c.strip()]
        path = SvgChart.emit_plot(args.histories, args.out, columns)
        print(f"  + {path}")
        return EXIT_OK

    # ------------------------------------------------------------- helpers

    @staticmethod
    def __config(args, rest: Sequence[str]) -> ExperimentConfig:
        ExperimentConfigParser.reject_leftovers(rest)
        return ExperimentConfigParser.from_flags(vars(args))

    @staticmethod
    def __methods(text: str) -> List[MethodKind]:
        methods = []
        for name in (part.strip() for part in text.split(",")):
            try:
                methods.append(MethodKind(name))
            except ValueError as exc:
                raise ConfigError("methods", f"unknown method {name!r}, expected one of "
                                             f"{', '.join(MethodKind.names())}") from exc
        return methods

    @staticmethod
    def __seeds(text: str) -> List[int]:
        try:
            return [int(part) for part in text.split(",") if part.strip()]
        except ValueError as exc:
            raise ConfigError("seeds", f"expected comma separated integers, got {text!r}") from exc


def main(argv=None) -> int:
    return Cli.main(argv)


if __name__ == "__main__":
    sys.exit(main())
