__version__ = "0.1.0.dev0"
__author__ = "Philipp Deibert"

from .debug import debug  # noqa


def main():
    import argparse
    import logging
    import sys

    class ArgumentParser(argparse.ArgumentParser):
        def error(self, message):
            # usage errors count as validation errors
            self.print_usage(sys.stderr)
            print(f"{self.prog}: error: {message}", file=sys.stderr)
            sys.exit(1)

    parser = ArgumentParser(
        prog="twomem",
        description="Two-memory (episodic control + Q-learning) agent experiments",
    )
    parser.add_argument("-q", "--quiet", action="store_true")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run")
    run_parser.add_argument("config", type=str)
    run_parser.add_argument("--seed-override", type=int, default=None)

    report_parser = subparsers.add_parser("report")
    report_parser.add_argument("csv", type=str, nargs="+")
    report_parser.add_argument("--out", type=str, required=True)

    ablate_parser = subparsers.add_parser("ablate")
    ablate_parser.add_argument("config", type=str)
    ablate_parser.add_argument("--seed-override", type=int, default=None)

    # parse command line arguments
    args = parser.parse_args()

    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger = logging.getLogger("twomem")

    from .harness import (
        ConfigError,
        ReportError,
        ablation_suite,
        load_config,
        report,
        run,
    )

    try:
        if args.command == "report":
            report(args.csv, args.out)
        else:
            config = load_config(args.config)

            if args.seed_override is not None:
                config = config.with_seeds([args.seed_override])

            if args.command == "run":
                run(config)
            else:
                ablation_suite(config)
    except (ConfigError, ReportError) as e:
        logger.error("%s", e)
        sys.exit(1)
    except Exception as e:
        # includes RunFailure
        logger.error("%s", e)
        sys.exit(2)

    sys.exit(0)
