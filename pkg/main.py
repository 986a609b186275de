import sys
from typing import Optional, Sequence

from cli.commands import EXIT_ERROR, CommandRunner
from cli.parser import build_parser
from config.logging_config import get_logger, setup_logging
from utils.exceptions import BellQedError

logger = get_logger("main")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one bellqed subcommand and return its exit status."""
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)

    try:
        setup_logging(args.log_level, args.log_dir)
    except ValueError as e:
        print(f"error: invalid log level {args.log_level!r}: {e}", file=sys.stderr)
        return EXIT_ERROR

    try:
        return CommandRunner(args, argv).run()
    except BellQedError as e:
        logger.error(
            f"{args.command} failed: {e}",
            extra={"error_details": {"command": args.command, "error_type": type(e).__name__}}
        )
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logger.exception(f"Unexpected error in {args.command}")
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
