import argparse
import sys

from config.cache import get_cache_manager
from config.config import Config, RunConfig
from config.errors import LocalizationError
import logging

logger = logging.getLogger(__name__)

COMMANDS = ("selftest", "nonres", "measure", "normal-form", "simulate", "cache")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="localization",
        description="Normal forms, non-resonance and action-drift runs for random oscillator lattices")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--output", help="output directory")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--threads", type=int, help="worker threads for Monte-Carlo trials")
    parser.add_argument("--clear", action="store_true", help="with 'cache': drop cached results")
    # test hooks
    parser.add_argument("--corrupt-bracket", action="store_true", help=argparse.SUPPRESS)
    parser.add_argument("--inject-perturbation", type=float, help=argparse.SUPPRESS)
    return parser


def load_config(args) -> RunConfig:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    return config.with_overrides(seed=args.seed, output_dir=args.output, threads=args.threads)


def show_cache(clear: bool) -> int:
    cache = get_cache_manager()
    if clear:
        print(f"Removed {cache.invalidate_results()} cached results")
    stats = cache.get_stats()
    print(f"\nCache Statistics:")
    print(f"  Hits: {stats['hits']}")
    print(f"  Misses: {stats['misses']}")
    print(f"  Hit Rate: {stats['hit_rate']:.2%}")
    print(f"  Cache Sets: {stats['sets']}")
    print(f"  Errors: {stats['errors']}")
    if 'redis_memory_used' in stats:
        print(f"  Redis Memory: {stats['redis_memory_used']}")
    print(f"  Cache Available: {cache.is_available()}\n")
    return 0


def dispatch(args) -> int:
    if args.command == "selftest":
        from scripts import selftest
        return selftest.run(corrupt_bracket=args.corrupt_bracket)
    if args.command == "cache":
        return show_cache(args.clear)

    config = load_config(args)
    if args.command == "nonres":
        from scripts import check_nonresonance
        return check_nonresonance.run(config)
    if args.command == "measure":
        from scripts import estimate_measure
        return estimate_measure.run(config)
    if args.command == "normal-form":
        from scripts import compute_normal_form
        return compute_normal_form.run(config)
    from scripts import simulate
    return simulate.run(config, injected_coeff=args.inject_perturbation)


def main(argv=None) -> int:
    """Main application entry point"""
    args = build_parser().parse_args(argv)
    try:
        return dispatch(args)
    except LocalizationError as e:
        logger.error(f"{args.command} failed ({type(e).__name__}): {str(e)}")
        return e.exit_code


if __name__ == "__main__":
    logging.basicConfig(level=Config.LOG_LEVEL)
    sys.exit(main())
