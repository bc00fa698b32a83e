import sys
import os

# Add parent directory to path to allow imports
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, parent_dir)

from config.cache import get_cache_manager
from config.config import Config, RunConfig
from media.nonresonance import check_nonresonance
from scripts.instance import build_instance
from scripts.output import write_json
import logging

logger = logging.getLogger(__name__)


def run(config: RunConfig) -> int:
    """Check (eta, M)-non-resonance of the seeded frequencies; 0 iff no violations"""
    instance = build_instance(config)
    cache = get_cache_manager()
    request = {
        "omega": instance.omega.omega.tolist(),
        "eta": config.eta,
        "M": instance.M,
        "sigma": config.sigma,
        "d": config.d,
        "L": config.L,
    }

    report = cache.get_nonres_report(request)
    if report is None:
        report = check_nonresonance(instance.omega, config.eta, instance.M, config.sigma, instance.box).to_dict()
        cache.set_nonres_report(request, report)
    else:
        logger.info("Non-resonance report served from cache")

    violations = len(report["violations"])
    write_json(config, "nonres_report.json", {"M": instance.M, "report": report})
    if violations:
        logger.error(f"{violations} of {report['checked']} k-vectors violate the non-resonance condition")
        return 1
    logger.info(f"All {report['checked']} k-vectors pass, min margin {report['min_margin']:.3e}")
    return 0


if __name__ == "__main__":
    logging.basicConfig(level=Config.LOG_LEVEL)
    sys.exit(run(RunConfig.load(sys.argv[1]) if len(sys.argv) > 1 else RunConfig()))
