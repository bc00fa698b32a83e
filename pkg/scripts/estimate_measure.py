import sys
import os

# Add parent directory to path to allow imports
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, parent_dir)

from config.cache import get_cache_manager
from config.config import Config, RunConfig
from media.measure import measure_mc
from scripts.instance import build_instance
from scripts.output import write_json
import logging

logger = logging.getLogger(__name__)


def run(config: RunConfig) -> int:
    """Monte-Carlo fraction of resonant inner parameters; 0 iff fraction <= eta + 3 stderr"""
    instance = build_instance(config)
    cache = get_cache_manager()
    request = {
        "v": instance.media.v.tolist(),
        "eta": config.eta,
        "M": instance.M,
        "sigma": config.sigma,
        "eps": config.eps,
        "d": config.d,
        "L": config.L,
        "trials": config.trials,
        "seed": config.seed,
    }

    result = cache.get_measure_result(request)
    if result is None:
        result = measure_mc(config.eta, instance.M, instance.box, config.sigma, config.eps, instance.media,
                            config.trials, config.seed, threads=config.threads).to_dict()
        cache.set_measure_result(request, result)
    else:
        logger.info("Monte-Carlo result served from cache")

    target = config.eta + 3 * result["stderr"]
    passed = result["fraction_resonant"] <= target
    write_json(config, "measure_mc.json", {"M": instance.M, "result": result, "eta": config.eta,
                                           "target": target, "passed": passed})
    if not passed:
        logger.error(f"Resonant fraction {result['fraction_resonant']:.4f} exceeds eta + 3 stderr = {target:.4f}")
        return 1
    return 0


if __name__ == "__main__":
    logging.basicConfig(level=Config.LOG_LEVEL)
    sys.exit(run(RunConfig.load(sys.argv[1]) if len(sys.argv) > 1 else RunConfig()))
