import sys
import os

# Add parent directory to path to allow imports
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, parent_dir)

from config.config import Config, RunConfig
from hamiltonian.model import build_model_hamiltonian, short_range_family
from hamiltonian.polynomial import HamPoly
from hamiltonian.serialization import poly_to_records
from media.nonresonance import check_nonresonance
from normal_form.checkpoint import load_stage, save_stage
from normal_form.engine import BnfConfig, iterated_remainder_bound, run_bnf, theorem_time_scales
from scripts.instance import build_instance
from scripts.output import to_jsonable, write_json
import logging

logger = logging.getLogger(__name__)


def run(config: RunConfig) -> int:
    """Normal form of the seeded model with per-stage checkpoints and the bound ledger"""
    instance = build_instance(config)
    box = instance.box
    bnf_config = BnfConfig(config.eps, config.eta, config.sigma, config.d, instance.M, box)

    nonres = check_nonresonance(instance.omega, config.eta, instance.M, config.sigma, box)
    if not nonres.passed:
        logger.error(f"Frequencies are resonant ({len(nonres.violations)} violations); no normal form computed")
        write_json(config, "bound_ledger.json", {"nonresonance": nonres.to_dict(), "passed": False})
        return 1

    R = HamPoly.zero() if config.integrable else short_range_family(box, config.perturbation_scale)
    H1 = build_model_hamiltonian(box, config.eps, R, instance.zeta, instance.media)

    checkpoint_dir = os.path.join(config.resolved_output_dir(), "checkpoints")
    provenance = to_jsonable(config.provenance())
    start = load_stage(config.resume, box) if config.resume else None

    result = run_bnf(H1, instance.omega, bnf_config, start=start,
                     on_stage=lambda stage: save_stage(stage, checkpoint_dir, provenance),
                     verify_nonresonance=False)

    write_json(config, "bound_ledger.json", {
        "report": result.report,
        "normal_form_terms": len(result.Z_final),
        "normal_form_degrees": result.Z_final.degrees(),
        "time_scales": theorem_time_scales(config.eps, config.sigma),
        "log10_generator_flow_bound": iterated_remainder_bound(config.eps, instance.M, config.sigma,
                                                               config.d, box.origin),
        "passed": True,
    })
    write_json(config, "normal_form.json", {"Z_final": poly_to_records(result.Z_final)})
    return 0


if __name__ == "__main__":
    logging.basicConfig(level=Config.LOG_LEVEL)
    sys.exit(run(RunConfig.load(sys.argv[1]) if len(sys.argv) > 1 else RunConfig()))
