import sys
import os

# Add parent directory to path to allow imports
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, parent_dir)

from typing import Optional

import numpy as np
import pandas as pd

from config.config import Config, RunConfig
from dynamics.diagnostics import (
    action_drift_report,
    admissible_state,
    linear_drift_envelope,
    locality_profile,
)
from dynamics.integrator import IntegratorConfig, Trajectory, integrate
from hamiltonian.model import original_hamiltonian, rescale_state, short_range_family, unscale_state
from hamiltonian.polynomial import HamPoly
from normal_form.engine import theorem_time_scales
from scripts.instance import build_media, state_generator
from scripts.output import write_csv, write_json
from lattice.geometry import BoxSpec, sigma_norm
import logging

logger = logging.getLogger(__name__)


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    """Columns t, energy, q_<site>..., I_<site>... with sites in canonical order"""
    labels = [",".join(map(str, site)) for site in traj.box.sites]
    data = {"t": traj.times, "energy": traj.energies}
    for i, label in enumerate(labels):
        data[f"q_{label}"] = traj.amplitudes[:, i]
    for i, label in enumerate(labels):
        data[f"I_{label}"] = traj.actions[:, i]
    return pd.DataFrame(data)


def run(config: RunConfig, injected_coeff: Optional[float] = None) -> int:
    """
    Integrate the original-variable Hamiltonian from a seeded admissible state;
    0 iff the weighted action drift stays below eps^2 over the horizon.

    ``injected_coeff`` replaces the perturbation by the short-range family with
    that (unvalidated) coefficient.
    """
    box = BoxSpec(config.d, config.L)
    media = build_media(config, box)
    if injected_coeff is not None:
        logger.warning(f"Injecting a perturbation with coefficient {injected_coeff}")
        H = original_hamiltonian(box, media, short_range_family(box, injected_coeff), validate=False)
    else:
        R = HamPoly.zero() if config.integrable else short_range_family(box, config.perturbation_scale)
        H = original_hamiltonian(box, media, R)

    # drawn in rescaled amplitudes, integrated in the original ones
    p0 = admissible_state(box, config.initial_amplitude, config.sigma, state_generator(config))
    q0 = unscale_state(p0, config.eps)
    cfg = IntegratorConfig(config.dt, config.T, config.scheme, config.sample_every)
    traj = integrate(H, q0, cfg)

    report = action_drift_report(traj, config.sigma, config.eps)
    profile = locality_profile(traj, config.sigma, config.eps)
    e0 = traj.energies[0]
    energy_drift = float(np.max(np.abs(traj.energies - e0)) / abs(e0)) if e0 else 0.0

    write_csv(config, "trajectory.csv", trajectory_frame(traj))
    write_csv(config, "locality_profile.csv", profile)
    write_json(config, "drift_report.json", {
        "drift": report.to_dict(),
        "relative_energy_drift": energy_drift,
        "linear_drift_envelope": linear_drift_envelope(traj, config.sigma, config.eps),
        "boundary_sites_affected": bool((profile["boundary"] & (profile["ratio"] >= 1)).any()),
        "rescaled_norms": {
            "initial": sigma_norm(p0, config.sigma, "tilde"),
            "final": sigma_norm(rescale_state(traj.final, config.eps), config.sigma, "tilde"),
        },
        "time_scales": theorem_time_scales(config.eps, config.sigma),
    })

    if report.escape_time is not None:
        logger.error(f"Weighted action drift escaped at t = {report.escape_time:.6g}")
        return 1
    logger.info(f"No escape within T = {config.T}; weighted sup {report.weighted_sup:.3e}, "
                f"relative energy drift {energy_drift:.3e}")
    return 0


if __name__ == "__main__":
    logging.basicConfig(level=Config.LOG_LEVEL)
    sys.exit(run(RunConfig.load(sys.argv[1]) if len(sys.argv) > 1 else RunConfig()))
