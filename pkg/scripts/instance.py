"""
The seeded lattice instance shared by the commands: box, media, inner
parameters and frequencies, all derived from RunConfig.seed.
"""
import logging
from typing import NamedTuple

import numpy as np

from config.config import RunConfig
from lattice.geometry import BoxSpec
from media.sampling import (
    FrequencyMap,
    InnerParams,
    Media,
    STATE_STREAM,
    distinct_media,
    frequencies,
    sample_inner,
    sample_media,
    zero_media,
)
from normal_form.engine import choose_M

logger = logging.getLogger(__name__)


class Instance(NamedTuple):
    box: BoxSpec
    media: Media
    zeta: InnerParams
    omega: FrequencyMap
    M: int


def build_media(config: RunConfig, box: BoxSpec) -> Media:
    if config.media_mode == "zero":
        return zero_media(box)
    if config.media_mode == "distinct":
        return distinct_media(box)
    return sample_media(config.seed, box)


def build_instance(config: RunConfig) -> Instance:
    box = BoxSpec(config.d, config.L)
    media = build_media(config, box)
    zeta = sample_inner(config.seed, box, config.sigma)
    omega = frequencies(media, zeta, config.eps)
    if config.zero_frequencies:
        omega = FrequencyMap(box, np.zeros(box.size), config.eps)
    M = config.M if config.M is not None else choose_M(config.eps, config.sigma).M
    logger.info(f"Instance d={box.d} L={box.L} ({box.size} sites), media={config.media_mode}, M={M}")
    return Instance(box, media, zeta, omega, M)


def state_generator(config: RunConfig) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([config.seed, STATE_STREAM])))
