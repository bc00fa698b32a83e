import json
import os
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from config.errors import ConfigError

load_dotenv()

FORMAT_VERSION = "1.0"


class Config:
    # Output
    OUTPUT_DIR = os.getenv('LOCALIZATION_OUTPUT_DIR', 'output')
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')

    # Algebra
    PRUNE_TOLERANCE = float(os.getenv('PRUNE_TOLERANCE', '1e-15'))

    # Generator flows
    FLOW_RTOL = float(os.getenv('FLOW_RTOL', '1e-10'))
    FLOW_METHOD = os.getenv('FLOW_METHOD', 'DOP853')

    # Integrator
    ENERGY_DRIFT_PER_STEP = float(os.getenv('ENERGY_DRIFT_PER_STEP', '1e-6'))

    # Monte-Carlo batching
    MC_BATCH_SIZE = int(os.getenv('MC_BATCH_SIZE', '500'))

    # Redis Cache
    REDIS_HOST = os.getenv('REDIS_HOST', 'localhost')
    REDIS_PORT = int(os.getenv('REDIS_PORT', '6379'))
    REDIS_DB = int(os.getenv('REDIS_DB', '0'))
    REDIS_PASSWORD = os.getenv('REDIS_PASSWORD')
    CACHE_TTL = int(os.getenv('CACHE_TTL', '86400'))  # 1 day default


SCHEMES = ("strang", "rk4_reference")
MEDIA_MODES = ("random", "zero", "distinct")

INT = (int,)
REAL = (int, float)
FIELD_TYPES = {
    'd': INT, 'L': INT, 'sigma': REAL, 'eps': REAL, 'eta': REAL, 'M': INT + (type(None),),
    'seed': INT, 'trials': INT, 'dt': REAL, 'T': REAL, 'output_dir': (str, type(None)), 'threads': INT,
    'scheme': (str,), 'sample_every': INT, 'initial_amplitude': REAL, 'perturbation_scale': REAL,
    'media_mode': (str,), 'zero_frequencies': (bool,), 'integrable': (bool,), 'resume': (str, type(None)),
}


def _is_instance(value: Any, kinds: tuple) -> bool:
    # JSON true/false are not numbers here
    if isinstance(value, bool):
        return bool in kinds
    return isinstance(value, kinds)


@dataclass
class RunConfig:
    """Parameters of one CLI run, loaded from a single JSON document"""
    d: int = 1
    L: int = 4
    sigma: float = 2.0
    eps: float = 1e-3
    eta: float = 0.1
    M: Optional[int] = None
    seed: int = 1
    trials: int = 1000
    dt: float = 1e-3
    T: float = 10.0
    output_dir: Optional[str] = None
    threads: int = 1
    # command options
    scheme: str = "strang"
    sample_every: int = 100
    initial_amplitude: float = 1.0
    perturbation_scale: float = 1.0
    media_mode: str = "random"
    zero_frequencies: bool = False
    integrable: bool = False
    resume: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError("Unknown configuration keys", unknown)
        config = cls(**data)
        config.validate()
        return config

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        try:
            with open(path, 'r') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read configuration {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigError("Configuration must be a JSON object")
        return cls.from_dict(data)

    def validate(self):
        bad = [name for name, kinds in FIELD_TYPES.items() if not _is_instance(getattr(self, name), kinds)]
        if bad:
            raise ConfigError("Configuration values have the wrong type", bad)

        if self.d < 1:
            bad.append('d')
        if self.L < 0:
            bad.append('L')
        if not self.sigma > 0:
            bad.append('sigma')
        if not 0 < self.eps < 1:
            bad.append('eps')
        if not self.eta > 0:
            bad.append('eta')
        if self.M is not None and self.M < 1:
            bad.append('M')
        if not 0 <= self.seed < 2 ** 64:
            bad.append('seed')
        if self.trials < 100:
            bad.append('trials')
        if not 0 < self.dt <= self.T:
            bad.append('dt')
        if self.threads < 1:
            bad.append('threads')
        if self.scheme not in SCHEMES:
            bad.append('scheme')
        if self.sample_every < 1:
            bad.append('sample_every')
        if not self.initial_amplitude > 0:
            bad.append('initial_amplitude')
        if not abs(self.perturbation_scale) <= 1:
            bad.append('perturbation_scale')
        if self.media_mode not in MEDIA_MODES:
            bad.append('media_mode')
        if bad:
            raise ConfigError("Invalid configuration values", bad)

    def with_overrides(self, **overrides) -> "RunConfig":
        data = self.to_dict()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.from_dict(data)

    def resolved_output_dir(self) -> str:
        return self.output_dir or Config.OUTPUT_DIR

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def provenance(self) -> Dict[str, Any]:
        # resume only changes where a run starts, never what it writes
        config = self.to_dict()
        config.pop('resume')
        return {"format_version": FORMAT_VERSION, "config": config}
