"""
ExperimentConfig: the one serialised description of an experiment run.

A config is a JSON document mirroring the dataclass field for field.
Command-line flags override file values through ``with_overrides``.
"""
import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from core import constants
from core.exceptions import ConfigurationError

EXPERIMENTS = ('stationarity', 'hydro', 'one-block', 'c-of-l', 'prop4', 'exact-small')


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    # environment: a file, or generated from (n, p, env_seed)
    env_file: str = None
    n: int = 64
    p: float = 0.0
    env_seed: int = 0
    g: str = 'const1'
    rho0: str = 'sine:1,0.5'
    t: float = 0.02
    snapshots: tuple = ()
    replicas: int = 1
    block_size: int = None
    l_list: tuple = (1, 2, 4, 8, 16)
    rho: float = 1.0
    master_seed: int = 0
    out: str = None
    workers: int = None
    # PDE
    pde_m: int = 256
    scheme: str = 'explicit'
    # gamma search
    lambda_points: int = 400
    rho_points: int = 11
    gamma_floor: float = 1e-6
    # exact-generator experiments
    env_list: tuple = ('11', '111', '1111', '123', '2323')
    k_list: tuple = (1, 2, 3)
    g_list: tuple = ('const1', 'linear')
    exact_env: str = '11'
    k: int = 3
    exact_t: float = 1.0
    entropy_points: int = 20

    def __post_init__(self):
        for name in ('snapshots', 'l_list', 'env_list', 'k_list', 'g_list'):
            value = getattr(self, name)
            if isinstance(value, list):
                object.__setattr__(self, name, tuple(value))
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(
                constants.UNKNOWN_EXPERIMENT.format(kind=self.experiment, choices=list(EXPERIMENTS))
            )
        if self.replicas < 1:
            raise ConfigurationError(constants.REPLICAS_INVALID.format(replicas=self.replicas))
        if self.t < 0 or any(t < 0 for t in self.snapshots):
            raise ConfigurationError(constants.NEGATIVE_HORIZON.format(t=min((self.t, *self.snapshots))))
        if self.out is not None:
            path = Path(self.out)
            if path.exists() and not path.is_dir():
                raise ConfigurationError(f'Output path {self.out} exists and is not a directory')
        return self

    # ------------------------------------------------------------------
    # serialisation
    # ------------------------------------------------------------------

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - set(cls.field_names())
        if unknown:
            raise ConfigurationError(f'Unknown config keys: {sorted(unknown)}')
        if 'experiment' not in data:
            raise ConfigurationError('Config needs an "experiment" key')
        return cls(**data)

    @classmethod
    def from_json(cls, source):
        """``source`` is a path to a JSON file or the JSON text itself."""
        text = str(source)
        if not text.lstrip().startswith('{'):
            try:
                text = Path(source).read_text(encoding='utf-8')
            except OSError as exc:
                raise ConfigurationError(f'Cannot read config {source}: {exc}') from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f'Config is not valid JSON: {exc}') from exc
        return cls.from_dict(data)

    def to_dict(self):
        data = asdict(self)
        for name in ('snapshots', 'l_list', 'env_list', 'k_list', 'g_list'):
            data[name] = list(data[name])
        return data

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + '\n'

    def with_overrides(self, **overrides):
        """Copy with every non-None override applied."""
        changes = {k: v for k, v in overrides.items() if v is not None and k in self.field_names()}
        return replace(self, **changes) if changes else self

    @property
    def snapshot_times(self):
        """Requested snapshot times up to t, always including t."""
        return sorted({float(s) for s in self.snapshots if s <= self.t} | {float(self.t)})
