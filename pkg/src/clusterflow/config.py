"""Experiment configuration: a versioned JSON document with per-command blocks.

Every key is optional; unknown keys are rejected so that typos fail loudly.
The resolved configuration (defaults filled in, CLI overrides applied) is
written next to each run's outputs and reproduces the run when fed back.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .forward import ALGORITHMS, INTENSITY_MODES
from .laws import GapLaw
from .reverse import MAX_STEPS, VARIANTS

SCHEMA_VERSION = 1
TREE_MAX_POINTS = 512
EXECUTION_KEYS = ("out", "threads")


class ConfigError(ValueError):
    pass


def _law_dicts(*names):
    return [{"name": n} for n in names]


@dataclass
class ForwardBlock:
    laws: list = field(default_factory=lambda: _law_dicts("exponential", "uniform"))
    algorithms: list = field(default_factory=lambda: list(ALGORITHMS))
    checkpoints: list = field(default_factory=lambda: [0, 20, 25])
    export_gaps: bool = False


@dataclass
class TreeBlock:
    n_points: int = 64
    steps: int = 6


@dataclass
class ReverseBlock:
    steps: int = 20
    replicas: int = 200
    panels: int = 2
    variant: str = "gap"
    panel_times: list = field(default_factory=lambda: [0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20])
    export_weights: bool = False


@dataclass
class DualityBlock:
    eta0: list = field(default_factory=lambda: [[0], [0, 1], [0, 3]])
    times: list = field(default_factory=lambda: [0, 1, 2, 3])
    replicas: int = 2000
    n_points: int = 1000


@dataclass
class VerifyBlock:
    # multiplies every replica count of the acceptance suite; 1.0 is full size
    scale: float = 1.0
    filter: str | None = None


_BLOCKS = {
    "forward": ForwardBlock,
    "tree": TreeBlock,
    "reverse": ReverseBlock,
    "duality": DualityBlock,
    "verify": VerifyBlock,
}


@dataclass
class ExperimentConfig:
    schema_version: int = SCHEMA_VERSION
    seed: int = 20250101
    n_points: int = 200_000
    gap_law: dict = field(default_factory=lambda: {"name": "exponential"})
    algorithm: str = "alg1"
    steps: int = 25
    replicas: int = 20
    intensity_mode: str = "empirical"
    threads: int | None = None
    out: str = "out"
    s_grid: list = field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0, 4.0])
    x_grid_points: int = 1000
    forward: ForwardBlock = field(default_factory=ForwardBlock)
    tree: TreeBlock = field(default_factory=TreeBlock)
    reverse: ReverseBlock = field(default_factory=ReverseBlock)
    duality: DualityBlock = field(default_factory=DualityBlock)
    verify: VerifyBlock = field(default_factory=VerifyBlock)

    @property
    def law(self) -> GapLaw:
        return GapLaw.from_dict(self.gap_law)

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        """Resolved config without execution settings (``out``, ``threads``),
        which do not influence any result."""
        d = self.to_dict()
        for k in EXECUTION_KEYS:
            d.pop(k)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    def write(self, directory) -> Path:
        path = Path(directory) / "config.resolved.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps())
        return path

    def validate(self) -> "ExperimentConfig":
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        _check_int("seed", self.seed, 0)
        _check_int("n_points", self.n_points, 2)
        _check_int("steps", self.steps, 0)
        _check_int("replicas", self.replicas, 1)
        if self.threads is not None:
            _check_int("threads", self.threads, 1)
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if self.intensity_mode not in INTENSITY_MODES:
            raise ConfigError(f"intensity_mode must be one of {INTENSITY_MODES}")
        if any(not isinstance(s, (int, float)) or s < 0 for s in self.s_grid):
            raise ConfigError("s_grid must hold nonnegative numbers")
        _check_int("x_grid_points", self.x_grid_points, 2)
        try:
            self.law
            for d in self.forward.laws:
                GapLaw.from_dict(d)
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"bad gap law: {exc}") from None
        if any(a not in ALGORITHMS for a in self.forward.algorithms):
            raise ConfigError(f"forward.algorithms must be drawn from {ALGORITHMS}")
        if self.intensity_mode != "empirical" and "alg2" in [self.algorithm, *self.forward.algorithms]:
            raise ConfigError("alg2 needs intensity_mode 'empirical'")
        if not self.forward.checkpoints:
            raise ConfigError("forward.checkpoints must not be empty")
        if any(not isinstance(c, int) or not 0 <= c <= self.steps for c in self.forward.checkpoints):
            raise ConfigError("forward.checkpoints must be integers in [0, steps]")
        _check_int("tree.n_points", self.tree.n_points, 2)
        if self.tree.n_points > TREE_MAX_POINTS:
            raise ConfigError(f"tree.n_points is limited to {TREE_MAX_POINTS}")
        _check_int("tree.steps", self.tree.steps, 0)
        _check_int("reverse.steps", self.reverse.steps, 0)
        if self.reverse.steps > MAX_STEPS:
            raise ConfigError(f"reverse.steps is limited to {MAX_STEPS}")
        _check_int("reverse.replicas", self.reverse.replicas, 1)
        _check_int("reverse.panels", self.reverse.panels, 1)
        if self.reverse.variant not in VARIANTS:
            raise ConfigError(f"reverse.variant must be one of {VARIANTS}")
        if not self.duality.eta0 or any(not s or not all(isinstance(i, int) for i in s)
                                        for s in self.duality.eta0):
            raise ConfigError("duality.eta0 must be a list of nonempty integer index lists")
        if any(not isinstance(t, int) or not 0 <= t <= MAX_STEPS for t in self.duality.times):
            raise ConfigError("duality.times must be integers in [0, 25]")
        _check_int("duality.replicas", self.duality.replicas, 2)
        _check_int("duality.n_points", self.duality.n_points, 2)
        if not isinstance(self.verify.scale, (int, float)) or not self.verify.scale > 0:
            raise ConfigError("verify.scale must be positive")
        return self


def _check_int(name, value, minimum):
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ConfigError(f"{name} must be an integer >= {minimum}, got {value!r}")


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where or 'config'} must be a JSON object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where or 'config'}: {', '.join(unknown)}")
    kwargs = {}
    for k, v in data.items():
        if where == "" and k in _BLOCKS:
            v = _build(_BLOCKS[k], v, k)
        kwargs[k] = v
    return cls(**kwargs)


def from_dict(data: dict) -> ExperimentConfig:
    return _build(ExperimentConfig, data, "").validate()


def load_config(path=None) -> ExperimentConfig:
    """Read a config file; ``None`` gives the defaults."""
    if path is None:
        return ExperimentConfig().validate()
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return from_dict(data)


def with_overrides(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Apply non-``None`` command-line overrides and re-validate."""
    data = cfg.to_dict()
    for k, v in overrides.items():
        if v is None:
            continue
        if k == "filter":
            data["verify"]["filter"] = v
        else:
            data[k] = v
    return from_dict(data)
