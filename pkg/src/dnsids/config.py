"""Pipeline configuration: INI-style sections parsed into dataclasses.

Grammar (see README for the full key list):

    [pipeline]            seed, window_len, cv_folds, classifiers
    [scenario.<name>]     runs + any scenario field (attack_kind, rates, ...)
    [mlp] [rbf] [som]     classifier hyperparameters

Every scenario inherits the pipeline window_len unless it sets its own.
A master seed is mandatory; nothing in the pipeline touches the wall
clock except training-time measurement.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field, fields

from .classifiers.mlp import MlpTrainConfig
from .classifiers.som import SomTrainConfig
from .errors import ConfigError
from .simnet import AttackKind, ScenarioConfig, make_scenario

# The bundled experiment: a balanced three-class dataset at desk scale.
# The contested link is scaled down from the 10 Mbps default so a full
# run of thirty 640-second scenarios stays fast; the attack sources still
# offer 1.2x the bottleneck capacity. The start jitter range keeps every
# attack window majority-covered, so window labels stay clean.
DEFAULT_CONFIG = """\
[pipeline]
seed = 42
window_len = 20
cv_folds = 10
classifiers = mlp,rbf,som

[scenario.normal]
runs = 10
duration = 640
bottleneck_rate = 100000
attack_kind = none

[scenario.direct_dos]
runs = 10
duration = 640
bottleneck_rate = 100000
attack_kind = direct_dos
attack_start_jitter = 0,9.5
attack_duration = 640

[scenario.amplification]
runs = 10
duration = 640
bottleneck_rate = 100000
attack_kind = amplification
attack_start_jitter = 0,9.5
attack_duration = 640

[mlp]
hidden = 7

[rbf]
centers = 10

[som]
epochs = 20
"""


@dataclass(frozen=True)
class ScenarioBlock:
    name: str
    runs: int
    config: ScenarioConfig


@dataclass(frozen=True)
class MlpSettings:
    hidden: int = 7
    train: MlpTrainConfig = field(default_factory=MlpTrainConfig)


@dataclass(frozen=True)
class PipelineConfig:
    seed: int
    window_len: float = 20.0
    cv_folds: int = 10
    classifier_names: tuple[str, ...] = ("mlp", "rbf", "som")
    scenarios: tuple[ScenarioBlock, ...] = ()
    mlp: MlpSettings = field(default_factory=MlpSettings)
    rbf_centers: int = 10
    som: SomTrainConfig = field(default_factory=SomTrainConfig)


def config_digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:12]


_SCENARIO_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}
_INT_SCENARIO = {"request_size", "normal_response_size", "amp_response_size",
                 "retransmit_max", "queue_capacity", "attack_packet_size"}
_MLP_KEYS = {"hidden", "max_epochs", "target_mse", "lm_lambda_init", "lm_lambda_up",
             "lm_lambda_down", "lm_lambda_max", "weight_init_range"}
_SOM_KEYS = {"epochs", "ordering_lr", "ordering_steps", "tuning_lr",
             "tuning_neighbor_dist"}
_VALID_CLASSIFIERS = ("mlp", "rbf", "som")


def _parse_scenario(section_name: str, section, window_len: float) -> ScenarioBlock:
    runs = 1
    params: dict = {"window_len": window_len}
    for key, raw in section.items():
        if key == "runs":
            runs = int(raw)
            continue
        if key not in _SCENARIO_FIELD_TYPES:
            raise ConfigError(f"unknown scenario key {key!r} in [{section_name}]")
        if key == "attack_kind":
            params[key] = raw.strip()
        elif key == "attack_start_jitter":
            lo, _, hi = raw.partition(",")
            params[key] = (float(lo), float(hi))
        elif key in _INT_SCENARIO:
            params[key] = int(raw)
        else:
            params[key] = float(raw)
    if runs < 1:
        raise ConfigError(f"[{section_name}] runs must be >= 1")
    name = section_name.split(".", 1)[1]
    return ScenarioBlock(name=name, runs=runs, config=make_scenario(**params))


def parse_pipeline_config(text: str) -> PipelineConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from None

    if "pipeline" not in parser:
        raise ConfigError("missing [pipeline] section")
    pipe = parser["pipeline"]
    known_pipe = {"seed", "window_len", "cv_folds", "classifiers"}
    unknown = set(pipe) - known_pipe
    if unknown:
        raise ConfigError(f"unknown pipeline key {sorted(unknown)[0]!r}")
    if "seed" not in pipe:
        raise ConfigError("[pipeline] must set a master seed")
    try:
        seed = int(pipe["seed"])
        window_len = float(pipe.get("window_len", "20"))
        cv_folds = int(pipe.get("cv_folds", "10"))
    except ValueError as exc:
        raise ConfigError(f"bad pipeline value: {exc}") from None
    names = tuple(n.strip() for n in pipe.get("classifiers", "mlp,rbf,som").split(","))
    for n in names:
        if n not in _VALID_CLASSIFIERS:
            raise ConfigError(f"unknown classifier {n!r}")

    scenarios = []
    mlp_settings = MlpSettings()
    rbf_centers = 10
    som_settings = SomTrainConfig()
    for section_name in parser.sections():
        if section_name == "pipeline":
            continue
        section = parser[section_name]
        if section_name.startswith("scenario."):
            scenarios.append(_parse_scenario(section_name, section, window_len))
        elif section_name == "mlp":
            unknown = set(section) - _MLP_KEYS
            if unknown:
                raise ConfigError(f"unknown mlp key {sorted(unknown)[0]!r}")
            hidden = int(section.get("hidden", "7"))
            train_kwargs = {}
            for key in _MLP_KEYS - {"hidden"}:
                if key in section:
                    value = section[key]
                    train_kwargs[key] = (int(value) if key == "max_epochs"
                                         else float(value))
            mlp_settings = MlpSettings(hidden=hidden, train=MlpTrainConfig(**train_kwargs))
        elif section_name == "rbf":
            unknown = set(section) - {"centers"}
            if unknown:
                raise ConfigError(f"unknown rbf key {sorted(unknown)[0]!r}")
            rbf_centers = int(section.get("centers", "10"))
        elif section_name == "som":
            unknown = set(section) - _SOM_KEYS
            if unknown:
                raise ConfigError(f"unknown som key {sorted(unknown)[0]!r}")
            kwargs = {}
            for key in _SOM_KEYS:
                if key in section:
                    value = section[key]
                    kwargs[key] = (float(value) if key in ("ordering_lr", "tuning_lr")
                                   else int(value))
            som_settings = SomTrainConfig(**kwargs)
        else:
            raise ConfigError(f"unknown section [{section_name}]")

    return PipelineConfig(
        seed=seed, window_len=window_len, cv_folds=cv_folds,
        classifier_names=names, scenarios=tuple(scenarios),
        mlp=mlp_settings, rbf_centers=rbf_centers, som=som_settings)


def validate_for_training(cfg: PipelineConfig) -> None:
    """Training needs at least one scenario per traffic class."""
    kinds = {block.config.attack_kind for block in cfg.scenarios}
    for kind in AttackKind:
        if kind not in kinds:
            raise ConfigError(
                f"training needs at least one scenario of class {kind.value!r}")
