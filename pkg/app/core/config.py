"""
Configuration for the data-diffusion simulator.

Two layers:
- ``Settings``: process-wide application settings from the environment / .env
- ``RunConfig``: one simulation run, resolved from (highest priority first)
  explicit overrides, ``DDSIM_*`` environment variables, the flat config
  file, the selected preset, then field defaults
"""

from contextvars import ContextVar
from copy import deepcopy
from pathlib import Path
from typing import Any, Optional

from pydantic import Field, ValidationError
from pydantic.fields import FieldInfo
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

from app.core.config_file import read_config_file, render
from app.core.exceptions import ConfigError
from app.core.presets import get_preset
from app.models.config import (
    EngineConfig,
    MetricsConfig,
    NodeConfig,
    ProvisionerConfig,
    SchedulerConfig,
    StoreConfig,
)
from app.models.workload import WorkloadSpec


class Settings(BaseSettings):
    # Application Settings
    APP_NAME: str = "Data Diffusion Simulator"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Runner Settings
    DEFAULT_OUTPUT_DIR: str = "results"
    DEFAULT_JOBS: int = 1

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")


# Create global settings instance
settings = Settings()


_file_values: ContextVar[dict[str, Any]] = ContextVar("ddsim_file_values", default={})
_preset_values: ContextVar[dict[str, Any]] = ContextVar("ddsim_preset_values", default={})


class _ContextSource(PydanticBaseSettingsSource):
    """Settings source returning a nested dict prepared by ``load_run_config``."""

    values: ContextVar[dict[str, Any]]

    def get_field_value(self, field: FieldInfo, field_name: str) -> tuple[Any, str, bool]:
        return self.values.get().get(field_name), field_name, False

    def __call__(self) -> dict[str, Any]:
        return deepcopy(self.values.get())


class KeyValueFileSource(_ContextSource):
    values = _file_values


class PresetSource(_ContextSource):
    values = _preset_values


class RunConfig(BaseSettings):
    """Fully resolved configuration of one simulation run."""

    model_config = SettingsConfigDict(
        env_prefix="DDSIM_",
        env_nested_delimiter="__",
        case_sensitive=False,
        extra="forbid",
    )

    seed: int
    preset: Optional[str] = None
    output_dir: Path = Path(settings.DEFAULT_OUTPUT_DIR)

    workload: WorkloadSpec = Field(default_factory=WorkloadSpec)
    scheduler: SchedulerConfig = Field(default_factory=SchedulerConfig)
    node: NodeConfig = Field(default_factory=NodeConfig)
    store: StoreConfig = Field(default_factory=StoreConfig)
    provisioner: ProvisionerConfig = Field(default_factory=ProvisionerConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)
    engine: EngineConfig = Field(default_factory=EngineConfig)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (
            init_settings,
            env_settings,
            KeyValueFileSource(settings_cls),
            PresetSource(settings_cls),
        )

    @property
    def label(self) -> str:
        """Short human-readable name for logs and sweep tables."""
        return self.preset or f"{self.scheduler.policy.value}-{self.node.cache_bits}b"


def format_validation_error(error: ValidationError) -> str:
    """Render a pydantic error as ``dotted.path: message`` lines."""
    lines = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{path}: {item['msg']}")
    return "; ".join(lines)


def load_run_config(
    path: Optional[Path] = None,
    preset: Optional[str] = None,
    overrides: Optional[dict[str, Any]] = None,
) -> RunConfig:
    """
    Resolve a run configuration.

    Args:
        path: Optional flat config file
        preset: Optional preset name; a ``preset = ...`` line in the file is
            used when this is not given
        overrides: Nested values with the highest priority (CLI flags)

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: Missing/malformed file, unknown preset, invalid values
    """
    file_values = read_config_file(Path(path)) if path is not None else {}
    init_values = deepcopy(overrides or {})

    preset_name = preset or init_values.get("preset") or file_values.get("preset")
    preset_values = get_preset(preset_name) if preset_name else {}
    if preset_name:
        init_values["preset"] = preset_name

    file_token = _file_values.set(file_values)
    preset_token = _preset_values.set(preset_values)
    try:
        return RunConfig(**init_values)
    except ValidationError as e:
        where = f" in {path}" if path is not None else ""
        raise ConfigError(f"invalid configuration{where}: {format_validation_error(e)}") from e
    finally:
        _file_values.reset(file_token)
        _preset_values.reset(preset_token)


def derive_config(config: RunConfig, updates: dict[str, Any]) -> RunConfig:
    """
    Copy a config with dotted-key updates applied and revalidated.

    Args:
        config: Base configuration
        updates: e.g. ``{"node.cache_bits": "2GB", "scheduler.policy": "max-cache-hit"}``
    """
    data = config.model_dump()
    for dotted, value in updates.items():
        *sections, key = dotted.split(".")
        node = data
        for section in sections:
            if not isinstance(node.get(section), dict):
                raise ConfigError(f"unknown config section in {dotted!r}")
            node = node[section]
        node[key] = value
    try:
        return RunConfig(**data)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {format_validation_error(e)}") from e


def render_config(config: RunConfig) -> str:
    """The resolved config in the flat file format, re-loadable as-is."""
    return render(config.model_dump(mode="json"))
