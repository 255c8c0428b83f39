"""Lab configuration: YAML schema, validation, and world construction.

A config file describes one complete virtual lab (magnet, solenoid, qubits,
stage) plus service-level settings (scenario registry, master seed, output
directory). Validation is strict: unknown keys are rejected so a typo cannot
silently fall back to a default, and every referenced scenario must resolve
against the built-in registry. `load_config` with no arguments honours the
MAGLAB_CONFIG environment variable and otherwise returns the built-in
calibrated defaults.
"""

from __future__ import annotations

import os
from pathlib import Path

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from maglab import defaults
from maglab.errors import ConfigError
from maglab.geometry import rotation_about_y
from maglab.magnetics import SOLENOID_LIMIT_T, MagnetSpec, SolenoidSpec, StagePosition
from maglab.spinmodel import GTensor, QubitModel
from maglab.stage import StageState, TravelLimits
from maglab.world import World

#: config path used when neither an explicit path nor MAGLAB_CONFIG is given
DEFAULT_CONFIG_FILENAME = "maglab.yaml"

ENV_VAR = "MAGLAB_CONFIG"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MagnetConfig(_Strict):
    dims_mm: tuple[float, float, float] = defaults.MAGNET_DIMS_MM
    remanence_t: float = Field(defaults.REMANENCE_T, gt=0.0)
    pitch_deg: float = defaults.MAGNET_PITCH_DEG
    magnetization_axis: tuple[float, float, float] = (0.0, 0.0, 1.0)

    @field_validator("dims_mm")
    @classmethod
    def _positive_dims(cls, v):
        if any(d <= 0 for d in v):
            raise ValueError("magnet dimensions must be positive")
        return v


class SolenoidConfig(_Strict):
    setpoint_t: float = 0.0
    external_attenuation: float = Field(1.0, ge=0.0, le=1.0)

    @field_validator("setpoint_t")
    @classmethod
    def _within_coil_limit(cls, v):
        if abs(v) > SOLENOID_LIMIT_T:
            raise ValueError(
                f"solenoid setpoint {v} T exceeds the +/-{SOLENOID_LIMIT_T} T coil limit"
            )
        return v


class QubitConfig(_Strict):
    """Serializable form of one QubitModel.

    Orientation is reduced to a single misalignment angle about the lab y
    axis, matching how the devices are actually characterized.
    """

    g_principal: tuple[float, float, float]
    misalignment_deg: float
    sigma_par_hz: float = Field(gt=0.0)
    sigma_perp_hz: float = Field(gt=0.0)
    echo_gain_anchors: tuple[tuple[float, float], ...] | None = None
    echo_gain: float = 6.62
    eta0: float = Field(0.02, gt=0.0)
    eta_width_deg: float = Field(8.0, gt=0.0)
    vis0: float = Field(0.9, gt=0.0, le=1.0)
    vis_slope: float = 0.35
    baseline: float = Field(0.15, ge=0.0, lt=1.0)

    @classmethod
    def from_model(cls, m: QubitModel) -> "QubitConfig":
        from maglab.gtensor import misalignment_of

        return cls(
            g_principal=m.g.principal_values,
            misalignment_deg=misalignment_of(m.g.orientation),
            sigma_par_hz=m.sigma_par,
            sigma_perp_hz=m.sigma_perp,
            echo_gain_anchors=m.echo_gain_anchors,
            echo_gain=m.echo_gain,
            eta0=m.eta0,
            eta_width_deg=m.eta_width_deg,
            vis0=m.vis0,
            vis_slope=m.vis_slope,
            baseline=m.baseline,
        )

    def to_model(self, name: str) -> QubitModel:
        return QubitModel(
            name=name,
            g=GTensor(self.g_principal, defaults.sample_orientation(self.misalignment_deg)),
            sigma_par=self.sigma_par_hz,
            sigma_perp=self.sigma_perp_hz,
            echo_gain=self.echo_gain,
            echo_gain_anchors=self.echo_gain_anchors,
            eta0=self.eta0,
            eta_width_deg=self.eta_width_deg,
            vis0=self.vis0,
            vis_slope=self.vis_slope,
            baseline=self.baseline,
        )


class StageConfig(_Strict):
    x_limits_mm: tuple[float, float] = (-300.0, 300.0)
    y_limits_mm: tuple[float, float] = (-300.0, 300.0)
    z_limits_mm: tuple[float, float] = (-700.0, -50.0)
    eps_per_event_mm: float = Field(0.050, ge=0.0)
    eps_per_mm: float = Field(0.0, ge=0.0)
    home: tuple[float, float, float] = (
        defaults.HOME_POSITION.x,
        defaults.HOME_POSITION.y,
        defaults.HOME_POSITION.z,
    )

    @field_validator("x_limits_mm", "y_limits_mm", "z_limits_mm")
    @classmethod
    def _ordered(cls, v):
        if not v[0] < v[1]:
            raise ValueError(f"empty travel range {v}")
        return v


class LabConfig(_Strict):
    magnet: MagnetConfig = Field(default_factory=MagnetConfig)
    solenoid: SolenoidConfig = Field(default_factory=SolenoidConfig)
    qubits: dict[str, QubitConfig] = Field(default_factory=dict, validate_default=True)
    default_qubit: str = "Q8"
    stage: StageConfig = Field(default_factory=StageConfig)
    scenarios: tuple[str, ...] = Field((), validate_default=True)
    master_seed: int = 2024
    output_dir: str = "runs"
    fsync: bool = False
    host: str = "127.0.0.1"
    port: int = 8765

    @field_validator("qubits")
    @classmethod
    def _fill_qubits(cls, v):
        if not v:
            v = {
                "Q8": QubitConfig.from_model(defaults.default_qubit()),
                "Q3": QubitConfig.from_model(defaults.second_qubit()),
            }
        return v

    @field_validator("scenarios")
    @classmethod
    def _resolvable(cls, v):
        from maglab.scenarios import SCENARIOS

        if not v:
            return tuple(SCENARIOS)
        unknown = [name for name in v if name not in SCENARIOS]
        if unknown:
            raise ValueError(
                f"unknown scenarios {unknown}; known: {sorted(SCENARIOS)}"
            )
        return v

    def model_post_init(self, _ctx) -> None:
        if self.default_qubit not in self.qubits:
            raise ValueError(
                f"default_qubit {self.default_qubit!r} not in qubits "
                f"{sorted(self.qubits)}"
            )


def default_config() -> LabConfig:
    return LabConfig()


def load_config(path: str | os.PathLike | None = None) -> LabConfig:
    """Load and validate a config file.

    Resolution order: explicit path, then MAGLAB_CONFIG, then
    ./maglab.yaml if present, then the built-in defaults.
    """
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path is None:
        candidate = Path(DEFAULT_CONFIG_FILENAME)
        if not candidate.exists():
            return default_config()
        path = candidate
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = yaml.safe_load(p.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"config is not valid YAML: {e}") from e
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")
    try:
        return LabConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid config {p}: {e}") from e


def to_yaml(cfg: LabConfig) -> str:
    """Serialize a config back to YAML (inverse of load for valid files)."""
    return yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=False)


def build_world(cfg: LabConfig, qubit: str | None = None) -> World:
    """Construct a lab world from a validated config."""
    name = qubit if qubit is not None else cfg.default_qubit
    if name not in cfg.qubits:
        raise ConfigError(f"unknown qubit {name!r}; config has {sorted(cfg.qubits)}")
    stage = StageState(
        commanded=StagePosition(*cfg.stage.home),
        eps_per_event=cfg.stage.eps_per_event_mm,
        eps_per_mm=cfg.stage.eps_per_mm,
        limits=TravelLimits(
            x=cfg.stage.x_limits_mm,
            y=cfg.stage.y_limits_mm,
            z=cfg.stage.z_limits_mm,
        ),
    )
    magnet = MagnetSpec(
        dims=cfg.magnet.dims_mm,
        remanence_t=cfg.magnet.remanence_t,
        magnetization_axis=cfg.magnet.magnetization_axis,
        position=stage.true_pos,
        orientation=rotation_about_y(cfg.magnet.pitch_deg),
    )
    solenoid = SolenoidSpec(
        setpoint_t=cfg.solenoid.setpoint_t,
        external_attenuation=cfg.solenoid.external_attenuation,
    )
    return World(
        magnet=magnet,
        solenoid=solenoid,
        qubit=cfg.qubits[name].to_model(name),
        stage=stage,
        master_seed=cfg.master_seed,
    )
