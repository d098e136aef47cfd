"""Run configuration: a versioned JSON key-value tree.

The schema is documented in the README.  ``mu`` serializes as the string
"inf" for the infinite-power sentinel since JSON has no infinity literal;
everything else round-trips losslessly (floats via repr).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .beams import BeamParams
from .channel import Geometry, Scenario, default_noise
from .rates import OBJECTIVES, RateInputs

CONFIG_VERSION = 1


class ConfigError(ValueError):
    """Invalid or unusable run configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class WavefrontSettings:
    half_width: float = 0.35
    pixels: int = 201
    distances: tuple = (60_000.0,)


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "behind_bob"
    wavelength: float = 1550e-9
    waist_radius: float = 0.1
    alice_bob_distance: float = 50_000.0
    bob_eve_distance: float = 50_000.0
    eve_offset: float = 0.0
    alice_radius: float = 0.1
    bob_radius: float = 0.1
    eve_radius: float = 0.1
    mu: float = math.inf
    beta: float = 1.0
    f_L: float = 1.1
    pulse_rate: float = 1e9
    temperature: float = 3.0
    noise_override: float | None = None
    sweep_parameter: str = "L_BE"
    sweep_min: float = 1_000.0
    sweep_max: float = 400_000.0
    sweep_count: int = 120
    sweep_spacing: str = "log"
    tie_bob_eve_to_link: bool = False
    optimize_mu: bool = False
    objective: str = "lb_max"
    emit_arago_overlay: bool = False
    wavefront: WavefrontSettings = field(default_factory=WavefrontSettings)
    output_dir: str = "."
    cache_dir: str | None = None
    threads: int = 1
    deterministic: bool = True

    def validate(self):
        if self.scenario not in ("behind_bob", "before_bob"):
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        positives = dict(wavelength=self.wavelength, waist_radius=self.waist_radius,
                         alice_bob_distance=self.alice_bob_distance,
                         bob_eve_distance=self.bob_eve_distance,
                         alice_radius=self.alice_radius, bob_radius=self.bob_radius,
                         eve_radius=self.eve_radius, beta=self.beta,
                         pulse_rate=self.pulse_rate, temperature=self.temperature)
        for name, value in positives.items():
            if not value > 0:
                raise ConfigError(f"{name} must be positive, got {value!r}")
        if self.sweep_count < 2:
            raise ConfigError("sweep_count must be at least 2")
        if not self.sweep_min < self.sweep_max:
            raise ConfigError("sweep_min must be below sweep_max")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"unknown objective {self.objective!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if not self.deterministic:
            raise ConfigError("only deterministic execution is supported")
        return self

    # -- domain object builders ------------------------------------------

    def beam(self) -> BeamParams:
        return BeamParams(wavelength=self.wavelength, waist_radius=self.waist_radius)

    def geometry(self) -> Geometry:
        return Geometry(
            scenario=Scenario(self.scenario),
            alice_bob_distance=self.alice_bob_distance,
            bob_eve_distance=self.bob_eve_distance,
            eve_offset=self.eve_offset,
            alice_radius=self.alice_radius,
            bob_radius=self.bob_radius,
            eve_radius=self.eve_radius,
        )

    def noise(self) -> float:
        if self.noise_override is not None:
            return self.noise_override
        return default_noise(self.beam(), self.temperature)

    def rate_inputs(self, channel) -> RateInputs:
        return RateInputs(channel=channel, mu=self.mu, beta=self.beta,
                          f_L=self.f_L, pulse_rate=self.pulse_rate)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> str:
        data = asdict(self)
        data["version"] = CONFIG_VERSION
        data["mu"] = "inf" if math.isinf(self.mu) else self.mu
        data["wavefront"]["distances"] = list(self.wavefront.distances)
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be an object")
        version = data.pop("version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {version!r}")
        if data.get("mu") == "inf":
            data["mu"] = math.inf
        wf = data.pop("wavefront", None)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg_kwargs = dict(data)
        if wf is not None:
            cfg_kwargs["wavefront"] = WavefrontSettings(
                half_width=wf.get("half_width", 0.35),
                pixels=wf.get("pixels", 201),
                distances=tuple(wf.get("distances", (60_000.0,))))
        try:
            return cls(**cfg_kwargs).validate()
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
