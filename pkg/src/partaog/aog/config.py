"""Mining hyperparameters, echoed into every serialized graph."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import ConfigError


@dataclass(frozen=True)
class MiningConfig:
    # patterns kept per template (n); windows and weights below follow the
    # defaults discussed in the model docs
    patterns_per_template: int = 32
    window_radius: float = 5.0
    # sigma_s = sigma_factor * mean annotated-image diagonal, unless overridden
    sigma_factor: float = 0.15
    sigma_override: float | None = None
    deformation_weight: float = 0.5  # w_def in the unit score
    candidate_stride: int = 1
    refine_iterations: int = 1
    # scalar on the dataset-wide response term of the mining objective
    local_term_weight: float = 1.0

    def __post_init__(self):
        if self.patterns_per_template < 1:
            raise ConfigError("patterns_per_template must be >= 1")
        if self.window_radius < 0:
            raise ConfigError("window_radius must be >= 0")
        if self.candidate_stride < 1:
            raise ConfigError("candidate_stride must be >= 1")
        if self.refine_iterations < 0:
            raise ConfigError("refine_iterations must be >= 0")
        if self.sigma_override is not None and self.sigma_override <= 0:
            raise ConfigError("sigma_override must be positive")
        if self.sigma_factor <= 0:
            raise ConfigError("sigma_factor must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "MiningConfig":
        return MiningConfig(**d)
