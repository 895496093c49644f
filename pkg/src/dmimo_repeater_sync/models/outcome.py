"""Synchronization outcome model."""

import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from dmimo_repeater_sync.numerics import wrap_angle


class SyncOutcome(BaseModel):
    """Result of one synchronization attempt.

    Attributes:
        theta_true: True offset (∠t_B − ∠r_B) − (∠t_A − ∠r_A), radians
        theta_hat: Estimated offset ∠y, radians
        error: wrap_angle(theta_hat − theta_true)
        y: Test statistic
        c: Amplitude constant of the noiseless statistic
        snr_proxy: c² over the realized noise power |y − c·e^{jθ}|² (inf when noiseless)
        cjt_gain: Optional UE coherent-combining gain after compensation
    """

    model_config = ConfigDict(frozen=True)

    theta_true: float
    theta_hat: float
    error: float
    y: complex
    c: float = Field(..., ge=0)
    snr_proxy: float = Field(..., ge=0)
    cjt_gain: Optional[float] = Field(default=None, ge=0, le=1 + 1e-12)

    @model_validator(mode="after")
    def validate_error(self) -> "SyncOutcome":
        expected = wrap_angle(self.theta_hat - self.theta_true)
        if abs(wrap_angle(expected - self.error)) > 1e-9:
            raise ValueError(
                f"error {self.error} inconsistent with theta_hat - theta_true ({expected})"
            )
        return self

    @classmethod
    def from_statistic(cls, theta_true: float, y: complex, c: float) -> "SyncOutcome":
        """Build an outcome from the test statistic, with θ̂ = ∠y."""
        theta_hat = math.atan2(y.imag, y.real)
        noise_power = abs(y - c * complex(math.cos(theta_true), math.sin(theta_true))) ** 2
        snr_proxy = math.inf if noise_power == 0 else c * c / noise_power
        return cls(
            theta_true=theta_true,
            theta_hat=theta_hat,
            error=float(wrap_angle(theta_hat - theta_true)),
            y=complex(y),
            c=c,
            snr_proxy=snr_proxy,
        )
