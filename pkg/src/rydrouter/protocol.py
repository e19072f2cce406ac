"""Two-photon Raman pulse algebra and redirection timing.

Angular frequencies are rad/s, times are seconds.  The timing rule places a
pi pulse so that the motional phases accumulated before and after the
transfer cancel exactly at the retrieval time, for any velocity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

__all__ = [
    "ProtocolTiming",
    "RamanPulse",
    "TimingViolationError",
    "check_matching",
    "effective_rabi",
    "make_timing",
    "min_storage_time",
    "pi_time",
    "wait_time",
]


class TimingViolationError(ValueError):
    """A protocol timing bound was violated; carries the binding minimum."""

    def __init__(self, message: str, minimum: float):
        super().__init__(message)
        self.minimum = minimum


def effective_rabi(omega3: float, omega4: float, detuning: float) -> float:
    """Effective two-photon Rabi frequency Omega3*Omega4/(2*Delta), rad/s.

    ``detuning`` is the magnitude of the single-photon detuning from the
    intermediate state; it must dominate both leg Rabi frequencies for the
    two-photon picture to hold.
    """
    if omega3 < 0 or omega4 < 0:
        raise ValueError("leg Rabi frequencies must be nonnegative")
    if detuning <= 0:
        raise ValueError("detuning must be positive")
    if detuning < 5.0 * max(omega3, omega4):
        warnings.warn(
            "single-photon detuning is not large against the leg Rabi "
            "frequencies; the effective two-photon treatment is marginal",
            stacklevel=2,
        )
    return omega3 * omega4 / (2.0 * detuning)


def pi_time(omega_r: float) -> float:
    """Duration of a pi pulse at effective Rabi frequency omega_r."""
    if omega_r <= 0:
        raise ValueError("effective Rabi frequency must be positive")
    return math.pi / omega_r


def _check_wavevectors(k: float, k_r: float) -> None:
    if not (0.0 < k < k_r):
        raise ValueError(
            f"need k_r > k > 0 for redirection, got k={k:.6g}, k_r={k_r:.6g}"
        )


def min_storage_time(k: float, k_r: float, omega_r: float) -> float:
    """Shortest storage time that admits a nonnegative pulse wait."""
    _check_wavevectors(k, k_r)
    return (math.pi / (2.0 * omega_r)) / (1.0 - k / k_r) if omega_r > 0 else math.inf


def wait_time(t_s: float, k: float, k_r: float, omega_r: float) -> float:
    """Wait before the pi pulse that cancels motional dephasing at t_s.

    t' = t_s (1 - k/k_r) - pi/(2 omega_r).  Raises TimingViolationError when
    the storage time is below the protocol minimum (t' would be negative).
    """
    _check_wavevectors(k, k_r)
    if omega_r <= 0:
        raise ValueError("effective Rabi frequency must be positive")
    minimum = min_storage_time(k, k_r, omega_r)
    if t_s < minimum:
        raise TimingViolationError(
            f"storage time {t_s:.6g} s is below the protocol minimum "
            f"{minimum:.6g} s",
            minimum,
        )
    return t_s * (1.0 - k / k_r) - math.pi / (2.0 * omega_r)


@dataclass(frozen=True)
class ProtocolTiming:
    """One resolved pulse schedule: wait t_prime, pi time, storage t_s."""

    t_s: float
    t_prime: float
    t_pi: float
    k: float
    k_r: float


def make_timing(t_s: float, k: float, k_r: float, omega_r: float) -> ProtocolTiming:
    """Resolve the full schedule, also requiring the pulse to end by t_s."""
    t_prime = wait_time(t_s, k, k_r, omega_r)
    t_pi = pi_time(omega_r)
    if t_prime + t_pi > t_s:
        # End-of-pulse bound: t_s >= t_pi * k_r / (2k) once t' is eliminated.
        minimum = t_pi * k_r / (2.0 * k)
        raise TimingViolationError(
            f"pi pulse would end at {t_prime + t_pi:.6g} s, after retrieval at "
            f"{t_s:.6g} s; storage must be at least {minimum:.6g} s",
            minimum,
        )
    return ProtocolTiming(t_s=t_s, t_prime=t_prime, t_pi=t_pi, k=k, k_r=k_r)


def check_matching(timing: ProtocolTiming) -> float:
    """Relative residual of the wavevector matching condition.

    Zero (to float noise) exactly when the schedule satisfies
    k - k_r = -k_r (t_pi/2 + t') / t_s.
    """
    lhs = timing.k - timing.k_r
    rhs = -timing.k_r * (0.5 * timing.t_pi + timing.t_prime) / timing.t_s
    return abs(lhs - rhs) / timing.k_r


@dataclass(frozen=True)
class RamanPulse:
    """A two-photon transfer pulse between the Rydberg levels.

    ``scatter_probability`` is the chance that the pulse scatters the atom
    out of the coherence; it enters retrieval as an amplitude factor
    sqrt(1 - p).
    """

    omega_r: float
    duration: float
    omega3: float = 0.0
    omega4: float = 0.0
    detuning: float = 0.0
    scatter_probability: float = 0.0

    def __post_init__(self):
        if self.omega_r <= 0:
            raise ValueError("effective Rabi frequency must be positive")
        if self.duration < 0:
            raise ValueError("pulse duration must be nonnegative")
        if not (0.0 <= self.scatter_probability < 1.0):
            raise ValueError("scatter probability must lie in [0, 1)")

    @classmethod
    def from_legs(
        cls,
        omega3: float,
        omega4: float,
        detuning: float,
        duration: float | None = None,
        scatter_probability: float = 0.0,
    ) -> "RamanPulse":
        omega_r = effective_rabi(omega3, omega4, detuning)
        return cls(
            omega_r=omega_r,
            duration=duration if duration is not None else pi_time(omega_r),
            omega3=omega3,
            omega4=omega4,
            detuning=detuning,
            scatter_probability=scatter_probability,
        )

    @classmethod
    def from_effective(
        cls,
        omega_r: float,
        duration: float | None = None,
        scatter_probability: float = 0.0,
    ) -> "RamanPulse":
        return cls(
            omega_r=omega_r,
            duration=duration if duration is not None else pi_time(omega_r),
            scatter_probability=scatter_probability,
        )

    @property
    def ac_stark_shift(self) -> float:
        """Differential light shift (omega3^2 - omega4^2)/(4 Delta), rad/s."""
        if self.detuning == 0.0:
            return 0.0
        return (self.omega3**2 - self.omega4**2) / (4.0 * self.detuning)

    @property
    def transfer_amplitude(self) -> float:
        """|sin(omega_r * duration / 2)|, the population-transfer amplitude."""
        return abs(math.sin(0.5 * self.omega_r * self.duration))
