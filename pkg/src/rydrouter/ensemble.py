"""Thermal-ensemble Monte Carlo of storage, redirection and retrieval.

The collective excitation is tracked as one complex amplitude per atom,
split into a phase and a nonnegative weight.  Every beam in the simulated
scheme is collinear with the cloud axis, so only axial coordinates enter the
phases; wavevectors are signed scalars along that axis (rad/m), positions m,
velocities m/s, times s.  Transverse coordinates can be sampled for
diagnostics but do not feed the phase model.

Efficiency is normalized to the lossless limit:
|sum_j w_j exp(i phi_j)|^2 / N^2, so a fully weighted, fully phase-matched
ensemble reads 1 and an uncorrelated one reads ~1/N.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .constants import BOLTZMANN, CS133_MASS
from .protocol import RamanPulse, TimingViolationError, wait_time
from .rng import normal_draws, stream

__all__ = [
    "AtomEnsemble",
    "DecayChannels",
    "SpinWaveState",
    "SweepPoint",
    "ThermalConfig",
    "apply_raman_pi",
    "phase_mismatch",
    "retrieval_efficiency",
    "sample_ensemble",
    "store",
    "sweep_raman_duration",
    "sweep_storage",
]


@dataclass(frozen=True)
class ThermalConfig:
    """Cloud and sampling parameters for one Monte Carlo draw."""

    atom_count: int = 10000
    temperature: float = 66.9e-6  # K
    atom_mass: float = CS133_MASS  # kg
    cloud_sigma_z: float = 10e-6  # m, rms axial extent
    cloud_sigma_xy: float = 4.3e-6  # m, rms transverse extent
    gravity: float = 0.0  # m/s^2 along the beam axis
    seed: int = 0

    def __post_init__(self):
        if self.atom_count < 1:
            raise ValueError("atom count must be at least 1")
        if self.temperature < 0:
            raise ValueError("temperature must be nonnegative")
        if self.atom_mass <= 0:
            raise ValueError("atom mass must be positive")
        if self.cloud_sigma_z < 0 or self.cloud_sigma_xy < 0:
            raise ValueError("cloud sizes must be nonnegative")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    @property
    def sigma_v(self) -> float:
        """One-dimensional thermal velocity spread sqrt(kB T / m), m/s."""
        return math.sqrt(BOLTZMANN * self.temperature / self.atom_mass)


@dataclass(frozen=True, eq=False)
class AtomEnsemble:
    """Sampled initial coordinates plus ballistic propagation."""

    z: np.ndarray  # axial positions at t = 0
    v: np.ndarray  # axial velocities at t = 0
    gravity: float = 0.0
    transverse: np.ndarray | None = None  # (N, 2) diagnostics only

    def __post_init__(self):
        if self.z.shape != self.v.shape or self.z.ndim != 1:
            raise ValueError("positions and velocities must be equal-length 1-d arrays")

    @property
    def atom_count(self) -> int:
        return self.z.size

    def position_at(self, t: float) -> np.ndarray:
        return self.z + self.v * t + 0.5 * self.gravity * t * t

    def velocity_at(self, t: float) -> np.ndarray:
        return self.v + self.gravity * t


def sample_ensemble(
    config: ThermalConfig,
    labels: tuple = (),
    include_transverse: bool = False,
) -> AtomEnsemble:
    """Draw one thermal ensemble from the labeled stream.

    Draw order is fixed: axial positions, then axial velocities, then (only
    when requested) transverse positions.  ``labels`` extends the stream key
    so sweeps can give every (point, repetition) its own substream.
    """
    gen = stream(config.seed, *labels)
    n = config.atom_count
    z = config.cloud_sigma_z * normal_draws(gen, n)
    v = config.sigma_v * normal_draws(gen, n)
    transverse = None
    if include_transverse:
        transverse = config.cloud_sigma_xy * normal_draws(gen, 2 * n).reshape(n, 2)
    return AtomEnsemble(z=z, v=v, gravity=config.gravity, transverse=transverse)


@dataclass(frozen=True, eq=False)
class SpinWaveState:
    """Per-atom phases and weights of the stored excitation.

    ``level`` tags which Rydberg level carries the coherence ("r1" before
    the transfer pulse, "r2" after) and ``elapsed`` is the time up to which
    the schedule has already been applied (end of the pulse after a
    transfer); retrieval may not happen earlier.
    """

    phases: np.ndarray
    weights: np.ndarray
    level: str
    elapsed: float


def store(ensemble: AtomEnsemble, k: float) -> SpinWaveState:
    """Write the excitation in: phases k * z_j(0), unit weights, level r1."""
    return SpinWaveState(
        phases=k * ensemble.z,
        weights=np.ones(ensemble.atom_count),
        level="r1",
        elapsed=0.0,
    )


def apply_raman_pi(
    state: SpinWaveState,
    ensemble: AtomEnsemble,
    pulse: RamanPulse,
    k_r: float,
    t_prime: float,
) -> SpinWaveState:
    """Transfer r1 -> r2 after waiting t_prime, kicking the spin wave by -k_r.

    The motional part of the kick is evaluated at the pulse midpoint
    t_prime + duration/2, and the transfer amplitude |sin(omega_r t_r / 2)|
    scales the weights (1 for an exact pi pulse, together with the
    scattering survival sqrt(1 - p)).
    """
    if state.level != "r1":
        raise ValueError(f"transfer pulse needs the state in r1, found {state.level!r}")
    if t_prime < 0:
        raise ValueError("pulse wait time must be nonnegative")
    t_mid = t_prime + 0.5 * pulse.duration
    amplitude = pulse.transfer_amplitude * math.sqrt(1.0 - pulse.scatter_probability)
    return SpinWaveState(
        phases=state.phases - k_r * ensemble.position_at(t_mid),
        weights=state.weights * amplitude,
        level="r2",
        elapsed=t_prime + pulse.duration,
    )


@dataclass(frozen=True)
class DecayChannels:
    """Optional loss channels applied at retrieval.

    ``tau_r1`` / ``tau_r2`` are level lifetimes in s (None disables one);
    the lifetime of the level the state occupies at retrieval is applied
    over the full storage time.  ``extra_dephasing_rate`` (1/s) models any
    additional exponential efficiency loss.
    """

    tau_r1: float | None = None
    tau_r2: float | None = None
    extra_dephasing_rate: float = 0.0

    def __post_init__(self):
        for name in ("tau_r1", "tau_r2"):
            tau = getattr(self, name)
            if tau is not None and tau <= 0:
                raise ValueError(f"{name} must be positive when set")
        if self.extra_dephasing_rate < 0:
            raise ValueError("extra dephasing rate must be nonnegative")

    def efficiency_factor(self, level: str, t_s: float) -> float:
        tau = self.tau_r1 if level == "r1" else self.tau_r2
        factor = math.exp(-self.extra_dephasing_rate * t_s)
        if tau is not None:
            factor *= math.exp(-t_s / tau)
        return factor


def _sign_resolved(
    state: SpinWaveState, ensemble: AtomEnsemble, k_target: float, t_s: float
) -> tuple[np.ndarray, float]:
    """Residual phases and overlap amplitude for the better of +-k_target."""
    z_t = ensemble.position_at(t_s)
    best_res = None
    best_amp = -1.0
    n = ensemble.atom_count
    for sign in (1.0, -1.0):
        res = state.phases + sign * k_target * z_t
        amp = abs(np.sum(state.weights * np.exp(1j * res))) / n
        if amp > best_amp:
            best_amp = amp
            best_res = res
    return best_res, best_amp


def phase_mismatch(
    state: SpinWaveState, ensemble: AtomEnsemble, k_target: float, t_s: float
) -> np.ndarray:
    """Per-atom phase residual against the target mode at t_s, wrapped.

    The residual sign convention (the target enters as +-k_target * z(t_s))
    is resolved by keeping whichever branch gives the larger collective
    overlap; a perfectly matched schedule returns zeros to float noise.
    """
    if t_s < state.elapsed:
        raise TimingViolationError(
            f"retrieval at {t_s:.6g} s precedes the end of the schedule at "
            f"{state.elapsed:.6g} s",
            state.elapsed,
        )
    res, _ = _sign_resolved(state, ensemble, k_target, t_s)
    return np.angle(np.exp(1j * res))


def retrieval_efficiency(
    state: SpinWaveState,
    ensemble: AtomEnsemble,
    k_target: float,
    t_s: float,
    decay: DecayChannels | None = None,
) -> float:
    """Efficiency of reading the state out into the k_target mode at t_s."""
    if t_s < state.elapsed:
        raise TimingViolationError(
            f"retrieval at {t_s:.6g} s precedes the end of the schedule at "
            f"{state.elapsed:.6g} s",
            state.elapsed,
        )
    _, amp = _sign_resolved(state, ensemble, k_target, t_s)
    eff = amp * amp
    if decay is not None:
        eff *= decay.efficiency_factor(state.level, t_s)
    return float(eff)


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of a sweep: time in s, mean efficiency, standard error."""

    time: float
    efficiency: float
    stderr: float
    note: str = ""


def _mean_stderr(effs: list[float]) -> tuple[float, float]:
    arr = np.asarray(effs)
    mean = float(np.mean(arr))
    stderr = float(np.std(arr, ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return mean, stderr


def _run_points(point_fn, grid, workers: int) -> list[SweepPoint]:
    # Substreams are keyed by point and repetition index, so thread order
    # cannot change any draw; parallel and serial runs agree bit for bit.
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(point_fn, range(len(grid)), grid))
    return [point_fn(i, t) for i, t in enumerate(grid)]


def sweep_storage(
    k: float,
    k_r: float,
    pulse: RamanPulse,
    ts_grid,
    config: ThermalConfig,
    protocol_on: bool = True,
    decay: DecayChannels | None = None,
    repetitions: int = 100,
    workers: int = 1,
    label: str = "storage",
) -> list[SweepPoint]:
    """Mean retrieval efficiency versus storage time.

    With the protocol on, each point schedules the transfer pulse by the
    matching rule and reads out at k_r - k; with it off, the excitation
    decays freely and is read out at k.  Grid points whose storage time
    cannot accommodate the pulse are flagged in ``note`` (efficiency nan)
    instead of failing the sweep.
    """
    grid = [float(t) for t in ts_grid]
    if not grid:
        raise ValueError("storage grid must not be empty")
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")

    def one_point(index: int, t_s: float) -> SweepPoint:
        if protocol_on:
            try:
                t_prime = wait_time(t_s, k, k_r, pulse.omega_r)
            except TimingViolationError:
                return SweepPoint(t_s, math.nan, math.nan, "below_min_storage")
            if t_prime + pulse.duration > t_s:
                return SweepPoint(t_s, math.nan, math.nan, "pulse_overrun")
        effs = []
        for rep in range(repetitions):
            ens = sample_ensemble(config, labels=(label, index, rep))
            state = store(ens, k)
            if protocol_on:
                state = apply_raman_pi(state, ens, pulse, k_r, t_prime)
                k_target = k_r - k
            else:
                k_target = k
            effs.append(retrieval_efficiency(state, ens, k_target, t_s, decay))
        mean, stderr = _mean_stderr(effs)
        return SweepPoint(t_s, mean, stderr)

    return _run_points(one_point, grid, workers)


def sweep_raman_duration(
    k: float,
    k_r: float,
    omega_r: float,
    tr_grid,
    t_s: float,
    config: ThermalConfig,
    decay: DecayChannels | None = None,
    repetitions: int = 100,
    workers: int = 1,
    k_target: float | None = None,
    scatter_probability: float = 0.0,
    label: str = "duration",
) -> list[SweepPoint]:
    """Mean retrieval efficiency versus transfer-pulse duration at fixed t_s.

    The pulse wait keeps the pi-pulse matching rule; only the duration
    varies.  ``k_target`` overrides the readout mode (defaults to the
    redirected k_r - k; pass the reversed-retrieval magnitude to model the
    wrong-direction readout).
    """
    grid = [float(t) for t in tr_grid]
    if not grid:
        raise ValueError("duration grid must not be empty")
    if repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    t_prime = wait_time(t_s, k, k_r, omega_r)
    if t_prime + max(grid) > t_s:
        raise ValueError(
            f"duration grid extends past retrieval: wait {t_prime:.6g} s plus "
            f"max duration {max(grid):.6g} s exceeds t_s = {t_s:.6g} s"
        )
    mode = k_target if k_target is not None else k_r - k

    def one_point(index: int, t_r: float) -> SweepPoint:
        pulse = RamanPulse.from_effective(
            omega_r, duration=t_r, scatter_probability=scatter_probability
        )
        effs = []
        for rep in range(repetitions):
            ens = sample_ensemble(config, labels=(label, index, rep))
            state = store(ens, k)
            state = apply_raman_pi(state, ens, pulse, k_r, t_prime)
            effs.append(retrieval_efficiency(state, ens, mode, t_s, decay))
        mean, stderr = _mean_stderr(effs)
        return SweepPoint(t_r, mean, stderr)

    return _run_points(one_point, grid, workers)
