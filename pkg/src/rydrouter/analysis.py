"""Damped least-squares fits for the decay and oscillation models.

Three models cover the sweep outputs: ``gaussian`` A + B exp(-(t/tau)^2)
for free motional decay, ``exponential`` A + B exp(-t/tau) for lifetime
decay, ``rabi`` C sin^2(Omega t / 2) for transfer-duration scans.  Fitted
time constants inherit the unit of the time axis; Omega is in rad per time
unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["FitResult", "MODELS", "fit", "initial_guess"]

MODELS = ("gaussian", "exponential", "rabi")

_MAX_ITERATIONS = 200
_STEP_TOL = 1e-8
_DAMPING_START = 1e-3
_DAMPING_UP = 10.0
_DAMPING_DOWN = 3.0
_VARIANCE_FLOOR = 1e-6


@dataclass
class FitResult:
    model: str
    params: dict[str, float]
    stderr: dict[str, float]
    rss: float
    converged: bool
    iterations: int
    degenerate: bool = False


def _eval_gaussian(t, p):
    a, b, tau = p
    return a + b * np.exp(-((t / tau) ** 2))


def _jac_gaussian(t, p):
    _, b, tau = p
    core = np.exp(-((t / tau) ** 2))
    return np.column_stack(
        [np.ones_like(t), core, b * core * 2.0 * t**2 / tau**3]
    )


def _eval_exponential(t, p):
    a, b, tau = p
    return a + b * np.exp(-t / tau)


def _jac_exponential(t, p):
    _, b, tau = p
    core = np.exp(-t / tau)
    return np.column_stack([np.ones_like(t), core, b * core * t / tau**2])


def _eval_rabi(t, p):
    c, omega = p
    return c * np.sin(0.5 * omega * t) ** 2


def _jac_rabi(t, p):
    c, omega = p
    half = 0.5 * omega * t
    return np.column_stack([np.sin(half) ** 2, 0.5 * c * t * np.sin(2.0 * half)])


_MODEL_TABLE = {
    "gaussian": (("offset", "amplitude", "tau"), _eval_gaussian, _jac_gaussian),
    "exponential": (("offset", "amplitude", "tau"), _eval_exponential, _jac_exponential),
    "rabi": (("amplitude", "omega"), _eval_rabi, _jac_rabi),
}

# Parameters that must stay positive during iteration.
_POSITIVE = {"gaussian": (2,), "exponential": (2,), "rabi": (1,)}


def _grid_midpoint(t: np.ndarray) -> float:
    return 0.5 * (float(np.min(t)) + float(np.max(t)))


def initial_guess(model: str, t: np.ndarray, y: np.ndarray) -> dict[str, float]:
    """Starting point for the damped least-squares iteration.

    Decay models: offset = min(y), amplitude = max(y) - min(y), tau = the
    (interpolated) time where y first crosses offset + amplitude/e, falling
    back to the grid midpoint when no crossing exists.  Oscillation model:
    amplitude = max(y), omega = pi / t_peak.
    """
    if model not in _MODEL_TABLE:
        raise ValueError(f"unknown model {model!r}; choose from {MODELS}")
    if model == "rabi":
        c = float(np.max(y))
        t_peak = float(t[int(np.argmax(y))])
        if t_peak <= 0:
            t_peak = _grid_midpoint(t)
        if t_peak <= 0:
            t_peak = 1.0
        return {"amplitude": c, "omega": math.pi / t_peak}

    a = float(np.min(y))
    b = float(np.max(y)) - a
    level = a + b / math.e
    tau = None
    for i in range(len(t) - 1):
        y0, y1 = y[i], y[i + 1]
        if (y0 - level) * (y1 - level) <= 0 and y0 != y1:
            frac = (level - y0) / (y1 - y0)
            tau = float(t[i] + frac * (t[i + 1] - t[i]))
            break
    if tau is None or tau <= 0:
        tau = _grid_midpoint(t)
    if tau <= 0:
        tau = 1.0
    return {"offset": a, "amplitude": b, "tau": tau}


def fit(model: str, t, y, sigma=None) -> FitResult:
    """Fit one model to (t, y) data by damped least squares.

    ``sigma`` holds per-point standard errors; when given, points are
    weighted by 1/max(sigma^2, 1e-6).  Damping grows tenfold on a rejected
    step and shrinks threefold on an accepted one; convergence is a relative
    parameter step below 1e-8 within 200 iterations.
    """
    if model not in _MODEL_TABLE:
        raise ValueError(f"unknown model {model!r}; choose from {MODELS}")
    names, evaluate, jacobian = _MODEL_TABLE[model]

    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("t and y must be equal-length 1-d arrays")
    if t.size < len(names):
        raise ValueError(
            f"{model} needs at least {len(names)} points, got {t.size}"
        )
    if sigma is not None:
        sigma = np.asarray(sigma, dtype=float)
        if sigma.shape != t.shape:
            raise ValueError("sigma must match the data shape")
        root_w = 1.0 / np.sqrt(np.maximum(sigma**2, _VARIANCE_FLOOR))
    else:
        root_w = np.ones_like(t)

    if float(np.ptp(y)) == 0.0:
        # Flat data pins the offset and leaves the shape parameters loose.
        params = dict.fromkeys(names, 0.0)
        if "offset" in params:
            params["offset"] = float(y[0])
            params["tau"] = math.nan
        else:
            params["omega"] = math.nan
        return FitResult(
            model=model,
            params=params,
            stderr=dict.fromkeys(names, 0.0),
            rss=0.0,
            converged=False,
            iterations=0,
            degenerate=True,
        )

    guess = initial_guess(model, t, y)
    p = np.array([guess[name] for name in names])

    def cost_of(vec):
        r = root_w * (evaluate(t, vec) - y)
        return float(r @ r), r

    cost, residual = cost_of(p)
    damping = _DAMPING_START
    converged = False
    iterations = 0

    while iterations < _MAX_ITERATIONS:
        iterations += 1
        jac = root_w[:, None] * jacobian(t, p)
        hess = jac.T @ jac
        grad = jac.T @ residual
        scale = np.maximum(np.diag(hess), 1e-300)
        try:
            step = np.linalg.solve(hess + damping * np.diag(scale), -grad)
        except np.linalg.LinAlgError:
            damping *= _DAMPING_UP
            continue
        rel_step = float(np.max(np.abs(step) / np.maximum(np.abs(p), 1e-300)))
        if rel_step < _STEP_TOL:
            # The parameters cannot move any further: done.
            converged = True
            break
        trial = p + step
        if any(trial[i] <= 0 for i in _POSITIVE[model]):
            damping *= _DAMPING_UP
            continue
        trial_cost, trial_residual = cost_of(trial)
        if trial_cost < cost:
            p, cost, residual = trial, trial_cost, trial_residual
            damping /= _DAMPING_DOWN
        else:
            damping *= _DAMPING_UP
            if damping > 1e15:
                break

    params = {name: float(value) for name, value in zip(names, p)}
    stderr = _parameter_errors(names, root_w, jacobian, t, p, cost)
    return FitResult(
        model=model,
        params=params,
        stderr=stderr,
        rss=cost,
        converged=converged,
        iterations=iterations,
    )


def _parameter_errors(names, root_w, jacobian, t, p, cost) -> dict[str, float]:
    """Local quadratic-approximation standard errors (nonnegative)."""
    dof = t.size - len(names)
    if dof <= 0:
        return dict.fromkeys(names, 0.0)
    jac = root_w[:, None] * jacobian(t, p)
    try:
        cov = np.linalg.pinv(jac.T @ jac) * (cost / dof)
    except np.linalg.LinAlgError:
        return dict.fromkeys(names, 0.0)
    diag = np.clip(np.diag(cov), 0.0, None)
    return {name: float(math.sqrt(d)) for name, d in zip(names, diag)}
