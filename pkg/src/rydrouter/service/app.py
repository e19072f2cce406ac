"""FastAPI application exposing the calculators and the Monte Carlo.

Error contract: every domain failure carries a machine-readable ``kind`` in
the error detail ("data_error", "infeasible_geometry", "timing_violation")
so clients can map failures without parsing prose.
"""

from __future__ import annotations

import math
import os
import warnings as _warnings

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..constants import TWO_PI
from ..ensemble import (
    DecayChannels,
    ThermalConfig,
    sweep_raman_duration,
    sweep_storage,
)
from ..geometry import (
    PUBLISHED_READOUT,
    InfeasibleGeometryError,
    build_wavevectors,
    router_fanout,
    solve_all_cases,
    solve_retrieval_triangle,
    wrong_direction_target,
)
from ..levels import (
    LevelDataError,
    LevelTable,
    case_wavelengths,
    excitation_wavelengths,
    load_level_table,
    transition_energy,
    transition_wavelength,
)
from ..protocol import (
    RamanPulse,
    TimingViolationError,
    check_matching,
    effective_rabi,
    make_timing,
    min_storage_time,
)
from ..analysis import fit as fit_model
from . import schemas

ENV_DATA_PATH = "RYDROUTER_LEVEL_DATA"

_US = 1e-6
_MHZ_ANGULAR = TWO_PI * 1e6

_table_cache: dict[tuple[str, float], LevelTable] = {}


def _resolve_table() -> LevelTable:
    """Load the level table, honoring the data-file override variable."""
    override = os.environ.get(ENV_DATA_PATH)
    if override:
        try:
            key = (override, os.path.getmtime(override))
        except OSError:
            raise LevelDataError(f"level data file not found: {override}") from None
        if key not in _table_cache:
            if len(_table_cache) > 8:
                _table_cache.clear()
            _table_cache[key] = load_level_table(override)
        return _table_cache[key]
    key = ("<default>", 0.0)
    if key not in _table_cache:
        _table_cache[key] = load_level_table()
    return _table_cache[key]


def _error_response(status: int, kind: str, message: str, **extra) -> JSONResponse:
    detail: dict = {"kind": kind, "message": message}
    detail.update(extra)
    return JSONResponse(status_code=status, content={"detail": detail})


def _none_if_nan(value: float) -> float | None:
    return None if math.isnan(value) else float(value)


def create_app() -> FastAPI:
    app = FastAPI(
        title="rydrouter",
        version=__version__,
        description=(
            "Level, geometry and timing calculators plus a deterministic "
            "thermal Monte Carlo for a direction-switchable Rydberg-ensemble "
            "single-photon readout."
        ),
    )

    @app.exception_handler(LevelDataError)
    async def _level_data_error(_: Request, exc: LevelDataError):
        return _error_response(400, "data_error", str(exc))

    @app.exception_handler(InfeasibleGeometryError)
    async def _infeasible_error(_: Request, exc: InfeasibleGeometryError):
        return _error_response(
            422, "infeasible_geometry", str(exc), defect=exc.defect
        )

    @app.exception_handler(TimingViolationError)
    async def _timing_error(_: Request, exc: TimingViolationError):
        return _error_response(
            422, "timing_violation", str(exc), minimum_us=exc.minimum / _US
        )

    @app.exception_handler(ValueError)
    async def _value_error(_: Request, exc: ValueError):
        return _error_response(422, "data_error", str(exc))

    @app.get("/health", response_model=schemas.HealthOut)
    def health():
        return schemas.HealthOut(status="ok", service="rydrouter", version=__version__)

    @app.get("/levels", response_model=schemas.LevelsOut)
    def levels(n1: int = Query(default=65, ge=10)):
        table = _resolve_table()
        return schemas.LevelsOut(
            source=table.source,
            levels=dict(sorted(table.levels.items(), key=lambda kv: kv[1])),
            ionization_limit_cm1=table.ionization_limit,
            rydberg_constant_cm1=table.rydberg_constant,
            series={
                label: schemas.SeriesOut(delta0=s.delta0, delta2=s.delta2)
                for label, s in sorted(table.series.items())
            },
            excitation_wavelengths_nm=excitation_wavelengths(table, n1),
        )

    @app.get("/levels/case/{case_id}", response_model=schemas.CaseSchemeOut)
    def levels_case(
        case_id: int,
        n1: int = Query(default=65, ge=10),
        n2: int = Query(default=70, ge=10),
    ):
        scheme = case_wavelengths(case_id, n1, n2, _resolve_table())
        return schemas.CaseSchemeOut(
            case_id=scheme.case_id,
            e_level=scheme.e_level,
            f_level=scheme.f_level,
            n1=scheme.n1,
            n2=scheme.n2,
            lambda1_nm=scheme.lambda1_nm,
            lambda2_nm=scheme.lambda2_nm,
            lambda3_nm=scheme.lambda3_nm,
            lambda4_nm=scheme.lambda4_nm,
            lambda5_nm=scheme.lambda5_nm,
        )

    @app.get("/levels/transition", response_model=schemas.TransitionOut)
    def levels_transition(lower: str, upper: str):
        table = _resolve_table()
        return schemas.TransitionOut(
            lower=lower,
            upper=upper,
            delta_e_cm1=transition_energy(table, lower, upper),
            wavelength_nm=transition_wavelength(table, lower, upper),
        )

    @app.get("/angles", response_model=schemas.AnglesOut)
    def angles(
        case: int | None = Query(default=None, ge=1, le=7),
        n1: int = Query(default=65, ge=10),
        n2: int = Query(default=70, ge=10),
        lambda5_nm: float | None = Query(default=None, gt=0),
        lambda_out_nm: float | None = Query(default=None, gt=0),
        compare: bool = False,
    ):
        rows = solve_all_cases(
            table=_resolve_table(),
            n1=n1,
            n2=n2,
            lambda5_nm=lambda5_nm,
            lambda_out_nm=lambda_out_nm,
        )
        if case is not None:
            rows = [r for r in rows if r.case_id == case]
        out_rows = []
        for r in rows:
            row = schemas.AngleRowOut(
                case_id=r.case_id,
                ratio=r.ratio,
                feasible=r.feasible,
                theta1_rad=_none_if_nan(r.theta1),
                theta2_rad=_none_if_nan(r.theta2),
                closure_residual_rel=r.closure_residual / r.wavevectors.k2,
            )
            if compare and r.case_id in PUBLISHED_READOUT:
                pub_ratio, pub_t1, pub_t2 = PUBLISHED_READOUT[r.case_id]
                row.published_ratio = pub_ratio
                row.published_theta1_rad = pub_t1
                row.published_theta2_rad = pub_t2
                row.delta_ratio = r.ratio - pub_ratio
                if r.feasible:
                    row.delta_theta1_rad = r.theta1 - pub_t1
                    row.delta_theta2_rad = r.theta2 - pub_t2
            out_rows.append(row)
        return schemas.AnglesOut(
            n1=n1,
            n2=n2,
            lambda5_nm=lambda5_nm,
            lambda_out_nm=lambda_out_nm,
            rows=out_rows,
            any_infeasible=any(not r.feasible for r in rows),
        )

    @app.get("/router", response_model=schemas.RouterOut)
    def router(
        case: int = Query(ge=1, le=7),
        channels: int = Query(default=6, ge=1, le=4096),
        phase_offset: float = 0.0,
        n1: int = Query(default=65, ge=10),
        n2: int = Query(default=70, ge=10),
    ):
        scheme = case_wavelengths(case, n1, n2, _resolve_table())
        ws = build_wavevectors(scheme)
        solution = solve_retrieval_triangle(
            ws.k2, scheme.lambda5_nm, scheme.lambda1_nm
        )
        fanout = router_fanout(solution, channels, phase_offset=phase_offset)
        return schemas.RouterOut(
            case_id=case,
            n_channels=fanout.n_channels,
            theta1_rad=fanout.theta1,
            theta2_rad=fanout.theta2,
            phase_offset_rad=fanout.phase_offset,
            channels=[
                schemas.RouterChannelOut(
                    index=ch.index,
                    azimuth_rad=ch.azimuth,
                    retrieval_dir=ch.retrieval_dir,
                    output_dir=ch.output_dir,
                    closure_residual_rel=ch.closure_residual_rel,
                )
                for ch in fanout.channels
            ],
        )

    @app.get("/plan", response_model=schemas.PlanOut)
    def plan(
        case: int = Query(default=7, ge=1, le=7),
        ts_us: float = Query(default=7.0, gt=0),
        omega3_mhz: float = Query(default=28.0, ge=0),
        omega4_mhz: float = Query(default=21.0, ge=0),
        detuning_mhz: float = Query(default=335.0, gt=0),
        rabi_mhz: float | None = Query(default=None, gt=0),
        n1: int = Query(default=65, ge=10),
        n2: int = Query(default=70, ge=10),
    ):
        scheme = case_wavelengths(case, n1, n2, _resolve_table())
        ws = build_wavevectors(scheme)
        notes: list[str] = []
        if rabi_mhz is not None:
            omega_r = rabi_mhz * _MHZ_ANGULAR
            ac_stark = 0.0
        else:
            with _warnings.catch_warnings(record=True) as caught:
                _warnings.simplefilter("always")
                pulse = RamanPulse.from_legs(
                    omega3_mhz * _MHZ_ANGULAR,
                    omega4_mhz * _MHZ_ANGULAR,
                    detuning_mhz * _MHZ_ANGULAR,
                )
            notes.extend(str(w.message) for w in caught)
            omega_r = pulse.omega_r
            ac_stark = pulse.ac_stark_shift
            if ac_stark != 0.0:
                notes.append(
                    "differential light shift of the transfer pulse is "
                    f"{ac_stark / _MHZ_ANGULAR:+.4f} MHz; balance the leg "
                    "intensities if the shift matters"
                )
        timing = make_timing(ts_us * _US, ws.k, ws.k_r, omega_r)
        return schemas.PlanOut(
            case_id=case,
            k_rad_per_m=ws.k,
            k_r_rad_per_m=ws.k_r,
            ratio=ws.ratio,
            omega_r_mhz=omega_r / _MHZ_ANGULAR,
            t_s_us=timing.t_s / _US,
            t_prime_us=timing.t_prime / _US,
            t_pi_us=timing.t_pi / _US,
            min_storage_us=min_storage_time(ws.k, ws.k_r, omega_r) / _US,
            matching_residual=check_matching(timing),
            ac_stark_mhz=ac_stark / _MHZ_ANGULAR,
            warnings=notes,
        )

    @app.post("/simulate", response_model=schemas.SimulateOut)
    def simulate(req: schemas.SimulateIn):
        table = _resolve_table()
        scheme = case_wavelengths(req.case, req.n1, req.n2, table)
        ws = build_wavevectors(scheme)
        if req.rabi_mhz is not None:
            omega_r = req.rabi_mhz * _MHZ_ANGULAR
        else:
            with _warnings.catch_warnings():
                _warnings.simplefilter("ignore")
                omega_r = effective_rabi(
                    req.omega3_mhz * _MHZ_ANGULAR,
                    req.omega4_mhz * _MHZ_ANGULAR,
                    req.detuning_mhz * _MHZ_ANGULAR,
                )
        config = ThermalConfig(
            atom_count=req.atom_count,
            temperature=req.temperature_uk * 1e-6,
            cloud_sigma_z=req.cloud_sigma_z_um * 1e-6,
            cloud_sigma_xy=req.cloud_sigma_xy_um * 1e-6,
            gravity=req.gravity_m_s2,
            seed=req.seed,
        )
        decay = DecayChannels(
            tau_r1=req.tau_r1_us * _US if req.tau_r1_us is not None else None,
            tau_r2=req.tau_r2_us * _US if req.tau_r2_us is not None else None,
            extra_dephasing_rate=req.extra_dephasing_rate_hz,
        )

        if req.sweep == "storage":
            if req.retrieval == "wrong":
                raise ValueError(
                    "wrong-direction readout is modeled on the duration sweep; "
                    'use sweep = "duration"'
                )
            if req.ts_max_us < req.ts_min_us:
                raise ValueError("ts_max must not be below ts_min")
            grid = np.linspace(req.ts_min_us, req.ts_max_us, req.ts_points) * _US
            pulse = RamanPulse.from_effective(
                omega_r, scatter_probability=req.scatter_probability
            )
            points = sweep_storage(
                ws.k,
                ws.k_r,
                pulse,
                grid,
                config,
                protocol_on=req.protocol,
                decay=decay,
                repetitions=req.repetitions,
                workers=req.workers,
            )
            columns = ["t_us", "efficiency", "stderr", "note"]
            rows: list[list[schemas.SweepCell]] = [
                [
                    p.time / _US,
                    _none_if_nan(p.efficiency),
                    _none_if_nan(p.stderr),
                    p.note,
                ]
                for p in points
            ]
        else:
            if req.tr_max_us < req.tr_min_us:
                raise ValueError("tr_max must not be below tr_min")
            grid = np.linspace(req.tr_min_us, req.tr_max_us, req.tr_points) * _US
            k_target = (
                wrong_direction_target(scheme) if req.retrieval == "wrong" else None
            )
            points = sweep_raman_duration(
                ws.k,
                ws.k_r,
                omega_r,
                grid,
                req.ts_us * _US,
                config,
                decay=decay,
                repetitions=req.repetitions,
                workers=req.workers,
                k_target=k_target,
                scatter_probability=req.scatter_probability,
            )
            columns = ["tr_us", "efficiency"]
            rows = [[p.time / _US, _none_if_nan(p.efficiency)] for p in points]

        return schemas.SimulateOut(
            sweep=req.sweep,
            case_id=req.case,
            seed=req.seed,
            atom_count=req.atom_count,
            repetitions=req.repetitions,
            columns=columns,
            rows=rows,
        )

    @app.post("/fit", response_model=schemas.FitOut)
    def fit_endpoint(req: schemas.FitIn):
        widths = {len(row) for row in req.points}
        if not widths <= {2, 3}:
            raise ValueError("fit points must be rows of (t, y) or (t, y, sigma)")
        t = np.array([row[0] for row in req.points])
        y = np.array([row[1] for row in req.points])
        sigma = None
        if widths == {3}:
            sigma = np.array([row[2] for row in req.points])
        elif 3 in widths:
            raise ValueError("either every point carries a sigma or none does")
        result = fit_model(req.model, t, y, sigma)
        clean = lambda d: {k: _none_if_nan(v) for k, v in d.items()}  # noqa: E731
        return schemas.FitOut(
            model=result.model,
            params=clean(result.params),
            stderr=clean(result.stderr),
            rss=result.rss,
            converged=result.converged,
            iterations=result.iterations,
            degenerate=result.degenerate,
        )

    return app


app = create_app()
