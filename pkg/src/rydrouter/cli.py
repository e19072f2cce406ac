"""Command-line client for the readout service.

Usage examples:

    rydrouter levels
    rydrouter levels --case 7 --format json
    rydrouter levels --transition 6S1/2 65S1/2
    rydrouter angles --compare-published
    rydrouter angles --case 1 --lambda5 400
    rydrouter router --case 4 --channels 6
    rydrouter plan --case 7 --ts 7
    rydrouter simulate --config run.cfg > sweep.csv
    rydrouter simulate --set "sweep = duration" --set "repetitions = 20"
    rydrouter fit --model gaussian sweep.csv
    rydrouter serve --port 8000

Machine output goes to stdout as CSV (default) or JSON (``--format json``);
warnings and errors go to stderr.  By default the service runs in-process;
``--server URL`` targets a remote instance instead.  Exit codes: 0 success,
2 configuration or data errors, 3 infeasible geometry, 4 timing violations,
5 fits that do not converge (including degenerate data).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .client import ServiceClient, ServiceError
from .runconfig import ConfigError, parse_config_file, parse_overrides

__all__ = ["build_parser", "main", "main_entry"]

_EXIT_BY_KIND = {
    "data_error": 2,
    "infeasible_geometry": 3,
    "timing_violation": 4,
}

_DEG_PER_RAD = 180.0 / math.pi


def _err(message: str) -> None:
    print(f"rydrouter: {message}", file=sys.stderr)


def _fmt(value, spec: str | None = None) -> str:
    """One CSV cell; fixed format specs keep output byte-stable."""
    if value is None:
        return "nan"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    if spec is not None:
        return format(value, spec)
    return repr(float(value))


def _print_csv(header: list[str], rows: list[list[str]]) -> None:
    print(",".join(header))
    for row in rows:
        print(",".join(row))


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2))


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_levels(client: ServiceClient, args) -> int:
    if args.transition is not None:
        lower, upper = args.transition
        payload = client.get("/levels/transition", {"lower": lower, "upper": upper})
        if args.format == "json":
            _print_json(payload)
        else:
            _print_csv(
                ["lower", "upper", "delta_e_cm1", "wavelength_nm"],
                [[
                    payload["lower"],
                    payload["upper"],
                    _fmt(payload["delta_e_cm1"], ".5f"),
                    _fmt(payload["wavelength_nm"], ".4f"),
                ]],
            )
        return 0

    if args.case is not None:
        payload = client.get(
            f"/levels/case/{args.case}", {"n1": args.n1, "n2": args.n2}
        )
        if args.format == "json":
            _print_json(payload)
        else:
            _print_csv(
                [
                    "case_id", "e_level", "f_level", "n1", "n2",
                    "lambda1_nm", "lambda2_nm", "lambda3_nm", "lambda4_nm",
                    "lambda5_nm",
                ],
                [[
                    str(payload["case_id"]),
                    payload["e_level"],
                    payload["f_level"],
                    str(payload["n1"]),
                    str(payload["n2"]),
                    *(_fmt(payload[f"lambda{i}_nm"], ".4f") for i in range(1, 6)),
                ]],
            )
        return 0

    payload = client.get("/levels", {"n1": args.n1})
    if args.format == "json":
        _print_json(payload)
        return 0
    rows = [
        ["level", label, _fmt(energy, ".5f")]
        for label, energy in payload["levels"].items()
    ]
    rows.append(
        ["constant", "ionization_limit_cm1", _fmt(payload["ionization_limit_cm1"], ".5f")]
    )
    rows.append(
        ["constant", "rydberg_constant_cm1", _fmt(payload["rydberg_constant_cm1"], ".5f")]
    )
    for label, series in payload["series"].items():
        rows.append(["series_delta0", label, _fmt(series["delta0"], ".4f")])
        rows.append(["series_delta2", label, _fmt(series["delta2"], ".4f")])
    for label, wavelength in payload["excitation_wavelengths_nm"].items():
        rows.append(["transition", label, _fmt(wavelength, ".4f")])
    _print_csv(["kind", "name", "value"], rows)
    return 0


def cmd_angles(client: ServiceClient, args) -> int:
    params: dict = {"n1": args.n1, "n2": args.n2, "compare": args.compare_published}
    if args.case is not None:
        params["case"] = args.case
    if args.lambda5 is not None:
        params["lambda5_nm"] = args.lambda5
    if args.lambda_out is not None:
        params["lambda_out_nm"] = args.lambda_out
    payload = client.get("/angles", params)

    unit = "deg" if args.degrees else "rad"
    scale = _DEG_PER_RAD if args.degrees else 1.0
    angle_keys = (
        "theta1_rad", "theta2_rad",
        "published_theta1_rad", "published_theta2_rad",
        "delta_theta1_rad", "delta_theta2_rad",
    )
    if args.degrees:
        for row in payload["rows"]:
            for key in angle_keys:
                if row.get(key) is not None:
                    row[key.replace("_rad", "_deg")] = row.pop(key) * scale
                elif key in row:
                    row[key.replace("_rad", "_deg")] = row.pop(key)

    if args.format == "json":
        _print_json(payload)
    else:
        header = [
            "case_id", "ratio", f"theta1_{unit}", f"theta2_{unit}",
            "feasible", "closure_residual_rel",
        ]
        if args.compare_published:
            header += [
                "published_ratio", f"published_theta1_{unit}",
                f"published_theta2_{unit}", "delta_ratio",
                f"delta_theta1_{unit}", f"delta_theta2_{unit}",
            ]
        rows = []
        for row in payload["rows"]:
            cells = [
                str(row["case_id"]),
                _fmt(row["ratio"], ".4f"),
                _fmt(row[f"theta1_{unit}"], ".4f"),
                _fmt(row[f"theta2_{unit}"], ".4f"),
                _fmt(row["feasible"]),
                _fmt(row["closure_residual_rel"], ".3e"),
            ]
            if args.compare_published:
                cells += [
                    _fmt(row["published_ratio"], ".2f"),
                    _fmt(row[f"published_theta1_{unit}"], ".2f"),
                    _fmt(row[f"published_theta2_{unit}"], ".2f"),
                    _fmt(row["delta_ratio"], ".4f"),
                    _fmt(row[f"delta_theta1_{unit}"], ".4f"),
                    _fmt(row[f"delta_theta2_{unit}"], ".4f"),
                ]
            rows.append(cells)
        _print_csv(header, rows)

    if payload["any_infeasible"]:
        bad = [str(r["case_id"]) for r in payload["rows"] if not r["feasible"]]
        _err(
            "infeasible geometry for case(s) "
            + ", ".join(bad)
            + ": the wavevector triangle cannot close"
        )
        return 3
    return 0


def cmd_router(client: ServiceClient, args) -> int:
    payload = client.get(
        "/router",
        {
            "case": args.case,
            "channels": args.channels,
            "phase_offset": args.phase_offset,
            "n1": args.n1,
            "n2": args.n2,
        },
    )
    if args.format == "json":
        _print_json(payload)
        return 0
    header = [
        "index", "azimuth_rad",
        "retrieval_x", "retrieval_y", "retrieval_z",
        "output_x", "output_y", "output_z",
        "closure_residual_rel",
    ]
    rows = []
    for ch in payload["channels"]:
        rows.append(
            [
                str(ch["index"]),
                _fmt(ch["azimuth_rad"], ".4f"),
                *(_fmt(x, ".6f") for x in ch["retrieval_dir"]),
                *(_fmt(x, ".6f") for x in ch["output_dir"]),
                _fmt(ch["closure_residual_rel"], ".3e"),
            ]
        )
    _print_csv(header, rows)
    return 0


def cmd_plan(client: ServiceClient, args) -> int:
    params = {
        "case": args.case,
        "ts_us": args.ts,
        "omega3_mhz": args.omega3,
        "omega4_mhz": args.omega4,
        "detuning_mhz": args.detuning,
        "n1": args.n1,
        "n2": args.n2,
    }
    if args.rabi is not None:
        params["rabi_mhz"] = args.rabi
    payload = client.get("/plan", params)
    for note in payload["warnings"]:
        _err(f"warning: {note}")
    if args.format == "json":
        _print_json(payload)
        return 0
    header = [
        "case_id", "omega_r_mhz", "t_pi_us", "t_prime_us", "t_s_us",
        "min_storage_us", "matching_residual", "ac_stark_mhz",
    ]
    row = [
        str(payload["case_id"]),
        _fmt(payload["omega_r_mhz"], ".6f"),
        _fmt(payload["t_pi_us"], ".6f"),
        _fmt(payload["t_prime_us"], ".6f"),
        _fmt(payload["t_s_us"], ".6f"),
        _fmt(payload["min_storage_us"], ".6f"),
        _fmt(payload["matching_residual"], ".3e"),
        _fmt(payload["ac_stark_mhz"], ".6f"),
    ]
    _print_csv(header, [row])
    return 0


def cmd_simulate(client: ServiceClient, args) -> int:
    body: dict = {}
    if args.config is not None:
        body.update(parse_config_file(args.config))
    if args.set:
        body.update(parse_overrides(args.set))
    if args.seed is not None:
        body["seed"] = args.seed
    payload = client.post("/simulate", body)
    if args.format == "json":
        _print_json(payload)
        return 0
    columns = payload["columns"]
    rows = []
    for raw in payload["rows"]:
        cells = []
        for name, value in zip(columns, raw):
            if name in ("t_us", "tr_us"):
                cells.append(_fmt(value, ".6f"))
            elif name == "note":
                cells.append(_fmt(value))
            else:
                cells.append(_fmt(value))
        rows.append(cells)
    _print_csv(columns, rows)
    return 0


def _read_fit_points(path: str) -> list[list[float]]:
    """Read sweep CSV into fit points, skipping flagged/non-finite rows."""
    if path == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ConfigError(f"{path}: need a header row and at least one data row")
    header = [h.strip() for h in lines[0].split(",")]
    t_col = next(
        (i for i, h in enumerate(header) if h.endswith("_us")),
        0,
    )
    y_col = header.index("efficiency") if "efficiency" in header else 1
    s_col = header.index("stderr") if "stderr" in header else None
    points = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in line.split(",")]
        if len(cells) < max(t_col, y_col) + 1:
            raise ConfigError(f"{path}:{lineno}: expected {len(header)} cells")
        try:
            t = float(cells[t_col])
            y = float(cells[y_col])
            sigma = float(cells[s_col]) if s_col is not None else None
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: non-numeric cell") from None
        if not (math.isfinite(t) and math.isfinite(y)):
            continue  # flagged points carry nan efficiency
        if sigma is not None and math.isfinite(sigma):
            points.append([t, y, sigma])
        else:
            points.append([t, y])
    if not points:
        raise ConfigError(f"{path}: no finite data rows")
    widths = {len(p) for p in points}
    if widths == {2, 3}:  # mixed finiteness in stderr: drop sigmas entirely
        points = [p[:2] for p in points]
    return points


def cmd_fit(client: ServiceClient, args) -> int:
    points = _read_fit_points(args.input)
    payload = client.post("/fit", {"model": args.model, "points": points})
    if args.format == "json":
        _print_json(payload)
    else:
        rows = []
        for name, value in payload["params"].items():
            stderr = payload["stderr"].get(name)
            rows.append([name, _fmt(value, ".10g"), _fmt(stderr, ".3e")])
        rows.append(["rss", _fmt(payload["rss"], ".10g"), ""])
        rows.append(["converged", _fmt(payload["converged"]), ""])
        rows.append(["iterations", str(payload["iterations"]), ""])
        rows.append(["degenerate", _fmt(payload["degenerate"]), ""])
        _print_csv(["param", "value", "stderr"], rows)
    if payload["degenerate"] or not payload["converged"]:
        _err(
            "fit did not converge"
            + (" (degenerate data)" if payload["degenerate"] else "")
        )
        return 5
    return 0


def cmd_serve(_: ServiceClient | None, args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydrouter",
        description="Calculators and Monte Carlo for a direction-switchable "
        "Rydberg-ensemble single-photon readout.",
    )
    parser.add_argument(
        "--server",
        default=None,
        metavar="URL",
        help="talk to a remote service instead of running in-process",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--format", choices=("csv", "json"), default="csv",
            help="machine output format (default csv)",
        )
        p.add_argument(
            "--seed", type=int, default=None,
            help="master seed for stochastic commands (accepted everywhere)",
        )

    def add_n1n2(p: argparse.ArgumentParser) -> None:
        p.add_argument("--n1", type=int, default=65, help="lower Rydberg n (default 65)")
        p.add_argument("--n2", type=int, default=70, help="upper Rydberg n (default 70)")

    p_levels = sub.add_parser("levels", help="level energies and scheme wavelengths")
    add_common(p_levels)
    add_n1n2(p_levels)
    p_levels.add_argument("--case", type=int, default=None, help="print one case scheme")
    p_levels.add_argument(
        "--transition", nargs=2, metavar=("LOWER", "UPPER"), default=None,
        help="wavelength of one transition",
    )
    p_levels.set_defaults(handler=cmd_levels)

    p_angles = sub.add_parser("angles", help="emission-direction table")
    add_common(p_angles)
    add_n1n2(p_angles)
    p_angles.add_argument("--case", type=int, default=None, help="restrict to one case")
    p_angles.add_argument(
        "--lambda5", type=float, default=None, metavar="NM",
        help="override the retrieval wavelength",
    )
    p_angles.add_argument(
        "--lambda-out", type=float, default=None, metavar="NM",
        help="override the output wavelength",
    )
    p_angles.add_argument(
        "--compare-published", action="store_true",
        help="append published reference values and deltas",
    )
    p_angles.add_argument(
        "--degrees", action="store_true", help="report angles in degrees"
    )
    p_angles.set_defaults(handler=cmd_angles)

    p_router = sub.add_parser("router", help="multi-port fan-out directions")
    add_common(p_router)
    add_n1n2(p_router)
    p_router.add_argument("--case", type=int, required=True)
    p_router.add_argument("-N", "--channels", type=int, default=6, metavar="N")
    p_router.add_argument("--phase-offset", type=float, default=0.0, metavar="RAD")
    p_router.set_defaults(handler=cmd_router)

    p_plan = sub.add_parser("plan", help="pulse schedule for one storage time")
    add_common(p_plan)
    add_n1n2(p_plan)
    p_plan.add_argument("--case", type=int, default=7)
    p_plan.add_argument("--ts", type=float, default=7.0, metavar="US", help="storage time")
    p_plan.add_argument("--omega3", type=float, default=28.0, metavar="MHZ")
    p_plan.add_argument("--omega4", type=float, default=21.0, metavar="MHZ")
    p_plan.add_argument("--detuning", type=float, default=335.0, metavar="MHZ")
    p_plan.add_argument(
        "--rabi", type=float, default=None, metavar="MHZ",
        help="effective Rabi frequency override",
    )
    p_plan.set_defaults(handler=cmd_plan)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo sweep")
    add_common(p_sim)
    p_sim.add_argument("--config", default=None, metavar="FILE", help="run configuration")
    p_sim.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="override one configuration key (repeatable)",
    )
    p_sim.set_defaults(handler=cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit a model to sweep CSV")
    add_common(p_fit)
    p_fit.add_argument(
        "--model", choices=("gaussian", "exponential", "rabi"), required=True
    )
    p_fit.add_argument("input", help="sweep CSV path, or - for stdin")
    p_fit.set_defaults(handler=cmd_fit)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(handler=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "serve":
        return cmd_serve(None, args)
    try:
        with ServiceClient(args.server) as client:
            return args.handler(client, args)
    except ConfigError as exc:
        _err(str(exc))
        return 2
    except ServiceError as exc:
        _err(f"{exc.kind.replace('_', ' ')}: {exc}")
        return _EXIT_BY_KIND.get(exc.kind, 2)
    except OSError as exc:
        _err(str(exc))
        return 2


def main_entry() -> None:
    raise SystemExit(main())
