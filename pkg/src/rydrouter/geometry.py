"""Wavevector bookkeeping and retrieval-direction geometry.

Wavevectors are in rad/m, wavelengths cross the API in nm.  Beam directions
live in a right-handed lab frame; the stock arrangement puts the probe along
+z, the coupling along -z, and the Raman pair counter-propagating along the
same axis, which is the configuration the published readout table assumes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import TWO_PI
from .levels import (
    CASE_INTERMEDIATES,
    LevelScheme,
    LevelTable,
    case_wavelengths,
    load_level_table,
)

__all__ = [
    "PUBLISHED_READOUT",
    "BeamGeometry",
    "CaseReadout",
    "InfeasibleGeometryError",
    "RouterChannel",
    "RouterFanout",
    "TriangleSolution",
    "WavevectorSet",
    "build_wavevectors",
    "mismatch_vector",
    "router_fanout",
    "solve_all_cases",
    "solve_retrieval_triangle",
    "wrong_direction_target",
]

_NM = 1e-9

# Published reference values for the seven readout cases:
# case id -> (k_r / 2k, theta1, theta2) with angles in rad.
PUBLISHED_READOUT: dict[int, tuple[float, float, float]] = {
    1: (1.05, 2.58, 0.30),
    2: (1.07, 2.47, 0.35),
    3: (1.19, 2.09, 0.54),
    4: (1.21, 2.04, 0.56),
    5: (2.18, 0.36, 0.20),
    6: (2.24, 0.00, 0.00),
    7: (2.48, 0.00, 0.00),
}


class InfeasibleGeometryError(ValueError):
    """The requested wavevector triangle cannot close."""

    def __init__(self, message: str, defect: float):
        super().__init__(message)
        self.defect = defect


def _unit(vec, what: str = "direction") -> np.ndarray:
    v = np.asarray(vec, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{what} must be a 3-vector, got shape {v.shape}")
    norm = float(np.linalg.norm(v))
    if not math.isfinite(norm) or norm == 0.0:
        raise ValueError(f"{what} must be a finite nonzero vector")
    return v / norm


@dataclass(frozen=True, eq=False)
class BeamGeometry:
    """Unit propagation directions of the four driving beams.

    ``raman_r1`` drives the r1 <-> f leg (the transfer emits into this beam)
    and ``raman_r2`` drives the f <-> r2 leg (absorption).
    """

    probe: np.ndarray
    coupling: np.ndarray
    raman_r1: np.ndarray
    raman_r2: np.ndarray

    def __post_init__(self):
        for name in ("probe", "coupling", "raman_r1", "raman_r2"):
            object.__setattr__(self, name, _unit(getattr(self, name), name))

    @classmethod
    def collinear(cls) -> "BeamGeometry":
        """Stock arrangement: probe +z, coupling -z, Raman pair along +-z."""
        return cls(
            probe=(0.0, 0.0, 1.0),
            coupling=(0.0, 0.0, -1.0),
            raman_r1=(0.0, 0.0, -1.0),
            raman_r2=(0.0, 0.0, 1.0),
        )


@dataclass(frozen=True, eq=False)
class WavevectorSet:
    """Spin-wave wavevectors of one case: stored, Raman kick, redirected."""

    k1_vec: np.ndarray  # after storage (two absorptions)
    kr_vec: np.ndarray  # two-photon Raman momentum transfer
    k2_vec: np.ndarray  # after the transfer, k1_vec + kr_vec

    @property
    def k(self) -> float:
        return float(np.linalg.norm(self.k1_vec))

    @property
    def k_r(self) -> float:
        return float(np.linalg.norm(self.kr_vec))

    @property
    def k2(self) -> float:
        return float(np.linalg.norm(self.k2_vec))

    @property
    def k_prime(self) -> float:
        """Scalar k_r - k; equals |k2_vec| in the collinear arrangement."""
        return self.k_r - self.k

    @property
    def ratio(self) -> float:
        """k_r / (2 k), the published figure of merit."""
        return self.k_r / (2.0 * self.k)


def build_wavevectors(
    scheme: LevelScheme, geometry: BeamGeometry | None = None
) -> WavevectorSet:
    """Assemble the stored and redirected spin-wave wavevectors of a case."""
    if geometry is None:
        geometry = BeamGeometry.collinear()
    k1 = (
        TWO_PI / (scheme.lambda1_nm * _NM) * geometry.probe
        + TWO_PI / (scheme.lambda2_nm * _NM) * geometry.coupling
    )
    # The r1 -> f leg is stimulated emission into its beam, hence the minus.
    kr = (
        TWO_PI / (scheme.lambda4_nm * _NM) * geometry.raman_r2
        - TWO_PI / (scheme.lambda3_nm * _NM) * geometry.raman_r1
    )
    return WavevectorSet(k1_vec=k1, kr_vec=kr, k2_vec=k1 + kr)


@dataclass(frozen=True)
class TriangleSolution:
    """Closure of the redirected spin wave against retrieval and output.

    For a feasible set, ``theta1`` (output photon) and ``theta2`` (retrieval
    beam) are measured from the spin-wave axis and ``closure_residual`` is
    the reconstruction residual in rad/m (~ float noise).  For an infeasible
    set the angles are nan and ``closure_residual`` is the positive magnitude
    defect that prevents closure.
    """

    feasible: bool
    theta1: float
    theta2: float
    closure_residual: float
    k2: float
    k_retrieval: float
    k_output: float


def solve_retrieval_triangle(
    k2_magnitude: float,
    lambda5_nm: float,
    lambda_out_nm: float,
    rel_tol: float = 1e-4,
) -> TriangleSolution:
    """Solve the closed triangle K2 = k_retrieval + k_output for its angles.

    ``rel_tol`` is the relative slack on the triangle inequalities below
    which near-degenerate sets are still solved.
    """
    if k2_magnitude <= 0 or lambda5_nm <= 0 or lambda_out_nm <= 0:
        raise ValueError("triangle magnitudes and wavelengths must be positive")
    a = float(k2_magnitude)
    b = TWO_PI / (lambda5_nm * _NM)
    c = TWO_PI / (lambda_out_nm * _NM)

    defect = max(abs(b - c) - a, a - (b + c))
    if defect > rel_tol * a:
        return TriangleSolution(False, math.nan, math.nan, defect, a, b, c)

    # Once the defect gate has passed, any cosine overshoot is bounded by
    # rel_tol-scale slack, so clamping to the degenerate solution is safe.
    cos1 = (a * a + c * c - b * b) / (2.0 * a * c)
    cos2 = (a * a + b * b - c * c) / (2.0 * a * b)
    theta1 = math.acos(min(1.0, max(-1.0, cos1)))
    theta2 = math.acos(min(1.0, max(-1.0, cos2)))
    residual = math.hypot(
        a - b * math.cos(theta2) - c * math.cos(theta1),
        b * math.sin(theta2) - c * math.sin(theta1),
    )
    return TriangleSolution(True, theta1, theta2, residual, a, b, c)


@dataclass(frozen=True)
class RouterChannel:
    """One fan-out port: a retrieval direction and its output direction."""

    index: int
    azimuth: float
    retrieval_dir: tuple[float, float, float]
    output_dir: tuple[float, float, float]
    closure_residual_rel: float


@dataclass(frozen=True)
class RouterFanout:
    theta1: float
    theta2: float
    n_channels: int
    phase_offset: float
    channels: tuple[RouterChannel, ...]


def _orthonormal_pair(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Deterministic transverse basis: seed with x unless the axis is near x.
    ref = np.array([1.0, 0.0, 0.0])
    if abs(float(np.dot(ref, axis))) > 0.9:
        ref = np.array([0.0, 1.0, 0.0])
    e1 = ref - np.dot(ref, axis) * axis
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(axis, e1)
    return e1, e2


def router_fanout(
    solution: TriangleSolution,
    n_channels: int,
    axis=(0.0, 0.0, 1.0),
    phase_offset: float = 0.0,
) -> RouterFanout:
    """Lay out n retrieval/output direction pairs around the spin-wave axis.

    Every channel keeps the same polar angles; channels differ by azimuth
    only, spaced 2*pi/n starting at ``phase_offset``.  The output of channel
    i sits diametrically opposite its retrieval beam so each pair closes the
    triangle independently.
    """
    if not solution.feasible:
        raise InfeasibleGeometryError(
            "cannot fan out an infeasible retrieval triangle "
            f"(magnitude defect {solution.closure_residual:.6g} rad/m)",
            solution.closure_residual,
        )
    if n_channels < 1:
        raise ValueError(f"need at least one channel, got {n_channels}")
    ax = _unit(axis, "axis")
    e1, e2 = _orthonormal_pair(ax)
    a, b, c = solution.k2, solution.k_retrieval, solution.k_output
    t1, t2 = solution.theta1, solution.theta2

    channels = []
    for i in range(n_channels):
        phi = phase_offset + TWO_PI * i / n_channels
        trans_r = math.cos(phi) * e1 + math.sin(phi) * e2
        r_dir = math.sin(t2) * trans_r + math.cos(t2) * ax
        o_dir = -math.sin(t1) * trans_r + math.cos(t1) * ax
        resid = float(np.linalg.norm(a * ax - b * r_dir - c * o_dir)) / a
        channels.append(
            RouterChannel(
                index=i,
                azimuth=phi,
                retrieval_dir=tuple(float(x) for x in r_dir),
                output_dir=tuple(float(x) for x in o_dir),
                closure_residual_rel=resid,
            )
        )
    return RouterFanout(
        theta1=t1,
        theta2=t2,
        n_channels=n_channels,
        phase_offset=phase_offset,
        channels=tuple(channels),
    )


def mismatch_vector(
    wavevectors: WavevectorSet,
    retrieval_dir,
    lambda5_nm: float,
    output_dir,
    lambda_out_nm: float,
) -> np.ndarray:
    """Residual K2 - k_retrieval - k_output for arbitrary directions, rad/m."""
    r_dir = _unit(retrieval_dir, "retrieval_dir")
    o_dir = _unit(output_dir, "output_dir")
    return (
        wavevectors.k2_vec
        - TWO_PI / (lambda5_nm * _NM) * r_dir
        - TWO_PI / (lambda_out_nm * _NM) * o_dir
    )


def wrong_direction_target(scheme: LevelScheme) -> float:
    """Spin-wave magnitude a reversed retrieval beam would need, rad/m.

    Flipping the retrieval beam while keeping the detector along the output
    line asks for |k_out - k5|, far from the prepared k_r - k.
    """
    return abs(
        TWO_PI / (scheme.lambda1_nm * _NM) - TWO_PI / (scheme.lambda5_nm * _NM)
    )


@dataclass(frozen=True, eq=False)
class CaseReadout:
    """Solved geometry of one readout case."""

    case_id: int
    ratio: float
    feasible: bool
    theta1: float
    theta2: float
    closure_residual: float
    scheme: LevelScheme
    wavevectors: WavevectorSet
    solution: TriangleSolution


def solve_all_cases(
    table: LevelTable | None = None,
    n1: int = 65,
    n2: int = 70,
    geometry: BeamGeometry | None = None,
    lambda5_nm: float | None = None,
    lambda_out_nm: float | None = None,
    rel_tol: float = 1e-4,
) -> list[CaseReadout]:
    """Solve every readout case; custom wavelengths override per-case values."""
    if table is None:
        table = load_level_table()
    rows = []
    for case_id in sorted(CASE_INTERMEDIATES):
        scheme = case_wavelengths(case_id, n1, n2, table)
        ws = build_wavevectors(scheme, geometry)
        sol = solve_retrieval_triangle(
            ws.k2,
            lambda5_nm if lambda5_nm is not None else scheme.lambda5_nm,
            lambda_out_nm if lambda_out_nm is not None else scheme.lambda1_nm,
            rel_tol,
        )
        rows.append(
            CaseReadout(
                case_id=case_id,
                ratio=ws.ratio,
                feasible=sol.feasible,
                theta1=sol.theta1,
                theta2=sol.theta2,
                closure_residual=sol.closure_residual,
                scheme=scheme,
                wavevectors=ws,
                solution=sol,
            )
        )
    return rows
