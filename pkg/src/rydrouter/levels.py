"""Cesium level energies, quantum-defect extrapolation and transition wavelengths.

Energies are vacuum term values in cm^-1 measured from the 6S1/2 ground
state; wavelengths are vacuum values in nm.  The packaged data file carries
the low-lying levels that the readout schemes use directly, plus a two-term
Ritz series so that nS1/2 Rydberg levels can be extrapolated for any
principal quantum number n >= 10.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

__all__ = [
    "CASE_INTERMEDIATES",
    "LevelDataError",
    "LevelScheme",
    "LevelTable",
    "QuantumDefectSeries",
    "case_wavelengths",
    "default_data_path",
    "excitation_wavelengths",
    "load_level_table",
    "rydberg_energy",
    "transition_energy",
    "transition_wavelength",
]

# Rydberg levels are written "65S1/2"; the matching defect series is "nS1/2".
_RYDBERG_LABEL = re.compile(r"^(\d+)([A-Z]\d+/\d+)$")

DEFAULT_N1 = 65
DEFAULT_N2 = 70

# Readout case -> (e, f): e is the low intermediate state used for excitation
# and for the output photon, f is the intermediate of the two-photon Raman
# pair that moves the excitation between the two Rydberg levels.
CASE_INTERMEDIATES: dict[int, tuple[str, str]] = {
    1: ("6P1/2", "7P3/2"),
    2: ("6P1/2", "7P1/2"),
    3: ("6P3/2", "7P3/2"),
    4: ("6P3/2", "7P1/2"),
    5: ("6P1/2", "6P3/2"),
    6: ("6P1/2", "6P1/2"),
    7: ("6P3/2", "6P3/2"),
}


class LevelDataError(ValueError):
    """Level data file missing, malformed or failing a sanity check."""


@dataclass(frozen=True)
class QuantumDefectSeries:
    """Two-term Ritz quantum-defect series for one angular-momentum channel."""

    label: str
    delta0: float
    delta2: float

    def defect(self, n: float) -> float:
        return self.delta0 + self.delta2 / (n - self.delta0) ** 2


@dataclass(frozen=True)
class LevelTable:
    """Parsed level data: tabulated energies plus defect series.

    ``levels`` maps a label such as "6P3/2" to its term value in cm^-1.
    ``series`` maps a series label such as "nS1/2" to its defect parameters.
    """

    levels: dict[str, float]
    ionization_limit: float
    rydberg_constant: float
    series: dict[str, QuantumDefectSeries]
    source: str

    def energy(self, level: str) -> float:
        """Term value of ``level`` in cm^-1.

        Tabulated labels are returned directly; labels of the form "65S1/2"
        are extrapolated through the matching defect series.
        """
        if level in self.levels:
            return self.levels[level]
        m = _RYDBERG_LABEL.match(level)
        if m is not None:
            series_label = "n" + m.group(2)
            if series_label in self.series:
                return rydberg_energy(self, int(m.group(1)), series_label)
        raise LevelDataError(
            f"unknown level {level!r} (data file: {self.source})"
        )


def default_data_path() -> Path:
    return Path(str(resources.files("rydrouter").joinpath("data/cesium_levels.txt")))


def load_level_table(path: str | Path | None = None) -> LevelTable:
    """Parse a level data file.

    Non-comment lines hold either ``label energy`` (a term value in cm^-1)
    or ``label delta0 delta2`` (a quantum-defect series).  The labels
    ``ionization_limit`` and ``rydberg_constant`` set the series limit and
    the Rydberg constant, both in cm^-1.  ``#`` starts a comment.
    """
    src = Path(path) if path is not None else default_data_path()
    if not src.is_file():
        raise LevelDataError(f"level data file not found: {src}")

    levels: dict[str, float] = {}
    series: dict[str, QuantumDefectSeries] = {}
    ionization_limit: float | None = None
    rydberg_constant: float | None = None

    for lineno, raw in enumerate(src.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            values = [float(f) for f in fields[1:]]
        except ValueError:
            raise LevelDataError(
                f"{src}:{lineno}: non-numeric value in {raw.strip()!r}"
            ) from None
        label = fields[0]
        if len(values) == 1:
            if label == "ionization_limit":
                ionization_limit = values[0]
            elif label == "rydberg_constant":
                rydberg_constant = values[0]
            elif label in levels:
                raise LevelDataError(f"{src}:{lineno}: duplicate level {label!r}")
            else:
                levels[label] = values[0]
        elif len(values) == 2:
            if label in series:
                raise LevelDataError(f"{src}:{lineno}: duplicate series {label!r}")
            series[label] = QuantumDefectSeries(label, values[0], values[1])
        else:
            raise LevelDataError(
                f"{src}:{lineno}: expected 2 or 3 fields, got {len(fields)}"
            )

    if ionization_limit is None or ionization_limit <= 0:
        raise LevelDataError(f"{src}: missing or non-positive ionization_limit")
    if rydberg_constant is None or rydberg_constant <= 0:
        raise LevelDataError(f"{src}: missing or non-positive rydberg_constant")
    if not levels:
        raise LevelDataError(f"{src}: no level records")
    for label, energy in levels.items():
        if energy < 0:
            raise LevelDataError(f"{src}: level {label!r} has negative energy")
        if energy >= ionization_limit:
            raise LevelDataError(
                f"{src}: level {label!r} lies at or above the ionization limit"
            )

    return LevelTable(
        levels=levels,
        ionization_limit=ionization_limit,
        rydberg_constant=rydberg_constant,
        series=series,
        source=str(src),
    )


def rydberg_energy(table: LevelTable, n: int, series_label: str = "nS1/2") -> float:
    """Ritz-extrapolated term value of the n-th series member, cm^-1."""
    if series_label not in table.series:
        raise LevelDataError(
            f"unknown defect series {series_label!r} (data file: {table.source})"
        )
    ser = table.series[series_label]
    if n < 10:
        raise ValueError(f"quantum-defect extrapolation needs n >= 10, got {n}")
    if n <= ser.delta0:
        raise ValueError(f"n = {n} does not exceed the series defect {ser.delta0}")
    return table.ionization_limit - table.rydberg_constant / (n - ser.defect(n)) ** 2


def transition_energy(table: LevelTable, lower: str, upper: str) -> float:
    """Energy difference upper - lower in cm^-1; must be positive."""
    de = table.energy(upper) - table.energy(lower)
    if de <= 0:
        raise ValueError(f"{upper!r} does not lie above {lower!r}")
    return de


def transition_wavelength(table: LevelTable, lower: str, upper: str) -> float:
    """Vacuum wavelength of the lower -> upper transition in nm."""
    return 1e7 / transition_energy(table, lower, upper)


@dataclass(frozen=True)
class LevelScheme:
    """The five working wavelengths of one readout case, nm.

    lambda1: ground <-> e (excitation probe and output photon line)
    lambda2: e <-> r1 (coupling)
    lambda3: r1 <-> f and lambda4: f <-> r2 (two-photon Raman pair)
    lambda5: e <-> r2 (retrieval)
    """

    case_id: int
    e_level: str
    f_level: str
    n1: int
    n2: int
    lambda1_nm: float
    lambda2_nm: float
    lambda3_nm: float
    lambda4_nm: float
    lambda5_nm: float


def case_wavelengths(
    case_id: int,
    n1: int = DEFAULT_N1,
    n2: int = DEFAULT_N2,
    table: LevelTable | None = None,
) -> LevelScheme:
    """Resolve the five wavelengths of one readout case."""
    if table is None:
        table = load_level_table()
    if case_id not in CASE_INTERMEDIATES:
        raise ValueError(
            f"unknown case id {case_id}; valid ids: {sorted(CASE_INTERMEDIATES)}"
        )
    if n2 <= n1:
        raise ValueError(f"need n2 > n1, got n1={n1}, n2={n2}")
    e_level, f_level = CASE_INTERMEDIATES[case_id]
    r1 = f"{n1}S1/2"
    r2 = f"{n2}S1/2"
    return LevelScheme(
        case_id=case_id,
        e_level=e_level,
        f_level=f_level,
        n1=n1,
        n2=n2,
        lambda1_nm=transition_wavelength(table, "6S1/2", e_level),
        lambda2_nm=transition_wavelength(table, e_level, r1),
        lambda3_nm=transition_wavelength(table, f_level, r1),
        lambda4_nm=transition_wavelength(table, f_level, r2),
        lambda5_nm=transition_wavelength(table, e_level, r2),
    )


def excitation_wavelengths(table: LevelTable, n1: int = DEFAULT_N1) -> dict[str, float]:
    """The four excitation lines (both intermediate choices), label -> nm."""
    r1 = f"{n1}S1/2"
    out: dict[str, float] = {}
    for e_level in ("6P3/2", "6P1/2"):
        out[f"6S1/2->{e_level}"] = transition_wavelength(table, "6S1/2", e_level)
        out[f"{e_level}->{r1}"] = transition_wavelength(table, e_level, r1)
    return out
