"""Residual-gas absorption from a line-by-line model.

Each spectral line contributes a Voigt profile with Doppler width set by
the gas temperature and molecular mass and a Lorentz width scaled from
its air-broadened coefficient by total pressure. The absorption
coefficient on a wavenumber grid is

    alpha(nu) [1/cm] = sum_lines x_s n S V(nu - nu0; sigma_D, gamma_L)

with n the total number density in cm^-3 and x_s the species mixing
ratio. Line intensities are taken at their catalog reference temperature;
no intensity rescaling with T is applied (valid near 296 K).
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import atmosphere, c as C_LIGHT, k as K_BOLTZMANN, N_A
from scipy.special import voigt_profile

from .errors import EmptyModelWarning, ParseError, UnitError

LINE_LIST_HEADER = "species,nu0_cm-1,S_cm-1_per_molec_cm-2,gamma_air_cm-1_per_atm,molar_mass_g_mol"

# Lines stop contributing beyond this distance from center (standard
# far-wing cutoff for line-by-line sums).
WING_CUTOFF_CM = 25.0

# 1/cm to dB/km: 1e5 cm per km, 10 log10(e^x) = 10 x / ln 10.
DB_PER_KM_PER_CM = 10.0 * 1e5 / np.log(10.0)


@dataclass(frozen=True)
class SpectralLine:
    """One catalog line.

    Units: nu0 in 1/cm; intensity S in cm^-1 / (molecule cm^-2) at the
    catalog reference temperature; gamma_air in (1/cm)/atm HWHM; molar
    mass in g/mol.
    """

    species: str
    nu0: float
    intensity: float
    gamma_air: float
    molar_mass: float

    def __post_init__(self) -> None:
        if self.intensity < 0 or self.gamma_air < 0:
            raise UnitError(f"line at {self.nu0} 1/cm: S and gamma_air must be non-negative")
        if self.nu0 <= 0 or self.molar_mass <= 0:
            raise UnitError(f"line at {self.nu0} 1/cm: nu0 and molar mass must be positive")


def parse_line_list(text: str) -> list[SpectralLine]:
    """Parse a CSV line list; returns lines sorted by center wavenumber.

    The header must match ``species,nu0_cm-1,S_cm-1_per_molec_cm-2,
    gamma_air_cm-1_per_atm,molar_mass_g_mol`` exactly. Duplicate centers
    are kept (they add).
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty line list") from None
    if ",".join(h.strip() for h in header) != LINE_LIST_HEADER:
        raise ParseError(f"line list header must be '{LINE_LIST_HEADER}'")
    lines: list[SpectralLine] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 5:
            raise ParseError(f"line {lineno}: expected 5 columns, got {len(row)}")
        species = row[0].strip()
        if not species:
            raise ParseError(f"line {lineno}: empty species")
        try:
            nu0, S, gamma, mass = (float(cell) for cell in row[1:])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        lines.append(SpectralLine(species, nu0, S, gamma, mass))
    lines.sort(key=lambda ln: ln.nu0)
    return lines


@dataclass(frozen=True)
class GasModel:
    """Gas state plus its line list.

    mixing_ratios maps species name to mole fraction; species present in
    the line list but absent from the map contribute nothing.
    """

    pressure_pa: float
    temperature_k: float
    mixing_ratios: dict[str, float] = field(default_factory=dict)
    lines: tuple[SpectralLine, ...] = ()

    def __post_init__(self) -> None:
        if self.pressure_pa < 0:
            raise UnitError("pressure must be non-negative")
        if self.temperature_k <= 0:
            raise UnitError("temperature must be positive")
        for sp, x in self.mixing_ratios.items():
            if not 0.0 <= x <= 1.0:
                raise UnitError(f"mixing ratio of {sp} must lie in [0, 1]")

    @property
    def number_density_cm3(self) -> float:
        """Total number density n = P / (k_B T) in cm^-3."""
        return self.pressure_pa / (K_BOLTZMANN * self.temperature_k) * 1e-6


def doppler_sigma(nu0: float, temperature_k: float, molar_mass_g_mol: float) -> float:
    """Gaussian std dev of the Doppler profile, 1/cm."""
    mass_kg = molar_mass_g_mol * 1e-3 / N_A
    return nu0 * np.sqrt(K_BOLTZMANN * temperature_k / mass_kg) / C_LIGHT


def lorentz_gamma(gamma_air: float, pressure_pa: float) -> float:
    """Pressure-broadened Lorentzian HWHM, 1/cm."""
    return gamma_air * pressure_pa / atmosphere


def absorption_coefficient(
    model: GasModel,
    wavenumber_cm: np.ndarray,
    *,
    lorentz_pressure_pa: float | None = None,
) -> np.ndarray:
    """Absorption spectrum in dB/km on a wavenumber grid.

    Parameters
    ----------
    model : GasModel
    wavenumber_cm : ndarray
        Strictly increasing grid, 1/cm.
    lorentz_pressure_pa : float, optional
        Evaluate collisional widths at this pressure instead of the model
        pressure. Holding the shape fixed this way makes the spectrum
        exactly linear in model pressure, which isolates the density
        factor in sensitivity studies.

    Returns
    -------
    ndarray
        dB/km, same shape as the grid.
    """
    grid = np.asarray(wavenumber_cm, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("wavenumber grid must be a non-empty 1-D array")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("wavenumber grid must be strictly increasing")
    alpha_cm = np.zeros_like(grid)
    if not model.lines:
        warnings.warn("gas model has no spectral lines; spectrum is zero", EmptyModelWarning, stacklevel=2)
        return alpha_cm
    if model.pressure_pa == 0.0:
        return alpha_cm
    n_cm3 = model.number_density_cm3
    p_width = model.pressure_pa if lorentz_pressure_pa is None else lorentz_pressure_pa
    unknown: set[str] = set()
    for line in model.lines:
        x = model.mixing_ratios.get(line.species)
        if x is None:
            unknown.add(line.species)
            continue
        if x == 0.0 or line.intensity == 0.0:
            continue
        lo = np.searchsorted(grid, line.nu0 - WING_CUTOFF_CM, side="left")
        hi = np.searchsorted(grid, line.nu0 + WING_CUTOFF_CM, side="right")
        if lo == hi:
            continue
        sigma = doppler_sigma(line.nu0, model.temperature_k, line.molar_mass)
        gamma = lorentz_gamma(line.gamma_air, p_width)
        shape = voigt_profile(grid[lo:hi] - line.nu0, sigma, gamma)
        alpha_cm[lo:hi] += x * n_cm3 * line.intensity * shape
    if unknown:
        warnings.warn(
            f"no mixing ratio given for species {sorted(unknown)}; their lines were skipped",
            EmptyModelWarning,
            stacklevel=2,
        )
    return alpha_cm * DB_PER_KM_PER_CM


def wavelength_to_wavenumber(wavelength_m: np.ndarray) -> np.ndarray:
    """Vacuum wavelength (m) to wavenumber (1/cm)."""
    return 0.01 / np.asarray(wavelength_m, dtype=float)
