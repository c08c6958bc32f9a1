"""Quantum channel capacity of the guide as a one-way lossy bosonic channel.

A link of total length L and attenuation rate alpha(lambda) in dB/km
transmits each frequency mode with eta = 10^(-alpha L / 10). The two-way
assisted capacity per mode is

    q2 = -log2(1 - eta)    [qubits per mode]

and the aggregate rate over a band is the frequency integral

    Q2 = integral q2(nu) dnu = integral q2(lambda) (c / lambda^2) dlambda.

q2 diverges logarithmically as the total loss approaches zero, so a
floor on alpha L is enforced explicitly rather than letting the log blow
up silently.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C_LIGHT

from .errors import BandOutOfRange, DivergentCapacity, GridMismatch, RefinementWarning

# Total losses below this many dB are treated as a divergent channel.
MIN_TOTAL_LOSS_DB = 1e-12

# Adjacent q2 samples differing by more than this fraction trigger a
# grid-refinement warning before integration.
REFINEMENT_RATIO = 0.2


@dataclass(frozen=True)
class AttenuationSpectrum:
    """Attenuation components on a common wavelength grid, dB/km."""

    wavelength_m: np.ndarray
    alpha_lens: np.ndarray
    alpha_gas: np.ndarray
    alpha_align: np.ndarray

    def __post_init__(self) -> None:
        wl = np.asarray(self.wavelength_m, dtype=float)
        if wl.ndim != 1 or wl.size < 1:
            raise GridMismatch("wavelength grid must be a non-empty 1-D array")
        if wl.size > 1 and np.any(np.diff(wl) <= 0):
            raise GridMismatch("wavelength grid must be strictly increasing")
        for name in ("alpha_lens", "alpha_gas", "alpha_align"):
            comp = np.asarray(getattr(self, name), dtype=float)
            if comp.shape != wl.shape:
                raise GridMismatch(
                    f"{name} has {comp.shape} points but the grid has {wl.shape}"
                )
            if np.any(comp < 0):
                raise ValueError(f"{name} must be non-negative")

    @property
    def alpha_tot(self) -> np.ndarray:
        return self.alpha_lens + self.alpha_gas + self.alpha_align


def total_attenuation(
    wavelength_m: np.ndarray,
    alpha_lens: np.ndarray,
    alpha_gas: np.ndarray,
    alpha_align: np.ndarray,
) -> AttenuationSpectrum:
    """Bundle component spectra sampled on one grid.

    Raises
    ------
    GridMismatch
        When the arrays disagree in length or the grid is not strictly
        increasing.
    """
    return AttenuationSpectrum(
        wavelength_m=np.asarray(wavelength_m, dtype=float),
        alpha_lens=np.asarray(alpha_lens, dtype=float),
        alpha_gas=np.asarray(alpha_gas, dtype=float),
        alpha_align=np.asarray(alpha_align, dtype=float),
    )


def q2(alpha_db_per_km: float | np.ndarray, total_length_km: float) -> float | np.ndarray:
    """Two-way capacity per mode at the given attenuation and length.

    Raises
    ------
    DivergentCapacity
        When alpha * L falls below MIN_TOTAL_LOSS_DB anywhere.
    """
    if total_length_km < 0:
        raise ValueError("total length must be non-negative")
    total_db = np.asarray(alpha_db_per_km, dtype=float) * total_length_km
    if np.any(total_db < MIN_TOTAL_LOSS_DB):
        raise DivergentCapacity(
            f"total loss {np.min(total_db):.3g} dB is below {MIN_TOTAL_LOSS_DB} dB; "
            "q2 diverges as loss -> 0"
        )
    eta = 10.0 ** (-0.1 * total_db)
    out = -np.log2(1.0 - eta)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class CapacityResult:
    """Band-integrated capacity plus the per-wavelength q2 samples."""

    wavelength_m: np.ndarray
    q2_per_mode: np.ndarray
    band_m: tuple[float, float]
    total_length_km: float
    Q2_qubits_per_s: float

    @property
    def band_hz(self) -> tuple[float, float]:
        """Band edges as frequencies (nu_min, nu_max)."""
        lo, hi = self.band_m
        return (C_LIGHT / hi, C_LIGHT / lo)


def band_capacity(
    spectrum: AttenuationSpectrum,
    total_length_km: float,
    band_m: tuple[float, float],
) -> CapacityResult:
    """Integrate q2 over a wavelength band.

    The integrand q2(lambda) c / lambda^2 is integrated with the
    trapezoid rule on the grid restricted to the band, with linearly
    interpolated q2 at the exact band edges, so splitting a band at a
    grid point is exactly additive.

    Raises
    ------
    BandOutOfRange
        If the band is not contained in the grid span.
    DivergentCapacity
        Propagated from :func:`q2`.
    """
    lo, hi = band_m
    if lo > hi:
        raise BandOutOfRange(f"band lower edge {lo} exceeds upper edge {hi}")
    wl = spectrum.wavelength_m
    if lo < wl[0] or hi > wl[-1]:
        raise BandOutOfRange(
            f"band {lo:g}..{hi:g} m outside grid span {wl[0]:g}..{wl[-1]:g} m"
        )
    q = q2(spectrum.alpha_tot, total_length_km)
    q_arr = np.atleast_1d(q)
    small = np.minimum(q_arr[:-1], q_arr[1:])
    if small.size and np.any(np.abs(np.diff(q_arr)) > REFINEMENT_RATIO * small):
        warnings.warn(
            "adjacent q2 samples differ by more than 20%; refine the wavelength grid",
            RefinementWarning,
            stacklevel=2,
        )
    inside = (wl > lo) & (wl < hi)
    lam = np.concatenate(([lo], wl[inside], [hi]))
    qv = np.concatenate(([np.interp(lo, wl, q_arr)], q_arr[inside], [np.interp(hi, wl, q_arr)]))
    integrand = qv * C_LIGHT / lam**2
    Q2 = float(np.trapezoid(integrand, lam)) if lam.size > 1 else 0.0
    if lo == hi:
        Q2 = 0.0
    return CapacityResult(
        wavelength_m=wl,
        q2_per_mode=q_arr,
        band_m=(float(lo), float(hi)),
        total_length_km=float(total_length_km),
        Q2_qubits_per_s=Q2,
    )
