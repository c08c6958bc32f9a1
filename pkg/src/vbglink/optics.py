"""Gaussian-beam optics of a periodic lens guide.

A vacuum beam guide is a line of identical thin lenses (focal length f,
aperture radius R) spaced L0 apart. Each section maps onto one round trip
of an equivalent two-mirror resonator, which fixes the guided
Laguerre-Gauss mode family: waist w0, Rayleigh range f_eq, and the
magnification factor F = f_eq / f0 with f0 = L0 / 2. All lengths are in
meters unless a name says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import InvalidLoss, UnstableGeometry

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GuideGeometry:
    """Periodic lens-array layout.

    Parameters
    ----------
    lens_spacing_m : float
        Distance L0 between neighboring lenses.
    focal_length_m : float
        Thin-lens focal length f. Stability requires f > L0 / 4.
    lens_radius_m : float
        Clear aperture radius R of each lens.
    section_count : int
        Number of L0 sections in the full link.
    """

    lens_spacing_m: float
    focal_length_m: float
    lens_radius_m: float
    section_count: int = 1

    def __post_init__(self) -> None:
        if self.lens_spacing_m <= 0 or self.focal_length_m <= 0 or self.lens_radius_m <= 0:
            raise ValueError("guide geometry lengths must be positive")
        if int(self.section_count) != self.section_count or self.section_count < 1:
            raise ValueError("section_count must be a positive integer")

    @property
    def total_length_m(self) -> float:
        return self.lens_spacing_m * self.section_count

    @property
    def total_length_km(self) -> float:
        return self.total_length_m / 1000.0


@dataclass(frozen=True)
class ModeIndex:
    """Laguerre-Gauss mode labels (radial n >= 0, azimuthal m of either sign)."""

    radial_n: int
    azimuthal_m: int

    def __post_init__(self) -> None:
        if self.radial_n < 0:
            raise ValueError("radial index must be >= 0")

    @property
    def order(self) -> int:
        """Combined transverse order 2n + |m| (sets the Gouy phase factor)."""
        return 2 * self.radial_n + abs(self.azimuthal_m)


@dataclass(frozen=True)
class EquivalentResonator:
    """Mode family of one guide section at a fixed wavelength.

    Fields follow the equivalent-resonator mapping of a lens pair:
    f0 = L0 / 2, f_eq = sqrt(f0 (2 f - f0)), F = f_eq / f0. The Fresnel
    numbers are c = k R^2 / L0 and its equivalent-resonator counterpart
    c_eq = k R^2 / (f0 (1/F + F)); the two agree at the confocal point
    f = f0, where F = 1.
    """

    wavelength_m: float
    f0_m: float
    f_eq_m: float
    magnification: float
    fresnel_c: float
    fresnel_c_eq: float
    waist_w0_m: float
    stable: bool = True

    @property
    def wavenumber(self) -> float:
        return TWO_PI / self.wavelength_m

    @property
    def lens_spacing_m(self) -> float:
        return 2.0 * self.f0_m

    def beam_radius(self, z: float | np.ndarray) -> float | np.ndarray:
        """1/e^2 field radius w(z) measured from the section waist."""
        return self.waist_w0_m * np.sqrt(1.0 + (z / self.f_eq_m) ** 2)

    def gouy(self, z: float | np.ndarray) -> float | np.ndarray:
        """Gouy phase psi(z) = arctan(z / f_eq)."""
        return np.arctan2(z, self.f_eq_m)

    def inverse_curvature(self, z: float | np.ndarray) -> float | np.ndarray:
        """1 / R(z) = z / (z^2 + f_eq^2); finite (zero) at the waist."""
        return z / (z * z + self.f_eq_m**2)


def equivalent_resonator(geometry: GuideGeometry, wavelength_m: float) -> EquivalentResonator:
    """Map one guide section to its equivalent resonator.

    Parameters
    ----------
    geometry : GuideGeometry
    wavelength_m : float
        Vacuum wavelength, meters.

    Returns
    -------
    EquivalentResonator

    Raises
    ------
    UnstableGeometry
        When (1 - L0 / (2 f))^2 >= 1, i.e. f <= L0 / 4 (the f -> infinity
        flat-mirror limit is also excluded by the strict inequality).
    """
    if wavelength_m <= 0:
        raise ValueError("wavelength must be positive")
    L0 = geometry.lens_spacing_m
    f = geometry.focal_length_m
    g = 1.0 - L0 / (2.0 * f)
    if not g * g < 1.0:
        raise UnstableGeometry(
            f"lens spacing {L0} m with focal length {f} m is outside the "
            f"stability region (1 - L0/2f)^2 < 1"
        )
    f0 = L0 / 2.0
    f_eq = math.sqrt(f0 * (2.0 * f - f0))
    F = f_eq / f0
    k = TWO_PI / wavelength_m
    c = k * geometry.lens_radius_m**2 / L0
    c_eq = k * geometry.lens_radius_m**2 / (f0 * (1.0 / F + F))
    w0 = math.sqrt(2.0 * f_eq / k)
    return EquivalentResonator(
        wavelength_m=wavelength_m,
        f0_m=f0,
        f_eq_m=f_eq,
        magnification=F,
        fresnel_c=c,
        fresnel_c_eq=c_eq,
        waist_w0_m=w0,
        stable=True,
    )


def mode_norm(resonator: EquivalentResonator, mode: ModeIndex) -> float:
    """Unit-power normalization constant sqrt(2 n! / (pi (n+|m|)!)) / w0."""
    n, ma = mode.radial_n, abs(mode.azimuthal_m)
    log_ratio = gammaln(n + 1) - gammaln(n + ma + 1)
    return math.sqrt(2.0 / math.pi) * math.exp(0.5 * log_ratio) / resonator.waist_w0_m


def mode_profile(
    resonator: EquivalentResonator,
    mode: ModeIndex,
    r: float | np.ndarray,
    phi: float | np.ndarray,
    z: float | np.ndarray,
) -> complex | np.ndarray:
    """Transverse mode profile at plane z with propagation phases removed.

    This is the full field divided by e^{-ikz} e^{+i(|m|+2n+1) psi(z)}:
    amplitude, wavefront curvature, and the e^{-im phi} winding remain.
    Profiles at a fixed plane form an orthonormal set. Kept separate from
    :func:`mode_field` because k z reaches ~1e10 rad across a section and
    its float64 quantization (~1e-6 rad) would otherwise contaminate
    relative phases between grid points.
    """
    n, m = mode.radial_n, mode.azimuthal_m
    ma = abs(m)
    k = resonator.wavenumber
    w0 = resonator.waist_w0_m
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    z = np.asarray(z, dtype=float)
    w = resonator.beam_radius(z)
    inv_R = resonator.inverse_curvature(z)
    u = 2.0 * r * r / (w * w)
    amp = (
        mode_norm(resonator, mode)
        * (w0 / w)
        * np.exp(-(r * r) / (w * w))
        * (math.sqrt(2.0) * r / w) ** ma
        * eval_genlaguerre(n, ma, u)
    )
    out = amp * np.exp(1j * (-0.5 * k * r * r * inv_R - m * phi))
    if out.ndim == 0:
        return complex(out)
    return out


def mode_field(
    resonator: EquivalentResonator,
    mode: ModeIndex,
    r: float | np.ndarray,
    phi: float | np.ndarray,
    z: float | np.ndarray,
) -> complex | np.ndarray:
    """Complex Laguerre-Gauss field E_n^m(r, phi, z) of the guided family.

    The field is normalized to unit power at every plane,
    integral |E|^2 r dr dphi = 1. The time factor and any overall constant
    phase are dropped. Intended for |z| within one section (|z| <= L0/2
    plus small perturbations); the expression itself is analytic in z.

    Parameters
    ----------
    resonator : EquivalentResonator
    mode : ModeIndex
    r, phi, z : float or array
        Cylindrical coordinates about the section waist; broadcast together.

    Returns
    -------
    complex or ndarray
    """
    z = np.asarray(z, dtype=float)
    k = resonator.wavenumber
    psi = resonator.gouy(z)
    prop = np.exp(1j * (-k * z + (mode.order + 1) * psi))
    out = mode_profile(resonator, mode, r, phi, z) * prop
    if out.ndim == 0:
        return complex(out)
    return out


def per_section_loss_to_attenuation(loss: float | np.ndarray, lens_spacing_m: float) -> float | np.ndarray:
    """Convert a per-section power loss ratio to attenuation in dB/km.

    alpha = -(10 / L0[km]) log10(1 - l). Exact at any loss level, which
    matters once per-lens losses approach the percent range.

    Raises
    ------
    InvalidLoss
        If any loss ratio falls outside [0, 1).
    """
    arr = np.asarray(loss, dtype=float)
    if np.any(arr < 0.0) or np.any(arr >= 1.0):
        raise InvalidLoss(f"per-section loss ratio must lie in [0, 1), got {loss!r}")
    L0_km = lens_spacing_m / 1000.0
    out = -(10.0 / L0_km) * np.log10(1.0 - arr)
    if out.ndim == 0:
        return float(out)
    return out


def attenuation_to_per_section_loss(alpha_db_per_km: float | np.ndarray, lens_spacing_m: float) -> float | np.ndarray:
    """Inverse of :func:`per_section_loss_to_attenuation`."""
    arr = np.asarray(alpha_db_per_km, dtype=float)
    if np.any(arr < 0.0):
        raise InvalidLoss("attenuation must be non-negative")
    L0_km = lens_spacing_m / 1000.0
    out = 1.0 - 10.0 ** (-arr * L0_km / 10.0)
    if out.ndim == 0:
        return float(out)
    return out
