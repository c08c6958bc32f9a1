"""Analytic misalignment loss bounds for the lens guide.

Random lens errors couple power out of the fundamental mode. For
Gaussian-distributed errors that are small per section, the expected
fractional power loss per section splits into three independent terms:

    longitudinal spacing jitter   l_L0 = (s^2) / (F^2 + s^2),  s = sigma_L0 / L0
    focal-length error            l_f  = (sigma_f / f)^2 / F^2
    transverse lens offset        l_s  = (2 / (F^2 + 1)) 2 pi sigma_s^2 / (lambda f_eq)

sigma_s is a per-axis standard deviation. The transverse term depends on
the bookkeeping frame: against the fixed survey axis (geodesic) the
coefficient is 2 / (F^2 + 1); against a frame re-centered on each lens
(chained) it is 1/2. Their ratio is (F^2 + 1) / 4, so at the confocal
point the chained bound is half the geodesic one.

All three are perturbative: a ValidityWarning is issued when any term
exceeds 1e-2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

from .errors import BoundViolation, UnitError, ValidityWarning
from .optics import EquivalentResonator, GuideGeometry, per_section_loss_to_attenuation

VALIDITY_THRESHOLD = 1e-2


class ReferenceModel(str, Enum):
    """Frame convention for transverse offsets."""

    GEODESIC = "geodesic"
    CHAINED = "chained"


@dataclass(frozen=True)
class MisalignmentSpec:
    """Gaussian error budget of the lens array.

    sigma_s_m is the per-axis transverse offset deviation; with
    ``isotropic=True`` both transverse axes fluctuate with that deviation
    and the transverse loss doubles.
    """

    sigma_s_m: float = 0.0
    sigma_L0_m: float = 0.0
    sigma_f_m: float = 0.0
    reference_model: ReferenceModel = ReferenceModel.GEODESIC
    isotropic: bool = False

    def __post_init__(self) -> None:
        if self.sigma_s_m < 0 or self.sigma_L0_m < 0 or self.sigma_f_m < 0:
            raise UnitError("misalignment deviations must be non-negative")


@dataclass(frozen=True)
class AlignmentLossBreakdown:
    """Per-section loss terms and the resulting attenuation rate."""

    loss_transverse: float
    loss_longitudinal: float
    loss_focal: float
    alpha_db_per_km: float
    reference_model: ReferenceModel

    @property
    def loss_total(self) -> float:
        return self.loss_transverse + self.loss_longitudinal + self.loss_focal


def loss_longitudinal(sigma_L0_m: float, lens_spacing_m: float, magnification: float) -> float:
    """Expected per-section loss from spacing jitter sigma_L0."""
    s2 = (sigma_L0_m / lens_spacing_m) ** 2
    return s2 / (magnification**2 + s2)


def loss_focal(sigma_f_m: float, focal_length_m: float, magnification: float) -> float:
    """Expected per-section loss from focal-length errors sigma_f."""
    return (sigma_f_m / focal_length_m) ** 2 / magnification**2


def loss_transverse(
    sigma_s_m: float,
    wavelength_m: float,
    f_eq_m: float,
    magnification: float,
    reference_model: ReferenceModel = ReferenceModel.GEODESIC,
) -> float:
    """Expected per-section loss from per-axis transverse offsets sigma_s.

    At the confocal point this reduces to 2 sigma_s^2 / w0^2 in the
    geodesic frame (w0^2 = lambda f_eq / pi there).
    """
    base = 2.0 * math.pi * sigma_s_m**2 / (wavelength_m * f_eq_m)
    if reference_model is ReferenceModel.CHAINED:
        return 0.5 * base
    return (2.0 / (magnification**2 + 1.0)) * base


def alignment_attenuation_bound(
    spec: MisalignmentSpec,
    geometry: GuideGeometry,
    resonator: EquivalentResonator,
) -> AlignmentLossBreakdown:
    """Combine the three error terms into an attenuation bound.

    Returns the per-section breakdown plus
    alpha_align = -(10 / L0[km]) log10(1 - l_align).

    Raises
    ------
    BoundViolation
        If the combined per-section loss reaches total extinction
        (1 - l_align <= 0), where the bound has no dB/km reading.
    """
    F = resonator.magnification
    l_s = loss_transverse(
        spec.sigma_s_m, resonator.wavelength_m, resonator.f_eq_m, F, spec.reference_model
    )
    if spec.isotropic:
        l_s *= 2.0
    l_L0 = loss_longitudinal(spec.sigma_L0_m, geometry.lens_spacing_m, F)
    l_f = loss_focal(spec.sigma_f_m, geometry.focal_length_m, F)
    if max(l_s, l_L0, l_f) > VALIDITY_THRESHOLD:
        warnings.warn(
            "a misalignment loss term exceeds 1e-2 per section; the perturbative "
            "bound is unreliable here",
            ValidityWarning,
            stacklevel=2,
        )
    l_align = l_s + l_L0 + l_f
    if 1.0 - l_align <= 0.0:
        raise BoundViolation(
            f"combined misalignment loss {l_align:.3g} per section reaches total extinction"
        )
    alpha = per_section_loss_to_attenuation(l_align, geometry.lens_spacing_m)
    return AlignmentLossBreakdown(
        loss_transverse=l_s,
        loss_longitudinal=l_L0,
        loss_focal=l_f,
        alpha_db_per_km=alpha,
        reference_model=spec.reference_model,
    )


def confocal_alignment_bound(
    spec: MisalignmentSpec,
    geometry: GuideGeometry,
    wavelength_m: float,
) -> AlignmentLossBreakdown:
    """Confocal-form evaluation (f = L0 / 2, F = 1) of the same bound.

    Written in the waist variable w0^2 = lambda f / pi instead of the
    resonator quantities; built from the same component functions so it
    agrees with :func:`alignment_attenuation_bound` to machine precision
    on confocal geometry.
    """
    f = geometry.focal_length_m
    if not math.isclose(f, geometry.lens_spacing_m / 2.0, rel_tol=1e-12):
        raise ValueError("confocal form requires f = L0 / 2")
    w0_sq = wavelength_m * f / math.pi
    l_s = 2.0 * spec.sigma_s_m**2 / w0_sq
    if spec.reference_model is ReferenceModel.CHAINED:
        l_s *= 0.5
    if spec.isotropic:
        l_s *= 2.0
    l_L0 = loss_longitudinal(spec.sigma_L0_m, geometry.lens_spacing_m, 1.0)
    l_f = (spec.sigma_f_m / f) ** 2
    if max(l_s, l_L0, l_f) > VALIDITY_THRESHOLD:
        warnings.warn(
            "a misalignment loss term exceeds 1e-2 per section; the perturbative "
            "bound is unreliable here",
            ValidityWarning,
            stacklevel=2,
        )
    l_align = l_s + l_L0 + l_f
    if 1.0 - l_align <= 0.0:
        raise BoundViolation(
            f"combined misalignment loss {l_align:.3g} per section reaches total extinction"
        )
    alpha = per_section_loss_to_attenuation(l_align, geometry.lens_spacing_m)
    return AlignmentLossBreakdown(
        loss_transverse=l_s,
        loss_longitudinal=l_L0,
        loss_focal=l_f,
        alpha_db_per_km=alpha,
        reference_model=spec.reference_model,
    )
