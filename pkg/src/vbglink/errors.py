"""Exception and warning types shared across the package.

Two error families matter to callers: configuration problems (bad inputs,
unusable geometry, malformed tables) and numerical domain problems hit
during an otherwise valid computation. The service layer maps the former
to HTTP 400 and the latter to HTTP 422; the CLI turns those into exit
codes 1 and 3.
"""

from __future__ import annotations


class VBGError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(VBGError):
    """Invalid or inconsistent run configuration."""


class UnstableGeometry(ConfigError):
    """Lens spacing / focal length combination outside the stability region."""


class ParseError(ConfigError):
    """Malformed input table (bad header, wrong column count, unreadable field)."""


class UnitError(ConfigError):
    """A physical quantity with an impossible sign or magnitude."""


class TableRangeError(ConfigError):
    """Wavelength lookup outside the span of a tabulated quantity."""


class NumericalError(VBGError):
    """Base class for domain errors inside a computation."""


class InvalidLoss(NumericalError):
    """Per-section loss ratio outside [0, 1)."""


class BoundViolation(NumericalError):
    """Combined misalignment loss at or beyond total extinction."""


class DivergentCapacity(NumericalError):
    """Channel capacity requested at (numerically) zero total loss."""


class BandOutOfRange(NumericalError):
    """Integration band not covered by the wavelength grid."""


class GridMismatch(NumericalError):
    """Component spectra evaluated on different grids."""


class QuadratureError(NumericalError):
    """Quadrature grid too small for the beam it must resolve."""


class ClampWarning(RuntimeWarning):
    """A loss formula evaluated outside its validity range was clamped."""


class ValidityWarning(RuntimeWarning):
    """A perturbative bound evaluated where its small-loss assumption frays."""


class EmptyModelWarning(RuntimeWarning):
    """A gas model with no spectral lines produced an all-zero spectrum."""


class RefinementWarning(RuntimeWarning):
    """Wavelength grid too coarse for the structure of the integrand."""


class TruncationWarning(RuntimeWarning):
    """Mode basis truncation leaks a non-negligible share of the tracked loss."""
